//! File schemas and deterministic JSON output.
//!
//! Floats are written with 17 significant digits. Fields that may be
//! non-finite go through [`lenient_f64`] and are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::currents::{Chain1, GraphChain, Molecule, Piece, PlaneChain, Polyline};
use crate::error::{Error, Result};
use crate::geometry::{NormKind, Point};
use crate::spaces::{Ambient, DistMatrix, Edge, FiniteMetricSpace, MetricGraph};

/// `%.17g`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        strip(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}{:02}", strip(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// Pretty JSON with `%.17g` floats.
struct G17<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for G17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        let s = format_g17(value);
        // keep a float marker so the value re-parses as a float
        if s.contains(['.', 'e']) {
            w.write_all(s.as_bytes())
        } else {
            write!(w, "{s}.0")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `v` as pretty JSON with 17-digit floats and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17(PrettyFormatter::with_indent(b"  ")));
    v.serialize(&mut ser).map_err(|e| Error::invalid(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

/// Parses JSON, reporting `what` together with the line and column of the failure.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("{what}: {e} (line {}, column {})", e.line(), e.column())))
}

/// (De)serializes `f64` fields that may hold `"inf"`, `"-inf"` or `"nan"`.
pub mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::format_g17(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Graph,
    Finite,
    Plane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Vertex {
    Coord(Point),
    Label(String),
}

/// `space.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub kind: SpaceKind,
    #[serde(default)]
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default = "default_ambient")]
    pub ambient: Ambient,
    #[serde(default)]
    pub norm: NormKind,
    /// Distance matrix for `kind = "finite"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
}

fn default_ambient() -> Ambient {
    Ambient::Path
}

/// A loaded space.
#[derive(Debug, Clone)]
pub enum Space {
    Graph(MetricGraph),
    Finite(FiniteMetricSpace),
    Plane(NormKind),
}

impl SpaceFile {
    pub fn load(&self) -> Result<Space> {
        match self.kind {
            SpaceKind::Graph => {
                let coords: Option<Vec<Point>> = self
                    .vertices
                    .iter()
                    .map(|v| match v {
                        Vertex::Coord(p) => Some(*p),
                        Vertex::Label(_) => None,
                    })
                    .collect();
                let coords = coords.filter(|c| !c.is_empty());
                let edges = self.edges.iter().map(|&(u, v, length)| Edge { u, v, length }).collect();
                Ok(Space::Graph(MetricGraph::new(self.vertices.len(), coords, edges, self.ambient)?))
            }
            SpaceKind::Finite => {
                let rows = self.dist.clone().ok_or_else(|| Error::invalid("finite space needs `dist`"))?;
                let labels = self
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        Vertex::Label(s) => s.clone(),
                        Vertex::Coord(_) => i.to_string(),
                    })
                    .collect();
                Ok(Space::Finite(FiniteMetricSpace::new(labels, DistMatrix::from_rows(rows)?)?))
            }
            SpaceKind::Plane => Ok(Space::Plane(self.norm.validate()?)),
        }
    }

    pub fn from_graph(g: &MetricGraph) -> Self {
        let vertices = match g.coords() {
            Some(c) => c.iter().map(|&p| Vertex::Coord(p)).collect(),
            None => (0..g.vertex_count()).map(|i| Vertex::Label(i.to_string())).collect(),
        };
        SpaceFile {
            kind: SpaceKind::Graph,
            vertices,
            edges: g.edges().iter().map(|e| (e.u, e.v, e.length)).collect(),
            ambient: g.ambient(),
            norm: NormKind::L2,
            dist: None,
        }
    }
}

/// One piece of `chain.json`; `length` is recomputed when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec<P> {
    pub start: P,
    pub end: P,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
}

/// `chain.json`: either explicit pieces or a single weighted polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "P: Deserialize<'de>", serialize = "P: Serialize"))]
pub struct ChainFile<P> {
    #[serde(default)]
    pub pieces: Vec<PieceSpec<P>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polyline: Option<Vec<P>>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(w: &f64) -> bool {
    *w == 1.0
}

impl ChainFile<Point> {
    pub fn to_chain(&self, norm: NormKind) -> Result<PlaneChain> {
        let mut c = PlaneChain::zero();
        for p in &self.pieces {
            c.push(PlaneChain::segment(p.start, p.end, p.weight, norm).pieces[0]);
        }
        if let Some(pts) = &self.polyline {
            c = c.plus(&PlaneChain::from_polyline(&Polyline::new(pts.clone())?, self.weight, norm));
        }
        c.check_lengths(norm)?;
        Ok(c)
    }

    /// The polyline form, or the pieces if they chain end to start with unit weight.
    pub fn to_polyline(&self) -> Result<Polyline> {
        if let Some(pts) = &self.polyline {
            return Polyline::new(pts.clone());
        }
        let first = self.pieces.first().ok_or_else(|| Error::invalid("empty chain"))?;
        let mut pts = vec![first.start];
        for p in &self.pieces {
            if p.weight != 1.0 || Some(&p.start) != pts.last() {
                return Err(Error::invalid("pieces do not form a unit-weight polyline"));
            }
            pts.push(p.end);
        }
        Polyline::new(pts)
    }

    pub fn from_chain(c: &PlaneChain) -> Self {
        ChainFile {
            pieces: c.pieces.iter().map(|p| PieceSpec { start: p.start, end: p.end, weight: p.weight, edge: None }).collect(),
            polyline: None,
            weight: 1.0,
        }
    }
}

impl ChainFile<usize> {
    pub fn to_chain(&self, g: &MetricGraph) -> Result<GraphChain> {
        let mut c = GraphChain::zero();
        for p in &self.pieces {
            match p.edge {
                Some(e) => {
                    let edge = g.edges().get(e).ok_or(Error::OffSpace(e))?;
                    c.push(Piece { start: p.start, end: p.end, weight: p.weight, length: edge.length, edge: Some(e) });
                }
                None => c = c.plus(&GraphChain::from_vertex_path(g, &[p.start, p.end], p.weight)?),
            }
        }
        if let Some(path) = &self.polyline {
            c = c.plus(&GraphChain::from_vertex_path(g, path, self.weight)?);
        }
        c.check_on(g)?;
        Ok(c)
    }

    pub fn from_chain(c: &GraphChain) -> Self {
        ChainFile {
            pieces: c.pieces.iter().map(|p| PieceSpec { start: p.start, end: p.end, weight: p.weight, edge: p.edge }).collect(),
            polyline: None,
            weight: 1.0,
        }
    }
}

/// `molecule.json` is the serde form of [`Molecule`]: `{"atoms": [[p, w], …]}`.
pub type MoleculeFile<P> = Molecule<P>;

/// Serde form of a chain with explicit lengths, as emitted in reports.
pub type ChainReport<P> = Chain1<P>;
