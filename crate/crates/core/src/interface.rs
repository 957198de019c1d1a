//! Instance documents, SVG export, structured reports and the command line.
//!
//! Instance files are JSON with every coordinate written as a `"p/q"`
//! string, so documents round-trip exactly. Saving a loaded canonical
//! document reproduces it byte for byte.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::arrangement::{face_puncture_census, face_windings, planarize, ArrangementError};
use crate::bounds::{
    audit_instance, cr_lower_thm1, cr_upper_thm2, crossing_pair_lower, f_lower, f_upper, BoundsError, Check,
};
use crate::constructions::{
    gen_concatenated_loops, gen_disjoint_bouquets, gen_elementary_loops, gen_loose_extremal,
    gen_upperbound_multigraph, gen_winding_loops, ConstructionError, LoopFamily,
};
use crate::geometry::{
    check_general_position, family_crossing_counts, family_crossings, FamilyCounts, GeometryError, Point,
    PolyCurve, Rational,
};
use crate::homotopy::{
    curve_word, validate_nonhomotopic, winding_number, winding_numbers, DrawnMultigraph, Edge, HomotopyError, PuncturedPlane,
    Vertex,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum InterfaceError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("bad rational {value:?} at {field}: {message}")]
    RationalFormat { field: String, value: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> InterfaceError {
    InterfaceError::Schema { field: field.into(), message: message.into() }
}

// ---------------------------------------------------------------------------
// Rationals as strings.

pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(r))
}

pub fn ser_opt_biguint<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Parses `"p/q"` (or a bare integer `"p"`).
pub fn parse_rational(s: &str, field: &str) -> Result<Rational, InterfaceError> {
    let bad = |message: &str| InterfaceError::RationalFormat {
        field: field.into(),
        value: s.into(),
        message: message.into(),
    };
    let int = |t: &str, signed: bool| -> Option<BigInt> {
        let digits = if signed { t.strip_prefix('-').unwrap_or(t) } else { t };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        t.parse().ok()
    };
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let num = int(p, true).ok_or_else(|| bad("numerator is not an integer"))?;
    let den = int(q, false).ok_or_else(|| bad("denominator is not a non-negative integer"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn point_to_raw(p: &Point) -> [String; 2] {
    [rational_to_string(&p.x), rational_to_string(&p.y)]
}

fn point_from_raw(raw: &[String; 2], field: &str) -> Result<Point, InterfaceError> {
    Ok(Point::new(parse_rational(&raw[0], &format!("{field}[0]"))?, parse_rational(&raw[1], &format!("{field}[1]"))?))
}

// ---------------------------------------------------------------------------
// Documents.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Loops(LoopFamily),
    Multigraph(DrawnMultigraph),
}

impl Instance {
    pub fn curves(&self) -> Vec<PolyCurve> {
        match self {
            Instance::Loops(f) => f.curves.clone(),
            Instance::Multigraph(g) => g.curves(),
        }
    }

    /// Punctures for loop families, vertices for multigraphs.
    pub fn marked_points(&self) -> Vec<Point> {
        match self {
            Instance::Loops(f) => f.plane.punctures().to_vec(),
            Instance::Multigraph(g) => g.vertex_points(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Loops(_) => "loops",
            Instance::Multigraph(_) => "multigraph",
        }
    }
}

/// An instance plus the parameters it was generated from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub instance: Instance,
    pub params: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    version: u32,
    kind: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    punctures: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basepoint: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    curves: Option<Vec<RawCurve>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<RawCurve>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    endpoints: Option<[String; 2]>,
    closed: bool,
    points: Vec<[String; 2]>,
}

fn raw_curve(id: usize, c: &PolyCurve, endpoints: Option<[String; 2]>) -> RawCurve {
    RawCurve { id, endpoints, closed: c.is_closed(), points: c.vertices().iter().map(point_to_raw).collect() }
}

fn curve_from_raw(raw: &RawCurve, field: &str) -> Result<PolyCurve, InterfaceError> {
    let pts = raw
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| point_from_raw(p, &format!("{field}.points[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    PolyCurve::new(pts, raw.closed).map_err(|e| schema(field, e.to_string()))
}

/// Canonical serialization: fixed field order, pretty-printed, trailing
/// newline.
pub fn to_canonical_string(doc: &Document) -> String {
    let raw = match &doc.instance {
        Instance::Loops(f) => RawDocument {
            version: FORMAT_VERSION,
            kind: "loops".into(),
            params: doc.params.clone(),
            punctures: Some(f.plane.punctures().iter().map(point_to_raw).collect()),
            basepoint: Some(point_to_raw(f.plane.basepoint())),
            curves: Some(f.curves.iter().enumerate().map(|(i, c)| raw_curve(i, c, None)).collect()),
            vertices: None,
            labels: None,
            edges: None,
        },
        Instance::Multigraph(g) => RawDocument {
            version: FORMAT_VERSION,
            kind: "multigraph".into(),
            params: doc.params.clone(),
            punctures: None,
            basepoint: None,
            curves: None,
            vertices: Some(g.vertices().iter().map(|v| point_to_raw(&v.point)).collect()),
            labels: Some(g.vertices().iter().map(|v| v.label.clone()).collect()),
            edges: Some(
                g.edges()
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        let ends = [g.vertices()[e.u].label.clone(), g.vertices()[e.v].label.clone()];
                        raw_curve(i, &e.curve, Some(ends))
                    })
                    .collect(),
            ),
        },
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("documents serialize");
    s.push('\n');
    s
}

pub fn from_str(text: &str) -> Result<Document, InterfaceError> {
    let value: Value = serde_json::from_str(text).map_err(|e| InterfaceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let raw: RawDocument = serde_json::from_value(value).map_err(|e| schema("document", e.to_string()))?;
    if raw.version != FORMAT_VERSION {
        return Err(schema("version", format!("unsupported version {}", raw.version)));
    }
    let check_ids = |curves: &[RawCurve], name: &str| -> Result<(), InterfaceError> {
        for (i, c) in curves.iter().enumerate() {
            if c.id != i {
                return Err(schema(format!("{name}[{i}].id"), format!("expected id {i}, found {}", c.id)));
            }
        }
        Ok(())
    };
    let instance = match raw.kind.as_str() {
        "loops" => {
            if raw.vertices.is_some() || raw.edges.is_some() || raw.labels.is_some() {
                return Err(schema("kind", "a loop family has no vertices, labels or edges"));
            }
            let punctures = raw.punctures.ok_or_else(|| schema("punctures", "missing"))?;
            let basepoint = raw.basepoint.ok_or_else(|| schema("basepoint", "missing"))?;
            let curves = raw.curves.ok_or_else(|| schema("curves", "missing"))?;
            check_ids(&curves, "curves")?;
            let punctures = punctures
                .iter()
                .enumerate()
                .map(|(i, p)| point_from_raw(p, &format!("punctures[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let basepoint = point_from_raw(&basepoint, "basepoint")?;
            let plane = PuncturedPlane::new(punctures.clone(), basepoint.clone())
                .map_err(|e| schema("punctures", e.to_string()))?;
            if plane.punctures() != punctures.as_slice() {
                return Err(schema("punctures", "punctures must be sorted by x, then y"));
            }
            let mut out = Vec::with_capacity(curves.len());
            for (i, rc) in curves.iter().enumerate() {
                let field = format!("curves[{i}]");
                if rc.endpoints.is_some() {
                    return Err(schema(format!("{field}.endpoints"), "loop curves have no endpoints"));
                }
                let c = curve_from_raw(rc, &field)?;
                if !c.is_closed() || c.start() != &basepoint {
                    return Err(schema(field, "loops must be closed curves starting at the basepoint"));
                }
                out.push(c);
            }
            Instance::Loops(LoopFamily { plane, curves: out })
        }
        "multigraph" => {
            if raw.punctures.is_some() || raw.basepoint.is_some() || raw.curves.is_some() {
                return Err(schema("kind", "a multigraph has no punctures, basepoint or curves"));
            }
            let points = raw.vertices.ok_or_else(|| schema("vertices", "missing"))?;
            let labels = raw.labels.unwrap_or_else(|| (0..points.len()).map(|i| format!("v{i}")).collect());
            if labels.len() != points.len() {
                return Err(schema("labels", "one label per vertex"));
            }
            let edges = raw.edges.ok_or_else(|| schema("edges", "missing"))?;
            check_ids(&edges, "edges")?;
            let vertices = points
                .iter()
                .zip(&labels)
                .enumerate()
                .map(|(i, (p, l))| Ok(Vertex { label: l.clone(), point: point_from_raw(p, &format!("vertices[{i}]"))? }))
                .collect::<Result<Vec<_>, InterfaceError>>()?;
            let mut out = Vec::with_capacity(edges.len());
            for (i, re) in edges.iter().enumerate() {
                let field = format!("edges[{i}]");
                let ends = re.endpoints.as_ref().ok_or_else(|| schema(format!("{field}.endpoints"), "missing"))?;
                let find = |l: &String| {
                    labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| schema(format!("{field}.endpoints"), format!("unknown vertex label {l:?}")))
                };
                let (u, v) = (find(&ends[0])?, find(&ends[1])?);
                out.push(Edge { u, v, curve: curve_from_raw(re, &field)? });
            }
            Instance::Multigraph(DrawnMultigraph::new(vertices, out).map_err(|e| schema("edges", e.to_string()))?)
        }
        other => return Err(schema("kind", format!("unknown kind {other:?}"))),
    };
    Ok(Document { instance, params: raw.params })
}

pub fn load(path: &Path) -> Result<Document, InterfaceError> {
    from_str(&std::fs::read_to_string(path)?)
}

pub fn save(doc: &Document, path: &Path) -> Result<(), InterfaceError> {
    std::fs::write(path, to_canonical_string(doc))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// SVG.

#[derive(Clone, Debug)]
pub struct SvgOptions {
    /// Width of the drawing in pixels.
    pub width: f64,
    pub show_crossings: bool,
    /// Embedded verbatim in a comment.
    pub metadata: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { width: 800.0, show_crossings: false, metadata: None }
    }
}

/// SVG's y axis points down; avoids printing `-0`.
fn flip(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        -y
    }
}

fn curve_color(i: usize, n: usize) -> String {
    let hue = (i as f64 * 360.0 / n.max(1) as f64).round() as i64 % 360;
    format!("hsl({hue},70%,40%)")
}

pub fn svg_string(instance: &Instance, options: &SvgOptions) -> Result<String, InterfaceError> {
    let curves = instance.curves();
    let marks = instance.marked_points();
    let mut pts: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.vertices().iter().map(Point::to_f64)).collect();
    pts.extend(marks.iter().map(Point::to_f64));
    if let Instance::Loops(f) = instance {
        pts.push(f.plane.basepoint().to_f64());
    }
    let (mut x0, mut y0, mut x1, mut y1) = (-1.0f64, -1.0f64, 1.0f64, 1.0f64);
    if let Some(&(x, y)) = pts.first() {
        (x0, y0, x1, y1) = (x, y, x, y);
    }
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let margin = span * 0.05;
    let (vx, vy, vw, vh) = (x0 - margin, -y1 - margin, x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let height = options.width * vh / vw;
    let stroke = span / 400.0;
    let dot = span / 150.0;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}">"#,
        options.width, height
    )
    .unwrap();
    if let Some(meta) = &options.metadata {
        writeln!(s, "<!-- {} -->", meta.replace("--", "- -")).unwrap();
    }
    writeln!(s, r#"<rect x="{vx:.6}" y="{vy:.6}" width="{vw:.6}" height="{vh:.6}" fill="white"/>"#).unwrap();
    for (i, c) in curves.iter().enumerate() {
        let mut d = String::new();
        for (j, p) in c.vertices().iter().enumerate() {
            let (x, y) = p.to_f64();
            write!(d, "{}{x:.6} {:.6} ", if j == 0 { "M" } else { "L" }, flip(y)).unwrap();
        }
        if c.is_closed() {
            d.push('Z');
        }
        writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="{stroke:.6}" stroke-linejoin="round"/>"#,
            d.trim_end(),
            curve_color(i, curves.len())
        )
        .unwrap();
    }
    if options.show_crossings {
        for r in family_crossings(&curves)? {
            let (x, y) = r.location.to_f64();
            writeln!(s, r#"<circle cx="{x:.6}" cy="{:.6}" r="{:.6}" fill="gray"/>"#, flip(y), dot * 0.6).unwrap();
        }
    }
    for p in &marks {
        let (x, y) = p.to_f64();
        writeln!(s, r#"<circle cx="{x:.6}" cy="{:.6}" r="{dot:.6}" fill="black"/>"#, flip(y)).unwrap();
    }
    if let Instance::Loops(f) = instance {
        let (x, y) = f.plane.basepoint().to_f64();
        writeln!(s, r#"<circle cx="{x:.6}" cy="{:.6}" r="{dot:.6}" fill="red"/>"#, flip(y)).unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    Ok(s)
}

pub fn export_svg(instance: &Instance, path: &Path, options: &SvgOptions) -> Result<(), InterfaceError> {
    std::fs::write(path, svg_string(instance, options)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Reports.

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cr: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub params: Map<String, Value>,
    pub checks: Vec<Check>,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

impl Report {
    fn new(command: &str, params: Map<String, Value>) -> Report {
        Report { command: command.into(), params, checks: Vec::new(), stats: Stats::default(), details: None, generated_at: None }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, name: &str, expected: impl ToString, measured: impl ToString, pass: bool) {
        self.checks.push(Check::new(name, expected.to_string(), measured.to_string(), pass));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn instance_stats(instance: &Instance, counts: &FamilyCounts) -> Stats {
    let (n, m) = match instance {
        Instance::Loops(f) => (f.plane.len(), f.len()),
        Instance::Multigraph(g) => (g.vertex_count(), g.edge_count()),
    };
    Stats { n: Some(n), m: Some(m), cr: Some(counts.total()), crossing_pairs: Some(counts.crossing_pairs()), words: None }
}

fn general_position_check(report: &mut Report, instance: &Instance) {
    let violations = match instance {
        Instance::Loops(f) => check_general_position(&f.curves, &f.plane),
        Instance::Multigraph(g) => g.general_position_violations(),
    };
    let measured = match violations.first() {
        None => "0 violations".to_string(),
        Some(v) => format!("{} violations, first: {v}", violations.len()),
    };
    report.check("general position", "0 violations", measured, violations.is_empty());
}

fn loop_words(f: &LoopFamily) -> Result<Vec<String>, InterfaceError> {
    Ok(f.curves.iter().map(|c| curve_word(c, &f.plane).map(|w| w.to_string())).collect::<Result<_, _>>()?)
}

fn distinct_count<T: std::hash::Hash + Eq>(items: &[T]) -> usize {
    items.iter().collect::<HashSet<_>>().len()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Generates an instance and checks the properties its construction
/// promises.
pub fn generate(kind: &str, p: &GenParams) -> Result<(Document, Report), InterfaceError> {
    let need = |v: Option<usize>, name: &str| v.ok_or_else(|| InterfaceError::Usage(format!("gen {kind} needs --{name}")));
    let mut params = Map::new();
    params.insert("generator".into(), json!(kind));
    let instance = match kind {
        "winding" => {
            let k = need(p.k, "k")?;
            params.insert("k".into(), json!(k));
            Instance::Loops(gen_winding_loops(k as u64)?)
        }
        "elementary" => {
            let (n, k) = (need(p.n, "n")?, need(p.k, "k")?);
            params.insert("n".into(), json!(n));
            params.insert("k".into(), json!(k));
            Instance::Loops(gen_elementary_loops(n, k)?)
        }
        "concat" => {
            let (n, j) = (need(p.n, "n")?, need(p.j, "j")?);
            params.insert("n".into(), json!(n));
            params.insert("j".into(), json!(j));
            Instance::Loops(gen_concatenated_loops(n, j)?)
        }
        "multigraph" => {
            let (n, m) = (need(p.n, "n")?, need(p.m, "m")?);
            params.insert("n".into(), json!(n));
            params.insert("m".into(), json!(m));
            Instance::Multigraph(gen_upperbound_multigraph(n, m)?)
        }
        "loose" => {
            let n = need(p.n, "n")?;
            params.insert("n".into(), json!(n));
            Instance::Multigraph(gen_loose_extremal(n)?)
        }
        "bouquets" => {
            let (n, m) = (need(p.n, "n")?, need(p.m, "m")?);
            params.insert("n".into(), json!(n));
            params.insert("m".into(), json!(m));
            Instance::Multigraph(gen_disjoint_bouquets(n, m)?)
        }
        other => return Err(InterfaceError::Usage(format!("unknown generator {other:?}"))),
    };
    let mut report = Report::new(&format!("gen {kind}"), params.clone());
    let counts = family_crossing_counts(&instance.curves())?;
    report.stats = instance_stats(&instance, &counts);
    general_position_check(&mut report, &instance);
    let get = |key: &str| params.get(key).and_then(Value::as_u64).unwrap_or(0) as usize;
    match &instance {
        Instance::Loops(f) => {
            let words = loop_words(f)?;
            report.check("pairwise distinct words", f.len(), distinct_count(&words), distinct_count(&words) == f.len());
            match kind {
                "winding" => {
                    let k = get("k");
                    let centre = &f.plane.punctures()[0];
                    let w: Vec<i64> =
                        f.curves.iter().map(|c| winding_number(c, centre)).collect::<Result<_, _>>()?;
                    report.check("family size = 2k+1", 2 * k + 1, f.len(), f.len() == 2 * k + 1);
                    report.check("distinct windings", f.len(), distinct_count(&w), distinct_count(&w) == f.len());
                    report.check("self-crossings < k", format!("< {k}"), counts.max_self(), counts.max_self() < k);
                    report.check("pairwise crossings = 0", 0, counts.max_pair(), counts.max_pair() == 0);
                }
                "elementary" => {
                    let (n, k) = (get("n"), get("k"));
                    let size: usize = 2 * (0..k).map(|j| binomial(n - 1, j)).sum::<usize>();
                    report.check("family size = 2 sum C(n-1,j)", size, f.len(), f.len() == size);
                    report.check("pairwise crossings <= k-1", k - 1, counts.max_pair(), counts.max_pair() < k);
                }
                _ => {
                    let (n, j) = (get("n"), get("j"));
                    let size = 1usize << (j * (n - 1));
                    report.check("family size = 2^(j(n-1))", size, f.len(), f.len() == size);
                    report.check("pairwise crossings <= j^2 n", j * j * n, counts.max_pair(), counts.max_pair() <= j * j * n);
                    report.check("self-crossings <= j^2 n", j * j * n, counts.max_self(), counts.max_self() <= j * j * n);
                }
            }
            report.stats.words = Some(words);
        }
        Instance::Multigraph(g) => {
            let v = validate_nonhomotopic(g)?;
            report.check(
                "non-homotopic",
                "no trivial loops or homotopic pairs",
                format!("{} trivial, {} pairs", v.trivial_loops.len(), v.homotopic_pairs.len()),
                v.is_empty(),
            );
            match kind {
                "multigraph" => {
                    report.check("edge count = m", get("m"), g.edge_count(), g.edge_count() == get("m"));
                    if v.is_empty() {
                        report.checks.extend(audit_instance(g, true)?.checks);
                    }
                }
                "loose" => {
                    let n = get("n");
                    let want = (3 * n).saturating_sub(3);
                    let inter: usize = counts.pairs().map(|(_, _, c)| c).sum();
                    report.check("edge count = max(0, 3n-3)", want, g.edge_count(), g.edge_count() == want);
                    report.check("crossings between distinct edges", 0, inter, inter == 0);
                }
                _ => {
                    let (n, m) = (get("n"), get("m"));
                    let pairs = counts.crossing_pairs();
                    report.check("edge count = m", m, g.edge_count(), g.edge_count() == m);
                    report.check("crossing pairs < m^2/n", format!("< {}/{n}", m * m), pairs, pairs * n < m * m);
                }
            }
        }
    }
    Ok((Document { instance, params }, report))
}

pub fn analyze(what: &str, doc: &Document) -> Result<Report, InterfaceError> {
    let mut report = Report::new(&format!("analyze {what}"), doc.params.clone());
    let curves = doc.instance.curves();
    let counts = family_crossing_counts(&curves)?;
    report.stats = instance_stats(&doc.instance, &counts);
    general_position_check(&mut report, &doc.instance);
    match what {
        "crossings" => {
            let pairs: Vec<Value> =
                counts.pairs().filter(|p| p.2 > 0).map(|(i, j, c)| json!([i, j, c])).collect();
            report.details = Some(json!({
                "self_counts": counts.self_counts,
                "max_pair": counts.max_pair(),
                "max_self": counts.max_self(),
                "pairs": pairs,
            }));
        }
        "words" => {
            report.stats.words = Some(match &doc.instance {
                Instance::Loops(f) => loop_words(f)?,
                Instance::Multigraph(g) => {
                    (0..g.edge_count()).map(|e| g.edge_word(e).map(|w| w.to_string())).collect::<Result<_, _>>()?
                }
            });
        }
        "arrangement" => {
            let arr = planarize(&curves)?;
            let euler = arr.component_euler();
            report.check("V - E + F = 2 per component", "all", format!("{euler:?}"), arr.euler_holds());
            let mut agree = true;
            for (ci, c) in curves.iter().enumerate().filter(|(_, c)| c.is_closed()) {
                let samples: Vec<Point> = arr.faces.iter().map(|f| f.sample.clone()).collect();
                agree &= winding_numbers(c, &samples)? == face_windings(&arr, ci);
            }
            report.check("face windings agree with ray windings", true, agree, agree);
            let mut details = json!({
                "nodes": arr.nodes.len(),
                "fragments": arr.fragments.len(),
                "faces": arr.faces.len(),
                "components": arr.component_count(),
            });
            if let Instance::Loops(f) = &doc.instance {
                let census = face_puncture_census(&arr, &f.plane)?;
                details["balanced"] = json!(census.balanced());
                details["census"] = json!(census.faces.iter().filter(|c| !c.is_empty()).collect::<Vec<_>>());
            }
            report.details = Some(details);
        }
        other => return Err(InterfaceError::Usage(format!("unknown analysis {other:?}"))),
    }
    Ok(report)
}

pub fn verify(what: &str, doc: &Document, construction: bool) -> Result<Report, InterfaceError> {
    let mut report = Report::new(&format!("verify {what}"), doc.params.clone());
    let counts = family_crossing_counts(&doc.instance.curves())?;
    report.stats = instance_stats(&doc.instance, &counts);
    match (what, &doc.instance) {
        ("nonhomotopic", Instance::Loops(f)) => {
            let words = loop_words(f)?;
            let trivial: Vec<usize> = (0..words.len()).filter(|&i| words[i] == "1").collect();
            let mut pairs = Vec::new();
            for i in 0..words.len() {
                for j in i + 1..words.len() {
                    if words[i] == words[j] {
                        pairs.push((i, j));
                    }
                }
            }
            report.check("no trivial loops", "[]", format!("{trivial:?}"), trivial.is_empty());
            report.check("no homotopic pairs", "[]", format!("{pairs:?}"), pairs.is_empty());
            report.stats.words = Some(words);
        }
        ("nonhomotopic", Instance::Multigraph(g)) => {
            let v = validate_nonhomotopic(g)?;
            report.check("no trivial loops", "[]", format!("{:?}", v.trivial_loops), v.trivial_loops.is_empty());
            report.check("no homotopic pairs", "[]", format!("{:?}", v.homotopic_pairs), v.homotopic_pairs.is_empty());
        }
        ("bounds", Instance::Multigraph(g)) => {
            let construction =
                construction || doc.params.get("generator").and_then(Value::as_str) == Some("multigraph");
            let audit = audit_instance(g, construction)?;
            report.checks = audit.checks;
        }
        ("bounds", Instance::Loops(f)) => {
            // each loop has fewer than k self-crossings and each pair fewer
            // than k crossings, so the family is at most f(n, k)
            let k = counts.max_self().max(counts.max_pair()) + 1;
            let upper = f_upper(f.plane.len() as u64, k as u64)?;
            let fits = match &upper.exact {
                Some(v) => BigUint::from(f.len()) <= *v,
                None => true,
            };
            let expected = match &upper.exact {
                Some(v) => format!("<= {v}"),
                None => format!("<= 2^{}", rational_to_string(&upper.log2_upper)),
            };
            report.check(&format!("family size <= f({}, {k})", f.plane.len()), expected, f.len(), fits);
        }
        (other, _) => return Err(InterfaceError::Usage(format!("unknown verification {other:?}"))),
    }
    Ok(report)
}

pub fn bounds_report(what: &str, n: u64, k_or_m: u64) -> Result<Report, InterfaceError> {
    let mut params = Map::new();
    params.insert("n".into(), json!(n));
    match what {
        "f" => {
            params.insert("k".into(), json!(k_or_m));
            let mut report = Report::new("bounds f", params);
            let upper = f_upper(n, k_or_m)?;
            let mut details = json!({ "upper": upper });
            if n >= 2 {
                let lower = f_lower(n, k_or_m)?;
                details["lower"] = json!(lower.to_string());
                if let Some(u) = &upper.exact {
                    report.check("f_lower <= f_upper", u.to_string(), lower.to_string(), &lower <= u);
                }
            }
            report.details = Some(details);
            Ok(report)
        }
        "cr" => {
            params.insert("m".into(), json!(k_or_m));
            let mut report = Report::new("bounds cr", params);
            let m = k_or_m;
            let mut details = Map::new();
            details.insert("crossing_pair_lower".into(), json!(rational_to_string(&crossing_pair_lower(n, m)?)));
            if let Ok(l) = cr_lower_thm1(n, m) {
                details.insert("cr_lower".into(), json!(rational_to_string(&l)));
            }
            if let Ok(u) = cr_upper_thm2(n, m) {
                details.insert("cr_upper".into(), json!(u));
                if let Some(u_f) = u.value.to_f64() {
                    details.insert("cr_upper_approx".into(), json!(u_f));
                }
            }
            report.details = Some(Value::Object(details));
            Ok(report)
        }
        other => Err(InterfaceError::Usage(format!("unknown bound {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Command line.

#[derive(Parser, Debug)]
#[command(name = "nhcross", about = "Exact crossing and homotopy tools for curves in punctured planes")]
pub struct Cli {
    /// Add a generation timestamp to reports (off for reproducible output).
    #[arg(long, global = true)]
    pub timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a construction.
    Gen {
        /// winding | elementary | concat | multigraph | loose | bouquets
        kind: String,
        #[command(flatten)]
        params: GenParams,
        /// Instance file; the instance goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report statistics of an instance file.
    Analyze {
        /// crossings | words | arrangement
        what: String,
        file: PathBuf,
    },
    /// Check an instance file.
    Verify {
        /// nonhomotopic | bounds
        what: String,
        file: PathBuf,
        /// Also check the construction upper bound on the crossing number.
        #[arg(long)]
        construction: bool,
    },
    /// Evaluate bounds.
    Bounds {
        /// f | cr
        what: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Export an instance.
    Export {
        /// svg
        format: String,
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        crossings: bool,
        #[arg(long, default_value_t = 800.0)]
        width: f64,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct GenParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<Option<Report>, InterfaceError> {
    let report = match cli.command {
        Command::Gen { kind, params, out: path } => {
            let (doc, report) = generate(&kind, &params)?;
            match path {
                Some(p) => save(&doc, &p)?,
                None => {
                    // stdout carries the instance, so the report is only
                    // reflected in the exit code
                    out.write_all(to_canonical_string(&doc).as_bytes())?;
                    return Ok(Some(report));
                }
            }
            report
        }
        Command::Analyze { what, file } => analyze(&what, &load(&file)?)?,
        Command::Verify { what, file, construction } => verify(&what, &load(&file)?, construction)?,
        Command::Bounds { what, n, k, m } => {
            let second = match what.as_str() {
                "f" => k.ok_or_else(|| InterfaceError::Usage("bounds f needs --k".into()))?,
                _ => m.ok_or_else(|| InterfaceError::Usage("bounds cr needs --m".into()))?,
            };
            bounds_report(&what, n, second)?
        }
        Command::Export { format, file, out: path, crossings, width } => {
            if format != "svg" {
                return Err(InterfaceError::Usage(format!("unknown export format {format:?}")));
            }
            let doc = load(&file)?;
            let options = SvgOptions {
                width,
                show_crossings: crossings,
                metadata: Some(Value::Object(doc.params.clone()).to_string()),
            };
            export_svg(&doc.instance, &path, &options)?;
            let mut report = Report::new("export svg", doc.params.clone());
            let curves = doc.instance.curves();
            report.stats.m = Some(curves.len());
            report
        }
    };
    let mut report = report;
    if cli.timestamp {
        report.generated_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    out.write_all(report.to_json().as_bytes())?;
    Ok(Some(report))
}

/// Runs the command line; returns the process exit code. `0` when every
/// check passes, `1` when a check fails, `2` for usage and input errors.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(cli, out) {
        Ok(Some(report)) => {
            if report.passed() {
                0
            } else {
                1
            }
        }
        Ok(None) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
