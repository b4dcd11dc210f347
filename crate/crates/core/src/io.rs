//! Serialization surfaces: space descriptions, coordinate conversions, CSV
//! tables and SVG figures.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::OrbitRecord;
use crate::spaces::{BoundaryPoint, Chart, Graph, ModelSpace, Norm, Point, Polytope, SpaceKind};
use crate::stars::{star_test, Outcome, StarBudget};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceName {
    PoincareDisk,
    KobayashiBall,
    Polydisc,
    HilbertSimplex,
    HilbertPolytope,
    Normed,
    #[serde(alias = "half_plane")]
    TorusTeichmueller,
    FiniteGraph,
}

/// Declarative description of a model space as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: SpaceName,
    /// Complex dimension, real dimension, or number of simplex vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<Vec<f64>>,
}

impl SpaceSpec {
    pub fn of(kind: SpaceName) -> Self {
        SpaceSpec { kind, dim: None, norm: None, vertices: None, edges: None, scale: None, basepoint: None }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    fn need_dim(&self) -> Result<usize> {
        self.dim.ok_or_else(|| Error::Schema(format!("{:?} needs `dim`", self.kind)))
    }

    fn reject(&self, field: &str, present: bool) -> Result<()> {
        if present {
            return Err(Error::Schema(format!("`{field}` does not apply to {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ModelSpace> {
        use SpaceName::*;
        let (dim, norm, verts, edges) = (self.dim.is_some(), self.norm.is_some(), self.vertices.is_some(), self.edges.is_some());
        let space = match self.kind {
            PoincareDisk | TorusTeichmueller => {
                self.reject("dim", dim)?;
                self.reject("norm", norm)?;
                self.reject("vertices", verts)?;
                self.reject("edges", edges)?;
                if self.kind == PoincareDisk {
                    ModelSpace::disk()
                } else {
                    ModelSpace::half_plane()
                }
            }
            KobayashiBall | Polydisc | HilbertSimplex => {
                self.reject("norm", norm)?;
                self.reject("vertices", verts)?;
                self.reject("edges", edges)?;
                let n = self.need_dim()?;
                match self.kind {
                    KobayashiBall => ModelSpace::ball(n)?,
                    Polydisc => ModelSpace::polydisc(n)?,
                    _ => ModelSpace::simplex(n)?,
                }
            }
            HilbertPolytope => {
                self.reject("dim", dim)?;
                self.reject("norm", norm)?;
                self.reject("edges", edges)?;
                let v = self.vertices.clone().ok_or_else(|| Error::Schema("hilbert_polytope needs `vertices`".into()))?;
                ModelSpace::polytope(Polytope::from_vertices(v)?)?
            }
            Normed => {
                self.reject("vertices", verts)?;
                self.reject("edges", edges)?;
                let norm = self.norm.ok_or_else(|| Error::Schema("normed needs `norm`".into()))?;
                ModelSpace::normed(self.need_dim()?, norm)?
            }
            FiniteGraph => {
                self.reject("norm", norm)?;
                self.reject("vertices", verts)?;
                let e = self.edges.clone().ok_or_else(|| Error::Schema("finite_graph needs `edges`".into()))?;
                ModelSpace::graph(Graph::new(self.need_dim()?, e)?)?
            }
        };
        let space = match self.scale {
            Some(s) => space.with_scale(s)?,
            None => space,
        };
        match &self.basepoint {
            Some(c) => {
                let p = point_from_coords(&space, c)?;
                space.with_basepoint(p)
            }
            None => Ok(space),
        }
    }
}

fn complex_pairs(c: &[f64], n: usize) -> Result<Vec<C64>> {
    if c.len() != 2 * n {
        return Err(Error::Invalid(format!("expected {} real coordinates, got {}", 2 * n, c.len())));
    }
    Ok(c.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
}

/// Interior point from its flat real coordinates (complex entries as `re, im` pairs).
pub fn point_from_coords(space: &ModelSpace, c: &[f64]) -> Result<Point> {
    let p = match &space.kind {
        SpaceKind::PoincareDisk => Point::Disk(complex_pairs(c, 1)?[0]),
        SpaceKind::KobayashiBall { dim } => Point::Ball(complex_pairs(c, *dim)?),
        SpaceKind::Polydisc { dim } => Point::Polydisc(complex_pairs(c, *dim)?),
        SpaceKind::HilbertPolytope(_) => Point::Polytope(c.to_vec()),
        SpaceKind::NormedSpace { .. } => Point::Normed(c.to_vec()),
        SpaceKind::TorusTeichmueller => Point::HalfPlane(complex_pairs(c, 1)?[0]),
        SpaceKind::FiniteGraph(_) => match c {
            [v] if *v >= 0.0 && v.fract() == 0.0 => Point::Vertex(*v as usize),
            _ => return Err(Error::Invalid("a graph vertex is a single nonnegative integer".into())),
        },
    };
    space.check(&p)?;
    Ok(p)
}

/// Flat real coordinates of an interior point.
pub fn point_coords(p: &Point) -> Vec<f64> {
    let flat = |z: &[C64]| z.iter().flat_map(|c| [c.re, c.im]).collect();
    match p {
        Point::Disk(z) | Point::HalfPlane(z) => vec![z.re, z.im],
        Point::Ball(z) | Point::Polydisc(z) => flat(z),
        Point::Polytope(x) | Point::Normed(x) => x.clone(),
        Point::Vertex(v) => vec![*v as f64],
    }
}

/// One row of an orbit table: extrinsic chart coordinates of `f^n x` in a given trial.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRow {
    pub trial: usize,
    pub n: usize,
    pub displacement: f64,
    pub coords: Vec<f64>,
}

pub fn orbit_rows(trial: usize, rec: &OrbitRecord) -> Vec<OrbitRow> {
    rec.extrinsic
        .iter()
        .enumerate()
        .map(|(n, c)| OrbitRow {
            trial,
            n,
            displacement: rec.displacements.get(n).copied().unwrap_or(f64::NAN),
            coords: c.clone(),
        })
        .collect()
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Schema(format!("csv: {e}"))
}

/// Writes a table with a header row.
pub fn write_table<W: Write>(w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for r in rows {
        out.write_record(r).map_err(csv_err)?;
    }
    out.flush().map_err(csv_err)
}

pub fn write_orbit_csv<W: Write>(w: W, rows: &[OrbitRow]) -> Result<()> {
    let dim = rows.first().map_or(0, |r| r.coords.len());
    if rows.iter().any(|r| r.coords.len() != dim) {
        return Err(Error::Invalid("orbit rows have differing dimensions".into()));
    }
    let mut header: Vec<String> = ["trial", "n", "displacement"].map(String::from).to_vec();
    header.extend((0..dim).map(|i| format!("c{i}")));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.trial.to_string(), r.n.to_string(), format!("{:e}", r.displacement)];
            v.extend(r.coords.iter().map(|c| format!("{c:e}")));
            v
        })
        .collect();
    write_table(w, &header, &body)
}

pub fn read_orbit_csv<R: Read>(r: R) -> Result<Vec<OrbitRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    let fixed = ["trial", "n", "displacement"];
    if header.len() < 3 || header.iter().zip(fixed).any(|(h, f)| h != f) {
        return Err(Error::Schema("orbit csv must start with trial,n,displacement".into()));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| Error::Schema(format!("column {}: {e}", &header[i])))
        };
        let int = |i: usize| -> Result<usize> {
            rec[i].trim().parse::<usize>().map_err(|e| Error::Schema(format!("column {}: {e}", &header[i])))
        };
        rows.push(OrbitRow {
            trial: int(0)?,
            n: int(1)?,
            displacement: num(2)?,
            coords: (3..rec.len()).map(num).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

/// Star structure of one sampled boundary point against a boundary mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasEntry {
    pub xi: BoundaryPoint,
    pub members: usize,
    pub nonmembers: usize,
    pub inconclusive: usize,
}

impl AtlasEntry {
    /// Share of the mesh certified inside the star.
    pub fn member_fraction(&self) -> f64 {
        let total = self.members + self.nonmembers + self.inconclusive;
        if total == 0 {
            0.0
        } else {
            self.members as f64 / total as f64
        }
    }
}

pub fn star_atlas(space: &ModelSpace, samples: &[BoundaryPoint], mesh: &[BoundaryPoint], budget: &StarBudget) -> Result<Vec<AtlasEntry>> {
    samples
        .iter()
        .map(|xi| {
            let mut e = AtlasEntry { xi: xi.clone(), members: 0, nonmembers: 0, inconclusive: 0 };
            for eta in mesh {
                match star_test(space, xi, eta, budget)?.outcome {
                    Outcome::Member => e.members += 1,
                    Outcome::NonMember => e.nonmembers += 1,
                    Outcome::Inconclusive => e.inconclusive += 1,
                }
            }
            Ok(e)
        })
        .collect()
}

/// Evenly spread boundary points of a two-dimensional chart region.
pub fn boundary_ring(space: &ModelSpace, count: usize) -> Result<Vec<BoundaryPoint>> {
    let ch = Chart::new(space);
    if let Some(p) = space.polytope_ref() {
        let outline = polygon(space, p)?;
        let k = outline.len();
        let lens: Vec<f64> = (0..k).map(|i| seg_len(&outline[i], &outline[(i + 1) % k])).collect();
        let total: f64 = lens.iter().sum();
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            let mut s = total * j as f64 / count as f64;
            let mut i = 0;
            while s > lens[i] && i + 1 < k {
                s -= lens[i];
                i += 1;
            }
            let t = s / lens[i];
            let (a, b) = (&p.vertices[order(p)?[i]], &p.vertices[order(p)?[(i + 1) % k]]);
            let c: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            out.push(space.boundary_from_coords(&c)?);
        }
        return Ok(out);
    }
    if ch.dim() != 2 {
        return Err(Error::unsupported("boundary ring", space.name()));
    }
    (0..count)
        .map(|j| {
            let th = std::f64::consts::TAU * j as f64 / count as f64;
            ch.chart_to_boundary(&[th.cos(), th.sin()])
        })
        .collect()
}

fn seg_len(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Vertex indices of a planar polytope in angular order around its centroid.
fn order(p: &Polytope) -> Result<Vec<usize>> {
    let pts: Vec<[f64; 2]> = p.vertices.iter().map(|v| planar_bary(p, v)).collect::<Result<_>>()?;
    let (cx, cy) = pts.iter().fold((0.0, 0.0), |(x, y), q| (x + q[0], y + q[1]));
    let (cx, cy) = (cx / pts.len() as f64, cy / pts.len() as f64);
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        let ta = (pts[a][1] - cy).atan2(pts[a][0] - cx);
        let tb = (pts[b][1] - cy).atan2(pts[b][0] - cx);
        ta.total_cmp(&tb)
    });
    Ok(idx)
}

fn polygon(_space: &ModelSpace, p: &Polytope) -> Result<Vec<[f64; 2]>> {
    order(p)?.into_iter().map(|i| planar_bary(p, &p.vertices[i])).collect()
}

const TRIANGLE: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]];

fn planar_bary(p: &Polytope, c: &[f64]) -> Result<[f64; 2]> {
    match (p.barycentric, c.len()) {
        (true, 2) => Ok([c[1], 0.0]),
        (true, 3) => Ok([0, 1].map(|k| (0..3).map(|i| c[i] * TRIANGLE[i][k]).sum())),
        (false, 2) => Ok([c[0], c[1]]),
        _ => Err(Error::unsupported("planar rendering", format!("{}-dimensional polytope", p.dim()))),
    }
}

/// Planar drawing position of extrinsic chart coordinates.
fn planar(space: &ModelSpace, c: &[f64]) -> Result<[f64; 2]> {
    let ch = Chart::new(space);
    if c.len() != ch.dim() {
        return Err(Error::Invalid(format!(
            "coordinate/space mismatch: {} coordinates for a {}-dimensional chart of {}",
            c.len(),
            ch.dim(),
            space.name()
        )));
    }
    match space.polytope_ref() {
        Some(p) => planar_bary(p, c),
        None if c.len() == 2 => Ok([c[0], c[1]]),
        None => Err(Error::unsupported("planar rendering", space.name())),
    }
}

struct Canvas {
    lo: [f64; 2],
    span: f64,
    body: String,
}

const SIZE: f64 = 480.0;
const PAD: f64 = 24.0;

impl Canvas {
    fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        Canvas { lo, span, body: String::new() }
    }

    fn xy(&self, p: [f64; 2]) -> (f64, f64) {
        let s = (SIZE - 2.0 * PAD) / self.span;
        (PAD + (p[0] - self.lo[0]) * s, SIZE - PAD - (p[1] - self.lo[1]) * s)
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }

    fn outline(&mut self, space: &ModelSpace) -> Result<()> {
        match space.polytope_ref() {
            Some(p) => {
                let pts: Vec<String> = polygon(space, p)?
                    .into_iter()
                    .map(|q| {
                        let (x, y) = self.xy(q);
                        format!("{x:.2},{y:.2}")
                    })
                    .collect();
                let _ = writeln!(self.body, "<polygon points=\"{}\" fill=\"none\" stroke=\"black\"/>", pts.join(" "));
            }
            None => {
                let (cx, cy) = self.xy([0.0, 0.0]);
                let r = (SIZE - 2.0 * PAD) / self.span;
                let _ = writeln!(self.body, "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"none\" stroke=\"black\"/>");
            }
        }
        Ok(())
    }

    fn dot(&mut self, p: [f64; 2], r: f64, fill: &str) {
        let (x, y) = self.xy(p);
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{fill}\"/>");
    }

    fn cross(&mut self, p: [f64; 2]) {
        let (x, y) = self.xy(p);
        let _ = writeln!(
            self.body,
            "<path d=\"M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}\" stroke=\"crimson\" stroke-width=\"2\"/>",
            x - 6.0,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0,
            y + 6.0,
            x + 6.0,
            y - 6.0
        );
    }
}

fn canvas_for(space: &ModelSpace) -> Result<Canvas> {
    match space.polytope_ref() {
        Some(p) => {
            let pts = polygon(space, p)?;
            let lo = [0, 1].map(|k| pts.iter().map(|q| q[k]).fold(f64::INFINITY, f64::min));
            let hi = [0, 1].map(|k| pts.iter().map(|q| q[k]).fold(f64::NEG_INFINITY, f64::max));
            let m = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
            Ok(Canvas::new([lo[0] - m, lo[1] - m], [hi[0] + m, hi[1] + m]))
        }
        None if Chart::new(space).dim() == 2 => Ok(Canvas::new([-1.05, -1.05], [1.05, 1.05])),
        None => Err(Error::unsupported("planar rendering", space.name())),
    }
}

/// Orbit points in the extrinsic model with an optional boundary limit marked.
pub fn render_orbit_svg(space: &ModelSpace, rows: &[OrbitRow], limit: Option<&[f64]>) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Invalid("orbit is empty".into()));
    }
    let mut cv = canvas_for(space)?;
    cv.outline(space)?;
    let mut trials: Vec<usize> = rows.iter().map(|r| r.trial).collect();
    trials.dedup();
    for t in trials {
        let path: Vec<[f64; 2]> = rows
            .iter()
            .filter(|r| r.trial == t)
            .map(|r| planar(space, &r.coords))
            .collect::<Result<_>>()?;
        let pts: Vec<String> = path
            .iter()
            .map(|q| {
                let (x, y) = cv.xy(*q);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(cv.body, "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.5\"/>", pts.join(" "));
        for q in path {
            cv.dot(q, 2.0, "steelblue");
        }
    }
    if let Some(l) = limit {
        let q = planar(space, l)?;
        cv.cross(q);
    }
    Ok(cv.finish())
}

fn hue(frac: f64) -> String {
    format!("hsl({:.0},75%,45%)", 240.0 * (1.0 - frac.clamp(0.0, 1.0)))
}

/// Boundary samples coloured by the share of the mesh inside their star.
pub fn render_atlas_svg(space: &ModelSpace, entries: &[AtlasEntry]) -> Result<String> {
    let mut cv = canvas_for(space)?;
    cv.outline(space)?;
    let ch = Chart::new(space);
    for e in entries {
        let q = planar(space, &ch.boundary_to_chart(&e.xi)?)?;
        let fill = if e.inconclusive > 0 { "gray".to_string() } else { hue(e.member_fraction()) };
        cv.dot(q, 5.0, &fill);
    }
    Ok(cv.finish())
}
