//! Dispatch of configured operations to the library.

use serde::Serialize;
use serde_json::{json, Value};
use starbound::boundary::busemann;
use starbound::dynamics::{
    default_candidates, denjoy_wolff, geodesic_tracking, iterate, spectral_certificate, translation_number, DenjoyWolff,
    NonexpansiveMap, OrbitRecord, SpectralOutcome,
};
use starbound::io::{
    boundary_ring, orbit_rows, point_coords, point_from_coords, render_atlas_svg, render_orbit_svg, star_atlas,
    write_orbit_csv, write_table, OrbitRow,
};
use starbound::random::{classical_expansions, escape_rate, random_denjoy_wolff, MapDistribution};
use starbound::spaces::{BoundaryPoint, Chart, ModelSpace, Point};
use starbound::stars::{dual_star_test, star_distance_matrix, star_test, Outcome, StarBudget};

use crate::config::{ExperimentConfig, Operation};
use crate::report::{Artifact, Report, Status};
use crate::CliError;

const DEFAULT_TOL: f64 = 1e-6;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn invalid(e: starbound::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Resolved inputs shared by the operations.
struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    space: Option<ModelSpace>,
}

impl Ctx<'_> {
    fn space(&self) -> Result<&ModelSpace, CliError> {
        self.space.as_ref().ok_or_else(|| CliError::Config("operation needs a [space] section".into()))
    }

    fn tol(&self) -> f64 {
        self.cfg.tolerance.as_ref().and_then(|t| t.tol).unwrap_or(DEFAULT_TOL)
    }

    fn budget(&self) -> StarBudget {
        match self.cfg.tolerance.as_ref().and_then(|t| t.budget) {
            Some(b) => StarBudget::with_evals(b),
            None => StarBudget::default(),
        }
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.cfg.seed.ok_or_else(|| CliError::Config("stochastic operations need a `seed`".into()))
    }

    fn point(&self, space: &ModelSpace, c: &Option<Vec<f64>>) -> Result<Point, CliError> {
        match c {
            Some(c) => point_from_coords(space, c).map_err(invalid),
            None => Ok(space.basepoint.clone()),
        }
    }

    fn boundary(&self, c: &[f64]) -> Result<BoundaryPoint, CliError> {
        self.space()?.boundary_from_coords(c).map_err(invalid)
    }

    fn map(&self, spec: &starbound::dynamics::MapSpec) -> Result<NonexpansiveMap, CliError> {
        NonexpansiveMap::new(self.space()?, spec.clone()).map_err(invalid)
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    write_table(&mut buf, &header, &rows)?;
    Ok(buf)
}

fn orbit_artifacts(space: &ModelSpace, rec: &OrbitRecord, limit: Option<&[f64]>) -> Result<Vec<Artifact>, CliError> {
    let rows = orbit_rows(0, rec);
    let mut buf = Vec::new();
    write_orbit_csv(&mut buf, &rows)?;
    let mut out = vec![Artifact::new("orbit.csv", buf)];
    if let Ok(svg) = render_orbit_svg(space, &rows, limit) {
        out.push(Artifact::new("orbit.svg", svg));
    }
    Ok(out)
}

/// Runs the configured operation and collects its report and artifacts.
pub fn execute(cfg: &ExperimentConfig) -> Result<(Report, Vec<Artifact>), CliError> {
    let op = cfg.operation.as_ref().ok_or_else(|| CliError::Config("config has no [operation] section".into()))?;
    if op.stochastic() && cfg.seed.is_none() {
        return Err(CliError::Config(format!("`{}` is stochastic and needs a `seed`", op.name())));
    }
    let space = cfg.build_space()?;
    if op.needs_space() && space.is_none() {
        return Err(CliError::Config(format!("`{}` needs a [space] section", op.name())));
    }
    let ctx = Ctx { cfg, space };
    let (status, summary, artifacts) = dispatch(&ctx, op)?;
    let report = Report::new(op.name(), status, summary, &artifacts, cfg);
    Ok((report, artifacts))
}

type Dispatched = (Status, Value, Vec<Artifact>);

fn dispatch(ctx: &Ctx, op: &Operation) -> Result<Dispatched, CliError> {
    match op {
        Operation::SpaceDist { x, y } => {
            let s = ctx.space()?;
            let (x, y) = (ctx.point(s, &Some(x.clone()))?, ctx.point(s, &Some(y.clone()))?);
            Ok((Status::Ok, json!({ "distance": s.distance(&x, &y)? }), vec![]))
        }
        Operation::StarTest { xi, eta, dual } => {
            let s = ctx.space()?;
            let (xi, eta) = (ctx.boundary(xi)?, ctx.boundary(eta)?);
            let v = if *dual { dual_star_test(s, &xi, &eta, &ctx.budget())? } else { star_test(s, &xi, &eta, &ctx.budget())? };
            let status = if v.outcome == Outcome::Inconclusive { Status::Inconclusive } else { Status::Ok };
            Ok((status, to_value(&v), vec![]))
        }
        Operation::StarMatrix { samples } => {
            let s = ctx.space()?;
            let pts = samples.iter().map(|c| ctx.boundary(c)).collect::<Result<Vec<_>, _>>()?;
            let m = star_distance_matrix(s, &pts, &ctx.budget())?;
            let header: Vec<String> = (0..pts.len()).map(|j| format!("s{j}")).collect();
            let rows: Vec<Vec<String>> = m.dist.iter().map(|r| r.iter().map(|d| d.map_or(String::new(), |d| d.to_string())).collect()).collect();
            let mut buf = Vec::new();
            write_table(&mut buf, &header, &rows)?;
            let status = if m.upper_bound { Status::Inconclusive } else { Status::Ok };
            Ok((status, to_value(&m), vec![Artifact::new("matrix.csv", buf)]))
        }
        Operation::StarAtlas { samples, mesh } => {
            let s = ctx.space()?;
            let (entries, artifacts) = atlas(s, *samples, *mesh, &ctx.budget(), "atlas")?;
            Ok((Status::Ok, json!({ "entries": entries }), artifacts))
        }
        Operation::DynIterate { map, x, n } => {
            let (f, s) = (ctx.map(map)?, ctx.space()?);
            let rec = iterate(&f, &ctx.point(s, x)?, *n)?;
            let summary = json!({
                "horizon": rec.horizon(),
                "last_point": point_coords(rec.last_point()),
                "last_displacement": rec.displacements.last(),
                "truncated_at": rec.truncated_at,
                "bounded": rec.bounded,
            });
            Ok((Status::Ok, summary, orbit_artifacts(s, &rec, None)?))
        }
        Operation::DynTau { map, x, n } => {
            let (f, s) = (ctx.map(map)?, ctx.space()?);
            let t = translation_number(&f, &ctx.point(s, x)?, *n)?;
            Ok((Status::Ok, json!({ "bracket": t, "estimate": t.estimate(), "lower_bound_heuristic": !t.exact }), vec![]))
        }
        Operation::DynDw { map, x, n } => {
            let (f, s) = (ctx.map(map)?, ctx.space()?);
            let x = ctx.point(s, x)?;
            let dw = denjoy_wolff(&f, &x, *n, ctx.tol())?;
            let limit = match &dw {
                DenjoyWolff::BoundaryLimit { xi, .. } => Some(Chart::new(s).boundary_to_chart(xi)?),
                DenjoyWolff::FixedPoint { point, .. } if Chart::new(s).supported() => Some(Chart::new(s).to_chart(point)?),
                _ => None,
            };
            let status = if matches!(dw, DenjoyWolff::Undecided { .. }) { Status::Undecided } else { Status::Ok };
            let rec = iterate(&f, &x, *n)?;
            Ok((status, json!({ "result": dw, "limit_chart": limit }), orbit_artifacts(s, &rec, limit.as_deref())?))
        }
        Operation::DynCertificate { map, x, n, candidates } => {
            let (f, s) = (ctx.map(map)?, ctx.space()?);
            let x = ctx.point(s, x)?;
            let mut hs = default_candidates(&f, &x, *n)?;
            for c in candidates {
                hs.push(busemann(s, &ctx.boundary(c)?).map_err(invalid)?);
            }
            let out = spectral_certificate(&f, &x, &hs, *n, ctx.tol())?;
            let status = if matches!(out, SpectralOutcome::Certified(_)) { Status::Ok } else { Status::Inconclusive };
            Ok((status, json!({ "candidates": hs.len(), "outcome": out }), vec![]))
        }
        Operation::DynTrack { map, x, n } => {
            let (f, s) = (ctx.map(map)?, ctx.space()?);
            let t = geodesic_tracking(&f, &ctx.point(s, x)?, *n, ctx.tol())?;
            let status = if t.applicable && !t.tracked { Status::Undecided } else { Status::Ok };
            Ok((status, to_value(&t), vec![]))
        }
        Operation::RandEscape { dist, x, n, trials } => {
            let d = dist.build(ctx.space.as_ref())?;
            let x = dist_point(ctx, &d, x)?;
            let e = escape_rate(&d, &x, *n, *trials, ctx.seed()?)?;
            let rows = e
                .per_trial
                .iter()
                .zip(&e.truncated)
                .enumerate()
                .map(|(t, (r, tr))| vec![t.to_string(), r.to_string(), tr.to_string()])
                .collect();
            let csv = csv_bytes(&["trial", "rate", "truncated"], rows)?;
            let summary = json!({
                "tau_hat": e.tau_hat,
                "ci": e.ci,
                "median": e.median,
                "positive_drift_statistical": e.excludes_zero(),
                "fekete": e.fekete,
            });
            Ok((Status::Ok, summary, vec![Artifact::new("trials.csv", csv)]))
        }
        Operation::RandDw { dist, x, y, n, trials } => {
            let d = dist.build(ctx.space.as_ref())?;
            let (x, y) = (dist_point(ctx, &d, x)?, dist_point(ctx, &d, y)?);
            let r = random_denjoy_wolff(&d, &x, &y, *n, *trials, ctx.tol(), ctx.seed()?)?;
            let rows = r
                .trials
                .iter()
                .map(|t| vec![t.trial.to_string(), t.decided.to_string(), t.gap.to_string(), t.cauchy.to_string()])
                .collect();
            let csv = csv_bytes(&["trial", "decided", "gap", "cauchy"], rows)?;
            let status = if r.decided_fraction > 0.0 { Status::Ok } else { Status::Undecided };
            Ok((status, to_value(&r), vec![Artifact::new("trials.csv", csv)]))
        }
        Operation::RandCf { dist, n } => {
            let d = dist.build(ctx.space.as_ref())?;
            let e = classical_expansions(&d, ctx.seed()?, *n)?;
            let rows = e.values.iter().enumerate().map(|(k, v)| vec![(k + 1).to_string(), v.to_string()]).collect();
            let csv = csv_bytes(&["n", "value"], rows)?;
            Ok((Status::Ok, to_value(&e), vec![Artifact::new("values.csv", csv)]))
        }
    }
}

fn dist_point(ctx: &Ctx, d: &MapDistribution, c: &Option<Vec<f64>>) -> Result<Point, CliError> {
    let s = d.space().map_err(invalid)?;
    ctx.point(&s, c)
}

/// Star atlas of `samples` evenly spread boundary points against a mesh of `mesh` points.
pub fn atlas(
    space: &ModelSpace,
    samples: usize,
    mesh: usize,
    budget: &StarBudget,
    stem: &str,
) -> Result<(Value, Vec<Artifact>), CliError> {
    let ch = Chart::new(space);
    let entries = star_atlas(space, &boundary_ring(space, samples)?, &boundary_ring(space, mesh)?, budget)?;
    let mut rows = Vec::with_capacity(entries.len());
    for e in &entries {
        let c = ch.boundary_to_chart(&e.xi)?;
        let mut row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        row.extend([e.members, e.nonmembers, e.inconclusive].map(|k| k.to_string()));
        rows.push(row);
    }
    let mut header: Vec<String> = (0..ch.dim()).map(|k| format!("c{k}")).collect();
    header.extend(["members", "nonmembers", "inconclusive"].map(String::from));
    let mut csv = Vec::new();
    write_table(&mut csv, &header, &rows)?;
    let svg = render_atlas_svg(space, &entries)?;
    let summary = to_value(&entries);
    Ok((summary, vec![Artifact::new(format!("{stem}.csv"), csv), Artifact::new(format!("{stem}.svg"), svg)]))
}

/// Orbit figure from a CSV table; coordinates must match the space chart.
pub fn render_orbit(space: &ModelSpace, csv: &[u8], limit: Option<&[f64]>) -> Result<String, CliError> {
    let rows: Vec<OrbitRow> = starbound::io::read_orbit_csv(csv)?;
    if rows.is_empty() {
        return Err(CliError::Core(starbound::Error::Invalid("orbit file has no rows".into())));
    }
    Ok(render_orbit_svg(space, &rows, limit)?)
}
