//! Command line front end for the `starbound` toolkit.
//!
//! Every experiment is described by a TOML or JSON file; the subcommand names
//! the operation it is expected to contain. Results go to `<out>/report.json`
//! next to CSV tables and SVG figures, and the report is echoed on stdout.
//!
//! Exit codes: 0 success, 1 runtime failure or failed acceptance criteria,
//! 2 invalid configuration, 3 inconclusive or undecided headline verdict.

pub mod config;
pub mod ops;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use starbound::acceptance::{failing_ids, run_all, Fault};
use starbound::io::{SpaceName, SpaceSpec};

use config::{ExperimentConfig, OutputSpec, Tolerances};
use report::{emit, write_atomic, Artifact, Report, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] starbound::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "starbound", version, about = "Boundary stars and nonexpansive dynamics on model metric spaces")]
pub struct Cli {
    /// Experiment file (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Distance evaluations per star test.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Convergence tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric queries.
    Space {
        #[command(subcommand)]
        op: SpaceCmd,
    },
    /// Stars, star distances and atlases.
    Star {
        #[command(subcommand)]
        op: StarCmd,
    },
    /// Iteration of a single nonexpansive map.
    Dyn {
        #[command(subcommand)]
        op: DynCmd,
    },
    /// Random products of i.i.d. maps.
    Rand {
        #[command(subcommand)]
        op: RandCmd,
    },
    /// Built-in suites.
    Suite {
        #[command(subcommand)]
        op: SuiteCmd,
    },
    /// Runs whatever operation the config names.
    Run,
    /// Draws an orbit table onto the extrinsic model of the configured space.
    RenderOrbit {
        /// Orbit CSV written by `dyn iterate` or `dyn dw`.
        csv: PathBuf,
        /// Chart coordinates of a limit point to mark, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        limit: Option<Vec<f64>>,
        /// Output file; defaults to `<out>/orbit.svg`.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum SpaceCmd {
    Dist,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum StarCmd {
    Test,
    Matrix,
    Atlas,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum DynCmd {
    Iterate,
    Tau,
    Dw,
    Certificate,
    Track,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum RandCmd {
    Escape,
    Dw,
    Cf,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum SuiteCmd {
    /// Runs every acceptance criterion.
    Acceptance {
        /// Deliberately corrupts the library to check that the suite notices.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Renders star atlases for the planar model spaces.
    Atlas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    /// Scales distances by 2 on one side of the star comparison.
    OneSidedScale,
}

impl Command {
    fn expected_operation(&self) -> Option<&'static str> {
        Some(match self {
            Command::Space { op: SpaceCmd::Dist } => "space_dist",
            Command::Star { op } => match op {
                StarCmd::Test => "star_test",
                StarCmd::Matrix => "star_matrix",
                StarCmd::Atlas => "star_atlas",
            },
            Command::Dyn { op } => match op {
                DynCmd::Iterate => "dyn_iterate",
                DynCmd::Tau => "dyn_tau",
                DynCmd::Dw => "dyn_dw",
                DynCmd::Certificate => "dyn_certificate",
                DynCmd::Track => "dyn_track",
            },
            Command::Rand { op } => match op {
                RandCmd::Escape => "rand_escape",
                RandCmd::Dw => "rand_dw",
                RandCmd::Cf => "rand_cf",
            },
            _ => return None,
        })
    }
}

/// Loads the config and applies command line overrides.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Config("`--config` is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.budget.is_some() || cli.tol.is_some() {
        let t = cfg.tolerance.get_or_insert_with(Tolerances::default);
        t.budget = cli.budget.or(t.budget);
        t.tol = cli.tol.or(t.tol);
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(OutputSpec { dir: out.display().to_string() });
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.as_ref()).map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from("starbound-out"))
}

fn finish(dir: &Path, report: &Report, artifacts: &[Artifact]) -> Result<i32, CliError> {
    emit(dir, report, artifacts)?;
    println!("{}", report.to_json());
    Ok(report.status.exit_code())
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Suite { op: SuiteCmd::Acceptance { inject_fault } } => suite_acceptance(cli, *inject_fault),
        Command::Suite { op: SuiteCmd::Atlas } => suite_atlas(cli),
        Command::RenderOrbit { csv, limit, svg } => {
            let cfg = resolve_config(cli)?;
            let space = cfg.build_space()?.ok_or_else(|| CliError::Config("render-orbit needs a [space] section".into()))?;
            let bytes = std::fs::read(csv)?;
            let figure = ops::render_orbit(&space, &bytes, limit.as_deref())?;
            let path = svg.clone().unwrap_or_else(|| out_dir(cli, Some(&cfg)).join("orbit.svg"));
            write_atomic(&path, figure.as_bytes())?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        command => {
            let cfg = resolve_config(cli)?;
            if let (Some(want), Some(op)) = (command.expected_operation(), cfg.operation.as_ref()) {
                if want != op.name() {
                    return Err(CliError::Config(format!("config describes `{}`, expected `{want}`", op.name())));
                }
            }
            let (report, artifacts) = ops::execute(&cfg)?;
            finish(&out_dir(cli, Some(&cfg)), &report, &artifacts)
        }
    }
}

fn suite_config(cli: &Cli) -> ExperimentConfig {
    ExperimentConfig {
        space: None,
        operation: None,
        seed: cli.seed,
        output: None,
        tolerance: cli.budget.map(|b| Tolerances { tol: cli.tol, budget: Some(b) }),
    }
}

fn suite_acceptance(cli: &Cli, fault: Option<FaultArg>) -> Result<i32, CliError> {
    let fault = match fault {
        Some(FaultArg::OneSidedScale) => Fault::OneSidedScale,
        None => Fault::None,
    };
    let reports = run_all(fault);
    for r in &reports {
        eprintln!("{r}");
    }
    let failing = failing_ids(&reports);
    let criteria: Vec<_> = reports
        .iter()
        .map(|r| json!({ "id": r.id, "title": r.title, "passed": r.passed, "detail": r.detail }))
        .collect();
    let status = if failing.is_empty() { Status::Ok } else { Status::Failed };
    if !failing.is_empty() {
        eprintln!("failing criteria: {failing:?}");
    }
    let summary = json!({ "criteria": criteria, "failing": failing, "fault": format!("{fault:?}") });
    let report = Report::new("suite_acceptance", status, summary, &[], &suite_config(cli));
    finish(&out_dir(cli, None), &report, &[])
}

fn square() -> SpaceSpec {
    let mut s = SpaceSpec::of(SpaceName::HilbertPolytope);
    s.vertices = Some(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]);
    s
}

fn hexagon() -> SpaceSpec {
    let mut s = SpaceSpec::of(SpaceName::HilbertPolytope);
    s.vertices = Some(
        (0..6)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
    );
    s
}

fn suite_atlas(cli: &Cli) -> Result<i32, CliError> {
    let cfg = suite_config(cli);
    let budget = match cli.budget {
        Some(b) => starbound::stars::StarBudget::with_evals(b),
        None => Default::default(),
    };
    let spaces = [
        ("square", square()),
        ("hexagon", hexagon()),
        ("triangle", SpaceSpec::of(SpaceName::HilbertSimplex).with_dim(3)),
        ("disk", SpaceSpec::of(SpaceName::PoincareDisk)),
    ];
    let mut summary = serde_json::Map::new();
    let mut artifacts = Vec::new();
    for (name, spec) in spaces {
        let space = spec.build()?;
        let (entries, mut files) = ops::atlas(&space, 12, 24, &budget, &format!("atlas_{name}"))?;
        summary.insert(name.to_string(), entries);
        artifacts.append(&mut files);
    }
    let report = Report::new("suite_atlas", Status::Ok, summary.into(), &artifacts, &cfg);
    finish(&out_dir(cli, None), &report, &artifacts)
}
