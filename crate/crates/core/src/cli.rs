//! Command-line front end: `gen-grid`, `solve`, `pareto`, `validate`,
//! `export-lp`.
//!
//! Exit codes: 0 optimal (or valid), 2 infeasible, 3 solver limit hit,
//! 1 for errors and for plans with violations.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::backbone::{
    build_backbone_model, solve_backbone, BackboneError, BackboneMethod, BackboneObjective,
    BackboneOutcome, BackboneParams, DEFAULT_GATEWAY_CAPACITY, DEFAULT_MAX_HOPS,
    DEFAULT_PER_SENSOR_RATE, DEFAULT_ROUTER_CAPACITY,
};
use crate::coverage::{
    build_cover_model, build_gamma_model, min_energy_cover, solve_cover, CoverOutcome,
    CoverageError, CoverageParams, DEFAULT_MAX_SENSORS,
};
use crate::ilp::{export_lp, Budget, Limits, SolveStatus};
use crate::pareto::{
    cover_traffic, front_energy_vs_ffd, front_hop_vs_gateways, FfdLevel, ParetoError,
};
use crate::plan::{parse_plan, validate, DeploymentPlan, PlanParams};
use crate::streetgraph::{gen_grid, jitter_coordinates, parse_street_graph, LinkMode, StreetGraph};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

pub const DEFAULT_RADIO_RANGE_M: f64 = 150.0;

#[derive(Debug, Parser)]
#[command(name = "parkmesh", version, about = "FFD and gateway planning for parking sensor networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a rectangular street grid document.
    GenGrid(GenGridArgs),
    /// Place FFDs, split sensors, and build the backbone.
    Solve(SolveArgs),
    /// Trace a Pareto front as CSV.
    Pareto(ParetoArgs),
    /// Re-check every constraint family of a plan.
    Validate(ValidateArgs),
    /// Write a model in LP text form.
    ExportLp(ExportArgs),
}

#[derive(Debug, Args)]
pub struct GenGridArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 100.0)]
    pub edge_len: f64,
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
    /// Uniform coordinate jitter in meters (lengths are kept).
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Street graph document.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub input: Option<PathBuf>,
    /// Generated grid, `ROWSxCOLS`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 100.0)]
    pub edge_len: f64,
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_SENSORS)]
    pub max_sensors: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_HOPS)]
    pub max_hops: u32,
    #[arg(long, default_value_t = DEFAULT_ROUTER_CAPACITY)]
    pub router_capacity: f64,
    #[arg(long, default_value_t = DEFAULT_GATEWAY_CAPACITY)]
    pub gateway_capacity: f64,
    #[arg(long, default_value_t = DEFAULT_PER_SENSOR_RATE)]
    pub per_sensor_rate: f64,
    #[arg(long, default_value_t = DEFAULT_RADIO_RANGE_M)]
    pub radio_range: f64,
    /// Link only intersections that share a road segment.
    #[arg(long)]
    pub street_links: bool,
    #[arg(long, default_value_t = 50_000_000)]
    pub max_nodes: u64,
    #[arg(long, default_value_t = 3600.0)]
    pub max_seconds: f64,
}

impl ModelArgs {
    fn coverage(&self) -> CoverageParams {
        CoverageParams {
            max_sensors: self.max_sensors,
            ffd_budget: None,
        }
    }

    fn backbone(&self) -> BackboneParams {
        BackboneParams {
            max_hops: self.max_hops,
            router_capacity: self.router_capacity,
            gateway_capacity: self.gateway_capacity,
            gw_budget: None,
            per_sensor_rate: self.per_sensor_rate,
        }
    }

    fn links(&self) -> LinkMode {
        if self.street_links {
            LinkMode::Street
        } else {
            LinkMode::Distance {
                radio_range_m: self.radio_range,
            }
        }
    }

    fn limits(&self) -> Limits {
        Limits {
            max_nodes: self.max_nodes,
            max_seconds: self.max_seconds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    MinGateways,
    MinTotalHops,
    FixedGwMinHops,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Place exactly this many FFDs (default: the minimum).
    #[arg(long)]
    pub ffd_count: Option<usize>,
    /// Install exactly this many gateways.
    #[arg(long)]
    pub gateways: Option<usize>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Plan document path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrontKind {
    Energy,
    Hops,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    #[arg(value_enum)]
    pub which: FrontKind,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// FFD levels for the hop front: `worst`, `mediocre`, `best`, or counts.
    #[arg(long, value_delimiter = ',', default_value = "worst,mediocre,best")]
    pub levels: Vec<String>,
    /// CSV path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Binary placement model.
    Cover,
    /// Placement with continuous managed lengths.
    Gamma,
    /// Backbone over the minimum cover.
    Backbone,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum, default_value = "cover")]
    pub model: ModelKind,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ModelArgs,
    #[arg(long)]
    pub ffd_count: Option<usize>,
    #[arg(long)]
    pub gateways: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn error(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: e.to_string(),
        }
    }
}

impl From<CoverageError> for Failure {
    fn from(e: CoverageError) -> Self {
        let code = match e {
            CoverageError::Uncoverable { .. } => EXIT_INFEASIBLE,
            _ => EXIT_ERROR,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BackboneError> for Failure {
    fn from(e: BackboneError) -> Self {
        let code = match e {
            BackboneError::TooFewGateways { .. } | BackboneError::BudgetAboveFfd { .. } => {
                EXIT_INFEASIBLE
            }
            _ => EXIT_ERROR,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ParetoError> for Failure {
    fn from(e: ParetoError) -> Self {
        match e {
            ParetoError::Coverage(e) => e.into(),
            ParetoError::Backbone(e) => e.into(),
            e => Failure::error(e),
        }
    }
}

fn status_code(s: SolveStatus) -> i32 {
    match s {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::NodeLimit | SolveStatus::TimeLimit => EXIT_LIMIT,
    }
}

pub fn parse_grid_spec(spec: &str) -> Result<(usize, usize), String> {
    let (r, c) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid spec {spec:?} is not ROWSxCOLS"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("grid spec {spec:?} is not ROWSxCOLS"))
    };
    Ok((parse(r)?, parse(c)?))
}

fn load_graph(a: &InputArgs) -> Result<StreetGraph, Failure> {
    match (&a.input, &a.grid) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
            parse_street_graph(&text).map_err(Failure::error)
        }
        (None, Some(spec)) => {
            let (r, c) = parse_grid_spec(spec).map_err(Failure::error)?;
            gen_grid(r, c, a.edge_len, a.density).map_err(Failure::error)
        }
        _ => Err(Failure::error("give exactly one of --input and --grid")),
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::error(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Failure::error),
    }
}

fn parse_levels(raw: &[String]) -> Result<Vec<FfdLevel>, Failure> {
    raw.iter()
        .map(|s| match s.trim() {
            "worst" => Ok(FfdLevel::Worst),
            "mediocre" => Ok(FfdLevel::Mediocre),
            "best" => Ok(FfdLevel::Best),
            n => n
                .parse()
                .map(FfdLevel::Count)
                .map_err(|_| Failure::error(format!("unknown FFD level {n:?}"))),
        })
        .collect()
}

/// Parse `args` and run; returns the process exit code.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::GenGrid(a) => cmd_gen_grid(&a, stdout),
        Command::Solve(a) => cmd_solve(&a, stdout, stderr),
        Command::Pareto(a) => cmd_pareto(&a, stdout, stderr),
        Command::Validate(a) => cmd_validate(&a, stdout),
        Command::ExportLp(a) => cmd_export_lp(&a, stdout),
    }
}

fn cmd_gen_grid(a: &GenGridArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut g = gen_grid(a.rows, a.cols, a.edge_len, a.density).map_err(Failure::error)?;
    if a.jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        g = jitter_coordinates(&g, a.jitter, &mut rng);
    }
    emit(&a.out, &(g.to_json() + "\n"), stdout)?;
    Ok(EXIT_OK)
}

fn start(m: &ModelArgs) -> Result<Budget, Failure> {
    m.limits().start().map_err(Failure::error)
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let g = load_graph(&a.input)?;
    let cp = a.model.coverage();
    let links = a.model.links();
    let w = links.derive(&g).map_err(Failure::error)?;
    let budget = start(&a.model)?;

    let count = match a.ffd_count {
        Some(t) => t,
        None => match solve_cover(&g, &cp, &budget)? {
            CoverOutcome::Solved(plan) => plan.ffd.len(),
            other => return Ok(report_cover_stop(&other, stderr)),
        },
    };
    let cover = match min_energy_cover(&g, &cp, count, &budget)? {
        CoverOutcome::Solved(plan) => plan,
        other => return Ok(report_cover_stop(&other, stderr)),
    };

    let mut bp = a.model.backbone();
    bp.gw_budget = a.gateways;
    let objective = match (a.objective, a.gateways) {
        (Some(ObjectiveArg::MinGateways), _) => BackboneObjective::MinGateways,
        (Some(ObjectiveArg::MinTotalHops), _) => BackboneObjective::MinTotalHops,
        (Some(ObjectiveArg::FixedGwMinHops), _) | (None, Some(_)) => {
            BackboneObjective::FixedGwMinHops
        }
        (None, None) => BackboneObjective::MinGateways,
    };
    let traffic = cover_traffic(&cover, bp.per_sensor_rate);
    let out = solve_backbone(
        &g,
        &w,
        &cover.ffd,
        &traffic,
        &bp,
        objective,
        BackboneMethod::Search,
        &budget,
    )?;
    let solution = match out {
        BackboneOutcome::Solved(s) => s,
        BackboneOutcome::Infeasible => {
            let _ = writeln!(stderr, "infeasible: no backbone satisfies hop and capacity limits");
            return Ok(EXIT_INFEASIBLE);
        }
        BackboneOutcome::Limit(s) => {
            let _ = writeln!(
                stderr,
                "{}: backbone not finished; FFD placement {:?}",
                s.as_str(),
                cover.ffd
            );
            return Ok(EXIT_LIMIT);
        }
    };
    let plan = DeploymentPlan::assemble(
        PlanParams::new(&cp, &bp, links),
        &cover,
        &traffic,
        &solution.topology,
    );
    emit(&a.out, &(plan.to_json() + "\n"), stdout)?;
    let o = &plan.objectives;
    let _ = writeln!(
        stderr,
        "optimal: {} FFDs, energy {}, {} gateways, avg hop {:.4} (cover {})",
        o.ffd_count,
        o.energy,
        o.gateway_count,
        o.avg_hop,
        serde_json::to_value(plan.cover_selection).map_or_else(|_| "?".into(), |v| v.to_string())
    );
    Ok(EXIT_OK)
}

fn report_cover_stop(out: &CoverOutcome, stderr: &mut dyn Write) -> i32 {
    match out {
        CoverOutcome::Limit { status, incumbent } => {
            let _ = match incumbent {
                Some(ffd) => writeln!(stderr, "{}: incumbent FFD set {ffd:?}", status.as_str()),
                None => writeln!(stderr, "{}: no incumbent", status.as_str()),
            };
        }
        _ => {
            let _ = writeln!(stderr, "infeasible: no FFD placement covers every parking segment");
        }
    }
    status_code(out.status())
}

fn cmd_pareto(a: &ParetoArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let g = load_graph(&a.input)?;
    let header = match a.which {
        FrontKind::Energy => "budget,objective\n",
        FrontKind::Hops => "gateways,avg_hop,ffd_level\n",
    };
    let (rows, status) = match pareto_rows(a, &g, stderr) {
        Ok(r) => r,
        Err(f) if f.code == EXIT_INFEASIBLE => {
            emit(&a.out, header, stdout)?;
            return Err(f);
        }
        Err(f) => return Err(f),
    };
    emit(&a.out, &format!("{header}{rows}"), stdout)?;
    if status != SolveStatus::Optimal {
        let _ = writeln!(stderr, "{}", status.as_str());
    }
    Ok(status_code(status))
}

fn pareto_rows(
    a: &ParetoArgs,
    g: &StreetGraph,
    stderr: &mut dyn Write,
) -> Result<(String, SolveStatus), Failure> {
    let cp = a.model.coverage();
    let budget = start(&a.model)?;
    let mut csv = String::new();
    let status = match a.which {
        FrontKind::Energy => {
            let s = front_energy_vs_ffd(g, &cp, &budget)?;
            for p in &s.front.points {
                csv.push_str(&format!("{},{:.4}\n", p.objectives[0] as usize, p.objectives[1]));
                if p.plan.selection == crate::coverage::CoverSelection::TieBroken {
                    let _ = writeln!(
                        stderr,
                        "note: budget {} uses a tie-broken cover; energy may not be minimal",
                        p.objectives[0]
                    );
                }
            }
            if s.front.points.is_empty() && s.status == SolveStatus::Optimal {
                SolveStatus::Infeasible
            } else {
                s.status
            }
        }
        FrontKind::Hops => {
            let w = a.model.links().derive(g).map_err(Failure::error)?;
            let levels = parse_levels(&a.levels)?;
            let sweeps =
                front_hop_vs_gateways(g, &w, &levels, &cp, &a.model.backbone(), &budget)?;
            let mut status = SolveStatus::Optimal;
            let mut rows = 0;
            for s in &sweeps {
                for p in &s.sweep.front.points {
                    csv.push_str(&format!(
                        "{},{:.4},{}\n",
                        p.objectives[0] as usize, p.objectives[1], s.level
                    ));
                    rows += 1;
                }
                if s.sweep.status.is_limit() {
                    status = s.sweep.status;
                }
            }
            if rows == 0 && status == SolveStatus::Optimal {
                SolveStatus::Infeasible
            } else {
                status
            }
        }
    };
    Ok((csv, status))
}

fn cmd_validate(a: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let read = |p: &PathBuf| {
        fs::read_to_string(p).map_err(|e| Failure::error(format!("{}: {e}", p.display())))
    };
    let g = parse_street_graph(&read(&a.graph)?).map_err(Failure::error)?;
    let plan = parse_plan(&read(&a.plan)?).map_err(Failure::error)?;
    let violations = validate(&plan, &g).map_err(Failure::error)?;
    for v in &violations {
        let _ = writeln!(stdout, "{v}");
    }
    if violations.is_empty() {
        let _ = writeln!(stdout, "ok: no violations");
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(stdout, "{} violations", violations.len());
        Ok(EXIT_ERROR)
    }
}

fn cmd_export_lp(a: &ExportArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let g = load_graph(&a.input)?;
    let mut cp = a.params.coverage();
    cp.ffd_budget = a.ffd_count;
    let model = match a.model {
        ModelKind::Cover => build_cover_model(&g, &cp)?,
        ModelKind::Gamma => build_gamma_model(&g, &cp)?,
        ModelKind::Backbone => {
            let budget = start(&a.params)?;
            let count = match a.ffd_count {
                Some(t) => t,
                None => match solve_cover(&g, &cp, &budget)? {
                    CoverOutcome::Solved(plan) => plan.ffd.len(),
                    other => return Ok(status_code(other.status())),
                },
            };
            let cover = match min_energy_cover(&g, &cp, count, &budget)? {
                CoverOutcome::Solved(plan) => plan,
                other => return Ok(status_code(other.status())),
            };
            let mut bp = a.params.backbone();
            bp.gw_budget = a.gateways;
            let objective = if a.gateways.is_some() {
                BackboneObjective::FixedGwMinHops
            } else {
                BackboneObjective::MinGateways
            };
            let w = a.params.links().derive(&g).map_err(Failure::error)?;
            let traffic = cover_traffic(&cover, bp.per_sensor_rate);
            build_backbone_model(&g, &w, &cover.ffd, &traffic, &bp, objective)?.model
        }
    };
    let text = export_lp(&model).map_err(Failure::error)?;
    emit(&a.out, &text, stdout)?;
    Ok(EXIT_OK)
}
