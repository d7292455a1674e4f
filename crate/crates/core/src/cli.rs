//! Command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand and maps the outcome to
//! an exit code: 0 on success, 1 on a usage error, 2 on a runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::abm::{self, AbmConfig, AgentPopulations};
use crate::equilibria;
use crate::error::{Error, Result};
use crate::io::{self, RunManifest};
use crate::params::{CreatorStrategy, GameParams, ParamName, UserStrategy};
use crate::payoff::PopulationState;
use crate::render::{self, ColorScale};
use crate::replicator::{self, IntegratorConfig, ReplicatorForm};
use crate::sweep::{self, Axis, Engine, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "media-egt",
    version,
    about = "Evolutionary dynamics of AI creators and users guided by media recommendations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deterministic replicator dynamics.
    #[command(subcommand)]
    Replicator(ReplicatorCommand),
    /// Stability of the eight pure-strategy corners.
    Equilibria(EquilibriaArgs),
    /// Finite-population agent-based simulation.
    #[command(subcommand)]
    Abm(AbmCommand),
    /// Two-parameter grid of average cooperation.
    Sweep(SweepArgs),
    /// Render a sweep or time-series CSV as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Subcommand)]
pub enum ReplicatorCommand {
    /// Integrate one trajectory and classify its outcome.
    Run(ReplicatorRunArgs),
    /// Classify every starting state on a grid.
    Basin(BasinArgs),
}

#[derive(Debug, Subcommand)]
pub enum AbmCommand {
    /// Simulate one or more replicates and write their time series.
    Run(AbmRunArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// b_u=0.4 c_u=0.8 b_c=0.4 c_c=0.1 c_i=0.1 q=0.9
    #[default]
    Default,
    /// As default with c_c=0.2 and c_i=0.05, a persistently cycling regime.
    Oscillation,
}

/// Options shared by every simulation subcommand.
#[derive(Clone, Debug, Args)]
pub struct Common {
    #[arg(long = "b_u", help_heading = "Game parameters")]
    pub b_u: Option<f64>,
    #[arg(long = "c_u", help_heading = "Game parameters")]
    pub c_u: Option<f64>,
    #[arg(long = "b_c", help_heading = "Game parameters")]
    pub b_c: Option<f64>,
    #[arg(long = "c_c", allow_hyphen_values = true, help_heading = "Game parameters")]
    pub c_c: Option<f64>,
    #[arg(long = "c_i", help_heading = "Game parameters")]
    pub c_i: Option<f64>,
    #[arg(long = "q", help_heading = "Game parameters")]
    pub q: Option<f64>,
    /// Parameter profile that the config file and flags override.
    #[arg(long, value_enum, default_value_t = Preset::Default, help_heading = "Game parameters")]
    pub preset: Preset,
    /// Permit c_c < 0 (safe creation cheaper than unsafe).
    #[arg(long = "allow-negative-c_c", help_heading = "Game parameters")]
    pub allow_negative_cc: bool,
    /// Flat `key = value` file with any of b_u, c_u, b_c, c_c, c_i, q.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct IntegratorArgs {
    /// RK4 step size.
    #[arg(long)]
    pub step: Option<f64>,
    /// Integration time.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Record every N steps.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormArg::Literal)]
    pub form: FormArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    /// x_i (1 - x_i)(pi_i - mean) as written in the model.
    Literal,
    /// x_i (pi_i - mean).
    Standard,
}

impl From<FormArg> for ReplicatorForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Literal => ReplicatorForm::Literal,
            FormArg::Standard => ReplicatorForm::Standard,
        }
    }
}

impl IntegratorArgs {
    fn resolve(&self, base: IntegratorConfig) -> IntegratorConfig {
        IntegratorConfig {
            step_size: self.step.unwrap_or(base.step_size),
            horizon: self.horizon.unwrap_or(base.horizon),
            record_stride: self.stride.unwrap_or(base.record_stride),
            form: self.form.into(),
            ..base
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct StartArgs {
    /// Initial user frequencies AllD,BMedia,GMedia,AllC (default uniform).
    #[arg(long, value_name = "A,B,G,C", value_delimiter = ',', num_args = 4)]
    pub x0: Option<Vec<f64>>,
    /// Initial share of safe creators.
    #[arg(long, default_value_t = 0.5)]
    pub y0: f64,
}

impl StartArgs {
    fn resolve(&self) -> Result<PopulationState> {
        let x = match &self.x0 {
            Some(v) => [v[0], v[1], v[2], v[3]],
            None => [0.25; 4],
        };
        PopulationState::new(x, self.y0)
    }
}

#[derive(Debug, Args)]
pub struct ReplicatorRunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub start: StartArgs,
}

#[derive(Debug, Args)]
pub struct BasinArgs {
    #[command(flatten)]
    pub common: Common,
    /// Step of the starting-state grid; must divide 1.
    #[arg(long, default_value_t = 0.04)]
    pub grid_step: f64,
    /// Use the fine 0.02 grid (slow).
    #[arg(long)]
    pub full: bool,
    /// Integrator settings; default step 0.1 and horizon 2000.
    #[command(flatten)]
    pub integrator: IntegratorArgs,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dynamics whose Jacobian is analysed.
    #[arg(long, value_enum, default_value_t = FormArg::Standard)]
    pub form: FormArg,
}

#[derive(Clone, Debug, Args)]
pub struct AbmArgs {
    #[arg(long, default_value_t = 100)]
    pub n_users: usize,
    #[arg(long, default_value_t = 50)]
    pub n_creators: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta_u: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta_c: f64,
    /// User mutation probability (default 1 / n_users).
    #[arg(long)]
    pub mu_u: Option<f64>,
    /// Creator mutation probability (default 1 / n_creators).
    #[arg(long)]
    pub mu_c: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub generations: usize,
    /// Leading share of generations excluded from averages.
    #[arg(long, default_value_t = 0.1)]
    pub burn_in: f64,
    /// Revise one agent from the union of both populations per step
    /// instead of one user and one creator.
    #[arg(long)]
    pub unpaired: bool,
}

impl AbmArgs {
    fn resolve(&self, seed: u64, replicates: usize) -> AbmConfig {
        let base = AbmConfig::with_sizes(self.n_users, self.n_creators);
        AbmConfig {
            beta_u: self.beta_u,
            beta_c: self.beta_c,
            mu_u: self.mu_u.unwrap_or(base.mu_u),
            mu_c: self.mu_c.unwrap_or(base.mu_c),
            generations: self.generations,
            burn_in_fraction: self.burn_in,
            seed,
            replicates,
            paired_updates: !self.unpaired,
            ..base
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StartKind {
    /// Every agent picks a uniformly random strategy.
    Random,
    /// All users AllD, all creators unsafe.
    AllDefect,
    /// All users AllC, all creators safe.
    AllCooperate,
}

#[derive(Debug, Args)]
pub struct AbmRunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub abm: AbmArgs,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, value_enum, default_value_t = StartKind::Random)]
    pub start: StartKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Replicator,
    Abm,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = EngineArg::Replicator)]
    pub engine: EngineArg,
    /// Horizontal axis as name:min:max:steps.
    #[arg(long, value_name = "AXIS", default_value = "c_i:0:0.5:21")]
    pub x: Axis,
    /// Vertical axis as name:min:max:steps.
    #[arg(long, value_name = "AXIS", default_value = "c_c:0:0.5:21")]
    pub y: Axis,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub abm: AbmArgs,
    /// Replicates per cell for the agent-based engine.
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Viridis)]
    pub color_scale: ScaleArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Viridis,
    Grayscale,
    Redgreen,
}

impl From<ScaleArg> for ColorScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Viridis => ColorScale::Viridis,
            ScaleArg::Grayscale => ColorScale::Grayscale,
            ScaleArg::Redgreen => ColorScale::RedGreen,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RenderKind {
    /// Decide from the CSV header.
    Auto,
    Heatmap,
    Timeseries,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Sweep, trajectory or agent-based CSV.
    pub input: PathBuf,
    /// Output SVG (default: input with an .svg extension).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RenderKind::Auto)]
    pub kind: RenderKind,
    #[arg(long, value_enum, default_value_t = ScaleArg::Viridis)]
    pub color_scale: ScaleArg,
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Messages go to stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging();
    let line = command_line(&argv);
    match dispatch(cli.command, &line) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Bad parameter values and configurations are usage errors; everything
/// else failed while running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParam { .. } | Error::InvalidConfig(_) | Error::InvalidState(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, m: &log::Metadata) -> bool {
        m.level() <= log::Level::Warn
    }

    fn log(&self, r: &log::Record) {
        if self.enabled(r.metadata()) {
            eprintln!("{}: {}", r.level().as_str().to_ascii_lowercase(), r.args());
        }
    }

    fn flush(&self) {}
}

fn init_logging() {
    static LOGGER: StderrLogger = StderrLogger;
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
}

fn command_line(argv: &[OsString]) -> String {
    argv.iter()
        .map(|a| {
            let s = a.to_string_lossy();
            if s.is_empty() || s.contains(|c: char| c.is_whitespace() || "'\"\\$".contains(c)) {
                format!("'{}'", s.replace('\'', r"'\''"))
            } else {
                s.into_owned()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn dispatch(command: Command, line: &str) -> Result<()> {
    match command {
        Command::Replicator(ReplicatorCommand::Run(a)) => {
            with_jobs(a.common.jobs, || replicator_run(&a, line))
        }
        Command::Replicator(ReplicatorCommand::Basin(a)) => {
            with_jobs(a.common.jobs, || replicator_basin(&a, line))
        }
        Command::Equilibria(a) => equilibria_cmd(&a, line),
        Command::Abm(AbmCommand::Run(a)) => with_jobs(a.common.jobs, || abm_run(&a, line)),
        Command::Sweep(a) => with_jobs(a.common.jobs, || sweep_cmd(&a, line)),
        Command::Render(a) => render_cmd(&a),
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(Error::InvalidConfig("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f),
    }
}

/// Preset, then config file, then flags.
pub fn resolve_params(c: &Common) -> Result<GameParams> {
    let mut p = match c.preset {
        Preset::Default => GameParams::default(),
        Preset::Oscillation => GameParams::oscillation(),
    };
    if let Some(path) = &c.config {
        p = io::params_from_map(p, &io::read_key_values(path)?)?;
    }
    let flags = [
        (ParamName::BU, c.b_u),
        (ParamName::CU, c.c_u),
        (ParamName::BC, c.b_c),
        (ParamName::CC, c.c_c),
        (ParamName::CI, c.c_i),
        (ParamName::Q, c.q),
    ];
    for (name, v) in flags {
        if let Some(v) = v {
            p.set(name, v);
        }
    }
    let p = p.validate()?;
    if p.c_c < 0.0 && !c.allow_negative_cc {
        return Err(Error::InvalidParam {
            name: "c_c",
            value: p.c_c,
            reason: "must be non-negative unless --allow-negative-c_c is given",
        });
    }
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(p)
}

struct Run {
    manifest: RunManifest,
    out: PathBuf,
    started: Instant,
}

impl Run {
    fn new(command: &str, line: &str, common: &Common, p: &GameParams) -> Self {
        let mut manifest = RunManifest::new(command, line);
        manifest.params(p).set("seed", common.seed);
        if let Some(cfg) = &common.config {
            manifest.set("config_file", cfg.display());
        }
        Run {
            manifest,
            out: common.out.clone(),
            started: Instant::now(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.manifest.artifacts.push(p.clone());
        p
    }

    fn finish(mut self, name: &str) -> Result<PathBuf> {
        self.manifest.duration = self.started.elapsed();
        let path = self.out.join(format!("{name}.manifest"));
        self.manifest.write(&path)?;
        Ok(path)
    }
}

fn replicator_run(a: &ReplicatorRunArgs, line: &str) -> Result<()> {
    let p = resolve_params(&a.common)?;
    let cfg = a.integrator.resolve(IntegratorConfig::default()).validate()?;
    let s0 = a.start.resolve()?;
    let mut run = Run::new("replicator run", line, &a.common, &p);
    run.manifest
        .integrator(&cfg)
        .set("x0", join(&s0.x))
        .set("y0", s0.y);

    let traj = replicator::integrate(&s0, &p, &cfg)?;
    let outcome = replicator::classify_outcome(&traj, &p, &cfg)?;
    let csv = run.path("trajectory.csv");
    io::write_trajectory_csv(&csv, &traj)?;
    let t = outcome.terminal_state;
    run.manifest
        .set("outcome", outcome.kind.as_str())
        .set("time_averaged_eta", outcome.time_averaged_eta);
    run.finish("replicator_run")?;

    println!("outcome: {}", outcome.kind.as_str());
    println!("time-averaged eta: {:.6}", outcome.time_averaged_eta);
    println!("terminal x: {}  y: {}", join(&t.x), t.y);
    println!("wrote {}", csv.display());
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Integrator defaults for censuses: many thousands of trajectories make
/// the coarser step worthwhile, and outcomes are settled well before 2000.
pub fn census_integrator() -> IntegratorConfig {
    IntegratorConfig {
        step_size: 0.1,
        horizon: 2000.0,
        ..IntegratorConfig::default()
    }
}

fn replicator_basin(a: &BasinArgs, line: &str) -> Result<()> {
    let p = resolve_params(&a.common)?;
    let cfg = a.integrator.resolve(census_integrator()).validate()?;
    let grid_step = if a.full { 0.02 } else { a.grid_step };
    let mut run = Run::new("replicator basin", line, &a.common, &p);
    run.manifest.integrator(&cfg).set("grid_step", grid_step);

    let census = replicator::basin_census(&p, grid_step, &cfg)?;
    let csv = run.path("census.csv");
    io::write_census_csv(&csv, &census)?;
    let summary = run.path("census_summary.json");
    io::write_text(&summary, &io::census_summary_json(&census))?;
    run.manifest
        .set("defection_fraction", census.defection_fraction)
        .set("mean_eta", census.mean_eta);
    run.finish("replicator_basin")?;

    println!("starting states: {} ({} failed)", census.total_states, census.failed);
    println!("defection fraction: {:.4}", census.defection_fraction);
    println!("mean eta: {:.4}", census.mean_eta);
    println!("wrote {}", csv.display());
    Ok(())
}

fn equilibria_cmd(a: &EquilibriaArgs, line: &str) -> Result<()> {
    let p = resolve_params(&a.common)?;
    let form: ReplicatorForm = a.form.into();
    let mut run = Run::new("equilibria", line, &a.common, &p);
    run.manifest.set("form", form.as_str());

    let reports = equilibria::corner_census_with(&p, form);
    let csv = run.path("equilibria.csv");
    io::write_equilibria_csv(&csv, &reports)?;
    let table = io::format_equilibria_table(&reports);
    let txt = run.path("equilibria.txt");
    io::write_text(&txt, &table)?;
    run.finish("equilibria")?;

    print!("{table}");
    println!("wrote {}", csv.display());
    Ok(())
}

fn abm_run(a: &AbmRunArgs, line: &str) -> Result<()> {
    let p = resolve_params(&a.common)?;
    let cfg = a.abm.resolve(a.common.seed, a.replicates).validate()?;
    let initial = match a.start {
        StartKind::Random => None,
        StartKind::AllDefect => Some(AgentPopulations::homogeneous(
            UserStrategy::AllD,
            CreatorStrategy::Unsafe,
            cfg.n_users,
            cfg.n_creators,
        )),
        StartKind::AllCooperate => Some(AgentPopulations::homogeneous(
            UserStrategy::AllC,
            CreatorStrategy::Safe,
            cfg.n_users,
            cfg.n_creators,
        )),
    };
    let mut run = Run::new("abm run", line, &a.common, &p);
    run.manifest.abm(&cfg).set(
        "start",
        a.start.to_possible_value().expect("no skipped variants").get_name(),
    );

    let series = abm::run_replicates(&p, &cfg, initial.as_ref())?;
    let burn_in = cfg.burn_in_generations();
    let means: Vec<f64> = series.iter().map(|s| s.mean_eta_after(burn_in)).collect();
    for (r, s) in series.iter().enumerate() {
        let name = if series.len() == 1 {
            "abm.csv".to_string()
        } else {
            format!("abm_r{r:03}.csv")
        };
        let path = run.path(&name);
        io::write_abm_csv(&path, s)?;
    }
    let summary = abm::ReplicateSummary::from_values(means);
    run.manifest
        .set("eta_mean", summary.mean)
        .set("eta_std", summary.std);
    run.finish("abm_run")?;

    println!(
        "mean eta after burn-in: {:.4} (std {:.4} over {} replicates)",
        summary.mean,
        summary.std,
        summary.per_replicate.len()
    );
    println!("wrote {} time series to {}", series.len(), a.common.out.display());
    Ok(())
}

fn sweep_cmd(a: &SweepArgs, line: &str) -> Result<()> {
    let base = resolve_params(&a.common)?;
    let engine = match a.engine {
        EngineArg::Replicator => Engine::Replicator {
            config: a.integrator.resolve(IntegratorConfig::default()),
            start: a.start.resolve()?,
        },
        EngineArg::Abm => Engine::Abm {
            config: a.abm.resolve(a.common.seed, a.replicates),
        },
    };
    let spec = SweepSpec {
        axis_x: a.x,
        axis_y: a.y,
        base,
        engine,
    }
    .validate()?;
    let mut run = Run::new("sweep", line, &a.common, &base);
    run.manifest
        .set("engine", engine.name())
        .set("axis_x", a.x)
        .set("axis_y", a.y);
    match engine {
        Engine::Replicator { config, start } => {
            run.manifest
                .integrator(&config)
                .set("x0", join(&start.x))
                .set("y0", start.y);
        }
        Engine::Abm { config } => {
            run.manifest.abm(&config);
        }
    }

    let result = sweep::run_sweep(&spec)?;
    let csv = run.path("sweep.csv");
    io::write_sweep_csv(&csv, &result)?;
    let rows = io::read_sweep_csv(&csv)?;
    let svg = run.path("sweep.svg");
    io::write_text(&svg, &render::heatmap_svg(&rows, a.color_scale.into())?)?;
    let invalid = result.cells.iter().filter(|c| !c.valid).count();
    run.manifest.set("invalid_cells", invalid);
    run.finish("sweep")?;

    println!(
        "{} cells ({} x {}), {} invalid",
        result.cells.len(),
        result.x_steps,
        result.y_steps,
        invalid
    );
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn sniff_kind(path: &Path) -> Result<RenderKind> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Malformed(format!("{}: {other:?}", path.display())),
    })?;
    let first = r.headers()?.get(0).unwrap_or("").trim().to_string();
    Ok(if first == io::SWEEP_HEADER[0] {
        RenderKind::Heatmap
    } else {
        RenderKind::Timeseries
    })
}

fn render_cmd(a: &RenderArgs) -> Result<()> {
    let kind = match a.kind {
        RenderKind::Auto => sniff_kind(&a.input)?,
        k => k,
    };
    let svg = match kind {
        RenderKind::Heatmap => {
            render::heatmap_svg(&io::read_sweep_csv(&a.input)?, a.color_scale.into())?
        }
        _ => render::timeseries_svg(&io::read_time_series_csv(&a.input)?)?,
    };
    let out = a
        .output
        .clone()
        .unwrap_or_else(|| a.input.with_extension("svg"));
    io::write_text(&out, &svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
