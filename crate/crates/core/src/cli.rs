//! Batch driver: a TOML [`RunConfig`] in, CSV traces and JSON summaries out.
//!
//! Exit codes: `0` success, `2` a checked property failed, `3` numerical
//! failure (the originating error is in the summary), `4` configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::continuation::{self, LiftConfig, SlideConfig};
use crate::deform::{self, PushConfig, PushProblem};
use crate::harmonic::{self, BoundaryArcSet, CertificateConfig, KernelConfig};
use crate::loops::LoopCurve;
use crate::monodromy::{self, CollapseProfile, DemoConfig, DemoCurve, FEvalConfig};
use crate::suite::{self, VerifyConfig};
use crate::{Error, ExecMode, Result, Tolerances, C64};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Allowed increment error of the demonstration.
pub const DEMO_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    DemoMonodromy,
    Continue,
    Harmonic,
    PushDisc,
    Verify,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::DemoMonodromy => "demo-monodromy",
            CommandName::Continue => "continue",
            CommandName::Harmonic => "harmonic",
            CommandName::PushDisc => "push-disc",
            CommandName::Verify => "verify",
        }
    }
}

/// Discretization sizes shared by the commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    /// Fourier modes `N` per loop.
    pub n_loop: usize,
    /// σ-degree of lift discs.
    pub m_deg: usize,
    /// Angular grid handed to `f`.
    pub n_grid: usize,
    /// Sweep points of the demonstration curve.
    pub t_grid: usize,
    /// Radial quadrature nodes of `f`.
    pub radial: usize,
    /// Boundary nodes of the sliding means.
    pub n_sigma: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self { n_loop: 32, m_deg: 32, n_grid: 128, t_grid: 800, radial: 24, n_sigma: 48 }
    }
}

impl Grids {
    fn validate(&self) -> Result<()> {
        let check = |name: &str, v: usize, lo: usize, hi: usize| {
            if v < lo || v > hi {
                return Err(Error::Config(format!("grids.{name} = {v} outside [{lo}, {hi}]")));
            }
            Ok(())
        };
        check("n_loop", self.n_loop, 4, 512)?;
        check("m_deg", self.m_deg, 4, 256)?;
        check("n_grid", self.n_grid, 16, 4096)?;
        check("t_grid", self.t_grid, 64, 100_000)?;
        check("radial", self.radial, 4, 256)?;
        check("n_sigma", self.n_sigma, 4, 1024)?;
        if !self.n_grid.is_power_of_two() {
            return Err(Error::Config(format!("grids.n_grid = {} must be a power of two", self.n_grid)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
    pub trace: String,
    pub summary: String,
    /// Timings and other nondeterministic notes.
    pub log: String,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("loopcont-out"), trace: "trace.csv".into(), summary: "summary.json".into(), log: "run.log".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoSection {
    pub leg_points: usize,
    pub profile: CollapseProfile,
    pub eps_push: f64,
    pub leg_offset: f64,
    pub reversed: bool,
}

impl Default for DemoSection {
    fn default() -> Self {
        let d = DemoConfig::default();
        Self { leg_points: d.leg_points, profile: d.profile, eps_push: d.eps_push, leg_offset: d.leg_offset, reversed: d.reversed }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinueSection {
    /// LoopCurve JSON file.
    pub curve: Option<PathBuf>,
    /// `lift.m_deg` is overridden by `grids.m_deg`.
    pub lift: LiftConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarmonicSection {
    /// Arcs `[start, end]` of `∂Δ` in radians.
    pub arcs: Vec<[f64; 2]>,
    /// Certificate level; `None` skips certificate building.
    pub delta: Option<f64>,
    /// `ε` values for the Runge-type kernel.
    pub epsilons: Vec<f64>,
    pub certificate: CertificateConfig,
    pub kernel: KernelConfig,
}

impl Default for HarmonicSection {
    fn default() -> Self {
        Self {
            arcs: vec![[0.0, 1.0]],
            delta: Some(0.1),
            epsilons: vec![],
            certificate: CertificateConfig::default(),
            kernel: KernelConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PushSection {
    /// PushProblem JSON file.
    pub problem: Option<PathBuf>,
    pub config: PushConfig,
}

/// The full run configuration. Every numerical default lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub seed: u64,
    pub exec: ExecMode,
    pub tolerances: Tolerances,
    pub grids: Grids,
    pub output: Output,
    pub demo: DemoSection,
    #[serde(rename = "continue")]
    pub continuation: ContinueSection,
    pub harmonic: HarmonicSection,
    pub push: PushSection,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 0,
            exec: ExecMode::default(),
            tolerances: Tolerances::default(),
            grids: Grids::default(),
            output: Output::default(),
            demo: DemoSection::default(),
            continuation: ContinueSection::default(),
            harmonic: HarmonicSection::default(),
            push: PushSection::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        self.grids.validate()?;
        if !(self.demo.eps_push > 0.0 && self.demo.leg_offset > 0.0) {
            return Err(Error::Config("demo.eps_push and demo.leg_offset must be positive".into()));
        }
        if self.demo.leg_points < 2 {
            return Err(Error::Config("demo.leg_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn demo_config(&self) -> DemoConfig {
        DemoConfig {
            sweep_points: self.grids.t_grid,
            leg_points: self.demo.leg_points,
            profile: self.demo.profile,
            modes: self.grids.n_loop,
            m_deg: self.grids.m_deg,
            eps_push: self.demo.eps_push,
            leg_offset: self.demo.leg_offset,
            reversed: self.demo.reversed,
        }
    }

    pub fn f_config(&self) -> FEvalConfig {
        FEvalConfig { angular: self.grids.n_grid, radial: self.grids.radial, ..FEvalConfig::default() }
    }

    pub fn slide_config(&self) -> SlideConfig {
        SlideConfig { n_sigma: self.grids.n_sigma, grid: self.grids.n_grid, seed: self.seed }
    }
}

/// Result of one command: exit status and the JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub summary: Value,
    /// CSV trace, when the command produces one.
    pub trace: Option<String>,
}

fn c_json(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn error_json(e: &Error) -> Value {
    json!({ "kind": e.kind(), "message": e.to_string() })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn envelope(cfg: &RunConfig, command: CommandName, code: i32, result: Value) -> Value {
    json!({
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "command": command.as_str(),
        "seed": cfg.seed,
        "status": match code { EXIT_OK => "pass", EXIT_VERIFICATION => "fail", EXIT_CONFIG => "config-error", _ => "numerical-error" },
        "exit_code": code,
        "result": result,
    })
}

/// Runs a command without touching the file system.
pub fn execute(cfg: &RunConfig, command: CommandName) -> Outcome {
    if let Err(e) = cfg.validate() {
        return Outcome { code: EXIT_CONFIG, summary: envelope(cfg, command, EXIT_CONFIG, json!({ "error": error_json(&e) })), trace: None };
    }
    let res = match command {
        CommandName::DemoMonodromy => demo_monodromy(cfg),
        CommandName::Continue => continue_curve(cfg),
        CommandName::Harmonic => harmonic_ops(cfg),
        CommandName::PushDisc => push_disc(cfg),
        CommandName::Verify => verify(cfg),
    };
    match res {
        Ok(Done { pass, result, trace }) => {
            let code = if pass { EXIT_OK } else { EXIT_VERIFICATION };
            Outcome { code, summary: envelope(cfg, command, code, result), trace }
        }
        Err(Failed { error, partial }) => {
            let code = exit_code(&error);
            let mut result = json!({ "error": error_json(&error) });
            if !partial.is_null() {
                result["partial"] = partial;
            }
            Outcome { code, summary: envelope(cfg, command, code, result), trace: None }
        }
    }
}

struct Done {
    pass: bool,
    result: Value,
    trace: Option<String>,
}

struct Failed {
    error: Error,
    /// Whatever was computed before the failure.
    partial: Value,
}

impl From<Error> for Failed {
    fn from(error: Error) -> Self {
        Failed { error, partial: Value::Null }
    }
}

type CommandResult = std::result::Result<Done, Failed>;

fn demo_monodromy(cfg: &RunConfig) -> CommandResult {
    let demo = DemoCurve::new(&cfg.demo_config())?;
    let rep = monodromy::demo_increment(&demo, &cfg.f_config(), &cfg.slide_config(), &cfg.tolerances, cfg.exec)?;
    let period = monodromy::period_k(monodromy::PERIOD_RESOLUTION, true);
    let sign = if rep.increment.re >= 0.0 { 1.0 } else { -1.0 };
    let error = (rep.increment - sign * period).norm();
    let pass = error <= DEMO_TOLERANCE;
    let chain = &rep.chain;
    let result = json!({
        "increment": c_json(rep.increment),
        "sign": sign as i32,
        "period": period,
        "error": error,
        "tolerance": DEMO_TOLERANCE,
        "start": c_json(rep.start),
        "end": c_json(rep.end),
        "direct_start": c_json(rep.direct_start),
        "start_mismatch": (rep.start - rep.direct_start).norm(),
        "max_overlap_residual": chain.max_residual(),
        "safety_radius": chain.safety,
        "delta": chain.delta,
        "delta1": chain.delta1,
        "lift_lipschitz": chain.lift_lipschitz,
        "sigma_offset": chain.sigma_offset,
        "boundary_kappa": rep.boundary_kappa,
        "initial_kappa": rep.initial_kappa,
        "fit_residual": rep.fit_residual,
        "t_points": chain.records.len(),
        "grids": cfg.grids,
        "demo": cfg.demo,
    });
    Ok(Done { pass, result, trace: Some(chain.to_csv()) })
}

fn continue_curve(cfg: &RunConfig) -> CommandResult {
    let path = cfg.continuation.curve.as_ref().ok_or_else(|| Error::Config("continue needs a curve file".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let curve = LoopCurve::from_json(&text)?;
    let lcfg = LiftConfig { m_deg: cfg.grids.m_deg, ..cfg.continuation.lift.clone() };
    let lift = continuation::build_regular_lift(&curve, &lcfg, &cfg.tolerances, cfg.exec)?;
    let fcfg = cfg.f_config();
    let tol = cfg.tolerances;
    let f = |s: &[crate::V3]| Ok(monodromy::f_eval_samples(s, &fcfg, &tol, ExecMode::Sequential)?.value);
    let chain = continuation::slide(&f, &curve, &lift, &cfg.slide_config(), &cfg.tolerances, cfg.exec)?;
    let closed = curve.is_closed(cfg.tolerances.manifold);
    let result = json!({
        "closed": closed,
        "first": c_json(chain.first()),
        "last": c_json(chain.last()),
        "increment": c_json(chain.increment()),
        "max_overlap_residual": chain.max_residual(),
        "safety_radius": chain.safety,
        "delta": chain.delta,
        "delta1": chain.delta1,
        "t_points": chain.records.len(),
    });
    Ok(Done { pass: chain.max_residual() <= cfg.tolerances.overlap, result, trace: Some(chain.to_csv()) })
}

fn harmonic_ops(cfg: &RunConfig) -> CommandResult {
    let h = &cfg.harmonic;
    let arcs: Vec<(f64, f64)> = h.arcs.iter().map(|a| (a[0], a[1])).collect();
    let gamma = BoundaryArcSet::new(&arcs)?;
    let measure = harmonic::arc_measure(&gamma);
    let mut pass = true;
    let certificate = match h.delta {
        Some(delta) => {
            let cert = harmonic::certificate_build(&gamma, delta, &h.certificate)?;
            let report = cert.report.clone().ok_or_else(|| Error::Precondition("certificate without report".into()))?;
            pass &= report.pass;
            json!({ "delta": delta, "degree": cert.degree(), "report": report })
        }
        None => Value::Null,
    };
    let mut kernels = Vec::new();
    let mut first_error = None;
    for &eps in &h.epsilons {
        match harmonic::runge_kernel(eps, &h.kernel) {
            Ok(k) => {
                pass &= k.delta > 0.0 && k.report.max_re_complement < 0.0;
                kernels.push(json!({ "epsilon": eps, "delta": k.delta, "report": k.report }));
            }
            Err(e) => {
                kernels.push(json!({ "epsilon": eps, "error": error_json(&e) }));
                first_error.get_or_insert(e);
            }
        }
    }
    let result = json!({ "arcs": h.arcs, "measure": measure, "certificate": certificate, "kernels": kernels });
    match first_error {
        Some(error) => Err(Failed { error, partial: result }),
        None => Ok(Done { pass, result, trace: None }),
    }
}

fn push_disc(cfg: &RunConfig) -> CommandResult {
    let path = cfg.push.problem.as_ref().ok_or_else(|| Error::Config("push-disc needs a problem file".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let problem: PushProblem = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let family = deform::push_disc(&problem, &cfg.push.config, &cfg.tolerances, cfg.exec)?;
    let pass = family.report.passes();
    let result = json!({ "degree": family.degree(), "terms": family.terms.len(), "report": family.report });
    Ok(Done { pass, result, trace: None })
}

fn verify(cfg: &RunConfig) -> CommandResult {
    let props = suite::verify_all(cfg.seed, &cfg.verify, &cfg.tolerances, cfg.exec);
    let pass = props.iter().all(|p| p.pass);
    let failed: Vec<&str> = props.iter().filter(|p| !p.pass).map(|p| p.name.as_str()).collect();
    let result = json!({ "properties": props, "failed": failed, "config": cfg.verify });
    Ok(Done { pass, result, trace: None })
}

/// Writes the summary (and trace) of an outcome into the output directory.
pub fn write_outputs(cfg: &RunConfig, outcome: &Outcome, elapsed: f64) -> Result<()> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(&outcome.summary).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(dir.join(&cfg.output.summary), text)?;
    if let Some(trace) = &outcome.trace {
        fs::write(dir.join(&cfg.output.trace), trace)?;
    }
    fs::write(dir.join(&cfg.output.log), format!("elapsed_seconds = {elapsed:.3}\nexit_code = {}\n", outcome.code))?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "loopcont", version, about = "Analytic continuation on loop spaces of the complex quadric")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run every kernel sequentially.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continue f around the demonstration curve and compare with the period of ω.
    DemoMonodromy,
    /// Continue f along a LoopCurve file.
    Continue {
        curve: Option<PathBuf>,
    },
    /// Arc measures, certificates and Runge-type kernels.
    Harmonic,
    /// Push a disc according to a PushProblem file.
    PushDisc {
        problem: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Verify,
    /// Print the default configuration as TOML.
    DefaultConfig,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            RunConfig::from_toml(&text)
        }
        None => Ok(RunConfig::default()),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let mut cfg = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let command = match &cli.command {
        Command::DemoMonodromy => CommandName::DemoMonodromy,
        Command::Continue { curve } => {
            if let Some(c) = curve {
                cfg.continuation.curve = Some(c.clone());
            }
            CommandName::Continue
        }
        Command::Harmonic => CommandName::Harmonic,
        Command::PushDisc { problem } => {
            if let Some(p) = problem {
                cfg.push.problem = Some(p.clone());
            }
            CommandName::PushDisc
        }
        Command::Verify => CommandName::Verify,
        Command::DefaultConfig => {
            print!("{}", toml::to_string_pretty(&RunConfig::default()).expect("default config serializes"));
            return EXIT_OK;
        }
    };
    if let Some(c) = cfg.command {
        if c != command {
            eprintln!("error: config is for `{}`, not `{}`", c.as_str(), command.as_str());
            return EXIT_CONFIG;
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.output.dir = o;
    }
    if cli.sequential {
        cfg.exec = ExecMode::Sequential;
    }
    let start = Instant::now();
    let outcome = execute(&cfg, command);
    if let Err(e) = write_outputs(&cfg, &outcome, start.elapsed().as_secs_f64()) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    println!("{}", serde_json::to_string(&outcome.summary).unwrap_or_default());
    outcome.code
}
