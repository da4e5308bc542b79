//! Command-line front end. Exit codes: 0 success, 1 usage or input error,
//! 2 numerical-validity error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decompose::{decompose, reconstruct, FactorizationDoc, Mode};
use crate::dynamics::{propagate_ode, propagate_piecewise, Propagation, QuantumState, SimOptions, DEFAULT_ODE_TOL, DEFAULT_SAMPLES_PER_PULSE};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MatrixDoc};
use crate::pulse::{schedule_from_factorization, validate_schedule, Policy, PulseSchedule, ScheduleDoc, Shape};
use crate::schemes::{SchemeKind, SchemeRequest};
use crate::system::{LevelSystem, Preset, SystemDoc, SystemRef, PRESET_NAMES};

pub const FACTORS_FILE: &str = "factors.json";
pub const SCHEDULE_FILE: &str = "schedule.json";
pub const VALIDATION_FILE: &str = "validation.json";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
/// Environment variable overriding the default ODE tolerance.
pub const TOL_ENV: &str = "QLGC_TOL";

#[derive(Debug, Parser)]
#[command(name = "qlgc", version, about = "Pulse sequences for N-level ladder systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factorize a unitary (matrix JSON) into rotation factors.
    Decompose {
        /// Matrix JSON file {"n", "re", "im"}.
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::ModPhase)]
        mode: ModeArg,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Run a control scheme end to end: factors, schedule, validation, time series.
    Scheme(SchemeArgs),
    /// Simulate a schedule JSON.
    Simulate {
        #[arg(long)]
        schedule: PathBuf,
        /// ground, level:K or weights:w1,w2,...
        #[arg(long, default_value = "ground")]
        state: String,
        #[arg(long, value_enum, default_value_t = Engine::Analytic)]
        engine: Engine,
        /// ODE relative tolerance (default from QLGC_TOL, else 1e-9).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_PULSE)]
        samples: usize,
        /// Observable matrix JSON for the obs_avg column.
        #[arg(long)]
        observable: Option<PathBuf>,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Turn a factorization JSON into a pulse schedule.
    Synthesize {
        #[arg(long)]
        factors: PathBuf,
        /// Preset name or system JSON file.
        #[arg(long)]
        system: String,
        #[command(flatten)]
        pulse: PulseArgs,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// List or show the built-in systems.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    List,
    Show { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    ModPhase,
    Exact,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ModPhase => Mode::ModPhase,
            ModeArg::Exact => Mode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analytic,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Swp,
    Gwp,
}

#[derive(Debug, Clone, Args)]
pub struct PulseArgs {
    #[arg(long, value_enum, default_value_t = ShapeArg::Swp)]
    pub shape: ShapeArg,
    /// Fixed pulse length, e.g. 200ps (default when no --max-field).
    #[arg(long, conflicts_with = "max_field")]
    pub pulse_length: Option<String>,
    /// Fixed field peak in V/m.
    #[arg(long)]
    pub max_field: Option<f64>,
    /// Square-wave rise/decay time.
    #[arg(long, default_value = "20ps")]
    pub tau0: String,
    /// Free-evolution gap between pulses.
    #[arg(long, default_value = "0")]
    pub gap: String,
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    /// transfer, invert, superpose or maximize (optional with --request).
    pub kind: Option<String>,
    /// Scheme request JSON; flags below override its fields.
    #[arg(long)]
    pub request: Option<PathBuf>,
    /// Preset name or system JSON file.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Observable matrix JSON (maximize).
    #[arg(long)]
    pub observable: Option<PathBuf>,
    #[command(flatten)]
    pub pulse: PulseArgs,
    #[arg(long, value_enum, default_value_t = Engine::Analytic)]
    pub engine: Engine,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_PULSE)]
    pub samples: usize,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

/// Parses a time such as `200ps`, `1.5ns`, `2e-10s` or `2e-10` (seconds).
pub fn parse_time(s: &str) -> Result<f64> {
    let s = s.trim();
    let units = [("fs", 1e-15), ("ps", 1e-12), ("ns", 1e-9), ("us", 1e-6), ("ms", 1e-3), ("s", 1.0)];
    let (num, scale) = units
        .iter()
        .find_map(|(u, f)| s.strip_suffix(u).map(|n| (n, *f)))
        .unwrap_or((s, 1.0));
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse time {s:?}")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {s:?}")));
    }
    Ok(v * scale)
}

/// Parses `ground`, `level:K` or `weights:w1,w2,...` for an `n`-level system.
pub fn parse_state(s: &str, n: usize) -> Result<QuantumState> {
    if s == "ground" {
        return QuantumState::ground(n);
    }
    if let Some(k) = s.strip_prefix("level:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad level in {s:?}")))?;
        return QuantumState::basis(n, k);
    }
    if let Some(w) = s.strip_prefix("weights:") {
        let w = w
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidParameter(format!("bad weights in {s:?}")))?;
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: w.len(),
            });
        }
        return QuantumState::ensemble(&w);
    }
    Err(Error::InvalidParameter(format!("unknown state {s:?} (ground, level:K, weights:...)")))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(path)
}

fn system_ref(arg: &str) -> Result<SystemRef> {
    if Preset::from_name(arg).is_ok() {
        return Ok(SystemRef::Name(arg.to_string()));
    }
    let path = Path::new(arg);
    if path.exists() {
        return Ok(SystemRef::Inline(read_json::<SystemDoc>(path)?));
    }
    Err(Error::UnknownPreset(arg.to_string()))
}

fn tolerance(flag: Option<f64>) -> Result<f64> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(TOL_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{TOL_ENV}={v:?} is not a number"))),
        Err(_) => Ok(DEFAULT_ODE_TOL),
    }
}

impl PulseArgs {
    fn shape(&self) -> Result<Shape> {
        Ok(match self.shape {
            ShapeArg::Swp => Shape::Swp {
                tau0: parse_time(&self.tau0)?,
            },
            ShapeArg::Gwp => Shape::Gwp,
        })
    }

    fn policy(&self) -> Result<Policy> {
        match (&self.pulse_length, self.max_field) {
            (Some(_), Some(_)) => Err(Error::InvalidParameter("give either --pulse-length or --max-field".into())),
            (None, Some(max_field)) => Ok(Policy::FixedAmplitude { max_field }),
            (Some(len), None) => Ok(Policy::FixedDuration {
                duration: parse_time(len)?,
            }),
            (None, None) => Ok(Policy::FixedDuration { duration: 200e-12 }),
        }
    }

    fn build(&self, f: &crate::decompose::Factorization, system: &LevelSystem) -> Result<PulseSchedule> {
        schedule_from_factorization(f, system, self.shape()?, self.policy()?, parse_time(&self.gap)?)
    }
}

fn simulate(s: &PulseSchedule, state: &QuantumState, engine: Engine, tol: f64, opts: &SimOptions) -> Result<Propagation> {
    match engine {
        Engine::Analytic => propagate_piecewise(s, state, opts),
        Engine::Ode => propagate_ode(s, state, tol, opts),
    }
}

fn report_schedule(out: &mut dyn Write, s: &PulseSchedule) -> Result<()> {
    let report = validate_schedule(s);
    writeln!(out, "pulses: {}", s.pulses().len())?;
    writeln!(out, "total duration: {:.4} ps", s.total_duration() * 1e12)?;
    for p in s.pulses() {
        writeln!(
            out,
            "  transition {}  {:.4} ps  peak field {:.6e} V/m  phase {:.6} rad",
            p.transition,
            p.duration() * 1e12,
            p.peak_field(),
            p.phase
        )?;
    }
    for w in report.warnings() {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

fn cmd_decompose(input: &Path, mode: Mode, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let doc: MatrixDoc = read_json(input)?;
    let u = doc.to_matrix()?;
    let f = decompose(&u, mode)?;
    let err = (reconstruct(&f)? - &u).norm();
    let path = write_json(dir, FACTORS_FILE, &f.to_doc())?;
    writeln!(out, "factors: {}", f.len())?;
    writeln!(out, "reconstruction error: {err:e}")?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

fn cmd_scheme(a: &SchemeArgs, out: &mut dyn Write) -> Result<()> {
    let mut req = match &a.request {
        Some(p) => read_json::<SchemeRequest>(p)?,
        None => {
            let kind = a
                .kind
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("scheme kind or --request required".into()))?;
            SchemeRequest {
                scheme: SchemeKind::parse(kind)?,
                system: SystemRef::Name("rb4".into()),
                weights: None,
                r: None,
                theta: None,
                observable: None,
            }
        }
    };
    if let (Some(_), Some(kind)) = (&a.request, &a.kind) {
        req.scheme = SchemeKind::parse(kind)?;
    }
    if let Some(s) = &a.system {
        req.system = system_ref(s)?;
    }
    if a.weights.is_some() {
        req.weights = a.weights.clone();
    }
    if a.r.is_some() {
        req.r = a.r.clone();
    }
    if a.theta.is_some() {
        req.theta = a.theta.clone();
    }
    if let Some(p) = &a.observable {
        req.observable = Some(read_json(p)?);
    }
    let tol = tolerance(a.tol)?;
    let (system, result) = req.run()?;
    let schedule = a.pulse.build(&result.factorization, &system)?;

    let opts = SimOptions {
        samples_per_pulse: a.samples,
        observable: match &result.objective {
            crate::schemes::Objective::Expectation(m) => Some(m.clone()),
            _ => None,
        },
        t_end: None,
    };
    let prop = simulate(&schedule, &result.initial, a.engine, tol, &opts)?;
    let achieved = result.objective.evaluate(&prop.final_state.density_matrix());

    write_json(&a.out, FACTORS_FILE, &result.factorization.to_doc())?;
    write_json(&a.out, SCHEDULE_FILE, &schedule.to_doc())?;
    write_json(&a.out, VALIDATION_FILE, &validate_schedule(&schedule))?;
    prop.series.write_csv(&a.out.join(TIMESERIES_FILE))?;

    writeln!(out, "scheme: {} on {}", result.name, system.name())?;
    writeln!(out, "factors: {}", result.factorization.len())?;
    report_schedule(out, &schedule)?;
    for note in &result.notes {
        writeln!(out, "{note}")?;
    }
    writeln!(out, "objective: {}", result.objective.describe())?;
    writeln!(out, "predicted: {:.12e}", result.predicted_value)?;
    writeln!(out, "achieved: {achieved:.12e}")?;
    if result.predicted_value != 0.0 {
        writeln!(out, "achieved/predicted: {:.9}", achieved / result.predicted_value)?;
    }
    writeln!(out, "wrote {}", a.out.display())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    schedule: &Path,
    state: &str,
    engine: Engine,
    tol: Option<f64>,
    samples: usize,
    observable: Option<&Path>,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    let doc: ScheduleDoc = read_json(schedule)?;
    let s = doc.into_schedule()?;
    let state = parse_state(state, s.level_count())?;
    let observable: Option<ComplexMatrix> = match observable {
        Some(p) => Some(read_json::<MatrixDoc>(p)?.to_matrix()?),
        None => None,
    };
    let opts = SimOptions {
        samples_per_pulse: samples,
        observable,
        t_end: None,
    };
    let prop = simulate(&s, &state, engine, tolerance(tol)?, &opts)?;
    std::fs::create_dir_all(dir)?;
    let path = dir.join(TIMESERIES_FILE);
    prop.series.write_csv(&path)?;
    if let Some(last) = prop.series.last() {
        let pops: Vec<String> = last.populations.iter().map(|p| format!("{p:.9}")).collect();
        writeln!(out, "final populations: {}", pops.join(" "))?;
    }
    writeln!(out, "max unitarity defect: {:e}", prop.max_unitarity_defect)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

fn cmd_synthesize(factors: &Path, system: &str, pulse: &PulseArgs, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let f = read_json::<FactorizationDoc>(factors)?.into_factorization()?;
    let system = system_ref(system)?.resolve()?;
    let s = pulse.build(&f, &system)?;
    write_json(dir, SCHEDULE_FILE, &s.to_doc())?;
    write_json(dir, VALIDATION_FILE, &validate_schedule(&s))?;
    report_schedule(out, &s)?;
    writeln!(out, "wrote {}", dir.display())?;
    Ok(())
}

fn cmd_presets(action: &PresetAction, out: &mut dyn Write) -> Result<()> {
    match action {
        PresetAction::List => {
            for name in PRESET_NAMES {
                let sys = Preset::from_name(name)?.system();
                writeln!(out, "{name}  {} levels", sys.level_count())?;
            }
        }
        PresetAction::Show { name } => {
            let preset = Preset::from_name(name)?;
            let sys = preset.system();
            writeln!(out, "{}", preset.name())?;
            for (k, v) in preset.parameters() {
                writeln!(out, "  {k} = {v:e}")?;
            }
            writeln!(out, "  min_detuning = {:e} rad/s", sys.min_detuning())?;
            writeln!(out, "{}", serde_json::to_string_pretty(&sys.to_doc())?)?;
        }
    }
    Ok(())
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotUnitary { .. } | Error::StepUnderflow { .. } | Error::ZeroPivot => 2,
        _ => 1,
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Decompose { input, mode, out: dir } => cmd_decompose(input, (*mode).into(), dir, out),
        Command::Scheme(a) => cmd_scheme(a, out),
        Command::Simulate {
            schedule,
            state,
            engine,
            tol,
            samples,
            observable,
            out: dir,
        } => cmd_simulate(schedule, state, *engine, *tol, *samples, observable.as_deref(), dir, out),
        Command::Synthesize { factors, system, pulse, out: dir } => cmd_synthesize(factors, system, pulse, dir, out),
        Command::Presets { action } => cmd_presets(action, out),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_suffixes() {
        assert!((parse_time("200ps").unwrap() - 200e-12).abs() < 1e-24);
        assert!((parse_time("1.5ns").unwrap() - 1.5e-9).abs() < 1e-21);
        assert_eq!(parse_time("2e-10s").unwrap(), 2e-10);
        assert_eq!(parse_time("2e-10").unwrap(), 2e-10);
        assert!(parse_time("fast").is_err());
        assert!(parse_time("-3ps").is_err());
    }

    #[test]
    fn states() {
        assert!(parse_state("ground", 3).is_ok());
        assert!(parse_state("level:3", 3).is_ok());
        assert!(parse_state("level:4", 3).is_err());
        assert!(parse_state("weights:0.5,0.5", 2).is_ok());
        assert!(parse_state("weights:0.5,0.5", 3).is_err());
        assert!(parse_state("excited", 3).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["qlgc", "bogus"], &mut o, &mut e), 1);
        assert_eq!(run(["qlgc", "presets", "show", "xyz"], &mut o, &mut e), 1);
        assert_eq!(run(["qlgc", "--help"], &mut o, &mut e), 0);
    }
}
