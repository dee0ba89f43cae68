//! Command-line front end.
//!
//! Flags override values from `--config` (a flat TOML file). The output
//! directory falls back to `PHASELESS_STFT_OUT`, then to the current
//! directory. Exit codes: 0 ok, 1 verification failure, 2 usage or I/O
//! error, 3 ambiguous recovery, 4 failed recovery.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::ambiguity::{act, act_signal_only, quotient_error, verify_invariance, AmbiguityElement, Mode};
use crate::bounds::{blind_measurement_set, blind_measurement_set_closed, bound_report, known_window_measurement_set, write_bound_csv};
use crate::error::{Error, Result};
use crate::harness::{
    run_figure1, run_figure4, run_proof_solver_sweep, write_figure4_csv, write_sweep_csv, ExperimentGrid, RunManifest,
    SweepCase, SweepMode,
};
use crate::problem::{derive_seed, random_pair, Distribution, ProblemParams, Rng, SignalPair};
use crate::proof_solver::{recover_blind, recover_known_window, verify_proposition_a, verify_proposition_b, RecoveryResult, Status};
use crate::rrr::RrrConfig;
use crate::stft::{measure, MeasurementSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_AMBIGUOUS: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "PHASELESS_STFT_OUT";

/// Largest relative magnitude change tolerated by the invariance check.
const INVARIANCE_TOL: f64 = 1e-10;
/// Smallest acceptable fraction of unique random trials in `verify`.
const UNIQUE_FRACTION: f64 = 0.95;

#[derive(Debug, Parser)]
#[command(name = "phaseless-stft", version, about = "Phase retrieval from periodic STFT magnitudes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Signal length.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Window length; a list such as `1-11` or `3,5` for grids.
    #[arg(long = "W", global = true, value_parser = parse_list)]
    pub w: Option<List>,
    /// Separation between sections; a list for grids.
    #[arg(long = "L", global = true, value_parser = parse_list)]
    pub l: Option<List>,
    /// Magnitudes per signal entry; a list for grids.
    #[arg(long = "K", global = true, value_parser = parse_list)]
    pub k: Option<List>,
    /// Iterative solver step parameter.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Stop when the relative step falls below this.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iteration cap for the iterative solver.
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Master seed; every trial seed derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials per grid cell or proposition check.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat TOML file with any of the flags above as keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the measurement-count bounds.
    Bound,
    /// Run an experiment and write its table and manifest.
    Simulate {
        #[arg(value_enum)]
        experiment: Experiment,
    },
    /// Recover a signal from the prescribed measurement set.
    Recover {
        #[arg(value_enum)]
        mode: RecoverMode,
        /// Measurements CSV (`m,r,magnitude`) instead of a generated instance.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Window JSON (`[[re, im], ...]`), required with `--input` in known mode.
        #[arg(long)]
        window: Option<PathBuf>,
        /// Use only the bound-sized blind set, without closure samples.
        #[arg(long)]
        no_closure: bool,
    },
    /// Check group invariance and the uniqueness propositions.
    Verify {
        /// Replace the group action with a broken one (negative control).
        #[arg(long, hide = true)]
        break_action: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Figure4,
    Figure1,
    Proofsweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecoverMode {
    Known,
    Blind,
}

/// Comma-separated values and inclusive `a-b` ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List(pub Vec<usize>);

pub fn parse_list(s: &str) -> std::result::Result<List, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                let b: usize = b.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                if a > b {
                    return Err(format!("empty range {part}"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|e| format!("{part}: {e}"))?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(out))
}

/// Keys accepted in the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "W")]
    w: Option<ListValue>,
    #[serde(rename = "L")]
    l: Option<ListValue>,
    #[serde(rename = "K")]
    k: Option<ListValue>,
    beta: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    seed: Option<u64>,
    trials: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ListValue {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

impl ListValue {
    fn into_list(self) -> Result<List> {
        match self {
            Self::One(v) => Ok(List(vec![v])),
            Self::Many(v) if !v.is_empty() => Ok(List(v)),
            Self::Many(_) => Err(Error::InvalidParams("empty list in config".into())),
            Self::Text(s) => parse_list(&s).map_err(Error::InvalidParams),
        }
    }
}

/// Fills unset flags from the config file.
fn merge_config(mut opts: Options) -> Result<Options> {
    let Some(path) = &opts.config else { return Ok(opts) };
    let text = std::fs::read_to_string(path)?;
    let file: FileConfig = toml::from_str(&text).map_err(|e| Error::InvalidParams(format!("config: {e}")))?;
    opts.n = opts.n.or(file.n);
    if opts.w.is_none() {
        opts.w = file.w.map(ListValue::into_list).transpose()?;
    }
    if opts.l.is_none() {
        opts.l = file.l.map(ListValue::into_list).transpose()?;
    }
    if opts.k.is_none() {
        opts.k = file.k.map(ListValue::into_list).transpose()?;
    }
    opts.beta = opts.beta.or(file.beta);
    opts.tol = opts.tol.or(file.tol);
    opts.max_iter = opts.max_iter.or(file.max_iter);
    opts.seed = opts.seed.or(file.seed);
    opts.trials = opts.trials.or(file.trials);
    opts.out = opts.out.or(file.out);
    opts.format = opts.format.or(file.format);
    Ok(opts)
}

impl Options {
    fn single(list: &Option<List>, name: &str) -> Result<Option<usize>> {
        match list {
            None => Ok(None),
            Some(List(v)) if v.len() == 1 => Ok(Some(v[0])),
            Some(_) => Err(Error::InvalidParams(format!("--{name} takes a single value here"))),
        }
    }

    fn params(&self) -> Result<ProblemParams> {
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Error::InvalidParams(format!("--{name} is required")));
        ProblemParams::new(
            need(self.n, "N")?,
            need(Self::single(&self.w, "W")?, "W")?,
            need(Self::single(&self.l, "L")?, "L")?,
        )
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    fn rrr(&self) -> RrrConfig {
        let d = RrrConfig::default();
        RrrConfig {
            beta: self.beta.unwrap_or(d.beta),
            tol: self.tol.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            ..d
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Reports go to `out`, diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let opts = merge_config(cli.opts)?;
    match cli.command {
        Command::Bound => cmd_bound(&opts, out),
        Command::Simulate { experiment } => cmd_simulate(&opts, experiment, out),
        Command::Recover {
            mode,
            input,
            window,
            no_closure,
        } => cmd_recover(&opts, mode, input.as_deref(), window.as_deref(), no_closure, out),
        Command::Verify { break_action } => cmd_verify(&opts, break_action, out),
    }
}

fn cmd_bound(opts: &Options, out: &mut dyn Write) -> Result<i32> {
    let p = opts.params()?;
    let report = bound_report(&p);
    match opts.format {
        Some(Format::Json) => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Some(Format::Csv) => {
            writeln!(out, "N,W,L,alpha,known,blind,cap_known,cap_blind")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.n(),
                p.w(),
                p.l(),
                report.alpha,
                report.known_window_count,
                report.blind_count,
                report.four_n,
                report.four_n_plus_2w
            )?;
        }
        None => writeln!(
            out,
            "N={} W={} L={} alpha={} known={} blind={} cap_known={} cap_blind={}",
            p.n(),
            p.w(),
            p.l(),
            report.alpha,
            report.known_window_count,
            report.blind_count,
            report.four_n,
            report.four_n_plus_2w
        )?,
    }
    Ok(EXIT_OK)
}

fn write_table(dir: &Path, name: &str, format: Format, csv: impl FnOnce(&mut Vec<u8>) -> Result<()>, json: serde_json::Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            csv(&mut buf)?;
            let path = dir.join(format!("{name}.csv"));
            std::fs::write(&path, buf)?;
            path
        }
        Format::Json => {
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&json)?)?;
            path
        }
    };
    Ok(path)
}

fn cmd_simulate(opts: &Options, experiment: Experiment, out: &mut dyn Write) -> Result<i32> {
    let dir = opts.out_dir();
    let format = opts.format.unwrap_or(Format::Csv);
    let seed = opts.seed();
    let (name, config, path) = match experiment {
        Experiment::Figure4 => {
            let d = ExperimentGrid::default();
            let grid = ExperimentGrid {
                n: opts.n.unwrap_or(d.n),
                k_list: opts.k.clone().map_or(d.k_list, |l| l.0),
                l_range: opts.l.clone().map_or(d.l_range, |l| l.0),
                w_range: opts.w.clone().map_or(d.w_range, |l| l.0),
                trials: opts.trials.unwrap_or(d.trials),
                seed,
                rrr: opts.rrr(),
                ..d
            };
            let res = run_figure4(&grid)?;
            let path = write_table(&dir, "figure4", format, |b| write_figure4_csv(&res, b), serde_json::to_value(&res.rows)?)?;
            writeln!(out, "figure4: {} rows -> {}", res.rows.len(), path.display())?;
            ("figure4", serde_json::to_value(&grid)?, path)
        }
        Experiment::Figure1 => {
            let n = opts.n.unwrap_or(100);
            let l_list = opts.l.clone().map_or(vec![1, 2, 4, 5, 10, 20], |l| l.0);
            let w_list = opts.w.clone().map_or((2..=n / 2).collect(), |l| l.0);
            let rows: Vec<_> = w_list.iter().flat_map(|&w| run_figure1(n, &l_list, w..=w)).collect();
            let path = write_table(&dir, "figure1", format, |b| write_bound_csv(&rows, b), serde_json::to_value(&rows)?)?;
            writeln!(out, "figure1: {} rows -> {}", rows.len(), path.display())?;
            let config = serde_json::json!({"N": n, "L": l_list, "W": w_list});
            ("figure1", config, path)
        }
        Experiment::Proofsweep => {
            let cases = match (opts.n, &opts.w, &opts.l) {
                (Some(n), Some(w), Some(l)) => {
                    let mut c = Vec::new();
                    for &w in &w.0 {
                        for &l in &l.0 {
                            for mode in [SweepMode::Known, SweepMode::Blind] {
                                c.push(SweepCase { mode, n, w, l });
                            }
                        }
                    }
                    c
                }
                _ => vec![
                    SweepCase { mode: SweepMode::Known, n: 16, w: 4, l: 1 },
                    SweepCase { mode: SweepMode::Blind, n: 12, w: 3, l: 1 },
                    SweepCase { mode: SweepMode::PropA, n: 16, w: 3, l: 1 },
                    SweepCase { mode: SweepMode::PropB, n: 16, w: 3, l: 1 },
                ],
            };
            let trials = opts.trials.unwrap_or(100);
            let rows = run_proof_solver_sweep(&cases, trials, seed)?;
            let path = write_table(&dir, "proofsweep", format, |b| write_sweep_csv(&rows, b), serde_json::to_value(&rows)?)?;
            writeln!(out, "proofsweep: {} rows -> {}", rows.len(), path.display())?;
            let config = serde_json::json!({"cases": cases, "trials": trials});
            ("proofsweep", config, path)
        }
    };
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    RunManifest::new(&format!("simulate {name}"), seed, config, vec![file]).write(&dir.join(format!("{name}.manifest.json")))?;
    Ok(EXIT_OK)
}

fn read_window(path: &Path) -> Result<Vec<Complex64>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn status_code(res: &RecoveryResult) -> i32 {
    match res.status {
        Status::Unique => EXIT_OK,
        Status::Ambiguous => EXIT_AMBIGUOUS,
        Status::Failed => EXIT_FAILED,
    }
}

fn cmd_recover(
    opts: &Options,
    mode: RecoverMode,
    input: Option<&Path>,
    window: Option<&Path>,
    no_closure: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let p = opts.params()?;
    let (set, truth): (MeasurementSet, Option<SignalPair>) = match input {
        Some(path) => (MeasurementSet::read_csv(std::fs::File::open(path)?)?, None),
        None => {
            let pair = random_pair(&p, Distribution::ComplexGaussian, &mut Rng::new(opts.seed()));
            let idx = match mode {
                RecoverMode::Known => known_window_measurement_set(&p)?,
                RecoverMode::Blind if no_closure => blind_measurement_set(&p)?,
                RecoverMode::Blind => blind_measurement_set_closed(&p)?,
            };
            (measure(&p, &pair, &idx)?, Some(pair))
        }
    };
    let (res, qmode) = match mode {
        RecoverMode::Known => {
            let w = match (window, &truth) {
                (Some(path), _) => read_window(path)?,
                (None, Some(t)) => t.w.clone(),
                (None, None) => return Err(Error::InvalidParams("--window is required with --input in known mode".into())),
            };
            (recover_known_window(&set, &w, &p)?, Mode::KnownWindow)
        }
        RecoverMode::Blind => (recover_blind(&set, &p)?, Mode::Blind),
    };
    let mut report = serde_json::to_value(&res)?;
    if let (Some(t), Status::Unique) = (&truth, res.status) {
        report["error"] = serde_json::json!(quotient_error(&res.estimate, t, &p, qmode)?);
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(status_code(&res))
}

fn cmd_verify(opts: &Options, break_action: bool, out: &mut dyn Write) -> Result<i32> {
    let trials = opts.trials.unwrap_or(20);
    let seed = opts.seed();
    let mut all_ok = true;
    let mut line = |out: &mut dyn Write, name: &str, ok: bool, detail: String| -> Result<()> {
        all_ok &= ok;
        writeln!(out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" })?;
        Ok(())
    };

    let geometries = [(11, 3, 1), (12, 4, 2), (16, 5, 4), (20, 6, 5), (9, 9, 3)];
    let mut worst: f64 = 0.0;
    for (gi, &(n, w, l)) in geometries.iter().enumerate() {
        let p = ProblemParams::new(n, w, l)?;
        for t in 0..trials {
            let mut rng = Rng::new(derive_seed(seed, &[0, gi as u64, t as u64]));
            let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
            let g = AmbiguityElement::random(&p, &mut rng);
            let dev = if break_action {
                let moved = act_signal_only(&g, &pair, &p)?;
                crate::ambiguity::magnitude_deviation(&p, &pair, &moved)
            } else {
                verify_invariance(&g, &pair, &p)?
            };
            worst = worst.max(dev);
        }
    }
    line(out, "invariance", worst <= INVARIANCE_TOL, format!("max relative deviation {worst:.3e}"))?;

    // Canonical forms separate orbits: the action leaves them unchanged.
    let p = ProblemParams::new(12, 4, 2)?;
    let mut rng = Rng::new(derive_seed(seed, &[1]));
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
        let g = AmbiguityElement::random(&p, &mut rng);
        let moved = if break_action { act_signal_only(&g, &pair, &p)? } else { act(&g, &pair, &p)? };
        worst = worst.max(quotient_error(&moved, &pair, &p, Mode::Blind)?);
    }
    line(out, "orbit", worst <= 1e-8, format!("max quotient error {worst:.3e}"))?;

    for (w, a) in [(2, 1), (3, 1), (4, 1), (4, 2), (5, 2), (6, 1)] {
        let mut rng = Rng::new(derive_seed(seed, &[2, w as u64, a as u64]));
        let r = verify_proposition_a(w, a, None, trials, &mut rng)?;
        let fixed_ok = r.fixed_cases.iter().filter(|c| c.applicable).all(|c| c.passed());
        line(
            out,
            &format!("propA W={w} alpha={a}"),
            r.fraction >= UNIQUE_FRACTION && fixed_ok,
            format!("unique {}/{}, fixed cases {}", r.unique, r.trials, if fixed_ok { "ok" } else { "failed" }),
        )?;
    }
    for (w, a) in [(3, 1), (5, 1), (5, 2)] {
        let mut rng = Rng::new(derive_seed(seed, &[3, w as u64, a as u64]));
        let r = verify_proposition_b(w, a, trials, &mut rng)?;
        let fixed_ok = r.fixed_cases.iter().filter(|c| c.applicable).all(|c| c.passed());
        line(
            out,
            &format!("propB W={w} alpha={a}"),
            r.fraction >= UNIQUE_FRACTION && fixed_ok,
            format!("unique {}/{}, fixed cases {}", r.unique, r.trials, if fixed_ok { "ok" } else { "failed" }),
        )?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_VERIFY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("1-3,7").unwrap(), List(vec![1, 2, 3, 7]));
        assert_eq!(parse_list("5").unwrap(), List(vec![5]));
        assert!(parse_list("3-1").is_err());
        assert!(parse_list("x").is_err());
        assert!(parse_list("").is_err());
    }

    #[test]
    fn bound_output_line() {
        let mut buf = Vec::new();
        let code = run(["phaseless-stft", "bound", "--N", "11", "--W", "3", "--L", "1"], &mut buf);
        assert_eq!(code, EXIT_OK);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("known=31 blind=33"), "{text}");
    }

    #[test]
    fn usage_errors_exit_two() {
        let mut buf = Vec::new();
        assert_eq!(run(["phaseless-stft", "bound", "--N", "11", "--W", "12", "--L", "1"], &mut buf), EXIT_USAGE);
        assert_eq!(run(["phaseless-stft", "bound", "--N", "11"], &mut buf), EXIT_USAGE);
        assert_eq!(run(["phaseless-stft", "nonsense"], &mut buf), EXIT_USAGE);
    }

    #[test]
    fn config_file_fills_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "N = 100\nW = 10\nL = 4\nformat = \"json\"\n").unwrap();
        let mut buf = Vec::new();
        let code = run(["phaseless-stft", "bound", "--config", path.to_str().unwrap()], &mut buf);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["known_window_count"], 361);
        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert_eq!(run(["phaseless-stft", "bound", "--config", path.to_str().unwrap()], &mut Vec::new()), EXIT_USAGE);
    }
}
