//! Command-line front end.
//!
//! Every subcommand resolves its flags into a [`RunSpec`], makes one library
//! call and renders the result as a [`Report`], either CSV (default) or JSON.
//! Exit statuses: 0 success, 1 usage, 2 numerical failure, 3 I/O.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::aim::{optimize_alpha, xi_scan, AimRun, ConvergenceRecord};
use crate::error::Error;
use crate::model::{
    pt_energy_order0, pt_energy_order1, quasi_exact, FactorParams, PotentialParams, QuantumNumbers,
    QuasiExactSolution,
};
use crate::oracle::{default_window, oracle_eigenvalue, ShootConfig};
use crate::precision::Precision;

/// Environment variable supplying the default `--precision-bits`.
pub const PRECISION_ENV: &str = "AIMSPECTRA_PRECISION_BITS";

/// Default `optimize-alpha` grid; `1/sqrt(2)` is inserted at working precision.
const DEFAULT_ALPHA_GRID: [&str; 5] = ["0.3", "0.4", "0.5", "0.6", "0.8"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Library(e) if e.is_numerical() => 2,
            CliError::Library(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Converge,
    OptimizeAlpha,
    XiScan,
    Pt,
    Exact,
    Oracle,
    Scale,
}

#[derive(Debug, Parser)]
#[command(
    name = "aimspectra",
    version,
    about = "Bound-state energies of V(r) = -Z/r + g r + lambda r^2 by the asymptotic iteration method"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Energy E^(N) reached by root tracking from N = 10.
    Solve(Flags),
    /// Root sequence E^(N) and log10 error for N = 10..=N.
    Converge(Flags),
    /// Grid search over alpha scored by self-convergence at budget N.
    OptimizeAlpha(Flags),
    /// log10 error at fixed N across evaluation radii xi * r0.
    XiScan(Flags),
    /// Perturbative n = 0 energy, orders 0 and 1.
    Pt(Flags),
    /// Closed-form solution on the quasi-exact locus for (Z, lambda, l).
    Exact(Flags),
    /// Shooting-method eigenvalue in double precision.
    Oracle(Flags),
    /// Map (Z, g, lambda) onto lambda = 1 and print the energy factor.
    Scale(Flags),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct Flags {
    #[arg(long = "Z", default_value = "1")]
    z: String,
    #[arg(long, default_value = "0")]
    g: String,
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long, default_value_t = 0)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long)]
    alpha: Option<String>,
    /// Defaults to g / (2 alpha).
    #[arg(long)]
    beta: Option<String>,
    #[arg(long = "N", default_value_t = 80)]
    n_max: usize,
    #[arg(long, env = PRECISION_ENV, default_value_t = Precision::DEFAULT_BITS)]
    precision_bits: u32,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    reference: Option<String>,
    /// Energy window as LO,HI.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Comma-separated alpha values for optimize-alpha.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    alpha_grid: Option<Vec<String>>,
    /// Comma-separated xi values for xi-scan.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    xi_grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Fully validated invocation.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub params: PotentialParams,
    pub qn: QuantumNumbers,
    pub factor: Option<FactorParams>,
    pub n_max: usize,
    pub precision: Precision,
    pub xi: Option<f64>,
    pub reference: Option<Float>,
    pub window: Option<(Float, Float)>,
    pub alpha_grid: Option<Vec<Float>>,
    pub xi_grid: Option<Vec<f64>>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Outcome of [`parse_args`]: either a run or text clap wants shown (help, version).
#[derive(Debug)]
pub enum Parsed {
    Run(Box<RunSpec>),
    Display(String),
}

pub fn parse_args<I, T>(argv: I) -> Result<Parsed, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Ok(Parsed::Display(e.render().to_string()))
                }
                _ => {
                    let text = e.render().to_string();
                    let line = text.lines().next().unwrap_or("usage error").to_string();
                    Err(CliError::Usage(line))
                }
            };
        }
    };
    let (command, flags) = match cli.command {
        Sub::Solve(f) => (Command::Solve, f),
        Sub::Converge(f) => (Command::Converge, f),
        Sub::OptimizeAlpha(f) => (Command::OptimizeAlpha, f),
        Sub::XiScan(f) => (Command::XiScan, f),
        Sub::Pt(f) => (Command::Pt, f),
        Sub::Exact(f) => (Command::Exact, f),
        Sub::Oracle(f) => (Command::Oracle, f),
        Sub::Scale(f) => (Command::Scale, f),
    };
    Ok(Parsed::Run(Box::new(resolve(command, flags)?)))
}

fn resolve(command: Command, f: Flags) -> Result<RunSpec, CliError> {
    let precision = Precision::new(f.precision_bits)?;
    let params = PotentialParams::parse(&f.z, &f.g, &f.lambda, precision)?.validate()?;
    let factor = match (&f.alpha, &f.beta) {
        (Some(a), Some(b)) => Some(FactorParams::new(precision.parse(a)?, precision.parse(b)?)?),
        (Some(a), None) => Some(FactorParams::with_asymptotic_beta(
            precision.parse(a)?,
            &params,
        )?),
        (None, Some(_)) => return Err(CliError::Usage("--beta requires --alpha".into())),
        (None, None) => None,
    };
    let window = match &f.window {
        None => None,
        Some(w) => {
            let (lo, hi) = w
                .split_once(',')
                .ok_or_else(|| CliError::Usage(format!("--window expects LO,HI (got `{w}`)")))?;
            let lo = precision.parse(lo.trim())?;
            let hi = precision.parse(hi.trim())?;
            if lo >= hi {
                return Err(CliError::Usage(format!(
                    "--window needs LO < HI (got `{w}`)"
                )));
            }
            Some((lo, hi))
        }
    };
    let alpha_grid = f
        .alpha_grid
        .map(|g| {
            g.iter()
                .map(|a| precision.parse(a.trim()))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    if let Some(xi) = f.xi {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(CliError::Usage(format!("--xi must be > 0 (got {xi})")));
        }
    }
    let reference = f
        .reference
        .as_deref()
        .map(|r| precision.parse(r))
        .transpose()?;
    if command == Command::XiScan && reference.is_none() {
        return Err(CliError::Usage("xi-scan requires --reference".into()));
    }
    Ok(RunSpec {
        command,
        params,
        qn: QuantumNumbers::new(f.n, f.l),
        factor,
        n_max: f.n_max,
        precision,
        xi: f.xi,
        reference,
        window,
        alpha_grid,
        xi_grid: f.xi_grid,
        format: f.format,
        out: f.out,
    })
}

/// Log-error column: absent, finite, or the `-inf` of an exact hit.
mod log_error {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Number(f64),
        Special(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => Wire::Number(*x).serialize(s),
            Some(x) => Wire::Special(super::format_log_error(*x)).serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Option::<Wire>::deserialize(d)? {
            None => None,
            Some(Wire::Number(x)) => Some(x),
            Some(Wire::Special(s)) => Some(match s.as_str() {
                "-inf" => f64::NEG_INFINITY,
                "inf" => f64::INFINITY,
                "nan" => f64::NAN,
                other => {
                    return Err(serde::de::Error::custom(format!(
                        "bad log10 error `{other}`"
                    )))
                }
            }),
        })
    }
}

fn format_log_error(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:.4}")
    }
}

/// Decimal string that reads back to exactly the same value at its precision.
fn exact_string(x: &Float) -> String {
    Precision::format_exact(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    #[serde(rename = "N")]
    pub iteration: usize,
    pub energy: String,
    #[serde(with = "log_error")]
    pub log10_error: Option<f64>,
}

impl From<&ConvergenceRecord> for EnergyRow {
    fn from(r: &ConvergenceRecord) -> Self {
        EnergyRow {
            iteration: r.iteration,
            energy: exact_string(&r.energy),
            log10_error: r.log_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub alpha: String,
    #[serde(with = "log_error")]
    pub score: Option<f64>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiRow {
    pub xi: f64,
    #[serde(with = "log_error")]
    pub log10_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtRow {
    pub pt0: String,
    pub pt1: String,
    pub estimate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub g_required: String,
    pub energy: String,
    pub alpha: String,
    pub beta: String,
    pub on_locus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n: u32,
    pub l: u32,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    #[serde(rename = "Z")]
    pub z: String,
    pub g: String,
    pub lambda: String,
    pub energy_factor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "records", rename_all = "kebab-case")]
pub enum Records {
    Solve(Vec<EnergyRow>),
    Converge(Vec<EnergyRow>),
    OptimizeAlpha(Vec<AlphaRow>),
    XiScan(Vec<XiRow>),
    Pt(Vec<PtRow>),
    Exact(Vec<ExactRow>),
    Oracle(Vec<OracleRow>),
    Scale(Vec<ScaleRow>),
}

/// Result of one command. High-precision values are carried as decimal
/// strings that parse back exactly at `precision_bits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub precision_bits: u32,
    #[serde(flatten)]
    pub records: Records,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// CSV with a header row; high-precision values use the significant
    /// figures of the working precision.
    pub fn to_csv(&self) -> String {
        let prec = Precision::new(self.precision_bits).expect("report precision was validated");
        let digits = prec.digits() as usize;
        let short = |s: &str| -> String {
            match prec.parse(s) {
                Ok(x) => Precision::format(&x, digits),
                Err(_) => s.to_string(),
            }
        };
        let opt = |v: &Option<f64>| v.map(format_log_error).unwrap_or_default();
        let mut out = String::new();
        let mut line = |cells: &[String]| {
            out.push_str(&cells.join(","));
            out.push('\n');
        };
        match &self.records {
            Records::Solve(rows) | Records::Converge(rows) => {
                line(&["N".into(), "energy".into(), "log10_error".into()]);
                for r in rows {
                    line(&[
                        r.iteration.to_string(),
                        short(&r.energy),
                        opt(&r.log10_error),
                    ]);
                }
            }
            Records::OptimizeAlpha(rows) => {
                line(&["alpha".into(), "score".into(), "selected".into()]);
                for r in rows {
                    line(&[short(&r.alpha), opt(&r.score), r.selected.to_string()]);
                }
            }
            Records::XiScan(rows) => {
                line(&["xi".into(), "log10_error".into()]);
                for r in rows {
                    line(&[r.xi.to_string(), opt(&r.log10_error)]);
                }
            }
            Records::Pt(rows) => {
                line(&["pt0".into(), "pt1".into(), "estimate".into()]);
                for r in rows {
                    line(&[short(&r.pt0), short(&r.pt1), short(&r.estimate)]);
                }
            }
            Records::Exact(rows) => {
                line(&[
                    "g_required".into(),
                    "energy".into(),
                    "alpha".into(),
                    "beta".into(),
                    "on_locus".into(),
                ]);
                for r in rows {
                    line(&[
                        short(&r.g_required),
                        short(&r.energy),
                        short(&r.alpha),
                        short(&r.beta),
                        r.on_locus.to_string(),
                    ]);
                }
            }
            Records::Oracle(rows) => {
                line(&["n".into(), "l".into(), "energy".into()]);
                for r in rows {
                    line(&[r.n.to_string(), r.l.to_string(), r.energy.to_string()]);
                }
            }
            Records::Scale(rows) => {
                line(&[
                    "Z".into(),
                    "g".into(),
                    "lambda".into(),
                    "energy_factor".into(),
                ]);
                for r in rows {
                    line(&[
                        short(&r.z),
                        short(&r.g),
                        short(&r.lambda),
                        short(&r.energy_factor),
                    ]);
                }
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn aim_run(spec: &RunSpec) -> Result<AimRun, Error> {
    let mut run = match &spec.factor {
        Some(fp) => AimRun::new(&spec.params, spec.qn, fp, spec.n_max, spec.precision)?,
        None => AimRun::asymptotic(&spec.params, spec.qn, spec.n_max, spec.precision)?,
    };
    if let Some(xi) = spec.xi {
        run = run.with_xi(xi)?;
    }
    let p = spec.precision.bits();
    match &spec.window {
        Some((lo, hi)) => run = run.with_window(lo.clone(), hi.clone())?,
        None if spec.qn.n > 0 => {
            let (lo, hi) = default_window(&spec.params, spec.qn)?;
            run = run.with_window(Float::with_val(p, lo), Float::with_val(p, hi))?;
        }
        None => {}
    }
    Ok(run)
}

fn default_alpha_grid(prec: Precision) -> Vec<Float> {
    let mut grid: Vec<Float> = DEFAULT_ALPHA_GRID
        .iter()
        .map(|a| prec.parse(a).expect("literal grid"))
        .collect();
    grid.insert(4, prec.float(0.5).sqrt());
    grid
}

/// `xi = 0.30, 0.35, ..., 1.60`.
pub fn default_xi_grid() -> Vec<f64> {
    (6..=32).map(|k| f64::from(k) / 20.0).collect()
}

/// Runs the command described by `spec`.
pub fn execute(spec: &RunSpec) -> Result<Report, CliError> {
    let prec = spec.precision;
    let records = match spec.command {
        Command::Solve => {
            let run = aim_run(spec)?;
            let mut rec = run.solve()?;
            rec.log_error = spec
                .reference
                .as_ref()
                .map(|r| crate::aim::log10_error(&rec.energy, r));
            Records::Solve(vec![EnergyRow::from(&rec)])
        }
        Command::Converge => {
            let run = aim_run(spec)?;
            let records = run.converge(spec.reference.as_ref())?;
            Records::Converge(records.iter().map(EnergyRow::from).collect())
        }
        Command::OptimizeAlpha => {
            let grid = spec
                .alpha_grid
                .clone()
                .unwrap_or_else(|| default_alpha_grid(prec));
            let search = optimize_alpha(&spec.params, spec.qn, &grid, spec.n_max, prec)?;
            Records::OptimizeAlpha(
                search
                    .candidates
                    .iter()
                    .map(|c| AlphaRow {
                        alpha: exact_string(&c.alpha),
                        score: c.score,
                        selected: c.alpha == search.best_alpha,
                    })
                    .collect(),
            )
        }
        Command::XiScan => {
            let run = aim_run(spec)?;
            let grid = spec.xi_grid.clone().unwrap_or_else(default_xi_grid);
            let reference = spec.reference.as_ref().expect("checked while resolving");
            let scan = xi_scan(&run, spec.n_max, &grid, reference)?;
            Records::XiScan(
                scan.records
                    .iter()
                    .map(|r| XiRow {
                        xi: r.xi,
                        log10_error: r.log_error,
                    })
                    .collect(),
            )
        }
        Command::Pt => {
            let pt0 = pt_energy_order0(&spec.params, spec.qn.l)?;
            let pt1 = pt_energy_order1(&spec.params, spec.qn.l)?;
            let sum = Float::with_val(prec.bits(), &pt0 + &pt1);
            Records::Pt(vec![PtRow {
                pt0: exact_string(&pt0),
                pt1: exact_string(&pt1),
                estimate: exact_string(&sum),
            }])
        }
        Command::Exact => {
            let sol =
                QuasiExactSolution::for_locus(&spec.params.z, &spec.params.lambda, spec.qn.l)?;
            let on_locus = quasi_exact(&spec.params, spec.qn.l)?.is_some();
            Records::Exact(vec![ExactRow {
                g_required: exact_string(&sol.g_required),
                energy: exact_string(&sol.energy),
                alpha: exact_string(&sol.alpha),
                beta: exact_string(&sol.beta),
                on_locus,
            }])
        }
        Command::Oracle => {
            let window = spec
                .window
                .as_ref()
                .map(|(lo, hi)| (lo.to_f64(), hi.to_f64()));
            let energy = oracle_eigenvalue(&spec.params, spec.qn, &ShootConfig::default(), window)?;
            Records::Oracle(vec![OracleRow {
                n: spec.qn.n,
                l: spec.qn.l,
                energy,
            }])
        }
        Command::Scale => {
            let (scaled, factor) = spec.params.scale_to_unit_lambda()?;
            Records::Scale(vec![ScaleRow {
                z: exact_string(&scaled.z),
                g: exact_string(&scaled.g),
                lambda: exact_string(&scaled.lambda),
                energy_factor: exact_string(&factor),
            }])
        }
    };
    Ok(Report {
        precision_bits: prec.bits(),
        records,
    })
}

/// Parses, executes and writes; returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = parse_args(argv).and_then(|parsed| match parsed {
        Parsed::Display(text) => {
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
        Parsed::Run(spec) => {
            let text = execute(&spec)?.render(spec.format);
            match &spec.out {
                Some(path) => std::fs::write(path, text)?,
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(())
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "aimspectra: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(args: &[&str]) -> RunSpec {
        let mut argv = vec!["aimspectra"];
        argv.extend_from_slice(args);
        match parse_args(argv).unwrap() {
            Parsed::Run(s) => *s,
            Parsed::Display(_) => panic!("unexpected help output"),
        }
    }

    fn status(args: &[&str]) -> (i32, String, String) {
        let mut argv = vec!["aimspectra"];
        argv.extend_from_slice(args);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn fig2_invocation_resolves() {
        let s = spec(&[
            "converge",
            "--Z",
            "1",
            "--g",
            "-2",
            "--lambda",
            "1",
            "--alpha",
            "0.5",
            "--N",
            "80",
            "--reference",
            "-1.1716735847196510437987056",
        ]);
        assert_eq!(s.command, Command::Converge);
        assert_eq!(s.n_max, 80);
        let fp = s.factor.unwrap();
        assert_eq!(fp.beta, -2);
        assert_eq!(s.precision.bits(), 256);
        assert!(s.reference.unwrap() < -1.17);
    }

    #[test]
    fn window_and_grids_accept_negative_values() {
        let s = spec(&[
            "solve",
            "--g",
            "-1",
            "--window",
            "-1,0.5",
            "--alpha-grid",
            "0.3,0.5",
        ]);
        let (lo, hi) = s.window.unwrap();
        assert_eq!(lo, -1);
        assert_eq!(hi, 0.5);
        assert_eq!(s.alpha_grid.unwrap().len(), 2);
    }

    #[test]
    fn usage_errors_exit_one_with_a_single_line() {
        for args in [
            &["solve", "--lambda", "0"][..],
            &["solve", "--frobnicate", "1"],
            &["solve", "--beta", "1"],
            &["solve", "--window", "1,0"],
            &["xi-scan"],
            &["solve", "--alpha", "-0.5"],
        ] {
            let (code, out, err) = status(args);
            assert_eq!(code, 1, "{args:?}: {err}");
            assert!(out.is_empty());
            assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        }
        let (_, _, err) = status(&["solve", "--lambda", "0"]);
        assert!(err.contains("NonPositiveLambda"));
    }

    #[test]
    fn numerical_failure_exits_two() {
        let (code, _, err) = status(&["solve", "--g", "-2", "--N", "12", "--window", "50,51"]);
        assert_eq!(code, 2, "{err}");
        assert!(err.contains("NoRootInWindow"));
    }

    #[test]
    fn unwritable_output_exits_three() {
        let (code, _, _) = status(&["scale", "--out", "/nonexistent-dir/x.csv"]);
        assert_eq!(code, 3);
    }

    #[test]
    fn exact_prints_locus_and_energy() {
        let (code, out, _) = status(&["exact", "--Z", "1", "--lambda", "1", "--l", "0"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("g_required,energy,alpha,beta,on_locus"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert!(row[0].starts_with("1.41421356237309504880"));
        // sqrt(1/2) * 3 - 1/2
        assert!(row[1].starts_with("1.62132034355964257320"));
        assert_eq!(row[4], "false");
    }

    #[test]
    fn empty_converge_is_header_only() {
        let report = Report {
            precision_bits: 256,
            records: Records::Converge(vec![]),
        };
        assert_eq!(report.to_csv(), "N,energy,log10_error\n");
    }

    #[test]
    fn log_errors_format_to_four_decimals() {
        let report = Report {
            precision_bits: 64,
            records: Records::XiScan(vec![
                XiRow {
                    xi: 0.5,
                    log10_error: Some(-11.953_21),
                },
                XiRow {
                    xi: 0.6,
                    log10_error: Some(f64::NEG_INFINITY),
                },
                XiRow {
                    xi: 0.7,
                    log10_error: None,
                },
            ]),
        };
        assert_eq!(
            report.to_csv(),
            "xi,log10_error\n0.5,-11.9532\n0.6,-inf\n0.7,\n"
        );
    }

    #[test]
    fn json_round_trips_fieldwise() {
        let p = Precision::default();
        let e = p.parse("-1.1716735847196510437987056").unwrap();
        let report = Report {
            precision_bits: 256,
            records: Records::Converge(vec![
                EnergyRow {
                    iteration: 10,
                    energy: exact_string(&e),
                    log10_error: Some(-3.25),
                },
                EnergyRow {
                    iteration: 11,
                    energy: exact_string(&e),
                    log10_error: Some(f64::NEG_INFINITY),
                },
                EnergyRow {
                    iteration: 12,
                    energy: "0".into(),
                    log10_error: None,
                },
            ]),
        };
        let back = Report::from_json(&report.to_json()).unwrap();
        assert_eq!(back, report);
        let Records::Converge(rows) = back.records else {
            panic!()
        };
        assert_eq!(p.parse(&rows[0].energy).unwrap(), e);
    }

    #[test]
    fn pt_is_a_thin_wrapper() {
        let s = spec(&["pt", "--g", "-2", "--format", "json"]);
        let report = execute(&s).unwrap();
        let Records::Pt(rows) = &report.records else {
            panic!()
        };
        let direct = pt_energy_order0(&s.params, 0).unwrap();
        assert_eq!(s.precision.parse(&rows[0].pt0).unwrap(), direct);
    }

    #[test]
    fn precision_flag_changes_digit_count() {
        let (_, out, _) = status(&["scale", "--lambda", "2", "--precision-bits", "64"]);
        let row = out.lines().nth(1).unwrap();
        let factor = row.split(',').nth(3).unwrap();
        assert_eq!(factor, "1.414213562373095049");
    }
}
