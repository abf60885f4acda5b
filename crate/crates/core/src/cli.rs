//! Command-line front end.
//!
//! Every command prints a JSON summary on stdout. With `--out PREFIX` the
//! summary is also written to `PREFIX.json` and the density table to
//! `PREFIX.tsv`, each atomically. Exit codes: 0 success, 1 invalid input,
//! 2 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::betalike::{
    exponential_theta_density, logistic_theta_density, weibull_theta_density, ThetaDensity, DEFAULT_THETA_POINTS,
};
use crate::cumulants::{
    cumulative_poisson_theta_moments, moments_to_cumulants, poisson_regression_theta_moments, poisson_theta_moments,
    CumulantSet, MomentSet,
};
use crate::dataset::{load_binary_csv, load_count_csv, load_reliability_csv, CountData, ReliabilityData};
use crate::error::{Error, Result};
use crate::evidence::{model_posterior, PriorRange, DEFAULT_K_RANGE};
use crate::maxent::{maxent_positive_density, maxent_theta_fit, poisson_like_pmf, poisson_like_theta_distribution, DEFAULT_CELLS_PER_AXIS};
use crate::posterior::{
    build_exponential, build_logistic, build_poisson, build_poisson_regression, build_weibull, GridSpec,
    DEFAULT_GRID_POINTS,
};

pub const THREADS_ENV: &str = "BETALIKE_THREADS";
const DEFAULT_TOL: f64 = 1e-6;
const POSITIVE_TABLE_POINTS: usize = 1001;

#[derive(Parser, Debug)]
#[command(name = "betalike", version, about = "Posterior distributions of reliability and event probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density of a probability of interest (logistic, exponential, weibull).
    Density(RunArgs),
    /// Raw moments and cumulants of an event probability.
    Moments(RunArgs),
    /// Fourth-order maximum-entropy density from cumulants or a count model.
    Maxent(RunArgs),
    /// Exponential versus Weibull model selection.
    Select(RunArgs),
    /// Event probabilities for a process with Weibull waiting times.
    PoissonLike(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Logistic,
    Exponential,
    Weibull,
    Poisson,
    CumulativePoisson,
    PoissonRegression,
    PoissonLike,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Logistic => "logistic",
            Model::Exponential => "exponential",
            Model::Weibull => "weibull",
            Model::Poisson => "poisson",
            Model::CumulativePoisson => "cumulative-poisson",
            Model::PoissonRegression => "poisson-regression",
            Model::PoissonLike => "poisson-like",
        }
    }
}

/// Options shared by all commands. Any option may also come from a JSON
/// `--config` file; flags on the command line take precedence.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunArgs {
    /// JSON file with default values for any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Observation CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Mission time or counting window of the query.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Predictor value of the query.
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    /// Event count of the query.
    #[arg(long)]
    pub m: Option<u64>,
    /// Weibull shape range: prior range for `select`, grid bounds elsewhere.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub k_range: Option<Vec<f64>>,
    /// Posterior grid points per axis, or cells per axis for `poisson-like`.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Tolerance of the normalization check on emitted densities.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output prefix for PREFIX.tsv and PREFIX.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Prior life-time guess, overriding any `prior_guess` row in the data.
    #[arg(long)]
    pub prior_guess: Option<f64>,
    /// Total observation time of count data (default: rows × window).
    #[arg(long)]
    pub total_time: Option<f64>,
    /// Window length each count refers to (default: --tau).
    #[arg(long)]
    pub window: Option<f64>,
    /// Prior probability of the Exponential model in `select`.
    #[arg(long)]
    pub prior_m1: Option<f64>,
    /// Cumulants `mu,sigma,gamma,kappa` for `maxent`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cumulants: Option<Vec<f64>>,
    /// Fit a positive quantity on [max(0, mu-6 sigma), mu+6 sigma] instead of a probability.
    #[arg(long)]
    #[serde(default)]
    pub positive: bool,
    /// Weibull shape for a single `poisson-like` probability.
    #[arg(long)]
    pub shape: Option<f64>,
    /// Weibull rate for a single `poisson-like` probability.
    #[arg(long)]
    pub rate: Option<f64>,
}

impl RunArgs {
    fn merged_with(self, file: RunArgs) -> RunArgs {
        RunArgs {
            config: self.config,
            model: self.model.or(file.model),
            data: self.data.or(file.data),
            tau: self.tau.or(file.tau),
            z: self.z.or(file.z),
            m: self.m.or(file.m),
            k_range: self.k_range.or(file.k_range),
            grid_n: self.grid_n.or(file.grid_n),
            tol: self.tol.or(file.tol),
            out: self.out.or(file.out),
            prior_guess: self.prior_guess.or(file.prior_guess),
            total_time: self.total_time.or(file.total_time),
            window: self.window.or(file.window),
            prior_m1: self.prior_m1.or(file.prior_m1),
            cumulants: self.cumulants.or(file.cumulants),
            positive: self.positive || file.positive,
            shape: self.shape.or(file.shape),
            rate: self.rate.or(file.rate),
        }
    }

    fn resolve(self) -> Result<RunArgs> {
        match &self.config {
            None => Ok(self),
            Some(path) => {
                let text = fs::read_to_string(path)?;
                let file: RunArgs = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
                Ok(self.merged_with(file))
            }
        }
    }

    fn model(&self, allowed: &[Model]) -> Result<Model> {
        let names = || allowed.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ");
        let model = self.model.ok_or_else(|| Error::InvalidInput(format!("missing --model (one of {})", names())))?;
        if allowed.contains(&model) {
            Ok(model)
        } else {
            Err(Error::InvalidInput(format!("--model {} is not available here (one of {})", model.name(), names())))
        }
    }

    fn data(&self, model: &str) -> Result<&Path> {
        self.data.as_deref().ok_or_else(|| Error::InvalidInput(format!("missing --data (required for {model})")))
    }

    fn tau(&self, model: &str) -> Result<f64> {
        let tau = self.tau.ok_or_else(|| Error::InvalidInput(format!("missing --tau (required for {model})")))?;
        positive("--tau", tau)
    }

    fn z(&self, model: &str) -> Result<f64> {
        let z = self.z.ok_or_else(|| Error::InvalidInput(format!("missing --z (required for {model})")))?;
        if z.is_finite() {
            Ok(z)
        } else {
            Err(Error::InvalidInput("--z must be finite".into()))
        }
    }

    fn m(&self, model: &str) -> Result<u64> {
        self.m.ok_or_else(|| Error::InvalidInput(format!("missing --m (required for {model})")))
    }

    fn tol(&self) -> Result<f64> {
        positive("--tol", self.tol.unwrap_or(DEFAULT_TOL))
    }

    fn k_range(&self) -> Option<(f64, f64)> {
        self.k_range.as_ref().map(|v| (v[0], v[1]))
    }

    fn grid_spec(&self) -> Result<GridSpec> {
        let n = self.grid_n.unwrap_or(DEFAULT_GRID_POINTS);
        if n < 2 {
            return Err(Error::InvalidInput("--grid-n must be at least 2".into()));
        }
        let mut spec = GridSpec::with_points(n);
        if let Some((lo, hi)) = self.k_range() {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidInput(format!("--k-range {lo} {hi} must satisfy 0 < LO <= HI < inf")));
            }
            spec = spec.with_bounds(0, lo, hi);
        }
        Ok(spec)
    }

    fn reliability(&self, model: &str) -> Result<ReliabilityData> {
        let mut d = load_reliability_csv(self.data(model)?)?;
        if let Some(t) = self.prior_guess {
            d.prior_guess = Some(positive("--prior-guess", t)?);
        }
        Ok(d)
    }

    fn counts(&self, model: &str, tau: f64) -> Result<CountData> {
        let window = positive("--window", self.window.unwrap_or(tau))?;
        let mut d = load_count_csv(self.data(model)?, window, self.total_time)?;
        if d.total_time.is_none() {
            d.total_time = Some(d.counts.len() as f64 * window);
        }
        if let Some(t) = self.prior_guess {
            d.prior_guess = Some(positive("--prior-guess", t)?);
        }
        Ok(d)
    }
}

fn positive(flag: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("{flag} must be positive and finite, got {v}")))
    }
}

/// JSON formatter printing every number with 17 significant digits.
struct FixedPrecision;

impl serde_json::ser::Formatter for FixedPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedPrecision);
    value.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// What a command produces: the JSON summary and an optional table.
struct Report {
    summary: Value,
    table: Option<String>,
}

fn cumulants_json(c: &CumulantSet) -> Value {
    json!({"mu": c.mu, "sigma": c.sigma, "gamma": c.gamma, "kappa": c.kappa})
}

fn moments_json(m: &MomentSet) -> Value {
    json!({"m1": m.m1, "m2": m.m2, "m3": m.m3, "m4": m.m4})
}

fn density_summary(model: &str, d: &ThetaDensity, tol: f64, mut notes: Vec<String>) -> Result<Value> {
    d.verify_normalization(tol)?;
    let c = d.cumulants()?;
    if let Some((lo, hi)) = d.marginal_support {
        notes.push(format!("marginalized parameter integrated over [{lo:.6e}, {hi:.6e}]"));
    }
    Ok(json!({
        "model": model,
        "mean": c.mu,
        "sd": c.sigma,
        "gamma": c.gamma,
        "kappa": c.kappa,
        "normalizer": d.normalizer,
        "query": {"tau": d.query.tau, "z": d.query.z, "m": d.query.m},
        "support_notes": notes,
        "warnings": d.warnings,
    }))
}

fn theta_grid_note() -> String {
    format!("theta grid: {DEFAULT_THETA_POINTS} points clustered toward 0 and 1, clipped to [1e-12, 1-1e-12]")
}

fn cmd_density(args: &RunArgs) -> Result<Report> {
    let model = args.model(&[Model::Logistic, Model::Exponential, Model::Weibull])?;
    let name = model.name();
    let tol = args.tol()?;
    let (d, notes) = match model {
        Model::Logistic => {
            let z = args.z(name)?;
            let data = load_binary_csv(args.data(name)?)?;
            let p = build_logistic(&data, &args.grid_spec()?)?;
            (logistic_theta_density(&p, z)?, vec![theta_grid_note()])
        }
        Model::Exponential => {
            let tau = args.tau(name)?;
            let p = build_exponential(&args.reliability(name)?)?;
            let note = "closed-form density; mass checked by adaptive quadrature".to_string();
            (exponential_theta_density(&p, tau)?, vec![theta_grid_note(), note])
        }
        _ => {
            let tau = args.tau(name)?;
            let p = build_weibull(&args.reliability(name)?, &args.grid_spec()?)?;
            (weibull_theta_density(&p, tau)?, vec![theta_grid_note()])
        }
    };
    let summary = density_summary(name, &d, tol, notes)?;
    Ok(Report { summary, table: Some(d.to_tsv()) })
}

/// Moments of the probability of interest for the count models and the
/// Exponential model.
fn compute_moments(args: &RunArgs, model: Model) -> Result<(MomentSet, Vec<String>)> {
    let name = model.name();
    let tau = args.tau(name)?;
    match model {
        Model::Exponential => {
            let d = exponential_theta_density(&build_exponential(&args.reliability(name)?)?, tau)?;
            Ok((d.raw_moments(), vec![]))
        }
        Model::Poisson | Model::CumulativePoisson => {
            let m = args.m(name)?;
            let p = build_poisson(&args.counts(name, tau)?)?;
            let moments = if model == Model::Poisson {
                poisson_theta_moments(&p, tau, m)?
            } else {
                cumulative_poisson_theta_moments(&p, tau, m)?
            };
            Ok((moments, vec![]))
        }
        _ => {
            let m = args.m(name)?;
            let z = args.z(name)?;
            let p = build_poisson_regression(&args.counts(name, tau)?, &args.grid_spec()?)?;
            let est = poisson_regression_theta_moments(&p, z, tau, m)?;
            Ok((est.moments, est.warnings))
        }
    }
}

const MOMENT_MODELS: [Model; 4] = [Model::Exponential, Model::Poisson, Model::CumulativePoisson, Model::PoissonRegression];

fn cmd_moments(args: &RunArgs) -> Result<Report> {
    let model = args.model(&MOMENT_MODELS)?;
    let (moments, mut warnings) = compute_moments(args, model)?;
    let cumulants = match moments_to_cumulants(&moments) {
        Ok(c) => cumulants_json(&c),
        Err(e) => {
            warnings.push(format!("cumulants unavailable: {e}"));
            Value::Null
        }
    };
    let summary = json!({
        "model": model.name(),
        "query": {"tau": args.tau, "z": args.z, "m": args.m},
        "moments": moments_json(&moments),
        "cumulants": cumulants,
        "warnings": warnings,
    });
    Ok(Report { summary, table: None })
}

fn cmd_maxent(args: &RunArgs) -> Result<Report> {
    let tol = args.tol()?;
    let (c, source, mut warnings) = match (&args.cumulants, args.model) {
        (Some(v), None) => match v[..] {
            [mu, sigma, gamma, kappa] => {
                let c = CumulantSet::new(mu, sigma, gamma, kappa);
                if !c.is_attainable() {
                    return Err(Error::InvalidInput(format!(
                        "--cumulants: kurtosis {kappa} must exceed squared skewness plus one ({})",
                        gamma * gamma + 1.0
                    )));
                }
                (c, "cumulants".to_string(), vec![])
            }
            _ => return Err(Error::InvalidInput(format!("--cumulants needs 4 values, got {}", v.len()))),
        },
        (None, Some(_)) => {
            let model = args.model(&MOMENT_MODELS)?;
            let (moments, warnings) = compute_moments(args, model)?;
            (moments_to_cumulants(&moments)?, model.name().to_string(), warnings)
        }
        (Some(_), Some(_)) => return Err(Error::InvalidInput("give either --cumulants or --model, not both".into())),
        (None, None) => return Err(Error::InvalidInput("missing --cumulants or --model".into())),
    };
    if !(c.sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {}", c.sigma)));
    }
    if args.positive {
        let me = maxent_positive_density(&c)?;
        let moments = me.standardized_moments()?;
        if (moments[0] - 1.0).abs() > tol {
            return Err(Error::Numerical(format!("density integrates to {}, not 1", moments[0])));
        }
        let grid = me.to_grid(POSITIVE_TABLE_POINTS)?;
        let mut table = format!("# normalizer={:.16e}\nq\tdensity\n", c.sigma * me.normalizer);
        for (q, v) in grid.points.iter().zip(&grid.values) {
            table.push_str(&format!("{q:.16e}\t{v:.16e}\n"));
        }
        let (lo, hi) = me.support();
        let summary = json!({
            "source": source,
            "variable": "positive",
            "cumulants": cumulants_json(&c),
            "phi": me.phi,
            "support_std": [me.support_std.0, me.support_std.1],
            "effective_support_std": [me.effective_support.0, me.effective_support.1],
            "support": [lo, hi],
            "normalizer": me.normalizer,
            "iterations": me.iterations,
            "residuals": me.residuals,
            "warnings": warnings,
        });
        return Ok(Report { summary, table: Some(table) });
    }
    let (me, d) = maxent_theta_fit(&c)?;
    d.verify_normalization(tol)?;
    if me.effective_support != me.support_std {
        warnings.push("standardized support clipped to ±50".into());
    }
    let summary = json!({
        "source": source,
        "variable": "theta",
        "cumulants": cumulants_json(&c),
        "phi": me.phi,
        "support_std": [me.support_std.0, me.support_std.1],
        "effective_support_std": [me.effective_support.0, me.effective_support.1],
        "normalizer": me.normalizer,
        "iterations": me.iterations,
        "residuals": me.residuals,
        "mean": d.mean(),
        "warnings": warnings,
    });
    Ok(Report { summary, table: Some(d.to_tsv()) })
}

fn cmd_select(args: &RunArgs) -> Result<Report> {
    let data = load_reliability_csv(args.data("select")?)?;
    let (lo, hi) = args.k_range().unwrap_or(DEFAULT_K_RANGE);
    let range = PriorRange::new(lo, hi)?;
    let p1 = args.prior_m1.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::InvalidInput(format!("--prior-m1 must lie in [0, 1], got {p1}")));
    }
    let report = model_posterior(&data, &range, p1, 1.0 - p1)?;
    let summary = json!({
        "models": report.models.iter().map(|m| json!({"name": m.name, "log_core": m.log_core, "posterior": m.posterior})).collect::<Vec<_>>(),
        "k_range": [report.k_range.0, report.k_range.1],
        "cancelled": report.cancelled,
    });
    Ok(Report { summary, table: None })
}

fn cmd_poisson_like(args: &RunArgs) -> Result<Report> {
    let name = Model::PoissonLike.name();
    let tau = args.tau(name)?;
    let m = args.m(name)?;
    match (args.shape, args.rate, &args.data) {
        (Some(k), Some(rate), None) => {
            let pmf = poisson_like_pmf(positive("--shape", k)?, positive("--rate", rate)?, tau, m)?;
            let summary = json!({"model": name, "shape": k, "rate": rate, "tau": tau, "m": m, "probability": pmf});
            Ok(Report { summary, table: None })
        }
        (None, None, Some(_)) => {
            let tol = args.tol()?;
            let cells = args.grid_n.unwrap_or(DEFAULT_CELLS_PER_AXIS);
            let mut spec = GridSpec::default();
            if let Some((lo, hi)) = args.k_range() {
                if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                    return Err(Error::InvalidInput(format!("--k-range {lo} {hi} must satisfy 0 < LO <= HI < inf")));
                }
                spec = spec.with_bounds(0, lo, hi);
            }
            let p = build_weibull(&args.reliability(name)?, &spec)?;
            let out = poisson_like_theta_distribution(&p, tau, m, cells)?;
            let notes = vec![format!("{cells} x {cells} cells, uniform in log k and log lambda")];
            let mut summary = density_summary(name, &out.density, tol, notes)?;
            summary["pushforward"] = json!({
                "cells": out.pushforward.components.len(),
                "mean": out.pushforward.mean(),
                "cumulants": out.cumulants.as_ref().map(cumulants_json),
            });
            Ok(Report { summary, table: Some(out.density.to_tsv()) })
        }
        _ => Err(Error::InvalidInput("give either --shape and --rate, or --data".into())),
    }
}

fn execute(command: Command) -> Result<String> {
    let (args, run): (RunArgs, fn(&RunArgs) -> Result<Report>) = match command {
        Command::Density(a) => (a, cmd_density),
        Command::Moments(a) => (a, cmd_moments),
        Command::Maxent(a) => (a, cmd_maxent),
        Command::Select(a) => (a, cmd_select),
        Command::PoissonLike(a) => (a, cmd_poisson_like),
    };
    let args = args.resolve()?;
    if let Some(t) = args.tol {
        positive("--tol", t)?;
    }
    let report = run(&args)?;
    let json = to_json(&report.summary);
    if let Some(prefix) = &args.out {
        if let Some(table) = &report.table {
            write_atomic(&with_extension(prefix, "tsv"), table)?;
        }
        write_atomic(&with_extension(prefix, "json"), &format!("{json}\n"))?;
    }
    Ok(json)
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    // A pool configured earlier in the same process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 1;
    }
    match execute(cli.command) {
        Ok(json) => {
            println!("{json}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                1
            } else {
                2
            }
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
