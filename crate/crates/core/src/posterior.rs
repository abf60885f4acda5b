//! Parameter posteriors for the reliability and count models.
//!
//! One-parameter posteriors (Exponential, Poisson) are Gamma densities and are
//! kept in closed form. Two-parameter posteriors (logistic regression,
//! Weibull, Poisson regression) are evaluable log-densities plus a bounded
//! tabulation on a [`Grid2D`] whose peak value is exactly 1.
//!
//! Grid bounds come from a Laplace fit at the mode: `width_sds` approximate
//! standard deviations either side, then widened where the log-density at an
//! edge is still above the Gaussian level `-width_sds² / 2`. Positive
//! parameters (Weibull `k`, `λ`) are fitted and gridded in log coordinates.
//! Directions in which the log-density is flat (e.g. a slope parameter when
//! every predictor is identical) get a fixed half-width and a warning.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::dataset::{BinaryOutcomeData, CountData, ReliabilityData};
use crate::error::{Error, Result};
use crate::quadrature::{linspace, Grid2D};

pub const DEFAULT_GRID_POINTS: usize = 201;
pub const DEFAULT_WIDTH_SDS: f64 = 6.0;

/// Half-width used along directions with no curvature, in working units.
const FLAT_HALF_WIDTH_LINEAR: f64 = 10.0;
const FLAT_HALF_WIDTH_LOG: f64 = 4.0;
/// Search box for the mode, in working units around the starting point.
const SEARCH_BOX_LINEAR: f64 = 50.0;
const SEARCH_BOX_LOG: f64 = 25.0;

/// Resolution and bounds policy for two-parameter posterior grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: [usize; 2],
    /// Fixed `(lo, hi)` per axis, overriding the automatic bounds.
    pub bounds: [Option<(f64, f64)>; 2],
    pub width_sds: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: [DEFAULT_GRID_POINTS; 2], bounds: [None, None], width_sds: DEFAULT_WIDTH_SDS }
    }
}

impl GridSpec {
    pub fn with_points(n: usize) -> Self {
        Self { points: [n, n], ..Self::default() }
    }

    pub fn with_bounds(mut self, axis: usize, lo: f64, hi: f64) -> Self {
        self.bounds[axis] = Some((lo, hi));
        self
    }
}

/// How an axis is treated while fitting and gridding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coord {
    Linear,
    Log,
}

impl Coord {
    fn to_working(self, x: f64) -> f64 {
        match self {
            Coord::Linear => x,
            Coord::Log => x.ln(),
        }
    }
    fn to_natural(self, u: f64) -> f64 {
        match self {
            Coord::Linear => u,
            Coord::Log => u.exp(),
        }
    }
    /// log |dx/du|
    fn log_jacobian(self, u: f64) -> f64 {
        match self {
            Coord::Linear => 0.0,
            Coord::Log => u,
        }
    }
    fn flat_half_width(self) -> f64 {
        match self {
            Coord::Linear => FLAT_HALF_WIDTH_LINEAR,
            Coord::Log => FLAT_HALF_WIDTH_LOG,
        }
    }
    fn search_box(self) -> f64 {
        match self {
            Coord::Linear => SEARCH_BOX_LINEAR,
            Coord::Log => SEARCH_BOX_LOG,
        }
    }
}

/// A tabulated two-parameter posterior.
#[derive(Debug, Clone, Serialize)]
pub struct GridPosterior {
    /// `exp(log_density - log_max)` per cell; the largest value is 1.
    pub grid: Grid2D,
    /// Largest unnormalized log-density over the grid cells.
    pub log_max: f64,
    /// Approximate mode, natural coordinates.
    pub mode: [f64; 2],
    pub warnings: Vec<String>,
}

impl GridPosterior {
    pub fn support(&self) -> [(f64, f64); 2] {
        let a1 = &self.grid.axis1;
        let a2 = &self.grid.axis2;
        [(a1[0], a1[a1.len() - 1]), (a2[0], a2[a2.len() - 1])]
    }
}

#[derive(Debug, Clone)]
struct ModeFit {
    mode: [f64; 2],
    log_max: f64,
    /// Negative Hessian at the mode, working coordinates.
    curvature: [[f64; 2]; 2],
    at_boundary: [bool; 2],
}

fn fd_derivatives<F: Fn([f64; 2]) -> f64>(f: &F, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let h = [1e-3 * x[0].abs().max(1.0), 1e-3 * x[1].abs().max(1.0)];
    let f0 = f(x);
    let shift = |dx: f64, dy: f64| f([x[0] + dx, x[1] + dy]);
    let fp0 = shift(h[0], 0.0);
    let fm0 = shift(-h[0], 0.0);
    let fp1 = shift(0.0, h[1]);
    let fm1 = shift(0.0, -h[1]);
    let g = [(fp0 - fm0) / (2.0 * h[0]), (fp1 - fm1) / (2.0 * h[1])];
    let h00 = (fp0 - 2.0 * f0 + fm0) / (h[0] * h[0]);
    let h11 = (fp1 - 2.0 * f0 + fm1) / (h[1] * h[1]);
    let h01 = (shift(h[0], h[1]) - shift(h[0], -h[1]) - shift(-h[0], h[1]) + shift(-h[0], -h[1]))
        / (4.0 * h[0] * h[1]);
    (g, [[h00, h01], [h01, h11]])
}

/// Damped Newton ascent inside a box, falling back to scaled gradient steps
/// where the Hessian is not negative definite.
fn find_mode<F: Fn([f64; 2]) -> f64>(f: &F, start: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> Result<ModeFit> {
    let clamp = |x: [f64; 2]| [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])];
    let mut x = clamp(start);
    let mut fx = f(x);
    if !fx.is_finite() {
        return Err(Error::Numerical(format!("log-density not finite at starting point {x:?}")));
    }
    for _ in 0..500 {
        let (g, h) = fd_derivatives(f, x);
        let det = h[0][0] * h[1][1] - h[0][1] * h[0][1];
        let newton = h[0][0] < 0.0 && det > 0.0;
        let dir = if newton {
            [-(h[1][1] * g[0] - h[0][1] * g[1]) / det, -(-h[0][1] * g[0] + h[0][0] * g[1]) / det]
        } else {
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt().max(1e-300);
            let len = 1.0f64.min(norm);
            [g[0] / norm * len, g[1] / norm * len]
        };
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = clamp([x[0] + step * dir[0], x[1] + step * dir[1]]);
            let fc = f(cand);
            if fc.is_finite() && fc > fx {
                moved = (cand[0] - x[0]).abs() + (cand[1] - x[1]).abs() > 1e-13;
                x = cand;
                fx = fc;
                break;
            }
            step *= 0.5;
        }
        let gnorm = g[0].abs().max(g[1].abs());
        if !moved || gnorm < 1e-9 * fx.abs().max(1.0) {
            break;
        }
    }
    let (_, h) = fd_derivatives(f, x);
    let edge = |i: usize| {
        let tol = 1e-6 * (hi[i] - lo[i]).max(1e-12);
        x[i] - lo[i] < tol || hi[i] - x[i] < tol
    };
    Ok(ModeFit {
        mode: x,
        log_max: fx,
        curvature: [[-h[0][0], -h[0][1]], [-h[1][0], -h[1][1]]],
        at_boundary: [edge(0), edge(1)],
    })
}

/// Builds the grid for a two-parameter log-density given in natural
/// coordinates.
fn build_grid_posterior<F>(logf: F, coords: [Coord; 2], start: [f64; 2], spec: &GridSpec, names: [&str; 2]) -> Result<GridPosterior>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if spec.points.contains(&0) {
        return Err(Error::InvalidInput("grid needs at least one point per axis".into()));
    }
    if !(spec.width_sds > 0.0) {
        return Err(Error::InvalidInput("width_sds must be positive".into()));
    }
    let mut warnings = Vec::new();
    let mut lo = [0.0; 2];
    let mut hi = [0.0; 2];
    let mut pinned = [false; 2];
    for i in 0..2 {
        match spec.bounds[i] {
            Some((a, b)) => {
                if !(a.is_finite() && b.is_finite() && a <= b) || (coords[i] == Coord::Log && a <= 0.0) {
                    return Err(Error::InvalidInput(format!("invalid bounds [{a}, {b}] for {}", names[i])));
                }
                lo[i] = coords[i].to_working(a);
                hi[i] = coords[i].to_working(b);
                pinned[i] = true;
            }
            None => {
                let s = coords[i].to_working(start[i]);
                lo[i] = s - coords[i].search_box();
                hi[i] = s + coords[i].search_box();
            }
        }
    }
    // Working-space log-density, including the change-of-coordinates Jacobian.
    let working = |u: [f64; 2]| {
        let x = [coords[0].to_natural(u[0]), coords[1].to_natural(u[1])];
        logf(x[0], x[1]) + coords[0].log_jacobian(u[0]) + coords[1].log_jacobian(u[1])
    };
    let start_w = [
        coords[0].to_working(start[0]).clamp(lo[0], hi[0]),
        coords[1].to_working(start[1]).clamp(lo[1], hi[1]),
    ];
    let fit = find_mode(&working, start_w, lo, hi)?;

    let level = -0.5 * spec.width_sds * spec.width_sds;
    let mut range = [(lo[0], hi[0]), (lo[1], hi[1])];
    let c = fit.curvature;
    let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
    let scale = fit.log_max.abs().max(1.0);
    for i in 0..2 {
        if pinned[i] {
            continue;
        }
        if fit.at_boundary[i] {
            warnings.push(format!(
                "posterior mode for {} lies on the search boundary (likelihood unbounded in that direction); support truncated",
                names[i]
            ));
        }
        let flat = c[i][i] <= 1e-7 * scale;
        let sd = if flat {
            None
        } else if c[0][0] > 0.0 && det > 1e-12 * scale * scale {
            Some((c[1 - i][1 - i] / det).sqrt())
        } else {
            Some(1.0 / c[i][i].sqrt())
        };
        let (mut a, mut b) = match sd {
            Some(sd) => (fit.mode[i] - spec.width_sds * sd, fit.mode[i] + spec.width_sds * sd),
            None => {
                warnings.push(format!(
                    "log-posterior is flat in {}; using a fixed half-width of {} {}units",
                    names[i],
                    coords[i].flat_half_width(),
                    if coords[i] == Coord::Log { "log-" } else { "" }
                ));
                (fit.mode[i] - coords[i].flat_half_width(), fit.mode[i] + coords[i].flat_half_width())
            }
        };
        a = a.max(lo[i]);
        b = b.min(hi[i]);
        range[i] = (a, b);
    }
    // Widen non-flat, non-pinned edges still above the Gaussian level.
    for _ in 0..12 {
        let mut changed = false;
        for i in 0..2 {
            if pinned[i] {
                continue;
            }
            let other = 1 - i;
            let probe = linspace(range[other].0, range[other].1, 41);
            let edge_max = |e: f64| {
                probe
                    .iter()
                    .map(|&v| {
                        let mut u = [0.0; 2];
                        u[i] = e;
                        u[other] = v;
                        working(u) - fit.log_max
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let half = 0.5 * (range[i].1 - range[i].0);
            let flat_edges = edge_max(range[i].0) > -1e-6 && edge_max(range[i].1) > -1e-6;
            if flat_edges {
                continue;
            }
            if range[i].0 > lo[i] && edge_max(range[i].0) > level {
                range[i].0 = (range[i].0 - 0.5 * half).max(lo[i]);
                changed = true;
            }
            if range[i].1 < hi[i] && edge_max(range[i].1) > level {
                range[i].1 = (range[i].1 + 0.5 * half).min(hi[i]);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let axis = |i: usize| -> Vec<f64> {
        let (a, b) = range[i];
        let n = spec.points[i];
        if n == 1 || a == b {
            return vec![coords[i].to_natural(0.5 * (a + b))];
        }
        let mut v: Vec<f64> = linspace(a, b, n).into_iter().map(|u| coords[i].to_natural(u)).collect();
        if let Some((x, y)) = spec.bounds[i] {
            v[0] = x;
            v[n - 1] = y;
        }
        v
    };
    let axis1 = axis(0);
    let axis2 = axis(1);
    let n2 = axis2.len();
    let logs: Vec<f64> = (0..axis1.len() * n2)
        .into_par_iter()
        .map(|idx| logf(axis1[idx / n2], axis2[idx % n2]))
        .collect();
    if logs.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical("log-density is NaN on the grid".into()));
    }
    let log_max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !log_max.is_finite() {
        return Err(Error::Numerical("log-density has no finite value on the grid".into()));
    }
    let values = logs.iter().map(|l| (l - log_max).exp()).collect();
    let grid = Grid2D::new(axis1, axis2, values)?;
    let mode = [coords[0].to_natural(fit.mode[0]), coords[1].to_natural(fit.mode[1])];
    Ok(GridPosterior { grid, log_max, mode, warnings })
}

/// `log(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic-regression posterior over `(β0, β1)` under a flat prior.
#[derive(Debug, Clone, Serialize)]
pub struct LogisticPosterior {
    pub data: BinaryOutcomeData,
    pub posterior: GridPosterior,
}

impl LogisticPosterior {
    /// Unnormalized log-density (the log-likelihood).
    pub fn log_density(&self, b0: f64, b1: f64) -> f64 {
        logistic_log_likelihood(&self.data, b0, b1)
    }
}

pub fn logistic_log_likelihood(data: &BinaryOutcomeData, b0: f64, b1: f64) -> f64 {
    let s: f64 = data.success_predictors.iter().map(|x| {
        let eta = b0 + b1 * x;
        eta - softplus(eta)
    }).sum();
    let f: f64 = data.failure_predictors.iter().map(|y| softplus(b0 + b1 * y)).sum();
    s - f
}

pub fn build_logistic(data: &BinaryOutcomeData, spec: &GridSpec) -> Result<LogisticPosterior> {
    let d = data.clone();
    let posterior = build_grid_posterior(
        move |b0, b1| logistic_log_likelihood(&d, b0, b1),
        [Coord::Linear, Coord::Linear],
        [0.0, 0.0],
        spec,
        ["beta0", "beta1"],
    )?;
    Ok(LogisticPosterior { data: data.clone(), posterior })
}

/// Prior on a positive rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RatePrior {
    /// Informative prior from an initial life-time guess `t`: `∝ exp(-λ t)`.
    LifetimeGuess(f64),
    /// Jeffreys `1/λ`.
    Jeffreys,
}

impl RatePrior {
    fn from_guess(t: Option<f64>) -> Self {
        t.map_or(RatePrior::Jeffreys, RatePrior::LifetimeGuess)
    }
}

/// Posterior of an Exponential failure rate: `Gamma(shape, rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialPosterior {
    /// Number of failures.
    pub r: usize,
    /// Total observed time without failure, including the prior guess.
    pub total_time: f64,
    pub prior: RatePrior,
    pub shape: f64,
    pub rate: f64,
    pub support: (f64, f64),
}

/// Bounds of a Gamma(shape, rate) posterior where its log-density in `log λ`
/// has dropped `width²/2` below the maximum.
fn gamma_support(shape: f64, rate: f64, width: f64) -> (f64, f64) {
    let mode = shape / rate;
    let drop = 0.5 * width * width;
    let excess = |d: f64| shape * (d.exp() - 1.0 - d) - drop;
    let solve = |mut a: f64, mut b: f64| {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (excess(a) > 0.0) == (excess(m) > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut left = -1.0;
    while excess(left) < 0.0 {
        left *= 2.0;
    }
    let mut right = 1.0;
    while excess(right) < 0.0 {
        right *= 2.0;
    }
    (mode * solve(left, 0.0).exp(), mode * solve(0.0, right).exp())
}

fn gamma_log_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

impl ExponentialPosterior {
    /// Normalized posterior density of `λ`.
    pub fn density(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        gamma_log_pdf(lambda, self.shape, self.rate).exp()
    }

    /// Unnormalized log-density, `log[λ^r exp(-λ T)]` times the prior.
    pub fn log_density(&self, lambda: f64) -> f64 {
        (self.shape - 1.0) * lambda.ln() - self.rate * lambda
    }

    pub fn mode(&self) -> f64 {
        ((self.shape - 1.0) / self.rate).max(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

pub fn build_exponential(data: &ReliabilityData) -> Result<ExponentialPosterior> {
    let r = data.r();
    let prior = RatePrior::from_guess(data.prior_guess);
    let (shape, rate) = match prior {
        RatePrior::LifetimeGuess(t) => ((r + 1) as f64, t + data.exposure()),
        RatePrior::Jeffreys => {
            if r == 0 {
                return Err(Error::ImproperPosterior(
                    "Jeffreys prior needs at least one failure; supply a prior life-time guess".into(),
                ));
            }
            (r as f64, data.exposure())
        }
    };
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidInput(format!("total time {rate} must be positive")));
    }
    Ok(ExponentialPosterior { r, total_time: rate, prior, shape, rate, support: gamma_support(shape, rate, DEFAULT_WIDTH_SDS) })
}

/// Weibull posterior over `(k, λ)`; axis 1 is the shape `k`, axis 2 the rate `λ`.
#[derive(Debug, Clone, Serialize)]
pub struct WeibullPosterior {
    pub data: ReliabilityData,
    pub posterior: GridPosterior,
}

/// Unnormalized Weibull log-posterior. With a prior guess `t` the prior is
/// `(λt)^(k-1) exp[-(λt)^k]`, otherwise `1/(kλ)`.
pub fn weibull_log_posterior(data: &ReliabilityData, k: f64, lambda: f64) -> f64 {
    if !(k > 0.0 && lambda > 0.0 && k.is_finite() && lambda.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let ll = lambda.ln();
    let lk = k.ln();
    let mut acc = 0.0;
    for &x in &data.failures {
        let lx = ll + x.ln();
        acc += lk + ll + (k - 1.0) * lx - (k * lx).exp();
    }
    for &y in &data.survivals {
        acc -= (k * (ll + y.ln())).exp();
    }
    match data.prior_guess {
        Some(t) => {
            let lt = ll + t.ln();
            acc + (k - 1.0) * lt - (k * lt).exp()
        }
        None => acc - lk - ll,
    }
}

impl WeibullPosterior {
    pub fn log_density(&self, k: f64, lambda: f64) -> f64 {
        weibull_log_posterior(&self.data, k, lambda)
    }

    pub fn k_support(&self) -> (f64, f64) {
        self.posterior.support()[0]
    }

    pub fn lambda_support(&self) -> (f64, f64) {
        self.posterior.support()[1]
    }
}

pub fn build_weibull(data: &ReliabilityData, spec: &GridSpec) -> Result<WeibullPosterior> {
    let events = data.r() + usize::from(data.prior_guess.is_some());
    let exposure = data.exposure() + data.prior_guess.unwrap_or(0.0);
    let start_lambda = (events.max(1) as f64) / exposure;
    let d = data.clone();
    let posterior = build_grid_posterior(
        move |k, l| weibull_log_posterior(&d, k, l),
        [Coord::Log, Coord::Log],
        [1.0, start_lambda],
        spec,
        ["k", "lambda"],
    )?;
    Ok(WeibullPosterior { data: data.clone(), posterior })
}

/// Posterior of a Poisson event rate: `Gamma(shape, rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonPosterior {
    pub n_events: u64,
    /// Observation time `T`.
    pub observed_time: f64,
    pub prior: RatePrior,
    pub shape: f64,
    /// `T + t` under the informative prior, `T` under Jeffreys.
    pub rate: f64,
    pub support: (f64, f64),
}

impl PoissonPosterior {
    pub fn new(n_events: u64, observed_time: f64, prior_guess: Option<f64>) -> Result<Self> {
        if !(observed_time > 0.0 && observed_time.is_finite()) {
            return Err(Error::InvalidInput(format!("observation time {observed_time} must be positive")));
        }
        let prior = RatePrior::from_guess(prior_guess);
        let (shape, rate) = match prior {
            RatePrior::LifetimeGuess(t) => {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::InvalidInput(format!("prior guess {t} must be positive")));
                }
                (n_events as f64 + 1.0, observed_time + t)
            }
            RatePrior::Jeffreys => {
                if n_events == 0 {
                    return Err(Error::ImproperPosterior(
                        "no events under the Jeffreys prior; supply a prior guess".into(),
                    ));
                }
                (n_events as f64, observed_time)
            }
        };
        Ok(Self { n_events, observed_time, prior, shape, rate, support: gamma_support(shape, rate, DEFAULT_WIDTH_SDS) })
    }

    /// Combines two data sets of the same process: events and times add.
    pub fn merge(&self, other: &PoissonPosterior) -> Result<Self> {
        if self.prior != other.prior {
            return Err(Error::InvalidInput("cannot merge posteriors with different priors".into()));
        }
        let guess = match self.prior {
            RatePrior::LifetimeGuess(t) => Some(t),
            RatePrior::Jeffreys => None,
        };
        Self::new(self.n_events + other.n_events, self.observed_time + other.observed_time, guess)
    }

    pub fn density(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        gamma_log_pdf(lambda, self.shape, self.rate).exp()
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

pub fn build_poisson(data: &CountData) -> Result<PoissonPosterior> {
    let total = data
        .total_time
        .ok_or_else(|| Error::InvalidInput("Poisson model needs the total observation time T".into()))?;
    PoissonPosterior::new(data.total_events(), total, data.prior_guess)
}

/// Poisson-regression posterior over `(β0, β1)` under a flat prior.
#[derive(Debug, Clone, Serialize)]
pub struct PoissonRegPosterior {
    pub data: CountData,
    pub posterior: GridPosterior,
}

pub fn poisson_regression_log_likelihood(data: &CountData, b0: f64, b1: f64) -> f64 {
    let predictors = data.predictors.as_deref().unwrap_or(&[]);
    let tau = data.window_tau;
    data.counts
        .iter()
        .zip(predictors)
        .map(|(&r, &x)| {
            let eta = b0 + b1 * x;
            r as f64 * eta - tau * eta.exp()
        })
        .sum()
}

impl PoissonRegPosterior {
    pub fn log_density(&self, b0: f64, b1: f64) -> f64 {
        poisson_regression_log_likelihood(&self.data, b0, b1)
    }
}

pub fn build_poisson_regression(data: &CountData, spec: &GridSpec) -> Result<PoissonRegPosterior> {
    if data.predictors.is_none() {
        return Err(Error::InvalidInput("Poisson regression needs a predictor column".into()));
    }
    let mean = data.total_events() as f64 / data.counts.len() as f64;
    let start = [(mean.max(0.5) / data.window_tau).ln(), 0.0];
    let d = data.clone();
    let posterior = build_grid_posterior(
        move |b0, b1| poisson_regression_log_likelihood(&d, b0, b1),
        [Coord::Linear, Coord::Linear],
        start,
        spec,
        ["beta0", "beta1"],
    )?;
    Ok(PoissonRegPosterior { data: data.clone(), posterior })
}
