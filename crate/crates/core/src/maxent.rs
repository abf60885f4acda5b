//! Fourth-order maximum-entropy densities and their use for event
//! probabilities whose distribution has no closed form.
//!
//! For standardized skewness `γ` and full kurtosis `κ` the density on a
//! standardized interval `(a, b)` is `exp(φ1 x + φ2 x² + φ3 x³ + φ4 x⁴) / C`.
//! The multipliers minimize the convex function
//! `log ∫ exp(φ · g(x)) dx` with `g = (x, x² - 1, x³ - γ, x⁴ - κ)`, whose
//! gradient is `E[g]`; at the minimum the density reproduces `(0, 1, γ, κ)`.

use std::collections::HashMap;

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::Serialize;

use crate::betalike::{ModelTag, ThetaDensity, ThetaQuery, THETA_EPS};
use crate::cumulants::{sum_cumulants, weibull_waiting_cumulants, CumulantSet};
use crate::error::{Error, Result};
use crate::posterior::WeibullPosterior;
use crate::quadrature::{composite_rule, linspace, Grid1D, Integrator};

pub const MAX_ITERATIONS: usize = 500;
pub const GRADIENT_TOL: f64 = 1e-8;
/// Residual bound a solution must meet when the gradient tolerance is not reached.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Standardized supports are clipped to `±STD_CLIP`.
pub const STD_CLIP: f64 = 50.0;
/// Width of the standardized window used for positive variables.
pub const POSITIVE_WIDTH_SDS: f64 = 6.0;
pub const DEFAULT_CELLS_PER_AXIS: usize = 32;
const PANEL_WIDTH: f64 = 0.5;
const THETA_TABLE_POINTS: usize = 1001;

/// A solved maximum-entropy density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntDensity {
    pub cumulants: CumulantSet,
    pub phi: [f64; 4],
    /// Requested standardized support.
    pub support_std: (f64, f64),
    /// Support actually integrated over, after clipping.
    pub effective_support: (f64, f64),
    /// `∫ exp(φ1 x + … + φ4 x⁴) dx` over the effective support.
    pub normalizer: f64,
    pub iterations: usize,
    /// `E[g]` at the solution.
    pub residuals: [f64; 4],
}

fn features(x: f64, gamma: f64, kappa: f64) -> Vector4<f64> {
    let x2 = x * x;
    Vector4::new(x, x2 - 1.0, x2 * x - gamma, x2 * x2 - kappa)
}

fn poly(phi: &[f64; 4], x: f64) -> f64 {
    x * (phi[0] + x * (phi[1] + x * (phi[2] + x * phi[3])))
}

struct Objective {
    log_weights: Vec<f64>,
    feats: Vec<Vector4<f64>>,
}

struct Evaluation {
    value: f64,
    gradient: Vector4<f64>,
    hessian: Matrix4<f64>,
}

impl Objective {
    fn new(lo: f64, hi: f64, gamma: f64, kappa: f64) -> Self {
        let panels = ((hi - lo) / PANEL_WIDTH).ceil().max(1.0) as usize;
        let (nodes, weights) = composite_rule(lo, hi, panels);
        let feats = nodes.iter().map(|&x| features(x, gamma, kappa)).collect();
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Self { log_weights, feats }
    }

    fn exponents(&self, phi: &Vector4<f64>) -> Vec<f64> {
        self.feats.iter().zip(&self.log_weights).map(|(g, lw)| phi.dot(g) + lw).collect()
    }

    fn value(&self, phi: &Vector4<f64>) -> f64 {
        let e = self.exponents(phi);
        let max = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max + e.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }

    fn evaluate(&self, phi: &Vector4<f64>) -> Evaluation {
        let e = self.exponents(phi);
        let max = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let p: Vec<f64> = e.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = p.iter().sum();
        let mut gradient = Vector4::zeros();
        for (pi, g) in p.iter().zip(&self.feats) {
            gradient += g * (pi / total);
        }
        let mut hessian = Matrix4::zeros();
        for (pi, g) in p.iter().zip(&self.feats) {
            let d = g - gradient;
            hessian += d * d.transpose() * (pi / total);
        }
        Evaluation { value: max + total.ln(), gradient, hessian }
    }
}

/// Solves for the maximum-entropy density with the skewness and kurtosis of
/// `c` on the standardized interval `support`.
pub fn solve_maxent(c: &CumulantSet, support: (f64, f64)) -> Result<MaxEntDensity> {
    let (a, b) = support;
    if !(a < 0.0 && 0.0 < b) {
        return Err(Error::InvalidInput(format!("standardized support ({a}, {b}) must contain 0")));
    }
    if !(c.gamma.is_finite() && c.kappa.is_finite()) {
        return Err(Error::InvalidInput("non-finite skewness or kurtosis".into()));
    }
    if !c.is_attainable() {
        return Err(Error::Infeasible(format!(
            "kurtosis {} must exceed squared skewness plus one ({})",
            c.kappa,
            c.gamma * c.gamma + 1.0
        )));
    }
    let lo = a.max(-STD_CLIP);
    let hi = b.min(STD_CLIP);
    // E[(x-lo)(hi-x)] and E[(x-lo)(hi-x)x²] must be positive on the support.
    if lo * hi >= -1.0 || c.kappa >= (lo + hi) * c.gamma - lo * hi {
        return Err(Error::Infeasible(format!(
            "skewness {} and kurtosis {} cannot be reached on the standardized support ({lo}, {hi})",
            c.gamma, c.kappa
        )));
    }
    let objective = Objective::new(lo, hi, c.gamma, c.kappa);
    let mut phi = Vector4::new(0.0, -0.5, 0.0, 0.0);
    let mut eval = objective.evaluate(&phi);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        if eval.gradient.amax() < GRADIENT_TOL {
            break;
        }
        iterations += 1;
        let step = newton_direction(&eval);
        let slope = eval.gradient.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = phi + step * t;
            let value = objective.value(&cand);
            if value.is_finite() {
                if value <= eval.value + 1e-4 * t * slope {
                    accepted = Some(cand);
                    break;
                }
                // Near the optimum the decrease drops below rounding; accept
                // steps that shrink the gradient instead.
                if (value - eval.value).abs() <= 1e-13 * eval.value.abs().max(1.0) {
                    let ce = objective.evaluate(&cand);
                    if ce.gradient.amax() < eval.gradient.amax() {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => {
                phi = next;
                eval = objective.evaluate(&phi);
            }
            None => break,
        }
    }
    let residuals = [eval.gradient[0], eval.gradient[1], eval.gradient[2], eval.gradient[3]];
    if !(eval.gradient.amax() <= RESIDUAL_TOL) {
        return Err(Error::SolverNonConvergence { iterations, residuals });
    }
    let phi = [phi[0], phi[1], phi[2], phi[3]];
    // Normalizer of the polynomial exponent without the constant terms.
    let constant = -(phi[1] + phi[2] * c.gamma + phi[3] * c.kappa);
    let normalizer = (eval.value - constant).exp();
    Ok(MaxEntDensity {
        cumulants: *c,
        phi,
        support_std: support,
        effective_support: (lo, hi),
        normalizer,
        iterations,
        residuals,
    })
}

fn newton_direction(eval: &Evaluation) -> Vector4<f64> {
    let mut damping = 0.0;
    let scale = eval.hessian.diagonal().amax().max(1e-300);
    for _ in 0..30 {
        let h = eval.hessian + Matrix4::identity() * damping;
        if let Some(chol) = h.cholesky() {
            let d = chol.solve(&(-eval.gradient));
            if d.iter().all(|v| v.is_finite()) {
                return d;
            }
        }
        damping = if damping == 0.0 { 1e-12 * scale } else { damping * 10.0 };
    }
    -eval.gradient
}

impl MaxEntDensity {
    /// Density at standardized `x`.
    pub fn pdf_std(&self, x: f64) -> f64 {
        let (lo, hi) = self.effective_support;
        if x < lo || x > hi {
            return 0.0;
        }
        poly(&self.phi, x).exp() / self.normalizer
    }

    /// Density at `q = μ + σ x`.
    pub fn pdf(&self, q: f64) -> f64 {
        let CumulantSet { mu, sigma, .. } = self.cumulants;
        self.pdf_std((q - mu) / sigma) / sigma
    }

    pub fn cdf_std(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.effective_support;
        if x <= lo {
            return Ok(0.0);
        }
        if x >= hi {
            return Ok(1.0);
        }
        let quad = Integrator::with_rel_tol(1e-11);
        // Integrate the shorter side for accuracy in the tails.
        let mid = 0.5 * (lo + hi);
        let v = if x <= mid {
            quad.integrate(|t| self.pdf_std(t), lo, x)?
        } else {
            1.0 - quad.integrate(|t| self.pdf_std(t), x, hi)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    pub fn cdf(&self, q: f64) -> Result<f64> {
        let CumulantSet { mu, sigma, .. } = self.cumulants;
        self.cdf_std((q - mu) / sigma)
    }

    /// Support in natural units.
    pub fn support(&self) -> (f64, f64) {
        let CumulantSet { mu, sigma, .. } = self.cumulants;
        (mu + sigma * self.effective_support.0, mu + sigma * self.effective_support.1)
    }

    /// Mass and the first four standardized moments, by adaptive quadrature.
    pub fn standardized_moments(&self) -> Result<[f64; 5]> {
        let (lo, hi) = self.effective_support;
        let quad = Integrator::with_rel_tol(1e-12);
        let mut out = [0.0; 5];
        for (j, slot) in out.iter_mut().enumerate() {
            let knots = linspace(lo, hi, ((hi - lo) / 2.0).ceil().max(1.0) as usize + 1);
            *slot = knots
                .windows(2)
                .map(|w| quad.integrate(|x| x.powi(j as i32) * self.pdf_std(x), w[0], w[1]))
                .sum::<Result<f64>>()?;
        }
        Ok(out)
    }

    /// Density tabulated on `n` uniform points of its support.
    pub fn to_grid(&self, n: usize) -> Result<Grid1D> {
        let (lo, hi) = self.support();
        Grid1D::tabulate(linspace(lo, hi, n), |q| self.pdf(q))
    }
}

fn check_location(c: &CumulantSet) -> Result<()> {
    if !(c.sigma > 0.0 && c.sigma.is_finite() && c.mu.is_finite()) {
        return Err(Error::InvalidInput(format!("need finite mean and positive sigma, got {c:?}")));
    }
    Ok(())
}

/// MaxEnt density of a probability with the given cumulants, on `[0, 1]`.
pub fn maxent_theta_density(c: &CumulantSet) -> Result<ThetaDensity> {
    maxent_theta_fit(c).map(|(_, d)| d)
}

/// As [`maxent_theta_density`], also returning the solved multipliers.
pub fn maxent_theta_fit(c: &CumulantSet) -> Result<(MaxEntDensity, ThetaDensity)> {
    check_location(c)?;
    if !(c.mu > 0.0 && c.mu < 1.0) {
        return Err(Error::InvalidInput(format!("mean {} must lie in (0, 1)", c.mu)));
    }
    let me = solve_maxent(c, (-c.mu / c.sigma, (1.0 - c.mu) / c.sigma))?;
    let (lo, hi) = me.support();
    let lo = lo.clamp(THETA_EPS, 1.0 - THETA_EPS);
    let hi = hi.clamp(THETA_EPS, 1.0 - THETA_EPS);
    let mut points = linspace(lo, hi, THETA_TABLE_POINTS);
    let mut values: Vec<f64> = points.iter().map(|&t| me.pdf(t)).collect();
    if lo > THETA_EPS {
        points.insert(0, THETA_EPS);
        values.insert(0, 0.0);
    }
    if hi < 1.0 - THETA_EPS {
        points.push(1.0 - THETA_EPS);
        values.push(0.0);
    }
    let mut d = ThetaDensity::from_unnormalized(points, values, ModelTag::MaxentApprox, ThetaQuery::default())?;
    d.normalizer *= c.sigma * me.normalizer;
    Ok((me, d))
}

/// MaxEnt density of a positive quantity (e.g. a sum of waiting times),
/// supported on `[max(0, μ - 6σ), μ + 6σ]`.
pub fn maxent_positive_density(c: &CumulantSet) -> Result<MaxEntDensity> {
    check_location(c)?;
    if !(c.mu > 0.0) {
        return Err(Error::InvalidInput(format!("mean {} must be positive", c.mu)));
    }
    let lower = (-c.mu / c.sigma).max(-POSITIVE_WIDTH_SDS);
    solve_maxent(c, (lower, positive_upper_limit(c, lower)))
}

/// `+6` standardized units, unless the kurtosis needs a longer right tail.
/// Then half again the shortest limit that passes the feasibility bound.
fn positive_upper_limit(c: &CumulantSet, lower: f64) -> f64 {
    let fits = |upper: f64| c.kappa < (lower + upper) * c.gamma - lower * upper;
    if fits(POSITIVE_WIDTH_SDS) || c.gamma <= lower {
        return POSITIVE_WIDTH_SDS;
    }
    let shortest = (c.kappa - lower * c.gamma) / (c.gamma - lower);
    (1.5 * shortest).clamp(POSITIVE_WIDTH_SDS, STD_CLIP)
}

/// Standardized MaxEnt solutions of Weibull waiting-time sums, keyed by the
/// shape and the number of summed waiting times. The standardized shape of
/// such a sum does not depend on the rate.
#[derive(Debug, Default)]
pub struct WaitingSumCache {
    solved: HashMap<(u64, u64), MaxEntDensity>,
}

impl WaitingSumCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// MaxEnt density of the sum of `count` waiting times at rate 1.
    pub fn unit_rate(&mut self, k: f64, count: u64) -> Result<&MaxEntDensity> {
        let key = (k.to_bits(), count);
        if let std::collections::hash_map::Entry::Vacant(slot) = self.solved.entry(key) {
            let c = sum_cumulants(&weibull_waiting_cumulants(k, 1.0)?, count)?;
            slot.insert(maxent_positive_density(&c)?);
        }
        Ok(&self.solved[&key])
    }

    /// CDF at `tau` of the sum of `count` waiting times with rate `lambda`.
    pub fn sum_cdf(&mut self, k: f64, lambda: f64, count: u64, tau: f64) -> Result<f64> {
        // With rate λ the sum is the unit-rate sum divided by λ.
        self.unit_rate(k, count)?.cdf(lambda * tau)
    }
}

fn check_pmf_args(k: f64, lambda: f64, tau: f64) -> Result<()> {
    if !(k > 0.0 && lambda > 0.0 && tau > 0.0 && k.is_finite() && lambda.is_finite() && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("need positive k, lambda and tau, got ({k}, {lambda}, {tau})")));
    }
    Ok(())
}

/// Probability of exactly `m` events in `tau` for a renewal process with
/// Weibull waiting times, from MaxEnt approximations of the waiting-time sums.
pub fn poisson_like_pmf(k: f64, lambda: f64, tau: f64, m: u64) -> Result<f64> {
    poisson_like_pmf_cached(&mut WaitingSumCache::new(), k, lambda, tau, m)
}

pub fn poisson_like_pmf_cached(cache: &mut WaitingSumCache, k: f64, lambda: f64, tau: f64, m: u64) -> Result<f64> {
    check_pmf_args(k, lambda, tau)?;
    if m == 0 {
        return Ok((-(lambda * tau).powf(k)).exp());
    }
    let fm = cache.sum_cdf(k, lambda, m, tau)?;
    let fm1 = cache.sum_cdf(k, lambda, m + 1, tau)?;
    Ok((fm - fm1).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureKind {
    DensityMixture,
    ThetaPushforward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Point(f64),
    MaxEnt(MaxEntDensity),
}

/// A posterior-weighted collection of point masses or MaxEnt densities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureDensity {
    pub kind: MixtureKind,
    pub components: Vec<(f64, Component)>,
}

impl MixtureDensity {
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    /// Locations and weights of the point-mass components.
    pub fn points(&self) -> (Vec<f64>, Vec<f64>) {
        self.components
            .iter()
            .filter_map(|(w, c)| match c {
                Component::Point(x) => Some((*x, *w)),
                Component::MaxEnt(_) => None,
            })
            .unzip()
    }

    pub fn mean(&self) -> f64 {
        self.components
            .iter()
            .map(|(w, c)| {
                w * match c {
                    Component::Point(x) => *x,
                    Component::MaxEnt(d) => d.cumulants.mu,
                }
            })
            .sum()
    }

    /// Mixture density at `x`; point masses contribute nothing.
    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|(w, c)| match c {
                Component::Point(_) => 0.0,
                Component::MaxEnt(d) => w * d.pdf(x),
            })
            .sum()
    }
}

/// Cell centers and normalized posterior weights of a `(k, λ)` partition.
#[derive(Debug, Clone)]
struct Cells {
    ks: Vec<f64>,
    lambdas: Vec<f64>,
    /// Row-major over `(k, λ)`.
    weights: Vec<f64>,
}

fn partition_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    // Uniform cells in log coordinates.
    let (a, b) = (lo.ln(), hi.ln());
    let width = (b - a) / n as f64;
    (0..n).map(|i| (a + (i as f64 + 0.5) * width).exp()).collect()
}

fn weibull_cells(p: &WeibullPosterior, n: usize) -> Result<Cells> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least 2 cells per axis".into()));
    }
    let (klo, khi) = p.k_support();
    let (llo, lhi) = p.lambda_support();
    let ks = partition_axis(klo, khi, n);
    let lambdas = partition_axis(llo, lhi, n);
    let log_max = p.posterior.log_max;
    // Midpoint rule in log coordinates: cell volume ∝ k λ.
    let raw: Vec<f64> = ks
        .iter()
        .flat_map(|&k| lambdas.iter().map(move |&l| (k, l)))
        .map(|(k, l)| (p.log_density(k, l) - log_max + k.ln() + l.ln()).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numerical("posterior cells carry no mass".into()));
    }
    Ok(Cells { weights: raw.iter().map(|w| w / total).collect(), ks, lambdas })
}

/// Distribution of the Weibull-process event probability over the posterior.
#[derive(Debug, Clone, Serialize)]
pub struct PoissonLikeTheta {
    /// MaxEnt fit to the first four cumulants of the pushforward.
    pub density: ThetaDensity,
    /// Posterior-weighted point masses at the per-cell probabilities.
    pub pushforward: MixtureDensity,
    pub cumulants: Option<CumulantSet>,
    pub warnings: Vec<String>,
}

/// Narrow normalized triangle standing in for a point mass at `theta`.
fn spike_density(theta: f64, query: ThetaQuery) -> Result<ThetaDensity> {
    let half = 1e-9;
    let c = theta.clamp(THETA_EPS + 2.0 * half, 1.0 - THETA_EPS - 2.0 * half);
    let points = vec![THETA_EPS, c - half, c, c + half, 1.0 - THETA_EPS];
    let values = vec![0.0, 0.0, 1.0, 0.0, 0.0];
    let mut d = ThetaDensity::from_unnormalized(points, values, ModelTag::GridMixture, query)?;
    d.warnings.push(format!("distribution is a point mass at {theta}"));
    Ok(d)
}

/// Distribution of `P(m events in tau)` under the Weibull posterior `p`,
/// from a `grid_n × grid_n` partition of the posterior support.
pub fn poisson_like_theta_distribution(p: &WeibullPosterior, tau: f64, m: u64, grid_n: usize) -> Result<PoissonLikeTheta> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    let cells = weibull_cells(p, grid_n)?;
    let nl = cells.lambdas.len();
    let columns: Vec<Vec<Result<f64>>> = cells
        .ks
        .par_iter()
        .map(|&k| {
            let mut cache = WaitingSumCache::new();
            cells.lambdas.iter().map(|&l| poisson_like_pmf_cached(&mut cache, k, l, tau, m)).collect()
        })
        .collect();
    let mut warnings = p.posterior.warnings.clone();
    let mut points = Vec::with_capacity(cells.weights.len());
    let mut weights = Vec::with_capacity(cells.weights.len());
    let mut dropped = 0usize;
    for (i, column) in columns.into_iter().enumerate() {
        for (j, theta) in column.into_iter().enumerate() {
            let w = cells.weights[i * nl + j];
            match theta {
                Ok(t) => {
                    points.push(t);
                    weights.push(w);
                }
                Err(_) if w < 1e-9 => dropped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    if dropped > 0 {
        warnings.push(format!("dropped {dropped} cells of negligible weight whose probability could not be computed"));
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let pushforward = MixtureDensity {
        kind: MixtureKind::ThetaPushforward,
        components: points.iter().zip(&weights).map(|(&t, &w)| (w, Component::Point(t))).collect(),
    };
    let query = ThetaQuery { tau: Some(tau), m: Some(m), z: None };
    let spread = CumulantSet::of_points(&points, &weights).ok().filter(|c| c.sigma > 1e-12 * c.mu.abs().max(1e-300));
    let (mut density, cumulants) = match spread {
        Some(c) => {
            let mut d = maxent_theta_density(&c)?;
            d.query = query;
            (d, Some(c))
        }
        None => (spike_density(pushforward.mean(), query)?, None),
    };
    density.marginal_support = Some(p.k_support());
    density.warnings.extend(warnings.iter().cloned());
    Ok(PoissonLikeTheta { density, pushforward, cumulants, warnings })
}

/// Posterior-weighted mixture of MaxEnt densities of the sum of `count`
/// Weibull waiting times, one component per cell.
pub fn waiting_time_mixture(p: &WeibullPosterior, count: u64, grid_n: usize) -> Result<MixtureDensity> {
    let cells = weibull_cells(p, grid_n)?;
    let nl = cells.lambdas.len();
    let columns: Vec<Vec<(f64, Component)>> = cells
        .ks
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let c = sum_cumulants(&weibull_waiting_cumulants(k, 1.0)?, count)?;
            let unit = maxent_positive_density(&c)?;
            Ok(cells
                .lambdas
                .iter()
                .enumerate()
                .map(|(j, &l)| {
                    let mut d = unit.clone();
                    d.cumulants.mu /= l;
                    d.cumulants.sigma /= l;
                    (cells.weights[i * nl + j], Component::MaxEnt(d))
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(MixtureDensity { kind: MixtureKind::DensityMixture, components: columns.into_iter().flatten().collect() })
}
