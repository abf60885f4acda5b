//! Densities of a probability of interest `θ` on `(0, 1)`, obtained from a
//! parameter posterior by change of variables and numerical marginalization.
//!
//! * logistic regression: `θ = 1 / (1 + e^{-(β0 + β1 z)})`, marginalized over `β1`;
//! * Exponential: `θ = e^{-λτ}`, in closed form;
//! * Weibull: `θ = e^{-(λτ)^k}`, marginalized over `k`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::cumulants::{moments_to_cumulants, CumulantSet, MomentSet};
use crate::error::{Error, Result};
use crate::posterior::{ExponentialPosterior, LogisticPosterior, WeibullPosterior};
use crate::quadrature::{integrate_1d, normalize_grid, Grid1D, Integrator};

/// Endpoint clipping for tabulated abscissae.
pub const THETA_EPS: f64 = 1e-12;
pub const DEFAULT_THETA_POINTS: usize = 1001;
/// Trapezoid mass error allowed in a closed-form table, and its size cap.
const CLOSED_FORM_TABLE_TOL: f64 = 1e-7;
const MAX_CLOSED_FORM_POINTS: usize = 64_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Logistic,
    Exponential,
    Weibull,
    MaxentApprox,
    GridMixture,
}

/// The question a density answers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ThetaQuery {
    pub tau: Option<f64>,
    pub z: Option<f64>,
    pub m: Option<u64>,
}

/// A density known in closed form, evaluated exactly instead of interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `θ = e^{-λτ}` with `λ ~ Gamma(shape, rate)`; `ratio = rate / τ`.
    ExponentialSurvival { shape: f64, ratio: f64 },
}

impl ClosedForm {
    pub fn pdf(&self, theta: f64) -> f64 {
        match *self {
            ClosedForm::ExponentialSurvival { shape, ratio } => {
                if !(theta > 0.0 && theta <= 1.0) {
                    return 0.0;
                }
                let nl = -theta.ln();
                if nl == 0.0 {
                    // Limit at θ = 1, where (-log θ)^(shape-1) decides.
                    return match shape {
                        s if s > 1.0 => 0.0,
                        s if s < 1.0 => f64::INFINITY,
                        _ => ratio,
                    };
                }
                (shape * ratio.ln() - ln_gamma(shape) + (shape - 1.0) * nl.ln() + (ratio - 1.0) * theta.ln()).exp()
            }
        }
    }

    /// `E[θ^j]`.
    pub fn raw_moment(&self, j: u32) -> f64 {
        match *self {
            ClosedForm::ExponentialSurvival { shape, ratio } => (ratio / (ratio + j as f64)).powf(shape),
        }
    }

    /// Log of the constant that normalizes the `θ`-dependent factor.
    pub fn log_normalizer(&self) -> f64 {
        match *self {
            ClosedForm::ExponentialSurvival { shape, ratio } => shape * ratio.ln() - ln_gamma(shape),
        }
    }
}

/// A normalized density of `θ` tabulated on a grid in `[0, 1]`.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaDensity {
    pub grid: Grid1D,
    /// Mass of the unnormalized tabulation (numeric densities) or the
    /// analytic normalizing constant (closed forms).
    pub normalizer: f64,
    pub model_tag: ModelTag,
    pub query: ThetaQuery,
    /// Range of the marginalized parameter, when there is one.
    pub marginal_support: Option<(f64, f64)>,
    pub closed_form: Option<ClosedForm>,
    pub warnings: Vec<String>,
}

/// `n` points on `[0, 1]` clustered toward both ends, clipped to `[ε, 1-ε]`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "theta grid needs at least two points");
    (0..n)
        .map(|i| {
            let t = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos());
            t.clamp(THETA_EPS, 1.0 - THETA_EPS)
        })
        .collect()
}

impl ThetaDensity {
    /// Normalizes a nonnegative tabulation by its trapezoid mass.
    pub fn from_unnormalized(
        points: Vec<f64>,
        values: Vec<f64>,
        model_tag: ModelTag,
        query: ThetaQuery,
    ) -> Result<Self> {
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::Numerical("negative density value".into()));
        }
        let (grid, normalizer) = normalize_grid(&Grid1D::new(points, values)?)?;
        Ok(Self { grid, normalizer, model_tag, query, marginal_support: None, closed_form: None, warnings: Vec::new() })
    }

    /// Density at `θ`: exact for closed forms, linear interpolation otherwise.
    pub fn pdf(&self, theta: f64) -> f64 {
        match &self.closed_form {
            Some(c) => c.pdf(theta),
            None => self.grid.interpolate(theta),
        }
    }

    /// Trapezoid mass on the density's own grid.
    pub fn grid_mass(&self) -> f64 {
        self.grid.integral()
    }

    /// Total mass: adaptive quadrature for closed forms, trapezoid otherwise.
    pub fn mass(&self) -> Result<f64> {
        match &self.closed_form {
            Some(c) => integrate_1d(|t| c.pdf(t), 0.0, 1.0, 1e-12),
            None => Ok(self.grid_mass()),
        }
    }

    pub fn verify_normalization(&self, tol: f64) -> Result<()> {
        let mass = self.mass()?;
        if (mass - 1.0).abs() > tol {
            return Err(Error::Numerical(format!("density integrates to {mass}, not 1")));
        }
        if self.grid.values.iter().any(|v| !(*v >= 0.0) || v.is_infinite()) {
            return Err(Error::Numerical("density has negative or non-finite values".into()));
        }
        Ok(())
    }

    pub fn raw_moments(&self) -> MomentSet {
        match &self.closed_form {
            Some(c) => MomentSet::new(c.raw_moment(1), c.raw_moment(2), c.raw_moment(3), c.raw_moment(4)),
            None => {
                let m = |j: i32| self.grid.expect(|t| t.powi(j));
                MomentSet::new(m(1), m(2), m(3), m(4))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moments().m1
    }

    pub fn cumulants(&self) -> Result<CumulantSet> {
        match &self.closed_form {
            Some(_) => moments_to_cumulants(&self.raw_moments()),
            None => CumulantSet::of_points(&self.grid.points, &self.grid.weights_times_values()),
        }
    }

    /// Tab-separated `theta` / `density` table with a normalizer header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# normalizer={:.16e}", self.normalizer);
        let _ = writeln!(out, "theta\tdensity");
        for (t, v) in self.grid.points.iter().zip(&self.grid.values) {
            let _ = writeln!(out, "{:.16e}\t{:.16e}", t.clamp(THETA_EPS, 1.0 - THETA_EPS), v);
        }
        out
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tau must be positive, got {tau}")))
    }
}

/// Density of the success probability at predictor `z`.
pub fn logistic_theta_density(p: &LogisticPosterior, z: f64) -> Result<ThetaDensity> {
    logistic_theta_density_on(p, z, theta_grid(DEFAULT_THETA_POINTS))
}

pub fn logistic_theta_density_on(p: &LogisticPosterior, z: f64, thetas: Vec<f64>) -> Result<ThetaDensity> {
    if !z.is_finite() {
        return Err(Error::InvalidInput(format!("z must be finite, got {z}")));
    }
    let (lo, hi) = p.posterior.support()[1];
    let log_max = p.posterior.log_max;
    let values: Vec<f64> = thetas
        .par_iter()
        .map(|&theta| {
            let logit = (theta / (1.0 - theta)).ln();
            let integrand = |b1: f64| (p.log_density(logit - b1 * z, b1) - log_max).exp();
            let marginal = if lo == hi {
                integrand(lo)
            } else {
                Integrator::with_rel_tol(1e-8).integrate(integrand, lo, hi)?
            };
            Ok(marginal / (theta * (1.0 - theta)))
        })
        .collect::<Result<_>>()?;
    let mut d = ThetaDensity::from_unnormalized(thetas, values, ModelTag::Logistic, ThetaQuery { z: Some(z), ..Default::default() })?;
    d.marginal_support = Some((lo, hi));
    d.warnings = p.posterior.warnings.clone();
    Ok(d)
}

/// Density of the probability of surviving a mission of length `tau`.
pub fn exponential_theta_density(p: &ExponentialPosterior, tau: f64) -> Result<ThetaDensity> {
    check_tau(tau)?;
    let ratio = p.rate / tau;
    let closed = ClosedForm::ExponentialSurvival { shape: p.shape, ratio };
    let tabulate = |n| Grid1D::tabulate(theta_grid(n), |t| closed.pdf(t));
    let mut grid = tabulate(DEFAULT_THETA_POINTS)?;
    let mut warnings = Vec::new();
    if ratio < 1.0 || p.shape < 1.0 {
        warnings.push(format!(
            "density is unbounded at an end of [0, 1]; the table is a sampling, its mass ({:.6}) is not 1",
            grid.integral()
        ));
    } else {
        // Refine until the table itself integrates to 1 by the trapezoid rule.
        while (grid.integral() - 1.0).abs() > CLOSED_FORM_TABLE_TOL && grid.len() < MAX_CLOSED_FORM_POINTS {
            grid = tabulate(2 * grid.len() - 1)?;
        }
    }
    Ok(ThetaDensity {
        grid,
        normalizer: closed.log_normalizer().exp(),
        model_tag: ModelTag::Exponential,
        query: ThetaQuery { tau: Some(tau), ..Default::default() },
        marginal_support: None,
        closed_form: Some(closed),
        warnings,
    })
}

/// Posterior mean of the survival probability over a mission of length `tau`.
pub fn exponential_theta_mean(p: &ExponentialPosterior, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok((p.rate / (p.rate + tau)).powf(p.shape))
}

/// Density of the Weibull survival probability over a mission of length `tau`.
pub fn weibull_theta_density(p: &WeibullPosterior, tau: f64) -> Result<ThetaDensity> {
    weibull_theta_density_on(p, tau, theta_grid(DEFAULT_THETA_POINTS))
}

pub fn weibull_theta_density_on(p: &WeibullPosterior, tau: f64, thetas: Vec<f64>) -> Result<ThetaDensity> {
    check_tau(tau)?;
    let (lo, hi) = p.k_support();
    let mode = p.posterior.mode[0].clamp(lo, hi);
    let log_max = p.posterior.log_max;
    let ln_tau = tau.ln();
    let values: Vec<f64> = thetas
        .par_iter()
        .map(|&theta| {
            let neg_log = -theta.ln();
            let ln_neg_log = neg_log.ln();
            let integrand = |k: f64| {
                let ln_lambda = ln_neg_log / k - ln_tau;
                // Small shapes send λ past the floating-point range, where
                // the posterior has long since vanished.
                if !ln_lambda.is_finite() || ln_lambda.abs() > 700.0 {
                    return 0.0;
                }
                let log_jac = ln_lambda - k.ln() - theta.ln() - ln_neg_log;
                (p.log_density(k, ln_lambda.exp()) - log_max + log_jac).exp()
            };
            if lo == hi {
                return Ok(integrand(lo));
            }
            let quad = Integrator::with_rel_tol(1e-8);
            Ok(quad.integrate(integrand, lo, mode)? + quad.integrate(integrand, mode, hi)?)
        })
        .collect::<Result<_>>()?;
    let mut d = ThetaDensity::from_unnormalized(thetas, values, ModelTag::Weibull, ThetaQuery { tau: Some(tau), ..Default::default() })?;
    d.marginal_support = Some((lo, hi));
    d.warnings = p.posterior.warnings.clone();
    Ok(d)
}
