//! Raw moments of event probabilities under a rate posterior, conversion to
//! cumulants, and cumulants of Weibull waiting times and their sums.
//!
//! Kurtosis is always the full kurtosis (3 for a normal distribution).

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::posterior::{PoissonPosterior, PoissonRegPosterior};
use crate::quadrature::Integrator;

/// First four raw moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MomentSet {
    pub fn new(m1: f64, m2: f64, m3: f64, m4: f64) -> Self {
        Self { m1, m2, m3, m4 }
    }

    pub fn from_array(m: [f64; 4]) -> Self {
        Self::new(m[0], m[1], m[2], m[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }

    /// Raw moments of a weighted set of points.
    pub fn of_points(points: &[f64], weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        let mut m = [0.0; 4];
        for (&x, &w) in points.iter().zip(weights) {
            let mut p = w;
            for mj in m.iter_mut() {
                p *= x;
                *mj += p;
            }
        }
        Self::from_array(m.map(|v| v / total))
    }
}

/// Mean, standard deviation, skewness and full kurtosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl CumulantSet {
    pub fn new(mu: f64, sigma: f64, gamma: f64, kappa: f64) -> Self {
        Self { mu, sigma, gamma, kappa }
    }

    /// Excess kurtosis, `kappa - 3`.
    pub fn excess_kurtosis(&self) -> f64 {
        self.kappa - 3.0
    }

    /// True when some distribution has these skewness and kurtosis values
    /// with more than two support points.
    pub fn is_attainable(&self) -> bool {
        self.kappa > self.gamma * self.gamma + 1.0
    }

    /// Cumulants of `points` under `weights`, from central moments computed
    /// directly (no raw-moment cancellation).
    pub fn of_points(points: &[f64], weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numerical("weights sum to zero".into()));
        }
        let mu = points.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total;
        let mut c = [0.0; 3];
        for (&x, &w) in points.iter().zip(weights) {
            let d = x - mu;
            c[0] += w * d * d;
            c[1] += w * d * d * d;
            c[2] += w * d * d * d * d;
        }
        let [c2, c3, c4] = c.map(|v| v / total);
        from_central(mu, c2, c3, c4)
    }
}

fn from_central(mu: f64, c2: f64, c3: f64, c4: f64) -> Result<CumulantSet> {
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(Error::Numerical(format!("degenerate distribution: variance {c2:e}")));
    }
    let sigma = c2.sqrt();
    Ok(CumulantSet { mu, sigma, gamma: c3 / (c2 * sigma), kappa: c4 / (c2 * c2) })
}

pub fn moments_to_cumulants(m: &MomentSet) -> Result<CumulantSet> {
    let MomentSet { m1, m2, m3, m4 } = *m;
    if ![m1, m2, m3, m4].iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite moments {:?}", m.as_array())));
    }
    let c2 = m2 - m1 * m1;
    if c2 <= 4.0 * f64::EPSILON * m2.abs() {
        return Err(Error::Numerical(format!("degenerate distribution: variance {c2:e}")));
    }
    let c3 = m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3);
    let c4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4);
    from_central(m1, c2, c3, c4)
}

fn check_query(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tau must be positive, got {tau}")))
    }
}

/// Moments of the probability of exactly `m` events in a window `tau`,
/// `θ = (λτ)^m e^{-λτ} / m!`, under the Gamma rate posterior.
pub fn poisson_theta_moments(p: &PoissonPosterior, tau: f64, m: u64) -> Result<MomentSet> {
    check_query(tau)?;
    let (a, s) = (p.shape, p.rate);
    let mf = m as f64;
    let log_prefactor = mf * tau.ln() - ln_gamma(mf + 1.0);
    let moment = |j: f64| {
        let e = a + j * mf;
        (j * log_prefactor + a * s.ln() - ln_gamma(a) + ln_gamma(e) - e * (s + j * tau).ln()).exp()
    };
    let out = MomentSet::new(moment(1.0), moment(2.0), moment(3.0), moment(4.0));
    if out.as_array().iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Overflow(format!("Poisson moments for m={m}, tau={tau}")))
    }
}

/// Probability of more than `m` events when the expected count is `x`.
pub fn more_than_m_events(x: f64, m: u64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(m as f64 + 1.0, x)
}

/// Integrates `g(λ)` against the normalized Gamma posterior.
fn posterior_expectation<G: Fn(f64) -> f64>(p: &PoissonPosterior, g: G) -> Result<f64> {
    let (a, s) = (p.shape, p.rate);
    let log_norm = a * s.ln() - ln_gamma(a);
    let f = |l: f64| {
        if l <= 0.0 {
            return 0.0;
        }
        let w = (log_norm + (a - 1.0) * l.ln() - s * l).exp();
        if w == 0.0 {
            0.0
        } else {
            w * g(l)
        }
    };
    let quad = Integrator::with_rel_tol(1e-12);
    let (lo, hi) = p.support;
    let mid = (a / s).clamp(lo, hi);
    let mut total = 0.0;
    for (x0, x1) in [(0.0, lo), (lo, mid), (mid, hi), (hi, f64::INFINITY)] {
        total += quad.integrate(f, x0, x1)?;
    }
    Ok(total)
}

/// Moments of the probability of more than `m` events in a window `tau`
/// under the Gamma rate posterior, by direct quadrature.
pub fn cumulative_poisson_theta_moments(p: &PoissonPosterior, tau: f64, m: u64) -> Result<MomentSet> {
    check_query(tau)?;
    let mut out = [0.0; 4];
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = posterior_expectation(p, |l| more_than_m_events(l * tau, m).powi(j as i32 + 1))?;
    }
    Ok(MomentSet::from_array(out))
}

/// Same moments as [`cumulative_poisson_theta_moments`], by expanding
/// `(1 - s)^j` with `s` the truncated exponential series and integrating
/// each power of `λ` in closed form. Accurate while the moments are not
/// tiny compared to 1; intended for small `m`.
pub fn cumulative_poisson_theta_moments_by_expansion(p: &PoissonPosterior, tau: f64, m: u64) -> Result<MomentSet> {
    check_query(tau)?;
    let (a, s) = (p.shape, p.rate);
    let mu = m as usize;
    // Coefficients of λ^i in e^{λτ} s(λ).
    let base: Vec<f64> = (0..=mu).map(|i| (i as f64 * tau.ln() - ln_gamma(i as f64 + 1.0)).exp()).collect();
    // E[s^l] for l = 0..4.
    let mut power = vec![1.0];
    let mut expect_s = [1.0; 5];
    for (l, slot) in expect_s.iter_mut().enumerate().skip(1) {
        let mut next = vec![0.0; power.len() + mu];
        for (i, pi) in power.iter().enumerate() {
            for (k, bk) in base.iter().enumerate() {
                next[i + k] += pi * bk;
            }
        }
        power = next;
        let shift = (s + l as f64 * tau).ln();
        *slot = power
            .iter()
            .enumerate()
            .map(|(d, c)| {
                let e = a + d as f64;
                c * (a * s.ln() - ln_gamma(a) + ln_gamma(e) - e * shift).exp()
            })
            .sum();
    }
    let binom = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    let mut out = [0.0; 4];
    for (j, slot) in out.iter_mut().enumerate() {
        let j = j + 1;
        *slot = (0..=j)
            .map(|l| binom(j, l) * if l % 2 == 0 { 1.0 } else { -1.0 } * expect_s[l])
            .sum();
    }
    Ok(MomentSet::from_array(out))
}

/// Grid-based moments with any diagnostics raised on the way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub moments: MomentSet,
    pub warnings: Vec<String>,
}

/// Probability of exactly `m` events in `tau` at log-rate `eta`.
pub fn poisson_pmf_at_log_rate(eta: f64, tau: f64, m: u64) -> f64 {
    let mf = m as f64;
    (mf * (eta + tau.ln()) - eta.exp() * tau - ln_gamma(mf + 1.0)).exp()
}

/// Moments of `θ = P(m events in tau)` at predictor `z`, with the rate
/// `exp(β0 + β1 z)`, by quadrature over the posterior grid.
pub fn poisson_regression_theta_moments(p: &PoissonRegPosterior, z: f64, tau: f64, m: u64) -> Result<MomentEstimate> {
    check_query(tau)?;
    if !z.is_finite() {
        return Err(Error::InvalidInput(format!("z must be finite, got {z}")));
    }
    let grid = &p.posterior.grid;
    let weights = grid.weights();
    let (n1, n2) = grid.shape();
    let mut total = 0.0;
    let mut edge = 0.0;
    let mut acc = [0.0; 4];
    for i in 0..n1 {
        for j in 0..n2 {
            let w = weights[i * n2 + j] * grid.get(i, j);
            if w == 0.0 {
                continue;
            }
            total += w;
            if i == 0 || j == 0 || i + 1 == n1 || j + 1 == n2 {
                edge += w;
            }
            let theta = poisson_pmf_at_log_rate(grid.axis1[i] + grid.axis2[j] * z, tau, m);
            let mut t = w;
            for a in acc.iter_mut() {
                t *= theta;
                *a += t;
            }
        }
    }
    if !(total > 0.0) {
        return Err(Error::Numerical("posterior grid has no mass".into()));
    }
    let mut warnings = p.posterior.warnings.clone();
    if n1 > 2 && n2 > 2 && edge > 1e-3 * total {
        warnings.push(format!("posterior mass on the grid boundary is {:.3e} of the total", edge / total));
    }
    Ok(MomentEstimate { moments: MomentSet::from_array(acc.map(|v| v / total)), warnings })
}

/// Cumulants of a single Weibull waiting time with shape `k` and rate `lambda`.
pub fn weibull_waiting_cumulants(k: f64, lambda: f64) -> Result<CumulantSet> {
    if !(k > 0.0 && k.is_finite() && lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("need k > 0 and lambda > 0, got k={k}, lambda={lambda}")));
    }
    if k == 1.0 {
        return Ok(CumulantSet::new(1.0 / lambda, 1.0 / lambda, 2.0, 9.0));
    }
    // Log of E[t^j] / E[t]^j.
    let log_ratio = |k: f64, j: f64| ln_gamma(1.0 + j / k) - j * ln_gamma(1.0 + 1.0 / k);
    const LIMIT: f64 = 700.0;
    if log_ratio(k, 4.0) > LIMIT {
        let (mut lo, mut hi) = (k, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if log_ratio(mid, 4.0) > LIMIT {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Err(Error::Overflow(format!(
            "fourth moment of a Weibull waiting time overflows for k={k}; use k >= {hi:.4}"
        )));
    }
    let r2 = log_ratio(k, 2.0).exp();
    let r3 = log_ratio(k, 3.0).exp();
    let r4 = log_ratio(k, 4.0).exp();
    let mu = (ln_gamma(1.0 + 1.0 / k) - lambda.ln()).exp();
    let v = r2 - 1.0;
    if !(v > 0.0) || !mu.is_finite() {
        return Err(Error::Overflow(format!("Weibull waiting-time cumulants not representable for k={k}")));
    }
    let gamma = (r3 - 3.0 * r2 + 2.0) / v.powf(1.5);
    let kappa = (r4 - 4.0 * r3 + 6.0 * r2 - 3.0) / (v * v);
    Ok(CumulantSet::new(mu, mu * v.sqrt(), gamma, kappa))
}

/// Cumulants of the sum of `count` independent copies.
pub fn sum_cumulants(c: &CumulantSet, count: u64) -> Result<CumulantSet> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let n = count as f64;
    let root = n.sqrt();
    Ok(CumulantSet::new(n * c.mu, root * c.sigma, c.gamma / root, 3.0 + (c.kappa - 3.0) / n))
}
