//! Numerical integration: adaptive Gauss–Kronrod for functions, trapezoid
//! rules for tabulated grids.
//!
//! The adaptive integrator bisects the interval with the largest error
//! estimate until the total estimate meets the requested tolerance. The
//! 21-point Kronrod rule never evaluates the end points, so integrable
//! end-point singularities are fine. Semi-infinite ranges are mapped onto
//! `[0, 1)` through `x = a + u / (1 - u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// 21-point Kronrod abscissae on [-1, 1]; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Adaptive Gauss–Kronrod integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { rel_tol: DEFAULT_REL_TOL, abs_tol: 0.0, max_subdivisions: 2000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut resabs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
        res_k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error, resabs }
}

impl Integrator {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    /// Integrates `f` over `[a, b]`; either bound may be infinite.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate_dyn(&f, a, b)
    }

    fn integrate_dyn(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::InvalidInput("NaN integration bound".into()));
        }
        if a == b {
            return Ok(0.0);
        }
        if a > b {
            return self.integrate_dyn(f, b, a).map(|v| -v);
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.finite(&f, a, b),
            (true, false) => self.finite(
                &|u: f64| {
                    let w = 1.0 - u;
                    f(a + u / w) / (w * w)
                },
                0.0,
                1.0,
            ),
            (false, true) => self.finite(
                &|u: f64| {
                    let w = 1.0 - u;
                    f(b - u / w) / (w * w)
                },
                0.0,
                1.0,
            ),
            (false, false) => Ok(self.integrate_dyn(f, f64::NEG_INFINITY, 0.0)? + self.integrate_dyn(f, 0.0, b)?),
        }
    }

    fn finite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<f64> {
        let first = kronrod21(f, a, b);
        if !first.value.is_finite() {
            return Err(Error::Numerical(format!("integrand not finite on [{a}, {b}]")));
        }
        let mut segments = vec![first];
        loop {
            let total: f64 = segments.iter().map(|s| s.value).sum();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            let resabs: f64 = segments.iter().map(|s| s.resabs).sum();
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if error <= target || error <= 50.0 * f64::EPSILON * resabs {
                return Ok(total);
            }
            if segments.len() >= self.max_subdivisions {
                return Err(Error::NonConvergence { estimate: total, error_bound: error });
            }
            let (worst, _) = segments
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
            let seg = segments.swap_remove(worst);
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // Interval cannot be split further in floating point.
                return Err(Error::NonConvergence { estimate: total, error_bound: error });
            }
            let left = kronrod21(f, seg.a, mid);
            let right = kronrod21(f, mid, seg.b);
            if !(left.value.is_finite() && right.value.is_finite()) {
                return Err(Error::Numerical(format!("integrand not finite on [{}, {}]", seg.a, seg.b)));
            }
            segments.push(left);
            segments.push(right);
        }
    }
}

/// Adaptive integral of `f` over `[a, b]` with relative tolerance `rel_tol`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    Integrator::with_rel_tol(rel_tol).integrate(f, a, b)
}

/// Nodes and weights of a fixed composite 21-point Kronrod rule with
/// `panels` equal panels on `[a, b]`. Exact for polynomials of degree 31 on
/// each panel.
pub fn composite_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 21);
    let mut weights = Vec::with_capacity(panels * 21);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let center = lo + 0.5 * width;
        let half = 0.5 * width;
        for j in 0..10 {
            nodes.push(center - half * XGK[j]);
            weights.push(half * WGK[j]);
        }
        nodes.push(center);
        weights.push(half * WGK[10]);
        for j in (0..10).rev() {
            nodes.push(center + half * XGK[j]);
            weights.push(half * WGK[j]);
        }
    }
    (nodes, weights)
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
            v[n - 1] = hi;
            v
        }
    }
}

/// Trapezoid weights for the abscissae `points`. A single point gets weight 1
/// so that a collapsed grid behaves as a point mass.
pub fn trapezoid_weights(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let mut w = vec![0.0; n];
            for i in 0..n - 1 {
                let h = 0.5 * (points[i + 1] - points[i]);
                w[i] += h;
                w[i + 1] += h;
            }
            w
        }
    }
}

fn check_axis(points: &[f64], name: &str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidInput(format!("{name} is empty")));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite points")));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(format!("{name} is not strictly increasing")));
    }
    Ok(())
}

/// Values tabulated on a strictly increasing 1-D grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

impl Grid1D {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis(&points, "grid")?;
        if points.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        Ok(Self { points, values })
    }

    pub fn tabulate<F: Fn(f64) -> f64>(points: Vec<f64>, f: F) -> Result<Self> {
        let values = points.iter().map(|&x| f(x)).collect();
        Self::new(points, values)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.points)
    }

    /// Trapezoid weights multiplied by the values.
    pub fn weights_times_values(&self) -> Vec<f64> {
        self.weights().iter().zip(&self.values).map(|(w, v)| w * v).collect()
    }

    /// Trapezoid integral of the values.
    pub fn integral(&self) -> f64 {
        self.weights().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Trapezoid integral of `g(x) * value(x)`.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.weights()
            .iter()
            .zip(self.points.iter().zip(&self.values))
            .map(|(w, (&x, v))| w * g(x) * v)
            .sum()
    }

    /// Linear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let p = &self.points;
        if p.len() == 1 {
            return if x == p[0] { self.values[0] } else { 0.0 };
        }
        if x < p[0] || x > p[p.len() - 1] {
            return 0.0;
        }
        let i = p.partition_point(|&q| q <= x).clamp(1, p.len() - 1);
        let t = (x - p[i - 1]) / (p[i] - p[i - 1]);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { points: self.points.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Values on a tensor-product grid, stored row-major: `values[i * axis2.len() + j]`
/// belongs to `(axis1[i], axis2[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<f64>,
}

/// Grid axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    First,
    Second,
}

impl Grid2D {
    pub fn new(axis1: Vec<f64>, axis2: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis(&axis1, "axis1")?;
        check_axis(&axis2, "axis2")?;
        if values.len() != axis1.len() * axis2.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                axis1.len() * axis2.len(),
                values.len()
            )));
        }
        Ok(Self { axis1, axis2, values })
    }

    pub fn tabulate<F: Fn(f64, f64) -> f64>(axis1: Vec<f64>, axis2: Vec<f64>, f: F) -> Result<Self> {
        let values = axis1.iter().flat_map(|&a| axis2.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect();
        Self::new(axis1, axis2, values)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.len() + j]
    }

    /// Tensor-product trapezoid weights, same layout as `values`.
    pub fn weights(&self) -> Vec<f64> {
        let w1 = trapezoid_weights(&self.axis1);
        let w2 = trapezoid_weights(&self.axis2);
        w1.iter().flat_map(|a| w2.iter().map(move |b| a * b)).collect()
    }

    pub fn integral(&self) -> f64 {
        self.weights().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            axis1: self.axis1.clone(),
            axis2: self.axis2.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Grids that carry a (possibly unnormalized) density.
pub trait GridDensity: Sized {
    fn values(&self) -> &[f64];
    fn mass(&self) -> f64;
    fn rescaled(&self, factor: f64) -> Self;
}

impl GridDensity for Grid1D {
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn mass(&self) -> f64 {
        self.integral()
    }
    fn rescaled(&self, factor: f64) -> Self {
        self.scaled(factor)
    }
}

impl GridDensity for Grid2D {
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn mass(&self) -> f64 {
        self.integral()
    }
    fn rescaled(&self, factor: f64) -> Self {
        self.scaled(factor)
    }
}

/// Scales a nonnegative grid to unit trapezoid mass. Returns the normalized
/// grid and the normalizing constant (the original mass).
pub fn normalize_grid<G: GridDensity>(grid: &G) -> Result<(G, f64)> {
    if grid.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("grid contains non-finite values".into()));
    }
    if grid.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidInput("density grid has negative values".into()));
    }
    let mass = grid.mass();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::Numerical(format!("grid mass {mass} cannot be normalized")));
    }
    Ok((grid.rescaled(1.0 / mass), mass))
}

/// Trapezoid-integrates `grid` along `integrate_out`, returning a function of
/// the remaining axis.
pub fn marginalize(grid: &Grid2D, integrate_out: Axis) -> Result<Grid1D> {
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("grid contains non-finite values".into()));
    }
    let (n1, n2) = grid.shape();
    match integrate_out {
        Axis::First => {
            let w = trapezoid_weights(&grid.axis1);
            let values = (0..n2).map(|j| (0..n1).map(|i| w[i] * grid.get(i, j)).sum()).collect();
            Grid1D::new(grid.axis2.clone(), values)
        }
        Axis::Second => {
            let w = trapezoid_weights(&grid.axis2);
            let values = (0..n1).map(|i| (0..n2).map(|j| w[j] * grid.get(i, j)).sum()).collect();
            Grid1D::new(grid.axis1.clone(), values)
        }
    }
}
