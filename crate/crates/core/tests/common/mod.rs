//! Helpers shared by the integration tests. Oracles here avoid the crate's
//! own quadrature so they check it independently.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Weibull};
use statrs::function::gamma::ln_gamma;

pub const WEIBULL_SEED: u64 = 3;
pub const WEIBULL_SHAPE: f64 = 3.0;
pub const WEIBULL_SIZE: usize = 20;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

/// Failure times drawn from a unit-scale Weibull with shape 3, seeded.
pub fn seeded_weibull_failures() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(WEIBULL_SEED);
    let dist = Weibull::new(1.0, WEIBULL_SHAPE).unwrap();
    (0..WEIBULL_SIZE).map(|_| dist.sample(&mut rng)).collect()
}

pub fn weibull_fixture_csv() -> String {
    let mut s = String::from("kind,time\n");
    for x in seeded_weibull_failures() {
        s.push_str(&format!("failure,{x:?}\n"));
    }
    s
}

/// Composite Simpson rule with `panels` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)).exp()
}

pub fn poisson_pmf(x: f64, m: u64) -> f64 {
    (m as f64 * x.ln() - x - ln_gamma(m as f64 + 1.0)).exp()
}

/// Trapezoid integral of tabulated values.
pub fn trapezoid(points: &[f64], values: &[f64]) -> f64 {
    points.windows(2).zip(values.windows(2)).map(|(p, v)| 0.5 * (p[1] - p[0]) * (v[0] + v[1])).sum()
}

/// Parses a two-column density table with a `# normalizer=` header line.
pub fn parse_table(tsv: &str) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for line in tsv.lines().skip(2) {
        let mut it = line.split('\t');
        xs.push(it.next().unwrap().parse().unwrap());
        ys.push(it.next().unwrap().parse().unwrap());
    }
    (xs, ys)
}
