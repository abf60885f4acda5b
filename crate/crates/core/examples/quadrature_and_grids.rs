//! Adaptive quadrature with endpoint singularities, and grid normalization
//! and marginalization.

use betalike::quadrature::{integrate_1d, linspace, marginalize, normalize_grid, Axis, Grid2D};

fn main() -> betalike::Result<()> {
    // ∫ (-log θ)² θ⁶ dθ over (0, 1) = Γ(3) / 7³.
    let v = integrate_1d(|t: f64| t.ln().powi(2) * t.powi(6), 0.0, 1.0, 1e-12)?;
    println!("integral {v:.12} vs {:.12}", 2.0 / 343.0);
    // Integrable singularity 1/√x.
    println!("1/sqrt(x) on (0, 1): {:.12}", integrate_1d(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10)?);
    println!("exp(-x) on (0, inf): {:.12}", integrate_1d(|x: f64| (-x).exp(), 0.0, f64::INFINITY, 1e-12)?);

    // A correlated Gaussian tabulated on a grid, normalized, then marginalized.
    let axis = linspace(-6.0, 6.0, 121);
    let g = Grid2D::tabulate(axis.clone(), axis, |x, y| (-(x * x - x * y + y * y) / 1.5).exp())?;
    let (g, mass) = normalize_grid(&g)?;
    let marginal = marginalize(&g, Axis::Second)?;
    println!("unnormalized mass {mass:.6}; marginal integrates to {:.12}", marginal.integral());
    Ok(())
}
