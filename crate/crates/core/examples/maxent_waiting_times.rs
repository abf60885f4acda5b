//! Maximum-entropy density of a sum of waiting times, compared with the exact
//! Gamma density, and a MaxEnt density of a probability from its cumulants.

use betalike::cumulants::{sum_cumulants, weibull_waiting_cumulants, CumulantSet};
use betalike::maxent::{maxent_positive_density, maxent_theta_fit};

fn main() -> betalike::Result<()> {
    // Four unit-rate exponential waiting times sum to a Gamma(4, 1) variable.
    let single = weibull_waiting_cumulants(1.0, 1.0)?;
    let four = sum_cumulants(&single, 4)?;
    let me = maxent_positive_density(&four)?;
    println!("cumulants of the sum: {four:?}");
    println!("{:>5} {:>10} {:>10}", "q", "maxent", "gamma");
    for q in [0.5f64, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0] {
        let exact = q * q * q * (-q).exp() / 6.0;
        println!("{q:>5.1} {:>10.5} {:>10.5}", me.pdf(q), exact);
    }
    println!("P(sum <= 3) = {:.5}", me.cdf(3.0)?);

    let (fit, density) = maxent_theta_fit(&CumulantSet::new(0.3, 0.1, 0.5, 3.5))?;
    println!("theta fit: multipliers {:?} after {} iterations, mean {:.6}", fit.phi, fit.iterations, density.mean());
    Ok(())
}
