//! Posterior densities of the probability of surviving a mission, under the
//! logistic, Exponential and Weibull models.

use betalike::betalike::{exponential_theta_density, logistic_theta_density, weibull_theta_density};
use betalike::dataset::{BinaryOutcomeData, ReliabilityData};
use betalike::posterior::{build_exponential, build_logistic, build_weibull, GridSpec};

fn main() -> betalike::Result<()> {
    // Two failures, one unit still running at t = 3, and a prior guess of 1.
    let data = ReliabilityData::new(vec![1.0, 2.0], vec![3.0], Some(1.0))?;
    let tau = 1.0;

    let exponential = exponential_theta_density(&build_exponential(&data)?, tau)?;
    println!("exponential: mean {:.6} (closed form (7/8)^3 = {:.6})", exponential.mean(), (7.0f64 / 8.0).powi(3));

    let weibull = weibull_theta_density(&build_weibull(&data, &GridSpec::default())?, tau)?;
    let c = weibull.cumulants()?;
    println!("weibull:     mean {:.6}, sd {:.6}, shape range {:?}", c.mu, c.sigma, weibull.marginal_support);

    // Pass/fail outcomes against a stress level; query the success
    // probability at stress 0.5.
    let trials = BinaryOutcomeData::new(vec![2.0, 1.5, 1.0, 0.8, 0.1], vec![1.2, 0.5, 0.2, -0.4, -1.0])?;
    let logistic = logistic_theta_density(&build_logistic(&trials, &GridSpec::default())?, 0.5)?;
    println!("logistic:    mean {:.6} at z = 0.5", logistic.mean());

    for w in &weibull.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
