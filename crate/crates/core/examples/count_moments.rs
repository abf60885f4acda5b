//! Moments and cumulants of event probabilities under Poisson count models.

use betalike::cumulants::{
    cumulative_poisson_theta_moments, moments_to_cumulants, poisson_regression_theta_moments, poisson_theta_moments,
};
use betalike::dataset::CountData;
use betalike::posterior::{build_poisson, build_poisson_regression, GridSpec};

fn main() -> betalike::Result<()> {
    // Seven events in five unit windows, with a prior guess of two time units
    // per event.
    let counts = CountData::new(vec![2, 0, 3, 1, 1], None, 1.0, Some(5.0), Some(2.0))?;
    let posterior = build_poisson(&counts)?;
    let tau = 1.0;
    for m in 0..3 {
        let exact = moments_to_cumulants(&poisson_theta_moments(&posterior, tau, m)?)?;
        let more = moments_to_cumulants(&cumulative_poisson_theta_moments(&posterior, tau, m)?)?;
        println!(
            "m = {m}: P(exactly m) mean {:.5} sd {:.5} | P(more than m) mean {:.5} sd {:.5}",
            exact.mu, exact.sigma, more.mu, more.sigma
        );
    }

    // Counts that grow with a covariate.
    let trend = CountData::new(vec![0, 1, 1, 2, 4, 3], Some(vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5]), 1.0, None, None)?;
    let reg = build_poisson_regression(&trend, &GridSpec::with_points(101))?;
    for z in [0.0, 1.0, 2.0] {
        let est = poisson_regression_theta_moments(&reg, z, tau, 2)?;
        println!("z = {z}: P(2 events) mean {:.5}", est.moments.m1);
    }
    Ok(())
}
