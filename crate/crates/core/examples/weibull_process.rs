//! Event-count probabilities for a renewal process with Weibull waiting
//! times, for fixed parameters and averaged over a posterior.

use betalike::dataset::ReliabilityData;
use betalike::maxent::{poisson_like_pmf, poisson_like_theta_distribution};
use betalike::posterior::{build_weibull, GridSpec};

fn main() -> betalike::Result<()> {
    println!("P(m events in tau = 1), rate 1:");
    for k in [1.0, 2.0, 3.0] {
        let pmf: Vec<String> =
            (0..5).map(|m| poisson_like_pmf(k, 1.0, 1.0, m).map(|p| format!("{p:.4}"))).collect::<Result<_, _>>()?;
        println!("  k = {k}: {}", pmf.join(" "));
    }

    let failures = vec![0.78, 1.36, 1.04, 1.35, 0.80, 0.60, 1.17, 1.15, 1.08, 1.12, 0.60, 0.43];
    let posterior = build_weibull(&ReliabilityData::new(failures, vec![], None)?, &GridSpec::default())?;
    let out = poisson_like_theta_distribution(&posterior, 0.5, 1, 12)?;
    println!(
        "posterior P(1 event in 0.5): pushforward mean {:.5}, MaxEnt mean {:.5}",
        out.pushforward.mean(),
        out.density.mean()
    );
    for w in &out.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
