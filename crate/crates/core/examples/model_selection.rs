//! Exponential versus Weibull model selection on simulated data.

use betalike::dataset::ReliabilityData;
use betalike::evidence::{model_posterior, PriorRange};

fn main() -> betalike::Result<()> {
    // Wear-out failures clustered around 1 suggest an increasing hazard.
    let wear_out = ReliabilityData::new(vec![0.78, 1.36, 1.04, 1.35, 0.80, 0.60, 1.17, 1.15, 1.08, 1.12], vec![], None)?;
    // Spread-out failures are well described by a constant hazard.
    let random = ReliabilityData::new(vec![0.1, 2.3, 0.7, 4.1, 1.2, 0.4], vec![3.0], None)?;
    let range = PriorRange::new(0.2, 5.0)?;
    for (name, data) in [("wear-out", &wear_out), ("random", &random)] {
        let report = model_posterior(data, &range, 0.5, 0.5)?;
        for m in &report.models {
            println!("{name:>9}: {:<12} log core {:>10.4}  posterior {:.4}", m.name, m.log_core, m.posterior);
        }
    }
    match PriorRange::new(0.0, f64::INFINITY) {
        Err(e) => println!("open shape range: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
