//! Reading and writing the three CSV data formats.

use betalike::dataset::{BinaryOutcomeData, CountData, ReliabilityData};

fn main() -> betalike::Result<()> {
    let reliability = ReliabilityData::from_reader("kind,time\n# bench test\nfailure,1.0\nfailure,2.0\nsurvival,3.0\nprior_guess,1.0\n".as_bytes())?;
    println!("r = {}, n = {}, exposure = {}", reliability.r(), reliability.n(), reliability.exposure());
    print!("{}", reliability.to_csv());

    let outcomes = BinaryOutcomeData::from_reader("outcome,predictor\nsuccess,0.1\nfailure,0.2\n".as_bytes())?;
    println!("successes {:?}, failures {:?}", outcomes.success_predictors, outcomes.failure_predictors);

    let counts = CountData::from_reader("count,predictor\n3,0.5\n1,-0.5\n".as_bytes(), 1.0, None)?;
    println!("{} events over {} windows", counts.total_events(), counts.counts.len());

    match ReliabilityData::from_reader("kind,time\nfailure,1.0\nfailure,-1.0\n".as_bytes()) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
