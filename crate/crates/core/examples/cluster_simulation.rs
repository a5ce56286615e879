//! Three repair strategies on a seven-node cluster over a few epochs.

use coop_regen::cluster_sim::{run_scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::parse(
        "n=7\nk=4\nr=3\nB_symbols=84\nfield=auto\nseed=2024\nepochs=3\nstrategy=individual,sequential,cooperative\n",
    )?;
    let report = run_scenario(&scenario)?;
    for epoch in &report.epochs {
        println!("epoch {}: failed {:?}", epoch.epoch, epoch.failed);
        for (s, v) in epoch.strategies.iter().zip(&epoch.verify) {
            println!(
                "  {:<24} {:>6} per newcomer ({}), checks {}",
                s.strategy.tag(),
                s.per_newcomer().to_string(),
                s.per_newcomer_decimal,
                if v.passed() { "pass" } else { "FAIL" }
            );
        }
    }
    print!("{}", report.to_csv());
    Ok(())
}
