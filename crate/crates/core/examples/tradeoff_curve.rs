//! Storage versus repair-bandwidth curve as CSV, from alpha = B/k upward.

use coop_regen::cutbound::{curve_csv, rat, ratio, tradeoff_curve, BoundParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = BoundParams::new(7, 4, 4, 3, rat(21), rat(84))?;
    let alphas: Vec<_> = (0..=12).map(|i| rat(21) + ratio(i * 7, 4)).collect();
    let points: Vec<_> = tradeoff_curve(&p, &alphas)
        .into_iter()
        .collect::<Result<_, _>>()?;
    print!("{}", curve_csv(&points));
    Ok(())
}
