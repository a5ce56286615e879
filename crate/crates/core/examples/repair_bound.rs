//! Minimum repair bandwidth at one storage level, with the binding cut types.

use coop_regen::cutbound::{
    cut_diagnostics, gamma_star, msr_closed_form, non_coop_msr, rat, BoundParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (k, r, b, alpha) in [(2, 2, 4, 2), (4, 3, 84, 21)] {
        let p = BoundParams::new(k + r, k, k, r, rat(alpha), rat(b))?;
        let pt = gamma_star(&p)?;
        println!(
            "k = d = {k}, r = {r}, B = {b}, alpha = {alpha}: gamma* = {} at beta1 = {}, beta2 = {}",
            pt.gamma_star, pt.beta1, pt.beta2
        );
        println!(
            "  cooperative closed form {}, one-at-a-time {}",
            msr_closed_form(&p),
            non_coop_msr(&p)
        );
        for (t, v, binding) in cut_diagnostics(&p, &pt) {
            println!("  {t}: {v}{}", if binding { " (binding)" } else { "" });
        }
    }
    Ok(())
}
