//! Information flow graph of a two-node repair, its max flow and a structured cut.

use coop_regen::cutbound::{cut_value, enumerate_cut_types, rat, BoundParams};
use coop_regen::flowsim::{
    adversarial_history, best_structured_cut, build_graph, max_flow, RepairHistory, RepairStage,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = BoundParams::new(4, 2, 2, 2, rat(2), rat(4))?.with_betas(rat(1), rat(1))?;
    // nodes 2 and 4 fail and are rebuilt from nodes 1 and 3
    let history = RepairHistory::new(vec![RepairStage {
        regenerated: vec![2, 4],
        helpers: vec![vec![1, 3], vec![1, 3]],
    }]);
    let g = build_graph(&history, &[2, 4], &p)?;
    print!("{}", g.dump());
    println!("max flow = {}", max_flow(&g));

    let p = BoundParams::new(7, 4, 4, 3, rat(3), rat(12))?.with_betas(rat(1), rat(1))?;
    for t in enumerate_cut_types(4, 3, true) {
        let (h, dc) = adversarial_history(&t, &p)?;
        let g = build_graph(&h, &dc, &p)?;
        println!(
            "{t}: max flow {}, best structured cut {}, cut expression {}",
            max_flow(&g),
            best_structured_cut(&g),
            cut_value(&t, &p)
        );
    }
    Ok(())
}
