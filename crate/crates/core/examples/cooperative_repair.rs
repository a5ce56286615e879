//! Repair three nodes of a (7, 4) code together and print what each one received.

use coop_regen::coop_repair::{cooperative_repair, plan_repair, HelperPolicy, Phase};
use coop_regen::mscr::{encode, stripe, CodeParams, FieldMode, SymbolMapping};
use std::collections::BTreeMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = CodeParams::new(7, 4, 3, FieldMode::Gf256)?;
    let payload: Vec<u8> = (0..84u32).map(|i| (i * 37 % 251) as u8).collect();
    let shares = encode(&stripe(&payload, &params, SymbolMapping::Strict)?, &params)?;

    let failed = [2, 5, 7];
    let alive: BTreeMap<usize, _> = shares
        .iter()
        .filter(|s| !failed.contains(&s.node_index()))
        .map(|s| (s.node_index(), s.clone()))
        .collect();
    let alive_nodes: Vec<usize> = alive.keys().copied().collect();
    let plan = plan_repair(&alive_nodes, &failed, &params, HelperPolicy::LowestIndex)?;
    let outcome = cooperative_repair(&params, &alive, &plan)?;

    for (i, share) in outcome.shares.iter().enumerate() {
        let node = share.node_index();
        println!(
            "node {node}: rows {:?} from helpers {:?}, {} downloaded + {} exchanged, exact = {}",
            plan.rows(i),
            plan.helpers(i),
            outcome.ledger.received_by(node, Some(Phase::Download)),
            outcome.ledger.received_by(node, Some(Phase::Exchange)),
            *share == shares[node - 1]
        );
    }
    let transcript = outcome.ledger.transcript(&params);
    println!("first transcript lines:");
    for line in transcript.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
