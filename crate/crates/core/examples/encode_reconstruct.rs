//! Stripe a payload, write share files and decode from every pair of nodes.

use coop_regen::galois::{Field, FieldSpec};
use coop_regen::mscr::{
    decode_payload, encode, read_share, stripe, write_share, CodeParams, SymbolMapping,
};
use itertools::Itertools;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // n = 4 nodes, k = 2, r = 2 over GF(5): each node stores two symbols per stripe
    let params = CodeParams::with_field(4, 2, 2, Field::new(FieldSpec::prime(5)?))?;
    let payload = [1u8, 2, 3, 4, 0, 4, 3, 2];
    let file = stripe(&payload, &params, SymbolMapping::Strict)?;
    let shares = encode(&file, &params)?;
    for s in &shares {
        println!("node {}: {:?}", s.node_index(), s.symbols());
    }

    let files: Vec<Vec<u8>> = shares
        .iter()
        .map(|s| write_share(&params, s))
        .collect::<Result<_, _>>()?;
    println!("share file size: {} bytes", files[0].len());
    let parsed: Vec<_> = files
        .iter()
        .map(|b| read_share(b).map(|(_, s)| s))
        .collect::<Result<_, _>>()?;

    for pair in parsed.iter().cloned().combinations(2) {
        let nodes: Vec<usize> = pair.iter().map(|s| s.node_index()).collect();
        let ok = decode_payload(&pair, &params)? == payload;
        println!(
            "nodes {nodes:?}: {}",
            if ok { "recovered" } else { "MISMATCH" }
        );
    }
    Ok(())
}
