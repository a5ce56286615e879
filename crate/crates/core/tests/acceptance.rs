//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

mod common;

use common::{
    check_all_subsets, check_field_axioms, encode_payload, prime_powers_upto, random_payload,
};
use coop_regen::cluster_sim::{run_strategy, verify_cluster, ClusterState, Failures, Strategy};
use coop_regen::coop_repair::{cooperative_repair, plan_repair, HelperPolicy};
use coop_regen::cutbound::{
    cut_value, cut_value_by_subsets, enumerate_cut_types, gamma_star, msr_closed_form, rat, ratio,
    BoundParams, Rational,
};
use coop_regen::flowsim::{adversarial_history, build_graph, max_flow};
use coop_regen::galois::{Field, FieldSpec};
use coop_regen::mscr::{decode_payload, read_share, write_share, CodeParams, FieldMode, NodeShare};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_bound() -> Check {
    let p = BoundParams::new(4, 2, 2, 2, rat(2), rat(4)).map_err(|e| e.to_string())?;
    let pt = gamma_star(&p).map_err(|e| e.to_string())?;
    ensure(pt.gamma_star == rat(3), || {
        format!("gamma* = {}", pt.gamma_star)
    })?;
    ensure(pt.beta1 == rat(1) && pt.beta2 == rat(1), || {
        format!("beta = ({}, {})", pt.beta1, pt.beta2)
    })?;
    Ok("gamma* = 3 at beta1 = 1, beta2 = 1".into())
}

fn seven_node_bound() -> Check {
    let p = BoundParams::new(7, 4, 4, 3, rat(21), rat(84)).map_err(|e| e.to_string())?;
    let pt = gamma_star(&p).map_err(|e| e.to_string())?;
    ensure(pt.gamma_star == rat(42), || {
        format!("gamma* = {}", pt.gamma_star)
    })?;
    ensure(msr_closed_form(&p) == rat(42), || {
        format!("closed form {}", msr_closed_form(&p))
    })?;
    Ok("gamma* = 42 = closed form".into())
}

fn three_way_comparison() -> Check {
    let params = CodeParams::new(7, 4, 3, FieldMode::Auto).map_err(|e| e.to_string())?;
    let mut state = ClusterState::random(params, 84, 2024).map_err(|e| e.to_string())?;
    state
        .inject_failures(&Failures::Count(3))
        .map_err(|e| e.to_string())?;
    ensure(state.stripe_count() == 7, || {
        format!("{} stripes", state.stripe_count())
    })?;
    let mut seen = Vec::new();
    for (strategy, expect) in [
        (Strategy::Individual, rat(84)),
        (Strategy::SequentialWithHelpers, ratio(154, 3)),
        (Strategy::Cooperative, rat(42)),
    ] {
        let (after, report) = run_strategy(&state, strategy).map_err(|e| e.to_string())?;
        let value = report.per_newcomer().clone();
        ensure(value == expect, || {
            format!("{strategy}: {value} != {expect}")
        })?;
        match strategy {
            Strategy::SequentialWithHelpers => {
                ensure(report.per_newcomer_measured.is_none(), || {
                    "sequential should be accounting only".into()
                })?
            }
            _ => {
                for nc in &report.newcomers {
                    ensure(
                        nc.total_symbols.map(|s| rat(s as i64)) == Some(expect.clone()),
                        || {
                            format!(
                                "{strategy}: newcomer {} measured {:?}",
                                nc.node, nc.total_symbols
                            )
                        },
                    )?;
                }
                if strategy == Strategy::Cooperative {
                    for nc in &report.newcomers {
                        ensure(
                            nc.phase1_symbols == Some(7 * 4) && nc.phase2_symbols == Some(7 * 2),
                            || {
                                format!(
                                    "newcomer {} phases {:?}/{:?}",
                                    nc.node, nc.phase1_symbols, nc.phase2_symbols
                                )
                            },
                        )?;
                    }
                }
                ensure(verify_cluster(&after).passed(), || {
                    format!("{strategy}: cluster check failed")
                })?;
            }
        }
        seen.push(format!(
            "{}={}",
            strategy.tag(),
            report.per_newcomer_decimal
        ));
    }
    Ok(seen.join(", "))
}

fn bandwidth_grid() -> Check {
    let mut cases = 0;
    for k in 2..=5usize {
        for r in 1..=4usize {
            let (ki, ri) = (k as i64, r as i64);
            let p = BoundParams::new(k + r, k, k, r, rat(ri), rat(ki * ri))
                .map_err(|e| e.to_string())?;
            let g = gamma_star(&p).map_err(|e| e.to_string())?.gamma_star;
            ensure(g == rat(ki + ri - 1), || {
                format!("k={k} r={r}: gamma* = {g}")
            })?;

            let stripes = 3;
            let params =
                CodeParams::new(k + r, k, r, FieldMode::Auto).map_err(|e| e.to_string())?;
            let payload = random_payload(&params, stripes * k * r, (k * 10 + r) as u64);
            let shares = encode_payload(&params, &payload);
            let failed: Vec<usize> = (1..=r).collect();
            let alive: BTreeMap<usize, NodeShare> = shares[r..]
                .iter()
                .map(|s| (s.node_index(), s.clone()))
                .collect();
            let nodes: Vec<usize> = alive.keys().copied().collect();
            let plan = plan_repair(&nodes, &failed, &params, HelperPolicy::LowestIndex)
                .map_err(|e| e.to_string())?;
            let out = cooperative_repair(&params, &alive, &plan).map_err(|e| e.to_string())?;
            for &node in &failed {
                let per_stripe = ratio(out.ledger.received_by(node, None) as i64, stripes as i64);
                ensure(per_stripe == g, || {
                    format!("k={k} r={r}: node {node} measured {per_stripe} per stripe")
                })?;
            }
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} (k, r) pairs, bound and measurement both k+r-1"
    ))
}

fn exact_repair_exhaustive() -> Check {
    let (mut sets, mut subsets) = (0, 0);
    for (n, k, r) in common::small_code_grid() {
        let params = CodeParams::new(n, k, r, FieldMode::Auto).map_err(|e| e.to_string())?;
        let payload = random_payload(&params, 2 * k * r, (n * 100 + k * 10 + r) as u64);
        let shares = encode_payload(&params, &payload);
        let files: Vec<Vec<u8>> = shares
            .iter()
            .map(|s| write_share(&params, s))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for failed in (1..=n).combinations(r) {
            let alive: BTreeMap<usize, NodeShare> = shares
                .iter()
                .filter(|s| !failed.contains(&s.node_index()))
                .map(|s| (s.node_index(), s.clone()))
                .collect();
            let nodes: Vec<usize> = alive.keys().copied().collect();
            let plan = plan_repair(&nodes, &failed, &params, HelperPolicy::LowestIndex)
                .map_err(|e| e.to_string())?;
            let out = cooperative_repair(&params, &alive, &plan).map_err(|e| e.to_string())?;
            let mut cluster = alive.clone();
            for share in out.shares {
                let bytes = write_share(&params, &share).map_err(|e| e.to_string())?;
                let node = share.node_index();
                ensure(bytes == files[node - 1], || {
                    format!("({n},{k},{r}) {failed:?}: node {node} file differs")
                })?;
                cluster.insert(node, share);
            }
            let all: Vec<NodeShare> = cluster.into_values().collect();
            subsets += check_all_subsets(&params, &all, &payload)
                .map_err(|s| format!("({n},{k},{r}) after {failed:?}: subset {s:?} fails"))?;
            sets += 1;
        }
    }
    Ok(format!(
        "{sets} failure sets, {subsets} post-repair subsets"
    ))
}

fn random_rational(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    ratio(rng.gen_range(0..=max * 4), rng.gen_range(1..=4))
}

fn max_flow_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut graphs, mut tight) = (0, 0);
    for k in 1..=4usize {
        for r in 1..=3usize {
            for _ in 0..20 {
                let (alpha, b1, b2) = (
                    random_rational(&mut rng, 8),
                    random_rational(&mut rng, 4),
                    random_rational(&mut rng, 4),
                );
                let p = BoundParams::new(k + r, k, k, r, alpha, rat(1))
                    .and_then(|p| p.with_betas(b1, b2))
                    .map_err(|e| e.to_string())?;
                for t in enumerate_cut_types(k, r, false) {
                    let (h, dc) = adversarial_history(&t, &p).map_err(|e| e.to_string())?;
                    let g = build_graph(&h, &dc, &p).map_err(|e| e.to_string())?;
                    let flow = max_flow(&g);
                    let bound = cut_value(&t, &p);
                    ensure(flow <= bound, || {
                        format!("k={k} r={r} {t}: flow {flow} > {bound}")
                    })?;
                    tight += usize::from(flow == bound);
                    graphs += 1;
                }
            }
            let p = BoundParams::new(k + r, k, k, r, rat(r as i64), rat((k * r) as i64))
                .and_then(|p| p.with_betas(rat(1), rat(1)))
                .map_err(|e| e.to_string())?;
            for t in enumerate_cut_types(k, r, false) {
                let (h, dc) = adversarial_history(&t, &p).map_err(|e| e.to_string())?;
                let flow = max_flow(&build_graph(&h, &dc, &p).map_err(|e| e.to_string())?);
                ensure(flow >= rat((k * r) as i64), || {
                    format!("k={k} r={r} {t}: flow {flow} < kr")
                })?;
            }
        }
    }
    Ok(format!("{graphs} graphs, flow = cut expression on {tight}"))
}

fn linearization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let k = rng.gen_range(1..=6);
        let r = rng.gen_range(1..=4);
        let d = k + rng.gen_range(0..=2);
        let tuples = enumerate_cut_types(k, r, false);
        let t = &tuples[rng.gen_range(0..tuples.len())];
        let p = BoundParams::new(d + r, k, d, r, random_rational(&mut rng, 10), rat(1))
            .and_then(|p| p.with_betas(random_rational(&mut rng, 5), random_rational(&mut rng, 5)))
            .map_err(|e| e.to_string())?;
        let (a, b) = (cut_value_by_subsets(t, &p), cut_value(t, &p));
        ensure(a == b, || format!("case {case} {t}: {a} != {b}"))?;
    }
    Ok("1000 cases equal".into())
}

fn field_and_codec() -> Check {
    let fields = prime_powers_upto(64);
    for &(p, m) in &fields {
        let f = Field::new(FieldSpec::with_default_modulus(p, m).map_err(|e| e.to_string())?);
        check_field_axioms(&f).map_err(|e| format!("GF({p}^{m}): {e}"))?;
    }
    let mut subsets = 0;
    let mut files = 0;
    for n in 2..=8usize {
        for r in 1..n {
            for k in 1..=n - r {
                let params =
                    CodeParams::new(n, k, r, FieldMode::Auto).map_err(|e| e.to_string())?;
                let payload = random_payload(&params, 2 * k * r + 1, (n * 64 + k * 8 + r) as u64);
                let shares = encode_payload(&params, &payload);
                subsets += check_all_subsets(&params, &shares, &payload)
                    .map_err(|s| format!("({n},{k},{r}) subset {s:?}"))?;
                for share in &shares {
                    let bytes = write_share(&params, share).map_err(|e| e.to_string())?;
                    let (pp, back) = read_share(&bytes).map_err(|e| e.to_string())?;
                    ensure(pp == params && &back == share, || {
                        format!("({n},{k},{r}) round trip")
                    })?;
                    let mut bad = bytes.clone();
                    let last = bad.len() - 5;
                    bad[last] ^= 0x01;
                    ensure(read_share(&bad).is_err(), || {
                        format!("({n},{k},{r}) corruption accepted")
                    })?;
                    files += 1;
                }
                let sample: Vec<NodeShare> = shares.iter().rev().take(k).cloned().collect();
                ensure(
                    decode_payload(&sample, &params).map_err(|e| e.to_string())? == payload,
                    || "decode".into(),
                )?;
            }
        }
    }
    Ok(format!(
        "{} fields, {subsets} subsets, {files} share files",
        fields.len()
    ))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 8] = [
        ("small example bound", 1, small_bound),
        ("seven-node minimum-storage bound", 1, seven_node_bound),
        ("three-way repair comparison", 5, three_way_comparison),
        ("k+r-1 grid", 10, bandwidth_grid),
        ("exhaustive exact repair", 60, exact_repair_exhaustive),
        ("max-flow oracle", 60, max_flow_oracle),
        ("linearization", 10, linearization),
        ("field and codec suite", 60, field_and_codec),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (status, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {limit}s limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {}: {status} {name} ({:.2?}, limit {limit}s): {detail}",
            i + 1,
            elapsed
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
