#![allow(dead_code)]

use coop_regen::galois::{Field, FieldSpec};
use coop_regen::mscr::{decode_payload, encode, stripe, CodeParams, NodeShare, SymbolMapping};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prime powers up to `limit`, from a sieve.
pub fn prime_powers_upto(limit: u64) -> Vec<(u64, u32)> {
    let mut composite = vec![false; limit as usize + 1];
    let mut out = Vec::new();
    for p in 2..=limit {
        if composite[p as usize] {
            continue;
        }
        for mult in (p * p..=limit).step_by(p as usize) {
            composite[mult as usize] = true;
        }
        let (mut q, mut m) = (p, 1);
        while q <= limit {
            out.push((p, m));
            q *= p;
            m += 1;
        }
    }
    out.sort_by_key(|&(p, m)| p.pow(m));
    out
}

fn digits(mut a: u64, p: u64, m: u32) -> Vec<u64> {
    (0..m)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

/// Schoolbook product of coefficient vectors reduced by the monic modulus.
pub fn naive_mul(spec: &FieldSpec, a: u64, b: u64) -> u64 {
    let (p, m) = (spec.characteristic(), spec.degree());
    if m == 1 {
        return a * b % p;
    }
    let (da, db) = (digits(a, p, m), digits(b, p, m));
    let mut prod = vec![0u64; 2 * m as usize];
    for (i, x) in da.iter().enumerate() {
        for (j, y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    let low = spec.irreducible();
    for top in (m as usize..prod.len()).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        // x^m = -sum low_i x^i
        prod[top] = 0;
        for (i, &l) in low.iter().enumerate() {
            let idx = top - m as usize + i;
            prod[idx] = (prod[idx] + p - c * l % p) % p;
        }
    }
    prod[..m as usize]
        .iter()
        .rev()
        .fold(0, |acc, &d| acc * p + d)
}

/// Exhaustive axiom check; returns the first violation.
pub fn check_field_axioms(f: &Field) -> Result<(), String> {
    let q = f.order();
    for a in 0..q {
        if f.add(a, 0) != a || f.mul(a, 1) != a {
            return Err(format!("identity fails at {a}"));
        }
        if f.add(a, f.neg(a)) != 0 {
            return Err(format!("additive inverse fails at {a}"));
        }
        if a != 0 {
            let inv = f.inv(a).map_err(|e| e.to_string())?;
            if f.mul(a, inv) != 1 {
                return Err(format!("inverse fails at {a}"));
            }
            if f.pow(a, q - 1) != 1 {
                return Err(format!("a^(q-1) != 1 at {a}"));
            }
        }
        for b in 0..q {
            if f.add(a, b) != f.add(b, a) || f.mul(a, b) != f.mul(b, a) {
                return Err(format!("commutativity fails at ({a},{b})"));
            }
            if f.mul(a, b) != naive_mul(f.spec(), a, b) {
                return Err(format!("product disagrees with schoolbook at ({a},{b})"));
            }
            for c in 0..q {
                if f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c))
                    || f.add(f.add(a, b), c) != f.add(a, f.add(b, c))
                {
                    return Err(format!("associativity fails at ({a},{b},{c})"));
                }
                if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
                    return Err(format!("distributivity fails at ({a},{b},{c})"));
                }
            }
        }
    }
    Ok(())
}

pub fn gf5_params() -> CodeParams {
    CodeParams::with_field(4, 2, 2, Field::new(FieldSpec::prime(5).unwrap())).unwrap()
}

pub fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}

/// Payload whose symbols are valid under strict mapping for `params`.
pub fn random_payload(params: &CodeParams, symbols: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = params.field();
    let mut out = Vec::new();
    for _ in 0..symbols {
        f.write_symbol(rng.gen_range(0..f.order()), &mut out);
    }
    out
}

pub fn encode_payload(params: &CodeParams, payload: &[u8]) -> Vec<NodeShare> {
    let file = stripe(payload, params, SymbolMapping::Strict).unwrap();
    encode(&file, params).unwrap()
}

/// Decodes from every k-subset; returns the number checked or the first failing subset.
pub fn check_all_subsets(
    params: &CodeParams,
    shares: &[NodeShare],
    payload: &[u8],
) -> Result<usize, Vec<usize>> {
    let mut count = 0;
    for subset in shares.iter().cloned().combinations(params.k()) {
        let ok = decode_payload(&subset, params).is_ok_and(|b| b == payload);
        if !ok {
            return Err(subset.iter().map(NodeShare::node_index).collect());
        }
        count += 1;
    }
    Ok(count)
}

/// (n, k, r) with n <= 8, k in {2,3,4}, r in {2,3}, k <= n - r.
pub fn small_code_grid() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for k in 2..=4 {
        for r in 2..=3 {
            for n in k + r..=8 {
                out.push((n, k, r));
            }
        }
    }
    out
}
