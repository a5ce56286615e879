//! Dense polynomials over the prime field GF(p), coefficients in ascending degree order.
//!
//! Only what field construction needs: remainders, gcd, modular powers and the
//! two irreducibility tests.

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn mulp(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_p(a: u64, p: u64) -> u64 {
    // Fermat; p is prime
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulp(acc, base, p);
        }
        base = mulp(base, base, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    trim(out)
}

/// Remainder of `a` modulo a nonzero `b`.
pub(crate) fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = inv_p(b[db], p);
    let mut r = trim(a.to_vec());
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let factor = mulp(r[dr], lead_inv, p);
        let shift = dr - db;
        for (i, &c) in b.iter().enumerate().take(db + 1) {
            let t = mulp(factor, c, p);
            r[shift + i] = (r[shift + i] + p - t) % p;
        }
        r = trim(r);
    }
    r
}

pub(crate) fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// `base^(p^times)` modulo `f`, by repeated p-th powering.
fn frobenius(base: &[u64], times: u32, f: &[u64], p: u64) -> Vec<u64> {
    let mut cur = rem(base, f, p);
    for _ in 0..times {
        cur = powmod(&cur, p, f, p);
    }
    cur
}

pub(crate) fn powmod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), f, p);
        }
        b = rem(&mul(&b, &b, p), f, p);
        e >>= 1;
    }
    acc
}

/// Builds the monic polynomial `x^m + sum lower[i] x^i`.
pub(crate) fn monic(lower: &[u64]) -> Vec<u64> {
    let mut f = lower.to_vec();
    f.push(1);
    f
}

/// Ben-Or: `f` of degree m is irreducible iff gcd(x^(p^i) - x, f) = 1 for i in 1..=m/2.
pub(crate) fn is_irreducible_ben_or(f: &[u64], p: u64) -> bool {
    let m = match degree(f) {
        Some(m) if m >= 1 => m,
        _ => return false,
    };
    let x = vec![0u64, 1];
    let mut xp = rem(&x, f, p);
    for _ in 1..=m / 2 {
        xp = frobenius(&xp, 1, f, p);
        let g = gcd(&sub(&xp, &x, p), f, p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Exhaustive trial division by every monic polynomial of degree 1..=m/2.
pub(crate) fn is_irreducible_trial(f: &[u64], p: u64) -> bool {
    let m = match degree(f) {
        Some(m) if m >= 1 => m,
        _ => return false,
    };
    for deg in 1..=m / 2 {
        let count = (p as u128).pow(deg as u32);
        for idx in 0..count {
            let mut lower = Vec::with_capacity(deg);
            let mut v = idx;
            for _ in 0..deg {
                lower.push((v % p as u128) as u64);
                v /= p as u128;
            }
            if rem(f, &monic(&lower), p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Trial division while the divisor space is small, Ben-Or beyond that.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = degree(f).unwrap_or(0);
    let half = (m / 2) as u32;
    let small = (p as u128).checked_pow(half).is_some_and(|c| c <= 1 << 14);
    if small {
        is_irreducible_trial(f, p)
    } else {
        is_irreducible_ben_or(f, p)
    }
}
