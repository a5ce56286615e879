//! Primality and prime-power detection for 64-bit integers.

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest `x` with `x^e <= n`.
fn integer_root(n: u64, e: u32) -> u64 {
    if e == 1 {
        return n;
    }
    let mut x = (n as f64).powf(1.0 / e as f64) as u64;
    // float estimate may be off by one in either direction
    while x > 0 && x.checked_pow(e).is_none_or(|v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_pow(e).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

/// Returns `(p, m)` with `q = p^m`, `p` prime, or `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    for m in (1..=63u32).rev() {
        let p = integer_root(q, m);
        if p >= 2 && p.checked_pow(m) == Some(q) && is_prime(p) {
            return Some((p, m));
        }
    }
    None
}

/// Distinct prime factors by trial division; only used on `q - 1` for small tables.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
