//! Exact arithmetic in GF(p^m).
//!
//! Elements are handled as plain `u64` symbols: the integer `sum c_i p^i`
//! for the polynomial `sum c_i x^i` reduced modulo the field's irreducible
//! polynomial. For `m = 1` that is simply the residue mod `p`. This encoding
//! doubles as the canonical enumeration order of the field (0, 1, 2, ...).
//!
//! [`Field`] carries the arithmetic. The reference path is schoolbook
//! polynomial multiplication with reduction; fields with `q <= 2^16` also get
//! log/antilog tables which must agree bit for bit with the reference path.
//! [`FieldElement`] pairs a symbol with its field for checked arithmetic.

mod poly;
mod prime;

use std::fmt;
use std::sync::Arc;

pub use prime::{is_prime, prime_power};

/// Largest field order that gets log/antilog tables.
pub const TABLE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GaloisError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order does not fit in 64 bits")]
    TooLarge,
    #[error("irreducible polynomial must have {expected} lower coefficients, got {got}")]
    IrreducibleLength { expected: usize, got: usize },
    #[error("irreducible coefficient {0} is not reduced mod p")]
    CoefficientRange(u64),
    #[error("polynomial is reducible over GF({0})")]
    Reducible(u64),
    #[error("no prime power >= {0} fits in 64 bits")]
    NoPrimePower(u64),
    #[error("field size must be at least 2, got {0}")]
    FieldTooSmall(u64),
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("symbol {value} is not an element of GF({q})")]
    NotAnElement { value: u64, q: u64 },
    #[error("byte group does not encode a field element")]
    InvalidEncoding,
    #[error("expected {expected} bytes for a symbol, got {got}")]
    EncodingWidth { expected: usize, got: usize },
}

/// The description of a finite field GF(p^m).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
    m: u32,
    /// Lower coefficients `c_0..c_{m-1}` of the monic modulus; empty for prime fields.
    irreducible: Vec<u64>,
}

impl FieldSpec {
    /// Validates `p` and the modulus. `irreducible` holds the `m` lower
    /// coefficients (ascending degree, leading 1 implied) and must be empty when `m = 1`.
    pub fn new(p: u64, m: u32, irreducible: Vec<u64>) -> Result<Self, GaloisError> {
        if !is_prime(p) {
            return Err(GaloisError::NotPrime(p));
        }
        if m == 0 {
            return Err(GaloisError::ZeroDegree);
        }
        p.checked_pow(m).ok_or(GaloisError::TooLarge)?;
        let expected = if m == 1 { 0 } else { m as usize };
        if irreducible.len() != expected {
            return Err(GaloisError::IrreducibleLength {
                expected,
                got: irreducible.len(),
            });
        }
        if let Some(&c) = irreducible.iter().find(|&&c| c >= p) {
            return Err(GaloisError::CoefficientRange(c));
        }
        if m > 1 && !poly::is_irreducible(&poly::monic(&irreducible), p) {
            return Err(GaloisError::Reducible(p));
        }
        Ok(FieldSpec { p, m, irreducible })
    }

    /// GF(p) for a prime `p`.
    pub fn prime(p: u64) -> Result<Self, GaloisError> {
        Self::new(p, 1, Vec::new())
    }

    /// GF(p^m) with the lexicographically smallest monic irreducible modulus.
    pub fn with_default_modulus(p: u64, m: u32) -> Result<Self, GaloisError> {
        if !is_prime(p) {
            return Err(GaloisError::NotPrime(p));
        }
        if m == 0 {
            return Err(GaloisError::ZeroDegree);
        }
        if m == 1 {
            return Self::prime(p);
        }
        let count = p.checked_pow(m).ok_or(GaloisError::TooLarge)?;
        let lower = (0..count)
            .map(|idx| digits(idx, p, m))
            // constant term 0 means x divides it
            .filter(|lower| lower[0] != 0)
            .find(|lower| poly::is_irreducible(&poly::monic(lower), p))
            .expect("an irreducible polynomial of every degree exists");
        Ok(FieldSpec {
            p,
            m,
            irreducible: lower,
        })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn irreducible(&self) -> &[u64] {
        &self.irreducible
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.m)
    }

    /// Bits per packed coefficient, `ceil(log2 p)`.
    pub fn coefficient_bits(&self) -> u32 {
        64 - (self.p - 1).leading_zeros()
    }

    /// Serialized width of one element in bytes.
    pub fn symbol_width(&self) -> usize {
        (self.m * self.coefficient_bits()).div_ceil(8) as usize
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{})", self.p, self.m)
        }
    }
}

/// Smallest prime power `q >= n`, with the default modulus when `q` is not prime.
pub fn smallest_prime_power_geq(n: u64) -> Result<FieldSpec, GaloisError> {
    if n < 2 {
        return Err(GaloisError::FieldTooSmall(n));
    }
    let mut q = n;
    loop {
        if let Some((p, m)) = prime_power(q) {
            return FieldSpec::with_default_modulus(p, m);
        }
        q = q.checked_add(1).ok_or(GaloisError::NoPrimePower(n))?;
    }
}

fn digits(mut v: u64, p: u64, m: u32) -> Vec<u64> {
    (0..m)
        .map(|_| {
            let d = v % p;
            v /= p;
            d
        })
        .collect()
}

fn undigits(ds: &[u64], p: u64) -> u64 {
    ds.iter().rev().fold(0u64, |acc, &d| acc * p + d)
}

#[derive(Debug)]
struct Tables {
    log: Vec<u32>,
    exp: Vec<u64>,
}

#[derive(Debug)]
struct Inner {
    spec: FieldSpec,
    q: u64,
    modulus: Vec<u64>,
    tables: Option<Tables>,
}

/// Arithmetic context for one field. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

impl Field {
    /// Builds the field, with lookup tables when `q <= 2^16`.
    pub fn new(spec: FieldSpec) -> Self {
        let mut field = Self::reference(spec);
        if field.order() <= TABLE_LIMIT {
            let tables = field.build_tables();
            Arc::get_mut(&mut field.0).expect("fresh field").tables = Some(tables);
        }
        field
    }

    /// Builds the field with the table-free reference path only.
    pub fn reference(spec: FieldSpec) -> Self {
        let q = spec.order();
        let modulus = poly::monic(&spec.irreducible);
        Field(Arc::new(Inner {
            spec,
            q,
            modulus,
            tables: None,
        }))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn order(&self) -> u64 {
        self.0.q
    }

    pub fn has_tables(&self) -> bool {
        self.0.tables.is_some()
    }

    pub fn symbol_width(&self) -> usize {
        self.0.spec.symbol_width()
    }

    pub fn contains(&self, a: u64) -> bool {
        a < self.0.q
    }

    pub fn check(&self, a: u64) -> Result<u64, GaloisError> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(GaloisError::NotAnElement {
                value: a,
                q: self.0.q,
            })
        }
    }

    /// Wraps a symbol with this field for checked arithmetic.
    pub fn element(&self, a: u64) -> Result<FieldElement, GaloisError> {
        Ok(FieldElement {
            field: self.clone(),
            value: self.check(a)?,
        })
    }

    /// The first `count` elements in canonical order.
    pub fn first_elements(&self, count: usize) -> Vec<u64> {
        (0..self.0.q).take(count).collect()
    }

    fn p(&self) -> u64 {
        self.0.spec.p
    }

    fn m(&self) -> u32 {
        self.0.spec.m
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(self.contains(a) && self.contains(b));
        let p = self.p();
        if self.m() == 1 {
            return ((a as u128 + b as u128) % p as u128) as u64;
        }
        if p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u64;
        let mut place = 1u64;
        for i in 0..self.m() {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            if i + 1 < self.m() {
                place *= p;
            }
        }
        out
    }

    pub fn neg(&self, a: u64) -> u64 {
        debug_assert!(self.contains(a));
        let p = self.p();
        if self.m() == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        if p == 2 {
            return a;
        }
        let ds: Vec<u64> = digits(a, p, self.m())
            .into_iter()
            .map(|d| (p - d) % p)
            .collect();
        undigits(&ds, p)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(self.contains(a) && self.contains(b));
        if let Some(t) = &self.0.tables {
            if a == 0 || b == 0 {
                return 0;
            }
            return t.exp[(t.log[a as usize] + t.log[b as usize]) as usize];
        }
        self.mul_reference(a, b)
    }

    /// Schoolbook multiplication with polynomial reduction; never uses tables.
    pub fn mul_reference(&self, a: u64, b: u64) -> u64 {
        let p = self.p();
        if self.m() == 1 {
            return ((a as u128 * b as u128) % p as u128) as u64;
        }
        let m = self.m();
        if p == 2 {
            return self.mul_binary(a, b);
        }
        let prod = poly::mul(&digits(a, p, m), &digits(b, p, m), p);
        let mut r = if prod.len() > m as usize {
            poly::rem(&prod, &self.0.modulus, p)
        } else {
            prod
        };
        r.resize(m as usize, 0);
        undigits(&r, p)
    }

    /// Shift-and-add over GF(2)[x] with reduction by the modulus.
    fn mul_binary(&self, a: u64, b: u64) -> u64 {
        let m = self.m();
        let modulus = self
            .0
            .modulus
            .iter()
            .rev()
            .fold(0u128, |acc, &c| (acc << 1) | c as u128);
        let mut prod = 0u128;
        for i in 0..m {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u128) << i;
            }
        }
        for deg in (m..2 * m).rev() {
            if (prod >> deg) & 1 == 1 {
                prod ^= modulus << (deg - m);
            }
        }
        prod as u64
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64, GaloisError> {
        if a == 0 {
            return Err(GaloisError::ZeroInverse);
        }
        if let Some(t) = &self.0.tables {
            let order = self.0.q - 1;
            let l = t.log[a as usize] as u64;
            return Ok(t.exp[((order - l) % order) as usize]);
        }
        Ok(self.pow(a, self.0.q - 2))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64, GaloisError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Inner product of two equal-length symbol slices.
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    fn build_tables(&self) -> Tables {
        let q = self.0.q;
        let order = q - 1;
        let factors = prime::prime_factors(order);
        let generator = (1..q)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&f| self.pow_reference(g, order / f) != 1)
            })
            .expect("multiplicative group is cyclic");
        let mut log = vec![0u32; q as usize];
        let mut exp = vec![0u64; 2 * order as usize];
        let mut x = 1u64;
        for i in 0..order {
            exp[i as usize] = x;
            exp[(i + order) as usize] = x;
            log[x as usize] = i as u32;
            x = self.mul_reference(x, generator);
        }
        Tables { log, exp }
    }

    fn pow_reference(&self, a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_reference(acc, base);
            }
            base = self.mul_reference(base, base);
            e >>= 1;
        }
        acc
    }

    /// Writes `a` as big-endian packed coefficients, highest degree first.
    pub fn write_symbol(&self, a: u64, out: &mut Vec<u8>) {
        let bits = self.0.spec.coefficient_bits();
        let packed = digits(a, self.p(), self.m())
            .iter()
            .rev()
            .fold(0u128, |acc, &d| (acc << bits) | d as u128);
        let width = self.symbol_width();
        out.extend_from_slice(&packed.to_be_bytes()[16 - width..]);
    }

    pub fn read_symbol(&self, bytes: &[u8]) -> Result<u64, GaloisError> {
        let width = self.symbol_width();
        if bytes.len() != width {
            return Err(GaloisError::EncodingWidth {
                expected: width,
                got: bytes.len(),
            });
        }
        let packed = bytes.iter().fold(0u128, |acc, &b| (acc << 8) | b as u128);
        let bits = self.0.spec.coefficient_bits();
        let m = self.m();
        if (m * bits) < 128 && packed >> (m * bits) != 0 {
            return Err(GaloisError::InvalidEncoding);
        }
        let mask = (1u128 << bits) - 1;
        let p = self.p();
        let mut ds = Vec::with_capacity(m as usize);
        for i in 0..m {
            let d = ((packed >> (i * bits)) & mask) as u64;
            if d >= p {
                return Err(GaloisError::InvalidEncoding);
            }
            ds.push(d);
        }
        Ok(undigits(&ds, p))
    }
}

impl From<FieldSpec> for Field {
    fn from(spec: FieldSpec) -> Self {
        Field::new(spec)
    }
}

/// A symbol tied to its field; arithmetic checks that both operands share a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same(&self, other: &Self) -> Result<(), GaloisError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(GaloisError::MixedFields)
        }
    }

    fn wrap(&self, value: u64) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            value,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, GaloisError> {
        self.same(other)?;
        Ok(self.wrap(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GaloisError> {
        self.same(other)?;
        Ok(self.wrap(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GaloisError> {
        self.same(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, GaloisError> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.field.pow(self.value, e))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
