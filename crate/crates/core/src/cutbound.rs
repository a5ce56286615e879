//! Cut-capacity bound for cooperative repair and the repair-bandwidth LP.
//!
//! For a cut type `(l_1, ..., l_k)` with `sum l_i = k` and `0 <= l_i <= r`,
//! the min-cut of any information flow graph is at most
//!
//! ```text
//! sum_i l_i * min{ alpha, (d - sum_{j<i} l_j) * beta1 + (r - l_i) * beta2 }
//! ```
//!
//! Requiring `B` to fit under every such value and minimizing
//! `gamma = d*beta1 + (r-1)*beta2` gives `gamma*(alpha)`. Since `min` is
//! concave, `sum_i l_i min{alpha, c_i}` equals the minimum over subsets `S`
//! of `sum_{i in S} l_i c_i + sum_{i not in S} l_i alpha`, so each
//! `(tuple, S)` pair is one linear constraint in `(beta1, beta2)`. The
//! two-variable LP is solved exactly by enumerating vertices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::collections::HashSet;
use std::fmt::Write as _;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `7`, `154/3` or `2.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, CutboundError> {
    let s = s.trim();
    let bad = || CutboundError::Parse(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(digits, scale));
    }
    Ok(Rational::from_integer(s.parse().map_err(|_| bad())?))
}

/// Renders integers as `n` and everything else as `p/q`.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

pub fn format_decimal(x: &Rational) -> String {
    format!("{:.6}", x.to_f64().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CutboundError {
    #[error("invalid bound parameters: {0}")]
    InvalidParams(String),
    #[error("invalid cut type: {0}")]
    InvalidCutType(String),
    #[error("alpha = {alpha} is below B/k = {min_alpha}; no repair bandwidth can carry the file")]
    Infeasible {
        alpha: Rational,
        min_alpha: Rational,
    },
    #[error("cannot parse `{0}` as a rational")]
    Parse(String),
}

/// Dimensions and amounts of the repair model; `beta1`/`beta2` are only read by [`cut_value`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub alpha: Rational,
    pub file_size: Rational,
    pub beta1: Rational,
    pub beta2: Rational,
}

impl BoundParams {
    pub fn new(
        n: usize,
        k: usize,
        d: usize,
        r: usize,
        alpha: Rational,
        file_size: Rational,
    ) -> Result<Self, CutboundError> {
        let p = BoundParams {
            n,
            k,
            d,
            r,
            alpha,
            file_size,
            beta1: Rational::zero(),
            beta2: Rational::zero(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_betas(mut self, beta1: Rational, beta2: Rational) -> Result<Self, CutboundError> {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_alpha(&self, alpha: Rational) -> Result<Self, CutboundError> {
        let mut p = self.clone();
        p.alpha = alpha;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CutboundError> {
        let invalid = |m: String| Err(CutboundError::InvalidParams(m));
        if self.k == 0 || self.r == 0 {
            return invalid("k and r must be at least 1".into());
        }
        if self.d < self.k {
            return invalid(format!("need d >= k, got d = {}, k = {}", self.d, self.k));
        }
        let zero = Rational::zero();
        for (name, v) in [
            ("alpha", &self.alpha),
            ("B", &self.file_size),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
        ] {
            if *v < zero {
                return invalid(format!("{name} must be nonnegative"));
            }
        }
        Ok(())
    }

    /// `gamma = d*beta1 + (r-1)*beta2`.
    pub fn gamma(&self, beta1: &Rational, beta2: &Rational) -> Rational {
        rat(self.d as i64) * beta1 + rat(self.r as i64 - 1) * beta2
    }

    pub fn min_alpha(&self) -> Rational {
        &self.file_size / rat(self.k as i64)
    }
}

/// A `k`-tuple `(l_1, ..., l_k)` with `sum l_i = k` and every `l_i <= r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutType(Vec<usize>);

impl CutType {
    pub fn new(parts: Vec<usize>, r: usize) -> Result<Self, CutboundError> {
        let k = parts.len();
        if k == 0 {
            return Err(CutboundError::InvalidCutType("empty tuple".into()));
        }
        if parts.iter().sum::<usize>() != k {
            return Err(CutboundError::InvalidCutType(format!(
                "{parts:?} does not sum to {k}"
            )));
        }
        if parts.iter().any(|&l| l > r) {
            return Err(CutboundError::InvalidCutType(format!(
                "{parts:?} has a part above r = {r}"
            )));
        }
        Ok(CutType(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Zeros only appear after the last nonzero part.
    pub fn is_canonical(&self) -> bool {
        let nonzero = self.0.iter().take_while(|&&l| l != 0).count();
        self.0[nonzero..].iter().all(|&l| l == 0)
    }

    /// The tuple with its zeros moved to the end.
    pub fn canonical(&self) -> CutType {
        let mut parts: Vec<usize> = self.0.iter().copied().filter(|&l| l != 0).collect();
        parts.resize(self.0.len(), 0);
        CutType(parts)
    }

    /// Per-part download coefficient `d - sum_{j<i} l_j` and exchange coefficient `r - l_i`.
    fn coefficients(&self, d: usize, r: usize) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        let mut before = 0usize;
        self.0.iter().map(move |&l| {
            let c1 = d as i64 - before as i64;
            before += l;
            (l, c1, r as i64 - l as i64)
        })
    }
}

impl std::fmt::Display for CutType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All cut types in lexicographic order; with `canonical_only`, tuples with an
/// interior zero are dropped in favor of their zeros-last equivalent.
pub fn enumerate_cut_types(k: usize, r: usize, canonical_only: bool) -> Vec<CutType> {
    fn rec(
        pos: usize,
        remaining: usize,
        k: usize,
        r: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<CutType>,
    ) {
        if pos == k {
            if remaining == 0 {
                out.push(CutType(cur.clone()));
            }
            return;
        }
        // the remaining slots can hold at most (k - pos) * r
        if remaining > (k - pos) * r {
            return;
        }
        for l in 0..=remaining.min(r) {
            cur.push(l);
            rec(pos + 1, remaining - l, k, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 || r == 0 {
        return out;
    }
    rec(0, k, k, r, &mut Vec::with_capacity(k), &mut out);
    if canonical_only {
        out.retain(CutType::is_canonical);
    }
    out
}

/// Exact value of the cut-capacity expression for one tuple.
pub fn cut_value(t: &CutType, p: &BoundParams) -> Rational {
    t.coefficients(p.d, p.r)
        .map(|(l, c1, c2)| {
            let inner = rat(c1) * &p.beta1 + rat(c2) * &p.beta2;
            let m = if inner < p.alpha {
                inner
            } else {
                p.alpha.clone()
            };
            rat(l as i64) * m
        })
        .sum()
}

/// Same value via the subset expansion: minimum over every `S` of the mixed sum.
pub fn cut_value_by_subsets(t: &CutType, p: &BoundParams) -> Rational {
    subset_terms(t, p.d, p.r)
        .map(|c| c.value(&p.alpha, &p.beta1, &p.beta2))
        .min()
        .expect("at least the empty subset")
}

/// `beta1 * download + beta2 * exchange + alpha * alpha_mass`, integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearCut {
    pub download: i64,
    pub exchange: i64,
    pub alpha_mass: i64,
}

impl LinearCut {
    pub fn value(&self, alpha: &Rational, beta1: &Rational, beta2: &Rational) -> Rational {
        rat(self.download) * beta1 + rat(self.exchange) * beta2 + rat(self.alpha_mass) * alpha
    }

    fn dominates(&self, other: &LinearCut) -> bool {
        self.download <= other.download
            && self.exchange <= other.exchange
            && self.alpha_mass <= other.alpha_mass
    }
}

fn subset_terms(t: &CutType, d: usize, r: usize) -> impl Iterator<Item = LinearCut> + '_ {
    let coeffs: Vec<(usize, i64, i64)> = t.coefficients(d, r).collect();
    let k = coeffs.len();
    (0u64..1 << k).map(move |mask| {
        let mut c = LinearCut {
            download: 0,
            exchange: 0,
            alpha_mass: 0,
        };
        for (i, &(l, c1, c2)) in coeffs.iter().enumerate() {
            let l = l as i64;
            if mask >> i & 1 == 1 {
                c.download += l * c1;
                c.exchange += l * c2;
            } else {
                c.alpha_mass += l;
            }
        }
        c
    })
}

/// Distinct, non-dominated linear constraints `download*b1 + exchange*b2 >= B - alpha_mass*alpha`.
pub fn lp_constraints(k: usize, d: usize, r: usize) -> Vec<LinearCut> {
    let mut set = HashSet::new();
    for t in enumerate_cut_types(k, r, false) {
        set.extend(subset_terms(&t, d, r));
    }
    let mut all: Vec<LinearCut> = set.into_iter().collect();
    all.sort_unstable();
    let kept: Vec<LinearCut> = all
        .iter()
        .filter(|c| !all.iter().any(|o| o != *c && o.dominates(c)))
        .copied()
        .collect();
    kept
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub alpha: Rational,
    pub gamma_star: Rational,
    pub beta1: Rational,
    pub beta2: Rational,
}

/// Checks `B <= cut_value(t)` for every cut type, using the direct expression.
pub fn satisfies_all_cuts(p: &BoundParams, beta1: &Rational, beta2: &Rational) -> bool {
    let Ok(q) = p.clone().with_betas(beta1.clone(), beta2.clone()) else {
        return false;
    };
    enumerate_cut_types(p.k, p.r, false)
        .iter()
        .all(|t| cut_value(t, &q) >= p.file_size)
}

/// Half-plane `a*x + b*y >= c`.
struct HalfPlane {
    a: Rational,
    b: Rational,
    c: Rational,
}

fn intersect(p: &HalfPlane, q: &HalfPlane) -> Option<(Rational, Rational)> {
    let det = &p.a * &q.b - &p.b * &q.a;
    if det.is_zero() {
        return None;
    }
    let x = (&p.c * &q.b - &p.b * &q.c) / &det;
    let y = (&p.a * &q.c - &p.c * &q.a) / &det;
    Some((x, y))
}

/// Minimum of `gamma` over `beta1, beta2 >= 0` subject to every cut constraint.
///
/// Ties between optimal vertices go to the smallest `beta2`, then the smallest `beta1`.
pub fn gamma_star(p: &BoundParams) -> Result<TradeoffPoint, CutboundError> {
    p.validate()?;
    let min_alpha = p.min_alpha();
    if p.alpha < min_alpha {
        return Err(CutboundError::Infeasible {
            alpha: p.alpha.clone(),
            min_alpha,
        });
    }
    let zero = Rational::zero();
    let mut planes: Vec<HalfPlane> = lp_constraints(p.k, p.d, p.r)
        .into_iter()
        .map(|c| HalfPlane {
            a: rat(c.download),
            b: rat(c.exchange),
            c: &p.file_size - rat(c.alpha_mass) * &p.alpha,
        })
        // nonnegative coefficients: a nonpositive right side always holds
        .filter(|h| h.c > zero)
        .collect();
    let constraints = planes.len();
    planes.push(HalfPlane {
        a: rat(1),
        b: rat(0),
        c: zero.clone(),
    });
    planes.push(HalfPlane {
        a: rat(0),
        b: rat(1),
        c: zero.clone(),
    });
    let feasible = |x: &Rational, y: &Rational| {
        *x >= zero
            && *y >= zero
            && planes[..constraints]
                .iter()
                .all(|h| &h.a * x + &h.b * y >= h.c)
    };
    let mut best: Option<(Rational, Rational, Rational)> = None;
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let Some((x, y)) = intersect(&planes[i], &planes[j]) else {
                continue;
            };
            if !feasible(&x, &y) {
                continue;
            }
            let g = p.gamma(&x, &y);
            let better = match &best {
                None => true,
                Some((bg, bx, by)) => (&g, &y, &x) < (bg, by, bx),
            };
            if better {
                best = Some((g, x, y));
            }
        }
    }
    let (gamma, beta1, beta2) = best.expect("the feasible region is a nonempty pointed polyhedron");
    Ok(TradeoffPoint {
        alpha: p.alpha.clone(),
        gamma_star: gamma,
        beta1,
        beta2,
    })
}

/// `B(d+r-1) / (k(d+r-k))`, the cooperative minimum-storage point.
pub fn msr_closed_form(p: &BoundParams) -> Rational {
    let (k, d, r) = (p.k as i64, p.d as i64, p.r as i64);
    &p.file_size * rat(d + r - 1) / rat(k * (d + r - k))
}

/// `Bd / (k(d-k+1))`, the non-cooperative minimum-storage repair bandwidth.
pub fn non_coop_msr(p: &BoundParams) -> Rational {
    let (k, d) = (p.k as i64, p.d as i64);
    &p.file_size * rat(d) / rat(k * (d - k + 1))
}

/// `gamma*` at every grid value; entries below `B/k` come back as errors.
pub fn tradeoff_curve(
    p: &BoundParams,
    alphas: &[Rational],
) -> Vec<Result<TradeoffPoint, CutboundError>> {
    alphas
        .iter()
        .map(|a| gamma_star(&p.with_alpha(a.clone())?))
        .collect()
}

/// `alpha,gamma_star,beta1,beta2,gamma_star_float`; exact `p/q` plus a float for plotting.
pub fn curve_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from("alpha,gamma_star,beta1,beta2,gamma_star_float\n");
    for pt in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_rational(&pt.alpha),
            format_rational(&pt.gamma_star),
            format_rational(&pt.beta1),
            format_rational(&pt.beta2),
            format_decimal(&pt.gamma_star)
        );
    }
    out
}

/// Cut value of each canonical tuple at the optimum; tuples equal to `B` are the binding ones.
pub fn cut_diagnostics(p: &BoundParams, point: &TradeoffPoint) -> Vec<(CutType, Rational, bool)> {
    let q = BoundParams {
        alpha: point.alpha.clone(),
        beta1: point.beta1.clone(),
        beta2: point.beta2.clone(),
        ..p.clone()
    };
    enumerate_cut_types(p.k, p.r, true)
        .into_iter()
        .map(|t| {
            let v = cut_value(&t, &q);
            let binding = v == p.file_size;
            (t, v, binding)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, d: usize, r: usize, alpha: Rational, b: i64) -> BoundParams {
        BoundParams::new(k + r, k, d, r, alpha, rat(b)).unwrap()
    }

    fn tuples(list: &[CutType]) -> Vec<Vec<usize>> {
        list.iter().map(|t| t.parts().to_vec()).collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            tuples(&enumerate_cut_types(2, 2, false)),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        assert_eq!(
            tuples(&enumerate_cut_types(2, 2, true)),
            vec![vec![1, 1], vec![2, 0]]
        );
        assert_eq!(tuples(&enumerate_cut_types(1, 1, false)), vec![vec![1]]);
        // brute force over [0, 3]^4
        let mut brute = 0;
        for a in 0..=3 {
            for b in 0..=3 {
                for c in 0..=3 {
                    for d in 0..=3 {
                        if a + b + c + d == 4 {
                            brute += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(brute, 31);
        assert_eq!(enumerate_cut_types(4, 3, false).len(), 31);
        let all = enumerate_cut_types(4, 3, false);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cut_type_validation() {
        assert!(CutType::new(vec![2, 0], 2).is_ok());
        assert!(CutType::new(vec![2, 1], 2).is_err());
        assert!(CutType::new(vec![3, 0, 0], 2).is_err());
        assert!(CutType::new(vec![], 2).is_err());
        let t = CutType::new(vec![0, 1, 0, 3], 3).unwrap();
        assert_eq!(t.canonical().parts(), &[1, 3, 0, 0]);
        assert!(!t.is_canonical());
    }

    #[test]
    fn cut_value_examples() {
        let p = params(2, 2, 2, rat(2), 4)
            .with_betas(rat(1), rat(1))
            .unwrap();
        let t20 = CutType::new(vec![2, 0], 2).unwrap();
        let t11 = CutType::new(vec![1, 1], 2).unwrap();
        assert_eq!(cut_value(&t20, &p), rat(4));
        assert_eq!(cut_value(&t11, &p), rat(4));
        let zero_alpha = p.with_alpha(rat(0)).unwrap();
        for t in enumerate_cut_types(2, 2, false) {
            assert_eq!(cut_value(&t, &zero_alpha), rat(0));
        }
    }

    #[test]
    fn small_example_bound_is_three() {
        let pt = gamma_star(&params(2, 2, 2, rat(2), 4)).unwrap();
        assert_eq!(pt.gamma_star, rat(3));
        assert_eq!((pt.beta1.clone(), pt.beta2.clone()), (rat(1), rat(1)));
    }

    #[test]
    fn seven_node_bound_is_42() {
        let p = params(4, 4, 3, rat(21), 84);
        let pt = gamma_star(&p).unwrap();
        assert_eq!(pt.gamma_star, rat(42));
        assert_eq!(msr_closed_form(&p), rat(42));
        assert_eq!(non_coop_msr(&p), rat(84));
    }

    #[test]
    fn closed_forms() {
        let p = params(3, 3, 1, rat(4), 12);
        assert_eq!(msr_closed_form(&p), rat(12));
        assert_eq!(non_coop_msr(&p), rat(12));
        let p = params(2, 2, 2, rat(2), 4);
        assert_eq!(msr_closed_form(&p), rat(3));
    }

    #[test]
    fn infeasible_alpha() {
        let p = params(2, 2, 2, ratio(3, 2), 4);
        assert!(matches!(
            gamma_star(&p),
            Err(CutboundError::Infeasible { .. })
        ));
        let curve = tradeoff_curve(&p, &[rat(1), rat(2), rat(4)]);
        assert!(curve[0].is_err());
        assert!(curve[1].is_ok() && curve[2].is_ok());
    }

    #[test]
    fn parameter_validation() {
        assert!(BoundParams::new(5, 3, 2, 2, rat(1), rat(1)).is_err());
        assert!(BoundParams::new(5, 0, 2, 2, rat(1), rat(1)).is_err());
        assert!(BoundParams::new(5, 2, 2, 2, rat(-1), rat(1)).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("21").unwrap(), rat(21));
        assert_eq!(parse_rational("154/3").unwrap(), ratio(154, 3));
        assert_eq!(parse_rational("2.25").unwrap(), ratio(9, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&ratio(154, 3)), "154/3");
        assert_eq!(format_rational(&rat(42)), "42");
        assert_eq!(format_decimal(&ratio(154, 3)), "51.333333");
    }

    #[test]
    fn csv_rendering() {
        let p = params(2, 2, 2, rat(2), 4);
        let pts: Vec<TradeoffPoint> = tradeoff_curve(&p, &[rat(2), rat(3)])
            .into_iter()
            .map(Result::unwrap)
            .collect();
        let csv = curve_csv(&pts);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("alpha,gamma_star,beta1,beta2,gamma_star_float")
        );
        assert_eq!(lines.next(), Some("2,3,1,1,3.000000"));
    }

    #[test]
    fn diagnostics_flag_binding_cuts() {
        let p = params(2, 2, 2, rat(2), 4);
        let pt = gamma_star(&p).unwrap();
        let diag = cut_diagnostics(&p, &pt);
        assert_eq!(diag.len(), 2);
        assert!(diag.iter().all(|(_, v, _)| *v >= rat(4)));
        assert!(diag.iter().any(|(_, _, b)| *b));
    }
}
