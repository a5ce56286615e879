//! Seeded storage-cluster simulator.
//!
//! Each epoch fails a batch of nodes, repairs them with every configured
//! strategy on real shares, meters the traffic and checks that any `k`
//! surviving shares still decode the reference payload.
//!
//! Randomness is ChaCha8 seeded with the scenario seed, one stream per epoch.
//! Failures are drawn with a partial Fisher-Yates shuffle over the alive list
//! in ascending order, using rejection sampling on `next_u64` for bounded
//! indices, so runs replicate across platforms.

use crate::coop_repair::{
    cooperative_repair, individual_repair, plan_repair, HelperPolicy, Phase, RepairError,
};
use crate::cutbound::{format_decimal, format_rational, ratio, Rational};
use crate::mscr::{self, CodeParams, FieldMode, MscrError, NodeShare, StripedFile};
use itertools::Itertools;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

/// Exhaustive subset checks up to this many nodes.
pub const EXHAUSTIVE_LIMIT: usize = 8;
/// Subsets drawn when checking larger clusters.
pub const SAMPLED_SUBSETS: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum ClusterError {
    #[error("failing {failing} of {alive} alive nodes would leave fewer than k = {k}")]
    TooFewAlive {
        alive: usize,
        failing: usize,
        k: usize,
    },
    #[error("node {0} cannot fail: it is out of range or already down")]
    NotAlive(usize),
    #[error("strategy {strategy} cannot run: {msg}")]
    StrategyMismatch { strategy: Strategy, msg: String },
    #[error("scenario line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error(transparent)]
    Code(#[from] MscrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Individual,
    SequentialWithHelpers,
    Cooperative,
}

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Individual => "individual",
            Strategy::SequentialWithHelpers => "sequential_with_helpers",
            Strategy::Cooperative => "cooperative",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "individual" => Ok(Strategy::Individual),
            "sequential" | "sequential_with_helpers" => Ok(Strategy::SequentialWithHelpers),
            "cooperative" => Ok(Strategy::Cooperative),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// Which nodes to fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failures {
    Count(usize),
    Explicit(Vec<usize>),
}

/// Uniform integer in `0..bound` by rejection on `next_u64`.
fn bounded(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let limit = u64::MAX - u64::MAX % bound;
    loop {
        let x = rng.next_u64();
        if x < limit {
            return x % bound;
        }
    }
}

fn epoch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone)]
pub struct ClusterState {
    params: CodeParams,
    shares: Vec<Option<NodeShare>>,
    reference_shares: Vec<NodeShare>,
    reference_payload: Vec<u8>,
    epoch: u64,
    seed: u64,
}

impl ClusterState {
    pub fn new(params: CodeParams, file: &StripedFile, seed: u64) -> Result<Self, ClusterError> {
        let shares = mscr::encode(file, &params)?;
        Ok(ClusterState {
            reference_payload: file.to_bytes(params.field()),
            shares: shares.iter().cloned().map(Some).collect(),
            reference_shares: shares,
            params,
            epoch: 0,
            seed,
        })
    }

    /// A cluster holding `b_symbols` seeded random symbols; `b_symbols` must be a multiple of `k*r`.
    pub fn random(params: CodeParams, b_symbols: usize, seed: u64) -> Result<Self, ClusterError> {
        let per = params.symbols_per_stripe();
        if !b_symbols.is_multiple_of(per) {
            return Err(MscrError::InvalidParams(format!(
                "B = {b_symbols} symbols is not a multiple of k*r = {per}"
            ))
            .into());
        }
        // stream 0 is reserved for the payload; epochs start at stream 1
        let mut rng = epoch_rng(seed, 0);
        let q = params.field().order();
        let symbols: Vec<u64> = (0..b_symbols).map(|_| bounded(&mut rng, q)).collect();
        let len = (b_symbols * params.field().symbol_width()) as u64;
        let file = StripedFile::from_symbols(&params, symbols, len)?;
        Self::new(params, &file, seed)
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stripe_count(&self) -> usize {
        self.reference_shares[0].stripe_count()
    }

    pub fn reference_payload(&self) -> &[u8] {
        &self.reference_payload
    }

    pub fn reference_share(&self, node: usize) -> &NodeShare {
        &self.reference_shares[node - 1]
    }

    pub fn share(&self, node: usize) -> Option<&NodeShare> {
        self.shares.get(node.wrapping_sub(1))?.as_ref()
    }

    /// For fault injection in tests and examples.
    pub fn share_mut(&mut self, node: usize) -> Option<&mut NodeShare> {
        self.shares.get_mut(node.wrapping_sub(1))?.as_mut()
    }

    pub fn alive(&self) -> Vec<usize> {
        (1..=self.params.n())
            .filter(|&v| self.shares[v - 1].is_some())
            .collect()
    }

    pub fn failed(&self) -> Vec<usize> {
        (1..=self.params.n())
            .filter(|&v| self.shares[v - 1].is_none())
            .collect()
    }

    fn alive_map(&self) -> BTreeMap<usize, NodeShare> {
        self.shares
            .iter()
            .flatten()
            .map(|s| (s.node_index(), s.clone()))
            .collect()
    }

    pub fn advance_epoch(&mut self) {
        self.epoch += 1;
    }

    /// Removes shares; a count is drawn from the `(seed, epoch)` stream.
    pub fn inject_failures(&mut self, failures: &Failures) -> Result<Vec<usize>, ClusterError> {
        let alive = self.alive();
        let k = self.params.k();
        let mut chosen = match failures {
            Failures::Explicit(nodes) => {
                let mut nodes = nodes.clone();
                nodes.sort_unstable();
                nodes.dedup();
                if let Some(&v) = nodes.iter().find(|v| !alive.contains(v)) {
                    return Err(ClusterError::NotAlive(v));
                }
                nodes
            }
            Failures::Count(count) => {
                if *count > alive.len() {
                    return Err(ClusterError::TooFewAlive {
                        alive: alive.len(),
                        failing: *count,
                        k,
                    });
                }
                let mut rng = epoch_rng(self.seed, self.epoch + 1);
                let mut pool = alive.clone();
                for i in 0..*count {
                    let j = i + bounded(&mut rng, (pool.len() - i) as u64) as usize;
                    pool.swap(i, j);
                }
                pool.truncate(*count);
                pool
            }
        };
        if alive.len() - chosen.len() < k {
            return Err(ClusterError::TooFewAlive {
                alive: alive.len(),
                failing: chosen.len(),
                k,
            });
        }
        chosen.sort_unstable();
        for &v in &chosen {
            self.shares[v - 1] = None;
        }
        Ok(chosen)
    }
}

fn serialize_rational<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

fn serialize_opt_rational<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_some(&format_rational(x)),
        None => s.serialize_none(),
    }
}

/// Traffic into one newcomer. Measured fields are `None` for accounting-only strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewcomerBandwidth {
    pub node: usize,
    pub phase1_symbols: Option<usize>,
    pub phase2_symbols: Option<usize>,
    pub total_symbols: Option<usize>,
    pub total_bytes: Option<usize>,
    #[serde(serialize_with = "serialize_rational")]
    pub formula: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyReport {
    pub epoch: u64,
    pub strategy: Strategy,
    pub failed: Vec<usize>,
    pub newcomers: Vec<NewcomerBandwidth>,
    /// Measured symbols per newcomer, averaged exactly.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub per_newcomer_measured: Option<Rational>,
    /// Formula value per newcomer, averaged exactly.
    #[serde(serialize_with = "serialize_rational")]
    pub per_newcomer_formula: Rational,
    pub per_newcomer_decimal: String,
    pub total_symbols: Option<usize>,
}

impl StrategyReport {
    /// Measured value when available, otherwise the formula value.
    pub fn per_newcomer(&self) -> &Rational {
        self.per_newcomer_measured
            .as_ref()
            .unwrap_or(&self.per_newcomer_formula)
    }
}

fn file_symbols(state: &ClusterState) -> i64 {
    (state.stripe_count() * state.params.symbols_per_stripe()) as i64
}

/// `B d / (k (d + t - k + 1))` for the `t`-th newcomer of a one-at-a-time repair.
fn sequential_term(b: i64, k: i64, d: i64, t: i64) -> Rational {
    ratio(b * d, k * (d + t - k + 1))
}

fn average(values: &[Rational]) -> Rational {
    let n = values.len().max(1) as i64;
    values.iter().sum::<Rational>() / ratio(n, 1)
}

/// Repairs every absent node with `strategy`. Pure in `state`.
pub fn run_strategy(
    state: &ClusterState,
    strategy: Strategy,
) -> Result<(ClusterState, StrategyReport), ClusterError> {
    let params = &state.params;
    let failed = state.failed();
    let alive = state.alive_map();
    let (k, d, r) = (params.k() as i64, params.d() as i64, params.r() as i64);
    let b = file_symbols(state);
    let width = params.field().symbol_width();
    let mut next = state.clone();
    let mut newcomers = Vec::with_capacity(failed.len());
    match strategy {
        Strategy::Individual | Strategy::SequentialWithHelpers => {
            for (t, &node) in failed.iter().enumerate() {
                let (share, ledger) =
                    individual_repair(params, node, &alive, HelperPolicy::LowestIndex)?;
                next.shares[node - 1] = Some(share);
                let measured = ledger.received_by(node, None);
                newcomers.push(if strategy == Strategy::Individual {
                    NewcomerBandwidth {
                        node,
                        phase1_symbols: Some(measured),
                        phase2_symbols: Some(0),
                        total_symbols: Some(measured),
                        total_bytes: Some(measured * width),
                        formula: sequential_term(b, k, d, 0),
                    }
                } else {
                    // accounting only: the data is restored by plain downloads
                    NewcomerBandwidth {
                        node,
                        phase1_symbols: None,
                        phase2_symbols: None,
                        total_symbols: None,
                        total_bytes: None,
                        formula: sequential_term(b, k, d, t as i64),
                    }
                });
            }
        }
        Strategy::Cooperative => {
            if failed.len() as i64 > r {
                return Err(ClusterError::StrategyMismatch {
                    strategy,
                    msg: format!(
                        "{} nodes down but at most r = {r} can be repaired",
                        failed.len()
                    ),
                });
            }
            if !failed.is_empty() {
                let alive_nodes: Vec<usize> = alive.keys().copied().collect();
                let plan = plan_repair(&alive_nodes, &failed, params, HelperPolicy::LowestIndex)?;
                let outcome = cooperative_repair(params, &alive, &plan)?;
                let stripes = state.stripe_count() as i64;
                for (ordinal, share) in outcome.shares.into_iter().enumerate() {
                    let node = share.node_index();
                    let formula = if failed.len() as i64 == r {
                        ratio(b * (d + r - 1), k * (d + r - k))
                    } else {
                        // fewer newcomers than rows: k per owned row plus the rest by exchange
                        let owned = plan.rows(ordinal).len() as i64;
                        ratio(stripes * (k * owned + r - owned), 1)
                    };
                    let p1 = outcome.ledger.received_by(node, Some(Phase::Download));
                    let p2 = outcome.ledger.received_by(node, Some(Phase::Exchange));
                    newcomers.push(NewcomerBandwidth {
                        node,
                        phase1_symbols: Some(p1),
                        phase2_symbols: Some(p2),
                        total_symbols: Some(p1 + p2),
                        total_bytes: Some((p1 + p2) * width),
                        formula,
                    });
                    next.shares[node - 1] = Some(share);
                }
            }
        }
    }
    let measured: Option<Vec<usize>> = newcomers.iter().map(|n| n.total_symbols).collect();
    let total_symbols = measured.as_ref().map(|m| m.iter().sum());
    let per_newcomer_measured = measured
        .filter(|m| !m.is_empty())
        .map(|m| average(&m.iter().map(|&v| ratio(v as i64, 1)).collect::<Vec<_>>()));
    let formulas: Vec<Rational> = newcomers.iter().map(|n| n.formula.clone()).collect();
    let per_newcomer_formula = average(&formulas);
    let report = StrategyReport {
        epoch: state.epoch,
        strategy,
        failed,
        per_newcomer_decimal: format_decimal(
            per_newcomer_measured
                .as_ref()
                .unwrap_or(&per_newcomer_formula),
        ),
        newcomers,
        per_newcomer_measured,
        per_newcomer_formula,
        total_symbols,
    };
    Ok((next, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub exhaustive: bool,
    pub subsets_checked: usize,
    /// `k`-subsets whose reconstruction differs from the reference payload or fails.
    pub failing_subsets: Vec<Vec<usize>>,
    /// Alive nodes whose share differs from the originally encoded one.
    pub share_mismatches: Vec<usize>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failing_subsets.is_empty() && self.share_mismatches.is_empty()
    }
}

/// Decodes from `k`-subsets of alive nodes: all of them up to
/// [`EXHAUSTIVE_LIMIT`] nodes, [`SAMPLED_SUBSETS`] seeded draws beyond.
pub fn verify_cluster(state: &ClusterState) -> VerifyReport {
    let alive = state.alive();
    let k = state.params.k();
    let exhaustive = state.params.n() <= EXHAUSTIVE_LIMIT;
    let subsets: Vec<Vec<usize>> = if alive.len() < k {
        Vec::new()
    } else if exhaustive {
        alive.iter().copied().combinations(k).collect()
    } else {
        let mut rng = epoch_rng(state.seed, u64::MAX - state.epoch);
        (0..SAMPLED_SUBSETS)
            .map(|_| {
                let mut pool = alive.clone();
                for i in 0..k {
                    let j = i + bounded(&mut rng, (pool.len() - i) as u64) as usize;
                    pool.swap(i, j);
                }
                pool.truncate(k);
                pool.sort_unstable();
                pool
            })
            .collect()
    };
    let failing_subsets = subsets
        .iter()
        .filter(|set| {
            let shares: Vec<NodeShare> = set
                .iter()
                .map(|&v| state.share(v).expect("alive").clone())
                .collect();
            mscr::decode_payload(&shares, &state.params)
                .map_or(true, |bytes| bytes != state.reference_payload)
        })
        .cloned()
        .collect();
    let share_mismatches = alive
        .iter()
        .copied()
        .filter(|&v| state.share(v) != Some(state.reference_share(v)))
        .collect();
    VerifyReport {
        exhaustive,
        subsets_checked: subsets.len(),
        failing_subsets,
        share_mismatches,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub b_symbols: usize,
    pub field: FieldMode,
    pub seed: u64,
    pub epochs: u64,
    pub strategies: Vec<Strategy>,
}

impl Scenario {
    /// `key=value` lines; `#` starts a comment. `field`, `seed`, `epochs`
    /// and `strategy` default to `auto`, `0`, `1` and all three strategies.
    pub fn parse(text: &str) -> Result<Self, ClusterError> {
        let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ClusterError::Parse {
                    line,
                    msg: format!("expected key=value, got `{content}`"),
                });
            };
            let key = key.trim();
            if !matches!(
                key,
                "n" | "k" | "r" | "B_symbols" | "field" | "seed" | "epochs" | "strategy"
            ) {
                return Err(ClusterError::Parse {
                    line,
                    msg: format!("unknown key `{key}`"),
                });
            }
            if values.insert(key, (line, value.trim())).is_some() {
                return Err(ClusterError::Parse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        let end = text.lines().count() + 1;
        fn number<T: FromStr>(
            values: &BTreeMap<&str, (usize, &str)>,
            key: &str,
            default: Option<T>,
            end: usize,
        ) -> Result<T, ClusterError> {
            match values.get(key) {
                Some(&(line, v)) => v.parse().map_err(|_| ClusterError::Parse {
                    line,
                    msg: format!("`{key}` must be a nonnegative integer, got `{v}`"),
                }),
                None => default.ok_or(ClusterError::Parse {
                    line: end,
                    msg: format!("missing required key `{key}`"),
                }),
            }
        }
        let field = match values.get("field") {
            Some(&(line, v)) => v
                .parse()
                .map_err(|e: String| ClusterError::Parse { line, msg: e })?,
            None => FieldMode::Auto,
        };
        let strategies = match values.get("strategy") {
            Some(&(line, v)) => v
                .split(',')
                .map(|s| s.parse().map_err(|msg| ClusterError::Parse { line, msg }))
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![
                Strategy::Individual,
                Strategy::SequentialWithHelpers,
                Strategy::Cooperative,
            ],
        };
        Ok(Scenario {
            n: number(&values, "n", None, end)?,
            k: number(&values, "k", None, end)?,
            r: number(&values, "r", None, end)?,
            b_symbols: number(&values, "B_symbols", None, end)?,
            field,
            seed: number(&values, "seed", Some(0), end)?,
            epochs: number(&values, "epochs", Some(1), end)?,
            strategies,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpochReport {
    pub epoch: u64,
    pub failed: Vec<usize>,
    pub strategies: Vec<StrategyReport>,
    pub verify: Vec<VerifyReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub b_symbols: usize,
    pub field: String,
    pub seed: u64,
    pub initial_verify: VerifyReport,
    pub epochs: Vec<EpochReport>,
    pub all_verified: bool,
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `epoch,strategy,newcomer,phase1_symbols,phase2_symbols,total_bytes`; accounting-only rows leave the measured columns empty.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("epoch,strategy,newcomer,phase1_symbols,phase2_symbols,total_bytes\n");
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        for e in &self.epochs {
            for s in &e.strategies {
                for nc in &s.newcomers {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        e.epoch,
                        s.strategy,
                        nc.node,
                        opt(nc.phase1_symbols),
                        opt(nc.phase2_symbols),
                        opt(nc.total_bytes)
                    );
                }
            }
        }
        out
    }
}

/// Runs every epoch: fail `r` seeded nodes, repair with each strategy from the
/// same failed state, verify, and carry the last strategy's cluster forward.
pub fn run_scenario(s: &Scenario) -> Result<SimulationReport, ClusterError> {
    let params = CodeParams::new(s.n, s.k, s.r, s.field)?;
    let field = params.field().spec().to_string();
    let mut state = ClusterState::random(params, s.b_symbols, s.seed)?;
    let initial_verify = verify_cluster(&state);
    let mut all_verified = initial_verify.passed();
    let mut epochs = Vec::new();
    for _ in 0..s.epochs {
        let failed = state.inject_failures(&Failures::Count(s.r))?;
        let mut strategies = Vec::new();
        let mut verify = Vec::new();
        let mut carried = None;
        for &strategy in &s.strategies {
            let (next, report) = run_strategy(&state, strategy)?;
            let v = verify_cluster(&next);
            all_verified &= v.passed();
            strategies.push(report);
            verify.push(v);
            carried = Some(next);
        }
        state = carried.unwrap_or(state);
        epochs.push(EpochReport {
            epoch: state.epoch,
            failed,
            strategies,
            verify,
        });
        state.advance_epoch();
    }
    Ok(SimulationReport {
        n: s.n,
        k: s.k,
        r: s.r,
        b_symbols: s.b_symbols,
        field,
        seed: s.seed,
        initial_verify,
        epochs,
        all_verified,
    })
}
