//! Two-phase cooperative repair and the individual-repair baseline.
//!
//! Each role is a pure step function so an orchestrator can run them in any
//! order or concurrently:
//!
//! 1. helpers serve stored symbols verbatim ([`phase1_serve`]),
//! 2. each newcomer recovers its assigned message rows ([`phase1_recover_row`]),
//! 3. newcomers exchange re-encoded symbols ([`phase2_exchange`]),
//! 4. each newcomer assembles its column ([`assemble_share`]).
//!
//! With `r` newcomers newcomer `j` owns row `j`, downloads `k` symbols per
//! stripe and receives `r - 1`, for `k + r - 1` in total. When fewer than `r`
//! nodes are being repaired the rows are dealt round-robin over the
//! newcomers that are present.

use crate::matrix::Matrix;
use crate::mscr::{self, CodeParams, MscrError, NodeShare};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum RepairError {
    #[error("need {needed} alive helpers, only {available} available")]
    InsufficientAlive { needed: usize, available: usize },
    #[error("expected between 1 and {max} failed nodes, got {got}")]
    FailedCount { max: usize, got: usize },
    #[error("node {0} is listed both as failed and alive")]
    Overlap(usize),
    #[error("invalid repair plan: {0}")]
    InvalidPlan(String),
    #[error("row {row} is outside 1..={r}")]
    RowOutOfRange { row: usize, r: usize },
    #[error("newcomer {node} is missing the symbol for row {row}")]
    MissingSymbol { node: usize, row: usize },
    #[error("helper {0} share is not available")]
    MissingHelper(usize),
    #[error(transparent)]
    Code(#[from] MscrError),
}

/// How newcomers pick their `k` helpers among the alive nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HelperPolicy {
    /// Lowest-index alive nodes for every newcomer.
    #[default]
    LowestIndex,
    /// Newcomer `j` starts `j * k` places further along the alive list.
    RoundRobin,
    /// Independent seeded shuffle per newcomer.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairPlan {
    failed: Vec<usize>,
    helpers: Vec<Vec<usize>>,
    rows: Vec<Vec<usize>>,
    policy: HelperPolicy,
}

impl RepairPlan {
    /// Newcomers in ascending node order.
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    /// Helpers of the `ordinal`-th newcomer (0-based).
    pub fn helpers(&self, ordinal: usize) -> &[usize] {
        &self.helpers[ordinal]
    }

    /// Message rows (1-based) recovered by the `ordinal`-th newcomer.
    pub fn rows(&self, ordinal: usize) -> &[usize] {
        &self.rows[ordinal]
    }

    pub fn policy(&self) -> HelperPolicy {
        self.policy
    }

    pub fn has_exchange(&self) -> bool {
        self.failed.len() > 1
    }
}

pub fn plan_repair(
    alive: &[usize],
    failed: &[usize],
    params: &CodeParams,
    policy: HelperPolicy,
) -> Result<RepairPlan, RepairError> {
    let failed: Vec<usize> = failed
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let alive: Vec<usize> = alive
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if failed.is_empty() || failed.len() > params.r() {
        return Err(RepairError::FailedCount {
            max: params.r(),
            got: failed.len(),
        });
    }
    for &node in failed.iter().chain(&alive) {
        params.check_node(node)?;
    }
    if let Some(&node) = failed.iter().find(|f| alive.contains(f)) {
        return Err(RepairError::Overlap(node));
    }
    let k = params.k();
    if alive.len() < k {
        return Err(RepairError::InsufficientAlive {
            needed: k,
            available: alive.len(),
        });
    }
    let helpers = (0..failed.len())
        .map(|ordinal| {
            let mut chosen: Vec<usize> = match policy {
                HelperPolicy::LowestIndex => alive[..k].to_vec(),
                HelperPolicy::RoundRobin => (0..k)
                    .map(|t| alive[(ordinal * k + t) % alive.len()])
                    .collect(),
                HelperPolicy::Seeded(seed) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(ordinal as u64);
                    let mut pool = alive.clone();
                    pool.shuffle(&mut rng);
                    pool.truncate(k);
                    pool
                }
            };
            chosen.sort_unstable();
            chosen
        })
        .collect();
    let count = failed.len();
    let rows = (0..count)
        .map(|ordinal| {
            (1..=params.r())
                .filter(|row| (row - 1) % count == ordinal)
                .collect()
        })
        .collect();
    Ok(RepairPlan {
        failed,
        helpers,
        rows,
        policy,
    })
}

/// Symbol of message row `row` (1-based) for every stripe, copied verbatim from storage.
pub fn phase1_serve(share: &NodeShare, row: usize) -> Result<Vec<u64>, RepairError> {
    if row == 0 || row > share.r() {
        return Err(RepairError::RowOutOfRange { row, r: share.r() });
    }
    Ok((0..share.stripe_count())
        .map(|stripe| share.symbol(stripe, row))
        .collect())
}

/// Solves for `m_j^T` in every stripe from `k` symbols `m_j^T g_h`, one per helper.
///
/// `received[t][s]` is the symbol from `helpers[t]` for stripe `s`.
pub fn phase1_recover_row(
    params: &CodeParams,
    helpers: &[usize],
    received: &[Vec<u64>],
) -> Result<Vec<Vec<u64>>, RepairError> {
    let k = params.k();
    if helpers.len() != k || received.len() != k {
        return Err(RepairError::InvalidPlan(format!(
            "row recovery needs exactly {k} helpers"
        )));
    }
    if helpers.iter().collect::<BTreeSet<_>>().len() != k {
        return Err(RepairError::InvalidPlan("helpers must be distinct".into()));
    }
    for &h in helpers {
        params.check_node(h)?;
    }
    let stripes = received[0].len();
    if received.iter().any(|r| r.len() != stripes) {
        return Err(RepairError::InvalidPlan(
            "helpers served different stripe counts".into(),
        ));
    }
    let inverse = params
        .generator_columns(helpers)
        .invert()
        .expect("k generator columns are always independent");
    let mut rows = Vec::with_capacity(stripes);
    for s in 0..stripes {
        let v: Vec<u64> = received.iter().map(|r| r[s]).collect();
        rows.push(inverse.left_mul_vec(&v).map_err(MscrError::from)?);
    }
    Ok(rows)
}

/// Rows a newcomer recovered in phase 1: `(row, per-stripe m_row^T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredRows {
    pub newcomer: usize,
    pub rows: Vec<(usize, Vec<Vec<u64>>)>,
}

/// Per-stripe symbols `m_row^T g_to` computed by `from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangePacket {
    pub from: usize,
    pub to: usize,
    pub row: usize,
    pub symbols: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExchangeOutput {
    /// Symbols a newcomer computes for its own column; never transmitted.
    pub kept: Vec<ExchangePacket>,
    /// Symbols sent to other newcomers.
    pub sent: Vec<ExchangePacket>,
}

/// Every newcomer re-encodes its recovered rows against every newcomer's generator column.
pub fn phase2_exchange(params: &CodeParams, recovered: &[RecoveredRows]) -> ExchangeOutput {
    let field = params.field();
    let targets: Vec<usize> = recovered.iter().map(|r| r.newcomer).collect();
    let mut out = ExchangeOutput::default();
    for src in recovered {
        for &to in &targets {
            let g = params.generator_column(to);
            for (row, per_stripe) in &src.rows {
                let symbols = per_stripe.iter().map(|m| field.dot(m, &g)).collect();
                let packet = ExchangePacket {
                    from: src.newcomer,
                    to,
                    row: *row,
                    symbols,
                };
                if to == src.newcomer {
                    out.kept.push(packet);
                } else {
                    out.sent.push(packet);
                }
            }
        }
    }
    out
}

/// Builds the newcomer's column from one packet per message row.
pub fn assemble_share(
    params: &CodeParams,
    node: usize,
    stripe_count: usize,
    original_length: u64,
    packets: &[&ExchangePacket],
) -> Result<NodeShare, RepairError> {
    let r = params.r();
    let mut by_row: BTreeMap<usize, &ExchangePacket> = BTreeMap::new();
    for p in packets {
        if p.to != node {
            return Err(RepairError::InvalidPlan(format!(
                "packet for node {} delivered to {node}",
                p.to
            )));
        }
        if p.row == 0 || p.row > r {
            return Err(RepairError::RowOutOfRange { row: p.row, r });
        }
        if p.symbols.len() != stripe_count {
            return Err(RepairError::InvalidPlan(format!(
                "row {} packet carries {} stripes, expected {stripe_count}",
                p.row,
                p.symbols.len()
            )));
        }
        by_row.insert(p.row, p);
    }
    let mut symbols = Vec::with_capacity(stripe_count * r);
    for s in 0..stripe_count {
        for row in 1..=r {
            let p = by_row
                .get(&row)
                .ok_or(RepairError::MissingSymbol { node, row })?;
            symbols.push(p.symbols[s]);
        }
    }
    Ok(NodeShare::new(node, r, original_length, symbols)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Phase {
    Download = 1,
    Exchange = 2,
}

impl Phase {
    pub fn number(self) -> u8 {
        self as u8
    }
}

/// One metered transfer: symbols of a single stripe moving from one node to another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferRecord {
    pub from: usize,
    pub to: usize,
    pub phase: Phase,
    pub stripe: usize,
    pub payload: Vec<u64>,
}

impl TransferRecord {
    pub fn symbols(&self) -> usize {
        self.payload.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandwidthLedger {
    records: Vec<TransferRecord>,
}

impl BandwidthLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, rec: TransferRecord) {
        debug_assert!(!rec.payload.is_empty());
        debug_assert!(rec.phase == Phase::Download || rec.from != rec.to);
        self.records.push(rec);
    }

    pub fn records(&self) -> &[TransferRecord] {
        &self.records
    }

    pub fn merge(&mut self, other: BandwidthLedger) {
        self.records.extend(other.records);
    }

    /// Symbols received by `node`, optionally limited to one phase.
    pub fn received_by(&self, node: usize, phase: Option<Phase>) -> usize {
        self.records
            .iter()
            .filter(|r| r.to == node && phase.is_none_or(|p| r.phase == p))
            .map(TransferRecord::symbols)
            .sum()
    }

    pub fn phase_total(&self, phase: Phase) -> usize {
        self.records
            .iter()
            .filter(|r| r.phase == phase)
            .map(TransferRecord::symbols)
            .sum()
    }

    pub fn total(&self) -> usize {
        self.records.iter().map(TransferRecord::symbols).sum()
    }

    /// Receiving nodes in ascending order.
    pub fn newcomers(&self) -> Vec<usize> {
        self.records
            .iter()
            .map(|r| r.to)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// `phase,from,to,stripe,symbol_hex`, one line per symbol.
    pub fn transcript(&self, params: &CodeParams) -> String {
        let mut out = String::new();
        let mut buf = Vec::new();
        for r in &self.records {
            for &sym in &r.payload {
                buf.clear();
                params.field().write_symbol(sym, &mut buf);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.phase.number(),
                    r.from,
                    r.to,
                    r.stripe,
                    hex::encode(&buf)
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub shares: Vec<NodeShare>,
    pub ledger: BandwidthLedger,
}

fn lookup(alive: &BTreeMap<usize, NodeShare>, node: usize) -> Result<&NodeShare, RepairError> {
    alive.get(&node).ok_or(RepairError::MissingHelper(node))
}

/// Runs both phases for every newcomer in `plan` and meters each transfer.
pub fn cooperative_repair(
    params: &CodeParams,
    alive: &BTreeMap<usize, NodeShare>,
    plan: &RepairPlan,
) -> Result<RepairOutcome, RepairError> {
    let reference = alive
        .values()
        .next()
        .ok_or(RepairError::InsufficientAlive {
            needed: params.k(),
            available: 0,
        })?;
    let stripe_count = reference.stripe_count();
    let original_length = reference.original_length();
    let mut ledger = BandwidthLedger::new();
    let mut recovered = Vec::with_capacity(plan.failed.len());
    for (ordinal, &newcomer) in plan.failed.iter().enumerate() {
        let helpers = plan.helpers(ordinal);
        let shares: Vec<&NodeShare> = helpers
            .iter()
            .map(|&h| lookup(alive, h))
            .collect::<Result<_, _>>()?;
        mscr::check_consistent(params, &shares)?;
        let mut rows = Vec::new();
        for &row in plan.rows(ordinal) {
            let mut received = Vec::with_capacity(helpers.len());
            for share in &shares {
                let served = phase1_serve(share, row)?;
                for (stripe, &sym) in served.iter().enumerate() {
                    ledger.record(TransferRecord {
                        from: share.node_index(),
                        to: newcomer,
                        phase: Phase::Download,
                        stripe,
                        payload: vec![sym],
                    });
                }
                received.push(served);
            }
            rows.push((row, phase1_recover_row(params, helpers, &received)?));
        }
        recovered.push(RecoveredRows { newcomer, rows });
    }
    let exchange = phase2_exchange(params, &recovered);
    for packet in &exchange.sent {
        for (stripe, &sym) in packet.symbols.iter().enumerate() {
            ledger.record(TransferRecord {
                from: packet.from,
                to: packet.to,
                phase: Phase::Exchange,
                stripe,
                payload: vec![sym],
            });
        }
    }
    let mut shares = Vec::with_capacity(plan.failed.len());
    for &node in &plan.failed {
        let inbox: Vec<&ExchangePacket> = exchange
            .kept
            .iter()
            .chain(&exchange.sent)
            .filter(|p| p.to == node)
            .collect();
        shares.push(assemble_share(
            params,
            node,
            stripe_count,
            original_length,
            &inbox,
        )?);
    }
    Ok(RepairOutcome { shares, ledger })
}

/// Baseline: download `k` full columns, decode `M`, re-encode the lost column.
pub fn individual_repair(
    params: &CodeParams,
    failed: usize,
    alive: &BTreeMap<usize, NodeShare>,
    policy: HelperPolicy,
) -> Result<(NodeShare, BandwidthLedger), RepairError> {
    let alive_nodes: Vec<usize> = alive.keys().copied().collect();
    let plan = plan_repair(&alive_nodes, &[failed], params, policy)?;
    let helpers = plan.helpers(0);
    let shares: Vec<NodeShare> = helpers
        .iter()
        .map(|&h| lookup(alive, h).cloned())
        .collect::<Result<_, _>>()?;
    let mut ledger = BandwidthLedger::new();
    for share in &shares {
        for stripe in 0..share.stripe_count() {
            ledger.record(TransferRecord {
                from: share.node_index(),
                to: failed,
                phase: Phase::Download,
                stripe,
                payload: share.column(stripe).to_vec(),
            });
        }
    }
    let file = mscr::reconstruct(&shares, params)?;
    let g = Matrix::from_vec(
        params.field(),
        params.k(),
        1,
        params.generator_column(failed),
    )
    .map_err(MscrError::from)?;
    let mut symbols = Vec::with_capacity(file.stripe_count() * params.r());
    for m in file.stripes() {
        symbols.extend(m.matrix().mul(&g).map_err(MscrError::from)?.into_vec());
    }
    let share = NodeShare::new(failed, params.r(), shares[0].original_length(), symbols)?;
    Ok((share, ledger))
}
