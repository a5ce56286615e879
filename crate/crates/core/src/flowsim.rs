//! Information flow graphs for cooperative repair and an exact max-flow oracle.
//!
//! Stage 0 holds the `n` original nodes, fed by the source with capacity `alpha`.
//! Each repair stage regenerates `r` nodes; newcomer `p` gets `in:p:s`, `mid:p:s`
//! and `out:p:s`, with `d` helper edges of capacity `beta1` into `in`, an
//! unbounded `in -> mid` edge, `beta2` edges from every other newcomer's `in`
//! into its `mid`, and `mid -> out` of capacity `alpha`. The data collector
//! reads the latest `out` of each of its `k` nodes over unbounded edges.

use crate::cutbound::{BoundParams, CutType, Rational};
use num_traits::Zero;
use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("stage {stage}: {msg}")]
    InvalidStage { stage: usize, msg: String },
    #[error("history has {stages} stages but at most k = {k} are modeled")]
    TooManyStages { stages: usize, k: usize },
    #[error("invalid data collector: {0}")]
    InvalidCollector(String),
    #[error("need n >= d + r = {need} for adversarial helper choice, got n = {n}")]
    TooFewNodes { n: usize, need: usize },
    #[error("cut assignment has {given} kinds but the collector spans {groups} groups")]
    MalformedCut { given: usize, groups: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Source,
    In { node: usize, stage: usize },
    Mid { node: usize, stage: usize },
    Out { node: usize, stage: usize },
    Collector,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Vertex::Source => write!(f, "source"),
            Vertex::In { node, stage } => write!(f, "in:{node}:{stage}"),
            Vertex::Mid { node, stage } => write!(f, "mid:{node}:{stage}"),
            Vertex::Out { node, stage } => write!(f, "out:{node}:{stage}"),
            Vertex::Collector => write!(f, "dc"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub capacity: Rational,
    pub infinite: bool,
}

/// One batch repair: the regenerated nodes and, per newcomer, the nodes it downloads from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairStage {
    pub regenerated: Vec<usize>,
    pub helpers: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RepairHistory {
    pub stages: Vec<RepairStage>,
}

impl RepairHistory {
    pub fn new(stages: Vec<RepairStage>) -> Self {
        RepairHistory { stages }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self, p: &BoundParams) -> Result<(), FlowError> {
        if self.stages.len() > p.k {
            return Err(FlowError::TooManyStages {
                stages: self.stages.len(),
                k: p.k,
            });
        }
        for (i, st) in self.stages.iter().enumerate() {
            let stage = i + 1;
            let bad = |msg: String| Err(FlowError::InvalidStage { stage, msg });
            let regen: BTreeSet<usize> = st.regenerated.iter().copied().collect();
            if regen.len() != p.r || st.regenerated.len() != p.r {
                return bad(format!("expected {} distinct regenerated nodes", p.r));
            }
            if regen.iter().any(|&v| v == 0 || v > p.n) {
                return bad(format!("node index outside 1..={}", p.n));
            }
            if st.helpers.len() != p.r {
                return bad("one helper list per newcomer required".into());
            }
            for hs in &st.helpers {
                let set: BTreeSet<usize> = hs.iter().copied().collect();
                if set.len() != p.d || hs.len() != p.d {
                    return bad(format!("each newcomer needs {} distinct helpers", p.d));
                }
                if set.iter().any(|&v| v == 0 || v > p.n || regen.contains(&v)) {
                    return bad("helper is out of range or being regenerated".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FlowGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    infinity: Rational,
    /// DC nodes grouped by the stage of their latest version, in stage order.
    groups: Vec<(usize, Vec<usize>)>,
}

impl FlowGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn infinity(&self) -> &Rational {
        &self.infinity
    }

    pub fn groups(&self) -> &[(usize, Vec<usize>)] {
        &self.groups
    }

    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    /// One `from,to,capacity` line per edge; unbounded edges print `inf`.
    pub fn dump(&self) -> String {
        let mut out = String::from("from,to,capacity\n");
        for e in &self.edges {
            let cap = if e.infinite {
                "inf".to_string()
            } else {
                e.capacity.to_string()
            };
            let _ = writeln!(
                out,
                "{},{},{}",
                self.vertices[e.from], self.vertices[e.to], cap
            );
        }
        out
    }
}

struct Builder {
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize, Option<Rational>)>,
}

impl Builder {
    fn vertex(&mut self, v: Vertex) -> usize {
        self.vertices.push(v);
        self.vertices.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize, cap: Option<Rational>) {
        self.edges.push((from, to, cap));
    }
}

/// Builds the flow graph for `history` with the collector on `dc_nodes`.
pub fn build_graph(
    history: &RepairHistory,
    dc_nodes: &[usize],
    p: &BoundParams,
) -> Result<FlowGraph, FlowError> {
    p.validate()
        .map_err(|e| FlowError::InvalidCollector(e.to_string()))?;
    history.validate(p)?;
    let dc: BTreeSet<usize> = dc_nodes.iter().copied().collect();
    if dc.len() != p.k || dc_nodes.len() != p.k || dc.iter().any(|&v| v == 0 || v > p.n) {
        return Err(FlowError::InvalidCollector(format!(
            "need {} distinct nodes in 1..={}",
            p.k, p.n
        )));
    }

    let mut b = Builder {
        vertices: Vec::new(),
        edges: Vec::new(),
    };
    let source = b.vertex(Vertex::Source);
    // latest[v] = (out vertex, stage) of node v
    let mut latest: Vec<(usize, usize)> = vec![(0, 0); p.n + 1];
    for v in 1..=p.n {
        let out = b.vertex(Vertex::Out { node: v, stage: 0 });
        b.edge(source, out, Some(p.alpha.clone()));
        latest[v] = (out, 0);
    }
    for (i, st) in history.stages.iter().enumerate() {
        let stage = i + 1;
        let ins: Vec<usize> = st
            .regenerated
            .iter()
            .map(|&node| b.vertex(Vertex::In { node, stage }))
            .collect();
        let mids: Vec<usize> = st
            .regenerated
            .iter()
            .map(|&node| b.vertex(Vertex::Mid { node, stage }))
            .collect();
        for (j, hs) in st.helpers.iter().enumerate() {
            for &h in hs {
                b.edge(latest[h].0, ins[j], Some(p.beta1.clone()));
            }
        }
        for j in 0..ins.len() {
            for q in 0..mids.len() {
                let cap = if j == q { None } else { Some(p.beta2.clone()) };
                b.edge(ins[j], mids[q], cap);
            }
        }
        for (j, &node) in st.regenerated.iter().enumerate() {
            let out = b.vertex(Vertex::Out { node, stage });
            b.edge(mids[j], out, Some(p.alpha.clone()));
            latest[node] = (out, stage);
        }
    }
    let collector = b.vertex(Vertex::Collector);
    let mut by_stage: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &v in dc_nodes {
        b.edge(latest[v].0, collector, None);
        by_stage.entry(latest[v].1).or_default().push(v);
    }
    let finite: Rational = b.edges.iter().filter_map(|e| e.2.clone()).sum();
    let infinity = finite + Rational::from_integer(1.into());
    let edges = b
        .edges
        .into_iter()
        .map(|(from, to, cap)| Edge {
            from,
            to,
            infinite: cap.is_none(),
            capacity: cap.unwrap_or_else(|| infinity.clone()),
        })
        .collect();
    Ok(FlowGraph {
        vertices: b.vertices,
        edges,
        infinity,
        groups: by_stage
            .into_iter()
            .map(|(s, mut vs)| {
                vs.sort_unstable();
                (s, vs)
            })
            .collect(),
    })
}

/// History and collector realizing a cut type: nodes `1..=k` are regenerated in
/// consecutive groups of the nonzero parts, each stage topped up with `r - l_i`
/// non-collector nodes, and helpers are the already-regenerated collector nodes
/// first, then the lowest other indices.
pub fn adversarial_history(
    t: &CutType,
    p: &BoundParams,
) -> Result<(RepairHistory, Vec<usize>), FlowError> {
    let need = p.d + p.r;
    if p.n < need {
        return Err(FlowError::TooFewNodes { n: p.n, need });
    }
    let k = p.k;
    let mut stages = Vec::new();
    let mut next_dc = 1usize;
    for &l in t.parts().iter().filter(|&&l| l > 0) {
        let group: Vec<usize> = (next_dc..next_dc + l).collect();
        let fillers: Vec<usize> = (k + 1..=k + (p.r - l)).collect();
        let regenerated: Vec<usize> = group.iter().chain(&fillers).copied().collect();
        let earlier: Vec<usize> = (1..next_dc).collect();
        let mut helpers: Vec<usize> = earlier.iter().copied().take(p.d).collect();
        for v in 1..=p.n {
            if helpers.len() == p.d {
                break;
            }
            if v >= next_dc && !regenerated.contains(&v) && !helpers.contains(&v) {
                helpers.push(v);
            }
        }
        stages.push(RepairStage {
            helpers: vec![helpers; p.r],
            regenerated,
        });
        next_dc += l;
    }
    Ok((RepairHistory::new(stages), (1..=k).collect()))
}

/// Exact maximum flow from the source to the collector (Edmonds-Karp).
pub fn max_flow(g: &FlowGraph) -> Rational {
    let nv = g.vertices.len();
    let source = g.vertex_index(Vertex::Source).expect("source");
    let sink = g.vertex_index(Vertex::Collector).expect("collector");
    // residual[u][v], parallel edges merged
    let mut residual = vec![vec![Rational::zero(); nv]; nv];
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nv];
    for e in &g.edges {
        residual[e.from][e.to] += &e.capacity;
        adj[e.from].insert(e.to);
        adj[e.to].insert(e.from);
    }
    let mut total = Rational::zero();
    loop {
        let mut prev = vec![usize::MAX; nv];
        prev[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for &v in &adj[u] {
                if prev[v] == usize::MAX && residual[u][v] > Rational::zero() {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return total;
        }
        let mut bottleneck: Option<Rational> = None;
        let mut v = sink;
        while v != source {
            let u = prev[v];
            if bottleneck.as_ref().is_none_or(|b| residual[u][v] < *b) {
                bottleneck = Some(residual[u][v].clone());
            }
            v = u;
        }
        let bottleneck = bottleneck.expect("path has an edge");
        let mut v = sink;
        while v != source {
            let u = prev[v];
            residual[u][v] -= &bottleneck;
            residual[v][u] += &bottleneck;
            v = u;
        }
        total += bottleneck;
    }
}

/// How a group of collector nodes sits relative to the cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutKind {
    /// `in`, `mid` and `out` on the collector side: pay helper and exchange edges.
    First,
    /// only `out` on the collector side: pay `alpha` per node.
    Second,
}

/// Capacity of the cut whose sink side is the collector plus, per group, the
/// vertices selected by its kind.
pub fn evaluate_cut(g: &FlowGraph, kinds: &[CutKind]) -> Result<Rational, FlowError> {
    if kinds.len() != g.groups.len() {
        return Err(FlowError::MalformedCut {
            given: kinds.len(),
            groups: g.groups.len(),
        });
    }
    let mut sink_side: BTreeSet<Vertex> = BTreeSet::from([Vertex::Collector]);
    for ((stage, nodes), kind) in g.groups.iter().zip(kinds) {
        for &node in nodes {
            let stage = *stage;
            sink_side.insert(Vertex::Out { node, stage });
            if *kind == CutKind::First && stage > 0 {
                sink_side.insert(Vertex::In { node, stage });
                sink_side.insert(Vertex::Mid { node, stage });
            }
        }
    }
    Ok(g.edges
        .iter()
        .filter(|e| {
            !sink_side.contains(&g.vertices[e.from]) && sink_side.contains(&g.vertices[e.to])
        })
        .map(|e| e.capacity.clone())
        .sum())
}

/// Smallest `evaluate_cut` over every kind assignment.
pub fn best_structured_cut(g: &FlowGraph) -> Rational {
    let groups = g.groups.len();
    (0u64..1 << groups)
        .map(|mask| {
            let kinds: Vec<CutKind> = (0..groups)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        CutKind::First
                    } else {
                        CutKind::Second
                    }
                })
                .collect();
            evaluate_cut(g, &kinds).expect("kinds match groups")
        })
        .min()
        .expect("at least one assignment")
}
