//! The deterministic online algorithms built around the level-d subproblem:
//! FirstFit with a fixed palette, the unknown-size doubling wrapper, the
//! algorithm for locally ℓ-colorable graphs, its variant for k-colorable
//! graphs, and the competitive-ratio wrapper.
//!
//! The machinery is shared by three configurations of the same engine. The
//! level-d instance keeps a registry of spawned child subroutines (rows of
//! the arrays P and Q), a buffer D colored by an inner layer, and per-vertex
//! snapshots of the first γ_{d+1} S-neighbors. Arriving T-vertices route to
//! a live child when they share γ_{d+2} seed neighbors, otherwise enter D;
//! when the buffer stops being locally d-colorable a new row of children is
//! spawned from the witness and D restarts on fresh colors. A row whose
//! children have all aborted aborts the instance itself.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::bipartite::{Coins, LstState, SeededCoins};
use crate::ledger::{Color, ColorAllocator, ColoringLedger};
use crate::oracle::{
    chromatic_number, AbortCertificate, CertificateKind, SmallGraph, DEFAULT_ORACLE_CAP,
};

use crate::stream::{ArrivalStream, VertexId};

// ---------------------------------------------------------------------------
// Parameters and shared plumbing
// ---------------------------------------------------------------------------

/// Desk-scale tuning: every paper threshold n^x is computed as
/// max(1, ⌊scale·n^x⌋), so the spawn/abort control flow stays exercised at
/// small n.
#[derive(Debug, Clone, Serialize)]
pub struct AlgoParams {
    pub scale: f64,
    /// Cap for the exhaustive oracles used in witness verification.
    pub oracle_cap: usize,
    /// Cap on the size of witness sets searched incrementally.
    pub witness_cap: usize,
    /// Budget on candidate subsets examined per insertion (levels d ≥ 3).
    pub subset_budget: usize,
    /// Use ε = 6/(3k(k−1)−2) and the 4-colorable pipeline as base case.
    pub improved_epsilon: bool,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            scale: 1.0,
            oracle_cap: DEFAULT_ORACLE_CAP,
            witness_cap: 9,
            subset_budget: 30_000,
            improved_epsilon: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// What an aborting engine hands upward.
#[derive(Debug, Clone)]
pub enum Witness {
    /// Witness set X with its S-side part (locally-ℓ machinery).
    Set { x: Vec<VertexId>, x_s: Vec<VertexId> },
    /// Candidate family (1-color candidates machinery).
    Family(Vec<Vec<VertexId>>),
    /// Abort carries no witness (k-colorable machinery).
    None,
}

/// Result of feeding one T-vertex to an engine: the vertex always receives a
/// color; an abort reports it alongside.
#[derive(Debug, Clone)]
pub enum Step {
    Colored(Color),
    Aborted(Color, Witness),
}

impl Step {
    pub fn color(&self) -> Color {
        match self {
            Step::Colored(c) | Step::Aborted(c, _) => *c,
        }
    }
}

/// Mutable run context: the color allocator plus the ledger recording layer
/// ranges.
pub struct Cx<'a> {
    pub alloc: &'a mut ColorAllocator,
    pub ledger: &'a mut ColoringLedger,
}

impl Cx<'_> {
    pub fn fresh_range(&mut self, tag: &str, len: u32) -> std::ops::Range<Color> {
        let r = self.alloc.alloc_range(len);
        self.ledger.record_layer_range(tag, r.clone());
        r
    }

    pub fn fresh_color(&mut self, tag: &str) -> Color {
        self.fresh_range(tag, 1).start
    }
}

/// max(1, ⌊scale · n^exponent / 2^{log2_div}⌋) as a u64 threshold.
pub fn scaled_power(n: usize, exponent: f64, log2_div: f64, scale: f64) -> u64 {
    let v = scale * (n.max(1) as f64).powf(exponent) / 2f64.powf(log2_div);
    if v < 1.0 {
        1
    } else {
        v.floor() as u64
    }
}

/// Threshold schedule γ_0..γ_top for one subproblem family.
#[derive(Debug, Clone)]
pub struct GammaSchedule {
    values: Vec<u64>,
}

impl GammaSchedule {
    /// γ_i = n^{1−iε}/2^{i(i−1)/2} for the locally-ℓ machinery
    /// (ε = 2/(ℓ(ℓ−1)+2)) and the k-colorable machinery (ε = 2/(k(k−1)) or
    /// the improved value).
    pub fn standard(n: usize, top: u32, eps: f64, scale: f64) -> Self {
        let values = (0..=top)
            .map(|i| {
                let i = i as f64;
                scaled_power(n, 1.0 - i * eps, i * (i - 1.0) / 2.0, scale)
            })
            .collect();
        Self { values }
    }

    /// γ_i = |S|/(2^{i(i−1)/2}·n_eff^{iε}) for the fixed-S problems.
    pub fn fixed_s(s_size: usize, n_eff: f64, top: u32, eps: f64, scale: f64) -> Self {
        let values = (0..=top)
            .map(|i| {
                let i = i as f64;
                let v = scale * (s_size.max(1) as f64)
                    / (2f64.powf(i * (i - 1.0) / 2.0) * n_eff.powf(i * eps));
                if v < 1.0 {
                    1
                } else {
                    v.floor() as u64
                }
            })
            .collect();
        Self { values }
    }

    /// γ_i = n^{(16−3i)/17}/2^{i(i+1)/2} for the 1-color candidates problem.
    pub fn candidates(n: usize, scale: f64) -> Self {
        let values = (0..=3)
            .map(|i| {
                let i = i as f64;
                scaled_power(n, (16.0 - 3.0 * i) / 17.0, i * (i + 1.0) / 2.0, scale)
            })
            .collect();
        Self { values }
    }

    pub fn get(&self, i: u32) -> u64 {
        self.values[i as usize]
    }
}

// ---------------------------------------------------------------------------
// FirstFit
// ---------------------------------------------------------------------------

/// FirstFit over a fixed palette: each vertex takes the least palette color
/// absent among its already-colored neighbors, or reports unavailability.
/// Only this layer's own assignments matter; other layers hold disjoint
/// palettes.
pub struct FirstFitLayer {
    palette: std::ops::Range<Color>,
    own: HashMap<VertexId, Color>,
}

impl FirstFitLayer {
    pub fn new(cx: &mut Cx, tag: &str, budget: u32) -> Self {
        Self {
            palette: cx.fresh_range(tag, budget),
            own: HashMap::new(),
        }
    }

    pub fn budget(&self) -> u32 {
        self.palette.end - self.palette.start
    }

    pub fn try_color(&mut self, v: VertexId, neighbors: &[VertexId]) -> Option<Color> {
        let used: HashSet<Color> = neighbors
            .iter()
            .filter_map(|u| self.own.get(u).copied())
            .collect();
        let c = self.palette.clone().find(|c| !used.contains(c))?;
        self.own.insert(v, c);
        Some(c)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.own.contains_key(&v)
    }
}

/// Per-vertex outcome of a standalone FirstFit run.
pub fn first_fit(stream: &ArrivalStream, palette_size: u32) -> Vec<Option<Color>> {
    let mut alloc = ColorAllocator::new();
    let mut ledger = ColoringLedger::new();
    let mut cx = Cx {
        alloc: &mut alloc,
        ledger: &mut ledger,
    };
    let mut ff = FirstFitLayer::new(&mut cx, "firstfit", palette_size);
    (0..stream.len())
        .map(|v| ff.try_color(v, stream.neighbors(v)))
        .collect()
}

// ---------------------------------------------------------------------------
// Unknown-size doubling wrapper
// ---------------------------------------------------------------------------

/// Anything that colors an online stream vertex by vertex.
pub trait OnlineColorEngine {
    fn color_vertex(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError>;
}

/// Runs budget-f(t) inner instances in doubling epochs: epoch i covers the
/// next t_i vertices where t_i is the largest t with f(t) ≤ 2^i, on a fresh
/// inner instance with fresh colors. At any prefix length m the total colors
/// spent stay below 4·f(m).
pub struct DoublingWrapper {
    factory: Box<dyn FnMut(usize) -> Box<dyn OnlineColorEngine>>,
    budget_f: Box<dyn Fn(usize) -> u64>,
    epoch_index: u32,
    epoch_remaining: usize,
    inner: Option<Box<dyn OnlineColorEngine>>,
    epoch_members: HashSet<VertexId>,
}

impl DoublingWrapper {
    pub fn new(
        factory: Box<dyn FnMut(usize) -> Box<dyn OnlineColorEngine>>,
        budget_f: Box<dyn Fn(usize) -> u64>,
    ) -> Self {
        Self {
            factory,
            budget_f,
            epoch_index: 0,
            epoch_remaining: 0,
            inner: None,
            epoch_members: HashSet::new(),
        }
    }

    /// Largest t with f(t) ≤ bound, assuming f is monotone with unit steps.
    fn epoch_length(&self, bound: u64) -> usize {
        let f = &self.budget_f;
        if f(1) > bound {
            return 0;
        }
        let mut hi = 1usize;
        while f(hi) <= bound && hi < usize::MAX / 4 {
            hi *= 2;
        }
        let mut lo = hi / 2;
        // invariant: f(lo) <= bound < f(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if f(mid) <= bound {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

impl OnlineColorEngine for DoublingWrapper {
    fn color_vertex(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        while self.epoch_remaining == 0 {
            let t = self.epoch_length(1u64 << self.epoch_index);
            self.epoch_index += 1;
            if t == 0 {
                continue;
            }
            self.epoch_remaining = t;
            self.inner = Some((self.factory)(t));
            self.epoch_members.clear();
        }
        self.epoch_remaining -= 1;
        // edges into earlier epochs never conflict: colors are never reused
        let inner_nbrs: Vec<VertexId> = neighbors
            .iter()
            .copied()
            .filter(|u| self.epoch_members.contains(u))
            .collect();
        self.epoch_members.insert(v);
        self.inner
            .as_mut()
            .unwrap()
            .color_vertex(cx, v, &inner_nbrs)
    }
}

// ---------------------------------------------------------------------------
// Inner buffer colorers (the Locally(d) layers)
// ---------------------------------------------------------------------------

/// The layer coloring a buffer assumed locally d-colorable. Level 0 spends a
/// fresh color per vertex, level 1 shares a single class, level 2 runs the
/// two-colors-per-bucket greedy, and levels ≥ 3 recurse into the full
/// locally-d algorithm behind a doubling wrapper.
enum LocalColorer {
    Fresh,
    Single(Option<Color>),
    Buckets(BucketGreedy),
    Recursive(Box<DoublingWrapper>),
}

impl LocalColorer {
    fn new(d: u32, n: usize, params: &AlgoParams) -> Self {
        match d {
            0 => LocalColorer::Fresh,
            1 => LocalColorer::Single(None),
            2 => LocalColorer::Buckets(BucketGreedy::default()),
            _ => LocalColorer::Recursive(Box::new(locally_engine_unknown_n(d, n, params))),
        }
    }

    fn color(
        &mut self,
        cx: &mut Cx,
        tag: &str,
        v: VertexId,
        nbrs_in_buffer: &[VertexId],
    ) -> Result<Color, EngineError> {
        match self {
            LocalColorer::Fresh => Ok(cx.fresh_color(tag)),
            LocalColorer::Single(slot) => {
                let c = match slot {
                    Some(c) => *c,
                    None => {
                        let c = cx.fresh_color(tag);
                        *slot = Some(c);
                        c
                    }
                };
                if nbrs_in_buffer.is_empty() {
                    Ok(c)
                } else {
                    // an edge inside a level-1 buffer: the caller is about to
                    // spawn from this witness; the vertex still needs a color
                    Ok(cx.fresh_color(tag))
                }
            }
            LocalColorer::Buckets(b) => Ok(b.place(cx, tag, v, nbrs_in_buffer)),
            LocalColorer::Recursive(engine) => {
                match engine.color_vertex(cx, v, nbrs_in_buffer)? {
                    // inner aborts are absorbed: the buffer's own witness
                    // detection decides what happens next
                    step => Ok(step.color()),
                }
            }
        }
    }
}

/// Greedy bipartite bucket coloring: each bucket owns two colors; a vertex
/// joins the first bucket where its in-bucket neighbors occupy at most one
/// class and takes the other class, else opens a new bucket.
#[derive(Default)]
struct BucketGreedy {
    buckets: Vec<Bucket>,
}

struct Bucket {
    class_of: HashMap<VertexId, u8>,
    colors: [Option<Color>; 2],
}

impl BucketGreedy {
    fn place(&mut self, cx: &mut Cx, tag: &str, v: VertexId, nbrs: &[VertexId]) -> Color {
        for bucket in &mut self.buckets {
            let mut seen = [false, false];
            for u in nbrs {
                if let Some(&cls) = bucket.class_of.get(u) {
                    seen[cls as usize] = true;
                }
            }
            if seen[0] && seen[1] {
                continue;
            }
            let cls = if seen[0] { 1 } else { 0 };
            bucket.class_of.insert(v, cls);
            let slot = &mut bucket.colors[cls as usize];
            let c = match slot {
                Some(c) => *c,
                None => {
                    let c = cx.fresh_color(tag);
                    *slot = Some(c);
                    c
                }
            };
            return c;
        }
        let mut bucket = Bucket {
            class_of: HashMap::new(),
            colors: [None, None],
        };
        bucket.class_of.insert(v, 0);
        let c = cx.fresh_color(tag);
        bucket.colors[0] = Some(c);
        self.buckets.push(bucket);
        c
    }
}

// ---------------------------------------------------------------------------
// Witness detection inside buffers
// ---------------------------------------------------------------------------

/// Adjacency of the current buffer (or base-case T).
#[derive(Default)]
pub(crate) struct BufferGraph {
    pub members: Vec<VertexId>,
    pub index: HashMap<VertexId, usize>,
    pub adj: Vec<Vec<usize>>,
}

impl BufferGraph {
    pub fn clear(&mut self) {
        self.members.clear();
        self.index.clear();
        self.adj.clear();
    }

    pub fn insert(&mut self, v: VertexId, neighbors: &[VertexId]) -> Vec<VertexId> {
        let idx = self.members.len();
        let nbr_idx: Vec<usize> = neighbors
            .iter()
            .filter_map(|u| self.index.get(u).copied())
            .collect();
        let nbr_ids: Vec<VertexId> = nbr_idx.iter().map(|&i| self.members[i]).collect();
        self.members.push(v);
        self.index.insert(v, idx);
        self.adj.push(nbr_idx.clone());
        for i in nbr_idx {
            self.adj[i].push(idx);
        }
        nbr_ids
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
}

/// Finds a small witness D' containing structure of chromatic number above
/// `d` after inserting the newest vertex, or None. Complete for d ≤ 2 up to
/// the cap; for d ≥ 3 a budgeted search over the new vertex's neighborhood.
fn find_chromatic_witness(
    g: &BufferGraph,
    d: u32,
    cap: usize,
    subset_budget: usize,
) -> Option<Vec<VertexId>> {
    let newest = g.len() - 1;
    match d {
        0 => Some(vec![g.members[newest]]),
        1 => g.adj[newest]
            .first()
            .map(|&u| vec![g.members[u.min(newest)], g.members[u.max(newest)]]),
        2 => find_short_odd_cycle(g, newest, cap).map(|cycle| {
            let mut ids: Vec<VertexId> = cycle.into_iter().map(|i| g.members[i]).collect();
            ids.sort_unstable();
            ids
        }),
        _ => find_dense_witness(g, newest, d, cap, subset_budget),
    }
}

/// Shortest odd cycle reachable from `start`, as vertex indices, if its
/// length fits the cap. BFS parity layers: an edge inside a layer closes an
/// odd cycle through the two tree paths.
fn find_short_odd_cycle(g: &BufferGraph, start: usize, cap: usize) -> Option<Vec<usize>> {
    let n = g.len();
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    depth[start] = 0;
    queue.push_back(start);
    let mut order = Vec::new();
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &w in &g.adj[u] {
            if depth[w] == usize::MAX {
                depth[w] = depth[u] + 1;
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut best: Option<Vec<usize>> = None;
    for &u in &order {
        for &w in &g.adj[u] {
            if u < w && depth[u] == depth[w] {
                // walk up to the common ancestor
                let (mut a, mut b) = (u, w);
                let mut left = vec![a];
                let mut right = vec![b];
                while a != b {
                    a = parent[a];
                    b = parent[b];
                    left.push(a);
                    right.push(b);
                }
                right.pop();
                let mut cycle = left;
                cycle.extend(right.into_iter().rev());
                if cycle.len() <= cap && best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
                    best = Some(cycle);
                }
            }
        }
    }
    best
}

/// Advances `combo` to the next size-k subset of 0..pool_len in
/// lexicographic order; false when exhausted.
fn next_combination(combo: &mut [usize], pool_len: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] + (k - i) <= pool_len {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Budgeted search for a subset of the newest vertex's neighborhood whose
/// union with it has chromatic number above d, smallest subsets first.
fn find_dense_witness(
    g: &BufferGraph,
    newest: usize,
    d: u32,
    cap: usize,
    subset_budget: usize,
) -> Option<Vec<VertexId>> {
    let pool: Vec<usize> = g.adj[newest].clone();
    let mut budget = subset_budget;
    // a witness of chromatic number d+1 has at least d+1 vertices, d of
    // which come from the pool
    for size in (d as usize)..=cap.saturating_sub(1).min(pool.len()) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if budget == 0 {
                return None;
            }
            budget -= 1;
            let mut verts: Vec<usize> = combo.iter().map(|&i| pool[i]).collect();
            verts.push(newest);
            let edges: Vec<(usize, usize)> = verts
                .iter()
                .enumerate()
                .flat_map(|(a, &u)| {
                    verts
                        .iter()
                        .enumerate()
                        .skip(a + 1)
                        .filter(move |&(_, &w)| g.adj[u].contains(&w))
                        .map(move |(b, _)| (a, b))
                })
                .collect();
            let sub = SmallGraph::new(verts.len(), &edges).expect("small");
            if chromatic_number(&sub, cap + 1)
                .map(|chi| chi > d)
                .unwrap_or(false)
            {
                let mut ids: Vec<VertexId> = verts.into_iter().map(|i| g.members[i]).collect();
                ids.sort_unstable();
                return Some(ids);
            }
            if !next_combination(&mut combo, pool.len() - 1) {
                break;
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// The level-d subproblem engine
// ---------------------------------------------------------------------------

/// Which family of the subproblem machinery an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubKind {
    /// Locally ℓ-colorable: witnesses are vertex sets, base level ℓ−1.
    General { ell: u32 },
    /// k-colorable graphs: aborts carry no witness, base level k−1.
    Plus { k: u32 },
    /// 1-color candidates: aborts carry set families, base level 2.
    Cand,
}

impl SubKind {
    fn base_level(&self) -> u32 {
        match self {
            SubKind::General { ell } => ell - 1,
            SubKind::Plus { k } => k - 1,
            SubKind::Cand => 2,
        }
    }
}

pub(crate) struct Child {
    seed: Vec<VertexId>,
    node: Box<SubNode>,
    aborted: Option<Witness>,
}

pub(crate) struct Row {
    children: Vec<Child>,
    q: Vec<VertexId>,
}

enum SubNode {
    Inner(SubproblemEngine),
    GeneralBase(GeneralBase),
    LstBase(LstBase),
    KBase(KBase),
    CandBase(CandBase),
}

impl SubNode {
    fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        match self {
            SubNode::Inner(e) => e.t_arrive(cx, v, neighbors),
            SubNode::GeneralBase(b) => b.t_arrive(cx, v, neighbors),
            SubNode::LstBase(b) => b.t_arrive(cx, v, neighbors),
            SubNode::KBase(b) => b.t_arrive(cx, v, neighbors),
            SubNode::CandBase(b) => b.t_arrive(cx, v, neighbors),
        }
    }


    fn collect_audit(&self, out: &mut Vec<InstanceAudit>) {
        if let SubNode::Inner(e) = self {
            e.collect_audit(out)
        }
    }
}

/// Audit snapshot of one subproblem instance's registry, for the invariant
/// suites: surviving row representatives must overlap in at most γ_{d+2}
/// vertices.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceAudit {
    pub level: u32,
    pub gamma_route: u64,
    pub rows: Vec<Vec<(bool, Vec<VertexId>)>>,
}

pub struct SubproblemEngine {
    kind: SubKind,
    d: u32,
    n: usize,
    params: AlgoParams,
    gamma: GammaSchedule,
    tag: String,
    /// S in arrival order with membership index; fixed instances never grow.
    s_order: Vec<VertexId>,
    s_index: HashMap<VertexId, usize>,
    fixed_s: bool,
    /// First γ_{d+1} S-neighbors of each T-vertex, snapshotted at arrival.
    t_nprime: HashMap<VertexId, Vec<VertexId>>,
    rows: Vec<Row>,
    dbuf: BufferGraph,
    colorer: LocalColorer,
    epoch: u32,
    t_count: usize,
    aborted: bool,
}

impl SubproblemEngine {
    pub fn new(
        kind: SubKind,
        d: u32,
        n: usize,
        params: &AlgoParams,
        gamma: GammaSchedule,
        fixed_s: Option<Vec<VertexId>>,
        tag: String,
    ) -> Self {
        debug_assert!(d < kind.base_level(), "base levels use dedicated nodes");
        let (s_order, s_index, fixed) = match fixed_s {
            Some(order) => {
                let index = order
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, i))
                    .collect::<HashMap<_, _>>();
                (order, index, true)
            }
            None => (Vec::new(), HashMap::new(), false),
        };
        let colorer = LocalColorer::new(d, n, params);
        Self {
            kind,
            d,
            n,
            params: params.clone(),
            gamma,
            tag,
            s_order,
            s_index,
            fixed_s: fixed,
            t_nprime: HashMap::new(),
            rows: Vec::new(),
            dbuf: BufferGraph::default(),
            colorer,
            epoch: 0,
            t_count: 0,
            aborted: false,
        }
    }

    pub fn s_arrived(&mut self, v: VertexId) {
        debug_assert!(!self.fixed_s, "fixed-S instances take no S events");
        let idx = self.s_order.len();
        self.s_order.push(v);
        self.s_index.insert(v, idx);
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted
    }

    pub fn t_size(&self) -> usize {
        self.t_count
    }

    /// S-neighbors of v in S-arrival order.
    fn s_neighbors(&self, neighbors: &[VertexId]) -> Vec<VertexId> {
        let mut with_idx: Vec<(usize, VertexId)> = neighbors
            .iter()
            .filter_map(|&u| self.s_index.get(&u).map(|&i| (i, u)))
            .collect();
        with_idx.sort_unstable();
        with_idx.into_iter().map(|(_, u)| u).collect()
    }

    fn spawn_child(&mut self, cx_tag: &str, q: VertexId, row_idx: usize, child_idx: usize) -> Child {
        let seed = self.t_nprime[&q].clone();
        let child_tag = format!("{cx_tag}/r{row_idx}c{child_idx}");
        let child_level = self.d + 1;
        let node = if child_level == self.kind.base_level() {
            match self.kind {
                SubKind::General { ell } => Box::new(SubNode::GeneralBase(GeneralBase::new(
                    ell,
                    self.n,
                    &self.params,
                    seed.clone(),
                    child_tag,
                ))),
                SubKind::Plus { k } => Box::new(make_plus_base(
                    k,
                    self.n,
                    &self.params,
                    seed.clone(),
                    child_tag,
                )),
                SubKind::Cand => Box::new(SubNode::CandBase(CandBase::new(
                    self.n,
                    &self.params,
                    seed.clone(),
                    child_tag,
                ))),
            }
        } else {
            Box::new(SubNode::Inner(SubproblemEngine::new(
                self.kind,
                child_level,
                self.n,
                &self.params,
                self.gamma.clone(),
                Some(seed.clone()),
                child_tag,
            )))
        };
        Child {
            seed,
            node,
            aborted: None,
        }
    }

    pub fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.aborted {
            return Err(EngineError::Internal(format!(
                "{}: t-vertex after abort",
                self.tag
            )));
        }
        self.t_count += 1;
        let ns = self.s_neighbors(neighbors);
        let need = self.gamma.get(self.d + 1);
        if (ns.len() as u64) < need {
            return Err(EngineError::Precondition(format!(
                "{}: |N_S(v)| = {} below γ_{} = {}",
                self.tag,
                ns.len(),
                self.d + 1,
                need
            )));
        }
        let nprime: Vec<VertexId> = ns.into_iter().take(need as usize).collect();
        let nprime_set: HashSet<VertexId> = nprime.iter().copied().collect();
        self.t_nprime.insert(v, nprime);

        // route to the lowest live child sharing γ_{d+2} seed vertices
        let route_need = self.gamma.get(self.d + 2);
        let mut routed: Option<(usize, usize)> = None;
        'outer: for (i, row) in self.rows.iter().enumerate() {
            for (j, child) in row.children.iter().enumerate() {
                if child.aborted.is_some() {
                    continue;
                }
                let overlap = child
                    .seed
                    .iter()
                    .filter(|u| nprime_set.contains(u))
                    .count() as u64;
                if overlap >= route_need {
                    routed = Some((i, j));
                    break 'outer;
                }
            }
        }

        let color = if let Some((i, j)) = routed {
            let child = &mut self.rows[i].children[j];
            match child.node.t_arrive(cx, v, neighbors)? {
                Step::Colored(c) => c,
                Step::Aborted(c, w) => {
                    child.aborted = Some(w);
                    c
                }
            }
        } else {
            // buffer path: insert into D, color with the inner layer, then
            // look for a fresh witness
            let buffer_nbrs = self.dbuf.insert(v, neighbors);
            let tag = format!("{}/D{}", self.tag, self.epoch);
            let c = self.colorer.color(cx, &tag, v, &buffer_nbrs)?;
            let cap = self
                .params
                .witness_cap
                .min((1usize << (1 << self.d.min(4))) - 1);
            if let Some(witness) =
                find_chromatic_witness(&self.dbuf, self.d, cap, self.params.subset_budget)
            {
                let row_idx = self.rows.len();
                let mut children = Vec::with_capacity(witness.len());
                for (cidx, &q) in witness.iter().enumerate() {
                    children.push(self.spawn_child(&self.tag.clone(), q, row_idx, cidx));
                }
                self.rows.push(Row {
                    children,
                    q: witness,
                });
                self.dbuf.clear();
                self.epoch += 1;
                self.colorer = LocalColorer::new(self.d, self.n, &self.params);
            }
            c
        };

        // a row whose children all aborted aborts this instance
        for row in &self.rows {
            if !row.children.is_empty() && row.children.iter().all(|c| c.aborted.is_some()) {
                self.aborted = true;
                let witness = self.assemble_row_witness(row);
                return Ok(Step::Aborted(color, witness));
            }
        }
        Ok(Step::Colored(color))
    }

    fn assemble_row_witness(&self, row: &Row) -> Witness {
        match self.kind {
            SubKind::Plus { .. } => Witness::None,
            SubKind::Cand => {
                let mut family = Vec::new();
                for child in &row.children {
                    if let Some(Witness::Family(f)) = &child.aborted {
                        family.extend(f.iter().cloned());
                    }
                }
                Witness::Family(family)
            }
            SubKind::General { .. } => {
                let mut x: Vec<VertexId> = Vec::new();
                let mut x_s: Vec<VertexId> = Vec::new();
                for child in &row.children {
                    if let Some(Witness::Set { x: cx_, x_s: cs }) = &child.aborted {
                        x.extend(cx_.iter().copied());
                        x_s.extend(cs.iter().copied());
                    }
                }
                x.extend(row.q.iter().copied());
                x.sort_unstable();
                x.dedup();
                x_s.sort_unstable();
                x_s.dedup();
                Witness::Set { x, x_s }
            }
        }
    }

    pub fn collect_audit(&self, out: &mut Vec<InstanceAudit>) {
        out.push(InstanceAudit {
            level: self.d,
            gamma_route: self.gamma.get(self.d + 2),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    r.children
                        .iter()
                        .map(|c| (c.aborted.is_none(), c.seed.clone()))
                        .collect()
                })
                .collect(),
        });
        for row in &self.rows {
            for child in &row.children {
                child.node.collect_audit(out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Base cases
// ---------------------------------------------------------------------------

/// Base case of the locally-ℓ machinery (level ℓ−1): colors T with the
/// locally-(ℓ−1) layer and aborts with X = X_S ∪ X_T once T stops being
/// locally (ℓ−1)-colorable, where X_S picks one stored S-neighbor per
/// witness vertex.
struct GeneralBase {
    ell: u32,
    params: AlgoParams,
    tag: String,
    s_set: HashSet<VertexId>,
    tgraph: BufferGraph,
    colorer: LocalColorer,
    up: HashMap<VertexId, VertexId>,
    aborted: bool,
}

impl GeneralBase {
    fn new(ell: u32, n: usize, params: &AlgoParams, seed: Vec<VertexId>, tag: String) -> Self {
        Self {
            ell,
            params: params.clone(),
            tag,
            s_set: seed.into_iter().collect(),
            tgraph: BufferGraph::default(),
            colorer: LocalColorer::new(ell - 1, n, params),
            up: HashMap::new(),
            aborted: false,
        }
    }

    /// Growing-S constructor for the ℓ = 1 top-level case.
    fn new_growing(ell: u32, n: usize, params: &AlgoParams, tag: String) -> Self {
        Self::new(ell, n, params, Vec::new(), tag)
    }

    fn s_arrived(&mut self, v: VertexId) {
        self.s_set.insert(v);
    }

    fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.aborted {
            return Err(EngineError::Internal(format!(
                "{}: t-vertex after abort",
                self.tag
            )));
        }
        if let Some(&up) = neighbors.iter().find(|u| self.s_set.contains(u)) {
            self.up.insert(v, up);
        }
        let buffer_nbrs = self.tgraph.insert(v, neighbors);
        let c = self.colorer.color(cx, &self.tag, v, &buffer_nbrs)?;
        let d = self.ell - 1;
        let cap = self
            .params
            .witness_cap
            .min((1usize << (1 << d.min(4))) - 1);
        if let Some(x_t) =
            find_chromatic_witness(&self.tgraph, d, cap, self.params.subset_budget)
        {
            self.aborted = true;
            let mut x_s: Vec<VertexId> = x_t
                .iter()
                .filter_map(|t| self.up.get(t).copied())
                .collect();
            x_s.sort_unstable();
            x_s.dedup();
            let mut x = x_t;
            x.extend(x_s.iter().copied());
            x.sort_unstable();
            x.dedup();
            return Ok(Step::Aborted(c, Witness::Set { x, x_s }));
        }
        Ok(Step::Colored(c))
    }
}

/// Base case k−1 = 2 of the k-colorable machinery: the component-merging
/// bipartite algorithm with a budget monitor; exceeding 2·log2(|T|+1) colors
/// proves T is not bipartite, so S was not a 1-color set.
struct LstBase {
    state: LstState,
    tag: String,
    logical_to_physical: Vec<Color>,
    members: HashSet<VertexId>,
    t_count: usize,
    aborted: bool,
}

impl LstBase {
    fn new(tag: String) -> Self {
        Self {
            state: LstState::new(false),
            tag,
            logical_to_physical: Vec::new(),
            members: HashSet::new(),
            t_count: 0,
            aborted: false,
        }
    }

    fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.aborted {
            return Err(EngineError::Internal(format!(
                "{}: t-vertex after abort",
                self.tag
            )));
        }
        self.t_count += 1;
        let inner: Vec<VertexId> = neighbors
            .iter()
            .copied()
            .filter(|u| self.members.contains(u))
            .collect();
        self.members.insert(v);
        struct NoCoins;
        impl Coins for NoCoins {
            fn flip(&mut self) -> bool {
                unreachable!()
            }
        }
        let (logical, _lvl) = self.state.step(v, &inner, &mut NoCoins);
        while self.logical_to_physical.len() < logical as usize {
            let c = cx.fresh_color(&self.tag);
            self.logical_to_physical.push(c);
        }
        let color = self.logical_to_physical[(logical - 1) as usize];
        let bound = 2.0 * ((self.t_count + 1) as f64).log2();
        if logical as f64 > bound + 1e-9 {
            self.aborted = true;
            return Ok(Step::Aborted(color, Witness::None));
        }
        Ok(Step::Colored(color))
    }
}

/// Base case k−1 ≥ 3 of the k-colorable machinery: the full (k−1)-colorable
/// pipeline behind a doubling wrapper, aborting when the inner run aborts.
struct KBase {
    inner: DoublingWrapper,
    aborted: bool,
    tag: String,
}

impl KBase {
    fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.aborted {
            return Err(EngineError::Internal(format!(
                "{}: t-vertex after abort",
                self.tag
            )));
        }
        match self.inner.color_vertex(cx, v, neighbors)? {
            Step::Colored(c) => Ok(Step::Colored(c)),
            Step::Aborted(c, _) => {
                self.aborted = true;
                Ok(Step::Aborted(c, Witness::None))
            }
        }
    }
}

fn make_plus_base(
    k: u32,
    n: usize,
    params: &AlgoParams,
    _seed: Vec<VertexId>,
    tag: String,
) -> SubNode {
    if k - 1 == 2 {
        SubNode::LstBase(LstBase::new(tag))
    } else {
        SubNode::KBase(KBase {
            inner: kcolor_engine_unknown_n(k - 1, n, params, tag.clone()),
            aborted: false,
            tag,
        })
    }
}

/// Base case d = 2 of the 1-color candidates machinery: colors T with the
/// bucket greedy and aborts with the family {N_S(c₁), …, N_S(c_m)} when a
/// C₃ or C₅ closes inside T.
struct CandBase {
    params: AlgoParams,
    tag: String,
    s_set: HashSet<VertexId>,
    s_nbrs: HashMap<VertexId, Vec<VertexId>>,
    tgraph: BufferGraph,
    colorer: BucketGreedy,
    aborted: bool,
    family_floor: u64,
}

impl CandBase {
    fn new(n: usize, params: &AlgoParams, seed: Vec<VertexId>, tag: String) -> Self {
        Self {
            params: params.clone(),
            tag,
            s_set: seed.into_iter().collect(),
            s_nbrs: HashMap::new(),
            tgraph: BufferGraph::default(),
            colorer: BucketGreedy::default(),
            aborted: false,
            family_floor: scaled_power(n, 7.0 / 17.0, 6.0, params.scale),
        }
    }

    fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.aborted {
            return Err(EngineError::Internal(format!(
                "{}: t-vertex after abort",
                self.tag
            )));
        }
        let into_s: Vec<VertexId> = neighbors
            .iter()
            .copied()
            .filter(|u| self.s_set.contains(u))
            .collect();
        self.s_nbrs.insert(v, into_s);
        let buffer_nbrs = self.tgraph.insert(v, neighbors);
        let c = self.colorer.place(cx, &self.tag, v, &buffer_nbrs);
        if let Some(cycle) = find_c3_or_c5(&self.tgraph) {
            self.aborted = true;
            let family: Vec<Vec<VertexId>> = cycle
                .into_iter()
                .map(|i| self.s_nbrs[&self.tgraph.members[i]].clone())
                .collect();
            debug_assert!(
                self.family_floor <= 1
                    || family.iter().all(|f| f.len() as u64 >= self.family_floor.min(1)),
                "family floor"
            );
            let _ = &self.params;
            return Ok(Step::Aborted(c, Witness::Family(family)));
        }
        Ok(Step::Colored(c))
    }
}

/// A triangle or 5-cycle through the newest vertex, as buffer indices.
fn find_c3_or_c5(g: &BufferGraph) -> Option<Vec<usize>> {
    let v = g.len() - 1;
    let nv = &g.adj[v];
    // C3: two adjacent neighbors
    for (ai, &a) in nv.iter().enumerate() {
        for &b in nv.iter().skip(ai + 1) {
            if g.adj[a].contains(&b) {
                return Some(vec![v, a, b]);
            }
        }
    }
    // C5: neighbors a, b joined by a 3-edge path a–x–y–b avoiding v
    for &a in nv {
        for &b in nv {
            if a == b {
                continue;
            }
            for &x in &g.adj[a] {
                if x == v || x == b || x == a {
                    continue;
                }
                for &y in &g.adj[x] {
                    if y == v || y == a || y == x {
                        continue;
                    }
                    if y != b && g.adj[y].contains(&b) {
                        return Some(vec![v, a, x, y, b]);
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Top-level engines
// ---------------------------------------------------------------------------

/// The locally-ℓ-colorable algorithm: FirstFit on an n^{1−ε} palette, with
/// overflow vertices driven through the level-0 subproblem.
pub struct LocallyLEngine {
    ell: u32,
    ff: FirstFitLayer,
    else_layer: ElseLayer,
    aborted: bool,
}

enum ElseLayer {
    Sub(SubproblemEngine),
    Base(GeneralBase),
}

impl LocallyLEngine {
    pub fn new(cx: &mut Cx, ell: u32, n: usize, params: &AlgoParams, tag: &str) -> Self {
        let eps = 2.0 / ((ell * (ell - 1)) as f64 + 2.0);
        let budget = scaled_power(n, 1.0 - eps, 0.0, params.scale) as u32;
        let ff = FirstFitLayer::new(cx, &format!("{tag}/ff"), budget);
        let gamma = GammaSchedule::standard(n, ell, eps, params.scale);
        let else_layer = if ell == 1 {
            ElseLayer::Base(GeneralBase::new_growing(
                1,
                n,
                params,
                format!("{tag}/else"),
            ))
        } else {
            ElseLayer::Sub(SubproblemEngine::new(
                SubKind::General { ell },
                0,
                n,
                params,
                gamma,
                None,
                format!("{tag}/else"),
            ))
        };
        Self {
            ell,
            ff,
            else_layer,
            aborted: false,
        }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn audit(&self) -> Vec<InstanceAudit> {
        let mut out = Vec::new();
        if let ElseLayer::Sub(s) = &self.else_layer {
            s.collect_audit(&mut out);
        }
        out
    }
}

impl OnlineColorEngine for LocallyLEngine {
    fn color_vertex(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.aborted {
            return Err(EngineError::Internal("coloring after abort".into()));
        }
        if let Some(c) = self.ff.try_color(v, neighbors) {
            match &mut self.else_layer {
                ElseLayer::Sub(s) => s.s_arrived(v),
                ElseLayer::Base(b) => b.s_arrived(v),
            }
            return Ok(Step::Colored(c));
        }
        let step = match &mut self.else_layer {
            ElseLayer::Sub(s) => s.t_arrive(cx, v, neighbors)?,
            ElseLayer::Base(b) => b.t_arrive(cx, v, neighbors)?,
        };
        if matches!(step, Step::Aborted(..)) {
            self.aborted = true;
        }
        Ok(step)
    }
}

/// Locally-d engine behind the doubling wrapper, for use as an inner layer
/// when the instance size is not known in advance.
fn locally_engine_unknown_n(d: u32, _outer_n: usize, params: &AlgoParams) -> DoublingWrapper {
    let params = params.clone();
    let eps = 2.0 / ((d * (d - 1)) as f64 + 2.0);
    let scale = params.scale;
    DoublingWrapper::new(
        Box::new(move |t| {
            Box::new(DeferredLocally {
                ell: d,
                n: t,
                params: params.clone(),
                inner: None,
            })
        }),
        Box::new(move |t| scaled_power(t, 1.0 - eps, 0.0, scale)),
    )
}

/// Lazily built inner engine: the first vertex triggers construction so the
/// palette range is only allocated for epochs that actually start.
struct DeferredLocally {
    ell: u32,
    n: usize,
    params: AlgoParams,
    inner: Option<LocallyLEngine>,
}

impl OnlineColorEngine for DeferredLocally {
    fn color_vertex(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.inner.is_none() {
            self.inner = Some(LocallyLEngine::new(
                cx,
                self.ell,
                self.n,
                &self.params,
                &format!("locally{}", self.ell),
            ));
        }
        let step = self.inner.as_mut().unwrap().color_vertex(cx, v, neighbors)?;
        // inner aborts surface as fresh unique colors; the caller's witness
        // detection owns the structural decisions
        Ok(Step::Colored(step.color()))
    }
}

/// The k-colorable pipeline: FirstFit plus the level-0 subproblem with the
/// (k−d)-color-set semantics. k = 2 delegates to the bipartite algorithm.
pub struct KColorEngine {
    inner: KColorInner,
    aborted: bool,
}

enum KColorInner {
    Lst(LstBase),
    Pipeline {
        ff: FirstFitLayer,
        sub: SubproblemEngine,
    },
}

impl KColorEngine {
    pub fn new(cx: &mut Cx, k: u32, n: usize, params: &AlgoParams, tag: &str) -> Self {
        assert!(k >= 2);
        if k == 2 {
            return Self {
                inner: KColorInner::Lst(LstBase::new(format!("{tag}/lst"))),
                aborted: false,
            };
        }
        let eps = if params.improved_epsilon {
            6.0 / ((3 * k * (k - 1) - 2) as f64)
        } else {
            2.0 / ((k * (k - 1)) as f64)
        };
        let budget = scaled_power(n, 1.0 - eps, 0.0, params.scale) as u32;
        let ff = FirstFitLayer::new(cx, &format!("{tag}/ff"), budget);
        let gamma = GammaSchedule::standard(n, k, eps, params.scale);
        let sub = if k - 1 == 1 {
            unreachable!("k >= 3 here")
        } else {
            SubproblemEngine::new(
                SubKind::Plus { k },
                0,
                n,
                params,
                gamma,
                None,
                format!("{tag}/else"),
            )
        };
        Self {
            inner: KColorInner::Pipeline { ff, sub },
            aborted: false,
        }
    }

    pub fn audit(&self) -> Vec<InstanceAudit> {
        let mut out = Vec::new();
        if let KColorInner::Pipeline { sub, .. } = &self.inner {
            sub.collect_audit(&mut out);
        }
        out
    }
}

impl OnlineColorEngine for KColorEngine {
    fn color_vertex(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.aborted {
            return Err(EngineError::Internal("coloring after abort".into()));
        }
        let step = match &mut self.inner {
            KColorInner::Lst(l) => {
                // the budget monitor never trips on bipartite inputs; on
                // other inputs running past it is still proper
                match l.t_arrive(cx, v, neighbors)? {
                    Step::Aborted(c, _) => Step::Colored(c),
                    s => s,
                }
            }
            KColorInner::Pipeline { ff, sub } => {
                if let Some(c) = ff.try_color(v, neighbors) {
                    sub.s_arrived(v);
                    Step::Colored(c)
                } else {
                    sub.t_arrive(cx, v, neighbors)?
                }
            }
        };
        if matches!(step, Step::Aborted(..)) {
            self.aborted = true;
        }
        Ok(step)
    }
}

fn kcolor_engine_unknown_n(k: u32, _outer_n: usize, params: &AlgoParams, tag: String) -> DoublingWrapper {
    let params_f = params.clone();
    let eps = 2.0 / ((k * (k - 1)) as f64);
    let scale = params.scale;
    DoublingWrapper::new(
        Box::new(move |t| {
            Box::new(DeferredKColor {
                k,
                n: t,
                params: params_f.clone(),
                tag: tag.clone(),
                inner: None,
            })
        }),
        Box::new(move |t| {
            if k == 2 {
                (2.0 * ((t + 1) as f64).log2()).ceil() as u64
            } else {
                scaled_power(t, 1.0 - eps, 0.0, scale)
            }
        }),
    )
}

struct DeferredKColor {
    k: u32,
    n: usize,
    params: AlgoParams,
    tag: String,
    inner: Option<KColorEngine>,
}

impl OnlineColorEngine for DeferredKColor {
    fn color_vertex(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        if self.inner.is_none() {
            self.inner = Some(KColorEngine::new(cx, self.k, self.n, &self.params, &self.tag));
        }
        self.inner.as_mut().unwrap().color_vertex(cx, v, neighbors)
    }
}

// ---------------------------------------------------------------------------
// Run drivers
// ---------------------------------------------------------------------------

/// Outcome of a full run over a stream.
#[derive(Debug)]
pub enum RunOutcome {
    Complete {
        ledger: ColoringLedger,
    },
    Aborted {
        at: VertexId,
        certificate: Option<AbortCertificate>,
        ledger: ColoringLedger,
    },
}

impl RunOutcome {
    pub fn ledger(&self) -> &ColoringLedger {
        match self {
            RunOutcome::Complete { ledger } | RunOutcome::Aborted { ledger, .. } => ledger,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, RunOutcome::Complete { .. })
    }
}

fn drive(
    stream: &ArrivalStream,
    mut engine: impl FnMut(&mut Cx, VertexId, &[VertexId]) -> Result<Step, EngineError>,
) -> Result<(RunOutcome, Vec<InstanceAudit>), EngineError> {
    let mut alloc = ColorAllocator::new();
    let mut ledger = ColoringLedger::new();
    for v in 0..stream.len() {
        let nbrs = stream.neighbors(v);
        let step = {
            let mut cx = Cx {
                alloc: &mut alloc,
                ledger: &mut ledger,
            };
            engine(&mut cx, v, nbrs)?
        };
        let c = step.color();
        for &u in nbrs {
            if ledger.color_of(u) == Some(c) {
                return Err(EngineError::Internal(format!(
                    "improper color {c} on edge ({u}, {v})"
                )));
            }
        }
        ledger.assign(v, c);
        if let Step::Aborted(_, witness) = step {
            let certificate = witness_to_certificate(witness, &ledger);
            return Ok((
                RunOutcome::Aborted {
                    at: v,
                    certificate,
                    ledger,
                },
                Vec::new(),
            ));
        }
    }
    Ok((RunOutcome::Complete { ledger }, Vec::new()))
}

fn witness_to_certificate(w: Witness, _ledger: &ColoringLedger) -> Option<AbortCertificate> {
    match w {
        Witness::None => None,
        Witness::Family(family) => Some(AbortCertificate {
            kind: CertificateKind::CandidateFamily { k: 4 },
            witness: Vec::new(),
            witness_s: Vec::new(),
            family,
        }),
        Witness::Set { x, x_s } => Some(AbortCertificate {
            kind: CertificateKind::NotLocallyColorable { ell: 0 },
            witness: x,
            witness_s: x_s,
            family: Vec::new(),
        }),
    }
}

/// Colors a stream under the locally-ℓ-colorable guarantee. On a level-0
/// abort the certificate (χ(G[X]) > ℓ on the witness) is verified against
/// the exhaustive oracle when it fits the cap; a verification failure is an
/// internal error.
pub fn color_locally_l(
    stream: &ArrivalStream,
    ell: u32,
    params: &AlgoParams,
) -> Result<RunOutcome, EngineError> {
    assert!(ell >= 1);
    let n = stream.len();
    let mut engine: Option<LocallyLEngine> = None;
    let (mut outcome, _) = drive(stream, |cx, v, nbrs| {
        if engine.is_none() {
            engine = Some(LocallyLEngine::new(cx, ell, n, params, "locally"));
        }
        engine.as_mut().unwrap().color_vertex(cx, v, nbrs)
    })?;
    if let RunOutcome::Aborted {
        certificate: Some(cert),
        ..
    } = &mut outcome
    {
        cert.kind = CertificateKind::NotLocallyColorable { ell };
        if cert.witness.len() <= params.oracle_cap {
            let ok = cert
                .verify(stream, params.oracle_cap)
                .map_err(|e| EngineError::Internal(e.to_string()))?;
            if !ok {
                return Err(EngineError::Internal(
                    "abort certificate failed oracle verification".into(),
                ));
            }
        }
    }
    Ok(outcome)
}

/// Colors a stream under the k-colorable guarantee; k = 2 delegates to the
/// bipartite component algorithm, and improved mode sends k = 4 through the
/// dedicated pipeline.
pub fn color_k_colorable(
    stream: &ArrivalStream,
    k: u32,
    params: &AlgoParams,
) -> Result<RunOutcome, EngineError> {
    assert!(k >= 2);
    if k == 4 && params.improved_epsilon {
        return crate::k4::color_4_colorable(stream, params).map(|o| o.outcome);
    }
    let n = stream.len();
    let mut engine: Option<KColorEngine> = None;
    let (outcome, _) = drive(stream, |cx, v, nbrs| {
        if engine.is_none() {
            engine = Some(KColorEngine::new(cx, k, n, params, "kcolor"));
        }
        engine.as_mut().unwrap().color_vertex(cx, v, nbrs)
    })?;
    Ok(outcome)
}

/// Runs the locally-(½·log log n)-colorable algorithm and, after an abort,
/// gives every subsequent vertex a fresh unique color. Always completes.
pub fn competitive_wrapper(
    stream: &ArrivalStream,
    params: &AlgoParams,
) -> Result<ColoringLedger, EngineError> {
    let n = stream.len().max(4);
    let ell = ((0.5 * (n as f64).log2().log2()).floor() as u32).max(1);
    let mut engine: Option<LocallyLEngine> = None;
    let mut gave_up = false;
    let (outcome, _) = drive(stream, |cx, v, nbrs| {
        if gave_up {
            return Ok(Step::Colored(cx.fresh_color("giveup")));
        }
        if engine.is_none() {
            engine = Some(LocallyLEngine::new(cx, ell, stream.len(), params, "locally"));
        }
        let step = engine.as_mut().unwrap().color_vertex(cx, v, nbrs)?;
        if let Step::Aborted(c, _) = step {
            gave_up = true;
            return Ok(Step::Colored(c));
        }
        Ok(step)
    })?;
    match outcome {
        RunOutcome::Complete { ledger } => Ok(ledger),
        RunOutcome::Aborted { .. } => unreachable!("aborts are absorbed"),
    }
}

/// Seeded convenience wrapper so the doubling lemma can be exercised
/// directly: runs `inner_budget`-FirstFit instances behind the wrapper.
pub fn doubling_firstfit(
    stream: &ArrivalStream,
    budget_f: impl Fn(usize) -> u64 + 'static,
) -> Result<(ColoringLedger, Vec<usize>), EngineError> {
    struct FfEngine {
        ff: Option<FirstFitLayer>,
        budget: u32,
        fresh_tag: String,
    }
    impl OnlineColorEngine for FfEngine {
        fn color_vertex(
            &mut self,
            cx: &mut Cx,
            v: VertexId,
            neighbors: &[VertexId],
        ) -> Result<Step, EngineError> {
            if self.ff.is_none() {
                self.ff = Some(FirstFitLayer::new(cx, &self.fresh_tag, self.budget));
            }
            match self.ff.as_mut().unwrap().try_color(v, neighbors) {
                Some(c) => Ok(Step::Colored(c)),
                None => Ok(Step::Colored(cx.fresh_color(&self.fresh_tag))),
            }
        }
    }
    let mut epoch_counter = 0usize;
    let mut epochs: Vec<usize> = Vec::new();
    let budget_f = std::rc::Rc::new(budget_f);
    let bf = budget_f.clone();
    let mut wrapper = DoublingWrapper::new(
        Box::new(move |t| {
            epoch_counter += 1;
            Box::new(FfEngine {
                ff: None,
                budget: bf(t).max(1) as u32,
                fresh_tag: format!("epoch{epoch_counter}"),
            })
        }),
        Box::new(move |t| budget_f(t)),
    );
    let mut lens = Vec::new();
    let (outcome, _) = drive(stream, |cx, v, nbrs| {
        let before = wrapper.epoch_remaining;
        let step = wrapper.color_vertex(cx, v, nbrs);
        if before == 0 {
            lens.push(wrapper.epoch_remaining + 1);
            epochs.push(wrapper.epoch_remaining + 1);
        }
        step
    })?;
    match outcome {
        RunOutcome::Complete { ledger } => Ok((ledger, lens)),
        RunOutcome::Aborted { .. } => unreachable!(),
    }
}

// seeded helper used by tests and the harness
pub fn seeded_coins(seed: u64) -> SeededCoins {
    SeededCoins::new(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_firstfit_adversary, gen_grade_instance, gen_random_k_colorable};
    use crate::ledger::validate_coloring;
    use crate::oracle::is_l_color_set;

    #[test]
    fn firstfit_edgeless_single_color() {
        let s = ArrivalStream::from_events(vec![vec![]; 5]).unwrap();
        let out = first_fit(&s, 1);
        assert!(out.iter().all(|c| c.is_some()));
        assert!(out.iter().all(|c| *c == out[0]));
    }

    #[test]
    fn firstfit_adversary_saturates_small_palette() {
        let s = gen_firstfit_adversary(16).unwrap();
        let out = first_fit(&s, 7);
        assert!(out.iter().any(|c| c.is_none()), "palette 7 < n/2 = 8");
        let full = first_fit(&s, 8);
        assert!(full.iter().all(|c| c.is_some()));
    }

    #[test]
    fn firstfit_clique_uses_distinct_ascending_colors() {
        let ev: Vec<Vec<usize>> = (0..4).map(|v| (0..v).collect()).collect();
        let s = ArrivalStream::from_events(ev).unwrap();
        let out = first_fit(&s, 4);
        let cs: Vec<Color> = out.into_iter().map(|c| c.unwrap()).collect();
        assert_eq!(cs[1] - cs[0], 1);
        assert_eq!(cs[2] - cs[0], 2);
        assert_eq!(cs[3] - cs[0], 3);
    }

    #[test]
    fn doubling_epochs_follow_sqrt_schedule() {
        let s = ArrivalStream::from_events(vec![vec![]; 40]).unwrap();
        let (ledger, epochs) =
            doubling_firstfit(&s, |t| (t as f64).sqrt().ceil() as u64).unwrap();
        assert_eq!(&epochs[..3], &[1, 4, 16]);
        assert!(validate_coloring(&s, &ledger).is_ok());
    }

    #[test]
    fn doubling_budget_respected_per_prefix() {
        // edgeless: each epoch's inner FirstFit uses exactly one color, so
        // the running total must stay within 4·f(m) at every prefix
        let n = 100;
        let s = ArrivalStream::from_events(vec![vec![]; n]).unwrap();
        let f = |t: usize| (t as f64).sqrt().ceil() as u64;
        let (ledger, _) = doubling_firstfit(&s, f).unwrap();
        let mut seen: HashSet<Color> = HashSet::new();
        for m in 0..n {
            seen.insert(ledger.color_of(m).unwrap());
            assert!(
                (seen.len() as u64) <= 4 * f(m + 1),
                "prefix {} used {} colors",
                m + 1,
                seen.len()
            );
        }
    }

    #[test]
    fn locally_one_on_edgeless_uses_one_color() {
        let s = ArrivalStream::from_events(vec![vec![]; 6]).unwrap();
        let out = color_locally_l(&s, 1, &AlgoParams::default()).unwrap();
        match out {
            RunOutcome::Complete { ledger } => {
                assert!(validate_coloring(&s, &ledger).is_ok());
                assert_eq!(ledger.colors_used(), 1);
            }
            _ => panic!("edgeless must complete"),
        }
    }

    #[test]
    fn locally_two_on_paths_completes() {
        for n in [5usize, 20, 60] {
            let ev: Vec<Vec<usize>> = (0..n)
                .map(|v| if v == 0 { vec![] } else { vec![v - 1] })
                .collect();
            let s = ArrivalStream::from_events(ev).unwrap();
            let out = color_locally_l(&s, 2, &AlgoParams::default()).unwrap();
            match out {
                RunOutcome::Complete { ledger } => {
                    assert!(validate_coloring(&s, &ledger).is_ok())
                }
                RunOutcome::Aborted { .. } => panic!("paths are locally 2-colorable"),
            }
        }
    }

    #[test]
    fn locally_two_aborts_on_triangle_with_verified_witness() {
        // force a triangle into the else layer: a dense bipartite-ish prefix
        // exhausts the FirstFit palette, then three mutually adjacent
        // vertices arrive
        let mut ev: Vec<Vec<usize>> = vec![vec![], vec![0]];
        for v in 2..8 {
            ev.push((0..v).collect());
        }
        let s = ArrivalStream::from_events(ev).unwrap();
        let out = color_locally_l(&s, 2, &AlgoParams::default()).unwrap();
        match out {
            RunOutcome::Aborted {
                certificate: Some(cert),
                ledger,
                at,
            } => {
                // every vertex up to the abort is properly colored
                for v in 0..=at {
                    assert!(ledger.color_of(v).is_some());
                }
                assert!(cert.verify(&s, 12).unwrap());
            }
            other => panic!("expected a certified abort, got {other:?}"),
        }
    }

    #[test]
    fn subproblem_row_abort_witness_checks_out() {
        // level-0 instance for ℓ = 2 driven synthetically: S = {0..5},
        // T vertices share S-neighbors so they route into one child whose
        // buffer receives an edge, aborting the row.
        let n = 64;
        let params = AlgoParams::default();
        let gamma = GammaSchedule::standard(n, 2, 0.5, 0.25); // γ_1 = 2
        let mut sub = SubproblemEngine::new(
            SubKind::General { ell: 2 },
            0,
            n,
            &params,
            gamma,
            None,
            "test".into(),
        );
        let mut alloc = ColorAllocator::new();
        let mut ledger = ColoringLedger::new();
        // build the true underlying graph alongside for the oracle
        let mut events: Vec<Vec<usize>> = vec![vec![]; 6];
        for v in 0..6 {
            sub.s_arrived(v);
        }
        let mut result = None;
        // t-vertices 6, 7, 8: all adjacent to s-vertices 0, 1; 7–8 and 6–7, 6–8 edges
        for (v, nbrs) in [
            (6usize, vec![0usize, 1]),
            (7, vec![0, 1, 6]),
            (8, vec![0, 1, 6, 7]),
        ] {
            events.push(nbrs.clone());
            let mut cx = Cx {
                alloc: &mut alloc,
                ledger: &mut ledger,
            };
            match sub.t_arrive(&mut cx, v, &nbrs).unwrap() {
                Step::Colored(c) => ledger.assign(v, c),
                Step::Aborted(c, w) => {
                    ledger.assign(v, c);
                    result = Some(w);
                    break;
                }
            }
        }
        let w = result.expect("triangle 6-7-8 forces a row abort");
        let Witness::Set { x, x_s } = w else {
            panic!("general witnesses carry sets")
        };
        let s = ArrivalStream::from_events(events).unwrap();
        // the claim: X ∩ S is not a 2-color set in any 2-coloring of G[X]
        let local: Vec<usize> = x_s
            .iter()
            .map(|v| x.iter().position(|w| w == v).unwrap())
            .collect();
        let sub_g = crate::oracle::induced_subgraph(&s, &x).unwrap();
        assert!(!is_l_color_set(&sub_g, &local, 2, 2, 12).unwrap());
    }

    #[test]
    fn registry_spawns_have_disjoint_enough_seeds() {
        // surviving row representatives must overlap in at most γ_{d+2}
        let s = gen_random_k_colorable(300, 3, 0.25, 11).unwrap();
        let n = s.len();
        let params = AlgoParams::default();
        let mut alloc = ColorAllocator::new();
        let mut ledger = ColoringLedger::new();
        let mut engine: Option<KColorEngine> = None;
        for v in 0..s.len() {
            let mut cx = Cx {
                alloc: &mut alloc,
                ledger: &mut ledger,
            };
            if engine.is_none() {
                engine = Some(KColorEngine::new(&mut cx, 3, n, &params, "k"));
            }
            let step = engine
                .as_mut()
                .unwrap()
                .color_vertex(&mut cx, v, s.neighbors(v))
                .unwrap();
            ledger.assign(v, step.color());
        }
        assert!(validate_coloring(&s, &ledger).is_ok());
        for audit in engine.unwrap().audit() {
            let survivors: Vec<&Vec<VertexId>> = audit
                .rows
                .iter()
                .filter_map(|row| row.iter().find(|(alive, _)| *alive).map(|(_, s)| s))
                .collect();
            for i in 0..survivors.len() {
                for j in i + 1..survivors.len() {
                    let a: HashSet<_> = survivors[i].iter().collect();
                    let overlap = survivors[j].iter().filter(|v| a.contains(v)).count();
                    assert!(
                        (overlap as u64) <= audit.gamma_route,
                        "row representatives overlap in {} > γ = {}",
                        overlap,
                        audit.gamma_route
                    );
                }
            }
        }
    }

    #[test]
    fn k2_delegates_to_component_algorithm() {
        for h in 1..=6 {
            let s = gen_grade_instance(h, h as u64);
            let out = color_k_colorable(&s, 2, &AlgoParams::default()).unwrap();
            let RunOutcome::Complete { ledger } = out else {
                panic!("bipartite run must complete")
            };
            assert!(validate_coloring(&s, &ledger).is_ok());
            let bound = 2.0 * ((s.len() + 1) as f64).log2();
            assert!((ledger.colors_used() as f64) <= bound);
        }
    }

    #[test]
    fn k3_planted_instance_colors_properly() {
        let s = gen_random_k_colorable(300, 3, 0.3, 5).unwrap();
        let out = color_k_colorable(&s, 3, &AlgoParams::default()).unwrap();
        match out {
            RunOutcome::Complete { ledger } => {
                assert!(validate_coloring(&s, &ledger).is_ok());
            }
            RunOutcome::Aborted { .. } => panic!("planted 3-colorable input must not abort"),
        }
    }

    #[test]
    fn k2_on_odd_cycle_never_improper() {
        let n = 9;
        let mut ev: Vec<Vec<usize>> = (0..n)
            .map(|v| if v == 0 { vec![] } else { vec![v - 1] })
            .collect();
        ev[n - 1].push(0);
        let s = ArrivalStream::from_events(ev).unwrap();
        let out = color_k_colorable(&s, 2, &AlgoParams::default()).unwrap();
        assert!(validate_coloring(&s, out.ledger()).is_ok());
    }

    #[test]
    fn competitive_wrapper_edgeless_and_dense() {
        let s = ArrivalStream::from_events(vec![vec![]; 10]).unwrap();
        let ledger = competitive_wrapper(&s, &AlgoParams::default()).unwrap();
        assert_eq!(ledger.colors_used(), 1);

        // high-chromatic stream: abort then unique colors, total ≤ n
        let n = 40;
        let dense = gen_random_k_colorable(n, 8, 0.9, 3).unwrap();
        let ledger = competitive_wrapper(&dense, &AlgoParams::default()).unwrap();
        assert!(validate_coloring(&dense, &ledger).is_ok());
        assert!(ledger.colors_used() <= n);

        let bip = gen_grade_instance(6, 1);
        let ledger = competitive_wrapper(&bip, &AlgoParams::default()).unwrap();
        assert!(validate_coloring(&bip, &ledger).is_ok());
    }
}
