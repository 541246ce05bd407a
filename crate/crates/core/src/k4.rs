//! The pipeline for 4-colorable graphs: a doubled FirstFit layer, a chain of
//! division filters that keep the admitted set free of dense common
//! neighborhoods (spawning 2-color-set subroutines from adjacent specially
//! colored pairs), and the no-dense-case solver that turns candidate 1-color
//! sets into 3-color-set subroutines.
//!
//! Every vertex's S-side neighborhood is snapshotted as a bitset over the
//! S-arrival order when the vertex reaches the else-layer; the division
//! filters may delete edges from that snapshot during the vertex's own
//! filter chain, after which the set is frozen. Thresholds are the paper's
//! n-power expressions, floored at 1 so the control flow survives desk-scale
//! instances.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::general::{
    scaled_power, AlgoParams, Cx, EngineError, FirstFitLayer, GammaSchedule, InstanceAudit,
    RunOutcome, Step, SubKind, SubproblemEngine, Witness,
};
use crate::ledger::{Color, ColorAllocator, ColoringLedger};
use crate::stream::{ArrivalStream, VertexId};

// ---------------------------------------------------------------------------
// S-side bitsets
// ---------------------------------------------------------------------------

/// A set of S-side vertices stored over their S-arrival indices.
#[derive(Debug, Clone, Default)]
pub struct SBits {
    words: Vec<u64>,
}

impl SBits {
    fn grow(&mut self, idx: usize) {
        let w = idx / 64 + 1;
        if self.words.len() < w {
            self.words.resize(w, 0);
        }
    }

    pub fn insert(&mut self, idx: usize) {
        self.grow(idx);
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    pub fn remove(&mut self, idx: usize) {
        if idx / 64 < self.words.len() {
            self.words[idx / 64] &= !(1 << (idx % 64));
        }
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx / 64 < self.words.len() && self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn intersection_count(&self, other: &SBits) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    /// Ascending S-arrival indices of the intersection.
    pub fn intersection_indices(&self, other: &SBits) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut bits = a & b;
            while bits != 0 {
                let b0 = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                out.push(wi * 64 + b0);
            }
        }
        out
    }

    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, w) in self.words.iter().enumerate() {
            let mut bits = *w;
            while bits != 0 {
                let b0 = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                out.push(wi * 64 + b0);
            }
        }
        out
    }

    pub fn subtract_count(&mut self, other: &SBits) -> u64 {
        let mut removed = 0;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            removed += (*a & b).count_ones() as u64;
            *a &= !b;
        }
        removed
    }
}

/// The S₀ bookkeeping shared by the else-layer: arrival order and per-vertex
/// frozen neighborhood snapshots.
#[derive(Default)]
pub struct SZero {
    pub order: Vec<VertexId>,
    pub index: HashMap<VertexId, usize>,
    /// Effective (post-deletion) S-neighborhood of each else vertex.
    pub eff: HashMap<VertexId, SBits>,
    pub deleted_edges: HashMap<VertexId, u64>,
}

impl SZero {
    pub fn s_arrived(&mut self, v: VertexId) {
        let idx = self.order.len();
        self.order.push(v);
        self.index.insert(v, idx);
    }

    /// Snapshot the S-neighborhood of an arriving else vertex.
    pub fn snapshot(&mut self, v: VertexId, neighbors: &[VertexId]) {
        let mut bits = SBits::default();
        for u in neighbors {
            if let Some(&i) = self.index.get(u) {
                bits.insert(i);
            }
        }
        self.eff.insert(v, bits);
    }

    pub fn eff_of(&self, v: VertexId) -> &SBits {
        &self.eff[&v]
    }

    pub fn ids(&self, indices: &[usize]) -> Vec<VertexId> {
        indices.iter().map(|&i| self.order[i]).collect()
    }
}

// ---------------------------------------------------------------------------
// Fixed-S color-set solvers
// ---------------------------------------------------------------------------

/// A 3-color-set (level 1) or 2-color-set (level 2) subroutine: the
/// k = 4 machinery with a fixed seed S and thresholds rescaled to
/// γ_i = |S|/(2^{i(i−1)/2}·(n^{18/17})^{i/6}).
pub struct ColorSetSolver {
    engine: SubproblemEngine,
    pub seed: Vec<VertexId>,
    pub aborted: bool,
}

impl ColorSetSolver {
    pub fn new(level: u32, seed: Vec<VertexId>, n: usize, params: &AlgoParams, tag: String) -> Self {
        assert!(level == 1 || level == 2);
        let n_eff = (n.max(2) as f64).powf(18.0 / 17.0);
        let gamma = GammaSchedule::fixed_s(seed.len(), n_eff, 4, 1.0 / 6.0, params.scale);
        let engine = SubproblemEngine::new(
            SubKind::Plus { k: 4 },
            level,
            n,
            params,
            gamma,
            Some(seed.clone()),
            tag,
        );
        Self {
            engine,
            seed,
            aborted: false,
        }
    }

    pub fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        let step = self.engine.t_arrive(cx, v, neighbors)?;
        if matches!(step, Step::Aborted(..)) {
            self.aborted = true;
        }
        Ok(step)
    }

    pub fn audit(&self) -> Vec<InstanceAudit> {
        let mut out = Vec::new();
        self.engine.collect_audit(&mut out);
        out
    }
}

/// Convenience entry points matching the two problem statements.
pub fn solve_3color_set(seed: Vec<VertexId>, n: usize, params: &AlgoParams) -> ColorSetSolver {
    ColorSetSolver::new(1, seed, n, params, "3color".into())
}

pub fn solve_2color_set(seed: Vec<VertexId>, n: usize, params: &AlgoParams) -> ColorSetSolver {
    ColorSetSolver::new(2, seed, n, params, "2color".into())
}

// ---------------------------------------------------------------------------
// 1-color candidates
// ---------------------------------------------------------------------------

/// The 1-color candidates problem: growing S, three nested levels with the
/// odd-cycle-free base; aborts with a family of at most 10 candidate sets,
/// at least one of which is a 1-color set whenever the graph is 4-colorable.
pub struct OneColorCandidates {
    engine: SubproblemEngine,
    pub aborted: bool,
}

impl OneColorCandidates {
    pub fn new(n: usize, params: &AlgoParams, tag: String) -> Self {
        let gamma = GammaSchedule::candidates(n, params.scale);
        Self {
            engine: SubproblemEngine::new(SubKind::Cand, 0, n, params, gamma, None, tag),
            aborted: false,
        }
    }

    pub fn s_arrived(&mut self, v: VertexId) {
        self.engine.s_arrived(v);
    }

    pub fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Step, EngineError> {
        let step = self.engine.t_arrive(cx, v, neighbors)?;
        if matches!(step, Step::Aborted(..)) {
            self.aborted = true;
        }
        Ok(step)
    }
}

// ---------------------------------------------------------------------------
// No-dense case
// ---------------------------------------------------------------------------

struct SeedRow {
    solvers: Vec<SeedSolver>,
}

struct SeedSolver {
    seed_indices: SBits,
    seed: Vec<VertexId>,
    solver: ColorSetSolver,
}

/// Per-run thresholds of the no-dense solver.
#[derive(Debug, Clone, Serialize)]
pub struct NoDenseThresholds {
    pub route3: u64,
    pub tff_degree: u64,
    pub tng_degree: u64,
    pub seed_cap: u64,
    pub c_max: u64,
    pub tff_cap: u64,
}

impl NoDenseThresholds {
    fn new(n: usize, scale: f64) -> Self {
        Self {
            route3: scaled_power(n, 12.0 / 17.0, (6400f64).log2(), scale),
            tff_degree: scaled_power(n, 13.0 / 17.0, 0.0, scale),
            tng_degree: scaled_power(n, 14.0 / 17.0, 1.0, scale),
            seed_cap: scaled_power(n, 15.0 / 17.0, 6.0, scale),
            c_max: scaled_power(n, 1.0 / 17.0, 0.0, scale),
            tff_cap: scaled_power(n, 16.0 / 17.0, 0.0, scale),
        }
    }
}

/// The else-problem solver under the no-dense property: routes dense-to-seed
/// vertices into 3-color subroutines, FirstFits the rest inside T, and runs
/// the candidates engine over the surviving FirstFit vertices.
pub struct NoDenseCase {
    n: usize,
    params: AlgoParams,
    pub th: NoDenseThresholds,
    tag: String,
    rows: Vec<SeedRow>,
    r_union: SBits,
    tff: Option<FirstFitLayer>,
    tff_members: Vec<VertexId>,
    tff_set: HashSet<VertexId>,
    tff_epoch: u32,
    cand: Option<OneColorCandidates>,
    cand_fed: Vec<VertexId>,
    cand_epoch: u32,
    c_counter: u64,
    pub fallback_colors: u64,
}

impl NoDenseCase {
    pub fn new(n: usize, params: &AlgoParams, tag: String) -> Self {
        Self {
            n,
            params: params.clone(),
            th: NoDenseThresholds::new(n, params.scale),
            tag,
            rows: Vec::new(),
            r_union: SBits::default(),
            tff: None,
            tff_members: Vec::new(),
            tff_set: HashSet::new(),
            tff_epoch: 0,
            cand: None,
            cand_fed: Vec::new(),
            cand_epoch: 0,
            c_counter: 0,
            fallback_colors: 0,
        }
    }

    /// Surviving-seed disjointness audit: per row, (alive, seed) pairs.
    pub fn rows_audit(&self) -> Vec<Vec<(bool, Vec<VertexId>)>> {
        self.rows
            .iter()
            .map(|r| {
                r.solvers
                    .iter()
                    .map(|s| (!s.solver.aborted, s.seed.clone()))
                    .collect()
            })
            .collect()
    }

    pub fn spawn_count(&self) -> usize {
        self.rows.iter().map(|r| r.solvers.len()).sum()
    }

    fn sync_candidates(&mut self, cx_tag: &str, s0: &SZero) {
        // target S = T_FF \ T_NG in FirstFit arrival order
        let target: Vec<VertexId> = self
            .tff_members
            .iter()
            .copied()
            .filter(|&u| s0.eff_of(u).intersection_count(&self.r_union) < self.th.tng_degree)
            .collect();
        let target_set: HashSet<VertexId> = target.iter().copied().collect();
        let keeps_prefix = self.cand.is_some()
            && self.cand_fed.iter().all(|u| target_set.contains(u))
            && target
                .iter()
                .take(self.cand_fed.len())
                .eq(self.cand_fed.iter());
        if !keeps_prefix {
            self.cand_epoch += 1;
            self.cand = Some(OneColorCandidates::new(
                self.n,
                &self.params,
                format!("{cx_tag}/cand{}", self.cand_epoch),
            ));
            self.cand_fed.clear();
        } else if self.cand.as_ref().unwrap().aborted {
            // a fresh subroutine continues after each returned family
            self.cand_epoch += 1;
            self.cand = Some(OneColorCandidates::new(
                self.n,
                &self.params,
                format!("{cx_tag}/cand{}", self.cand_epoch),
            ));
            self.cand_fed.clear();
        }
        let cand = self.cand.as_mut().unwrap();
        for &u in target.iter().skip(self.cand_fed.len()) {
            cand.s_arrived(u);
            self.cand_fed.push(u);
        }
    }

    pub fn t_arrive(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
        s0: &SZero,
    ) -> Result<Step, EngineError> {
        let eff = s0.eff_of(v);
        // 1. route to a live 3-color subroutine with enough seed neighbors
        let mut routed: Option<(usize, usize)> = None;
        'outer: for (i, row) in self.rows.iter().enumerate() {
            for (j, s) in row.solvers.iter().enumerate() {
                if !s.solver.aborted && eff.intersection_count(&s.seed_indices) >= self.th.route3 {
                    routed = Some((i, j));
                    break 'outer;
                }
            }
        }
        if let Some((i, j)) = routed {
            let slot = &mut self.rows[i].solvers[j];
            // restrict to surviving seed edges
            let seed_nbrs = s0.ids(&eff.intersection_indices(&slot.seed_indices));
            return match slot.solver.t_arrive(cx, v, &seed_nbrs) {
                Ok(step) => Ok(Step::Colored(step.color())),
                Err(EngineError::Precondition(_)) => {
                    self.fallback_colors += 1;
                    Ok(Step::Colored(cx.fresh_color(&format!("{}/fb", self.tag))))
                }
                Err(e) => Err(e),
            };
        }

        // 2. FirstFit inside T while the degree stays below the budget
        let tff_nbrs: Vec<VertexId> = neighbors
            .iter()
            .copied()
            .filter(|u| self.tff_set.contains(u))
            .collect();
        if (tff_nbrs.len() as u64) < self.th.tff_degree {
            if self.tff.is_none() {
                self.tff = Some(FirstFitLayer::new(
                    cx,
                    &format!("{}/tff{}", self.tag, self.tff_epoch),
                    self.th.tff_degree as u32,
                ));
            }
            let c = self
                .tff
                .as_mut()
                .unwrap()
                .try_color(v, &tff_nbrs)
                .expect("degree below budget leaves a free color");
            self.tff_members.push(v);
            self.tff_set.insert(v);
            self.maybe_reset(s0);
            return Ok(Step::Colored(c));
        }

        // 3. the candidates engine over T_FF minus the known-dense part
        let tag = self.tag.clone();
        self.sync_candidates(&tag, s0);
        let cand = self.cand.as_mut().unwrap();
        let step = match cand.t_arrive(cx, v, neighbors) {
            Ok(s) => s,
            Err(EngineError::Precondition(_)) => {
                self.fallback_colors += 1;
                let c = cx.fresh_color(&format!("{}/fb", self.tag));
                self.maybe_reset(s0);
                return Ok(Step::Colored(c));
            }
            Err(e) => return Err(e),
        };
        let color = step.color();
        if let Step::Aborted(_, Witness::Family(family)) = step {
            // one new row: a 3-color subroutine per candidate set, seeded by
            // the first seed_cap fresh S-neighbors of the set
            let row_idx = self.rows.len();
            let mut solvers = Vec::new();
            for (k, cand_set) in family.iter().enumerate() {
                let mut union = SBits::default();
                for a in cand_set {
                    for idx in s0.eff_of(*a).indices() {
                        union.insert(idx);
                    }
                }
                union.subtract_count(&self.r_union);
                let indices: Vec<usize> = union
                    .indices()
                    .into_iter()
                    .take(self.th.seed_cap as usize)
                    .collect();
                if indices.is_empty() {
                    continue;
                }
                let mut seed_indices = SBits::default();
                for &i in &indices {
                    seed_indices.insert(i);
                    self.r_union.insert(i);
                }
                let seed = s0.ids(&indices);
                solvers.push(SeedSolver {
                    seed_indices,
                    seed: seed.clone(),
                    solver: ColorSetSolver::new(
                        1,
                        seed,
                        self.n,
                        &self.params,
                        format!("{}/3c-r{}-{}", self.tag, row_idx, k),
                    ),
                });
            }
            if !solvers.is_empty() {
                self.rows.push(SeedRow { solvers });
            }
            self.c_counter += 1;
        }
        self.maybe_reset(s0);
        Ok(Step::Colored(color))
    }

    fn maybe_reset(&mut self, _s0: &SZero) {
        if self.c_counter > self.th.c_max || (self.tff_members.len() as u64) > self.th.tff_cap {
            self.tff_members.clear();
            self.tff_set.clear();
            self.tff = None;
            self.tff_epoch += 1;
            self.c_counter = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Division filters
// ---------------------------------------------------------------------------

struct Group {
    members: Vec<VertexId>,
    specials: Vec<VertexId>,
    special_colors: [Option<Color>; 2],
    color_of: HashMap<VertexId, Color>,
    creator: VertexId,
}

/// Per-pair audit and report data.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DivisionStats {
    pub groups_created: u64,
    pub group_resets: u64,
    pub seed_rows: u64,
    pub deleted_edges: u64,
}

/// One (α, β) division filter: admits vertices to the shared set T_A unless
/// they are β-common with too many earlier admissions, grouping the dense
/// ones and turning adjacent specially-colored pairs into four 2-color-set
/// seeds.
pub struct DivisionPair {
    pub alpha: f64,
    pub beta: f64,
    n_alpha: u64,
    n_beta: u64,
    route2: u64,
    seed_cap: u64,
    tag: String,
    n: usize,
    params: AlgoParams,
    rows: Vec<SeedRow>,
    r_union: SBits,
    groups: Vec<Group>,
    pub stats: DivisionStats,
    pub fallback_colors: u64,
}

impl DivisionPair {
    pub fn new(alpha: f64, beta: f64, n: usize, params: &AlgoParams, tag: String) -> Self {
        let logn = (n.max(4) as f64).log2();
        Self {
            alpha,
            beta,
            n_alpha: scaled_power(n, alpha, 0.0, params.scale),
            n_beta: scaled_power(n, beta, 0.0, params.scale),
            route2: scaled_power(n, beta - 3.0 / 17.0, (8.0 * logn).log2(), params.scale),
            seed_cap: scaled_power(n, beta, 0.0, params.scale),
            tag,
            n,
            params: params.clone(),
            rows: Vec::new(),
            r_union: SBits::default(),
            groups: Vec::new(),
            stats: DivisionStats::default(),
            fallback_colors: 0,
        }
    }

    pub fn beta_common(&self, s0: &SZero, u: VertexId, v: VertexId) -> bool {
        s0.eff_of(u).intersection_count(s0.eff_of(v)) >= self.n_beta
    }

    /// Groups audit: member lists must stay pairwise disjoint.
    pub fn groups_audit(&self) -> Vec<Vec<VertexId>> {
        self.groups.iter().map(|g| g.members.clone()).collect()
    }

    pub fn seed_rows_audit(&self) -> Vec<Vec<(bool, Vec<VertexId>)>> {
        self.rows
            .iter()
            .map(|r| {
                r.solvers
                    .iter()
                    .map(|s| (!s.solver.aborted, s.seed.clone()))
                    .collect()
            })
            .collect()
    }

    /// Runs this filter for an arriving vertex. `Some(step)` means the vertex
    /// was colored here (sent to T_B); `None` passes it to the next filter.
    /// The vertex's effective S-neighborhood may lose edges to this pair's
    /// seeds.
    pub fn step(
        &mut self,
        cx: &mut Cx,
        v: VertexId,
        neighbors: &[VertexId],
        s0: &mut SZero,
        t_a: &[VertexId],
    ) -> Result<Option<Step>, EngineError> {
        // 1. 2-color routing
        let mut routed: Option<(usize, usize)> = None;
        'outer: for (i, row) in self.rows.iter().enumerate() {
            for (j, s) in row.solvers.iter().enumerate() {
                if !s.solver.aborted
                    && s0.eff_of(v).intersection_count(&s.seed_indices) >= self.route2
                {
                    routed = Some((i, j));
                    break 'outer;
                }
            }
        }
        if let Some((i, j)) = routed {
            let slot = &mut self.rows[i].solvers[j];
            let seed_nbrs = s0.ids(
                &s0.eff_of(v)
                    .intersection_indices(&slot.seed_indices),
            );
            return match slot.solver.t_arrive(cx, v, &seed_nbrs) {
                Ok(step) => Ok(Some(Step::Colored(step.color()))),
                Err(EngineError::Precondition(_)) => {
                    self.fallback_colors += 1;
                    Ok(Some(Step::Colored(
                        cx.fresh_color(&format!("{}/fb", self.tag)),
                    )))
                }
                Err(e) => Err(e),
            };
        }

        // 2. delete v's edges into this pair's seeds
        let eff = s0.eff.get_mut(&v).unwrap();
        let removed = eff.subtract_count(&self.r_union);
        self.stats.deleted_edges += removed;
        *s0.deleted_edges.entry(v).or_insert(0) += removed;

        // 3. membership in an existing dense group
        let group_hit = self.groups.iter().position(|g| {
            g.members
                .iter()
                .any(|&w| self.beta_common_frozen(s0, w, v))
        });
        if let Some(gi) = group_hit {
            let color = self.color_in_group(cx, gi, v, neighbors)?;
            // an edge inside the specially colored set yields four 2-color
            // candidate seeds and resets the groups
            let g = &self.groups[gi];
            let adjacent_special = neighbors
                .iter()
                .copied()
                .find(|u| g.color_of.contains_key(u));
            if let Some(u1) = adjacent_special {
                let w1 = g
                    .members
                    .iter()
                    .copied()
                    .find(|&w| self.beta_common_frozen(s0, u1, w))
                    .expect("special members are beta-common with the group");
                let w2 = g
                    .members
                    .iter()
                    .copied()
                    .find(|&w| self.beta_common_frozen(s0, v, w))
                    .expect("v joined via a beta-common member");
                let ci = g.creator;
                let chain = [(u1, w1), (w1, ci), (ci, w2), (w2, v)];
                let row_idx = self.rows.len();
                let mut solvers = Vec::new();
                for (k, (a, b)) in chain.into_iter().enumerate() {
                    let common = s0.eff_of(a).intersection_indices(s0.eff_of(b));
                    let indices: Vec<usize> =
                        common.into_iter().take(self.seed_cap as usize).collect();
                    if indices.is_empty() {
                        continue;
                    }
                    let mut seed_indices = SBits::default();
                    for &i in &indices {
                        seed_indices.insert(i);
                        self.r_union.insert(i);
                    }
                    let seed = s0.ids(&indices);
                    solvers.push(SeedSolver {
                        seed_indices,
                        seed: seed.clone(),
                        solver: ColorSetSolver::new(
                            2,
                            seed,
                            self.n,
                            &self.params,
                            format!("{}/2c-r{}-{}", self.tag, row_idx, k),
                        ),
                    });
                }
                self.rows.push(SeedRow { solvers });
                self.stats.seed_rows += 1;
                self.groups.clear();
                self.stats.group_resets += 1;
            }
            return Ok(Some(Step::Colored(color)));
        }

        // 4. would admitting v break (α, β)-freeness?
        let dense_with: Vec<VertexId> = t_a
            .iter()
            .copied()
            .filter(|&u| self.beta_common_frozen(s0, u, v))
            .collect();
        if (dense_with.len() as u64) >= self.n_alpha {
            self.groups.push(Group {
                members: dense_with,
                specials: Vec::new(),
                special_colors: [None, None],
                color_of: HashMap::new(),
                creator: v,
            });
            self.stats.groups_created += 1;
            let c = cx.fresh_color(&format!("{}/creator", self.tag));
            return Ok(Some(Step::Colored(c)));
        }
        Ok(None)
    }

    fn beta_common_frozen(&self, s0: &SZero, u: VertexId, v: VertexId) -> bool {
        s0.eff_of(u).intersection_count(s0.eff_of(v)) >= self.n_beta
    }

    fn color_in_group(
        &mut self,
        cx: &mut Cx,
        gi: usize,
        v: VertexId,
        neighbors: &[VertexId],
    ) -> Result<Color, EngineError> {
        let tag = format!("{}/grp", self.tag);
        let g = &mut self.groups[gi];
        let conflict: HashSet<Color> = neighbors
            .iter()
            .filter_map(|u| g.color_of.get(u).copied())
            .collect();
        for slot in 0..2 {
            let c = match g.special_colors[slot] {
                Some(c) => c,
                None => {
                    let c = cx.fresh_color(&tag);
                    g.special_colors[slot] = Some(c);
                    c
                }
            };
            if !conflict.contains(&c) {
                g.specials.push(v);
                g.color_of.insert(v, c);
                return Ok(c);
            }
        }
        Err(EngineError::Internal(
            "two special colors exhausted before a group reset".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// Branch driver
// ---------------------------------------------------------------------------

/// Report extras for the 4-colorable pipeline.
#[derive(Debug, Clone, Default, Serialize)]
pub struct K4Extras {
    pub else_vertices: u64,
    pub t_a_size: u64,
    pub t_b_size: u64,
    pub deleted_edges: u64,
    pub division_stats: Vec<DivisionStats>,
    pub nodense_spawns: u64,
    pub fallback_colors: u64,
    /// No-dense seed rows: per row, (alive, seed) pairs.
    pub seed_rows: Vec<Vec<(bool, Vec<VertexId>)>>,
    /// Dense-group member lists per division pair.
    pub division_groups: Vec<Vec<Vec<VertexId>>>,
}

pub struct K4Run {
    pub outcome: RunOutcome,
    pub extras: K4Extras,
}

/// The full 4-colorable pipeline: a doubled FirstFit layer; else vertices
/// pass through the Δ+1 division filters in order and the survivors feed the
/// no-dense solver over the admitted set T_A.
pub fn color_4_colorable(stream: &ArrivalStream, params: &AlgoParams) -> Result<K4Run, EngineError> {
    let n = stream.len().max(4);
    let logn = (n as f64).log2();
    let delta = logn.ceil().max(1.0) as usize;
    let kk = 2.0 * logn.log2().max(0.0) / logn;

    let mut alloc = ColorAllocator::new();
    let mut ledger = ColoringLedger::new();
    let ff_budget = 2 * scaled_power(n, 14.0 / 17.0, 0.0, params.scale) as u32;
    let mut ff = {
        let mut cx = Cx {
            alloc: &mut alloc,
            ledger: &mut ledger,
        };
        FirstFitLayer::new(&mut cx, "k4/ff", ff_budget)
    };

    let mut s0 = SZero::default();
    let mut pairs: Vec<DivisionPair> = (0..=delta)
        .map(|i| {
            let frac = i as f64 / delta as f64;
            let alpha = 8.0 / 17.0 - (2.0 / 17.0 + kk) * (1.0 - frac);
            let beta = 14.0 / 17.0 - (2.0 / 17.0 + kk) * frac;
            DivisionPair::new(alpha, beta, n, params, format!("k4/div{i}"))
        })
        .collect();
    let mut nodense = NoDenseCase::new(n, params, "k4/nd".into());
    let mut t_a: Vec<VertexId> = Vec::new();
    let mut extras = K4Extras::default();

    for v in 0..stream.len() {
        let nbrs = stream.neighbors(v);
        let mut cx = Cx {
            alloc: &mut alloc,
            ledger: &mut ledger,
        };
        let color = if let Some(c) = ff.try_color(v, nbrs) {
            s0.s_arrived(v);
            c
        } else {
            extras.else_vertices += 1;
            s0.snapshot(v, nbrs);
            let mut decided: Option<Step> = None;
            for pair in pairs.iter_mut() {
                if let Some(step) = pair.step(&mut cx, v, nbrs, &mut s0, &t_a)? {
                    decided = Some(step);
                    break;
                }
            }
            match decided {
                Some(step) => {
                    extras.t_b_size += 1;
                    step.color()
                }
                None => {
                    t_a.push(v);
                    extras.t_a_size += 1;
                    nodense.t_arrive(&mut cx, v, nbrs, &s0)?.color()
                }
            }
        };
        for &u in nbrs {
            if ledger.color_of(u) == Some(color) {
                return Err(EngineError::Internal(format!(
                    "improper color {color} on edge ({u}, {v})"
                )));
            }
        }
        ledger.assign(v, color);
    }

    extras.deleted_edges = s0.deleted_edges.values().sum();
    extras.division_stats = pairs.iter().map(|p| p.stats.clone()).collect();
    extras.nodense_spawns = nodense.spawn_count() as u64;
    extras.seed_rows = nodense.rows_audit();
    for p in &pairs {
        extras.seed_rows.extend(p.seed_rows_audit());
        extras.division_groups.push(p.groups_audit());
    }
    extras.fallback_colors =
        nodense.fallback_colors + pairs.iter().map(|p| p.fallback_colors).sum::<u64>();
    Ok(K4Run {
        outcome: RunOutcome::Complete { ledger },
        extras,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_random_k_colorable, planted_partition};
    use crate::ledger::validate_coloring;

    #[test]
    fn planted_instances_color_properly() {
        for (n, seed) in [(200usize, 1u64), (500, 2)] {
            let s = gen_random_k_colorable(n, 4, 0.4, seed).unwrap();
            let run = color_4_colorable(&s, &AlgoParams::default()).unwrap();
            assert!(validate_coloring(&s, run.outcome.ledger()).is_ok());
        }
    }

    #[test]
    fn bipartite_input_colors_properly() {
        let s = crate::gen::gen_grade_instance(6, 3);
        let run = color_4_colorable(&s, &AlgoParams::default()).unwrap();
        assert!(validate_coloring(&s, run.outcome.ledger()).is_ok());
    }

    #[test]
    fn k5_stream_never_improper() {
        // complete graph on 10 vertices: far from 4-colorable
        let ev: Vec<Vec<usize>> = (0..10).map(|v| (0..v).collect()).collect();
        let s = ArrivalStream::from_events(ev).unwrap();
        let run = color_4_colorable(&s, &AlgoParams::default()).unwrap();
        assert!(validate_coloring(&s, run.outcome.ledger()).is_ok());
    }

    #[test]
    fn three_color_solver_never_aborts_on_planted_class() {
        // S = one planted color class; T drawn from the other classes with
        // every T vertex having seed neighbors
        let n = 120usize;
        let seed = 7u64;
        let s = gen_random_k_colorable(n, 4, 0.8, seed).unwrap();
        let plant = planted_partition(n, 4, seed);
        let class0: Vec<VertexId> = (0..n).filter(|&v| plant[v] == 0).collect();
        let class0_set: std::collections::HashSet<_> = class0.iter().copied().collect();
        let params = AlgoParams::default();
        let mut solver = solve_3color_set(class0.clone(), n, &params);
        let mut alloc = ColorAllocator::new();
        let mut ledger = ColoringLedger::new();
        for v in 0..n {
            if class0_set.contains(&v) {
                continue;
            }
            let nbrs: Vec<VertexId> = s
                .neighbors(v)
                .iter()
                .copied()
                .filter(|u| class0_set.contains(u) || ledger.color_of(*u).is_some())
                .collect();
            if nbrs.iter().filter(|u| class0_set.contains(u)).count() == 0 {
                continue;
            }
            let mut cx = Cx {
                alloc: &mut alloc,
                ledger: &mut ledger,
            };
            match solver.t_arrive(&mut cx, v, &nbrs) {
                Ok(step) => {
                    assert!(
                        !solver.aborted,
                        "solver aborted on a genuine 3-color set"
                    );
                    ledger.assign(v, step.color());
                }
                Err(EngineError::Precondition(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn empty_feed_uses_zero_colors() {
        let params = AlgoParams::default();
        let solver = solve_2color_set(vec![0, 1, 2], 100, &params);
        assert!(!solver.aborted);
        assert_eq!(solver.audit().len(), 1);
    }
}
