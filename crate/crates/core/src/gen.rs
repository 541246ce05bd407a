//! Seeded instance generators: the FirstFit forcing family, planted
//! k-colorable graphs, the grade-h bipartite adversary, and streams realizing
//! a prescribed component-merge forest.
//!
//! Every generator takes an explicit seed and is deterministic given it; the
//! PRNG is ChaCha8 throughout.

use rand::prelude::*;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forest::RootedForest;
use crate::stream::{ArrivalStream, VertexId};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("n must be even and at least 2, got {0}")]
    OddAdversary(usize),
    #[error("density must lie in [0,1], got {0}")]
    BadDensity(f64),
    #[error("k must be at least 1")]
    BadK,
}

/// The crown-structure family on which FirstFit burns n/2 colors even though
/// the graph is bipartite: sides a_0..a_{n/2-1} and b_0..b_{n/2-1} with edges
/// a_i b_j exactly when i ≠ j, arriving a_0, b_0, a_1, b_1, ...
///
/// FirstFit gives both a_i and b_i color i+1; the true chromatic number is 2
/// (1 for n = 2, where no edge exists).
pub fn gen_firstfit_adversary(n: usize) -> Result<ArrivalStream, GenError> {
    if n < 2 || n % 2 != 0 {
        return Err(GenError::OddAdversary(n));
    }
    let half = n / 2;
    let mut s = ArrivalStream::new();
    for i in 0..half {
        // a_i = vertex 2i: adjacent to b_j (= 2j+1) for j < i, j ≠ i
        let a_nbrs: Vec<VertexId> = (0..i).map(|j| 2 * j + 1).collect();
        s.push(a_nbrs).unwrap();
        // b_i = vertex 2i+1: adjacent to a_j (= 2j) for j < i, j ≠ i
        let b_nbrs: Vec<VertexId> = (0..i).map(|j| 2 * j).collect();
        s.push(b_nbrs).unwrap();
    }
    s.meta.declared_n = Some(n);
    s.meta.declared_k = Some(2);
    Ok(s)
}

/// Plants a hidden k-partition and keeps only cross-part edges, each kept
/// with probability `density`. The arrival order is a seeded shuffle. The
/// first k originals live in distinct parts, so density 1 with n ≥ k yields
/// a complete k-partite graph with χ = k.
pub fn gen_random_k_colorable(
    n: usize,
    k: u32,
    density: f64,
    seed: u64,
) -> Result<ArrivalStream, GenError> {
    if k < 1 {
        return Err(GenError::BadK);
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(GenError::BadDensity(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part: Vec<u32> = (0..n)
        .map(|v| {
            if v < k as usize {
                v as u32
            } else {
                rng.random_range(0..k)
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut pos = vec![0usize; n];
    for (i, &orig) in order.iter().enumerate() {
        pos[orig] = i;
    }
    let mut events: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if part[i] != part[j] && rng.random_bool(density) {
                let (a, b) = (pos[i].min(pos[j]), pos[i].max(pos[j]));
                events[b].push(a);
            }
        }
    }
    let mut s = ArrivalStream::from_events(events).expect("generated events are valid");
    s.meta.declared_n = Some(n);
    s.meta.declared_k = Some(k);
    Ok(s)
}

/// The planted coloring of [`gen_random_k_colorable`], in arrival order.
/// Reproduces the generator's internal choices for the same arguments.
pub fn planted_partition(n: usize, k: u32, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part: Vec<u32> = (0..n)
        .map(|v| {
            if v < k as usize {
                v as u32
            } else {
                rng.random_range(0..k)
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order.into_iter().map(|orig| part[orig]).collect()
}

struct GradeComponent {
    /// Vertices on each side of the component's bipartition.
    sides: [Vec<VertexId>; 2],
}

/// The phase-structured random bipartite adversary. The grade-h instance has
/// 4·2^h − 2 vertices: phase 0 brings 2^{h+1} vertices forming 2^h disjoint
/// edges, and phase i ≥ 1 pairs up the surviving grade-(i−1) components at
/// random and merges each pair with two fresh adjacent vertices, wiring each
/// old component's sides to the fresh pair in one of the four equiprobable
/// bipartite-preserving ways.
pub fn gen_grade_instance(h: u32, seed: u64) -> ArrivalStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ArrivalStream::new();
    let mut comps: Vec<GradeComponent> = Vec::new();
    // phase 0: 2^{h+1} vertices in pairs
    let pairs0 = 1usize << h;
    for _ in 0..pairs0 {
        let a = s.push(vec![]).unwrap();
        let b = s.push(vec![a]).unwrap();
        comps.push(GradeComponent {
            sides: [vec![a], vec![b]],
        });
    }
    for _phase in 1..=h {
        comps.shuffle(&mut rng);
        let mut next = Vec::with_capacity(comps.len() / 2);
        let mut it = comps.into_iter();
        while let (Some(c1), Some(c2)) = (it.next(), it.next()) {
            // which side of each component attaches to the first new vertex
            let w1 = rng.random_range(0..2usize);
            let w2 = rng.random_range(0..2usize);
            let mut a_nbrs = c1.sides[w1].clone();
            a_nbrs.extend_from_slice(&c2.sides[w2]);
            let va = s.push(a_nbrs).unwrap();
            let mut b_nbrs = c1.sides[1 - w1].clone();
            b_nbrs.extend_from_slice(&c2.sides[1 - w2]);
            b_nbrs.push(va);
            let vb = s.push(b_nbrs).unwrap();
            // sides of the merged component: everything adjacent to va joins
            // vb's side and vice versa
            let mut side_a = c1.sides[1 - w1].clone();
            side_a.extend_from_slice(&c2.sides[1 - w2].clone());
            side_a.push(va);
            let mut side_b = c1.sides[w1].clone();
            side_b.extend_from_slice(&c2.sides[w2].clone());
            side_b.push(vb);
            next.push(GradeComponent {
                sides: [side_a, side_b],
            });
        }
        comps = next;
    }
    s.meta.declared_n = Some(s.len());
    s.meta.declared_k = Some(2);
    s
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeGenError {
    #[error(transparent)]
    Forest(#[from] crate::forest::ForestError),
}

/// A bipartite stream whose component-merge forest equals `t`: leaves arrive
/// isolated, every internal vertex arrives with exactly one edge into each
/// child's component (attachment vertices chosen by seed).
pub fn gen_tree_merge_instance(t: &RootedForest, seed: u64) -> ArrivalStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ArrivalStream::new();
    for v in 0..t.len() {
        let mut nbrs = Vec::new();
        for &c in t.children(v) {
            let comp = t.subtree(c);
            nbrs.push(comp[rng.random_range(0..comp.len())]);
        }
        s.push(nbrs).unwrap();
    }
    s.meta.declared_n = Some(t.len());
    s.meta.declared_k = Some(2);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{forest_from_shapes, Shape};
    use crate::oracle::{chromatic_number, is_bipartite, SmallGraph};

    fn stream_edges(s: &ArrivalStream) -> Vec<(usize, usize)> {
        s.edges().collect()
    }

    #[test]
    fn adversary_rejects_odd_n() {
        assert_eq!(gen_firstfit_adversary(5), Err(GenError::OddAdversary(5)));
        assert_eq!(gen_firstfit_adversary(0), Err(GenError::OddAdversary(0)));
    }

    #[test]
    fn adversary_is_bipartite_small_by_oracle() {
        for n in [2usize, 4, 6, 8, 10, 12] {
            let s = gen_firstfit_adversary(n).unwrap();
            let g = SmallGraph::new(n, &stream_edges(&s)).unwrap();
            assert!(chromatic_number(&g, 12).unwrap() <= 2);
        }
    }

    #[test]
    fn random_k_colorable_respects_plant() {
        for seed in 0..5 {
            let s = gen_random_k_colorable(30, 3, 0.5, seed).unwrap();
            let plant = planted_partition(30, 3, seed);
            for (u, v) in s.edges() {
                assert_ne!(plant[u], plant[v]);
            }
        }
    }

    #[test]
    fn k1_is_edgeless() {
        let s = gen_random_k_colorable(10, 1, 1.0, 3).unwrap();
        assert_eq!(s.edge_count(), 0);
    }

    #[test]
    fn dense_three_partite_has_chi_three() {
        let s = gen_random_k_colorable(10, 3, 1.0, 5).unwrap();
        let g = SmallGraph::new(10, &stream_edges(&s)).unwrap();
        assert_eq!(chromatic_number(&g, 12).unwrap(), 3);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            gen_random_k_colorable(40, 4, 0.3, 9).unwrap(),
            gen_random_k_colorable(40, 4, 0.3, 9).unwrap()
        );
        assert_eq!(gen_grade_instance(4, 2), gen_grade_instance(4, 2));
    }

    #[test]
    fn grade_instance_sizes_and_bipartite() {
        assert_eq!(gen_grade_instance(0, 0).len(), 2);
        assert_eq!(gen_grade_instance(0, 0).edge_count(), 1);
        assert_eq!(gen_grade_instance(2, 0).len(), 14);
        for h in 0..=3 {
            for seed in 0..4 {
                let s = gen_grade_instance(h, seed);
                assert_eq!(s.len(), 4 * (1 << h) - 2);
                assert!(is_bipartite(s.len(), &stream_edges(&s)));
                if s.len() <= 12 {
                    let g = SmallGraph::new(s.len(), &stream_edges(&s)).unwrap();
                    assert!(chromatic_number(&g, 12).unwrap() <= 2);
                }
            }
        }
    }

    #[test]
    fn tree_merge_single_leaf() {
        let f = forest_from_shapes(&[Shape::Leaf]);
        let s = gen_tree_merge_instance(&f, 0);
        assert_eq!(s.len(), 1);
        assert_eq!(s.edge_count(), 0);
    }

    #[test]
    fn tree_merge_cherry_is_path() {
        let f = forest_from_shapes(&[Shape::Node(vec![Shape::Leaf, Shape::Leaf])]);
        let s = gen_tree_merge_instance(&f, 0);
        assert_eq!(s.len(), 3);
        assert_eq!(s.edge_count(), 2);
        assert_eq!(s.neighbors(2), &[0, 1]);
    }

    #[test]
    fn complete_binary_tree_vertex_count() {
        fn complete(d: usize) -> Shape {
            if d == 0 {
                Shape::Leaf
            } else {
                Shape::Node(vec![complete(d - 1), complete(d - 1)])
            }
        }
        for d in 0..5 {
            let f = forest_from_shapes(&[complete(d)]);
            let s = gen_tree_merge_instance(&f, 1);
            assert_eq!(s.len(), (1 << (d + 1)) - 1);
        }
    }
}

/// A random binary tree with the given number of leaves (uniform random
/// splits), realized as a merge-forest stream.
pub fn gen_random_tree_instance(leaves: usize, seed: u64) -> ArrivalStream {
    use crate::forest::{forest_from_shapes, Shape};
    fn build(m: usize, rng: &mut ChaCha8Rng) -> Shape {
        if m == 1 {
            return Shape::Leaf;
        }
        let left = rng.random_range(1..m);
        Shape::Node(vec![build(left, rng), build(m - left, rng)])
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = build(leaves.max(1), &mut rng);
    let attach_seed = rng.random();
    gen_tree_merge_instance(&forest_from_shapes(&[shape]), attach_seed)
}

/// The grade-h structure with wirings chosen adversarially against the
/// deterministic component-merging algorithm: at every merge a wiring that
/// forces a promotion is selected when one exists. Pairing order stays
/// seeded. This realizes the deterministic 2·log n forcing behavior on the
/// same component-merge forest the random instance uses.
pub fn gen_grade_adversarial_instance(h: u32, seed: u64) -> ArrivalStream {
    use crate::bipartite::{Coins, LstState};
    struct NoCoins;
    impl Coins for NoCoins {
        fn flip(&mut self) -> bool {
            unreachable!()
        }
    }
    struct AdvComp {
        sides: [Vec<VertexId>; 2],
        level: u32,
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ArrivalStream::new();
    let mut st = LstState::new(false);
    let mut comps: Vec<AdvComp> = Vec::new();
    for _ in 0..(1usize << h) {
        let a = s.push(vec![]).unwrap();
        st.step(a, &[], &mut NoCoins);
        let b = s.push(vec![a]).unwrap();
        st.step(b, &[a], &mut NoCoins);
        comps.push(AdvComp {
            sides: [vec![a], vec![b]],
            level: 1,
        });
    }
    for _phase in 1..=h {
        comps.shuffle(&mut rng);
        let mut next = Vec::with_capacity(comps.len() / 2);
        let mut it = comps.into_iter();
        while let (Some(c1), Some(c2)) = (it.next(), it.next()) {
            let va = s.len();
            let vb = va + 1;
            let wire = |w1: usize, w2: usize| {
                let mut a_nbrs = c1.sides[w1].clone();
                a_nbrs.extend_from_slice(&c2.sides[w2]);
                let mut b_nbrs = c1.sides[1 - w1].clone();
                b_nbrs.extend_from_slice(&c2.sides[1 - w2]);
                b_nbrs.push(va);
                (a_nbrs, b_nbrs)
            };
            // try the four wirings against a copy of the algorithm state and
            // keep one that raises the component level
            let base_level = c1.level.max(c2.level);
            let mut chosen = None;
            for w1 in 0..2usize {
                for w2 in 0..2usize {
                    let (a_nbrs, b_nbrs) = wire(w1, w2);
                    let mut trial = st.clone();
                    let (_, la) = trial.step(va, &a_nbrs, &mut NoCoins);
                    let (_, lb) = trial.step(vb, &b_nbrs, &mut NoCoins);
                    if la.max(lb) > base_level && chosen.is_none() {
                        chosen = Some((w1, w2));
                    }
                }
            }
            let (w1, w2) =
                chosen.unwrap_or_else(|| (rng.random_range(0..2), rng.random_range(0..2)));
            let (a_nbrs, b_nbrs) = wire(w1, w2);
            let va_id = s.push(a_nbrs.clone()).unwrap();
            let (_, la) = st.step(va_id, &a_nbrs, &mut NoCoins);
            let vb_id = s.push(b_nbrs.clone()).unwrap();
            let (_, lb) = st.step(vb_id, &b_nbrs, &mut NoCoins);
            let mut side_a = c1.sides[1 - w1].clone();
            side_a.extend_from_slice(&c2.sides[1 - w2]);
            side_a.push(va_id);
            let mut side_b = c1.sides[w1].clone();
            side_b.extend_from_slice(&c2.sides[w2]);
            side_b.push(vb_id);
            next.push(AdvComp {
                sides: [side_a, side_b],
                level: la.max(lb).max(base_level),
            });
        }
        comps = next;
    }
    s.meta.declared_n = Some(s.len());
    s.meta.declared_k = Some(2);
    s
}
