//! Analysis pipeline for the randomized bipartite algorithm: exact level
//! distributions over merge forests, level-terminal counting, and the
//! round-up dynamic programs that bound the color coefficient.
//!
//! All DP values live on the grid n/D for a fixed power-of-two denominator D.
//! Each recurrence candidate is evaluated exactly in integer arithmetic
//! (denominator D², which fits in u128) and the resulting entry is rounded
//! up to the grid, so table entries never drop below the exact recurrence
//! values. Larger D therefore only sharpens the tables.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::forest::RootedForest;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyzeError {
    #[error("forest with {n} vertices exceeds the exact-distribution cap {cap}")]
    ForestTooLarge { n: usize, cap: usize },
}

/// Default cap for exact distributions (denominators stay within i64).
pub const DEFAULT_FOREST_CAP: usize = 48;

// ---------------------------------------------------------------------------
// Level generation over merge forests
// ---------------------------------------------------------------------------

/// One sample of the level vector: leaves get level 1; an internal vertex
/// with c children at the maximum child level ℓ* keeps ℓ* with probability
/// 2^{−(c−1)} and moves to ℓ*+1 otherwise.
pub fn simulate_forest_levels(t: &RootedForest, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels = vec![0u32; t.len()];
    for v in 0..t.len() {
        if t.is_leaf(v) {
            levels[v] = 1;
        } else {
            let top = t.children(v).iter().map(|&c| levels[c]).max().unwrap();
            let cnt = t
                .children(v)
                .iter()
                .filter(|&&c| levels[c] == top)
                .count() as u32;
            let stay = 0.5f64.powi(cnt as i32 - 1);
            levels[v] = if rng.random_bool(stay) { top } else { top + 1 };
        }
    }
    levels
}

/// Exact per-vertex level distribution, bottom-up; sibling subtrees are
/// independent. Probabilities are dyadic rationals.
pub fn exact_level_distribution(
    t: &RootedForest,
    cap: usize,
) -> Result<Vec<Vec<(u32, Rational64)>>, AnalyzeError> {
    if t.len() > cap {
        return Err(AnalyzeError::ForestTooLarge { n: t.len(), cap });
    }
    let mut dists: Vec<Vec<(u32, Rational64)>> = Vec::with_capacity(t.len());
    for v in 0..t.len() {
        if t.is_leaf(v) {
            dists.push(vec![(1, Rational64::one())]);
            continue;
        }
        // distribution over (max child level, count at max)
        let mut joint: Vec<((u32, u32), Rational64)> = vec![((0, 0), Rational64::one())];
        for &c in t.children(v) {
            let mut next: Vec<((u32, u32), Rational64)> = Vec::new();
            for &((m, cnt), p) in &joint {
                for &(lv, q) in &dists[c] {
                    let key = if lv > m {
                        (lv, 1)
                    } else if lv == m {
                        (m, cnt + 1)
                    } else {
                        (m, cnt)
                    };
                    match next.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, acc)) => *acc += p * q,
                        None => next.push((key, p * q)),
                    }
                }
            }
            joint = next;
        }
        let mut dist: Vec<(u32, Rational64)> = Vec::new();
        let bump = |dist: &mut Vec<(u32, Rational64)>, lv: u32, p: Rational64| {
            if p.is_zero() {
                return;
            }
            match dist.iter_mut().find(|(l, _)| *l == lv) {
                Some((_, acc)) => *acc += p,
                None => dist.push((lv, p)),
            }
        };
        for ((m, cnt), p) in joint {
            let stay = Rational64::new(1, 1i64 << (cnt - 1));
            bump(&mut dist, m, p * stay);
            bump(&mut dist, m + 1, p * (Rational64::one() - stay));
        }
        dist.sort_by_key(|&(l, _)| l);
        dists.push(dist);
    }
    Ok(dists)
}

/// Pr[level of `v` ≥ t] from an exact distribution table.
pub fn tail_probability(dist: &[(u32, Rational64)], t: u32) -> Rational64 {
    dist.iter()
        .filter(|&&(l, _)| l >= t)
        .map(|&(_, p)| p)
        .sum()
}

// ---------------------------------------------------------------------------
// Level-2 terminals
// ---------------------------------------------------------------------------

/// Expected number of level-2 terminals of a binary tree: the sum of
/// 2^{−(s_v−1)} over internal vertices v, where s_v counts the leaves of
/// v's subtree. A lone leaf has no internal vertices and yields 0.
pub fn expected_level2_terminals(t: &RootedForest) -> BigRational {
    let s = t.subtree_leaf_counts();
    let mut total = BigRational::zero();
    for v in 0..t.len() {
        if !t.is_leaf(v) {
            total += BigRational::new(BigInt::one(), BigInt::from(2u64) << (s[v] - 2));
        }
    }
    total
}

/// Maximum of [`expected_level2_terminals`] over all binary trees with
/// exactly `m` leaves, by exhaustive enumeration.
pub fn max_expected_level2_terminals(m: usize) -> BigRational {
    use crate::forest::{binary_tree_shapes, forest_from_shapes};
    binary_tree_shapes(m)
        .into_iter()
        .map(|s| expected_level2_terminals(&forest_from_shapes(&[s])))
        .max()
        .expect("at least one shape")
}

/// Partial sum of γ = Σ_{i≥1} 2^{−(2^i−1+i)} = 1/2² + 1/2⁵ + 1/2¹⁰ + ⋯.
pub fn gamma1_closed_form(terms: u32) -> BigRational {
    let mut total = BigRational::zero();
    for i in 1..=terms {
        let exp = (1u64 << i) - 1 + i as u64;
        total += BigRational::new(BigInt::one(), BigInt::one() << exp);
    }
    total
}

// ---------------------------------------------------------------------------
// Round-up grid arithmetic
// ---------------------------------------------------------------------------

/// A value num/D on the fixed round-up grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RoundedRational {
    pub num: u64,
}

/// Grid context: D = 2^log2_d.
#[derive(Debug, Clone, Copy)]
pub struct RoundCtx {
    pub log2_d: u32,
}

impl RoundCtx {
    pub fn new(log2_d: u32) -> Self {
        assert!(log2_d <= 40, "denominator exponent out of range");
        Self { log2_d }
    }

    pub fn d(&self) -> u64 {
        1u64 << self.log2_d
    }

    pub fn one(&self) -> RoundedRational {
        RoundedRational { num: self.d() }
    }

    pub fn zero(&self) -> RoundedRational {
        RoundedRational { num: 0 }
    }

    pub fn to_big(&self, v: RoundedRational) -> BigRational {
        BigRational::new(BigInt::from(v.num), BigInt::from(self.d()))
    }

    /// The p' recurrence candidate for one split:
    /// 1 − (1−a)(1−b) + ½(c−a)(d−b),
    /// evaluated exactly over 2D² and rounded up to the grid once. Entries
    /// therefore never drop below the exact recurrence values, and finer
    /// grids only sharpen the table.
    #[inline]
    pub fn p_candidate(
        &self,
        a: RoundedRational,
        b: RoundedRational,
        c: RoundedRational,
        d: RoundedRational,
    ) -> RoundedRational {
        let dd = self.d() as u128;
        assert!(c.num >= a.num && d.num >= b.num, "p' must decrease in t");
        let raw = 2 * dd * dd - 2 * ((dd - a.num as u128) * (dd - b.num as u128))
            + (c.num - a.num) as u128 * (d.num - b.num) as u128;
        // exact value is raw/(2D²); round up to the grid n/D
        let shift = self.log2_d + 1;
        let num = (raw + (1u128 << shift) - 1) >> shift;
        let v = RoundedRational { num: num as u64 };
        debug_assert!(v.num <= self.d());
        v
    }

    /// The b' recurrence candidate for one split:
    /// (b_l − 1) + (b_r − 1) + p_l·p_r,
    /// exact over D² then rounded up once; the caller adds the final 1.
    #[inline]
    pub fn b_candidate(
        &self,
        bl: RoundedRational,
        br: RoundedRational,
        pl: RoundedRational,
        pr: RoundedRational,
    ) -> RoundedRational {
        let dd = self.d() as u128;
        debug_assert!(bl.num >= self.d() && br.num >= self.d(), "b' stays >= 1");
        let raw = ((bl.num - self.d()) as u128 + (br.num - self.d()) as u128) * dd
            + pl.num as u128 * pr.num as u128;
        let num = (raw + dd - 1) >> self.log2_d;
        RoundedRational { num: num as u64 }
    }
}

/// Upper-bound table p'_{m,t} for t = 1..=t_max, m = 1..=m_max, indexed
/// [t−1][m] (entry m = 0 unused). Row t = 1 is all ones; a lone leaf never
/// reaches level 2.
pub fn dp_p_prime(m_max: usize, t_max: u32, ctx: RoundCtx) -> Vec<Vec<RoundedRational>> {
    let mut rows: Vec<Vec<RoundedRational>> = Vec::with_capacity(t_max as usize);
    rows.push(vec![ctx.one(); m_max + 1]);
    for _t in 2..=t_max {
        let prev = rows.last().unwrap();
        let mut row = vec![ctx.zero(); m_max + 1];
        for m in 2..=m_max {
            row[m] = best_p_split(&row, prev, m, ctx);
        }
        rows.push(row);
    }
    rows
}

fn best_p_split(
    row: &[RoundedRational],
    prev: &[RoundedRational],
    m: usize,
    ctx: RoundCtx,
) -> RoundedRational {
    let half = m / 2;
    let eval = |ml: usize| {
        let mr = m - ml;
        ctx.p_candidate(row[ml], row[mr], prev[ml], prev[mr])
    };
    if m > 4096 {
        use rayon::prelude::*;
        (1..=half)
            .into_par_iter()
            .map(eval)
            .max()
            .unwrap_or_else(|| ctx.zero())
    } else {
        (1..=half).map(eval).max().unwrap_or_else(|| ctx.zero())
    }
}

/// Upper-bound table b'^{(L)}_m for m = 1..=m_max, given the p' row at
/// t = L+1.
pub fn dp_b_prime(
    m_max: usize,
    p_row_l1: &[RoundedRational],
    ctx: RoundCtx,
) -> Vec<RoundedRational> {
    let mut b = vec![ctx.zero(); m_max + 1];
    b[1] = ctx.one();
    for m in 2..=m_max {
        let half = m / 2;
        let eval = |ml: usize| {
            let mr = m - ml;
            ctx.b_candidate(b[ml], b[mr], p_row_l1[ml], p_row_l1[mr])
        };
        let best = if m > 4096 {
            use rayon::prelude::*;
            (1..=half).into_par_iter().map(eval).max().unwrap()
        } else {
            (1..=half).map(eval).max().unwrap()
        };
        b[m] = RoundedRational {
            num: best.num + ctx.d(),
        };
    }
    b
}

/// Result of one γ' computation.
#[derive(Debug, Clone, Serialize)]
pub struct GammaBound {
    pub l: u32,
    pub b_window: usize,
    pub log2_d: u32,
    /// γ' as an exact fraction num/den.
    pub gamma_num: String,
    pub gamma_den: String,
    /// γ' rounded up to 6 mantissa decimals, e.g. "2.822285e-1".
    pub gamma_printed: String,
    /// Color coefficient 2L/log2(1/γ'), rounded up to 6 decimals.
    pub coefficient_printed: String,
    /// The argmax m of b'_m/m over the window.
    pub argmax_m: usize,
    /// Audit slice: b'_m numerators over the window [B, 2B−1].
    pub b_slice: Vec<u64>,
}

/// Computes γ' = max(b'_B/B, ..., b'_{2B−1}/(2B−1)) and the color
/// coefficient of the randomized algorithm.
pub fn gamma_upper_bound(l: u32, b_window: usize, ctx: RoundCtx) -> GammaBound {
    let m_max = 2 * b_window - 1;
    let p = dp_p_prime(m_max, l + 1, ctx);
    let b = dp_b_prime(m_max, &p[l as usize], ctx);
    gamma_from_b_table(l, b_window, ctx, &b)
}

pub(crate) fn gamma_from_b_table(
    l: u32,
    b_window: usize,
    ctx: RoundCtx,
    b: &[RoundedRational],
) -> GammaBound {
    let m_max = 2 * b_window - 1;
    let mut best_m = b_window;
    for m in b_window..=m_max {
        // compare b[m]/m > b[best]/best exactly
        if (b[m].num as u128) * (best_m as u128) > (b[best_m].num as u128) * (m as u128) {
            best_m = m;
        }
    }
    let gamma = BigRational::new(
        BigInt::from(b[best_m].num),
        BigInt::from(ctx.d()) * BigInt::from(best_m),
    );
    let gamma_printed = format_sci_round_up(&gamma, 6);
    let coeff = color_coefficient(l, &gamma);
    GammaBound {
        l,
        b_window,
        log2_d: ctx.log2_d,
        gamma_num: gamma.numer().to_string(),
        gamma_den: gamma.denom().to_string(),
        gamma_printed,
        coefficient_printed: format_f64_round_up(coeff, 6),
        argmax_m: best_m,
        b_slice: b[b_window..=m_max].iter().map(|v| v.num).collect(),
    }
}

/// Expected colors divided by log n: 2L / log2(1/γ').
pub fn color_coefficient(l: u32, gamma: &BigRational) -> f64 {
    let num = gamma.numer().to_f64().expect("fits f64");
    let den = gamma.denom().to_f64().expect("fits f64");
    let log2_inv = (den.ln() - num.ln()) / std::f64::consts::LN_2;
    2.0 * l as f64 / log2_inv
}

/// Rounds a positive rational up to `decimals` mantissa digits in scientific
/// form, exactly: "2.822285e-1".
pub fn format_sci_round_up(x: &BigRational, decimals: u32) -> String {
    assert!(x > &BigRational::zero());
    // find exponent e with 10^e <= x < 10^{e+1}
    let mut e: i32 = 0;
    let ten = BigRational::from(BigInt::from(10));
    let one = BigRational::one();
    let mut scaled = x.clone();
    while scaled >= ten {
        scaled /= &ten;
        e += 1;
    }
    while scaled < one {
        scaled *= &ten;
        e -= 1;
    }
    // mantissa digits: ceil(scaled * 10^decimals)
    let pow = BigInt::from(10u32).pow(decimals);
    let m = (scaled * BigRational::from(pow.clone())).ceil().to_integer();
    let (m, e) = if m == pow.clone() * BigInt::from(10) {
        (pow, e + 1)
    } else {
        (m, e)
    };
    let digits = m.to_string();
    let (head, tail) = digits.split_at(1);
    format!("{head}.{tail}e{e}")
}

/// Rounds a positive float up at the given decimal place: 1.0958511 → "1.095852".
pub fn format_f64_round_up(x: f64, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    let v = (x * scale).ceil() / scale;
    format!("{v:.*}", decimals as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{binary_tree_shapes, forest_from_shapes, Shape};

    fn cherry() -> RootedForest {
        forest_from_shapes(&[Shape::Node(vec![Shape::Leaf, Shape::Leaf])])
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn leaf_only_forest_levels_are_one() {
        let f = forest_from_shapes(&[Shape::Leaf, Shape::Leaf, Shape::Leaf]);
        assert_eq!(simulate_forest_levels(&f, 0), vec![1, 1, 1]);
    }

    #[test]
    fn cherry_root_splits_half_half() {
        let d = exact_level_distribution(&cherry(), 48).unwrap();
        assert_eq!(d[2], vec![(1, r(1, 2)), (2, r(1, 2))]);
    }

    #[test]
    fn levels_weakly_increase_along_root_paths() {
        for shape in binary_tree_shapes(5) {
            let f = forest_from_shapes(&[shape]);
            for seed in 0..20 {
                let levels = simulate_forest_levels(&f, seed);
                for v in 0..f.len() {
                    for &c in f.children(v) {
                        assert!(levels[v] >= levels[c]);
                    }
                }
            }
        }
    }

    #[test]
    fn four_leaf_complete_tree_has_nine_eighths_terminals() {
        let t = Shape::Node(vec![
            Shape::Node(vec![Shape::Leaf, Shape::Leaf]),
            Shape::Node(vec![Shape::Leaf, Shape::Leaf]),
        ]);
        let f = forest_from_shapes(&[t]);
        assert_eq!(expected_level2_terminals(&f), big(9, 8));
        // and the caterpillar 4-leaf tree gives 7/8
        let t2 = Shape::Node(vec![
            Shape::Node(vec![Shape::Node(vec![Shape::Leaf, Shape::Leaf]), Shape::Leaf]),
            Shape::Leaf,
        ]);
        let f2 = forest_from_shapes(&[t2]);
        assert_eq!(expected_level2_terminals(&f2), big(7, 8));
    }

    #[test]
    fn terminal_maxima_match_known_values() {
        assert_eq!(max_expected_level2_terminals(1), big(0, 1));
        assert_eq!(max_expected_level2_terminals(2), big(1, 2));
        assert_eq!(max_expected_level2_terminals(3), big(3, 4));
        assert_eq!(max_expected_level2_terminals(4), big(9, 8));
    }

    #[test]
    fn closed_form_sum_against_distribution_oracle() {
        // Two routes to E[#level-2 terminals]: the closed-form subtree sum
        // and ½·Pr[left=1]·Pr[right=1] summed from the exact distributions.
        for m in 1..=6 {
            for shape in binary_tree_shapes(m) {
                let f = forest_from_shapes(&[shape]);
                let dists = exact_level_distribution(&f, 48).unwrap();
                let mut expect = Rational64::zero();
                for v in 0..f.len() {
                    if f.is_leaf(v) {
                        continue;
                    }
                    let level1 = |u: usize| {
                        dists[u]
                            .iter()
                            .find(|&&(lv, _)| lv == 1)
                            .map(|&(_, p)| p)
                            .unwrap_or_else(Rational64::zero)
                    };
                    let pl = level1(f.children(v)[0]);
                    let pr = level1(f.children(v)[1]);
                    expect += pl * pr * r(1, 2);
                }
                let closed = expected_level2_terminals(&f);
                assert_eq!(
                    big(*expect.numer(), *expect.denom()),
                    closed,
                    "tree with {m} leaves"
                );
            }
        }
    }

    #[test]
    fn gamma_partial_sums() {
        assert_eq!(gamma1_closed_form(1), big(1, 4));
        assert_eq!(gamma1_closed_form(2), big(9, 32));
        let g4 = gamma1_closed_form(4);
        assert!(g4 < big(282229, 1000000));
        // monotone in the number of terms
        assert!(gamma1_closed_form(3) < g4);
        assert!(g4 < gamma1_closed_form(5));
    }

    #[test]
    fn a_m_below_gamma_times_m_exhaustively() {
        let gamma = gamma1_closed_form(8);
        for m in 1..=7 {
            let a = max_expected_level2_terminals(m);
            assert!(a <= gamma.clone() * big(m as i64, 1), "m = {m}");
        }
    }

    #[test]
    fn p_prime_base_rows() {
        let ctx = RoundCtx::new(20);
        let p = dp_p_prime(8, 3, ctx);
        for m in 1..=8 {
            assert_eq!(p[0][m], ctx.one(), "p'_{{m,1}} = 1");
        }
        assert_eq!(p[1][1], ctx.zero(), "a leaf never reaches level 2");
        // cherry: exactly 1/2
        assert_eq!(p[1][2].num, ctx.d() / 2);
    }

    #[test]
    fn p_prime_monotone_in_t() {
        let ctx = RoundCtx::new(20);
        let p = dp_p_prime(40, 5, ctx);
        for t in 1..p.len() {
            for m in 1..=40 {
                assert!(p[t][m] <= p[t - 1][m]);
            }
        }
    }

    #[test]
    fn p_prime_dominates_exact_tail_probabilities() {
        let ctx = RoundCtx::new(30);
        let p = dp_p_prime(6, 4, ctx);
        for m in 1..=6usize {
            for shape in binary_tree_shapes(m) {
                let f = forest_from_shapes(&[shape]);
                let dists = exact_level_distribution(&f, 48).unwrap();
                let root = f.len() - 1;
                for t in 1..=4u32 {
                    let exact = tail_probability(&dists[root], t);
                    let bound = ctx.to_big(p[(t - 1) as usize][m]);
                    let exact_big = big(*exact.numer(), *exact.denom());
                    assert!(exact_big <= bound, "m={m} t={t}");
                }
            }
        }
    }

    #[test]
    fn b_prime_base_and_leaf_cases() {
        let ctx = RoundCtx::new(20);
        let p = dp_p_prime(8, 2, ctx);
        let b = dp_b_prime(8, &p[1], ctx);
        assert_eq!(b[1], ctx.one());
        // b'^{(1)}_2 = 1 + p'_{1,2}² = 1
        assert_eq!(b[2], ctx.one());
        for m in 1..=8 {
            assert!(b[m].num >= ctx.d(), "b' >= 1 everywhere");
        }
    }

    #[test]
    fn b_prime_dominates_truth_on_small_trees() {
        // b'_m bounds E[#level-(L+1) terminals] + Pr[root level <= L]
        // = 1 + Σ q_left·q_right over internal vertices, for L = 1.
        let ctx = RoundCtx::new(30);
        let p = dp_p_prime(6, 2, ctx);
        let b = dp_b_prime(6, &p[1], ctx);
        for m in 1..=6usize {
            for shape in binary_tree_shapes(m) {
                let f = forest_from_shapes(&[shape]);
                let dists = exact_level_distribution(&f, 48).unwrap();
                let mut truth = Rational64::one();
                for v in 0..f.len() {
                    if f.is_leaf(v) {
                        continue;
                    }
                    let ql = tail_probability(&dists[f.children(v)[0]], 2);
                    let qr = tail_probability(&dists[f.children(v)[1]], 2);
                    truth += ql * qr;
                }
                let truth_big = big(*truth.numer(), *truth.denom());
                assert!(truth_big <= ctx.to_big(b[m]), "m={m}");
            }
        }
    }

    #[test]
    fn round_up_dominance_in_d() {
        // recomputing with a larger denominator never increases any entry
        let coarse = RoundCtx::new(10);
        let fine = RoundCtx::new(20);
        let pc = dp_p_prime(30, 3, coarse);
        let pf = dp_p_prime(30, 3, fine);
        for t in 0..3 {
            for m in 1..=30 {
                assert!(coarse.to_big(pc[t][m]) >= fine.to_big(pf[t][m]));
            }
        }
        let bc = dp_b_prime(30, &pc[1], coarse);
        let bf = dp_b_prime(30, &pf[1], fine);
        for m in 1..=30 {
            assert!(coarse.to_big(bc[m]) >= fine.to_big(bf[m]));
        }
    }

    #[test]
    fn monotone_subtree_replacement_never_lowers_tails() {
        // If A's root-level tails dominate B's, grafting A in place of B
        // inside any host cannot lower the host's root tails.
        let trees: Vec<Shape> = (1..=4).flat_map(binary_tree_shapes).collect();
        let tails = |s: &Shape| {
            let f = forest_from_shapes(std::slice::from_ref(s));
            let d = exact_level_distribution(&f, 48).unwrap();
            let root = f.len() - 1;
            (1..=5u32)
                .map(|t| tail_probability(&d[root], t))
                .collect::<Vec<_>>()
        };
        let dominates =
            |a: &[Rational64], b: &[Rational64]| a.iter().zip(b).all(|(x, y)| x >= y);
        fn graft(host: &Shape, slot: &mut isize, sub: &Shape) -> Shape {
            match host {
                Shape::Leaf => {
                    let s = *slot;
                    *slot -= 1;
                    if s == 0 {
                        sub.clone()
                    } else {
                        Shape::Leaf
                    }
                }
                Shape::Node(cs) => {
                    Shape::Node(cs.iter().map(|c| graft(c, slot, sub)).collect())
                }
            }
        }
        let hosts: Vec<Shape> = (1..=3).flat_map(binary_tree_shapes).collect();
        for a in &trees {
            for b in &trees {
                let (ta, tb) = (tails(a), tails(b));
                if !dominates(&ta, &tb) {
                    continue;
                }
                for host in &hosts {
                    for slot in 0..host.leaf_count() {
                        let mut sa = slot as isize;
                        let mut sb = slot as isize;
                        let ha = graft(host, &mut sa, a);
                        let hb = graft(host, &mut sb, b);
                        assert!(
                            dominates(&tails(&ha), &tails(&hb)),
                            "replacement lowered a tail"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sci_formatting_rounds_up() {
        assert_eq!(format_sci_round_up(&big(1, 4), 6), "2.500000e-1");
        assert_eq!(
            format_sci_round_up(&big(282228501, 1000000000), 6),
            "2.822286e-1"
        );
        assert_eq!(format_sci_round_up(&big(1, 1), 6), "1.000000e0");
        assert_eq!(
            format_sci_round_up(&big(9999999999, 10000000000), 6),
            "1.000000e0"
        );
        assert_eq!(format_f64_round_up(1.0958511, 6), "1.095852");
    }

    #[test]
    fn monte_carlo_agrees_with_exact_distribution() {
        // 3-sigma agreement on the cherry root at 1e5 samples
        let f = cherry();
        let trials = 100_000;
        let mut level2 = 0u32;
        for seed in 0..trials {
            if simulate_forest_levels(&f, seed as u64)[2] == 2 {
                level2 += 1;
            }
        }
        let p_hat = level2 as f64 / trials as f64;
        let sigma = (0.5 * 0.5 / trials as f64).sqrt();
        assert!((p_hat - 0.5).abs() < 3.0 * sigma, "p_hat = {p_hat}");
    }
}
