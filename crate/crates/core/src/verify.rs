//! The acceptance checks: every reproduced number and invariant as a
//! pass/fail criterion, shared by the `verify` CLI subcommand and the
//! acceptance test suite.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use crate::analyze_lower::{
    lower_anchor, search_bad_matrices, single_merge_min_increase, Potential, SearchConfig,
    SearchMode, State,
};
use crate::analyze_upper::{
    exact_level_distribution, expected_level2_terminals, gamma1_closed_form, gamma_upper_bound,
    max_expected_level2_terminals, RoundCtx,
};
use crate::bipartite::{lst89, randomized_lst, randomized_lst_with_tape};
use crate::forest::{forest_from_shapes, forest_shapes_up_to, RootedForest, Shape};
use crate::gen::{
    gen_firstfit_adversary, gen_grade_instance, gen_random_k_colorable, gen_random_tree_instance,
    gen_tree_merge_instance,
};
use crate::general::{
    color_k_colorable, color_locally_l, competitive_wrapper, first_fit, AlgoParams, RunOutcome,
};
use crate::k4::color_4_colorable;
use crate::ledger::{validate_coloring, ColoringLedger};
use crate::oracle::{chromatic_number, is_bipartite, is_l_color_set, SmallGraph};
use crate::stream::ArrivalStream;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub details: Vec<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name
        )
    }
}

fn result(id: u32, name: &'static str, pass: bool, details: Vec<String>) -> CriterionResult {
    CriterionResult {
        id,
        name,
        pass,
        details,
    }
}

// ---------------------------------------------------------------------------
// 1. FirstFit adversary
// ---------------------------------------------------------------------------

pub fn criterion_1_firstfit_adversary() -> CriterionResult {
    let mut pass = true;
    let mut details = Vec::new();
    for n in [4usize, 8, 16, 32, 64] {
        let s = gen_firstfit_adversary(n).unwrap();
        let colors = first_fit(&s, n as u32);
        let distinct: std::collections::BTreeSet<_> = colors.iter().flatten().collect();
        let forced = distinct.len() == n / 2 && colors.iter().all(|c| c.is_some());
        let edges: Vec<(usize, usize)> = s.edges().collect();
        let bip = if n <= 12 {
            let g = SmallGraph::new(n, &edges).unwrap();
            chromatic_number(&g, 12).unwrap() <= 2
        } else {
            is_bipartite(n, &edges)
        };
        if !(forced && bip) {
            pass = false;
        }
        details.push(format!(
            "n={n}: firstfit colors = {} (want {}), bipartite = {bip}",
            distinct.len(),
            n / 2
        ));
    }
    result(1, "firstfit adversary forces n/2 colors on a bipartite stream", pass, details)
}

// ---------------------------------------------------------------------------
// 2. Deterministic ceiling
// ---------------------------------------------------------------------------

pub fn criterion_2_lst_ceiling() -> CriterionResult {
    let mut pass = true;
    let mut details = Vec::new();
    let mut runs = 0;
    let mut check = |s: &ArrivalStream, label: &str, pass: &mut bool| {
        let run = lst89(s);
        let bound = 2.0 * ((s.len() + 1) as f64).log2();
        if (run.max_color() as f64) > bound + 1e-9 {
            *pass = false;
            details.push(format!(
                "{label}: {} colors above 2·log2(n+1) = {bound:.3}",
                run.max_color()
            ));
        }
    };
    for seed in 0..80u64 {
        let s = gen_grade_instance(1 + (seed % 8) as u32, seed);
        check(&s, &format!("grade seed {seed}"), &mut pass);
        runs += 1;
    }
    for seed in 0..60u64 {
        let s = gen_random_tree_instance(2 + (seed as usize % 60), seed);
        check(&s, &format!("tree seed {seed}"), &mut pass);
        runs += 1;
    }
    for seed in 0..60u64 {
        let n = 20 + (seed as usize * 7) % 300;
        let s = gen_random_k_colorable(n, 2, 0.05 + (seed as f64 % 10.0) / 12.0, seed).unwrap();
        check(&s, &format!("bipartite seed {seed}"), &mut pass);
        runs += 1;
    }
    let mut d = vec![format!("{runs} runs, every one within 2·log2(n+1)")];
    d.extend(details);
    result(2, "deterministic bipartite ceiling 2·log2(n+1)", pass, d)
}

// ---------------------------------------------------------------------------
// 3. Distribution equivalence
// ---------------------------------------------------------------------------

/// Exact joint distribution of the level vector from the randomized
/// algorithm, by enumerating every coin tape.
fn lst_joint_distribution(stream: &ArrivalStream) -> Vec<(Vec<u32>, Rational64)> {
    let max_coins = stream.len();
    let mut acc: Vec<(Vec<u32>, Rational64)> = Vec::new();
    let total = 1u64 << max_coins;
    let weight = Rational64::new(1, total as i64);
    for bits in 0..total {
        let tape: Vec<bool> = (0..max_coins).map(|i| bits >> i & 1 == 1).collect();
        let (run, _used) = randomized_lst_with_tape(stream, &tape);
        match acc.iter_mut().find(|(l, _)| *l == run.levels) {
            Some((_, p)) => *p += weight,
            None => acc.push((run.levels, weight)),
        }
    }
    acc
}

/// Exact joint distribution of the level vector from the forest-level
/// process (leaves level 1; promotion with probability 1 − 2^{−(c−1)}).
fn forest_joint_distribution(t: &RootedForest) -> Vec<(Vec<u32>, Rational64)> {
    let mut acc: Vec<(Vec<u32>, Rational64)> = vec![(Vec::new(), Rational64::one())];
    for v in 0..t.len() {
        let mut next = Vec::new();
        for (levels, p) in acc {
            if t.is_leaf(v) {
                let mut l2 = levels.clone();
                l2.push(1);
                next.push((l2, p));
            } else {
                let top = t.children(v).iter().map(|&c| levels[c]).max().unwrap();
                let cnt = t.children(v).iter().filter(|&&c| levels[c] == top).count();
                let stay = Rational64::new(1, 1i64 << (cnt - 1));
                let mut keep = levels.clone();
                keep.push(top);
                let mut bump = levels.clone();
                bump.push(top + 1);
                if !stay.is_zero() {
                    next.push((keep, p * stay));
                }
                let promote = p * (Rational64::one() - stay);
                if !promote.is_zero() {
                    next.push((bump, promote));
                }
            }
        }
        // merge duplicates
        let mut merged: Vec<(Vec<u32>, Rational64)> = Vec::new();
        for (l, p) in next {
            match merged.iter_mut().find(|(m, _)| *m == l) {
                Some((_, q)) => *q += p,
                None => merged.push((l, p)),
            }
        }
        acc = merged;
    }
    acc
}

pub fn criterion_3_distribution_equivalence() -> CriterionResult {
    let mut pass = true;
    let mut details = Vec::new();
    let forests = forest_shapes_up_to(6);
    let mut checked = 0;
    for shapes in &forests {
        let t = forest_from_shapes(shapes);
        if t.len() > 14 {
            continue;
        }
        let stream = gen_tree_merge_instance(&t, 7 + t.len() as u64);
        let joint = lst_joint_distribution(&stream);
        // marginals against the exact per-vertex distributions
        let exact = exact_level_distribution(&t, 48).unwrap();
        for v in 0..t.len() {
            for &(level, p_exact) in &exact[v] {
                let p_joint: Rational64 = joint
                    .iter()
                    .filter(|(l, _)| l[v] == level)
                    .map(|&(_, p)| p)
                    .sum();
                if p_joint != p_exact {
                    pass = false;
                    details.push(format!(
                        "forest {:?} vertex {v} level {level}: joint {} vs exact {}",
                        shapes.len(),
                        p_joint,
                        p_exact
                    ));
                }
            }
        }
        // the full joint against the forest-level process
        let mut forest_joint = forest_joint_distribution(&t);
        let mut lst_joint = joint;
        forest_joint.sort_by(|a, b| a.0.cmp(&b.0));
        lst_joint.sort_by(|a, b| a.0.cmp(&b.0));
        if forest_joint != lst_joint {
            pass = false;
            details.push("joint distributions diverge".into());
        }
        checked += 1;
    }
    let mut d = vec![format!(
        "{checked} forests with at most 6 leaves, exact dyadic equality of marginals and joints"
    )];
    d.extend(details.into_iter().take(5));
    result(3, "level distribution equals the forest-level process", pass, d)
}

// ---------------------------------------------------------------------------
// 4. Level-2 terminal maxima
// ---------------------------------------------------------------------------

pub fn criterion_4_terminal_values() -> CriterionResult {
    let want: [(usize, (i64, i64)); 4] = [(1, (0, 1)), (2, (1, 2)), (3, (3, 4)), (4, (9, 8))];
    let mut pass = true;
    let mut details = Vec::new();
    for (m, (num, den)) in want {
        let got = max_expected_level2_terminals(m);
        let expect = BigRational::new(BigInt::from(num), BigInt::from(den));
        if got != expect {
            pass = false;
        }
        details.push(format!("a_{m} = {got} (want {num}/{den})"));
    }
    result(4, "level-2 terminal maxima a_1..a_4", pass, details)
}

// ---------------------------------------------------------------------------
// 5. Closed-form γ
// ---------------------------------------------------------------------------

pub fn criterion_5_gamma_closed_form() -> CriterionResult {
    let mut pass = true;
    let mut details = Vec::new();
    let g6 = gamma1_closed_form(6);
    let lo = BigRational::new(BigInt::from(282228), BigInt::from(1_000_000));
    let hi = BigRational::new(BigInt::from(282229), BigInt::from(1_000_000));
    if !(g6 > lo && g6 < hi) {
        pass = false;
    }
    details.push(format!("Σ(6 terms) = {g6} ∈ (0.282228, 0.282229): {}", g6 > lo && g6 < hi));
    for k in 1..=4u32 {
        let leaves = 1usize << k;
        fn complete(d: u32) -> Shape {
            if d == 0 {
                Shape::Leaf
            } else {
                Shape::Node(vec![complete(d - 1), complete(d - 1)])
            }
        }
        let f = forest_from_shapes(&[complete(k)]);
        let direct = expected_level2_terminals(&f);
        let closed = BigRational::from(BigInt::from(leaves)) * gamma1_closed_form(k);
        if direct != closed {
            pass = false;
        }
        details.push(format!("a_{{2^{k}}} = {direct} matches 2^{k}·Σ: {}", direct == closed));
    }
    result(5, "closed-form γ partial sums and a_{2^k} identity", pass, details)
}

// ---------------------------------------------------------------------------
// 6. Table of γ' and color coefficients
// ---------------------------------------------------------------------------

/// The published table rows: (L, γ' string, coefficient string).
pub const TABLE3: [(u32, &str, &str); 10] = [
    (1, "2.822285e-1", "1.095852"),
    (2, "7.373281e-2", "1.063392"),
    (3, "1.912694e-2", "1.051111"),
    (4, "4.957865e-3", "1.044924"),
    (5, "1.284998e-3", "1.041231"),
    (6, "3.330478e-4", "1.038783"),
    (7, "8.632023e-5", "1.037042"),
    (8, "2.237284e-5", "1.035741"),
    (9, "5.798723e-6", "1.034731"),
    (10, "1.502954e-6", "1.033925"),
];

/// Computes one table row at the published (B, D) = (2^{2L+2}+1, 2^30).
pub fn table3_row(l: u32) -> (String, String) {
    let b = (1usize << (2 * l + 2)) + 1;
    let g = gamma_upper_bound(l, b, RoundCtx::new(30));
    (g.gamma_printed, g.coefficient_printed)
}

pub fn criterion_6_table3(l_max: u32) -> CriterionResult {
    let mut pass = true;
    let mut details = Vec::new();
    for &(l, want_gamma, want_coeff) in TABLE3.iter().filter(|r| r.0 <= l_max) {
        let (gamma, coeff) = table3_row(l);
        let ok = gamma == want_gamma && coeff == want_coeff;
        if !ok {
            pass = false;
        }
        details.push(format!(
            "L={l}: gamma' {gamma} (want {want_gamma}) coeff {coeff} (want {want_coeff}){}",
            if ok { "" } else { "  <-- MISMATCH" }
        ));
    }
    result(6, "round-up DP reproduces the published γ'/coefficient table", pass, details)
}

// ---------------------------------------------------------------------------
// 7. Single-merge potential bound
// ---------------------------------------------------------------------------

pub fn criterion_7_phi1_merge_bound() -> CriterionResult {
    let mut pass = true;
    let mut details = Vec::new();
    let mut states = Vec::new();
    for x in 0..8u64 {
        for y in 0..8u64 {
            let s = State::new(x, y);
            if s.non_inclusion() {
                states.push(s);
            }
        }
    }
    let three_quarters = Rational64::new(3, 4);
    let mut min = None::<Rational64>;
    let mut exceptional = 0usize;
    for &s1 in &states {
        for &s2 in &states {
            let f = single_merge_min_increase(s1, s2, Potential::Phi1);
            if f < three_quarters {
                pass = false;
                details.push(format!("f({s1:?}, {s2:?}) = {f} < 3/4"));
            }
            min = Some(min.map_or(f, |m: Rational64| m.min(f)));
            if f == Rational64::one() {
                exceptional += 1;
            }
        }
    }
    // the exceptional configuration increases by exactly 1
    let e = State::from_colors(&[1], &[2]);
    if single_merge_min_increase(e, e, Potential::Phi1) != Rational64::one() {
        pass = false;
        details.push("minimal exceptional pair is not exactly 1".into());
    }
    details.insert(
        0,
        format!(
            "{} state pairs over 3 colors, min expected increase = {}, exceptional-value pairs = {exceptional}",
            states.len() * states.len(),
            min.unwrap()
        ),
    );
    result(7, "expected potential increase of one merge is at least 3/4", pass, details)
}

// ---------------------------------------------------------------------------
// 8. Pair-search anchors
// ---------------------------------------------------------------------------

pub fn criterion_8_lowerbound_anchors() -> CriterionResult {
    let phi2 = lower_anchor(Potential::Phi2);
    let phib = lower_anchor(Potential::PhiB);
    let want2 = Rational64::new(31, 42);
    let wantb = Rational64::new(1, 3);
    let pass = phi2 == want2 && phib == wantb;
    result(
        8,
        "empty-pair search anchors 31/42 and 1/3",
        pass,
        vec![
            format!("g(∅,∅) under the two-phase potential: {phi2} (want 31/42)"),
            format!("g(∅,∅) under the decomposition potential: {phib} (want 1/3)"),
        ],
    )
}

// ---------------------------------------------------------------------------
// 9 & 10. Full searches
// ---------------------------------------------------------------------------

pub fn criterion_9_phi2_search(workers: usize) -> CriterionResult {
    let mut cfg = SearchConfig::new(SearchMode::Phi2);
    cfg.workers = workers;
    let res = search_bad_matrices(&cfg);
    let want_min = Rational64::new(89, 48);
    let min_ok = res
        .min_potential_increase
        .as_deref()
        .and_then(parse_rat)
        .map(|m| m >= want_min);
    let pass = res.count_pruned_pass == 62195
        && res.count_rows_with_1_and_2 == 22558
        && res.count_threshold_pass == 16829
        && min_ok == Some(true);
    result(
        9,
        "two-phase search counts (62195, 22558, 16829) with minimum at least 89/48",
        pass,
        vec![format!(
            "counts = ({}, {}, {}), min = {:?}",
            res.count_pruned_pass,
            res.count_rows_with_1_and_2,
            res.count_threshold_pass,
            res.min_potential_increase
        )],
    )
}

pub fn criterion_10_phiab_search(workers: usize, checkpoint: Option<&std::path::Path>) -> CriterionResult {
    let mut cfg = SearchConfig::new(SearchMode::PhiAB);
    cfg.workers = workers;
    let res = crate::analyze_lower::search_bad_matrices_with_checkpoint(&cfg, checkpoint);
    let want_min = Rational64::new(91, 96);
    let min_ok = res
        .min_potential_increase
        .as_deref()
        .and_then(parse_rat)
        .map(|m| m >= want_min);
    let pass = res.count_pruned_pass == 1_773_334
        && res.count_rows_with_1_and_2 == 700_415
        && res.count_threshold_pass == 415_942
        && min_ok == Some(true);
    result(
        10,
        "decomposed search counts (1773334, 700415, 415942) with minimum at least 91/96",
        pass,
        vec![format!(
            "counts = ({}, {}, {}), min = {:?}",
            res.count_pruned_pass,
            res.count_rows_with_1_and_2,
            res.count_threshold_pass,
            res.min_potential_increase
        )],
    )
}

fn parse_rat(s: &str) -> Option<Rational64> {
    match s.split_once('/') {
        Some((n, d)) => Some(Rational64::new(n.parse().ok()?, d.parse().ok()?)),
        None => Some(Rational64::new(s.parse().ok()?, 1)),
    }
}

// ---------------------------------------------------------------------------
// 11. Property suite
// ---------------------------------------------------------------------------

pub fn criterion_11_property_suite() -> CriterionResult {
    let mut pass = true;
    let mut details = Vec::new();
    let params = AlgoParams::default();
    let mut runs = 0usize;
    let mut telemetry: Vec<String> = Vec::new();

    fn check_ledger(
        s: &ArrivalStream,
        ledger: &ColoringLedger,
        label: String,
        pass: &mut bool,
        details: &mut Vec<String>,
    ) {
        if !validate_coloring(s, ledger).is_ok() {
            *pass = false;
            details.push(format!("{label}: improper coloring"));
        }
    }

    // bipartite algorithms
    for seed in 0..120u64 {
        let s = match seed % 3 {
            0 => gen_grade_instance(3 + (seed % 6) as u32, seed),
            1 => gen_random_tree_instance(4 + (seed as usize % 40), seed),
            _ => gen_random_k_colorable(30 + (seed as usize * 13) % 400, 2, 0.2, seed).unwrap(),
        };
        let det = lst89(&s);
        let rnd = randomized_lst(&s, seed ^ 0xabc);
        for (label, run) in [("lst", det), ("rand", rnd)] {
            let mut ledger = ColoringLedger::new();
            for (v, &c) in run.colors.iter().enumerate() {
                ledger.assign(v, c);
            }
            check_ledger(&s, &ledger, format!("{label} seed {seed}"), &mut pass, &mut details);
            runs += 1;
        }
    }

    // locally-ℓ and the k-colorable pipeline, planted and adversarial
    let mut abort_checked = 0usize;
    for seed in 0..100u64 {
        let k = 2 + (seed % 4) as u32;
        let n = 40 + (seed as usize * 17) % 360;
        let s = gen_random_k_colorable(n, k, 0.15 + (seed % 5) as f64 * 0.15, seed).unwrap();
        match color_k_colorable(&s, k, &params) {
            Ok(RunOutcome::Complete { ledger }) => {
                check_ledger(&s, &ledger, format!("kcolor k={k} seed {seed}"), &mut pass, &mut details);
                telemetry.push(format!(
                    "kcolor k={k} n={n} colors={}",
                    ledger.colors_used()
                ));
            }
            Ok(RunOutcome::Aborted { .. }) => {
                pass = false;
                details.push(format!("kcolor aborted on planted k={k} seed {seed}"));
            }
            Err(e) => {
                pass = false;
                details.push(format!("kcolor error: {e}"));
            }
        }
        runs += 1;
    }
    for seed in 0..100u64 {
        let ell = 1 + (seed % 3) as u32;
        let n = 30 + (seed as usize * 11) % 220;
        let density = 0.05 + (seed % 7) as f64 * 0.1;
        let s = gen_random_k_colorable(n, 6, density, seed).unwrap();
        match color_locally_l(&s, ell, &params) {
            Ok(outcome) => {
                let prefix_len = match &outcome {
                    RunOutcome::Complete { .. } => s.len(),
                    RunOutcome::Aborted { at, .. } => *at + 1,
                };
                let mut prefix = ArrivalStream::new();
                for v in 0..prefix_len {
                    prefix.push(s.neighbors(v).to_vec()).unwrap();
                }
                check_ledger(
                    &prefix,
                    outcome.ledger(),
                    format!("locally ell={ell} seed {seed}"),
                    &mut pass,
                    &mut details,
                );
                if let RunOutcome::Aborted {
                    certificate: Some(cert),
                    ..
                } = &outcome
                {
                    if cert.witness.len() <= params.oracle_cap && !cert.witness.is_empty() {
                        match cert.verify(&s, params.oracle_cap) {
                            Ok(true) => abort_checked += 1,
                            Ok(false) => {
                                pass = false;
                                details.push(format!(
                                    "certificate failed oracle check (ell={ell}, seed={seed})"
                                ));
                            }
                            Err(_) => {}
                        }
                    }
                }
            }
            Err(e) => {
                pass = false;
                details.push(format!("locally error: {e}"));
            }
        }
        runs += 1;
    }

    // the 4-colorable pipeline with its audits
    for seed in 0..30u64 {
        let n = 120 + (seed as usize * 29) % 420;
        let s = gen_random_k_colorable(n, 4, 0.3 + (seed % 3) as f64 * 0.2, seed).unwrap();
        match color_4_colorable(&s, &params) {
            Ok(run) => {
                check_ledger(&s, run.outcome.ledger(), format!("k4 seed {seed}"), &mut pass, &mut details);
                telemetry.push(format!(
                    "k4 n={n} colors={} else={} ta={} tb={}",
                    run.outcome.ledger().colors_used(),
                    run.extras.else_vertices,
                    run.extras.t_a_size,
                    run.extras.t_b_size
                ));
                // surviving-seed disjointness
                for audit in &run.extras.seed_rows {
                    let survivors: Vec<&Vec<usize>> = audit
                        .iter()
                        .filter(|(alive, _)| *alive)
                        .map(|(_, s)| s)
                        .collect();
                    for i in 0..survivors.len() {
                        for j in i + 1..survivors.len() {
                            let a: std::collections::HashSet<_> = survivors[i].iter().collect();
                            if survivors[j].iter().any(|v| a.contains(v)) {
                                pass = false;
                                details.push(format!("k4 seed {seed}: surviving seeds overlap"));
                            }
                        }
                    }
                }
                // dense groups pairwise disjoint
                for groups in &run.extras.division_groups {
                    for i in 0..groups.len() {
                        for j in i + 1..groups.len() {
                            let a: std::collections::HashSet<_> = groups[i].iter().collect();
                            if groups[j].iter().any(|v| a.contains(v)) {
                                pass = false;
                                details.push(format!("k4 seed {seed}: dense groups overlap"));
                            }
                        }
                    }
                }
            }
            Err(e) => {
                pass = false;
                details.push(format!("k4 error: {e}"));
            }
        }
        runs += 1;
    }

    // competitive wrapper never fails
    for seed in 0..50u64 {
        let n = 30 + (seed as usize * 23) % 400;
        let s = gen_random_k_colorable(n, 3 + (seed % 6) as u32, 0.5, seed).unwrap();
        match competitive_wrapper(&s, &params) {
            Ok(ledger) => {
                check_ledger(&s, &ledger, format!("competitive seed {seed}"), &mut pass, &mut details);
                if ledger.colors_used() > n {
                    pass = false;
                    details.push(format!("competitive used more than n colors (seed {seed})"));
                }
            }
            Err(e) => {
                pass = false;
                details.push(format!("competitive error: {e}"));
            }
        }
        runs += 1;
    }

    // round-up dominance spot check
    {
        use crate::analyze_upper::{dp_b_prime, dp_p_prime};
        let coarse = RoundCtx::new(12);
        let fine = RoundCtx::new(24);
        let pc = dp_p_prime(40, 3, coarse);
        let pf = dp_p_prime(40, 3, fine);
        let bc = dp_b_prime(40, &pc[1], coarse);
        let bf = dp_b_prime(40, &pf[1], fine);
        for m in 1..=40usize {
            for t in 0..3 {
                if coarse.to_big(pc[t][m]) < fine.to_big(pf[t][m]) {
                    pass = false;
                    details.push(format!("round-up dominance broken at p[{t}][{m}]"));
                }
            }
            if coarse.to_big(bc[m]) < fine.to_big(bf[m]) {
                pass = false;
                details.push(format!("round-up dominance broken at b[{m}]"));
            }
        }
    }

    let mut d = vec![format!(
        "{runs} randomized runs, all proper; {abort_checked} abort certificates oracle-verified"
    )];
    d.push(format!("telemetry sample: {:?}", &telemetry.iter().take(3).collect::<Vec<_>>()));
    d.extend(details.into_iter().take(8));
    result(11, "property suite: proper colorings, certificates, audits, dominance", pass, d)
}

// ---------------------------------------------------------------------------
// 12. Randomized beats deterministic
// ---------------------------------------------------------------------------

pub fn criterion_12_randomized_beats_deterministic() -> CriterionResult {
    let trials = 1000u64;
    let h = 8;
    // deterministic forcing only shows on adversarially wired instances: on
    // randomly wired ones the wiring coin plays the randomized algorithm's
    // role and the two processes coincide (reported as telemetry)
    let mut adv_det = 0u64;
    let mut adv_rnd = 0u64;
    let mut rand_det = 0u64;
    let mut rand_rnd = 0u64;
    for seed in 0..trials {
        let adv = crate::gen::gen_grade_adversarial_instance(h, seed);
        adv_det += lst89(&adv).max_color() as u64;
        adv_rnd += randomized_lst(&adv, seed ^ 0x5eed).max_color() as u64;
        let plain = gen_grade_instance(h, seed);
        rand_det += lst89(&plain).max_color() as u64;
        rand_rnd += randomized_lst(&plain, seed ^ 0x5eed).max_color() as u64;
    }
    let t = trials as f64;
    let margin = (adv_det as f64 - adv_rnd as f64) / t;
    let pass = margin >= 0.5;
    result(
        12,
        "randomized variant beats deterministic by at least half a color",
        pass,
        vec![
            format!(
                "adversarially wired grade-{h}, {trials} paired seeds: deterministic mean {:.3}, randomized mean {:.3}, margin {margin:.3}",
                adv_det as f64 / t,
                adv_rnd as f64 / t
            ),
            format!(
                "randomly wired grade-{h} (telemetry): deterministic {:.3} vs randomized {:.3} — the processes coincide there",
                rand_det as f64 / t,
                rand_rnd as f64 / t
            ),
        ],
    )
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Runs the gating criteria (everything but the long search and table rows
/// past L = 5); `long` adds them.
pub fn run_all(long: bool, workers: usize) -> Vec<CriterionResult> {
    let mut out = vec![
        criterion_1_firstfit_adversary(),
        criterion_2_lst_ceiling(),
        criterion_3_distribution_equivalence(),
        criterion_4_terminal_values(),
        criterion_5_gamma_closed_form(),
        criterion_6_table3(if long { 10 } else { 5 }),
        criterion_7_phi1_merge_bound(),
        criterion_8_lowerbound_anchors(),
        criterion_9_phi2_search(workers),
    ];
    if long {
        out.push(criterion_10_phiab_search(workers, None));
    }
    out.push(criterion_11_property_suite());
    out.push(criterion_12_randomized_beats_deterministic());
    out
}

// small helper reused by is_l_color_set-style family checks in tests
pub fn family_contains_one_color_set(
    stream: &ArrivalStream,
    family: &[Vec<usize>],
    k: u32,
    cap: usize,
) -> Option<bool> {
    if stream.len() > cap {
        return None;
    }
    let edges: Vec<(usize, usize)> = stream.edges().collect();
    let g = SmallGraph::new(stream.len(), &edges).ok()?;
    for set in family {
        if is_l_color_set(&g, set, k, 1, cap).ok()? {
            return Some(true);
        }
    }
    Some(false)
}
