use std::time::Instant;
use onlinecolor::analyze_lower::*;

fn main() {
    let t0 = Instant::now();
    let cfg = SearchConfig::new(SearchMode::PhiAB);
    let res = search_bad_matrices_with_checkpoint(
        &cfg,
        Some(std::path::Path::new("/tmp/phiab_checkpoint.json")),
    );
    println!(
        "phiAB: pruned_pass={} rows12={} threshold_pass={} min={:?} elapsed={:?}",
        res.count_pruned_pass,
        res.count_rows_with_1_and_2,
        res.count_threshold_pass,
        res.min_potential_increase,
        t0.elapsed()
    );
    println!("expect: 1773334 700415 415942 min >= 91/96 = 0.9479...");
}
