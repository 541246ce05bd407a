use std::time::Instant;
use onlinecolor::analyze_lower::*;

fn main() {
    let t0 = Instant::now();
    let cfg = SearchConfig::new(SearchMode::Phi2);
    let res = search_bad_matrices(&cfg);
    println!(
        "phi2: pruned_pass={} rows12={} threshold_pass={} min={:?} elapsed={:?}",
        res.count_pruned_pass,
        res.count_rows_with_1_and_2,
        res.count_threshold_pass,
        res.min_potential_increase,
        t0.elapsed()
    );
    println!("expect: 62195 22558 16829 min >= 89/48 = 1.854...");
}
