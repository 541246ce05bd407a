use onlinecolor::bipartite::{lst89, randomized_lst};
use onlinecolor::gen::gen_grade_instance;

fn main() {
    for h in [8u32, 10] {
        let trials = 2000u64;
        let (mut det, mut rnd) = (0u64, 0u64);
        for seed in 0..trials {
            let s = gen_grade_instance(h, seed);
            det += lst89(&s).max_color() as u64;
            rnd += randomized_lst(&s, seed ^ 0x5eed).max_color() as u64;
        }
        println!(
            "h={h}: det mean {:.3}, rand mean {:.3}, margin {:.3}",
            det as f64 / trials as f64,
            rnd as f64 / trials as f64,
            (det as f64 - rnd as f64) / trials as f64
        );
    }
}
