use onlinecolor::analyze_upper::*;

fn main() {
    let ctx = RoundCtx::new(30);
    for l in 1..=5u32 {
        for shift in [2u32, 3] {
            let bw = (1usize << (2 * l + shift)) + 1;
            let g = gamma_upper_bound(l, bw, ctx);
            let num: f64 = g.gamma_num.parse().unwrap();
            let den: f64 = g.gamma_den.parse().unwrap();
            println!(
                "L={} B=2^{}+1 gamma_exact={:.12e} printed={} coeff={} argmax={}",
                l,
                2 * l + shift,
                num / den,
                g.gamma_printed,
                g.coefficient_printed,
                g.argmax_m
            );
        }
    }
}
