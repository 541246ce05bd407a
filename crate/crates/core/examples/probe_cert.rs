use onlinecolor::gen::gen_random_k_colorable;
use onlinecolor::general::*;
use onlinecolor::ledger::{ColorAllocator, ColoringLedger};
use onlinecolor::oracle::{chromatic_number, is_l_color_set, SmallGraph};

fn main() {
    let params = AlgoParams::default();
    'outer: for seed in 0..100u64 {
        let ell = 1 + (seed % 3) as u32;
        let n = 30 + (seed as usize * 11) % 220;
        let density = 0.05 + (seed % 7) as f64 * 0.1;
        let s = gen_random_k_colorable(n, 6, density, seed).unwrap();
        // drive engine manually to get the raw witness
        let mut alloc = ColorAllocator::new();
        let mut ledger = ColoringLedger::new();
        let mut engine: Option<LocallyLEngine> = None;
        for v in 0..s.len() {
            let mut cx = Cx { alloc: &mut alloc, ledger: &mut ledger };
            if engine.is_none() {
                engine = Some(LocallyLEngine::new(&mut cx, ell, s.len(), &params, "t"));
            }
            match engine.as_mut().unwrap().color_vertex(&mut cx, v, s.neighbors(v)) {
                Ok(Step::Colored(c)) => ledger.assign(v, c),
                Ok(Step::Aborted(c, w)) => {
                    ledger.assign(v, c);
                    if let Witness::Set { x, x_s } = &w {
                        let edges: Vec<(usize, usize)> = s.edges().collect();
                        let g = SmallGraph::new(s.len(), &edges).unwrap();
                        let sub = g.induced(x);
                        let chi = chromatic_number(&sub, 14).ok();
                        if chi.map(|c| c <= ell) == Some(true) {
                            println!("FAILING CASE: ell={ell} seed={seed} n={n} density={density:.2}");
                            println!("  X = {:?}", x);
                            println!("  X_S = {:?}", x_s);
                            println!("  chi(G[X]) = {:?} (need > {ell})", chi);
                            // check the l-color-set claim too
                            let local: Vec<usize> = x_s.iter().map(|v| x.iter().position(|w| w == v).unwrap()).collect();
                            let lset = is_l_color_set(&sub, &local, ell, ell, 14);
                            println!("  X∩S is an {ell}-color set in some {ell}-coloring: {:?}", lset);
                            // dump edges within X
                            for (i, &a) in x.iter().enumerate() {
                                for &b in x.iter().skip(i + 1) {
                                    if s.neighbors(b.max(a)).contains(&a.min(b)) {
                                        println!("  edge {a}-{b}");
                                    }
                                }
                            }
                            break 'outer;
                        }
                    }
                    continue 'outer;
                }
                Err(e) => { println!("engine error: {e}"); continue 'outer; }
            }
        }
    }
}
