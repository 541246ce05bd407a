//! Unified command-line front end: instance generation, algorithm runs and
//! batch experiments, the two analysis pipelines, and the verification
//! suite. Exit codes: 0 success, 1 usage or configuration error, 2 a run
//! produced an invalid coloring, 3 a verification criterion failed.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use onlinecolor::analyze_lower::{
    search_bad_matrices_with_checkpoint, SearchConfig, SearchMode,
};
use onlinecolor::analyze_upper::{gamma_upper_bound, RoundCtx};
use onlinecolor::report::{
    csv_line, resolve_out_dir, run_experiment, ExperimentConfig, InstanceSpec, Overrides,
    CSV_HEADER,
};
use onlinecolor::verify;

#[derive(Parser)]
#[command(name = "onlinecolor", version, about = "online graph coloring algorithms and analysis pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON or line-oriented text.
    Generate(GenerateArgs),
    /// Run one algorithm over generated instances and emit reports.
    Run(RunArgs),
    /// Compute the round-up DP tables and the γ'/coefficient row(s).
    AnalyzeUpper(AnalyzeUpperArgs),
    /// Run the state-matrix searches.
    AnalyzeLower(AnalyzeLowerArgs),
    /// Run the verification suite (pass/fail per criterion).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// fig1 | random-k | grade | tree
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    h: Option<u32>,
    #[arg(long)]
    leaves: Option<usize>,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSpec {
        InstanceSpec {
            generator: self.kind.clone(),
            n: self.n,
            k: self.k,
            density: self.density,
            h: self.h,
            leaves: self.leaves,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// json | text
    #[arg(long, default_value = "json")]
    format: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// firstfit | lst89 | randlst | locally | kcolor | k4 | competitive
    #[arg(long)]
    algorithm: Option<String>,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Explicit seeds (comma separated).
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// File with one seed per line.
    #[arg(long)]
    seeds_file: Option<PathBuf>,
    /// Threshold scale multiplier.
    #[arg(long)]
    scale: Option<f64>,
    /// Brute-force oracle cap.
    #[arg(long)]
    oracle_cap: Option<usize>,
    /// Locally-colorable level for the `locally` algorithm.
    #[arg(long)]
    ell: Option<u32>,
    /// Use the improved exponent (and the dedicated 4-colorable pipeline).
    #[arg(long, default_value_t = false)]
    improved: bool,
    /// FirstFit palette size for the `firstfit` algorithm.
    #[arg(long)]
    palette: Option<u32>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Full experiment config as a JSON file (overrides the flags above).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeUpperArgs {
    /// Layer depth L (row of the table).
    #[arg(long)]
    l: u32,
    /// Window start B (default 2^{2L+2}+1).
    #[arg(long)]
    b: Option<usize>,
    /// log2 of the round-up denominator D.
    #[arg(long, default_value_t = 30)]
    log2_d: u32,
    /// Allow the hours-scale rows (L > 5 or windows past 2^13).
    #[arg(long, default_value_t = false)]
    long: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeLowerArgs {
    /// phi2 | phiab
    #[arg(long)]
    mode: String,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Criterion ids to run (all gating ones when empty).
    criteria: Vec<u32>,
    /// Include the hours-scale reproductions (full table, second search).
    #[arg(long, default_value_t = false)]
    long: bool,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Checkpoint path for the long search.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Generate(args) => {
            let stream = args.instance.spec().build(args.seed)?;
            let text = match args.format.as_str() {
                "json" => stream.to_json(),
                "text" => stream.to_text(),
                other => return Err(format!("unknown format {other:?}").into()),
            };
            match args.out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => run_cmd(args),
        Command::AnalyzeUpper(args) => analyze_upper_cmd(args),
        Command::AnalyzeLower(args) => analyze_lower_cmd(args),
        Command::Verify(args) => verify_cmd(args),
    }
}

fn run_cmd(args: RunArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config: ExperimentConfig = if let Some(path) = &args.config {
        serde_json::from_str(&std::fs::read_to_string(path)?)?
    } else {
        let mut seeds = args.seed.clone();
        if let Some(path) = &args.seeds_file {
            for line in std::fs::read_to_string(path)?.lines() {
                let line = line.trim();
                if !line.is_empty() {
                    seeds.push(line.parse()?);
                }
            }
        }
        if seeds.is_empty() {
            seeds.push(0);
        }
        ExperimentConfig {
            algorithm: args
                .algorithm
                .clone()
                .ok_or("--algorithm is required without --config")?,
            instance: args.instance.spec(),
            seeds,
            overrides: Overrides {
                scale: args.scale,
                oracle_cap: args.oracle_cap,
                ell: args.ell,
                k: args.instance.k,
                improved: Some(args.improved),
                palette: args.palette,
            },
            out_dir: args.out_dir.clone(),
        }
    };
    let (rows, all_valid) = run_experiment(&config)?;
    match args.format.as_str() {
        "json" => println!("{}", serde_json::to_string_pretty(&rows)?),
        _ => {
            println!("{CSV_HEADER}");
            for row in &rows {
                println!("{}", csv_line(row));
            }
        }
    }
    if all_valid {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("validation failed for at least one run");
        Ok(ExitCode::from(2))
    }
}

fn analyze_upper_cmd(args: AnalyzeUpperArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let b = args.b.unwrap_or((1usize << (2 * args.l + 2)) + 1);
    if !args.long && (args.l > 5 || b > (1 << 13) + 1) {
        return Err("rows past L = 5 are hours-scale; pass --long to run them".into());
    }
    let bound = gamma_upper_bound(args.l, b, RoundCtx::new(args.log2_d));
    println!("L,B,gamma_prime,coefficient");
    println!(
        "{},{},{},{}",
        bound.l, bound.b_window, bound.gamma_printed, bound.coefficient_printed
    );
    if let Some(dir) = resolve_out_dir(args.out_dir.as_deref()) {
        std::fs::create_dir_all(&dir)?;
        let csv = dir.join(format!("upper-L{}.csv", args.l));
        let mut f = std::fs::File::create(csv)?;
        writeln!(f, "L,B,gamma_prime,coefficient")?;
        writeln!(
            f,
            "{},{},{},{}",
            bound.l, bound.b_window, bound.gamma_printed, bound.coefficient_printed
        )?;
        std::fs::write(
            dir.join(format!("upper-L{}-tables.json", args.l)),
            serde_json::to_string_pretty(&bound)?,
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn analyze_lower_cmd(args: AnalyzeLowerArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mode = match args.mode.as_str() {
        "phi2" => SearchMode::Phi2,
        "phiab" | "phiAB" => SearchMode::PhiAB,
        other => return Err(format!("unknown mode {other:?} (phi2 | phiab)").into()),
    };
    let mut config = SearchConfig::new(mode);
    config.workers = args.workers;
    let started = std::time::Instant::now();
    let res = search_bad_matrices_with_checkpoint(&config, args.checkpoint.as_deref());
    let doc = serde_json::json!({
        "mode": mode,
        "counts": {
            "pruned_pass": res.count_pruned_pass,
            "rows_with_1_and_2": res.count_rows_with_1_and_2,
            "threshold_pass": res.count_threshold_pass,
        },
        "min_value": res.min_potential_increase,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    if let Some(dir) = resolve_out_dir(args.out_dir.as_deref()) {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(
            dir.join(format!("lower-{}.json", args.mode)),
            serde_json::to_string_pretty(&doc)?,
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(args: VerifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let results = if args.criteria.is_empty() {
        verify::run_all(args.long, args.workers)
    } else {
        let mut out = Vec::new();
        for id in &args.criteria {
            out.push(match id {
                1 => verify::criterion_1_firstfit_adversary(),
                2 => verify::criterion_2_lst_ceiling(),
                3 => verify::criterion_3_distribution_equivalence(),
                4 => verify::criterion_4_terminal_values(),
                5 => verify::criterion_5_gamma_closed_form(),
                6 => verify::criterion_6_table3(if args.long { 10 } else { 5 }),
                7 => verify::criterion_7_phi1_merge_bound(),
                8 => verify::criterion_8_lowerbound_anchors(),
                9 => verify::criterion_9_phi2_search(args.workers),
                10 => verify::criterion_10_phiab_search(args.workers, args.checkpoint.as_deref()),
                11 => verify::criterion_11_property_suite(),
                12 => verify::criterion_12_randomized_beats_deterministic(),
                other => return Err(format!("unknown criterion {other}").into()),
            });
        }
        out
    };
    let mut all_pass = true;
    for r in &results {
        println!("{}", r.line());
        for d in &r.details {
            println!("    {d}");
        }
        all_pass &= r.pass;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
