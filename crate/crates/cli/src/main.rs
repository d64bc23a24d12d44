use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use streammatch_core::graph::Graph;
use streammatch_core::instances::{
    build_hard_instance, gen_random, log_gadget_k, xor_gadget, GenKind, GenSpec, InducedFamily, DEFAULT_GADGET_K,
};
use streammatch_core::oracle::{
    all_maximum_matchings, brute_force_matching_size, max_matching, BRUTE_FORCE_LIMIT, ENUMERATION_EDGE_LIMIT,
};
use streammatch_core::sparsifier::{derive_params, DEFAULT_B, DEFAULT_GAMMA};
use streammatch_core::stream::{derive_seed, rng_for, INSTANCE_SUBSTREAM};
use streammatch_core::trial::{
    emit_report, run_trials, write_report, Algorithm, Checks, InstanceSpec, ReportFormat, TrialConfig,
};

/// Exit code when a structural check fails.
const CHECK_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "match-bench", version, about = "Streaming matching experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials of one algorithm and write a report.
    Run(RunArgs),
    /// Check the XOR gadget matching law exhaustively for every odd k up to --kmax.
    VerifyGadgets {
        #[arg(long, default_value_t = 7)]
        kmax: usize,
    },
    /// Sample hard instances over an induced-matching family and check their matching bounds.
    Hard(HardArgs),
    /// Write a random graph as an edge list.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    /// bipartite-gnp, general-gnp or planted-matching.
    #[arg(long = "gen", default_value = "bipartite-gnp")]
    kind: GenKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// Planted matching size (planted-matching only).
    #[arg(long)]
    plant: Option<usize>,
}

impl GenArgs {
    fn spec(&self) -> GenSpec {
        GenSpec {
            kind: self.kind,
            n: self.n,
            p: self.p,
            plant: self.plant,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "beats23")]
    algo: Algorithm,
    #[command(flatten)]
    gen: GenArgs,
    /// Edge-list file; overrides the generator.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, requires = "beta_minus")]
    beta_plus: Option<f64>,
    #[arg(long, requires = "beta_plus")]
    beta_minus: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_B)]
    b: usize,
    /// Abort a trial once U holds this many edges.
    #[arg(long)]
    u_cap: Option<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma list: edcs, census, dichotomy:<delta>[:<delta>...].
    #[arg(long, default_value = "")]
    checks: Checks,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv; inferred from --out when absent.
    #[arg(long)]
    format: Option<ReportFormat>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct HardArgs {
    /// Family JSON, or an edge list (every edge becomes its own induced matching).
    #[arg(long)]
    base: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, conflicts_with = "log_k")]
    k: Option<usize>,
    /// Use k = 2*ceil(log_{4/3} N) + 1 with N the larger side of the base graph.
    #[arg(long)]
    log_k: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving each sample as an edge list plus a JSON ground-truth sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::VerifyGadgets { kmax } => verify_gadgets(kmax),
        Command::Hard(args) => hard(args),
        Command::Gen { gen, seed, out } => generate(&gen, seed, &out).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let mut params = derive_params(args.eps)?.with_gamma(args.gamma)?.with_b(args.b)?;
    if let (Some(bp), Some(bm)) = (args.beta_plus, args.beta_minus) {
        params = params.with_betas(bp, bm)?;
    }
    if let Some(cap) = args.u_cap {
        params = params.with_u_cap(cap);
    }
    let instance = match &args.input {
        Some(path) => InstanceSpec::File(path.clone()),
        None => InstanceSpec::Generated(args.gen.spec()),
    };
    let config = TrialConfig {
        algo: args.algo,
        instance,
        params,
        trials: args.trials,
        base_seed: args.seed,
        checks: args.checks,
        threads: args.threads,
        output: args.out.clone(),
    };
    let report = run_trials(&config)?;
    match &args.out {
        Some(path) => {
            let format = args.format.unwrap_or_else(|| ReportFormat::for_path(path));
            emit_report(&report, format, path).with_context(|| format!("writing {}", path.display()))?;
        }
        None => write_report(
            &report,
            args.format.unwrap_or(ReportFormat::Json),
            std::io::stdout().lock(),
        )?,
    }
    let a = &report.aggregate;
    eprintln!(
        "{:?}: {} trials, mean ratio {:.4} (min {:.4}, max {:.4}, stderr {:.4}), checks {}, hash {}",
        report.algo,
        a.trials,
        a.mean_ratio,
        a.min_ratio,
        a.max_ratio,
        a.stderr_ratio,
        if a.checks_passed { "passed" } else { "FAILED" },
        report.canonical_hash()
    );
    Ok(a.checks_passed)
}

fn verify_gadgets(kmax: usize) -> Result<bool> {
    if kmax < 3 {
        bail!("--kmax must be at least 3");
    }
    let mut all_ok = true;
    for k in (3..=kmax).step_by(2) {
        let exact = 2 * k <= BRUTE_FORCE_LIMIT;
        let enumerable = 2 * k - 2 <= ENUMERATION_EDGE_LIMIT;
        let mut failures = 0usize;
        for mask in 0u64..(1 << k) {
            let bits: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
            let g = xor_gadget(&bits)?;
            let t = g.final_vertex();
            let mu = if exact {
                brute_force_matching_size(&g.graph)?
            } else {
                max_matching(&g.graph).len()
            };
            let ok = if g.parity() {
                mu == k - 1
                    && (!enumerable
                        || all_maximum_matchings(&g.graph)?
                            .iter()
                            .any(|m| m.iter().all(|e| !e.touches(t))))
            } else {
                mu == k
                    && (!enumerable || {
                        let all = all_maximum_matchings(&g.graph)?;
                        all.len() == 1 && all[0].iter().any(|e| e.touches(t))
                    })
            };
            failures += (!ok) as usize;
        }
        println!(
            "k={k}: {} bit strings, {failures} failures ({}{})",
            1u64 << k,
            if exact { "brute force" } else { "oracle" },
            if enumerable { ", matchings enumerated" } else { "" }
        );
        all_ok &= failures == 0;
    }
    Ok(all_ok)
}

#[derive(Serialize)]
struct HardSummary {
    samples: usize,
    k: usize,
    r: usize,
    family_size: usize,
    upper_bound: usize,
    upper_bound_violations: usize,
    mean_mu: f64,
    mean_lower_bound: f64,
    tolerance: f64,
    passed: bool,
}

fn load_family(path: &Path) -> Result<InducedFamily> {
    let fam = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        InducedFamily::read(path)?
    } else {
        InducedFamily::trivial(Graph::read_edge_list(path)?)?
    };
    Ok(fam)
}

fn hard(args: HardArgs) -> Result<bool> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let family = load_family(&args.base).with_context(|| format!("loading {}", args.base.display()))?;
    let k = match (args.k, args.log_k) {
        (Some(k), _) => k,
        (None, true) => {
            let g = family.graph();
            let side = g
                .bipartition()
                .map_or(g.n().div_ceil(2), |b| b.left_count().max(b.right_count()));
            log_gadget_k(side)
        }
        (None, false) => DEFAULT_GADGET_K,
    };
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut violations = 0;
    let mut total = 0usize;
    let mut truth = None;
    for i in 0..args.trials {
        let mut rng = rng_for(derive_seed(args.seed, i as u64), INSTANCE_SUBSTREAM);
        let inst = build_hard_instance(&family, k, &mut rng)?;
        if max_matching(&inst.without_special()?).len() > inst.truth.upper_bound() {
            violations += 1;
        }
        total += max_matching(&inst.graph).len();
        if let Some(dir) = &args.out {
            inst.write(dir.join(format!("hard_{i:04}.txt")))?;
        }
        truth = Some(inst.truth);
    }
    let truth = truth.expect("at least one sample");
    let mean = total as f64 / args.trials as f64;
    let tolerance = 3.0 * (truth.r as f64).sqrt() / 2.0;
    let passed = violations == 0 && mean >= truth.mean_lower_bound() - tolerance;
    let summary = HardSummary {
        samples: args.trials,
        k,
        r: truth.r,
        family_size: truth.family_size,
        upper_bound: truth.upper_bound(),
        upper_bound_violations: violations,
        mean_mu: mean,
        mean_lower_bound: truth.mean_lower_bound(),
        tolerance,
        passed,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(passed)
}

fn generate(args: &GenArgs, seed: u64, out: &Path) -> Result<()> {
    let g = gen_random(&args.spec(), seed)?;
    g.write_edge_list(out)
        .with_context(|| format!("writing {}", out.display()))?;
    eprintln!("wrote {} vertices, {} edges to {}", g.n(), g.m(), out.display());
    Ok(())
}
