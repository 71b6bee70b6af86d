use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use apxmaxsat::encodings::{GteState, TotalizerState};
use apxmaxsat::harness::{self, BenchOptions, BestKnown, Optimum};
use apxmaxsat::satcore::CnfBuffer;
use apxmaxsat::search::{self, SearchStatus};
use apxmaxsat::wcnf::parse_wcnf_with_warnings;
use apxmaxsat::{Algorithm, ClusterCount, Lit, SearchConfig, Var, WcnfFormula, Weight};

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_OPTIMUM: u8 = 30;

#[derive(Parser, Debug)]
#[command(name = "apxmaxsat", version, about = "Anytime weighted partial MaxSAT with weight approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a WDIMACS instance, printing o/s/v lines.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// 0: protocol lines only; 1: summary comments; 2: per-improvement detail.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
        verbosity: u8,
    },
    /// Run configurations over a directory of .wcnf files and score them.
    Bench {
        dir: PathBuf,
        /// Configuration as `ALGORITHM:CLUSTERS`, e.g. `apx-subprob:weights`; repeatable.
        #[arg(long = "config", value_parser = parse_bench_config)]
        configs: Vec<(Algorithm, ClusterCount)>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Best-known costs (`<cost> <path>` per line), merged into the virtual best.
        #[arg(long)]
        best_known: Option<PathBuf>,
        /// Write the merged best-known costs back to the `--best-known` file.
        #[arg(long, requires = "best_known")]
        update_best_known: bool,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Dump the clauses of one encoded constraint as DIMACS. Inputs are variables 1..n.
    Encode {
        #[arg(value_enum)]
        kind: EncodingKind,
        /// Input weights, comma separated; all must be 1 for a totalizer.
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<Weight>,
        /// Bounds to assert, strictly decreasing; repeatable.
        #[arg(long = "bound")]
        bounds: Vec<Weight>,
        /// Largest bound the encoding supports (defaults to the first bound).
        #[arg(long)]
        max_bound: Option<Weight>,
    },
    /// Exhaustive optimum of a small instance (at most 24 variables).
    Oracle { instance: PathBuf },
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "apx-subprob")]
    algorithm: AlgorithmArg,
    /// Number of clusters, or `weights` for one per distinct weight.
    #[arg(long, default_value = "weights", value_parser = parse_clusters)]
    clusters: ClusterCount,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 300.0, value_parser = parse_timeout)]
    timeout: f64,
    /// Conflict limit for the whole search (deterministic).
    #[arg(long)]
    conflicts: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgorithmArg {
    ApxWeight,
    ApxSubprob,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::ApxWeight => Algorithm::ApxWeight,
            AlgorithmArg::ApxSubprob => Algorithm::ApxSubprob,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EncodingKind {
    Totalizer,
    Gte,
}

fn parse_clusters(s: &str) -> Result<ClusterCount, String> {
    if s == "weights" {
        return Ok(ClusterCount::DistinctWeights);
    }
    s.parse()
        .map(ClusterCount::Fixed)
        .map_err(|_| format!("expected a cluster count or `weights`, got `{s}`"))
}

fn parse_timeout(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        _ => Err(format!("timeout must be a positive number of seconds, got `{s}`")),
    }
}

fn parse_bench_config(s: &str) -> Result<(Algorithm, ClusterCount), String> {
    let (alg, clusters) = s
        .split_once(':')
        .ok_or_else(|| format!("expected ALGORITHM:CLUSTERS, got `{s}`"))?;
    let alg = AlgorithmArg::from_str(alg, false)?;
    Ok((alg.into(), parse_clusters(clusters)?))
}

fn config_label(alg: Algorithm, clusters: ClusterCount) -> String {
    let alg = match alg {
        Algorithm::ApxWeight => "apx-weight",
        Algorithm::ApxSubprob => "apx-subprob",
    };
    match clusters {
        ClusterCount::Fixed(m) => format!("{alg}:{m}"),
        ClusterCount::DistinctWeights => format!("{alg}:weights"),
    }
}

fn read_instance(path: &Path, verbosity: u8, out: &mut impl Write) -> Result<WcnfFormula> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let (f, warnings) =
        parse_wcnf_with_warnings(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))?;
    if verbosity >= 1 {
        for w in warnings {
            writeln!(out, "c warning: {w}")?;
        }
    }
    Ok(f)
}

fn stop_on_signals() -> Result<Arc<AtomicBool>> {
    let stop = Arc::new(AtomicBool::new(false));
    for sig in [signal_hook::consts::SIGTERM, signal_hook::consts::SIGINT] {
        signal_hook::flag::register(sig, Arc::clone(&stop)).context("cannot install signal handler")?;
    }
    Ok(stop)
}

fn solve(instance: &Path, s: &SearchArgs, b: &BudgetArgs, verbosity: u8) -> Result<u8> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let f = read_instance(instance, verbosity, &mut out)?;
    let mut cfg = SearchConfig::new(s.algorithm.into(), s.clusters)
        .with_seed(s.seed)
        .with_timeout(Duration::from_secs_f64(b.timeout));
    cfg.conflicts = b.conflicts;
    cfg.stop = Some(stop_on_signals()?);
    if verbosity >= 1 {
        writeln!(
            out,
            "c {} vars, {} hard, {} soft, {} distinct weights",
            f.num_vars(),
            f.hard().len(),
            f.soft().len(),
            apxmaxsat::clustering::distinct_weight_count(&f)
        )?;
    }

    let mut write_err = None;
    let report = search::solve(&f, &cfg, &mut |m| {
        let mut line = format!("o {}\n", m.true_cost);
        if verbosity >= 2 {
            line = format!("c approximated cost {}\n{line}", m.approx_cost);
        }
        if let Err(e) = out.write_all(line.as_bytes()).and_then(|()| out.flush()) {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if verbosity >= 1 {
        writeln!(
            out,
            "c clusters {}, sat calls {}, conflicts {}",
            report.clusters, report.sat_calls, report.conflicts
        )?;
    }

    let (status, code) = match report.status {
        SearchStatus::Unsatisfiable => ("UNSATISFIABLE", EXIT_UNSAT),
        SearchStatus::OptimumForApproximation if cfg.is_exact() => ("OPTIMUM FOUND", EXIT_OPTIMUM),
        _ if report.best.is_some() => ("SATISFIABLE", EXIT_SAT),
        _ => ("UNKNOWN", 0),
    };
    writeln!(out, "s {status}")?;
    if let Some(best) = &report.best {
        writeln!(out, "v {}", best.assignment.to_dimacs_line())?;
    }
    out.flush()?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn bench(
    dir: &Path,
    configs: &[(Algorithm, ClusterCount)],
    b: &BudgetArgs,
    seed: u64,
    workers: usize,
    best_known: Option<&Path>,
    update_best_known: bool,
    report: Option<&Path>,
) -> Result<u8> {
    let defaults = [
        (Algorithm::ApxSubprob, ClusterCount::DistinctWeights),
        (Algorithm::ApxWeight, ClusterCount::DistinctWeights),
        (Algorithm::ApxWeight, ClusterCount::Fixed(0)),
    ];
    let chosen = if configs.is_empty() { &defaults[..] } else { configs };
    let configs: Vec<(String, SearchConfig)> = chosen
        .iter()
        .map(|&(alg, m)| (config_label(alg, m), SearchConfig::new(alg, m).with_seed(seed)))
        .collect();
    let known = match best_known {
        Some(p) => BestKnown::load(p)?,
        None => BestKnown::default(),
    };
    let opts = BenchOptions {
        timeout: Some(Duration::from_secs_f64(b.timeout)),
        conflicts: b.conflicts,
        workers,
    };
    let table = harness::run_benchmarks(dir, &configs, &opts, &known)
        .with_context(|| format!("cannot run benchmarks in {}", dir.display()))?;
    print!("{}", table.to_text());
    for row in &table.rows {
        if let Some(e) = &row.parse_error {
            eprintln!("{}: {e}", row.instance);
        }
    }
    if let Some(p) = report {
        std::fs::write(p, format!("{:#}\n", table.to_json()))
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    if let (Some(p), true) = (best_known, update_best_known) {
        table.best_known(&known).save(p)?;
    }
    Ok(0)
}

fn encode(kind: EncodingKind, weights: &[Weight], bounds: &[Weight], max_bound: Option<Weight>) -> Result<u8> {
    if weights.is_empty() {
        bail!("no inputs");
    }
    let n = u32::try_from(weights.len()).context("too many inputs")?;
    let inputs: Vec<Lit> = (0..n).map(|i| Var::new(i).pos_lit()).collect();
    let total: Weight = weights.iter().sum();
    let cap = max_bound.or(bounds.first().copied()).unwrap_or(total);
    let mut cnf = CnfBuffer::new(n);
    let outputs: Vec<Lit> = match kind {
        EncodingKind::Totalizer => {
            if weights.iter().any(|&w| w != 1) {
                bail!("a totalizer takes unit weights only");
            }
            let mut t = TotalizerState::build_capped(&inputs, cap, &mut cnf)?;
            for &k in bounds {
                t.set_bound(k, &mut cnf)?;
            }
            t.outputs()
        }
        EncodingKind::Gte => {
            let weighted: Vec<(Lit, Weight)> = inputs.iter().copied().zip(weights.iter().copied()).collect();
            let mut g = GteState::build(&weighted, cap, &mut cnf)?;
            for &bnd in bounds {
                g.set_bound(bnd, &mut cnf)?;
            }
            g.root_outputs().iter().map(|&(_, l)| l).chain(g.overflow()).collect()
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "c inputs 1..{n}")?;
    let outs: Vec<String> = outputs.iter().map(ToString::to_string).collect();
    writeln!(out, "c outputs {}", outs.join(" "))?;
    out.write_all(cnf.to_dimacs().as_bytes())?;
    Ok(0)
}

fn oracle(instance: &Path) -> Result<u8> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let f = read_instance(instance, 0, &mut out)?;
    match harness::brute_force_optimum(&f)? {
        Optimum::Optimum { cost, model } => {
            writeln!(out, "o {cost}\ns OPTIMUM FOUND\nv {}", model.to_dimacs_line())?;
            Ok(EXIT_OPTIMUM)
        }
        Optimum::Unsat => {
            writeln!(out, "s UNSATISFIABLE")?;
            Ok(EXIT_UNSAT)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            instance,
            search,
            budget,
            verbosity,
        } => solve(&instance, &search, &budget, verbosity),
        Command::Bench {
            dir,
            configs,
            budget,
            seed,
            workers,
            best_known,
            update_best_known,
            report,
        } => bench(
            &dir,
            &configs,
            &budget,
            seed,
            workers,
            best_known.as_deref(),
            update_best_known,
            report.as_deref(),
        ),
        Command::Encode {
            kind,
            weights,
            bounds,
            max_bound,
        } => encode(kind, &weights, &bounds, max_bound),
        Command::Oracle { instance } => oracle(&instance),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
