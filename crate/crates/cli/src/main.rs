mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand};
use frugal_core::aslib::{load_scenario, scenario_stats, ScenarioStats};
use frugal_core::harness::{
    collect_logs, emit_plot, run_grid, summarize, Aggregate, CellReport, ConfigId, CurveSummary, Metric, Selection,
};

use config::{parse_bool, parse_configs, parse_index_set, parse_selection, Settings, KEYS};

#[derive(Parser)]
#[command(name = "frugal", version, about = "Cost-aware algorithm selection experiments on ASLib scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print size and runtime statistics of a scenario.
    Stats { scenario: PathBuf },
    /// Run the experiment grid and write one step log per cell.
    Run(RunArgs),
    /// Reduce a directory of step logs to cost-vs-performance curves.
    Summarize {
        logs: PathBuf,
        /// Defaults to <logs>/summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a summary as an SVG line chart.
    Plot {
        summary: PathBuf,
        #[arg(long, value_parser = str::parse::<Aggregate>, default_value = "none")]
        aggregate_by: Aggregate,
        #[arg(long, value_parser = str::parse::<Metric>, default_value = "cost")]
        metric: Metric,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
    },
    /// List the keys accepted in a run configuration file.
    Keys,
}

// List-valued flags take one comma-separated argument; the qualified
// `Vec` path stops clap treating them as repeated flags.
#[derive(clap::Args)]
struct RunArgs {
    scenario: PathBuf,
    /// `key = value` file; see `frugal keys`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_selection)]
    selection: Option<Selection>,
    #[arg(long, value_parser = parse_bool)]
    timeout_predictor: Option<bool>,
    #[arg(long, value_parser = parse_bool)]
    dynamic_timeout: Option<bool>,
    /// Explicit configuration names, e.g. `random,passive`.
    #[arg(long, value_parser = parse_configs)]
    configs: Option<std::vec::Vec<ConfigId>>,
    /// A count, a list `0,3` or a range `2..5`.
    #[arg(long, value_parser = parse_index_set::<usize>)]
    folds: Option<std::vec::Vec<usize>>,
    #[arg(long, value_parser = parse_index_set::<u64>)]
    seeds: Option<std::vec::Vec<u64>>,
    #[arg(long)]
    batch_frac: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn data<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Data)
}

fn stats(dir: &Path) -> Outcome {
    let s = data(load_scenario(dir).with_context(|| format!("loading {}", dir.display())))?;
    let st = scenario_stats(&s);
    println!("scenario    {}", s.id);
    println!("instances   {}", st.n_instances);
    println!("algorithms  {}", st.n_algorithms);
    println!("features    {}", st.n_features);
    println!("total_h     {:.1}", ScenarioStats::hours(st.total_time));
    println!("vbs_h       {:.1}", ScenarioStats::hours(st.vbs_time));
    println!("sbs_h       {:.1}", ScenarioStats::hours(st.sbs_time));
    Ok(())
}

fn run(args: RunArgs) -> Outcome {
    let mut settings = match &args.config {
        Some(p) => Settings::load(p).map_err(|e| Failure::Usage(e.into()))?,
        None => Settings::default(),
    };
    if let Ok(v) = std::env::var("FRUGAL_SEED") {
        let seed = v
            .parse()
            .map_err(|_| Failure::Usage(anyhow::anyhow!("FRUGAL_SEED must be an integer, got {v:?}")))?;
        settings.seed = Some(seed);
    }
    let flags = Settings {
        configs: args.configs,
        selection: args.selection,
        timeout_predictor: args.timeout_predictor,
        dynamic_timeout: args.dynamic_timeout,
        folds: args.folds,
        seeds: args.seeds,
        batch_frac: args.batch_frac,
        out: args.out,
        jobs: args.jobs,
        ..Settings::default()
    };
    for key in settings.override_with(flags) {
        eprintln!("warning: --{} overrides the value in the config file", key.replace('_', "-"));
    }
    let spec = settings.to_spec();
    if spec.configs.is_empty() {
        return Err(Failure::Usage(anyhow::anyhow!("the options select no configuration")));
    }
    spec.validate().map_err(|e| Failure::Usage(e.into()))?;

    let scenario = data(load_scenario(&args.scenario).with_context(|| format!("loading {}", args.scenario.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(e.into()))?;
    let reports = pool
        .install(|| run_grid(&scenario, &spec, progress))
        .map_err(|e| Failure::Data(e.into()))?;
    let fresh = reports.iter().filter(|r| r.steps.is_some()).count();
    println!(
        "done: {} cells ({fresh} run, {} already present) in {}",
        reports.len(),
        reports.len() - fresh,
        spec.out_dir.display()
    );
    Ok(())
}

fn progress(r: &CellReport) {
    match (r.steps, r.final_ratio) {
        (Some(n), Some(ratio)) => {
            println!("{} fold {} seed {}: {n} steps, final ratio {ratio:.4}", r.config, r.fold, r.seed)
        }
        _ => println!("{} fold {} seed {}: present, skipped", r.config, r.fold, r.seed),
    }
}

fn summarize_cmd(logs: &Path, out: Option<PathBuf>) -> Outcome {
    let out = out.unwrap_or_else(|| logs.join("summary.csv"));
    let all = data(collect_logs(logs).with_context(|| format!("reading logs under {}", logs.display())))?;
    let summary = data(summarize(&all).map_err(Into::into))?;
    data(summary.write_csv(&out).map_err(Into::into))?;
    println!("{} rows for {} configurations -> {}", summary.rows.len(), summary.configs().len(), out.display());
    Ok(())
}

fn plot(summary: &Path, how: Aggregate, metric: Metric, out: &Path) -> Outcome {
    let s = data(CurveSummary::read_csv(summary).with_context(|| format!("reading {}", summary.display())))?;
    let lines = data(emit_plot(&s, how, metric, out).map_err(Into::into))?;
    println!("{lines} series -> {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(1);
        }
    };
    let outcome = match cli.command {
        Command::Stats { scenario } => stats(&scenario),
        Command::Run(args) => run(args),
        Command::Summarize { logs, out } => summarize_cmd(&logs, out),
        Command::Plot {
            summary,
            aggregate_by,
            metric,
            out,
        } => plot(&summary, aggregate_by, metric, &out),
        Command::Keys => {
            for (k, doc) in KEYS {
                println!("{k:<26}{doc}");
            }
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
