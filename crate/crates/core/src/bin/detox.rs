use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use detox_core::campaign::{CampaignOptions, CampaignResult};
use detox_core::interp::{golden_run, DEFAULT_TIMEOUT_FACTOR};
use detox_core::lang::{list_assertions, parse, Program};
use detox_core::predict::{predict, predict_all, Counts, Report};
use detox_core::search::{self, GaParams, SearchOutcome};
use detox_core::{oracle, render, run_discovery, Configuration, Error};

#[derive(Parser)]
#[command(name = "detox", version, about = "Predict SDC counts of executable-assertion configurations")]
struct Cli {
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct RunArgs {
    /// Faulty runs time out after this many times the golden workload steps.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_FACTOR)]
    timeout_factor: f64,
    /// Worker threads (0 = one per core).
    #[arg(long, short = 'j', env = "DETOX_JOBS", default_value_t = 0)]
    jobs: usize,
}

impl RunArgs {
    fn options(self) -> CampaignOptions {
        CampaignOptions { timeout_factor: self.timeout_factor, jobs: self.jobs }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Greedy,
    Ga,
}

#[derive(Subcommand)]
enum Command {
    /// Print the fault-free run: runtime, memory size and assertion windows.
    Golden { workload: PathBuf },
    /// Run the all-enabled discovery campaign and write the result file.
    Campaign {
        workload: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Predict outcome counts for one or all configurations.
    Predict {
        results: PathBuf,
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        config: Option<String>,
        #[arg(long)]
        all: bool,
        /// Warn if the result file was produced from a different workload.
        #[arg(long)]
        workload: Option<PathBuf>,
    },
    /// Measure the counts of one configuration by injecting into its variant.
    Oracle {
        workload: PathBuf,
        #[arg(long)]
        config: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare prediction and oracle for every configuration.
    Verify {
        workload: PathBuf,
        /// Refuse workloads with more assertions than this.
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Search for the configuration with the fewest predicted SDCs.
    Search {
        results: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        population: usize,
        #[arg(long, default_value_t = 100)]
        generations: usize,
    },
    /// Draw the fault-space diagram of a configuration.
    Render {
        results: PathBuf,
        #[arg(long)]
        config: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

enum Failure {
    Mismatch,
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Golden(_) | Error::Io(_) => Failure::Runtime(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let source =
        fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
    parse(&source).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_results(path: &Path, workload: Option<&Path>) -> Result<CampaignResult, Failure> {
    let results = CampaignResult::load(path)?;
    if let Some(w) = workload {
        if let Err(e) = results.check_digest(&load_program(w)?) {
            eprintln!("warning: {e}");
        }
    }
    Ok(results)
}

fn config_arg(s: &str) -> Result<Configuration, Failure> {
    Ok(s.parse::<Configuration>()?)
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("reports serialize"));
}

fn counts_row(config: &str, c: &Counts) -> String {
    format!(
        "{config:>12} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}",
        c.sdc, c.detected, c.benign, c.trap, c.timeout, c.runtime
    )
}

fn counts_header() -> String {
    format!(
        "{:>12} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}",
        "config", "sdc", "detected", "benign", "trap", "timeout", "runtime"
    )
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Golden { workload } => {
            let p = load_program(workload)?;
            let g = golden_run(&p).map_err(Error::from)?;
            let assertions: Vec<_> = list_assertions(&p)
                .into_iter()
                .map(|a| {
                    let windows: Vec<(u64, u64)> = g.windows_of(a.index).map(|w| (w.t_start, w.t_end)).collect();
                    json!({"index": a.index, "id": a.id, "cost": a.cost, "windows": windows})
                })
                .collect();
            if cli.pretty {
                println!("T              {}", g.total_steps);
                println!("workload_steps {}", g.workload_steps);
                println!("total_bits     {}", g.total_bits());
                for a in &assertions {
                    println!("assertion {} {} cost {} windows {}", a["index"], a["id"], a["cost"], a["windows"]);
                }
            } else {
                emit(&json!({
                    "T": g.total_steps,
                    "workload_steps": g.workload_steps,
                    "total_bits": g.total_bits(),
                    "assertions": assertions,
                    "outputs": g.outputs,
                }));
            }
        }
        Command::Campaign { workload, output, run } => {
            let p = load_program(workload)?;
            let result = run_discovery(&p, &run.options())?;
            result.save(output)?;
            let experiments = result.records.iter().filter(|r| r.rep_t.is_some()).count();
            if cli.pretty {
                println!("wrote {} records ({experiments} experiments) to {}", result.records.len(), output.display());
            } else {
                emit(&json!({
                    "output": output.display().to_string(),
                    "records": result.records.len(),
                    "experiments": experiments,
                    "area": result.area(),
                }));
            }
        }
        Command::Predict { results, config, all, workload } => {
            let campaign = load_results(results, workload.as_deref())?;
            let reports: Vec<Report> = if *all {
                predict_all(&campaign)?.iter().map(|(c, k)| k.report(c, None)).collect()
            } else {
                let c = config_arg(config.as_deref().unwrap_or_default())?;
                vec![predict(&campaign, &c)?.report(&c, None)]
            };
            if cli.pretty {
                println!("{}", counts_header());
                for r in &reports {
                    let k = Counts {
                        sdc: r.counts.sdc,
                        detected: r.counts.detected,
                        benign: r.counts.benign,
                        trap: r.counts.trap,
                        timeout: r.counts.timeout,
                        runtime: r.runtime,
                        area: r.area,
                    };
                    println!("{}", counts_row(&r.config, &k));
                }
            } else if *all {
                emit(&reports);
            } else {
                emit(&reports[0]);
            }
        }
        Command::Oracle { workload, config, run } => {
            let p = load_program(workload)?;
            let c = config_arg(config)?;
            let counts = oracle::ground_truth(&p, &c, &run.options())?;
            if cli.pretty {
                println!("{}", counts_header());
                println!("{}", counts_row(config, &counts));
            } else {
                emit(&counts.report(&c, Some("oracle")));
            }
        }
        Command::Verify { workload, max_n, run } => {
            let p = load_program(workload)?;
            let n = p.n_assertions();
            if n > *max_n {
                return Err(Error::TooManyAssertions { n, limit: *max_n }.into());
            }
            let opts = run.options();
            let campaign = run_discovery(&p, &opts)?;
            let predictions = predict_all(&campaign)?;
            let mut rows = Vec::new();
            let mut exact = 0;
            for (c, predicted) in &predictions {
                let truth = oracle::ground_truth(&p, c, &opts)?;
                let same = truth == *predicted;
                exact += same as usize;
                rows.push((c.clone(), *predicted, truth, same));
            }
            let total = rows.len();
            if cli.pretty {
                println!("{}  source", counts_header());
                for (c, predicted, truth, same) in &rows {
                    println!("{}  predicted", counts_row(&c.to_string(), predicted));
                    println!("{}  oracle{}", counts_row("", truth), if *same { "" } else { "  MISMATCH" });
                }
                println!("{exact}/{total} configurations exact");
            } else {
                let configurations: Vec<_> = rows
                    .iter()
                    .map(|(c, predicted, truth, same)| {
                        json!({
                            "config": c.to_string(),
                            "predicted": predicted.report(c, None),
                            "oracle": truth.report(c, Some("oracle")),
                            "exact": same,
                        })
                    })
                    .collect();
                emit(&json!({
                    "program_digest": campaign.program_digest,
                    "assertions": n,
                    "exact": exact,
                    "total": total,
                    "ok": exact == total,
                    "configurations": configurations,
                }));
            }
            if exact != total {
                return Err(Failure::Mismatch);
            }
        }
        Command::Search { results, method, seed, population, generations } => {
            let campaign = load_results(results, None)?;
            let (outcome, seed): (SearchOutcome, Option<u64>) = match method {
                MethodArg::Exhaustive => (search::exhaustive(&campaign)?, None),
                MethodArg::Greedy => (search::greedy(&campaign), None),
                MethodArg::Ga => {
                    let params = GaParams {
                        population: *population,
                        generations: *generations,
                        seed: *seed,
                        ..GaParams::default()
                    };
                    (search::ga(&campaign, &params)?, Some(*seed))
                }
            };
            if cli.pretty {
                println!("best {} after {} evaluations", outcome.best, outcome.evaluations);
                println!("{}", counts_header());
                println!("{}", counts_row(&outcome.best.to_string(), &outcome.best_counts));
            } else {
                emit(&outcome.report(seed));
            }
        }
        Command::Render { results, config, output } => {
            let campaign = load_results(results, None)?;
            let c = config_arg(config)?;
            let svg = render::render_svg(&campaign, &c)?;
            fs::write(output, svg).map_err(Error::from)?;
        }
    }
    Ok(())
}
