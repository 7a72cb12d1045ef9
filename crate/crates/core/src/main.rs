//! Command-line driver: enumeration, verification, brute-force oracle,
//! maximum-forbidden-length query, and LP export.
//!
//! Machine-readable output goes to stdout or `--out` files; logs go to
//! stderr. Exit codes: 0 completed, 2 timed out with partial results,
//! 1 input or usage error.

use anyhow::{bail, Context, Result};
use bnctrl_core::benders::{enumerate, EnumerateOptions, RunStatus, Strategy};
use bnctrl_core::builder::{
    build_aggregated, build_master, build_max_forbidden_length, build_separation,
    build_subproblem, ModelContext,
};
use bnctrl_core::cnf::ClauseSet;
use bnctrl_core::dynamics::{enumerate_attractors, oracle_minimal_controls, ControlVector};
use bnctrl_core::network::parse_and_augment;
use bnctrl_core::solver::backend_from_spec;
use bnctrl_core::verify::{
    max_forbidden_length, verify_feasibility, verify_minimality, FeasibilityVerdict,
    MaxLenResult, MinimalityVerdict, VerifyCache,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::PathBuf;
use std::time::{Duration, Instant};

/// Environment variable overriding the solver backend when no `--backend`
/// flag is given.
const BACKEND_ENV: &str = "BNCTRL_BACKEND";

#[derive(Parser)]
#[command(
    name = "bnctrl",
    version,
    about = "Enumerate minimal controls forcing a phenotype on all short attractors of a Boolean network"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Dec,
    Agg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    /// Candidate-proposal model for one control size.
    Master,
    /// Fixed-length dynamics model for one control.
    Subproblem,
    /// Free-length dynamics model over the whole length bound.
    Aggregated,
    /// Violating-trap-space search for one candidate control.
    Separation,
    /// Maximum-forbidden-length model.
    Maxlen,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate all inclusion-minimal feasible controls.
    Enumerate {
        /// Network model file.
        network: PathBuf,
        /// Attractor length bound (>= 1).
        #[arg(long, default_value_t = 5)]
        tmax: usize,
        /// Try trap-space cuts before per-length subproblems.
        #[arg(long)]
        use_ts_cut: bool,
        #[arg(long, value_enum, default_value_t = StrategyArg::Dec)]
        strategy: StrategyArg,
        /// Largest control size to search.
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        /// Overall time limit in seconds.
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        /// Solver backend: `builtin` or an external command line.
        #[arg(long)]
        backend: Option<String>,
        /// Comma-separated permutation of the controllable gene names,
        /// overriding the variable order.
        #[arg(long)]
        seed_order: Option<String>,
        /// Treat controls with no attractor within the bound as feasible.
        #[arg(long)]
        accept_no_attractor: bool,
        /// Write the report JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write cumulative discovery rows (elapsed_seconds,count) here.
        #[arg(long)]
        progress_csv: Option<PathBuf>,
        /// Write per-kind cut statistics (kind,count,mean_literals) here.
        #[arg(long)]
        cut_stats_csv: Option<PathBuf>,
    },
    /// Re-check every control of a report: feasibility and minimality.
    Verify {
        /// Report JSON produced by `enumerate`.
        report: PathBuf,
        /// Length bound for the re-check (default: the report's own).
        #[arg(long)]
        tmax: Option<usize>,
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        #[arg(long)]
        backend: Option<String>,
        /// Persistent result cache file.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Write the verdict CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive ground truth: attractors and minimal controls by simulation.
    Oracle {
        network: PathBuf,
        /// Attractor length bound, or `inf` for no bound.
        #[arg(long, default_value = "inf")]
        tmax: String,
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        #[arg(long)]
        accept_no_attractor: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Longest phenotype-violating attractor over all bounded-size controls.
    Maxlen {
        network: PathBuf,
        /// Length search bound.
        #[arg(long, default_value_t = 8)]
        tmax: usize,
        /// Largest control size considered.
        #[arg(long, default_value_t = 7)]
        lambda_max: usize,
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        #[arg(long)]
        backend: Option<String>,
    },
    /// Write one of the integer models as an LP-format file.
    ExportLp {
        network: PathBuf,
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long, default_value_t = 5)]
        tmax: usize,
        /// Control as comma-separated `gene=value` items (default: none).
        #[arg(long)]
        control: Option<String>,
        /// Control size for the master model.
        #[arg(long, default_value_t = 1)]
        size: usize,
        /// Control size bound for the maxlen model.
        #[arg(long, default_value_t = 7)]
        lambda_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn load_context(path: &PathBuf, seed_order: Option<&str>) -> Result<ModelContext> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let bn = parse_and_augment(&text).with_context(|| format!("parsing {}", path.display()))?;
    let clauses = ClauseSet::from_network(&bn).context("deriving clause forms")?;
    match seed_order {
        None => Ok(ModelContext::new(bn, clauses)),
        Some(spec) => {
            let mut order = Vec::new();
            for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let g = bn
                    .gene_by_name(name)
                    .with_context(|| format!("--seed-order: unknown gene `{name}`"))?;
                order.push(g);
            }
            {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted != bn.controllable_genes() {
                    bail!("--seed-order must list every controllable gene exactly once");
                }
            }
            Ok(ModelContext::with_order(bn, clauses, order))
        }
    }
}

fn backend_spec(flag: Option<String>) -> Option<String> {
    flag.or_else(|| std::env::var(BACKEND_ENV).ok())
}

fn parse_control(ctx: &ModelContext, spec: Option<&str>) -> Result<ControlVector> {
    let Some(spec) = spec else { return Ok(ControlVector::empty()) };
    let items: Vec<String> =
        spec.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    ControlVector::parse_strings(&ctx.bn, &items)
        .with_context(|| format!("--control: cannot parse `{spec}`"))
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn check_tmax(tmax: usize) -> Result<()> {
    if tmax == 0 {
        bail!("--tmax must be at least 1");
    }
    Ok(())
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Enumerate {
            network,
            tmax,
            use_ts_cut,
            strategy,
            max_size,
            time_limit,
            backend,
            seed_order,
            accept_no_attractor,
            out,
            progress_csv,
            cut_stats_csv,
        } => {
            check_tmax(tmax)?;
            let ctx = load_context(&network, seed_order.as_deref())?;
            let backend = backend_from_spec(backend_spec(backend).as_deref());
            let opts = EnumerateOptions {
                t_max: tmax,
                use_ts_cut,
                strategy: match strategy {
                    StrategyArg::Dec => Strategy::Dec,
                    StrategyArg::Agg => Strategy::Agg,
                },
                max_size,
                time_limit: Some(Duration::from_secs_f64(time_limit)),
                accept_no_attractor,
            };
            let report = enumerate(&ctx, &opts, backend.as_ref())?;
            log::info!(
                "{} minimal controls, {} cuts, {} master solves, {:.3}s ({})",
                report.controls.len(),
                report.cuts.len(),
                report.master_solves,
                report.wall.as_secs_f64(),
                report.mode_label()
            );
            let mut json = serde_json::to_string_pretty(&report.to_json(&ctx))?;
            json.push('\n');
            write_output(out.as_ref(), &json)?;
            if let Some(path) = progress_csv {
                std::fs::write(&path, report.progress_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = cut_stats_csv {
                std::fs::write(&path, report.cut_stats_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(match report.status {
                RunStatus::Complete => 0,
                RunStatus::TimedOut => 2,
            })
        }

        Cmd::Verify { report, tmax, time_limit, backend, cache, out } => {
            let text = std::fs::read_to_string(&report)
                .with_context(|| format!("reading {}", report.display()))?;
            let doc: serde_json::Value =
                serde_json::from_str(&text).context("parsing report JSON")?;
            if doc["schema"] != 1 {
                bail!("unsupported report schema {}", doc["schema"]);
            }
            let source = doc["network_source"]
                .as_str()
                .context("report is missing `network_source`")?;
            let bn = parse_and_augment(source).context("parsing embedded network")?;
            let clauses = ClauseSet::from_network(&bn)?;
            let ctx = ModelContext::new(bn, clauses);
            let t_check = match tmax {
                Some(t) => t,
                None => doc["options"]["t_max"]
                    .as_u64()
                    .context("report is missing `options.t_max`")? as usize,
            };
            check_tmax(t_check)?;
            let accept_no_attractor =
                doc["options"]["accept_no_attractor"].as_bool().unwrap_or(false);
            let controls: Vec<ControlVector> = doc["controls"]
                .as_array()
                .context("report is missing `controls`")?
                .iter()
                .map(|c| {
                    let items: Vec<String> = c
                        .as_array()
                        .context("control is not a list")?
                        .iter()
                        .map(|s| s.as_str().map(String::from).context("control item not a string"))
                        .collect::<Result<_>>()?;
                    ControlVector::parse_strings(&ctx.bn, &items)
                        .with_context(|| format!("cannot parse control {items:?}"))
                })
                .collect::<Result<_>>()?;

            let backend = backend_from_spec(backend_spec(backend).as_deref());
            let mut store = match cache {
                Some(path) => VerifyCache::open(path),
                None => VerifyCache::in_memory(),
            };
            let deadline = Some(Instant::now() + Duration::from_secs_f64(time_limit));

            let mut csv = String::from("control,feasible,minimal\n");
            let mut all_decided = true;
            for d in &controls {
                let feas = verify_feasibility(&ctx, d, t_check, backend.as_ref(), &mut store, deadline)?;
                let counts_as_feasible = matches!(feas, FeasibilityVerdict::Feasible)
                    || (accept_no_attractor && matches!(feas, FeasibilityVerdict::NoAttractor));
                let (feas_str, min_str) = if counts_as_feasible {
                    let m = verify_minimality(
                        &ctx,
                        d,
                        t_check,
                        accept_no_attractor,
                        backend.as_ref(),
                        &mut store,
                        deadline,
                    )?;
                    let ms = match m {
                        MinimalityVerdict::Minimal => "yes",
                        MinimalityVerdict::NonMinimal(_) => "no",
                        MinimalityVerdict::Indeterminate => {
                            all_decided = false;
                            "indeterminate"
                        }
                    };
                    ("yes", ms)
                } else {
                    match feas {
                        FeasibilityVerdict::Infeasible(_) => ("no", ""),
                        FeasibilityVerdict::NoAttractor => ("no-attractor", ""),
                        FeasibilityVerdict::Indeterminate => {
                            all_decided = false;
                            ("indeterminate", "")
                        }
                        FeasibilityVerdict::Feasible => unreachable!(),
                    }
                };
                csv.push_str(&format!(
                    "{},{feas_str},{min_str}\n",
                    d.to_strings(&ctx.bn).join(" ")
                ));
            }
            store.flush().context("writing cache")?;
            write_output(out.as_ref(), &csv)?;
            Ok(if all_decided { 0 } else { 2 })
        }

        Cmd::Oracle { network, tmax, max_size, accept_no_attractor, out } => {
            let ctx = load_context(&network, None)?;
            let t_cap = match tmax.as_str() {
                "inf" => None,
                s => {
                    let t: usize = s.parse().context("--tmax must be a number or `inf`")?;
                    check_tmax(t)?;
                    Some(t)
                }
            };
            let attractors = enumerate_attractors(&ctx.bn, &ControlVector::empty(), t_cap)?;
            let phi = ctx.phenotype();
            // states render over the original genes only; the auxiliary
            // phenotype bit is derived and reported separately
            let state_string = |s: u64| -> String {
                (0..ctx.bn.gene_count())
                    .filter(|i| *i != phi.index())
                    .map(|i| if s >> i & 1 == 1 { '1' } else { '0' })
                    .collect()
            };
            let controls = oracle_minimal_controls(&ctx.bn, t_cap, max_size, accept_no_attractor)?;
            let doc = json!({
                "schema": 1,
                "network_source": ctx.bn.print(),
                "t_max": t_cap,
                "attractors": attractors
                    .iter()
                    .map(|a| json!({
                        "length": a.length,
                        "states": a.states.iter().map(|s| state_string(*s)).collect::<Vec<_>>(),
                        "forbidden": a.is_forbidden(phi),
                    }))
                    .collect::<Vec<_>>(),
                "controls": controls.iter().map(|c| c.to_strings(&ctx.bn)).collect::<Vec<_>>(),
            });
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            write_output(out.as_ref(), &text)?;
            Ok(0)
        }

        Cmd::Maxlen { network, tmax, lambda_max, time_limit, backend } => {
            check_tmax(tmax)?;
            let ctx = load_context(&network, None)?;
            let backend = backend_from_spec(backend_spec(backend).as_deref());
            let deadline = Some(Instant::now() + Duration::from_secs_f64(time_limit));
            let result = max_forbidden_length(&ctx, lambda_max, tmax, backend.as_ref(), deadline)?;
            let (doc, code) = match result {
                MaxLenResult::Optimum { length, control } => (
                    json!({"status": "optimum", "length": length,
                           "control": control.to_strings(&ctx.bn)}),
                    0,
                ),
                MaxLenResult::LowerBound { length, control } => (
                    json!({"status": "lower-bound", "length": length,
                           "control": control.to_strings(&ctx.bn)}),
                    2,
                ),
                MaxLenResult::NoForbidden => {
                    (json!({"status": "no-forbidden-attractor", "length": null}), 0)
                }
                MaxLenResult::Indeterminate => (json!({"status": "indeterminate"}), 2),
            };
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            write_output(None, &text)?;
            Ok(code)
        }

        Cmd::ExportLp { network, model, tmax, control, size, lambda_max, out } => {
            check_tmax(tmax)?;
            let ctx = load_context(&network, None)?;
            let d = parse_control(&ctx, control.as_deref())?;
            let lp = match model {
                ModelKind::Master => build_master(&ctx, size, &[], &[]).0.to_lp(),
                ModelKind::Subproblem => build_subproblem(&ctx, &d, tmax).0.to_lp(),
                ModelKind::Aggregated => build_aggregated(&ctx, &d, tmax).0.to_lp(),
                ModelKind::Separation => build_separation(&ctx, &d).0.to_lp(),
                ModelKind::Maxlen => build_max_forbidden_length(&ctx, tmax, lambda_max).0.to_lp(),
            };
            write_output(out.as_ref(), &lp)?;
            Ok(0)
        }
    }
}
