//! `graphblocks` command-line tool.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphblocks::compiler::{compile, emit_script, parse_script, CompileError, CompiledPlan, SCRIPT_HEADER};
use graphblocks::diagnostic::{has_errors, Diagnostic};
use graphblocks::graph::{proposed_to_alt, serialize_alt_graph, serialize_graph, GraphDoc};
use graphblocks::pipeline::{check, parse_text, GraphFormat};
use graphblocks::runtime::{run, EventSchedule, RunConfig, Termination};
use graphblocks::{Catalog, ReferenceStyle};
use graphblocks_harness::report::{read_runs, write_report_dir};
use graphblocks_harness::{compare, run_bench, summarize, Ablation, Annotations, BenchConfig, BenchMode};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "graphblocks", version, about = "Validate, compile, run and benchmark block graphs")]
struct Cli {
    /// Settings file (TOML, or JSON by extension); flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the block reference given to the model.
    Reference {
        #[arg(long, default_value = "proposed", value_parser = ["proposed", "no_types", "extra_description"])]
        style: String,
        /// Write to FILE instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Check a graph; prints diagnostics as JSON lines.
    Validate {
        graph: PathBuf,
        /// Read the per-node adjacency format.
        #[arg(long)]
        alt: bool,
    },
    /// Lower a graph to a plan script.
    Compile {
        graph: PathBuf,
        #[arg(long)]
        alt: bool,
        #[arg(short, long, value_name = "SCRIPT")]
        output: Option<PathBuf>,
    },
    /// Execute a graph or plan script against an event schedule.
    Run {
        /// Graph JSON, or a plan script produced by `compile`.
        graph: PathBuf,
        #[arg(long, value_name = "EVENTS")]
        schedule: PathBuf,
        #[arg(long)]
        alt: bool,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        #[arg(long, value_name = "N")]
        max_ticks: Option<u64>,
        /// Write the behavior log here instead of stdout.
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
        /// Write the final sprite state as JSON.
        #[arg(long, value_name = "FILE")]
        state: Option<PathBuf>,
    },
    /// Rewrite a graph in the other JSON format.
    Convert {
        graph: PathBuf,
        #[arg(long, value_parser = ["proposed", "alternative"])]
        to: String,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Run the benchmark over the twenty prompts.
    Bench {
        /// Comma-separated: no_types, extra_description, proposed, alternative; or `all`.
        #[arg(long, value_name = "A[,B,...]")]
        ablation: Option<String>,
        /// Query the endpoint or serve recorded outputs [default: replay].
        #[arg(long, value_parser = ["live", "replay"])]
        mode: Option<String>,
        /// Runs per ablation [default: 5].
        #[arg(long, value_name = "N")]
        runs: Option<u32>,
        /// Attempts in flight at once [default: 1].
        #[arg(long, value_name = "N")]
        parallel: Option<usize>,
        /// Endpoint settings (TOML or JSON).
        #[arg(long, value_name = "FILE")]
        endpoint_config: Option<PathBuf>,
        /// Recorded outputs [default: fixtures/replay].
        #[arg(long, value_name = "DIR")]
        fixtures: Option<PathBuf>,
        /// Write report files into DIR.
        #[arg(long, value_name = "DIR")]
        report: Option<PathBuf>,
        /// Manual verdicts CSV that overrides the checkers.
        #[arg(long, value_name = "FILE")]
        annotations: Option<PathBuf>,
        /// Comma-separated prompt ids [default: all].
        #[arg(long, value_name = "IDS")]
        prompts: Option<String>,
    },
    /// Welch's t-test between two ablations of a report.
    Stats {
        #[arg(long, value_name = "DIR")]
        report: PathBuf,
        #[arg(long, value_name = "A,B")]
        compare: String,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0} error diagnostic(s)")]
    Diagnostics(usize),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("{0}")]
    Network(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Diagnostics(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Network(_) => 4,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_of(alt: bool) -> GraphFormat {
    if alt {
        GraphFormat::Alternative
    } else {
        GraphFormat::Proposed
    }
}

fn print_diagnostics(diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        println!("{}", d.to_json_line());
    }
}

/// Parses and validates, printing diagnostics. Errors end the command.
fn load_graph(path: &Path, alt: bool) -> Result<GraphDoc, CliError> {
    let checked = check(&read(path)?, format_of(alt), Catalog::builtin());
    let errors = checked.diagnostics.iter().filter(|d| d.is_error()).count();
    if errors > 0 {
        print_diagnostics(&checked.diagnostics);
        return Err(CliError::Diagnostics(errors));
    }
    for d in &checked.diagnostics {
        log::warn!("{}: {}", d.code.as_str(), d.message);
    }
    Ok(checked.graph.expect("valid graph"))
}

fn compile_graph(graph: &GraphDoc) -> Result<CompiledPlan, CliError> {
    compile(graph, Catalog::builtin()).map_err(|e| match e {
        CompileError::Invalid(d) => {
            print_diagnostics(&d);
            CliError::Diagnostics(d.len())
        }
        CompileError::InternalInconsistency(m) => CliError::Usage(m),
    })
}

fn load_plan(path: &Path, alt: bool) -> Result<CompiledPlan, CliError> {
    let text = read(path)?;
    if text.starts_with(SCRIPT_HEADER) {
        return parse_script(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
    }
    compile_graph(&load_graph(path, alt)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Reference { style, output } => {
            let style: ReferenceStyle = style.parse().map_err(CliError::Usage)?;
            write_or_print(output.as_deref(), &Catalog::builtin().emit_reference(style))
        }
        Command::Validate { graph, alt } => {
            let checked = check(&read(&graph)?, format_of(alt), Catalog::builtin());
            print_diagnostics(&checked.diagnostics);
            match checked.diagnostics.iter().filter(|d| d.is_error()).count() {
                0 => Ok(()),
                n => Err(CliError::Diagnostics(n)),
            }
        }
        Command::Compile { graph, alt, output } => {
            let plan = compile_graph(&load_graph(&graph, alt)?)?;
            write_or_print(output.as_deref(), &emit_script(&plan))
        }
        Command::Run {
            graph,
            schedule,
            alt,
            seed,
            max_ticks,
            log,
            state,
        } => {
            let plan = load_plan(&graph, alt)?;
            let events = EventSchedule::from_json(&read(&schedule)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", schedule.display())))?;
            let defaults = RunConfig::default();
            let run_config = RunConfig {
                seed: seed.or(file.run.seed).or(config::env(config::ENV_SEED)?).unwrap_or(defaults.seed),
                max_ticks: max_ticks
                    .or(file.run.max_ticks)
                    .or(config::env(config::ENV_MAX_TICKS)?)
                    .unwrap_or(defaults.max_ticks),
                max_iterations_per_loop: file.run.max_iterations_per_loop.unwrap_or(defaults.max_iterations_per_loop),
                ..defaults
            };
            run_config.check().map_err(|e| CliError::Usage(e.to_string()))?;
            let result = run(&plan, &events, &run_config);
            write_or_print(log.as_deref(), &result.log_text())?;
            if let Some(path) = state {
                let text = serde_json::to_string_pretty(&result.final_state.to_json()).expect("state serializes") + "\n";
                write_or_print(Some(&path), &text)?;
            }
            eprintln!("{} after {} ticks", result.termination, result.ticks);
            match result.termination {
                Termination::RuntimeError(e) => Err(CliError::Runtime(e.to_string())),
                _ => Ok(()),
            }
        }
        Command::Convert { graph, to, output } => {
            let catalog = Catalog::builtin();
            let text = read(&graph)?;
            let rendered = if to == "alternative" {
                let doc = parse_text(&text, GraphFormat::Proposed, catalog).map_err(|d| diag_error(&d))?;
                let alt = proposed_to_alt(&doc, catalog).map_err(|e| diag_error(&e.to_diagnostic()))?;
                serialize_alt_graph(&alt)
            } else {
                serialize_graph(&parse_text(&text, GraphFormat::Alternative, catalog).map_err(|d| diag_error(&d))?)
            };
            write_or_print(output.as_deref(), &(rendered + "\n"))
        }
        Command::Bench {
            ablation,
            mode,
            runs,
            parallel,
            endpoint_config,
            fixtures,
            report,
            annotations,
            prompts,
        } => {
            let b = file.bench;
            let defaults = BenchConfig::default();
            let ablations = match ablation.or(b.ablations) {
                Some(list) => Ablation::parse_list(&list).map_err(|e| CliError::Usage(e.to_string()))?,
                None => defaults.ablations.clone(),
            };
            let mode: BenchMode = match mode.or(b.mode) {
                Some(m) => m.parse().map_err(CliError::Usage)?,
                None => defaults.mode,
            };
            let annotations = match annotations.or(b.annotations) {
                Some(path) => Some(Annotations::from_csv(&read(&path)?).map_err(|e| CliError::Usage(e.to_string()))?),
                None => None,
            };
            let prompt_ids = match prompts {
                Some(list) => list
                    .split(',')
                    .map(|p| p.trim().parse::<u8>().ok().filter(|id| (1..=20).contains(id)))
                    .collect::<Option<Vec<u8>>>()
                    .ok_or_else(|| CliError::Usage(format!("bad prompt list `{list}`")))?,
                None => Vec::new(),
            };
            let bench = BenchConfig {
                ablations,
                runs: runs.or(b.runs).unwrap_or(defaults.runs),
                parallel: parallel
                    .or(b.parallel)
                    .or(config::env(config::ENV_PARALLEL)?)
                    .unwrap_or(defaults.parallel),
                mode,
                fixtures: fixtures
                    .or(b.fixtures)
                    .or(config::env(config::ENV_FIXTURES)?)
                    .unwrap_or(defaults.fixtures),
                endpoint: config::endpoint(file.endpoint.as_ref(), endpoint_config.as_deref())?,
                run_config: RunConfig {
                    seed: file.run.seed.or(config::env(config::ENV_SEED)?).unwrap_or(0),
                    ..RunConfig::default()
                },
                annotations,
                prompt_ids,
            };
            let outcome = run_bench(&bench).map_err(|e| {
                if e.is_network() {
                    CliError::Network(e.to_string())
                } else {
                    CliError::Usage(e.to_string())
                }
            })?;
            if let Some(dir) = report.or(b.report) {
                write_report_dir(&dir, &outcome.rows, &outcome.report, Some(&outcome.records))
                    .map_err(|e| CliError::Usage(e.to_string()))?;
            }
            print!("{}", outcome.report.text);
            Ok(())
        }
        Command::Stats { report, compare: pair } => {
            let (a, b) = match Ablation::parse_list(&pair).map_err(|e| CliError::Usage(e.to_string()))?[..] {
                [a, b] => (a, b),
                _ => return Err(CliError::Usage("--compare takes exactly two ablations".into())),
            };
            let rows = read_runs(&report).map_err(|e| CliError::Usage(e.to_string()))?;
            let reports = summarize(&rows).map_err(|e| CliError::Usage(e.to_string()))?;
            let c = compare(&reports, a, b).map_err(|e| CliError::Usage(e.to_string()))?;
            let r = c.result;
            println!("comparison: {a} vs {b}");
            println!("t_statistic: {:.6}", r.t_statistic);
            println!("welch_df: {:.6}", r.welch_df);
            println!("p_value_two_sided: {:.6e}", r.p_value_two_sided);
            println!("alpha: {}", r.alpha);
            println!("significant: {}", r.significant());
            Ok(())
        }
    }
}

fn diag_error(d: &Diagnostic) -> CliError {
    print_diagnostics(std::slice::from_ref(d));
    CliError::Diagnostics(usize::from(has_errors(std::slice::from_ref(d))).max(1))
}
