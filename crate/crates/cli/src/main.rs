//! Command-line interface: run programs, explore state spaces, compare
//! processes, and show desugared rules.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qlmntal_core::diagnostics::{Diagnostic, Warning};
use qlmntal_core::engine::{self, RunConfig, StopReason, Strategy};
use qlmntal_core::syntax::{parse_process, parse_program, print_process, print_rule};

#[derive(Parser)]
#[command(name = "qlmntal", version, about = "Hierarchical graph rewriting with quantifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program until quiescence or a limit.
    Run {
        /// Program file.
        file: PathBuf,
        /// Stop after this many steps.
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Successor choice per step.
        #[arg(long, value_enum, default_value_t = StrategyArg::First)]
        strategy: StrategyArg,
        /// Seed for the random strategy.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace format.
        #[arg(long, value_enum, default_value_t = TraceArg::Text)]
        trace: TraceArg,
        /// Stop when a state congruent to an earlier one recurs.
        #[arg(long)]
        fixpoint_on_congruent: bool,
    },
    /// Explore all reachable states up to congruence.
    Space {
        /// Program file.
        file: PathBuf,
        /// Stop after discovering this many states.
        #[arg(long, default_value_t = 10000)]
        max_states: usize,
        /// Write the state graph in DOT format to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check two processes for structural congruence.
    Check {
        /// File holding the first process.
        first: PathBuf,
        /// File holding the second process.
        second: PathBuf,
    },
    /// Print each rule in core form, shorthands expanded.
    Desugar {
        /// Program file.
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    First,
    Random,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceArg {
    Text,
    Json,
}

#[derive(Serialize)]
struct JsonEvent<'a> {
    step: usize,
    rule_index: usize,
    rule_text: &'a str,
    pre: &'a str,
    post: &'a str,
    pre_key: &'a str,
    post_key: &'a str,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(diag) => {
            eprintln!("error: {diag}");
            ExitCode::from(1)
        }
    }
}

/// Writes one line to stdout. A closed pipe (the reader stopped, as in
/// `qlmntal space p.qlmn | head`) ends the process quietly instead of
/// panicking.
fn say(line: impl std::fmt::Display) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(0);
    }
}

fn read(path: &PathBuf) -> Result<String, Diagnostic> {
    fs::read_to_string(path)
        .map_err(|e| Diagnostic::Internal(format!("cannot read {}: {e}", path.display())))
}

fn report_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn dispatch() -> Result<ExitCode, Diagnostic> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            max_steps,
            strategy,
            seed,
            trace,
            fixpoint_on_congruent,
        } => {
            let program = parse_program(&read(&file)?)?;
            let (mut session, warnings) = engine::prepare(&program)?;
            report_warnings(&warnings);
            let config = RunConfig {
                max_steps,
                strategy: match strategy {
                    StrategyArg::First => Strategy::First,
                    StrategyArg::Random => Strategy::Random,
                    StrategyArg::All => Strategy::All,
                },
                seed,
                fixpoint_on_congruent,
            };
            let outcome = engine::run(&mut session, &config);
            for event in &outcome.trace {
                match trace {
                    TraceArg::Text => say(format_args!(
                        "step {}: rule {}: {} => {}",
                        event.step, event.rule_index, event.pre, event.post
                    )),
                    TraceArg::Json => {
                        let line = serde_json::to_string(&JsonEvent {
                            step: event.step,
                            rule_index: event.rule_index,
                            rule_text: &event.rule_text,
                            pre: &event.pre,
                            post: &event.post,
                            pre_key: &event.pre_key.0,
                            post_key: &event.post_key.0,
                        })
                        .expect("trace events serialize");
                        say(line);
                    }
                }
            }
            say(format_args!(
                "stopped: {}",
                match outcome.stop {
                    StopReason::Quiescent => "quiescent",
                    StopReason::StepLimit => "step-limit",
                    StopReason::Fixpoint => "fixpoint",
                }
            ));
            say(format_args!("steps: {}", outcome.steps));
            for state in &outcome.finals {
                say(format_args!("final: {}", print_process(state)));
            }
            Ok(if outcome.stop == StopReason::StepLimit {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Space {
            file,
            max_states,
            dot,
        } => {
            let program = parse_program(&read(&file)?)?;
            let (mut session, warnings) = engine::prepare(&program)?;
            report_warnings(&warnings);
            let graph = engine::explore(&mut session, max_states);
            say(format_args!("states: {}", graph.states.len()));
            say(format_args!("edges: {}", graph.edges.len()));
            say(format_args!("truncated: {}", graph.truncated));
            for (i, key) in graph.order.iter().enumerate() {
                say(format_args!("state {i}: {}", print_process(&graph.states[key])));
            }
            if let Some(out) = dot {
                let mut index = std::collections::BTreeMap::new();
                for (i, key) in graph.order.iter().enumerate() {
                    index.insert(key.clone(), i);
                }
                let mut text = String::from("digraph states {\n  rankdir=LR;\n");
                for (i, key) in graph.order.iter().enumerate() {
                    let label = print_process(&graph.states[key]).replace('"', "\\\"");
                    let _ = writeln!(text, "  n{i} [label=\"{label}\"];");
                }
                for (from, rule, to) in &graph.edges {
                    let _ = writeln!(
                        text,
                        "  n{} -> n{} [label=\"{rule}\"];",
                        index[from], index[to]
                    );
                }
                text.push_str("}\n");
                fs::write(&out, text).map_err(|e| {
                    Diagnostic::Internal(format!("cannot write {}: {e}", out.display()))
                })?;
            }
            Ok(if graph.truncated {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Check { first, second } => {
            let a = parse_process(&read(&first)?)?;
            let b = parse_process(&read(&second)?)?;
            match engine::check_congruent(&a, &b) {
                (true, _) => say("congruent"),
                (false, reason) => say(format_args!(
                    "not congruent: {}",
                    reason.unwrap_or_else(|| "structures differ".to_string())
                )),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Desugar { file } => {
            let program = parse_program(&read(&file)?)?;
            let (session, warnings) = engine::prepare(&program)?;
            report_warnings(&warnings);
            for rule in &session.rules {
                say(print_rule(rule));
            }
            if !session.init.is_empty() {
                say(format_args!("{}.", print_process(&session.init)));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
