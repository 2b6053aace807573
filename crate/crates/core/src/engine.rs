//! Program preparation, execution strategies, state-space exploration, and
//! congruence checking.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::congruence::{canonical, explain_difference, CanonicalKey};
use crate::diagnostics::{Diagnostic, Warning};
use crate::process::Process;
use crate::rewrite::successors;
use crate::syntax::{desugar_rule, print_process, validate_rule, SourceProgram};
use crate::template::{FreshNamer, Rule};

/// A program after desugaring and validation, ready to run.
#[derive(Debug, Clone)]
pub struct Session {
    pub rules: Vec<Rule>,
    pub init: Process,
    pub namer: FreshNamer,
}

/// Desugars and validates every rule of a parsed program.
pub fn prepare(program: &SourceProgram) -> Result<(Session, Vec<Warning>), Diagnostic> {
    let mut namer = program.namer.clone();
    let mut rules = Vec::new();
    let mut warnings = Vec::new();
    for (index, rule) in program.rules.iter().enumerate() {
        let core = desugar_rule(rule, &mut namer);
        warnings.extend(validate_rule(index, &core)?);
        rules.push(core);
    }
    Ok((
        Session {
            rules,
            init: program.init.clone(),
            namer,
        },
        warnings,
    ))
}

/// How to pick among a step's possible successors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Always the first successor in rule-then-key order.
    First,
    /// Uniform choice with a seeded generator; runs reproduce exactly.
    Random,
    /// Follow every successor; collect all reachable quiescent states.
    All,
}

/// Execution limits and strategy.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub max_steps: usize,
    pub strategy: Strategy,
    pub seed: u64,
    /// Stop as soon as a state congruent to an earlier one recurs.
    pub fixpoint_on_congruent: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_steps: 1000,
            strategy: Strategy::First,
            seed: 0,
            fixpoint_on_congruent: false,
        }
    }
}

/// One applied rewrite in a run.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub step: usize,
    pub rule_index: usize,
    pub rule_text: String,
    pub pre: String,
    pub post: String,
    pub pre_key: CanonicalKey,
    pub post_key: CanonicalKey,
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// No rule applies.
    Quiescent,
    /// The step budget ran out with rules still applicable.
    StepLimit,
    /// A state congruent to an earlier one recurred.
    Fixpoint,
}

/// Result of a run: the state(s) it ended in and the applied steps.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub finals: Vec<Process>,
    pub steps: usize,
    pub stop: StopReason,
    pub trace: Vec<TraceEvent>,
}

/// Runs a prepared session under the given configuration.
pub fn run(session: &mut Session, config: &RunConfig) -> RunOutcome {
    match config.strategy {
        Strategy::All => run_all(session, config),
        _ => run_linear(session, config),
    }
}

fn run_linear(session: &mut Session, config: &RunConfig) -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut key, mut state) = canonical(&session.init);
    let mut seen: BTreeSet<CanonicalKey> = BTreeSet::new();
    seen.insert(key.clone());
    let mut trace = Vec::new();
    let mut steps = 0usize;
    loop {
        let succs = successors(&state, &session.rules, &mut session.namer);
        if succs.is_empty() {
            return RunOutcome {
                finals: vec![state],
                steps,
                stop: StopReason::Quiescent,
                trace,
            };
        }
        if steps == config.max_steps {
            return RunOutcome {
                finals: vec![state],
                steps,
                stop: StopReason::StepLimit,
                trace,
            };
        }
        let choice = match config.strategy {
            Strategy::First => 0,
            Strategy::Random => rng.gen_range(0..succs.len()),
            Strategy::All => unreachable!(),
        };
        let (rule_index, next_key, next_state) = succs.into_iter().nth(choice).unwrap();
        steps += 1;
        trace.push(TraceEvent {
            step: steps,
            rule_index,
            rule_text: session.rules[rule_index].text.clone(),
            pre: print_process(&state),
            post: print_process(&next_state),
            pre_key: key.clone(),
            post_key: next_key.clone(),
        });
        state = next_state;
        key = next_key;
        if config.fixpoint_on_congruent && !seen.insert(key.clone()) {
            return RunOutcome {
                finals: vec![state],
                steps,
                stop: StopReason::Fixpoint,
                trace,
            };
        }
    }
}

/// Breadth-first expansion within the step budget; quiescent states are the
/// finals. Each newly discovered state contributes one trace event.
fn run_all(session: &mut Session, config: &RunConfig) -> RunOutcome {
    let (init_key, init_state) = canonical(&session.init);
    let mut seen: BTreeSet<CanonicalKey> = BTreeSet::new();
    seen.insert(init_key.clone());
    let mut queue: VecDeque<(CanonicalKey, Process, usize)> = VecDeque::new();
    queue.push_back((init_key, init_state, 0));
    let mut finals: BTreeMap<CanonicalKey, Process> = BTreeMap::new();
    let mut trace = Vec::new();
    let mut truncated = false;
    let mut deepest = 0usize;
    while let Some((key, state, depth)) = queue.pop_front() {
        if depth == config.max_steps {
            truncated = true;
            continue;
        }
        let succs = successors(&state, &session.rules, &mut session.namer);
        if succs.is_empty() {
            finals.insert(key, state);
            continue;
        }
        deepest = deepest.max(depth + 1);
        for (rule_index, next_key, next_state) in succs {
            if !seen.insert(next_key.clone()) {
                continue;
            }
            trace.push(TraceEvent {
                step: depth + 1,
                rule_index,
                rule_text: session.rules[rule_index].text.clone(),
                pre: print_process(&state),
                post: print_process(&next_state),
                pre_key: key.clone(),
                post_key: next_key.clone(),
            });
            queue.push_back((next_key, next_state, depth + 1));
        }
    }
    RunOutcome {
        finals: finals.into_values().collect(),
        steps: deepest,
        stop: if truncated {
            StopReason::StepLimit
        } else {
            StopReason::Quiescent
        },
        trace,
    }
}

/// The reachable state space, one node per congruence class.
#[derive(Debug, Clone)]
pub struct StateGraph {
    pub states: BTreeMap<CanonicalKey, Process>,
    /// Edges `(from, rule index, to)`.
    pub edges: BTreeSet<(CanonicalKey, usize, CanonicalKey)>,
    pub initial: CanonicalKey,
    /// Discovery order, breadth first; stable across runs.
    pub order: Vec<CanonicalKey>,
    /// True if the state budget cut exploration short.
    pub truncated: bool,
}

/// Explores every state reachable from the initial process, deduplicating
/// up to congruence, until quiescence everywhere or `max_states` states.
pub fn explore(session: &mut Session, max_states: usize) -> StateGraph {
    let (init_key, init_state) = canonical(&session.init);
    let mut graph = StateGraph {
        states: BTreeMap::new(),
        edges: BTreeSet::new(),
        initial: init_key.clone(),
        order: vec![init_key.clone()],
        truncated: false,
    };
    graph.states.insert(init_key.clone(), init_state.clone());
    let mut queue = VecDeque::new();
    queue.push_back((init_key, init_state));
    while let Some((key, state)) = queue.pop_front() {
        for (rule_index, next_key, next_state) in
            successors(&state, &session.rules, &mut session.namer)
        {
            if !graph.states.contains_key(&next_key) {
                if graph.states.len() >= max_states {
                    graph.truncated = true;
                    continue;
                }
                graph.states.insert(next_key.clone(), next_state.clone());
                graph.order.push(next_key.clone());
                queue.push_back((next_key.clone(), next_state));
            }
            graph.edges.insert((key.clone(), rule_index, next_key));
        }
    }
    graph
}

/// Whether two processes are structurally congruent; if not, one line on
/// where they first differ.
pub fn check_congruent(a: &Process, b: &Process) -> (bool, Option<String>) {
    match explain_difference(a, b) {
        None => (true, None),
        Some(reason) => (false, Some(reason)),
    }
}
