//! The `thermocomp` command line.
//!
//! Every verb reads one input file and writes one artifact, to `--output`
//! or to standard output. Domain failures exit with status 1 and a single
//! `error=<kind> message="..."` line on standard error; usage errors exit
//! with status 2.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::automata::{self, Automaton, AutomatonError, Nfa};
use crate::dynamics::{self, DynamicsError, SimConfig};
use crate::measures::{self, MeasureError};
use crate::network::{Network, NetworkError};
use crate::problems::{
    self, CnfFormula, CnfInput, GraphDoc, InterdictionInstance, ProblemError, SatOutcome,
    TspInstance, WeightedGraph,
};
use crate::reduction::{self, ReductionError};

#[derive(Debug, Parser)]
#[command(
    name = "thermocomp",
    version,
    about = "Thermodynamic network simulator and problem toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Io {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a network to its steady state and write the trajectory CSV.
    Simulate {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long = "max-steps")]
        max_steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute the state-space measures and class label of a network.
    Measure {
        #[command(flatten)]
        io: Io,
    },
    /// Contract chain nodes and report measures before and after.
    Reduce {
        #[command(flatten)]
        io: Io,
    },
    /// Build an NFA (from a network or automaton file) and its subset
    /// construction.
    Automaton {
        #[command(flatten)]
        io: Io,
        #[arg(long = "max-len", default_value_t = 8)]
        max_len: usize,
    },
    /// Solve a problem instance.
    Solve {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        problem: ProblemKind,
        #[arg(long, default_value_t = 1)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a network file and list every violated rule.
    Validate {
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Sssp,
    Tsp,
    TspGreedy,
    Interdict,
    #[value(name = "2sat")]
    TwoSat,
    Sat,
    SatClassify,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    InvalidNetwork(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
            CliError::Network(NetworkError::Parse(_)) => "parse",
            CliError::Network(_) => "network",
            CliError::Dynamics(_) => "dynamics",
            CliError::Measure(_) => "measure",
            CliError::Reduction(_) => "reduction",
            CliError::Automaton(AutomatonError::Parse(_)) => "parse",
            CliError::Automaton(_) => "automaton",
            CliError::Problem(ProblemError::Parse { .. }) => "parse",
            CliError::Problem(_) => "problem",
            CliError::InvalidNetwork(_) => "invalid-network",
        }
    }

    /// `error=<kind> message="<text>"` on one line.
    pub fn diagnostic(&self) -> String {
        let text = self
            .to_string()
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
            .replace('\n', " ");
        format!("error={} message=\"{}\"", self.kind(), text)
    }
}

/// Parse arguments, run the command and map the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(1)
        }
    }
}

pub fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            io,
            dt,
            epsilon,
            window,
            max_steps,
            seed,
        } => {
            let network = read_network(&io.input)?;
            let mut config = SimConfig::default();
            if let Some(dt) = *dt {
                config.dt_initial = dt;
                config.dt_max = config.dt_max.max(dt);
            }
            if let Some(e) = *epsilon {
                config.epsilon = e;
            }
            if let Some(w) = *window {
                config.window = w;
            }
            if let Some(m) = *max_steps {
                config.max_steps = m;
            }
            if let Some(s) = *seed {
                config.seed = s;
            }
            let traj = dynamics::simulate(&network, &config)?;
            write_output(io.output.as_deref(), &traj.to_csv())
        }
        Command::Measure { io } => {
            let network = read_network(&io.input)?;
            let report = measures::measure(&network)?;
            write_json(io.output.as_deref(), &report)
        }
        Command::Reduce { io } => {
            let network = read_network(&io.input)?;
            let before = measures::measure(&network)?;
            let (reduced, trace) = reduction::contract_chains(&network)?;
            let after = measures::measure(&reduced)?;
            write_json(
                io.output.as_deref(),
                &json!({
                    "network": reduced,
                    "trace": trace,
                    "before": before,
                    "after": after,
                }),
            )
        }
        Command::Automaton { io, max_len } => {
            let text = read_text(&io.input)?;
            let value: Value =
                serde_json::from_str(&text).map_err(|e| parse_error(&io.input, e))?;
            let nfa = if value.get("states").is_some() {
                Nfa::from_json(&text)?
            } else {
                automata::nfa_from_network(&Network::from_json(&text)?)?
            };
            let dfa = automata::subset_construction(&nfa);
            let equivalent = automata::equivalent_up_to(&nfa, &dfa, *max_len)?;
            write_json(
                io.output.as_deref(),
                &json!({
                    "nfa": nfa.to_doc(),
                    "dfa": dfa.to_doc(),
                    "nfa_states": nfa.states().len(),
                    "dfa_states": dfa.state_count(),
                    "equivalent_up_to": equivalent,
                    "max_len": max_len,
                }),
            )
        }
        Command::Solve {
            io,
            problem,
            budget,
            seed: _,
        } => solve(io, *problem, *budget),
        Command::Validate { io } => {
            let network = read_network_unchecked(&io.input)?;
            let violations: Vec<String> =
                network.validate().iter().map(|v| v.to_string()).collect();
            let warnings = network.stirling_warnings();
            write_json(
                io.output.as_deref(),
                &json!({
                    "valid": violations.is_empty(),
                    "violations": violations,
                    "warnings": warnings,
                }),
            )?;
            if violations.is_empty() {
                Ok(())
            } else {
                Err(CliError::InvalidNetwork(violations.join("; ")))
            }
        }
    }
}

/// Graph problems: vertices, edges and endpoints, plus interdiction options.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphProblemDoc {
    vertices: Vec<String>,
    edges: Vec<problems::GraphEdgeDoc>,
    #[serde(default)]
    directed: bool,
    source: String,
    target: String,
    #[serde(default)]
    removable: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
struct PathReport {
    reachable: bool,
    cost: Option<f64>,
    path: Vec<String>,
}

fn solve(io: &Io, problem: ProblemKind, budget: usize) -> Result<(), CliError> {
    let text = read_text(&io.input)?;
    let out = io.output.as_deref();
    match problem {
        ProblemKind::Sssp | ProblemKind::Interdict => {
            let doc: GraphProblemDoc =
                serde_json::from_str(&text).map_err(|e| parse_error(&io.input, e))?;
            let graph = WeightedGraph::from_doc(&GraphDoc {
                vertices: doc.vertices,
                edges: doc.edges,
                directed: doc.directed,
            })?;
            if problem == ProblemKind::Sssp {
                let r = problems::shortest_path(&graph, &doc.source, &doc.target)?;
                let report = match r {
                    Some(p) => PathReport {
                        reachable: true,
                        cost: Some(p.cost),
                        path: p.path,
                    },
                    None => PathReport {
                        reachable: false,
                        cost: None,
                        path: Vec::new(),
                    },
                };
                return write_json(out, &report);
            }
            let instance =
                InterdictionInstance::new(graph, &doc.source, &doc.target, budget, doc.removable)?;
            let r = problems::interdict(&instance)?;
            write_json(
                out,
                &json!({
                    "budget": budget,
                    "removed": r.removed,
                    "reachable": r.cost.is_some(),
                    "cost": r.cost,
                    "base_cost": finite(instance.cost_without(&[])),
                }),
            )
        }
        ProblemKind::Tsp | ProblemKind::TspGreedy => {
            let instance: TspInstance =
                serde_json::from_str(&text).map_err(|e| parse_error(&io.input, e))?;
            let tour = if problem == ProblemKind::Tsp {
                problems::tsp_exact(&instance)?
            } else {
                problems::tsp_greedy_mepp(&instance)
            };
            write_json(out, &tour)
        }
        ProblemKind::TwoSat | ProblemKind::Sat | ProblemKind::SatClassify => {
            let (formula, empty_clause) = match problems::parse_dimacs(&text)? {
                CnfInput::Formula(f) => (f, false),
                CnfInput::EmptyClause { rest, .. } => (rest, true),
            };
            if problem == ProblemKind::SatClassify {
                return write_json(
                    out,
                    &json!({ "class": problems::sat_classify(&formula).as_str(), "max_width": formula.max_width() }),
                );
            }
            let outcome = if empty_clause {
                SatOutcome::Unsatisfiable
            } else if problem == ProblemKind::TwoSat {
                problems::solve_2sat(&formula)?
            } else {
                problems::solve_sat_bruteforce(&formula)?
            };
            write_json(out, &sat_report(&formula, &outcome))
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn sat_report(formula: &CnfFormula, outcome: &SatOutcome) -> Value {
    match outcome {
        SatOutcome::Satisfiable(a) => {
            let model: Vec<i64> = a
                .iter()
                .enumerate()
                .map(|(i, &v)| if v { i as i64 + 1 } else { -(i as i64 + 1) })
                .collect();
            json!({
                "verdict": "satisfiable",
                "assignment": model,
                "verified": formula.is_satisfied_by(a),
            })
        }
        SatOutcome::Unsatisfiable => json!({ "verdict": "unsatisfiable", "assignment": null }),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Parse(format!("{}: {e}", path.display()))
}

fn read_network_unchecked(path: &Path) -> Result<Network, CliError> {
    let text = read_text(path)?;
    Ok(Network::from_json(&text)?)
}

fn read_network(path: &Path) -> Result<Network, CliError> {
    let network = read_network_unchecked(path)?;
    network.ensure_valid()?;
    Ok(network)
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_output(path, &text)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let result = match path {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| CliError::Io {
        path: path.map_or("<stdout>".into(), |p| p.display().to_string()),
        message: e.to_string(),
    })
}
