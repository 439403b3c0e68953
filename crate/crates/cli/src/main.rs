//! `nmrdp` command-line front end.
//!
//! Formula grammar, loosest first. `X`, `WX`, `F` and `G` are operators
//! only when a formula follows; otherwise they name propositions. Unicode
//! forms (`¬ ∧ ∨ → ↔ ○ ● ◇ □ ⟨ ⟩ ⊤ ⊥`) are accepted too.
//!
//! ```text
//! formula  ::= disj ( ("->" | "<->") formula )?
//! disj     ::= conj ( ("||" | "|") conj )*
//! conj     ::= temporal ( ("&&" | "&") temporal )*
//! temporal ::= unary ( ("U" | "R") temporal )?
//! unary    ::= ("!" | "~" | "X" | "WX" | "F" | "G") unary
//!            | "<" path ">" unary | "[" path "]" unary | atom
//! atom     ::= "tt" | "ff" | "true" | "false" | "last" | "end" | prop
//!            | "(" formula ")"
//! path     ::= seq ( "+" seq )*
//! seq      ::= starred ( ";" starred )*
//! starred  ::= step "*"*
//! step     ::= "(" path ")" | formula "?" | propositional formula
//!            | "if" formula "then" path "else" path
//!            | "while" formula "do" path
//! prop     ::= [A-Za-z_][A-Za-z0-9_]*   (not a keyword)
//! ```

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Compile LTLf/LDLf reward formulas, build and solve the extended MDP,
/// and colour automata for monitoring.
#[derive(Parser, Debug)]
#[command(name = "nmrdp", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Comma-separated propositions (defaults to those in the formula).
    #[arg(long, global = true, value_delimiter = ',')]
    pub props: Option<Vec<String>>,
    /// Discount factor; overrides the reward file.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Value-iteration tolerance.
    #[arg(long, global = true, default_value_t = nmrdp::solve::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Reward mode; overrides the reward file.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Add one proposition per action to the letters formulas read.
    #[arg(long, global = true)]
    pub action_props: bool,
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory for artefacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Domain file (JSON).
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    /// Reward specification file (JSON).
    #[arg(long, global = true)]
    pub rewards: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Prefix,
    Complete,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    EarlyPositive,
    NegativeTransform,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    /// Automaton over the alphabet plus `last`.
    NfaLast,
    Nfa,
    Dfa,
    Minimal,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a formula and report automaton sizes.
    Compile {
        formula: String,
        /// Compare the minimal DFA with the semantics on every trace up to
        /// this length.
        #[arg(long)]
        check_oracle: Option<usize>,
    },
    /// Verify the extended MDP against the domain and the semantics.
    Check {
        /// Longest trajectory checked.
        #[arg(long, default_value_t = 5)]
        max_len: usize,
    },
    /// Build and solve the extended MDP.
    Solve {
        #[arg(long, default_value_t = nmrdp::solve::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Also compare with exact finite-horizon values.
        #[arg(long)]
        brute_force: Option<usize>,
    },
    /// Roll out the optimal policy.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 100)]
        horizon: usize,
    },
    /// Colour automaton states; optionally shape rewards.
    Monitor {
        /// Colour a single formula instead of a reward file.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, value_enum)]
        shape: Option<ShapeArg>,
        /// Longest complete trace for the shaping invariance check.
        #[arg(long, default_value_t = 5)]
        max_len: usize,
    },
    /// Print an automaton as GraphViz DOT.
    ExportDot {
        formula: String,
        #[arg(long, value_enum, default_value_t = Stage::Minimal)]
        stage: Stage,
        /// Fill states with their monitoring colour (minimal stage only).
        #[arg(long)]
        colored: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(commands::EXIT_USAGE),
            };
        }
    };
    match commands::run(&cli) {
        Ok(report) => {
            report.print(cli.global.json);
            ExitCode::from(if report.ok { 0 } else { commands::EXIT_CHECK })
        }
        Err(e) => {
            if cli.global.json {
                println!(
                    "{}",
                    serde_json::json!({ "error": e.message, "exit": e.code })
                );
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
