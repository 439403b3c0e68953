use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use nmrdp::automata::{to_dot, MAX_ALPHABET};
use nmrdp::compile::{compile, CompileError};
use nmrdp::logic::{parse, Formula, Prop};
use nmrdp::monitor::{self, color_mdp, color_states, shape_rewards, ShapingMode};
use nmrdp::rewards::{
    self, build_extended_mdp_with, BuildOptions, DomainModel, ExtendedMdp, Mode, RewardSpec,
    RewardsError,
};
use nmrdp::semantics::{enumerate_traces, satisfies, SemanticsError};
use nmrdp::solve::{self, brute_force_value, simulate, value_iterate, SolverConfig};
use nmrdp::Error;

use crate::{Cli, Command, Global, ModeArg, ShapeArg, Stage};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_CHECK: u8 = 3;
pub const EXIT_CAP: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Failure {
        let e = e.into();
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    use nmrdp::automata::AutomataError as A;
    use nmrdp::solve::SolveError as S;
    let compile_code = |c: &CompileError| match c {
        CompileError::AlphabetTooLarge { .. } | CompileError::StateCap(_) => EXIT_CAP,
        CompileError::Automata(A::StateCap(_) | A::AlphabetTooLarge { .. }) => EXIT_CAP,
        _ => EXIT_USAGE,
    };
    match e {
        Error::Logic(_) => EXIT_PARSE,
        Error::Semantics(SemanticsError::TooManyTraces { .. }) => EXIT_CAP,
        Error::Compile(c) => compile_code(c),
        Error::Automata(A::StateCap(_) | A::AlphabetTooLarge { .. }) => EXIT_CAP,
        Error::Rewards(r) | Error::Monitor(monitor::MonitorError::Rewards(r)) => match r {
            RewardsError::Logic(_) | RewardsError::Json(_) => EXIT_PARSE,
            RewardsError::Domain(_)
            | RewardsError::Spec(_)
            | RewardsError::ProbabilitySum { .. } => EXIT_PARSE,
            RewardsError::StateCap(_) => EXIT_CAP,
            RewardsError::Compile(c) => compile_code(c),
            RewardsError::Automata(A::StateCap(_) | A::AlphabetTooLarge { .. }) => EXIT_CAP,
            _ => EXIT_USAGE,
        },
        Error::Solve(S::Cap { .. } | S::NotConverged { .. }) => EXIT_CAP,
        _ => EXIT_USAGE,
    }
}

/// Command output: text lines, a JSON object, and whether every requested
/// check passed.
pub struct Report {
    lines: Vec<String>,
    json: Map<String, Value>,
    pub ok: bool,
}

impl Report {
    fn new(command: &str) -> Report {
        let mut json = Map::new();
        json.insert("command".into(), command.into());
        Report {
            lines: Vec::new(),
            json,
            ok: true,
        }
    }

    fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.json.insert(key.into(), value.into());
    }

    /// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
    pub fn print(&self, json: bool) {
        let mut stdout = io::stdout().lock();
        let _ = if json {
            let mut out = self.json.clone();
            out.insert("ok".into(), self.ok.into());
            writeln!(stdout, "{}", Value::Object(out))
        } else {
            self.lines.iter().try_for_each(|l| writeln!(stdout, "{l}"))
        };
    }
}

pub fn run(cli: &Cli) -> Result<Report, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Compile {
            formula,
            check_oracle,
        } => cmd_compile(g, formula, *check_oracle),
        Command::Check { max_len } => cmd_check(g, *max_len),
        Command::Solve {
            max_iters,
            brute_force,
        } => cmd_solve(g, *max_iters, *brute_force),
        Command::Simulate { episodes, horizon } => cmd_simulate(g, *episodes, *horizon),
        Command::Monitor {
            formula,
            shape,
            max_len,
        } => match formula {
            Some(f) => cmd_monitor_formula(g, f),
            None => cmd_monitor(g, *shape, *max_len),
        },
        Command::ExportDot {
            formula,
            stage,
            colored,
        } => cmd_export_dot(g, formula, *stage, *colored),
    }
}

fn alphabet(g: &Global, f: &Formula) -> Result<BTreeSet<Prop>, Failure> {
    match &g.props {
        None => Ok(f.props()),
        Some(names) => {
            let set = names
                .iter()
                .filter(|n| !n.is_empty())
                .map(|n| Prop::new(n.trim()))
                .collect::<Result<BTreeSet<_>, _>>()?;
            if let Some(p) = f.props().iter().find(|p| !set.contains(p)) {
                return Err(Failure::usage(format!(
                    "formula uses `{p}`, which --props does not list"
                )));
            }
            Ok(set)
        }
    }
}

fn write_out(g: &Global, name: &str, contents: &str) -> Result<Option<String>, Failure> {
    let Some(dir) = &g.out else { return Ok(None) };
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(Some(path.display().to_string()))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serialisable")
}

fn cmd_compile(g: &Global, text: &str, check_oracle: Option<usize>) -> Result<Report, Failure> {
    let f = parse(text)?;
    let alphabet = alphabet(g, &f)?;
    let c = compile(&f, &alphabet)?;
    let mut r = Report::new("compile");
    let names: Vec<String> = alphabet.iter().map(|p| p.to_string()).collect();
    r.line(format!("formula: {f}"));
    r.line(format!("alphabet: {{{}}}", names.join(",")));
    r.line(format!("closure size={}", c.construction.closure_size));
    r.line(format!(
        "NFA (with last) states={} transitions={}",
        c.construction.nfa.num_states(),
        c.construction.nfa.num_transitions()
    ));
    r.line(format!(
        "NFA states={} transitions={}",
        c.nfa.num_states(),
        c.nfa.num_transitions()
    ));
    r.line(format!("DFA states={}", c.dfa.num_states()));
    r.line(format!("minimized DFA states={}", c.minimal.num_states()));
    r.set("formula", f.to_string());
    r.set("alphabet", names);
    r.set("closure_size", c.construction.closure_size);
    r.set("nfa_last_states", c.construction.nfa.num_states());
    r.set("nfa_states", c.nfa.num_states());
    r.set("nfa_transitions", c.nfa.num_transitions());
    r.set("dfa_states", c.dfa.num_states());
    r.set("minimal_states", c.minimal.num_states());
    let mut written = Vec::new();
    for (name, body) in [
        ("nfa.json", pretty(&c.nfa.to_json())),
        ("dfa.json", pretty(&c.dfa.to_json())),
        ("minimal.json", pretty(&c.minimal.to_json())),
        ("minimal.dot", to_dot(&c.minimal)),
    ] {
        if let Some(p) = write_out(g, name, &body)? {
            written.push(p);
        }
    }
    if !written.is_empty() {
        r.line(format!("wrote {}", written.join(", ")));
        r.set("written", written);
    }
    if let Some(n) = check_oracle {
        let mut traces = 0usize;
        let mut mismatches = Vec::new();
        for trace in enumerate_traces(&alphabet, n)? {
            traces += 1;
            if c.minimal.accepts(&trace)? != satisfies(&trace, &f) {
                mismatches.push(trace.to_string());
            }
        }
        if mismatches.is_empty() {
            r.line(format!("oracle: PASS ({traces} traces)"));
        } else {
            r.ok = false;
            r.line(format!(
                "oracle: FAIL ({} of {traces} traces disagree, first {})",
                mismatches.len(),
                mismatches[0]
            ));
        }
        r.set(
            "oracle",
            json!({ "traces": traces, "mismatches": mismatches, "pass": mismatches.is_empty() }),
        );
    }
    Ok(r)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Domain and reward files plus overrides from the command line.
fn project(g: &Global) -> Result<(DomainModel, RewardSpec), Failure> {
    let (Some(d), Some(s)) = (&g.domain, &g.rewards) else {
        return Err(Failure::usage("this command needs --domain and --rewards"));
    };
    let domain = DomainModel::from_json(&read(d)?)?;
    let mut spec = RewardSpec::from_json(&read(s)?)?;
    if let Some(m) = g.mode {
        spec.mode = match m {
            ModeArg::Prefix => Mode::Prefix,
            ModeArg::Complete => Mode::Complete,
        };
    }
    if let Some(gamma) = g.gamma {
        spec = RewardSpec::new(spec.pairs, gamma, spec.mode)?;
    }
    Ok((domain, spec))
}

fn build(g: &Global) -> Result<ExtendedMdp, Failure> {
    let (domain, spec) = project(g)?;
    let options = BuildOptions {
        action_props: g.action_props,
        ..BuildOptions::default()
    };
    Ok(build_extended_mdp_with(&domain, &spec, options)?)
}

fn describe(r: &mut Report, mdp: &ExtendedMdp) {
    let mode = match mdp.mode() {
        Mode::Prefix => "prefix",
        Mode::Complete => "complete",
    };
    r.line(format!(
        "extended MDP: states={} transitions={} formulas={} mode={mode} discount={}",
        mdp.num_states(),
        mdp.num_transitions(),
        mdp.dfas().len(),
        mdp.discount()
    ));
    r.set("states", mdp.num_states());
    r.set("transitions", mdp.num_transitions());
    r.set("mode", mode);
    r.set("discount", mdp.discount());
}

fn cmd_check(g: &Global, max_len: usize) -> Result<Report, Failure> {
    let mdp = build(g)?;
    let mut r = Report::new("check");
    describe(&mut r, &mdp);
    let report = rewards::verify_equivalence(&mdp, max_len);
    let reachable = rewards::audit_reachability(&mdp);
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    r.line(format!("injection: {}", verdict(report.injection)));
    r.line(format!(
        "transitions: {} (max error {:e})",
        verdict(report.transitions),
        report.max_prob_error
    ));
    r.line(format!(
        "rewards: {} ({} trajectories up to length {max_len}, {} mismatches)",
        verdict(report.rewards),
        report.trajectories,
        report.reward_mismatches
    ));
    r.line(format!("reachability: {}", verdict(reachable)));
    r.ok = report.holds() && reachable;
    r.set(
        "equivalence",
        serde_json::to_value(&report).expect("serialisable"),
    );
    r.set("reachable", reachable);
    Ok(r)
}

fn solver(g: &Global, mdp: &ExtendedMdp, max_iters: usize) -> SolverConfig {
    SolverConfig {
        gamma: mdp.discount(),
        epsilon: g.epsilon,
        max_iters,
    }
}

fn cmd_solve(g: &Global, max_iters: usize, brute_force: Option<usize>) -> Result<Report, Failure> {
    let mdp = build(g)?;
    let sol = value_iterate(&mdp, &solver(g, &mdp, max_iters))?;
    let mut r = Report::new("solve");
    describe(&mut r, &mdp);
    let v0 = sol.values.get(mdp.initial());
    r.line(format!(
        "iterations={} residual={:e}",
        sol.iterations, sol.residual
    ));
    r.line(format!("V(init)={v0:.9}"));
    let first = sol
        .policy
        .action(mdp.initial())
        .map(|a| mdp.actions()[a].clone());
    r.line(format!("action(init)={}", first.as_deref().unwrap_or("-")));
    r.set("iterations", sol.iterations);
    r.set("residual", sol.residual);
    r.set("value", v0);
    r.set("action", first);
    if let Some(h) = brute_force {
        let exact = brute_force_value(&mdp, h)?;
        let gamma = mdp.discount();
        let bound = gamma.powi(h as i32) * mdp.max_abs_reward() / (1.0 - gamma) + 1e-6;
        let diff = sol.values.max_diff(&exact);
        let pass = diff <= bound;
        r.ok &= pass;
        r.line(format!(
            "brute force H={h}: max |dV|={diff:e} bound={bound:e} {}",
            if pass { "PASS" } else { "FAIL" }
        ));
        r.set(
            "brute_force",
            json!({ "horizon": h, "max_diff": diff, "bound": bound, "pass": pass }),
        );
    }
    let mut written = Vec::new();
    for (name, body) in [
        ("policy.json", pretty(&sol.policy.to_json(&mdp))),
        ("values.json", pretty(&sol.values.to_json(&mdp))),
    ] {
        if let Some(p) = write_out(g, name, &body)? {
            written.push(p);
        }
    }
    if !written.is_empty() {
        r.line(format!("wrote {}", written.join(", ")));
    }
    r.set("policy", sol.policy.to_json(&mdp));
    r.set("values", sol.values.to_json(&mdp));
    Ok(r)
}

fn cmd_simulate(g: &Global, episodes: usize, horizon: usize) -> Result<Report, Failure> {
    if horizon == 0 {
        return Err(Failure::usage("--horizon must be at least 1"));
    }
    let mdp = build(g)?;
    let sol = value_iterate(&mdp, &solver(g, &mdp, solve::DEFAULT_MAX_ITERS))?;
    let stats = simulate(&mdp, &sol.policy, episodes, horizon, g.seed);
    let mut r = Report::new("simulate");
    describe(&mut r, &mdp);
    let predicted = sol.values.get(mdp.initial());
    r.line(format!(
        "episodes={} horizon={} seed={} mean={:.6} stdev={:.6} predicted V(init)={predicted:.6}",
        stats.episodes, stats.horizon, g.seed, stats.mean, stats.stdev
    ));
    for (i, ((f, _), freq)) in mdp.spec().pairs.iter().zip(&stats.satisfaction).enumerate() {
        r.line(format!(
            "formula {i} `{f}` satisfied in {:.1}% of episodes",
            100.0 * freq
        ));
    }
    r.set("stats", serde_json::to_value(&stats).expect("serialisable"));
    r.set("predicted", predicted);
    r.set("seed", g.seed);
    Ok(r)
}

fn coloring_lines(r: &mut Report, label: &str, c: &monitor::MonitorColoring) {
    let parts: Vec<String> = c
        .colors()
        .iter()
        .enumerate()
        .map(|(q, col)| format!("{q}:{col}"))
        .collect();
    r.line(format!("{label}: {}", parts.join(" ")));
}

fn cmd_monitor_formula(g: &Global, text: &str) -> Result<Report, Failure> {
    let f = parse(text)?;
    let alphabet = alphabet(g, &f)?;
    let dfa = compile(&f, &alphabet)?.minimal;
    let c = color_states(&dfa);
    let mut r = Report::new("monitor");
    r.line(format!("formula: {f}"));
    r.line(format!("initial state: {}", dfa.initial()));
    coloring_lines(&mut r, "colours", &c);
    r.set("formula", f.to_string());
    r.set("initial", dfa.initial());
    r.set("colors", c.to_json());
    if let Some(p) = write_out(g, "monitor.dot", &c.to_dot(&dfa))? {
        r.line(format!("wrote {p}"));
    }
    Ok(r)
}

fn cmd_monitor(g: &Global, shape: Option<ShapeArg>, max_len: usize) -> Result<Report, Failure> {
    let mdp = build(g)?;
    let colorings = color_mdp(&mdp);
    let mut r = Report::new("monitor");
    describe(&mut r, &mdp);
    let mut all = Vec::new();
    for (i, (c, dfa)) in colorings.iter().zip(mdp.dfas()).enumerate() {
        let f = &mdp.spec().pairs[i].0;
        coloring_lines(
            &mut r,
            &format!("formula {i} `{f}` (initial {})", dfa.initial()),
            c,
        );
        all.push(
            json!({ "formula": f.to_string(), "initial": dfa.initial(), "colors": c.to_json() }),
        );
        write_out(g, &format!("monitor_{i}.dot"), &c.to_dot(dfa))?;
    }
    r.set("colorings", all);
    if let Some(shape) = shape {
        let mode = match shape {
            ShapeArg::EarlyPositive => ShapingMode::EarlyPositive,
            ShapeArg::NegativeTransform => ShapingMode::NegativeTransform,
        };
        let shaped = shape_rewards(&mdp, &colorings, mode)?;
        for w in &shaped.warnings {
            r.line(format!("warning: {w}"));
        }
        r.line(format!("shaped MDP: states={}", shaped.mdp.num_states()));
        r.set("warnings", shaped.warnings.clone());
        r.set("shaped_states", shaped.mdp.num_states());
        if mode == ShapingMode::NegativeTransform {
            let inv = monitor::shaping_invariance(&mdp, &shaped.mdp, max_len);
            r.ok &= inv.holds();
            r.line(format!(
                "invariance: {} ({} complete traces up to length {max_len}, delta {}..{})",
                if inv.holds() { "PASS" } else { "FAIL" },
                inv.traces,
                inv.min_delta,
                inv.max_delta
            ));
            r.set(
                "invariance",
                serde_json::to_value(&inv).expect("serialisable"),
            );
        }
        if let Some(p) = write_out(g, "shaped.json", &pretty(&shaped.mdp.to_json()))? {
            r.line(format!("wrote {p}"));
        }
    }
    Ok(r)
}

fn cmd_export_dot(g: &Global, text: &str, stage: Stage, colored: bool) -> Result<Report, Failure> {
    let f = parse(text)?;
    let alphabet = alphabet(g, &f)?;
    if alphabet.len() > MAX_ALPHABET {
        return Err(CompileError::AlphabetTooLarge {
            size: alphabet.len(),
            cap: MAX_ALPHABET,
        }
        .into());
    }
    let c = compile(&f, &alphabet)?;
    let dot = match (stage, colored) {
        (Stage::Minimal, true) => color_states(&c.minimal).to_dot(&c.minimal),
        (_, true) => return Err(Failure::usage("--colored needs the minimal stage")),
        (Stage::NfaLast, _) => to_dot(&c.construction.nfa),
        (Stage::Nfa, _) => to_dot(&c.nfa),
        (Stage::Dfa, _) => to_dot(&c.dfa),
        (Stage::Minimal, _) => to_dot(&c.minimal),
    };
    let mut r = Report::new("export-dot");
    match write_out(g, "automaton.dot", &dot)? {
        Some(p) => r.line(format!("wrote {p}")),
        None => r.line(dot.trim_end()),
    }
    r.set("dot", dot);
    Ok(r)
}
