//! Command-line front end: parse, evaluate, choose, simulate, verify, and
//! compare, with file-based input and reproducible output.
//!
//! Every invocation is deterministic: identical arguments, input files, and
//! configuration produce byte-identical output. Exit codes partition the
//! outcomes:
//!
//! * 0 — success: document valid, action permitted, property holds, run clean
//! * 1 — file, parse, or execution errors (messages name the offending path)
//! * 2 — usage errors (unknown flags, missing arguments, conflicting flags)
//! * 3 — the queried action is not permitted
//! * 4 — a scripted request was rejected during simulation
//! * 5 — a checked property is violated
//!
//! A consumer that closes stdout early (for example `drmlab ... | head`)
//! ends the run quietly with the conventional SIGPIPE code 141.

mod config;

use clap::{Parser, Subcommand};
use drmlab_core::agent::AgentError;
use drmlab_core::choosers::{choose_baseline, choose_labeled};
use drmlab_core::eval::{self, ConstraintState};
use drmlab_core::format;
use drmlab_core::label::compute_label;
use drmlab_core::trace::{to_json_lines, Event};
use drmlab_core::verifier::compare::{render_json, render_text};
use drmlab_core::verifier::{
    check_liveness, check_safety, compare_choosers, generate_corpus, horizon_warning,
    instance_from_value, parse_instance, serialize_instance, verdict_value, CorpusBounds,
};
use drmlab_core::{
    ActionKind, AgentState, ChooserKind, Instance, License, PrecedenceTable, Property, Right,
    Tick,
};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "drmlab",
    version,
    about = "Evaluate, simulate, and verify usage-rights licenses",
    long_about = "Evaluate, simulate, and verify usage-rights licenses.\n\n\
        License documents are JSON objects; instance documents wrap licenses\n\
        with an exploration horizon. Scripts drive a simulated agent one\n\
        request or clock tick per line. Shared defaults (precedence table,\n\
        chooser, horizon, corpus bounds, state cap) may be configured through\n\
        a key=value file named by the DRMLAB_CONFIG environment variable;\n\
        command-line flags override configured values."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a license or instance document and echo its canonical form
    Parse {
        /// License document, or instance document (an object with a
        /// "licenses" key)
        file: PathBuf,
    },
    /// Decide whether an action on an asset is permitted at a time
    Eval {
        /// License document files, installed together
        #[arg(long, required = true, num_args = 1..)]
        licenses: Vec<PathBuf>,
        /// Action to query: play, display, print, or execute
        #[arg(long)]
        action: ActionKind,
        /// Asset the action applies to
        #[arg(long)]
        asset: String,
        /// Evaluation time
        #[arg(long, default_value_t = 0)]
        time: u64,
    },
    /// Pick the license that should serve a request, with its label
    Choose {
        /// License document files, installed together
        #[arg(long, required = true, num_args = 1..)]
        licenses: Vec<PathBuf>,
        /// Action to request
        #[arg(long)]
        action: ActionKind,
        /// Asset the action applies to
        #[arg(long)]
        asset: String,
        /// Choice policy: oma or labeled
        #[arg(long)]
        algo: Option<ChooserKind>,
        /// Constraint-kind precedence, e.g. until,interval,count,unconstrained
        #[arg(long)]
        precedence: Option<PrecedenceTable>,
    },
    /// Run a request/tick script against installed licenses
    Simulate {
        /// License document files, installed together
        #[arg(long, required = true, num_args = 1..)]
        licenses: Vec<PathBuf>,
        /// Script file: one `request <asset> <action>` or `tick` per line
        #[arg(long)]
        script: PathBuf,
        /// Choice policy: oma or labeled
        #[arg(long)]
        algo: Option<ChooserKind>,
        /// Constraint-kind precedence, e.g. until,interval,count,unconstrained
        #[arg(long)]
        precedence: Option<PrecedenceTable>,
    },
    /// Exhaustively check a property over every schedule up to a horizon
    Verify {
        /// License document files, installed together
        #[arg(long, required = true, num_args = 1..)]
        licenses: Vec<PathBuf>,
        /// Property to check: safety or liveness
        #[arg(long)]
        property: Property,
        /// Choice policy: oma or labeled
        #[arg(long)]
        algo: Option<ChooserKind>,
        /// Number of steps to explore
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        horizon: Option<u64>,
        /// Constraint-kind precedence, e.g. until,interval,count,unconstrained
        #[arg(long)]
        precedence: Option<PrecedenceTable>,
        /// Abort exploration beyond this many distinct states
        #[arg(long, value_parser = state_cap_arg)]
        state_cap: Option<usize>,
    },
    /// Check both choice policies over a corpus and tabulate the results
    Compare {
        /// Corpus bounds as key=value pairs, e.g. max_count=3,horizon=5
        #[arg(long, value_parser = bounds_arg, conflicts_with = "corpus")]
        bounds: Option<CorpusBounds>,
        /// Directory of instance documents (*.json), checked in filename order
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Output format: text or json
        #[arg(long, default_value = "text")]
        format: OutputFormat,
        /// Constraint-kind precedence, e.g. until,interval,count,unconstrained
        #[arg(long)]
        precedence: Option<PrecedenceTable>,
        /// Abort exploration beyond this many distinct states
        #[arg(long, value_parser = state_cap_arg)]
        state_cap: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Text,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?} (expected text or json)")),
        }
    }
}

fn bounds_arg(spec: &str) -> Result<CorpusBounds, String> {
    CorpusBounds::parse(spec).map_err(|e| e.to_string())
}

fn state_cap_arg(value: &str) -> Result<usize, String> {
    let cap: usize = value.parse().map_err(|e| format!("{e}"))?;
    if cap == 0 {
        return Err("state cap must be at least 1".to_string());
    }
    Ok(cap)
}

/// A failed run: the exit code plus the message for stderr.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    /// A file or parse error, exit code 1.
    fn file(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

/// Writes to stdout. A consumer that closes the pipe early ends the run
/// quietly with the conventional SIGPIPE exit code instead of a panic.
fn emit(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Err(Failure {
            code: 141,
            message: String::new(),
        }),
        Err(e) => Err(Failure::file(format!("stdout: {e}"))),
    }
}

/// Writes a line to stderr, ignoring a closed stream.
fn warn(message: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{message}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            if !failure.message.is_empty() {
                warn(&failure.message);
            }
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Parse { file } => cmd_parse(&file),
        Command::Eval {
            licenses,
            action,
            asset,
            time,
        } => cmd_eval(&licenses, action, &asset, time),
        Command::Choose {
            licenses,
            action,
            asset,
            algo,
            precedence,
        } => cmd_choose(&licenses, action, &asset, algo, precedence),
        Command::Simulate {
            licenses,
            script,
            algo,
            precedence,
        } => cmd_simulate(&licenses, &script, algo, precedence),
        Command::Verify {
            licenses,
            property,
            algo,
            horizon,
            precedence,
            state_cap,
        } => cmd_verify(&licenses, property, algo, horizon, precedence, state_cap),
        Command::Compare {
            bounds,
            corpus,
            format,
            precedence,
            state_cap,
        } => cmd_compare(bounds, corpus.as_deref(), format, precedence, state_cap),
    }
}

fn load_config() -> Result<config::Config, Failure> {
    config::load().map_err(Failure::file)
}

/// Reads a file, qualifying I/O errors with the path.
fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::file(format!("{}: {e}", path.display())))
}

/// Reads and parses one license document.
fn load_license(path: &Path) -> Result<License, Failure> {
    let text = read_file(path)?;
    format::parse_license(&text).map_err(|e| Failure::file(format!("{}: {e}", path.display())))
}

/// Reads one license per path, rejecting duplicate ids across files.
fn load_licenses(paths: &[PathBuf]) -> Result<Vec<License>, Failure> {
    let mut licenses = Vec::new();
    let mut seen = BTreeSet::new();
    for path in paths {
        let license = load_license(path)?;
        if !seen.insert(license.id.clone()) {
            return Err(Failure::file(format!(
                "{}: duplicate license id {}",
                path.display(),
                license.id
            )));
        }
        licenses.push(license);
    }
    Ok(licenses)
}

/// Installs every license into a fresh agent at time zero, returning the
/// state and the install events in file order.
fn setup_agent(licenses: &[License]) -> (AgentState, Vec<Event>) {
    let mut state = AgentState::new();
    let mut events = Vec::new();
    for license in licenses {
        let (next, event) = state
            .install(license.clone())
            .expect("license ids were checked for uniqueness");
        state = next;
        events.push(event);
    }
    (state, events)
}

fn cmd_parse(file: &Path) -> Result<u8, Failure> {
    let text = read_file(file)?;
    let qualify = |e: format::ParseError| Failure::file(format!("{}: {e}", file.display()));
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::file(format!("{}: syntax error: {e}", file.display())))?;
    let is_instance = value
        .as_object()
        .is_some_and(|object| object.contains_key("licenses"));
    let canonical = if is_instance {
        serialize_instance(&instance_from_value(&value).map_err(qualify)?)
    } else {
        format::serialize_license(&format::parse_license_value(&value, "").map_err(qualify)?)
    };
    emit(&format!("{canonical}\n"))?;
    Ok(0)
}

fn cmd_eval(paths: &[PathBuf], action: ActionKind, asset: &str, time: u64) -> Result<u8, Failure> {
    let licenses = load_licenses(paths)?;
    let mut residue = ConstraintState::default();
    for license in &licenses {
        residue.register(license);
    }
    let right = Right::new(asset, action);
    let permitted = eval::permitted(&right, &licenses, &residue, Tick::new(time))
        .expect("a fresh residue covers every registered license");
    emit(&format!("{permitted}\n"))?;
    Ok(if permitted { 0 } else { 3 })
}

fn cmd_choose(
    paths: &[PathBuf],
    action: ActionKind,
    asset: &str,
    algo: Option<ChooserKind>,
    precedence: Option<PrecedenceTable>,
) -> Result<u8, Failure> {
    let config = load_config()?;
    let table = precedence.unwrap_or(config.precedence);
    let algo = algo.unwrap_or(config.chooser);
    let licenses = load_licenses(paths)?;
    let (state, _) = setup_agent(&licenses);
    let right = Right::new(asset, action);
    let candidates = state.usable(&right);
    if candidates.is_empty() {
        return Err(Failure {
            code: 3,
            message: format!("no installed license can serve {right}"),
        });
    }
    let chosen = match algo {
        ChooserKind::Oma => choose_baseline(&candidates, &state, &table),
        ChooserKind::Labeled => choose_labeled(&candidates, &state, &table),
    }
    .expect("candidates are non-empty and installed");
    let label = compute_label(&state.licenses()[&chosen], state.constraints(), &table)
        .expect("constraint state covers installed licenses");
    let output = serde_json::json!({ "chosen": chosen, "label": label });
    emit(&format!("{output}\n"))?;
    Ok(0)
}

/// One line of a simulation script.
#[derive(Debug)]
enum Step {
    Request(Right),
    Tick,
}

/// Parses a script: one `request <asset> <action>` or `tick` per line,
/// with `#` comments and blank lines skipped.
fn parse_script(text: &str, origin: &str) -> Result<Vec<Step>, Failure> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("{origin}:{}", i + 1);
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["tick"] => steps.push(Step::Tick),
            ["request", asset, action] => {
                let action: ActionKind = action
                    .parse()
                    .map_err(|e: String| Failure::file(format!("{at}: {e}")))?;
                steps.push(Step::Request(Right::new(*asset, action)));
            }
            _ => {
                return Err(Failure::file(format!(
                    "{at}: expected `request <asset> <action>` or `tick`"
                )))
            }
        }
    }
    Ok(steps)
}

fn cmd_simulate(
    paths: &[PathBuf],
    script: &Path,
    algo: Option<ChooserKind>,
    precedence: Option<PrecedenceTable>,
) -> Result<u8, Failure> {
    let config = load_config()?;
    let table = precedence.unwrap_or(config.precedence);
    let algo = algo.unwrap_or(config.chooser);
    let licenses = load_licenses(paths)?;
    let steps = parse_script(&read_file(script)?, &script.display().to_string())?;
    let chooser = algo.build(table);
    let (mut state, mut events) = setup_agent(&licenses);
    let mut rejected = false;
    for step in steps {
        match step {
            Step::Tick => {
                let (next, event) = state.tick();
                state = next;
                events.push(event);
            }
            Step::Request(right) => match state.request(&right, chooser.as_ref()) {
                Ok((next, _, step_events)) => {
                    state = next;
                    events.extend(step_events);
                }
                Err(e @ (AgentError::UndefinedRight(_) | AgentError::NotPermitted(_))) => {
                    rejected = true;
                    events.push(Event::Rejected {
                        right,
                        reason: e.to_string(),
                    });
                }
                Err(other) => {
                    return Err(Failure::file(format!("simulation failed: {other}")))
                }
            },
        }
    }
    emit(&to_json_lines(&events))?;
    Ok(if rejected { 4 } else { 0 })
}

fn cmd_verify(
    paths: &[PathBuf],
    property: Property,
    algo: Option<ChooserKind>,
    horizon: Option<u64>,
    precedence: Option<PrecedenceTable>,
    state_cap: Option<usize>,
) -> Result<u8, Failure> {
    let config = load_config()?;
    let table = precedence.unwrap_or(config.precedence);
    let algo = algo.unwrap_or(config.chooser);
    let horizon = horizon.map_or(config.horizon, Tick::new);
    let state_cap = state_cap.unwrap_or(config.state_cap);
    let licenses = load_licenses(paths)?;
    let instance =
        Instance::new(licenses, horizon).map_err(|e| Failure::file(e.to_string()))?;
    if let Some(warning) = horizon_warning(&instance) {
        warn(&warning);
    }
    let chooser = algo.build(table);
    let verdict = match property {
        Property::Safety => check_safety(&instance, chooser.as_ref(), state_cap),
        Property::Liveness => check_liveness(&instance, chooser.as_ref(), state_cap),
    }
    .map_err(|e| Failure::file(e.to_string()))?;
    emit(&format!("{}\n", verdict_value(&verdict)))?;
    Ok(if verdict.holds { 0 } else { 5 })
}

/// Reads every `*.json` instance document in `dir`, in filename order.
fn load_corpus_dir(dir: &Path) -> Result<Vec<Instance>, Failure> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| Failure::file(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Failure::file(format!("{}: {e}", dir.display())))?;
        let path = entry.path();
        if path.extension().is_some_and(|ext| ext == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::file(format!(
            "{}: no .json instance documents found",
            dir.display()
        )));
    }
    let mut corpus = Vec::new();
    for path in &paths {
        let text = read_file(path)?;
        let instance = parse_instance(&text)
            .map_err(|e| Failure::file(format!("{}: {e}", path.display())))?;
        corpus.push(instance);
    }
    Ok(corpus)
}

fn cmd_compare(
    bounds: Option<CorpusBounds>,
    corpus_dir: Option<&Path>,
    format: OutputFormat,
    precedence: Option<PrecedenceTable>,
    state_cap: Option<usize>,
) -> Result<u8, Failure> {
    let config = load_config()?;
    let table = precedence.unwrap_or(config.precedence);
    let state_cap = state_cap.unwrap_or(config.state_cap);
    let corpus = match corpus_dir {
        Some(dir) => load_corpus_dir(dir)?,
        None => generate_corpus(&bounds.unwrap_or(config.bounds))
            .map_err(|e| Failure::file(e.to_string()))?,
    };
    let report = compare_choosers(&corpus, &table, state_cap);
    match format {
        OutputFormat::Text => emit(&render_text(&report))?,
        OutputFormat::Json => emit(&render_json(&report))?,
    }
    Ok(0)
}
