//! `magpi check | verify | simulate`.
//!
//! Exit status: 0 everything holds, 1 a violation or typing failure,
//! 2 inconclusive within the limits, 3 usage, input or parse errors.

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magpi_core::CongruenceMode;
use magpi_lts::{export_dot, export_json, ExploreLimits, Model};
use magpi_parser::ProtocolFile;
use magpi_sim::{FailureScenario, ReductionPolicy, Simulator};
use magpi_typecheck::{typecheck_program, CheckOptions, TypingReport};
use magpi_verify::{verify_suite, Property, SuiteOptions};

const OK: u8 = 0;
const VIOLATED: u8 = 1;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "magpi", version, about = "Typecheck, verify and simulate MAGπ protocols")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck a protocol file.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide properties of the system's typing context.
    Verify(VerifyArgs),
    /// Run the system under a failure scenario.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Total,
    Tcp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Reliable,
    Unrestricted,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Comma-separated: safety, deadlock, terminating, live, never, comm-rf,
    /// tcp, bounded, bound_K.
    #[arg(long, value_delimiter = ',')]
    props: Vec<String>,
    /// Also decide `bound_K`.
    #[arg(long)]
    bound: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    max_states: usize,
    #[arg(long, value_enum, default_value = "total")]
    mode: Mode,
    #[arg(long)]
    json: bool,
    /// Write the explored transition system as Graphviz.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the explored transition system as JSON.
    #[arg(long)]
    lts: Option<PathBuf>,
    /// Report wall-clock time; output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
    /// Skip the typing gate. For negative tests only.
    #[arg(long)]
    unsafe_skip_typecheck: bool,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Failure scenario JSON; failure-free when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, value_enum, default_value = "reliable")]
    policy: Policy,
    /// Write the JSON-lines trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print the JSON-lines trace instead of the text summary.
    #[arg(long)]
    json: bool,
    /// Skip the typing gate. For negative tests only.
    #[arg(long)]
    unsafe_skip_typecheck: bool,
}

struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Style {
        let off = std::env::var("MAGPI_COLOR").is_ok_and(|v| v == "0");
        Style {
            color: !off && std::io::stdout().is_terminal(),
        }
    }

    fn paint(&self, s: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn verdict(&self, line: &str) -> String {
        let code = if line.contains("violated") || line.contains("rejected") {
            "31"
        } else if line.contains("inconclusive") {
            "33"
        } else {
            "32"
        };
        self.paint(line, code)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let style = Style::detect();
    let code = match cli.cmd {
        Command::Check { file, json } => check(&file, json, &style),
        Command::Verify(a) => verify(&a, &style),
        Command::Simulate(a) => simulate(&a, &style),
    };
    ExitCode::from(code.unwrap_or_else(|msg| {
        eprintln!("magpi: {msg}");
        USAGE
    }))
}

/// With `json`, parse diagnostics also go to stdout as `{"diagnostics": [..]}`.
fn load(path: &Path, json: bool) -> Result<ProtocolFile, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    magpi_parser::parse(&src).map_err(|ds| {
        if json {
            println!("{}", serde_json::json!({ "diagnostics": ds }));
        }
        ds.iter()
            .map(|d| format!("{}:{d}", path.display()))
            .collect::<Vec<_>>()
            .join("\n")
    })
}

fn typecheck(f: &ProtocolFile) -> TypingReport {
    typecheck_program(&f.type_defs, &f.reliability, &f.proc_defs, &f.system, CheckOptions::default())
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Prints the report when it rejects; `true` when the gate passes.
fn gate(f: &ProtocolFile, skip: bool, style: &Style) -> bool {
    if skip {
        return true;
    }
    let r = typecheck(f);
    if !r.accepted() {
        eprint!("{}", style.verdict(&r.to_string()));
    }
    r.accepted()
}

fn check(file: &Path, json: bool, style: &Style) -> Result<u8, String> {
    let f = load(file, json)?;
    let r = typecheck(&f);
    if json {
        println!("{}", r.to_json());
    } else {
        print!("{}", style.verdict(&r.to_string()));
    }
    Ok(if r.accepted() { OK } else { VIOLATED })
}

fn verify(a: &VerifyArgs, style: &Style) -> Result<u8, String> {
    if a.max_states == 0 {
        return Err("--max-states must be at least 1".into());
    }
    let mut props = a
        .props
        .iter()
        .map(|p| p.trim().parse::<Property>())
        .collect::<Result<Vec<_>, _>>()?;
    if props.is_empty() {
        props = Property::DEFAULT.to_vec();
    }
    match a.bound {
        Some(0) => return Err("--bound must be at least 1".into()),
        Some(k) if !props.contains(&Property::Bound(k)) => props.push(Property::Bound(k)),
        _ => {}
    }
    let f = load(&a.file, a.json)?;
    if !gate(&f, a.unsafe_skip_typecheck, style) {
        return Ok(VIOLATED);
    }
    let model = Model::from_system(&f.type_defs, &f.system, f.reliability.clone()).map_err(|e| e.to_string())?;
    let limits = ExploreLimits {
        max_states: a.max_states,
        mode: match a.mode {
            Mode::Total => CongruenceMode::TotalReorder,
            Mode::Tcp => CongruenceMode::TcpFifo,
        },
        ..ExploreLimits::default()
    };
    let r = verify_suite(&model, &props, &SuiteOptions { limits, timing: a.timing });
    if a.dot.is_some() || a.lts.is_some() {
        let e = model.explore(&limits);
        if let Some(p) = &a.dot {
            write(p, &export_dot(&model, &e.lts))?;
        }
        if let Some(p) = &a.lts {
            write(p, &export_json(&model, &e.lts))?;
        }
    }
    if a.json {
        println!("{}", r.to_json(&model));
    } else {
        for line in r.to_text(&model).lines() {
            println!("{}", style.verdict(line));
        }
    }
    Ok(r.worst())
}

fn simulate(a: &SimulateArgs, style: &Style) -> Result<u8, String> {
    let f = load(&a.file, a.json)?;
    let scenario = match &a.scenario {
        Some(p) => {
            let src = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            FailureScenario::from_json(&src).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => FailureScenario::failure_free(),
    };
    scenario.validate(&f.roles).map_err(|e| e.to_string())?;
    if !gate(&f, a.unsafe_skip_typecheck, style) {
        return Ok(VIOLATED);
    }
    let policy = match a.policy {
        Policy::Reliable => ReductionPolicy::Reliable,
        Policy::Unrestricted => ReductionPolicy::Unrestricted,
    };
    let mut sim = Simulator::new(&f.type_defs, &f.proc_defs, f.reliability.clone(), policy, scenario)
        .map_err(|e| e.to_string())?;
    let c0 = sim.initial(&f.system).map_err(|e| e.to_string())?;
    let t = sim.run(&c0, a.seed, a.steps);
    let jsonl = t.to_jsonl();
    if let Some(p) = &a.trace {
        write(p, &jsonl)?;
    }
    if a.json {
        print!("{jsonl}");
    } else {
        for e in &t.events {
            println!("{:>4} {:<5} {}", e.step, e.rule.label(), e.detail);
        }
        println!("terminal: {}", t.terminal);
        let state = if t.stuck {
            "stuck"
        } else if t.inaction {
            "inaction"
        } else if t.quiescent {
            "quiescent"
        } else {
            "step limit reached"
        };
        println!("{}", style.verdict(&format!("{} steps, {state}", t.events.len())));
        if t.monitors.is_empty() {
            println!("{}", style.verdict("monitors: no violations"));
        }
        for v in &t.monitors {
            println!("{}", style.verdict(&format!("monitor violated: {:?} at {} (step {})", v.kind, v.endpoint, v.step)));
        }
    }
    Ok(if t.monitors.is_empty() && !t.stuck { OK } else { VIOLATED })
}
