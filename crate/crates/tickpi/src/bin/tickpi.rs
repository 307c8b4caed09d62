//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on a parse error,
//! 3 when an execution budget runs out. JSON output (with `--json`) goes to
//! stdout; human-readable reports go to stderr.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use tickpi::index::EntailConfig;
use tickpi::parse::{parse_expr, parse_process, parse_program};
use tickpi::program::{build_runtime, check_program, Mode};
use tickpi::sem::{run, CostMode, Policy};
use tickpi::syntax::{canonical_process, Process};

#[derive(Parser)]
#[command(
    name = "tickpi",
    about = "Execute and verify cost bounds of tick-instrumented pi-calculus programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check a program and verify its declared cost bounds.
    Check {
        file: PathBuf,
        /// Which system to check under: span, work, or io.
        #[arg(long, default_value = "span")]
        mode: Mode,
        /// Per-variable bound for the counterexample search.
        #[arg(long, default_value_t = 16)]
        b_refute: u64,
        #[arg(long)]
        json: bool,
    },
    /// Execute a program and report its measured cost.
    Run {
        file: PathBuf,
        /// Cost model to run under: span or work.
        #[arg(long, default_value = "span")]
        mode: Mode,
        /// Scheduling policy: deterministic, random:SEED, or exhaustive:N.
        #[arg(long, default_value = "deterministic")]
        policy: Policy,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
        /// Values for base-typed main parameters, as NAME=VALUE.
        #[arg(long)]
        bind: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Print the canonical form of a process or program.
    Canon {
        file: PathBuf,
        #[arg(long)]
        bind: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Print the process with every tick erased.
    Erase {
        file: PathBuf,
        #[arg(long)]
        bind: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE_ERROR: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn read(file: &PathBuf) -> Result<String, u8> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", file.display());
        EXIT_PARSE_ERROR
    })
}

fn parse_binds(binds: &[String]) -> Result<BTreeMap<String, tickpi::syntax::Expr>, u8> {
    let mut out = BTreeMap::new();
    for b in binds {
        let Some((name, value)) = b.split_once('=') else {
            eprintln!("error: --bind expects NAME=VALUE, got `{b}`");
            return Err(EXIT_PARSE_ERROR);
        };
        let v = parse_expr(value).map_err(|e| {
            eprintln!("error: --bind {name}: {e}");
            EXIT_PARSE_ERROR
        })?;
        out.insert(name.to_string(), v);
    }
    Ok(out)
}

/// A file is either a bare process or a full program; programs are folded
/// into their runtime process (which needs `--bind` for base parameters).
fn load_process(file: &PathBuf, binds: &[String]) -> Result<Process, u8> {
    let src = read(file)?;
    if let Ok(p) = parse_process(&src) {
        return Ok(p);
    }
    let prog = parse_program(&src).map_err(|e| {
        eprintln!("error: {}: {e}", file.display());
        EXIT_PARSE_ERROR
    })?;
    let binds = parse_binds(binds)?;
    build_runtime(&prog, &binds).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE_ERROR
    })
}

#[derive(Serialize)]
struct CheckLine {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CheckOut {
    mode: String,
    ok: bool,
    items: Vec<CheckLine>,
}

fn cmd_check(file: PathBuf, mode: Mode, b_refute: u64, json: bool) -> u8 {
    let src = match read(&file) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let prog = match parse_program(&src) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return EXIT_PARSE_ERROR;
        }
    };
    let cfg = EntailConfig {
        b_refute,
        ..EntailConfig::default()
    };
    let items = check_program(&prog, mode, cfg);
    let lines: Vec<CheckLine> = items
        .iter()
        .map(|i| CheckLine {
            name: i.name.clone(),
            ok: i.ok(),
            detail: match &i.result {
                Ok(d) => d.clone(),
                Err(e) => e.message.clone(),
            },
        })
        .collect();
    let ok = lines.iter().all(|l| l.ok);
    if json {
        let out = CheckOut {
            mode: format!("{mode:?}").to_lowercase(),
            ok,
            items: lines,
        };
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        for l in &lines {
            let tag = if l.ok { "ok" } else { "FAIL" };
            eprintln!("{tag:4} {}: {}", l.name, l.detail);
        }
    }
    if ok {
        0
    } else {
        EXIT_CHECK_FAILED
    }
}

fn cmd_run(
    file: PathBuf,
    mode: Mode,
    policy: Policy,
    max_steps: u64,
    bind: Vec<String>,
    json: bool,
) -> u8 {
    let cost = match mode {
        Mode::Span => CostMode::Span,
        Mode::Work => CostMode::Work,
        Mode::Io => {
            eprintln!("error: `run` needs --mode span or --mode work");
            return EXIT_PARSE_ERROR;
        }
    };
    let p = match load_process(&file, &bind) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let report = match run(&p, cost, policy, max_steps) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        if let Some(s) = report.span {
            eprintln!("span: {s}");
        }
        if let Some(w) = report.work {
            eprintln!("work: {w}");
        }
        if let (Some(lo), Some(hi)) = (report.min_span, report.max_span) {
            eprintln!("span across all schedules: {lo}..{hi}");
        }
        if let Some(w) = report.max_work {
            eprintln!("max work across all schedules: {w}");
        }
        if let Some(n) = report.schedules_explored {
            eprintln!("states explored: {n}");
        }
        eprintln!("zero-cost steps: {}", report.zero_cost_steps);
        eprintln!("final: {}", report.final_process);
        if !report.terminated {
            eprintln!("stopped: step budget exhausted");
        }
    }
    if report.terminated {
        0
    } else {
        EXIT_BUDGET
    }
}

#[derive(Serialize)]
struct ProcessOut {
    process: String,
}

fn cmd_print(file: PathBuf, bind: Vec<String>, json: bool, erase: bool) -> u8 {
    let p = match load_process(&file, &bind) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let out = if erase {
        p.erase_ticks()
    } else {
        canonical_process(&p)
    };
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&ProcessOut {
                process: out.to_string()
            })
            .unwrap()
        );
    } else {
        println!("{out}");
    }
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Check {
            file,
            mode,
            b_refute,
            json,
        } => cmd_check(file, mode, b_refute, json),
        Cmd::Run {
            file,
            mode,
            policy,
            max_steps,
            bind,
            json,
        } => cmd_run(file, mode, policy, max_steps, bind, json),
        Cmd::Canon { file, bind, json } => cmd_print(file, bind, json, false),
        Cmd::Erase { file, bind, json } => cmd_print(file, bind, json, true),
    };
    ExitCode::from(code)
}
