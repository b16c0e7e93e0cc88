use std::collections::BTreeMap;
use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use elevate_core::elaborate::{resugar, Elaborator};
use elevate_core::eval::{eval, Outcome};
use elevate_core::pipeline::{check_program, Checked, Diagnostic, Severity, MAIN};
use elevate_core::syntax::{parse, scheme_to_string, term_to_block, term_to_string, Decl, Program};

const EXIT_TYPE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_FUEL: u8 = 3;
const EXIT_INTERNAL: u8 = 101;

#[derive(Parser)]
#[command(
    name = "elevate",
    version,
    about = "Check, elaborate and run typed strategy programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check a file and report diagnostics.
    Check(Common),
    /// Print the inferred scheme of every top-level binding.
    Infer(Common),
    /// Print the program with patterns compiled to simple matches.
    Elaborate(Common),
    /// Check a file, then evaluate its trailing expression.
    Run {
        #[command(flatten)]
        common: Common,
        /// Maximum number of reduction steps.
        #[arg(long, default_value_t = 100_000)]
        fuel: u64,
    },
}

#[derive(clap::Args)]
struct Common {
    file: PathBuf,
    /// Emit one JSON object per line; diagnostics go to stderr.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColorMode {
    Auto,
    Always,
    Never,
}

#[derive(Serialize)]
struct SchemeLine<'a> {
    name: &'a str,
    scheme: String,
    kinds: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct DiagnosticLine<'a> {
    severity: &'static str,
    code: &'static str,
    file: &'a str,
    start: [u32; 2],
    end: [u32; 2],
    message: &'a str,
    notes: &'a [String],
}

#[derive(Serialize)]
struct ValueLine {
    value: String,
}

struct Reporter {
    file: String,
    json: bool,
    color: bool,
}

impl Reporter {
    fn new(file: &str, json: bool) -> Reporter {
        let mode = std::env::var("ELEVATE_COLOR")
            .ok()
            .and_then(|v| ColorMode::from_str(&v, true).ok())
            .unwrap_or(ColorMode::Auto);
        let color = match mode {
            ColorMode::Always => true,
            ColorMode::Never => false,
            ColorMode::Auto => !json && std::io::stderr().is_terminal(),
        };
        Reporter {
            file: file.to_string(),
            json,
            color,
        }
    }

    fn emit(&self, d: &Diagnostic) {
        if self.json {
            let line = DiagnosticLine {
                severity: match d.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                },
                code: d.code,
                file: &self.file,
                start: [d.span.start.line, d.span.start.col],
                end: [d.span.end.line, d.span.end.col],
                message: &d.message,
                notes: &d.notes,
            };
            eprintln!("{}", serde_json::to_string(&line).expect("serializable"));
            return;
        }
        let text = d.render(&self.file);
        if self.color {
            let c = match d.severity {
                Severity::Error => "31",
                Severity::Warning => "33",
            };
            let (code, rest) = text.split_at(d.code.len());
            eprintln!("\x1b[1;{c}m{code}\x1b[0m{rest}");
        } else {
            eprintln!("{text}");
        }
    }

    fn emit_all(&self, ds: &[Diagnostic]) {
        ds.iter().for_each(|d| self.emit(d));
    }
}

fn load(common: &Common, rep: &Reporter) -> Result<Program, ExitCode> {
    let src = std::fs::read_to_string(&common.file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", common.file.display());
        ExitCode::from(EXIT_TYPE)
    })?;
    parse(&src).map_err(|e| {
        rep.emit(&(&e).into());
        ExitCode::from(EXIT_PARSE)
    })
}

fn check(common: &Common) -> Result<(Checked, Reporter), ExitCode> {
    let rep = Reporter::new(&common.file.display().to_string(), common.json);
    let program = load(common, &rep)?;
    let checked = check_program(program);
    rep.emit_all(&checked.diagnostics);
    Ok((checked, rep))
}

fn status(c: &Checked) -> ExitCode {
    if c.has_errors() {
        ExitCode::from(EXIT_TYPE)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_infer(common: &Common) -> Result<ExitCode, ExitCode> {
    let (c, _) = check(common)?;
    for b in &c.bindings {
        let Some(s) = &b.scheme else { continue };
        if common.json {
            let line = SchemeLine {
                name: &b.name,
                scheme: scheme_to_string(s),
                kinds: b.kinds().into_iter().map(|(v, k)| (v, k.to_string())).collect(),
            };
            println!("{}", serde_json::to_string(&line).expect("serializable"));
        } else {
            println!("{} : {}", b.name, scheme_to_string(s));
        }
    }
    Ok(status(&c))
}

fn cmd_elaborate(common: &Common) -> Result<ExitCode, ExitCode> {
    let rep = Reporter::new(&common.file.display().to_string(), common.json);
    let program = load(common, &rep)?;
    let mut el = Elaborator::default();
    let mut failed = false;
    let lets = program.decls.iter().filter_map(|d| match d {
        Decl::Let { name, body, .. } => Some((name.as_str(), body)),
        Decl::Type { .. } => None,
    });
    for (name, body) in lets.chain(program.main.iter().map(|m| (MAIN, m))) {
        match el.term(body) {
            Ok(core) => {
                let text = term_to_block(&resugar(&core));
                if common.json {
                    let line = serde_json::json!({ "name": name, "core": term_to_string(&resugar(&core)) });
                    println!("{line}");
                } else if name == MAIN && program.main.is_some() {
                    println!("{text}\n");
                } else {
                    println!("let {name} =\n{}\n", indent(&text));
                }
            }
            Err(e) => {
                rep.emit(&(&e).into());
                failed = true;
            }
        }
    }
    Ok(if failed {
        ExitCode::from(EXIT_TYPE)
    } else {
        ExitCode::SUCCESS
    })
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("  {l}")).collect::<Vec<_>>().join("\n")
}

fn cmd_run(common: &Common, fuel: u64) -> Result<ExitCode, ExitCode> {
    let (c, _) = check(common)?;
    if c.has_errors() {
        eprintln!("refusing to run an ill-typed program");
        return Ok(ExitCode::from(EXIT_TYPE));
    }
    let Some(term) = c.runnable() else {
        eprintln!("nothing to run: the file has no trailing expression");
        return Ok(ExitCode::SUCCESS);
    };
    match eval(&term, fuel) {
        Outcome::Value(v) => {
            let text = term_to_string(&v);
            if common.json {
                println!(
                    "{}",
                    serde_json::to_string(&ValueLine { value: text }).expect("serializable")
                );
            } else {
                println!("{text}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Outcome::FuelExhausted(_) => {
            eprintln!("evaluation did not finish within {fuel} steps");
            Ok(ExitCode::from(EXIT_FUEL))
        }
        Outcome::Stuck { reason, span, .. } => {
            eprintln!("internal error: evaluation stuck at {span}: {reason}");
            Ok(ExitCode::from(EXIT_TYPE))
        }
    }
}

const STACK: usize = 256 << 20;

fn main() -> ExitCode {
    let cli = Cli::parse();
    // deep terms recurse deeply in the checker and the evaluator
    let worker = std::thread::Builder::new().stack_size(STACK).spawn(move || {
        let r = match &cli.cmd {
            Cmd::Check(c) => check(c).map(|(c, _)| status(&c)),
            Cmd::Infer(c) => cmd_infer(c),
            Cmd::Elaborate(c) => cmd_elaborate(c),
            Cmd::Run { common, fuel } => cmd_run(common, *fuel),
        };
        r.unwrap_or_else(|code| code)
    });
    match worker.map(|h| h.join()) {
        Ok(Ok(code)) => code,
        _ => ExitCode::from(EXIT_INTERNAL),
    }
}
