//! Command-line front end: closed-form structure prediction, brute-force
//! enumeration, cross-verification, orbit inspection, DOT export, and the
//! units-only cycle-count table.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 invalid parameters,
//! 3 enumeration budget exceeded.  Each run prints exactly one result; output
//! is assembled in full before anything is written, so failed runs emit
//! nothing on standard output.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use iprng_core::{
    build_graph, classify, predict_period_for, predict_structure_for, verify, Error, Modulus,
    Params, DEFAULT_BUDGET,
};

#[derive(Parser)]
#[command(name = "iprng", version, about = "Inversive generator over Z_{p^e}: predict, enumerate, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the parameters and predict the functional-graph structure
    Analyze {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Build the graph state by state and report its exact decomposition
    Enumerate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Largest state count the enumerator may touch
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Check every prediction against enumeration; exits 1 on any mismatch
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Pre-period and period of the orbit starting at x0
    Period {
        #[command(flatten)]
        params: ParamArgs,
        /// Seed state
        #[arg(long)]
        x0: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// First n states of the orbit starting at x0, one per line
    Seq {
        #[command(flatten)]
        params: ParamArgs,
        /// Seed state
        #[arg(long)]
        x0: u64,
        /// Number of states to print
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// DOT rendering of the functional graph
    Dot {
        #[command(flatten)]
        params: ParamArgs,
        /// Write to this path instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Units-only cycle counts by length for every exponent up to emax
    Table {
        /// Odd prime base of the modulus
        #[arg(long)]
        p: u64,
        /// Multiplier, reduced mod p^e row by row
        #[arg(long)]
        a: u64,
        /// Offset, reduced mod p^e row by row
        #[arg(long)]
        b: u64,
        /// Largest exponent to tabulate
        #[arg(long)]
        emax: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// Odd prime base of the modulus
    #[arg(long)]
    p: u64,
    /// Exponent: states live in Z_{p^e}
    #[arg(long)]
    e: u32,
    /// Multiplier
    #[arg(long)]
    a: u64,
    /// Offset
    #[arg(long)]
    b: u64,
}

impl ParamArgs {
    fn build(&self) -> Result<Params, Error> {
        Ok(Params::new(Modulus::new(self.p, self.e)?, self.a, self.b))
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Fully rendered output plus the process exit code.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Outcome {
        Outcome { text, code: 0 }
    }
}

enum CliError {
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for CliError {
    fn from(err: Error) -> CliError {
        CliError::Core(err)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(err) => err.fmt(f),
            CliError::Io(path, err) => write!(f, "cannot write {}: {err}", path.display()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome { text, code }) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                CliError::Core(Error::BudgetExceeded { .. }) => 3,
                _ => 2,
            })
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Analyze { params, format } => Ok(cmd_analyze(&params.build()?, format)?),
        Command::Enumerate { params, format, budget } => {
            Ok(cmd_enumerate(&params.build()?, format, budget)?)
        }
        Command::Verify { params, format, budget } => {
            Ok(cmd_verify(&params.build()?, format, budget)?)
        }
        Command::Period { params, x0, format } => Ok(cmd_period(&params.build()?, x0, format)?),
        Command::Seq { params, x0, n, format } => Ok(cmd_seq(&params.build()?, x0, n, format)?),
        Command::Dot { params, out, format, budget } => {
            cmd_dot(&params.build()?, out, format, budget)
        }
        Command::Table { p, a, b, emax, format, budget } => {
            Ok(cmd_table(p, a, b, emax, format, budget)?)
        }
    }
}

fn params_value(g: &Params) -> Value {
    json!({
        "p": g.modulus().p(),
        "e": g.modulus().e(),
        "a": g.a().value(),
        "b": g.b().value(),
    })
}

fn envelope(command: &str, params: Value, result: Value) -> String {
    let body = json!({
        "schema_version": "1",
        "command": command,
        "params": params,
        "result": result,
    });
    format!("{body:#}\n")
}

fn cmd_analyze(g: &Params, format: Format) -> Result<Outcome, Error> {
    let cs = classify(g);
    let predicted = predict_structure_for(g, &cs);
    let text = match format {
        Format::Text => {
            format!("case: {}\nstructure: {predicted}\n", cs.label)
        }
        Format::Json => envelope(
            "analyze",
            params_value(g),
            json!({
                "case": cs.label,
                "structure": predicted,
            }),
        ),
    };
    Ok(Outcome::ok(text))
}

fn cmd_enumerate(g: &Params, format: Format, budget: u64) -> Result<Outcome, Error> {
    let graph = build_graph(g, budget)?;
    let exact = graph.decompose();
    let structure = exact.to_graph_structure();
    let text = match format {
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "states: {}", exact.q()).unwrap();
            writeln!(out, "components: {}", exact.components().len()).unwrap();
            match &structure {
                Some(s) => writeln!(out, "structure: {s}").unwrap(),
                None => writeln!(out, "structure: contains an irregular component").unwrap(),
            }
            out
        }
        Format::Json => envelope(
            "enumerate",
            params_value(g),
            json!({
                "states": exact.q(),
                "components": exact.components().len(),
                "structure": structure,
                "cycle_histogram": exact.cycle_histogram(false),
                "cycle_histogram_units": exact.cycle_histogram(true),
            }),
        ),
    };
    Ok(Outcome::ok(text))
}

fn cmd_verify(g: &Params, format: Format, budget: u64) -> Result<Outcome, Error> {
    let report = verify(g, budget)?;
    let ok = report.is_ok();
    let text = match format {
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "case: {}", report.label).unwrap();
            writeln!(out, "predicted: {}", report.predicted).unwrap();
            match &report.enumerated {
                Some(s) => writeln!(out, "enumerated: {s}").unwrap(),
                None => writeln!(out, "enumerated: contains an irregular component").unwrap(),
            }
            writeln!(
                out,
                "periods: {} states checked, {} mismatches",
                report.period_states_checked,
                report.period_mismatches.len()
            )
            .unwrap();
            for mismatch in report.period_mismatches.iter().take(5) {
                writeln!(
                    out,
                    "mismatch: x0={} predicted pre={} T={}, measured pre={} T={}",
                    mismatch.x0,
                    mismatch.predicted.pre_period,
                    mismatch.predicted.period,
                    mismatch.measured.pre_period,
                    mismatch.measured.period
                )
                .unwrap();
            }
            for note in &report.notes {
                writeln!(out, "note: {note}").unwrap();
            }
            writeln!(out, "result: {}", if ok { "PASS" } else { "FAIL" }).unwrap();
            out
        }
        Format::Json => envelope(
            "verify",
            params_value(g),
            serde_json::to_value(&report).expect("report serializes"),
        ),
    };
    Ok(Outcome { text, code: u8::from(!ok) })
}

fn cmd_period(g: &Params, x0: u64, format: Format) -> Result<Outcome, Error> {
    let x0 = g.modulus().elem(x0);
    let cs = classify(g);
    let (info, source) = match predict_period_for(g, &cs, x0) {
        Some(info) => (info, "predicted"),
        None => (g.measure_period(x0), "measured"),
    };
    let text = match format {
        Format::Text => format!(
            "pre={} T={}\nsource: {source}\n",
            info.pre_period, info.period
        ),
        Format::Json => envelope(
            "period",
            params_value(g),
            json!({
                "x0": x0.value(),
                "pre_period": info.pre_period,
                "period": info.period,
                "source": source,
            }),
        ),
    };
    Ok(Outcome::ok(text))
}

fn cmd_seq(g: &Params, x0: u64, n: u64, format: Format) -> Result<Outcome, Error> {
    let x0 = g.modulus().elem(x0);
    let values: Vec<u64> = g.orbit_iter(x0).take(n as usize).map(|x| x.value()).collect();
    let text = match format {
        Format::Text => {
            let mut out = String::new();
            for v in &values {
                writeln!(out, "{v}").unwrap();
            }
            out
        }
        Format::Json => envelope(
            "seq",
            params_value(g),
            json!({
                "x0": x0.value(),
                "n": n,
                "values": values,
            }),
        ),
    };
    Ok(Outcome::ok(text))
}

fn cmd_dot(
    g: &Params,
    out_path: Option<PathBuf>,
    format: Format,
    budget: u64,
) -> Result<Outcome, CliError> {
    let graph = build_graph(g, budget).map_err(CliError::Core)?;
    let dot = graph.export_dot().map_err(CliError::Core)?;
    if let Some(path) = &out_path {
        fs::write(path, &dot).map_err(|err| CliError::Io(path.clone(), err))?;
    }
    let text = match (&out_path, format) {
        (Some(path), Format::Text) => {
            format!("wrote {} states to {}\n", graph.q(), path.display())
        }
        (Some(path), Format::Json) => envelope(
            "dot",
            params_value(g),
            json!({ "path": path.display().to_string(), "states": graph.q() }),
        ),
        (None, Format::Text) => dot,
        (None, Format::Json) => envelope(
            "dot",
            params_value(g),
            json!({ "dot": dot, "states": graph.q() }),
        ),
    };
    Ok(Outcome::ok(text))
}

fn cmd_table(
    p: u64,
    a: u64,
    b: u64,
    emax: u32,
    format: Format,
    budget: u64,
) -> Result<Outcome, Error> {
    let top = Modulus::new(p, emax)?;
    let mut rows = Vec::new();
    for e in 1..=emax {
        let g = Params::new(top.with_exponent(e), a, b);
        let exact = build_graph(&g, budget)?.decompose();
        rows.push((e, exact.cycle_histogram(true), exact.cycle_histogram(false)));
    }
    let text = match format {
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "cycle counts through units for a={a} b={b} mod {p}^e").unwrap();
            for (e, units, _) in &rows {
                write!(out, "e={e}:").unwrap();
                for (len, count) in units {
                    write!(out, " {len}×{count}").unwrap();
                }
                writeln!(out).unwrap();
            }
            for (e, units, full) in &rows {
                for (len, full_count) in full {
                    let counted = units.get(len).copied().unwrap_or(0);
                    if *full_count > counted {
                        writeln!(
                            out,
                            "note: e={e}: {full_count} cycles of length {len} in the full graph, \
                             {counted} counted; {} through non-unit states excluded by the \
                             units-only convention",
                            full_count - counted
                        )
                        .unwrap();
                    }
                }
            }
            out
        }
        Format::Json => {
            let row_values: Vec<Value> = rows
                .iter()
                .map(|(e, units, full)| {
                    json!({
                        "e": e,
                        "q": top.with_exponent(*e).q(),
                        "units_only": units,
                        "full": full,
                    })
                })
                .collect();
            envelope(
                "table",
                json!({ "p": p, "e": emax, "a": a, "b": b }),
                json!({ "rows": row_values }),
            )
        }
    };
    Ok(Outcome::ok(text))
}
