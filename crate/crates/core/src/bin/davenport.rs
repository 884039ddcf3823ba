use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use davenport_phi::modp::Prime;
use davenport_phi::phi::QuadPhi;
use davenport_phi::report::{
    bounds_record, exact_record, run_table, run_verify, ExactFlags, OutputRecord, TableId,
    TableOptions, VerifyOptions,
};
use davenport_phi::search::DEFAULT_MAX_P;
use davenport_phi::Error;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Davenport constants D(φ, p) for φ = a·s₁² + b·s₂ + c·s₁ over F_p.
#[derive(Parser)]
#[command(name = "davenport", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact D(φ, p), from a closed form or by search.
    Exact {
        #[command(flatten)]
        coeffs: Coeffs,
        /// Count and list every extremal sequence (the default).
        #[arg(long, overrides_with = "no_enumerate")]
        enumerate: bool,
        /// Stop once D is known; skip the extremal count.
        #[arg(long)]
        no_enumerate: bool,
        /// Worker threads; 0 or 1 searches sequentially.
        #[arg(long, default_value_t = 0)]
        parallel: usize,
        #[arg(long)]
        budget_nodes: Option<u64>,
        #[arg(long)]
        budget_seconds: Option<f64>,
        /// Largest prime the search accepts.
        #[arg(long)]
        max_p: Option<u32>,
        /// Extremal sequences to print.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Recompute a reference table and diff it against the stored values.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long, default_value_t = 19)]
        max_p: u32,
        /// Include p = 23, 29, 31 in table 3.
        #[arg(long)]
        extended: bool,
        #[arg(long, default_value_t = 0)]
        parallel: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Proved bounds and closed forms only; no search.
    Bounds {
        #[command(flatten)]
        coeffs: Coeffs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Cross-check closed forms, bounds and witnesses against the search.
    Verify {
        #[arg(long, default_value_t = 13)]
        max_p: u32,
        /// Coefficient triples per class and prime.
        #[arg(long, default_value_t = 20)]
        per_class: usize,
    },
}

#[derive(Args)]
struct Coeffs {
    #[arg(long)]
    p: u32,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, allow_hyphen_values = true)]
    c: i64,
}

impl Coeffs {
    fn phi(&self, cap: u32) -> davenport_phi::Result<QuadPhi> {
        let p = Prime::with_cap(self.p, cap)?;
        QuadPhi::new(p, self.a, self.b, self.c)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

fn env_max_p() -> Option<u32> {
    std::env::var("DAVENPORT_MAX_P").ok()?.trim().parse().ok()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Domain(_) | Error::Parse(_) | Error::Resource(_) => EXIT_USAGE,
                Error::BudgetExhausted(_) => EXIT_BUDGET,
                Error::Internal(_) => EXIT_MISMATCH,
            })
        }
    }
}

fn run(cli: Cli) -> davenport_phi::Result<u8> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Exact {
            coeffs,
            enumerate: _,
            no_enumerate,
            parallel,
            budget_nodes,
            budget_seconds,
            max_p,
            samples,
            format,
        } => {
            let max_p = max_p.or_else(env_max_p).unwrap_or(DEFAULT_MAX_P);
            if coeffs.p > DEFAULT_MAX_P && coeffs.p <= max_p {
                eprintln!(
                    "warning: p = {} is above {DEFAULT_MAX_P}; exhaustive search may take hours",
                    coeffs.p
                );
            }
            let phi = coeffs.phi(max_p.max(davenport_phi::modp::UTILITY_MAX_P))?;
            let flags = ExactFlags {
                enumerate: !no_enumerate,
                parallel,
                budget_nodes,
                budget_seconds,
                max_p,
                samples,
            };
            let rec = exact_record(&phi, &flags)?;
            emit(&mut out, format, std::slice::from_ref(&rec))?;
            Ok(if rec.certified { 0 } else { EXIT_BUDGET })
        }
        Command::Bounds { coeffs, format } => {
            let cap = env_max_p().unwrap_or(0).max(davenport_phi::modp::UTILITY_MAX_P);
            let rec = bounds_record(&coeffs.phi(cap)?)?;
            emit(&mut out, format, &[rec])?;
            Ok(0)
        }
        Command::Table {
            which,
            max_p,
            extended,
            parallel,
            format,
        } => {
            let id = TableId::from_number(which).expect("range checked by clap");
            let rows = run_table(
                id,
                &TableOptions {
                    max_p: if extended { max_p.max(DEFAULT_MAX_P) } else { max_p },
                    extended,
                    parallel,
                },
            )?;
            let records: Vec<OutputRecord> = rows.iter().map(|r| r.record.clone()).collect();
            emit(&mut out, format, &records)?;
            let mismatches: Vec<&String> = rows.iter().flat_map(|r| &r.mismatches).collect();
            if mismatches.is_empty() {
                eprintln!("table {which}: all {} rows match", rows.len());
                Ok(0)
            } else {
                for m in &mismatches {
                    eprintln!("mismatch: {m}");
                }
                Ok(EXIT_MISMATCH)
            }
        }
        Command::Verify { max_p, per_class } => {
            let summary = run_verify(&VerifyOptions {
                max_p,
                per_class,
                ..VerifyOptions::default()
            })?;
            if summary.passed() {
                writeln!(out, "verify: {} checks passed (p <= {max_p})", summary.checks).map_err(io_err)?;
                Ok(0)
            } else {
                writeln!(
                    out,
                    "verify: {} of {} checks failed; first: {}",
                    summary.failures.len(),
                    summary.checks,
                    summary.failures[0]
                )
                .map_err(io_err)?;
                Ok(EXIT_MISMATCH)
            }
        }
    }
}

fn io_err(e: io::Error) -> Error {
    Error::Internal(format!("write failed: {e}"))
}

fn emit(out: &mut impl Write, format: Format, records: &[OutputRecord]) -> davenport_phi::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                let line = serde_json::to_string(r).map_err(|e| Error::Internal(e.to_string()))?;
                writeln!(out, "{line}").map_err(io_err)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                w.write_record(first.flat().iter().map(|(k, _)| *k))
                    .map_err(|e| Error::Internal(e.to_string()))?;
            }
            for r in records {
                w.write_record(r.flat().iter().map(|(_, v)| v.as_str()))
                    .map_err(|e| Error::Internal(e.to_string()))?;
            }
            w.flush().map_err(io_err)?;
        }
        Format::Table => {
            for (i, r) in records.iter().enumerate() {
                if i > 0 {
                    writeln!(out).map_err(io_err)?;
                }
                let flat = r.flat();
                let width = flat.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in flat {
                    writeln!(out, "{k:<width$}  {v}").map_err(io_err)?;
                }
            }
        }
    }
    Ok(())
}
