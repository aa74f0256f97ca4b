//! `weakram-verify`: runs the verification suite for one `(p, d)` and
//! prints a report.
//!
//! Exit codes: 0 all checks pass, 1 some check fails, 2 only ambiguous
//! results besides passes, 3 resource ceiling exceeded, 4 invalid usage.

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use weakram_core::verify::{emit_report, run_suite, EpsSelect, Format, Group, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "weakram-verify", version, about = "Verify self-dual normal bases, resolvents and Gauss sums for weakly ramified degree-p extensions")]
struct Args {
    /// Odd prime p.
    #[arg(long)]
    p: u32,
    /// Degree d of the unramified base field K over Q_p.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// "all", or a 1-based index into the eps classes.
    #[arg(long, default_value = "all")]
    eps: String,
    /// Target precision N in base-p digits.
    #[arg(long, default_value_t = 8)]
    precision: i64,
    /// Comma-separated check groups: dwork, extension, selfdual, resolvent,
    /// norm, cft, gauss, product. Default: all.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Request the explicit Galois-closure computation (reported as skipped).
    #[arg(long)]
    stretch: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Omit timings so that output is byte-identical across runs.
    #[arg(long)]
    golden: bool,
    /// Largest residue field size p^d to attempt.
    #[arg(long, default_value_t = 125)]
    ceiling: u64,
}

fn config(args: &Args) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::new(args.p, args.d);
    cfg.eps = match args.eps.as_str() {
        "all" => EpsSelect::All,
        s => EpsSelect::Index(s.parse().map_err(|_| format!("invalid --eps '{s}'"))?),
    };
    cfg.precision = args.precision;
    cfg.seed = args.seed;
    cfg.stretch = args.stretch;
    cfg.ceiling = args.ceiling;
    if !args.checks.is_empty() {
        cfg.checks = args
            .checks
            .iter()
            .map(|s| s.trim().parse::<Group>().map_err(|e| e.to_string()))
            .collect::<Result<BTreeSet<_>, _>>()?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    };
    let result = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    };
    let format = match args.format {
        OutFormat::Text => Format::Text,
        OutFormat::Json => Format::Json,
    };
    let text = emit_report(Some(&cfg), &result.reports, format, args.golden);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(4);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(result.exit_code as u8)
}
