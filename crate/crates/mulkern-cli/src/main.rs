use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mulkern::ode::Family;
use mulkern_cli::config::parse_params;
use mulkern_cli::{run_and_write, CliError, Command, RunConfig};

/// Builds kernels from differential operators and checks their identities.
#[derive(Debug, Parser)]
#[command(name = "mulkern", version)]
struct Args {
    /// expand, sctable, gensctable, kernel, assoc, genassoc, productcheck,
    /// oracle, birat, verlinde or all
    command: Option<String>,
    /// Oracle id, birational fixture or file, verlinde level or `fibers`
    target: Option<String>,
    /// JSON config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated `name=p/q` pairs; repeatable
    #[arg(long, alias = "param")]
    params: Vec<String>,
    /// Operator term `k=polynomial` for the custom family; repeatable
    #[arg(long)]
    term: Vec<String>,
    #[arg(long)]
    g: Option<usize>,
    /// Truncation degree
    #[arg(long = "N", alias = "n")]
    n: Option<usize>,
    /// y-window
    #[arg(long = "M", alias = "m")]
    m: Option<u32>,
    /// y-degree bound for the multi-point solve
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Working precision in bits
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    assoc: bool,
    /// Record elapsed milliseconds per check
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
}

fn build(a: Args) -> Result<RunConfig, CliError> {
    let mut cfg = match (&a.config, &a.command) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Some(c)) => RunConfig::new(c.parse()?),
        (None, None) => return Err(CliError::Config("missing command".into())),
    };
    if let (Some(_), Some(c)) = (&a.config, &a.command) {
        cfg.command = c.parse::<Command>()?;
    }
    if a.target.is_some() {
        cfg.target = a.target;
    }
    if let Some(f) = a.family {
        cfg.family = Some(f.parse::<Family>().map_err(|e| CliError::Config(e.to_string()))?);
    }
    for p in &a.params {
        for (k, v) in parse_params(p)? {
            cfg.params.insert(k, v);
        }
    }
    for t in &a.term {
        let (k, v) = t.split_once('=').ok_or_else(|| CliError::Config(format!("expected k=polynomial, got {t:?}")))?;
        let k: usize = k.trim().parse().map_err(|_| CliError::Config(format!("bad derivative order {k:?}")))?;
        cfg.terms.insert(k, v.trim().to_string());
    }
    cfg.g = a.g.or(cfg.g);
    cfg.n = a.n.or(cfg.n);
    cfg.m = a.m.or(cfg.m);
    cfg.degree = a.degree.or(cfg.degree);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.samples = a.samples.or(cfg.samples);
    cfg.precision = a.precision.unwrap_or(cfg.precision);
    cfg.max_n = a.max_n.or(cfg.max_n);
    cfg.assoc |= a.assoc;
    cfg.timings |= a.timings;
    cfg.cache = a.cache.or(cfg.cache);
    cfg.report = a.report.or(cfg.report);
    Ok(cfg)
}

fn main() -> ExitCode {
    let result = build(Args::parse()).and_then(|cfg| run_and_write(&cfg).map(|r| (cfg, r)));
    match result {
        Ok((cfg, (rep, text))) => {
            if cfg.report.is_none() {
                print!("{text}");
            }
            for c in &rep.checks {
                eprintln!("{:<8} {}", format!("{:?}", c.status).to_lowercase(), c.check);
            }
            ExitCode::from(if rep.passed() { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
