//! Configuration, commands, reports and the table cache for the `mulkern`
//! binary.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod ops;
pub mod report;
pub mod suite;

pub use config::{Command, RunConfig};
pub use error::{CliError, Result};
pub use report::{Report, Status};

/// Executes one command and assembles its report.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let mut rec = report::Recorder::new(cfg.timings);
    match cfg.command {
        Command::Expand => commands::expand(cfg, &mut rec)?,
        Command::Sctable => commands::sctable(cfg, &mut rec)?,
        Command::Gensctable => commands::gensctable(cfg, &mut rec)?,
        Command::Kernel => commands::kernel(cfg, &mut rec)?,
        Command::Assoc => commands::assoc_cmd(cfg, &mut rec)?,
        Command::Genassoc => commands::genassoc(cfg, &mut rec)?,
        Command::Productcheck => commands::productcheck(cfg, &mut rec)?,
        Command::Oracle => commands::oracle(cfg, &mut rec)?,
        Command::Birat => commands::birat_cmd(cfg, &mut rec)?,
        Command::Verlinde => commands::verlinde_cmd(cfg, &mut rec)?,
        Command::All => suite::record_all(&mut rec, &suite::Tolerances::default(), cfg.seed)?,
    }
    Ok(rec.finish(cfg))
}

/// Runs and writes the report to the configured path or returns its text.
pub fn run_and_write(cfg: &RunConfig) -> Result<(Report, String)> {
    let rep = run(cfg)?;
    let text = rep.to_json();
    if let Some(p) = &cfg.report {
        std::fs::write(p, &text).map_err(|e| CliError::io(p, e))?;
    }
    Ok((rep, text))
}
