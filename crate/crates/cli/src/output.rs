use std::path::Path;

use kgfc_core::report::{to_report_json, to_value};
use kgfc_core::Error;
use serde::Serialize;
use serde_json::Value;

use crate::args::Cli;
use crate::Failure;

/// Everything that determines a run, echoed into each report it writes.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    pub threads: Option<usize>,
    pub log: String,
    pub service: &'static str,
    pub arguments: Value,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli, arguments: Value) -> Self {
        RunConfig {
            tool: "kgfc",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: cli.command.name(),
            seed: cli.global.seed,
            threads: cli.global.threads,
            log: cli.global.log.clone(),
            service: if cli.global.server.is_some() { "remote" } else { "embedded" },
            arguments,
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    result: &'a T,
}

pub fn report_json<T: Serialize>(config: &RunConfig, result: &T) -> Result<String, Failure> {
    Ok(to_report_json(&Report { config, result })?)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_report<T: Serialize>(path: &Path, config: &RunConfig, result: &T) -> Result<(), Failure> {
    write_file(path, &report_json(config, result)?)
}

pub fn arguments<T: Serialize>(args: &T) -> Result<Value, Failure> {
    Ok(to_value(args)?)
}
