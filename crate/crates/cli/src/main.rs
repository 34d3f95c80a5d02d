mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use kgfc_core::ErrorKind;

use crate::args::Cli;

/// Failure carrying the exit-code class and a printable message.
#[derive(Debug)]
pub struct Failure {
    pub kind: ErrorKind,
    pub message: String,
}

impl From<kgfc_core::Error> for Failure {
    fn from(e: kgfc_core::Error) -> Self {
        let mut message = e.to_string();
        if let kgfc_core::Error::Unresolved { suggestions, .. } = &e {
            if !suggestions.is_empty() {
                message.push_str(&format!("\ndid you mean: {}", suggestions.join(", ")));
            }
        }
        Failure { kind: e.kind(), message }
    }
}

impl From<kgfc_client::ClientError> for Failure {
    fn from(e: kgfc_client::ClientError) -> Self {
        let message = match &e {
            kgfc_client::ClientError::Api(api) if !api.suggestions.is_empty() => {
                format!("{}\ndid you mean: {}", api.message, api.suggestions.join(", "))
            }
            kgfc_client::ClientError::Api(api) => api.message.clone(),
            other => other.to_string(),
        };
        Failure { kind: e.kind(), message }
    }
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ErrorKind::Validation.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::new(&cli.global.log))
        .with_writer(std::io::stderr)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.kind.exit_code() as u8)
        }
    }
}
