//! Human-annotated statement corpus (subject, predicate, object, five raters).

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RATER_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    /// #Yes - #No over the raters, in [-5, 5].
    pub rating: Option<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaterResponse {
    Yes,
    No,
    Abstain,
}

impl RaterResponse {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" | "y" | "true" | "1" => Some(RaterResponse::Yes),
            "no" | "n" | "false" | "0" => Some(RaterResponse::No),
            "" | "-" | "abstain" | "skip" | "unsure" | "?" => Some(RaterResponse::Abstain),
            _ => None,
        }
    }
}

pub fn rating(responses: &[RaterResponse]) -> i8 {
    responses.iter().fold(0i8, |acc, r| match r {
        RaterResponse::Yes => acc + 1,
        RaterResponse::No => acc - 1,
        RaterResponse::Abstain => acc,
    })
}

/// Reads the tab-separated corpus. The header row is required; row numbers in
/// errors count the header as row 1.
pub fn load_annotated_corpus<R: Read>(source: R) -> Result<Vec<Statement>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .flexible(true)
        .quoting(false)
        .from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Record {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let expected = 3 + RATER_COUNT;
    if headers.len() != expected {
        return Err(Error::Record {
            row: 1,
            message: format!("expected {expected} columns in header, found {}", headers.len()),
        });
    }

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| Error::Record {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != expected {
            return Err(Error::Record {
                row,
                message: format!(
                    "expected subject, predicate, object and {RATER_COUNT} rater responses, found {} columns",
                    rec.len()
                ),
            });
        }
        let field = |j: usize| rec.get(j).unwrap_or_default().trim().to_owned();
        let (subject, predicate, object) = (field(0), field(1), field(2));
        if subject.is_empty() || predicate.is_empty() || object.is_empty() {
            return Err(Error::Record {
                row,
                message: "empty subject, predicate or object".into(),
            });
        }
        let mut responses = Vec::with_capacity(RATER_COUNT);
        for j in 3..expected {
            let raw = rec.get(j).unwrap_or_default();
            responses.push(RaterResponse::parse(raw).ok_or_else(|| Error::Record {
                row,
                message: format!("unrecognized rater response {raw:?}"),
            })?);
        }
        out.push(Statement {
            subject,
            predicate,
            object,
            rating: Some(rating(&responses)),
        });
    }
    Ok(out)
}
