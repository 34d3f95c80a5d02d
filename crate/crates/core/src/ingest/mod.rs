//! Triple ingestion: parsing, filtering and edge-list construction.

mod corpus;
mod edges;
mod filter;
mod ntriples;

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use corpus::{load_annotated_corpus, rating, RaterResponse, Statement, RATER_COUNT};
pub use edges::{build_edge_list, EdgeList, EdgeListBuilder};
pub use filter::{apply_filters, DropReason, FilterConfig, FilterDecision, DBPEDIA_ONTOLOGY, DBPEDIA_RESOURCE};
pub use ntriples::{parse_line, parse_ntriples, NTriplesReader, RawTriple, Term};

use crate::error::{Error, Result};
use crate::graph::Directedness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFormat {
    NTriples,
    /// `subject<TAB>object` per line; no filtering is applied.
    Tsv,
}

impl SourceFormat {
    /// `.tsv` / `.tsv.gz` are edge lists, everything else is N-Triples.
    pub fn infer(path: &Path) -> Self {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let name = name.strip_suffix(".gz").unwrap_or(name);
        if name.ends_with(".tsv") {
            SourceFormat::Tsv
        } else {
            SourceFormat::NTriples
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub path: PathBuf,
    pub format: SourceFormat,
    /// Provenance label only (e.g. "types", "properties", "ontology").
    pub tag: Option<String>,
}

impl SourceSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        Self {
            format: SourceFormat::infer(&path),
            path,
            tag: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorPolicy {
    #[default]
    Skip,
    Abort,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub literal_object: u64,
    pub external_namespace: u64,
}

impl DropCounts {
    fn record(&mut self, reason: DropReason) {
        match reason {
            DropReason::LiteralObject => self.literal_object += 1,
            DropReason::ExternalNamespace => self.external_namespace += 1,
        }
    }

    fn add(&mut self, other: &DropCounts) {
        self.literal_object += other.literal_object;
        self.external_namespace += other.external_namespace;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceReport {
    pub path: PathBuf,
    pub format: SourceFormat,
    pub tag: Option<String>,
    pub triples_read: u64,
    pub kept: u64,
    pub dropped: DropCounts,
    pub parse_errors: u64,
    /// First few parse errors, for diagnostics.
    pub error_samples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub sources: Vec<SourceReport>,
    pub triples_read: u64,
    pub kept: u64,
    pub dropped: DropCounts,
    pub parse_errors: u64,
    pub self_loops_dropped: u64,
    pub nodes: u64,
    pub edges: u64,
    pub directedness: Directedness,
    pub filter: FilterConfig,
}

const ERROR_SAMPLES: usize = 10;

/// Opens a file, transparently decompressing gzip (detected by magic bytes).
pub fn open_source(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let is_gzip = reader.fill_buf().map_err(|e| Error::io(path, e))?.starts_with(&[0x1f, 0x8b]);
    if is_gzip {
        let decoder = flate2::read::MultiGzDecoder::new(reader);
        Ok(Box::new(BufReader::with_capacity(1 << 20, decoder)))
    } else {
        Ok(Box::new(reader))
    }
}

/// Parses, filters and interns one source into a local builder.
pub fn ingest_reader<R: BufRead>(
    input: R,
    spec: &SourceSpec,
    cfg: &FilterConfig,
    directedness: Directedness,
    policy: ParseErrorPolicy,
) -> Result<(EdgeListBuilder, SourceReport)> {
    let mut builder = EdgeListBuilder::new(directedness);
    let mut report = SourceReport {
        path: spec.path.clone(),
        format: spec.format,
        tag: spec.tag.clone(),
        triples_read: 0,
        kept: 0,
        dropped: DropCounts::default(),
        parse_errors: 0,
        error_samples: Vec::new(),
    };
    let on_error = |err: Error, report: &mut SourceReport| -> Result<()> {
        if policy == ParseErrorPolicy::Abort {
            return Err(err);
        }
        report.parse_errors += 1;
        if report.error_samples.len() < ERROR_SAMPLES {
            report.error_samples.push(err.to_string());
        }
        Ok(())
    };

    match spec.format {
        SourceFormat::NTriples => {
            for item in parse_ntriples(input) {
                match item {
                    Ok(triple) => {
                        report.triples_read += 1;
                        match apply_filters(&triple, cfg) {
                            FilterDecision::Keep => {
                                report.kept += 1;
                                builder.push_triple(&triple);
                            }
                            FilterDecision::Drop(reason) => report.dropped.record(reason),
                        }
                    }
                    Err(e) => on_error(e, &mut report)?,
                }
            }
        }
        SourceFormat::Tsv => {
            for (i, line) in input.lines().enumerate() {
                let line_no = i as u64 + 1;
                let line = line.map_err(|e| Error::io(&spec.path, e))?;
                let trimmed = line.trim_end_matches(['\r', '\n']);
                if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let mut cols = trimmed.split('\t');
                match (cols.next(), cols.next(), cols.next()) {
                    (Some(s), Some(o), None) if !s.is_empty() && !o.is_empty() => {
                        report.triples_read += 1;
                        report.kept += 1;
                        builder.push_names(s, o);
                    }
                    _ => on_error(
                        Error::Parse {
                            line: line_no,
                            message: "expected two non-empty tab-separated columns".into(),
                        },
                        &mut report,
                    )?,
                }
            }
        }
    }
    Ok((builder, report))
}

/// Ingests all sources (in parallel) and merges them in the given order, so
/// the result is identical to sequential ingestion of the concatenation.
pub fn ingest_sources(
    sources: &[SourceSpec],
    cfg: &FilterConfig,
    directedness: Directedness,
    policy: ParseErrorPolicy,
) -> Result<(EdgeList, IngestReport)> {
    cfg.validate()?;
    let parts: Vec<(EdgeListBuilder, SourceReport)> = sources
        .par_iter()
        .map(|spec| {
            let input = open_source(&spec.path)?;
            ingest_reader(input, spec, cfg, directedness, policy).map_err(|e| match e {
                Error::Parse { line, message } => Error::Validation(format!(
                    "{}: line {line}: {message}",
                    spec.path.display()
                )),
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    let mut merged = EdgeListBuilder::new(directedness);
    let mut source_reports = Vec::with_capacity(parts.len());
    for (builder, report) in parts {
        merged.absorb(builder);
        source_reports.push(report);
    }
    let edge_list = merged.finish();
    let report = summarize(source_reports, &edge_list, cfg);
    Ok((edge_list, report))
}

/// Single in-memory reader variant, used for tests and the service.
pub fn ingest_read<R: Read>(
    input: R,
    format: SourceFormat,
    cfg: &FilterConfig,
    directedness: Directedness,
) -> Result<(EdgeList, IngestReport)> {
    cfg.validate()?;
    let spec = SourceSpec {
        path: PathBuf::from("<memory>"),
        format,
        tag: None,
    };
    let (builder, report) =
        ingest_reader(BufReader::new(input), &spec, cfg, directedness, ParseErrorPolicy::Skip)?;
    let edge_list = builder.finish();
    let report = summarize(vec![report], &edge_list, cfg);
    Ok((edge_list, report))
}

fn summarize(sources: Vec<SourceReport>, edge_list: &EdgeList, cfg: &FilterConfig) -> IngestReport {
    let mut dropped = DropCounts::default();
    for s in &sources {
        dropped.add(&s.dropped);
    }
    IngestReport {
        triples_read: sources.iter().map(|s| s.triples_read).sum(),
        kept: sources.iter().map(|s| s.kept).sum(),
        parse_errors: sources.iter().map(|s| s.parse_errors).sum(),
        dropped,
        self_loops_dropped: edge_list.self_loops_dropped,
        nodes: edge_list.node_count() as u64,
        edges: edge_list.edges.len() as u64,
        directedness: edge_list.directedness,
        filter: cfg.clone(),
        sources,
    }
}
