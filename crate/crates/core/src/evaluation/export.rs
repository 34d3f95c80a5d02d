use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::matrix::StatementMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpan {
    pub label: String,
    /// Half-open index range `[start, end)` along the axis.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixManifest {
    pub csv: String,
    pub rows: usize,
    pub cols: usize,
    pub closure: crate::proximity::Closure,
    pub subjects: Vec<String>,
    pub objects: Vec<String>,
    pub row_groups: Vec<GroupSpan>,
    pub col_groups: Vec<GroupSpan>,
    /// (row, col) of every true statement.
    pub true_cells: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// Contiguous runs of equal labels. Unlabelled entries break runs.
pub fn group_spans(groups: &[Option<String>]) -> Vec<GroupSpan> {
    let mut spans: Vec<GroupSpan> = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let Some(label) = g else { continue };
        match spans.last_mut() {
            Some(last) if last.label == *label && last.end == i => last.end = i + 1,
            _ => spans.push(GroupSpan {
                label: label.clone(),
                start: i,
                end: i + 1,
            }),
        }
    }
    spans
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn matrix_csv(matrix: &StatementMatrix) -> String {
    let mut out = String::from("subject");
    for o in &matrix.objects {
        out.push(',');
        out.push_str(&csv_field(o));
    }
    out.push('\n');
    for (s, row) in matrix.subjects.iter().zip(&matrix.tau) {
        out.push_str(&csv_field(s));
        for t in row {
            out.push_str(&format!(",{t:.10}"));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_manifest(matrix: &StatementMatrix, csv_name: &str) -> MatrixManifest {
    let true_cells = matrix
        .truth_mask
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, &t)| t).map(move |(j, _)| (i, j)))
        .collect();
    MatrixManifest {
        csv: csv_name.to_owned(),
        rows: matrix.rows(),
        cols: matrix.cols(),
        closure: matrix.closure,
        subjects: matrix.subjects.clone(),
        objects: matrix.objects.clone(),
        row_groups: group_spans(&matrix.subject_groups),
        col_groups: group_spans(&matrix.object_groups),
        true_cells,
    }
}

/// Writes `matrix.csv` and `matrix_manifest.json` into `dir`.
pub fn export_confusion_matrix(matrix: &StatementMatrix, dir: &Path) -> Result<ExportedFiles> {
    if matrix.rows() == 0 || matrix.cols() == 0 {
        return Err(Error::validation("cannot export an empty matrix"));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join("matrix.csv");
    std::fs::write(&csv, matrix_csv(matrix)).map_err(|e| Error::io(&csv, e))?;
    let manifest = dir.join("matrix_manifest.json");
    let json = serde_json::to_string_pretty(&matrix_manifest(matrix, "matrix.csv")).expect("manifest serializes");
    std::fs::write(&manifest, json + "\n").map_err(|e| Error::io(&manifest, e))?;
    Ok(ExportedFiles { csv, manifest })
}
