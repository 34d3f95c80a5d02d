//! Validation protocols: statement matrices with leave-one-out scoring,
//! ROC analysis, and rank correlation against human ratings.

mod corpus;
mod correlation;
mod export;
mod matrix;
mod roc;

pub use corpus::{
    evaluate_annotated_corpus, CorpusCounts, CorpusEvaluation, CorpusRow, RowStatus, DEFAULT_MIN_SUBJECT_DEGREE,
};
pub use correlation::{average_ranks, correlate, kendall_tau_b, spearman, Coefficient, CorrelationReport};
pub use export::{
    export_confusion_matrix, group_spans, matrix_csv, matrix_manifest, ExportedFiles, GroupSpan, MatrixManifest,
};
pub use matrix::{build_statement_matrix, load_statement_set, StatementMatrix, StatementSet};
pub use roc::{auroc, RocPoint, RocReport};
