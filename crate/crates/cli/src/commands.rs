use std::fs::File;
use std::path::{Path, PathBuf};

use kgfc_client::Client;
use kgfc_core::api::{CheckRequest, CheckResponse, CorpusRequest, LoadGraphRequest, MatrixRequest};
use kgfc_core::calibration::{
    load_roster, CalibrationReport, CalibrationRequest, ClassifierConfig, FoldSpec, ForestParams, KnnParams,
};
use kgfc_core::evaluation::{export_confusion_matrix, load_statement_set};
use kgfc_core::ingest::{ingest_sources, load_annotated_corpus, FilterConfig, ParseErrorPolicy, SourceSpec};
use kgfc_core::resolve::ResolveOptions;
use kgfc_core::{snapshot, Directedness, Error, ErrorKind, KnowledgeBase};
use kgfc_server::AppState;
use serde::Serialize;

use crate::args::{
    BuildArgs, CalibrateArgs, CheckArgs, Cli, Command, EvalCorpusArgs, EvalMatrixArgs, OnParseError, ResolveArgs,
    ServeArgs, SNAPSHOT_DIR_ENV,
};
use crate::output::{arguments, report_json, write_file, write_report, RunConfig};
use crate::Failure;

pub fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(Failure::validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::validation(format!("thread pool: {e}")))?;
    }
    let args = match &cli.command {
        Command::Build(a) => arguments(a)?,
        Command::Check(a) => arguments(a)?,
        Command::EvalMatrix(a) => arguments(a)?,
        Command::EvalCorpus(a) => arguments(a)?,
        Command::Calibrate(a) => arguments(a)?,
        Command::Serve(_) => serde_json::Value::Null,
    };
    let config = RunConfig::from_cli(&cli, args);
    if let Command::Build(a) = &cli.command {
        return build(a, &config);
    }
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure {
            kind: ErrorKind::Io,
            message: format!("cannot start runtime: {e}"),
        })?;
    runtime.block_on(async {
        match &cli.command {
            Command::Serve(a) => serve(a).await,
            Command::Check(a) => check(&cli, a, &config).await,
            Command::EvalMatrix(a) => eval_matrix(&cli, a, &config).await,
            Command::EvalCorpus(a) => eval_corpus(&cli, a, &config).await,
            Command::Calibrate(a) => calibrate(&cli, a, &config).await,
            Command::Build(_) => unreachable!(),
        }
    })
}

fn open(path: &Path) -> Result<File, Failure> {
    Ok(File::open(path).map_err(|e| Error::io(path, e))?)
}

fn resolve_options(a: &ResolveArgs) -> ResolveOptions {
    let mut opts = if a.exact_names {
        ResolveOptions::exact()
    } else {
        ResolveOptions::default()
    };
    opts.case_insensitive = a.case_insensitive;
    opts
}

fn build(a: &BuildArgs, config: &RunConfig) -> Result<(), Failure> {
    let directedness = if a.directed {
        Directedness::Directed
    } else {
        Directedness::Undirected
    };
    let filter = if a.all_namespaces {
        FilterConfig::permissive()
    } else if a.namespaces.is_empty() {
        FilterConfig::default()
    } else {
        FilterConfig::with_namespaces(a.namespaces.iter().cloned())
    };
    let policy = match a.on_parse_error {
        OnParseError::Skip => ParseErrorPolicy::Skip,
        OnParseError::Abort => ParseErrorPolicy::Abort,
    };
    let sources: Vec<SourceSpec> = a.sources.iter().map(SourceSpec::new).collect();
    let (edges, report) = ingest_sources(&sources, &filter, directedness, policy)?;
    let kb = KnowledgeBase::from_edge_list(edges)?;
    snapshot::save(&kb, &a.out)?;
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".report.json");
        PathBuf::from(p)
    });
    write_report(&report_path, config, &report)?;
    println!(
        "read {} triples, kept {}, dropped {} literal / {} out-of-namespace, {} parse errors; {} nodes, {} edges ({})",
        report.triples_read,
        report.kept,
        report.dropped.literal_object,
        report.dropped.external_namespace,
        report.parse_errors,
        report.nodes,
        report.edges,
        report.directedness
    );
    Ok(())
}

async fn serve(a: &ServeArgs) -> Result<(), Failure> {
    let state = AppState::new();
    for path in &a.snapshots {
        let info = state.load(path, None)?;
        eprintln!("loaded {} ({} nodes, {} edges)", info.id, info.node_count, info.edge_count);
    }
    let listener = tokio::net::TcpListener::bind(a.listen)
        .await
        .map_err(|e| Error::io(a.listen.to_string(), e))?;
    eprintln!("listening on http://{}", a.listen);
    tokio::select! {
        r = kgfc_server::serve(listener, state) => r.map_err(|e| Error::io(a.listen.to_string(), e))?,
        _ = tokio::signal::ctrl_c() => {}
    }
    Ok(())
}

/// Client for the configured service, or for an embedded one on a free
/// loopback port.
async fn connect(cli: &Cli) -> Result<Client, Failure> {
    if let Some(url) = &cli.global.server {
        return Ok(Client::new(url.clone()));
    }
    let (addr, _task) = kgfc_server::spawn(([127, 0, 0, 1], 0).into(), AppState::new())
        .await
        .map_err(|e| Error::io("127.0.0.1:0", e))?;
    tracing::debug!(%addr, "embedded service started");
    Ok(Client::new(format!("http://{addr}")))
}

/// Local path of the snapshot, falling back to $KGFC_SNAPSHOT_DIR for
/// relative paths. A remote service gets the path unchanged when it does
/// not exist locally.
fn snapshot_path(cli: &Cli, p: &Path) -> Result<PathBuf, Failure> {
    let mut candidates = vec![p.to_path_buf()];
    if p.is_relative() {
        if let Some(dir) = std::env::var_os(SNAPSHOT_DIR_ENV) {
            candidates.push(Path::new(&dir).join(p));
        }
    }
    for c in &candidates {
        if c.is_file() {
            return Ok(std::fs::canonicalize(c).map_err(|e| Error::io(c, e))?);
        }
    }
    if cli.global.server.is_some() {
        return Ok(p.to_path_buf());
    }
    Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "snapshot not found")).into())
}

async fn load(cli: &Cli, client: &Client, snapshot: &Path) -> Result<String, Failure> {
    let path = snapshot_path(cli, snapshot)?;
    Ok(client.load_graph(&LoadGraphRequest { path, id: None }).await?.id)
}

async fn check(cli: &Cli, a: &CheckArgs, config: &RunConfig) -> Result<(), Failure> {
    let client = connect(cli).await?;
    let graph = load(cli, &client, &a.snapshot.snapshot).await?;
    let req = CheckRequest {
        subject: a.subject.clone(),
        object: a.object.clone(),
        closure: a.closure.into(),
        view: a.view.map(Into::into),
        exclude_existing: a.exclude_existing,
        resolve: resolve_options(&a.resolve),
    };
    let r = client.check(&graph, &req).await?;
    if a.json {
        print!("{}", report_json(config, &r)?);
    } else {
        print!("{}", render_check(&r));
    }
    Ok(())
}

fn render_check(r: &CheckResponse) -> String {
    let mut out = format!("{} -> {}\n", r.subject, r.object);
    out.push_str(&format!("closure: {}, graph: {}\n", r.closure, r.directedness));
    if r.excluded_edge {
        out.push_str("direct edge excluded\n");
    }
    if !r.reachable {
        out.push_str(&format!("tau: {:.10} (unreachable)\n", r.tau));
        return out;
    }
    out.push_str(&format!("tau: {:.10}\n", r.tau));
    let names: Vec<&str> = r.path.iter().map(|p| p.name.as_str()).collect();
    out.push_str(&format!("path: {}\n", names.join(" -> ")));
    let inner = &r.path[1..r.path.len() - 1];
    if !inner.is_empty() {
        let width = inner.iter().map(|p| p.name.len()).max().unwrap_or(0);
        for p in inner {
            out.push_str(&format!("  {:<width$}  degree {}\n", p.name, p.degree));
        }
    }
    out
}

#[derive(Serialize)]
struct MatrixSummary {
    rows: usize,
    cols: usize,
    n_pos: usize,
    n_neg: usize,
    auroc: f64,
    excluded_edges: usize,
    files: Vec<&'static str>,
}

async fn eval_matrix(cli: &Cli, a: &EvalMatrixArgs, config: &RunConfig) -> Result<(), Failure> {
    let statements = load_statement_set(open(&a.statements)?)?;
    statements.validate()?;
    let client = connect(cli).await?;
    let graph = load(cli, &client, &a.snapshot.snapshot).await?;
    let req = MatrixRequest {
        statements,
        closure: a.closure.into(),
        view: a.view.map(Into::into),
        resolve: resolve_options(&a.resolve),
    };
    let resp = client.matrix(&graph, &req).await?;
    export_confusion_matrix(&resp.matrix, &a.out)?;
    write_file(&a.out.join("roc.csv"), &resp.roc.to_csv())?;
    let summary = MatrixSummary {
        rows: resp.matrix.rows(),
        cols: resp.matrix.cols(),
        n_pos: resp.roc.n_pos,
        n_neg: resp.roc.n_neg,
        auroc: resp.roc.auroc,
        excluded_edges: resp.matrix.excluded_edges,
        files: vec!["matrix.csv", "matrix_manifest.json", "roc.csv", "report.json"],
    };
    write_report(&a.out.join("report.json"), config, &summary)?;
    println!(
        "{}x{} matrix, {} true / {} false, AUROC {:.6}",
        summary.rows, summary.cols, summary.n_pos, summary.n_neg, summary.auroc
    );
    Ok(())
}

async fn eval_corpus(cli: &Cli, a: &EvalCorpusArgs, config: &RunConfig) -> Result<(), Failure> {
    let statements = load_annotated_corpus(open(&a.corpus)?)?;
    let client = connect(cli).await?;
    let graph = load(cli, &client, &a.snapshot.snapshot).await?;
    let req = CorpusRequest {
        statements,
        closure: a.closure.into(),
        min_subject_degree: a.min_subject_degree,
        view: a.view.map(Into::into),
        resolve: resolve_options(&a.resolve),
    };
    let eval = client.corpus(&graph, &req).await?;
    write_report(&a.out.join("corpus_report.json"), config, &eval)?;
    let c = &eval.correlation;
    println!(
        "{} of {} statements evaluated; spearman {:.4} (p={:.3e}), kendall tau-b {:.4} (p={:.3e})",
        eval.counts.evaluated,
        eval.counts.total,
        c.spearman_rho.value,
        c.spearman_rho.p_value,
        c.kendall_tau_b.value,
        c.kendall_tau_b.p_value
    );
    Ok(())
}

async fn calibrate(cli: &Cli, a: &CalibrateArgs, config: &RunConfig) -> Result<(), Failure> {
    let roster = load_roster(open(&a.roster)?)?;
    let mut req = CalibrationRequest::new(roster);
    req.target_concept = a.targets.clone();
    req.cells = if a.grid {
        CalibrationRequest::full_grid()
    } else {
        vec![(a.closure.into(), a.view.into())]
    };
    req.classifiers = vec![
        ClassifierConfig::Knn(KnnParams { k: a.k }),
        ClassifierConfig::RandomForest(ForestParams {
            trees: a.trees,
            seed: cli.global.seed,
            ..ForestParams::default()
        }),
    ];
    req.fold_spec = FoldSpec {
        folds: a.folds,
        seed: cli.global.seed,
    };
    req.resolve = resolve_options(&a.resolve);
    req.min_resolved_fraction = a.min_resolved;
    req.infobox_baseline = a.infobox_baseline;

    let client = connect(cli).await?;
    let graph = load(cli, &client, &a.snapshot.snapshot).await?;
    let report = client.calibrate(&graph, &req).await?;
    write_report(&a.out.join("calibration_report.json"), config, &report)?;
    print!("{}", render_calibration(&report));
    Ok(())
}

fn render_calibration(r: &CalibrationReport) -> String {
    let mut out = format!(
        "{} of {} roster entries resolved, {} feature columns\n",
        r.resolved,
        r.roster_size,
        r.targets.len()
    );
    if !r.unresolved.is_empty() {
        out.push_str(&format!("unresolved: {}\n", r.unresolved.join(", ")));
    }
    for cell in r.cells.iter().chain(&r.infobox_baseline) {
        for res in &cell.results {
            out.push_str(&format!(
                "{:<12} {:<10} {:<12} {:<14} AUROC {:.3}  F {:.3}\n",
                cell.closure.to_string(),
                cell.directedness.to_string(),
                cell.group.as_deref().unwrap_or("all"),
                res.classifier.name(),
                res.aggregate.auroc,
                res.aggregate.f_score_macro
            ));
        }
    }
    out
}
