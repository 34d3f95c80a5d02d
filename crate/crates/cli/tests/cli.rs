use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kgfc_core::synthetic::capitals;
use serde_json::Value;

const NT: &str = r#"<http://dbpedia.org/resource/Rome> <http://dbpedia.org/ontology/country> <http://dbpedia.org/resource/Italy> .
<http://dbpedia.org/resource/Rome> <http://dbpedia.org/ontology/capitalOf> <http://dbpedia.org/resource/Italy> .
<http://dbpedia.org/resource/Italy> <http://dbpedia.org/ontology/currency> <http://dbpedia.org/resource/Euro> .
<http://dbpedia.org/resource/Paris> <http://dbpedia.org/ontology/country> <http://dbpedia.org/resource/France> .
<http://dbpedia.org/resource/France> <http://dbpedia.org/ontology/currency> <http://dbpedia.org/resource/Euro> .
<http://dbpedia.org/resource/Rome> <http://dbpedia.org/ontology/populationTotal> "2873000"^^<http://www.w3.org/2001/XMLSchema#integer> .
"#;

fn kgfc(args: &[&str]) -> Output {
    kgfc_env(args, &[])
}

fn kgfc_env(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kgfc"));
    cmd.args(args).env_remove("KGFC_SERVER").env_remove("KGFC_SNAPSHOT_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

/// Fixture graph plus a hub with 50 leaves and a disconnected pair.
fn check_graph(dir: &Path) -> PathBuf {
    let mut tsv = String::new();
    for (a, b) in [("s", "a"), ("a", "o"), ("a", "x"), ("s", "b"), ("b", "c"), ("c", "o"), ("lone", "pair")] {
        tsv.push_str(&format!("{a}\t{b}\n"));
    }
    tsv.push_str("Barack_Obama\tUnited_States\nIslam\tUnited_States\n");
    for i in 0..48 {
        tsv.push_str(&format!("leaf_{i}\tUnited_States\n"));
    }
    let src = write(dir, "check.tsv", &tsv);
    let out = dir.join("check.vkg");
    let o = kgfc(&["build", s(&src), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn build_reports_drops() {
    let dir = tempfile::tempdir().unwrap();
    let nt = write(dir.path(), "six.nt", NT);
    let out = dir.path().join("six.vkg");
    let o = kgfc(&["build", s(&nt), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&dir.path().join("six.vkg.report.json"));
    let r = &report["result"];
    assert_eq!(r["triples_read"], 6);
    assert_eq!(r["dropped"]["literal_object"], 1);
    assert!(r["edges"].as_u64().unwrap() <= 5);
    assert_eq!(r["edges"], 4);
    assert_eq!(report["config"]["subcommand"], "build");
    assert!(out.exists());
}

#[test]
fn build_conflates_overlapping_sources() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.tsv", "x\ty\ny\tz\n");
    let b = write(dir.path(), "b.tsv", "z\ty\nz\tw\n");
    let out = dir.path().join("ab.vkg");
    let report = dir.path().join("ab.json");
    let o = kgfc(&["build", s(&a), s(&b), "--out", s(&out), "--report", s(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&report);
    assert_eq!(r["result"]["triples_read"], 4);
    assert_eq!(r["result"]["edges"], 3);
}

#[test]
fn build_missing_source_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.nt");
    let o = kgfc(&["build", s(&missing), "--out", s(&dir.path().join("x.vkg"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope.nt"));
}

#[test]
fn check_direct_pair() {
    let dir = tempfile::tempdir().unwrap();
    let g = check_graph(dir.path());
    let o = kgfc(&["check", "s", "a", "-g", s(&g)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("tau: 1.0000000000"), "{out}");
    assert!(out.contains("path: s -> a\n"), "{out}");
}

#[test]
fn check_json_fixture_values() {
    let dir = tempfile::tempdir().unwrap();
    let g = check_graph(dir.path());
    let o = kgfc(&["check", "s", "o", "-g", s(&g), "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let tau = v["result"]["tau"].as_f64().unwrap();
    assert!((tau - 1.0 / (1.0 + 3f64.ln())).abs() < 1e-10);
    assert_eq!(v["result"]["path"][1]["name"], "a");
    assert_eq!(v["result"]["path"][1]["degree"], 3);
    assert_eq!(v["config"]["arguments"]["closure"], "metric");

    let o = kgfc(&["check", "s", "o", "-g", s(&g), "--json", "--closure", "ultrametric"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let tau = v["result"]["tau"].as_f64().unwrap();
    assert!((tau - 1.0 / (1.0 + 2f64.ln())).abs() < 1e-10);
}

#[test]
fn check_hub_path_shows_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let g = check_graph(dir.path());
    let o = kgfc(&["check", "Barack_Obama", "Islam", "-g", s(&g)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("United_States  degree 50"), "{out}");
    assert!(out.contains("tau: 0.2035"), "{out}");
}

#[test]
fn check_unreachable_and_exclusion() {
    let dir = tempfile::tempdir().unwrap();
    let g = check_graph(dir.path());
    let o = kgfc(&["check", "s", "lone", "-g", s(&g)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("tau: 0.0000000000 (unreachable)"));
    let o = kgfc(&["check", "lone", "pair", "-g", s(&g), "--exclude-existing"]);
    assert!(stdout(&o).contains("direct edge excluded"));
    assert!(stdout(&o).contains("unreachable"));
}

#[test]
fn check_unknown_entity_suggests() {
    let dir = tempfile::tempdir().unwrap();
    let g = check_graph(dir.path());
    let o = kgfc(&["check", "Barack", "Islam", "-g", s(&g)]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("Barack") && err.contains("did you mean: Barack_Obama"), "{err}");
}

#[test]
fn missing_snapshot_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = kgfc(&["check", "a", "b", "-g", s(&dir.path().join("none.vkg"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("none.vkg"));
    let o = kgfc(&["check", "a"]);
    assert_eq!(code(&o), 4);
    assert_eq!(code(&kgfc(&["--help"])), 0);
}

#[test]
fn snapshot_dir_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    check_graph(dir.path());
    let o = kgfc_env(&["check", "s", "a", "-g", "check.vkg"], &[("KGFC_SNAPSHOT_DIR", dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn capitals_snapshot(dir: &Path) -> (PathBuf, PathBuf) {
    let f = capitals(50, 0, 0);
    let tsv = dir.join("capitals.tsv");
    f.write_tsv(std::fs::File::create(&tsv).unwrap()).unwrap();
    let statements = write(dir, "statements.csv", &f.statements_csv());
    let g = dir.join("capitals.vkg");
    assert_eq!(code(&kgfc(&["build", s(&tsv), "--out", s(&g)])), 0);
    (g, statements)
}

#[test]
fn eval_matrix_outputs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (g, st) = capitals_snapshot(dir.path());
    let out1 = dir.path().join("run1");
    let o = kgfc(&["eval-matrix", "--statements", s(&st), "-g", s(&g), "--out", s(&out1)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["matrix.csv", "roc.csv", "report.json", "matrix_manifest.json"] {
        assert!(out1.join(f).exists(), "{f}");
    }
    let report = read_json(&out1.join("report.json"));
    assert!(report["result"]["auroc"].as_f64().unwrap() >= 0.9);
    assert_eq!(report["result"]["excluded_edges"], 50);

    let first: Vec<Vec<u8>> = ["matrix.csv", "roc.csv", "report.json", "matrix_manifest.json"]
        .iter()
        .map(|f| std::fs::read(out1.join(f)).unwrap())
        .collect();
    std::fs::remove_dir_all(&out1).unwrap();
    kgfc(&["eval-matrix", "--statements", s(&st), "-g", s(&g), "--out", s(&out1)]);
    for (f, bytes) in ["matrix.csv", "roc.csv", "report.json", "matrix_manifest.json"].iter().zip(&first) {
        assert_eq!(&std::fs::read(out1.join(f)).unwrap(), bytes, "{f}");
    }

    // single-threaded output matches apart from the echoed thread count
    let out3 = dir.path().join("run3");
    kgfc(&["--threads", "1", "eval-matrix", "--statements", s(&st), "-g", s(&g), "--out", s(&out3)]);
    assert_eq!(std::fs::read(out1.join("matrix.csv")).unwrap(), std::fs::read(out3.join("matrix.csv")).unwrap());
    let r3 = read_json(&out3.join("report.json"));
    assert_eq!(r3["result"], report["result"]);
    assert_eq!(r3["config"]["threads"], 1);

    let direct = dir.path().join("direct");
    kgfc(&["eval-matrix", "--statements", s(&st), "-g", s(&g), "--out", s(&direct), "--closure", "direct-only"]);
    let d = read_json(&direct.join("report.json"));
    assert!(d["result"]["auroc"].as_f64().unwrap() <= 0.65);
}

#[test]
fn eval_matrix_without_positives_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = capitals_snapshot(dir.path());
    let st = write(dir.path(), "neg.csv", "subject,object,is_true\nCity_000,Country_001,false\n");
    let o = kgfc(&["eval-matrix", "--statements", s(&st), "-g", s(&g), "--out", s(&dir.path().join("o"))]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("positive"));
}

fn calibration_inputs(dir: &Path, with_ghost: bool) -> (PathBuf, PathBuf) {
    let mut tsv = String::from("Liberalism\tIdeology\nConservatism\tIdeology\nparty_l\tLiberalism\nparty_c\tConservatism\n");
    let mut roster = String::from("entity_name,label\n");
    for i in 0..20 {
        let (party, label) = if i % 2 == 0 { ("party_l", "L") } else { ("party_c", "C") };
        tsv.push_str(&format!("m{i}\t{party}\nm{i}\tstate_{}\n", i % 3));
        roster.push_str(&format!("m{i},{label}\n"));
    }
    if with_ghost {
        roster.push_str("ghost,L\n");
    }
    let src = write(dir, "parties.tsv", &tsv);
    let g = dir.join("parties.vkg");
    assert_eq!(code(&kgfc(&["build", s(&src), "--directed", "--out", s(&g)])), 0);
    (g, write(dir, "roster.csv", &roster))
}

#[test]
fn calibrate_grid_and_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let (g, roster) = calibration_inputs(dir.path(), true);
    let out = dir.path().join("grid");
    let o = kgfc(&["calibrate", "--roster", s(&roster), "-g", s(&g), "--grid", "--folds", "5", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&out.join("calibration_report.json"));
    assert_eq!(r["result"]["cells"].as_array().unwrap().len(), 4);
    assert_eq!(r["result"]["unresolved"], serde_json::json!(["ghost"]));
    assert!(r["result"]["external_baseline"].is_null());
    assert_eq!(r["config"]["arguments"]["grid"], true);

    let single = dir.path().join("single");
    let o = kgfc(&["calibrate", "--roster", s(&roster), "-g", s(&g), "--folds", "5", "--out", s(&single)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&single.join("calibration_report.json"));
    let cells = r["result"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0]["closure"], "metric");
    assert_eq!(cells[0]["directedness"], "undirected");
}

#[test]
fn calibrate_stops_when_too_few_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = calibration_inputs(dir.path(), false);
    let roster = write(dir.path(), "bad.csv", "entity_name,label\nm0,L\nm1,C\nx1,L\nx2,C\n");
    let o = kgfc(&["calibrate", "--roster", s(&roster), "-g", s(&g), "--folds", "2", "--out", s(&dir.path().join("o"))]);
    assert_eq!(code(&o), 3);
}

#[test]
fn remote_service_mode() {
    let dir = tempfile::tempdir().unwrap();
    let g = check_graph(dir.path());
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let listen = format!("127.0.0.1:{port}");
    let mut server = Command::new(env!("CARGO_BIN_EXE_kgfc"))
        .args(["serve", "--listen", &listen])
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let url = format!("http://{listen}");
    let mut result = None;
    for _ in 0..100 {
        let o = kgfc(&["--server", &url, "check", "s", "a", "-g", s(&g)]);
        if code(&o) == 0 {
            result = Some(o);
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(100));
    }
    let unknown = kgfc(&["--server", &url, "check", "s", "zzz", "-g", s(&g)]);
    server.kill().unwrap();
    server.wait().unwrap();
    let o = result.expect("service did not come up");
    assert!(stdout(&o).contains("tau: 1.0000000000"));
    assert_eq!(code(&unknown), 3);
}

#[test]
fn eval_corpus_correlates_ratings() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = capitals_snapshot(dir.path());
    let mut tsv = String::from("subject\tpredicate\tobject\tr1\tr2\tr3\tr4\tr5\n");
    for i in 0..20 {
        let votes = ["yes\tyes\tyes\tyes\tno", "yes\tno\tno\tno\tno"][i % 2];
        let (c, k) = (format!("City_{i:03}"), format!("Country_{:03}", if i % 2 == 0 { i } else { (i + 1) % 50 }));
        tsv.push_str(&format!("{c}\tcapital\t{k}\t{votes}\n"));
    }
    let corpus = write(dir.path(), "corpus.tsv", &tsv);
    let out = dir.path().join("corpus");
    let o = kgfc(&[
        "eval-corpus", "--corpus", s(&corpus), "-g", s(&g), "--min-subject-degree", "0", "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&out.join("corpus_report.json"));
    assert_eq!(r["result"]["counts"]["evaluated"], 20);
    assert!(r["result"]["correlation"]["spearman_rho"]["value"].as_f64().unwrap() > 0.8);

    let bad = write(dir.path(), "bad.tsv", "subject\tpredicate\n");
    let o = kgfc(&["eval-corpus", "--corpus", s(&bad), "-g", s(&g), "--out", s(&out)]);
    assert_eq!(code(&o), 4);
}
