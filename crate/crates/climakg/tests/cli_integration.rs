//! End-to-end tests of the installed binary: exit codes, output formats,
//! the serve loop, and parity between the analysis data paths.

use std::io::{BufRead, BufReader};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};

use climakg::endpoint::{serve, EndpointConfig};
use climakg::sparql::parse_results_json;
use climakg::store::Graph;

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_climakg"));
    cmd.current_dir(repo_root());
    cmd
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("repository root exists")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let output = binary().args(args).output().expect("binary runs");
    (
        output.status.code().expect("no signal"),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

/// Ingests one of the shipped fixture CSVs into `dir` and returns the store path.
fn ingest_fixture(dir: &Path, csv: &str) -> PathBuf {
    let store = dir.join("store.nt");
    let (code, _, stderr) = run(&[
        "ingest",
        "--csv",
        &format!("fixtures/{csv}"),
        "--store",
        store.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "ingest of {csv} failed: {stderr}");
    store
}

fn tiny_store(dir: &Path) -> PathBuf {
    let store = dir.join("tiny.nt");
    std::fs::write(
        &store,
        "<http://example.org/a> <http://example.org/p> <http://example.org/b> .\n\
         <http://example.org/b> <http://example.org/p> <http://example.org/c> .\n",
    )
    .unwrap();
    store
}

#[test]
fn ingest_missing_csv_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("out.nt");
    let (code, _, stderr) = run(&[
        "ingest",
        "--csv",
        "/nonexistent/daily.csv",
        "--store",
        store.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("cannot read"), "stderr was: {stderr}");
}

#[test]
fn ingest_with_no_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("out.nt");
    let (code, _, stderr) = run(&["ingest", "--store", store.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("nothing to ingest"), "stderr was: {stderr}");
}

#[test]
fn header_only_csv_yields_an_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "STATION,NAME,LATITUDE,LONGITUDE,DATE,TAVG,PRCP\n").unwrap();
    let store = dir.path().join("out.nt");
    let (code, stdout, stderr) = run(&[
        "ingest",
        "--csv",
        csv.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr was: {stderr}");
    assert!(stdout.contains("stations=0 observations=0 triples=0"));
    assert_eq!(std::fs::read_to_string(&store).unwrap(), "");
}

#[test]
fn bad_units_value_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    std::fs::write(
        &csv,
        "STATION,NAME,LATITUDE,LONGITUDE,DATE,TAVG\nGHCND:X,\"X\",1.0,2.0,1990-01-01,5.0\n",
    )
    .unwrap();
    let store = dir.path().join("out.nt");
    let (code, _, stderr) = run(&[
        "ingest",
        "--csv",
        csv.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
        "--units",
        "imperial",
    ]);
    assert_eq!(code, 2);
    assert!(!stderr.is_empty());
}

#[test]
fn standard_units_convert_to_metric_on_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    std::fs::write(
        &csv,
        "STATION,NAME,LATITUDE,LONGITUDE,DATE,TAVG,PRCP\n\
         GHCND:X,\"X\",1.0,2.0,1990-01-01,32.0,1.0\n",
    )
    .unwrap();
    let store = dir.path().join("out.nt");
    let (code, _, stderr) = run(&[
        "ingest",
        "--csv",
        csv.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
        "--units",
        "standard",
    ]);
    assert_eq!(code, 0, "stderr was: {stderr}");
    let text = std::fs::read_to_string(&store).unwrap();
    let value_of = |code: &str| {
        text.lines()
            .find(|l| l.contains(&format!("/{code}>")) && l.contains("hasValue"))
            .unwrap_or_else(|| panic!("no hasValue line for {code} in:\n{text}"))
            .to_string()
    };
    // 32 F is 0 C; 1 inch is 25.4 mm.
    assert!(
        value_of("TAVG").contains("\"0.0\"^^"),
        "{}",
        value_of("TAVG")
    );
    assert!(
        value_of("PRCP").contains("\"25.4\"^^"),
        "{}",
        value_of("PRCP")
    );
}

#[test]
fn inline_query_runs_and_limits_rows() {
    let dir = tempfile::tempdir().unwrap();
    let store = tiny_store(dir.path());
    let (code, stdout, stderr) = run(&[
        "query",
        "--store",
        store.to_str().unwrap(),
        "--inline",
        "SELECT * WHERE { ?s ?p ?o } LIMIT 1",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0, "stderr was: {stderr}");
    let solutions = parse_results_json(&stdout).expect("stdout is results JSON");
    assert_eq!(solutions.rows.len(), 1);
    assert_eq!(solutions.variables, vec!["s", "p", "o"]);
}

#[test]
fn csv_format_emits_a_header_row() {
    let dir = tempfile::tempdir().unwrap();
    let store = tiny_store(dir.path());
    let (code, stdout, _) = run(&[
        "query",
        "--store",
        store.to_str().unwrap(),
        "--inline",
        "SELECT ?s ?o WHERE { ?s <http://example.org/p> ?o } ORDER BY ?s",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("s,o"));
    assert_eq!(lines.clone().count(), 2);
    assert!(lines.next().unwrap().starts_with("http://example.org/a"));
}

#[test]
fn unknown_format_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = tiny_store(dir.path());
    let (code, _, stderr) = run(&[
        "query",
        "--store",
        store.to_str().unwrap(),
        "--inline",
        "SELECT * WHERE { ?s ?p ?o }",
        "--format",
        "xml",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown format"), "stderr was: {stderr}");
}

#[test]
fn malformed_query_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = tiny_store(dir.path());
    let query = dir.path().join("bad.rq");
    std::fs::write(&query, "SELECT WHERE chaos {").unwrap();
    let (code, _, stderr) = run(&[
        "query",
        "--store",
        store.to_str().unwrap(),
        "--query",
        query.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(!stderr.is_empty());
}

#[test]
fn serve_rejects_an_occupied_port() {
    let dir = tempfile::tempdir().unwrap();
    let store = tiny_store(dir.path());
    let blocker = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = blocker.local_addr().unwrap().port();
    let (code, _, stderr) = run(&[
        "serve",
        "--store",
        store.to_str().unwrap(),
        "--port",
        &port.to_string(),
    ]);
    assert_eq!(code, 1, "stderr was: {stderr}");
    assert!(!stderr.is_empty());
}

/// Kills the child even when an assertion fails first.
struct ChildGuard(Child);

impl Drop for ChildGuard {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_child_answers_health_and_queries() {
    let dir = tempfile::tempdir().unwrap();
    let store = tiny_store(dir.path());
    let child = binary()
        .args(["serve", "--store", store.to_str().unwrap(), "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .expect("serve starts");
    let mut guard = ChildGuard(child);
    let mut first_line = String::new();
    BufReader::new(guard.0.stdout.as_mut().unwrap())
        .read_line(&mut first_line)
        .expect("serve announces its address");
    let addr = first_line
        .trim()
        .strip_prefix("listening on http://")
        .unwrap_or_else(|| panic!("unexpected announcement: {first_line:?}"))
        .to_string();

    let health = ureq::get(&format!("http://{addr}/health")).call().unwrap();
    assert_eq!(health.status(), 200);
    assert_eq!(health.into_string().unwrap(), "ok");

    // The query subcommand can target the child through --endpoint.
    let (code, stdout, stderr) = run(&[
        "query",
        "--endpoint",
        &format!("http://{addr}"),
        "--inline",
        "SELECT ?s WHERE { ?s ?p ?o } ORDER BY ?s",
    ]);
    assert_eq!(code, 0, "stderr was: {stderr}");
    let solutions = parse_results_json(&stdout).unwrap();
    assert_eq!(solutions.rows.len(), 2);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let store = tiny_store(dir.path());
    let config = dir.path().join("climakg.conf");
    std::fs::write(
        &config,
        format!(
            "store = {}\nformat = csv # default output\n",
            store.display()
        ),
    )
    .unwrap();

    let (code, stdout, stderr) = run(&[
        "query",
        "--config",
        config.to_str().unwrap(),
        "--inline",
        "SELECT ?s WHERE { ?s ?p ?o } ORDER BY ?s LIMIT 1",
    ]);
    assert_eq!(code, 0, "stderr was: {stderr}");
    assert!(stdout.starts_with("s\n"), "expected csv, got: {stdout}");

    // An explicit --format overrides the config entry.
    let (code, stdout, _) = run(&[
        "query",
        "--config",
        config.to_str().unwrap(),
        "--inline",
        "SELECT ?s WHERE { ?s ?p ?o } LIMIT 1",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    assert!(
        stdout.trim_start().starts_with('{'),
        "expected json, got: {stdout}"
    );
}

#[test]
fn weather_analysis_without_wt_data_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("plain.csv");
    std::fs::write(
        &csv,
        "STATION,NAME,LATITUDE,LONGITUDE,DATE,TAVG\nGHCND:X,\"X\",1.0,2.0,1990-01-01,5.0\n",
    )
    .unwrap();
    let store = dir.path().join("out.nt");
    let (code, _, _) = run(&[
        "ingest",
        "--csv",
        csv.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, _, stderr) = run(&[
        "analyze",
        "weather",
        "--store",
        store.to_str().unwrap(),
        "--stations",
        "GHCND:X",
        "--years",
        "1990",
        "--output",
        dir.path().join("figs").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("WT"), "stderr was: {stderr}");
}

#[test]
fn temperature_analysis_direct_route_matches_sparql_route() {
    let dir = tempfile::tempdir().unwrap();
    let store = ingest_fixture(dir.path(), "dublin_daily.csv");
    let out_sparql = dir.path().join("via_sparql");
    let out_direct = dir.path().join("via_direct");
    let base = [
        "analyze",
        "temperature",
        "--store",
        store.to_str().unwrap(),
        "--stations",
        "GHCND:EI000003969",
        "--years",
        "1980-2019",
    ];
    let (code, _, stderr) = run(&[&base[..], &["--output", out_sparql.to_str().unwrap()]].concat());
    assert_eq!(code, 0, "stderr was: {stderr}");
    let (code, _, stderr) = run(&[
        &base[..],
        &["--output", out_direct.to_str().unwrap(), "--direct"],
    ]
    .concat());
    assert_eq!(code, 0, "stderr was: {stderr}");

    for name in ["monthly_temperature.csv", "monthly_temperature.svg"] {
        let a = std::fs::read(out_sparql.join(name)).unwrap();
        let b = std::fs::read(out_direct.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between the two routes");
    }
    let csv = std::fs::read_to_string(out_sparql.join("monthly_temperature.csv")).unwrap();
    // Header plus one row per month for the single station.
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn weather_analysis_endpoint_route_matches_local_and_oracle_counts() {
    let dir = tempfile::tempdir().unwrap();
    let store = ingest_fixture(dir.path(), "sculthorpe_daily.csv");

    let mut graph = Graph::new();
    graph
        .load_ntriples(&std::fs::read_to_string(&store).unwrap())
        .unwrap();
    let handle = serve(graph, EndpointConfig::default()).expect("endpoint starts");

    let out_local = dir.path().join("local");
    let out_http = dir.path().join("http");
    let base = [
        "analyze",
        "weather",
        "--stations",
        "GHCND:UKE00105900",
        "--years",
        "1951,1955,1959,1963",
    ];
    let (code, _, stderr) = run(&[
        &base[..],
        &[
            "--store",
            store.to_str().unwrap(),
            "--output",
            out_local.to_str().unwrap(),
        ],
    ]
    .concat());
    assert_eq!(code, 0, "stderr was: {stderr}");
    let (code, _, stderr) = run(&[
        &base[..],
        &[
            "--endpoint",
            &format!("http://{}", handle.addr()),
            "--output",
            out_http.to_str().unwrap(),
        ],
    ]
    .concat());
    assert_eq!(code, 0, "stderr was: {stderr}");

    let local_csv = std::fs::read(out_local.join("weather_distribution.csv")).unwrap();
    let http_csv = std::fs::read(out_http.join("weather_distribution.csv")).unwrap();
    assert_eq!(local_csv, http_csv, "endpoint and local routes disagree");

    // Label totals across the four years, checked against the counts the
    // fixture generator derived with its own classifier.
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(repo_root().join("fixtures/manifest.json")).unwrap(),
    )
    .unwrap();
    let expected = manifest["csv"]["sculthorpe_daily.csv"]["label_counts"]
        .as_object()
        .unwrap();
    let text = String::from_utf8(local_csv).unwrap();
    for (label, count) in expected {
        let got = text
            .lines()
            .skip(1)
            .filter(|l| l.ends_with(&format!(",{label}")))
            .count();
        assert_eq!(
            got as u64,
            count.as_u64().unwrap(),
            "label {label} count mismatch"
        );
    }
    assert_eq!(text.lines().count(), 1 + 4 * 365);
}
