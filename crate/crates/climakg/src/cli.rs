//! Command-line surface: ingest, query, serve, analyze.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 usage or parse error.
//! A `key=value` config file supplies defaults; explicit flags win.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{Datelike, NaiveDate};
use clap::{ArgAction, Args, Parser, Subcommand};

use crate::analytics::{
    box_plot_svg, box_stats_csv, distribution_csv, monthly_temperature_stats, strip_plot_svg,
    weather_distribution_with, ClassifierConfig, DayWeatherInput,
};
use crate::ca::{self, ObservationRecord, ObservationValue, StationRecord, Vocabulary};
use crate::endpoint::{serve, EndpointConfig};
use crate::noaa::{
    dedupe_observations, fetch_all, normalize_units, parse_csv, FetchSpec, UnitRegime,
};
use crate::rdf::{Datatype, Term};
use crate::sparql::{
    evaluate, parse_query, parse_results_json, results_to_csv, serialize_results_json,
    SolutionSequence,
};
use crate::store::{Graph, TriplePattern};

/// Environment variable holding the NOAA CDO API token for online fetches.
pub const TOKEN_ENV_VAR: &str = "NOAA_CDO_TOKEN";

#[derive(Debug)]
enum CliError {
    /// Bad invocation or unparseable query text: exit 2.
    Usage(String),
    /// Everything else that fails at run time: exit 1.
    Runtime(String),
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError::Usage(message.into())
    }

    fn runtime(message: impl Into<String>) -> CliError {
        CliError::Runtime(message.into())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "climakg",
    version,
    about = "Climate knowledge graph toolkit: NOAA ingestion, SPARQL querying, and analyses"
)]
struct Cli {
    /// Config file with key=value defaults (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse NOAA data, map it to triples, and write an N-Triples store.
    Ingest(IngestArgs),
    /// Evaluate a SPARQL query against a store file or a running endpoint.
    Query(QueryArgs),
    /// Serve a store file over the SPARQL protocol until interrupted.
    Serve(ServeArgs),
    /// Run one of the two shipped analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Subcommand, Debug)]
enum AnalyzeCommand {
    /// Monthly temperature box statistics per station.
    Temperature(AnalyzeArgs),
    /// Daily weather-type classification per year.
    Weather(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Daily-summaries CSV export; repeatable.
    #[arg(long, action = ArgAction::Append)]
    csv: Vec<PathBuf>,
    /// Fetch observations from the CDO API (or --fixtures) instead of CSV.
    #[arg(long)]
    fetch: bool,
    /// Output store path (.nt).
    #[arg(long)]
    store: Option<PathBuf>,
    /// Unit regime of the source data: standard, metric, or tenths.
    #[arg(long)]
    units: Option<String>,
    /// Base IRI for minted terms.
    #[arg(long)]
    base: Option<String>,
    /// CDO dataset id for --fetch.
    #[arg(long)]
    dataset: Option<String>,
    /// Comma-separated station ids for --fetch.
    #[arg(long)]
    stations: Option<String>,
    /// Comma-separated datatype codes for --fetch.
    #[arg(long)]
    datatypes: Option<String>,
    /// Start date (YYYY-MM-DD) for --fetch.
    #[arg(long)]
    start: Option<String>,
    /// End date (YYYY-MM-DD) for --fetch.
    #[arg(long)]
    end: Option<String>,
    /// Directory of saved CDO response pages; enables offline fetch.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// CDO page size for --fetch.
    #[arg(long)]
    page_size: Option<u64>,
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Store file to query.
    #[arg(long)]
    store: Option<PathBuf>,
    /// File containing the SPARQL query.
    #[arg(long)]
    query: Option<PathBuf>,
    /// Query text given directly on the command line.
    #[arg(long, conflicts_with = "query")]
    inline: Option<String>,
    /// Output format: json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Send the query to a running endpoint instead of loading the store.
    #[arg(long)]
    endpoint: Option<String>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Store file to serve.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Bind address.
    #[arg(long)]
    bind: Option<String>,
    /// Port; 0 picks an ephemeral port.
    #[arg(long)]
    port: Option<u16>,
    /// Per-query evaluation timeout in seconds.
    #[arg(long)]
    timeout_secs: Option<u64>,
    /// Result row cap per query.
    #[arg(long)]
    max_rows: Option<usize>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Store file to analyze.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Comma-separated station ids.
    #[arg(long)]
    stations: Option<String>,
    /// Years: a range like 1980-2019 or a list like 1951,1955,1959,1963.
    #[arg(long)]
    years: Option<String>,
    /// Directory for the emitted CSV and SVG files.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Gather data from a running endpoint instead of loading the store.
    #[arg(long)]
    endpoint: Option<String>,
    /// Debug escape hatch: walk the graph directly instead of via SPARQL.
    #[arg(long, conflicts_with = "endpoint")]
    direct: bool,
    /// Base IRI the store was built with.
    #[arg(long)]
    base: Option<String>,
    /// Snow rule threshold in degrees C (weather analysis only).
    #[arg(long)]
    snow_max_temp: Option<f64>,
}

/// Runs the CLI and returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return report(e),
    };
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(args, &config),
        Command::Query(args) => cmd_query(args, &config),
        Command::Serve(args) => cmd_serve(args, &config),
        Command::Analyze(AnalyzeCommand::Temperature(args)) => {
            cmd_analyze_temperature(args, &config)
        }
        Command::Analyze(AnalyzeCommand::Weather(args)) => cmd_analyze_weather(args, &config),
    };
    match result {
        Ok(()) => 0,
        Err(e) => report(e),
    }
}

fn report(error: CliError) -> i32 {
    match error {
        CliError::Usage(message) => {
            eprintln!("error: {message}");
            2
        }
        CliError::Runtime(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

/// `key=value` per line; `#` starts a comment. Unknown keys warn but do not fail.
type ConfigMap = HashMap<String, String>;

const CONFIG_KEYS: &[&str] = &[
    "store", "base", "units", "output", "endpoint", "bind", "port", "format", "fixtures",
    "dataset", "stations", "years",
];

fn load_config(path: Option<&Path>) -> CliResult<ConfigMap> {
    let mut map = ConfigMap::new();
    let Some(path) = path else {
        return Ok(map);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "config {}:{}: expected key=value",
                path.display(),
                idx + 1
            )));
        };
        let key = key.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            log::warn!("config {}: unknown key {key:?}", path.display());
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Flag value if present, else the config entry under `key`.
fn pick<T: Clone>(
    flag: &Option<T>,
    config: &ConfigMap,
    key: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> Option<T> {
    if let Some(v) = flag {
        return Some(v.clone());
    }
    config.get(key).and_then(|raw| parse(raw))
}

fn pick_string(flag: &Option<String>, config: &ConfigMap, key: &str) -> Option<String> {
    pick(flag, config, key, |raw| Some(raw.to_string()))
}

fn pick_path(flag: &Option<PathBuf>, config: &ConfigMap, key: &str) -> Option<PathBuf> {
    pick(flag, config, key, |raw| Some(PathBuf::from(raw)))
}

fn require<T>(value: Option<T>, what: &str) -> CliResult<T> {
    value.ok_or_else(|| {
        CliError::usage(format!(
            "missing {what}; pass the flag or set it in the config file"
        ))
    })
}

fn vocabulary(base: Option<String>) -> CliResult<Vocabulary> {
    match base {
        Some(b) => Vocabulary::new(b).map_err(|e| CliError::usage(e.to_string())),
        None => Ok(Vocabulary::default()),
    }
}

fn load_graph(path: &Path) -> CliResult<Graph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::runtime(format!("cannot read store {}: {e}", path.display())))?;
    let mut graph = Graph::new();
    let turtle = path.extension().is_some_and(|ext| ext == "ttl");
    let loaded = if turtle {
        graph.load_turtle(&text)
    } else {
        graph.load_ntriples(&text)
    };
    loaded.map_err(|e| CliError::runtime(format!("cannot load store {}: {e}", path.display())))?;
    Ok(graph)
}

fn split_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Accepts `1980-2019`, `1951,1955,1963`, or a single year.
fn parse_years(raw: &str) -> CliResult<Vec<i32>> {
    let bad =
        |d: &std::num::ParseIntError| CliError::usage(format!("invalid year list {raw:?}: {d}"));
    if let Some((a, b)) = raw.split_once('-') {
        let start: i32 = a.trim().parse().map_err(|e| bad(&e))?;
        let end: i32 = b.trim().parse().map_err(|e| bad(&e))?;
        if start > end {
            return Err(CliError::usage(format!("year range {raw:?} is reversed")));
        }
        return Ok((start..=end).collect());
    }
    let mut years = Vec::new();
    for part in split_list(raw) {
        years.push(part.parse().map_err(|e| bad(&e))?);
    }
    if years.is_empty() {
        return Err(CliError::usage("year list is empty".to_string()));
    }
    Ok(years)
}

fn parse_date(raw: &str, what: &str) -> CliResult<NaiveDate> {
    raw.parse()
        .map_err(|e| CliError::usage(format!("invalid {what} date {raw:?}: {e}")))
}

fn cmd_ingest(args: IngestArgs, config: &ConfigMap) -> CliResult<()> {
    let store_path = require(pick_path(&args.store, config, "store"), "--store")?;
    let units = match pick_string(&args.units, config, "units") {
        Some(raw) => raw
            .parse::<UnitRegime>()
            .map_err(|e| CliError::usage(e.to_string()))?,
        None => UnitRegime::Metric,
    };
    let vocab = vocabulary(pick_string(&args.base, config, "base"))?;

    let mut stations: Vec<StationRecord> = Vec::new();
    let mut observations: Vec<ObservationRecord> = Vec::new();
    for path in &args.csv {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
        let (s, o) =
            parse_csv(&text).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        for station in s {
            if !stations
                .iter()
                .any(|x| x.station_id() == station.station_id())
            {
                stations.push(station);
            }
        }
        observations.extend(o);
    }

    if args.fetch {
        let dataset = require(pick_string(&args.dataset, config, "dataset"), "--dataset")?;
        let start = parse_date(&require(args.start.clone(), "--start")?, "start")?;
        let end = parse_date(&require(args.end.clone(), "--end")?, "end")?;
        let mut spec = FetchSpec::new(dataset, start, end);
        if let Some(raw) = pick_string(&args.stations, config, "stations") {
            spec.stations = split_list(&raw);
        }
        if let Some(raw) = args.datatypes.as_deref() {
            spec.datatypes = split_list(raw);
        }
        if let Some(size) = args.page_size {
            spec.page_size = size;
        }
        spec.fixture_dir = pick_path(&args.fixtures, config, "fixtures");
        spec.token = std::env::var(TOKEN_ENV_VAR).ok();
        observations.extend(fetch_all(&spec).map_err(|e| CliError::runtime(e.to_string()))?);
    } else if args.csv.is_empty() {
        return Err(CliError::usage("nothing to ingest; pass --csv or --fetch"));
    }

    let observations: Vec<ObservationRecord> = dedupe_observations(observations)
        .iter()
        .map(|o| normalize_units(o, units))
        .collect();

    let mut graph = Graph::new();
    for station in &stations {
        for triple in ca::station_to_triples(&vocab, station) {
            graph.insert(&triple);
        }
    }
    for observation in &observations {
        let triples = ca::observation_to_triples(&vocab, observation)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        for triple in triples {
            graph.insert(&triple);
        }
    }

    if let Some(parent) = store_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::runtime(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(&store_path, graph.serialize_ntriples())
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", store_path.display())))?;
    println!(
        "stations={} observations={} triples={}",
        stations.len(),
        observations.len(),
        graph.len()
    );
    println!("wrote {}", store_path.display());
    Ok(())
}

/// Where query solutions come from: a loaded store or a running endpoint.
enum QueryRunner {
    Local(Graph),
    Http(String),
}

impl QueryRunner {
    fn open(store: Option<PathBuf>, endpoint: Option<String>) -> CliResult<QueryRunner> {
        if let Some(url) = endpoint {
            return Ok(QueryRunner::Http(url));
        }
        let path = require(store, "--store")?;
        Ok(QueryRunner::Local(load_graph(&path)?))
    }

    fn run(&self, text: &str) -> CliResult<SolutionSequence> {
        match self {
            QueryRunner::Local(graph) => {
                let query = parse_query(text).map_err(|e| CliError::usage(e.to_string()))?;
                Ok(evaluate(&query, graph))
            }
            QueryRunner::Http(url) => {
                let body = http_query(url, text)?;
                parse_results_json(&body)
                    .map_err(|e| CliError::runtime(format!("endpoint returned bad results: {e}")))
            }
        }
    }
}

fn http_query(endpoint: &str, text: &str) -> CliResult<String> {
    let url = if endpoint.contains("/sparql") {
        endpoint.to_string()
    } else {
        format!("{}/sparql", endpoint.trim_end_matches('/'))
    };
    let response = ureq::post(&url)
        .set("Content-Type", "application/sparql-query")
        .timeout(Duration::from_secs(30))
        .send_string(text);
    match response {
        Ok(resp) => resp
            .into_string()
            .map_err(|e| CliError::runtime(format!("cannot read endpoint response: {e}"))),
        Err(ureq::Error::Status(status, resp)) => {
            let body = resp.into_string().unwrap_or_default();
            // The endpoint signals malformed queries with 400; keep the
            // usage/runtime split consistent with local evaluation.
            if status == 400 && body.contains("parse error") {
                Err(CliError::usage(body))
            } else {
                Err(CliError::runtime(format!(
                    "endpoint returned {status}: {body}"
                )))
            }
        }
        Err(e) => Err(CliError::runtime(format!("cannot reach endpoint: {e}"))),
    }
}

fn cmd_query(args: QueryArgs, config: &ConfigMap) -> CliResult<()> {
    let text = match (&args.query, &args.inline) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(text)) => text.clone(),
        (None, None) => return Err(CliError::usage("pass --query FILE or --inline TEXT")),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let format = pick_string(&args.format, config, "format").unwrap_or_else(|| "json".to_string());
    let runner = QueryRunner::open(
        pick_path(&args.store, config, "store"),
        pick_string(&args.endpoint, config, "endpoint"),
    )?;
    let solutions = runner.run(&text)?;
    match format.as_str() {
        "json" => println!("{}", serialize_results_json(&solutions)),
        "csv" => print!("{}", results_to_csv(&solutions)),
        other => {
            return Err(CliError::usage(format!(
                "unknown format {other:?}; use json or csv"
            )))
        }
    }
    Ok(())
}

fn cmd_serve(args: ServeArgs, config: &ConfigMap) -> CliResult<()> {
    let store_path = require(pick_path(&args.store, config, "store"), "--store")?;
    let graph = load_graph(&store_path)?;
    let mut endpoint_config = EndpointConfig::default();
    if let Some(bind) = pick_string(&args.bind, config, "bind") {
        endpoint_config.bind = bind;
    }
    endpoint_config.port = pick(&args.port, config, "port", |raw| raw.parse().ok()).unwrap_or(3030);
    if let Some(secs) = args.timeout_secs {
        endpoint_config.timeout = Duration::from_secs(secs);
    }
    if let Some(max_rows) = args.max_rows {
        endpoint_config.max_rows = max_rows;
    }
    let handle = serve(graph, endpoint_config).map_err(|e| CliError::runtime(e.to_string()))?;
    println!("listening on http://{}", handle.addr());
    loop {
        std::thread::park();
    }
}

/// Query text for all observations of one station within a year window.
fn observations_query(vocab: &Vocabulary, station_id: &str, years: &RangeInclusive<i32>) -> String {
    format!(
        "PREFIX ca: <{ca}>\n\
         SELECT ?date ?dt ?value WHERE {{\n\
           ?obs ca:generatedBy <{station}> ;\n\
                ca:observationDate ?date ;\n\
                ca:withDataType ?dt ;\n\
                ca:hasValue ?value .\n\
           FILTER(YEAR(?date) >= {start} && YEAR(?date) <= {end})\n\
         }}\n\
         ORDER BY ?date ?dt",
        ca = vocab.ca_namespace(),
        station = vocab.mint_station_iri(station_id).as_str(),
        start = years.start(),
        end = years.end(),
    )
}

/// Turns solution rows of ?date ?dt ?value into observation records.
fn records_from_solutions(
    solutions: &SolutionSequence,
    vocab: &Vocabulary,
    station_id: &str,
) -> CliResult<Vec<ObservationRecord>> {
    let noaa_ns = vocab.noaa_namespace();
    let mut records = Vec::new();
    for row in &solutions.rows {
        let (Some(date_term), Some(dt_term), Some(value_term)) =
            (row.get("date"), row.get("dt"), row.get("value"))
        else {
            continue;
        };
        let Some(date) = date_term.as_literal().and_then(|l| l.as_date()) else {
            continue;
        };
        let code = match dt_term {
            Term::Iri(iri) => match iri.as_str().strip_prefix(&noaa_ns) {
                Some(code) => code.to_string(),
                None => continue,
            },
            _ => continue,
        };
        let Some(literal) = value_term.as_literal() else {
            continue;
        };
        let value = match literal.datatype() {
            Datatype::Boolean => match literal.as_bool() {
                Some(flag) => ObservationValue::Flag(flag),
                None => continue,
            },
            _ => match literal.as_f64() {
                Some(v) => ObservationValue::Numeric(v),
                None => continue,
            },
        };
        let record = ObservationRecord::new(station_id, date, &code, value)
            .map_err(|e| CliError::runtime(format!("store row does not map back: {e}")))?;
        records.push(record);
    }
    Ok(records)
}

/// Debug path: reads observations straight off the graph indexes.
fn records_direct(
    graph: &Graph,
    vocab: &Vocabulary,
    station_id: &str,
    years: &RangeInclusive<i32>,
) -> CliResult<Vec<ObservationRecord>> {
    let station_iri = vocab.mint_station_iri(station_id);
    let generated_by = graph.match_pattern(&TriplePattern {
        subject: None,
        predicate: Some(Term::Iri(vocab.prop_generated_by())),
        object: Some(Term::Iri(station_iri)),
    });
    let mut records = Vec::new();
    for link in generated_by {
        let subject = link.subject.as_term();
        let one = |predicate: crate::rdf::Iri| -> Option<Term> {
            graph
                .match_pattern(&TriplePattern {
                    subject: Some(subject.clone()),
                    predicate: Some(Term::Iri(predicate)),
                    object: None,
                })
                .into_iter()
                .next()
                .map(|t| t.object)
        };
        let Some(date) = one(vocab.prop_observation_date())
            .and_then(|t| t.as_literal().and_then(|l| l.as_date()))
        else {
            continue;
        };
        if !years.contains(&date.year()) {
            continue;
        }
        let mut row = BTreeMap::new();
        row.insert(
            "date".to_string(),
            Term::Literal(crate::rdf::Literal::date(date)),
        );
        if let Some(dt) = one(vocab.prop_with_datatype()) {
            row.insert("dt".to_string(), dt);
        }
        if let Some(value) = one(vocab.prop_has_value()) {
            row.insert("value".to_string(), value);
        }
        let solutions = SolutionSequence {
            variables: vec!["date".to_string(), "dt".to_string(), "value".to_string()],
            rows: vec![row],
        };
        records.extend(records_from_solutions(&solutions, vocab, station_id)?);
    }
    records.sort_by_key(|a| (a.date(), a.datatype_code().to_string()));
    Ok(records)
}

struct AnalysisContext {
    vocab: Vocabulary,
    stations: Vec<String>,
    years: Vec<i32>,
    output: PathBuf,
    source: AnalysisSource,
}

enum AnalysisSource {
    Sparql(QueryRunner),
    Direct(Graph),
}

impl AnalysisContext {
    fn prepare(args: &AnalyzeArgs, config: &ConfigMap) -> CliResult<AnalysisContext> {
        let vocab = vocabulary(pick_string(&args.base, config, "base"))?;
        let stations = split_list(&require(
            pick_string(&args.stations, config, "stations"),
            "--stations",
        )?);
        if stations.is_empty() {
            return Err(CliError::usage("station list is empty"));
        }
        let years = parse_years(&require(
            pick_string(&args.years, config, "years"),
            "--years",
        )?)?;
        let output = require(pick_path(&args.output, config, "output"), "--output")?;
        let store = pick_path(&args.store, config, "store");
        let endpoint = pick_string(&args.endpoint, config, "endpoint");
        let source = if args.direct {
            let path = require(store, "--store")?;
            AnalysisSource::Direct(load_graph(&path)?)
        } else {
            AnalysisSource::Sparql(QueryRunner::open(store, endpoint)?)
        };
        Ok(AnalysisContext {
            vocab,
            stations,
            years,
            output,
            source,
        })
    }

    fn station_records(
        &self,
        station_id: &str,
        years: &RangeInclusive<i32>,
    ) -> CliResult<Vec<ObservationRecord>> {
        match &self.source {
            AnalysisSource::Sparql(runner) => {
                let text = observations_query(&self.vocab, station_id, years);
                let solutions = runner.run(&text)?;
                records_from_solutions(&solutions, &self.vocab, station_id)
            }
            AnalysisSource::Direct(graph) => records_direct(graph, &self.vocab, station_id, years),
        }
    }

    fn write(&self, name: &str, content: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.output).map_err(|e| {
            CliError::runtime(format!("cannot create {}: {e}", self.output.display()))
        })?;
        let path = self.output.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

fn cmd_analyze_temperature(args: AnalyzeArgs, config: &ConfigMap) -> CliResult<()> {
    let context = AnalysisContext::prepare(&args, config)?;
    let min = *context.years.iter().min().expect("years are non-empty");
    let max = *context.years.iter().max().expect("years are non-empty");
    let range = min..=max;
    let mut groups = Vec::new();
    for station in &context.stations {
        let records = context.station_records(station, &range)?;
        match monthly_temperature_stats(&records, station, range.clone()) {
            Ok(stats) => groups.push((station.clone(), stats)),
            Err(e) => eprintln!("warning: {station}: {e}"),
        }
    }
    if groups.is_empty() {
        return Err(CliError::runtime(
            "no station produced temperature statistics".to_string(),
        ));
    }
    let csv = box_stats_csv(&groups).map_err(|e| CliError::runtime(e.to_string()))?;
    let svg = box_plot_svg(&groups).map_err(|e| CliError::runtime(e.to_string()))?;
    let csv_path = context.write("monthly_temperature.csv", &csv)?;
    let svg_path = context.write("monthly_temperature.svg", &svg)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    for (station, _) in &groups {
        println!("ok {station}");
    }
    Ok(())
}

/// Builds classifier inputs for one station from its observation records.
fn day_inputs(records: &[ObservationRecord]) -> Vec<DayWeatherInput> {
    let mut days: BTreeMap<NaiveDate, DayWeatherInput> = BTreeMap::new();
    let mut tmax: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    let mut tmin: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for record in records {
        let day = days
            .entry(record.date())
            .or_insert_with(|| DayWeatherInput::new(record.date()));
        match (record.datatype_code(), record.value()) {
            ("WT16", ObservationValue::Flag(f)) => day.rain_flag = f,
            ("WT18", ObservationValue::Flag(f)) => day.snow_flag = f,
            ("WT01", ObservationValue::Flag(f)) | ("WT02", ObservationValue::Flag(f)) => {
                day.fog_flag = day.fog_flag || f;
            }
            ("WT08", ObservationValue::Flag(f)) => day.haze_flag = f,
            ("WT14", ObservationValue::Flag(_)) => {}
            ("PRCP", ObservationValue::Numeric(v)) => day.precipitation = Some(v),
            ("TAVG", ObservationValue::Numeric(v)) => day.temperature = Some(v),
            ("TMAX", ObservationValue::Numeric(v)) => {
                tmax.insert(record.date(), v);
            }
            ("TMIN", ObservationValue::Numeric(v)) => {
                tmin.insert(record.date(), v);
            }
            _ => {}
        }
    }
    for (date, day) in days.iter_mut() {
        if day.temperature.is_none() {
            if let (Some(max), Some(min)) = (tmax.get(date), tmin.get(date)) {
                day.temperature = Some((max + min) / 2.0);
            }
        }
    }
    days.into_values().collect()
}

fn cmd_analyze_weather(args: AnalyzeArgs, config: &ConfigMap) -> CliResult<()> {
    let context = AnalysisContext::prepare(&args, config)?;
    if context.stations.len() != 1 {
        return Err(CliError::usage(
            "weather analysis expects exactly one station".to_string(),
        ));
    }
    let station = &context.stations[0];
    let classifier = ClassifierConfig {
        snow_max_temp: args.snow_max_temp.unwrap_or_default(),
    };
    let mut records = Vec::new();
    for &year in &context.years {
        records.extend(context.station_records(station, &(year..=year))?);
    }
    let flagged = records
        .iter()
        .filter(|r| matches!(r.value(), ObservationValue::Flag(_)))
        .count();
    if flagged == 0 {
        return Err(CliError::runtime(format!(
            "{station}: no weather-type (WT) observations in the requested years"
        )));
    }
    let days = day_inputs(&records);
    let series = weather_distribution_with(&days, &context.years, &classifier);
    let csv = distribution_csv(&series).map_err(|e| CliError::runtime(e.to_string()))?;
    let svg = strip_plot_svg(&series).map_err(|e| CliError::runtime(e.to_string()))?;
    let csv_path = context.write("weather_distribution.csv", &csv)?;
    let svg_path = context.write("weather_distribution.svg", &svg)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    println!("ok {station}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_parsing_accepts_ranges_and_lists() {
        assert_eq!(parse_years("1980-1982").unwrap(), vec![1980, 1981, 1982]);
        assert_eq!(
            parse_years("1951,1955,1959,1963").unwrap(),
            vec![1951, 1955, 1959, 1963]
        );
        assert_eq!(parse_years("1951").unwrap(), vec![1951]);
        assert!(parse_years("2019-1980").is_err());
        assert!(parse_years("abc").is_err());
    }

    #[test]
    fn config_file_fills_in_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        std::fs::write(&path, "store = /tmp/x.nt # comment\nformat=csv\n\n# note\n").unwrap();
        let config = load_config(Some(&path)).unwrap();
        assert_eq!(
            pick_path(&None, &config, "store"),
            Some(PathBuf::from("/tmp/x.nt"))
        );
        assert_eq!(
            pick_string(&Some("json".to_string()), &config, "format"),
            Some("json".to_string())
        );
        assert_eq!(pick_string(&None, &config, "missing"), None);
    }

    #[test]
    fn malformed_config_line_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        std::fs::write(&path, "just-a-word\n").unwrap();
        assert!(matches!(load_config(Some(&path)), Err(CliError::Usage(_))));
    }

    #[test]
    fn observation_query_round_trips_through_the_engine() {
        let vocab = Vocabulary::default();
        let station = StationRecord::new("GHCND:X", "X", 1.0, 2.0).unwrap();
        let record = ObservationRecord::new(
            "GHCND:X",
            "1990-06-01".parse().unwrap(),
            "TAVG",
            ObservationValue::Numeric(14.5),
        )
        .unwrap();
        let mut graph = Graph::new();
        for t in ca::station_to_triples(&vocab, &station) {
            graph.insert(&t);
        }
        for t in ca::observation_to_triples(&vocab, &record).unwrap() {
            graph.insert(&t);
        }
        let text = observations_query(&vocab, "GHCND:X", &(1980..=2019));
        let query = parse_query(&text).unwrap();
        let solutions = evaluate(&query, &graph);
        let records = records_from_solutions(&solutions, &vocab, "GHCND:X").unwrap();
        assert_eq!(records, vec![record.clone()]);
        let direct = records_direct(&graph, &vocab, "GHCND:X", &(1980..=2019)).unwrap();
        assert_eq!(direct, vec![record]);
    }

    #[test]
    fn day_inputs_merge_flags_and_fallback_temperature() {
        let date: NaiveDate = "1951-02-03".parse().unwrap();
        let mk = |code: &str, value: ObservationValue| {
            ObservationRecord::new("GHCND:X", date, code, value).unwrap()
        };
        let records = vec![
            mk("WT16", ObservationValue::Flag(true)),
            mk("WT02", ObservationValue::Flag(true)),
            mk("PRCP", ObservationValue::Numeric(4.0)),
            mk("TMAX", ObservationValue::Numeric(8.0)),
            mk("TMIN", ObservationValue::Numeric(2.0)),
        ];
        let days = day_inputs(&records);
        assert_eq!(days.len(), 1);
        let day = &days[0];
        assert!(day.rain_flag && day.fog_flag);
        assert!(!day.snow_flag && !day.haze_flag);
        assert_eq!(day.precipitation, Some(4.0));
        assert_eq!(day.temperature, Some(5.0));
    }
}
