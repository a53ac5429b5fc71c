//! Read-only SPARQL protocol endpoint over a frozen graph.
//!
//! Supports the query operation only: GET /sparql?query=... and POST /sparql
//! with either a raw `application/sparql-query` body or a form-encoded
//! `query=` field. Responses are always SPARQL JSON results. A readiness
//! probe lives at GET /health. Malformed input maps to 4xx statuses, never
//! a crash or a 5xx.

use std::io::Read;
use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use thiserror::Error;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::sparql::{evaluate_with_limits, parse_query, serialize_results_json, EvalError, Limits};
use crate::store::Graph;

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("cannot bind {addr}: {message}")]
    Bind { addr: String, message: String },
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub bind: String,
    /// Port 0 asks the OS for an ephemeral port; see `ServiceHandle::addr`.
    pub port: u16,
    pub max_query_len: usize,
    pub timeout: Duration,
    pub max_rows: usize,
    pub workers: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            bind: "127.0.0.1".to_string(),
            port: 0,
            max_query_len: 64 * 1024,
            timeout: Duration::from_secs(10),
            max_rows: 100_000,
            workers: 4,
        }
    }
}

impl EndpointConfig {
    fn validate(&self) -> Result<(), EndpointError> {
        if self.max_query_len == 0 {
            return Err(EndpointError::Config(
                "max query length must be positive".into(),
            ));
        }
        if self.timeout.is_zero() {
            return Err(EndpointError::Config("timeout must be positive".into()));
        }
        if self.max_rows == 0 {
            return Err(EndpointError::Config("max rows must be positive".into()));
        }
        if self.workers == 0 {
            return Err(EndpointError::Config(
                "worker count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Running endpoint. Dropping the handle (or calling `shutdown`) stops the
/// listener; in-flight requests finish first.
pub struct ServiceHandle {
    addr: SocketAddr,
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
    requests: Arc<AtomicU64>,
}

impl ServiceHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Number of requests answered so far.
    pub fn requests_served(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    pub fn shutdown(self) {}
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        // unblock() wakes a single blocked recv(), so fire one per worker.
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for worker in self.workers.drain(..) {
            let _ = worker.join();
        }
    }
}

pub fn serve(graph: Graph, config: EndpointConfig) -> Result<ServiceHandle, EndpointError> {
    config.validate()?;
    let addr = format!("{}:{}", config.bind, config.port);
    let server = Arc::new(Server::http(&addr).map_err(|e| EndpointError::Bind {
        addr: addr.clone(),
        message: e.to_string(),
    })?);
    let local = match server.server_addr() {
        tiny_http::ListenAddr::IP(a) => a,
        #[cfg(unix)]
        tiny_http::ListenAddr::Unix(_) => {
            return Err(EndpointError::Config(
                "unix sockets are not supported".into(),
            ))
        }
    };
    let graph = Arc::new(graph);
    let requests = Arc::new(AtomicU64::new(0));
    let mut workers = Vec::new();
    for _ in 0..config.workers {
        let server = Arc::clone(&server);
        let graph = Arc::clone(&graph);
        let config = config.clone();
        let requests = Arc::clone(&requests);
        workers.push(std::thread::spawn(move || {
            while let Ok(request) = server.recv() {
                requests.fetch_add(1, Ordering::Relaxed);
                handle_request(request, &graph, &config);
            }
        }));
    }
    Ok(ServiceHandle {
        addr: local,
        server,
        workers,
        requests,
    })
}

struct Reply {
    status: u16,
    content_type: &'static str,
    body: String,
}

impl Reply {
    fn text(status: u16, body: impl Into<String>) -> Reply {
        Reply {
            status,
            content_type: "text/plain; charset=utf-8",
            body: body.into(),
        }
    }

    fn results(body: String) -> Reply {
        Reply {
            status: 200,
            content_type: "application/sparql-results+json",
            body,
        }
    }
}

fn handle_request(mut request: Request, graph: &Arc<Graph>, config: &EndpointConfig) {
    let reply = catch_unwind(AssertUnwindSafe(|| route(&mut request, graph, config)))
        .unwrap_or_else(|_| Reply::text(400, "request handling failed"));
    let header = Header::from_bytes("Content-Type", reply.content_type)
        .expect("static content types are valid header values");
    let response = Response::from_string(reply.body)
        .with_status_code(reply.status)
        .with_header(header);
    // A client that hung up is not our problem.
    let _ = request.respond(response);
}

fn route(request: &mut Request, graph: &Arc<Graph>, config: &EndpointConfig) -> Reply {
    let url = request.url().to_string();
    let (path, raw_query) = match url.split_once('?') {
        Some((p, q)) => (p, Some(q.to_string())),
        None => (url.as_str(), None),
    };
    match (request.method(), path) {
        (Method::Get, "/health") => Reply::text(200, "ok"),
        (_, "/health") => Reply::text(405, "only GET is supported on /health"),
        (Method::Get, "/sparql") => {
            if let Some(reply) = check_accept(request) {
                return reply;
            }
            match raw_query.as_deref().and_then(|qs| form_field(qs, "query")) {
                Some(q) => run_query(&q, graph, config),
                None => Reply::text(400, "missing query parameter"),
            }
        }
        (Method::Post, "/sparql") => {
            if let Some(reply) = check_accept(request) {
                return reply;
            }
            let content_type = header_value(request, "Content-Type")
                .unwrap_or_default()
                .split(';')
                .next()
                .unwrap_or("")
                .trim()
                .to_ascii_lowercase();
            let mut body = String::new();
            let limit = config.max_query_len as u64;
            // Read one byte past the limit so oversized bodies are detected.
            if request
                .as_reader()
                .take(limit + 1)
                .read_to_string(&mut body)
                .is_err()
            {
                return Reply::text(400, "request body is not valid UTF-8");
            }
            if body.len() as u64 > limit {
                return Reply::text(400, "query text exceeds the configured length limit");
            }
            match content_type.as_str() {
                "application/sparql-query" => run_query(&body, graph, config),
                "application/x-www-form-urlencoded" => match form_field(&body, "query") {
                    Some(q) => run_query(&q, graph, config),
                    None => Reply::text(400, "missing query field in form body"),
                },
                other => Reply::text(400, format!("unsupported content type: {other:?}")),
            }
        }
        (_, "/sparql") => Reply::text(405, "only GET and POST are supported on /sparql"),
        _ => Reply::text(404, "unknown path; try /sparql or /health"),
    }
}

/// 406 unless the Accept header admits SPARQL JSON results.
fn check_accept(request: &Request) -> Option<Reply> {
    let accept = header_value(request, "Accept")?;
    let ok = accept.split(',').any(|entry| {
        let media = entry.split(';').next().unwrap_or("").trim();
        matches!(
            media,
            "application/sparql-results+json" | "application/json" | "application/*" | "*/*"
        )
    });
    if ok {
        None
    } else {
        Some(Reply::text(
            406,
            "only application/sparql-results+json is produced",
        ))
    }
}

fn header_value(request: &Request, name: &str) -> Option<String> {
    request
        .headers()
        .iter()
        .find(|h| h.field.as_str().as_str().eq_ignore_ascii_case(name))
        .map(|h| h.value.as_str().to_string())
}

fn form_field(encoded: &str, name: &str) -> Option<String> {
    url::form_urlencoded::parse(encoded.as_bytes())
        .find(|(k, _)| k == name)
        .map(|(_, v)| v.into_owned())
}

fn run_query(text: &str, graph: &Arc<Graph>, config: &EndpointConfig) -> Reply {
    if text.len() > config.max_query_len {
        return Reply::text(400, "query text exceeds the configured length limit");
    }
    let query = match parse_query(text) {
        Ok(q) => q,
        Err(e) => return Reply::text(400, format!("query parse error: {e}")),
    };
    let limits = Limits {
        deadline: Some(Instant::now() + config.timeout),
        max_rows: Some(config.max_rows),
    };
    match evaluate_with_limits(&query, graph, limits) {
        Ok(solutions) => Reply::results(serialize_results_json(&solutions)),
        Err(EvalError::Timeout) => Reply::text(400, "query evaluation exceeded the time limit"),
        Err(EvalError::RowBudget { max_rows }) => Reply::text(
            400,
            format!("query evaluation exceeded the row limit of {max_rows}"),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Iri, Literal, Triple};

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn small_graph() -> Graph {
        let mut g = Graph::new();
        for i in 0..5 {
            g.insert(&Triple::new(
                iri(&format!("http://example.org/s{i}")),
                iri("http://example.org/p"),
                Literal::integer(i),
            ));
        }
        g
    }

    fn start(graph: Graph) -> ServiceHandle {
        serve(graph, EndpointConfig::default()).unwrap()
    }

    fn status_body(result: Result<ureq::Response, ureq::Error>) -> (u16, String) {
        match result {
            Ok(resp) => (resp.status(), resp.into_string().unwrap()),
            Err(ureq::Error::Status(status, resp)) => (status, resp.into_string().unwrap()),
            Err(e) => panic!("transport error: {e}"),
        }
    }

    fn get(handle: &ServiceHandle, path_and_query: &str) -> (u16, String) {
        status_body(ureq::get(&format!("http://{}{}", handle.addr(), path_and_query)).call())
    }

    #[test]
    fn health_probe_responds_ok() {
        let handle = start(Graph::new());
        let (status, body) = get(&handle, "/health");
        assert_eq!((status, body.as_str()), (200, "ok"));
        assert!(handle.requests_served() >= 1);
    }

    #[test]
    fn get_query_on_empty_store_returns_no_bindings() {
        let handle = start(Graph::new());
        let (status, body) = get(
            &handle,
            "/sparql?query=SELECT%20%3Fs%20WHERE%20%7B%3Fs%20%3Fp%20%3Fo%7D",
        );
        assert_eq!(status, 200);
        assert_eq!(body, r#"{"head":{"vars":["s"]},"results":{"bindings":[]}}"#);
    }

    #[test]
    fn parse_failure_is_a_400_with_diagnostic() {
        let handle = start(Graph::new());
        let (status, body) = get(&handle, "/sparql?query=SELECT%20(");
        assert_eq!(status, 400);
        assert!(body.contains("parse error"), "body: {body}");
    }

    #[test]
    fn post_raw_query_matches_in_process_evaluation() {
        let graph = small_graph();
        let text = "SELECT ?s ?v WHERE { ?s <http://example.org/p> ?v } ORDER BY ?v";
        let local = crate::sparql::evaluate(&parse_query(text).unwrap(), &graph);
        let expected = serialize_results_json(&local);
        let handle = start(graph);
        let (status, body) = status_body(
            ureq::post(&format!("http://{}/sparql", handle.addr()))
                .set("Content-Type", "application/sparql-query")
                .send_string(text),
        );
        assert_eq!(status, 200);
        assert_eq!(body, expected);
    }

    #[test]
    fn post_form_encoded_query_works() {
        let handle = start(small_graph());
        let (status, body) = status_body(
            ureq::post(&format!("http://{}/sparql", handle.addr()))
                .set("Content-Type", "application/x-www-form-urlencoded")
                .send_string("query=SELECT%20%3Fs%20WHERE%20%7B%20%3Fs%20%3Fp%20%3Fo%20%7D"),
        );
        assert_eq!(status, 200);
        assert!(body.contains("\"bindings\""));
    }

    #[test]
    fn unknown_path_is_404_and_bad_method_is_405() {
        let handle = start(Graph::new());
        let (status, _) = get(&handle, "/nope");
        assert_eq!(status, 404);
        let (status, _) =
            status_body(ureq::delete(&format!("http://{}/sparql", handle.addr())).call());
        assert_eq!(status, 405);
    }

    #[test]
    fn unacceptable_accept_header_is_406() {
        let handle = start(Graph::new());
        let (status, _) = status_body(
            ureq::get(&format!(
                "http://{}/sparql?query=SELECT%20%3Fs%20WHERE%20%7B%3Fs%20%3Fp%20%3Fo%7D",
                handle.addr()
            ))
            .set("Accept", "text/html")
            .call(),
        );
        assert_eq!(status, 406);
    }

    #[test]
    fn oversized_query_is_rejected() {
        let config = EndpointConfig {
            max_query_len: 64,
            ..EndpointConfig::default()
        };
        let handle = serve(Graph::new(), config).unwrap();
        let long = format!("SELECT ?s WHERE {{ ?s ?p {:?} }}", "x".repeat(200));
        let (status, body) = status_body(
            ureq::post(&format!("http://{}/sparql", handle.addr()))
                .set("Content-Type", "application/sparql-query")
                .send_string(&long),
        );
        assert_eq!(status, 400);
        assert!(body.contains("length limit"), "body: {body}");
    }

    #[test]
    fn row_limit_breach_is_a_400() {
        let config = EndpointConfig {
            max_rows: 2,
            ..EndpointConfig::default()
        };
        let handle = serve(small_graph(), config).unwrap();
        let (status, body) = get(
            &handle,
            "/sparql?query=SELECT%20%3Fs%20WHERE%20%7B%3Fs%20%3Fp%20%3Fo%7D",
        );
        assert_eq!(status, 400);
        assert!(body.contains("row limit"), "body: {body}");
    }

    #[test]
    fn concurrent_identical_queries_agree() {
        let handle = Arc::new(start(small_graph()));
        let query = "/sparql?query=SELECT%20%3Fs%20%3Fv%20WHERE%20%7B%3Fs%20%3Fp%20%3Fv%7D%20ORDER%20BY%20%3Fv";
        let mut threads = Vec::new();
        for _ in 0..8 {
            let handle = Arc::clone(&handle);
            let query = query.to_string();
            threads.push(std::thread::spawn(move || get(&handle, &query)));
        }
        let mut bodies = Vec::new();
        for t in threads {
            let (status, body) = t.join().unwrap();
            assert_eq!(status, 200);
            bodies.push(body);
        }
        assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn shutdown_closes_the_listener() {
        let handle = start(Graph::new());
        let addr = handle.addr();
        handle.shutdown();
        let result = ureq::get(&format!("http://{addr}/health"))
            .timeout(Duration::from_millis(500))
            .call();
        assert!(result.is_err());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let config = EndpointConfig {
            max_rows: 0,
            ..EndpointConfig::default()
        };
        assert!(matches!(
            serve(Graph::new(), config),
            Err(EndpointError::Config(_))
        ));
    }
}
