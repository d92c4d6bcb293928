use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use rootbias_lmfdb::{validate_delta, Cache, Client, ClientConfig, DataSource, LmfdbError};

/// Serves `responses` in order, one per connection, and records each request line.
fn serve(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            log.lock().unwrap().push(line.trim().to_owned());
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                if header == "\r\n" || header.is_empty() {
                    break;
                }
            }
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (addr, seen)
}

fn client(base_url: String, dir: &std::path::Path) -> Client {
    let config = ClientConfig {
        base_url,
        request_delay: Duration::from_millis(0),
        timeout: Duration::from_secs(5),
        offline: false,
        use_bundled: false,
    };
    Client::new(config, Cache::new(dir))
}

const LEVEL_37: &str = r#"{"data": [
    {"label": "37.2.a.a", "level": 37, "weight": 2, "dim": 1, "fricke_eigenval": 1, "is_twist_minimal": true, "is_cm": false},
    {"label": "37.2.a.b", "level": 37, "weight": 2, "dim": 1, "fricke_eigenval": -1, "is_twist_minimal": true, "is_cm": false}
]}"#;

#[test]
fn fetch_writes_cache_then_serves_offline() {
    let dir = tempfile::tempdir().unwrap();
    let (url, seen) = serve(vec![(200, LEVEL_37.to_owned())]);
    let c = client(url, dir.path());
    let r = validate_delta(&c, 37, 2).unwrap();
    assert!(r.matched);
    assert_eq!(r.source, DataSource::Network);
    let request = seen.lock().unwrap()[0].clone();
    assert!(request.starts_with("GET /api/mf_newforms/?level=37&weight=2&char_order=1"), "{request}");

    let offline = Client::new(ClientConfig { offline: true, use_bundled: false, ..ClientConfig::default() }, Cache::new(dir.path()));
    let again = validate_delta(&offline, 37, 2).unwrap();
    assert_eq!(again.source, DataSource::Cache);
    assert_eq!(again.external_sum, 0);
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn follows_next_page() {
    let dir = tempfile::tempdir().unwrap();
    let page1 = r#"{"data": [{"label": "37.2.a.a", "dim": 1, "fricke_eigenval": 1}], "next": "/api/mf_newforms/?page=2"}"#;
    let page2 = r#"{"data": [{"label": "37.2.a.b", "dim": 1, "atkin_lehner_eigenvals": [[37, -1]]}]}"#;
    let (url, seen) = serve(vec![(200, page1.to_owned()), (200, page2.to_owned())]);
    let c = client(url, dir.path());
    let fetched = c.fetch_newform_orbits(37, 2).unwrap();
    assert_eq!(fetched.document.orbits.len(), 2);
    assert_eq!(seen.lock().unwrap()[1], "GET /api/mf_newforms/?page=2 HTTP/1.1");
}

#[test]
fn server_error_is_retryable() {
    let dir = tempfile::tempdir().unwrap();
    let (url, _) = serve(vec![(503, "busy".to_owned())]);
    let err = client(url, dir.path()).fetch_newform_orbits(37, 2).unwrap_err();
    assert!(err.is_retryable(), "{err:?}");
    assert!(cache_is_empty(dir.path()));
}

fn cache_is_empty(dir: &std::path::Path) -> bool {
    std::fs::read_dir(dir).map(|d| d.count() == 0).unwrap_or(true)
}

#[test]
fn refused_connection_is_retryable() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let dir = tempfile::tempdir().unwrap();
    let err = client(format!("http://127.0.0.1:{port}"), dir.path()).fetch_newform_orbits(37, 2).unwrap_err();
    assert!(matches!(err, LmfdbError::Network { .. }), "{err:?}");
    assert!(err.is_retryable());
}

#[test]
fn empty_space_with_newforms_is_no_data() {
    let dir = tempfile::tempdir().unwrap();
    let (url, _) = serve(vec![(200, r#"{"data": []}"#.to_owned()), (200, r#"{"data": []}"#.to_owned())]);
    let c = client(url, dir.path());
    let err = c.fetch_newform_orbits(37, 2).unwrap_err();
    assert!(matches!(err, LmfdbError::NoData { level: 37, weight: 2 }), "{err:?}");
    assert!(!err.is_retryable());
    // An empty newspace is a valid empty answer.
    assert!(c.fetch_newform_orbits(1, 4).unwrap().document.orbits.is_empty());
}

#[test]
fn malformed_payload_is_kept() {
    let dir = tempfile::tempdir().unwrap();
    let (url, _) = serve(vec![(200, "<html>oops</html>".to_owned())]);
    match client(url, dir.path()).fetch_newform_orbits(37, 2) {
        Err(LmfdbError::Parse { payload, .. }) => assert_eq!(payload, "<html>oops</html>"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn requests_are_spaced() {
    let dir = tempfile::tempdir().unwrap();
    let page1 = r#"{"data": [{"label": "37.2.a.a", "dim": 1, "fricke_eigenval": 1}], "next": "/p2"}"#;
    let page2 = r#"{"data": [{"label": "37.2.a.b", "dim": 1, "fricke_eigenval": -1}]}"#;
    let (url, _) = serve(vec![(200, page1.to_owned()), (200, page2.to_owned())]);
    let config = ClientConfig {
        base_url: url,
        request_delay: Duration::from_millis(300),
        timeout: Duration::from_secs(5),
        offline: false,
        use_bundled: false,
    };
    let c = Client::new(config, Cache::new(dir.path()));
    let start = Instant::now();
    c.fetch_newform_orbits(37, 2).unwrap();
    assert!(start.elapsed() >= Duration::from_millis(300));
}
