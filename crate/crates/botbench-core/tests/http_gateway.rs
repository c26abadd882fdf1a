//! HTTP backend tests against a throwaway local server: retry exhaustion on
//! 5xx, protocol errors on bad bodies, and the canned-response happy path.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use botbench_core::gateway::{
    generate, BackendMode, GenerationConfig, GatewayError, PromptRef, RetryPolicy,
};

/// Serves a fixed HTTP response to every connection, counting requests.
fn serve(body_status_and_payload: (&'static str, &'static str)) -> (String, Arc<AtomicU32>) {
    let (status, payload) = body_status_and_payload;
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind test server");
    let address = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicU32::new(0));
    let counter = hits.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            counter.fetch_add(1, Ordering::SeqCst);
            // Drain the request head; the client always sends one request
            // per connection because we answer Connection: close.
            let mut buffer = [0u8; 4096];
            let _ = stream.read(&mut buffer);
            let response = format!(
                "HTTP/1.1 {status}\r\nContent-Length: {}\r\nContent-Type: application/json\r\nConnection: close\r\n\r\n{payload}",
                payload.len(),
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    (address, hits)
}

fn config(endpoint: String, retries: u32) -> GenerationConfig {
    GenerationConfig {
        mode: BackendMode::Http,
        endpoint,
        temperature: 0.2,
        top_p: 0.95,
        max_tokens: 128,
        stop_sequences: Vec::new(),
        samples_per_prompt: 1,
        timeout_ms: 2_000,
        max_in_flight: 4,
        retry: RetryPolicy {
            count: retries,
            backoff_ms: 1,
        },
        scripts: Vec::new(),
    }
}

fn prompt() -> PromptRef {
    PromptRef {
        id: "t-p0".to_string(),
        text: "# Task: wave\n".to_string(),
    }
}

#[test]
fn server_errors_exhaust_retries_and_report_attempts() {
    let (endpoint, hits) = serve(("500 Internal Server Error", "{}"));
    let retries = 2;
    let err = generate(&prompt(), &config(endpoint, retries), 1).unwrap_err();
    match err {
        GatewayError::GenerationUnavailable { attempts, .. } => {
            assert_eq!(attempts, retries + 1);
        }
        other => panic!("unexpected error: {other}"),
    }
    assert_eq!(hits.load(Ordering::SeqCst), retries + 1);
}

#[test]
fn malformed_body_is_a_protocol_error() {
    let (endpoint, _) = serve(("200 OK", "this is not json"));
    let err = generate(&prompt(), &config(endpoint, 2), 1).unwrap_err();
    assert!(matches!(err, GatewayError::ProtocolError { .. }), "{err}");
}

#[test]
fn client_errors_do_not_retry() {
    let (endpoint, hits) = serve(("404 Not Found", "{}"));
    let err = generate(&prompt(), &config(endpoint, 3), 1).unwrap_err();
    assert!(matches!(err, GatewayError::ProtocolError { .. }), "{err}");
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn canned_completion_yields_extracted_programs() {
    let (endpoint, _) = serve((
        "200 OK",
        r#"{"choices": [{"text": "```python\ndef task():\n    say('hi')\n```"}, {"text": "go_to('lobby')\n"}]}"#,
    ));
    let programs = generate(&prompt(), &config(endpoint, 0), 2).unwrap();
    assert_eq!(programs.len(), 2);
    assert_eq!(programs[0].text, "def task():\n    say('hi')\n");
    assert_eq!(programs[0].origin, "t-p0#0@http");
    assert_eq!(programs[1].text, "go_to('lobby')\n");
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    // Nothing listens on this port (bound and immediately dropped).
    let port = {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let err = generate(
        &prompt(),
        &config(format!("http://127.0.0.1:{port}"), 1),
        1,
    )
    .unwrap_err();
    assert!(
        matches!(err, GatewayError::GenerationUnavailable { attempts: 2, .. }),
        "{err}"
    );
}
