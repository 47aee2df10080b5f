//! The HTTP teacher client against a local stub server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use seizure_freq::pipeline::{
    with_retry, ClientError, HttpClientConfig, HttpTeacherClient, RetryPolicy, TeacherClient,
};

struct Seen {
    headers: Vec<String>,
    body: serde_json::Value,
}

/// Serves one canned (status, body) per connection, in order, and reports
/// what each request carried.
fn stub(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<Seen>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = Vec::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end().to_string();
                if line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                headers.push(line);
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            tx.send(Seen {
                headers,
                body: serde_json::from_slice(&buf).unwrap(),
            })
            .unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

fn reply(content: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

fn client(url: &str, key_env: &str) -> HttpTeacherClient {
    let mut cfg = HttpClientConfig::new(url, "teacher");
    cfg.api_key_env = key_env.into();
    cfg.timeout_secs = 5;
    HttpTeacherClient::from_config(cfg).unwrap()
}

#[test]
fn infer_sends_bearer_from_env_and_zero_temperature() {
    std::env::set_var("SEIZURE_FREQ_TEST_KEY_A", "s3cret");
    let content = r#"{"analysis": "stated", "seizure_frequency_number": ["2 per week", "two a week"]}"#;
    let (url, rx) = stub(vec![(200, reply(content))]);
    let c = client(&url, "SEIZURE_FREQ_TEST_KEY_A");
    let inf = c.infer("She has two a week.", None).unwrap();
    assert_eq!(inf.label_text, "2 per week");
    assert_eq!(inf.evidence, vec!["two a week".to_string()]);
    let seen = rx.recv().unwrap();
    assert!(seen.headers.iter().any(|h| h == "Authorization: Bearer s3cret"), "{:?}", seen.headers);
    assert_eq!(seen.body["temperature"], 0.0);
    assert_eq!(seen.body["model"], "teacher");
    let prompt = seen.body["messages"][0]["content"].as_str().unwrap();
    assert!(prompt.contains("She has two a week."));
    assert_eq!(c.request_count(), 1);
    assert!(!format!("{c:?}").contains("s3cret"));
}

#[test]
fn no_key_means_no_authorization_header() {
    let (url, rx) = stub(vec![(200, reply("unknown"))]);
    let c = client(&url, "SEIZURE_FREQ_TEST_KEY_UNSET");
    let inf = c.infer("letter", None).unwrap();
    assert_eq!(inf.label_text, "unknown");
    let seen = rx.recv().unwrap();
    assert!(!seen.headers.iter().any(|h| h.to_ascii_lowercase().starts_with("authorization")));
}

#[test]
fn server_errors_are_retried() {
    let (url, _rx) = stub(vec![
        (503, "{}".into()),
        (503, "{}".into()),
        (200, reply("1 per month")),
    ]);
    let c = client(&url, "SEIZURE_FREQ_TEST_KEY_UNSET");
    let inf = with_retry(&RetryPolicy::immediate(3), || c.infer("letter", None)).unwrap();
    assert_eq!(inf.label_text, "1 per month");
    assert_eq!(c.request_count(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, _rx) = stub(vec![(400, r#"{"error":"bad"}"#.into())]);
    let c = client(&url, "SEIZURE_FREQ_TEST_KEY_UNSET");
    let err = with_retry(&RetryPolicy::immediate(3), || c.infer("letter", None)).unwrap_err();
    assert!(matches!(err, ClientError::Http { status: 400, .. }), "{err:?}");
    assert_eq!(c.request_count(), 1);
}

#[test]
fn draft_reply_is_parsed() {
    let content = r#"Here it is: {"letter": "Dear @GP_NAME@, seen today.", "identity": {"GP_NAME": "Dr Tan"}}"#;
    let (url, rx) = stub(vec![(200, reply(content))]);
    let c = client(&url, "SEIZURE_FREQ_TEST_KEY_UNSET");
    let d = c.draft("Dear @GP_NAME@, {{SEIZURE_PARAGRAPH}}", "2 per week").unwrap();
    assert_eq!(d.text, "Dear @GP_NAME@, seen today.");
    assert_eq!(d.identity.get("GP_NAME"), Some("Dr Tan"));
    let prompt = rx.recv().unwrap().body["messages"][0]["content"].as_str().unwrap().to_string();
    assert!(prompt.contains("2 per week"));
}

#[test]
fn unreachable_server_is_transient() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let c = client(&format!("http://127.0.0.1:{port}/v1"), "SEIZURE_FREQ_TEST_KEY_UNSET");
    let err = c.infer("letter", None).unwrap_err();
    assert!(err.is_transient(), "{err:?}");
}
