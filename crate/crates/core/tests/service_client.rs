use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use serde_json::{json, Value};
use survey_cluster::embedding::{embed_texts, hash_embed, Embedder, ServiceEmbedder};
use survey_cluster::Error;

/// Serves `POST /embed` on a loopback port; `reply` maps the request body to
/// a status code and response JSON.
fn serve<F>(reply: F) -> (String, Arc<AtomicUsize>)
where
    F: Fn(&Value) -> (u16, Value) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            if reader.read_line(&mut request_line).unwrap_or(0) == 0 {
                continue;
            }
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        length = v.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            counter.fetch_add(1, Ordering::SeqCst);
            assert!(request_line.starts_with("POST /embed "), "{request_line}");
            let request: Value = serde_json::from_slice(&body).unwrap();
            let (status, payload) = reply(&request);
            let text = payload.to_string();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
        }
    });
    (url, hits)
}

fn hash_reply(dim: usize) -> impl Fn(&Value) -> (u16, Value) {
    move |req| {
        let vectors: Vec<Vec<f64>> = req["texts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| hash_embed(t.as_str().unwrap(), dim, 0).into_inner())
            .collect();
        (200, json!({ "dim": dim, "embeddings": vectors }))
    }
}

fn texts(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("response number {i}")).collect()
}

#[test]
fn embeds_in_request_order_across_batches() {
    let (url, hits) = serve(hash_reply(8));
    let client = ServiceEmbedder::new(&url, 8).with_batch_size(2);
    let input = texts(5);
    let out = embed_texts(&client, &input).unwrap();
    assert_eq!(hits.load(Ordering::SeqCst), 3);
    for (t, v) in input.iter().zip(&out) {
        assert_eq!(v, &hash_embed(t, 8, 0));
    }
    assert_eq!(client.info().dimension, 8);
}

#[test]
fn wrong_dimension_is_rejected() {
    let (url, _) = serve(hash_reply(6));
    let client = ServiceEmbedder::new(&url, 8);
    assert!(matches!(
        embed_texts(&client, &texts(2)),
        Err(Error::DimensionMismatch { expected: 8, found: 6 })
    ));
}

#[test]
fn short_response_is_unavailable() {
    let (url, _) = serve(|_| (200, json!({ "dim": 2, "embeddings": [[1.0, 0.0]] })));
    let client = ServiceEmbedder::new(&url, 2);
    assert!(matches!(
        embed_texts(&client, &texts(3)),
        Err(Error::ServiceUnavailable(_))
    ));
}

#[test]
fn non_200_retries_once_then_fails() {
    let (url, hits) = serve(|_| (503, json!({ "error": "loading" })));
    let client = ServiceEmbedder::new(&url, 4);
    assert!(matches!(
        embed_texts(&client, &texts(1)),
        Err(Error::ServiceUnavailable(_))
    ));
    assert_eq!(hits.load(Ordering::SeqCst), 2);
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let client = ServiceEmbedder::new(&format!("http://127.0.0.1:{port}"), 4);
    assert!(matches!(
        embed_texts(&client, &texts(1)),
        Err(Error::ServiceUnavailable(_))
    ));
}

#[test]
fn empty_text_is_refused_client_side() {
    let (url, hits) = serve(hash_reply(4));
    let client = ServiceEmbedder::new(&url, 4);
    assert!(matches!(
        embed_texts(&client, &["".to_string()]),
        Err(Error::EmptyInput)
    ));
    assert_eq!(hits.load(Ordering::SeqCst), 0);
}
