#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monoalign"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub fn write(path: &Path, text: &str) {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d).unwrap();
    }
    std::fs::write(path, text).unwrap();
}

/// Writes one pair's documents plus a manifest row; returns the manifest path.
pub fn corpus(dir: &Path, pairs: &[(&str, &str, &[&str], &[&str])]) -> PathBuf {
    let mut manifest = String::new();
    for (id, lang, complex, simple) in pairs {
        write(&dir.join(format!("{id}.c.txt")), &(complex.join("\n") + "\n"));
        write(&dir.join(format!("{id}.s.txt")), &(simple.join("\n") + "\n"));
        manifest.push_str(&format!("{id}\t{lang}\t{id}.c.txt\t{id}.s.txt\n"));
    }
    let path = dir.join("manifest.tsv");
    write(&path, &manifest);
    path
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Minimal HTTP server for `POST /embed`. Each text maps to
/// `[chars, words, 1.0]`. `fail_first` requests get a 503 first.
pub struct Stub {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
}

pub fn stub(fail_first: usize, delay: Duration) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let requests = Arc::new(AtomicUsize::new(0));
    let count = requests.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let n = count.fetch_add(1, Ordering::SeqCst);
            thread::spawn(move || serve(stream, n < fail_first, delay));
        }
    });
    Stub { url, requests }
}

fn serve(mut stream: TcpStream, fail: bool, delay: Duration) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap();
            }
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    thread::sleep(delay);
    let (status, payload) = if fail {
        ("503 Service Unavailable", "{}".to_string())
    } else {
        let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
        let rows: Vec<Vec<f64>> = req["texts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| {
                let t = t.as_str().unwrap();
                vec![t.chars().count() as f64, t.split_whitespace().count() as f64, 1.0]
            })
            .collect();
        ("200 OK", serde_json::json!({ "embeddings": rows }).to_string())
    };
    let _ = write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
}
