//! Kill-and-restart check against the real server binary.

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use unrest_filter::service::Session;
use unrest_filter::AnalyzedTweet;

use super::http::request;

pub struct Server {
    pub child: Child,
    pub addr: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn spawn_server(dir: &Path, input: &Path) -> Server {
    let mut child = Command::new(env!("CARGO_BIN_EXE_unrest-filter"))
        .args([
            "serve",
            "--listen",
            "127.0.0.1:0",
            "--stop-set-size",
            "300",
            "--seed",
            "5",
        ])
        .arg("--input")
        .arg(input)
        .arg("--out-dir")
        .arg(dir)
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server exited early").unwrap();
        if let Some(a) = line.strip_prefix("listening on http://") {
            break a.to_string();
        }
    };
    // Keep draining stderr so the server never blocks on a full pipe.
    std::thread::spawn(move || for _ in lines {});
    Server { child, addr }
}

fn gold(corpus: &[AnalyzedTweet], id: &str) -> i64 {
    corpus.iter().find(|t| t.id() == id).unwrap().label().unwrap().as_int() as i64
}

/// Posts `n` gold labels to a served session, SIGKILLs it, restarts it, and
/// checks the recovered model against an in-process session fed the same
/// labels. Panics on any mismatch.
pub fn kill_and_restart(tmp: &Path, n: usize) {
    let corpus = super::synth(500, 11);
    let input = tmp.join("pool.jsonl");
    super::write_corpus(&input, &super::unlabeled(&corpus));
    let dir = tmp.join("session");

    let mut server = spawn_server(&dir, &input);
    let mut acked = Vec::new();
    while acked.len() < n {
        let q = request(&server.addr, "GET", "/queue/next?n=1", None).json();
        let id = q[0]["id"].as_str().unwrap().to_string();
        let body = format!(r#"{{"id":"{id}","label":{},"annotator":"a"}}"#, gold(&corpus, &id));
        let r = request(&server.addr, "POST", "/labels", Some(&body));
        assert_eq!(r.status, 200, "{}", r.body);
        assert_eq!(r.json()["ack"], true);
        acked.push(id);
    }
    server.child.kill().unwrap();
    server.child.wait().unwrap();

    // Every acknowledged label is on disk, in order.
    let logged: Vec<String> = std::fs::read_to_string(dir.join("labels.log"))
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["id"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(logged, acked);

    // Reference: the same labels applied to a fresh in-process session built
    // from the served session's persisted config.
    let served = Session::open(&dir).unwrap().config().clone();
    let reference = tmp.join("reference");
    let s = Session::create(&reference, super::unlabeled(&corpus), vec![], served).unwrap();
    for id in &acked {
        if s.submit_label(id, gold(&corpus, id), "a").unwrap().retrain_scheduled {
            s.run_pending_retrains().unwrap();
        }
    }
    let expected = s.snapshot().unwrap().trained.model.clone();

    let server = spawn_server(&dir, &input);
    let mut st = serde_json::Value::Null;
    for _ in 0..500 {
        st = request(&server.addr, "GET", "/status", None).json();
        if st["trained_count"] == n && st["retraining"] == false {
            break;
        }
        std::thread::sleep(Duration::from_millis(20));
    }
    assert_eq!(st["labeled"], n);
    assert_eq!(st["trained_count"], n / 50 * 50);
    drop(server);

    let reopened = Session::open(&dir).unwrap();
    assert_eq!(reopened.snapshot().unwrap().trained.model, expected);
    assert_eq!(reopened.kappa_history(), s.kappa_history());
}
