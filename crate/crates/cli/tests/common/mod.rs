#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use meshqa_core::asset::{encode_jpeg, write_obj};
use meshqa_core::fixtures::{natural_texture, uv_sphere};
use meshqa_study::StudyConfig;
use serde_json::{json, Value};

pub fn meshqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshqa")).args(args).output().expect("spawn meshqa")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// A UV sphere with 4680 faces and a 256² texture written as `toy.obj` / `toy.jpg`.
pub fn toy_model(dir: &Path) -> (PathBuf, PathBuf) {
    let (obj, jpg) = (dir.join("toy.obj"), dir.join("toy.jpg"));
    std::fs::write(&obj, write_obj(&uv_sphere(40, 60))).unwrap();
    std::fs::write(&jpg, encode_jpeg(&natural_texture(256, 1), 95).unwrap()).unwrap();
    (obj, jpg)
}

fn item(id: &str, model: &str) -> Value {
    json!({ "stimulus_id": id, "model_id": model, "reference": format!("{model}/ref.png"), "distorted": format!("{model}/{id}.png") })
}

/// `playlists` playlists of 30 test items over 15 models each.
pub fn study_config(playlists: u32) -> Value {
    json!({
        "training": (0..5).map(|i| item(&format!("train{i}"), "t")).collect::<Vec<_>>(),
        "playlists": (1..=playlists).map(|id| json!({
            "id": id,
            "test": (0..30).map(|i| item(&format!("p{id}_s{i}"), &format!("m{}", i / 2))).collect::<Vec<_>>(),
            "golden": {
                "poor": item(&format!("p{id}_poor"), "g"),
                "high": item(&format!("p{id}_high"), "g"),
                "repeated": format!("p{id}_s3"),
            },
        })).collect::<Vec<_>>(),
    })
}

pub fn parsed_study_config(playlists: u32) -> StudyConfig {
    StudyConfig::from_json(&study_config(playlists).to_string()).unwrap()
}

/// A `meshqa serve` child on an ephemeral port; killed with SIGKILL on drop.
pub struct Server {
    pub child: Child,
    pub base: String,
}

impl Server {
    pub fn start(config: &Path, store: &Path) -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_meshqa"))
            .args(["serve", "--playlists", arg(config), "--store", arg(store), "--port", "0"])
            .args(["--secret", "acceptance", "--min-playback-ms", "0"])
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn server");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let base = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected server banner {line:?}"))
            .to_owned();
        Server { child, base }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn post(http: &reqwest::blocking::Client, url: &str, body: Value) -> (u16, Value) {
    let r = http.post(url).json(&body).send().unwrap();
    let status = r.status().as_u16();
    (status, r.json().unwrap_or(Value::Null))
}

pub fn get(http: &reqwest::blocking::Client, url: &str) -> (u16, Value) {
    let r = http.get(url).send().unwrap();
    let status = r.status().as_u16();
    (status, r.json().unwrap_or(Value::Null))
}

/// Fetches the pending item and votes on it; returns the acknowledgment.
pub fn vote_once(http: &reqwest::blocking::Client, server: &Server, session: &str, score: u8) -> Value {
    let (s, next) = get(http, &server.url(&format!("/api/session/{session}/next")));
    assert_eq!(s, 200, "{next}");
    let (s, ack) = post(
        http,
        &server.url("/api/vote"),
        json!({ "session_id": session, "slot": next["slot"], "stimulus_id": next["stimulus_id"], "score": score, "playback_complete": true }),
    );
    assert_eq!(s, 200, "{ack}");
    ack
}
