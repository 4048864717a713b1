#![allow(dead_code)]

//! Replays the request fixtures through the HTTP API and the CLI binary on
//! two fresh workspaces and compares the outcomes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use ontoroute_gateway::{http, CoreKind, GatewayConfig, Service, Workspace};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

#[derive(Debug, Deserialize)]
pub struct HttpCall {
    pub method: String,
    pub path: String,
    #[serde(default)]
    pub body: Option<Value>,
    #[serde(default)]
    pub body_file: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct Fixture {
    pub name: String,
    #[serde(default)]
    pub save_as: Option<String>,
    pub http: HttpCall,
    pub cli: Vec<String>,
    /// `/ptr` checks a value, `#/ptr` the length of an array.
    #[serde(default)]
    pub expect: BTreeMap<String, Value>,
}

pub fn fixtures() -> Vec<Fixture> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap())
        .collect()
}

fn substitute(text: &str, vars: &BTreeMap<String, String>) -> String {
    let mut out = text.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

fn resolve(value: &Value, vars: &BTreeMap<String, String>) -> Value {
    let root = repo_root();
    match value {
        Value::String(s) => {
            if let Some(p) = s.strip_prefix("$file:") {
                Value::String(std::fs::read_to_string(root.join(p)).unwrap())
            } else if let Some(p) = s.strip_prefix("$json:") {
                serde_json::from_str(&std::fs::read_to_string(root.join(p)).unwrap()).unwrap()
            } else {
                Value::String(substitute(s, vars))
            }
        }
        Value::Array(items) => Value::Array(items.iter().map(|v| resolve(v, vars)).collect()),
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, v)| (k.clone(), resolve(v, vars)))
                .collect(),
        ),
        other => other.clone(),
    }
}

pub struct Server {
    pub base: String,
    _runtime: tokio::runtime::Runtime,
}

pub fn start_server(workspace: &Path) -> Server {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let service = Arc::new(Service::new(
        Workspace::open(workspace).unwrap(),
        CoreKind::Rule,
        GatewayConfig::default(),
    ));
    let listener = rt
        .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
        .unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move { axum::serve(listener, http::router(service)).await });
    Server {
        base: format!("http://{addr}"),
        _runtime: rt,
    }
}

pub fn http_call(
    client: &reqwest::blocking::Client,
    base: &str,
    call: &HttpCall,
    vars: &BTreeMap<String, String>,
) -> (u16, String) {
    let url = format!("{base}{}", substitute(&call.path, vars));
    let req = match call.method.as_str() {
        "GET" => client.get(&url),
        "POST" => client.post(&url),
        m => panic!("unsupported method {m}"),
    };
    let req = if let Some(f) = &call.body_file {
        req.body(std::fs::read_to_string(repo_root().join(f)).unwrap())
    } else if let Some(b) = &call.body {
        req.header("content-type", "application/json")
            .body(resolve(b, vars).to_string())
    } else {
        req
    };
    let resp = req.send().unwrap();
    let status = resp.status().as_u16();
    (status, resp.text().unwrap())
}

pub fn cli_call(
    workspace: &Path,
    args: &[String],
    vars: &BTreeMap<String, String>,
) -> (i32, String, String) {
    let root = repo_root();
    let args: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix('@') {
            Some(p) => root.join(p).display().to_string(),
            None => substitute(a, vars),
        })
        .collect();
    let out = Command::new(env!("CARGO_BIN_EXE_ontoroute"))
        .arg("--workspace")
        .arg(workspace)
        .args(&args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Every file under `dir`, relative path to bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn check_expect(f: &Fixture, v: &Value) -> Result<(), String> {
    for (key, want) in &f.expect {
        let (ptr, len) = match key.strip_prefix('#') {
            Some(p) => (p, true),
            None => (key.as_str(), false),
        };
        let got = v
            .pointer(ptr)
            .ok_or_else(|| format!("{}: {ptr} missing", f.name))?;
        let got = if len {
            Value::from(got.as_array().map(Vec::len).unwrap_or(usize::MAX))
        } else {
            got.clone()
        };
        if &got != want {
            return Err(format!("{}: {key} = {got}, expected {want}", f.name));
        }
    }
    Ok(())
}

pub struct ParityReport {
    pub fixtures: usize,
    pub failures: Vec<String>,
}

/// Runs the fixtures on both transports, then reopens each workspace and
/// checks that nothing moves.
pub fn run_parity() -> ParityReport {
    let fixtures = fixtures();
    let http_dir = tempfile::tempdir().unwrap();
    let cli_dir = tempfile::tempdir().unwrap();
    let server = start_server(http_dir.path());
    let client = reqwest::blocking::Client::new();
    let mut vars = BTreeMap::new();
    let mut failures = Vec::new();

    for f in &fixtures {
        let (status, body) = http_call(&client, &server.base, &f.http, &vars);
        let (code, stdout, stderr) = cli_call(cli_dir.path(), &f.cli, &vars);
        if status != 200 {
            failures.push(format!("{}: HTTP {status}: {body}", f.name));
            continue;
        }
        if code != 0 {
            failures.push(format!("{}: CLI exit {code}: {stderr}", f.name));
            continue;
        }
        let h: Value = serde_json::from_str(&body).unwrap();
        let c: Value = match serde_json::from_str(&stdout) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("{}: CLI output is not JSON: {e}", f.name));
                continue;
            }
        };
        if h != c {
            failures.push(format!(
                "{}: HTTP and CLI differ\nhttp: {h}\ncli:  {c}",
                f.name
            ));
        }
        if let Err(e) = check_expect(f, &h) {
            failures.push(e);
        }
        if let (Some(var), Some(id)) = (&f.save_as, h.get("id").and_then(Value::as_str)) {
            vars.insert(var.clone(), id.to_string());
        }
    }

    let http_files = snapshot(http_dir.path());
    let cli_files = snapshot(cli_dir.path());
    if http_files != cli_files {
        let differ: Vec<&String> = http_files
            .keys()
            .chain(cli_files.keys())
            .filter(|k| http_files.get(*k) != cli_files.get(*k))
            .collect();
        failures.push(format!("workspaces differ in {differ:?}"));
    }
    drop(server);

    let reopened = Workspace::open(http_dir.path()).unwrap();
    let service = Service::new(reopened, CoreKind::Rule, GatewayConfig::default());
    if snapshot(http_dir.path()) != http_files {
        failures.push("reopening rewrote files".into());
    }
    for (rel, bytes) in &http_files {
        let parts: Vec<&str> = rel.split('/').collect();
        if parts.len() == 3
            && parts[0] == "ontologies"
            && parts[2] == "ontology.ttl"
            && service.get_ontology(parts[1]).unwrap().as_bytes() != bytes.as_slice()
        {
            failures.push(format!("{rel} changed after reopen"));
        }
        if parts.len() == 3
            && parts[0] == "scenarios"
            && parts[2] == "result.json"
            && service.get_scenario(parts[1]).unwrap().as_bytes() != bytes.as_slice()
        {
            failures.push(format!("{rel} changed after reopen"));
        }
    }
    let index_again = serde_json::to_string(&service.workspace().index()).unwrap();
    let closed = Workspace::open(cli_dir.path()).unwrap();
    if serde_json::to_string(&closed.index()).unwrap() != index_again {
        failures.push("reopened indexes differ".into());
    }

    ParityReport {
        fixtures: fixtures.len(),
        failures,
    }
}
