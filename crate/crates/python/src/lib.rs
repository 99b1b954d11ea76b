//! Python client for the `conpole serve` line protocol.
//!
//! Each `EnvClient` owns one `conpole serve` subprocess and talks to it over
//! stdin/stdout, one JSON object per line. The binary is taken from the
//! `binary` argument, then `CONPOLE_BIN`, then `conpole` on `PATH`.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use conpole::env::{format_trace, TraceStep, MAX_DEPTH};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyRuntimeError};
use pyo3::prelude::*;
use serde_json::{json, Value};

create_exception!(conpole_py, ServiceError, PyException);
create_exception!(conpole_py, PolicyError, PyRuntimeError);

#[derive(Debug, Clone, PartialEq)]
pub enum ClientError {
    /// The subprocess could not be started, died, or sent garbage.
    Transport(String),
    /// The service answered `{"ok": false, ...}`.
    Rejected(String),
}

impl std::fmt::Display for ClientError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClientError::Transport(m) => write!(f, "service failure: {m}"),
            ClientError::Rejected(m) => write!(f, "request rejected: {m}"),
        }
    }
}

impl From<ClientError> for PyErr {
    fn from(e: ClientError) -> Self {
        ServiceError::new_err(e.to_string())
    }
}

pub fn resolve_binary(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("CONPOLE_BIN").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("conpole"))
}

pub struct Service {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    pub requests: u64,
}

impl Service {
    pub fn spawn(binary: &std::path::Path) -> Result<Self, ClientError> {
        let mut child = Command::new(binary)
            .arg("serve")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ClientError::Transport(format!("cannot start {}: {e}", binary.display())))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Service {
            child,
            stdin,
            stdout,
            requests: 0,
        })
    }

    pub fn pid(&self) -> u32 {
        self.child.id()
    }

    /// Sends one line and returns the response line without its newline.
    pub fn raw(&mut self, line: &str) -> Result<String, ClientError> {
        let dead = |what: &str, status: Option<std::process::ExitStatus>| {
            let status = status.map(|s| format!(" ({s})")).unwrap_or_default();
            ClientError::Transport(format!("{what}; subprocess has exited{status}"))
        };
        let stdin = self.stdin.as_mut().ok_or_else(|| ClientError::Transport("client is closed".into()))?;
        if stdin
            .write_all(line.trim_end().as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush())
            .is_err()
        {
            return Err(dead("write failed", self.child.try_wait().ok().flatten()));
        }
        self.requests += 1;
        let mut resp = String::new();
        match self.stdout.read_line(&mut resp) {
            Ok(0) | Err(_) => Err(dead("no response", self.child.wait().ok())),
            Ok(_) => Ok(resp.trim_end_matches('\n').to_string()),
        }
    }

    pub fn request(&mut self, req: &Value) -> Result<Value, ClientError> {
        let line = self.raw(&req.to_string())?;
        let v: Value = serde_json::from_str(&line)
            .map_err(|e| ClientError::Transport(format!("unparseable response {line:?}: {e}")))?;
        if v["ok"] == Value::Bool(true) {
            Ok(v)
        } else {
            Err(ClientError::Rejected(v["error"].as_str().unwrap_or("unknown error").to_string()))
        }
    }

    pub fn close(&mut self) {
        self.stdin = None;
        if self.child.try_wait().ok().flatten().is_none() {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}

impl Drop for Service {
    fn drop(&mut self) {
        self.close();
    }
}

fn expanded(v: &Value) -> Result<(bool, Vec<(String, String)>), ClientError> {
    if v["ok"] != Value::Bool(true) {
        return Err(ClientError::Rejected(v["error"].as_str().unwrap_or("unknown error").to_string()));
    }
    let bad = || ClientError::Transport(format!("malformed expand response {v}"));
    let solved = v["solved"].as_bool().ok_or_else(bad)?;
    let actions = v["actions"]
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|a| match (a["name"].as_str(), a["state"].as_str()) {
            (Some(n), Some(s)) => Ok((n.to_string(), s.to_string())),
            _ => Err(bad()),
        })
        .collect::<Result<_, _>>()?;
    Ok((solved, actions))
}

/// Client for one environment, backed by its own `conpole serve` process.
#[pyclass(unsendable, module = "conpole_py")]
pub struct EnvClient {
    service: Service,
    #[pyo3(get)]
    env: String,
}

impl EnvClient {
    pub fn open(env: &str, binary: Option<PathBuf>) -> Result<Self, ClientError> {
        let mut service = Service::spawn(&resolve_binary(binary))?;
        service.request(&json!({"cmd": "generate", "env": env, "seed": 0}))?;
        Ok(EnvClient {
            service,
            env: env.to_string(),
        })
    }

    pub fn generate_state(&mut self, seed: u64) -> Result<String, ClientError> {
        let v = self.service.request(&json!({"cmd": "generate", "env": self.env, "seed": seed}))?;
        v["state"]
            .as_str()
            .map(String::from)
            .ok_or_else(|| ClientError::Transport(format!("malformed generate response {v}")))
    }

    pub fn expand_state(&mut self, state: &str) -> Result<(bool, Vec<(String, String)>), ClientError> {
        expanded(&self.service.request(&json!({"cmd": "expand", "env": self.env, "state": state}))?)
    }
}

#[pymethods]
impl EnvClient {
    #[new]
    #[pyo3(signature = (env, binary=None))]
    fn new(env: &str, binary: Option<PathBuf>) -> PyResult<Self> {
        Ok(EnvClient::open(env, binary)?)
    }

    fn generate(&mut self, seed: u64) -> PyResult<String> {
        Ok(self.generate_state(seed)?)
    }

    /// Returns `(solved, [(action, next_state), ...])`.
    fn expand(&mut self, state: &str) -> PyResult<(bool, Vec<(String, String)>)> {
        Ok(self.expand_state(state)?)
    }

    /// One `expand` result per state, or a `ServiceError` instance for states
    /// the service rejected.
    fn expand_batch(&mut self, py: Python<'_>, states: Vec<String>) -> PyResult<Vec<Py<PyAny>>> {
        let v = self
            .service
            .request(&json!({"cmd": "expand_batch", "env": self.env, "states": states}))?;
        let results = v["results"]
            .as_array()
            .ok_or_else(|| ClientError::Transport(format!("malformed batch response {v}")))?;
        results
            .iter()
            .map(|r| match expanded(r) {
                Ok(pair) => Ok(pair.into_pyobject(py)?.into_any().unbind()),
                Err(e) => Ok(PyErr::from(e).into_value(py).into_any()),
            })
            .collect()
    }

    fn is_solved(&mut self, state: &str) -> PyResult<bool> {
        let v = self.service.request(&json!({"cmd": "solved", "env": self.env, "state": state}))?;
        Ok(v["solved"].as_bool().unwrap_or(false))
    }

    /// Sends a raw protocol line and returns the raw response line.
    fn request_raw(&mut self, line: &str) -> PyResult<String> {
        Ok(self.service.raw(line)?)
    }

    /// Follows `policy(state, actions) -> index` from the problem for `seed`
    /// until a solved state, a dead end or `max_depth` steps. Returns the
    /// trace text.
    #[pyo3(signature = (policy, seed, max_depth=MAX_DEPTH))]
    fn rollout(&mut self, py: Python<'_>, policy: Py<PyAny>, seed: u64, max_depth: usize) -> PyResult<String> {
        let mut state = self.generate_state(seed)?;
        let mut steps = vec![TraceStep::start(state.clone())];
        for _ in 0..max_depth {
            let (solved, actions) = self.expand_state(&state)?;
            if solved || actions.is_empty() {
                break;
            }
            let choice = policy
                .call1(py, (state.clone(), actions.clone()))
                .and_then(|r| r.extract::<usize>(py))
                .map_err(|e| {
                    let wrapped = PolicyError::new_err(format!("policy failed at state {state:?}"));
                    wrapped.set_cause(py, Some(e));
                    wrapped
                })?;
            let (label, next) = actions.into_iter().nth(choice).ok_or_else(|| {
                PyIndexError::new_err(format!("policy chose action {choice} at state {state:?}"))
            })?;
            steps.push(TraceStep::after(next.clone(), label));
            state = next;
        }
        Ok(format_trace(&steps))
    }

    #[getter]
    fn pid(&self) -> u32 {
        self.service.pid()
    }

    #[getter]
    fn requests(&self) -> u64 {
        self.service.requests
    }

    fn close(&mut self) {
        self.service.close();
    }

    fn __enter__(slf: Py<Self>) -> Py<Self> {
        slf
    }

    fn __exit__(&mut self, _ty: Py<PyAny>, _value: Py<PyAny>, _tb: Py<PyAny>) -> bool {
        self.service.close();
        false
    }
}

#[pymodule]
fn conpole_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<EnvClient>()?;
    m.add("ServiceError", m.py().get_type::<ServiceError>())?;
    m.add("PolicyError", m.py().get_type::<PolicyError>())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> PathBuf {
        let exe = std::env::current_exe().unwrap();
        let bin = exe.parent().unwrap().parent().unwrap().join("conpole");
        assert!(bin.exists(), "build the conpole binary first ({} missing)", bin.display());
        bin
    }

    #[test]
    fn generate_and_expand_match_the_library() {
        let env = conpole::env::make_env("fractions").unwrap();
        let mut client = EnvClient::open("fractions", Some(binary())).unwrap();
        for seed in 0..50 {
            let s = client.generate_state(seed).unwrap();
            assert_eq!(s, env.generate(seed));
            let (solved, actions) = client.expand_state(&s).unwrap();
            assert_eq!(solved, env.is_solved(&s).unwrap());
            let direct: Vec<(String, String)> =
                env.expand(&s).unwrap().into_iter().map(|e| (e.label, e.next_state)).collect();
            assert_eq!(actions, direct);
        }
    }

    #[test]
    fn rejected_requests_leave_the_client_usable() {
        let mut client = EnvClient::open("sorting", Some(binary())).unwrap();
        assert!(matches!(client.expand_state("[=|x]"), Err(ClientError::Rejected(_))));
        assert_eq!(client.expand_state("[=|==]").unwrap(), (true, vec![]));
        assert!(EnvClient::open("chess", Some(binary())).is_err());
    }

    #[test]
    fn dead_subprocess_is_reported() {
        let mut client = EnvClient::open("sorting", Some(binary())).unwrap();
        client.service.child.kill().unwrap();
        let _ = client.service.child.wait();
        let err = client.generate_state(1).unwrap_err();
        assert!(matches!(err, ClientError::Transport(ref m) if m.contains("exited")), "{err}");
    }

    #[test]
    fn closing_reaps_the_subprocess() {
        let pid = {
            let client = EnvClient::open("sorting", Some(binary())).unwrap();
            client.service.pid()
        };
        let status = std::fs::read_to_string(format!("/proc/{pid}/status")).unwrap_or_default();
        assert!(!status.contains("State:\tZ"), "zombie child {pid}");
        assert!(status.is_empty(), "child {pid} still running");
    }

    #[test]
    fn missing_binary_is_a_transport_error() {
        let err = Service::spawn(std::path::Path::new("/nonexistent/conpole")).err().unwrap();
        assert!(matches!(err, ClientError::Transport(_)));
    }
}
