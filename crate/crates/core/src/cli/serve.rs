use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{make_env, Environment};

#[derive(Debug, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
enum Request {
    Generate { env: String, seed: u64 },
    Expand { env: String, state: String },
    Solved { env: String, state: String },
    ExpandBatch { env: String, states: Vec<String> },
}

#[derive(Debug, Serialize)]
struct Action {
    name: String,
    state: String,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Response {
    State { ok: bool, state: String },
    Expanded { ok: bool, solved: bool, actions: Vec<Action> },
    Solved { ok: bool, solved: bool },
    Batch { ok: bool, results: Vec<Response> },
    Error { ok: bool, error: String },
}

fn error(msg: impl Into<String>) -> Response {
    Response::Error {
        ok: false,
        error: msg.into(),
    }
}

struct Service {
    envs: HashMap<String, Arc<dyn Environment>>,
}

impl Service {
    fn env(&mut self, name: &str) -> Result<Arc<dyn Environment>, Response> {
        if let Some(e) = self.envs.get(name) {
            return Ok(e.clone());
        }
        let e = make_env(name).map_err(|e| error(e.to_string()))?;
        self.envs.insert(name.to_string(), e.clone());
        Ok(e)
    }

    fn expand(env: &dyn Environment, state: &str) -> Response {
        let solved = match env.is_solved(state) {
            Ok(s) => s,
            Err(e) => return error(e.to_string()),
        };
        match env.expand(state) {
            Ok(edges) => Response::Expanded {
                ok: true,
                solved,
                actions: edges
                    .into_iter()
                    .map(|e| Action {
                        name: e.label,
                        state: e.next_state,
                    })
                    .collect(),
            },
            Err(e) => error(e.to_string()),
        }
    }

    fn handle(&mut self, line: &str) -> Response {
        let req: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => return error(format!("bad request: {e}")),
        };
        let result = match req {
            Request::Generate { env, seed } => self.env(&env).map(|e| Response::State {
                ok: true,
                state: e.generate(seed),
            }),
            Request::Expand { env, state } => self.env(&env).map(|e| Self::expand(&*e, &state)),
            Request::Solved { env, state } => self.env(&env).map(|e| match e.is_solved(&state) {
                Ok(solved) => Response::Solved { ok: true, solved },
                Err(err) => error(err.to_string()),
            }),
            Request::ExpandBatch { env, states } => self.env(&env).map(|e| Response::Batch {
                ok: true,
                results: states.iter().map(|s| Self::expand(&*e, s)).collect(),
            }),
        };
        result.unwrap_or_else(|e| e)
    }
}

/// Answers one JSON request per input line, in order, until end of input.
pub fn serve(input: &mut dyn BufRead, output: &mut dyn Write) -> io::Result<()> {
    let mut service = Service { envs: HashMap::new() };
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let resp = service.handle(trimmed);
        serde_json::to_writer(&mut *output, &resp)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
}
