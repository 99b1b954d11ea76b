//! Solution traces: one state per line, each later line suffixed with the
//! action that produced it, lines joined by ` =>`.

use serde::{Deserialize, Serialize};

use super::{EnvError, Environment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub state: String,
    /// `None` only for the first step.
    pub action: Option<String>,
}

impl TraceStep {
    pub fn start(state: impl Into<String>) -> Self {
        TraceStep {
            state: state.into(),
            action: None,
        }
    }

    pub fn after(state: impl Into<String>, action: impl Into<String>) -> Self {
        TraceStep {
            state: state.into(),
            action: Some(action.into()),
        }
    }
}

/// Renders a trace without checking it against an environment.
pub fn format_trace(steps: &[TraceStep]) -> String {
    steps
        .iter()
        .map(|s| match &s.action {
            Some(a) => format!("{} | {}", s.state, a),
            None => s.state.clone(),
        })
        .collect::<Vec<_>>()
        .join(" =>\n")
}

/// Checks that every step is reachable from its predecessor with exactly
/// the recorded label, then renders it.
pub fn validate_trace(env: &dyn Environment, steps: &[TraceStep]) -> Result<String, EnvError> {
    if steps.is_empty() {
        return Err(EnvError::InvalidTrace {
            step: 0,
            reason: "empty trace".into(),
        });
    }
    env.canonicalize(&steps[0].state)
        .map_err(|e| EnvError::InvalidTrace {
            step: 0,
            reason: e.to_string(),
        })?;
    for (i, pair) in steps.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        let label = next.action.as_deref().ok_or_else(|| EnvError::InvalidTrace {
            step: i + 1,
            reason: "missing action label".into(),
        })?;
        let edges = env.expand(&prev.state).map_err(|e| EnvError::InvalidTrace {
            step: i,
            reason: e.to_string(),
        })?;
        match edges.iter().find(|e| e.label == label) {
            Some(edge) if edge.next_state == next.state => {}
            Some(edge) => {
                return Err(EnvError::InvalidTrace {
                    step: i + 1,
                    reason: format!(
                        "{label:?} leads to {:?}, not {:?}",
                        edge.next_state, next.state
                    ),
                })
            }
            None => {
                return Err(EnvError::InvalidTrace {
                    step: i + 1,
                    reason: format!("no action {label:?} at {:?}", prev.state),
                })
            }
        }
    }
    Ok(format_trace(steps))
}

/// Parses the text form produced by [`format_trace`].
///
/// A missing ` =>` at a line end is tolerated, since printed solutions
/// occasionally drop it.
pub fn parse_trace(text: &str) -> Result<Vec<TraceStep>, EnvError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        let line = line.strip_suffix("=>").unwrap_or(line).trim_end();
        if line.is_empty() {
            continue;
        }
        if steps.is_empty() {
            steps.push(TraceStep::start(line));
            continue;
        }
        let (state, action) = line.rsplit_once(" | ").ok_or_else(|| EnvError::InvalidTrace {
            step: i,
            reason: format!("line {line:?} has no action label"),
        })?;
        steps.push(TraceStep::after(state, action));
    }
    if steps.is_empty() {
        return Err(EnvError::InvalidTrace {
            step: 0,
            reason: "empty trace".into(),
        });
    }
    Ok(steps)
}
