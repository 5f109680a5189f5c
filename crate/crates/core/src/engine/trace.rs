//! Port-annotated trace events and their JSON-lines form.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::reader::{format, parse_term, ParseError};
use crate::terms::Term;

pub type NodeId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    Call,
    Exit,
    Redo,
    Fail,
    Throw,
    Catch,
    Backjump,
    Block,
    Unblock,
    Answer,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub port: Port,
    pub node: NodeId,
    /// The goal with all bindings current at the time of the event applied.
    pub goal: Term,
    /// Ball for Throw/Catch, target id for Backjump.
    pub payload: Option<Term>,
}

#[derive(Serialize, Deserialize)]
struct JsonEvent {
    port: Port,
    node: NodeId,
    goal: String,
    payload: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceReadError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    Term { line: usize, source: ParseError },
}

impl TraceEvent {
    pub fn new(port: Port, node: NodeId, goal: Term) -> Self {
        TraceEvent { port, node, goal, payload: None }
    }

    pub fn with_payload(mut self, payload: Term) -> Self {
        self.payload = Some(payload);
        self
    }

    pub fn to_json(&self) -> String {
        let ev = JsonEvent {
            port: self.port,
            node: self.node,
            goal: format(&self.goal),
            payload: self.payload.as_ref().map(format),
        };
        serde_json::to_string(&ev).expect("trace events serialize")
    }

    pub fn from_json(line: &str) -> Result<TraceEvent, TraceReadError> {
        Self::from_json_at(line, 1)
    }

    fn from_json_at(line: &str, lineno: usize) -> Result<TraceEvent, TraceReadError> {
        let ev: JsonEvent =
            serde_json::from_str(line).map_err(|source| TraceReadError::Json { line: lineno, source })?;
        let term = |s: &str| parse_term(s).map_err(|source| TraceReadError::Term { line: lineno, source });
        Ok(TraceEvent {
            port: ev.port,
            node: ev.node,
            goal: term(&ev.goal)?,
            payload: ev.payload.as_deref().map(term).transpose()?,
        })
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) {}", self.port, self.node, format(&self.goal))?;
        if let Some(p) = &self.payload {
            write!(f, " [{}]", format(p))?;
        }
        Ok(())
    }
}

pub fn write_json_lines(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for ev in trace {
        out.push_str(&ev.to_json());
        out.push('\n');
    }
    out
}

pub fn read_json_lines(text: &str) -> Result<Vec<TraceEvent>, TraceReadError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| TraceEvent::from_json_at(l, i + 1))
        .collect()
}

/// Checks the per-call port discipline: every node opens with Call, nothing
/// follows its Fail, and Exit/Redo occur only between the two.
pub fn check_well_formed(trace: &[TraceEvent]) -> Result<(), String> {
    #[derive(PartialEq)]
    enum State {
        Open,
        Failed,
    }
    let mut nodes: HashMap<NodeId, State> = HashMap::new();
    for (i, ev) in trace.iter().enumerate() {
        match ev.port {
            Port::Call => {
                if nodes.insert(ev.node, State::Open).is_some() {
                    return Err(format!("event {i}: second Call for node {}", ev.node));
                }
            }
            Port::Exit | Port::Redo | Port::Fail => match nodes.get(&ev.node) {
                Some(State::Open) => {
                    if ev.port == Port::Fail {
                        nodes.insert(ev.node, State::Failed);
                    }
                }
                Some(State::Failed) => {
                    return Err(format!("event {i}: {} after Fail for node {}", ev.port, ev.node))
                }
                None => {
                    return Err(format!("event {i}: {} before Call for node {}", ev.port, ev.node))
                }
            },
            _ => {}
        }
    }
    Ok(())
}
