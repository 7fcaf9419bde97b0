//! Newline-delimited JSON messages exchanged with a neural operator server.

use serde::{Deserialize, Serialize};

use super::graph::{GraphMeta, GraphPayload};
use crate::error::{Error, Result};
use crate::model::{Schedule, ShiftCode};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hello {
    pub hello: u32,
    pub protocol: u32,
}

impl Default for Hello {
    fn default() -> Self {
        Hello {
            hello: 1,
            protocol: PROTOCOL_VERSION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ready {
    pub ready: bool,
    pub protocol: u32,
}

/// One graph as sent on the wire; the shape lives in the request's `meta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireGraph {
    pub employee_feats: Vec<Vec<f64>>,
    pub day_feats: Vec<Vec<f64>>,
    pub shift_feats: Vec<Vec<f64>>,
    pub edges_se: Vec<[usize; 2]>,
    pub edges_sd: Vec<[usize; 2]>,
    pub edges_ss: Vec<[usize; 2]>,
}

impl From<GraphPayload> for WireGraph {
    fn from(g: GraphPayload) -> Self {
        WireGraph {
            employee_feats: g.employee_feats,
            day_feats: g.day_feats,
            shift_feats: g.shift_feats,
            edges_se: g.edges_se,
            edges_sd: g.edges_sd,
            edges_ss: g.edges_ss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub meta: GraphMeta,
    pub graphs: Vec<WireGraph>,
}

/// Either `schedules` or `error` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedules: Option<Vec<Vec<Vec<u8>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Response {
    /// Checks the answer against the request shape and decodes it.
    pub fn into_schedules(self, count: usize, meta: GraphMeta) -> Result<Vec<Schedule>> {
        if let Some(msg) = self.error {
            return Err(Error::Operator(format!("neural operator error: {msg}")));
        }
        let raw = self
            .schedules
            .ok_or_else(|| Error::Protocol("response has neither schedules nor error".into()))?;
        if raw.len() != count {
            return Err(Error::Protocol(format!(
                "expected {count} schedules, got {}",
                raw.len()
            )));
        }
        raw.into_iter()
            .map(|rows| {
                if rows.len() != meta.employees || rows.iter().any(|r| r.len() != meta.days) {
                    return Err(Error::Protocol(format!(
                        "schedule shape does not match {}x{}",
                        meta.employees, meta.days
                    )));
                }
                if rows
                    .iter()
                    .flatten()
                    .any(|&c| ShiftCode::try_from(c).is_err())
                {
                    return Err(Error::Protocol("shift code outside 0..=3".into()));
                }
                Schedule::from_rows(&rows)
            })
            .collect()
    }
}

/// Reads the shift codes back out of a payload's one-hot block.
pub fn argmax_codes(meta: GraphMeta, graph: &WireGraph) -> Vec<Vec<u8>> {
    use super::graph::layout::CODE;
    (0..meta.employees)
        .map(|e| {
            (0..meta.days)
                .map(|d| {
                    let f = &graph.shift_feats[e * meta.days + d];
                    let mut best = 0;
                    for c in 1..4 {
                        if f[CODE + c] > f[CODE + best] {
                            best = c;
                        }
                    }
                    best as u8
                })
                .collect()
        })
        .collect()
}
