//! The online instance model: an ordered sequence of vertex arrivals, each
//! carrying its back-edges to earlier vertices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertices are identified by their 0-based arrival index.
pub type VertexId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("event {event}: neighbor {neighbor} does not precede the vertex")]
    ForwardNeighbor { event: usize, neighbor: usize },
    #[error("event {event}: duplicate neighbor {neighbor}")]
    DuplicateNeighbor { event: usize, neighbor: usize },
    #[error("malformed text stream at line {line}: {reason}")]
    Text { line: usize, reason: String },
    #[error("malformed json stream: {0}")]
    Json(String),
    #[error("declared n = {declared} but stream has {actual} events")]
    LengthMismatch { declared: usize, actual: usize },
}

/// Optional declared parameters carried alongside the events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamMeta {
    /// Declared total vertex count, if the source committed to one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_n: Option<usize>,
    /// Declared chromatic bound, if the instance was built k-colorable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_k: Option<u32>,
}

/// An ordered list of vertex arrivals. Event `i` lists the neighbors of
/// vertex `i` among `0..i`, sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArrivalStream {
    events: Vec<Vec<VertexId>>,
    pub meta: StreamMeta,
}

#[derive(Serialize, Deserialize)]
struct StreamDoc {
    n: usize,
    events: Vec<Vec<usize>>,
    #[serde(default)]
    meta: StreamMeta,
}

impl ArrivalStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a stream from raw events, validating the arrival invariants.
    pub fn from_events(events: Vec<Vec<VertexId>>) -> Result<Self, StreamError> {
        let mut s = Self::new();
        for nbrs in events {
            s.push(nbrs)?;
        }
        Ok(s)
    }

    /// Appends one arrival; returns the new vertex id.
    pub fn push(&mut self, mut neighbors: Vec<VertexId>) -> Result<VertexId, StreamError> {
        let id = self.events.len();
        neighbors.sort_unstable();
        for w in neighbors.windows(2) {
            if w[0] == w[1] {
                return Err(StreamError::DuplicateNeighbor {
                    event: id,
                    neighbor: w[0],
                });
            }
        }
        if let Some(&last) = neighbors.last() {
            if last >= id {
                return Err(StreamError::ForwardNeighbor {
                    event: id,
                    neighbor: last,
                });
            }
        }
        self.events.push(neighbors);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.events[v]
    }

    pub fn events(&self) -> &[Vec<VertexId>] {
        &self.events
    }

    /// All edges as (earlier, later) pairs.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.events
            .iter()
            .enumerate()
            .flat_map(|(v, ns)| ns.iter().map(move |&u| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.events.iter().map(|ns| ns.len()).sum()
    }

    /// Adjacency as a bitmask per vertex; only valid for streams of at most
    /// 64 vertices (used by the small-graph oracles).
    pub fn adjacency_masks(&self) -> Option<Vec<u64>> {
        if self.len() > 64 {
            return None;
        }
        let mut adj = vec![0u64; self.len()];
        for (u, v) in self.edges() {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Some(adj)
    }

    // ------------------------------------------------------------------
    // Serialization: one JSON document and a line-oriented text form.
    // ------------------------------------------------------------------

    pub fn to_json(&self) -> String {
        let doc = StreamDoc {
            n: self.len(),
            events: self.events.clone(),
            meta: self.meta.clone(),
        };
        serde_json::to_string(&doc).expect("stream serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, StreamError> {
        let doc: StreamDoc =
            serde_json::from_str(text).map_err(|e| StreamError::Json(e.to_string()))?;
        if doc.n != doc.events.len() {
            return Err(StreamError::LengthMismatch {
                declared: doc.n,
                actual: doc.events.len(),
            });
        }
        let mut s = Self::from_events(doc.events)?;
        s.meta = doc.meta;
        Ok(s)
    }

    /// Text form, one line per event: `i: j1 j2 ...`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, ns) in self.events.iter().enumerate() {
            out.push_str(&i.to_string());
            out.push(':');
            for n in ns {
                out.push(' ');
                out.push_str(&n.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, StreamError> {
        let mut s = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(':').ok_or_else(|| StreamError::Text {
                line: lineno + 1,
                reason: "missing ':'".into(),
            })?;
            let idx: usize = head.trim().parse().map_err(|_| StreamError::Text {
                line: lineno + 1,
                reason: format!("bad index {head:?}"),
            })?;
            if idx != s.len() {
                return Err(StreamError::Text {
                    line: lineno + 1,
                    reason: format!("expected index {}, got {}", s.len(), idx),
                });
            }
            let mut nbrs = Vec::new();
            for tok in rest.split_whitespace() {
                nbrs.push(tok.parse().map_err(|_| StreamError::Text {
                    line: lineno + 1,
                    reason: format!("bad neighbor {tok:?}"),
                })?);
            }
            s.push(nbrs)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_rejects_forward_and_duplicate_neighbors() {
        let mut s = ArrivalStream::new();
        s.push(vec![]).unwrap();
        assert_eq!(
            s.push(vec![1]),
            Err(StreamError::ForwardNeighbor {
                event: 1,
                neighbor: 1
            })
        );
        s.push(vec![0]).unwrap();
        assert_eq!(
            s.push(vec![0, 0]),
            Err(StreamError::DuplicateNeighbor {
                event: 2,
                neighbor: 0
            })
        );
    }

    #[test]
    fn text_round_trip() {
        let s = ArrivalStream::from_events(vec![vec![], vec![0], vec![0, 1], vec![2]]).unwrap();
        let t = s.to_text();
        assert_eq!(t, "0:\n1: 0\n2: 0 1\n3: 2\n");
        assert_eq!(ArrivalStream::from_text(&t).unwrap(), s);
    }

    #[test]
    fn json_round_trip_keeps_meta() {
        let mut s = ArrivalStream::from_events(vec![vec![], vec![0]]).unwrap();
        s.meta.declared_k = Some(2);
        let j = s.to_json();
        assert_eq!(ArrivalStream::from_json(&j).unwrap(), s);
    }

    #[test]
    fn json_rejects_length_mismatch() {
        let bad = r#"{"n": 3, "events": [[]]}"#;
        assert!(matches!(
            ArrivalStream::from_json(bad),
            Err(StreamError::LengthMismatch { .. })
        ));
    }
}
