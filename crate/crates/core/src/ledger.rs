//! Color assignment bookkeeping: the per-vertex assignment built online and
//! the layer discipline that keeps distinct algorithm layers on disjoint
//! color ranges.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::stream::{ArrivalStream, VertexId};

/// Colors are positive integers.
pub type Color = u32;

/// Hands out disjoint half-open color ranges on demand. Layers that need
/// "completely new colors" request a fresh range; ranges never overlap.
#[derive(Debug, Clone)]
pub struct ColorAllocator {
    next: Color,
}

impl Default for ColorAllocator {
    fn default() -> Self {
        Self::new()
    }
}

impl ColorAllocator {
    pub fn new() -> Self {
        Self { next: 1 }
    }

    pub fn alloc_range(&mut self, len: u32) -> Range<Color> {
        let start = self.next;
        self.next += len;
        start..self.next
    }

    pub fn alloc_one(&mut self) -> Color {
        let c = self.next;
        self.next += 1;
        c
    }

    /// Highest color handed out so far.
    pub fn high_water(&self) -> Color {
        self.next - 1
    }
}

/// The coloring built online, together with which layer owns which range.
#[derive(Debug, Clone, Default)]
pub struct ColoringLedger {
    assignment: BTreeMap<VertexId, Color>,
    layers: BTreeMap<String, Vec<Range<Color>>>,
}

impl ColoringLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, v: VertexId, c: Color) {
        debug_assert!(c >= 1, "colors are positive");
        let prev = self.assignment.insert(v, c);
        debug_assert!(prev.is_none(), "vertex {v} colored twice");
    }

    pub fn color_of(&self, v: VertexId) -> Option<Color> {
        self.assignment.get(&v).copied()
    }

    pub fn record_layer_range(&mut self, tag: &str, range: Range<Color>) {
        self.layers.entry(tag.to_string()).or_default().push(range);
    }

    pub fn layers(&self) -> &BTreeMap<String, Vec<Range<Color>>> {
        &self.layers
    }

    pub fn assignment(&self) -> &BTreeMap<VertexId, Color> {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Number of distinct colors used.
    pub fn colors_used(&self) -> usize {
        let mut cs: Vec<Color> = self.assignment.values().copied().collect();
        cs.sort_unstable();
        cs.dedup();
        cs.len()
    }

    /// Distinct colors used per layer tag, judged by range ownership.
    pub fn per_layer_colors(&self) -> BTreeMap<String, usize> {
        let mut used: Vec<Color> = self.assignment.values().copied().collect();
        used.sort_unstable();
        used.dedup();
        let mut out = BTreeMap::new();
        for (tag, ranges) in &self.layers {
            let n = used
                .iter()
                .filter(|c| ranges.iter().any(|r| r.contains(c)))
                .count();
            out.insert(tag.clone(), n);
        }
        out
    }

    /// Checks that distinct layer tags own pairwise disjoint ranges.
    pub fn layers_disjoint(&self) -> bool {
        let mut all: Vec<(&str, &Range<Color>)> = Vec::new();
        for (tag, ranges) in &self.layers {
            for r in ranges {
                all.push((tag, r));
            }
        }
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if all[i].0 != all[j].0 {
                    let (a, b) = (all[i].1, all[j].1);
                    if a.start < b.end && b.start < a.end {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Outcome of checking a ledger against a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationReport {
    Ok,
    /// An arrived vertex has no assigned color.
    Incomplete { vertex: VertexId },
    /// First monochromatic edge, as (earlier, later).
    Violation { u: VertexId, v: VertexId },
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationReport::Ok)
    }
}

/// Validates a coloring: every arrived vertex colored, no edge monochromatic.
pub fn validate_coloring(stream: &ArrivalStream, ledger: &ColoringLedger) -> ValidationReport {
    for v in 0..stream.len() {
        if ledger.color_of(v).is_none() {
            return ValidationReport::Incomplete { vertex: v };
        }
    }
    for v in 0..stream.len() {
        let cv = ledger.color_of(v).unwrap();
        for &u in stream.neighbors(v) {
            if ledger.color_of(u) == Some(cv) {
                return ValidationReport::Violation { u, v };
            }
        }
    }
    ValidationReport::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocator_ranges_disjoint() {
        let mut a = ColorAllocator::new();
        let r1 = a.alloc_range(5);
        let r2 = a.alloc_range(3);
        assert_eq!(r1, 1..6);
        assert_eq!(r2, 6..9);
        assert_eq!(a.alloc_one(), 9);
    }

    #[test]
    fn single_vertex_ok() {
        let s = ArrivalStream::from_events(vec![vec![]]).unwrap();
        let mut l = ColoringLedger::new();
        l.assign(0, 1);
        assert_eq!(validate_coloring(&s, &l), ValidationReport::Ok);
    }

    #[test]
    fn monochromatic_edge_reported() {
        let s = ArrivalStream::from_events(vec![vec![], vec![0]]).unwrap();
        let mut l = ColoringLedger::new();
        l.assign(0, 1);
        l.assign(1, 1);
        assert_eq!(
            validate_coloring(&s, &l),
            ValidationReport::Violation { u: 0, v: 1 }
        );
    }

    #[test]
    fn missing_assignment_reported() {
        let s = ArrivalStream::from_events(vec![vec![], vec![0]]).unwrap();
        let mut l = ColoringLedger::new();
        l.assign(0, 1);
        assert_eq!(
            validate_coloring(&s, &l),
            ValidationReport::Incomplete { vertex: 1 }
        );
    }
}
