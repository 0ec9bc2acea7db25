use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt::Write;

/// Execution counters, keyed by plan node id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Tuples output over all executions of a node.
    pub tuples_produced: BTreeMap<u32, u64>,
    /// Largest output of a single execution of a node.
    pub tuples_peak: BTreeMap<u32, u64>,
    pub loop_iterations: BTreeMap<u32, u64>,
    pub aggregations_executed: BTreeMap<u32, u64>,
    pub fixpoint_exits: u64,
    /// Node labels copied from the plan.
    pub labels: BTreeMap<u32, String>,
}

impl ExecStats {
    pub(crate) fn produced(&mut self, node: u32, n: usize) {
        let n = n as u64;
        *self.tuples_produced.entry(node).or_default() += n;
        let peak = self.tuples_peak.entry(node).or_default();
        *peak = (*peak).max(n);
    }

    /// Aggregations executed by all nodes carrying `label`.
    pub fn aggregations_labeled(&self, label: &str) -> u64 {
        self.labels
            .iter()
            .filter(|(_, l)| l.as_str() == label)
            .map(|(id, _)| self.aggregations_executed.get(id).copied().unwrap_or(0))
            .sum()
    }

    pub fn total_iterations(&self) -> u64 {
        self.loop_iterations.values().sum()
    }

    pub fn max_peak(&self) -> u64 {
        self.tuples_peak.values().copied().max().unwrap_or(0)
    }

    /// Line-oriented `key=value` text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fixpoint_exits={}", self.fixpoint_exits);
        let _ = writeln!(out, "loop_iterations={}", self.total_iterations());
        for (id, n) in &self.loop_iterations {
            let _ = writeln!(out, "loop_iterations.node{id}={n}");
        }
        let total: u64 = self.aggregations_executed.values().sum();
        let _ = writeln!(out, "aggregations_executed={total}");
        let mut by_label: BTreeMap<&str, u64> = BTreeMap::new();
        for label in self.labels.values() {
            by_label.insert(label, self.aggregations_labeled(label));
        }
        for (label, n) in by_label {
            let _ = writeln!(out, "aggregations_executed.{label}={n}");
        }
        for (id, n) in &self.aggregations_executed {
            let _ = writeln!(out, "aggregations_executed.node{id}={n}");
        }
        let _ = writeln!(out, "tuples_peak={}", self.max_peak());
        for (id, n) in &self.tuples_produced {
            let _ = writeln!(out, "tuples_produced.node{id}={n}");
        }
        for (id, n) in &self.tuples_peak {
            let _ = writeln!(out, "tuples_peak.node{id}={n}");
        }
        out
    }
}
