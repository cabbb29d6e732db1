//! Report type shared by the sampling-based hypothesis checkers.

use serde::Serialize;

/// Maximum number of witnesses kept per report.
pub const MAX_WITNESSES: usize = 16;

/// A sampled point where a checked inequality failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_other: Option<f64>,
    /// Amount by which the inequality was violated.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed `lhs - rhs`; negative when every sample has slack.
    pub worst_margin: f64,
    pub witnesses: Vec<Witness>,
}

impl CheckReport {
    pub(crate) fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: true,
            samples: 0,
            violations: 0,
            worst_margin: f64::NEG_INFINITY,
            witnesses: Vec::new(),
        }
    }

    /// Records one sample with margin `lhs - rhs` against violation threshold `tol`.
    pub(crate) fn record(&mut self, margin: f64, tol: f64, witness: impl FnOnce(f64) -> Witness) {
        self.samples += 1;
        if margin > self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
        }
        if margin > tol || margin.is_nan() {
            self.violations += 1;
            self.pass = false;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness(margin));
            }
        }
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.witnesses.first()
    }
}
