use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Diagnostics for one iterate x_k. The schedule fields are those of the
/// step that starts at x_k; `l` counts the Adam steps actually run there
/// (0 when the generator fit is skipped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub mu: f64,
    pub gamma: f64,
    pub l: usize,
    /// f(P x_k).
    pub fidelity: f64,
    /// ‖x_k‖_TV in the configured mode.
    pub tv: f64,
    /// Wall time since the solve started.
    pub time_ms: f64,
    /// PSNR of clamp(x_k) against the ground truth, when one was supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub psnr: Option<f64>,
}

impl TraceRecord {
    /// Equality ignoring wall time.
    pub fn same_numerics(&self, other: &Self) -> bool {
        self.k == other.k
            && self.mu.to_bits() == other.mu.to_bits()
            && self.gamma.to_bits() == other.gamma.to_bits()
            && self.l == other.l
            && self.fidelity.to_bits() == other.fidelity.to_bits()
            && self.tv.to_bits() == other.tv.to_bits()
            && self.psnr.map(f64::to_bits) == other.psnr.map(f64::to_bits)
    }
}

/// K+1 records, one per iterate including x_0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn total_time_ms(&self) -> f64 {
        self.last().map_or(0.0, |r| r.time_ms)
    }

    pub fn same_numerics(&self, other: &Self) -> bool {
        self.len() == other.len() && self.records.iter().zip(&other.records).all(|(a, b)| a.same_numerics(b))
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| invalid(format!("trace read: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let r = serde_json::from_str(&line).map_err(|e| invalid(format!("trace line {}: {e}", i + 1)))?;
            records.push(r);
        }
        Ok(Self { records })
    }
}
