use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};

/// Observable sampled once per drive period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicSeries {
    values: Vec<f64>,
    period: f64,
    label: String,
}

impl StroboscopicSeries {
    pub fn new(values: Vec<f64>, period: f64, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(precondition("stroboscopic series must hold at least one sample"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(precondition(format!("sample {i} is not finite")));
        }
        Ok(Self {
            values,
            period,
            label: label.into(),
        })
    }

    /// Series with a unit period.
    pub fn unit(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(values, 1.0, label)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiply sample `n` by `(-1)^n`.
    pub fn demodulated(&self) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(n, v)| if n % 2 == 0 { *v } else { -*v })
            .collect();
        Self {
            values,
            period: self.period,
            label: format!("{} (demodulated)", self.label),
        }
    }

    /// Sub-range `[start, end)` of the samples.
    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.values.len() {
            return Err(precondition(format!(
                "window {start}..{end} outside series of length {}",
                self.values.len()
            )));
        }
        Ok(Self {
            values: self.values[start..end].to_vec(),
            period: self.period,
            label: self.label.clone(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}
