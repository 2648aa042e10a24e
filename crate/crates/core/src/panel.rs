use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{GnarError, Result};

/// `d x T` observation matrix: one row per node, one column per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    values: DMatrix<f64>,
    node_labels: Vec<String>,
    time_labels: Vec<String>,
    metadata: Vec<(String, String)>,
}

impl TimeSeriesPanel {
    pub fn new(
        values: DMatrix<f64>,
        node_labels: Vec<String>,
        time_labels: Vec<String>,
    ) -> Result<Self> {
        if values.ncols() == 0 || values.nrows() == 0 {
            return Err(GnarError::DimensionMismatch(
                "panel needs at least one node and one time step".into(),
            ));
        }
        if node_labels.len() != values.nrows() || time_labels.len() != values.ncols() {
            return Err(GnarError::DimensionMismatch(format!(
                "{} node labels and {} time labels for a {}x{} panel",
                node_labels.len(),
                time_labels.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(GnarError::DimensionMismatch(format!(
                "panel contains non-finite value {bad}"
            )));
        }
        Ok(Self {
            values,
            node_labels,
            time_labels,
            metadata: Vec::new(),
        })
    }

    /// Numbered labels `1..=d` for nodes and `1..=T` for time.
    pub fn from_values(values: DMatrix<f64>) -> Result<Self> {
        let nodes = (1..=values.nrows()).map(|i| i.to_string()).collect();
        let times = (1..=values.ncols()).map(|t| t.to_string()).collect();
        Self::new(values, nodes, times)
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    pub fn node_labels(&self) -> &[String] {
        &self.node_labels
    }

    pub fn time_labels(&self) -> &[String] {
        &self.time_labels
    }

    /// `X_t` for 0-based `t`.
    pub fn at(&self, t: usize) -> DVector<f64> {
        self.values.column(t).into_owned()
    }

    pub fn get(&self, node: usize, t: usize) -> f64 {
        self.values[(node, t)]
    }

    /// Time steps in `range` (0-based, half-open).
    pub fn slice_time(&self, range: Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(GnarError::DimensionMismatch(format!(
                "time range {range:?} outside panel of length {}",
                self.len()
            )));
        }
        let values = self.values.columns(range.start, range.len()).into_owned();
        Ok(Self {
            values,
            node_labels: self.node_labels.clone(),
            time_labels: self.time_labels[range].to_vec(),
            metadata: self.metadata.clone(),
        })
    }

    /// Same labels, new values.
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        let mut out = Self::new(values, self.node_labels.clone(), self.time_labels.clone())?;
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    /// Per-node sample means over the whole time range.
    pub fn node_means(&self) -> DVector<f64> {
        self.values.column_mean()
    }

    /// Subtracts `means[i]` from every observation of node `i`.
    pub fn centred_by(&self, means: &DVector<f64>) -> Result<Self> {
        if means.len() != self.node_count() {
            return Err(GnarError::DimensionMismatch(format!(
                "{} means for {} nodes",
                means.len(),
                self.node_count()
            )));
        }
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            col -= means;
        }
        self.with_values(values)
    }

    /// Reorders nodes: row `perm[i]` of the result is row `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut values = DMatrix::zeros(self.node_count(), self.len());
        let mut labels = vec![String::new(); self.node_count()];
        for (old, &new) in perm.iter().enumerate() {
            values.set_row(new, &self.values.row(old));
            labels[new] = self.node_labels[old].clone();
        }
        Self {
            values,
            node_labels: labels,
            time_labels: self.time_labels.clone(),
            metadata: self.metadata.clone(),
        }
    }
}
