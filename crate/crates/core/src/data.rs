use std::sync::Arc;

use crate::annotation::{check_unique, GeneIds};
use crate::error::{Error, Result};

/// Class-labelled expression sample: n observations of G log-scale
/// expression measures over exactly two classes.
///
/// Expressions are stored gene-major (`gene * n + sample`).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleData {
    expressions: Vec<f64>,
    labels: Vec<u8>,
    class_names: [String; 2],
    gene_ids: GeneIds,
    sample_ids: Arc<[String]>,
}

impl SampleData {
    /// `rows[g]` holds gene `g` across all samples; `labels[i]` is 0 (reference)
    /// or 1 (treatment).
    pub fn new(
        gene_ids: impl Into<GeneIds>,
        sample_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        class_names: [String; 2],
    ) -> Result<Self> {
        let gene_ids = gene_ids.into();
        let n = labels.len();
        if sample_ids.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: sample_ids.len(),
            });
        }
        if rows.len() != gene_ids.len() {
            return Err(Error::LengthMismatch {
                expected: gene_ids.len(),
                found: rows.len(),
            });
        }
        check_unique(&gene_ids)?;
        let mut expressions = Vec::with_capacity(n * rows.len());
        for row in rows {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            expressions.extend(row);
        }
        if let Some(i) = expressions.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::invalid(format!("class label {bad} is not 0 or 1")));
        }
        let data = Self {
            expressions,
            labels,
            class_names,
            gene_ids,
            sample_ids: sample_ids.into(),
        };
        let (n0, n1) = data.class_counts();
        if n0 < 2 || n1 < 2 {
            return Err(Error::invalid(format!(
                "each class needs at least 2 samples, found n0={n0}, n1={n1}"
            )));
        }
        Ok(data)
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn gene_ids(&self) -> &GeneIds {
        &self.gene_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String; 2] {
        &self.class_names
    }

    /// Expression measures of one gene across samples.
    pub fn gene_row(&self, g: usize) -> &[f64] {
        let n = self.n_samples();
        &self.expressions[g * n..(g + 1) * n]
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - n1, n1)
    }

    /// Rows drawn by index (with repetition allowed); units stay paired with
    /// their labels. Class-size invariants are not rechecked.
    pub fn resample(&self, indices: &[usize]) -> Self {
        let n = self.n_samples();
        let mut expressions = Vec::with_capacity(indices.len() * self.n_genes());
        for g in 0..self.n_genes() {
            let row = &self.expressions[g * n..(g + 1) * n];
            expressions.extend(indices.iter().map(|&i| row[i]));
        }
        Self {
            expressions,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            gene_ids: self.gene_ids.clone(),
            sample_ids: indices.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        }
    }

    /// Same expressions with a new label vector (used for permutations).
    pub fn with_labels(&self, labels: Vec<u8>) -> Self {
        assert_eq!(labels.len(), self.n_samples());
        Self {
            labels,
            ..self.clone()
        }
    }

    /// Swaps the roles of the reference and treatment classes.
    pub fn swap_classes(&self) -> Self {
        let [c0, c1] = self.class_names.clone();
        Self {
            labels: self.labels.iter().map(|l| 1 - l).collect(),
            class_names: [c1, c0],
            ..self.clone()
        }
    }

    /// Keeps the listed genes, in order.
    pub fn select_genes(&self, keep: &[usize]) -> Self {
        let rows = keep.iter().map(|&g| self.gene_row(g).to_vec()).collect();
        let ids: Vec<String> = keep.iter().map(|&g| self.gene_ids[g].clone()).collect();
        self.with_rows(ids, rows)
    }

    /// Replaces the gene dimension, keeping samples and labels.
    pub(crate) fn with_rows(&self, gene_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self {
            expressions: rows.into_iter().flatten().collect(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
            gene_ids: gene_ids.into(),
            sample_ids: self.sample_ids.clone(),
        }
    }
}
