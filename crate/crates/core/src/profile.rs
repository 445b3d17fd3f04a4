use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotationMatrix, GeneIds};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Continuous,
    Binary,
}

/// A gene-parameter profile: one value per gene, aligned with an annotation
/// matrix's rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterProfile {
    values: Vec<f64>,
    kind: ProfileKind,
    gene_ids: GeneIds,
}

impl ParameterProfile {
    pub fn new(values: Vec<f64>, kind: ProfileKind, gene_ids: impl Into<GeneIds>) -> Result<Self> {
        let gene_ids = gene_ids.into();
        if values.len() != gene_ids.len() {
            return Err(Error::LengthMismatch {
                expected: gene_ids.len(),
                found: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if kind == ProfileKind::Binary && v != 0.0 && v != 1.0 {
                return Err(Error::NotBinary { index: i, value: v });
            }
        }
        Ok(Self {
            values,
            kind,
            gene_ids,
        })
    }

    pub fn continuous(values: Vec<f64>, gene_ids: impl Into<GeneIds>) -> Result<Self> {
        Self::new(values, ProfileKind::Continuous, gene_ids)
    }

    pub fn binary(values: Vec<f64>, gene_ids: impl Into<GeneIds>) -> Result<Self> {
        Self::new(values, ProfileKind::Binary, gene_ids)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn gene_ids(&self) -> &GeneIds {
        &self.gene_ids
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Elementwise absolute value; the result is continuous.
    pub fn abs(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.abs()).collect(),
            kind: ProfileKind::Continuous,
            gene_ids: self.gene_ids.clone(),
        }
    }

    /// Number of entries equal to 1 (the selection size of a binary profile).
    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }

    pub fn check_aligned(&self, a: &AnnotationMatrix) -> Result<()> {
        if self.gene_ids.len() != a.n_genes() {
            return Err(Error::LengthMismatch {
                expected: a.n_genes(),
                found: self.gene_ids.len(),
            });
        }
        if !std::sync::Arc::ptr_eq(&self.gene_ids, a.gene_ids()) && self.gene_ids[..] != a.gene_ids()[..] {
            let pos = self
                .gene_ids
                .iter()
                .zip(a.gene_ids().iter())
                .position(|(x, y)| x != y)
                .unwrap_or(0);
            return Err(Error::Alignment(format!(
                "profile gene {} vs annotation gene {} at row {pos}",
                self.gene_ids[pos],
                a.gene_ids()[pos]
            )));
        }
        Ok(())
    }
}
