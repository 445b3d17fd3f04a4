use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Shared, immutable list of gene identifiers.
pub type GeneIds = Arc<[String]>;

pub(crate) fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

/// Fixed G x M matrix of gene-annotation profiles, one column per term.
///
/// Stored column-major so each annotation profile is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationMatrix {
    values: Vec<f64>,
    gene_ids: GeneIds,
    term_ids: Vec<String>,
    binary: bool,
}

impl AnnotationMatrix {
    /// Builds a matrix from its columns. `binary` asserts every entry is 0 or 1.
    pub fn from_columns(
        gene_ids: impl Into<GeneIds>,
        term_ids: Vec<String>,
        columns: Vec<Vec<f64>>,
        binary: bool,
    ) -> Result<Self> {
        let gene_ids = gene_ids.into();
        if columns.len() != term_ids.len() {
            return Err(Error::LengthMismatch {
                expected: term_ids.len(),
                found: columns.len(),
            });
        }
        check_unique(&gene_ids)?;
        check_unique(&term_ids)?;
        let g = gene_ids.len();
        let mut values = Vec::with_capacity(g * columns.len());
        for col in columns {
            if col.len() != g {
                return Err(Error::LengthMismatch {
                    expected: g,
                    found: col.len(),
                });
            }
            values.extend(col);
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if binary && v != 0.0 && v != 1.0 {
                return Err(Error::NotBinary { index: i, value: v });
            }
        }
        Ok(Self {
            values,
            gene_ids,
            term_ids,
            binary,
        })
    }

    /// Builds a binary matrix from per-term sets of annotated row indices.
    pub fn from_index_sets(
        gene_ids: impl Into<GeneIds>,
        term_ids: Vec<String>,
        sets: &[Vec<usize>],
    ) -> Result<Self> {
        let gene_ids: GeneIds = gene_ids.into();
        let g = gene_ids.len();
        let mut columns = Vec::with_capacity(sets.len());
        for set in sets {
            let mut col = vec![0.0; g];
            for &i in set {
                if i >= g {
                    return Err(Error::invalid(format!("gene index {i} out of range 0..{g}")));
                }
                col[i] = 1.0;
            }
            columns.push(col);
        }
        Self::from_columns(gene_ids, term_ids, columns, true)
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_terms(&self) -> usize {
        self.term_ids.len()
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn gene_ids(&self) -> &GeneIds {
        &self.gene_ids
    }

    pub fn term_ids(&self) -> &[String] {
        &self.term_ids
    }

    pub fn column(&self, m: usize) -> &[f64] {
        let g = self.n_genes();
        &self.values[m * g..(m + 1) * g]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_terms()).map(move |m| self.column(m))
    }

    pub fn get(&self, gene: usize, term: usize) -> f64 {
        self.values[term * self.n_genes() + gene]
    }

    /// A_1(m): number of genes with annotation value 1 in column `m`.
    pub fn annotated_count(&self, m: usize) -> usize {
        self.column(m).iter().filter(|&&v| v == 1.0).count()
    }

    pub fn term_index(&self, term_id: &str) -> Option<usize> {
        self.term_ids.iter().position(|t| t == term_id)
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_terms(&self, keep: &[usize]) -> Self {
        let columns = keep.iter().map(|&m| self.column(m).to_vec()).collect();
        let term_ids = keep.iter().map(|&m| self.term_ids[m].clone()).collect();
        Self::from_columns(self.gene_ids.clone(), term_ids, columns, self.binary)
            .expect("subset of a valid matrix is valid")
    }
}
