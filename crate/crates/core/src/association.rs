//! Association measures between annotation profiles and a gene-parameter
//! profile.
//!
//! Scalar kernels work on plain slices (`a` is one annotation column, `lambda`
//! the parameter values over the same genes). [`associate`] applies a measure
//! to every column of an [`AnnotationMatrix`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationMatrix;
use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};
use crate::profile::{ParameterProfile, ProfileKind};

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

fn check_binary(x: &[f64]) -> Result<()> {
    match x.iter().position(|&v| v != 0.0 && v != 1.0) {
        Some(index) => Err(Error::NotBinary {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

/// Pearson correlation between an annotation column and a parameter profile.
pub fn pearson_association(a: &[f64], lambda: &[f64]) -> Result<f64> {
    check_len(a, lambda)?;
    if a.len() < 2 {
        return Err(Error::invalid("Pearson correlation needs at least 2 genes"));
    }
    let ma = numeric::mean(a);
    let ml = numeric::mean(lambda);
    let mut cross = CompensatedSum::new();
    let mut ssa = CompensatedSum::new();
    let mut ssl = CompensatedSum::new();
    for (&x, &y) in a.iter().zip(lambda) {
        let (dx, dy) = (x - ma, y - ml);
        cross.add(dx * dy);
        ssa.add(dx * dx);
        ssl.add(dy * dy);
    }
    let (ssa, ssl) = (ssa.value(), ssl.value());
    if ssa <= 0.0 {
        return Err(Error::ZeroVariance("annotation profile"));
    }
    if ssl <= 0.0 {
        return Err(Error::ZeroVariance("parameter profile"));
    }
    Ok((cross.value() / (ssa.sqrt() * ssl.sqrt())).clamp(-1.0, 1.0))
}

/// Counts `[[g00, g01], [g10, g11]]` where `g_kk' = #{g : a(g)=k, lambda(g)=k'}`.
pub fn contingency_2x2(a: &[f64], lambda: &[f64]) -> Result<[[usize; 2]; 2]> {
    check_len(a, lambda)?;
    check_binary(a)?;
    check_binary(lambda)?;
    let mut t = [[0usize; 2]; 2];
    for (&x, &y) in a.iter().zip(lambda) {
        t[x as usize][y as usize] += 1;
    }
    Ok(t)
}

/// Chi-square statistic of the 2x2 table of two binary profiles, without
/// continuity correction.
pub fn chisq2x2_association(a: &[f64], lambda: &[f64]) -> Result<f64> {
    let [[g00, g01], [g10, g11]] = contingency_2x2(a, lambda)?;
    let (row0, row1) = (g00 + g01, g10 + g11);
    let (col0, col1) = (g00 + g10, g01 + g11);
    if row0 == 0 || row1 == 0 || col0 == 0 || col1 == 0 {
        return Err(Error::DegenerateMargin {
            row0,
            row1,
            col0,
            col1,
        });
    }
    let g = a.len() as f64;
    // the cross-product difference is exact in i128 for any realistic G
    let diff = (g00 as i128 * g11 as i128 - g01 as i128 * g10 as i128) as f64;
    let denom = row0 as f64 * col0 as f64 * col1 as f64 * row1 as f64;
    Ok(g * diff * diff / denom)
}

/// psi = A' lambda over every column.
pub fn sum_association(a: &AnnotationMatrix, lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != a.n_genes() {
        return Err(Error::LengthMismatch {
            expected: a.n_genes(),
            found: lambda.len(),
        });
    }
    Ok(a.columns().map(|col| sum_column(col, lambda)).collect())
}

fn sum_column(a: &[f64], lambda: &[f64]) -> f64 {
    numeric::sum(a.iter().zip(lambda).map(|(&x, &y)| x * y))
}

struct Groups {
    mean: [f64; 2],
    var: [f64; 2],
    size: [usize; 2],
}

fn split_groups(a: &[f64], lambda: &[f64]) -> Result<Groups> {
    check_len(a, lambda)?;
    check_binary(a)?;
    let mut members: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (&k, &x) in a.iter().zip(lambda) {
        members[k as usize].push(x);
    }
    let size = [members[0].len(), members[1].len()];
    if size[0] < 2 || size[1] < 2 {
        return Err(Error::GroupTooSmall {
            annotated: size[1],
            unannotated: size[0],
        });
    }
    let (m0, v0) = numeric::mean_var(&members[0], 1);
    let (m1, v1) = numeric::mean_var(&members[1], 1);
    Ok(Groups {
        mean: [m0, m1],
        var: [v0, v1],
        size,
    })
}

/// Welch two-sample t-statistic contrasting `lambda` over annotated (a=1)
/// versus unannotated (a=0) genes, with unbiased group variances.
pub fn welch_t_association(a: &[f64], lambda: &[f64]) -> Result<f64> {
    let gr = split_groups(a, lambda)?;
    let se2 = gr.var[1] / gr.size[1] as f64 + gr.var[0] / gr.size[0] as f64;
    if se2 <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((gr.mean[1] - gr.mean[0]) / se2.sqrt())
}

/// Stratified difference of means: genes are grouped by their row pattern
/// across `parents`, and strata holding both annotation states contribute
/// `mean(lambda | a=1) - mean(lambda | a=0)` weighted by stratum size among
/// usable strata. With no parents this is the plain difference of means.
pub fn marginal_causal_association(a: &[f64], parents: &[&[f64]], lambda: &[f64]) -> Result<f64> {
    check_len(a, lambda)?;
    check_binary(a)?;
    for p in parents {
        check_len(a, p)?;
        check_binary(p)?;
    }
    let mut strata: BTreeMap<Vec<u8>, [Vec<f64>; 2]> = BTreeMap::new();
    for (g, (&k, &x)) in a.iter().zip(lambda).enumerate() {
        let key: Vec<u8> = parents.iter().map(|p| p[g] as u8).collect();
        strata.entry(key).or_default()[k as usize].push(x);
    }
    let usable: Vec<_> = strata
        .values()
        .filter(|[s0, s1]| !s0.is_empty() && !s1.is_empty())
        .collect();
    if usable.is_empty() {
        return Err(Error::NoUsableStratum);
    }
    let total: usize = usable.iter().map(|[s0, s1]| s0.len() + s1.len()).sum();
    let mut acc = CompensatedSum::new();
    for [s0, s1] in usable {
        let w = (s0.len() + s1.len()) as f64 / total as f64;
        acc.add(w * (numeric::mean(s1) - numeric::mean(s0)));
    }
    Ok(acc.value())
}

/// Association measure selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Pearson,
    Chisq2x2,
    Sum,
    WelchT,
    /// `parents[m]` lists the column indices (within the same matrix) of the
    /// parent terms of column `m`.
    MarginalCausal { parents: Vec<Vec<usize>> },
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Pearson => "pearson",
            Measure::Chisq2x2 => "chisq2x2",
            Measure::Sum => "sum",
            Measure::WelchT => "welch_t",
            Measure::MarginalCausal { .. } => "marginal_causal",
        }
    }
}

/// Optional transform of the parameter profile before association.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileTransform {
    #[default]
    Identity,
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    pub psi: Vec<f64>,
    pub measure: Measure,
    pub null_values: Vec<f64>,
}

/// Column measure for a single term, as used by [`associate`].
pub fn associate_column(a: &AnnotationMatrix, m: usize, lambda: &[f64], measure: &Measure) -> Result<f64> {
    let col = a.column(m);
    match measure {
        Measure::Pearson => pearson_association(col, lambda),
        Measure::Chisq2x2 => chisq2x2_association(col, lambda),
        Measure::Sum => {
            check_len(col, lambda)?;
            Ok(sum_column(col, lambda))
        }
        Measure::WelchT => welch_t_association(col, lambda),
        Measure::MarginalCausal { parents } => {
            let idx = parents.get(m).ok_or(Error::LengthMismatch {
                expected: a.n_terms(),
                found: parents.len(),
            })?;
            let cols: Vec<&[f64]> = idx.iter().map(|&p| a.column(p)).collect();
            marginal_causal_association(col, &cols, lambda)
        }
    }
}

/// Applies `measure` to every annotation column; `psi(m) = rho(A(., m), f(lambda))`.
pub fn associate(
    a: &AnnotationMatrix,
    lambda: &ParameterProfile,
    measure: &Measure,
    transform: ProfileTransform,
    null_values: Vec<f64>,
) -> Result<AssociationResult> {
    lambda.check_aligned(a)?;
    if null_values.len() != a.n_terms() {
        return Err(Error::LengthMismatch {
            expected: a.n_terms(),
            found: null_values.len(),
        });
    }
    if *measure == Measure::Chisq2x2 {
        if lambda.kind() != ProfileKind::Binary || transform != ProfileTransform::Identity {
            return Err(Error::config("chisq2x2 requires an untransformed binary profile"));
        }
        if !a.is_binary() {
            return Err(Error::config("chisq2x2 requires a binary annotation matrix"));
        }
    }
    if let Measure::MarginalCausal { parents } = measure {
        if parents.len() != a.n_terms() {
            return Err(Error::LengthMismatch {
                expected: a.n_terms(),
                found: parents.len(),
            });
        }
    }
    let values: Vec<f64> = match transform {
        ProfileTransform::Identity => lambda.values().to_vec(),
        ProfileTransform::Absolute => lambda.values().iter().map(|v| v.abs()).collect(),
    };
    let psi = (0..a.n_terms())
        .map(|m| associate_column(a, m, &values, measure).map_err(|e| e.with_term(&a.term_ids()[m])))
        .collect::<Result<Vec<_>>>()?;
    Ok(AssociationResult {
        psi,
        measure: measure.clone(),
        null_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson_association(&[1., 2., 3.], &[1., 2., 3.]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_association(&[1., 2., 3.], &[3., 2., 1.]).unwrap() + 1.0).abs() < 1e-15);
        // 40-digit reference: 0.88257927587266037231...
        let r = pearson_association(&[0., 1., 1., 0., 1.], &[0.2, 1.4, 0.9, -0.1, 2.0]).unwrap();
        assert!((r - 0.882_579_275_872_660_4).abs() < 1e-15);
        assert!(matches!(
            pearson_association(&[1., 1., 1.], &[1., 2., 3.]),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            pearson_association(&[1., 2.], &[1., 2., 3.]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    fn table(g00: usize, g01: usize, g10: usize, g11: usize) -> (Vec<f64>, Vec<f64>) {
        let mut a = Vec::new();
        let mut l = Vec::new();
        for (x, y, k) in [(0., 0., g00), (0., 1., g01), (1., 0., g10), (1., 1., g11)] {
            a.extend(std::iter::repeat(x).take(k));
            l.extend(std::iter::repeat(y).take(k));
        }
        (a, l)
    }

    #[test]
    fn chisq_examples() {
        let (a, l) = table(25, 25, 25, 25);
        assert_eq!(chisq2x2_association(&a, &l).unwrap(), 0.0);
        // 100 * (1600 - 100)^2 / (50^4) = 36
        let (a, l) = table(40, 10, 10, 40);
        assert_eq!(chisq2x2_association(&a, &l).unwrap(), 36.0);
        let zeros = vec![0.0; 6];
        assert!(matches!(
            chisq2x2_association(&zeros, &[0., 1., 0., 1., 0., 1.]),
            Err(Error::DegenerateMargin { .. })
        ));
    }

    #[test]
    fn welch_examples() {
        let t = welch_t_association(&[0., 0., 1., 1.], &[1., 3., 5., 7.]).unwrap();
        assert!((t - 8f64.sqrt()).abs() < 1e-15);
        let zero = welch_t_association(&[0., 0., 1., 1.], &[1., 3., 1., 3.]).unwrap();
        assert_eq!(zero, 0.0);
        assert!(matches!(
            welch_t_association(&[1., 1., 1., 0.], &[1., 2., 3., 4.]),
            Err(Error::GroupTooSmall { annotated: 3, unannotated: 1 })
        ));
        assert!(matches!(
            welch_t_association(&[0., 0., 1., 1.], &[2., 2., 5., 5.]),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn marginal_causal_examples() {
        let lambda = [0., 2., 1., 5.];
        let parent = [0., 0., 1., 1.];
        let a = [0., 1., 0., 1.];
        assert_eq!(marginal_causal_association(&a, &[&parent], &lambda).unwrap(), 3.0);
        assert_eq!(marginal_causal_association(&a, &[], &lambda).unwrap(), 3.0);
        let none = marginal_causal_association(&[0., 0., 1., 1.], &[&parent], &lambda);
        assert!(matches!(none, Err(Error::NoUsableStratum)));
    }

    #[test]
    fn sum_example() {
        let a = AnnotationMatrix::from_index_sets(
            vec!["g1".to_string(), "g2".into(), "g3".into()],
            vec!["t1".into(), "t2".into()],
            &[vec![0, 1], vec![1, 2]],
        )
        .unwrap();
        assert_eq!(sum_association(&a, &[1., 2., 4.]).unwrap(), vec![3.0, 6.0]);
    }

    #[test]
    fn chisq_needs_binary_profile() {
        let a = AnnotationMatrix::from_index_sets(
            vec!["g1".to_string(), "g2".into(), "g3".into(), "g4".into()],
            vec!["t1".into()],
            &[vec![0, 1]],
        )
        .unwrap();
        let lam = ParameterProfile::continuous(vec![0., 1., 0., 1.], a.gene_ids().clone()).unwrap();
        let r = associate(&a, &lam, &Measure::Chisq2x2, ProfileTransform::Identity, vec![1.0]);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn column_errors_name_the_term() {
        let a = AnnotationMatrix::from_index_sets(
            vec!["g1".to_string(), "g2".into(), "g3".into(), "g4".into()],
            vec!["GO:1".into()],
            &[vec![0]],
        )
        .unwrap();
        let lam = ParameterProfile::continuous(vec![0., 1., 2., 3.], a.gene_ids().clone()).unwrap();
        let err = associate(&a, &lam, &Measure::WelchT, ProfileTransform::Identity, vec![0.0]).unwrap_err();
        assert!(err.to_string().starts_with("term GO:1"));
        assert!(err.is_degenerate());
    }
}
