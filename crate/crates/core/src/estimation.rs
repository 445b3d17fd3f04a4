//! Gene-parameter profile estimation from class-labelled expression data,
//! plus the gene filtering and probe collapsing preprocessing steps.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::SampleData;
use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};
use crate::profile::ParameterProfile;

/// Thresholds for [`filter_genes`]. Defaults keep genes whose raw intensity
/// exceeds 100 in at least a quarter of the samples and whose log-scale IQR
/// exceeds 0.5, with expressions on the log2 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub intensity_threshold: f64,
    pub fraction: f64,
    pub iqr_threshold: f64,
    pub raw_scale_base: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            intensity_threshold: 100.0,
            fraction: 0.25,
            iqr_threshold: 0.5,
            raw_scale_base: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterReport {
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    pub empty: bool,
}

/// Per-gene filter decision. The IQR uses type-7 quantiles.
pub fn gene_passes(values: &[f64], params: &FilterParams) -> bool {
    let n = values.len();
    let needed = (params.fraction * n as f64).ceil() as usize;
    let bright = values
        .iter()
        .filter(|&&x| params.raw_scale_base.powf(x) > params.intensity_threshold)
        .count();
    bright >= needed && numeric::iqr(values) > params.iqr_threshold
}

pub fn filter_genes(data: &SampleData, params: &FilterParams) -> Result<(SampleData, FilterReport)> {
    if !(params.fraction > 0.0 && params.fraction <= 1.0) {
        return Err(Error::invalid(format!("fraction {} outside (0, 1]", params.fraction)));
    }
    if !(params.raw_scale_base > 0.0) {
        return Err(Error::invalid("raw scale base must be positive"));
    }
    let (kept, dropped): (Vec<usize>, Vec<usize>) =
        (0..data.n_genes()).partition(|&g| gene_passes(data.gene_row(g), params));
    let empty = kept.is_empty();
    if empty {
        log::warn!("gene filter removed all {} genes", data.n_genes());
    }
    Ok((data.select_genes(&kept), FilterReport { kept, dropped, empty }))
}

/// Averages probe rows per gene. Output genes appear in order of first
/// occurrence among the probes.
pub fn collapse_probes(data: &SampleData, probe_to_gene: &HashMap<String, String>) -> Result<SampleData> {
    let mut order: Vec<&str> = Vec::new();
    let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
    for (p, probe) in data.gene_ids().iter().enumerate() {
        let gene = probe_to_gene
            .get(probe)
            .ok_or_else(|| Error::UnmappedProbe(probe.clone()))?;
        let entry = members.entry(gene.as_str()).or_default();
        if entry.is_empty() {
            order.push(gene);
        }
        entry.push(p);
    }
    let n = data.n_samples();
    let rows = order
        .iter()
        .map(|gene| {
            let probes = &members[gene];
            (0..n)
                .map(|i| numeric::sum(probes.iter().map(|&p| data.gene_row(p)[i])) / probes.len() as f64)
                .collect()
        })
        .collect();
    Ok(data.with_rows(order.iter().map(|s| s.to_string()).collect(), rows))
}

/// Per-class per-gene means and unbiased variances. Index 0 is the
/// reference class, 1 the treatment class.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub mean_by_class: [Vec<f64>; 2],
    pub var_by_class: [Vec<f64>; 2],
    pub counts: (usize, usize),
    pub gene_ids: crate::annotation::GeneIds,
}

impl GroupSummary {
    pub fn n(&self) -> usize {
        self.counts.0 + self.counts.1
    }
}

pub fn group_summary(data: &SampleData) -> GroupSummary {
    let g = data.n_genes();
    let (n0, n1) = data.class_counts();
    let labels = data.labels();
    let mut mean_by_class = [Vec::with_capacity(g), Vec::with_capacity(g)];
    let mut var_by_class = [Vec::with_capacity(g), Vec::with_capacity(g)];
    let counts = [n0 as f64, n1 as f64];
    for gene in 0..g {
        let row = data.gene_row(gene);
        let mut s = [CompensatedSum::new(), CompensatedSum::new()];
        for (&x, &l) in row.iter().zip(labels) {
            s[l as usize].add(x);
        }
        let means = [s[0].value() / counts[0], s[1].value() / counts[1]];
        let mut ss = [CompensatedSum::new(), CompensatedSum::new()];
        for (&x, &l) in row.iter().zip(labels) {
            let d = x - means[l as usize];
            ss[l as usize].add(d * d);
        }
        for k in 0..2 {
            mean_by_class[k].push(means[k]);
            var_by_class[k].push(ss[k].value() / (counts[k] - 1.0));
        }
    }
    GroupSummary {
        mean_by_class,
        var_by_class,
        counts: (n0, n1),
        gene_ids: data.gene_ids().clone(),
    }
}

/// Difference of class means, treatment minus reference.
pub fn lambda_d(summary: &GroupSummary) -> ParameterProfile {
    let values = summary.mean_by_class[1]
        .iter()
        .zip(&summary.mean_by_class[0])
        .map(|(m1, m0)| m1 - m0)
        .collect();
    ParameterProfile::continuous(values, summary.gene_ids.clone()).expect("finite summary")
}

/// Scale of the standardized DE profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaScale {
    /// Plain Welch t-statistic.
    #[default]
    Welch,
    /// Welch t-statistic multiplied by 1/sqrt(n).
    RootN,
}

impl std::str::FromStr for LambdaScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "welch" => Ok(LambdaScale::Welch),
            "root-n" | "root_n" => Ok(LambdaScale::RootN),
            other => Err(Error::config(format!("unknown lambda scale {other:?}"))),
        }
    }
}

/// Standardized difference of class means. Fails listing every gene with a
/// zero denominator.
pub fn lambda_t(summary: &GroupSummary, scale: LambdaScale) -> Result<ParameterProfile> {
    let (n0, n1) = (summary.counts.0 as f64, summary.counts.1 as f64);
    let factor = match scale {
        LambdaScale::Welch => 1.0,
        LambdaScale::RootN => 1.0 / (summary.n() as f64).sqrt(),
    };
    let mut bad = Vec::new();
    let mut values = Vec::with_capacity(summary.gene_ids.len());
    for g in 0..summary.gene_ids.len() {
        let se2 = summary.var_by_class[1][g] / n1 + summary.var_by_class[0][g] / n0;
        if se2 <= 0.0 {
            bad.push(summary.gene_ids[g].clone());
            continue;
        }
        let d = summary.mean_by_class[1][g] - summary.mean_by_class[0][g];
        values.push(factor * d / se2.sqrt());
    }
    if !bad.is_empty() {
        return Err(Error::ZeroDenominatorGenes(bad));
    }
    ParameterProfile::continuous(values, summary.gene_ids.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    TwoSided,
    Upper,
    Lower,
}

/// Binary DE profile marking genes whose score s(g) satisfies
/// `#{g' : s(g) >= s(g')} > G - count`, with s = |t|, t, or -t by side.
/// Ties at the boundary can select more than `count` genes; the realized size
/// is returned alongside.
pub fn binary_profile_top_count(
    lambda_t: &ParameterProfile,
    count: usize,
    side: Side,
) -> Result<(ParameterProfile, usize)> {
    let g = lambda_t.len();
    if count == 0 || count > g {
        return Err(Error::invalid(format!("count {count} outside 1..={g}")));
    }
    let score = |v: f64| match side {
        Side::TwoSided => v.abs(),
        Side::Upper => v,
        Side::Lower => -v,
    };
    let mut sorted: Vec<f64> = lambda_t.values().iter().map(|&v| score(v)).collect();
    sorted.sort_by(f64::total_cmp);
    let values: Vec<f64> = lambda_t
        .values()
        .iter()
        .map(|&v| {
            let s = score(v);
            // number of g' with s(g') <= s
            let dominated = sorted.partition_point(|&x| x <= s);
            if dominated > g - count {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let realized = values.iter().filter(|&&v| v == 1.0).count();
    Ok((ParameterProfile::binary(values, lambda_t.gene_ids().clone())?, realized))
}

/// Binary DE profile `I(p(g) <= alpha)` from gene-level adjusted p-values.
pub fn binary_profile_by_adjp(
    adjusted_p: &[f64],
    alpha: f64,
    gene_ids: crate::annotation::GeneIds,
) -> Result<ParameterProfile> {
    if let Some(index) = adjusted_p.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::OutOfRangeP {
            index,
            value: adjusted_p[index],
        });
    }
    let values = adjusted_p.iter().map(|&p| if p <= alpha { 1.0 } else { 0.0 }).collect();
    ParameterProfile::binary(values, gene_ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> SampleData {
        let ids: Vec<String> = (0..rows.len()).map(|g| format!("g{g}")).collect();
        let samples = (0..labels.len()).map(|i| format!("s{i}")).collect();
        SampleData::new(ids, samples, rows, labels, ["neg".into(), "pos".into()]).unwrap()
    }

    fn profile(values: Vec<f64>) -> ParameterProfile {
        let ids: Vec<String> = (0..values.len()).map(|g| format!("g{g}")).collect();
        ParameterProfile::continuous(values, ids).unwrap()
    }

    #[test]
    fn filter_defaults_drop_dim_and_flat_genes() {
        let l50 = 50f64.log2();
        let l200 = 200f64.log2();
        let d = data(
            vec![vec![l50; 4], vec![l200; 4], vec![5.0, 8.0, 9.0, 12.0]],
            vec![0, 0, 1, 1],
        );
        let (out, report) = filter_genes(&d, &FilterParams::default()).unwrap();
        assert_eq!(report.kept, vec![2]);
        assert_eq!(out.gene_ids()[0], "g2");
    }

    #[test]
    fn filter_can_empty_without_failing() {
        let d = data(vec![vec![1.0; 4]], vec![0, 0, 1, 1]);
        let (out, report) = filter_genes(&d, &FilterParams::default()).unwrap();
        assert!(report.empty);
        assert_eq!(out.n_genes(), 0);
    }

    #[test]
    fn collapse_averages_probes() {
        let d = data(vec![vec![1.0, 3.0, 0.0, 0.0], vec![3.0, 5.0, 2.0, 2.0]], vec![0, 0, 1, 1]);
        let map: HashMap<String, String> = [("g0", "A"), ("g1", "A")]
            .into_iter()
            .map(|(p, g)| (p.to_string(), g.to_string()))
            .collect();
        let out = collapse_probes(&d, &map).unwrap();
        assert_eq!(out.n_genes(), 1);
        assert_eq!(out.gene_row(0), &[2.0, 4.0, 1.0, 1.0]);
        let partial: HashMap<String, String> = [("g0".to_string(), "A".to_string())].into_iter().collect();
        assert!(matches!(collapse_probes(&d, &partial), Err(Error::UnmappedProbe(p)) if p == "g1"));
    }

    #[test]
    fn summary_examples() {
        let d = data(vec![vec![4.0, 4.0, 1.0, 3.0]], vec![0, 0, 1, 1]);
        let s = group_summary(&d);
        assert_eq!(s.mean_by_class[0][0], 4.0);
        assert_eq!(s.var_by_class[0][0], 0.0);
        assert_eq!(s.mean_by_class[1][0], 2.0);
        assert_eq!(s.var_by_class[1][0], 2.0);
        assert_eq!(lambda_d(&s).values(), &[-2.0]);
    }

    #[test]
    fn lambda_t_both_scales() {
        let d = data(vec![vec![1.0, 3.0, 5.0, 7.0]], vec![0, 0, 1, 1]);
        let s = group_summary(&d);
        let welch = lambda_t(&s, LambdaScale::Welch).unwrap().values()[0];
        let rootn = lambda_t(&s, LambdaScale::RootN).unwrap().values()[0];
        assert!((welch - 8f64.sqrt()).abs() < 1e-15);
        assert!((rootn - 8f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_t_reports_zero_denominator_genes() {
        let d = data(vec![vec![1.0, 1.0, 2.0, 2.0], vec![1.0, 2.0, 3.0, 4.0]], vec![0, 0, 1, 1]);
        let err = lambda_t(&group_summary(&d), LambdaScale::Welch).unwrap_err();
        assert!(matches!(err, Error::ZeroDenominatorGenes(ref g) if g == &["g0".to_string()]));
    }

    #[test]
    fn top_count_examples() {
        let (p, k) = binary_profile_top_count(&profile(vec![5., -3., 1., 0.]), 2, Side::TwoSided).unwrap();
        assert_eq!(p.values(), &[1., 1., 0., 0.]);
        assert_eq!(k, 2);
        let (p, k) = binary_profile_top_count(&profile(vec![2., 2., 1.]), 1, Side::Upper).unwrap();
        assert_eq!(p.values(), &[1., 1., 0.]);
        assert_eq!(k, 2);
        let (p, _) = binary_profile_top_count(&profile(vec![2., -2., 1.]), 3, Side::Lower).unwrap();
        assert_eq!(p.values(), &[1., 1., 1.]);
        let (p, _) = binary_profile_top_count(&profile(vec![2., -2., 1.]), 1, Side::Lower).unwrap();
        assert_eq!(p.values(), &[0., 1., 0.]);
    }

    #[test]
    fn adjp_examples() {
        let ids: crate::annotation::GeneIds = vec!["a".to_string(), "b".into(), "c".into()].into();
        let p = binary_profile_by_adjp(&[0.01, 0.05, 0.06], 0.05, ids.clone()).unwrap();
        assert_eq!(p.values(), &[1., 1., 0.]);
        let p = binary_profile_by_adjp(&[1.0, 1.0, 1.0], 0.05, ids.clone()).unwrap();
        assert_eq!(p.count_ones(), 0);
        assert!(matches!(
            binary_profile_by_adjp(&[0.5, 1.5, 0.0], 0.05, ids),
            Err(Error::OutOfRangeP { index: 1, .. })
        ));
    }
}
