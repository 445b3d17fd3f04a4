//! End-to-end association testing scenarios.
//!
//! * `tt`: psi = welch_t(A, |lambda_t|), two-sided, psi0 = 0
//! * `dt`: psi = welch_t(A, |lambda_d|), two-sided, psi0 = 0
//! * `neq_chi`: psi = chisq2x2(A, lambda_neq), one-sided, psi0 = 1, where
//!   lambda_neq marks DE genes by a top-count rule or by an inner gene-level
//!   maxT test
//!
//! Test statistics are `sqrt(n) (psi_n - psi0)`. The null distribution
//! resamples whole units and recomputes the full lambda -> psi -> T chain on
//! every replicate, including the inner DE test.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationMatrix;
use crate::association::{chisq2x2_association, welch_t_association};
use crate::data::SampleData;
use crate::de::{de_test, DeTestConfig};
use crate::error::{Error, Result};
use crate::estimation::{binary_profile_by_adjp, binary_profile_top_count, group_summary, lambda_d, lambda_t, LambdaScale, Side};
use crate::mtp::{
    difference_statistics, resample_null, single_step_maxt, Evaluation, MtpResult, NullTransform, ReplicateContext,
    ResampleOptions, Scheme, Sidedness, StatisticComputer,
};
use crate::profile::ParameterProfile;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Tt,
    Dt,
    NeqChi,
}

impl ScenarioKind {
    pub fn sidedness(self) -> Sidedness {
        match self {
            ScenarioKind::Tt | ScenarioKind::Dt => Sidedness::TwoSided,
            ScenarioKind::NeqChi => Sidedness::OneSidedUpper,
        }
    }

    /// Null value of the association parameter: 0 for the t-based measure,
    /// the chi-square(1) mean for the chi-square measure.
    pub fn psi0(self) -> f64 {
        match self {
            ScenarioKind::Tt | ScenarioKind::Dt => 0.0,
            ScenarioKind::NeqChi => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Tt => "tt",
            ScenarioKind::Dt => "dt",
            ScenarioKind::NeqChi => "neq-chi",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tt" => Ok(ScenarioKind::Tt),
            "dt" => Ok(ScenarioKind::Dt),
            "neq-chi" | "neq_chi" => Ok(ScenarioKind::NeqChi),
            other => Err(Error::config(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Estimator of the binary DE profile for `neq_chi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeEstimator {
    /// Genes with the largest |lambda_t| (ties may over-select).
    TopCount { count: usize },
    /// Genes with inner maxT adjusted p-value <= alpha.
    AdjP {
        alpha: f64,
        b_inner: usize,
        scheme: Scheme,
        transform: NullTransform,
    },
}

impl DeEstimator {
    /// Parses `top:K` or `adjp:ALPHA` (inner B and scheme from the arguments).
    pub fn parse(spec: &str, b_inner: usize, scheme: Scheme) -> Result<Self> {
        let (kind, value) = spec
            .split_once(':')
            .ok_or_else(|| Error::config(format!("DE estimator {spec:?} is not top:K or adjp:ALPHA")))?;
        match kind {
            "top" => {
                let count = value
                    .parse()
                    .map_err(|_| Error::config(format!("bad DE gene count {value:?}")))?;
                Ok(DeEstimator::TopCount { count })
            }
            "adjp" => {
                let alpha = value
                    .parse()
                    .map_err(|_| Error::config(format!("bad inner alpha {value:?}")))?;
                Ok(DeEstimator::AdjP {
                    alpha,
                    b_inner,
                    scheme,
                    transform: NullTransform::ShiftAndScale,
                })
            }
            _ => Err(Error::config(format!("unknown DE estimator {kind:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub de_estimator: Option<DeEstimator>,
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub lambda_scale: LambdaScale,
    pub scheme: Scheme,
    pub retry_cap: usize,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind, b: usize, seed: u64) -> Self {
        Self {
            scenario,
            de_estimator: None,
            b,
            alpha: 0.05,
            seed,
            lambda_scale: LambdaScale::Welch,
            scheme: Scheme::BootstrapNonparam,
            retry_cap: 100,
        }
    }

    pub fn with_de_estimator(mut self, est: DeEstimator) -> Self {
        self.de_estimator = Some(est);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.scenario, &self.de_estimator) {
            (ScenarioKind::Tt | ScenarioKind::Dt, Some(_)) => {
                return Err(Error::config(format!(
                    "scenario {} takes no DE estimator",
                    self.scenario.name()
                )))
            }
            (ScenarioKind::NeqChi, None) => {
                return Err(Error::config("scenario neq-chi needs a DE estimator"));
            }
            (_, Some(DeEstimator::TopCount { count: 0 })) => {
                return Err(Error::config("DE gene count must be positive"));
            }
            (_, Some(DeEstimator::AdjP { alpha, b_inner, .. })) => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::config(format!("inner alpha {alpha} outside (0, 1)")));
                }
                if *b_inner < 2 {
                    return Err(Error::config("inner B must be at least 2"));
                }
            }
            _ => {}
        }
        if self.b < 2 {
            return Err(Error::config(format!("B must be at least 2, got {}", self.b)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }

    pub fn b_inner(&self) -> Option<usize> {
        match self.de_estimator {
            Some(DeEstimator::AdjP { b_inner, .. }) => Some(b_inner),
            _ => None,
        }
    }
}

/// Estimated gene-parameter profile for the scenario on `data`, plus the
/// realized DE-gene count for binary profiles.
pub fn scenario_profile(
    data: &SampleData,
    cfg: &ScenarioConfig,
    ctx: ReplicateContext,
) -> Result<(ParameterProfile, Option<usize>)> {
    let summary = group_summary(data);
    match cfg.scenario {
        ScenarioKind::Tt => Ok((lambda_t(&summary, cfg.lambda_scale)?, None)),
        ScenarioKind::Dt => Ok((lambda_d(&summary), None)),
        ScenarioKind::NeqChi => match cfg.de_estimator.as_ref() {
            Some(DeEstimator::TopCount { count }) => {
                let t = lambda_t(&summary, cfg.lambda_scale)?;
                let (p, k) = binary_profile_top_count(&t, *count, Side::TwoSided)?;
                Ok((p, Some(k)))
            }
            Some(DeEstimator::AdjP {
                alpha,
                b_inner,
                scheme,
                transform,
            }) => {
                let inner = DeTestConfig {
                    b: *b_inner,
                    alpha: *alpha,
                    scheme: *scheme,
                    transform: *transform,
                    scale: cfg.lambda_scale,
                    retry_cap: cfg.retry_cap,
                };
                let seed = rng::derive_seed(ctx.seed, ctx.replicate, "inner");
                let res = de_test(data, &inner, seed, 1)?;
                let p = binary_profile_by_adjp(&res.mtp.adjusted_p, *alpha, data.gene_ids().clone())?;
                let k = p.count_ones();
                Ok((p, Some(k)))
            }
            None => Err(Error::config("scenario neq-chi needs a DE estimator")),
        },
    }
}

/// Association vector psi_n for the scenario. For `neq_chi`, columns whose
/// 2x2 table has an empty margin get psi = 0 and are counted in `flagged`;
/// `tt`/`dt` do the same when |lambda| is constant across genes.
pub fn scenario_psi(a: &AnnotationMatrix, kind: ScenarioKind, lambda: &ParameterProfile) -> Result<Evaluation> {
    let mut flagged = 0;
    let mut values = Vec::with_capacity(a.n_terms());
    match kind {
        ScenarioKind::Tt | ScenarioKind::Dt => {
            let abs: Vec<f64> = lambda.values().iter().map(|v| v.abs()).collect();
            // a constant profile has zero numerator and zero denominator: no association
            let constant = abs.iter().all(|&v| v == abs[0]);
            for (m, col) in a.columns().enumerate() {
                if constant {
                    flagged += 1;
                    values.push(0.0);
                    continue;
                }
                values.push(welch_t_association(col, &abs).map_err(|e| e.with_term(&a.term_ids()[m]))?);
            }
        }
        ScenarioKind::NeqChi => {
            for (m, col) in a.columns().enumerate() {
                match chisq2x2_association(col, lambda.values()) {
                    Ok(v) => values.push(v),
                    Err(Error::DegenerateMargin { .. }) => {
                        flagged += 1;
                        values.push(0.0);
                    }
                    Err(e) => return Err(e.with_term(&a.term_ids()[m])),
                }
            }
        }
    }
    Ok(Evaluation { values, flagged })
}

/// The scenario's statistic vector as a resampling statistic.
pub struct ScenarioStatistic<'a> {
    pub annotation: &'a AnnotationMatrix,
    pub config: &'a ScenarioConfig,
}

impl ScenarioStatistic<'_> {
    fn evaluate(&self, data: &SampleData, ctx: ReplicateContext) -> Result<(Evaluation, Evaluation, Option<usize>)> {
        let (lambda, realized) = scenario_profile(data, self.config, ctx)?;
        let psi = scenario_psi(self.annotation, self.config.scenario, &lambda)?;
        let psi0 = vec![self.config.scenario.psi0(); psi.values.len()];
        let t = difference_statistics(&psi.values, &psi0, data.n_samples())?;
        let flagged = psi.flagged;
        Ok((psi, Evaluation { values: t, flagged }, realized))
    }
}

impl StatisticComputer for ScenarioStatistic<'_> {
    fn n_stats(&self) -> usize {
        self.annotation.n_terms()
    }

    fn sidedness(&self) -> Sidedness {
        self.config.scenario.sidedness()
    }

    fn compute(&self, data: &SampleData, ctx: ReplicateContext) -> Result<Evaluation> {
        self.evaluate(data, ctx).map(|(_, t, _)| t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub term_id: String,
    pub n_annotated: usize,
    pub psi_hat: f64,
    pub stat: f64,
    pub adj_p: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRunInfo {
    pub seed: u64,
    pub b: usize,
    pub b_inner: Option<usize>,
    pub realized_de_count: Option<usize>,
    /// Observed-data columns with a degenerate 2x2 margin.
    pub observed_flagged: usize,
    /// Replicate-level degenerate-margin substitutions.
    pub replicate_flagged: usize,
    pub replicate_retries: usize,
    pub rng: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    /// Sorted by the adjusted-p ordering.
    pub rows: Vec<ReportRow>,
    pub config: ScenarioConfig,
    pub info: ScenarioRunInfo,
    pub mtp: MtpResult,
}

impl ScenarioReport {
    /// Term ids of the first `r` rows.
    pub fn top(&self, r: usize) -> BTreeSet<&str> {
        self.rows.iter().take(r).map(|row| row.term_id.as_str()).collect()
    }

    /// (rank, adjusted p) pairs for sorted-p plots.
    pub fn sorted_p(&self) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.rank, r.adj_p)).collect()
    }
}

/// Runs one scenario end to end; `workers` as in [`ResampleOptions::workers`].
pub fn run_scenario(
    data: &SampleData,
    a: &AnnotationMatrix,
    cfg: &ScenarioConfig,
    workers: usize,
) -> Result<ScenarioReport> {
    cfg.validate()?;
    if data.gene_ids()[..] != a.gene_ids()[..] {
        return Err(Error::Alignment(format!(
            "expression data has {} genes, annotation matrix {} (ids must match in order)",
            data.n_genes(),
            a.n_genes()
        )));
    }
    if a.n_terms() == 0 {
        return Err(Error::invalid("annotation matrix has no terms"));
    }
    let stat = ScenarioStatistic {
        annotation: a,
        config: cfg,
    };
    let (psi, observed, realized) = stat.evaluate(data, ReplicateContext::observed(cfg.seed))?;
    let mut opts = ResampleOptions::new(cfg.b, cfg.scheme, cfg.seed, NullTransform::ShiftOnly);
    opts.retry_cap = cfg.retry_cap;
    opts.workers = workers;
    let null = resample_null(data, &stat, &opts).map_err(|e| match e {
        Error::DegenerateReplicate { replicate, attempts, reason } => Error::DegenerateReplicate {
            replicate,
            attempts,
            reason: format!("scenario {}: {reason}", cfg.scenario.name()),
        },
        other => other,
    })?;
    let mtp = single_step_maxt(&null, &observed.values, cfg.alpha)?;
    let ranks = mtp.ranks();
    let rows = mtp
        .ordering
        .iter()
        .map(|&m| ReportRow {
            term_id: a.term_ids()[m].clone(),
            n_annotated: a.annotated_count(m),
            psi_hat: psi.values[m],
            stat: observed.values[m],
            adj_p: mtp.adjusted_p[m],
            rank: ranks[m],
        })
        .collect();
    Ok(ScenarioReport {
        rows,
        config: cfg.clone(),
        info: ScenarioRunInfo {
            seed: cfg.seed,
            b: cfg.b,
            b_inner: cfg.b_inner(),
            realized_de_count: realized,
            observed_flagged: psi.flagged,
            replicate_flagged: null.flagged,
            replicate_retries: null.retries,
            rng: rng::RNG_IDENTITY,
        },
        mtp,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub first: usize,
    pub second: usize,
    /// `overlaps[r - 1]` = size of the intersection of the two top-r sets.
    pub overlaps: Vec<usize>,
}

/// Pairwise overlaps of top-r term lists for r = 1..=r_max.
pub fn compare_scenarios(reports: &[&ScenarioReport], r_max: usize) -> Result<Vec<Overlap>> {
    if let Some(first) = reports.first() {
        let terms = first.top(usize::MAX);
        if reports.iter().any(|r| r.top(usize::MAX) != terms) {
            return Err(Error::TermSetMismatch);
        }
    }
    let mut out = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let overlaps = (1..=r_max)
                .map(|r| reports[i].top(r).intersection(&reports[j].top(r)).count())
                .collect();
            out.push(Overlap {
                first: i,
                second: j,
                overlaps,
            });
        }
    }
    Ok(out)
}
