//! Gene-level differential expression test: two-sided single-step maxT over
//! the standardized DE statistics.

use serde::{Deserialize, Serialize};

use crate::data::SampleData;
use crate::error::Result;
use crate::estimation::{group_summary, lambda_t, LambdaScale};
use crate::mtp::{
    resample_null, single_step_maxt, Evaluation, MtpResult, NullDistributionEstimate, NullTransform,
    ReplicateContext, ResampleOptions, Scheme, Sidedness, StatisticComputer,
};

/// Per-gene Welch statistics as a resampling statistic.
#[derive(Debug, Clone, Copy)]
pub struct WelchGeneStatistic {
    pub n_genes: usize,
    pub scale: LambdaScale,
}

impl StatisticComputer for WelchGeneStatistic {
    fn n_stats(&self) -> usize {
        self.n_genes
    }

    fn sidedness(&self) -> Sidedness {
        Sidedness::TwoSided
    }

    fn compute(&self, data: &SampleData, _ctx: ReplicateContext) -> Result<Evaluation> {
        Ok(lambda_t(&group_summary(data), self.scale)?.values().to_vec().into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeTestConfig {
    pub b: usize,
    pub alpha: f64,
    pub scheme: Scheme,
    pub transform: NullTransform,
    pub scale: LambdaScale,
    pub retry_cap: usize,
}

impl Default for DeTestConfig {
    fn default() -> Self {
        Self {
            b: 5000,
            alpha: 0.05,
            scheme: Scheme::BootstrapNonparam,
            transform: NullTransform::ShiftAndScale,
            scale: LambdaScale::Welch,
            retry_cap: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeTestResult {
    pub lambda_t: Vec<f64>,
    pub mtp: MtpResult,
    pub null: NullDistributionEstimate,
}

/// Runs the DE test with streams keyed by `seed`; `workers` as in
/// [`ResampleOptions::workers`].
pub fn de_test(data: &SampleData, cfg: &DeTestConfig, seed: u64, workers: usize) -> Result<DeTestResult> {
    let stat = WelchGeneStatistic {
        n_genes: data.n_genes(),
        scale: cfg.scale,
    };
    let observed = lambda_t(&group_summary(data), cfg.scale)?.values().to_vec();
    let mut opts = ResampleOptions::new(cfg.b, cfg.scheme, seed, cfg.transform);
    opts.retry_cap = cfg.retry_cap;
    opts.workers = workers;
    let null = resample_null(data, &stat, &opts)?;
    let mtp = single_step_maxt(&null, &observed, cfg.alpha)?;
    Ok(DeTestResult {
        lambda_t: observed,
        mtp,
        null,
    })
}
