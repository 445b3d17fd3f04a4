//! Type I / Type II error accounting and Monte-Carlo error-rate estimates.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome counts of one multiple test: V false positives, S true positives,
/// U false negatives, W true negatives, R rejections, h0/h1 true/false nulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub v: usize,
    pub u: usize,
    pub w: usize,
    pub s: usize,
    pub r: usize,
    pub h0: usize,
    pub h1: usize,
    pub m: usize,
}

impl ConfusionCounts {
    /// V/R, defined as 0 when nothing is rejected.
    pub fn false_positive_proportion(&self) -> f64 {
        if self.r == 0 {
            0.0
        } else {
            self.v as f64 / self.r as f64
        }
    }
}

/// Tallies a rejection set against the set of true null hypotheses among
/// `0..m`.
pub fn confusion(m: usize, true_nulls: &[usize], rejected: &[usize]) -> Result<ConfusionCounts> {
    let truth: BTreeSet<usize> = true_nulls.iter().copied().collect();
    let rej: BTreeSet<usize> = rejected.iter().copied().collect();
    if let Some(&bad) = truth.iter().chain(&rej).find(|&&i| i >= m) {
        return Err(Error::invalid(format!("hypothesis index {bad} outside 0..{m}")));
    }
    let h0 = truth.len();
    let r = rej.len();
    let v = rej.intersection(&truth).count();
    let s = r - v;
    let h1 = m - h0;
    Ok(ConfusionCounts {
        v,
        u: h1 - s,
        w: h0 - v,
        s,
        r,
        h0,
        h1,
        m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRates {
    pub trials: usize,
    pub fwer: f64,
    pub fwer_se: f64,
    pub gfwer_q: usize,
    pub gfwer: f64,
    pub gfwer_se: f64,
    pub tppfp_q: f64,
    pub tppfp: f64,
    pub tppfp_se: f64,
    pub fdr: f64,
    pub fdr_se: f64,
}

fn proportion(hits: usize, trials: usize) -> (f64, f64) {
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Monte-Carlo estimates of FWER = Pr(V > 0), gFWER(q) = Pr(V > q),
/// TPPFP(q) = Pr(V/R > q) and FDR = E[V/R], with standard errors.
pub fn error_rates(samples: &[ConfusionCounts], gfwer_q: usize, tppfp_q: f64) -> Result<ErrorRates> {
    let t = samples.len();
    if t == 0 {
        return Err(Error::invalid("error rates need at least one trial"));
    }
    let (fwer, fwer_se) = proportion(samples.iter().filter(|c| c.v > 0).count(), t);
    let (gfwer, gfwer_se) = proportion(samples.iter().filter(|c| c.v > gfwer_q).count(), t);
    let (tppfp, tppfp_se) = proportion(
        samples
            .iter()
            .filter(|c| c.false_positive_proportion() > tppfp_q)
            .count(),
        t,
    );
    let props: Vec<f64> = samples.iter().map(ConfusionCounts::false_positive_proportion).collect();
    let (fdr, var) = crate::numeric::mean_var(&props, 0);
    Ok(ErrorRates {
        trials: t,
        fwer,
        fwer_se,
        gfwer_q,
        gfwer,
        gfwer_se,
        tppfp_q,
        tppfp,
        tppfp_se,
        fdr,
        fdr_se: (var / t as f64).sqrt(),
    })
}
