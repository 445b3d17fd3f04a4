//! Single-step common-cut-off maxT: cut-off, adjusted p-values, rejection
//! sets and the ordering of hypotheses by adjusted p-value.

use serde::Serialize;

use super::null::{NullDistributionEstimate, Sidedness};
use crate::error::{Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// Smallest z with `(1/B) #{b : max_b <= z} >= 1 - alpha`, i.e. the
/// ceil((1 - alpha) B)-th order statistic of the column maxima.
///
/// The rule is evaluated as `(B - k) / B <= alpha`, the same arithmetic as
/// [`maxt_adjusted_p`], so `f(t) > cutoff` and `p <= alpha` agree exactly.
pub fn maxt_cutoff(null: &NullDistributionEstimate, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut maxima = null.col_maxima().to_vec();
    maxima.sort_by(f64::total_cmp);
    let b = maxima.len();
    let k = (1..=b)
        .find(|&k| (b - k) as f64 / b as f64 <= alpha)
        .expect("k = B always qualifies");
    Ok(maxima[k - 1])
}

/// `p(m) = (1/B) #{b : max_b >= f(t(m))}` with f the null's sidedness map.
pub fn maxt_adjusted_p(null: &NullDistributionEstimate, observed: &[f64]) -> Result<Vec<f64>> {
    if observed.len() != null.n_stats() {
        return Err(Error::LengthMismatch {
            expected: null.n_stats(),
            found: observed.len(),
        });
    }
    let mut maxima = null.col_maxima().to_vec();
    maxima.sort_by(f64::total_cmp);
    let b = maxima.len();
    Ok(observed
        .iter()
        .map(|&t| {
            let below = maxima.partition_point(|&x| x < null.sidedness.apply(t));
            (b - below) as f64 / b as f64
        })
        .collect())
}

/// Marginal resampling p-value of hypothesis `m` from its own row:
/// `(1/B) #{b : f(Z(m, b)) >= f(t(m))}`.
pub fn marginal_p(null: &NullDistributionEstimate, m: usize, observed: f64) -> f64 {
    let f = null.sidedness;
    let t = f.apply(observed);
    let hits = (0..null.n_replicates()).filter(|&b| f.apply(null.z(m, b)) >= t).count();
    hits as f64 / null.n_replicates() as f64
}

/// `{m : p(m) <= alpha}` in index order.
pub fn rejection_set(adjusted_p: &[f64], alpha: f64) -> Vec<usize> {
    (0..adjusted_p.len()).filter(|&m| adjusted_p[m] <= alpha).collect()
}

/// Hypothesis indices sorted by adjusted p ascending, then f(t) descending,
/// then index ascending.
pub fn ordering(adjusted_p: &[f64], observed: &[f64], sidedness: Sidedness) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..adjusted_p.len()).collect();
    idx.sort_by(|&i, &j| {
        adjusted_p[i]
            .total_cmp(&adjusted_p[j])
            .then_with(|| sidedness.apply(observed[j]).total_cmp(&sidedness.apply(observed[i])))
            .then(i.cmp(&j))
    });
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MtpResult {
    pub observed: Vec<f64>,
    pub cutoff: f64,
    pub adjusted_p: Vec<f64>,
    pub alpha: f64,
    pub rejected: Vec<usize>,
    pub ordering: Vec<usize>,
    pub sidedness: Sidedness,
}

impl MtpResult {
    /// Rank (1-based) of each hypothesis in the ordering.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.ordering.len()];
        for (r, &m) in self.ordering.iter().enumerate() {
            rank[m] = r + 1;
        }
        rank
    }
}

/// Full single-step maxT decision at level `alpha`.
pub fn single_step_maxt(null: &NullDistributionEstimate, observed: &[f64], alpha: f64) -> Result<MtpResult> {
    let cutoff = maxt_cutoff(null, alpha)?;
    let adjusted_p = maxt_adjusted_p(null, observed)?;
    Ok(MtpResult {
        observed: observed.to_vec(),
        cutoff,
        rejected: rejection_set(&adjusted_p, alpha),
        ordering: ordering(&adjusted_p, observed, null.sidedness),
        adjusted_p,
        alpha,
        sidedness: null.sidedness,
    })
}
