//! Resampling-based null distributions of test-statistic vectors.
//!
//! Replicate `b` draws from the keyed stream `(seed, b)` (see [`crate::rng`]),
//! so the estimate is bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SampleData;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    OneSidedUpper,
    TwoSided,
}

impl Sidedness {
    /// f(t): identity for one-sided upper tests, |t| for two-sided tests.
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Sidedness::OneSidedUpper => t,
            Sidedness::TwoSided => t.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Units (X_i, Y_i) drawn jointly with replacement.
    BootstrapNonparam,
    /// Class labels permuted against fixed expression profiles.
    Permutation,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bootstrap" | "boot" | "bootstrap_nonparam" => Ok(Scheme::BootstrapNonparam),
            "permutation" | "perm" => Ok(Scheme::Permutation),
            other => Err(Error::config(format!("unknown resampling scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullTransform {
    /// Z = T - E[T] (null shift 0, no scaling).
    ShiftOnly,
    /// Z = sqrt(min(1, tau0 / Var[T])) * (T - E[T]).
    ShiftAndScale,
}

impl std::str::FromStr for NullTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shift" | "shift_only" | "shift-only" => Ok(NullTransform::ShiftOnly),
            "shift-scale" | "shift_and_scale" | "shift-and-scale" => Ok(NullTransform::ShiftAndScale),
            other => Err(Error::config(format!("unknown null transform {other:?}"))),
        }
    }
}

/// Identifies the replicate a statistic is being evaluated on, so nested
/// procedures can key their own streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicateContext {
    pub seed: u64,
    pub replicate: u64,
}

impl ReplicateContext {
    pub fn observed(seed: u64) -> Self {
        Self {
            seed,
            replicate: rng::OBSERVED_REPLICATE,
        }
    }
}

/// A statistic vector plus the number of entries the computer had to
/// substitute for an undefined value.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub values: Vec<f64>,
    pub flagged: usize,
}

impl From<Vec<f64>> for Evaluation {
    fn from(values: Vec<f64>) -> Self {
        Self { values, flagged: 0 }
    }
}

/// Maps a (resampled) dataset to an M-vector of test statistics.
///
/// Errors for which [`Error::is_degenerate`] holds make the resampler redraw
/// the replicate; any other error aborts.
pub trait StatisticComputer: Sync {
    fn n_stats(&self) -> usize;

    fn sidedness(&self) -> Sidedness;

    fn compute(&self, data: &SampleData, ctx: ReplicateContext) -> Result<Evaluation>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleOptions {
    pub b: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub transform: NullTransform,
    /// Null variances for the scaling step; all ones when absent.
    pub tau0: Option<Vec<f64>>,
    /// Redraws allowed per replicate before giving up.
    pub retry_cap: usize,
    /// 0 = rayon's global pool, 1 = sequential, k = dedicated pool of k threads.
    pub workers: usize,
}

impl ResampleOptions {
    pub fn new(b: usize, scheme: Scheme, seed: u64, transform: NullTransform) -> Self {
        Self {
            b,
            scheme,
            seed,
            transform,
            tau0: None,
            retry_cap: 100,
            workers: 0,
        }
    }
}

/// M x B matrix of null-transformed resampled statistics with its column
/// maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistributionEstimate {
    /// Column-major: entry (m, b) at `b * m_count + m`.
    z: Vec<f64>,
    m: usize,
    b: usize,
    col_maxima: Vec<f64>,
    pub row_means: Vec<f64>,
    pub row_vars: Vec<f64>,
    pub sidedness: Sidedness,
    pub scheme: Scheme,
    pub seed: u64,
    /// Replicate redraws triggered by degenerate draws.
    pub retries: usize,
    /// Statistic entries substituted by the computer across kept replicates.
    pub flagged: usize,
}

fn column_maxima(z: &[f64], m: usize, b: usize, sidedness: Sidedness) -> Vec<f64> {
    (0..b)
        .map(|j| {
            z[j * m..(j + 1) * m]
                .iter()
                .map(|&v| sidedness.apply(v))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

impl NullDistributionEstimate {
    /// Wraps an already-transformed matrix given as rows (`rows[m][b]`).
    pub fn from_rows(rows: &[Vec<f64>], sidedness: Sidedness) -> Result<Self> {
        let m = rows.len();
        let b = rows.first().map_or(0, Vec::len);
        if m == 0 || b == 0 {
            return Err(Error::invalid("null distribution needs at least one row and column"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != b) {
            return Err(Error::LengthMismatch {
                expected: b,
                found: r.len(),
            });
        }
        let mut z = vec![0.0; m * b];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite(j * m + i));
                }
                z[j * m + i] = v;
            }
        }
        let (row_means, row_vars) = row_moments(&z, m, b);
        Ok(Self {
            col_maxima: column_maxima(&z, m, b, sidedness),
            z,
            m,
            b,
            row_means,
            row_vars,
            sidedness,
            scheme: Scheme::BootstrapNonparam,
            seed: 0,
            retries: 0,
            flagged: 0,
        })
    }

    pub fn n_stats(&self) -> usize {
        self.m
    }

    pub fn n_replicates(&self) -> usize {
        self.b
    }

    pub fn z(&self, m: usize, b: usize) -> f64 {
        self.z[b * self.m + m]
    }

    /// Column `b` (one replicate's M transformed statistics).
    pub fn replicate(&self, b: usize) -> &[f64] {
        &self.z[b * self.m..(b + 1) * self.m]
    }

    pub fn row(&self, m: usize) -> Vec<f64> {
        (0..self.b).map(|b| self.z(m, b)).collect()
    }

    /// Column-major storage, as written by [`crate::mtp::dump`].
    pub fn raw(&self) -> &[f64] {
        &self.z
    }

    pub fn col_maxima(&self) -> &[f64] {
        &self.col_maxima
    }
}

/// Row means and 1/B variances of a column-major M x B matrix.
fn row_moments(t: &[f64], m: usize, b: usize) -> (Vec<f64>, Vec<f64>) {
    let mut means = Vec::with_capacity(m);
    let mut vars = Vec::with_capacity(m);
    for i in 0..m {
        let mean = (0..b).map(|j| t[j * m + i]).collect::<CompensatedSum>().value() / b as f64;
        let var = (0..b)
            .map(|j| {
                let d = t[j * m + i] - mean;
                d * d
            })
            .collect::<CompensatedSum>()
            .value()
            / b as f64;
        means.push(mean);
        vars.push(var);
    }
    (means, vars)
}

struct Replicate {
    values: Vec<f64>,
    flagged: usize,
    retries: usize,
}

fn draw_replicate(
    data: &SampleData,
    stat: &dyn StatisticComputer,
    opts: &ResampleOptions,
    b: usize,
) -> Result<Replicate> {
    let mut stream = rng::replicate_rng(opts.seed, b as u64);
    let ctx = ReplicateContext {
        seed: opts.seed,
        replicate: b as u64,
    };
    let n = data.n_samples();
    let mut last_reason = String::new();
    for attempt in 0..=opts.retry_cap {
        let resampled = match opts.scheme {
            Scheme::BootstrapNonparam => {
                let idx = rng::bootstrap_indices(&mut stream, n);
                let n1 = idx.iter().filter(|&&i| data.labels()[i] == 1).count();
                if n1 < 2 || n - n1 < 2 {
                    last_reason = format!("class sizes ({}, {n1})", n - n1);
                    continue;
                }
                data.resample(&idx)
            }
            Scheme::Permutation => data.with_labels(rng::permute(&mut stream, data.labels())),
        };
        match stat.compute(&resampled, ctx) {
            Ok(eval) => {
                if eval.values.len() != stat.n_stats() {
                    return Err(Error::LengthMismatch {
                        expected: stat.n_stats(),
                        found: eval.values.len(),
                    });
                }
                if let Some(i) = eval.values.iter().position(|v| !v.is_finite()) {
                    last_reason = format!("non-finite statistic {i}");
                    continue;
                }
                return Ok(Replicate {
                    values: eval.values,
                    flagged: eval.flagged,
                    retries: attempt,
                });
            }
            Err(e) if e.is_degenerate() => last_reason = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateReplicate {
        replicate: b,
        attempts: opts.retry_cap + 1,
        reason: last_reason,
    })
}

fn run_replicates(
    data: &SampleData,
    stat: &dyn StatisticComputer,
    opts: &ResampleOptions,
) -> Result<Vec<Replicate>> {
    let one = |b| draw_replicate(data, stat, opts, b);
    match opts.workers {
        1 => (0..opts.b).map(one).collect(),
        0 => (0..opts.b).into_par_iter().map(one).collect(),
        k => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(|| (0..opts.b).into_par_iter().map(one).collect()),
    }
}

/// Builds the M x B matrix of resampled statistics, then row-shifts (and
/// optionally scales) it to obtain the null distribution estimate. The null
/// shift value is 0.
pub fn resample_null(
    data: &SampleData,
    stat: &dyn StatisticComputer,
    opts: &ResampleOptions,
) -> Result<NullDistributionEstimate> {
    if opts.b < 2 {
        return Err(Error::config(format!("B must be at least 2, got {}", opts.b)));
    }
    let m = stat.n_stats();
    if m == 0 {
        return Err(Error::invalid("statistic computer produces no statistics"));
    }
    let tau0 = match &opts.tau0 {
        Some(t) if t.len() != m => {
            return Err(Error::LengthMismatch {
                expected: m,
                found: t.len(),
            })
        }
        Some(t) => t.clone(),
        None => vec![1.0; m],
    };
    let b = opts.b;
    let reps = run_replicates(data, stat, opts)?;
    let retries = reps.iter().map(|r| r.retries).sum();
    let flagged = reps.iter().map(|r| r.flagged).sum();
    let mut t = Vec::with_capacity(m * b);
    for r in reps {
        t.extend(r.values);
    }
    let (row_means, row_vars) = row_moments(&t, m, b);
    let scale: Vec<f64> = match opts.transform {
        NullTransform::ShiftOnly => vec![1.0; m],
        NullTransform::ShiftAndScale => row_vars
            .iter()
            .zip(&tau0)
            .map(|(&v, &tau)| if v > 0.0 { (tau / v).min(1.0).sqrt() } else { 1.0 })
            .collect(),
    };
    for j in 0..b {
        for i in 0..m {
            let k = j * m + i;
            t[k] = scale[i] * (t[k] - row_means[i]);
        }
    }
    let sidedness = stat.sidedness();
    Ok(NullDistributionEstimate {
        col_maxima: column_maxima(&t, m, b, sidedness),
        z: t,
        m,
        b,
        row_means,
        row_vars,
        sidedness,
        scheme: opts.scheme,
        seed: opts.seed,
        retries,
        flagged,
    })
}
