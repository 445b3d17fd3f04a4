//! Monte-Carlo check of Type I error control for the gene-level maxT test
//! on correlated Gaussian data.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SampleData;
use crate::de::{de_test, DeTestConfig};
use crate::error::{Error, Result};
use crate::estimation::LambdaScale;
use crate::mtp::{confusion, error_rates, rejection_set, ConfusionCounts, ErrorRates, NullTransform, Scheme};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Correlation {
    /// One shared factor across all variables.
    Exchangeable { rho: f64 },
    /// One shared factor per consecutive block of `size` variables.
    Block { size: usize, rho: f64 },
}

impl Correlation {
    fn rho(&self) -> f64 {
        match *self {
            Correlation::Exchangeable { rho } | Correlation::Block { rho, .. } => rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    /// Samples in the reference and treatment arms.
    pub n0: usize,
    pub n1: usize,
    /// Number of variables (hypotheses).
    pub m: usize,
    pub correlation: Correlation,
    pub true_nulls: Vec<usize>,
    /// Mean shift in the treatment arm for each false null, in ascending
    /// index order of the false nulls.
    pub false_null_effects: Vec<f64>,
    pub trials: usize,
    pub b: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub scheme: Scheme,
    pub transform: NullTransform,
    pub gfwer_q: usize,
    pub tppfp_q: f64,
}

impl SimulationSpec {
    /// Complete null with exchangeable correlation.
    pub fn complete_null(n: usize, m: usize, rho: f64, trials: usize, b: usize, alpha: f64, seed: u64) -> Self {
        Self {
            n0: n / 2,
            n1: n - n / 2,
            m,
            correlation: Correlation::Exchangeable { rho },
            true_nulls: (0..m).collect(),
            false_null_effects: Vec::new(),
            trials,
            b,
            alphas: vec![alpha],
            seed,
            scheme: Scheme::BootstrapNonparam,
            transform: NullTransform::ShiftAndScale,
            gfwer_q: 1,
            tppfp_q: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be positive"));
        }
        if self.n0 < 2 || self.n1 < 2 {
            return Err(Error::config("each arm needs at least 2 samples"));
        }
        if self.m == 0 {
            return Err(Error::config("need at least one variable"));
        }
        if self.b < 2 {
            return Err(Error::config("B must be at least 2"));
        }
        let rho = self.correlation.rho();
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::config(format!("correlation {rho} outside [0, 1)")));
        }
        if let Correlation::Block { size: 0, .. } = self.correlation {
            return Err(Error::config("block size must be positive"));
        }
        if let Some(&i) = self.true_nulls.iter().find(|&&i| i >= self.m) {
            return Err(Error::config(format!("true null {i} outside 0..{}", self.m)));
        }
        let false_nulls = self.false_nulls().len();
        if self.false_null_effects.len() != false_nulls {
            return Err(Error::config(format!(
                "{} effects given for {false_nulls} false nulls",
                self.false_null_effects.len()
            )));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::config(format!("alpha {a} outside (0, 1)")));
        }
        if self.alphas.is_empty() {
            return Err(Error::config("need at least one alpha"));
        }
        Ok(())
    }

    pub fn false_nulls(&self) -> Vec<usize> {
        (0..self.m).filter(|i| !self.true_nulls.contains(i)).collect()
    }

    fn shifts(&self) -> Vec<f64> {
        let mut shift = vec![0.0; self.m];
        for (i, e) in self.false_nulls().into_iter().zip(&self.false_null_effects) {
            shift[i] = *e;
        }
        shift
    }
}

/// Draws one trial's dataset from its keyed stream.
pub fn simulate_data(spec: &SimulationSpec, trial: usize) -> SampleData {
    let mut stream = rng::replicate_rng(rng::derive_seed(spec.seed, trial as u64, "data"), 0);
    let n = spec.n0 + spec.n1;
    let rho = spec.correlation.rho();
    let (load, noise) = (rho.sqrt(), (1.0 - rho).sqrt());
    let block = match spec.correlation {
        Correlation::Exchangeable { .. } => spec.m,
        Correlation::Block { size, .. } => size,
    };
    let shifts = spec.shifts();
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= spec.n0)).collect();
    let mut rows = vec![vec![0.0; n]; spec.m];
    for (i, &label) in labels.iter().enumerate() {
        let mut factor = 0.0;
        for (j, row) in rows.iter_mut().enumerate() {
            if j % block == 0 {
                factor = StandardNormal.sample(&mut stream);
            }
            let eps: f64 = StandardNormal.sample(&mut stream);
            row[i] = load * factor + noise * eps + if label == 1 { shifts[j] } else { 0.0 };
        }
    }
    SampleData::new(
        (0..spec.m).map(|j| format!("v{j}")).collect::<Vec<_>>(),
        (0..n).map(|i| format!("s{i}")).collect(),
        rows,
        labels,
        ["control".into(), "treatment".into()],
    )
    .expect("simulated data is well formed")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    /// One entry per requested alpha.
    pub rates: Vec<(f64, ErrorRates)>,
    pub counts: Vec<Vec<ConfusionCounts>>,
}

/// Runs every trial (in parallel across trials, deterministic for any worker
/// count) and aggregates error rates per alpha.
pub fn simulate(spec: &SimulationSpec, workers: usize) -> Result<SimulationResult> {
    spec.validate()?;
    let cfg = DeTestConfig {
        b: spec.b,
        alpha: spec.alphas[0],
        scheme: spec.scheme,
        transform: spec.transform,
        scale: LambdaScale::Welch,
        retry_cap: 100,
    };
    let trial = |t: usize| -> Result<Vec<f64>> {
        let data = simulate_data(spec, t);
        let res = de_test(&data, &cfg, rng::derive_seed(spec.seed, t as u64, "null"), 1)?;
        Ok(res.mtp.adjusted_p)
    };
    let pvals: Vec<Vec<f64>> = match workers {
        1 => (0..spec.trials).map(trial).collect::<Result<_>>()?,
        0 => (0..spec.trials).into_par_iter().map(trial).collect::<Result<_>>()?,
        k => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(|| (0..spec.trials).into_par_iter().map(trial).collect::<Result<_>>())?,
    };
    let mut rates = Vec::new();
    let mut counts = Vec::new();
    for &alpha in &spec.alphas {
        let per_trial = pvals
            .iter()
            .map(|p| confusion(spec.m, &spec.true_nulls, &rejection_set(p, alpha)))
            .collect::<Result<Vec<_>>>()?;
        rates.push((alpha, error_rates(&per_trial, spec.gfwer_q, spec.tppfp_q)?));
        counts.push(per_trial);
    }
    Ok(SimulationResult { rates, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_rejected() {
        let spec = SimulationSpec::complete_null(20, 5, 0.5, 0, 50, 0.05, 1);
        assert!(matches!(simulate(&spec, 1), Err(Error::Config(_))));
    }

    #[test]
    fn no_true_nulls_means_no_type_one_errors() {
        let mut spec = SimulationSpec::complete_null(20, 4, 0.2, 5, 50, 0.05, 3);
        spec.true_nulls.clear();
        spec.false_null_effects = vec![20.0; 4];
        let res = simulate(&spec, 1).unwrap();
        let rates = &res.rates[0].1;
        assert_eq!(rates.fwer, 0.0);
        assert!(res.counts[0].iter().all(|c| c.v == 0 && c.h0 == 0));
    }

    #[test]
    fn data_is_reproducible_and_shaped() {
        let spec = SimulationSpec::complete_null(10, 3, 0.5, 1, 10, 0.05, 9);
        let a = simulate_data(&spec, 0);
        assert_eq!(a, simulate_data(&spec, 0));
        assert_ne!(a, simulate_data(&spec, 1));
        assert_eq!((a.n_samples(), a.n_genes()), (10, 3));
        assert_eq!(a.class_counts(), (5, 5));
    }

    #[test]
    fn validation() {
        let mut spec = SimulationSpec::complete_null(10, 3, 1.0, 1, 10, 0.05, 9);
        assert!(spec.validate().is_err());
        spec.correlation = Correlation::Exchangeable { rho: 0.3 };
        spec.true_nulls = vec![0, 7];
        assert!(spec.validate().is_err());
    }
}
