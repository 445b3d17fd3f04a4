//! Python bindings for annotmtp.
//!
//! Heavy calls (resampling, simulation) release the GIL.

use annotmtp::association::{associate, Measure, ProfileTransform};
use annotmtp::dag::{assemble_matrix, Annotation, DirectAnnotations, Edge, OntologyDag, TermRecord};
use annotmtp::estimation::{group_summary, lambda_d, lambda_t, LambdaScale};
use annotmtp::mtp::{maxt_adjusted_p, NullDistributionEstimate, Sidedness};
use annotmtp::profile::ParameterProfile;
use annotmtp::scenario::{run_scenario, DeEstimator, ScenarioConfig, ScenarioReport};
use annotmtp::simulate::{simulate, SimulationSpec};
use annotmtp::{de_test, io, AnnotationMatrix, DeTestConfig, Error, ErrorKind, SampleData};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyValueError};
use pyo3::prelude::*;

create_exception!(pyannotmtp, AnnotMtpError, PyException);
create_exception!(pyannotmtp, DegenerateError, AnnotMtpError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.kind() {
        ErrorKind::Config => PyValueError::new_err(msg),
        ErrorKind::Io => PyIOError::new_err(msg),
        ErrorKind::Numeric => DegenerateError::new_err(msg),
        ErrorKind::Parse | ErrorKind::Input => AnnotMtpError::new_err(msg),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for annotmtp::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Expression matrix (genes x samples) with two-class labels.
#[pyclass(name = "SampleData", module = "pyannotmtp", frozen)]
pub struct PySampleData {
    inner: SampleData,
}

#[pymethods]
impl PySampleData {
    #[new]
    #[pyo3(signature = (gene_ids, sample_ids, expressions, labels, class_names = (String::from("0"), String::from("1"))))]
    fn new(
        gene_ids: Vec<String>,
        sample_ids: Vec<String>,
        expressions: Vec<Vec<f64>>,
        labels: Vec<u8>,
        class_names: (String, String),
    ) -> PyResult<Self> {
        let inner = SampleData::new(gene_ids, sample_ids, expressions, labels, [class_names.0, class_names.1]).py()?;
        Ok(Self { inner })
    }

    /// Loads an expression TSV and a label TSV.
    #[staticmethod]
    #[pyo3(signature = (expression, labels, reference = None))]
    fn read(expression: &str, labels: &str, reference: Option<&str>) -> PyResult<Self> {
        let inner = io::read_sample_data(expression.as_ref(), labels.as_ref(), reference).py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_genes(&self) -> usize {
        self.inner.n_genes()
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn gene_ids(&self) -> Vec<String> {
        self.inner.gene_ids().to_vec()
    }

    #[getter]
    fn sample_ids(&self) -> Vec<String> {
        self.inner.sample_ids().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<u8> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn class_counts(&self) -> (usize, usize) {
        self.inner.class_counts()
    }

    /// Standardized mean differences, `welch` or `root-n` scale.
    #[pyo3(signature = (scale = "welch"))]
    fn lambda_t(&self, scale: &str) -> PyResult<Vec<f64>> {
        let scale: LambdaScale = scale.parse().py()?;
        Ok(lambda_t(&group_summary(&self.inner), scale).py()?.values().to_vec())
    }

    /// Raw class mean differences.
    fn lambda_d(&self) -> Vec<f64> {
        lambda_d(&group_summary(&self.inner)).values().to_vec()
    }

    fn __repr__(&self) -> String {
        let (n0, n1) = self.inner.class_counts();
        format!("SampleData(genes={}, samples={}+{})", self.inner.n_genes(), n0, n1)
    }
}

/// Gene x term annotation matrix.
#[pyclass(name = "AnnotationMatrix", module = "pyannotmtp", frozen)]
pub struct PyAnnotationMatrix {
    inner: AnnotationMatrix,
}

#[pymethods]
impl PyAnnotationMatrix {
    #[new]
    #[pyo3(signature = (gene_ids, term_ids, columns, binary = true))]
    fn new(gene_ids: Vec<String>, term_ids: Vec<String>, columns: Vec<Vec<f64>>, binary: bool) -> PyResult<Self> {
        let inner = AnnotationMatrix::from_columns(gene_ids, term_ids, columns, binary).py()?;
        Ok(Self { inner })
    }

    /// Binary matrix where `sets[m]` lists the annotated gene indices of term `m`.
    #[staticmethod]
    fn from_index_sets(gene_ids: Vec<String>, term_ids: Vec<String>, sets: Vec<Vec<usize>>) -> PyResult<Self> {
        let inner = AnnotationMatrix::from_index_sets(gene_ids, term_ids, &sets).py()?;
        Ok(Self { inner })
    }

    /// Reads a 0/1 matrix TSV, with rows aligned to `gene_universe`.
    #[staticmethod]
    fn read(path: &str, gene_universe: Vec<String>) -> PyResult<Self> {
        let inner = io::read_annotation_matrix(path.as_ref(), &gene_universe).py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_genes(&self) -> usize {
        self.inner.n_genes()
    }

    #[getter]
    fn n_terms(&self) -> usize {
        self.inner.n_terms()
    }

    #[getter]
    fn term_ids(&self) -> Vec<String> {
        self.inner.term_ids().to_vec()
    }

    #[getter]
    fn gene_ids(&self) -> Vec<String> {
        self.inner.gene_ids().to_vec()
    }

    fn column(&self, m: usize) -> PyResult<Vec<f64>> {
        if m >= self.inner.n_terms() {
            return Err(PyValueError::new_err(format!("column {m} out of range")));
        }
        Ok(self.inner.column(m).to_vec())
    }

    fn annotated_counts(&self) -> Vec<usize> {
        (0..self.inner.n_terms()).map(|m| self.inner.annotated_count(m)).collect()
    }

    /// Copy restricted to terms annotating at least `min_genes` genes.
    fn filter_min_genes(&self, min_genes: usize) -> Self {
        let keep: Vec<usize> = (0..self.inner.n_terms())
            .filter(|&m| self.inner.annotated_count(m) >= min_genes)
            .collect();
        Self {
            inner: self.inner.select_terms(&keep),
        }
    }

    fn __repr__(&self) -> String {
        format!("AnnotationMatrix(genes={}, terms={})", self.inner.n_genes(), self.inner.n_terms())
    }
}

/// Ontology graph with parent/child queries.
#[pyclass(name = "OntologyDag", module = "pyannotmtp", frozen)]
pub struct PyOntologyDag {
    inner: OntologyDag,
}

#[pymethods]
impl PyOntologyDag {
    /// `terms` are (id, name, namespace); `edges` are (child, parent, relation).
    /// Raises on cycles.
    #[new]
    fn new(terms: Vec<(String, String, String)>, edges: Vec<(String, String, String)>) -> PyResult<Self> {
        let terms = terms
            .into_iter()
            .map(|(id, name, namespace)| TermRecord { id, name, namespace })
            .collect();
        let edges = edges
            .into_iter()
            .map(|(child, parent, relation)| Edge { child, parent, relation })
            .collect();
        Ok(Self {
            inner: OntologyDag::new(terms, edges).py()?,
        })
    }

    #[staticmethod]
    fn read(terms: &str, edges: &str) -> PyResult<Self> {
        let inner = io::read_dag(terms.as_ref(), edges.as_ref()).py()?;
        inner.validate().py()?;
        Ok(Self { inner })
    }

    /// Term ids with parents before children.
    fn topological_order(&self) -> PyResult<Vec<String>> {
        self.inner.validate().py()
    }

    fn parents(&self, term: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.parents(term).py()?.into_iter().collect())
    }

    fn children(&self, term: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.children(term).py()?.into_iter().collect())
    }

    fn ancestors(&self, term: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.ancestors(term).py()?.into_iter().collect())
    }

    fn offspring(&self, term: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.offspring(term).py()?.into_iter().collect())
    }

    /// Builds the annotation matrix from (gene, term, evidence) triples after
    /// true-path closure. Returns the matrix and the dropped (term, count) list.
    #[pyo3(signature = (annotations, gene_universe, min_genes = 10, namespace = None))]
    fn assemble(
        &self,
        annotations: Vec<(String, String, String)>,
        gene_universe: Vec<String>,
        min_genes: usize,
        namespace: Option<&str>,
    ) -> PyResult<(PyAnnotationMatrix, Vec<(String, usize)>)> {
        let pairs = annotations
            .into_iter()
            .map(|(gene_id, term_id, evidence)| Annotation {
                gene_id,
                term_id,
                evidence,
            })
            .collect();
        let direct = DirectAnnotations::new(pairs, &self.inner).py()?;
        let (inner, report) = assemble_matrix(&self.inner, &direct, &gene_universe, min_genes, namespace).py()?;
        Ok((PyAnnotationMatrix { inner }, report.dropped))
    }

    fn __len__(&self) -> usize {
        self.inner.terms().len()
    }
}

/// Result of an association test, rows in adjusted-p order.
#[pyclass(name = "ScenarioReport", module = "pyannotmtp", frozen)]
pub struct PyScenarioReport {
    inner: ScenarioReport,
}

#[pymethods]
impl PyScenarioReport {
    /// (term_id, n_annotated, psi_hat, stat, adj_p, rank) tuples.
    fn rows(&self) -> Vec<(String, usize, f64, f64, f64, usize)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.term_id.clone(), r.n_annotated, r.psi_hat, r.stat, r.adj_p, r.rank))
            .collect()
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.inner.mtp.cutoff
    }

    /// Rejected term ids in report order.
    #[getter]
    fn rejected(&self) -> Vec<String> {
        let alpha = self.inner.config.alpha;
        self.inner
            .rows
            .iter()
            .filter(|r| r.adj_p <= alpha)
            .map(|r| r.term_id.clone())
            .collect()
    }

    #[getter]
    fn realized_de_count(&self) -> Option<usize> {
        self.inner.info.realized_de_count
    }

    #[getter]
    fn replicate_retries(&self) -> usize {
        self.inner.info.replicate_retries
    }

    fn to_tsv(&self) -> String {
        io::report_tsv(&self.inner)
    }

    fn sorted_p_tsv(&self) -> String {
        io::sorted_p_tsv(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

fn parse_measure(name: &str) -> PyResult<Measure> {
    Ok(match name {
        "pearson" => Measure::Pearson,
        "chisq2x2" => Measure::Chisq2x2,
        "sum" => Measure::Sum,
        "welch_t" => Measure::WelchT,
        other => return Err(PyValueError::new_err(format!("unknown measure {other:?}"))),
    })
}

/// Association of every annotation column with a gene-parameter profile.
#[pyfunction]
#[pyo3(signature = (annotation, profile, measure = "pearson", absolute = false, binary_profile = false))]
fn association(
    annotation: &PyAnnotationMatrix,
    profile: Vec<f64>,
    measure: &str,
    absolute: bool,
    binary_profile: bool,
) -> PyResult<Vec<f64>> {
    let a = &annotation.inner;
    let genes = a.gene_ids().clone();
    let lambda = if binary_profile {
        ParameterProfile::binary(profile, genes)
    } else {
        ParameterProfile::continuous(profile, genes)
    }
    .py()?;
    let transform = if absolute {
        ProfileTransform::Absolute
    } else {
        ProfileTransform::Identity
    };
    let res = associate(a, &lambda, &parse_measure(measure)?, transform, vec![0.0; a.n_terms()]).py()?;
    Ok(res.psi)
}

/// Gene-level maxT test; returns (lambda_t, adjusted p-values).
#[pyfunction]
#[pyo3(signature = (data, b = 5000, alpha = 0.05, seed = 0, scheme = "bootstrap", workers = 0))]
fn de_maxt(
    py: Python<'_>,
    data: &PySampleData,
    b: usize,
    alpha: f64,
    seed: u64,
    scheme: &str,
    workers: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = DeTestConfig {
        b,
        alpha,
        scheme: scheme.parse().py()?,
        ..DeTestConfig::default()
    };
    let data = &data.inner;
    let res = py.detach(|| de_test(data, &cfg, seed, workers)).py()?;
    Ok((res.lambda_t, res.mtp.adjusted_p))
}

/// Runs one testing scenario (`tt`, `dt` or `neq-chi`).
#[pyfunction]
#[pyo3(signature = (data, annotation, scenario, b = 5000, seed = 0, alpha = 0.05,
                    de_estimator = None, b_inner = 1000, scheme = "bootstrap",
                    inner_scheme = "permutation", workers = 0))]
#[allow(clippy::too_many_arguments)]
fn assoc_test(
    py: Python<'_>,
    data: &PySampleData,
    annotation: &PyAnnotationMatrix,
    scenario: &str,
    b: usize,
    seed: u64,
    alpha: f64,
    de_estimator: Option<&str>,
    b_inner: usize,
    scheme: &str,
    inner_scheme: &str,
    workers: usize,
) -> PyResult<PyScenarioReport> {
    let mut cfg = ScenarioConfig::new(scenario.parse().py()?, b, seed);
    cfg.alpha = alpha;
    cfg.scheme = scheme.parse().py()?;
    if let Some(spec) = de_estimator {
        cfg = cfg.with_de_estimator(DeEstimator::parse(spec, b_inner, inner_scheme.parse().py()?).py()?);
    }
    let (data, a) = (&data.inner, &annotation.inner);
    let inner = py.detach(|| run_scenario(data, a, &cfg, workers)).py()?;
    Ok(PyScenarioReport { inner })
}

/// Single-step maxT adjusted p-values from a null matrix given as rows
/// (`null[m][b]`, already transformed) and observed statistics.
#[pyfunction]
#[pyo3(signature = (null, observed, two_sided = true))]
fn maxt_adjust(null: Vec<Vec<f64>>, observed: Vec<f64>, two_sided: bool) -> PyResult<Vec<f64>> {
    let side = if two_sided {
        Sidedness::TwoSided
    } else {
        Sidedness::OneSidedUpper
    };
    let est = NullDistributionEstimate::from_rows(&null, side).py()?;
    maxt_adjusted_p(&est, &observed).py()
}

/// Complete-null FWER check; returns (fwer, monte-carlo standard error).
#[pyfunction]
#[pyo3(signature = (n = 60, m = 50, rho = 0.5, trials = 400, b = 500, alpha = 0.05, seed = 0, workers = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate_fwer(
    py: Python<'_>,
    n: usize,
    m: usize,
    rho: f64,
    trials: usize,
    b: usize,
    alpha: f64,
    seed: u64,
    workers: usize,
) -> PyResult<(f64, f64)> {
    let spec = SimulationSpec::complete_null(n, m, rho, trials, b, alpha, seed);
    let res = py.detach(|| simulate(&spec, workers)).py()?;
    let rates = &res.rates[0].1;
    Ok((rates.fwer, rates.fwer_se))
}

#[pymodule]
fn pyannotmtp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AnnotMtpError", m.py().get_type::<AnnotMtpError>())?;
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add_class::<PySampleData>()?;
    m.add_class::<PyAnnotationMatrix>()?;
    m.add_class::<PyOntologyDag>()?;
    m.add_class::<PyScenarioReport>()?;
    m.add_function(wrap_pyfunction!(association, m)?)?;
    m.add_function(wrap_pyfunction!(de_maxt, m)?)?;
    m.add_function(wrap_pyfunction!(assoc_test, m)?)?;
    m.add_function(wrap_pyfunction!(maxt_adjust, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_fwer, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
