//! Command-line front end. Each subcommand resolves its parameters from
//! defaults, then an optional `--config` JSON file (a bare object or a
//! previous run manifest), then explicit flags, and writes a manifest with
//! the resolved parameters next to its outputs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::annotation::AnnotationMatrix;
use crate::dag::{assemble_matrix, OntologyDag};
use crate::data::SampleData;
use crate::de::{de_test, DeTestConfig};
use crate::error::{Error, ErrorKind, Result};
use crate::estimation::{collapse_probes, filter_genes, FilterParams};
use crate::io;
use crate::manifest::{read_config, RunManifest};
use crate::mtp::Scheme;
use crate::rng;
use crate::scenario::{run_scenario, DeEstimator, ScenarioConfig};
use crate::simulate::{simulate, Correlation, SimulationSpec};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_INPUT: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Parse => EXIT_PARSE,
        ErrorKind::Config => EXIT_CONFIG,
        ErrorKind::Numeric => EXIT_NUMERIC,
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Io => EXIT_OTHER,
    }
}

#[derive(Debug, Parser)]
#[command(name = "annotmtp", version, about = "Resampling-based tests of annotation/parameter-profile association")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter genes by intensity and spread, then average probes per gene.
    Filter(FilterArgs),
    /// Gene-level two-sided maxT test of differential expression.
    DeTest(DeTestArgs),
    /// Test association between annotation profiles and a DE profile.
    AssocTest(AssocArgs),
    /// Monte-Carlo error-rate check of the maxT procedure.
    Simulate(SimulateArgs),
    /// Ontology queries and annotation-matrix assembly.
    Dag(DagArgs),
}

#[derive(Debug, Args)]
pub struct SampleInputs {
    /// Expression TSV (genes x samples, log scale).
    #[arg(long)]
    pub expression: PathBuf,
    /// Label TSV (sample_id, class).
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON parameter file or previous manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn resolve<P: Default + Serialize + DeserializeOwned, F: Serialize>(config: Option<&Path>, flags: &F) -> Result<P> {
    let Value::Object(mut merged) = serde_json::to_value(P::default())? else {
        unreachable!("parameter structs serialize to objects")
    };
    if let Some(path) = config {
        merged.extend(read_config(path)?);
    }
    if let Value::Object(cli) = serde_json::to_value(flags)? {
        merged.extend(cli.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::config(format!("parameters: {e}")))
}

fn resolve_seed(seed: &mut Option<u64>) -> u64 {
    *seed.get_or_insert_with(|| {
        let s = rng::fresh_seed();
        log::warn!("no seed given; using {s}");
        s
    })
}

// filter

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub intensity: f64,
    pub fraction: f64,
    pub iqr: f64,
    pub log_base: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let d = FilterParams::default();
        Self {
            intensity: d.intensity_threshold,
            fraction: d.fraction,
            iqr: d.iqr_threshold,
            log_base: d.raw_scale_base,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FilterFlags {
    /// Raw-scale intensity threshold.
    #[arg(long)]
    pub intensity: Option<f64>,
    /// Fraction of samples that must exceed the intensity threshold.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Log-scale interquartile range threshold.
    #[arg(long)]
    pub iqr: Option<f64>,
    /// Base of the log scale of the expression values.
    #[arg(long)]
    pub log_base: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub inputs: SampleInputs,
    /// Probe-to-gene TSV; probes are averaged per gene after filtering.
    #[arg(long)]
    pub probe_map: Option<PathBuf>,
    #[command(flatten)]
    pub flags: FilterFlags,
    #[command(flatten)]
    pub common: Common,
}

fn cmd_filter(args: &FilterArgs) -> Result<()> {
    let start = Instant::now();
    let p: FilterConfig = resolve(args.common.config.as_deref(), &args.flags)?;
    let params = FilterParams {
        intensity_threshold: p.intensity,
        fraction: p.fraction,
        iqr_threshold: p.iqr,
        raw_scale_base: p.log_base,
    };
    if !(params.fraction > 0.0 && params.fraction <= 1.0) {
        return Err(Error::config(format!("fraction {} outside (0, 1]", params.fraction)));
    }
    if !(params.raw_scale_base > 0.0 && params.raw_scale_base != 1.0) {
        return Err(Error::config(format!("invalid log base {}", params.raw_scale_base)));
    }
    let data = io::read_sample_data(&args.inputs.expression, &args.inputs.labels, None)?;
    let (filtered, report) = filter_genes(&data, &params)?;
    let out = match &args.probe_map {
        Some(path) => collapse_probes(&filtered, &io::read_probe_map(path)?)?,
        None => filtered,
    };
    let dir = &args.common.out_dir;
    io::write_text(&dir.join("filtered.tsv"), &io::expression_tsv(&out))?;
    let mut kept = String::from("gene_id\tkept\n");
    let mut is_kept = vec![false; data.n_genes()];
    for &g in &report.kept {
        is_kept[g] = true;
    }
    for (g, id) in data.gene_ids().iter().enumerate() {
        kept.push_str(&format!("{id}\t{}\n", u8::from(is_kept[g])));
    }
    io::write_text(&dir.join("genes.tsv"), &kept)?;

    let mut m = RunManifest::new("filter", serde_json::to_value(&p)?, None);
    m.add_input("expression", &args.inputs.expression)?;
    m.add_input("labels", &args.inputs.labels)?;
    if let Some(path) = &args.probe_map {
        m.add_input("probe_map", path)?;
    }
    m.count("genes_in", data.n_genes() as u64);
    m.count("genes_kept", report.kept.len() as u64);
    m.count("rows_out", out.n_genes() as u64);
    m.time("total", start);
    m.write(&dir.join("manifest.json"))
}

// de-test

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeTestParams {
    pub b: usize,
    pub alpha: f64,
    pub scheme: String,
    pub transform: String,
    pub lambda_scale: String,
    pub seed: Option<u64>,
    pub reference: Option<String>,
}

impl Default for DeTestParams {
    fn default() -> Self {
        Self {
            b: 5000,
            alpha: 0.05,
            scheme: "bootstrap".into(),
            transform: "shift-scale".into(),
            lambda_scale: "welch".into(),
            seed: None,
            reference: None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DeTestFlags {
    /// Number of resampling replicates.
    #[arg(long = "B", alias = "b")]
    pub b: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// bootstrap or permutation.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Null transform: shift-scale or shift.
    #[arg(long)]
    pub transform: Option<String>,
    /// welch or root-n (Welch statistic times 1/sqrt(n)).
    #[arg(long)]
    pub lambda_scale: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reference class (label 0); defaults to the first class name in sort order.
    #[arg(long)]
    pub reference: Option<String>,
}

#[derive(Debug, Args)]
pub struct DeTestArgs {
    #[command(flatten)]
    pub inputs: SampleInputs,
    #[command(flatten)]
    pub flags: DeTestFlags,
    /// Worker threads (0 = all cores); does not affect results.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub common: Common,
}

fn cmd_de_test(args: &DeTestArgs) -> Result<()> {
    let start = Instant::now();
    let mut p: DeTestParams = resolve(args.common.config.as_deref(), &args.flags)?;
    let seed = resolve_seed(&mut p.seed);
    let cfg = DeTestConfig {
        b: p.b,
        alpha: p.alpha,
        scheme: p.scheme.parse()?,
        transform: p.transform.parse()?,
        scale: p.lambda_scale.parse()?,
        retry_cap: 100,
    };
    if cfg.b < 2 {
        return Err(Error::config(format!("B must be at least 2, got {}", cfg.b)));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::config(format!("alpha {} outside (0, 1)", cfg.alpha)));
    }
    let data = io::read_sample_data(&args.inputs.expression, &args.inputs.labels, p.reference.as_deref())?;
    let res = de_test(&data, &cfg, seed, args.workers)?;
    let mut out = String::from("gene_id\tlambda_t\tadj_p\n");
    for (g, id) in data.gene_ids().iter().enumerate() {
        out.push_str(&format!(
            "{id}\t{}\t{}\n",
            io::format_value(res.lambda_t[g]),
            io::format_p(res.mtp.adjusted_p[g])
        ));
    }
    let dir = &args.common.out_dir;
    io::write_text(&dir.join("de_test.tsv"), &out)?;

    let mut m = RunManifest::new("de-test", serde_json::to_value(&p)?, Some(seed));
    m.add_input("expression", &args.inputs.expression)?;
    m.add_input("labels", &args.inputs.labels)?;
    m.count("rejected", res.mtp.rejected.len() as u64);
    m.count("replicate_retries", res.null.retries as u64);
    m.time("total", start);
    m.write(&dir.join("manifest.json"))
}

// assoc-test

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssocParams {
    pub scenario: String,
    pub de_estimator: Option<String>,
    pub b: usize,
    pub b_inner: usize,
    pub alpha: f64,
    pub min_annot: usize,
    pub scheme: String,
    pub inner_scheme: String,
    pub lambda_scale: String,
    pub namespace: Option<String>,
    pub seed: Option<u64>,
    pub reference: Option<String>,
}

impl Default for AssocParams {
    fn default() -> Self {
        Self {
            scenario: "tt".into(),
            de_estimator: None,
            b: 5000,
            b_inner: 1000,
            alpha: 0.05,
            min_annot: 10,
            scheme: "bootstrap".into(),
            inner_scheme: "permutation".into(),
            lambda_scale: "welch".into(),
            namespace: None,
            seed: None,
            reference: None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AssocFlags {
    /// tt, dt or neq-chi.
    #[arg(long)]
    pub scenario: Option<String>,
    /// top:K or adjp:ALPHA (neq-chi only).
    #[arg(long)]
    pub de_estimator: Option<String>,
    /// Outer resampling replicates.
    #[arg(long = "B", alias = "b")]
    pub b: Option<usize>,
    /// Replicates of the inner DE test for adjp estimators.
    #[arg(long)]
    pub b_inner: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Minimum number of annotated genes for a term to be tested.
    #[arg(long)]
    pub min_annot: Option<usize>,
    /// Outer resampling: bootstrap or permutation.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Resampling of the inner DE test for adjp estimators.
    #[arg(long)]
    pub inner_scheme: Option<String>,
    /// welch or root-n.
    #[arg(long)]
    pub lambda_scale: Option<String>,
    /// Keep only terms of this namespace (ontology inputs only).
    #[arg(long)]
    pub namespace: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reference: Option<String>,
}

#[derive(Debug, Args)]
pub struct AssocArgs {
    #[command(flatten)]
    pub inputs: SampleInputs,
    /// Gene x term 0/1 matrix TSV.
    #[arg(long, conflicts_with_all = ["terms", "edges", "annotations"])]
    pub annotation_matrix: Option<PathBuf>,
    /// Term TSV (with --edges and --annotations instead of a matrix).
    #[arg(long, requires_all = ["edges", "annotations"])]
    pub terms: Option<PathBuf>,
    #[arg(long, requires = "terms")]
    pub edges: Option<PathBuf>,
    #[arg(long, requires = "terms")]
    pub annotations: Option<PathBuf>,
    #[command(flatten)]
    pub flags: AssocFlags,
    /// Worker threads (0 = all cores); does not affect results.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub common: Common,
}

fn load_dag(terms: &Path, edges: &Path) -> Result<OntologyDag> {
    let dag = io::read_dag(terms, edges)?;
    dag.validate()?;
    Ok(dag)
}

fn assoc_annotation(args: &AssocArgs, p: &AssocParams, data: &SampleData) -> Result<AnnotationMatrix> {
    match (&args.annotation_matrix, &args.terms, &args.edges, &args.annotations) {
        (Some(path), ..) => {
            if p.namespace.is_some() {
                return Err(Error::config("--namespace needs ontology inputs"));
            }
            let a = io::read_annotation_matrix(path, data.gene_ids())?;
            let keep: Vec<usize> = (0..a.n_terms()).filter(|&m| a.annotated_count(m) >= p.min_annot).collect();
            Ok(a.select_terms(&keep))
        }
        (None, Some(terms), Some(edges), Some(ann)) => {
            let dag = load_dag(terms, edges)?;
            let direct = io::read_annotations(ann, &dag)?;
            let (a, report) = assemble_matrix(&dag, &direct, data.gene_ids(), p.min_annot, p.namespace.as_deref())?;
            log::info!(
                "{} terms retained, {} below threshold, {} annotated genes outside the data",
                report.retained.len(),
                report.dropped.len(),
                report.ignored_genes
            );
            Ok(a)
        }
        _ => Err(Error::config(
            "give --annotation-matrix or all of --terms, --edges and --annotations",
        )),
    }
}

fn cmd_assoc_test(args: &AssocArgs) -> Result<()> {
    let start = Instant::now();
    let mut p: AssocParams = resolve(args.common.config.as_deref(), &args.flags)?;
    let seed = resolve_seed(&mut p.seed);
    let scheme: Scheme = p.scheme.parse()?;
    let mut cfg = ScenarioConfig::new(p.scenario.parse()?, p.b, seed);
    cfg.alpha = p.alpha;
    cfg.scheme = scheme;
    cfg.lambda_scale = p.lambda_scale.parse()?;
    if let Some(spec) = &p.de_estimator {
        cfg = cfg.with_de_estimator(DeEstimator::parse(spec, p.b_inner, p.inner_scheme.parse()?)?);
    }
    cfg.validate()?;

    let data = io::read_sample_data(&args.inputs.expression, &args.inputs.labels, p.reference.as_deref())?;
    let a = assoc_annotation(args, &p, &data)?;
    let loaded = Instant::now();
    let report = run_scenario(&data, &a, &cfg, args.workers)?;

    let dir = &args.common.out_dir;
    io::write_text(&dir.join("report.tsv"), &io::report_tsv(&report))?;
    io::write_text(&dir.join("sorted_p.tsv"), &io::sorted_p_tsv(&report))?;

    let mut m = RunManifest::new("assoc-test", serde_json::to_value(&p)?, Some(seed));
    m.add_input("expression", &args.inputs.expression)?;
    m.add_input("labels", &args.inputs.labels)?;
    for (role, path) in [
        ("annotation_matrix", &args.annotation_matrix),
        ("terms", &args.terms),
        ("edges", &args.edges),
        ("annotations", &args.annotations),
    ] {
        if let Some(path) = path {
            m.add_input(role, path)?;
        }
    }
    let info = &report.info;
    m.count("terms_tested", a.n_terms() as u64);
    m.count("rejected", report.mtp.rejected.len() as u64);
    m.count("replicate_retries", info.replicate_retries as u64);
    m.count("observed_degenerate_margins", info.observed_flagged as u64);
    m.count("replicate_degenerate_margins", info.replicate_flagged as u64);
    if let Some(k) = info.realized_de_count {
        m.count("realized_de_count", k as u64);
    }
    m.timings.insert("load".into(), (loaded - start).as_secs_f64());
    m.time("total", start);
    m.write(&dir.join("manifest.json"))
}

// simulate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalseNull {
    pub index: usize,
    pub effect: f64,
}

impl std::str::FromStr for FalseNull {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (i, e) = s.split_once('=').ok_or_else(|| format!("expected INDEX=EFFECT, got {s:?}"))?;
        Ok(FalseNull {
            index: i.parse().map_err(|_| format!("bad index {i:?}"))?,
            effect: e.parse().map_err(|_| format!("bad effect {e:?}"))?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub block: Option<usize>,
    pub false_nulls: Vec<FalseNull>,
    pub trials: usize,
    pub b: usize,
    pub alpha: Vec<f64>,
    pub scheme: String,
    pub transform: String,
    pub gfwer_q: usize,
    pub tppfp_q: f64,
    pub seed: Option<u64>,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            n: 60,
            m: 50,
            rho: 0.5,
            block: None,
            false_nulls: Vec::new(),
            trials: 400,
            b: 500,
            alpha: vec![0.05],
            scheme: "bootstrap".into(),
            transform: "shift-scale".into(),
            gfwer_q: 1,
            tppfp_q: 0.1,
            seed: None,
        }
    }
}

impl SimulateParams {
    pub fn spec(&self, seed: u64) -> Result<SimulationSpec> {
        let mut false_nulls = self.false_nulls.clone();
        false_nulls.sort_by_key(|f| f.index);
        if false_nulls.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(Error::config("false null listed twice"));
        }
        if let Some(f) = false_nulls.iter().find(|f| f.index >= self.m) {
            return Err(Error::config(format!("false null {} outside 0..{}", f.index, self.m)));
        }
        Ok(SimulationSpec {
            n0: self.n / 2,
            n1: self.n - self.n / 2,
            m: self.m,
            correlation: match self.block {
                Some(size) => Correlation::Block { size, rho: self.rho },
                None => Correlation::Exchangeable { rho: self.rho },
            },
            true_nulls: (0..self.m).filter(|i| !false_nulls.iter().any(|f| f.index == *i)).collect(),
            false_null_effects: false_nulls.iter().map(|f| f.effect).collect(),
            trials: self.trials,
            b: self.b,
            alphas: self.alpha.clone(),
            seed,
            scheme: self.scheme.parse()?,
            transform: self.transform.parse()?,
            gfwer_q: self.gfwer_q,
            tppfp_q: self.tppfp_q,
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateFlags {
    /// Total sample size, split evenly between the two arms.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of hypotheses.
    #[arg(long)]
    pub m: Option<usize>,
    /// Within-block correlation.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Block size; exchangeable over all variables when absent.
    #[arg(long)]
    pub block: Option<usize>,
    /// False null with its mean shift, as INDEX=EFFECT (repeatable).
    #[arg(long = "effect")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub false_nulls: Vec<FalseNull>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "B", alias = "b")]
    pub b: Option<usize>,
    /// Nominal levels (comma separated).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub transform: Option<String>,
    /// Tolerated false positives for gFWER.
    #[arg(long)]
    pub gfwer_q: Option<usize>,
    /// False-positive proportion bound for TPPFP.
    #[arg(long)]
    pub tppfp_q: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub flags: SimulateFlags,
    /// Worker threads (0 = all cores); does not affect results.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub common: Common,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let mut p: SimulateParams = resolve(args.common.config.as_deref(), &args.flags)?;
    let seed = resolve_seed(&mut p.seed);
    let spec = p.spec(seed)?;
    let res = simulate(&spec, args.workers)?;
    let mut out = String::from(
        "alpha\ttrials\tfwer\tfwer_se\tgfwer_q\tgfwer\tgfwer_se\ttppfp_q\ttppfp\ttppfp_se\tfdr\tfdr_se\n",
    );
    for (alpha, r) in &res.rates {
        let v = io::format_value;
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            v(*alpha),
            r.trials,
            v(r.fwer),
            v(r.fwer_se),
            r.gfwer_q,
            v(r.gfwer),
            v(r.gfwer_se),
            v(r.tppfp_q),
            v(r.tppfp),
            v(r.tppfp_se),
            v(r.fdr),
            v(r.fdr_se)
        ));
    }
    let dir = &args.common.out_dir;
    io::write_text(&dir.join("rates.tsv"), &out)?;
    let mut m = RunManifest::new("simulate", serde_json::to_value(&p)?, Some(seed));
    m.count("trials", spec.trials as u64);
    m.time("total", start);
    m.write(&dir.join("manifest.json"))
}

// dag

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DagAction {
    Validate,
    Parents,
    Ancestors,
    Children,
    Offspring,
    Assemble,
}

#[derive(Debug, Args)]
pub struct DagArgs {
    pub action: DagAction,
    /// Term TSV (term_id, name, namespace).
    #[arg(long)]
    pub terms: PathBuf,
    /// Edge TSV (child_id, parent_id, relation).
    #[arg(long)]
    pub edges: PathBuf,
    /// Term to query.
    #[arg(long)]
    pub term: Option<String>,
    /// Annotation TSV (gene_id, term_id, evidence), for assemble.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// TSV whose first column lists the gene universe (header skipped), for assemble.
    #[arg(long)]
    pub universe: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub min_genes: usize,
    #[arg(long)]
    pub namespace: Option<String>,
    /// Output directory; queries print to stdout when absent.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn cmd_dag(args: &DagArgs) -> Result<()> {
    let start = Instant::now();
    let dag = load_dag(&args.terms, &args.edges)?;
    let term = || {
        args.term
            .as_deref()
            .ok_or_else(|| Error::config(format!("{:?} needs --term", args.action)))
    };
    let list = |set: std::collections::BTreeSet<String>| {
        let mut s = String::from("term_id\tname\n");
        for id in set {
            let name = dag.term(&id).map_or("", |t| t.name.as_str());
            s.push_str(&format!("{id}\t{name}\n"));
        }
        s
    };
    let mut config = serde_json::json!({
        "action": format!("{:?}", args.action).to_lowercase(),
        "term": args.term,
    });
    let mut m = RunManifest::new("dag", Value::Null, None);
    m.add_input("terms", &args.terms)?;
    m.add_input("edges", &args.edges)?;
    let (name, out) = match args.action {
        DagAction::Validate => {
            m.count("terms", dag.terms().len() as u64);
            m.count("edges", dag.edges().len() as u64);
            ("validate.tsv", format!("status\tterms\tedges\nok\t{}\t{}\n", dag.terms().len(), dag.edges().len()))
        }
        DagAction::Parents => ("parents.tsv", list(dag.parents(term()?)?)),
        DagAction::Ancestors => ("ancestors.tsv", list(dag.ancestors(term()?)?)),
        DagAction::Children => ("children.tsv", list(dag.children(term()?)?)),
        DagAction::Offspring => ("offspring.tsv", list(dag.offspring(term()?)?)),
        DagAction::Assemble => {
            let (Some(ann), Some(universe)) = (&args.annotations, &args.universe) else {
                return Err(Error::config("assemble needs --annotations and --universe"));
            };
            let Some(dir) = &args.out_dir else {
                return Err(Error::config("assemble needs --out-dir"));
            };
            let direct = io::read_annotations(ann, &dag)?;
            let genes: Vec<String> = io::read_table(universe)?.rows.into_iter().map(|(_, r)| r[0].clone()).collect();
            let (a, report) = assemble_matrix(&dag, &direct, &genes, args.min_genes, args.namespace.as_deref())?;
            io::write_text(&dir.join("annotation_matrix.tsv"), &io::annotation_matrix_tsv(&a))?;
            let mut terms = String::from("term_id\tn_annotated\tstatus\n");
            let mut all: Vec<(&String, usize, &str)> = report
                .retained
                .iter()
                .map(|(t, c)| (t, *c, "retained"))
                .chain(report.dropped.iter().map(|(t, c)| (t, *c, "dropped")))
                .collect();
            all.sort();
            for (t, c, s) in all {
                terms.push_str(&format!("{t}\t{c}\t{s}\n"));
            }
            m.add_input("annotations", ann)?;
            m.add_input("universe", universe)?;
            m.count("retained", report.retained.len() as u64);
            m.count("dropped", report.dropped.len() as u64);
            m.count("ignored_genes", report.ignored_genes as u64);
            config["min_genes"] = args.min_genes.into();
            config["namespace"] = serde_json::json!(args.namespace);
            ("terms.tsv", terms)
        }
    };
    match &args.out_dir {
        Some(dir) => {
            io::write_text(&dir.join(name), &out)?;
            m.config = config;
            m.time("total", start);
            m.write(&dir.join("manifest.json"))
        }
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Filter(a) => cmd_filter(a),
        Command::DeTest(a) => cmd_de_test(a),
        Command::AssocTest(a) => cmd_assoc_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Dag(a) => cmd_dag(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Usage errors count as configuration errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
