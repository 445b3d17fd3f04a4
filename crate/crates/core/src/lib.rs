//! Resampling-based multiple tests of association between gene-annotation
//! profiles (e.g. ontology term membership) and gene-parameter profiles
//! estimated from expression data.
//!
//! The building blocks are association kernels ([`association`]), profile
//! estimators ([`estimation`]), ontology handling ([`dag`]) and the
//! single-step maxT engine ([`mtp`]); [`scenario`] wires them into the
//! standard two-level testing pipeline.

pub mod annotation;
pub mod association;
pub mod cli;
pub mod dag;
pub mod data;
pub mod de;
pub mod error;
pub mod estimation;
pub mod io;
pub mod manifest;
pub mod mtp;
pub mod numeric;
pub mod profile;
pub mod rng;
pub mod scenario;
pub mod simulate;

pub use annotation::AnnotationMatrix;
pub use association::{associate, AssociationResult, Measure, ProfileTransform};
pub use dag::{assemble_matrix, propagate_true_path, DirectAnnotations, OntologyDag};
pub use data::SampleData;
pub use de::{de_test, DeTestConfig, DeTestResult};
pub use error::{Error, ErrorKind, Result};
pub use estimation::{group_summary, lambda_d, lambda_t, FilterParams, LambdaScale, Side};
pub use mtp::{resample_null, single_step_maxt, MtpResult, NullDistributionEstimate, ResampleOptions};
pub use profile::{ParameterProfile, ProfileKind};
pub use scenario::{run_scenario, DeEstimator, ScenarioConfig, ScenarioKind, ScenarioReport};
pub use simulate::{simulate, SimulationSpec};
