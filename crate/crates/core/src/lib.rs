//! Econometric toolkit for annual macro series: composite-index construction,
//! disaster-exposure metrics, ADF and Phillips-Perron unit-root tests, ARDL
//! bounds testing with error-correction and long-run estimates, and the
//! post-estimation diagnostic battery, plus a batch pipeline that ties them
//! together.

pub mod ardl;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod index;
pub mod linalg;
pub mod pipeline;
pub mod regression;
pub mod sim;
pub mod stats;
pub mod timeseries;
pub mod unitroot;

pub use ardl::{ArdlFit, ArdlSpec, BoundsDecision, BoundsResult, Estimate, LagSearch, PssCase, Significance};
pub use diagnostics::{DiagnosticsReport, TestResult};
pub use error::{Error, Precondition, Result};
pub use index::{IndexRecipe, PcaResult};
pub use pipeline::{PipelineConfig, ReportBundle};
pub use regression::{ols, DesignMatrix, InfoCriterion, OlsFit};
pub use timeseries::{align, diff, lag, load_csv, Frame, Series};
pub use unitroot::{DeterministicSpec, IntegrationOrder, LagCriterion};
