//! Generalised network autoregressive (GNAR) models with community-specific
//! coefficients.
//!
//! The crate covers the whole workflow: building a network and its
//! `r`-stage neighbourhoods, specifying global-, community- and local-α
//! models, simulating them, estimating them by least squares, network
//! autocorrelation diagnostics rendered as Corbit / R-Corbit plots,
//! forecasting, and the presidential election case study.

pub mod autocorr;
pub mod corbit;
pub mod elections;
pub mod error;
pub mod estimate;
pub mod forecast;
pub mod io;
pub mod linalg;
pub mod model;
pub mod network;
pub mod panel;
pub mod partition;
pub mod simulate;

pub use autocorr::{corbit_grid, nacf, pnacf, CorbitGrid, Correlation, CorrelationKind};
pub use corbit::{render_corbit, render_rcorbit, RenderOptions, Rgb};
pub use error::{GnarError, Result};
pub use estimate::{fit, fit_gls, fit_ols, fit_per_community, DesignSystem, FitResult, NoiseCovariance};
pub use forecast::{compare, forecast, naive_forecast, rmspe, ExternalForecast, ForecastReport, ModelSpec, ReportEntry};
pub use model::{Coefficients, GnarModel, GnarOrder, LagCoefficients, Term, Variant, VarCoefficients};
pub use network::{DistanceMatrix, Network, StageAdjacency, Topology, WeightMatrix};
pub use panel::TimeSeriesPanel;
pub use partition::CommunityPartition;
pub use simulate::{simulate, SimulationConfig};
