//! Exponentiated generalized Weibull-Gompertz lifetimes and their bivariate
//! extension with a shared latent factor.
//!
//! * [`egwg`]: the univariate family (distribution, density, quantiles, sampling)
//! * [`bivariate`]: the joint law of `(max(U_1, U_3), max(U_2, U_3))`
//! * [`reliability`]: survival, hazard and waiting-time functionals
//! * [`moments`]: raw moments by quadrature and by series
//! * [`estimation`]: likelihood, maximum-likelihood fit and information criteria
//! * [`dataio`]: paired-sample CSV handling and the bundled football dataset

pub mod bivariate;
pub mod dataio;
pub mod egwg;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod moments;
pub mod numerics;
pub mod reliability;

pub use bivariate::{BegwgParams, Component, MassDecomposition, Region};
pub use egwg::{Baseline, EgwgParams};
pub use error::{Error, Result};
pub use estimation::{Classification, FitOptions, FitResult, PairedSample};
pub use moments::{SeriesControl, SeriesResult};
pub use numerics::QuadratureConfig;
pub use reliability::{GradientPair, HazardVector};
