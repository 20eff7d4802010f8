//! Security analysis of Gaussian-modulated CV-QKD when an eavesdropper
//! attenuates the local oscillator to mask a collective attack.
//!
//! * [`gaussian`]: covariance matrices, symplectic spectra, entropies
//! * [`channel`]: Alice–Bob covariance, Bob's variances, zero-excess tuning
//! * [`keyrate`]: Holevo bounds and pseudo/true key rates
//! * [`cloner`]: entangling-cloner derivation of the same bounds
//! * [`sim`]: Monte Carlo homodyne data and Bob's parameter estimation

pub mod channel;
pub mod cloner;
pub mod error;
pub mod gaussian;
pub mod keyrate;
pub mod sim;

pub use channel::{LinkBudget, LoMonitoring, ProtocolParams, Reconciliation};
pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, Quadrature, SymplecticSpectrum};
pub use keyrate::{keyrates, KeyRateReport};
