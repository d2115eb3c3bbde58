//! Measurement protocols that reconstruct two-time correlations from outcome statistics.

pub mod cnimp;
pub mod distribution;
pub mod estimator;
pub mod projective;
pub mod rotation;
pub mod snimp;
pub mod tpm;

pub use cnimp::{cnimp_distribution, cnimp_estimate, cnimp_estimators, cnimp_runs, Cnimp, CnimpEstimates, CnimpRuns};
pub use distribution::{correlate, OutcomeDistribution};
pub use estimator::{assemble_estimator, f_factors, EstimatorComponents, FFactors};
pub use projective::{gamma_operator, projective_correlate, projective_distribution, GammaReport};
pub use rotation::rotation_protocol;
pub use snimp::{snimp_distribution, snimp_estimate, CouplingChoice, CouplingForm, Snimp, Timing};
pub use tpm::{tpm_estimate, tpm_rotated_coupling, Component, TpmCoupling};
