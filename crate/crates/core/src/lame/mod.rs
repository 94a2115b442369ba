//! Associated Lamé potentials, the product-of-solutions ansatz and the
//! Bloch solutions built from it.

mod ansatz;
mod bloch;
mod model;

pub use ansatz::{
    ansatz_coefficients, fit_ansatz, numerator_roots, product_ode_residual, AnsatzBranch,
    AnsatzCoefficients, FitOutcome, ProductEquation,
};
pub use bloch::{
    auxiliary_points, bloch_log_derivative, bloch_pair, AuxiliaryPoints, BlochBasis, BlochPair,
    BlochSolution, SignPairing, Which,
};
pub use model::{band_edges, energy_transform, potential, EnergyPair, LameModel, SUPPORTED_MODELS};
