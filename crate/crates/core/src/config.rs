//! Centralized tolerances and tuning knobs.
//!
//! Every numerical threshold used by the engine lives in [`Config`]. The CLI
//! layers a configuration file and command-line flags over [`Config::default`].

use serde::{Deserialize, Serialize};

use crate::matfun::QuadratureSpec;

/// Spectral-set constant `1 + √2` of the numerical range.
pub const CP_CONSTANT: f64 = 1.0 + std::f64::consts::SQRT_2;

/// Default cap on the dimension of explicitly formed Kronecker operators.
pub const DEFAULT_MAX_KRON_DIM: usize = 4096;

/// Eigenvector matrices with condition estimate above this are treated as
/// not numerically diagonalizable.
pub const DIAGONALIZABLE_KAPPA: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Eigenpair residual tolerance relative to `‖A‖₂`.
    pub tol_eig: f64,
    /// Linear solve residual tolerance.
    pub tol_solve: f64,
    /// Relative accuracy target for spectral norms.
    pub tol_norm: f64,
    /// Slack on certification ratios.
    pub tol_cert: f64,
    /// Largest row/column count of an explicit Kronecker operator.
    pub max_kron_dim: usize,
    /// Angles for numerical-range sweeps.
    pub n_angles: usize,
    /// Angles for certification sweeps (before refinement).
    pub cert_angles: usize,
    /// Contour margin; `None` means `0.1 · (1 + diameter)` of the sampled range.
    pub margin: Option<f64>,
    /// Divided-difference switch threshold.
    pub eps_dd: f64,
    pub quadrature: QuadratureSpec,
    /// Quadrature for three or more variables, where the tensor grid grows
    /// as `N^d`.
    pub quadrature_multi: QuadratureSpec,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tol_eig: 1e-10,
            tol_solve: 1e-12,
            tol_norm: 1e-10,
            tol_cert: 1e-6,
            max_kron_dim: DEFAULT_MAX_KRON_DIM,
            n_angles: 360,
            cert_angles: 720,
            margin: None,
            eps_dd: 1e-6,
            quadrature: QuadratureSpec::default(),
            quadrature_multi: QuadratureSpec { nodes_per_contour: 32, adaptive: true, rel_tol: 1e-9, max_nodes: 128 },
        }
    }
}
