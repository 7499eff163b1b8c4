//! Tolerances and finite-difference steps shared by every check.

/// Residual thresholds grouped by how many numerical derivatives feed the
/// quantity being checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Pointwise algebra on exact or once-computed matrices.
    pub alg: f64,
    /// Quantities involving one finite-difference derivative.
    pub d1: f64,
    /// Quantities involving two nested finite-difference derivatives.
    pub d2: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        alg: 1e-8,
        d1: 1e-4,
        d2: 2e-2,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Central-difference steps. `step1` drives Jacobians, `step2` drives
/// second derivatives and derivatives of fields that are themselves built
/// from Jacobians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub step1: f64,
    pub step2: f64,
}

impl FdSteps {
    pub const DEFAULT: FdSteps = FdSteps {
        step1: 1e-5,
        step2: 1e-3,
    };
}

impl Default for FdSteps {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A vector counts as tangent when its normal part is below this fraction of
/// its length.
pub const TANGENCY_REL: f64 = 1e-7;

/// Inputs whose normal part is within this multiple of [`TANGENCY_REL`] are
/// re-projected instead of rejected.
pub const TANGENCY_REPROJECT_FACTOR: f64 = 10.0;

/// Relative singular-value floor below which a Jacobian is treated as rank
/// deficient.
pub const RANK_FLOOR: f64 = 1e-8;
