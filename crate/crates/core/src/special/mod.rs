//! Special functions: the complete elliptic integral `K(k)` and the Jacobi
//! theta function `θ₃` with its logarithmic derivative.

mod elliptic;
mod theta;

pub use elliptic::{agm, elliptic_k, elliptic_k_from_complement};
pub use theta::{
    ln_theta3, theta3, theta3_logderiv, ThetaArgument, ThetaParams, DEFAULT_MAX_TERMS,
    POLE_TOLERANCE,
};
