//! Einstein equations `Ric = A g` for the deformed metric and their solution families.
//!
//! - [`einstein_residuals`]: the general ten-equation system in terms of
//!   `ln sigma` and `ln rho`.
//! - [`warped_residuals`]: the four-equation system for `rho = alpha(x1, x2) beta(x3, x4)`.
//! - [`warped`]: the third-order ODE for `alpha(t)` as a first-order system with its
//!   conserved quantity.
//! - [`family`]: solutions depending on `t = x1` only, generated by
//!   `rho' = alpha (rho^3 - beta^3)`.
//! - [`profile`]: `t`-dependent profiles, their fields and metrics, and the
//!   reduced single-parameter equations.
//!
//! Residuals are reported as `(curvature expression) - (right-hand side)`, so an
//! Einstein metric gives a zero vector and a flat metric tested against `A`
//! gives `-A` in the diagonal slots.

pub mod family;
mod ode;
pub mod profile;
pub mod warped;

pub use family::{
    einstein_constant, end_diagnostics, implicit_time, integrate_rho, rho_rhs, sigma_from_rho,
    EndDiagnostics, EndKind, FamilyParams, RhoSample, RhoTrajectory, SlopeSign,
};
pub use ode::Termination;
pub use profile::{
    family_metric, single_param_residuals, single_param_scale, special_residuals, FamilyProfile, FieldProfile, Profile,
    ProfileField, RicciFlatProfile,
};
pub use warped::{
    integrate_warped, warped_integral, warped_rhs, WarpedParams, WarpedSample, WarpedState,
    WarpedTrajectory,
};

use crate::biconformal::DeformationPair;
use crate::fields::{FieldError, Point, ScalarField, DIM};
use crate::math::abs;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EinsteinError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("singular: {0}")]
    Singular(&'static str),
    #[error("beta does not have constant Gaussian curvature (spread {spread:e})")]
    NonConstantCurvature { spread: f64 },
    #[error("trajectory too short: {0}")]
    TooShort(&'static str),
}

/// Names of the ten residual slots, in order.
pub const EINSTEIN_SLOTS: [&str; 10] = [
    "i_1", "i_2", "ii", "iii_13", "iii_14", "iii_23", "iii_24", "iv_3", "iv_4", "v",
];

/// Residuals of the ten Einstein equations at `p`.
///
/// Slots, in order: (i) for j = 1, 2; (ii); (iii) for (j, s) = (1,3), (1,4),
/// (2,3), (2,4); (iv) for s = 3, 4; (v). Slots (i) and (iv) are frame Ricci
/// components minus `A`; the others are the bracketed expressions that must vanish.
pub fn einstein_residuals(
    d: &DeformationPair,
    einstein_constant: f64,
    p: &Point,
) -> Result<[f64; 10], FieldError> {
    let l = d.log_derivatives(p)?;
    let (s, r) = (l.sigma, l.rho);
    let (ls, lss, lr, lrr) = (&l.d_ln_sigma, &l.dd_ln_sigma, &l.d_ln_rho, &l.dd_ln_rho);
    let a = einstein_constant;

    let hor_ratio = (r * r) / (s * s);
    let eq_i = |j: usize| {
        let jp = 1 - j;
        s * s
            * (lss[0][0] + lss[1][1] + hor_ratio * (lss[2][2] + lss[3][3])
                - 2.0 * hor_ratio * (ls[2] * ls[2] + ls[3] * ls[3])
                + 2.0 * lrr[j][j]
                - 2.0 * lr[j] * lr[j]
                + 2.0 * ls[j] * lr[j]
                - 2.0 * ls[jp] * lr[jp])
            - a
    };
    let eq_ii = lrr[0][1] + ls[0] * lr[1] + lr[0] * ls[1] - lr[0] * lr[1];
    let eq_iii = |j: usize, k: usize| lss[j][k] + lrr[j][k] + 2.0 * ls[k] * lr[j];
    let ver_ratio = (s * s) / (r * r);
    let eq_iv = |k: usize| {
        let kp = 5 - k;
        r * r
            * (2.0 * lss[k][k] - 2.0 * ls[k] * ls[k] + 2.0 * ls[k] * lr[k]
                - 2.0 * ls[kp] * lr[kp]
                + ver_ratio * (lrr[0][0] + lrr[1][1])
                + lrr[2][2]
                + lrr[3][3]
                - 2.0 * ver_ratio * (lr[0] * lr[0] + lr[1] * lr[1]))
            - a
    };
    let eq_v = lss[2][3] + lr[2] * ls[3] + ls[2] * lr[3] - ls[2] * ls[3];

    Ok([
        eq_i(0),
        eq_i(1),
        eq_ii,
        eq_iii(0, 2),
        eq_iii(0, 3),
        eq_iii(1, 2),
        eq_iii(1, 3),
        eq_iv(2),
        eq_iv(3),
        eq_v,
    ])
}

/// Offset used to sample `beta` around `p` when checking constant curvature.
pub const CURVATURE_PROBE_OFFSET: f64 = 0.05;
/// Admissible spread of `beta^2 Lap ln beta` over the probe points.
pub const CURVATURE_CONSTANCY_TOL: f64 = 1e-6;

fn log_jet(f: &dyn ScalarField, p: &Point) -> Result<(f64, [f64; DIM], [[f64; DIM]; DIM]), FieldError> {
    let j = f.jet(p)?;
    if !(j.value > 0.0) {
        return Err(FieldError::NonPositive { value: j.value, point: *p });
    }
    let ln = j.ln()?;
    Ok((j.value, ln.grad, ln.hess))
}

/// Gaussian curvature `beta^2 (d_33 + d_44) ln beta` of `(dx3^2 + dx4^2) / beta^2`.
pub fn fibre_curvature(beta: &dyn ScalarField, p: &Point) -> Result<f64, FieldError> {
    let (b, _, dd) = log_jet(beta, p)?;
    Ok(b * b * (dd[2][2] + dd[3][3]))
}

/// Residuals of the warped-product system for
/// `g = (dx1^2 + dx2^2)/sigma^2 + (dx3^2 + dx4^2)/(alpha^2 beta^2)`.
///
/// `sigma` and `alpha` are read as functions of `(x1, x2)`, `beta` as a function of
/// `(x3, x4)`. `beta` must have constant Gaussian curvature; this is checked at
/// `p` and four nearby points in the `(x3, x4)` plane.
pub fn warped_residuals(
    sigma: &dyn ScalarField,
    alpha: &dyn ScalarField,
    beta: &dyn ScalarField,
    einstein_constant: f64,
    p: &Point,
) -> Result<[f64; 4], EinsteinError> {
    let k0 = fibre_curvature(beta, p)?;
    let mut spread: f64 = 0.0;
    for axis in [2, 3] {
        for sign in [-1.0, 1.0] {
            let q = p.shifted(axis, sign * CURVATURE_PROBE_OFFSET);
            spread = spread.max(abs(fibre_curvature(beta, &q)? - k0));
        }
    }
    if spread > CURVATURE_CONSTANCY_TOL {
        return Err(EinsteinError::NonConstantCurvature { spread });
    }

    let (s, ls, lss) = log_jet(sigma, p)?;
    let (al, la, laa) = log_jet(alpha, p)?;
    let a = einstein_constant;
    let s2 = s * s;
    let lap_s = lss[0][0] + lss[1][1];

    let eq_i = s2
        * (lap_s - 2.0 * la[0] * la[0] + 2.0 * laa[0][0] + 2.0 * ls[0] * la[0]
            - 2.0 * ls[1] * la[1])
        - a;
    let eq_ii = s2
        * (lap_s - 2.0 * la[1] * la[1] + 2.0 * laa[1][1] + 2.0 * ls[1] * la[1]
            - 2.0 * ls[0] * la[0])
        - a;
    let eq_iii = laa[0][1] + ls[0] * la[1] + la[0] * ls[1] - la[0] * la[1];
    // alpha^2 beta^2 Lap ln beta = alpha^2 * (fibre curvature)
    let eq_iv = s2 * (laa[0][0] + laa[1][1]) + al * al * k0
        - 2.0 * s2 * (la[0] * la[0] + la[1] * la[1])
        - a;
    Ok([eq_i, eq_ii, eq_iii, eq_iv])
}
