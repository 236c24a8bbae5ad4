//! The single-parameter family `rho' = alpha (rho^3 - beta^3)`, `sigma = b rho |rho'|^(-1/2)`.

use alloc::vec::Vec;

use super::ode::{rk4_step, step_count, Termination};
use super::EinsteinError;
use crate::linalg;
use crate::math::{abs, atan, ln, powi, sqrt};

/// `|rho|` beyond which a trajectory is treated as escaping to infinity.
pub const RHO_CAP: f64 = 1e3;
/// Resolution in `t` of the blow-up bracket.
pub const BLOW_UP_RESOLUTION: f64 = 1e-6;
/// Upper bound on `dt * |d rho'/d rho|`; steps are shortened where the cubic
/// term makes the nominal step too coarse.
const MAX_STEP_STIFFNESS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
}

impl FamilyParams {
    pub fn new(alpha: f64, beta: f64, b: f64) -> Result<Self, EinsteinError> {
        if !(alpha.is_finite() && beta.is_finite() && b.is_finite()) {
            return Err(EinsteinError::InvalidParams("alpha, beta and b must be finite"));
        }
        if alpha == 0.0 {
            return Err(EinsteinError::InvalidParams("alpha must be nonzero"));
        }
        if b == 0.0 {
            return Err(EinsteinError::InvalidParams("b must be nonzero"));
        }
        Ok(FamilyParams { alpha, beta, b })
    }

    /// `c = 3 alpha / 2`.
    pub fn c(&self) -> f64 {
        1.5 * self.alpha
    }

    /// `e = -alpha beta^3`.
    pub fn e(&self) -> f64 {
        -self.alpha * powi(self.beta, 3)
    }
}

/// `alpha (rho^3 - beta^3)`.
pub fn rho_rhs(fp: &FamilyParams, rho: f64) -> f64 {
    fp.alpha * (powi(rho, 3) - powi(fp.beta, 3))
}

/// `rho'' = 3 alpha rho^2 rho'` along a solution.
pub fn rho_second(fp: &FamilyParams, rho: f64) -> f64 {
    3.0 * fp.alpha * rho * rho * rho_rhs(fp, rho)
}

/// `sigma = b rho |rho'|^(-1/2)`.
pub fn sigma_from_rho(b: f64, rho: f64, rho_prime: f64) -> Result<f64, EinsteinError> {
    if rho_prime == 0.0 || !rho_prime.is_finite() {
        return Err(EinsteinError::Singular("sigma is undefined where rho' = 0"));
    }
    Ok(b * rho / sqrt(abs(rho_prime)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeSign {
    Positive,
    Negative,
}

impl SlopeSign {
    pub fn of(rho_prime: f64) -> Option<SlopeSign> {
        if rho_prime > 0.0 {
            Some(SlopeSign::Positive)
        } else if rho_prime < 0.0 {
            Some(SlopeSign::Negative)
        } else {
            None
        }
    }
}

/// `A = -3 b^2 e` for `rho' > 0`, `+3 b^2 e` for `rho' < 0`.
pub fn einstein_constant(fp: &FamilyParams, sign: SlopeSign) -> f64 {
    let a = 3.0 * fp.b * fp.b * fp.e();
    match sign {
        SlopeSign::Positive => -a,
        SlopeSign::Negative => a,
    }
}

/// Closed-form time at which the solution of `rho' = rho^3 + 1`, `rho(0) = 0`
/// reaches `rho >= 0`.
pub fn implicit_time(rho: f64) -> f64 {
    let s3 = sqrt(3.0);
    ln((rho + 1.0) / sqrt(abs(rho * rho - rho + 1.0))) / 3.0
        + s3 / 3.0 * atan(2.0 / s3 * (rho - 0.5))
        + core::f64::consts::PI * s3 / 18.0
}

/// Limit of [`implicit_time`] as `rho -> infinity`: `2 sqrt(3) pi / 9`.
pub fn implicit_blow_up_time() -> f64 {
    2.0 * sqrt(3.0) * core::f64::consts::PI / 9.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSample {
    pub t: f64,
    pub rho: f64,
    pub rho_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoTrajectory {
    pub params: FamilyParams,
    pub dt: f64,
    pub samples: Vec<RhoSample>,
    pub termination: Termination,
}

impl RhoTrajectory {
    pub fn sigma(&self, s: &RhoSample) -> Result<f64, EinsteinError> {
        sigma_from_rho(self.params.b, s.rho, s.rho_prime)
    }

    pub fn t_range(&self) -> (f64, f64) {
        let first = self.samples.first().map_or(0.0, |s| s.t);
        let last = self.samples.last().map_or(0.0, |s| s.t);
        (first, last)
    }

    pub fn blow_up_time(&self) -> Option<f64> {
        match self.termination {
            Termination::BlowUp { t_escape, .. } => Some(t_escape),
            _ => None,
        }
    }
}

fn escaped(rho: f64) -> bool {
    !rho.is_finite() || abs(rho) > RHO_CAP
}

/// RK4 solution of `rho' = alpha (rho^3 - beta^3)` from `rho(0) = rho0` up to `t_max`.
///
/// If `|rho|` passes [`RHO_CAP`] the last step is bisected until the crossing is
/// bracketed to [`BLOW_UP_RESOLUTION`]; the reported escape time adds the
/// asymptotic tail `1 / (2 |alpha| rho_cap^2)`.
pub fn integrate_rho(
    fp: &FamilyParams,
    rho0: f64,
    dt: f64,
    t_max: f64,
) -> Result<RhoTrajectory, EinsteinError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EinsteinError::InvalidParams("dt must be positive"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(EinsteinError::InvalidParams("t_max must be positive"));
    }
    if !rho0.is_finite() || escaped(rho0) {
        return Err(EinsteinError::InvalidState("rho0 must be finite and below the cap"));
    }
    let f = |y: &[f64; 1]| -> Result<[f64; 1], EinsteinError> { Ok([rho_rhs(fp, y[0])]) };
    let sample = |t: f64, rho: f64| RhoSample { t, rho, rho_prime: rho_rhs(fp, rho) };

    let mut samples = Vec::with_capacity(step_count(t_max, dt) + 1);
    let mut t = 0.0;
    let mut y = [rho0];
    samples.push(sample(t, rho0));
    let termination = loop {
        if t >= t_max {
            break Termination::ReachedEnd;
        }
        let remaining = t_max - t;
        let mut h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
        let stiffness = 3.0 * abs(fp.alpha) * y[0] * y[0];
        if stiffness * h > MAX_STEP_STIFFNESS {
            h = MAX_STEP_STIFFNESS / stiffness;
        }
        let next = rk4_step(&f, &y, h)?;
        if escaped(next[0]) {
            let (lo, _) = bracket_cap(&f, &y, h)?;
            let t_cap = t + lo;
            let t_escape = t_cap + 1.0 / (2.0 * abs(fp.alpha) * RHO_CAP * RHO_CAP);
            break Termination::BlowUp { t_cap, t_escape };
        }
        t = if h == remaining { t_max } else { t + h };
        y = next;
        samples.push(sample(t, y[0]));
    };
    Ok(RhoTrajectory { params: *fp, dt, samples, termination })
}

/// Bisects the step length in `(0, h]` at which `|rho|` crosses the cap.
fn bracket_cap(
    f: &impl Fn(&[f64; 1]) -> Result<[f64; 1], EinsteinError>,
    y: &[f64; 1],
    h: f64,
) -> Result<(f64, f64), EinsteinError> {
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > BLOW_UP_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if escaped(rk4_step(f, y, mid)?[0]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndKind {
    /// `rho ~ e t`, `sigma ~ b sqrt(e) t`: conformally the hyperbolic metric `1/t^2`.
    HyperbolicType,
    /// `rho -> beta`, `1/sigma -> 0`: the metric collapses onto `(dx3^2 + dx4^2) / beta^2`.
    PlaneEnd,
    /// `rho` escapes in finite time.
    BlowUp,
    Unresolved,
}

impl EndKind {
    pub fn label(&self) -> &'static str {
        match self {
            EndKind::HyperbolicType => "hyperbolic-type",
            EndKind::PlaneEnd => "R2-end",
            EndKind::BlowUp => "blow-up",
            EndKind::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndDiagnostics {
    /// Fitted `rho'(0)`.
    pub rho_slope: f64,
    /// Fitted `sigma'(0)`.
    pub sigma_slope: f64,
    /// `rho`, `rho'` and `1/sigma` at the last sample.
    pub rho_limit: f64,
    pub rho_prime_limit: f64,
    pub inv_sigma_limit: f64,
    pub near: EndKind,
    pub far: EndKind,
    pub blow_up_time: Option<f64>,
}

/// Window `[0, SMALL_T_WINDOW]` used for the small-`t` slope fits.
pub const SMALL_T_WINDOW: f64 = 0.05;
/// Fraction of the time range treated as the large-`t` regime.
pub const LARGE_T_FRACTION: f64 = 0.1;
pub const MIN_FIT_SAMPLES: usize = 10;
/// Tolerance on `|rho - beta|` and `|rho'|` for an `R^2`-end.
pub const PLANE_END_TOL: f64 = 1e-6;

/// Slope at `t = 0` of the least-squares cubic through `(t, y)`.
fn cubic_slope(ts: &[f64], ys: &[f64], scale: f64) -> Result<f64, EinsteinError> {
    let mut m = linalg::zeros();
    let mut rhs = [0.0; 4];
    for (t, y) in ts.iter().zip(ys) {
        let u = t / scale;
        let basis = [1.0, u, u * u, u * u * u];
        for i in 0..4 {
            rhs[i] += basis[i] * y;
            for j in 0..4 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let inv = linalg::inverse(&m).ok_or(EinsteinError::TooShort("degenerate fit window"))?;
    let c1: f64 = (0..4).map(|j| inv[1][j] * rhs[j]).sum();
    Ok(c1 / scale)
}

/// Small-`t` slopes, large-`t` limits and the classification of both ends.
pub fn end_diagnostics(
    fp: &FamilyParams,
    traj: &RhoTrajectory,
) -> Result<EndDiagnostics, EinsteinError> {
    let samples = &traj.samples;
    let (t0, t1) = traj.t_range();

    let near: Vec<&RhoSample> = samples.iter().filter(|s| s.t - t0 <= SMALL_T_WINDOW).collect();
    if near.len() < MIN_FIT_SAMPLES {
        return Err(EinsteinError::TooShort("fewer than 10 samples in the small-t window"));
    }
    let ts: Vec<f64> = near.iter().map(|s| s.t - t0).collect();
    let rhos: Vec<f64> = near.iter().map(|s| s.rho).collect();
    let mut sigmas = Vec::with_capacity(near.len());
    for s in &near {
        sigmas.push(sigma_from_rho(fp.b, s.rho, s.rho_prime)?);
    }
    let rho_slope = cubic_slope(&ts, &rhos, SMALL_T_WINDOW)?;
    let sigma_slope = cubic_slope(&ts, &sigmas, SMALL_T_WINDOW)?;

    let far_from = t1 - LARGE_T_FRACTION * (t1 - t0);
    if samples.iter().filter(|s| s.t >= far_from).count() < MIN_FIT_SAMPLES {
        return Err(EinsteinError::TooShort("fewer than 10 samples in the large-t window"));
    }
    let last = samples[samples.len() - 1];
    let inv_sigma_limit = if last.rho_prime == 0.0 {
        0.0
    } else {
        1.0 / sigma_from_rho(fp.b, last.rho, last.rho_prime)?
    };

    let first = samples[0];
    let near_kind = if abs(first.rho) < 1e-12 && rho_slope != 0.0 && sigma_slope != 0.0 {
        EndKind::HyperbolicType
    } else {
        EndKind::Unresolved
    };
    let far_kind = match traj.termination {
        Termination::BlowUp { .. } => EndKind::BlowUp,
        _ if abs(last.rho - fp.beta) < PLANE_END_TOL && abs(last.rho_prime) < PLANE_END_TOL => {
            EndKind::PlaneEnd
        }
        _ => EndKind::Unresolved,
    };

    Ok(EndDiagnostics {
        rho_slope,
        sigma_slope,
        rho_limit: last.rho,
        rho_prime_limit: last.rho_prime,
        inv_sigma_limit,
        near: near_kind,
        far: far_kind,
        blow_up_time: traj.blow_up_time(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(alpha: f64, beta: f64, b: f64) -> FamilyParams {
        FamilyParams::new(alpha, beta, b).unwrap()
    }

    #[test]
    fn params_and_rhs() {
        let fp = fam(-1.0, 1.0, 1.0);
        assert_eq!(fp.c(), -1.5);
        assert_eq!(fp.e(), 1.0);
        assert_eq!(rho_rhs(&fp, 0.0), 1.0);
        assert_eq!(rho_rhs(&fp, 1.0), 0.0);
        assert_eq!(rho_rhs(&fam(1.0, -1.0, 1.0), 1.0), 2.0);
        for rho in [-1.3, 0.2, 0.7, 2.5] {
            let alt = 2.0 * fp.c() / 3.0 * rho * rho * rho + fp.e();
            assert!((rho_rhs(&fp, rho) - alt).abs() < 1e-14);
        }
        assert!(FamilyParams::new(0.0, 1.0, 1.0).is_err());
        assert!(FamilyParams::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn einstein_constant_cases() {
        let fp = fam(-1.0, 1.0, 1.0);
        assert_eq!(einstein_constant(&fp, SlopeSign::Positive), -3.0);
        assert_eq!(einstein_constant(&fp, SlopeSign::Negative), 3.0);
        assert_eq!(einstein_constant(&fam(-1.0, 0.0, 1.0), SlopeSign::Positive), 0.0);
        assert_eq!(einstein_constant(&fam(-1.0, 1.0, 2.0), SlopeSign::Positive), -12.0);
        let a = einstein_constant(&fp, SlopeSign::Positive);
        assert_eq!(a, 3.0 * fp.b * fp.b * fp.alpha * fp.beta.powi(3));
    }

    #[test]
    fn sigma_guard() {
        assert_eq!(sigma_from_rho(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(sigma_from_rho(2.0, 1.0, -4.0).unwrap(), 1.0);
        assert!(sigma_from_rho(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn implicit_time_values() {
        assert!(implicit_time(0.0).abs() < 1e-15);
        let expected = 2f64.ln() / 3.0 + 3f64.sqrt() * core::f64::consts::PI / 9.0;
        assert!((implicit_time(1.0) - expected).abs() < 1e-15);
        assert!((implicit_time(1e9) - implicit_blow_up_time()).abs() < 1e-8);
        assert!((implicit_blow_up_time() - 1.2092).abs() < 1e-4);
    }

    #[test]
    fn equilibrium_is_constant() {
        let traj = integrate_rho(&fam(-1.0, 1.0, 1.0), 1.0, 0.01, 2.0).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        assert!(traj.samples.iter().all(|s| s.rho == 1.0));
        assert_eq!(traj.samples.last().unwrap().t, 2.0);
    }

    #[test]
    fn family_one_converges_to_beta() {
        let traj = integrate_rho(&fam(-1.0, 1.0, 1.0), 0.0, 1e-3, 10.0).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].rho > w[0].rho);
            assert!(w[1].rho < 1.0);
        }
        assert!(traj.samples.last().unwrap().rho > 1.0 - 1e-6);
    }

    #[test]
    fn family_two_blows_up() {
        let traj = integrate_rho(&fam(1.0, -1.0, 1.0), 0.0, 1e-3, 5.0).unwrap();
        let t0 = traj.blow_up_time().unwrap();
        assert!((t0 - implicit_blow_up_time()).abs() < 1e-4, "{t0}");
    }

    #[test]
    fn diagnostics_family_one() {
        let fp = fam(-1.0, 1.0, 1.0);
        let traj = integrate_rho(&fp, 0.0, 1e-3, 10.0).unwrap();
        let d = end_diagnostics(&fp, &traj).unwrap();
        assert!((d.rho_slope - 1.0).abs() < 1e-3);
        assert!((d.sigma_slope - 1.0).abs() < 1e-3);
        assert!((d.rho_limit - 1.0).abs() < 1e-6);
        assert!(d.inv_sigma_limit < 1e-5);
        assert_eq!((d.near, d.far), (EndKind::HyperbolicType, EndKind::PlaneEnd));
    }

    #[test]
    fn diagnostics_need_samples() {
        let fp = fam(-1.0, 1.0, 1.0);
        let traj = integrate_rho(&fp, 0.0, 0.01, 10.0).unwrap();
        assert!(matches!(end_diagnostics(&fp, &traj), Err(EinsteinError::TooShort(_))));
    }
}
