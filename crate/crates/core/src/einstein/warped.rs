//! Warped products `(dx1^2 + dx2^2)/sigma^2 + (dx3^2 + dx4^2)/(alpha^2 beta^2)` with
//! `alpha = alpha(t)`, as the first-order system in `(alpha, gamma, delta) = (alpha, alpha', alpha'')`.

use alloc::vec::Vec;

use super::ode::{rk4_step, step_count, Termination};
use super::EinsteinError;
use crate::math::{abs, sqrt};

/// `|gamma|` below which the system is treated as singular.
pub const GAMMA_FLOOR: f64 = 1e-8;
/// Component magnitude treated as blow-up.
pub const STATE_CAP: f64 = 1e6;

/// The constants `B` (in `sigma^2 = B alpha^2 / alpha'`) and `C` (curvature of `beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedParams {
    pub b: f64,
    pub c: f64,
}

impl WarpedParams {
    pub fn new(b: f64, c: f64) -> Result<Self, EinsteinError> {
        if !(b.is_finite() && c.is_finite()) {
            return Err(EinsteinError::InvalidParams("B and C must be finite"));
        }
        if b == 0.0 {
            return Err(EinsteinError::InvalidParams("B must be nonzero"));
        }
        Ok(WarpedParams { b, c })
    }

    /// `C~ = C / B`.
    pub fn ctilde(&self) -> f64 {
        self.c / self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedState {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl WarpedState {
    pub const fn new(alpha: f64, gamma: f64, delta: f64) -> Self {
        WarpedState { alpha, gamma, delta }
    }

    fn to_array(self) -> [f64; 3] {
        [self.alpha, self.gamma, self.delta]
    }

    fn from_array(y: [f64; 3]) -> Self {
        WarpedState::new(y[0], y[1], y[2])
    }

    /// `sigma = sqrt(B alpha^2 / gamma)`.
    pub fn sigma(&self, params: &WarpedParams) -> Result<f64, EinsteinError> {
        if self.gamma == 0.0 {
            return Err(EinsteinError::Singular("gamma = 0"));
        }
        let s2 = params.b * self.alpha * self.alpha / self.gamma;
        if !(s2 > 0.0) {
            return Err(EinsteinError::InvalidState("B alpha^2 / gamma must be positive"));
        }
        Ok(sqrt(s2))
    }
}

/// `(gamma, delta, 2 gamma delta / alpha + delta^2 / gamma - 2 C~ gamma^2)`.
pub fn warped_rhs(s: &WarpedState, ctilde: f64) -> Result<[f64; 3], EinsteinError> {
    if !(s.alpha > 0.0) {
        return Err(EinsteinError::InvalidState("alpha must be positive"));
    }
    if s.gamma == 0.0 {
        return Err(EinsteinError::Singular("gamma = 0"));
    }
    let (a, g, d) = (s.alpha, s.gamma, s.delta);
    Ok([g, d, 2.0 * g * d / a + d * d / g - 2.0 * ctilde * g * g])
}

/// The conserved quantity `A = C alpha^2 + (B alpha^2 / gamma)(delta / alpha - 3 gamma^2 / alpha^2)`.
pub fn warped_integral(s: &WarpedState, params: &WarpedParams) -> Result<f64, EinsteinError> {
    if s.gamma == 0.0 {
        return Err(EinsteinError::Singular("gamma = 0"));
    }
    let (a, g, d) = (s.alpha, s.gamma, s.delta);
    Ok(params.c * a * a + params.b * a * a / g * (d / a - 3.0 * g * g / (a * a)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedSample {
    pub t: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub sigma: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpedTrajectory {
    pub params: WarpedParams,
    pub dt: f64,
    pub samples: Vec<WarpedSample>,
    pub termination: Termination,
}

impl WarpedTrajectory {
    /// `max |A(t) - A(0)|` over the samples.
    pub fn max_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        self.samples
            .iter()
            .fold(0.0, |m: f64, s| m.max(abs(s.integral - first.integral)))
    }

    /// Drift per unit time over the integrated span.
    pub fn drift_rate(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) if b.t > a.t => self.max_drift() / (b.t - a.t),
            _ => 0.0,
        }
    }
}

fn sample(t: f64, s: WarpedState, params: &WarpedParams) -> Result<WarpedSample, EinsteinError> {
    Ok(WarpedSample {
        t,
        alpha: s.alpha,
        gamma: s.gamma,
        delta: s.delta,
        sigma: s.sigma(params)?,
        integral: warped_integral(&s, params)?,
    })
}

/// RK4 trajectory from `s0` over `[0, t_end]`.
///
/// Stops with `SingularGamma` when `|gamma| < 1e-8` or `gamma` changes sign,
/// `BlowUp` when a component exceeds `1e6`, `LeftDomain` when `alpha` becomes
/// nonpositive.
pub fn integrate_warped(
    s0: &WarpedState,
    params: &WarpedParams,
    dt: f64,
    t_end: f64,
) -> Result<WarpedTrajectory, EinsteinError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EinsteinError::InvalidParams("dt must be positive"));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(EinsteinError::InvalidParams("t_end must be positive"));
    }
    if !(s0.alpha.is_finite() && s0.gamma.is_finite() && s0.delta.is_finite()) {
        return Err(EinsteinError::InvalidState("initial state must be finite"));
    }
    if !(s0.alpha > 0.0) {
        return Err(EinsteinError::InvalidState("alpha0 must be positive"));
    }
    if abs(s0.gamma) < GAMMA_FLOOR {
        return Err(EinsteinError::InvalidState("gamma0 must be nonzero"));
    }
    let ctilde = params.ctilde();
    let f = |y: &[f64; 3]| warped_rhs(&WarpedState::from_array(*y), ctilde);

    let n = step_count(t_end, dt);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(sample(0.0, *s0, params)?);
    let mut y = s0.to_array();
    let mut t = 0.0;
    let mut termination = Termination::ReachedEnd;
    for k in 0..n {
        let h = if k + 1 == n { t_end - t } else { dt };
        let next = match rk4_step(&f, &y, h) {
            Ok(v) => v,
            Err(EinsteinError::Singular(_)) => {
                termination = Termination::SingularGamma { t };
                break;
            }
            Err(_) => {
                termination = Termination::LeftDomain { t };
                break;
            }
        };
        let t_next = if k + 1 == n { t_end } else { (k + 1) as f64 * dt };
        if next.iter().any(|v| !v.is_finite() || abs(*v) > STATE_CAP) {
            termination = Termination::BlowUp { t_cap: t_next, t_escape: t_next };
            break;
        }
        if abs(next[1]) < GAMMA_FLOOR || next[1].signum() != y[1].signum() {
            termination = Termination::SingularGamma { t: t_next };
            break;
        }
        if !(next[0] > 0.0) {
            termination = Termination::LeftDomain { t: t_next };
            break;
        }
        y = next;
        t = t_next;
        samples.push(sample(t, WarpedState::from_array(y), params)?);
    }
    Ok(WarpedTrajectory { params: *params, dt, samples, termination })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_examples() {
        assert_eq!(warped_rhs(&WarpedState::new(1.0, 1.0, 0.0), 0.0).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(warped_rhs(&WarpedState::new(1.0, 1.0, 1.0), 0.0).unwrap(), [1.0, 1.0, 3.0]);
        assert_eq!(warped_rhs(&WarpedState::new(2.0, 1.0, 0.0), 1.0).unwrap(), [1.0, 0.0, -2.0]);
        assert!(matches!(
            warped_rhs(&WarpedState::new(1.0, 0.0, 0.0), 0.0),
            Err(EinsteinError::Singular(_))
        ));
        assert!(warped_rhs(&WarpedState::new(0.0, 1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn integral_examples() {
        let hyp = WarpedParams::new(1.0, 0.0).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let a = warped_integral(&WarpedState::new(t, 1.0, 0.0), &hyp).unwrap();
            assert!((a + 3.0).abs() < 1e-14);
        }
        let p = WarpedParams::new(1.0, 1.0).unwrap();
        assert_eq!(warped_integral(&WarpedState::new(1.0, 1.0, 0.0), &p).unwrap(), -2.0);
        let s = WarpedState::new(1.3, 0.7, 0.4);
        let p2 = WarpedParams::new(2.0, 1.0).unwrap();
        let non_c = |p: &WarpedParams| warped_integral(&s, p).unwrap() - p.c * s.alpha * s.alpha;
        assert!((non_c(&p2) - 2.0 * non_c(&p)).abs() < 1e-14);
    }

    #[test]
    fn linear_solution_is_reproduced() {
        let p = WarpedParams::new(1.0, 0.0).unwrap();
        let traj = integrate_warped(&WarpedState::new(1.0, 1.0, 0.0), &p, 1e-3, 1.0).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        for s in &traj.samples {
            assert!((s.alpha - (1.0 + s.t)).abs() < 1e-10);
            assert!((s.integral + 3.0).abs() < 1e-12);
        }
        assert_eq!(traj.samples.last().unwrap().t, 1.0);
    }

    #[test]
    fn generic_start_conserves_integral() {
        let p = WarpedParams::new(1.0, 1.0).unwrap();
        let traj = integrate_warped(&WarpedState::new(1.0, 0.5, 0.2), &p, 1e-3, 1.0).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        assert!(traj.drift_rate() < 1e-6, "{}", traj.drift_rate());
    }

    #[test]
    fn decaying_gamma_is_flagged() {
        let p = WarpedParams::new(1.0, 0.0).unwrap();
        let traj = integrate_warped(&WarpedState::new(1.0, 1.0, -10.0), &p, 1e-3, 5.0).unwrap();
        assert!(matches!(traj.termination, Termination::SingularGamma { .. }), "{:?}", traj.termination);
    }

    #[test]
    fn invalid_start() {
        let p = WarpedParams::new(1.0, 0.0).unwrap();
        assert!(integrate_warped(&WarpedState::new(1.0, 0.0, 0.0), &p, 1e-3, 1.0).is_err());
        assert!(integrate_warped(&WarpedState::new(-1.0, 1.0, 0.0), &p, 1e-3, 1.0).is_err());
        assert!(integrate_warped(&WarpedState::new(1.0, -1.0, 0.0), &p, 1e-3, 1.0).is_err());
    }
}
