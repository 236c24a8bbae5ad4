//! Profiles `sigma(t)`, `rho(t)` with `t = x1`, the fields and metrics they define,
//! and the reduced single-parameter equations.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::family::{rho_rhs, FamilyParams, RhoSample, RhoTrajectory};
use super::EinsteinError;
use crate::biconformal::{metric_of, BiconformalMetric, DeformationPair};
use crate::fields::{FieldError, Jet2, Point, ScalarField};
use crate::math::{abs, ln, pow, sqrt};

/// A pair of positive functions of `t`.
///
/// Both accessors return `[f, (ln f)', (ln f)'']`. Working with logarithmic
/// derivatives keeps the reduced equations free of cancellation where `rho'` is tiny.
pub trait Profile: Send + Sync + fmt::Debug {
    fn domain(&self) -> (f64, f64);
    fn sigma_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError>;
    fn rho_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError>;

    fn check_domain(&self, t: f64) -> Result<(), FieldError> {
        let (lo, hi) = self.domain();
        if !t.is_finite() {
            return Err(FieldError::NonFinitePoint);
        }
        if t < lo || t > hi {
            return Err(FieldError::OutOfRange { t, lo, hi });
        }
        Ok(())
    }
}

impl<P: Profile + ?Sized> Profile for Arc<P> {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn sigma_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        (**self).sigma_log_jet(t)
    }
    fn rho_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        (**self).rho_log_jet(t)
    }
}

fn positive(v: f64, t: f64) -> Result<f64, FieldError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(FieldError::NonPositive { value: v, point: Point::on_t_axis(t) })
    }
}

/// The Ricci-flat member `sigma = a t^(1/4)`, `rho = t^(-1/2)` on `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciFlatProfile {
    pub a: f64,
}

impl RicciFlatProfile {
    pub fn new(a: f64) -> Result<Self, EinsteinError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(EinsteinError::InvalidParams("a must be positive"));
        }
        Ok(RicciFlatProfile { a })
    }
}

impl Profile for RicciFlatProfile {
    fn domain(&self) -> (f64, f64) {
        (f64::MIN_POSITIVE, f64::INFINITY)
    }

    fn sigma_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        self.check_domain(t)?;
        Ok([self.a * pow(t, 0.25), 0.25 / t, -0.25 / (t * t)])
    }

    fn rho_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        self.check_domain(t)?;
        Ok([1.0 / sqrt(t), -0.5 / t, 0.5 / (t * t)])
    }
}

/// Profile read off two scalar fields along the `t = x1` axis.
#[derive(Clone)]
pub struct FieldProfile {
    sigma: Arc<dyn ScalarField>,
    rho: Arc<dyn ScalarField>,
}

impl fmt::Debug for FieldProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldProfile")
            .field("sigma", &self.sigma)
            .field("rho", &self.rho)
            .finish()
    }
}

impl FieldProfile {
    pub fn new(sigma: Arc<dyn ScalarField>, rho: Arc<dyn ScalarField>) -> Self {
        FieldProfile { sigma, rho }
    }

    fn log_jet(f: &dyn ScalarField, t: f64) -> Result<[f64; 3], FieldError> {
        let p = Point::on_t_axis(t);
        let j = f.jet(&p)?;
        positive(j.value, t)?;
        let l = j.ln()?;
        Ok([j.value, l.grad[0], l.hess[0][0]])
    }
}

impl Profile for FieldProfile {
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn sigma_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        Self::log_jet(&*self.sigma, t)
    }

    fn rho_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        Self::log_jet(&*self.rho, t)
    }
}

/// A family trajectory as a profile.
///
/// `rho(t)` is the cubic Hermite interpolant of the samples (values and slopes);
/// every derivative is then taken through the ODE: `rho' = alpha (rho^3 - beta^3)`,
/// `rho'' = 3 alpha rho^2 rho'`, `(ln sigma)' = (ln rho)' - (3 alpha / 2) rho^2`,
/// `(ln sigma)'' = (ln rho)'' - 3 alpha rho rho'`.
#[derive(Debug, Clone)]
pub struct FamilyProfile {
    params: FamilyParams,
    samples: Vec<RhoSample>,
}

impl FamilyProfile {
    pub fn new(fp: &FamilyParams, traj: &RhoTrajectory) -> Result<Self, EinsteinError> {
        if traj.samples.len() < 2 {
            return Err(EinsteinError::TooShort("need at least two samples"));
        }
        let sign = traj.samples[0].rho_prime.signum();
        for s in &traj.samples {
            if s.rho_prime == 0.0 {
                return Err(EinsteinError::Singular("rho' vanishes on the trajectory"));
            }
            if s.rho_prime.signum() != sign {
                return Err(EinsteinError::Singular("rho' changes sign on the trajectory"));
            }
        }
        Ok(FamilyProfile { params: *fp, samples: traj.samples.clone() })
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn rho(&self, t: f64) -> Result<f64, FieldError> {
        self.check_domain(t)?;
        let s = &self.samples;
        let k = s.partition_point(|x| x.t <= t).clamp(1, s.len() - 1);
        let (a, b) = (&s[k - 1], &s[k]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        Ok(h00 * a.rho + h10 * h * a.rho_prime + h01 * b.rho + h11 * h * b.rho_prime)
    }

    /// `[rho, rho', rho'']` at `t`.
    pub fn rho_derivatives(&self, t: f64) -> Result<[f64; 3], FieldError> {
        let r = self.rho(t)?;
        let d = rho_rhs(&self.params, r);
        Ok([r, d, 3.0 * self.params.alpha * r * r * d])
    }

    /// The deformation pair `(sigma(x1), rho(x1))`.
    pub fn pair(self) -> DeformationPair {
        profile_pair(Arc::new(self))
    }
}

impl Profile for FamilyProfile {
    fn domain(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    fn sigma_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        let [r, d, _] = self.rho_derivatives(t)?;
        let [_, l1, l2] = self.rho_log_jet(t)?;
        if d == 0.0 {
            return Err(FieldError::Domain("rho' = 0: sigma is undefined"));
        }
        let alpha = self.params.alpha;
        let sigma = positive(self.params.b * r / sqrt(abs(d)), t)?;
        Ok([sigma, l1 - 1.5 * alpha * r * r, l2 - 3.0 * alpha * r * d])
    }

    fn rho_log_jet(&self, t: f64) -> Result<[f64; 3], FieldError> {
        let [r, d, dd] = self.rho_derivatives(t)?;
        positive(r, t)?;
        let l1 = d / r;
        Ok([r, l1, dd / r - l1 * l1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileRole {
    Sigma,
    Rho,
}

/// One side of a profile as a [`ScalarField`] depending on `x1` only.
#[derive(Clone)]
pub struct ProfileField {
    profile: Arc<dyn Profile>,
    role: ProfileRole,
}

impl fmt::Debug for ProfileField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProfileField").field("role", &self.role).finish_non_exhaustive()
    }
}

impl ProfileField {
    pub fn new(profile: Arc<dyn Profile>, role: ProfileRole) -> Self {
        ProfileField { profile, role }
    }
}

impl ScalarField for ProfileField {
    fn jet(&self, p: &Point) -> Result<Jet2, FieldError> {
        let t = p.t();
        let [v, l1, l2] = match self.role {
            ProfileRole::Sigma => self.profile.sigma_log_jet(t)?,
            ProfileRole::Rho => self.profile.rho_log_jet(t)?,
        };
        let mut j = Jet2::constant(v);
        j.grad[0] = v * l1;
        j.hess[0][0] = v * (l2 + l1 * l1);
        Ok(j)
    }
}

pub fn profile_pair(profile: Arc<dyn Profile>) -> DeformationPair {
    DeformationPair::new(
        Arc::new(ProfileField::new(profile.clone(), ProfileRole::Sigma)),
        Arc::new(ProfileField::new(profile, ProfileRole::Rho)),
    )
}

/// `g = (dt^2 + dx2^2)/sigma(t)^2 + (dx3^2 + dx4^2)/rho(t)^2` on the trajectory's range.
pub fn family_metric(fp: &FamilyParams, traj: &RhoTrajectory) -> Result<BiconformalMetric, EinsteinError> {
    Ok(metric_of(&FamilyProfile::new(fp, traj)?.pair()))
}

/// Residuals `(expression) - A` of the three reduced equations at `t`:
///
/// 1. `sigma^2 {(ln sigma)'' + 2 (ln sigma)'(ln rho)' - 2 (ln rho)'^2 + 2 (ln rho)''}`
/// 2. `sigma^2 {(ln sigma)'' - 2 (ln sigma)'(ln rho)'}`
/// 3. `sigma^2 {(ln rho)'' - 2 (ln rho)'^2}`
pub fn single_param_residuals(
    profile: &dyn Profile,
    einstein_constant: f64,
    t: f64,
) -> Result<[f64; 3], FieldError> {
    let [s, s1, s2] = profile.sigma_log_jet(t)?;
    let [_, r1, r2] = profile.rho_log_jet(t)?;
    let a = einstein_constant;
    let q = s * s;
    Ok([
        q * (s2 + 2.0 * s1 * r1 - 2.0 * r1 * r1 + 2.0 * r2) - a,
        q * (s2 - 2.0 * s1 * r1) - a,
        q * (r2 - 2.0 * r1 * r1) - a,
    ])
}

/// Largest sum of absolute term magnitudes over the three reduced equations,
/// the natural scale for the rounding error of [`single_param_residuals`].
pub fn single_param_scale(profile: &dyn Profile, einstein_constant: f64, t: f64) -> Result<f64, FieldError> {
    let [s, s1, s2] = profile.sigma_log_jet(t)?;
    let [_, r1, r2] = profile.rho_log_jet(t)?;
    let q = s * s;
    let (a, b, c, d) = (abs(s2), abs(2.0 * s1 * r1), 2.0 * r1 * r1, abs(r2));
    let terms = (a + b + c + 2.0 * d).max(a + b).max(d + c);
    Ok(q * terms + abs(einstein_constant))
}

/// The equivalent pair: (a) `sigma^2 (ln sigma)'' - 2 sigma^2 (ln sigma)'(ln rho)' - A`
/// and (b) `-(ln rho)'^2 + (ln rho)'' + 2 (ln sigma)'(ln rho)'`.
pub fn special_residuals(
    profile: &dyn Profile,
    einstein_constant: f64,
    t: f64,
) -> Result<[f64; 2], FieldError> {
    let [s, s1, s2] = profile.sigma_log_jet(t)?;
    let [_, r1, r2] = profile.rho_log_jet(t)?;
    let q = s * s;
    Ok([
        q * s2 - 2.0 * q * s1 * r1 - einstein_constant,
        -r1 * r1 + r2 + 2.0 * s1 * r1,
    ])
}

/// `ln sigma` and `ln rho` at `t`, mostly for output.
pub fn log_values(profile: &dyn Profile, t: f64) -> Result<[f64; 2], FieldError> {
    Ok([ln(profile.sigma_log_jet(t)?[0]), ln(profile.rho_log_jet(t)?[0])])
}
