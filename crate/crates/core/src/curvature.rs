//! Brute-force Levi-Civita curvature of a metric given in coordinates.
//!
//! This engine knows nothing about biconformal deformations. It takes any
//! [`MetricField`] on a coordinate patch of `R^4` and computes
//!
//! ```text
//! Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
//! Ric_bc     = d_a Gamma^a_bc - d_c Gamma^a_ba + Gamma^a_ad Gamma^d_bc - Gamma^a_cd Gamma^d_ba
//! ```
//!
//! with centered differences: metric partials use [`FdSteps::metric`] unless
//! the field supplies them analytically, and the Christoffel symbols are
//! differentiated with [`FdSteps::christoffel`]. Every closed-form curvature
//! formula in the crate is tested against this module.

use crate::fields::{FieldError, Point, ScalarField, DIM};
use crate::linalg;
use crate::math::abs;

pub use crate::linalg::{max_abs, max_abs_diff, Mat4};

/// `gamma[a][b][c]` is `Gamma^a_{bc}`.
pub type Christoffel = [[[f64; DIM]; DIM]; DIM];

/// Symmetry tolerance on metric components, relative to their magnitude.
pub const METRIC_SYMMETRY_TOL: f64 = 1e-12;
/// Ricci asymmetry above which the metric or the step is rejected.
pub const MAX_RICCI_ASYMMETRY: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurvatureError {
    #[error("metric is singular at {0}")]
    Singular(Point),
    #[error("metric is not positive definite at {0}")]
    NotPositiveDefinite(Point),
    #[error("metric is not symmetric at {point} (deviation {deviation:e})")]
    NotSymmetric { point: Point, deviation: f64 },
    #[error("Ricci asymmetry {0:e} exceeds the admissible bound; metric invalid or step too large")]
    ExcessiveAsymmetry(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A Riemannian metric on a coordinate patch of `R^4`.
pub trait MetricField: Send + Sync {
    /// Coordinate components `g_ab(p)`.
    fn metric(&self, p: &Point) -> Result<Mat4, CurvatureError>;

    /// Optional analytic partials: `result[c][a][b] = d_c g_ab(p)`.
    fn metric_partials(&self, _p: &Point) -> Option<Result<[Mat4; DIM], CurvatureError>> {
        None
    }
}

impl<M: MetricField + ?Sized> MetricField for &M {
    fn metric(&self, p: &Point) -> Result<Mat4, CurvatureError> {
        (**self).metric(p)
    }
    fn metric_partials(&self, p: &Point) -> Option<Result<[Mat4; DIM], CurvatureError>> {
        (**self).metric_partials(p)
    }
}

/// The flat metric `g = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl MetricField for Euclidean {
    fn metric(&self, _p: &Point) -> Result<Mat4, CurvatureError> {
        Ok(linalg::diag([1.0; DIM]))
    }
}

/// Metric given by a closure; derivatives always by finite differences.
pub struct FnMetric<F>(pub F);

impl<F> core::fmt::Debug for FnMetric<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("FnMetric(..)")
    }
}

impl<F> MetricField for FnMetric<F>
where
    F: Fn(&Point) -> Result<Mat4, CurvatureError> + Send + Sync,
{
    fn metric(&self, p: &Point) -> Result<Mat4, CurvatureError> {
        (self.0)(p)
    }
}

/// Finite-difference steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    /// Step for metric partials.
    pub metric: f64,
    /// Step for Christoffel-symbol partials.
    pub christoffel: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            metric: 1e-4,
            christoffel: 1e-3,
        }
    }
}

/// Ricci tensor from the oracle with the asymmetry it removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciFd {
    /// Symmetrized coordinate components.
    pub ricci: Mat4,
    /// `max |R_bc - R_cb|` before symmetrization.
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub point: Point,
    pub christoffel: Christoffel,
    pub ricci: Mat4,
    pub asymmetry: f64,
    pub scalar: f64,
    pub steps: FdSteps,
}

/// The finite-difference curvature engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureOracle {
    pub steps: FdSteps,
    /// Use [`MetricField::metric_partials`] when the field provides them.
    pub use_analytic_partials: bool,
}

impl Default for CurvatureOracle {
    fn default() -> Self {
        CurvatureOracle {
            steps: FdSteps::default(),
            use_analytic_partials: true,
        }
    }
}

impl CurvatureOracle {
    pub fn new(steps: FdSteps) -> Self {
        CurvatureOracle {
            steps,
            use_analytic_partials: true,
        }
    }

    /// Oracle that ignores analytic partials and differentiates the metric itself.
    pub fn pure_fd(steps: FdSteps) -> Self {
        CurvatureOracle {
            steps,
            use_analytic_partials: false,
        }
    }

    fn checked_metric<M: MetricField + ?Sized>(g: &M, p: &Point) -> Result<Mat4, CurvatureError> {
        let m = g.metric(p)?;
        let scale = linalg::max_abs(&m).max(f64::MIN_POSITIVE);
        let deviation = linalg::asymmetry(&m);
        if deviation > METRIC_SYMMETRY_TOL * scale {
            return Err(CurvatureError::NotSymmetric {
                point: *p,
                deviation,
            });
        }
        if !linalg::is_positive_definite(&m) {
            return Err(CurvatureError::NotPositiveDefinite(*p));
        }
        Ok(m)
    }

    fn inverse_at<M: MetricField + ?Sized>(g: &M, p: &Point) -> Result<(Mat4, Mat4), CurvatureError> {
        let m = Self::checked_metric(g, p)?;
        let inv = linalg::inverse(&m).ok_or(CurvatureError::Singular(*p))?;
        Ok((m, inv))
    }

    fn metric_partials<M: MetricField + ?Sized>(
        &self,
        g: &M,
        p: &Point,
    ) -> Result<[Mat4; DIM], CurvatureError> {
        if self.use_analytic_partials {
            if let Some(d) = g.metric_partials(p) {
                return d;
            }
        }
        let h = self.steps.metric;
        let mut d = [linalg::zeros(); DIM];
        for (c, dc) in d.iter_mut().enumerate() {
            let plus = Self::checked_metric(g, &p.shifted(c, h))?;
            let minus = Self::checked_metric(g, &p.shifted(c, -h))?;
            for a in 0..DIM {
                for b in 0..DIM {
                    dc[a][b] = (plus[a][b] - minus[a][b]) / (2.0 * h);
                }
            }
        }
        Ok(d)
    }

    /// Christoffel symbols of the second kind at `p`.
    pub fn christoffel<M: MetricField + ?Sized>(
        &self,
        g: &M,
        p: &Point,
    ) -> Result<Christoffel, CurvatureError> {
        let (_, inv) = Self::inverse_at(g, p)?;
        let d = self.metric_partials(g, p)?;
        // first kind: lower[d][b][c] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
        let mut lower = [[[0.0; DIM]; DIM]; DIM];
        for (dd, row) in lower.iter_mut().enumerate() {
            for b in 0..DIM {
                for c in b..DIM {
                    let v = 0.5 * (d[b][dd][c] + d[c][dd][b] - d[dd][b][c]);
                    row[b][c] = v;
                    row[c][b] = v;
                }
            }
        }
        let mut gamma = [[[0.0; DIM]; DIM]; DIM];
        for (a, ga) in gamma.iter_mut().enumerate() {
            for b in 0..DIM {
                for c in b..DIM {
                    let v: f64 = (0..DIM).map(|dd| inv[a][dd] * lower[dd][b][c]).sum();
                    ga[b][c] = v;
                    ga[c][b] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// `dgamma[e]` is the centered difference of Gamma along axis `e`.
    fn christoffel_partials<M: MetricField + ?Sized>(
        &self,
        g: &M,
        p: &Point,
    ) -> Result<[Christoffel; DIM], CurvatureError> {
        let h = self.steps.christoffel;
        let mut out = [[[[0.0; DIM]; DIM]; DIM]; DIM];
        for (e, de) in out.iter_mut().enumerate() {
            let plus = self.christoffel(g, &p.shifted(e, h))?;
            let minus = self.christoffel(g, &p.shifted(e, -h))?;
            for a in 0..DIM {
                for b in 0..DIM {
                    for c in 0..DIM {
                        de[a][b][c] = (plus[a][b][c] - minus[a][b][c]) / (2.0 * h);
                    }
                }
            }
        }
        Ok(out)
    }

    fn ricci_with_gamma<M: MetricField + ?Sized>(
        &self,
        g: &M,
        p: &Point,
    ) -> Result<(Christoffel, RicciFd), CurvatureError> {
        let gamma = self.christoffel(g, p)?;
        let dg = self.christoffel_partials(g, p)?;
        let mut ric = linalg::zeros();
        for b in 0..DIM {
            for c in 0..DIM {
                let mut s = 0.0;
                for a in 0..DIM {
                    s += dg[a][a][b][c] - dg[c][a][b][a];
                    for d in 0..DIM {
                        s += gamma[a][a][d] * gamma[d][b][c] - gamma[a][c][d] * gamma[d][b][a];
                    }
                }
                ric[b][c] = s;
            }
        }
        let asymmetry = linalg::asymmetry(&ric);
        if asymmetry > MAX_RICCI_ASYMMETRY {
            return Err(CurvatureError::ExcessiveAsymmetry(asymmetry));
        }
        Ok((
            gamma,
            RicciFd {
                ricci: linalg::symmetrize(&ric),
                asymmetry,
            },
        ))
    }

    /// Coordinate Ricci tensor at `p`.
    pub fn ricci<M: MetricField + ?Sized>(&self, g: &M, p: &Point) -> Result<RicciFd, CurvatureError> {
        self.ricci_with_gamma(g, p).map(|(_, r)| r)
    }

    /// Scalar curvature `g^ab Ric_ab`.
    pub fn scalar<M: MetricField + ?Sized>(&self, g: &M, p: &Point) -> Result<f64, CurvatureError> {
        let ric = self.ricci(g, p)?.ricci;
        let (_, inv) = Self::inverse_at(g, p)?;
        Ok(trace_with(&inv, &ric))
    }

    /// Christoffel symbols, Ricci and scalar curvature in one pass.
    pub fn report<M: MetricField + ?Sized>(
        &self,
        g: &M,
        p: &Point,
    ) -> Result<CurvatureReport, CurvatureError> {
        let (christoffel, r) = self.ricci_with_gamma(g, p)?;
        let (_, inv) = Self::inverse_at(g, p)?;
        Ok(CurvatureReport {
            point: *p,
            christoffel,
            ricci: r.ricci,
            asymmetry: r.asymmetry,
            scalar: trace_with(&inv, &r.ricci),
            steps: self.steps,
        })
    }

    /// Laplace-Beltrami operator `g^ab (d_a d_b f - Gamma^c_ab d_c f)`.
    pub fn laplace_beltrami<M, F>(&self, g: &M, f: &F, p: &Point) -> Result<f64, CurvatureError>
    where
        M: MetricField + ?Sized,
        F: ScalarField + ?Sized,
    {
        let (_, inv) = Self::inverse_at(g, p)?;
        let gamma = self.christoffel(g, p)?;
        let jet = f.jet(p)?;
        let mut s = 0.0;
        for a in 0..DIM {
            for b in 0..DIM {
                let conn: f64 = (0..DIM).map(|c| gamma[c][a][b] * jet.grad[c]).sum();
                s += inv[a][b] * (jet.hess[a][b] - conn);
            }
        }
        Ok(s)
    }

    /// `max |Ric(p) - A g(p)|` over all coordinate components.
    pub fn einstein_residual<M: MetricField + ?Sized>(
        &self,
        g: &M,
        einstein_constant: f64,
        p: &Point,
    ) -> Result<f64, CurvatureError> {
        let ric = self.ricci(g, p)?.ricci;
        let m = Self::checked_metric(g, p)?;
        let mut r: f64 = 0.0;
        for a in 0..DIM {
            for b in 0..DIM {
                r = r.max(abs(ric[a][b] - einstein_constant * m[a][b]));
            }
        }
        Ok(r)
    }

    /// Full Riemann tensor `R^a_{bcd}`, index order `[a][b][c][d]`.
    #[cfg(feature = "riemann")]
    pub fn riemann<M: MetricField + ?Sized>(
        &self,
        g: &M,
        p: &Point,
    ) -> Result<[[[[f64; DIM]; DIM]; DIM]; DIM], CurvatureError> {
        let gamma = self.christoffel(g, p)?;
        let dg = self.christoffel_partials(g, p)?;
        let mut r = [[[[0.0; DIM]; DIM]; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    for d in 0..DIM {
                        let mut s = dg[c][a][d][b] - dg[d][a][c][b];
                        for e in 0..DIM {
                            s += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                        }
                        r[a][b][c][d] = s;
                    }
                }
            }
        }
        Ok(r)
    }
}

fn trace_with(inv: &Mat4, m: &Mat4) -> f64 {
    let mut s = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            s += inv[a][b] * m[a][b];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ExprField;

    fn conformal(
        factor: impl Fn(&Point) -> f64 + Send + Sync,
    ) -> FnMetric<impl Fn(&Point) -> Result<Mat4, CurvatureError> + Send + Sync> {
        FnMetric(move |p: &Point| Ok(linalg::diag([factor(p); 4])))
    }

    fn product_of_spheres(p: &Point) -> Result<Mat4, CurvatureError> {
        let [a, b, c, d] = p.0;
        let s = (1.0 + a * a + b * b) / 2.0;
        let r = (1.0 + c * c + d * d) / 2.0;
        Ok(linalg::diag([1.0 / (s * s), 1.0 / (s * s), 1.0 / (r * r), 1.0 / (r * r)]))
    }

    fn product_of_hyperbolic_planes(p: &Point) -> Result<Mat4, CurvatureError> {
        let [a, b, c, d] = p.0;
        let s = (1.0 - a * a - b * b) / 2.0;
        let r = (1.0 - c * c - d * d) / 2.0;
        Ok(linalg::diag([1.0 / (s * s), 1.0 / (s * s), 1.0 / (r * r), 1.0 / (r * r)]))
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let o = CurvatureOracle::default();
        let p = Point::new([0.3, -0.2, 0.1, 0.9]);
        let gamma = o.christoffel(&Euclidean, &p).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(linalg::max_abs(&o.ricci(&Euclidean, &p).unwrap().ricci), 0.0);
        assert_eq!(o.scalar(&Euclidean, &p).unwrap(), 0.0);
        assert_eq!(o.einstein_residual(&Euclidean, 0.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn spheres_christoffel_vanishes_at_origin() {
        let o = CurvatureOracle::default();
        let gamma = o.christoffel(&FnMetric(product_of_spheres), &Point::ORIGIN).unwrap();
        for v in gamma.iter().flatten().flatten() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn half_space_christoffel() {
        // g = delta / x1^2 at x1 = 1: Gamma^1_11 = -1/x1
        let o = CurvatureOracle::default();
        let g = conformal(|p| 1.0 / (p.0[0] * p.0[0]));
        let gamma = o.christoffel(&g, &Point::on_t_axis(1.0)).unwrap();
        assert!((gamma[0][0][0] + 1.0).abs() < 1e-6);
        assert!((gamma[1][0][1] + 1.0).abs() < 1e-6);
        assert!((gamma[0][1][1] - 1.0).abs() < 1e-6);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    assert!((gamma[a][b][c] - gamma[a][c][b]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn product_of_spheres_is_einstein_with_constant_one() {
        let o = CurvatureOracle::default();
        let g = FnMetric(product_of_spheres);
        let ric = o.ricci(&g, &Point::ORIGIN).unwrap();
        assert!(linalg::max_abs_diff(&ric.ricci, &linalg::diag([4.0; 4])) < 1e-5);
        assert!(ric.asymmetry < 1e-6);
        let p = Point::new([0.25, -0.1, 0.3, 0.05]);
        assert!((o.scalar(&g, &p).unwrap() - 4.0).abs() < 1e-4);
        assert!(o.einstein_residual(&g, 1.0, &p).unwrap() < 1e-4);
        let r0 = o.einstein_residual(&g, 0.0, &Point::ORIGIN).unwrap();
        assert!((r0 - 4.0).abs() < 1e-5);
    }

    #[test]
    fn product_of_hyperbolic_planes_has_constant_minus_one() {
        let o = CurvatureOracle::default();
        let g = FnMetric(product_of_hyperbolic_planes);
        let ric = o.ricci(&g, &Point::ORIGIN).unwrap().ricci;
        assert!(linalg::max_abs_diff(&ric, &linalg::diag([-4.0; 4])) < 1e-5);
        let p = Point::new([0.2, 0.3, -0.25, 0.1]);
        assert!((o.scalar(&g, &p).unwrap() + 4.0).abs() < 1e-4);
    }

    #[test]
    fn laplace_beltrami_examples() {
        let o = CurvatureOracle::default();
        let x1sq = ExprField::parse("x1^2").unwrap();
        let v = o.laplace_beltrami(&Euclidean, &x1sq, &Point::new([0.4, 1.0, -2.0, 0.0])).unwrap();
        assert!((v - 2.0).abs() < 1e-12);

        let scaled = FnMetric(|_: &Point| Ok(linalg::diag([1.0, 1.0, 0.25, 0.25])));
        let x3sq = ExprField::parse("x3^2").unwrap();
        let v = o.laplace_beltrami(&scaled, &x3sq, &Point::new([0.1, 0.2, 0.3, 0.4])).unwrap();
        assert!((v - 8.0).abs() < 1e-12);

        let x1 = ExprField::parse("x1").unwrap();
        let v = o
            .laplace_beltrami(&FnMetric(product_of_spheres), &x1, &Point::ORIGIN)
            .unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn degenerate_metrics_rejected() {
        let o = CurvatureOracle::default();
        let indefinite = FnMetric(|_: &Point| Ok(linalg::diag([1.0, 1.0, -1.0, 1.0])));
        assert!(matches!(
            o.christoffel(&indefinite, &Point::ORIGIN),
            Err(CurvatureError::NotPositiveDefinite(_))
        ));
        let asym = FnMetric(|_: &Point| {
            let mut m = linalg::diag([1.0; 4]);
            m[0][1] = 0.1;
            Ok(m)
        });
        assert!(matches!(
            o.christoffel(&asym, &Point::ORIGIN),
            Err(CurvatureError::NotSymmetric { .. })
        ));
        let collapsing = conformal(|p| p.0[0]);
        assert!(o.ricci(&collapsing, &Point::on_t_axis(5e-4)).is_err());
    }

    #[test]
    fn second_order_convergence_on_perturbed_flat_metric() {
        // g = (1 + eps * sin x1 cos x3) I: truncation error of the oracle should
        // fall by about 4x when both steps are halved.
        let g = conformal(|p| 1.0 + 0.3 * libm::sin(2.0 * p.0[0]) * libm::cos(1.5 * p.0[2]));
        let p = Point::new([0.3, 0.0, -0.4, 0.0]);
        let fine = CurvatureOracle::pure_fd(FdSteps {
            metric: 1e-4,
            christoffel: 1e-4,
        })
        .ricci(&g, &p)
        .unwrap()
        .ricci;
        let err = |h: f64| {
            let r = CurvatureOracle::pure_fd(FdSteps {
                metric: h,
                christoffel: h,
            })
            .ricci(&g, &p)
            .unwrap()
            .ricci;
            linalg::max_abs_diff(&r, &fine)
        };
        let (e1, e2) = (err(0.02), err(0.01));
        let ratio = e1 / e2;
        std::println!("oracle convergence: err(0.02)={e1:e} err(0.01)={e2:e} ratio={ratio:.3}");
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
