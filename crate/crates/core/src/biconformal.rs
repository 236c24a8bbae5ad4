//! Biconformal deformation of Euclidean `R^4` over the projection to `(x1, x2)`.
//!
//! The projection has dilation 1, totally geodesic fibres and integrable
//! horizontal distribution. Deforming by `sigma` on the horizontal and `rho` on
//! the vertical distribution gives
//!
//! ```text
//! g = (dx1^2 + dx2^2) / sigma^2 + (dx3^2 + dx4^2) / rho^2
//! ```
//!
//! with adapted orthonormal frame `e_i = sigma d_i` (i = 1, 2) and
//! `e_r = rho d_r` (r = 3, 4). All closed forms here return frame components
//! `Ric(e_a, e_b)`; [`frame_to_coords`] is the only place that converts to
//! coordinate components.

use alloc::sync::Arc;

use crate::curvature::{CurvatureError, Mat4, MetricField};
use crate::fields::{ExprField, FieldError, ParseError, Point, ScalarField, DIM};
use crate::linalg;

/// The pair `(sigma, rho)` defining the deformed metric.
#[derive(Debug, Clone)]
pub struct DeformationPair {
    sigma: Arc<dyn ScalarField>,
    rho: Arc<dyn ScalarField>,
}

/// Values and logarithmic derivatives of `sigma` and `rho` at a point.
///
/// `d_ln_sigma[a] = d ln sigma / dx_a`, `dd_ln_sigma[a][b] = d^2 ln sigma / dx_a dx_b`,
/// likewise for `rho`. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivatives {
    pub sigma: f64,
    pub rho: f64,
    pub d_ln_sigma: [f64; DIM],
    pub dd_ln_sigma: [[f64; DIM]; DIM],
    pub d_ln_rho: [f64; DIM],
    pub dd_ln_rho: [[f64; DIM]; DIM],
}

fn log_parts(f: &dyn ScalarField, p: &Point) -> Result<(f64, [f64; DIM], [[f64; DIM]; DIM]), FieldError> {
    let jet = f.jet(p)?;
    let v = jet.value;
    if !(v > 0.0) {
        return Err(FieldError::NonPositive { value: v, point: *p });
    }
    let d = jet.grad.map(|g| g / v);
    let mut dd = [[0.0; DIM]; DIM];
    for a in 0..DIM {
        for b in a..DIM {
            let h = jet.hess[a][b] / v - d[a] * d[b];
            dd[a][b] = h;
            dd[b][a] = h;
        }
    }
    Ok((v, d, dd))
}

impl DeformationPair {
    pub fn new(sigma: Arc<dyn ScalarField>, rho: Arc<dyn ScalarField>) -> Self {
        DeformationPair { sigma, rho }
    }

    /// Builds the pair from two expressions in `x1..x4`.
    pub fn from_exprs(sigma: &str, rho: &str) -> Result<Self, ParseError> {
        Ok(DeformationPair::new(
            Arc::new(ExprField::parse(sigma)?),
            Arc::new(ExprField::parse(rho)?),
        ))
    }

    pub fn sigma(&self) -> &Arc<dyn ScalarField> {
        &self.sigma
    }

    pub fn rho(&self) -> &Arc<dyn ScalarField> {
        &self.rho
    }

    /// Logarithmic derivatives at `p`; fails unless both fields are positive there.
    pub fn log_derivatives(&self, p: &Point) -> Result<LogDerivatives, FieldError> {
        let (sigma, d_ln_sigma, dd_ln_sigma) = log_parts(&*self.sigma, p)?;
        let (rho, d_ln_rho, dd_ln_rho) = log_parts(&*self.rho, p)?;
        Ok(LogDerivatives {
            sigma,
            rho,
            d_ln_sigma,
            dd_ln_sigma,
            d_ln_rho,
            dd_ln_rho,
        })
    }
}

/// Ricci block of a frame index pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// Horizontal x horizontal.
    HH,
    /// Horizontal x vertical (either order).
    HV,
    /// Vertical x vertical.
    VV,
}

impl Block {
    pub fn of(a: usize, b: usize) -> Block {
        match (a < 2, b < 2) {
            (true, true) => Block::HH,
            (false, false) => Block::VV,
            _ => Block::HV,
        }
    }
}

/// Symmetric Ricci components `Ric(e_a, e_b)` in the adapted orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRicci(Mat4);

impl FrameRicci {
    /// Assembles the full tensor from its three blocks; `hv[j][s]` is
    /// `Ric(e_{j+1}, e_{s+3})`.
    pub fn from_blocks(hh: [[f64; 2]; 2], hv: [[f64; 2]; 2], vv: [[f64; 2]; 2]) -> Self {
        let mut m = linalg::zeros();
        for j in 0..2 {
            for k in 0..2 {
                m[j][k] = hh[j][k];
                m[2 + j][2 + k] = vv[j][k];
                m[j][2 + k] = hv[j][k];
                m[2 + k][j] = hv[j][k];
            }
        }
        // blocks are expected symmetric; mirror the upper triangle regardless
        m[1][0] = m[0][1];
        m[3][2] = m[2][3];
        FrameRicci(m)
    }

    pub fn components(&self) -> &Mat4 {
        &self.0
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    pub fn hh(&self) -> [[f64; 2]; 2] {
        [[self.0[0][0], self.0[0][1]], [self.0[1][0], self.0[1][1]]]
    }

    pub fn hv(&self) -> [[f64; 2]; 2] {
        [[self.0[0][2], self.0[0][3]], [self.0[1][2], self.0[1][3]]]
    }

    pub fn vv(&self) -> [[f64; 2]; 2] {
        [[self.0[2][2], self.0[2][3]], [self.0[3][2], self.0[3][3]]]
    }
}

/// The deformed metric as a [`MetricField`], with analytic first partials.
#[derive(Debug, Clone)]
pub struct BiconformalMetric {
    pair: DeformationPair,
}

impl BiconformalMetric {
    pub fn pair(&self) -> &DeformationPair {
        &self.pair
    }
}

/// `g = diag(1/sigma^2, 1/sigma^2, 1/rho^2, 1/rho^2)`.
pub fn metric_of(d: &DeformationPair) -> BiconformalMetric {
    BiconformalMetric { pair: d.clone() }
}

impl MetricField for BiconformalMetric {
    fn metric(&self, p: &Point) -> Result<Mat4, CurvatureError> {
        let s = positive(&*self.pair.sigma, p)?;
        let r = positive(&*self.pair.rho, p)?;
        let (hs, vr) = (1.0 / (s * s), 1.0 / (r * r));
        Ok(linalg::diag([hs, hs, vr, vr]))
    }

    fn metric_partials(&self, p: &Point) -> Option<Result<[Mat4; DIM], CurvatureError>> {
        let run = || -> Result<[Mat4; DIM], CurvatureError> {
            let js = self.pair.sigma.jet(p)?;
            let jr = self.pair.rho.jet(p)?;
            positive_value(js.value, p)?;
            positive_value(jr.value, p)?;
            let mut out = [linalg::zeros(); DIM];
            for (c, dc) in out.iter_mut().enumerate() {
                // d(f^-2) = -2 f' / f^3
                let ds = -2.0 * js.grad[c] / (js.value * js.value * js.value);
                let dr = -2.0 * jr.grad[c] / (jr.value * jr.value * jr.value);
                *dc = linalg::diag([ds, ds, dr, dr]);
            }
            Ok(out)
        };
        Some(run())
    }
}

fn positive_value(v: f64, p: &Point) -> Result<f64, FieldError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(FieldError::NonPositive { value: v, point: *p })
    }
}

fn positive(f: &dyn ScalarField, p: &Point) -> Result<f64, FieldError> {
    positive_value(f.eval(p)?, p)
}

/// Horizontal block `Ric(e_i, e_j)`, i, j in {1, 2}.
pub fn ricci_horizontal(d: &DeformationPair, p: &Point) -> Result<[[f64; 2]; 2], FieldError> {
    Ok(horizontal_block(&d.log_derivatives(p)?))
}

fn horizontal_block(l: &LogDerivatives) -> [[f64; 2]; 2] {
    let (s, r) = (l.sigma, l.rho);
    let (ls, lss, lr, lrr) = (&l.d_ln_sigma, &l.dd_ln_sigma, &l.d_ln_rho, &l.dd_ln_rho);
    let ratio = (r * r) / (s * s);
    let common = (lss[0][0] + lss[1][1]) + ratio * (lss[2][2] + lss[3][3])
        - 2.0 * ratio * (ls[2] * ls[2] + ls[3] * ls[3]);
    let diag = |j: usize| {
        let jp = 1 - j;
        s * s
            * (common - 2.0 * lr[j] * lr[j] + 2.0 * lrr[j][j] + 2.0 * ls[j] * lr[j]
                - 2.0 * ls[jp] * lr[jp])
    };
    let off = 2.0 * s * s * (lrr[0][1] - lr[0] * lr[1] + ls[0] * lr[1] + lr[0] * ls[1]);
    [[diag(0), off], [off, diag(1)]]
}

/// Mixed block: `result[j][s] = Ric(e_{j+1}, e_{s+3})`.
pub fn ricci_mixed(d: &DeformationPair, p: &Point) -> Result<[[f64; 2]; 2], FieldError> {
    Ok(mixed_block(&d.log_derivatives(p)?))
}

fn mixed_block(l: &LogDerivatives) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for (j, row) in m.iter_mut().enumerate() {
        for (k, out) in row.iter_mut().enumerate() {
            let s = 2 + k;
            *out = l.sigma
                * l.rho
                * (l.dd_ln_sigma[j][s] + l.dd_ln_rho[j][s] + 2.0 * l.d_ln_sigma[s] * l.d_ln_rho[j]);
        }
    }
    m
}

/// Vertical block `Ric(e_r, e_s)`, r, s in {3, 4}.
pub fn ricci_vertical(d: &DeformationPair, p: &Point) -> Result<[[f64; 2]; 2], FieldError> {
    Ok(vertical_block(&d.log_derivatives(p)?))
}

fn vertical_block(l: &LogDerivatives) -> [[f64; 2]; 2] {
    let (s, r) = (l.sigma, l.rho);
    let (ls, lss, lr, lrr) = (&l.d_ln_sigma, &l.dd_ln_sigma, &l.d_ln_rho, &l.dd_ln_rho);
    let ratio = (s * s) / (r * r);
    let trace_part = ratio * (lrr[0][0] + lrr[1][1]) + lrr[2][2] + lrr[3][3]
        - 2.0 * ratio * (lr[0] * lr[0] + lr[1] * lr[1])
        - 2.0 * (ls[2] * lr[2] + ls[3] * lr[3]);
    let entry = |a: usize, b: usize| {
        let base = 2.0 * lss[a][b] + 2.0 * lr[a] * ls[b] + 2.0 * ls[a] * lr[b] - 2.0 * ls[a] * ls[b];
        let delta = if a == b { trace_part } else { 0.0 };
        r * r * (base + delta)
    };
    let off = entry(2, 3);
    [[entry(2, 2), off], [off, entry(3, 3)]]
}

/// All three blocks at once.
pub fn ricci_frame(d: &DeformationPair, p: &Point) -> Result<FrameRicci, FieldError> {
    let l = d.log_derivatives(p)?;
    Ok(FrameRicci::from_blocks(
        horizontal_block(&l),
        mixed_block(&l),
        vertical_block(&l),
    ))
}

/// Coordinate components from frame components: `d_i = e_i / sigma`, `d_r = e_r / rho`.
pub fn frame_to_coords(fr: &FrameRicci, d: &DeformationPair, p: &Point) -> Result<Mat4, FieldError> {
    let s = positive(&*d.sigma, p)?;
    let r = positive(&*d.rho, p)?;
    Ok(frame_to_coords_with(fr, s, r))
}

pub(crate) fn frame_to_coords_with(fr: &FrameRicci, sigma: f64, rho: f64) -> Mat4 {
    let scale = [sigma, sigma, rho, rho];
    let mut m = linalg::zeros();
    for a in 0..DIM {
        for b in 0..DIM {
            m[a][b] = fr.0[a][b] / (scale[a] * scale[b]);
        }
    }
    m
}

/// Coordinate Ricci tensor of the deformed metric from the closed forms.
pub fn ricci_coords(d: &DeformationPair, p: &Point) -> Result<Mat4, FieldError> {
    let l = d.log_derivatives(p)?;
    let fr = FrameRicci::from_blocks(horizontal_block(&l), mixed_block(&l), vertical_block(&l));
    Ok(frame_to_coords_with(&fr, l.sigma, l.rho))
}

/// Coordinate Ricci tensor of the conformal metric `g0 / sigma^2` on flat `R^4`:
///
/// `Ric_ab = 2 (d_a d_b ln sigma + d_a ln sigma d_b ln sigma) + (Lap ln sigma - 2 |d ln sigma|^2) delta_ab`.
pub fn conformal_ricci_coords(sigma: &dyn ScalarField, p: &Point) -> Result<Mat4, FieldError> {
    let (_, d, dd) = log_parts(sigma, p)?;
    let lap: f64 = (0..DIM).map(|a| dd[a][a]).sum();
    let norm2: f64 = d.iter().map(|x| x * x).sum();
    let mut m = linalg::zeros();
    for a in 0..DIM {
        for b in 0..DIM {
            m[a][b] = 2.0 * (dd[a][b] + d[a] * d[b]);
        }
        m[a][a] += lap - 2.0 * norm2;
    }
    Ok(m)
}

/// Laplacian of the deformed metric:
///
/// `Lap_g f = sigma^2 Lap_0 f + (rho^2 - sigma^2) Lap_0^V f - 2 sigma^2 df(H grad ln rho) - 2 rho^2 df(V grad ln sigma)`.
pub fn deformed_laplacian(
    d: &DeformationPair,
    f: &dyn ScalarField,
    p: &Point,
) -> Result<f64, FieldError> {
    let l = d.log_derivatives(p)?;
    let jet = f.jet(p)?;
    let (s2, r2) = (l.sigma * l.sigma, l.rho * l.rho);
    let lap0: f64 = (0..DIM).map(|a| jet.hess[a][a]).sum();
    let lap_v = jet.hess[2][2] + jet.hess[3][3];
    let h_term = jet.grad[0] * l.d_ln_rho[0] + jet.grad[1] * l.d_ln_rho[1];
    let v_term = jet.grad[2] * l.d_ln_sigma[2] + jet.grad[3] * l.d_ln_sigma[3];
    Ok(s2 * lap0 + (r2 - s2) * lap_v - 2.0 * s2 * h_term - 2.0 * r2 * v_term)
}

/// Conformal case `sigma = rho` in dimension 4: `sigma^2 Lap_0 f - 2 sigma^2 df(grad ln sigma)`.
pub fn conformal_laplacian(
    sigma: &dyn ScalarField,
    f: &dyn ScalarField,
    p: &Point,
) -> Result<f64, FieldError> {
    let (s, d, _) = log_parts(sigma, p)?;
    let jet = f.jet(p)?;
    let lap0: f64 = (0..DIM).map(|a| jet.hess[a][a]).sum();
    let df: f64 = (0..DIM).map(|a| jet.grad[a] * d[a]).sum();
    Ok(s * s * (lap0 - 2.0 * df))
}

/// Dilation, mean curvature of the fibres and integrability form after deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformationLaws {
    /// `lambda = sigma`.
    pub dilation: f64,
    /// `mu = sigma^2 (d_1 ln rho, d_2 ln rho, 0, 0)`.
    pub mean_curvature: [f64; DIM],
    /// `zeta`; identically zero because the undeformed horizontal distribution is integrable.
    pub integrability: [f64; DIM],
}

pub fn transformation_laws(d: &DeformationPair, p: &Point) -> Result<TransformationLaws, FieldError> {
    let s = positive(&*d.sigma, p)?;
    let lr = d.rho.grad_ln(p)?;
    Ok(TransformationLaws {
        dilation: s,
        mean_curvature: [s * s * lr[0], s * s * lr[1], 0.0, 0.0],
        integrability: [0.0; DIM],
    })
}

/// Coordinate components of `[e_1, e_2]` for `e_1 = sigma d_1`, `e_2 = sigma d_2`,
/// from `[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k`.
pub fn horizontal_bracket(d: &DeformationPair, p: &Point) -> Result<[f64; DIM], FieldError> {
    let jet = d.sigma.jet(p)?;
    // component k of e_m is sigma * delta_{km}; its i-th partial is d_i sigma * delta_{km}
    let comp = |m: usize, k: usize| if k == m { jet.value } else { 0.0 };
    let dcomp = |m: usize, k: usize, i: usize| if k == m { jet.grad[i] } else { 0.0 };
    let mut out = [0.0; DIM];
    for (k, o) in out.iter_mut().enumerate() {
        *o = (0..DIM)
            .map(|i| comp(0, i) * dcomp(1, k, i) - comp(1, i) * dcomp(0, k, i))
            .sum();
    }
    Ok(out)
}
