//! Scalar fields on `R^4` with first and second partial derivatives.
//!
//! Every field answers a single query, [`ScalarField::jet`], which returns the
//! value, gradient and Hessian at a point. Expression-backed fields compute the
//! jet exactly by forward-mode propagation; black-box fields ([`NumericField`])
//! fall back to centered differences.
//!
//! Axis indices are zero-based: axis `0` is `x1` (alias `t`), axis `3` is `x4`.

mod expr;
mod parse;

use alloc::sync::Arc;
use core::fmt;

pub use expr::{BinOp, Expr, Func};
pub use parse::{parse_expr, ParseError, ParseErrorKind};

use crate::math;

/// Dimension of the ambient Euclidean space.
pub const DIM: usize = 4;

/// First-order step for black-box fields.
pub const FD_STEP_FIRST: f64 = 1e-4;
/// Second-order step for black-box fields.
pub const FD_STEP_SECOND: f64 = 1e-3;

/// A point `(x1, x2, x3, x4)` of `R^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(pub [f64; DIM]);

impl Point {
    pub const ORIGIN: Point = Point([0.0; DIM]);

    pub const fn new(coords: [f64; DIM]) -> Self {
        Point(coords)
    }

    /// Point with `x1 = t` and every other coordinate zero.
    pub const fn on_t_axis(t: f64) -> Self {
        Point([t, 0.0, 0.0, 0.0])
    }

    /// Validating constructor: all coordinates must be finite.
    pub fn try_new(coords: [f64; DIM]) -> Result<Self, FieldError> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Point(coords))
        } else {
            Err(FieldError::NonFinitePoint)
        }
    }

    pub fn coords(&self) -> &[f64; DIM] {
        &self.0
    }

    pub fn t(&self) -> f64 {
        self.0[0]
    }

    /// Copy of `self` with `delta` added to coordinate `axis`.
    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut c = self.0;
        c[axis] += delta;
        Point(c)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("field value {value} is not strictly positive at {point}")]
    NonPositive { value: f64, point: Point },
    #[error("axis index {0} out of range (expected 0..4)")]
    AxisOutOfRange(usize),
    #[error("point has non-finite coordinates")]
    NonFinitePoint,
    #[error("t = {t} lies outside the profile range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; DIM],
    pub hess: [[f64; DIM]; DIM],
}

impl Jet2 {
    pub const fn constant(value: f64) -> Self {
        Jet2 {
            value,
            grad: [0.0; DIM],
            hess: [[0.0; DIM]; DIM],
        }
    }

    /// The coordinate function `x_{axis+1}` evaluated at `value`.
    pub fn variable(axis: usize, value: f64) -> Self {
        let mut j = Jet2::constant(value);
        j.grad[axis] = 1.0;
        j
    }

    /// True when gradient and Hessian vanish identically.
    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|&g| g == 0.0) && self.hess.iter().flatten().all(|&h| h == 0.0)
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        self.combine(o, 1.0, 1.0)
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        self.combine(o, 1.0, -1.0)
    }

    fn combine(&self, o: &Jet2, a: f64, b: f64) -> Jet2 {
        let mut r = Jet2::constant(a * self.value + b * o.value);
        for i in 0..DIM {
            r.grad[i] = a * self.grad[i] + b * o.grad[i];
            for j in 0..DIM {
                r.hess[i][j] = a * self.hess[i][j] + b * o.hess[i][j];
            }
        }
        r
    }

    pub fn neg(&self) -> Jet2 {
        self.scale(-1.0)
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        let mut r = *self;
        r.value *= k;
        r.grad.iter_mut().for_each(|g| *g *= k);
        r.hess.iter_mut().flatten().for_each(|h| *h *= k);
        r
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let (u, v) = (self, o);
        let mut r = Jet2::constant(u.value * v.value);
        for i in 0..DIM {
            r.grad[i] = u.grad[i] * v.value + u.value * v.grad[i];
        }
        for i in 0..DIM {
            for j in i..DIM {
                let h = u.hess[i][j] * v.value
                    + u.value * v.hess[i][j]
                    + (u.grad[i] * v.grad[j] + u.grad[j] * v.grad[i]);
                r.hess[i][j] = h;
                r.hess[j][i] = h;
            }
        }
        r
    }

    pub fn div(&self, o: &Jet2) -> Result<Jet2, FieldError> {
        if o.value == 0.0 {
            return Err(FieldError::Domain("division by zero"));
        }
        let inv = o.value;
        let recip = o.chain(1.0 / inv, -1.0 / (inv * inv), 2.0 / (inv * inv * inv));
        Ok(self.mul(&recip))
    }

    /// Composition `phi(self)` given `phi`, `phi'` and `phi''` at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let mut r = Jet2::constant(f0);
        for i in 0..DIM {
            r.grad[i] = f1 * self.grad[i];
        }
        for i in 0..DIM {
            for j in i..DIM {
                let h = f1 * self.hess[i][j] + f2 * (self.grad[i] * self.grad[j]);
                r.hess[i][j] = h;
                r.hess[j][i] = h;
            }
        }
        r
    }

    /// Jet of `ln f`; requires `f > 0`.
    pub fn ln(&self) -> Result<Jet2, FieldError> {
        if self.value <= 0.0 {
            return Err(FieldError::Domain("logarithm of a nonpositive value"));
        }
        let v = self.value;
        Ok(self.chain(math::ln(v), 1.0 / v, -1.0 / (v * v)))
    }

    fn check_finite(self) -> Result<Jet2, FieldError> {
        let ok = self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().flatten().all(|h| h.is_finite());
        if ok {
            Ok(self)
        } else {
            Err(FieldError::Domain("non-finite value or derivative"))
        }
    }
}

fn check_axis(i: usize) -> Result<(), FieldError> {
    if i < DIM {
        Ok(())
    } else {
        Err(FieldError::AxisOutOfRange(i))
    }
}

/// A real-valued field on (a subset of) `R^4`.
pub trait ScalarField: Send + Sync + fmt::Debug {
    /// Value, gradient and Hessian at `p`.
    fn jet(&self, p: &Point) -> Result<Jet2, FieldError>;

    fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        self.jet(p).map(|j| j.value)
    }

    fn partial(&self, p: &Point, i: usize) -> Result<f64, FieldError> {
        check_axis(i)?;
        self.jet(p).map(|j| j.grad[i])
    }

    fn partial2(&self, p: &Point, i: usize, j: usize) -> Result<f64, FieldError> {
        check_axis(i)?;
        check_axis(j)?;
        self.jet(p).map(|jet| jet.hess[i][j])
    }

    /// `d ln f`, i.e. `grad f / f`; the field must be positive at `p`.
    fn grad_ln(&self, p: &Point) -> Result<[f64; DIM], FieldError> {
        let jet = self.jet(p)?;
        if jet.value <= 0.0 {
            return Err(FieldError::NonPositive {
                value: jet.value,
                point: *p,
            });
        }
        Ok(jet.grad.map(|g| g / jet.value))
    }
}

impl<F: ScalarField + ?Sized> ScalarField for Arc<F> {
    fn jet(&self, p: &Point) -> Result<Jet2, FieldError> {
        (**self).jet(p)
    }
    fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        (**self).eval(p)
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn jet(&self, p: &Point) -> Result<Jet2, FieldError> {
        (**self).jet(p)
    }
    fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        (**self).eval(p)
    }
}

/// The constant field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn jet(&self, _p: &Point) -> Result<Jet2, FieldError> {
        Ok(Jet2::constant(self.0))
    }
}

/// Field backed by a parsed expression; derivatives are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprField {
    expr: Expr,
}

impl ExprField {
    pub fn new(expr: Expr) -> Self {
        ExprField { expr }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_expr(text).map(ExprField::new)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl ScalarField for ExprField {
    fn jet(&self, p: &Point) -> Result<Jet2, FieldError> {
        self.expr.jet(p)?.check_finite()
    }

    fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        let v = self.expr.eval(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FieldError::Domain("non-finite value"))
        }
    }
}

/// Black-box field: only point values are known, derivatives come from
/// centered differences with [`FD_STEP_FIRST`] and [`FD_STEP_SECOND`].
pub struct NumericField<F> {
    f: F,
    first_step: f64,
    second_step: f64,
}

impl<F> fmt::Debug for NumericField<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericField")
            .field("first_step", &self.first_step)
            .field("second_step", &self.second_step)
            .finish_non_exhaustive()
    }
}

impl<F> NumericField<F>
where
    F: Fn(&Point) -> Result<f64, FieldError> + Send + Sync,
{
    pub fn new(f: F) -> Self {
        NumericField {
            f,
            first_step: FD_STEP_FIRST,
            second_step: FD_STEP_SECOND,
        }
    }

    pub fn with_steps(f: F, first_step: f64, second_step: f64) -> Self {
        NumericField {
            f,
            first_step,
            second_step,
        }
    }
}

impl<F> ScalarField for NumericField<F>
where
    F: Fn(&Point) -> Result<f64, FieldError> + Send + Sync,
{
    fn jet(&self, p: &Point) -> Result<Jet2, FieldError> {
        let f = &self.f;
        let v = f(p)?;
        let mut jet = Jet2::constant(v);
        let h1 = self.first_step;
        let h2 = self.second_step;
        for i in 0..DIM {
            jet.grad[i] = (f(&p.shifted(i, h1))? - f(&p.shifted(i, -h1))?) / (2.0 * h1);
        }
        for i in 0..DIM {
            let d2 = (f(&p.shifted(i, h2))? - 2.0 * v + f(&p.shifted(i, -h2))?) / (h2 * h2);
            jet.hess[i][i] = d2;
            for j in (i + 1)..DIM {
                let pp = f(&p.shifted(i, h2).shifted(j, h2))?;
                let pm = f(&p.shifted(i, h2).shifted(j, -h2))?;
                let mp = f(&p.shifted(i, -h2).shifted(j, h2))?;
                let mm = f(&p.shifted(i, -h2).shifted(j, -h2))?;
                let m = (pp - pm - mp + mm) / (4.0 * h2 * h2);
                jet.hess[i][j] = m;
                jet.hess[j][i] = m;
            }
        }
        jet.check_finite()
    }

    fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        (self.f)(p)
    }
}

/// Wrapper that rejects nonpositive values; used for the `sigma` and `rho` roles.
#[derive(Debug, Clone)]
pub struct Positive<F>(pub F);

impl<F: ScalarField> Positive<F> {
    fn check(&self, value: f64, p: &Point) -> Result<f64, FieldError> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(FieldError::NonPositive { value, point: *p })
        }
    }
}

impl<F: ScalarField> ScalarField for Positive<F> {
    fn jet(&self, p: &Point) -> Result<Jet2, FieldError> {
        let jet = self.0.jet(p)?;
        self.check(jet.value, p)?;
        Ok(jet)
    }

    fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        let v = self.0.eval(p)?;
        self.check(v, p)
    }
}
