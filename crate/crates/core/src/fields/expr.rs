use alloc::boxed::Box;
use core::fmt;

use super::{FieldError, Jet2, Point, DIM};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => " * ",
            BinOp::Div => " / ",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Atan,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
        }
    }

    fn value(self, u: f64) -> Result<f64, FieldError> {
        Ok(match self {
            Func::Exp => math::exp(u),
            Func::Ln => {
                if u <= 0.0 {
                    return Err(FieldError::Domain("logarithm of a nonpositive value"));
                }
                math::ln(u)
            }
            Func::Sqrt => {
                if u < 0.0 {
                    return Err(FieldError::Domain("square root of a negative value"));
                }
                math::sqrt(u)
            }
            Func::Sin => math::sin(u),
            Func::Cos => math::cos(u),
            Func::Atan => math::atan(u),
        })
    }

    /// `(phi(u), phi'(u), phi''(u))`.
    fn derivatives(self, u: f64) -> Result<(f64, f64, f64), FieldError> {
        Ok(match self {
            Func::Exp => {
                let e = math::exp(u);
                (e, e, e)
            }
            Func::Ln => {
                if u <= 0.0 {
                    return Err(FieldError::Domain("logarithm of a nonpositive value"));
                }
                (math::ln(u), 1.0 / u, -1.0 / (u * u))
            }
            Func::Sqrt => {
                if u <= 0.0 {
                    return Err(FieldError::Domain(
                        "square root is not differentiable at nonpositive values",
                    ));
                }
                let s = math::sqrt(u);
                (s, 0.5 / s, -0.25 / (s * u))
            }
            Func::Sin => {
                let (s, c) = (math::sin(u), math::cos(u));
                (s, c, -s)
            }
            Func::Cos => {
                let (s, c) = (math::sin(u), math::cos(u));
                (c, -s, -c)
            }
            Func::Atan => {
                let d = 1.0 + u * u;
                (math::atan(u), 1.0 / d, -2.0 * u / (d * d))
            }
        })
    }
}

/// Expression tree over the coordinates `x1..x4`.
///
/// Variables are stored zero-based: `Var(0)` is `x1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Printing precedence levels; parentheses are inserted when a child binds
// looser than its position requires.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(axis: usize) -> Expr {
        debug_assert!(axis < DIM);
        Expr::Var(axis)
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    /// Plain value at `p`.
    pub fn eval(&self, p: &Point) -> Result<f64, FieldError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(i) => Ok(p.0[*i]),
            Expr::Neg(e) => Ok(-e.eval(p)?),
            Expr::Call(f, e) => f.value(e.eval(p)?),
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(p)?, r.eval(p)?);
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(FieldError::Domain("division by zero"))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => pow_value(a, b, r.is_constant()),
                }
            }
        }
    }

    /// Value, gradient and Hessian at `p` by forward propagation.
    pub fn jet(&self, p: &Point) -> Result<Jet2, FieldError> {
        match self {
            Expr::Num(v) => Ok(Jet2::constant(*v)),
            Expr::Var(i) => Ok(Jet2::variable(*i, p.0[*i])),
            Expr::Neg(e) => Ok(e.jet(p)?.neg()),
            Expr::Call(f, e) => {
                let u = e.jet(p)?;
                let (f0, f1, f2) = f.derivatives(u.value)?;
                Ok(u.chain(f0, f1, f2))
            }
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.jet(p)?, r.jet(p)?);
                match op {
                    BinOp::Add => Ok(a.add(&b)),
                    BinOp::Sub => Ok(a.sub(&b)),
                    BinOp::Mul => Ok(a.mul(&b)),
                    BinOp::Div => a.div(&b),
                    BinOp::Pow => pow_jet(&a, &b),
                }
            }
        }
    }

    /// True when the tree contains no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Bin(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if v.is_sign_negative() => PREC_UNARY,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_SUM,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_PRODUCT,
            // A power is a valid factor but never a valid base.
            Expr::Bin(BinOp::Pow, ..) => PREC_UNARY + 1,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_str("(")?;
            self.fmt_bare(f)?;
            f.write_str(")")
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_at(f, PREC_UNARY)
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.fmt_bare(f)?;
                f.write_str(")")
            }
            Expr::Bin(op, l, r) => {
                let (lp, rp) = match op {
                    BinOp::Add | BinOp::Sub => (PREC_SUM, PREC_PRODUCT),
                    BinOp::Mul | BinOp::Div => (PREC_PRODUCT, PREC_UNARY),
                    BinOp::Pow => (PREC_ATOM, PREC_UNARY),
                };
                l.fmt_at(f, lp)?;
                f.write_str(op.symbol())?;
                r.fmt_at(f, rp)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_bare(f)
    }
}

fn integer_exponent(b: f64) -> Option<i32> {
    if math::round(b) == b && math::abs(b) <= i32::MAX as f64 {
        Some(b as i32)
    } else {
        None
    }
}

fn pow_value(a: f64, b: f64, constant_exponent: bool) -> Result<f64, FieldError> {
    if constant_exponent {
        if let Some(n) = integer_exponent(b) {
            if a == 0.0 && n < 0 {
                return Err(FieldError::Domain("zero raised to a negative power"));
            }
            return Ok(math::powi(a, n));
        }
    }
    if a > 0.0 {
        Ok(math::pow(a, b))
    } else {
        Err(FieldError::Domain(
            "non-integer power requires a positive base",
        ))
    }
}

fn pow_jet(a: &Jet2, b: &Jet2) -> Result<Jet2, FieldError> {
    if b.is_constant() {
        if let Some(n) = integer_exponent(b.value) {
            if n == 0 {
                return Ok(Jet2::constant(1.0));
            }
            let u = a.value;
            if u == 0.0 && n < 0 {
                return Err(FieldError::Domain("zero raised to a negative power"));
            }
            let nf = n as f64;
            let f0 = math::powi(u, n);
            let f1 = nf * math::powi(u, n - 1);
            let f2 = if n == 1 {
                0.0
            } else {
                nf * (nf - 1.0) * math::powi(u, n - 2)
            };
            return Ok(a.chain(f0, f1, f2));
        }
        if a.value <= 0.0 {
            return Err(FieldError::Domain(
                "non-integer power requires a positive base",
            ));
        }
        let (u, k) = (a.value, b.value);
        let f0 = math::pow(u, k);
        return Ok(a.chain(f0, k * f0 / u, k * (k - 1.0) * f0 / (u * u)));
    }
    // General case: a^b = exp(b ln a).
    let ln_a = a.ln().map_err(|_| {
        FieldError::Domain("variable exponent requires a positive base")
    })?;
    let e = b.mul(&ln_a);
    let v = math::exp(e.value);
    Ok(e.chain(v, v, v))
}

#[cfg(test)]
mod tests {
    use super::super::parse_expr;
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn display_reparses_to_same_tree() {
        for s in [
            "1 - (2 - x1)",
            "x1 / (x2 * x3)",
            "-x1^2",
            "(-x1)^2",
            "2^-x1",
            "x1^x2^x3",
            "(x1^x2)^x3",
            "-(x1 + x2)",
            "exp(-x1)*sin(x2/3)",
        ] {
            let e = parse_expr(s).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), e, "{s} -> {printed}");
        }
    }

    #[test]
    fn negative_literal_prints_as_factor() {
        let e = Expr::bin(BinOp::Pow, Expr::num(-2.0), Expr::num(2.0));
        assert_eq!(e.to_string(), "(-2)^2");
    }

    #[test]
    fn integer_power_allows_negative_base() {
        let e = parse_expr("x1^3").unwrap();
        let p = Point::on_t_axis(-2.0);
        assert_eq!(e.eval(&p).unwrap(), -8.0);
        let j = e.jet(&p).unwrap();
        assert_eq!(j.grad[0], 12.0);
        assert_eq!(j.hess[0][0], -12.0);
    }

    #[test]
    fn fractional_power_of_negative_base_is_domain_error() {
        let e = parse_expr("x1^0.5").unwrap();
        assert!(e.eval(&Point::on_t_axis(-1.0)).is_err());
        assert!(e.jet(&Point::on_t_axis(-1.0)).is_err());
        assert_eq!(e.eval(&Point::on_t_axis(4.0)).unwrap(), 2.0);
    }

    #[test]
    fn power_at_zero_base() {
        let e = parse_expr("x1^1 + x2^2").unwrap();
        let j = e.jet(&Point::ORIGIN).unwrap();
        assert_eq!(j.grad, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(j.hess[1][1], 2.0);
        assert!(parse_expr("x1^-1").unwrap().eval(&Point::ORIGIN).is_err());
    }

    #[test]
    fn variable_exponent_uses_exp_log() {
        let e = parse_expr("x1^x2").unwrap();
        let p = Point::new([2.0, 3.0, 0.0, 0.0]);
        let j = e.jet(&p).unwrap();
        assert!((j.value - 8.0).abs() < 1e-12);
        assert!((j.grad[0] - 12.0).abs() < 1e-12);
        assert!((j.grad[1] - 8.0 * libm::log(2.0)).abs() < 1e-12);
    }
}
