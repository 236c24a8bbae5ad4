#![allow(dead_code)]

use rand::Rng;

pub const VARS: [&str; 4] = ["x1", "x2", "x3", "x4"];

/// Positive field on `[-0.5, 0.5]^4` built from a constant plus a few
/// polynomial and exponential terms; the constant dominates their bound.
pub fn positive_field<R: Rng>(rng: &mut R) -> String {
    let mut terms = Vec::new();
    let mut bound = 0.0;
    for _ in 0..rng.gen_range(2..=5) {
        let c: f64 = rng.gen_range(-0.4..0.4);
        let i = rng.gen_range(0..4);
        let j = rng.gen_range(0..4);
        let (term, size) = match rng.gen_range(0..5) {
            0 => (format!("{}", VARS[i]), 0.5),
            1 => (format!("{}*{}", VARS[i], VARS[j]), 0.25),
            2 => (format!("{}^2", VARS[i]), 0.25),
            3 => {
                let a: f64 = rng.gen_range(-0.8..0.8);
                let b: f64 = rng.gen_range(-0.8..0.8);
                (format!("exp({a:.3}*{} + {b:.3}*{})", VARS[i], VARS[j]), 2.3)
            }
            _ => (format!("{}^2*{}", VARS[i], VARS[j]), 0.125),
        };
        bound += c.abs() * size;
        terms.push(format!("{c:.3}*{term}"));
    }
    let c0 = 0.5 + bound + rng.gen_range(0.0..0.5);
    format!("{c0:.3} + {}", terms.join(" + "))
}

pub fn point<R: Rng>(rng: &mut R, half_width: f64) -> [f64; 4] {
    [0; 4].map(|_| rng.gen_range(-half_width..half_width))
}

/// Random expression tree over the whole grammar, used for printer/parser checks.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => format!("{}", rng.gen_range(0..20) as f64 / 4.0),
            1 => VARS[rng.gen_range(0..4)].to_string(),
            _ => "t".to_string(),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => format!("{a} + {}", random_expr(rng, depth - 1)),
        1 => format!("{a} - ({})", random_expr(rng, depth - 1)),
        2 => format!("({a})*{}", random_expr(rng, depth - 1)),
        3 => format!("{a}/({})", random_expr(rng, depth - 1)),
        4 => format!("({a})^{}", rng.gen_range(0..4)),
        5 => format!("-{a}"),
        6 => {
            let f = ["exp", "ln", "sqrt", "sin", "cos", "atan"][rng.gen_range(0..6)];
            format!("{f}({a})")
        }
        _ => format!("{a}^-{}", rng.gen_range(1..3)),
    }
}

/// Smooth bounded fields on `[-1, 1]^4` for derivative checks.
pub const SMOOTH_FIELDS: [&str; 6] = [
    "(1 + x1^2 + x2^2)/2",
    "exp(0.3*x1*x3 + x2^2/5 + x4/7) + x1^2/3",
    "sin(x1 + 2*x2) * cos(x3 - x4/2) + 3",
    "atan(x1*x2 + x3) + sqrt(2 + x4^2) * ln(3 + x1*x3)",
    "(2 + x1*x2*x3*x4)^3 / (1 + x2^2)",
    "x1^2*x2 - x3^3*x4 + 2*x1*x4 + (1.5 + sin(x3))^0.5",
];
