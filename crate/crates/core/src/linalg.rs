//! Fixed-size 4x4 helpers for the curvature engine.

use crate::math::abs;

pub type Mat4 = [[f64; 4]; 4];

/// Relative determinant below which a matrix is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-10;

pub fn zeros() -> Mat4 {
    [[0.0; 4]; 4]
}

pub fn diag(d: [f64; 4]) -> Mat4 {
    let mut m = zeros();
    for i in 0..4 {
        m[i][i] = d[i];
    }
    m
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().flatten().fold(0.0, |acc, v| acc.max(abs(*v)))
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max(abs(a[i][j] - b[i][j]));
        }
    }
    d
}

pub fn asymmetry(m: &Mat4) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            d = d.max(abs(m[i][j] - m[j][i]));
        }
    }
    d
}

pub fn symmetrize(m: &Mat4) -> Mat4 {
    let mut s = *m;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = 0.5 * (m[i][j] + m[j][i]);
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}

fn det3(m: &Mat4, rows: [usize; 3], cols: [usize; 3]) -> f64 {
    let a = |r: usize, c: usize| m[rows[r]][cols[c]];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

fn others(k: usize) -> [usize; 3] {
    match k {
        0 => [1, 2, 3],
        1 => [0, 2, 3],
        2 => [0, 1, 3],
        _ => [0, 1, 2],
    }
}

/// Inverse by the adjugate formula. Returns `None` when `|det|` is below
/// [`SINGULAR_THRESHOLD`] times the product of the diagonal magnitudes.
pub fn inverse(m: &Mat4) -> Option<Mat4> {
    let mut cof = zeros();
    for i in 0..4 {
        for j in 0..4 {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            cof[i][j] = sign * det3(m, others(i), others(j));
        }
    }
    let det: f64 = (0..4).map(|j| m[0][j] * cof[0][j]).sum();
    let scale: f64 = (0..4).map(|i| abs(m[i][i])).product();
    if !det.is_finite() || abs(det) <= SINGULAR_THRESHOLD * scale || det == 0.0 {
        return None;
    }
    let mut inv = zeros();
    for i in 0..4 {
        for j in 0..4 {
            inv[i][j] = cof[j][i] / det;
        }
    }
    Some(inv)
}

/// Sylvester's criterion on the leading principal minors.
pub fn is_positive_definite(m: &Mat4) -> bool {
    let m1 = m[0][0];
    let m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let m3 = det3(m, [0, 1, 2], [0, 1, 2]);
    let m4: f64 = (0..4)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * det3(m, [1, 2, 3], others(j))
        })
        .sum();
    m1 > 0.0 && m2 > 0.0 && m3 > 0.0 && m4 > 0.0
}
