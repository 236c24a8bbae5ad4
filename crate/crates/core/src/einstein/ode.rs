//! Fixed-step classical Runge-Kutta for small autonomous systems.

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// The requested end time was reached.
    ReachedEnd,
    /// The solution exceeded its cap. `t_cap` is where the cap was crossed;
    /// `t_escape` adds the asymptotic tail estimate when one is available.
    BlowUp { t_cap: f64, t_escape: f64 },
    /// `gamma = alpha'` reached zero (or changed sign) near `t`.
    SingularGamma { t: f64 },
    /// The state left the region where the right-hand side is defined.
    LeftDomain { t: f64 },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::ReachedEnd => "reached_t_max",
            Termination::BlowUp { .. } => "blow_up",
            Termination::SingularGamma { .. } => "singular_gamma",
            Termination::LeftDomain { .. } => "left_domain",
        }
    }
}

/// One classical RK4 step of `y' = f(y)`.
pub(crate) fn rk4_step<const N: usize, E>(
    f: &impl Fn(&[f64; N]) -> Result<[f64; N], E>,
    y: &[f64; N],
    dt: f64,
) -> Result<[f64; N], E> {
    let shift = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    };
    let k1 = f(y)?;
    let k2 = f(&shift(y, &k1, 0.5 * dt))?;
    let k3 = f(&shift(y, &k2, 0.5 * dt))?;
    let k4 = f(&shift(y, &k3, dt))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Number of fixed steps covering `span` with nominal step `dt`; the last step
/// is shortened so the grid ends exactly at `span`.
pub(crate) fn step_count(span: f64, dt: f64) -> usize {
    let n = span / dt;
    let rounded = libm::round(n);
    if libm::fabs(n - rounded) < 1e-9 * n.max(1.0) {
        rounded as usize
    } else {
        libm::ceil(n) as usize
    }
}
