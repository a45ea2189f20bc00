//! Closed-form references: the spatially homogeneous ODE system, the
//! logistic solution, the constants of the `H(y) = y + A₁ y^{-δ} χ^{δ+1} C`
//! minimization, and the boundedness threshold on μ.

use crate::error::{require, Error, Result};

/// `A₁ = (1/(δ+1)) · ((δ+1)/δ)^{-δ} · ((δ−1)/δ)^{δ+1}`.
pub fn a1_constant(delta: f64) -> Result<f64> {
    require(delta >= 1.0 && delta.is_finite(), || format!("delta must be >= 1, got {delta}"))?;
    Ok((1.0 / (delta + 1.0)) * ((delta + 1.0) / delta).powf(-delta) * ((delta - 1.0) / delta).powf(delta + 1.0))
}

/// Minimum of `H(y) = y + A₁ y^{-δ} χ^{δ+1} C` over `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HMinimum {
    pub delta: f64,
    pub chi: f64,
    pub c_const: f64,
    pub a1: f64,
    /// Minimizer; `None` for `δ = 1`, where `H(y) = y` has infimum 0 at `y → 0⁺`.
    pub y_star: Option<f64>,
    /// `((δ−1)/δ) C^{1/(δ+1)} χ`.
    pub h_min: f64,
    /// Smallest value of `H` found by the brute-force scan around `y_star`.
    pub scan_min: f64,
}

impl HMinimum {
    pub const CSV_HEADER: &'static str = "delta,chi,c_const,a1,y_star,h_min,scan_min";

    pub fn csv_row(&self) -> String {
        let y = self.y_star.map_or_else(|| "NA".to_string(), |y| format!("{y:.16e}"));
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{y},{:.16e},{:.16e}",
            self.delta, self.chi, self.c_const, self.a1, self.h_min, self.scan_min
        )
    }

    /// `H` evaluated at `y`.
    pub fn h(&self, y: f64) -> f64 {
        y + self.a1 * y.powf(-self.delta) * self.chi.powf(self.delta + 1.0) * self.c_const
    }
}

/// Relative amount by which the scan may undercut the closed form.
pub const SCAN_TOLERANCE: f64 = 1e-9;

/// Closed-form minimizer and minimum of `H`, cross-checked by a
/// log-spaced scan over `[y*/100, 100 y*]` with local zooming.
pub fn minimize_h(delta: f64, chi: f64, c_const: f64) -> Result<HMinimum> {
    let a1 = a1_constant(delta)?;
    require(chi > 0.0 && chi.is_finite(), || format!("chi must be > 0, got {chi}"))?;
    require(c_const > 0.0 && c_const.is_finite(), || format!("C must be > 0, got {c_const}"))?;
    let h_min = ((delta - 1.0) / delta) * c_const.powf(1.0 / (delta + 1.0)) * chi;
    if delta == 1.0 {
        return Ok(HMinimum { delta, chi, c_const, a1, y_star: None, h_min, scan_min: 0.0 });
    }
    let y_star = (a1 * c_const * delta).powf(1.0 / (delta + 1.0)) * chi;
    let mut out = HMinimum { delta, chi, c_const, a1, y_star: Some(y_star), h_min, scan_min: f64::NAN };
    out.scan_min = scan_minimum(|y| out.h(y), (y_star / 100.0).ln(), (y_star * 100.0).ln());
    if out.scan_min < h_min * (1.0 - SCAN_TOLERANCE) {
        return Err(Error::Precondition(format!(
            "scan found H = {} below the closed-form minimum {h_min}",
            out.scan_min
        )));
    }
    Ok(out)
}

/// Brute-force minimum of `f(e^s)` for `s ∈ [lo, hi]`: a uniform scan,
/// then repeated rescans of the bracket around the best point.
fn scan_minimum(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const POINTS: usize = 401;
    let mut best = f64::INFINITY;
    for _ in 0..12 {
        let step = (hi - lo) / (POINTS - 1) as f64;
        let mut best_k = 0;
        for k in 0..POINTS {
            let val = f((lo + k as f64 * step).exp());
            if val < best {
                best = val;
                best_k = k;
            }
        }
        let centre = lo + best_k as f64 * step;
        lo = centre - 2.0 * step;
        hi = centre + 2.0 * step;
    }
    best
}

/// `((N−2)₊/N) · χ · C^{1/(N/2+1)}`, with `C` standing in for the
/// maximal-regularity constant, which has no closed form.
pub fn threshold_mu(dim: usize, chi: f64, c_const: f64) -> Result<f64> {
    require(dim >= 1, || "dim must be >= 1".to_string())?;
    require(chi >= 0.0 && chi.is_finite(), || format!("chi must be >= 0, got {chi}"))?;
    require(c_const > 0.0 && c_const.is_finite(), || format!("C must be > 0, got {c_const}"))?;
    let n = dim as f64;
    let factor = (n - 2.0).max(0.0) / n;
    if factor == 0.0 {
        return Ok(0.0);
    }
    Ok(factor * chi * c_const.powf(1.0 / (n / 2.0 + 1.0)))
}

/// Exact solution of `u' = a u − μ u²`.
pub fn logistic_closed_form(u0: f64, a: f64, mu: f64, t: f64) -> f64 {
    if a == 0.0 {
        u0 / (1.0 + mu * u0 * t)
    } else if a > 0.0 {
        // divide through by e^{at} so large t does not overflow
        let decay = (-a * t).exp();
        a * u0 / (a * decay + mu * u0 * (1.0 - decay))
    } else {
        let growth = (a * t).exp();
        a * u0 * growth / (a + mu * u0 * (growth - 1.0))
    }
}

/// RK4 trajectory `(t, u, v)` of `u' = a u − μ u²`, `v' = u − v`, the
/// system left over when the data are spatially constant. The last step is
/// shortened to land on `t_end`.
pub fn homogeneous_ode(u0: f64, v0: f64, a: f64, mu: f64, t_end: f64, dt: f64) -> Result<Vec<(f64, f64, f64)>> {
    require(dt > 0.0 && dt.is_finite(), || format!("dt must be > 0, got {dt}"))?;
    require(t_end >= 0.0 && t_end.is_finite(), || format!("t_end must be >= 0, got {t_end}"))?;
    require(u0 >= 0.0 && v0 >= 0.0, || "initial values must be >= 0".to_string())?;
    let rhs = |u: f64, v: f64| (a * u - mu * u * u, u - v);
    let steps = (t_end / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut t, mut u, mut v) = (0.0, u0, v0);
    out.push((t, u, v));
    for k in 0..steps {
        let h = if k + 1 == steps { t_end - t } else { dt };
        let (k1u, k1v) = rhs(u, v);
        let (k2u, k2v) = rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t = if k + 1 == steps { t_end } else { (k + 1) as f64 * dt };
        out.push((t, u, v));
    }
    Ok(out)
}
