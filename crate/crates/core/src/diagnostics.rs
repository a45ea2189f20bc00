//! Per-sample functionals of a state and checkers for the decay and
//! growth estimates the system is known to satisfy.

use std::fmt::Write as _;

use crate::error::{require, Result};
use crate::grid::{face_gradient_raw, integral_of_power, integrate_raw, Grid};
use crate::model::{Parameters, State};

const FIXED_HEADER: &str = "t,mass_u,mass_v,l2_v,l2_grad_v,sup_u,sup_v,entropy_u";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `∫u`
    pub mass_u: f64,
    /// `∫v`
    pub mass_v: f64,
    /// `∫v²`
    pub l2_v: f64,
    /// `∫|∇v|²`, from face gradients and face quadrature weights.
    pub l2_grad_v: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    /// `∫u ln u` with `0 ln 0 = 0`.
    pub entropy_u: f64,
    /// `(p, ∫u^p)` for each requested exponent, in request order.
    pub lp_u: Vec<(f64, f64)>,
}

impl DiagnosticsRecord {
    /// `∫u^p` if `p` was requested.
    pub fn lp(&self, p: f64) -> Option<f64> {
        self.lp_u.iter().find(|(q, _)| *q == p).map(|(_, x)| *x)
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from(FIXED_HEADER);
        for (p, _) in &self.lp_u {
            let _ = write!(h, ",lp_u:p={p}");
        }
        h
    }

    /// One CSV row, every float with 17 significant digits.
    pub fn csv_row(&self) -> String {
        let fixed = [
            self.t,
            self.mass_u,
            self.mass_v,
            self.l2_v,
            self.l2_grad_v,
            self.sup_u,
            self.sup_v,
            self.entropy_u,
        ];
        let mut row = String::new();
        for (i, x) in fixed.iter().chain(self.lp_u.iter().map(|(_, x)| x)).enumerate() {
            if i > 0 {
                row.push(',');
            }
            let _ = write!(row, "{x:.16e}");
        }
        row
    }
}

/// Serializes a series with a header line.
pub fn series_to_csv(series: &[DiagnosticsRecord]) -> String {
    let mut out = series.first().map_or_else(|| FIXED_HEADER.to_string(), |r| r.csv_header());
    out.push('\n');
    for r in series {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn sample(s: &State, g: &Grid, lp_exponents: &[f64]) -> DiagnosticsRecord {
    let (u, v) = (s.u.values(), s.v.values());
    let grad = face_gradient_raw(v, g);
    let weights = g.face_weights();
    let l2_grad_v = grad
        .axes
        .iter()
        .zip(&weights.axes)
        .flat_map(|(ga, wa)| ga.iter().zip(wa).map(|(x, w)| w * x * x))
        .sum();
    let entropy: Vec<f64> = u.iter().map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 }).collect();
    DiagnosticsRecord {
        t: s.t,
        mass_u: integrate_raw(u, g),
        mass_v: integrate_raw(v, g),
        l2_v: integral_of_power(v, 2.0, g),
        l2_grad_v,
        sup_u: u.iter().fold(0.0, |m, x| m.max(x.abs())),
        sup_v: v.iter().fold(0.0, |m, x| m.max(x.abs())),
        entropy_u: integrate_raw(&entropy, g),
        lp_u: lp_exponents.iter().map(|&p| (p, integral_of_power(u, p, g))).collect(),
    }
}

/// Outcome of checking an inequality along a series.
///
/// `worst_margin` is the most negative slack seen, relative to the bound
/// where that makes sense; the check holds iff it is at least `-tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub satisfied: bool,
    pub worst_margin: f64,
    pub t_worst: f64,
    pub tolerance: f64,
    /// The scalar the check is about (for example the fitted decay constant).
    pub observed: f64,
}

impl BoundCheck {
    fn from_margin(name: &str, worst_margin: f64, t_worst: f64, tolerance: f64, observed: f64) -> Self {
        Self {
            name: name.to_string(),
            satisfied: worst_margin >= -tolerance,
            worst_margin,
            t_worst,
            tolerance,
            observed,
        }
    }
}

impl std::fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<20} {:<5} worst_margin={:+.6e} at t={:.6} tol={:.1e} observed={:.6e}",
            self.name,
            if self.satisfied { "PASS" } else { "FAIL" },
            self.worst_margin,
            self.t_worst,
            self.tolerance,
            self.observed
        )
    }
}

/// Largest deviation of the centered-difference `d(∫u)/dt` from
/// `a ∫u − μ ∫u²` over interior samples, divided by `max(1, max ∫u)`.
pub fn mass_ode_residual(series: &[DiagnosticsRecord], p: &Parameters) -> Result<f64> {
    require(series.len() >= 3, || format!("need at least 3 samples, got {}", series.len()))?;
    let step = series[1].t - series[0].t;
    require(step > 0.0, || "sample times must increase".to_string())?;
    for w in series.windows(2) {
        let d = w[1].t - w[0].t;
        require((d - step).abs() <= 1e-9 * step, || format!("non-uniform sampling: {d} vs {step}"))?;
    }
    let scale = series.iter().map(|r| r.mass_u).fold(1.0, f64::max);
    let mut worst = 0.0f64;
    for w in series.windows(3) {
        let u2 = w[1]
            .lp(2.0)
            .ok_or_else(|| crate::Error::Precondition("series lacks ∫u² (request p = 2)".into()))?;
        let derivative = (w[2].mass_u - w[0].mass_u) / (w[2].t - w[0].t);
        worst = worst.max((derivative - (p.a * w[1].mass_u - p.mu * u2)).abs());
    }
    Ok(worst / scale)
}

/// For `a = 0`: `∫u(t) ≤ (1/∫u₀ + μ t/|Ω|)⁻¹ (1 + tol)` at every sample.
/// The margin reported is `(bound − ∫u)/bound`.
pub fn check_mass_decay_bound(
    series: &[DiagnosticsRecord],
    mass0: f64,
    p: &Parameters,
    omega_measure: f64,
    tol: f64,
) -> Result<BoundCheck> {
    require(p.a == 0.0, || format!("the mass decay bound assumes a = 0, got a = {}", p.a))?;
    require(mass0 > 0.0, || format!("initial mass must be > 0, got {mass0}"))?;
    require(omega_measure > 0.0, || "domain measure must be > 0".to_string())?;
    let t0 = series.first().map_or(0.0, |r| r.t);
    let (mut worst, mut t_worst) = (f64::INFINITY, t0);
    for r in series {
        let bound = mass0 / (1.0 + mass0 * p.mu * (r.t - t0) / omega_measure);
        let margin = (bound - r.mass_u) / bound;
        if margin < worst {
            worst = margin;
            t_worst = r.t;
        }
    }
    Ok(BoundCheck::from_margin("mass_decay_bound", worst, t_worst, tol, mass0))
}

/// Envelope for `(1 + t)∫v(t)`: `tol_const · 2 max(∫v₀, ∫u₀)`.
///
/// This is the comparison function `C₂/(t + 2)` with the constant taken
/// from the initial masses; `tol_const = 2` recovers the wider envelope
/// obtained when the mass decay constant is bounded by `∫u₀` itself.
/// `observed` carries `C* = max (1 + t)∫v`.
pub fn check_v_decay(series: &[DiagnosticsRecord], tol_const: f64) -> Result<BoundCheck> {
    require(!series.is_empty(), || "need at least 1 sample".to_string())?;
    require(tol_const > 0.0, || format!("envelope factor must be > 0, got {tol_const}"))?;
    let first = &series[0];
    let envelope = tol_const * f64::max(2.0 * first.mass_v, 2.0 * first.mass_u);
    let (mut c_star, mut t_worst) = (f64::NEG_INFINITY, first.t);
    for r in series {
        let scaled = r.mass_v * (1.0 + r.t - first.t);
        if scaled > c_star {
            c_star = scaled;
            t_worst = r.t;
        }
    }
    let margin = if envelope > 0.0 { (envelope - c_star) / envelope } else { -c_star };
    Ok(BoundCheck::from_margin("v_decay_envelope", margin, t_worst, 0.0, c_star))
}

/// Both `sup u` and `sup v` drop below `level` at some `t ≤ horizon` and
/// stay there. `observed` is the entry time (infinite if never).
pub fn check_uniform_decay(series: &[DiagnosticsRecord], level: f64, horizon: f64) -> Result<BoundCheck> {
    let last = series.last().map_or(f64::NEG_INFINITY, |r| r.t);
    require(last >= horizon, || format!("series ends at t = {last}, before the horizon {horizon}"))?;
    require(level > 0.0, || format!("level must be > 0, got {level}"))?;
    let above = |r: &DiagnosticsRecord| r.sup_u.max(r.sup_v) >= level;
    // first sample after which everything stays below the level
    let entry = match series.iter().rposition(above) {
        Some(i) if i + 1 < series.len() => Some(series[i + 1].t),
        Some(_) => None,
        None => Some(series[0].t),
    };
    let (mut worst, mut t_worst) = (f64::INFINITY, horizon);
    for r in series.iter().filter(|r| r.t >= horizon) {
        let margin = (level - r.sup_u.max(r.sup_v)) / level;
        if margin < worst {
            worst = margin;
            t_worst = r.t;
        }
    }
    let mut check = BoundCheck::from_margin("uniform_decay", worst, t_worst, 0.0, entry.unwrap_or(f64::INFINITY));
    check.satisfied = matches!(entry, Some(t) if t <= horizon);
    Ok(check)
}

/// `max ∫u ln u ≤ cap`.
pub fn entropy_bounded(series: &[DiagnosticsRecord], cap: f64) -> BoundCheck {
    let (mut peak, mut t_peak) = (f64::NEG_INFINITY, series.first().map_or(0.0, |r| r.t));
    for r in series {
        if r.entropy_u > peak {
            peak = r.entropy_u;
            t_peak = r.t;
        }
    }
    let margin = if cap.is_infinite() { f64::INFINITY } else { cap - peak };
    BoundCheck::from_margin("entropy_bounded", margin, t_peak, 0.0, peak)
}
