//! First-order IMEX time integration of the coupled system.
//!
//! One step of size `dt`:
//!
//! 1. `u* = u + dt·(−∇·(χ u F_ε(u) ∇v) + a u − μ u²)` (explicit, donor-cell)
//! 2. `(I − dt Δ) u⁺ = u*`
//! 3. `(I − dt Δ + dt I) v⁺ = v + dt u⁺`
//!
//! Both implicit operators quad-sum to the identity on constants, so the
//! discrete mass changes by exactly `dt ∫(a u − μ u²)` per step.

mod linsolve;

pub use linsolve::{helmholtz_solve_1d, helmholtz_solve_2d, RESIDUAL_TOL};

use crate::diagnostics::{sample, DiagnosticsRecord};
use crate::error::{require, Error, Result};
use crate::grid::{chemotactic_divergence_raw, face_gradient_raw, Grid};
use crate::model::{logistic, Field, Parameters, State};

pub const DEFAULT_CEILING: f64 = 1e8;
pub const DEFAULT_DT_FLOOR: f64 = 1e-12;
pub const DEFAULT_POSITIVITY_RETRIES: usize = 20;
pub const DEFAULT_CFL_SAFETY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Step used by [`imex_step`].
    pub dt: f64,
    pub dt_max: f64,
    pub cfl_safety: f64,
    pub positivity_retries: usize,
    pub t_end: f64,
    /// `sup u` above this stops a run as triggered.
    pub ceiling: f64,
    /// A step forced below this stops a run as triggered.
    pub dt_floor: f64,
}

impl StepControl {
    pub fn new(t_end: f64, dt_max: f64) -> Result<Self> {
        let c = Self {
            dt: dt_max,
            dt_max,
            cfl_safety: DEFAULT_CFL_SAFETY,
            positivity_retries: DEFAULT_POSITIVITY_RETRIES,
            t_end,
            ceiling: DEFAULT_CEILING,
            dt_floor: DEFAULT_DT_FLOOR,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.dt_max > 0.0 && self.dt_max.is_finite(), || format!("dt_max must be > 0, got {}", self.dt_max))?;
        require(self.dt > 0.0 && self.dt <= self.dt_max, || {
            format!("dt must lie in (0, dt_max], got {}", self.dt)
        })?;
        require(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0, || {
            format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)
        })?;
        require(self.t_end.is_finite(), || "t_end must be finite".to_string())?;
        require(self.ceiling >= 0.0, || format!("ceiling must be >= 0, got {}", self.ceiling))?;
        require(self.dt_floor > 0.0, || format!("dt_floor must be > 0, got {}", self.dt_floor))
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpCause {
    SupNormCeiling,
    StepCollapse,
}

/// Outcome of the runtime blow-up detector. A triggered report means the
/// run left the numerically trustworthy range, not that a singularity was
/// proven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpReport {
    pub triggered: bool,
    pub t_trigger: f64,
    pub sup_u: f64,
    pub cause: Option<BlowUpCause>,
}

impl BlowUpReport {
    fn quiet(t: f64, sup_u: f64) -> Self {
        Self { triggered: false, t_trigger: t, sup_u, cause: None }
    }

    fn fired(t: f64, sup_u: f64, cause: BlowUpCause) -> Self {
        Self { triggered: true, t_trigger: t, sup_u, cause: Some(cause) }
    }
}

/// Hooks called by [`run_until`].
pub trait Observer {
    fn on_sample(&mut self, _record: &DiagnosticsRecord, _state: &State) {}
    fn on_step(&mut self, _before: &State, _after: &State, _dt: f64) {}
}

impl Observer for () {}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: State,
    pub report: BlowUpReport,
    pub series: Vec<DiagnosticsRecord>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Advances `s` by `c.dt`. Fails with [`Error::Positivity`] when the
/// explicit stage goes negative; the caller is expected to retry with a
/// smaller step.
pub fn imex_step(s: &State, p: &Parameters, g: &Grid, c: &StepControl) -> Result<State> {
    g.check(&s.u)?;
    g.check(&s.v)?;
    let dt = c.dt;
    require(dt > 0.0 && dt.is_finite(), || format!("step must be > 0, got {dt}"))?;
    let (u, v) = (s.u.values(), s.v.values());

    let div = chemotactic_divergence_raw(u, v, p.chi, p.epsilon, g);
    let mut u_star = Vec::with_capacity(u.len());
    for (ui, di) in u.iter().zip(&div) {
        let x = ui + dt * (logistic(*ui, p.a, p.mu) - di);
        if x.is_nan() || x < 0.0 {
            return Err(Error::Positivity { t: s.t, retries: 0 });
        }
        u_star.push(x);
    }

    let u_next = linsolve::helmholtz_solve_raw(&u_star, dt, 0.0, g)?;
    let v_rhs: Vec<f64> = v.iter().zip(&u_next).map(|(vi, ui)| vi + dt * ui).collect();
    let v_next = linsolve::helmholtz_solve_raw(&v_rhs, dt, dt, g)?;

    let u_next = Field::new(g, u_next)?;
    let v_next = Field::new(g, v_next)?;
    if !u_next.is_finite() || !v_next.is_finite() {
        return Err(Error::Solver { iterations: 0, residual: f64::NAN });
    }
    Ok(State { u: u_next, v: v_next, t: s.t + dt })
}

/// `cfl_safety · min(transport limit, 1/(|a| + 2μ sup u))`, capped at `dt_max`.
///
/// The transport limit is the reciprocal of the fastest rate at which
/// donor-cell fluxes drain any single cell, which on a uniform 1D grid is
/// `h / (χ (|∇v|_left + |∇v|_right))`.
pub fn adaptive_dt(s: &State, p: &Parameters, g: &Grid, c: &StepControl) -> f64 {
    let transport = if p.chi > 0.0 {
        let grad = face_gradient_raw(s.v.values(), g);
        let speed = p.chi * g.max_outflow_speed(&grad);
        if speed > 0.0 { g.min_spacing() / speed } else { f64::INFINITY }
    } else {
        f64::INFINITY
    };
    let sup_u = s.u.max().max(0.0);
    let rate = p.a.abs() + 2.0 * p.mu * sup_u;
    let reaction = if rate > 0.0 { 1.0 / rate } else { f64::INFINITY };
    (c.cfl_safety * transport.min(reaction)).min(c.dt_max)
}

/// Integrates from `s0` to `c.t_end`, sampling diagnostics at
/// `s0.t + k·sample_every`. Stops early with a triggered report when
/// `sup u` passes `c.ceiling` or the admissible step falls below `c.dt_floor`.
pub fn run_until(
    s0: State,
    p: &Parameters,
    g: &Grid,
    c: &StepControl,
    sample_every: f64,
    lp_exponents: &[f64],
    observer: &mut dyn Observer,
) -> Result<RunOutcome> {
    c.validate()?;
    g.check(&s0.u)?;
    g.check(&s0.v)?;
    require(c.t_end > s0.t, || format!("t_end {} must exceed the start time {}", c.t_end, s0.t))?;
    require(sample_every > 0.0, || format!("sample interval must be > 0, got {sample_every}"))?;
    require(s0.u.is_nonnegative() && s0.v.is_nonnegative(), || "initial data must be nonnegative".into())?;

    let t0 = s0.t;
    let snap = 1e-9 * sample_every;
    let mut state = s0;
    let mut series = Vec::new();
    let mut next_k = 0usize;
    let (mut accepted, mut rejected) = (0, 0);

    let take_sample = |state: &State, series: &mut Vec<DiagnosticsRecord>, observer: &mut dyn Observer| {
        let rec = sample(state, g, lp_exponents);
        observer.on_sample(&rec, state);
        series.push(rec);
    };

    take_sample(&state, &mut series, observer);
    next_k += 1;
    let finish = |state: State, report, series, accepted, rejected| RunOutcome {
        state,
        report,
        series,
        accepted_steps: accepted,
        rejected_steps: rejected,
    };

    if state.u.max() > c.ceiling {
        let report = BlowUpReport::fired(state.t, state.u.max(), BlowUpCause::SupNormCeiling);
        return Ok(finish(state, report, series, accepted, rejected));
    }

    while c.t_end - state.t > snap {
        let next_sample = t0 + next_k as f64 * sample_every;
        let mut dt = adaptive_dt(&state, p, g, c).min(next_sample - state.t).min(c.t_end - state.t);
        let mut retries = 0;
        let next = loop {
            if dt < c.dt_floor {
                let report = BlowUpReport::fired(state.t, state.u.max(), BlowUpCause::StepCollapse);
                return Ok(finish(state, report, series, accepted, rejected));
            }
            match imex_step(&state, p, g, &c.with_dt(dt)) {
                Ok(next) => break next,
                Err(Error::Positivity { t, .. }) => {
                    rejected += 1;
                    retries += 1;
                    if retries > c.positivity_retries {
                        return Err(Error::Positivity { t, retries: retries - 1 });
                    }
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        observer.on_step(&state, &next, dt);
        accepted += 1;
        state = next;

        if (state.t - next_sample).abs() <= snap {
            state.t = next_sample;
            take_sample(&state, &mut series, observer);
            next_k += 1;
        }
        let sup = state.u.max();
        if sup > c.ceiling || !sup.is_finite() {
            let report = BlowUpReport::fired(state.t, sup, BlowUpCause::SupNormCeiling);
            return Ok(finish(state, report, series, accepted, rejected));
        }
    }
    let report = BlowUpReport::quiet(state.t, state.u.max());
    Ok(finish(state, report, series, accepted, rejected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;

    fn line() -> Grid {
        Grid::interval(32, 1.0).unwrap()
    }

    fn uniform(g: &Grid, u: f64, v: f64) -> State {
        State::new(Field::constant(g, u), Field::constant(g, v), 0.0).unwrap()
    }

    fn bump(g: &Grid) -> State {
        let u = Field::from_fn(g, |c| 1.0 + 0.8 * (std::f64::consts::PI * c[0]).cos());
        let v = Field::from_fn(g, |c| 0.5 + 0.3 * (-20.0 * (c[0] - 0.3).powi(2)).exp());
        State::new(u, v, 0.0).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = line();
        let p = Parameters::new(4.0, 2.0, 3.0, 0.0, 1).unwrap();
        let s = uniform(&g, 1.5, 1.5);
        let c = StepControl::new(1.0, 0.05).unwrap();
        let next = imex_step(&s, &p, &g, &c).unwrap();
        for (a, b) in next.u.values().iter().chain(next.v.values()).zip(s.u.values().iter().chain(s.v.values())) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert_eq!(next.t, 0.05);
    }

    #[test]
    fn homogeneous_step_matches_scalar_scheme() {
        let g = line();
        let dt = 0.01;
        for chi in [0.0, 1.0, 50.0] {
            let p = Parameters::new(chi, 1.0, 1.0, 0.0, 1).unwrap();
            let next = imex_step(&uniform(&g, 0.5, 0.5), &p, &g, &StepControl::new(1.0, dt).unwrap()).unwrap();
            let u_scalar = 0.5 + dt * (0.5 - 0.25);
            let v_scalar = (0.5 + dt * u_scalar) / (1.0 + dt);
            assert!(next.u.values().iter().all(|x| (x - u_scalar).abs() <= 1e-12));
            assert!(next.v.values().iter().all(|x| (x - v_scalar).abs() <= 1e-12));
        }
    }

    #[test]
    fn zero_sensitivity_is_reaction_diffusion() {
        let g = line();
        let s = bump(&g);
        let p0 = Parameters::new(0.0, 1.0, 0.5, 0.0, 1).unwrap();
        let c = StepControl::new(1.0, 0.01).unwrap();
        let next = imex_step(&s, &p0, &g, &c).unwrap();
        let u_star: Vec<f64> = s.u.values().iter().map(|u| u + 0.01 * (0.5 * u - u * u)).collect();
        let expect = helmholtz_solve_1d(&Field::new(&g, u_star).unwrap(), 0.01, 0.0, &g).unwrap();
        for (a, b) in next.u.values().iter().zip(expect.values()) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn positivity_failure_is_signalled() {
        let g = line();
        let mut s = bump(&g);
        s.v = Field::from_fn(&g, |c| 50.0 * c[0]);
        let p = Parameters::new(10.0, 1.0, 0.0, 0.0, 1).unwrap();
        let c = StepControl::new(1.0, 0.5).unwrap();
        assert!(matches!(imex_step(&s, &p, &g, &c), Err(Error::Positivity { .. })));
    }

    #[test]
    fn adaptive_dt_examples() {
        let g = line();
        let p = Parameters::new(1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let c = StepControl { cfl_safety: 0.5, ..StepControl::new(1.0, 0.1).unwrap() };
        assert_eq!(adaptive_dt(&uniform(&g, 1.0, 3.0), &p, &g, &c), 0.1);
        assert_eq!(adaptive_dt(&uniform(&g, 0.0, 0.0), &p, &g, &c), 0.1);

        // steep linear signal: transport dominates, dt ∝ h/(χ|∇v|)
        let mut s = uniform(&g, 1e-3, 0.0);
        s.v = Field::from_fn(&g, |c| 1e4 * c[0]);
        let h = 1.0 / 32.0;
        let big = Parameters::new(100.0, 1.0, 0.0, 0.0, 1).unwrap();
        let dt = adaptive_dt(&s, &big, &g, &c);
        // interior cells drain through one face at speed χ|∇v|
        assert!((dt - 0.5 * h / (100.0 * 1e4)).abs() <= 1e-12 * dt);
    }

    struct MassAudit {
        p: Parameters,
        g: Grid,
        worst: f64,
        min_seen: f64,
    }

    impl Observer for MassAudit {
        fn on_step(&mut self, before: &State, after: &State, dt: f64) {
            let m0 = integrate(&before.u, &self.g).unwrap();
            let m1 = integrate(&after.u, &self.g).unwrap();
            let src: Vec<f64> = before.u.values().iter().map(|&u| logistic(u, self.p.a, self.p.mu)).collect();
            let src = crate::grid::integrate_raw(&src, &self.g);
            self.worst = self.worst.max((m1 - m0 - dt * src).abs() / m0.max(1.0));
            self.min_seen = self.min_seen.min(after.u.min()).min(after.v.min());
        }
    }

    #[test]
    fn discrete_mass_identity_and_positivity() {
        for g in [line(), Grid::radial(24, 1.0, 3).unwrap(), Grid::rect(12, 10, 1.0, 1.0).unwrap()] {
            let s = State::new(
                Field::from_fn(&g, |c| 2.0 * (-10.0 * c.iter().map(|x| (x - 0.4) * (x - 0.4)).sum::<f64>()).exp()),
                Field::from_fn(&g, |c| 0.2 + c[0]),
                0.0,
            )
            .unwrap();
            let p = Parameters::new(6.0, 0.5, 1.0, 0.1, g.dim()).unwrap();
            let c = StepControl::new(0.5, 0.01).unwrap();
            let mut audit = MassAudit { p, g: g.clone(), worst: 0.0, min_seen: f64::INFINITY };
            let out = run_until(s, &p, &g, &c, 0.05, &[2.0], &mut audit).unwrap();
            assert!(!out.report.triggered);
            assert!(audit.worst <= 1e-11, "{:?}: {}", g.kind(), audit.worst);
            assert!(audit.min_seen >= 0.0);
            assert_eq!(out.series.len(), 11);
        }
    }

    #[test]
    fn homogeneous_run_tracks_scalar_scheme() {
        let g = line();
        let p = Parameters::new(3.0, 1.0, 1.0, 0.0, 1).unwrap();
        let c = StepControl::new(2.0, 0.01).unwrap();
        struct Scalar {
            u: f64,
            v: f64,
            worst: f64,
            p: Parameters,
        }
        impl Observer for Scalar {
            fn on_step(&mut self, _: &State, after: &State, dt: f64) {
                self.u += dt * logistic(self.u, self.p.a, self.p.mu);
                self.v = (self.v + dt * self.u) / (1.0 + dt);
                for (x, y) in after.u.values().iter().zip(after.v.values()) {
                    self.worst = self.worst.max((x - self.u).abs()).max((y - self.v).abs());
                }
            }
        }
        let mut obs = Scalar { u: 0.3, v: 0.1, worst: 0.0, p };
        run_until(uniform(&g, 0.3, 0.1), &p, &g, &c, 0.5, &[], &mut obs).unwrap();
        assert!(obs.worst <= 1e-11, "{}", obs.worst);
    }

    #[test]
    fn ceiling_triggers_immediately() {
        let g = line();
        let s = bump(&g);
        let p = Parameters::new(1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let c = StepControl { ceiling: s.u.max() / 2.0, ..StepControl::new(1.0, 0.01).unwrap() };
        let out = run_until(s, &p, &g, &c, 0.1, &[], &mut ()).unwrap();
        assert!(out.report.triggered);
        assert_eq!(out.report.t_trigger, 0.0);
        assert_eq!(out.report.cause, Some(BlowUpCause::SupNormCeiling));
    }

    #[test]
    fn decaying_run_is_untriggered() {
        let g = line();
        let p = Parameters::new(2.0, 1.0, 0.0, 0.0, 1).unwrap();
        let c = StepControl::new(5.0, 0.01).unwrap();
        let out = run_until(bump(&g), &p, &g, &c, 0.5, &[2.0], &mut ()).unwrap();
        assert!(!out.report.triggered);
        assert_eq!(out.state.t, 5.0);
        assert_eq!(out.series.len(), 11);
    }

    #[test]
    fn logistic_diffusion_relaxes_to_capacity() {
        let g = line();
        let p = Parameters::new(0.0, 1.0, 2.0, 0.0, 1).unwrap();
        let c = StepControl::new(20.0, 0.05).unwrap();
        let out = run_until(bump(&g), &p, &g, &c, 1.0, &[], &mut ()).unwrap();
        assert!(!out.report.triggered);
        assert!(out.state.u.values().iter().all(|u| (u - 2.0).abs() < 1e-6));
    }

    #[test]
    fn rejects_bad_horizon() {
        let g = line();
        let p = Parameters::new(1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let c = StepControl::new(0.0, 0.01).unwrap();
        assert!(run_until(bump(&g), &p, &g, &c, 0.1, &[], &mut ()).is_err());
    }

    #[test]
    fn first_order_in_time() {
        let g = Grid::interval(32, 1.0).unwrap();
        let p = Parameters::new(3.0, 1.0, 1.0, 0.0, 1).unwrap();
        let solve = |dt: f64| {
            let c = StepControl::new(0.5, dt).unwrap();
            run_until(bump(&g), &p, &g, &c, 0.5, &[], &mut ()).unwrap().state
        };
        let reference = solve(0.5 / 4096.0);
        let err = |dt: f64| {
            let s = solve(dt);
            s.u.values().iter().zip(reference.u.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let (e1, e2, e3) = (err(0.5 / 64.0), err(0.5 / 128.0), err(0.5 / 256.0));
        assert!((e1 / e2).log2() >= 0.9, "{e1} {e2}");
        assert!((e2 / e3).log2() >= 0.9, "{e2} {e3}");
    }
}
