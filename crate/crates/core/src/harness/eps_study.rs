//! Distances between solutions for a decreasing sequence of ε.

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::scenario::{resolve_output_dir, simulate};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{require, Error, Result};
use crate::grid::{integrate_raw, Grid};
use crate::model::{Parameters, State};
use crate::stepper::Observer;

#[derive(Debug, Clone, PartialEq)]
pub struct EpsRow {
    pub eps_coarse: f64,
    pub eps_fine: f64,
    /// `∫|u_coarse − u_fine|` at the final time.
    pub l1_final: f64,
    /// `(∫∫|u_coarse − u_fine|²)^{1/2}` by trapezoid rule over the samples.
    pub l2_spacetime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsStudy {
    pub rows: Vec<EpsRow>,
}

pub const EPS_HEADER: &str = "eps_coarse,eps_fine,l1_final,l2_spacetime";

impl EpsStudy {
    /// Both distance columns are nonincreasing down the table.
    pub fn nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].l1_final <= w[0].l1_final && w[1].l2_spacetime <= w[0].l2_spacetime)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{EPS_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e}\n",
                r.eps_coarse, r.eps_fine, r.l1_final, r.l2_spacetime
            ));
        }
        out
    }
}

#[derive(Default)]
struct Trajectory {
    times: Vec<f64>,
    u: Vec<Vec<f64>>,
}

impl Observer for Trajectory {
    fn on_sample(&mut self, record: &DiagnosticsRecord, state: &State) {
        self.times.push(record.t);
        self.u.push(state.u.values().to_vec());
    }
}

fn l2_sq(a: &[f64], b: &[f64], g: &Grid) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    integrate_raw(&d, g)
}

pub fn epsilon_refinement_study(cfg: &ScenarioConfig, epsilons: &[f64]) -> Result<EpsStudy> {
    require(epsilons.len() >= 3, || format!("need at least 3 epsilon values, got {}", epsilons.len()))?;
    require(epsilons.windows(2).all(|w| w[1] <= w[0]), || "epsilon values must be listed in descending order".into())?;
    let runs: Vec<(Grid, Trajectory, bool)> = epsilons
        .par_iter()
        .map(|&eps| {
            let mut c = cfg.clone();
            let p = &cfg.params;
            c.params = Parameters::new(p.chi, p.mu, p.a, eps, p.dim)?;
            let mut traj = Trajectory::default();
            let (grid, out) = simulate(&c, &mut traj)?;
            Ok((grid, traj, out.report.triggered))
        })
        .collect::<Result<_>>()?;
    if let Some(i) = runs.iter().position(|r| r.2) {
        return Err(Error::Precondition(format!("the run with epsilon = {} triggered the detector", epsilons[i])));
    }

    let mut rows = Vec::new();
    for (i, pair) in runs.windows(2).enumerate() {
        let (g, a, _) = &pair[0];
        let (_, b, _) = &pair[1];
        require(a.times == b.times, || "runs sampled at different times".into())?;
        let last = a.u.len() - 1;
        let diff: Vec<f64> = a.u[last].iter().zip(&b.u[last]).map(|(x, y)| (x - y).abs()).collect();
        let l1_final = integrate_raw(&diff, g);
        let sq: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| l2_sq(x, y, g)).collect();
        let l2: f64 = a.times.windows(2).zip(sq.windows(2)).map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1])).sum();
        rows.push(EpsRow { eps_coarse: epsilons[i], eps_fine: epsilons[i + 1], l1_final, l2_spacetime: l2.sqrt() });
    }
    Ok(EpsStudy { rows })
}

/// Runs the study on the config's `[eps_study]` list and writes `eps_study.csv`.
pub fn run_eps_study(cfg: &ScenarioConfig) -> Result<(EpsStudy, PathBuf)> {
    let eps = cfg
        .eps_study
        .clone()
        .ok_or_else(|| Error::Precondition("config has no [eps_study] epsilons list".into()))?;
    let study = epsilon_refinement_study(cfg, &eps)?;
    let dir = resolve_output_dir(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join("eps_study.csv");
    fs::write(&path, study.to_csv()).map_err(|e| Error::io(&path, e))?;
    Ok((study, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn cfg() -> ScenarioConfig {
        parse_config(
            "[grid]\nkind = interval\ncells = 32\n[model]\nchi = 4\nmu = 1\na = 1\n\
             [initial_u]\nprofile = gaussian\nwidth = 0.1\namplitude = 3\nbase = 0.5\n\
             [time]\nt_end = 0.5\ndt_max = 0.005\nsample_every = 0.05\n",
        )
        .unwrap()
    }

    #[test]
    fn equal_epsilons_give_zero_distances() {
        let s = epsilon_refinement_study(&cfg(), &[0.1, 0.1, 0.1]).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(s.rows.iter().all(|r| r.l1_final == 0.0 && r.l2_spacetime == 0.0));
        assert!(s.nonincreasing());
    }

    #[test]
    fn preconditions() {
        assert!(matches!(epsilon_refinement_study(&cfg(), &[0.1, 0.01]), Err(Error::Precondition(_))));
        assert!(matches!(epsilon_refinement_study(&cfg(), &[0.01, 0.1, 0.001]), Err(Error::Precondition(_))));
    }

    #[test]
    fn distances_shrink() {
        let s = epsilon_refinement_study(&cfg(), &[0.5, 0.05, 0.005]).unwrap();
        assert!(s.rows[0].l1_final > 0.0);
        assert!(s.nonincreasing(), "{}", s.to_csv());
    }
}
