//! Cartesian parameter sweeps with a finite-horizon boundedness proxy.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::scenario::{resolve_output_dir, simulate};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{require, ConfigError, Error, Result};
use crate::grid::GridShape;
use crate::model::Parameters;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOutcome {
    Bounded,
    Growing,
    Triggered,
}

impl fmt::Display for SweepOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepOutcome::Bounded => "bounded",
            SweepOutcome::Growing => "growing",
            SweepOutcome::Triggered => "triggered",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub chi: f64,
    pub epsilon: f64,
    pub dim: usize,
    pub outcome: SweepOutcome,
    pub max_sup_u: f64,
    pub t_final: f64,
}

pub const SWEEP_HEADER: &str = "mu,chi,epsilon,dim,outcome,max_sup_u,t_final";

impl SweepRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.16e},{:.16e}",
            self.mu, self.chi, self.epsilon, self.dim, self.outcome, self.max_sup_u, self.t_final
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Bounded iff no sample after the transient window exceeds twice the
/// largest `sup u` seen up to the end of that window.
pub fn classify(series: &[DiagnosticsRecord], triggered: bool, transient_fraction: f64, t_end: f64) -> SweepOutcome {
    if triggered {
        return SweepOutcome::Triggered;
    }
    let t0 = series.first().map_or(0.0, |r| r.t);
    let cut = t0 + transient_fraction * (t_end - t0);
    let reference = series.iter().filter(|r| r.t <= cut).map(|r| r.sup_u).fold(0.0, f64::max);
    if series.iter().filter(|r| r.t > cut).any(|r| r.sup_u > 2.0 * reference) {
        SweepOutcome::Growing
    } else {
        SweepOutcome::Bounded
    }
}

/// Every `(mu, chi, epsilon, dim)` combination in lexicographic input order.
pub fn combinations(cfg: &ScenarioConfig) -> Result<Vec<(f64, f64, f64, usize)>> {
    let s = &cfg.sweep;
    let p = &cfg.params;
    let mu = s.mu.clone().unwrap_or_else(|| vec![p.mu]);
    let chi = s.chi.clone().unwrap_or_else(|| vec![p.chi]);
    let eps = s.epsilon.clone().unwrap_or_else(|| vec![p.epsilon]);
    let dim = s.dim.clone().unwrap_or_else(|| vec![p.dim]);
    let total = mu.len() as u128 * chi.len() as u128 * eps.len() as u128 * dim.len() as u128;
    if total > s.max_runs as u128 {
        return Err(Error::Config(vec![ConfigError::global(format!(
            "[sweep] {total} combinations exceed max_runs = {}",
            s.max_runs
        ))]));
    }
    if !matches!(cfg.grid, GridShape::Radial { .. }) {
        if let Some(d) = dim.iter().find(|&&d| d != cfg.grid.dim()) {
            return Err(Error::Config(vec![ConfigError::global(format!(
                "[sweep] dim = {d} needs a radial grid; this grid has dimension {}",
                cfg.grid.dim()
            ))]));
        }
    }
    let mut out = Vec::with_capacity(total as usize);
    for &m in &mu {
        for &c in &chi {
            for &e in &eps {
                for &d in &dim {
                    out.push((m, c, e, d));
                }
            }
        }
    }
    Ok(out)
}

fn variant(cfg: &ScenarioConfig, (mu, chi, epsilon, dim): (f64, f64, f64, usize)) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    if let GridShape::Radial { dim: d, .. } = &mut c.grid {
        *d = dim;
    }
    c.params = Parameters::exploratory(chi, mu, cfg.params.a, epsilon, dim)?;
    Ok(c)
}

/// Runs every combination in parallel. Rows come back in input order.
pub fn sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    let combos = combinations(cfg)?;
    require(cfg.sweep.transient_fraction < 1.0, || "transient fraction must be < 1".into())?;
    combos
        .par_iter()
        .map(|&combo| {
            let c = variant(cfg, combo)?;
            let (mu, chi, epsilon, dim) = combo;
            let (series, triggered, t_final) = match simulate(&c, &mut ()) {
                Ok((_, out)) => (out.series, out.report.triggered, out.state.t),
                // a run that cannot keep u nonnegative even at tiny steps has left
                // the trustworthy range, same as a detector hit
                Err(Error::Positivity { t, .. }) => (Vec::new(), true, t),
                Err(e) => return Err(e),
            };
            let max_sup_u = series.iter().map(|r| r.sup_u).fold(0.0, f64::max);
            let outcome = classify(&series, triggered, c.sweep.transient_fraction, c.control.t_end);
            Ok(SweepRow { mu, chi, epsilon, dim, outcome, max_sup_u, t_final })
        })
        .collect()
}

/// Runs the sweep and writes `sweep.csv` into the output directory.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<(Vec<SweepRow>, PathBuf)> {
    let rows = sweep(cfg)?;
    let dir = resolve_output_dir(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join("sweep.csv");
    fs::write(&path, sweep_csv(&rows)).map_err(|e| Error::io(&path, e))?;
    Ok((rows, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn base(sweep: &str) -> ScenarioConfig {
        parse_config(&format!(
            "[grid]\nkind = interval\ncells = 32\n[model]\nchi = 1\nmu = 1\na = 1\n\
             [initial_u]\nprofile = cosine\nbase = 1\namplitude = 0.5\n\
             [time]\nt_end = 2\ndt_max = 0.01\nsample_every = 0.1\n[sweep]\n{sweep}"
        ))
        .unwrap()
    }

    fn rec(t: f64, sup_u: f64) -> DiagnosticsRecord {
        DiagnosticsRecord { t, sup_u, ..Default::default() }
    }

    #[test]
    fn classification() {
        let flat: Vec<_> = (0..=10).map(|k| rec(k as f64, 1.0)).collect();
        assert_eq!(classify(&flat, false, 0.1, 10.0), SweepOutcome::Bounded);
        assert_eq!(classify(&flat, true, 0.1, 10.0), SweepOutcome::Triggered);
        let grow: Vec<_> = (0..=10).map(|k| rec(k as f64, (k as f64).exp())).collect();
        assert_eq!(classify(&grow, false, 0.1, 10.0), SweepOutcome::Growing);
        // a spike inside the window raises the reference
        let mut spike = flat.clone();
        spike[1].sup_u = 5.0;
        spike[5].sup_u = 9.0;
        assert_eq!(classify(&spike, false, 0.1, 10.0), SweepOutcome::Bounded);
    }

    #[test]
    fn rows_follow_input_order() {
        let cfg = base("mu = 2, 1\nchi = 10, 1\n");
        let rows = sweep(&cfg).unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.mu, r.chi)).collect();
        assert_eq!(keys, vec![(2.0, 10.0), (2.0, 1.0), (1.0, 10.0), (1.0, 1.0)]);
        assert!(rows.iter().all(|r| r.outcome == SweepOutcome::Bounded), "{rows:?}");
        assert_eq!(sweep_csv(&rows), sweep_csv(&sweep(&cfg).unwrap()));
    }

    #[test]
    fn empty_lists_and_caps() {
        let rows = sweep(&base("mu =\n")).unwrap();
        assert!(rows.is_empty());
        assert_eq!(sweep_csv(&rows), format!("{SWEEP_HEADER}\n"));
        assert!(matches!(sweep(&base("mu = 1, 2, 3\nmax_runs = 2\n")), Err(Error::Config(_))));
        assert!(matches!(sweep(&base("dim = 2\n")), Err(Error::Config(_))));
    }

    #[test]
    fn zero_mu_is_allowed() {
        let rows = sweep(&base("mu = 0\n")).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mu, 0.0);
    }
}
