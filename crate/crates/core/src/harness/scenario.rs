//! Single scenario runs and their output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{Profile, ScenarioConfig, SnapshotField, SnapshotMode};
use super::snapshot::{read_snapshot, write_snapshot};
use crate::diagnostics::{
    check_mass_decay_bound, check_uniform_decay, check_v_decay, entropy_bounded, mass_ode_residual, series_to_csv,
    BoundCheck, DiagnosticsRecord,
};
use crate::error::{Error, Result};
use crate::grid::{integrate_raw, Grid, GridShape};
use crate::model::{Field, State};
use crate::oracle::threshold_mu;
use crate::stepper::{run_until, Observer, RunOutcome};

/// Environment variable that, when set, prefixes every output directory.
pub const OUTPUT_ROOT_ENV: &str = "KSLAB_OUTPUT_ROOT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_TRIGGERED: i32 = 3;

pub fn resolve_output_dir(dir: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(dir),
        _ => dir.to_path_buf(),
    }
}

/// Samples a profile at cell centers.
pub fn sample_profile(profile: &Profile, grid: &Grid) -> Result<Field> {
    let field = match profile {
        Profile::Constant(c) => Field::constant(grid, *c),
        Profile::Gaussian { center, width, amplitude, base, mass } => {
            let center = center.clone().unwrap_or_else(|| default_center(grid.shape()));
            let mut f = Field::from_fn(grid, |x| {
                let d2: f64 = x.iter().zip(&center).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                base + amplitude * (-d2 / (2.0 * width * width)).exp()
            });
            if let Some(m) = mass {
                let total = integrate_raw(f.values(), grid);
                if total.is_nan() || total <= 0.0 {
                    return Err(Error::Precondition("cannot normalize a profile with zero integral".into()));
                }
                f.values_mut().iter_mut().for_each(|x| *x *= m / total);
            }
            f
        }
        Profile::Cosine { base, amplitude, mode } => {
            let extents = extents(grid.shape());
            let k = *mode as f64 * std::f64::consts::PI;
            Field::from_fn(grid, |x| {
                let wave: f64 = x.iter().zip(&extents).map(|(xi, li)| (k * xi / li).cos()).product();
                (base + amplitude * wave).max(0.0)
            })
        }
        Profile::File { path, field } => {
            let (u, v) = read_snapshot(path)?;
            let values = match field {
                SnapshotField::U => u,
                SnapshotField::V => v,
            };
            Field::new(grid, values)?
        }
    };
    if !field.is_finite() || !field.is_nonnegative() {
        return Err(Error::Precondition("initial data must be finite and nonnegative".into()));
    }
    Ok(field)
}

fn default_center(shape: &GridShape) -> Vec<f64> {
    match *shape {
        GridShape::Interval { length, .. } => vec![0.5 * length],
        GridShape::Rect { lx, ly, .. } => vec![0.5 * lx, 0.5 * ly],
        GridShape::Radial { .. } => vec![0.0],
    }
}

fn extents(shape: &GridShape) -> Vec<f64> {
    match *shape {
        GridShape::Interval { length, .. } => vec![length],
        GridShape::Rect { lx, ly, .. } => vec![lx, ly],
        GridShape::Radial { radius, .. } => vec![radius],
    }
}

pub fn initial_state(cfg: &ScenarioConfig, grid: &Grid) -> Result<State> {
    State::new(sample_profile(&cfg.initial_u, grid)?, sample_profile(&cfg.initial_v, grid)?, 0.0)
}

/// Runs the configured scenario without touching the filesystem (apart
/// from reading file profiles).
pub fn simulate(cfg: &ScenarioConfig, observer: &mut dyn Observer) -> Result<(Grid, RunOutcome)> {
    let grid = Grid::new(cfg.grid)?;
    let s0 = initial_state(cfg, &grid)?;
    let outcome = run_until(s0, &cfg.params, &grid, &cfg.control, cfg.sample_every, &cfg.diagnostics.lp, observer)?;
    Ok((grid, outcome))
}

#[derive(Debug, Clone)]
pub struct ScenarioSummary {
    pub outcome: RunOutcome,
    pub checks: Vec<BoundCheck>,
    pub mass_ode_residual: Option<f64>,
    pub report: String,
    pub output_dir: PathBuf,
}

impl ScenarioSummary {
    pub fn exit_code(&self) -> i32 {
        if self.outcome.report.triggered { EXIT_TRIGGERED } else { EXIT_OK }
    }
}

/// The checks that apply to a finished run: decay checks when `a = 0`,
/// uniform decay when a level and horizon are configured, entropy when a
/// cap is configured.
pub fn applicable_checks(cfg: &ScenarioConfig, grid: &Grid, series: &[DiagnosticsRecord]) -> Vec<Result<BoundCheck>> {
    let d = &cfg.diagnostics;
    let mut out = Vec::new();
    let Some(first) = series.first() else { return out };
    if cfg.params.a == 0.0 && first.mass_u > 0.0 {
        out.push(check_mass_decay_bound(series, first.mass_u, &cfg.params, grid.measure(), d.mass_tol));
        out.push(check_v_decay(series, d.v_envelope_factor));
    }
    if let (Some(level), Some(horizon)) = (d.decay_level, d.decay_horizon) {
        out.push(check_uniform_decay(series, level, horizon));
    }
    if let Some(cap) = d.entropy_cap {
        out.push(Ok(entropy_bounded(series, cap)));
    }
    out
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

struct SampleWriter<'a> {
    dir: &'a Path,
    count: usize,
    error: Option<Error>,
}

impl Observer for SampleWriter<'_> {
    fn on_sample(&mut self, _record: &DiagnosticsRecord, state: &State) {
        if self.error.is_none() {
            let path = self.dir.join(format!("snapshot_{:05}.bin", self.count));
            if let Err(e) = write_snapshot(&path, state.u.values(), state.v.values()) {
                self.error = Some(e);
            }
        }
        self.count += 1;
    }
}

/// Runs a scenario and writes `series.csv`, `report.txt`, and the requested
/// snapshots into the (root-resolved) output directory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioSummary> {
    let dir = resolve_output_dir(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut writer = SampleWriter { dir: &dir, count: 0, error: None };
    let (grid, outcome) = if cfg.output.snapshots == SnapshotMode::Samples {
        simulate(cfg, &mut writer)?
    } else {
        simulate(cfg, &mut ())?
    };
    if let Some(e) = writer.error {
        return Err(e);
    }

    write_file(&dir.join("series.csv"), series_to_csv(&outcome.series).as_bytes())?;
    if cfg.output.snapshots != SnapshotMode::None {
        write_snapshot(&dir.join("snapshot_final.bin"), outcome.state.u.values(), outcome.state.v.values())?;
    }

    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for c in applicable_checks(cfg, &grid, &outcome.series) {
        match c {
            Ok(c) => checks.push(c),
            Err(e) => notes.push(e.to_string()),
        }
    }
    let residual = mass_ode_residual(&outcome.series, &cfg.params).ok();
    let report = render_report(cfg, &outcome, &checks, &notes, residual);
    write_file(&dir.join("report.txt"), report.as_bytes())?;

    Ok(ScenarioSummary { outcome, checks, mass_ode_residual: residual, report, output_dir: dir })
}

fn render_report(
    cfg: &ScenarioConfig,
    outcome: &RunOutcome,
    checks: &[BoundCheck],
    notes: &[String],
    residual: Option<f64>,
) -> String {
    let p = &cfg.params;
    let mut r = String::new();
    let _ = writeln!(r, "grid: {:?}", cfg.grid);
    let _ = writeln!(r, "parameters: chi={} mu={} a={} epsilon={} dim={}", p.chi, p.mu, p.a, p.epsilon, p.dim);
    let _ = writeln!(
        r,
        "steps: accepted={} rejected={} t_final={:.9}",
        outcome.accepted_steps, outcome.rejected_steps, outcome.state.t
    );
    let b = &outcome.report;
    match b.cause {
        Some(cause) => {
            let _ = writeln!(r, "detector: TRIGGERED ({cause:?}) at t={:.9} sup_u={:.6e}", b.t_trigger, b.sup_u);
        }
        None => {
            let _ = writeln!(r, "detector: not triggered (sup_u at end {:.6e})", b.sup_u);
        }
    }
    if let Ok(mu_star) = threshold_mu(p.dim, p.chi, cfg.regularity_constant) {
        let side = if p.mu > mu_star { "above" } else { "not above" };
        let _ = writeln!(
            r,
            "threshold: mu*={mu_star:.6e} with C={} (mu is {side} it; C is a placeholder)",
            cfg.regularity_constant
        );
    }
    match residual {
        Some(x) => {
            let _ = writeln!(r, "mass ODE residual: {x:.6e}");
        }
        None => {
            let _ = writeln!(r, "mass ODE residual: n/a");
        }
    }
    let _ = writeln!(r, "checks:");
    if checks.is_empty() && notes.is_empty() {
        let _ = writeln!(r, "  (none applicable)");
    }
    for c in checks {
        let _ = writeln!(r, "  {c}");
    }
    for n in notes {
        let _ = writeln!(r, "  skipped: {n}");
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn config(extra: &str, dir: &Path) -> ScenarioConfig {
        let text = format!(
            "[grid]\nkind = interval\ncells = 16\n[model]\nchi = 1\nmu = 1\n[initial_u]\nvalue = 1\n\
             [time]\nt_end = 0.5\ndt_max = 0.01\nsample_every = 0.1\n[output]\ndir = {}\n{extra}",
            dir.display()
        );
        parse_config(&text).unwrap()
    }

    #[test]
    fn homogeneous_decay_run_writes_files() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = config("snapshots = samples\n", tmp.path());
        let s = run_scenario(&cfg).unwrap();
        assert_eq!(s.exit_code(), EXIT_OK);
        let csv = fs::read_to_string(tmp.path().join("series.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.starts_with("t,mass_u,mass_v,l2_v,l2_grad_v,sup_u,sup_v,entropy_u,lp_u:p=2\n"));
        assert!(tmp.path().join("snapshot_00005.bin").exists());
        let (u, _) = read_snapshot(&tmp.path().join("snapshot_final.bin")).unwrap();
        assert_eq!(u, s.outcome.state.u.values());
        let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
        assert!(report.contains("mass_decay_bound     PASS"), "{report}");
        assert!(report.contains("v_decay_envelope     PASS"), "{report}");
        assert!(s.checks.iter().all(|c| c.satisfied));
    }

    #[test]
    fn zero_ceiling_triggers_at_start() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config("", tmp.path());
        cfg.control.ceiling = 0.0;
        let s = run_scenario(&cfg).unwrap();
        assert_eq!(s.exit_code(), EXIT_TRIGGERED);
        assert_eq!(s.outcome.report.t_trigger, 0.0);
        assert!(s.report.contains("TRIGGERED"));
    }

    #[test]
    fn unwritable_output_is_io_error() {
        let tmp = tempfile::tempdir().unwrap();
        let blocker = tmp.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let cfg = config("", &blocker.join("sub"));
        assert!(matches!(run_scenario(&cfg), Err(Error::Io { .. })));
    }

    #[test]
    fn profiles() {
        let g = Grid::interval(64, 2.0).unwrap();
        let gauss = Profile::Gaussian { center: None, width: 0.1, amplitude: 5.0, base: 0.0, mass: Some(1.0) };
        let f = sample_profile(&gauss, &g).unwrap();
        assert!((integrate_raw(f.values(), &g) - 1.0).abs() < 1e-14);
        assert_eq!(f.values()[31], f.values()[32]);

        let cos = sample_profile(&Profile::Cosine { base: 1.0, amplitude: 1.0, mode: 1 }, &g).unwrap();
        assert!((integrate_raw(cos.values(), &g) - 2.0).abs() < 1e-12);
        assert!(cos.is_nonnegative());

        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.bin");
        write_snapshot(&path, &[1.0; 4], &[2.0; 4]).unwrap();
        let small = Grid::interval(4, 1.0).unwrap();
        let file = Profile::File { path: path.clone(), field: SnapshotField::V };
        assert_eq!(sample_profile(&file, &small).unwrap().values(), &[2.0; 4]);
        assert!(matches!(sample_profile(&file, &g), Err(Error::GridMismatch { .. })));
    }
}
