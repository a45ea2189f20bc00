//! Scenario configuration files.
//!
//! The format is line oriented:
//!
//! ```text
//! # comment
//! [section]
//! key = value        # trailing comments are allowed
//! list = 0.1, 1, 10
//! ```
//!
//! Every problem found is reported with its line number; parsing does not
//! stop at the first error.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{ConfigError, Error, Result};
use crate::grid::GridShape;
use crate::model::Parameters;
use crate::stepper::{StepControl, DEFAULT_CEILING, DEFAULT_CFL_SAFETY, DEFAULT_DT_FLOOR, DEFAULT_POSITIVITY_RETRIES};

/// Default stand-in for the maximal-regularity constant in the threshold formula.
pub const DEFAULT_REGULARITY_CONSTANT: f64 = 1.0;
pub const DEFAULT_MASS_TOL: f64 = 1e-2;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.1;
pub const DEFAULT_SWEEP_CAP: usize = 256;

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["kind", "cells", "cells_x", "cells_y", "length", "length_x", "length_y", "radius", "radial_dim"]),
    ("model", &["chi", "mu", "a", "epsilon", "regularity_constant"]),
    ("initial_u", PROFILE_KEYS),
    ("initial_v", PROFILE_KEYS),
    ("time", &["t_end", "dt_max", "cfl_safety", "positivity_retries", "sample_every", "ceiling", "dt_floor"]),
    ("output", &["dir", "snapshots"]),
    ("diagnostics", &["lp", "mass_tol", "v_envelope_factor", "decay_level", "decay_horizon", "entropy_cap"]),
    ("sweep", &["mu", "chi", "epsilon", "dim", "max_runs", "transient_fraction"]),
    ("eps_study", &["epsilons"]),
];

const PROFILE_KEYS: &[&str] =
    &["profile", "value", "base", "amplitude", "width", "center", "mode", "mass", "path", "field"];

/// Named nonnegative initial profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `base + amplitude · exp(−|x − center|²/(2 width²))`, optionally rescaled to total `mass`.
    Gaussian { center: Option<Vec<f64>>, width: f64, amplitude: f64, base: f64, mass: Option<f64> },
    /// `base + amplitude · Π cos(mode π x_i / L_i)`; Neumann-compatible.
    Cosine { base: f64, amplitude: f64, mode: u32 },
    /// One array of a snapshot file.
    File { path: PathBuf, field: SnapshotField },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotField {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotMode {
    None,
    Final,
    Samples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshots: SnapshotMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    /// Exponents `p` for which `∫u^p` is recorded; always contains 2.
    pub lp: Vec<f64>,
    pub mass_tol: f64,
    pub v_envelope_factor: f64,
    pub decay_level: Option<f64>,
    pub decay_horizon: Option<f64>,
    pub entropy_cap: Option<f64>,
}

/// Parameter lists for a sweep. `None` means "use the base value".
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub mu: Option<Vec<f64>>,
    pub chi: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub dim: Option<Vec<usize>>,
    pub max_runs: usize,
    pub transient_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub grid: GridShape,
    pub params: Parameters,
    pub regularity_constant: f64,
    pub initial_u: Profile,
    pub initial_v: Profile,
    pub control: StepControl,
    pub sample_every: f64,
    pub output: OutputConfig,
    pub diagnostics: DiagnosticsConfig,
    pub sweep: SweepSettings,
    pub eps_study: Option<Vec<f64>>,
}

struct Entry {
    value: String,
    line: usize,
}

struct Reader {
    entries: BTreeMap<(String, String), Entry>,
    errors: Vec<ConfigError>,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut reader = Reader::tokenize(text);
    let cfg = reader.build();
    if reader.errors.is_empty() {
        Ok(cfg.expect("a config is built whenever no error was recorded"))
    } else {
        reader.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(Error::Config(reader.errors))
    }
}

impl Reader {
    fn tokenize(text: &str) -> Self {
        let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
        let mut errors = Vec::new();
        let mut section: Option<&'static str> = None;
        let mut skipping = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                section = SECTIONS.iter().find(|(s, _)| *s == name).map(|(s, _)| *s);
                skipping = section.is_none();
                if skipping {
                    let known: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
                    errors.push(ConfigError::at(line, format!("unknown section [{name}] (known: {})", known.join(", "))));
                }
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                errors.push(ConfigError::at(line, format!("expected `key = value`, got `{content}`")));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section else {
                // keys under an unknown section were already reported via the header
                if !skipping {
                    errors.push(ConfigError::at(line, format!("key `{key}` appears before any section")));
                }
                continue;
            };
            let keys = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !keys.contains(&key) {
                errors.push(ConfigError::at(line, format!("unknown key `{key}` in [{sec}] (known: {})", keys.join(", "))));
                continue;
            }
            let slot = (sec.to_string(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                errors.push(ConfigError::at(
                    line,
                    format!("duplicate key `{key}` in [{sec}] (lines {} and {line})", prev.line),
                ));
                continue;
            }
            entries.insert(slot, Entry { value: value.to_string(), line });
        }
        Self { entries, errors }
    }

    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn has_section(&self, sec: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == sec)
    }

    fn fail(&mut self, sec: &str, key: &str, msg: impl Into<String>) {
        let line = self.get(sec, key).map(|e| e.line);
        self.errors.push(ConfigError { line, message: format!("[{sec}] {key}: {}", msg.into()) });
    }

    fn text(&self, sec: &str, key: &str) -> Option<String> {
        self.get(sec, key).map(|e| e.value.clone())
    }

    fn number(&mut self, sec: &str, key: &str) -> Option<f64> {
        let raw = self.text(sec, key)?;
        match raw.parse::<f64>() {
            Ok(x) if x.is_finite() || raw.eq_ignore_ascii_case("inf") => Some(x),
            _ => {
                self.fail(sec, key, format!("expected a number, got `{raw}`"));
                None
            }
        }
    }

    /// Reads a number, checks it, and falls back to `default` when absent.
    fn checked(&mut self, sec: &str, key: &str, default: Option<f64>, rule: (&str, fn(f64) -> bool)) -> Option<f64> {
        match self.number(sec, key) {
            Some(x) if rule.1(x) => Some(x),
            Some(x) => {
                self.fail(sec, key, format!("{} required, got {x}", rule.0));
                None
            }
            None if self.get(sec, key).is_some() => None,
            None => {
                if default.is_none() {
                    self.errors.push(ConfigError::global(format!("[{sec}] {key}: missing required field")));
                }
                default
            }
        }
    }

    fn integer(&mut self, sec: &str, key: &str, min: usize) -> Option<usize> {
        let raw = self.text(sec, key)?;
        match raw.parse::<usize>() {
            Ok(n) if n >= min => Some(n),
            _ => {
                self.fail(sec, key, format!("expected an integer >= {min}, got `{raw}`"));
                None
            }
        }
    }

    fn list<T: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Option<Vec<T>> {
        let raw = self.text(sec, key)?;
        let mut out = Vec::new();
        for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse::<T>() {
                Ok(x) => out.push(x),
                Err(_) => {
                    self.fail(sec, key, format!("cannot parse list element `{item}`"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn build(&mut self) -> Option<ScenarioConfig> {
        let grid = self.grid();
        let (params, regularity_constant) = self.model(grid.as_ref().map(GridShape::dim));
        let initial_u = self.profile("initial_u", grid.as_ref(), None);
        let initial_v = self.profile("initial_v", grid.as_ref(), Some(Profile::Constant(0.0)));
        let (control, sample_every) = self.time();
        let output = self.output();
        let diagnostics = self.diagnostics();
        let sweep = self.sweep();
        let eps_study = self.eps_study();
        Some(ScenarioConfig {
            grid: grid?,
            params: params?,
            regularity_constant: regularity_constant?,
            initial_u: initial_u?,
            initial_v: initial_v?,
            control: control?,
            sample_every: sample_every?,
            output: output?,
            diagnostics: diagnostics?,
            sweep: sweep?,
            eps_study: eps_study?,
        })
    }

    fn grid(&mut self) -> Option<GridShape> {
        const POSITIVE: (&str, fn(f64) -> bool) = ("a value > 0", |x| x > 0.0 && x.is_finite());
        let Some(kind) = self.text("grid", "kind") else {
            self.errors.push(ConfigError::global("[grid] kind: missing required field"));
            return None;
        };
        let cells = |r: &mut Self, key: &str| match r.get("grid", key) {
            Some(_) => r.integer("grid", key, crate::grid::MIN_CELLS),
            None => {
                r.errors.push(ConfigError::global(format!("[grid] {key}: missing required field")));
                None
            }
        };
        match kind.as_str() {
            "interval" => {
                let cells = cells(self, "cells");
                let length = self.checked("grid", "length", Some(1.0), POSITIVE);
                Some(GridShape::Interval { cells: cells?, length: length? })
            }
            "rect" => {
                let nx = cells(self, "cells_x");
                let ny = cells(self, "cells_y");
                let lx = self.checked("grid", "length_x", Some(1.0), POSITIVE);
                let ly = self.checked("grid", "length_y", Some(1.0), POSITIVE);
                Some(GridShape::Rect { nx: nx?, ny: ny?, lx: lx?, ly: ly? })
            }
            "radial" => {
                let cells = cells(self, "cells");
                let radius = self.checked("grid", "radius", Some(1.0), POSITIVE);
                let dim = match self.get("grid", "radial_dim") {
                    Some(_) => self.integer("grid", "radial_dim", 1),
                    None => {
                        self.errors.push(ConfigError::global("[grid] radial_dim: missing required field"));
                        None
                    }
                };
                Some(GridShape::Radial { cells: cells?, radius: radius?, dim: dim? })
            }
            other => {
                self.fail("grid", "kind", format!("expected interval, rect, or radial, got `{other}`"));
                None
            }
        }
    }

    fn model(&mut self, dim: Option<usize>) -> (Option<Parameters>, Option<f64>) {
        let chi = self.checked("model", "chi", None, ("chi >= 0", |x| x >= 0.0 && x.is_finite()));
        let mu = self.checked("model", "mu", None, ("mu > 0", |x| x > 0.0 && x.is_finite()));
        let a = self.checked("model", "a", Some(0.0), ("a finite value", f64::is_finite));
        let eps = self.checked("model", "epsilon", Some(0.0), ("epsilon >= 0", |x| x >= 0.0 && x.is_finite()));
        let c = self.checked(
            "model",
            "regularity_constant",
            Some(DEFAULT_REGULARITY_CONSTANT),
            ("a value > 0", |x| x > 0.0 && x.is_finite()),
        );
        let params = match (chi, mu, a, eps, dim) {
            (Some(chi), Some(mu), Some(a), Some(eps), Some(dim)) => Parameters::new(chi, mu, a, eps, dim).ok(),
            _ => None,
        };
        (params, c)
    }

    fn profile(&mut self, sec: &str, grid: Option<&GridShape>, default: Option<Profile>) -> Option<Profile> {
        const NONNEG: (&str, fn(f64) -> bool) = ("a value >= 0", |x| x >= 0.0 && x.is_finite());
        const POSITIVE: (&str, fn(f64) -> bool) = ("a value > 0", |x| x > 0.0 && x.is_finite());
        if !self.has_section(sec) {
            if default.is_none() {
                self.errors.push(ConfigError::global(format!("[{sec}] section is required")));
            }
            return default;
        }
        let kind = self.text(sec, "profile").unwrap_or_else(|| "constant".to_string());
        match kind.as_str() {
            "constant" => Some(Profile::Constant(self.checked(sec, "value", None, NONNEG)?)),
            "gaussian" => {
                let width = self.checked(sec, "width", None, POSITIVE);
                let amplitude = self.checked(sec, "amplitude", Some(1.0), NONNEG);
                let base = self.checked(sec, "base", Some(0.0), NONNEG);
                let mass = match self.get(sec, "mass") {
                    Some(_) => Some(self.checked(sec, "mass", None, POSITIVE)?),
                    None => None,
                };
                let center = match self.list::<f64>(sec, "center") {
                    Some(c) => {
                        let want = match grid {
                            Some(GridShape::Rect { .. }) => 2,
                            _ => 1,
                        };
                        if c.len() != want {
                            self.fail(sec, "center", format!("expected {want} coordinate(s), got {}", c.len()));
                            return None;
                        }
                        Some(c)
                    }
                    None if self.get(sec, "center").is_some() => return None,
                    None => None,
                };
                Some(Profile::Gaussian { center, width: width?, amplitude: amplitude?, base: base?, mass })
            }
            "cosine" => {
                let base = self.checked(sec, "base", Some(1.0), NONNEG);
                let amplitude = self.checked(sec, "amplitude", None, ("a finite value", f64::is_finite));
                let mode = match self.get(sec, "mode") {
                    Some(_) => self.integer(sec, "mode", 0).map(|m| m as u32),
                    None => Some(1),
                };
                if let (Some(b), Some(amp)) = (base, amplitude) {
                    if amp.abs() > b {
                        self.fail(sec, "amplitude", format!("|amplitude| must not exceed base {b} (nonnegative data)"));
                        return None;
                    }
                }
                Some(Profile::Cosine { base: base?, amplitude: amplitude?, mode: mode? })
            }
            "file" => {
                let path = self.text(sec, "path");
                if path.is_none() {
                    self.errors.push(ConfigError::global(format!("[{sec}] path: missing required field")));
                }
                let field = match self.text(sec, "field").as_deref() {
                    None | Some("u") => Some(SnapshotField::U),
                    Some("v") => Some(SnapshotField::V),
                    Some(other) => {
                        self.fail(sec, "field", format!("expected u or v, got `{other}`"));
                        None
                    }
                };
                Some(Profile::File { path: PathBuf::from(path?), field: field? })
            }
            other => {
                self.fail(sec, "profile", format!("expected constant, gaussian, cosine, or file, got `{other}`"));
                None
            }
        }
    }

    fn time(&mut self) -> (Option<StepControl>, Option<f64>) {
        const POSITIVE: (&str, fn(f64) -> bool) = ("a value > 0", |x| x > 0.0 && x.is_finite());
        let t_end = self.checked("time", "t_end", Some(1.0), POSITIVE);
        let dt_max = self.checked("time", "dt_max", Some(1e-2), POSITIVE);
        let cfl = self.checked("time", "cfl_safety", Some(DEFAULT_CFL_SAFETY), ("a value in (0, 1]", |x| {
            x > 0.0 && x <= 1.0
        }));
        let retries = match self.get("time", "positivity_retries") {
            Some(_) => self.integer("time", "positivity_retries", 0),
            None => Some(DEFAULT_POSITIVITY_RETRIES),
        };
        let sample_every = self.checked("time", "sample_every", Some(0.1), POSITIVE);
        let ceiling = self.checked("time", "ceiling", Some(DEFAULT_CEILING), ("a value >= 0", |x| x >= 0.0));
        let dt_floor = self.checked("time", "dt_floor", Some(DEFAULT_DT_FLOOR), POSITIVE);
        let control = match (t_end, dt_max, cfl, retries, ceiling, dt_floor) {
            (Some(t_end), Some(dt_max), Some(cfl_safety), Some(positivity_retries), Some(ceiling), Some(dt_floor)) => {
                Some(StepControl { dt: dt_max, dt_max, cfl_safety, positivity_retries, t_end, ceiling, dt_floor })
            }
            _ => None,
        };
        (control, sample_every)
    }

    fn output(&mut self) -> Option<OutputConfig> {
        let dir = PathBuf::from(self.text("output", "dir").unwrap_or_else(|| "output".to_string()));
        let snapshots = match self.text("output", "snapshots").as_deref() {
            None | Some("none") => SnapshotMode::None,
            Some("final") => SnapshotMode::Final,
            Some("samples") => SnapshotMode::Samples,
            Some(other) => {
                self.fail("output", "snapshots", format!("expected none, final, or samples, got `{other}`"));
                return None;
            }
        };
        Some(OutputConfig { dir, snapshots })
    }

    fn diagnostics(&mut self) -> Option<DiagnosticsConfig> {
        const POSITIVE: (&str, fn(f64) -> bool) = ("a value > 0", |x| x > 0.0);
        let mut lp = match self.list::<f64>("diagnostics", "lp") {
            Some(v) => v,
            None if self.get("diagnostics", "lp").is_some() => return None,
            None => Vec::new(),
        };
        if let Some(bad) = lp.iter().find(|p| p.is_nan() || **p < 1.0) {
            let msg = format!("exponents must be >= 1, got {bad}");
            self.fail("diagnostics", "lp", msg);
            return None;
        }
        if !lp.contains(&2.0) {
            lp.insert(0, 2.0);
        }
        let mass_tol = self.checked("diagnostics", "mass_tol", Some(DEFAULT_MASS_TOL), ("a value >= 0", |x| x >= 0.0));
        let factor = self.checked("diagnostics", "v_envelope_factor", Some(1.0), POSITIVE);
        let optional = |r: &mut Self, key: &str, rule| match r.get("diagnostics", key) {
            Some(_) => r.checked("diagnostics", key, None, rule).map(Some),
            None => Some(None),
        };
        let decay_level = optional(self, "decay_level", POSITIVE);
        let decay_horizon = optional(self, "decay_horizon", ("a value >= 0", |x| x >= 0.0));
        let entropy_cap = optional(self, "entropy_cap", ("a number", |x: f64| !x.is_nan()));
        Some(DiagnosticsConfig {
            lp,
            mass_tol: mass_tol?,
            v_envelope_factor: factor?,
            decay_level: decay_level?,
            decay_horizon: decay_horizon?,
            entropy_cap: entropy_cap?,
        })
    }

    fn sweep(&mut self) -> Option<SweepSettings> {
        let mut ok = true;
        let mut floats = |r: &mut Self, key: &str, rule: fn(f64) -> bool, what: &str| {
            let present = r.get("sweep", key).is_some();
            match r.list::<f64>("sweep", key) {
                Some(v) if v.iter().all(|x| rule(*x)) => Some(v),
                Some(_) => {
                    r.fail("sweep", key, format!("every value must be {what}"));
                    ok = false;
                    None
                }
                None => {
                    ok &= !present;
                    None
                }
            }
        };
        let mu = floats(self, "mu", |x| x >= 0.0 && x.is_finite(), ">= 0");
        let chi = floats(self, "chi", |x| x >= 0.0 && x.is_finite(), ">= 0");
        let epsilon = floats(self, "epsilon", |x| x >= 0.0 && x.is_finite(), ">= 0");
        let dim = match self.list::<usize>("sweep", "dim") {
            Some(d) if d.iter().all(|&n| n >= 1) => Some(d),
            Some(_) => {
                self.fail("sweep", "dim", "every value must be >= 1");
                ok = false;
                None
            }
            None => {
                ok &= self.get("sweep", "dim").is_none();
                None
            }
        };
        let max_runs = match self.get("sweep", "max_runs") {
            Some(_) => self.integer("sweep", "max_runs", 1),
            None => Some(DEFAULT_SWEEP_CAP),
        };
        let transient = self.checked(
            "sweep",
            "transient_fraction",
            Some(DEFAULT_TRANSIENT_FRACTION),
            ("a value in [0, 1)", |x| (0.0..1.0).contains(&x)),
        );
        if !ok {
            return None;
        }
        Some(SweepSettings { mu, chi, epsilon, dim, max_runs: max_runs?, transient_fraction: transient? })
    }

    fn eps_study(&mut self) -> Option<Option<Vec<f64>>> {
        match self.list::<f64>("eps_study", "epsilons") {
            Some(v) if v.iter().all(|x| *x >= 0.0 && x.is_finite()) => Some(Some(v)),
            Some(_) => {
                self.fail("eps_study", "epsilons", "every value must be >= 0");
                None
            }
            None if self.get("eps_study", "epsilons").is_some() => None,
            None => Some(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[grid]
kind = interval
cells = 64

[model]
mu = 1
chi = 1

[initial_u]
profile = constant
value = 1
";

    fn errors(text: &str) -> Vec<ConfigError> {
        match parse_config(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.grid, GridShape::Interval { cells: 64, length: 1.0 });
        assert_eq!(cfg.params, Parameters::new(1.0, 1.0, 0.0, 0.0, 1).unwrap());
        assert_eq!(cfg.initial_u, Profile::Constant(1.0));
        assert_eq!(cfg.initial_v, Profile::Constant(0.0));
        assert_eq!(cfg.control.ceiling, 1e8);
        assert_eq!(cfg.control.dt_floor, 1e-12);
        assert_eq!(cfg.control.positivity_retries, 20);
        assert_eq!(cfg.diagnostics.lp, vec![2.0]);
        assert_eq!(cfg.diagnostics.mass_tol, 1e-2);
        assert_eq!(cfg.regularity_constant, 1.0);
        assert_eq!(cfg.output.snapshots, SnapshotMode::None);
        assert_eq!(cfg.sweep.max_runs, DEFAULT_SWEEP_CAP);
        assert!(cfg.sweep.mu.is_none());
        assert!(cfg.eps_study.is_none());
    }

    #[test]
    fn negative_mu_is_rejected_with_line() {
        let text = MINIMAL.replace("mu = 1", "mu = -1");
        let errs = errors(&text);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(6));
        assert!(errs[0].message.contains("mu"));
        assert!(errs[0].message.contains("mu > 0"));
    }

    #[test]
    fn duplicate_key_reports_both_lines() {
        let text = format!("{MINIMAL}[model]\nchi = 2\n");
        let errs = errors(&text);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(13));
        assert!(errs[0].message.contains("lines 7 and 13"), "{}", errs[0].message);
    }

    #[test]
    fn unknown_keys_and_sections() {
        let text = format!("{MINIMAL}[model]\ngamma = 3\n[extras]\nfoo = 1\n");
        let errs = errors(&text);
        assert_eq!(errs.len(), 2);
        assert!(errs[0].message.contains("unknown key `gamma`"));
        assert!(errs[1].message.contains("unknown section [extras]"));
        assert_eq!(errs[1].line, Some(14));
    }

    #[test]
    fn missing_required_fields() {
        let errs = errors("[grid]\nkind = interval\n[initial_u]\nvalue = 1\n");
        let text: Vec<String> = errs.iter().map(ToString::to_string).collect();
        assert!(text.iter().any(|m| m.contains("[grid] cells: missing")));
        assert!(text.iter().any(|m| m.contains("[model] mu: missing")));
        assert!(text.iter().any(|m| m.contains("[model] chi: missing")));
    }

    #[test]
    fn full_config_round_trip() {
        let text = "\
# 2D run
[grid]
kind = rect
cells_x = 16
cells_y = 8     # coarse in y
length_x = 2
[model]
chi = 3
mu = 0.5
a = -1
epsilon = 0.01
[initial_u]
profile = gaussian
center = 1.0, 0.5
width = 0.2
amplitude = 4
mass = 1
[initial_v]
profile = cosine
base = 1
amplitude = 0.5
mode = 2
[time]
t_end = 2
dt_max = 0.01
sample_every = 0.5
ceiling = 0
[output]
dir = runs/a
snapshots = final
[diagnostics]
lp = 3, 4
entropy_cap = inf
[sweep]
mu = 0, 1
chi =
[eps_study]
epsilons = 0.1, 0.01, 0.001
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.grid, GridShape::Rect { nx: 16, ny: 8, lx: 2.0, ly: 1.0 });
        assert_eq!(cfg.params.dim, 2);
        assert_eq!(cfg.params.a, -1.0);
        assert!(matches!(cfg.initial_u, Profile::Gaussian { mass: Some(m), .. } if m == 1.0));
        assert_eq!(cfg.initial_v, Profile::Cosine { base: 1.0, amplitude: 0.5, mode: 2 });
        assert_eq!(cfg.control.ceiling, 0.0);
        assert_eq!(cfg.diagnostics.lp, vec![2.0, 3.0, 4.0]);
        assert_eq!(cfg.diagnostics.entropy_cap, Some(f64::INFINITY));
        assert_eq!(cfg.sweep.mu, Some(vec![0.0, 1.0]));
        assert_eq!(cfg.sweep.chi, Some(vec![]));
        assert_eq!(cfg.eps_study, Some(vec![0.1, 0.01, 0.001]));
        assert_eq!(cfg.output.dir, PathBuf::from("runs/a"));
    }

    #[test]
    fn cosine_must_stay_nonnegative() {
        let text = MINIMAL.replace("profile = constant\nvalue = 1", "profile = cosine\nbase = 1\namplitude = 2");
        let errs = errors(&text);
        assert!(errs[0].message.contains("amplitude"));
    }

    #[test]
    fn malformed_lines() {
        let errs = errors(&format!("{MINIMAL}[time]\nt_end 3\nsample_every = soon\n"));
        assert_eq!(errs.len(), 2);
        assert!(errs[0].message.contains("expected `key = value`"));
        assert!(errs[1].message.contains("expected a number"));
    }
}
