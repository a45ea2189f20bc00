//! Model parameters, fields, and the pointwise nonlinearities of the
//! Keller-Segel system with logistic source
//!
//! ```text
//! u_t = Δu − χ ∇·(u F_ε(u) ∇v) + a u − μ u²
//! v_t = Δv − v + u
//! ```
//!
//! with homogeneous Neumann data. `F_ε(s) = 1/(1 + εs)` regularizes the
//! drift; `ε = 0` recovers the unregularized system.

use crate::error::{require, Result};
use crate::grid::{Grid, GridShape};

/// Physical constants of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Chemotactic sensitivity χ.
    pub chi: f64,
    /// Logistic damping μ.
    pub mu: f64,
    /// Growth rate `a`; any real value, including zero.
    pub a: f64,
    /// Flux regularization ε; zero disables it.
    pub epsilon: f64,
    /// Spatial dimension N.
    pub dim: usize,
}

impl Parameters {
    pub fn new(chi: f64, mu: f64, a: f64, epsilon: f64, dim: usize) -> Result<Self> {
        require(mu > 0.0 && mu.is_finite(), || format!("mu must be finite and > 0, got {mu}"))?;
        Self::exploratory(chi, mu, a, epsilon, dim)
    }

    /// Like [`Parameters::new`] but admits `mu = 0`, which lies outside the
    /// regime where boundedness is known. Only parameter sweeps use this.
    pub fn exploratory(chi: f64, mu: f64, a: f64, epsilon: f64, dim: usize) -> Result<Self> {
        require(mu >= 0.0 && mu.is_finite(), || format!("mu must be finite and >= 0, got {mu}"))?;
        require(chi >= 0.0 && chi.is_finite(), || format!("chi must be finite and >= 0, got {chi}"))?;
        require(a.is_finite(), || format!("a must be finite, got {a}"))?;
        require(epsilon >= 0.0 && epsilon.is_finite(), || {
            format!("epsilon must be finite and >= 0, got {epsilon}")
        })?;
        require(dim >= 1, || "dim must be >= 1".to_string())?;
        Ok(Self { chi, mu, a, epsilon, dim })
    }

    /// Spatially homogeneous equilibrium `a/μ` of the density (zero when `a ≤ 0`).
    pub fn carrying_capacity(&self) -> f64 {
        if self.a > 0.0 && self.mu > 0.0 {
            self.a / self.mu
        } else {
            0.0
        }
    }
}

/// Cell-centered samples of a scalar on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    shape: GridShape,
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self { values, shape: *grid.shape() })
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self { values: vec![value; grid.len()], shape: *grid.shape() }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.center(i))).collect();
        Self { values, shape: *grid.shape() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lives_on(&self, grid: &Grid) -> bool {
        self.shape == *grid.shape()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&x| x >= 0.0)
    }
}

/// Density `u`, signal `v`, and the time they are valid at.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl State {
    pub fn new(u: Field, v: Field, t: f64) -> Result<Self> {
        require(u.shape() == v.shape(), || "u and v must share one grid".to_string())?;
        require(t >= 0.0 && t.is_finite(), || format!("time must be finite and >= 0, got {t}"))?;
        Ok(Self { u, v, t })
    }
}

/// `F_ε(s) = 1/(1 + εs)`.
pub fn f_epsilon(s: f64, epsilon: f64) -> Result<f64> {
    require(s >= 0.0, || format!("f_epsilon needs s >= 0, got {s}"))?;
    require(epsilon >= 0.0, || format!("f_epsilon needs epsilon >= 0, got {epsilon}"))?;
    Ok(regularizer(s, epsilon))
}

/// `u·F_ε(u)`: the density carried by the chemotactic drift. Saturates at `1/ε`.
pub fn flux_coefficient(u: f64, epsilon: f64) -> Result<f64> {
    Ok(u * f_epsilon(u, epsilon)?)
}

/// `a·u − μ·u²`.
pub fn logistic_source(u: f64, a: f64, mu: f64) -> Result<f64> {
    require(u >= 0.0, || format!("logistic_source needs u >= 0, got {u}"))?;
    require(mu >= 0.0, || format!("logistic_source needs mu >= 0, got {mu}"))?;
    Ok(logistic(u, a, mu))
}

// Unchecked kernels for the hot loops; callers validate once per field.
#[inline]
pub(crate) fn regularizer(s: f64, epsilon: f64) -> f64 {
    1.0 / (1.0 + epsilon * s)
}

#[inline]
pub(crate) fn carried_density(u: f64, epsilon: f64) -> f64 {
    u * regularizer(u, epsilon)
}

#[inline]
pub(crate) fn logistic(u: f64, a: f64, mu: f64) -> f64 {
    a * u - mu * u * u
}
