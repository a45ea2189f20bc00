//! Cell-centered finite-volume grids and the Neumann-boundary operators
//! built on them.
//!
//! Every operator is written in flux form: a face carries `area · flux`
//! from its lower cell to its upper cell and cell values are divided by the
//! cell volume. Boundary faces carry nothing, so quadrature-weighted sums of
//! the Laplacian and of the chemotactic divergence telescope to zero.

use std::f64::consts::PI;

use crate::error::{require, Error, Result};
use crate::model::{carried_density, Field};

pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Interval1D,
    Rect2D,
    RadialN,
}

/// Geometry of a grid; two fields live on the same grid iff their shapes are equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridShape {
    /// `[0, length]`.
    Interval { cells: usize, length: f64 },
    /// `[0, lx] × [0, ly]`, cells stored row-major with x fastest.
    Rect { nx: usize, ny: usize, lx: f64, ly: f64 },
    /// The ball of radius `radius` in `dim` dimensions, for radially symmetric data.
    Radial { cells: usize, radius: f64, dim: usize },
}

impl GridShape {
    pub fn kind(&self) -> GridKind {
        match self {
            GridShape::Interval { .. } => GridKind::Interval1D,
            GridShape::Rect { .. } => GridKind::Rect2D,
            GridShape::Radial { .. } => GridKind::RadialN,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            GridShape::Interval { cells, .. } | GridShape::Radial { cells, .. } => cells,
            GridShape::Rect { nx, ny, .. } => nx * ny,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spatial dimension of the physical domain.
    pub fn dim(&self) -> usize {
        match *self {
            GridShape::Interval { .. } => 1,
            GridShape::Rect { .. } => 2,
            GridShape::Radial { dim, .. } => dim,
        }
    }
}

/// Interior faces along one axis, stored as flat arrays.
#[derive(Debug, Clone)]
struct AxisFaces {
    h: f64,
    /// Total face slots including boundary faces.
    slots: usize,
    slot: Vec<usize>,
    lo: Vec<usize>,
    hi: Vec<usize>,
    area: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Grid {
    shape: GridShape,
    quad_weights: Vec<f64>,
    axes: Vec<AxisFaces>,
}

/// Face-centered values, one array per axis. Boundary faces are included
/// and hold zero for any Neumann quantity.
///
/// Layout: 1D and radial grids have `cells + 1` faces, face `k` sitting
/// between cells `k - 1` and `k`. On a rectangle the x-faces are indexed
/// `j * (nx + 1) + k` and the y-faces `k * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceValues {
    pub axes: Vec<Vec<f64>>,
}

/// Surface measure of the unit sphere in `dim` dimensions (2 for `dim = 1`).
pub fn unit_sphere_measure(dim: usize) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => 2.0 * PI * unit_sphere_measure(n - 2) / (n - 2) as f64,
    }
}

impl Grid {
    pub fn interval(cells: usize, length: f64) -> Result<Self> {
        Self::new(GridShape::Interval { cells, length })
    }

    pub fn rect(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(GridShape::Rect { nx, ny, lx, ly })
    }

    pub fn radial(cells: usize, radius: f64, dim: usize) -> Result<Self> {
        Self::new(GridShape::Radial { cells, radius, dim })
    }

    pub fn new(shape: GridShape) -> Result<Self> {
        let extent_ok = |x: f64| x > 0.0 && x.is_finite();
        match shape {
            GridShape::Interval { cells, length } => {
                require(cells >= MIN_CELLS, || format!("need at least {MIN_CELLS} cells, got {cells}"))?;
                require(extent_ok(length), || format!("length must be > 0, got {length}"))?;
                let h = length / cells as f64;
                Ok(Self {
                    shape,
                    quad_weights: vec![h; cells],
                    axes: vec![line_faces(cells, h, |_| 1.0)],
                })
            }
            GridShape::Rect { nx, ny, lx, ly } => {
                require(nx >= MIN_CELLS && ny >= MIN_CELLS, || {
                    format!("need at least {MIN_CELLS} cells per axis, got {nx}x{ny}")
                })?;
                require(extent_ok(lx) && extent_ok(ly), || format!("extents must be > 0, got {lx}x{ly}"))?;
                let (hx, hy) = (lx / nx as f64, ly / ny as f64);
                let mut x = AxisFaces::empty(hx, (nx + 1) * ny);
                for j in 0..ny {
                    for k in 1..nx {
                        x.push(j * (nx + 1) + k, j * nx + k - 1, j * nx + k, hy);
                    }
                }
                let mut y = AxisFaces::empty(hy, nx * (ny + 1));
                for k in 1..ny {
                    for i in 0..nx {
                        y.push(k * nx + i, (k - 1) * nx + i, k * nx + i, hx);
                    }
                }
                Ok(Self { shape, quad_weights: vec![hx * hy; nx * ny], axes: vec![x, y] })
            }
            GridShape::Radial { cells, radius, dim } => {
                require(cells >= MIN_CELLS, || format!("need at least {MIN_CELLS} cells, got {cells}"))?;
                require(extent_ok(radius), || format!("radius must be > 0, got {radius}"))?;
                require(dim >= 1, || "radial dimension must be >= 1".to_string())?;
                let h = radius / cells as f64;
                let omega = unit_sphere_measure(dim);
                let n = dim as i32;
                let shell = |k: usize| omega * (k as f64 * h).powi(n) / dim as f64;
                let quad_weights = (0..cells).map(|i| shell(i + 1) - shell(i)).collect();
                let faces = line_faces(cells, h, |k| omega * (k as f64 * h).powi(n - 1));
                Ok(Self { shape, quad_weights, axes: vec![faces] })
            }
        }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn kind(&self) -> GridKind {
        self.shape.kind()
    }

    pub fn len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// `|Ω|`, computed in closed form.
    pub fn measure(&self) -> f64 {
        match self.shape {
            GridShape::Interval { length, .. } => length,
            GridShape::Rect { lx, ly, .. } => lx * ly,
            GridShape::Radial { radius, dim, .. } => {
                unit_sphere_measure(dim) * radius.powi(dim as i32) / dim as f64
            }
        }
    }

    /// Uniform spacing per axis.
    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.h).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes.iter().map(|a| a.h).fold(f64::INFINITY, f64::min)
    }

    /// Physical coordinates of a cell center (`[r]` on radial grids).
    pub fn center(&self, cell: usize) -> Vec<f64> {
        match self.shape {
            GridShape::Interval { length, cells } => vec![(cell as f64 + 0.5) * length / cells as f64],
            GridShape::Radial { radius, cells, .. } => vec![(cell as f64 + 0.5) * radius / cells as f64],
            GridShape::Rect { nx, ny, lx, ly } => {
                let (i, j) = (cell % nx, cell / nx);
                vec![(i as f64 + 0.5) * lx / nx as f64, (j as f64 + 0.5) * ly / ny as f64]
            }
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch { field_len: len, grid_cells: self.len() })
        }
    }

    pub(crate) fn check(&self, f: &Field) -> Result<()> {
        if f.lives_on(self) {
            Ok(())
        } else {
            Err(Error::GridMismatch { field_len: f.len(), grid_cells: self.len() })
        }
    }

    /// Quadrature weight attached to each face slot, per axis, so that
    /// `Σ w_f g_f²` approximates `∫|∇v|²`.
    pub fn face_weights(&self) -> FaceValues {
        let axes = self
            .axes
            .iter()
            .map(|ax| {
                let mut w = vec![0.0; ax.slots];
                for k in 0..ax.slot.len() {
                    w[ax.slot[k]] = ax.area[k] * ax.h;
                }
                w
            })
            .collect();
        FaceValues { axes }
    }

    /// Accumulates face fluxes into a cell divergence: each face adds
    /// `area · flux / V` to its lower cell and subtracts it from its upper cell.
    fn divergence_of(&self, mut face_flux: impl FnMut(usize, usize, usize) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (axis, ax) in self.axes.iter().enumerate() {
            for k in 0..ax.slot.len() {
                let (lo, hi) = (ax.lo[k], ax.hi[k]);
                let flux = ax.area[k] * face_flux(axis, lo, hi);
                out[lo] += flux;
                out[hi] -= flux;
            }
        }
        for (o, w) in out.iter_mut().zip(&self.quad_weights) {
            *o /= w;
        }
        out
    }

    /// Tridiagonal coupling coefficients `area / (h · V_i)` for 1D-like grids:
    /// `(lower[i], upper[i])` multiply cells `i - 1` and `i + 1` in row `i`.
    pub(crate) fn line_couplings(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.axes.len() != 1 {
            return None;
        }
        let ax = &self.axes[0];
        let n = self.len();
        let (mut lower, mut upper) = (vec![0.0; n], vec![0.0; n]);
        for k in 0..ax.slot.len() {
            let c = ax.area[k] / ax.h;
            upper[ax.lo[k]] = c / self.quad_weights[ax.lo[k]];
            lower[ax.hi[k]] = c / self.quad_weights[ax.hi[k]];
        }
        Some((lower, upper))
    }

    pub(crate) fn laplacian_raw(&self, f: &[f64]) -> Vec<f64> {
        self.divergence_of(|axis, lo, hi| (f[hi] - f[lo]) / self.axes[axis].h)
    }

    /// Largest rate at which donor-cell transport with face velocities `g`
    /// drains a cell, multiplied by the minimum spacing. For 1D grids this is
    /// `|g_left| + |g_right|` at the worst cell.
    pub(crate) fn max_outflow_speed(&self, grad: &FaceValues) -> f64 {
        let mut rate = vec![0.0; self.len()];
        for (axis, ax) in self.axes.iter().enumerate() {
            for k in 0..ax.slot.len() {
                let g = grad.axes[axis][ax.slot[k]];
                let donor = if g >= 0.0 { ax.lo[k] } else { ax.hi[k] };
                rate[donor] += ax.area[k] * g.abs();
            }
        }
        let h = self.min_spacing();
        rate.iter()
            .zip(&self.quad_weights)
            .map(|(r, w)| h * r / w)
            .fold(0.0, f64::max)
    }
}

impl AxisFaces {
    fn empty(h: f64, slots: usize) -> Self {
        Self { h, slots, slot: Vec::new(), lo: Vec::new(), hi: Vec::new(), area: Vec::new() }
    }

    fn push(&mut self, slot: usize, lo: usize, hi: usize, area: f64) {
        self.slot.push(slot);
        self.lo.push(lo);
        self.hi.push(hi);
        self.area.push(area);
    }
}

fn line_faces(cells: usize, h: f64, area: impl Fn(usize) -> f64) -> AxisFaces {
    let mut ax = AxisFaces::empty(h, cells + 1);
    for k in 1..cells {
        ax.push(k, k - 1, k, area(k));
    }
    ax
}

/// Neumann Laplacian. On radial grids this is the flux form of
/// `f'' + (N-1)/r f'`; the innermost face sits at `r = 0` with zero area.
pub fn laplacian_neumann(f: &Field, g: &Grid) -> Result<Field> {
    g.check(f)?;
    Field::new(g, g.laplacian_raw(f.values()))
}

/// One-sided difference quotient across each interior face; zero on boundary faces.
pub fn face_gradient(f: &Field, g: &Grid) -> Result<FaceValues> {
    g.check(f)?;
    Ok(face_gradient_raw(f.values(), g))
}

pub(crate) fn face_gradient_raw(f: &[f64], g: &Grid) -> FaceValues {
    let axes = g
        .axes
        .iter()
        .map(|ax| {
            let mut out = vec![0.0; ax.slots];
            for k in 0..ax.slot.len() {
                out[ax.slot[k]] = (f[ax.hi[k]] - f[ax.lo[k]]) / ax.h;
            }
            out
        })
        .collect();
    FaceValues { axes }
}

/// `∇·(χ u F_ε(u) ∇v)` with donor-cell upwinding: the carried density on a
/// face comes from the cell the drift leaves, i.e. the lower cell when
/// `(∇v)_face ≥ 0`.
pub fn chemotactic_divergence(u: &Field, v: &Field, chi: f64, epsilon: f64, g: &Grid) -> Result<Field> {
    g.check(u)?;
    g.check(v)?;
    require(u.is_nonnegative(), || "chemotactic_divergence needs u >= 0".to_string())?;
    require(epsilon >= 0.0, || format!("epsilon must be >= 0, got {epsilon}"))?;
    Field::new(g, chemotactic_divergence_raw(u.values(), v.values(), chi, epsilon, g))
}

pub(crate) fn chemotactic_divergence_raw(u: &[f64], v: &[f64], chi: f64, epsilon: f64, g: &Grid) -> Vec<f64> {
    if chi == 0.0 {
        return vec![0.0; g.len()];
    }
    g.divergence_of(|axis, lo, hi| {
        let grad = (v[hi] - v[lo]) / g.axes[axis].h;
        let donor = if grad >= 0.0 { u[lo] } else { u[hi] };
        chi * carried_density(donor, epsilon) * grad
    })
}

/// Quadrature-weighted sum; exact for cellwise-constant data.
pub fn integrate(f: &Field, g: &Grid) -> Result<f64> {
    g.check(f)?;
    Ok(integrate_raw(f.values(), g))
}

pub(crate) fn integrate_raw(f: &[f64], g: &Grid) -> f64 {
    f.iter().zip(&g.quad_weights).map(|(x, w)| x * w).sum()
}

/// `(∫|f|^p)^{1/p}`, or `max |f|` when `p` is infinite.
pub fn lp_norm(f: &Field, p: f64, g: &Grid) -> Result<f64> {
    g.check(f)?;
    require(p >= 1.0, || format!("L^p exponent must be >= 1 or infinite, got {p}"))?;
    if p.is_infinite() {
        return Ok(f.values().iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    Ok(integral_of_power(f.values(), p, g).powf(1.0 / p))
}

/// `∫|f|^p` without taking the root.
pub(crate) fn integral_of_power(f: &[f64], p: f64, g: &Grid) -> f64 {
    let pow = |x: f64| {
        let x = x.abs();
        if p == 1.0 {
            x
        } else if p == 2.0 {
            x * x
        } else {
            x.powf(p)
        }
    };
    f.iter().zip(&g.quad_weights).map(|(x, w)| w * pow(*x)).sum()
}
