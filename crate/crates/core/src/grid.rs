//! Discrete phase space: a periodic x-torus times a truncated velocity box,
//! distribution storage, and midpoint/trapezoid mixed Lebesgue norms.
//!
//! Values are stored velocity-major: entry `(ix, iv)` lives at
//! `iv * nx_total + ix`, so every velocity node owns one contiguous x-slice.
//! Multi-indices are row-major with axis 0 slowest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{to_f64, Rat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dimension {0} unsupported (expected 2 or 3)")]
    Dimension(usize),
    #[error("{name} = {value} must be even and at least 4")]
    Resolution { name: &'static str, value: usize },
    #[error("{name} = {value} must be positive and finite")]
    Length { name: &'static str, value: f64 },
    #[error("expected {expected} values, got {got}")]
    Size { expected: usize, got: usize },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("{name} = {value} is below one grid spacing ({spacing})")]
    Unresolved {
        name: &'static str,
        value: f64,
        spacing: f64,
    },
    #[error("grids differ: {0:?} vs {1:?}")]
    Mismatch(Box<PhaseGrid>, Box<PhaseGrid>),
    #[error("norm trace: {0}")]
    Trace(&'static str),
}

fn check_resolution(name: &'static str, value: usize) -> Result<(), GridError> {
    if value < 4 || value % 2 != 0 {
        Err(GridError::Resolution { name, value })
    } else {
        Ok(())
    }
}

fn check_length(name: &'static str, value: f64) -> Result<(), GridError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(GridError::Length { name, value })
    }
}

/// Cell-centred velocity nodes on `[−v_max, v_max]^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    pub dim: usize,
    pub n_v: usize,
    pub v_max: f64,
}

impl VelocityGrid {
    pub fn new(dim: usize, n_v: usize, v_max: f64) -> Result<Self, GridError> {
        if !(2..=3).contains(&dim) {
            return Err(GridError::Dimension(dim));
        }
        check_resolution("n_v", n_v)?;
        check_length("v_max", v_max)?;
        Ok(Self { dim, n_v, v_max })
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn total(&self) -> usize {
        self.n_v.pow(self.dim as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.dv().powi(self.dim as i32)
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.v_max + (j as f64 + 0.5) * self.dv()
    }

    /// Velocity of flat node `iv`; unused trailing components are zero.
    pub fn node(&self, iv: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut rest = iv;
        for d in (0..self.dim).rev() {
            out[d] = self.coord(rest % self.n_v);
            rest /= self.n_v;
        }
        out
    }

    pub fn multi_index(&self, iv: usize) -> [usize; 3] {
        unflatten(iv, self.n_v, self.dim)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        flatten(idx, self.n_v)
    }
}

pub(crate) fn unflatten(mut flat: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut out = [0; 3];
    for d in (0..dim).rev() {
        out[d] = flat % n;
        flat /= n;
    }
    out
}

pub(crate) fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Periodic x-torus `[0, L)^N` times the velocity box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub dim: usize,
    pub period: f64,
    pub n_x: usize,
    pub v_max: f64,
    pub n_v: usize,
}

impl PhaseGrid {
    pub fn new(dim: usize, period: f64, n_x: usize, v_max: f64, n_v: usize) -> Result<Self, GridError> {
        VelocityGrid::new(dim, n_v, v_max)?;
        check_resolution("n_x", n_x)?;
        check_length("L", period)?;
        Ok(Self {
            dim,
            period,
            n_x,
            v_max,
            n_v,
        })
    }

    pub fn velocity(&self) -> VelocityGrid {
        VelocityGrid {
            dim: self.dim,
            n_v: self.n_v,
            v_max: self.v_max,
        }
    }

    pub fn dx(&self) -> f64 {
        self.period / self.n_x as f64
    }

    pub fn dv(&self) -> f64 {
        self.velocity().dv()
    }

    pub fn nx_total(&self) -> usize {
        self.n_x.pow(self.dim as u32)
    }

    pub fn nv_total(&self) -> usize {
        self.velocity().total()
    }

    pub fn len(&self) -> usize {
        self.nx_total() * self.nv_total()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn v_cell_volume(&self) -> f64 {
        self.velocity().cell_volume()
    }

    pub fn x_coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn x_node(&self, ix: usize) -> [f64; 3] {
        let idx = unflatten(ix, self.n_x, self.dim);
        let mut out = [0.0; 3];
        for d in 0..self.dim {
            out[d] = self.x_coord(idx[d]);
        }
        out
    }

    pub fn v_node(&self, iv: usize) -> [f64; 3] {
        self.velocity().node(iv)
    }

    pub fn index(&self, ix: usize, iv: usize) -> usize {
        iv * self.nx_total() + ix
    }

    pub fn ensure_same(&self, other: &PhaseGrid) -> Result<(), GridError> {
        if self == other {
            Ok(())
        } else {
            Err(GridError::Mismatch(Box::new(*self), Box::new(*other)))
        }
    }
}

/// Phase-space density sampled on a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFunction {
    grid: PhaseGrid,
    values: Vec<f64>,
    nonnegative: bool,
}

impl DistributionFunction {
    pub fn zeros(grid: PhaseGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            nonnegative: true,
        }
    }

    pub fn from_values(grid: PhaseGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Size {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(bad));
        }
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        Ok(Self {
            grid,
            values,
            nonnegative,
        })
    }

    /// Builds from `f(x, v)` evaluated at every node.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn([f64; 3], [f64; 3]) -> f64) -> Result<Self, GridError> {
        let nx = grid.nx_total();
        let xs: Vec<[f64; 3]> = (0..nx).map(|ix| grid.x_node(ix)).collect();
        let mut values = Vec::with_capacity(grid.len());
        for iv in 0..grid.nv_total() {
            let v = grid.v_node(iv);
            values.extend(xs.iter().map(|&x| f(x, v)));
        }
        Self::from_values(grid, values)
    }

    pub(crate) fn from_raw(grid: PhaseGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        Self {
            grid,
            values,
            nonnegative,
        }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn at(&self, ix: usize, iv: usize) -> f64 {
        self.values[self.grid.index(ix, iv)]
    }

    /// The x-slice belonging to velocity node `iv`.
    pub fn x_slice(&self, iv: usize) -> &[f64] {
        let nx = self.grid.nx_total();
        &self.values[iv * nx..(iv + 1) * nx]
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| lambda * v).collect())
    }

    /// `self + lambda * other`.
    pub fn axpy(&self, lambda: f64, other: &Self) -> Result<Self, GridError> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + lambda * b)
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn add(&self, other: &Self) -> Result<Self, GridError> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GridError> {
        self.axpy(-1.0, other)
    }

    pub fn add_scaled_in_place(&mut self, lambda: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += lambda * b;
        }
        self.nonnegative = self.values.iter().all(|&v| v >= 0.0);
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `Σ f(x, v) Δv^N` for every x-cell.
    pub fn density(&self) -> Vec<f64> {
        let nx = self.grid.nx_total();
        let mut rho = vec![0.0; nx];
        for iv in 0..self.grid.nv_total() {
            for (r, v) in rho.iter_mut().zip(self.x_slice(iv)) {
                *r += v;
            }
        }
        let dvn = self.grid.v_cell_volume();
        rho.iter_mut().for_each(|r| *r *= dvn);
        rho
    }

    /// Discrete `L²` inner product over phase space.
    pub fn inner(&self, other: &Self) -> f64 {
        let w = self.grid.x_cell_volume() * self.grid.v_cell_volume();
        w * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }
}

/// `(Σ_i |h_i|^p w)^{1/p}` or `max |h_i|` when `inv_p = 0`, scaled by the
/// largest entry so large exponents neither overflow nor underflow.
fn lp_accumulate(values: impl Iterator<Item = f64> + Clone, inv_p: f64, weight: f64) -> f64 {
    let m = values.clone().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 || inv_p == 0.0 {
        return m;
    }
    let p = 1.0 / inv_p;
    let s: f64 = values.map(|v| (v.abs() / m).powf(p)).sum();
    m * (s * weight).powf(inv_p)
}

/// `L^p_v` norm of every column of a velocity-major block `[nv][ncols]`.
pub fn column_velocity_norms(block: &[f64], ncols: usize, inv_p: f64, dv_volume: f64) -> Vec<f64> {
    let nv = block.len() / ncols;
    if inv_p == 0.0 {
        let mut out = vec![0.0_f64; ncols];
        for row in block.chunks_exact(ncols) {
            for (o, v) in out.iter_mut().zip(row) {
                *o = o.max(v.abs());
            }
        }
        return out;
    }
    let p = 1.0 / inv_p;
    let mut scale = vec![0.0_f64; ncols];
    for row in block.chunks_exact(ncols) {
        for (s, v) in scale.iter_mut().zip(row) {
            *s = s.max(v.abs());
        }
    }
    let mut acc = vec![0.0_f64; ncols];
    for row in block.chunks_exact(ncols) {
        for ((a, v), s) in acc.iter_mut().zip(row).zip(&scale) {
            if *s > 0.0 {
                *a += (v.abs() / s).powf(p);
            }
        }
    }
    debug_assert_eq!(nv * ncols, block.len());
    acc.iter()
        .zip(&scale)
        .map(|(a, s)| if *s > 0.0 { s * (a * dv_volume).powf(inv_p) } else { 0.0 })
        .collect()
}

/// `‖f‖_{L^r_x L^p_v}` by midpoint quadrature.
pub fn mixed_norm_xv(f: &DistributionFunction, inv_r: Rat, inv_p: Rat) -> f64 {
    mixed_norm_xv_f64(f, to_f64(inv_r), to_f64(inv_p))
}

pub fn mixed_norm_xv_f64(f: &DistributionFunction, inv_r: f64, inv_p: f64) -> f64 {
    let grid = f.grid();
    let inner = column_velocity_norms(f.values(), grid.nx_total(), inv_p, grid.v_cell_volume());
    lp_accumulate(inner.iter().copied(), inv_r, grid.x_cell_volume())
}

/// `‖f‖_{L^a_{x,v}}`.
pub fn lebesgue_norm_a(f: &DistributionFunction, inv_a: Rat) -> f64 {
    mixed_norm_xv(f, inv_a, inv_a)
}

pub fn lebesgue_norm_f64(f: &DistributionFunction, inv_a: f64) -> f64 {
    mixed_norm_xv_f64(f, inv_a, inv_a)
}

/// Sampled `t ↦ value` record used for the outer `L^q_t` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTrace {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl NormTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, GridError> {
        if times.len() != values.len() {
            return Err(GridError::Trace("times and values differ in length"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GridError::Trace("times must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(GridError::Trace("values must be finite and nonnegative"));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Trapezoidal `L^q` norm of a trace; the sup over samples when `inv_q = 0`.
pub fn time_norm(trace: &NormTrace, inv_q: Rat) -> Result<f64, GridError> {
    time_norm_f64(trace, to_f64(inv_q))
}

pub fn time_norm_f64(trace: &NormTrace, inv_q: f64) -> Result<f64, GridError> {
    if trace.is_empty() {
        return Err(GridError::Trace("empty trace"));
    }
    let m = trace.values.iter().fold(0.0_f64, |m, v| m.max(*v));
    if inv_q == 0.0 || m == 0.0 {
        return Ok(m);
    }
    let q = 1.0 / inv_q;
    let integral: f64 = trace
        .times
        .windows(2)
        .zip(trace.values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * ((v[0] / m).powf(q) + (v[1] / m).powf(q)))
        .sum();
    Ok(m * integral.powf(inv_q))
}

fn check_width(name: &'static str, value: f64, spacing: f64) -> Result<(), GridError> {
    if !(value.is_finite() && value >= spacing * (1.0 - 1e-12)) {
        Err(GridError::Unresolved {
            name,
            value,
            spacing,
        })
    } else {
        Ok(())
    }
}

/// Periodic sum of 1-D Gaussians `Σ_m exp(−(x − x₀ + mL)²/2σ²)`.
fn wrapped_gaussian(x: f64, x0: f64, sigma: f64, period: f64) -> f64 {
    let images = (6.0 * sigma / period).ceil() as i64 + 1;
    (-images..=images)
        .map(|m| {
            let d = x - x0 + m as f64 * period;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .sum()
}

/// `A · G_{σx}(x − x₀) · exp(−|v − v₀|²/2σ_v²)`, periodic in x and
/// truncated in v.
pub fn make_gaussian(
    grid: &PhaseGrid,
    x0: &[f64],
    v0: &[f64],
    sigma_x: f64,
    sigma_v: f64,
    amplitude: f64,
) -> Result<DistributionFunction, GridError> {
    check_width("sigma_x", sigma_x, grid.dx())?;
    check_width("sigma_v", sigma_v, grid.dv())?;
    let dim = grid.dim;
    if x0.len() != dim || v0.len() != dim {
        return Err(GridError::Size {
            expected: dim,
            got: x0.len().min(v0.len()),
        });
    }
    // Separable: tabulate the 1-D x factors once per axis.
    let xfac: Vec<Vec<f64>> = (0..dim)
        .map(|d| {
            (0..grid.n_x)
                .map(|i| wrapped_gaussian(grid.x_coord(i), x0[d], sigma_x, grid.period))
                .collect()
        })
        .collect();
    let nx = grid.nx_total();
    let mut values = Vec::with_capacity(grid.len());
    for iv in 0..grid.nv_total() {
        let v = grid.v_node(iv);
        let dv2: f64 = (0..dim).map(|d| (v[d] - v0[d]).powi(2)).sum();
        let vf = amplitude * (-dv2 / (2.0 * sigma_v * sigma_v)).exp();
        for ix in 0..nx {
            let idx = unflatten(ix, grid.n_x, dim);
            let xf: f64 = (0..dim).map(|d| xfac[d][idx[d]]).product();
            values.push(vf * xf);
        }
    }
    DistributionFunction::from_values(*grid, values)
}

/// Spatially uniform Maxwellian `ρ (2πT)^{−N/2} exp(−|v − u|²/2T)`.
pub fn make_maxwellian(
    grid: &PhaseGrid,
    rho: f64,
    u: &[f64],
    temperature: f64,
) -> Result<DistributionFunction, GridError> {
    check_width("sqrt(T)", temperature.max(0.0).sqrt(), grid.dv())?;
    if u.len() != grid.dim {
        return Err(GridError::Size {
            expected: grid.dim,
            got: u.len(),
        });
    }
    let norm = rho * (2.0 * std::f64::consts::PI * temperature).powf(-(grid.dim as f64) / 2.0);
    DistributionFunction::from_fn(*grid, |_, v| {
        let d2: f64 = (0..grid.dim).map(|d| (v[d] - u[d]).powi(2)).sum();
        norm * (-d2 / (2.0 * temperature)).exp()
    })
}

/// Independent uniform values in `[0, amplitude)` from a seeded ChaCha8
/// stream, in storage order.
pub fn make_random(grid: &PhaseGrid, amplitude: f64, seed: u64) -> Result<DistributionFunction, GridError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len()).map(|_| amplitude * rng.gen::<f64>()).collect();
    DistributionFunction::from_values(*grid, values)
}
