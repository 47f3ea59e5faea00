//! Cut-off soft-potential collision operator on the velocity grid.
//!
//! The kernel is `B(u, ω) = |u|^γ b(cosθ)` with `cosθ = ω·u/|u| ∈ [0, 1]`.
//! The gain term is a plain weighted sum over `(v*, ω)` with post-collision
//! values taken by multilinear interpolation (zero outside the box); the
//! loss term is `f · Lg` with `Lg` a direct velocity convolution.
//!
//! All kernels work on velocity-major blocks `[nv][ncols]`: a distribution
//! function is the block with one column per x-cell, and bound sampling
//! batches independent velocity functions as columns.

pub mod bounds;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::exponents::{to_f64, Rat};
use crate::grid::{DistributionFunction, GridError, VelocityGrid};
use quadrature::{direction, relative_frame, AngularNode, AngularRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollisionError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("gamma = {gamma} must lie in (−{dim}, 0]")]
    Gamma { gamma: Rat, dim: usize },
    #[error("angular function is not finite at cosθ = {0}")]
    NonFiniteAngular(f64),
    #[error("block length {len} is not a multiple of the {nv} velocity nodes")]
    Block { len: usize, nv: usize },
    #[error("exponent relation 1/p_v + 1/q_v = 1 + γ/N + 1/r_v fails: {lhs} ≠ {rhs}")]
    ExponentRelation { lhs: Rat, rhs: Rat },
    #[error("velocity exponent {name} = {value} must satisfy 1 < {name} < ∞")]
    ExponentRange { name: &'static str, value: Rat },
    #[error("bound sampling: {0}")]
    Sampling(String),
}

/// Angular part `b(cosθ)` of the kernel.
#[derive(Clone)]
pub enum AngularFunction {
    Constant(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl AngularFunction {
    pub fn eval(&self, cos_theta: f64) -> f64 {
        match self {
            Self::Constant(b0) => *b0,
            Self::Custom(f) => f(cos_theta),
        }
    }
}

impl fmt::Debug for AngularFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(b0) => write!(f, "Constant({b0})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CollisionKernel {
    pub gamma: Rat,
    pub b: AngularFunction,
    pub angular_nodes: usize,
    /// Regularisation width in `(|u|² + ε²)^{γ/2}`; `None` means `Δv/2`.
    /// An explicit zero drops the coincident-velocity term instead.
    pub singularity_epsilon: Option<f64>,
}

impl CollisionKernel {
    /// Constant `b ≡ 1`.
    pub fn new(gamma: Rat, angular_nodes: usize) -> Self {
        Self {
            gamma,
            b: AngularFunction::Constant(1.0),
            angular_nodes,
            singularity_epsilon: None,
        }
    }

    pub fn with_b0(mut self, b0: f64) -> Self {
        self.b = AngularFunction::Constant(b0);
        self
    }

    pub fn with_angular_function(mut self, b: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.b = AngularFunction::Custom(Arc::new(b));
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.singularity_epsilon = Some(epsilon);
        self
    }

    pub fn gamma_f64(&self) -> f64 {
        to_f64(self.gamma)
    }

    pub fn angular_rule(&self, dim: usize) -> AngularRule {
        AngularRule::new(dim, self.angular_nodes)
    }

    /// `true` when `b ≡ 0`, i.e. the operator vanishes identically.
    pub fn is_trivial(&self) -> bool {
        matches!(self.b, AngularFunction::Constant(b0) if b0 == 0.0)
    }

    pub fn validate(&self, dim: usize) -> Result<(), CollisionError> {
        let n = Rat::from_integer(dim as i64);
        if !(self.gamma > -n && self.gamma <= Rat::from_integer(0)) {
            return Err(CollisionError::Gamma {
                gamma: self.gamma,
                dim,
            });
        }
        Ok(())
    }

    pub(crate) fn resolve(&self, grid: &VelocityGrid) -> Result<ResolvedKernel, CollisionError> {
        self.validate(grid.dim)?;
        let rule = self.angular_rule(grid.dim);
        let mut nodes = Vec::with_capacity(rule.len());
        for node in &rule.nodes {
            let b = self.b.eval(node.cos_theta);
            if !b.is_finite() {
                return Err(CollisionError::NonFiniteAngular(node.cos_theta));
            }
            nodes.push((*node, b * node.weight));
        }
        let grad_constant = nodes.iter().map(|(_, bw)| bw).sum();
        Ok(ResolvedKernel {
            gamma: self.gamma_f64(),
            epsilon: self.singularity_epsilon.unwrap_or(0.5 * grid.dv()),
            nodes,
            grad_constant,
        })
    }
}

/// Kernel data bound to one velocity grid.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedKernel {
    pub gamma: f64,
    pub epsilon: f64,
    /// Each node with its weight already multiplied by `b(cosθ)`.
    pub nodes: Vec<(AngularNode, f64)>,
    pub grad_constant: f64,
}

impl ResolvedKernel {
    /// Regularised `|u|^γ` as a function of `|u|²`.
    #[inline]
    pub fn radial(&self, r2: f64) -> f64 {
        if self.gamma == 0.0 {
            1.0
        } else if self.epsilon > 0.0 {
            (r2 + self.epsilon * self.epsilon).powf(0.5 * self.gamma)
        } else if r2 == 0.0 {
            0.0
        } else {
            r2.powf(0.5 * self.gamma)
        }
    }
}

/// `∫ b(cosθ) dΩ` over the admissible directions, by the kernel's rule.
pub fn grad_cutoff_constant(kernel: &CollisionKernel, dim: usize) -> Result<f64, CollisionError> {
    let rule = kernel.angular_rule(dim);
    let mut total = 0.0;
    for node in &rule.nodes {
        let b = kernel.b.eval(node.cos_theta);
        if !b.is_finite() {
            return Err(CollisionError::NonFiniteAngular(node.cos_theta));
        }
        total += b * node.weight;
    }
    Ok(total)
}

/// Post-collision pair `v′ = v − [ω·(v − v*)]ω`, `v*′ = v* + [ω·(v − v*)]ω`.
pub fn post_collision<const D: usize>(v: [f64; D], v_star: [f64; D], omega: [f64; D]) -> ([f64; D], [f64; D]) {
    let proj: f64 = (0..D).map(|d| omega[d] * (v[d] - v_star[d])).sum();
    let mut vp = v;
    let mut vsp = v_star;
    for d in 0..D {
        vp[d] -= proj * omega[d];
        vsp[d] += proj * omega[d];
    }
    (vp, vsp)
}

/// Multilinear interpolation stencil with zero extension outside the box.
#[derive(Clone, Copy)]
pub(crate) struct Stencil {
    idx: [usize; 8],
    w: [f64; 8],
    len: usize,
}

impl Stencil {
    #[inline]
    pub fn at(p: &[f64; 3], grid: &VelocityGrid) -> Self {
        let n = grid.n_v as isize;
        let inv = 1.0 / grid.dv();
        let mut axis_idx = [[0usize; 2]; 3];
        let mut axis_w = [[0.0f64; 2]; 3];
        let mut axis_len = [0usize; 3];
        for d in 0..grid.dim {
            let pos = (p[d] + grid.v_max) * inv - 0.5;
            let base = pos.floor();
            let frac = pos - base;
            let b = base as isize;
            let mut k = 0;
            if (0..n).contains(&b) && frac < 1.0 {
                axis_idx[d][k] = b as usize;
                axis_w[d][k] = 1.0 - frac;
                k += 1;
            }
            if (0..n).contains(&(b + 1)) && frac > 0.0 {
                axis_idx[d][k] = (b + 1) as usize;
                axis_w[d][k] = frac;
                k += 1;
            }
            if k == 0 {
                return Self {
                    idx: [0; 8],
                    w: [0.0; 8],
                    len: 0,
                };
            }
            axis_len[d] = k;
        }
        let mut out = Self {
            idx: [0; 8],
            w: [0.0; 8],
            len: 0,
        };
        match grid.dim {
            2 => {
                for a in 0..axis_len[0] {
                    for b in 0..axis_len[1] {
                        out.idx[out.len] = axis_idx[0][a] * grid.n_v + axis_idx[1][b];
                        out.w[out.len] = axis_w[0][a] * axis_w[1][b];
                        out.len += 1;
                    }
                }
            }
            _ => {
                for a in 0..axis_len[0] {
                    for b in 0..axis_len[1] {
                        for c in 0..axis_len[2] {
                            out.idx[out.len] = (axis_idx[0][a] * grid.n_v + axis_idx[1][b])
                                * grid.n_v
                                + axis_idx[2][c];
                            out.w[out.len] = axis_w[0][a] * axis_w[1][b] * axis_w[2][c];
                            out.len += 1;
                        }
                    }
                }
            }
        }
        out
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `out = Σ w_k · block[idx_k]` over the columns.
    #[inline]
    fn gather(&self, block: &[f64], ncols: usize, out: &mut [f64]) {
        let row = |i: usize| &block[i * ncols..(i + 1) * ncols];
        let (w0, r0) = (self.w[0], row(self.idx[0]));
        for (o, x) in out.iter_mut().zip(r0) {
            *o = w0 * x;
        }
        for k in 1..self.len {
            let (wk, rk) = (self.w[k], row(self.idx[k]));
            for (o, x) in out.iter_mut().zip(rk) {
                *o += wk * x;
            }
        }
    }
}

fn check_block(grid: &VelocityGrid, block: &[f64]) -> Result<usize, CollisionError> {
    let nv = grid.total();
    if block.is_empty() || block.len() % nv != 0 {
        return Err(CollisionError::Block {
            len: block.len(),
            nv,
        });
    }
    Ok(block.len() / nv)
}

/// Gain term `Q⁺(f, g)` on velocity-major blocks.
pub fn gain_block(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    f: &[f64],
    g: &[f64],
) -> Result<Vec<f64>, CollisionError> {
    let ncols = check_block(grid, f)?;
    if f.len() != g.len() {
        return Err(CollisionError::Block {
            len: g.len(),
            nv: grid.total(),
        });
    }
    let k = kernel.resolve(grid)?;
    let mut out = vec![0.0; f.len()];
    if k.grad_constant == 0.0 && k.nodes.iter().all(|(_, bw)| *bw == 0.0) {
        return Ok(out);
    }
    let nv = grid.total();
    let dvn = grid.cell_volume();
    let dim = grid.dim;
    let vnodes: Vec<[f64; 3]> = (0..nv).map(|i| grid.node(i)).collect();

    out.par_chunks_mut(ncols).enumerate().for_each(|(iv, acc)| {
        let mut tf = vec![0.0; ncols];
        let mut tg = vec![0.0; ncols];
        let v = vnodes[iv];
        for vs in &vnodes {
            let u = [v[0] - vs[0], v[1] - vs[1], v[2] - vs[2]];
            let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
            let radial = k.radial(r2) * dvn;
            if radial == 0.0 {
                continue;
            }
            let speed = r2.sqrt();
            let frame = relative_frame(u, dim);
            for (node, bw) in &k.nodes {
                let coef = radial * bw;
                if coef == 0.0 {
                    continue;
                }
                let omega = direction(node, &frame, dim);
                let proj = node.cos_theta * speed;
                let vp = [
                    v[0] - proj * omega[0],
                    v[1] - proj * omega[1],
                    v[2] - proj * omega[2],
                ];
                let sf = Stencil::at(&vp, grid);
                if sf.is_empty() {
                    continue;
                }
                let vsp = [
                    vs[0] + proj * omega[0],
                    vs[1] + proj * omega[1],
                    vs[2] + proj * omega[2],
                ];
                let sg = Stencil::at(&vsp, grid);
                if sg.is_empty() {
                    continue;
                }
                sf.gather(f, ncols, &mut tf);
                sg.gather(g, ncols, &mut tg);
                for ((a, x), y) in acc.iter_mut().zip(&tf).zip(&tg) {
                    *a += coef * x * y;
                }
            }
        }
    });
    Ok(out)
}

/// `Lg(v) = (∫ b dΩ) Σ_{v*} |v − v*|^γ g(v*) Δv^N` on velocity-major blocks.
pub fn loss_frequency_block(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    g: &[f64],
) -> Result<Vec<f64>, CollisionError> {
    let ncols = check_block(grid, g)?;
    let k = kernel.resolve(grid)?;
    let mut out = vec![0.0; g.len()];
    if k.grad_constant == 0.0 {
        return Ok(out);
    }
    let nv = grid.total();
    let scale = k.grad_constant * grid.cell_volume();
    let vnodes: Vec<[f64; 3]> = (0..nv).map(|i| grid.node(i)).collect();
    out.par_chunks_mut(ncols).enumerate().for_each(|(iv, acc)| {
        let v = vnodes[iv];
        for (js, vs) in vnodes.iter().enumerate() {
            let r2 = (v[0] - vs[0]).powi(2) + (v[1] - vs[1]).powi(2) + (v[2] - vs[2]).powi(2);
            let w = scale * k.radial(r2);
            if w == 0.0 {
                continue;
            }
            let row = &g[js * ncols..(js + 1) * ncols];
            for (a, x) in acc.iter_mut().zip(row) {
                *a += w * x;
            }
        }
    });
    Ok(out)
}

/// Loss term `Q⁻(f, g) = f · Lg` on velocity-major blocks.
pub fn loss_block(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    f: &[f64],
    g: &[f64],
) -> Result<Vec<f64>, CollisionError> {
    check_block(grid, f)?;
    if f.len() != g.len() {
        return Err(CollisionError::Block {
            len: g.len(),
            nv: grid.total(),
        });
    }
    let mut lg = loss_frequency_block(grid, kernel, g)?;
    for (l, x) in lg.iter_mut().zip(f) {
        *l *= x;
    }
    Ok(lg)
}

fn phase_pair(
    f: &DistributionFunction,
    g: &DistributionFunction,
) -> Result<VelocityGrid, CollisionError> {
    f.grid().ensure_same(g.grid())?;
    Ok(f.grid().velocity())
}

/// `Q⁺(f, g)` at every phase-space node.
pub fn gain_term(
    f: &DistributionFunction,
    g: &DistributionFunction,
    kernel: &CollisionKernel,
) -> Result<DistributionFunction, CollisionError> {
    let vg = phase_pair(f, g)?;
    let out = gain_block(&vg, kernel, f.values(), g.values())?;
    Ok(DistributionFunction::from_raw(*f.grid(), out))
}

/// `Q⁻(f, g)` at every phase-space node.
pub fn loss_term(
    f: &DistributionFunction,
    g: &DistributionFunction,
    kernel: &CollisionKernel,
) -> Result<DistributionFunction, CollisionError> {
    let vg = phase_pair(f, g)?;
    let out = loss_block(&vg, kernel, f.values(), g.values())?;
    Ok(DistributionFunction::from_raw(*f.grid(), out))
}

/// `Q(f, f) = Q⁺(f, f) − Q⁻(f, f)`.
pub fn collision_operator(
    f: &DistributionFunction,
    kernel: &CollisionKernel,
) -> Result<DistributionFunction, CollisionError> {
    let grid = *f.grid();
    if kernel.is_trivial() {
        kernel.validate(grid.dim)?;
        return Ok(DistributionFunction::zeros(grid));
    }
    let vg = grid.velocity();
    let mut q = gain_block(&vg, kernel, f.values(), f.values())?;
    let loss = loss_block(&vg, kernel, f.values(), f.values())?;
    for (a, b) in q.iter_mut().zip(&loss) {
        *a -= b;
    }
    Ok(DistributionFunction::from_raw(grid, q))
}
