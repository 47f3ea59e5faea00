//! Sampled ratios `‖Q^±(f, g)‖_{L^r} / (‖f‖_{L^p} ‖g‖_{L^q})` on velocity-only
//! data, compared across two velocity resolutions.
//!
//! Sample functions are defined on the continuum and then evaluated at the
//! nodes, so the same pair is seen at every resolution.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{gain_block, loss_block, CollisionError, CollisionKernel};
use crate::exponents::{format_exponent, to_f64, Rat};
use crate::grid::{column_velocity_norms, VelocityGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Gain,
    Loss,
}

impl FromStr for Which {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gain" => Ok(Self::Gain),
            "loss" => Ok(Self::Loss),
            other => Err(format!("expected gain or loss, got {other:?}")),
        }
    }
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gain => "gain",
            Self::Loss => "loss",
        })
    }
}

/// Reciprocal velocity exponents `(1/p_v, 1/q_v, 1/r_v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityExponents {
    pub inv_p: Rat,
    pub inv_q: Rat,
    pub inv_r: Rat,
}

impl VelocityExponents {
    pub fn new(inv_p: Rat, inv_q: Rat, inv_r: Rat) -> Self {
        Self { inv_p, inv_q, inv_r }
    }

    /// Checks `1 < p, q, r < ∞` and `1/p + 1/q = 1 + γ/N + 1/r`.
    pub fn check(&self, gamma: Rat, dim: usize) -> Result<(), CollisionError> {
        for (name, value) in [("p_v", self.inv_p), ("q_v", self.inv_q), ("r_v", self.inv_r)] {
            if value <= Rat::zero() || value >= Rat::one() {
                return Err(CollisionError::ExponentRange { name, value });
            }
        }
        let lhs = self.inv_p + self.inv_q;
        let rhs = Rat::one() + gamma / Rat::from_integer(dim as i64) + self.inv_r;
        if lhs != rhs {
            return Err(CollisionError::ExponentRelation { lhs, rhs });
        }
        Ok(())
    }
}

/// Sample families and their placement in the box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub samples: usize,
    pub seed: u64,
    pub v_max: f64,
    pub resolutions: Vec<usize>,
}

impl FamilySpec {
    pub fn new(samples: usize, seed: u64, v_max: f64, resolutions: Vec<usize>) -> Self {
        Self {
            samples,
            seed,
            v_max,
            resolutions,
        }
    }
}

/// One sampled velocity function.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleFunction {
    Gaussian { center: [f64; 3], width: f64, amplitude: f64 },
    /// Indicator of a union of blocks `lo[d]..hi[d]` of the 4-block lattice.
    Indicator { lo: [usize; 3], hi: [usize; 3] },
    /// Constant per block of the 4-block lattice, flattened row-major.
    PiecewiseConstant { values: Vec<f64> },
}

const BLOCKS: usize = 4;

impl SampleFunction {
    pub fn eval(&self, v: [f64; 3], dim: usize, v_max: f64) -> f64 {
        let block = |x: f64| -> usize {
            let b = ((x + v_max) / (2.0 * v_max) * BLOCKS as f64).floor();
            (b.max(0.0) as usize).min(BLOCKS - 1)
        };
        match self {
            Self::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let d2: f64 = (0..dim).map(|d| (v[d] - center[d]).powi(2)).sum();
                amplitude * (-d2 / (2.0 * width * width)).exp()
            }
            Self::Indicator { lo, hi } => {
                let inside = (0..dim).all(|d| (lo[d]..hi[d]).contains(&block(v[d])));
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Self::PiecewiseConstant { values } => {
                let idx = (0..dim).fold(0, |acc, d| acc * BLOCKS + block(v[d]));
                values[idx]
            }
        }
    }

    fn draw(kind: usize, rng: &mut ChaCha8Rng, dim: usize, v_max: f64, min_width: f64) -> Self {
        match kind % 3 {
            0 => {
                let mut center = [0.0; 3];
                for c in center.iter_mut().take(dim) {
                    *c = rng.gen_range(-0.4..0.4) * v_max;
                }
                let width = rng.gen_range(min_width..(min_width.max(0.3 * v_max) * 1.5));
                Self::Gaussian {
                    center,
                    width,
                    amplitude: rng.gen_range(0.5..2.0),
                }
            }
            1 => {
                let mut lo = [0; 3];
                let mut hi = [1; 3];
                for d in 0..dim {
                    let a = rng.gen_range(0..BLOCKS);
                    let b = rng.gen_range(0..BLOCKS);
                    lo[d] = a.min(b);
                    hi[d] = a.max(b) + 1;
                }
                Self::Indicator { lo, hi }
            }
            _ => Self::PiecewiseConstant {
                values: (0..BLOCKS.pow(dim as u32)).map(|_| rng.gen_range(0.0..1.0)).collect(),
            },
        }
    }
}

/// Draws `samples` independent `(f, g)` pairs, cycling through the three
/// families. Gaussian widths never drop below `min_width`.
pub fn sample_pairs(
    spec: &FamilySpec,
    dim: usize,
    min_width: f64,
) -> Vec<(SampleFunction, SampleFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.samples)
        .map(|k| {
            let f = SampleFunction::draw(k, &mut rng, dim, spec.v_max, min_width);
            let g = SampleFunction::draw(k + 1, &mut rng, dim, spec.v_max, min_width);
            (f, g)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionReport {
    pub n_v: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSampleReport {
    pub which: Which,
    pub dim: usize,
    pub gamma: String,
    pub p_v: String,
    pub q_v: String,
    pub r_v: String,
    pub samples: usize,
    pub seed: u64,
    pub levels: Vec<ResolutionReport>,
    /// `|max_last − max_first| / max_first` across the resolutions.
    pub relative_change: f64,
}

fn evaluate_block(samples: &[&SampleFunction], grid: &VelocityGrid) -> Vec<f64> {
    let ncols = samples.len();
    let mut block = vec![0.0; grid.total() * ncols];
    for (iv, row) in block.chunks_exact_mut(ncols).enumerate() {
        let v = grid.node(iv);
        for (x, s) in row.iter_mut().zip(samples) {
            *x = s.eval(v, grid.dim, grid.v_max);
        }
    }
    block
}

/// Bound ratios of one exponent triple for several velocity resolutions.
pub fn verify_bilinear_bound(
    which: Which,
    exponents: VelocityExponents,
    kernel: &CollisionKernel,
    dim: usize,
    family: &FamilySpec,
) -> Result<BoundSampleReport, CollisionError> {
    let mut reports = verify_bilinear_bounds(which, &[exponents], kernel, dim, family)?;
    Ok(reports.remove(0))
}

/// As [`verify_bilinear_bound`] for several exponent triples sharing the same
/// samples, evaluating the collision term once per resolution.
pub fn verify_bilinear_bounds(
    which: Which,
    exponents: &[VelocityExponents],
    kernel: &CollisionKernel,
    dim: usize,
    family: &FamilySpec,
) -> Result<Vec<BoundSampleReport>, CollisionError> {
    kernel.validate(dim)?;
    for e in exponents {
        e.check(kernel.gamma, dim)?;
    }
    if family.samples == 0 || family.resolutions.is_empty() {
        return Err(CollisionError::Sampling(
            "need at least one sample and one resolution".into(),
        ));
    }
    let grids = family
        .resolutions
        .iter()
        .map(|&n| VelocityGrid::new(dim, n, family.v_max))
        .collect::<Result<Vec<_>, _>>()?;
    let coarsest = grids.iter().map(|g| g.dv()).fold(0.0, f64::max);
    let pairs = sample_pairs(family, dim, 2.5 * coarsest);
    let fs: Vec<&SampleFunction> = pairs.iter().map(|(f, _)| f).collect();
    let gs: Vec<&SampleFunction> = pairs.iter().map(|(_, g)| g).collect();

    let mut levels: Vec<Vec<ResolutionReport>> = vec![Vec::new(); exponents.len()];
    for grid in &grids {
        let f = evaluate_block(&fs, grid);
        let g = evaluate_block(&gs, grid);
        let q = match which {
            Which::Gain => gain_block(grid, kernel, &f, &g)?,
            Which::Loss => loss_block(grid, kernel, &f, &g)?,
        };
        let ncols = pairs.len();
        let vol = grid.cell_volume();
        for (e, out) in exponents.iter().zip(levels.iter_mut()) {
            let nq = column_velocity_norms(&q, ncols, to_f64(e.inv_r), vol);
            let nf = column_velocity_norms(&f, ncols, to_f64(e.inv_p), vol);
            let ng = column_velocity_norms(&g, ncols, to_f64(e.inv_q), vol);
            let ratios: Vec<f64> = (0..ncols)
                .map(|k| {
                    let den = nf[k] * ng[k];
                    if den > 0.0 {
                        nq[k] / den
                    } else {
                        0.0
                    }
                })
                .collect();
            let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
            let mean_ratio = ratios.iter().sum::<f64>() / ncols as f64;
            out.push(ResolutionReport {
                n_v: grid.n_v,
                max_ratio,
                mean_ratio,
                ratios,
            });
        }
    }

    Ok(exponents
        .iter()
        .zip(levels)
        .map(|(e, levels)| {
            let first = levels.first().map_or(0.0, |l| l.max_ratio);
            let last = levels.last().map_or(0.0, |l| l.max_ratio);
            let relative_change = if first > 0.0 {
                (last - first).abs() / first
            } else {
                0.0
            };
            BoundSampleReport {
                which,
                dim,
                gamma: kernel.gamma.to_string(),
                p_v: format_exponent(e.inv_p),
                q_v: format_exponent(e.inv_q),
                r_v: format_exponent(e.inv_r),
                samples: family.samples,
                seed: family.seed,
                levels,
                relative_change,
            }
        })
        .collect())
}
