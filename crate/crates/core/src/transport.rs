//! Free streaming `U(t) f(x, v) = f(x − v t, v)` on the periodic torus.
//!
//! Each velocity node owns an x-slice that is shifted rigidly by `v t`.
//! Shifts are separable, so an N-dimensional shift is N passes of 1-D line
//! shifts. Whole-cell shifts are plain circular permutations and therefore
//! bit-exact; fractional shifts go through the configured interpolant.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::grid::DistributionFunction;

/// Relative distance to the nearest whole cell below which a shift is
/// treated as exact.
const WHOLE_CELL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    /// Four-point Lagrange.
    #[default]
    Cubic,
    /// Four-point Lagrange clamped to the bracketing node values; preserves
    /// nonnegativity.
    MonotoneCubic,
    /// Trigonometric interpolation through the FFT; an exact group on data
    /// without Nyquist content.
    Spectral,
}

impl FromStr for Interpolation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Self::Linear),
            "cubic" => Ok(Self::Cubic),
            "monotone_cubic" | "monotone" | "clamped" => Ok(Self::MonotoneCubic),
            "spectral" => Ok(Self::Spectral),
            other => Err(format!(
                "unknown interpolation `{other}` (expected linear|cubic|monotone_cubic|spectral)"
            )),
        }
    }
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Linear => "linear",
            Self::Cubic => "cubic",
            Self::MonotoneCubic => "monotone_cubic",
            Self::Spectral => "spectral",
        };
        f.write_str(s)
    }
}

/// The free-streaming group with a fixed interpolation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Transport {
    pub interpolation: Interpolation,
}

impl Transport {
    pub fn new(interpolation: Interpolation) -> Self {
        Self { interpolation }
    }

    /// `U(t) f`.
    pub fn apply(&self, f: &DistributionFunction, t: f64) -> DistributionFunction {
        stream(f, t, self.interpolation)
    }

    /// `U*(t) f = U(−t) f`.
    pub fn adjoint(&self, f: &DistributionFunction, t: f64) -> DistributionFunction {
        stream(f, -t, self.interpolation)
    }
}

/// `U(t) f` with the default cubic interpolant.
pub fn free_stream(f: &DistributionFunction, t: f64) -> DistributionFunction {
    Transport::default().apply(f, t)
}

/// `U(−t) f` with the default cubic interpolant.
pub fn adjoint_stream(f: &DistributionFunction, t: f64) -> DistributionFunction {
    Transport::default().adjoint(f, t)
}

fn stream(f: &DistributionFunction, t: f64, interp: Interpolation) -> DistributionFunction {
    let grid = *f.grid();
    if t == 0.0 {
        return f.clone();
    }
    let nx = grid.nx_total();
    let dx = grid.dx();
    let fft = match interp {
        Interpolation::Spectral => Some(FftPair::new(grid.n_x)),
        _ => None,
    };
    let mut out = f.values().to_vec();
    out.par_chunks_mut(nx).enumerate().for_each(|(iv, slice)| {
        let v = grid.v_node(iv);
        let mut line = vec![0.0; grid.n_x];
        let mut scratch = vec![0.0; grid.n_x];
        let mut spectrum = vec![Complex::new(0.0, 0.0); grid.n_x];
        for axis in 0..grid.dim {
            let shift = v[axis] * t / dx;
            let op = LineShift::new(shift, grid.n_x, interp);
            if op.is_identity() {
                continue;
            }
            let stride = grid.n_x.pow((grid.dim - 1 - axis) as u32);
            for_each_line(slice, grid.n_x, stride, |base, data| {
                for (k, l) in line.iter_mut().enumerate() {
                    *l = data[base + k * stride];
                }
                match (&op, &fft) {
                    (LineShift::Spectral { shift }, Some(plans)) => {
                        plans.shift(&mut line, &mut spectrum, *shift)
                    }
                    _ => {
                        op.apply(&line, &mut scratch);
                        line.copy_from_slice(&scratch);
                    }
                }
                for (k, l) in line.iter().enumerate() {
                    data[base + k * stride] = *l;
                }
            });
        }
    });
    DistributionFunction::from_raw(grid, out)
}

/// Visits every 1-D line along one axis of a row-major `n^dim` block.
fn for_each_line(data: &mut [f64], n: usize, stride: usize, mut visit: impl FnMut(usize, &mut [f64])) {
    let block = n * stride;
    let outer = data.len() / block;
    for o in 0..outer {
        for inner in 0..stride {
            visit(o * block + inner, data);
        }
    }
}

/// Lagrange weights on nodes `b−1, b, b+1, b+2` at fractional offset `s`.
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

enum LineShift {
    Whole(isize),
    /// Output `i` reads position `i − whole − 1 + frac`.
    Fractional {
        whole: isize,
        frac: f64,
        interp: Interpolation,
    },
    Spectral {
        shift: f64,
    },
}

impl LineShift {
    fn new(shift: f64, n: usize, interp: Interpolation) -> Self {
        let nearest = shift.round();
        if (shift - nearest).abs() < WHOLE_CELL_TOL {
            return Self::Whole((nearest as i64).rem_euclid(n as i64) as isize);
        }
        if interp == Interpolation::Spectral {
            return Self::Spectral { shift };
        }
        let floor = shift.floor();
        Self::Fractional {
            whole: floor as isize,
            frac: 1.0 - (shift - floor),
            interp,
        }
    }

    fn is_identity(&self) -> bool {
        matches!(self, Self::Whole(0))
    }

    fn apply(&self, input: &[f64], out: &mut [f64]) {
        let n = input.len() as isize;
        let at = |i: isize| input[i.rem_euclid(n) as usize];
        match *self {
            Self::Whole(k) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = at(i as isize - k);
                }
            }
            Self::Fractional {
                whole,
                frac,
                interp,
            } => {
                let w = cubic_weights(frac);
                for (i, o) in out.iter_mut().enumerate() {
                    let b = i as isize - whole - 1;
                    *o = match interp {
                        Interpolation::Linear => (1.0 - frac) * at(b) + frac * at(b + 1),
                        Interpolation::Cubic => {
                            w[0] * at(b - 1) + w[1] * at(b) + w[2] * at(b + 1) + w[3] * at(b + 2)
                        }
                        Interpolation::MonotoneCubic => {
                            let c = w[0] * at(b - 1)
                                + w[1] * at(b)
                                + w[2] * at(b + 1)
                                + w[3] * at(b + 2);
                            let (lo, hi) = if at(b) <= at(b + 1) {
                                (at(b), at(b + 1))
                            } else {
                                (at(b + 1), at(b))
                            };
                            c.clamp(lo, hi)
                        }
                        Interpolation::Spectral => unreachable!("spectral shifts use the FFT path"),
                    };
                }
            }
            Self::Spectral { .. } => unreachable!("spectral shifts use the FFT path"),
        }
    }
}

struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl FftPair {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    /// Trigonometric shift by `shift` cells. The Nyquist mode gets the real
    /// multiplier `cos(π·shift)` so real data stays real.
    fn shift(&self, line: &mut [f64], spectrum: &mut [Complex<f64>], shift: f64) {
        let n = self.n;
        for (s, &l) in spectrum.iter_mut().zip(line.iter()) {
            *s = Complex::new(l, 0.0);
        }
        self.forward.process(spectrum);
        for (k, s) in spectrum.iter_mut().enumerate() {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let phase = -2.0 * PI * kk * shift / n as f64;
            let m = if n % 2 == 0 && k == n / 2 {
                Complex::new(phase.cos(), 0.0)
            } else {
                Complex::new(phase.cos(), phase.sin())
            };
            *s *= m;
        }
        self.inverse.process(spectrum);
        let scale = 1.0 / n as f64;
        for (l, s) in line.iter_mut().zip(spectrum.iter()) {
            *l = s.re * scale;
        }
    }
}
