//! Shared helpers for integration tests: an independent brute-force
//! collision operator and small random fixtures.

#![allow(dead_code)]

use std::f64::consts::PI;

use kinlab::grid::{DistributionFunction, PhaseGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain kernel description for the oracle.
#[derive(Clone, Copy)]
pub struct OracleKernel {
    pub gamma: f64,
    pub b0: f64,
    pub nodes: usize,
    pub epsilon: f64,
}

fn hat(s: f64) -> f64 {
    (1.0 - s.abs()).max(0.0)
}

/// Nodes `m` with nonzero `Π_d hat((p_d − c_{m,d})/Δv)`, scanning every node.
fn hat_weights(grid: &PhaseGrid, p: &[f64]) -> Vec<(usize, f64)> {
    let dv = grid.dv();
    let mut out = Vec::new();
    for m in 0..grid.nv_total() {
        let c = grid.v_node(m);
        let w: f64 = (0..grid.dim).map(|d| hat((p[d] - c[d]) / dv)).product();
        if w != 0.0 {
            out.push((m, w));
        }
    }
    out
}

fn hat_eval(f: &DistributionFunction, ix: usize, weights: &[(usize, f64)]) -> f64 {
    weights.iter().map(|(m, w)| w * f.at(ix, *m)).sum()
}

fn radial(k: &OracleKernel, u2: f64) -> f64 {
    if k.gamma == 0.0 {
        1.0
    } else if k.epsilon > 0.0 {
        (u2 + k.epsilon * k.epsilon).powf(k.gamma / 2.0)
    } else if u2 == 0.0 {
        0.0
    } else {
        u2.powf(k.gamma / 2.0)
    }
}

/// Directions `ω` and weights of the admissible set for relative velocity `u`.
fn directions(k: &OracleKernel, dim: usize, u: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if dim == 2 {
        let phi = if norm > 0.0 { u[1].atan2(u[0]) } else { 0.0 };
        (0..k.nodes)
            .map(|i| {
                let theta = -PI / 2.0 + (i as f64 + 0.5) * PI / k.nodes as f64;
                (vec![(phi + theta).cos(), (phi + theta).sin()], k.b0 * PI / k.nodes as f64)
            })
            .collect()
    } else {
        let e: Vec<f64> = if norm > 0.0 {
            u.iter().map(|x| x / norm).collect()
        } else {
            vec![1.0, 0.0, 0.0]
        };
        let mut axis = 0;
        for d in 1..3 {
            if e[d].abs() < e[axis].abs() {
                axis = d;
            }
        }
        let mut e1: Vec<f64> = (0..3).map(|d| if d == axis { 1.0 } else { 0.0 } - e[axis] * e[d]).collect();
        let n1: f64 = e1.iter().map(|x| x * x).sum::<f64>().sqrt();
        e1.iter_mut().for_each(|x| *x /= n1);
        let e2 = [
            e[1] * e1[2] - e[2] * e1[1],
            e[2] * e1[0] - e[0] * e1[2],
            e[0] * e1[1] - e[1] * e1[0],
        ];
        let n_mu = ((k.nodes as f64 / 2.0).sqrt().round() as usize).max(1);
        let n_phi = (k.nodes / n_mu).max(1);
        let (mu, wmu) = gauss_legendre_01(n_mu);
        let mut out = Vec::new();
        for (m, wm) in mu.iter().zip(&wmu) {
            let s = (1.0 - m * m).sqrt();
            for j in 0..n_phi {
                let ph = (j as f64 + 0.5) * 2.0 * PI / n_phi as f64;
                let w: Vec<f64> = (0..3)
                    .map(|d| m * e[d] + s * (ph.cos() * e1[d] + ph.sin() * e2[d]))
                    .collect();
                out.push((w, k.b0 * wm * 2.0 * PI / n_phi as f64));
            }
        }
        out
    }
}

/// Gauss–Legendre on `[0, 1]` by bisection on sign changes of `P_n`.
fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let p = |x: f64| -> (f64, f64) {
        let (mut a, mut b) = (1.0, x);
        for k in 2..=n {
            let c = ((2 * k - 1) as f64 * x * b - (k - 1) as f64 * a) / k as f64;
            a = b;
            b = c;
        }
        if n == 0 {
            (1.0, 0.0)
        } else {
            (b, n as f64 * (a - x * b) / (1.0 - x * x))
        }
    };
    // Bracket sign changes on a fine mesh, then bisect.
    let mut roots = Vec::new();
    let mesh = 4000;
    for i in 0..mesh {
        let (mut lo, mut hi) = (-1.0 + 2.0 * i as f64 / mesh as f64, -1.0 + 2.0 * (i + 1) as f64 / mesh as f64);
        if p(lo).0 * p(hi).0 > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(lo).0 * p(mid).0 <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let weights: Vec<f64> = roots
        .iter()
        .map(|&x| {
            let d = p(x).1;
            2.0 / ((1.0 - x * x) * d * d)
        })
        .collect();
    (
        roots.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights.iter().map(|w| 0.5 * w).collect(),
    )
}

/// Gain and loss terms by direct summation over every `(v, v*, ω)`.
pub fn brute_force(
    f: &DistributionFunction,
    g: &DistributionFunction,
    k: &OracleKernel,
) -> (Vec<f64>, Vec<f64>) {
    let grid = *f.grid();
    let dim = grid.dim;
    let vol = grid.v_cell_volume();
    let nx = grid.nx_total();
    let mut gain = vec![0.0; grid.len()];
    let mut loss = vec![0.0; grid.len()];
    let grad: f64 = directions(k, dim, &vec![1.0; dim]).iter().map(|(_, w)| w).sum();
    for iv in 0..grid.nv_total() {
        let v = &grid.v_node(iv)[..dim];
        for js in 0..grid.nv_total() {
            let vs = &grid.v_node(js)[..dim];
            let u: Vec<f64> = (0..dim).map(|d| v[d] - vs[d]).collect();
            let u2: f64 = u.iter().map(|x| x * x).sum();
            let phi = radial(k, u2);
            if phi == 0.0 {
                continue;
            }
            for ix in 0..nx {
                loss[iv * nx + ix] += grad * vol * phi * f.at(ix, iv) * g.at(ix, js);
            }
            for (w, weight) in directions(k, dim, &u) {
                let proj: f64 = (0..dim).map(|d| w[d] * u[d]).sum();
                let vp: Vec<f64> = (0..dim).map(|d| v[d] - proj * w[d]).collect();
                let vsp: Vec<f64> = (0..dim).map(|d| vs[d] + proj * w[d]).collect();
                let (hf, hg) = (hat_weights(&grid, &vp), hat_weights(&grid, &vsp));
                for ix in 0..nx {
                    gain[iv * nx + ix] += vol * phi * weight * hat_eval(f, ix, &hf) * hat_eval(g, ix, &hg);
                }
            }
        }
    }
    (gain, loss)
}

/// Random nonnegative field with a few exact zeros.
pub fn random_field(grid: PhaseGrid, seed: u64) -> DistributionFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    DistributionFunction::from_values(grid, values).unwrap()
}

pub fn max_relative_error(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let err = got.iter().zip(want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}
