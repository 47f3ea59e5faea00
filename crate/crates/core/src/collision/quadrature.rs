//! Angular rules on the admissible part of `S^{N−1}`, i.e. directions with
//! `0 ≤ θ ≤ π/2` measured from the relative velocity.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on
/// `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One direction of the angular rule, expressed in the frame attached to the
/// relative velocity `u`: `ω = cosθ ê + sinθ (cosφ e₁ + sinφ e₂)` in 3-D and
/// `ω = cosθ ê + sinθ ê⊥` (signed θ) in 2-D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularNode {
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularRule {
    pub dim: usize,
    pub nodes: Vec<AngularNode>,
}

impl AngularRule {
    /// `count` uniform midpoint nodes on θ ∈ [−π/2, π/2] for N = 2. For
    /// N = 3, a Gauss–Legendre rule in `cosθ ∈ [0, 1]` times a uniform
    /// azimuth rule with roughly twice as many points, about `count` total.
    pub fn new(dim: usize, count: usize) -> Self {
        let count = count.max(1);
        let nodes = match dim {
            2 => (0..count)
                .map(|i| {
                    let theta = -PI / 2.0 + (i as f64 + 0.5) * PI / count as f64;
                    AngularNode {
                        cos_theta: theta.cos(),
                        sin_theta: theta.sin(),
                        cos_phi: 1.0,
                        sin_phi: 0.0,
                        weight: PI / count as f64,
                    }
                })
                .collect(),
            3 => {
                let n_mu = ((count as f64 / 2.0).sqrt().round() as usize).max(1);
                let n_phi = (count / n_mu).max(1);
                let (x, w) = gauss_legendre(n_mu);
                let mut nodes = Vec::with_capacity(n_mu * n_phi);
                for (xi, wi) in x.iter().zip(&w) {
                    let mu = 0.5 * (xi + 1.0);
                    let sin = (1.0 - mu * mu).max(0.0).sqrt();
                    for j in 0..n_phi {
                        let phi = (j as f64 + 0.5) * 2.0 * PI / n_phi as f64;
                        nodes.push(AngularNode {
                            cos_theta: mu,
                            sin_theta: sin,
                            cos_phi: phi.cos(),
                            sin_phi: phi.sin(),
                            weight: 0.5 * wi * 2.0 * PI / n_phi as f64,
                        });
                    }
                }
                nodes
            }
            _ => Vec::new(),
        };
        Self { dim, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Measure of the admissible set, `Σ w`.
    pub fn measure(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

/// Orthonormal frame `(ê, e₁, e₂)` attached to the relative velocity `u`.
/// For `u = 0` the frame is the coordinate frame. In 3-D, `e₁` is the
/// coordinate axis least aligned with `ê`, orthogonalised, and `e₂ = ê × e₁`.
pub fn relative_frame(u: [f64; 3], dim: usize) -> [[f64; 3]; 3] {
    let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let e = if norm > 0.0 {
        [u[0] / norm, u[1] / norm, u[2] / norm]
    } else {
        [1.0, 0.0, 0.0]
    };
    if dim == 2 {
        return [e, [-e[1], e[0], 0.0], [0.0; 3]];
    }
    let mut axis = 0;
    for d in 1..3 {
        if e[d].abs() < e[axis].abs() {
            axis = d;
        }
    }
    let mut h = [0.0; 3];
    h[axis] = 1.0;
    let dot = e[axis];
    let mut e1 = [h[0] - dot * e[0], h[1] - dot * e[1], h[2] - dot * e[2]];
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|c| *c /= n1);
    let e2 = [
        e[1] * e1[2] - e[2] * e1[1],
        e[2] * e1[0] - e[0] * e1[2],
        e[0] * e1[1] - e[1] * e1[0],
    ];
    [e, e1, e2]
}

/// The unit vector `ω` of `node` in `frame`.
pub fn direction(node: &AngularNode, frame: &[[f64; 3]; 3], dim: usize) -> [f64; 3] {
    let [e, e1, e2] = frame;
    let mut w = [0.0; 3];
    for d in 0..dim {
        w[d] = node.cos_theta * e[d]
            + node.sin_theta * (node.cos_phi * e1[d] + node.sin_phi * e2[d]);
    }
    w
}
