//! Scattering state `f₊ = f₀ + ∫₀^∞ U(−t) Q(f, f) dt` truncated at the end of
//! the lattice, the defect trace `‖U(−t)f(t) − f₊‖_{L^a}` and the wave
//! operator `Ω₊ f₊ = f₀` by backward Picard iteration.

use serde::Serialize;

use crate::collision::CollisionKernel;
use crate::grid::{lebesgue_norm_f64, DistributionFunction, NormTrace};
use crate::exponents::to_f64;
use crate::solver::{
    collision_snapshots, picard_solve, pulled_back_collisions, ratios, trapezoid_weight, PicardOutcome,
    SolutionTrajectory, SolverConfig, SolverError,
};
use crate::transport::Transport;

/// How `U(−t)` is applied to the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullBack {
    /// `adjoint_stream(·, t)`.
    Adjoint,
    /// `free_stream(·, −t)`.
    NegatedTime,
}

/// Pulled-back integrand `G_k = U(−t_k) Q(f(t_k), f(t_k))` on the lattice.
#[derive(Debug, Clone)]
pub struct ScatteringIntegrand {
    pub times: Vec<f64>,
    pub terms: Option<Vec<DistributionFunction>>,
    dt: f64,
}

impl ScatteringIntegrand {
    pub fn new(
        traj: &SolutionTrajectory,
        kernel: &CollisionKernel,
        via: PullBack,
    ) -> Result<Self, SolverError> {
        if !traj.converged {
            return Err(SolverError::NotConverged {
                iterations: traj.iterate_deltas.len(),
                delta: traj.iterate_deltas.last().copied().unwrap_or(f64::NAN),
            });
        }
        let transport = Transport::new(traj.interpolation);
        let q = collision_snapshots(&traj.snapshots, kernel)?;
        let terms = q.map(|q| {
            q.iter()
                .zip(&traj.times)
                .map(|(g, &t)| match via {
                    PullBack::Adjoint => transport.adjoint(g, t),
                    PullBack::NegatedTime => transport.apply(g, -t),
                })
                .collect()
        });
        let dt = if traj.times.len() > 1 {
            traj.times[1] - traj.times[0]
        } else {
            0.0
        };
        Ok(Self {
            times: traj.times.clone(),
            terms,
            dt,
        })
    }

    fn last(&self) -> usize {
        self.times.len() - 1
    }

    /// Trapezoid sum over lattice indices `lo..=hi`, added to `base`.
    pub fn partial(&self, base: &DistributionFunction, lo: usize, hi: usize) -> DistributionFunction {
        let mut out = base.clone();
        if let Some(terms) = &self.terms {
            for (j, g) in terms.iter().enumerate().take(hi + 1).skip(lo) {
                let w = trapezoid_weight(j, lo, hi, self.dt);
                if w != 0.0 {
                    out.add_scaled_in_place(w, g);
                }
            }
        }
        out
    }

    /// `∫_{t_lo}^{t_hi}` on its own.
    pub fn segment(&self, like: &DistributionFunction, lo: usize, hi: usize) -> DistributionFunction {
        self.partial(&like.scale(0.0), lo, hi)
    }
}

/// `f₊ = f₀ + Σ_k w_k U(−t_k) Q(f(t_k), f(t_k))` over the whole lattice.
pub fn scattering_state(
    traj: &SolutionTrajectory,
    kernel: &CollisionKernel,
) -> Result<DistributionFunction, SolverError> {
    scattering_state_via(traj, kernel, PullBack::Adjoint)
}

pub fn scattering_state_via(
    traj: &SolutionTrajectory,
    kernel: &CollisionKernel,
    via: PullBack,
) -> Result<DistributionFunction, SolverError> {
    let integrand = ScatteringIntegrand::new(traj, kernel, via)?;
    Ok(integrand.partial(traj.initial(), 0, integrand.last()))
}

/// `t_k ↦ ‖U(−t_k) f(t_k) − f₊‖_{L^a}`.
pub fn scattering_defect(
    traj: &SolutionTrajectory,
    f_plus: &DistributionFunction,
) -> Result<NormTrace, SolverError> {
    let transport = Transport::new(traj.interpolation);
    let inv_a = to_f64(traj.inv_a);
    let mut values = Vec::with_capacity(traj.times.len());
    for (f, &t) in traj.snapshots.iter().zip(&traj.times) {
        values.push(lebesgue_norm_f64(&transport.adjoint(f, t).sub(f_plus)?, inv_a));
    }
    Ok(NormTrace::new(traj.times.clone(), values)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveOutcome {
    pub f0: DistributionFunction,
    /// Backward solution `f(t)` with `U(−t)f(t) → f₊`.
    pub trajectory: SolutionTrajectory,
    pub converged: bool,
    pub iterations: usize,
    pub deltas: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
}

/// `Ω₊ f₊`: iterates `f(t_k) = U(t_k)[f₊ − Σ_{j≥k} w_j U(−t_j) Q_j]` from
/// `U(t)f₊` on `[0, T]` and returns `f(0)`. The trapezoid weights on
/// `[0, t_k]` and `[t_k, T]` add up to those on `[0, T]`, so a converged
/// forward run is a fixed point of this map up to rounding.
pub fn wave_operator(
    f_plus: &DistributionFunction,
    kernel: &CollisionKernel,
    config: &SolverConfig,
) -> Result<WaveOutcome, SolverError> {
    config.validate(f_plus.grid().dim)?;
    kernel.validate(f_plus.grid().dim)?;
    let transport = config.transport();
    let times = config.times();
    let half = 0.5 * config.dt;
    let mut current = SolutionTrajectory::free(f_plus, config)?;
    let mut deltas = Vec::new();
    let mut converged = false;
    while deltas.len() < config.max_iters {
        let pulled = pulled_back_collisions(&current.snapshots, &times, kernel, transport)?;
        let mut acc = f_plus.clone();
        let mut snaps = vec![DistributionFunction::zeros(*f_plus.grid()); times.len()];
        for k in (0..times.len()).rev() {
            if let (Some(g), true) = (&pulled, k + 1 < times.len()) {
                acc.add_scaled_in_place(-half, &g[k + 1]);
                acc.add_scaled_in_place(-half, &g[k]);
            }
            snaps[k] = transport.apply(&acc, times[k]);
        }
        let next = SolutionTrajectory::new(times.clone(), snaps, config)?;
        let delta = next.sup_distance(&current)?;
        deltas.push(delta);
        current = next;
        if !delta.is_finite() {
            break;
        }
        if delta < config.picard_tol {
            converged = true;
            break;
        }
    }
    current.iterate_deltas = deltas.clone();
    current.converged = converged;
    Ok(WaveOutcome {
        f0: current.initial().clone(),
        trajectory: current,
        converged,
        iterations: deltas.len(),
        contraction_ratios: ratios(&deltas),
        deltas,
    })
}

/// Result of a forward run extended until the scattering integral settles.
#[derive(Debug, Clone)]
pub struct ScatteringRun {
    pub horizon: f64,
    pub plateau_reached: bool,
    pub outcome: PicardOutcome,
    pub f_plus: DistributionFunction,
    pub defect: NormTrace,
    pub f_plus_norm: f64,
    /// `‖∫_{3T/4}^{T} U(−t)Q dt‖_{L^a}`.
    pub last_quarter_increment: f64,
    /// `‖∫_{T/2}^{T}‖ / ‖∫_0^T‖` (zero when the integral vanishes).
    pub tail_fraction: f64,
    /// `‖f₊ − f₀‖_{L^a} / ‖f₊‖_{L^a}`.
    pub nonlinear_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringSummary {
    pub horizon: f64,
    pub plateau_reached: bool,
    pub converged: bool,
    pub iterations: usize,
    pub f_plus_norm: f64,
    pub last_quarter_increment: f64,
    pub tail_fraction: f64,
    pub nonlinear_share: f64,
    pub final_defect: f64,
}

impl ScatteringRun {
    pub fn summary(&self) -> ScatteringSummary {
        ScatteringSummary {
            horizon: self.horizon,
            plateau_reached: self.plateau_reached,
            converged: self.outcome.converged,
            iterations: self.outcome.iterations,
            f_plus_norm: self.f_plus_norm,
            last_quarter_increment: self.last_quarter_increment,
            tail_fraction: self.tail_fraction,
            nonlinear_share: self.nonlinear_share,
            final_defect: self.defect.last().unwrap_or(0.0),
        }
    }

    /// The defect is non-increasing over the last quarter of the horizon.
    pub fn defect_decreasing_at_end(&self) -> bool {
        decreasing_last_quarter(&self.defect)
    }
}

/// Non-increasing over the samples with `t ≥ 3T/4`.
pub fn decreasing_last_quarter(trace: &NormTrace) -> bool {
    let t_end = trace.times().last().copied().unwrap_or(0.0);
    let vals: Vec<f64> = trace
        .times()
        .iter()
        .zip(trace.values())
        .filter(|(t, _)| **t >= 0.75 * t_end - 1e-12)
        .map(|(_, v)| *v)
        .collect();
    vals.len() >= 2 && vals.windows(2).all(|w| w[1] <= w[0])
}

/// Solves forward on `[0, T]`, doubling `T` (same `dt`) until the last
/// quarter of the scattering integral is below `scatter_tol · ‖f₊‖_{L^a}` or
/// `max_horizon` is reached. Stops early if the Picard iteration fails.
pub fn scatter_adaptive(
    f0: &DistributionFunction,
    kernel: &CollisionKernel,
    config: &SolverConfig,
    scatter_tol: f64,
    max_horizon: f64,
) -> Result<ScatteringRun, SolverError> {
    let inv_a = to_f64(config.inv_a);
    let mut horizon = config.horizon;
    loop {
        let cfg = config.extended_to(horizon);
        let outcome = picard_solve(f0, kernel, &cfg)?;
        let traj = &outcome.trajectory;
        if !outcome.converged {
            let defect = NormTrace::new(vec![0.0], vec![0.0])?;
            return Ok(ScatteringRun {
                horizon,
                plateau_reached: false,
                f_plus: traj.initial().clone(),
                defect,
                f_plus_norm: f64::NAN,
                last_quarter_increment: f64::NAN,
                tail_fraction: f64::NAN,
                nonlinear_share: f64::NAN,
                outcome,
            });
        }
        let integrand = ScatteringIntegrand::new(traj, kernel, PullBack::Adjoint)?;
        let last = integrand.last();
        let f_plus = integrand.partial(traj.initial(), 0, last);
        let f_plus_norm = lebesgue_norm_f64(&f_plus, inv_a);
        let zero = f0.scale(0.0);
        let quarter = lebesgue_norm_f64(&integrand.segment(&zero, (3 * last).div_ceil(4), last), inv_a);
        let total = lebesgue_norm_f64(&integrand.segment(&zero, 0, last), inv_a);
        let tail = lebesgue_norm_f64(&integrand.segment(&zero, last.div_ceil(2), last), inv_a);
        let plateau = quarter <= scatter_tol * f_plus_norm;
        if plateau || 2.0 * horizon > max_horizon * (1.0 + 1e-12) {
            let defect = scattering_defect(traj, &f_plus)?;
            return Ok(ScatteringRun {
                horizon,
                plateau_reached: plateau,
                defect,
                f_plus_norm,
                last_quarter_increment: quarter,
                tail_fraction: if total > 0.0 { tail / total } else { 0.0 },
                nonlinear_share: if f_plus_norm > 0.0 { total / f_plus_norm } else { 0.0 },
                f_plus,
                outcome,
            });
        }
        horizon *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{ExponentTriplet, Rat};
    use crate::grid::{make_gaussian, PhaseGrid};

    fn config() -> SolverConfig {
        let t = ExponentTriplet::new(Rat::new(1, 5), Rat::new(2, 5), Rat::new(3, 5)).unwrap();
        SolverConfig::new(1.0, 0.25, 1e-12, 20, t)
    }

    fn data(amplitude: f64) -> DistributionFunction {
        let g = PhaseGrid::new(2, 4.0, 16, 3.0, 8).unwrap();
        make_gaussian(&g, &[2.0, 2.0], &[0.5, 0.0], 0.8, 0.9, amplitude).unwrap()
    }

    #[test]
    fn trivial_kernel_scatters_to_data() {
        let k = CollisionKernel::new(Rat::new(0, 1), 8).with_b0(0.0);
        let f0 = data(1.0);
        let out = picard_solve(&f0, &k, &config()).unwrap();
        let fp = scattering_state(&out.trajectory, &k).unwrap();
        assert_eq!(fp, f0);
        let w = wave_operator(&f0, &k, &config()).unwrap();
        assert!(w.converged);
        assert_eq!(w.f0, f0);
        let d = scattering_defect(&out.trajectory, &fp).unwrap();
        let worst = d.values().iter().fold(0.0_f64, |m, v| m.max(*v)) / lebesgue_norm_f64(&f0, 0.5);
        assert!(worst < 5e-3, "{worst}");
    }

    #[test]
    fn zero_data() {
        let k = CollisionKernel::new(Rat::new(0, 1), 8);
        let f0 = data(0.0);
        let out = picard_solve(&f0, &k, &config()).unwrap();
        assert_eq!(scattering_state(&out.trajectory, &k).unwrap().max_abs(), 0.0);
        assert_eq!(wave_operator(&f0, &k, &config()).unwrap().f0.max_abs(), 0.0);
    }

    #[test]
    fn unconverged_trajectory_rejected() {
        let k = CollisionKernel::new(Rat::new(0, 1), 8);
        let f0 = data(0.05);
        let mut c = config();
        c.max_iters = 1;
        let out = picard_solve(&f0, &k, &c).unwrap();
        assert!(!out.converged);
        assert!(matches!(
            scattering_state(&out.trajectory, &k),
            Err(SolverError::NotConverged { .. })
        ));
    }

    #[test]
    fn adjoint_and_negated_time_agree_exactly() {
        let k = CollisionKernel::new(Rat::new(0, 1), 8);
        let f0 = data(0.05);
        let out = picard_solve(&f0, &k, &config()).unwrap();
        let a = scattering_state_via(&out.trajectory, &k, PullBack::Adjoint).unwrap();
        let b = scattering_state_via(&out.trajectory, &k, PullBack::NegatedTime).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quarter_trace_monotonicity() {
        let t = NormTrace::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![5.0, 9.0, 3.0, 2.0, 2.0]).unwrap();
        assert!(decreasing_last_quarter(&t));
        let u = NormTrace::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![5.0, 9.0, 3.0, 2.0, 2.5]).unwrap();
        assert!(!decreasing_last_quarter(&u));
    }
}
