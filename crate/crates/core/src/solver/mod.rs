//! Picard iteration on the Duhamel formulation
//! `f(t) = U(t)[f₀ + ∫₀ᵗ U(−s) Q(f, f)(s) ds]`
//! on the uniform snapshot lattice `0, dt, …, T`.

pub mod studies;

use serde::Serialize;
use thiserror::Error;

use crate::collision::{collision_operator, CollisionError, CollisionKernel};
use crate::exponents::{
    format_exponent, require_strichartz_pair, to_f64, ExponentError, ExponentTriplet, Rat,
};
use crate::grid::{
    lebesgue_norm_f64, mixed_norm_xv_f64, time_norm_f64, DistributionFunction, GridError,
    NormTrace,
};
use crate::transport::{Interpolation, Transport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Collision(#[from] CollisionError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("trajectory has {got} snapshots, the time lattice needs {expected}")]
    Lattice { expected: usize, got: usize },
    #[error("Picard iteration did not converge in {iterations} iterations (last delta {delta:e})")]
    NotConverged { iterations: usize, delta: f64 },
    #[error("{0}")]
    Study(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Horizon `T`.
    pub horizon: f64,
    pub dt: f64,
    pub picard_tol: f64,
    pub max_iters: usize,
    pub norm_triplet: ExponentTriplet,
    /// Reciprocal container exponent `1/a`.
    #[serde(serialize_with = "ser_exponent")]
    pub inv_a: Rat,
    pub interpolation: Interpolation,
}

fn ser_exponent<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_exponent(*r))
}

impl SolverConfig {
    /// Cubic transport, `a = HM(p, r)`.
    pub fn new(
        horizon: f64,
        dt: f64,
        picard_tol: f64,
        max_iters: usize,
        norm_triplet: ExponentTriplet,
    ) -> Self {
        Self {
            horizon,
            dt,
            picard_tol,
            max_iters,
            inv_a: norm_triplet.inv_a(),
            norm_triplet,
            interpolation: Interpolation::default(),
        }
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn with_inv_a(mut self, inv_a: Rat) -> Self {
        self.inv_a = inv_a;
        self
    }

    /// Same lattice shape (`T/dt` steps) on a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Self {
        let steps = self.steps();
        Self {
            horizon,
            dt: horizon / steps as f64,
            ..self.clone()
        }
    }

    /// Same `dt`, different horizon.
    pub fn extended_to(&self, horizon: f64) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }

    /// Number of steps `T/dt`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(0.0) as usize
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.steps();
        (0..=n).map(|k| k as f64 * self.horizon / n as f64).collect()
    }

    pub fn transport(&self) -> Transport {
        Transport::new(self.interpolation)
    }

    pub fn validate(&self, dim: usize) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::Config(m));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("T = {} must be positive", self.horizon));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.horizon) {
            return bad(format!("dt = {} must lie in (0, T]", self.dt));
        }
        let ratio = self.horizon / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return bad(format!("dt = {} does not divide T = {}", self.dt, self.horizon));
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return bad(format!("picard_tol = {} must be positive", self.picard_tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.inv_a > Rat::from_integer(0) && self.inv_a <= Rat::from_integer(1)) {
            return bad(format!("a = {} must lie in [1, ∞)", format_exponent(self.inv_a)));
        }
        require_strichartz_pair(&self.norm_triplet, dim as u32)?;
        Ok(())
    }
}

/// Snapshots on the time lattice with their norm traces.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<DistributionFunction>,
    /// `‖f(t)‖_{L^a_{x,v}}`.
    pub norm_a: NormTrace,
    /// `‖f(t)‖_{L^r_x L^p_v}`.
    pub norm_rp: NormTrace,
    /// Sup-in-time `L^a` distance between consecutive Picard iterates.
    pub iterate_deltas: Vec<f64>,
    pub converged: bool,
    pub interpolation: Interpolation,
    pub inv_a: Rat,
}

impl SolutionTrajectory {
    pub fn new(
        times: Vec<f64>,
        snapshots: Vec<DistributionFunction>,
        config: &SolverConfig,
    ) -> Result<Self, SolverError> {
        if times.len() != snapshots.len() {
            return Err(SolverError::Lattice {
                expected: times.len(),
                got: snapshots.len(),
            });
        }
        let inv_a = to_f64(config.inv_a);
        let t = &config.norm_triplet;
        let (ir, ip) = (to_f64(t.inv_r()), to_f64(t.inv_p()));
        let na = snapshots.iter().map(|f| lebesgue_norm_f64(f, inv_a)).collect();
        let nrp = snapshots.iter().map(|f| mixed_norm_xv_f64(f, ir, ip)).collect();
        Ok(Self {
            norm_a: NormTrace::new(times.clone(), na)?,
            norm_rp: NormTrace::new(times.clone(), nrp)?,
            times,
            snapshots,
            iterate_deltas: Vec::new(),
            converged: false,
            interpolation: config.interpolation,
            inv_a: config.inv_a,
        })
    }

    /// Free flow `t ↦ U(t)f₀` on the lattice.
    pub fn free(f0: &DistributionFunction, config: &SolverConfig) -> Result<Self, SolverError> {
        let transport = config.transport();
        let times = config.times();
        let snaps = times.iter().map(|&t| transport.apply(f0, t)).collect();
        Self::new(times, snaps, config)
    }

    pub fn initial(&self) -> &DistributionFunction {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &DistributionFunction {
        self.snapshots.last().expect("trajectory is never empty")
    }

    /// `‖f‖_{L^q_T L^r_x L^p_v}`.
    pub fn strichartz_norm(&self, inv_q: Rat) -> Result<f64, SolverError> {
        Ok(time_norm_f64(&self.norm_rp, to_f64(inv_q))?)
    }

    /// `sup_k ‖f(t_k) − g(t_k)‖_{L^a}`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64, SolverError> {
        let inv_a = to_f64(self.inv_a);
        let mut sup = 0.0_f64;
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            sup = sup.max(lebesgue_norm_f64(&a.sub(b)?, inv_a));
        }
        Ok(sup)
    }

    /// Trace of `‖f(t) − g(t)‖_{L^r_x L^p_v}`.
    pub fn difference_trace(&self, other: &Self, config: &SolverConfig) -> Result<NormTrace, SolverError> {
        let t = &config.norm_triplet;
        let (ir, ip) = (to_f64(t.inv_r()), to_f64(t.inv_p()));
        let mut vals = Vec::with_capacity(self.times.len());
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            vals.push(mixed_norm_xv_f64(&a.sub(b)?, ir, ip));
        }
        Ok(NormTrace::new(self.times.clone(), vals)?)
    }
}

/// Trapezoid weights of `∫_{t_lo}^{t_hi}` on lattice indices `lo..=hi`.
pub(crate) fn trapezoid_weight(j: usize, lo: usize, hi: usize, dt: f64) -> f64 {
    if lo == hi {
        0.0
    } else if j == lo || j == hi {
        0.5 * dt
    } else {
        dt
    }
}

/// `Q(f(t_k), f(t_k))` at every snapshot, or `None` when the kernel is
/// trivial.
pub(crate) fn collision_snapshots(
    snapshots: &[DistributionFunction],
    kernel: &CollisionKernel,
) -> Result<Option<Vec<DistributionFunction>>, SolverError> {
    if kernel.is_trivial() {
        return Ok(None);
    }
    let q = snapshots
        .iter()
        .map(|f| collision_operator(f, kernel))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(q))
}

fn lattice_check(traj: &SolutionTrajectory, config: &SolverConfig) -> Result<Vec<f64>, SolverError> {
    let times = config.times();
    if traj.snapshots.len() != times.len() {
        return Err(SolverError::Lattice {
            expected: times.len(),
            got: traj.snapshots.len(),
        });
    }
    let tol = 1e-9 * config.horizon;
    if traj.times.iter().zip(&times).any(|(a, b)| (a - b).abs() > tol) {
        return Err(SolverError::Lattice {
            expected: times.len(),
            got: traj.snapshots.len(),
        });
    }
    Ok(times)
}

/// `U(−t_k) Q(f(t_k), f(t_k))` at every snapshot, or `None` when the kernel
/// is trivial.
pub(crate) fn pulled_back_collisions(
    snapshots: &[DistributionFunction],
    times: &[f64],
    kernel: &CollisionKernel,
    transport: Transport,
) -> Result<Option<Vec<DistributionFunction>>, SolverError> {
    Ok(collision_snapshots(snapshots, kernel)?.map(|q| {
        q.iter()
            .zip(times)
            .map(|(g, &t)| transport.apply(g, -t))
            .collect()
    }))
}

/// One application of the Duhamel map in interaction form:
/// `Sf(t_k) = U(t_k)[f₀ + Σ_{j≤k} w_j U(−t_j) Q(f(t_j), f(t_j))]`
/// with trapezoid weights on `[0, t_k]`.
pub fn duhamel_apply(
    traj: &SolutionTrajectory,
    f0: &DistributionFunction,
    kernel: &CollisionKernel,
    config: &SolverConfig,
) -> Result<SolutionTrajectory, SolverError> {
    let times = lattice_check(traj, config)?;
    f0.grid().ensure_same(traj.initial().grid())?;
    let transport = config.transport();
    let pulled = pulled_back_collisions(&traj.snapshots, &times, kernel, transport)?;
    let half = 0.5 * config.dt;
    let mut acc = f0.clone();
    let mut snaps = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        if let (Some(g), true) = (&pulled, k > 0) {
            acc.add_scaled_in_place(half, &g[k - 1]);
            acc.add_scaled_in_place(half, &g[k]);
        }
        snaps.push(transport.apply(&acc, t));
    }
    SolutionTrajectory::new(times, snaps, config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub trajectory: SolutionTrajectory,
    pub converged: bool,
    pub iterations: usize,
    /// `δₙ = sup_t ‖fⁿ⁺¹(t) − fⁿ(t)‖_{L^a}`.
    pub deltas: Vec<f64>,
    /// `δₙ₊₁ / δₙ`.
    pub contraction_ratios: Vec<f64>,
}

impl PicardOutcome {
    /// Last observed contraction ratio.
    pub fn limiting_ratio(&self) -> Option<f64> {
        self.contraction_ratios.last().copied()
    }

    /// Every ratio after the first is below one.
    pub fn is_geometric(&self) -> bool {
        self.converged && self.contraction_ratios.iter().skip(1).all(|r| *r < 1.0)
    }
}

pub(crate) fn ratios(deltas: &[f64]) -> Vec<f64> {
    deltas
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect()
}

/// Iterates `fⁿ⁺¹ = S fⁿ` from `f⁰(t) = U(t)f₀`. Non-convergence is reported
/// in the outcome, not as an error.
pub fn picard_solve(
    f0: &DistributionFunction,
    kernel: &CollisionKernel,
    config: &SolverConfig,
) -> Result<PicardOutcome, SolverError> {
    config.validate(f0.grid().dim)?;
    kernel.validate(f0.grid().dim)?;
    let mut current = SolutionTrajectory::free(f0, config)?;
    let mut deltas = Vec::new();
    let mut converged = false;
    while deltas.len() < config.max_iters {
        let next = duhamel_apply(&current, f0, kernel, config)?;
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
    Ok(PicardOutcome {
        trajectory: current,
        converged,
        iterations: deltas.len(),
        contraction_ratios: ratios(&deltas),
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_gaussian, PhaseGrid};

    fn triplet() -> ExponentTriplet {
        // (q, r, p) = (5, 5/2, 5/3), N = 2.
        ExponentTriplet::new(Rat::new(1, 5), Rat::new(2, 5), Rat::new(3, 5)).unwrap()
    }

    fn fixture(amplitude: f64) -> DistributionFunction {
        let g = PhaseGrid::new(2, 4.0, 8, 3.0, 8).unwrap();
        make_gaussian(&g, &[2.0, 2.0], &[0.5, 0.0], 0.8, 0.9, amplitude).unwrap()
    }

    #[test]
    fn config_validation() {
        let c = SolverConfig::new(1.0, 0.25, 1e-10, 10, triplet());
        assert!(c.validate(2).is_ok());
        assert_eq!(c.steps(), 4);
        assert_eq!(c.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(SolverConfig::new(1.0, 0.3, 1e-10, 10, triplet()).validate(2).is_err());
        assert!(SolverConfig::new(1.0, 0.25, 0.0, 10, triplet()).validate(2).is_err());
        assert!(SolverConfig::new(1.0, 0.25, 1e-8, 0, triplet()).validate(2).is_err());
        // Endpoint triplet for N = 3, a = 2.
        let ep = ExponentTriplet::new(Rat::new(1, 2), Rat::new(1, 3), Rat::new(2, 3)).unwrap();
        assert!(matches!(
            SolverConfig::new(1.0, 0.25, 1e-8, 5, ep).validate(3),
            Err(SolverError::Exponent(ExponentError::Endpoint(_)))
        ));
    }

    #[test]
    fn trivial_kernel_is_pure_transport() {
        let f0 = fixture(1.0);
        let k = CollisionKernel::new(Rat::new(0, 1), 8).with_b0(0.0);
        let c = SolverConfig::new(1.0, 0.25, 1e-12, 5, triplet());
        let free = SolutionTrajectory::free(&f0, &c).unwrap();
        let out = picard_solve(&f0, &k, &c).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.trajectory.snapshots, free.snapshots);
    }

    #[test]
    fn zero_data_is_fixed_point() {
        let f0 = fixture(0.0);
        let k = CollisionKernel::new(Rat::new(0, 1), 8);
        let c = SolverConfig::new(1.0, 0.25, 1e-12, 5, triplet());
        let out = picard_solve(&f0, &k, &c).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.deltas, vec![0.0]);
        assert!(out.trajectory.snapshots.iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn lattice_mismatch_rejected() {
        let f0 = fixture(0.1);
        let k = CollisionKernel::new(Rat::new(0, 1), 8);
        let c = SolverConfig::new(1.0, 0.25, 1e-12, 5, triplet());
        let other = SolverConfig::new(1.0, 0.5, 1e-12, 5, triplet());
        let traj = SolutionTrajectory::free(&f0, &other).unwrap();
        assert!(matches!(
            duhamel_apply(&traj, &f0, &k, &c),
            Err(SolverError::Lattice { .. })
        ));
    }

    #[test]
    fn small_data_contracts() {
        let f0 = fixture(1e-2);
        let k = CollisionKernel::new(Rat::new(0, 1), 8);
        let c = SolverConfig::new(0.5, 0.125, 1e-14, 20, triplet());
        let out = picard_solve(&f0, &k, &c).unwrap();
        assert!(out.converged, "{:?}", out.deltas);
        assert!(out.is_geometric());
        assert!(out.trajectory.norm_a.len() == 5);
    }

    #[test]
    fn trapezoid_weights_sum_to_interval() {
        let dt = 0.1;
        for hi in 0..6 {
            let s: f64 = (0..=hi).map(|j| trapezoid_weight(j, 0, hi, dt)).sum();
            assert!((s - hi as f64 * dt).abs() < 1e-15);
        }
    }
}
