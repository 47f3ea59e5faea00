//! Empirical constants of the contraction estimates: amplitude sweeps,
//! horizon sweeps and Lipschitz dependence on the data.

use serde::Serialize;

use super::{collision_snapshots, picard_solve, SolutionTrajectory, SolverConfig, SolverError};
use crate::collision::CollisionKernel;
use crate::exponents::{beta, format_exponent, theorem2_triplets, to_f64, Rat};
use crate::grid::{lebesgue_norm_f64, mixed_norm_xv_f64, time_norm_f64, DistributionFunction, NormTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Smallness,
    TimeScaling,
}

/// One run of a sweep; `parameter` is the amplitude or the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub parameter: f64,
    /// `‖f₀‖_{L^a}`.
    pub data_norm: f64,
    /// `‖f‖_{L^q_T L^r_x L^p_v}`.
    pub solution_norm: f64,
    /// Size of the nonlinear contribution (study dependent).
    pub nonlinear_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub limiting_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub study: StudyKind,
    pub rows: Vec<EstimateRow>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Largest relative fit residual over the smaller half of the amplitudes.
    pub residual_small_half: Option<f64>,
    pub largest_contractive_amplitude: Option<f64>,
    pub fitted_exponent: Option<f64>,
    pub expected_exponent: Option<f64>,
    /// Log-log slope of `‖W Q‖_{L^q_T L^r_x L^p_v} / ‖f‖²` itself.
    pub direct_exponent: Option<f64>,
}

/// Least-squares solution of `y ≈ c₁ a + c₂ b` without intercept.
fn fit_two(a: &[f64], b: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let (mut saa, mut sab, mut sbb, mut say, mut sby) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((a, b), y) in a.iter().zip(b).zip(y) {
        saa += a * a;
        sab += a * b;
        sbb += b * b;
        say += a * y;
        sby += b * y;
    }
    let det = saa * sbb - sab * sab;
    if !(det.abs() > 1e-12 * (saa * sbb).max(f64::MIN_POSITIVE)) {
        return None;
    }
    Some(((say * sbb - sby * sab) / det, (saa * sby - sab * say) / det))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Solves for `amplitude · profile` at each amplitude and fits
/// `‖f‖_{L^q L^r L^p} ≈ C₁‖f₀‖_{L^a} + C₂‖f‖²_{L^q L^r L^p}`.
pub fn smallness_study(
    profile: &DistributionFunction,
    kernel: &CollisionKernel,
    config: &SolverConfig,
    amplitudes: &[f64],
) -> Result<EstimateReport, SolverError> {
    let distinct: Vec<f64> = {
        let mut a: Vec<f64> = amplitudes.iter().copied().filter(|a| *a != 0.0).collect();
        a.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        a.dedup();
        a
    };
    if distinct.len() < 2 {
        return Err(SolverError::Study(
            "smallness fit needs at least two distinct nonzero amplitudes".into(),
        ));
    }
    let inv_a = to_f64(config.inv_a);
    let inv_q = config.norm_triplet.inv_q();
    let mut rows = Vec::new();
    for &amp in amplitudes {
        let f0 = profile.scale(amp);
        let out = picard_solve(&f0, kernel, config)?;
        let free = SolutionTrajectory::free(&f0, config)?;
        let nonlinear = time_norm_f64(
            &out.trajectory.difference_trace(&free, config)?,
            to_f64(inv_q),
        )?;
        rows.push(EstimateRow {
            parameter: amp,
            data_norm: lebesgue_norm_f64(&f0, inv_a),
            solution_norm: out.trajectory.strichartz_norm(inv_q)?,
            nonlinear_norm: nonlinear,
            converged: out.converged,
            iterations: out.iterations,
            limiting_ratio: out.limiting_ratio(),
        });
    }
    let used: Vec<&EstimateRow> = rows.iter().filter(|r| r.converged).collect();
    let d: Vec<f64> = used.iter().map(|r| r.data_norm).collect();
    let x: Vec<f64> = used.iter().map(|r| r.solution_norm).collect();
    let x2: Vec<f64> = x.iter().map(|x| x * x).collect();
    let (c1, c2) = fit_two(&d, &x2, &x).ok_or_else(|| {
        SolverError::Study("smallness fit is degenerate (too few converged runs)".into())
    })?;

    let mut small: Vec<&&EstimateRow> = used.iter().filter(|r| r.parameter != 0.0).collect();
    small.sort_by(|a, b| a.parameter.abs().total_cmp(&b.parameter.abs()));
    small.truncate(small.len().div_ceil(2));
    let residual = small
        .iter()
        .map(|r| {
            let pred = c1 * r.data_norm + c2 * r.solution_norm * r.solution_norm;
            (r.solution_norm - pred).abs() / r.solution_norm
        })
        .fold(0.0, f64::max);
    let largest = rows
        .iter()
        .filter(|r| r.converged && r.limiting_ratio.is_none_or(|q| q < 1.0))
        .map(|r| r.parameter.abs())
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));

    Ok(EstimateReport {
        study: StudyKind::Smallness,
        rows,
        c1: Some(c1),
        c2: Some(c2),
        residual_small_half: Some(residual),
        largest_contractive_amplitude: largest,
        fitted_exponent: None,
        expected_exponent: None,
        direct_exponent: None,
    })
}

/// For fixed data, sweeps the horizon `T` (keeping the number of steps) and
/// fits the power of `T` in the time-Hölder step of the local theory,
/// `‖Q(f, f)‖_{L^{q̃′}_T L^{r̃′}_x L^{p̃′}_v} ≲ T^β ‖f‖²_{L^q_T L^r_x L^p_v}`,
/// with the exponents of the `α`-family. The norm triplet of `config` is
/// replaced by that family's primal triplet.
pub fn tbeta_study(
    f0: &DistributionFunction,
    kernel: &CollisionKernel,
    config: &SolverConfig,
    horizons: &[f64],
    alpha: Rat,
) -> Result<EstimateReport, SolverError> {
    let dim = f0.grid().dim as u32;
    let expected = beta(kernel.gamma, dim)?;
    let pair = theorem2_triplets(alpha, kernel.gamma, dim)?;
    if horizons.len() < 2 {
        return Err(SolverError::Study("horizon sweep needs at least two horizons".into()));
    }
    let mut base = config.clone();
    base.norm_triplet = pair.primal;
    base.inv_a = pair.inv_a;
    let dual = pair.dual_primed;
    let inv_a = to_f64(base.inv_a);

    let mut rows = Vec::new();
    let mut hoelder = Vec::new();
    let mut direct = Vec::new();
    for &horizon in horizons {
        let cfg = base.with_horizon(horizon);
        let out = picard_solve(f0, kernel, &cfg)?;
        if !out.converged {
            return Err(SolverError::NotConverged {
                iterations: out.iterations,
                delta: out.deltas.last().copied().unwrap_or(f64::NAN),
            });
        }
        let traj = &out.trajectory;
        let x = traj.strichartz_norm(pair.primal.inv_q())?;
        let q = collision_snapshots(&traj.snapshots, kernel)?.unwrap_or_else(|| {
            traj.snapshots.iter().map(|f| f.scale(0.0)).collect()
        });
        let (ir, ip) = (to_f64(dual.inv_r()), to_f64(dual.inv_p()));
        let qtrace = NormTrace::new(
            traj.times.clone(),
            q.iter().map(|g| mixed_norm_xv_f64(g, ir, ip)).collect(),
        )?;
        let qn = time_norm_f64(&qtrace, to_f64(dual.inv_q()))?;
        let free = SolutionTrajectory::free(f0, &cfg)?;
        let wq = time_norm_f64(
            &traj.difference_trace(&free, &cfg)?,
            to_f64(pair.primal.inv_q()),
        )?;
        hoelder.push(qn / (x * x));
        direct.push(wq / (x * x));
        rows.push(EstimateRow {
            parameter: horizon,
            data_norm: lebesgue_norm_f64(f0, inv_a),
            solution_norm: x,
            nonlinear_norm: qn,
            converged: out.converged,
            iterations: out.iterations,
            limiting_ratio: out.limiting_ratio(),
        });
    }
    Ok(EstimateReport {
        study: StudyKind::TimeScaling,
        rows,
        c1: None,
        c2: None,
        residual_small_half: None,
        largest_contractive_amplitude: None,
        fitted_exponent: loglog_slope(horizons, &hoelder),
        expected_exponent: Some(to_f64(expected)),
        direct_exponent: loglog_slope(horizons, &direct),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    /// `‖f − g‖_{L^q L^r L^p} / ‖f₀ − g₀‖_{L^a}`; zero when the data coincide.
    pub ratio: f64,
    /// The data coincide and the ratio is the `0/0` convention.
    pub degenerate: bool,
    pub data_distance: f64,
    pub solution_distance: f64,
    pub q: String,
    pub r: String,
    pub p: String,
}

/// Solves both Cauchy problems and compares the solutions in the
/// Strichartz norm against the data distance.
pub fn lipschitz_check(
    f0: &DistributionFunction,
    g0: &DistributionFunction,
    kernel: &CollisionKernel,
    config: &SolverConfig,
) -> Result<LipschitzReport, SolverError> {
    f0.grid().ensure_same(g0.grid())?;
    let t = config.norm_triplet;
    let fmt = |r: Rat| format_exponent(r);
    let data_distance = lebesgue_norm_f64(&f0.sub(g0)?, to_f64(config.inv_a));
    let solve = |d: &DistributionFunction| -> Result<SolutionTrajectory, SolverError> {
        let out = picard_solve(d, kernel, config)?;
        if !out.converged {
            return Err(SolverError::NotConverged {
                iterations: out.iterations,
                delta: out.deltas.last().copied().unwrap_or(f64::NAN),
            });
        }
        Ok(out.trajectory)
    };
    let f = solve(f0)?;
    if data_distance == 0.0 {
        return Ok(LipschitzReport {
            ratio: 0.0,
            degenerate: true,
            data_distance,
            solution_distance: 0.0,
            q: fmt(t.inv_q()),
            r: fmt(t.inv_r()),
            p: fmt(t.inv_p()),
        });
    }
    let g = solve(g0)?;
    let solution_distance = time_norm_f64(&f.difference_trace(&g, config)?, to_f64(t.inv_q()))?;
    Ok(LipschitzReport {
        ratio: solution_distance / data_distance,
        degenerate: false,
        data_distance,
        solution_distance,
        q: fmt(t.inv_q()),
        r: fmt(t.inv_r()),
        p: fmt(t.inv_p()),
    })
}
