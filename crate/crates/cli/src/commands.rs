//! Subcommand implementations.

use std::path::{Path, PathBuf};

use serde::Serialize;

use kinlab::collision::bounds::{verify_bilinear_bound, FamilySpec, VelocityExponents, Which};
use kinlab::exponents::{
    feasibility_scan, format_exponent, kt_admissible, parse_exponent, parse_rational, ScanMode,
};
use kinlab::grid::{lebesgue_norm_a, mixed_norm_xv, time_norm, NormTrace};
use kinlab::io::read_snapshot;
use kinlab::scattering::{scatter_adaptive, wave_operator, ScatteringSummary};
use kinlab::solver::{picard_solve, PicardOutcome};
use kinlab::{CollisionKernel, DistributionFunction, ExponentTriplet, Interpolation, Rat, Transport};

use crate::config::{parse_real, RunConfig};
use crate::data::DataSpec;
use crate::output::{
    create_dir, csv, defect_csv, emit, picard_csv, snapshot, to_json, traces_csv, write_snapshots,
    write_text,
};
use crate::{
    AdmissibleArgs, Cli, CliError, Command, NormArgs, RegionArgs, RunArgs, StreamArgs, VerifyArgs,
    WaveArgs,
};

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn triplet(q: &str, r: &str, p: &str) -> Result<ExponentTriplet, CliError> {
    ExponentTriplet::parse(q, r, p).map_err(invalid)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Admissible(a) => admissible(a),
        Command::Region(a) => region(a),
        Command::Norm(a) => norm(a),
        Command::Stream(a) => stream(a),
        Command::VerifyBounds(a) => verify_bounds(a),
        Command::Simulate(a) => simulate(a),
        Command::Scatter(a) => scatter(a),
        Command::Wave(a) => wave(a),
    }
}

fn admissible(a: &AdmissibleArgs) -> Result<(), CliError> {
    let t = triplet(&a.q, &a.r, &a.p)?;
    let report = kt_admissible(&t, a.dim).map_err(invalid)?;
    emit(a.out.as_deref(), &to_json(&report))
}

fn region(a: &RegionArgs) -> Result<(), CliError> {
    let gamma = parse_rational(&a.gamma).map_err(invalid)?;
    let mode: ScanMode = a.mode.parse().map_err(invalid)?;
    let points = feasibility_scan(gamma, a.dim, mode, a.denominator).map_err(invalid)?;
    let text = csv(
        "inv_p,inv_r,inv_q,a",
        points
            .iter()
            .map(|p| format!("{},{},{},{}", p.inv_p, p.inv_r, p.inv_q, format_exponent(p.inv_a))),
    );
    emit(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct SnapshotNorm {
    path: String,
    t: f64,
    norm_rp: f64,
    norm_a: f64,
}

#[derive(Serialize)]
struct NormReport {
    q: String,
    r: String,
    p: String,
    a: String,
    snapshots: Vec<SnapshotNorm>,
    time_norm: Option<f64>,
}

fn norm(a: &NormArgs) -> Result<(), CliError> {
    let t = triplet(&a.q, &a.r, &a.p)?;
    let inv_a = match &a.a {
        Some(text) => parse_exponent(text).map_err(invalid)?,
        None => t.inv_a(),
    };
    let mut rows = Vec::new();
    let mut grid = None;
    for path in &a.snapshot {
        let snap = read_snapshot(path).map_err(invalid)?;
        match &grid {
            None => grid = Some(*snap.f.grid()),
            Some(g) => g.ensure_same(snap.f.grid()).map_err(|e| {
                invalid(format!("{}: inconsistent grid metadata: {e}", path.display()))
            })?,
        }
        rows.push(SnapshotNorm {
            path: path.display().to_string(),
            t: snap.t,
            norm_rp: mixed_norm_xv(&snap.f, t.inv_r(), t.inv_p()),
            norm_a: lebesgue_norm_a(&snap.f, inv_a),
        });
    }
    let time_norm = if rows.len() > 1 {
        let trace = NormTrace::new(
            rows.iter().map(|r| r.t).collect(),
            rows.iter().map(|r| r.norm_rp).collect(),
        )
        .map_err(|e| invalid(format!("snapshot times: {e}")))?;
        Some(time_norm(&trace, t.inv_q()).map_err(invalid)?)
    } else {
        None
    };
    let report = NormReport {
        q: format_exponent(t.inv_q()),
        r: format_exponent(t.inv_r()),
        p: format_exponent(t.inv_p()),
        a: format_exponent(inv_a),
        snapshots: rows,
        time_norm,
    };
    emit(a.out.as_deref(), &to_json(&report))
}

fn stream(a: &StreamArgs) -> Result<(), CliError> {
    let t = parse_real(&a.t).map_err(|e| invalid(format!("--t `{}`: {e}", a.t)))?;
    let interp: Interpolation = a.interpolation.parse().map_err(invalid)?;
    let snap = read_snapshot(&a.snapshot).map_err(invalid)?;
    let tr = Transport::new(interp);
    let out = if a.adjoint { tr.adjoint(&snap.f, t) } else { tr.apply(&snap.f, t) };
    let t_out = if a.adjoint { snap.t - t } else { snap.t + t };
    snapshot(&a.out, &out, t_out)
}

fn verify_bounds(a: &VerifyArgs) -> Result<(), CliError> {
    let which: Which = a.which.parse().map_err(invalid)?;
    let gamma = parse_rational(&a.gamma).map_err(invalid)?;
    let exps = VelocityExponents::new(
        parse_exponent(&a.pv).map_err(invalid)?,
        parse_exponent(&a.qv).map_err(invalid)?,
        parse_exponent(&a.rv).map_err(invalid)?,
    );
    let kernel = CollisionKernel::new(gamma, a.angular_nodes).with_b0(a.b0);
    let family = FamilySpec::new(a.samples, a.seed, a.v_max, a.resolutions.clone());
    let report = verify_bilinear_bound(which, exps, &kernel, a.dim, &family).map_err(invalid)?;
    emit(a.out.as_deref(), &to_json(&report))
}

#[derive(Serialize)]
struct RunSummary<R: Serialize> {
    command: &'static str,
    version: &'static str,
    threads: usize,
    config: RunConfig,
    results: R,
    files: Vec<String>,
}

#[derive(Serialize)]
struct PicardResults {
    converged: bool,
    iterations: usize,
    final_delta: Option<f64>,
    limiting_ratio: Option<f64>,
    geometric: bool,
    strichartz_norm: f64,
    norm_a_initial: f64,
    norm_a_final: f64,
}

impl PicardResults {
    fn new(out: &PicardOutcome, inv_q: Rat) -> Result<Self, CliError> {
        let traj = &out.trajectory;
        Ok(Self {
            converged: out.converged,
            iterations: out.iterations,
            final_delta: out.deltas.last().copied(),
            limiting_ratio: out.limiting_ratio(),
            geometric: out.is_geometric(),
            strichartz_norm: traj.strichartz_norm(inv_q).map_err(invalid)?,
            norm_a_initial: traj.norm_a.values()[0],
            norm_a_final: traj.norm_a.last().unwrap_or(f64::NAN),
        })
    }
}

/// Loads the configuration and resolves the initial data and seed.
fn prepare(a: &RunArgs) -> Result<(RunConfig, DistributionFunction), CliError> {
    let mut config = RunConfig::load(&a.config)?;
    if let Some(d) = &a.data {
        config.experiment.data = Some(d.clone());
    }
    if let Some(s) = a.seed {
        config.experiment.seed = s;
    }
    let grid = config.phase_grid();
    let text = config.experiment.data.clone().ok_or_else(|| {
        invalid(format!(
            "no initial data: pass --data or set [experiment] data in {}",
            a.config.display()
        ))
    })?;
    let f0 = DataSpec::parse(&text, &grid)?.build(&grid, config.experiment.seed)?;
    create_dir(&a.out)?;
    Ok((config, f0))
}

fn finish<R: Serialize>(
    dir: &Path,
    command: &'static str,
    config: RunConfig,
    results: R,
    mut files: Vec<PathBuf>,
) -> Result<(), CliError> {
    let summary_path = dir.join("summary.json");
    files.push(summary_path.clone());
    let summary = RunSummary {
        command,
        version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        config,
        results,
        files: files
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect(),
    };
    write_text(&summary_path, &to_json(&summary))
}

fn not_converged(out: &PicardOutcome) -> CliError {
    CliError::NotConverged(format!(
        "Picard iteration did not converge in {} iterations (last delta {:e}); outputs written",
        out.iterations,
        out.deltas.last().copied().unwrap_or(f64::NAN)
    ))
}

fn write_common(dir: &Path, out: &PicardOutcome, every: usize) -> Result<Vec<PathBuf>, CliError> {
    let traces = dir.join("traces.csv");
    write_text(&traces, &traces_csv(&out.trajectory))?;
    let picard = dir.join("picard.csv");
    write_text(&picard, &picard_csv(&out.deltas))?;
    let mut files = vec![traces, picard];
    files.extend(write_snapshots(dir, &out.trajectory, every)?);
    Ok(files)
}

fn simulate(a: &RunArgs) -> Result<(), CliError> {
    let (config, f0) = prepare(a)?;
    let out = picard_solve(&f0, &config.kernel(), &config.solver_config()).map_err(invalid)?;
    let files = write_common(&a.out, &out, config.experiment.snapshot_every)?;
    let results = PicardResults::new(&out, config.solver.q)?;
    finish(&a.out, "simulate", config, results, files)?;
    if out.converged {
        Ok(())
    } else {
        Err(not_converged(&out))
    }
}

#[derive(Serialize)]
struct ScatterResults {
    picard: PicardResults,
    scattering: ScatteringSummary,
    /// Final defect divided by `‖f₊‖_{L^a}`.
    relative_final_defect: f64,
    defect_decreasing_last_quarter: bool,
}

fn scatter(a: &RunArgs) -> Result<(), CliError> {
    let (config, f0) = prepare(a)?;
    let e = &config.experiment;
    let run = scatter_adaptive(&f0, &config.kernel(), &config.solver_config(), e.scatter_tol, e.max_horizon)
        .map_err(invalid)?;
    let mut files = write_common(&a.out, &run.outcome, e.snapshot_every)?;
    if run.outcome.converged {
        let defect = a.out.join("defect.csv");
        write_text(&defect, &defect_csv(&run.defect))?;
        let f_plus = a.out.join("f_plus.csv");
        snapshot(&f_plus, &run.f_plus, run.horizon)?;
        files.extend([defect, f_plus]);
    }
    let summary = run.summary();
    let results = ScatterResults {
        picard: PicardResults::new(&run.outcome, config.solver.q)?,
        relative_final_defect: summary.final_defect / run.f_plus_norm,
        defect_decreasing_last_quarter: run.defect_decreasing_at_end(),
        scattering: summary,
    };
    finish(&a.out, "scatter", config, results, files)?;
    if run.outcome.converged {
        Ok(())
    } else {
        Err(not_converged(&run.outcome))
    }
}

#[derive(Serialize)]
struct WaveResults {
    converged: bool,
    iterations: usize,
    final_delta: Option<f64>,
    f_plus: String,
    norm_a_f_plus: f64,
    norm_a_f0: f64,
}

fn wave(a: &WaveArgs) -> Result<(), CliError> {
    let mut config = RunConfig::load(&a.config)?;
    let snap = read_snapshot(&a.fplus).map_err(invalid)?;
    let horizon = match &a.horizon {
        Some(text) => parse_real(text).map_err(|e| invalid(format!("--horizon `{text}`: {e}")))?,
        None if snap.t > 0.0 => snap.t,
        None => config.solver.horizon,
    };
    config.set_horizon(horizon)?;
    snap.f.grid().ensure_same(&config.phase_grid()).map_err(|e| {
        invalid(format!("{}: inconsistent grid metadata: {e}", a.fplus.display()))
    })?;
    create_dir(&a.out)?;
    let solver = config.solver_config();
    let out = wave_operator(&snap.f, &config.kernel(), &solver).map_err(invalid)?;
    let traces = a.out.join("traces.csv");
    write_text(&traces, &traces_csv(&out.trajectory))?;
    let picard = a.out.join("picard.csv");
    write_text(&picard, &picard_csv(&out.deltas))?;
    let f0 = a.out.join("f0.csv");
    snapshot(&f0, &out.f0, 0.0)?;
    let results = WaveResults {
        converged: out.converged,
        iterations: out.iterations,
        final_delta: out.deltas.last().copied(),
        f_plus: a.fplus.display().to_string(),
        norm_a_f_plus: lebesgue_norm_a(&snap.f, solver.inv_a),
        norm_a_f0: lebesgue_norm_a(&out.f0, solver.inv_a),
    };
    finish(&a.out, "wave", config, results, vec![traces, picard, f0])?;
    if out.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "backward Picard iteration did not converge in {} iterations; outputs written",
            out.iterations
        )))
    }
}
