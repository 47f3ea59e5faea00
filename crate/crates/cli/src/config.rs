//! INI run configuration with sections `[grid]`, `[kernel]`, `[solver]` and
//! `[experiment]`. Every key has a default; unknown sections or keys are
//! rejected so typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use ini::Ini;
use serde::Serialize;

use kinlab::exponents::{format_exponent, parse_exponent, parse_rational, to_f64, ExponentTriplet, Rat};
use kinlab::solver::SolverConfig;
use kinlab::{CollisionKernel, Interpolation, PhaseGrid};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct GridSection {
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "L")]
    pub period: f64,
    pub n_x: usize,
    pub v_max: f64,
    pub n_v: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSection {
    #[serde(serialize_with = "ser_rational")]
    pub gamma: Rat,
    pub b0: f64,
    pub angular_nodes: usize,
    /// Resolved regularisation width (the `Δv/2` default is written out).
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub picard_tol: f64,
    pub max_iters: usize,
    #[serde(serialize_with = "ser_exponent")]
    pub q: Rat,
    #[serde(serialize_with = "ser_exponent")]
    pub r: Rat,
    #[serde(serialize_with = "ser_exponent")]
    pub p: Rat,
    #[serde(serialize_with = "ser_exponent")]
    pub a: Rat,
    pub interpolation: Interpolation,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSection {
    pub data: Option<String>,
    pub seed: u64,
    /// Write a snapshot every this many steps (0: first and last only).
    pub snapshot_every: usize,
    pub scatter_tol: f64,
    pub max_horizon: f64,
}

/// Fully resolved configuration, as recorded in `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub grid: GridSection,
    pub kernel: KernelSection,
    pub solver: SolverSection,
    pub experiment: ExperimentSection,
}

fn ser_rational<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_exponent<S: serde::Serializer>(inv: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_exponent(*inv))
}

/// Key/value pairs of one section with read tracking.
struct Section<'a> {
    name: &'a str,
    values: BTreeMap<String, String>,
}

impl Section<'_> {
    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn bad(&self, key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
        CliError::Validation(format!("[{}] {key} = `{value}`: {why}", self.name))
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => parse_real(&v).map_err(|e| self.bad(key, &v, e)),
        }
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|e| self.bad(key, &v, e)),
        }
    }

    fn rational(&mut self, key: &str, default: Rat) -> Result<Rat, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => parse_rational(&v).map_err(|e| self.bad(key, &v, e)),
        }
    }

    fn exponent(&mut self, key: &str) -> Result<Option<Rat>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => parse_exponent(&v).map(Some).map_err(|e| self.bad(key, &v, e)),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Validation(format!("unknown key `{k}` in section [{}]", self.name))),
        }
    }
}

/// Reals accept decimal or `a/b` notation.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if t.contains('/') {
        return parse_rational(t).map(to_f64).map_err(|e| e.to_string());
    }
    t.parse::<f64>()
        .map_err(|e| e.to_string())
        .and_then(|x| if x.is_finite() { Ok(x) } else { Err("not finite".into()) })
}

/// Default primal triplet for dimension `n`: `(5, 5/2, 5/3)` in 2-D and
/// `(5, 15/4, 5/2)` in 3-D.
fn default_triplet(n: usize) -> ExponentTriplet {
    let (q, r, p) = if n == 3 {
        (Rat::new(1, 5), Rat::new(4, 15), Rat::new(2, 5))
    } else {
        (Rat::new(1, 5), Rat::new(2, 5), Rat::new(3, 5))
    };
    ExponentTriplet::new(q, r, p).expect("default triplet is valid")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.is_file() {
            return Err(CliError::Validation(format!(
                "config file `{}` does not exist or is not a file",
                path.display()
            )));
        }
        let ini = Ini::load_from_file(path)
            .map_err(|e| CliError::Validation(format!("cannot parse config `{}`: {e}", path.display())))?;
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (name, props) in ini.iter() {
            let entry = sections.entry(name.unwrap_or("").to_string()).or_default();
            for (k, v) in props.iter() {
                entry.insert(k.to_string(), v.to_string());
            }
        }
        Self::from_sections(sections)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn from_sections(mut sections: BTreeMap<String, BTreeMap<String, String>>) -> Result<Self, CliError> {
        let mut open = |name: &'static str| Section {
            name,
            values: sections.remove(name).unwrap_or_default(),
        };
        let mut g = open("grid");
        let mut k = open("kernel");
        let mut s = open("solver");
        let mut e = open("experiment");
        if let Some(root) = sections.get("") {
            if let Some(key) = root.keys().next() {
                return Err(CliError::Validation(format!("key `{key}` outside any section")));
            }
            sections.remove("");
        }
        if let Some(name) = sections.keys().next() {
            return Err(CliError::Validation(format!("unknown section [{name}]")));
        }

        let grid = GridSection {
            dim: g.count("N", 2)?,
            period: g.real("L", 4.0)?,
            n_x: g.count("n_x", 16)?,
            v_max: g.real("v_max", 6.0)?,
            n_v: g.count("n_v", 16)?,
        };
        g.finish()?;
        let phase = grid.phase_grid()?;

        let epsilon = match k.take("epsilon") {
            None => phase.dv() / 2.0,
            Some(v) => parse_real(&v).map_err(|err| k.bad("epsilon", &v, err))?,
        };
        let kernel = KernelSection {
            gamma: k.rational("gamma", Rat::from_integer(0))?,
            b0: k.real("b0", 1.0)?,
            angular_nodes: k.count("angular_nodes", 16)?,
            epsilon,
        };
        k.finish()?;

        let default = default_triplet(grid.dim);
        let q = s.exponent("q")?.unwrap_or(default.inv_q());
        let r = s.exponent("r")?.unwrap_or(default.inv_r());
        let p = s.exponent("p")?.unwrap_or(default.inv_p());
        let triplet = ExponentTriplet::new(q, r, p)
            .map_err(|err| CliError::Validation(format!("[solver] (q, r, p): {err}")))?;
        let a = s.exponent("a")?.unwrap_or(triplet.inv_a());
        let interpolation = match s.take("interpolation") {
            None => Interpolation::default(),
            Some(v) => v.trim().parse().map_err(|err: String| s.bad("interpolation", &v, err))?,
        };
        let solver = SolverSection {
            horizon: s.real("T", 1.0)?,
            dt: s.real("dt", 1.0 / 32.0)?,
            picard_tol: s.real("picard_tol", 1e-10)?,
            max_iters: s.count("max_iters", 50)?,
            q,
            r,
            p,
            a,
            interpolation,
        };
        s.finish()?;

        let experiment = ExperimentSection {
            data: e.take("data").map(|d| d.trim().to_string()),
            seed: match e.take("seed") {
                None => 0,
                Some(v) => v.trim().parse().map_err(|err| e.bad("seed", &v, err))?,
            },
            snapshot_every: e.count("snapshot_every", 0)?,
            scatter_tol: e.real("scatter_tol", 1e-2)?,
            max_horizon: e.real("max_horizon", 8.0)?,
        };
        e.finish()?;

        let config = Self {
            grid,
            kernel,
            solver,
            experiment,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let dim = self.grid.dim;
        self.kernel().validate(dim).map_err(|e| CliError::Validation(format!("[kernel] {e}")))?;
        if self.kernel.angular_nodes == 0 {
            return Err(CliError::Validation("[kernel] angular_nodes must be positive".into()));
        }
        if !(self.kernel.epsilon >= 0.0) || !(self.kernel.b0.is_finite()) {
            return Err(CliError::Validation("[kernel] epsilon must be ≥ 0 and b0 finite".into()));
        }
        self.solver_config()
            .validate(dim)
            .map_err(|e| CliError::Validation(format!("[solver] {e}")))?;
        let e = &self.experiment;
        if !(e.scatter_tol > 0.0) || !(e.max_horizon >= self.solver.horizon) {
            return Err(CliError::Validation(
                "[experiment] scatter_tol must be positive and max_horizon ≥ T".into(),
            ));
        }
        Ok(())
    }

    /// Replaces `T`, keeping `dt`, and revalidates.
    pub fn set_horizon(&mut self, horizon: f64) -> Result<(), CliError> {
        self.solver.horizon = horizon;
        self.experiment.max_horizon = self.experiment.max_horizon.max(horizon);
        self.validate()
    }

    pub fn phase_grid(&self) -> PhaseGrid {
        self.grid.phase_grid().expect("validated at load")
    }

    pub fn kernel(&self) -> CollisionKernel {
        CollisionKernel::new(self.kernel.gamma, self.kernel.angular_nodes)
            .with_b0(self.kernel.b0)
            .with_epsilon(self.kernel.epsilon)
    }

    pub fn triplet(&self) -> ExponentTriplet {
        ExponentTriplet::new(self.solver.q, self.solver.r, self.solver.p).expect("validated at load")
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig::new(s.horizon, s.dt, s.picard_tol, s.max_iters, self.triplet())
            .with_inv_a(s.a)
            .with_interpolation(s.interpolation)
    }
}

impl GridSection {
    pub fn phase_grid(&self) -> Result<PhaseGrid, CliError> {
        PhaseGrid::new(self.dim, self.period, self.n_x, self.v_max, self.n_v)
            .map_err(|e| CliError::Validation(format!("[grid] {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sections(text: &str) -> BTreeMap<String, BTreeMap<String, String>> {
        let ini = Ini::load_from_str(text).unwrap();
        let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (name, props) in ini.iter() {
            let entry = out.entry(name.unwrap_or("").to_string()).or_default();
            for (k, v) in props.iter() {
                entry.insert(k.into(), v.into());
            }
        }
        out
    }

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::from_sections(sections("")).unwrap();
        assert_eq!(c.grid.dim, 2);
        assert_eq!(c.kernel.epsilon, 0.375);
        assert_eq!(c.solver.a, Rat::new(1, 2));
        let c3 = RunConfig::from_sections(sections("[grid]\nN = 3\nn_x = 4\nn_v = 4\n")).unwrap();
        assert_eq!(c3.solver.a, Rat::new(1, 3));
    }

    #[test]
    fn rationals_and_exponents_parse_exactly() {
        let c = RunConfig::from_sections(sections(
            "[kernel]\ngamma = -1/2\n[solver]\nq = 5\nr = 5/2\np = 5/3\ndt = 1/8\ninterpolation = spectral\n",
        ))
        .unwrap();
        assert_eq!(c.kernel.gamma, Rat::new(-1, 2));
        assert_eq!(c.solver.r, Rat::new(2, 5));
        assert_eq!(c.solver.dt, 0.125);
        assert_eq!(c.solver.interpolation, Interpolation::Spectral);
    }

    #[test]
    fn typos_and_bad_values_rejected() {
        for text in [
            "[grid]\nnx = 8\n",
            "[gird]\nN = 2\n",
            "[grid]\nn_x = 7\n",
            "[kernel]\ngamma = 1/2\n",
            "[solver]\nq = 4\n",
            "[solver]\ndt = fast\n",
            "stray = 1\n",
        ] {
            assert!(RunConfig::from_sections(sections(text)).is_err(), "{text}");
        }
    }
}
