//! Initial-data specifications `kind[:key=value,...]`. Vector values list
//! their components separated by `;` and a single component is broadcast.
//!
//! | kind         | keys (defaults)                                               |
//! |--------------|---------------------------------------------------------------|
//! | `gaussian`   | `amp` (1), `x0` (L/2), `v0` (0), `sx` (L/8), `sv` (1)          |
//! | `two-stream` | `amp` (1), `x0` (L/2), `u` (0.75), `sx` (L/8), `sv` (0.7)      |
//! | `maxwellian` | `rho` (1), `u` (0), `T` (1)                                   |
//! | `random`     | `amp` (1); uniform in `[0, amp)` drawn with `--seed`          |
//! | `snapshot`   | `path`; grid must match the configuration                     |

use std::collections::BTreeMap;
use std::path::PathBuf;

use kinlab::grid::{make_gaussian, make_maxwellian, make_random};
use kinlab::io::read_snapshot;
use kinlab::{DistributionFunction, PhaseGrid};

use crate::config::parse_real;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Gaussian {
        amp: f64,
        x0: Vec<f64>,
        v0: Vec<f64>,
        sx: f64,
        sv: f64,
    },
    TwoStream {
        amp: f64,
        x0: Vec<f64>,
        u: f64,
        sx: f64,
        sv: f64,
    },
    Maxwellian {
        rho: f64,
        u: Vec<f64>,
        temperature: f64,
    },
    Random {
        amp: f64,
    },
    Snapshot {
        path: PathBuf,
    },
}

struct Args {
    kind: String,
    values: BTreeMap<String, String>,
}

impl Args {
    fn bad(&self, why: String) -> CliError {
        CliError::Validation(format!("data `{}`: {why}", self.kind))
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.values.remove(key) {
            None => Ok(default),
            Some(v) => parse_real(&v).map_err(|e| self.bad(format!("{key} = `{v}`: {e}"))),
        }
    }

    fn vector(&mut self, key: &str, default: f64, dim: usize) -> Result<Vec<f64>, CliError> {
        let Some(v) = self.values.remove(key) else {
            return Ok(vec![default; dim]);
        };
        let parts = v
            .split(';')
            .map(parse_real)
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| self.bad(format!("{key} = `{v}`: {e}")))?;
        match parts.len() {
            1 => Ok(vec![parts[0]; dim]),
            n if n == dim => Ok(parts),
            n => Err(self.bad(format!("{key} has {n} components, expected 1 or {dim}"))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(self.bad(format!("unknown key `{k}`"))),
        }
    }
}

impl DataSpec {
    /// Parses a specification against a grid, which supplies the defaults.
    pub fn parse(text: &str, grid: &PhaseGrid) -> Result<Self, CliError> {
        let (kind, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
        let mut values = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("data `{kind}`: expected key=value, got `{item}`")))?;
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::Validation(format!("data `{kind}`: repeated key `{}`", k.trim())));
            }
        }
        let mut a = Args {
            kind: kind.to_string(),
            values,
        };
        let dim = grid.dim;
        let centre = grid.period / 2.0;
        let spec = match kind {
            "gaussian" => Self::Gaussian {
                amp: a.real("amp", 1.0)?,
                x0: a.vector("x0", centre, dim)?,
                v0: a.vector("v0", 0.0, dim)?,
                sx: a.real("sx", grid.period / 8.0)?,
                sv: a.real("sv", 1.0)?,
            },
            "two-stream" => Self::TwoStream {
                amp: a.real("amp", 1.0)?,
                x0: a.vector("x0", centre, dim)?,
                u: a.real("u", 0.75)?,
                sx: a.real("sx", grid.period / 8.0)?,
                sv: a.real("sv", 0.7)?,
            },
            "maxwellian" => Self::Maxwellian {
                rho: a.real("rho", 1.0)?,
                u: a.vector("u", 0.0, dim)?,
                temperature: a.real("T", 1.0)?,
            },
            "random" => Self::Random {
                amp: a.real("amp", 1.0)?,
            },
            "snapshot" => Self::Snapshot {
                path: a
                    .values
                    .remove("path")
                    .map(PathBuf::from)
                    .ok_or_else(|| a.bad("missing `path`".into()))?,
            },
            other => {
                return Err(CliError::Validation(format!(
                    "unknown data kind `{other}` (expected gaussian|two-stream|maxwellian|random|snapshot)"
                )))
            }
        };
        a.finish()?;
        Ok(spec)
    }

    pub fn build(&self, grid: &PhaseGrid, seed: u64) -> Result<DistributionFunction, CliError> {
        let grid_err = |e: kinlab::grid::GridError| CliError::Validation(format!("data: {e}"));
        match self {
            Self::Gaussian { amp, x0, v0, sx, sv } => make_gaussian(grid, x0, v0, *sx, *sv, *amp).map_err(grid_err),
            Self::TwoStream { amp, x0, u, sx, sv } => {
                let mut plus = vec![0.0; grid.dim];
                plus[0] = *u;
                let minus: Vec<f64> = plus.iter().map(|x| -x).collect();
                let a = make_gaussian(grid, x0, &plus, *sx, *sv, *amp).map_err(grid_err)?;
                let b = make_gaussian(grid, x0, &minus, *sx, *sv, *amp).map_err(grid_err)?;
                a.add(&b).map_err(grid_err)
            }
            Self::Maxwellian { rho, u, temperature } => {
                make_maxwellian(grid, *rho, u, *temperature).map_err(grid_err)
            }
            Self::Random { amp } => make_random(grid, *amp, seed).map_err(grid_err),
            Self::Snapshot { path } => {
                let snap = read_snapshot(path).map_err(|e| CliError::Validation(e.to_string()))?;
                snap.f.grid().ensure_same(grid).map_err(|e| {
                    CliError::Validation(format!(
                        "{}: inconsistent grid metadata: {e}",
                        path.display()
                    ))
                })?;
                Ok(snap.f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(2, 4.0, 8, 4.0, 8).unwrap()
    }

    #[test]
    fn defaults_and_vectors() {
        let g = grid();
        let s = DataSpec::parse("gaussian:amp=0.1,v0=0.5;-1/4", &g).unwrap();
        assert_eq!(
            s,
            DataSpec::Gaussian {
                amp: 0.1,
                x0: vec![2.0, 2.0],
                v0: vec![0.5, -0.25],
                sx: 0.5,
                sv: 1.0
            }
        );
        assert_eq!(DataSpec::parse("random", &g).unwrap(), DataSpec::Random { amp: 1.0 });
    }

    #[test]
    fn malformed_specs_rejected() {
        let g = grid();
        for text in ["cube", "gaussian:amp", "gaussian:amp=1,amp=2", "gaussian:x0=1;2;3", "gaussian:width=1", "snapshot"] {
            assert!(DataSpec::parse(text, &g).is_err(), "{text}");
        }
    }

    #[test]
    fn random_data_follows_the_seed() {
        let g = grid();
        let s = DataSpec::Random { amp: 1.0 };
        assert_eq!(s.build(&g, 3).unwrap(), s.build(&g, 3).unwrap());
        assert_ne!(s.build(&g, 3).unwrap(), s.build(&g, 4).unwrap());
    }
}
