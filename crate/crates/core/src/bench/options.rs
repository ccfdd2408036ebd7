//! Flat `key=value` study options shared by command-line flags and config files.

use std::path::PathBuf;

use super::cases::TestCase;
use super::study::{Abscissa, MeshSpec, Regime, StudyConfig};
use crate::error::{Error, Result};
use crate::vem::{S1Kind, StabChoice};

/// Lloyd sweeps applied to generated Voronoi meshes unless overridden.
pub const DEFAULT_LLOYD: usize = 10;

/// Every field is optional; unset fields take case- and regime-dependent defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyOptions {
    pub case: Option<String>,
    pub regime: Option<String>,
    pub p: Option<usize>,
    pub pmin: Option<usize>,
    pub pmax: Option<usize>,
    pub mu: Option<usize>,
    pub sigma: Option<f64>,
    pub layers: Option<usize>,
    pub stab: Option<String>,
    pub eps: Option<f64>,
    pub neigs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub ref_file: Option<PathBuf>,
    /// `cartesian`, `voronoi` or `graded`.
    pub mesh: Option<String>,
    /// Mesh levels of the h-regime: Cartesian `n` or Voronoi seed counts.
    pub levels: Option<Vec<usize>>,
    /// Seed count of a fixed Voronoi mesh.
    pub seeds: Option<usize>,
    pub lloyd: Option<usize>,
    pub abscissa: Option<String>,
    pub walltime: Option<bool>,
    pub quad_extra: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("invalid value '{v}' for {key}"),
    })
}

impl StudyOptions {
    /// Sets one option; keys accept `-` or `_` as separator.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let v = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "case" => self.case = Some(v.to_string()),
            "regime" => self.regime = Some(v.to_string()),
            "p" => self.p = Some(parse_value(key, v, line)?),
            "pmin" => self.pmin = Some(parse_value(key, v, line)?),
            "pmax" => self.pmax = Some(parse_value(key, v, line)?),
            "mu" => self.mu = Some(parse_value(key, v, line)?),
            "sigma" => self.sigma = Some(parse_value(key, v, line)?),
            "layers" => self.layers = Some(parse_value(key, v, line)?),
            "stab" => self.stab = Some(v.to_string()),
            "eps" => self.eps = Some(parse_value(key, v, line)?),
            "neigs" => self.neigs = Some(parse_value(key, v, line)?),
            "seed" => self.seed = Some(parse_value(key, v, line)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "ref-file" => self.ref_file = Some(PathBuf::from(v)),
            "mesh" => self.mesh = Some(v.to_string()),
            "levels" => {
                self.levels = Some(
                    v.split(',')
                        .map(|t| parse_value(key, t.trim(), line))
                        .collect::<Result<Vec<usize>>>()?,
                )
            }
            "seeds" => self.seeds = Some(parse_value(key, v, line)?),
            "lloyd" => self.lloyd = Some(parse_value(key, v, line)?),
            "abscissa" => self.abscissa = Some(v.to_string()),
            "walltime" => self.walltime = Some(parse_value(key, v, line)?),
            "quad-extra" => self.quad_extra = Some(parse_value(key, v, line)?),
            other => {
                return Err(Error::Parse {
                    line,
                    reason: format!("unknown key '{other}'"),
                })
            }
        }
        Ok(())
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut o = StudyOptions::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: "expected key=value".into(),
            })?;
            o.set(k, v, i + 1)?;
        }
        Ok(o)
    }

    /// Fields set in `other` win.
    pub fn merged_with(self, other: StudyOptions) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { StudyOptions { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            case, regime, p, pmin, pmax, mu, sigma, layers, stab, eps, neigs, seed, out, ref_file, mesh, levels, seeds,
            lloyd, abscissa, walltime, quad_extra
        )
    }

    pub fn test_case(&self) -> Result<TestCase> {
        let id = self
            .case
            .as_deref()
            .ok_or_else(|| Error::argument("a test case is required (--case)"))?;
        TestCase::parse_with_eps(id, self.eps)
    }

    fn stab_choice(&self) -> Result<StabChoice> {
        // the diagonal recipe is the choice behind every published convergence plot
        let s1 = match &self.stab {
            Some(s) => s.parse::<S1Kind>()?,
            None => S1Kind::DiagonalRecipe,
        };
        Ok(StabChoice::with_s1(s1))
    }

    fn mesh_spec(&self, case: &TestCase, level: usize) -> Result<MeshSpec> {
        let lloyd = self.lloyd.unwrap_or(DEFAULT_LLOYD);
        match self.mesh.as_deref() {
            Some("cartesian") => Ok(MeshSpec::Cartesian(level)),
            Some("voronoi") => Ok(MeshSpec::Voronoi { seeds: level, lloyd }),
            Some("graded") => Ok(MeshSpec::Graded {
                n: level,
                sigma: self.sigma.unwrap_or(0.5),
            }),
            Some(other) => Err(Error::argument(format!("unknown mesh kind '{other}'"))),
            None => Ok(match case {
                TestCase::LShape | TestCase::Checkerboard { .. } if self.regime.as_deref() == Some("p") => {
                    MeshSpec::Graded {
                        n: level,
                        sigma: self.sigma.unwrap_or(0.5),
                    }
                }
                _ if self.regime.as_deref() == Some("p") => MeshSpec::Voronoi { seeds: level, lloyd },
                _ => MeshSpec::Cartesian(level),
            }),
        }
    }

    pub fn regime(&self, case: &TestCase) -> Result<Regime> {
        match self.regime.as_deref().unwrap_or("h") {
            "h" => {
                let levels = self.levels.clone().unwrap_or_else(|| match case {
                    TestCase::LShape => vec![2, 4, 8, 16],
                    TestCase::Oscillator => vec![8, 16, 32],
                    _ => vec![4, 8, 16, 32],
                });
                let meshes = levels
                    .iter()
                    .map(|&l| self.mesh_spec(case, l))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Regime::H {
                    p: self.p.unwrap_or(1),
                    meshes,
                })
            }
            "p" => {
                let level = match case {
                    TestCase::LShape | TestCase::Checkerboard { .. } => self.layers.unwrap_or(3),
                    TestCase::Oscillator => self.seeds.unwrap_or(64),
                    TestCase::SquareLaplace => self.seeds.unwrap_or(16),
                };
                let level = if self.mesh.as_deref() == Some("cartesian") {
                    self.levels.as_ref().and_then(|l| l.first().copied()).unwrap_or(4)
                } else {
                    level
                };
                Ok(Regime::P {
                    mesh: self.mesh_spec(case, level)?,
                    p_min: self.pmin.unwrap_or(1),
                    p_max: self.pmax.unwrap_or(8),
                })
            }
            "hp" => Ok(Regime::Hp {
                sigma: self.sigma.unwrap_or(0.5),
                mu: self.mu.unwrap_or(1),
                n_max: self.layers.unwrap_or(6),
            }),
            other => Err(Error::argument(format!("unknown regime '{other}' (h, p, hp)"))),
        }
    }

    pub fn to_study_config(&self) -> Result<StudyConfig> {
        let case = self.test_case()?;
        let regime = self.regime(&case)?;
        let mut cfg = StudyConfig::new(case, regime);
        cfg.stab = self.stab_choice()?;
        if let Some(a) = &self.abscissa {
            cfg.abscissa = a.parse::<Abscissa>()?;
        }
        if let Some(n) = self.neigs {
            cfg.n_eigs = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(q) = self.quad_extra {
            cfg.quad_extra = q;
        }
        cfg.record_walltime = self.walltime.unwrap_or(false);
        cfg.ref_file = self.ref_file.clone();
        Ok(cfg)
    }
}
