use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use super::cases::TestCase;
use super::reference::{reference_spectrum, ReferenceSpectrum};
use crate::assembly::{assemble_with, AssemblyOptions, BoundaryCondition, SystemMatrices, DEFAULT_QUAD_EXTRA};
use crate::eigen::{solve_generalized, EigenResult, SolverConfig};
use crate::error::{Error, Result};
use crate::hp::{assign_hp, assign_uniform, DegreeMap};
use crate::mesh::{generate_cartesian, generate_cartesian_lshape, generate_graded, generate_voronoi, PolyMesh};
use crate::vem::StabChoice;

/// Quantity on the horizontal axis of a convergence plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    SqrtDof,
    CbrtDof,
    H,
}

impl Abscissa {
    pub fn value(&self, dofs: usize, h: f64) -> f64 {
        match self {
            Abscissa::SqrtDof => (dofs as f64).sqrt(),
            Abscissa::CbrtDof => (dofs as f64).cbrt(),
            Abscissa::H => h,
        }
    }
}

impl FromStr for Abscissa {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt_dof" => Ok(Abscissa::SqrtDof),
            "cbrt_dof" => Ok(Abscissa::CbrtDof),
            "h" => Ok(Abscissa::H),
            _ => Err(Error::argument(format!(
                "unknown abscissa '{s}' (sqrt_dof, cbrt_dof, h)"
            ))),
        }
    }
}

impl fmt::Display for Abscissa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Abscissa::SqrtDof => "sqrt_dof",
            Abscissa::CbrtDof => "cbrt_dof",
            Abscissa::H => "h",
        })
    }
}

/// One mesh of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSpec {
    /// `n × n` cells on the bounding square; `n` cells per unit length on the L-shape.
    Cartesian(usize),
    Voronoi {
        seeds: usize,
        lloyd: usize,
    },
    /// Geometric mesh with `n + 1` layers.
    Graded {
        n: usize,
        sigma: f64,
    },
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSpec::Cartesian(n) => write!(f, "cartesian(n={n})"),
            MeshSpec::Voronoi { seeds, lloyd } => write!(f, "voronoi(seeds={seeds}, lloyd={lloyd})"),
            MeshSpec::Graded { n, sigma } => write!(f, "graded(n={n}, sigma={sigma})"),
        }
    }
}

/// Degree choice of one study step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeSpec {
    Uniform(usize),
    /// `mu (j + 1)` in layer `j` of a graded mesh.
    Hp {
        mu: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// Fixed degree on a mesh sequence.
    H { p: usize, meshes: Vec<MeshSpec> },
    /// Fixed mesh, degrees `p_min..=p_max`.
    P { mesh: MeshSpec, p_min: usize, p_max: usize },
    /// Graded meshes `n = 0..=n_max` with layerwise linear degrees.
    Hp { sigma: f64, mu: usize, n_max: usize },
}

impl Regime {
    pub fn default_abscissa(&self) -> Abscissa {
        match self {
            Regime::H { .. } => Abscissa::H,
            Regime::P { .. } => Abscissa::SqrtDof,
            Regime::Hp { .. } => Abscissa::CbrtDof,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::H { .. } => "h",
            Regime::P { .. } => "p",
            Regime::Hp { .. } => "hp",
        }
    }

    pub fn steps(&self) -> Vec<(MeshSpec, DegreeSpec)> {
        match self {
            Regime::H { p, meshes } => meshes.iter().map(|&m| (m, DegreeSpec::Uniform(*p))).collect(),
            Regime::P { mesh, p_min, p_max } => (*p_min..=*p_max).map(|p| (*mesh, DegreeSpec::Uniform(p))).collect(),
            Regime::Hp { sigma, mu, n_max } => (0..=*n_max)
                .map(|n| (MeshSpec::Graded { n, sigma: *sigma }, DegreeSpec::Hp { mu: *mu }))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub case: TestCase,
    pub regime: Regime,
    pub stab: StabChoice,
    /// Element quadrature exactness is `2p + quad_extra`.
    pub quad_extra: usize,
    /// Number of distinct reference eigenvalues tracked.
    pub n_eigs: usize,
    /// Seed of Voronoi meshes and of the eigensolver start.
    pub seed: u64,
    pub abscissa: Abscissa,
    /// Write measured wall times; off gives byte-identical reports.
    pub record_walltime: bool,
    pub ref_file: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(case: TestCase, regime: Regime) -> Self {
        StudyConfig {
            case,
            abscissa: regime.default_abscissa(),
            regime,
            stab: StabChoice::with_s1(crate::vem::S1Kind::DiagonalRecipe),
            quad_extra: DEFAULT_QUAD_EXTRA,
            n_eigs: 4,
            seed: 1,
            record_walltime: false,
            ref_file: None,
        }
    }

    pub fn describe(&self) -> String {
        let detail = match &self.regime {
            Regime::H { p, meshes } => {
                let m: Vec<String> = meshes.iter().map(|m| m.to_string()).collect();
                format!("p={p} meshes=[{}]", m.join(", "))
            }
            Regime::P { mesh, p_min, p_max } => format!("mesh={mesh} p={p_min}..{p_max}"),
            Regime::Hp { sigma, mu, n_max } => format!("sigma={sigma} mu={mu} layers=0..{n_max}"),
        };
        format!(
            "case={} regime={} {detail} stab={} quad_extra={} n_eigs={} seed={} abscissa={}",
            self.case,
            self.regime.name(),
            self.stab.s1,
            self.quad_extra,
            self.n_eigs,
            self.seed,
            self.abscissa
        )
    }
}

/// Error of one tracked eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenError {
    /// 1-based index among the distinct reference values.
    pub index: usize,
    pub reference: f64,
    pub computed: f64,
    /// `|computed − reference| / |reference|`
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub run: usize,
    pub dofs: usize,
    pub h: f64,
    pub abscissa: f64,
    pub errors: Vec<EigenError>,
    pub walltime_s: f64,
    /// Smallest and largest cell degree; not part of the CSV.
    pub degrees: Option<(usize, usize)>,
}

/// A discretized and solved configuration.
#[derive(Debug, Clone)]
pub struct Solution {
    pub mesh: PolyMesh,
    pub degrees: DegreeMap,
    pub system: SystemMatrices,
    pub eigen: EigenResult,
}

pub fn build_mesh(case: &TestCase, spec: MeshSpec, degrees: DegreeSpec, seed: u64) -> Result<(PolyMesh, DegreeMap)> {
    let graded = match spec {
        MeshSpec::Graded { n, sigma } => {
            let dom = case
                .graded_domain()
                .ok_or_else(|| Error::argument(format!("{} has no graded mesh family", case.id())))?;
            Some(generate_graded(dom, n, sigma)?)
        }
        _ => None,
    };
    let mesh = match spec {
        MeshSpec::Cartesian(n) => match case {
            TestCase::LShape => generate_cartesian_lshape(n)?,
            TestCase::Checkerboard { .. } if n % 2 == 1 => {
                return Err(Error::argument(
                    "checkerboard Cartesian meshes need an even n to resolve the interfaces",
                ))
            }
            _ => generate_cartesian(n, n, case.rectangle(), case.domain())?,
        },
        MeshSpec::Voronoi { seeds, lloyd } => match case {
            TestCase::LShape => return Err(Error::argument("Voronoi meshes are not available on the L-shape")),
            _ => generate_voronoi(seeds, case.rectangle(), lloyd, seed, case.domain())?,
        },
        MeshSpec::Graded { .. } => graded.as_ref().expect("graded").mesh.clone(),
    };
    let map = match degrees {
        DegreeSpec::Uniform(p) => assign_uniform(&mesh, p)?,
        DegreeSpec::Hp { mu } => match &graded {
            Some(layered) => assign_hp(layered, mu)?,
            None => return Err(Error::argument("hp degrees need a graded mesh")),
        },
    };
    Ok((mesh, map))
}

/// Assembles and solves for the `n_values` smallest eigenvalues (excluding the
/// Neumann zero mode).
pub fn solve_case(
    case: &TestCase,
    mesh: PolyMesh,
    degrees: DegreeMap,
    stab: StabChoice,
    quad_extra: usize,
    n_values: usize,
    seed: u64,
) -> Result<Solution> {
    let coeffs = case.coefficients()?;
    let bc = case.boundary_condition();
    let mut opts = AssemblyOptions::new(stab, bc);
    opts.quad_extra = quad_extra;
    let system = assemble_with(&mesh, &degrees, &coeffs, opts)?;
    let mut cfg = SolverConfig::new(n_values).neumann(bc == BoundaryCondition::Neumann);
    cfg.seed = seed;
    let eigen = solve_generalized(&system.a, &system.m, &cfg)?;
    Ok(Solution {
        mesh,
        degrees,
        system,
        eigen,
    })
}

/// Pairs the `k`-th distinct reference value with the computed values at the
/// positions it occupies when counted with multiplicity; the closest one wins.
pub fn pair_by_multiplicity(computed: &[f64], reference: &ReferenceSpectrum) -> Result<Vec<EigenError>> {
    let need = reference.total_multiplicity(reference.len());
    if computed.len() < need {
        return Err(Error::Coverage {
            computed: computed.len(),
            required: need,
        });
    }
    let mut offset = 0;
    let mut out = Vec::with_capacity(reference.len());
    for (i, (&r, &m)) in reference.values.iter().zip(&reference.multiplicities).enumerate() {
        let rel = |v: f64| (v - r).abs() / r.abs();
        let best = computed[offset..offset + m]
            .iter()
            .copied()
            .min_by(|a, b| rel(*a).total_cmp(&rel(*b)))
            .expect("multiplicity >= 1");
        out.push(EigenError {
            index: i + 1,
            reference: r,
            computed: best,
            rel_error: rel(best),
        });
        offset += m;
    }
    Ok(out)
}

/// Runs all steps, handing each record to `sink` as soon as it exists.
pub fn run_study_with(
    cfg: &StudyConfig,
    mut sink: impl FnMut(&ConvergenceRecord) -> Result<()>,
) -> Result<Vec<ConvergenceRecord>> {
    if cfg.n_eigs == 0 {
        return Err(Error::argument("n_eigs must be >= 1"));
    }
    let reference = reference_spectrum(&cfg.case, cfg.n_eigs, cfg.ref_file.as_deref())?;
    let n_values = reference.total_multiplicity(cfg.n_eigs);
    let mut records: Vec<ConvergenceRecord> = Vec::new();
    for (run, (mesh_spec, deg_spec)) in cfg.regime.steps().into_iter().enumerate() {
        let start = Instant::now();
        let (mesh, degrees) = build_mesh(&cfg.case, mesh_spec, deg_spec, cfg.seed)?;
        let h = mesh.h();
        let range = (degrees.min_degree(), degrees.max_degree());
        let sol = solve_case(&cfg.case, mesh, degrees, cfg.stab, cfg.quad_extra, n_values, cfg.seed)?;
        let dofs = sol.system.dofs.n_free();
        if let Some(prev) = records.last() {
            if dofs <= prev.dofs {
                return Err(Error::Consistency(format!(
                    "DOF count {dofs} of run {run} does not exceed {} of the previous run",
                    prev.dofs
                )));
            }
        }
        let errors = pair_by_multiplicity(&sol.eigen.eigenvalues, &reference)?;
        let record = ConvergenceRecord {
            run,
            dofs,
            h,
            abscissa: cfg.abscissa.value(dofs, h),
            errors,
            walltime_s: if cfg.record_walltime {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
            degrees: Some(range),
        };
        sink(&record)?;
        records.push(record);
    }
    Ok(records)
}

pub fn run_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRecord>> {
    run_study_with(cfg, |_| Ok(()))
}

/// Fine hp solve whose clustered eigenvalues become a reference file for
/// cases without a closed form.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub layers: usize,
    pub sigma: f64,
    pub mu: usize,
    pub n_distinct: usize,
    pub stab: StabChoice,
    pub cluster_tol: f64,
    pub seed: u64,
}

impl Default for ReferenceRun {
    fn default() -> Self {
        ReferenceRun {
            layers: 12,
            sigma: 0.5,
            mu: 1,
            n_distinct: 6,
            stab: StabChoice::with_s1(crate::vem::S1Kind::DiagonalRecipe),
            cluster_tol: 1e-6,
            seed: 1,
        }
    }
}

struct LayerSpectrum {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
    dofs: usize,
    degrees: (usize, usize),
}

fn layer_spectrum(case: &TestCase, run: &ReferenceRun, layers: usize) -> Result<LayerSpectrum> {
    let (mesh, degrees) = build_mesh(
        case,
        MeshSpec::Graded {
            n: layers,
            sigma: run.sigma,
        },
        DegreeSpec::Hp { mu: run.mu },
        run.seed,
    )?;
    let mut want = 2 * run.n_distinct + 2;
    loop {
        let sol = solve_case(
            case,
            mesh.clone(),
            degrees.clone(),
            run.stab,
            DEFAULT_QUAD_EXTRA,
            want,
            run.seed,
        )?;
        let groups = crate::eigen::clusters(&sol.eigen.eigenvalues, run.cluster_tol);
        // the last cluster may be cut off by the number of computed values
        if groups.len() > run.n_distinct {
            let groups = &groups[..run.n_distinct];
            return Ok(LayerSpectrum {
                values: groups
                    .iter()
                    .map(|c| c.values.iter().sum::<f64>() / c.values.len() as f64)
                    .collect(),
                multiplicities: groups.iter().map(|c| c.multiplicity()).collect(),
                dofs: sol.system.dofs.n_free(),
                degrees: (sol.degrees.min_degree(), sol.degrees.max_degree()),
            });
        }
        if want >= sol.system.dofs.n_free() - 1 {
            return Err(Error::Coverage {
                computed: groups.len(),
                required: run.n_distinct,
            });
        }
        want = (2 * want).min(sol.system.dofs.n_free() - 1);
    }
}

/// Largest ratio of successive differences treated as geometric convergence.
pub const AITKEN_MAX_RATIO: f64 = 0.95;

/// Aitken's Δ² limit of three terms of a geometrically converging sequence;
/// the last term when the differences do not shrink by a clear factor.
pub fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let (d1, d2) = (x1 - x0, x2 - x1);
    if d1 * d2 > 0.0 && d2.abs() <= AITKEN_MAX_RATIO * d1.abs() {
        x2 - d2 * d2 / (d2 - d1)
    } else {
        x2
    }
}

/// Reference spectrum from hp solves on `layers - 2`, `layers - 1` and `layers`
/// layers, extrapolated with [`aitken`] in the number of layers.
pub fn generate_reference(case: &TestCase, run: &ReferenceRun) -> Result<ReferenceSpectrum> {
    if case.graded_domain().is_none() {
        return Err(Error::argument(format!("{} has a closed-form spectrum", case.id())));
    }
    if run.layers < 2 {
        return Err(Error::argument("reference extrapolation needs at least 2 layers"));
    }
    let runs = (run.layers - 2..=run.layers)
        .map(|l| layer_spectrum(case, run, l))
        .collect::<Result<Vec<_>>>()?;
    let fine = &runs[2];
    if runs.iter().any(|r| r.multiplicities != fine.multiplicities) {
        return Err(Error::Consistency(format!(
            "cluster multiplicities differ between layer counts: {:?}",
            runs.iter().map(|r| r.multiplicities.clone()).collect::<Vec<_>>()
        )));
    }
    let values: Vec<f64> = (0..fine.values.len())
        .map(|k| aitken(runs[0].values[k], runs[1].values[k], runs[2].values[k]))
        .collect();
    let correction = values
        .iter()
        .zip(&fine.values)
        .map(|(v, f)| (v - f).abs() / v.abs())
        .fold(0.0, f64::max);
    let spread = (0..fine.values.len())
        .map(|k| {
            let v = runs.iter().map(|r| r.values[k]);
            (v.clone().fold(f64::NEG_INFINITY, f64::max) - v.fold(f64::INFINITY, f64::min)) / fine.values[k].abs()
        })
        .fold(0.0, f64::max);
    let mut header = vec![
        format!("case: {case}"),
        "provenance: external_data_file".into(),
        format!(
            "generated by: hpvem reference --case {} {}--layers {} --sigma {} --mu {} --neigs {} --stab {}",
            case.id(),
            match case {
                TestCase::Checkerboard { eps } => format!("--eps {eps:e} "),
                _ => String::new(),
            },
            run.layers,
            run.sigma,
            run.mu,
            run.n_distinct,
            run.stab.s1
        ),
        format!(
            "discretization: hp graded meshes with {}..{} layers, finest {} DOFs, cell degrees {}..{}, cluster tolerance {:e}",
            run.layers - 2,
            run.layers,
            fine.dofs,
            fine.degrees.0,
            fine.degrees.1,
            run.cluster_tol
        ),
        format!("values: Aitken extrapolation in the layer count, largest relative correction {correction:.2e}"),
        format!("largest relative spread across the three layer counts {spread:.2e}"),
    ];
    for (l, r) in (run.layers - 2..).zip(&runs) {
        let vals: Vec<String> = r.values.iter().map(|v| format!("{v:.12e}")).collect();
        header.push(format!("layers {l}: {}", vals.join(" ")));
    }
    Ok(ReferenceSpectrum {
        values,
        multiplicities: fine.multiplicities.clone(),
        provenance: super::reference::Provenance::ExternalDataFile,
        header,
    })
}
