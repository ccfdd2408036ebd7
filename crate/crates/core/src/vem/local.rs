use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::element::{LocalElement, ProjectorSet};
use crate::assembly::{CoefficientField, SampledCoefficients};
use crate::error::{Error, Result};
use crate::polyspace::dim;

/// Stabilization of the stiffness form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum S1Kind {
    /// `(p²/h²)(Π⁰_{p-2}u, Π⁰_{p-2}v)_K + (p/h)(u, v)_{∂K}`
    #[default]
    Explicit,
    /// `diag(max(1, a(Π∇φ_i, Π∇φ_i)))`
    DiagonalRecipe,
}

/// Stabilization of the mass form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum S0Kind {
    /// `(h/p²)(u, v)_{∂K}`
    #[default]
    BoundaryHp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StabChoice {
    pub s1: S1Kind,
    pub s0: S0Kind,
}

impl FromStr for S1Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(S1Kind::Explicit),
            "drecipe" => Ok(S1Kind::DiagonalRecipe),
            _ => Err(Error::argument(format!(
                "unknown stabilization '{s}' (expected explicit or drecipe)"
            ))),
        }
    }
}

impl fmt::Display for S1Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            S1Kind::Explicit => "explicit",
            S1Kind::DiagonalRecipe => "drecipe",
        })
    }
}

impl StabChoice {
    pub fn with_s1(s1: S1Kind) -> Self {
        StabChoice {
            s1,
            s0: S0Kind::BoundaryHp,
        }
    }
}

/// Stiffness `A_K`, potential `B_K` and mass `C_K` of one cell.
#[derive(Debug, Clone)]
pub struct LocalMatrices {
    pub stiffness: DMatrix<f64>,
    pub potential: Option<DMatrix<f64>>,
    pub mass: DMatrix<f64>,
    pub stab: StabChoice,
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `S₁` on the full DOF space (before composing with `I - Π∇`).
pub fn stab_s1(
    kind: S1Kind,
    el: &LocalElement,
    pr: &ProjectorSet,
    diffusion: Option<&SampledCoefficients>,
) -> DMatrix<f64> {
    let l = &el.layout;
    let n = l.n_dofs();
    let p = l.p as f64;
    match kind {
        S1Kind::Explicit => {
            let mut s = el.boundary_mass() * (p / el.h);
            let w = p * p / (el.h * el.h) * el.area;
            for a in 0..l.n_moments() {
                let m = l.moment_dof(a);
                s[(m, m)] += w;
            }
            s
        }
        S1Kind::DiagonalRecipe => {
            let g = el.stiffness_gram(diffusion.map(|c| &c.diffusion[..]));
            let cons = pr.pi_nabla.transpose() * g * &pr.pi_nabla;
            DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| cons[(i, i)].max(1.0)))
        }
    }
}

/// `S₀ = (h/p²)(u, v)_{∂K}`.
pub fn stab_s0(el: &LocalElement) -> DMatrix<f64> {
    let p = el.layout.p as f64;
    el.boundary_mass() * (el.h / (p * p))
}

/// Local matrices for `coeffs` sampled at the element quadrature points.
pub fn local_matrices(el: &LocalElement, coeffs: &CoefficientField, stab: StabChoice) -> Result<LocalMatrices> {
    let pr = el.projectors()?;
    let sampled = coeffs.sample(el.cell, &el.rule.points)?;
    Ok(local_matrices_with(el, &pr, &sampled, stab))
}

pub fn local_matrices_with(
    el: &LocalElement,
    pr: &ProjectorSet,
    c: &SampledCoefficients,
    stab: StabChoice,
) -> LocalMatrices {
    let l = &el.layout;
    let n = l.n_dofs();
    let np1 = dim(l.p - 1);
    let w = &el.rule.weights;

    // weighted Gram blocks of the degree p - 1 basis
    let vals = el.basis.eval_rule(&el.rule).columns(0, np1).into_owned();
    let mut mk = [
        DMatrix::zeros(np1, np1),
        DMatrix::zeros(np1, np1),
        DMatrix::zeros(np1, np1),
    ];
    let mut mv = c.potential.as_ref().map(|_| DMatrix::zeros(np1, np1));
    for i in 0..w.len() {
        let row = vals.row(i);
        let outer = row.transpose() * row * w[i];
        let k = &c.diffusion[i];
        mk[0] += &outer * k[(0, 0)];
        mk[1] += &outer * k[(0, 1)];
        mk[2] += &outer * k[(1, 1)];
        if let (Some(m), Some(v)) = (mv.as_mut(), c.potential.as_ref()) {
            *m += &outer * v[i];
        }
    }
    let [gx, gy] = &pr.pi_zero_grad;
    let cross = gx.transpose() * &mk[1] * gy;
    let consistency = gx.transpose() * &mk[0] * gx + gy.transpose() * &mk[2] * gy + &cross + cross.transpose();

    let d = el.polynomial_dofs();
    let ident = DMatrix::<f64>::identity(n, n);
    let proj = &ident - &d * &pr.pi_nabla;
    let s1 = stab_s1(stab.s1, el, pr, Some(c));
    let stiffness = symmetrize(consistency + proj.transpose() * s1 * &proj);

    let potential = mv.map(|m| symmetrize(pr.pi_zero.transpose() * m * &pr.pi_zero));

    let d0 = d.columns(0, np1);
    let proj0 = &ident - d0 * &pr.pi_zero;
    let mass = symmetrize(pr.pi_zero.transpose() * &pr.pi_zero + proj0.transpose() * stab_s0(el) * &proj0);

    LocalMatrices {
        stiffness,
        potential,
        mass,
        stab,
    }
}
