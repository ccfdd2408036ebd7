//! Smallest eigenpairs of `A x = λ M x` with `A` symmetric semidefinite and `M`
//! symmetric positive definite.

mod matching;
mod shift_invert;

use nalgebra::{DMatrix, DVector};

use crate::assembly::CsrMatrix;
use crate::error::{Error, Result};

pub use matching::{clusters, match_eigenvalues, Cluster, Pairing};

/// Systems below this size are solved densely.
pub const DENSE_LIMIT: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dense below [`DENSE_LIMIT`], shift-invert above.
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub n_eigs: usize,
    /// Spectral shift; `None` picks 0, or a small negative value when
    /// `neumann_zero_mode` is set.
    pub shift: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Drop the constant mode of a pure Neumann problem from the results.
    pub neumann_zero_mode: bool,
    pub method: Method,
    /// Block size of the Krylov iteration.
    pub block: usize,
    /// Seed of the random starting block.
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(n_eigs: usize) -> Self {
        SolverConfig {
            n_eigs,
            shift: None,
            tol: 1e-10,
            max_iter: 400,
            neumann_zero_mode: false,
            method: Method::Auto,
            block: 4,
            seed: 0x5eed,
        }
    }

    pub fn neumann(mut self, on: bool) -> Self {
        self.neumann_zero_mode = on;
        self
    }

    pub fn method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }

    pub fn shift(mut self, s: f64) -> Self {
        self.shift = Some(s);
        self
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are M-orthonormal eigenvectors.
    pub eigenvectors: DMatrix<f64>,
    /// `‖Ax − λMx‖∞ / ((‖A‖∞ + |λ|‖M‖∞)‖x‖∞)` per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub method: Method,
    /// Discarded Neumann zero eigenvalue.
    pub zero_mode: Option<f64>,
}

/// Relative residual of one eigenpair.
pub fn relative_residual(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, x: &DVector<f64>) -> f64 {
    relative_residual_with(a, m, lambda, x, a.norm_inf(), m.norm_inf())
}

pub(crate) fn relative_residual_with(
    a: &CsrMatrix,
    m: &CsrMatrix,
    lambda: f64,
    x: &DVector<f64>,
    na: f64,
    nm: f64,
) -> f64 {
    let r = a.mul_vec(x) - m.mul_vec(x) * lambda;
    r.amax() / ((na + lambda.abs() * nm) * x.amax())
}

pub fn solve_generalized(a: &CsrMatrix, m: &CsrMatrix, cfg: &SolverConfig) -> Result<EigenResult> {
    let n = a.n_rows();
    if a.n_cols() != n || m.n_rows() != n || m.n_cols() != n {
        return Err(Error::argument("A and M must be square of equal size"));
    }
    if cfg.n_eigs < 1 {
        return Err(Error::argument("n_eigs must be >= 1"));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::argument("tolerance must be positive"));
    }
    let wanted = cfg.n_eigs + usize::from(cfg.neumann_zero_mode);
    if wanted > n {
        return Err(Error::Coverage {
            computed: n.saturating_sub(usize::from(cfg.neumann_zero_mode)),
            required: cfg.n_eigs,
        });
    }
    let method = match cfg.method {
        Method::Auto if n < DENSE_LIMIT => Method::Dense,
        Method::Auto => Method::ShiftInvert,
        m => m,
    };
    // rounding in the raw eigenvalues can swap nearly equal neighbours, so a
    // few guard pairs are polished as well before the cut
    let (_, vecs, iterations) = match method {
        Method::Dense => {
            let (v, x) = dense_smallest(&a.to_dense(), &m.to_dense(), n.min(wanted + 4))?;
            (v, x, 1)
        }
        _ => {
            let shift = cfg.shift.unwrap_or_else(|| {
                if cfg.neumann_zero_mode {
                    -1e-8 * a.norm_inf() / m.norm_inf()
                } else {
                    0.0
                }
            });
            shift_invert::solve(a, m, n.min(wanted + 1), shift, cfg)?
        }
    };
    // with large coefficient contrast the eigenvalues from either method
    // lose digits to cancellation; Rayleigh–Ritz on the computed vectors
    // with projections accumulated in compensated arithmetic recovers them,
    // also inside clusters of nearly equal values
    let ga = projected(a, &vecs);
    let gm = projected(m, &vecs);
    let (vals, y) = dense_smallest(&ga, &gm, wanted)?;
    let vecs = &vecs * y;
    let (na, nm) = (a.norm_inf(), m.norm_inf());
    let mut residuals: Vec<f64> = (0..wanted)
        .map(|k| relative_residual_with(a, m, vals[k], &vecs.column(k).into_owned(), na, nm))
        .collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > cfg.tol {
        return Err(Error::Iteration {
            iterations,
            worst_residual: worst,
        });
    }
    let skip = usize::from(cfg.neumann_zero_mode);
    let zero_mode = cfg.neumann_zero_mode.then(|| vals[0]);
    residuals.drain(..skip);
    Ok(EigenResult {
        eigenvalues: vals[skip..wanted].to_vec(),
        eigenvectors: vecs.columns(skip, cfg.n_eigs).into_owned(),
        residuals,
        iterations,
        method,
        zero_mode,
    })
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// `xᵀ A y` in compensated arithmetic, about twice the working precision.
pub fn bilinear_form(a: &CsrMatrix, x: &[f64], y: &[f64]) -> f64 {
    let (mut sum, mut err) = (0.0, 0.0);
    for (i, j, v) in a.iter() {
        let p = v * x[i];
        let ep = v.mul_add(x[i], -p);
        let q = p * y[j];
        let eq = p.mul_add(y[j], -q);
        let (s, es) = two_sum(sum, q);
        sum = s;
        err += es + eq + ep * y[j];
    }
    sum + err
}

/// `Xᵀ A X` entry by entry with [`bilinear_form`].
fn projected(a: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let k = x.ncols();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = bilinear_form(a, x.column(i).as_slice(), x.column(j).as_slice());
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Full dense solve through the Cholesky factor of `M`; returns the `k`
/// smallest pairs with M-orthonormal vectors.
pub fn dense_smallest(a: &DMatrix<f64>, m: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let l = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Consistency("mass matrix is not positive definite".into()))?
        .l();
    let li_a = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Consistency("singular mass factor".into()))?;
    let c = l
        .solve_lower_triangular(&li_a.transpose())
        .ok_or_else(|| Error::Consistency("singular mass factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(n, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let x = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Consistency("singular mass factor".into()))?;
    Ok((vals, x))
}
