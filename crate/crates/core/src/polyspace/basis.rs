//! Scaled monomials and their L²-orthonormalized counterpart on a single cell.

use nalgebra::{DMatrix, DVector};

use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::mesh::polygon::Point;

/// Condition number above which the monomial Gram matrix is declared singular.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Dimension `(ℓ + 1)(ℓ + 2) / 2` of the polynomials of degree at most `ℓ`.
pub const fn dim(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Same as [`dim`], with `dim(-1) = 0` for convenience.
pub fn dim_signed(l: isize) -> usize {
    if l < 0 {
        0
    } else {
        dim(l as usize)
    }
}

/// Exponents `(a, b)` ordered by total degree, then by decreasing `a`.
pub fn exponents(l: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(dim(l));
    for d in 0..=l {
        for b in 0..=d {
            e.push((d - b, b));
        }
    }
    e
}

/// `((x - x_K) / h_K)^a ((y - y_K) / h_K)^b`, `a + b <= degree`.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub degree: usize,
    pub center: Point,
    pub h: f64,
    exps: Vec<(usize, usize)>,
}

impl MonomialBasis {
    pub fn new(degree: usize, center: Point, h: f64) -> Self {
        MonomialBasis {
            degree,
            center,
            h,
            exps: exponents(degree),
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    fn powers(&self, p: &Point) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.h;
        let eta = (p.y - self.center.y) / self.h;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for k in 1..=self.degree {
            px[k] = px[k - 1] * xi;
            py[k] = py[k - 1] * eta;
        }
        (px, py)
    }

    pub fn eval(&self, p: &Point) -> DVector<f64> {
        let (px, py) = self.powers(p);
        DVector::from_iterator(self.dim(), self.exps.iter().map(|&(a, b)| px[a] * py[b]))
    }

    /// Physical gradient `(∂x, ∂y)` of every monomial.
    pub fn grad(&self, p: &Point) -> (DVector<f64>, DVector<f64>) {
        let (px, py) = self.powers(p);
        let s = 1.0 / self.h;
        let gx = self
            .exps
            .iter()
            .map(|&(a, b)| if a == 0 { 0.0 } else { a as f64 * px[a - 1] * py[b] * s });
        let gy = self
            .exps
            .iter()
            .map(|&(a, b)| if b == 0 { 0.0 } else { b as f64 * px[a] * py[b - 1] * s });
        (
            DVector::from_iterator(self.dim(), gx),
            DVector::from_iterator(self.dim(), gy),
        )
    }

    pub fn laplacian(&self, p: &Point) -> DVector<f64> {
        let (px, py) = self.powers(p);
        let s = 1.0 / (self.h * self.h);
        DVector::from_iterator(
            self.dim(),
            self.exps.iter().map(|&(a, b)| {
                let mut v = 0.0;
                if a >= 2 {
                    v += (a * (a - 1)) as f64 * px[a - 2] * py[b];
                }
                if b >= 2 {
                    v += (b * (b - 1)) as f64 * px[a] * py[b - 2];
                }
                v * s
            }),
        )
    }

    /// Rows are quadrature points, columns are monomials.
    pub fn eval_rule(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rule.len(), self.dim());
        for (i, p) in rule.points.iter().enumerate() {
            m.set_row(i, &self.eval(p).transpose());
        }
        m
    }
}

/// Orthonormal basis `q = C m` with `C` lower triangular, so the first
/// `dim(k)` functions span the polynomials of degree `k` for every `k`.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    pub monomials: MonomialBasis,
    pub coeffs: DMatrix<f64>,
    pub cell: usize,
}

impl OrthoBasis {
    pub fn degree(&self) -> usize {
        self.monomials.degree
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn eval(&self, p: &Point) -> DVector<f64> {
        &self.coeffs * self.monomials.eval(p)
    }

    pub fn grad(&self, p: &Point) -> (DVector<f64>, DVector<f64>) {
        let (gx, gy) = self.monomials.grad(p);
        (&self.coeffs * gx, &self.coeffs * gy)
    }

    pub fn laplacian(&self, p: &Point) -> DVector<f64> {
        &self.coeffs * self.monomials.laplacian(p)
    }

    /// Rows are quadrature points, columns are basis functions.
    pub fn eval_rule(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        self.monomials.eval_rule(rule) * self.coeffs.transpose()
    }

    /// Gram matrix under `rule`.
    pub fn gram(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        weighted_gram(&self.eval_rule(rule), &rule.weights)
    }
}

/// `Vᵀ W V` for point values `V` and weights `W`.
pub fn weighted_gram(values: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut wv = values.clone();
    for (i, w) in weights.iter().enumerate() {
        wv.row_mut(i).scale_mut(*w);
    }
    values.transpose() * wv
}

/// 2-norm condition number of the Gram matrix with unit diagonal.
pub fn normalized_condition(gram: &DMatrix<f64>) -> f64 {
    let n = gram.nrows();
    let d: Vec<f64> = (0..n).map(|i| gram[(i, i)].sqrt()).collect();
    let g = DMatrix::from_fn(n, n, |i, j| gram[(i, j)] / (d[i] * d[j]));
    let ev = g.symmetric_eigenvalues();
    let max = ev.max();
    let min = ev.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// L²-orthonormalizes the scaled monomials of `degree` on a cell with the given
/// centroid and diameter. QR of the weighted point values followed by one
/// Cholesky re-orthonormalization pass.
pub fn orthonormalize(cell: usize, center: Point, h: f64, degree: usize, rule: &QuadratureRule) -> Result<OrthoBasis> {
    if rule.order < 2 * degree {
        return Err(Error::argument(format!(
            "quadrature order {} below 2 * degree = {}",
            rule.order,
            2 * degree
        )));
    }
    let mono = MonomialBasis::new(degree, center, h);
    let n = mono.dim();
    let values = mono.eval_rule(rule);
    let condition = normalized_condition(&weighted_gram(&values, &rule.weights));
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::Conditioning { cell, condition });
    }
    if rule.len() < n {
        return Err(Error::Conditioning {
            cell,
            condition: f64::INFINITY,
        });
    }
    let mut wv = values.clone();
    for (i, w) in rule.weights.iter().enumerate() {
        wv.row_mut(i).scale_mut(w.sqrt());
    }
    let r = wv.qr().r();
    // q = R^{-T} m; flip signs so every leading coefficient is positive
    let mut rt = r.transpose();
    for i in 0..n {
        if rt[(i, i)] < 0.0 {
            rt.column_mut(i).neg_mut();
        }
    }
    let mut c = rt
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::Conditioning {
            cell,
            condition: f64::INFINITY,
        })?;
    let g = weighted_gram(&(&values * c.transpose()), &rule.weights);
    let l = g
        .cholesky()
        .ok_or(Error::Conditioning {
            cell,
            condition: f64::INFINITY,
        })?
        .l();
    c = l.solve_lower_triangular(&c).ok_or(Error::Conditioning {
        cell,
        condition: f64::INFINITY,
    })?;
    // exact zeros above the diagonal
    for i in 0..n {
        for j in i + 1..n {
            c[(i, j)] = 0.0;
        }
    }
    Ok(OrthoBasis {
        monomials: mono,
        coeffs: c,
        cell,
    })
}

/// Maximum absolute entry of `G - I`.
pub fn gram_deviation(g: &DMatrix<f64>) -> f64 {
    (g - DMatrix::identity(g.nrows(), g.ncols())).amax()
}
