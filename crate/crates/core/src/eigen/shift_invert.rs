//! Thick-restarted block Krylov iteration on `(A − σM)⁻¹M`, which is
//! self-adjoint in the M-inner product, with Rayleigh–Ritz extraction.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{relative_residual_with, SolverConfig};
use crate::assembly::CsrMatrix;
use crate::error::{Error, Result};

fn spmm(m: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(m.n_rows(), x.ncols());
    for i in 0..m.n_rows() {
        for (j, v) in m.row(i) {
            for c in 0..x.ncols() {
                y[(i, c)] += v * x[(j, c)];
            }
        }
    }
    y
}

struct Operator {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl Operator {
    /// `(A − σM)⁻¹ y` for a block `y` that already holds `M x`.
    fn solve(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut rhs = Mat::<f64>::from_fn(y.nrows(), y.ncols(), |i, j| y[(i, j)]);
        self.llt.solve_in_place(rhs.as_mut());
        DMatrix::from_fn(y.nrows(), y.ncols(), |i, j| rhs[(i, j)])
    }
}

/// M-orthonormalizes `w` against the basis `v` (with `mv = M v`) and itself.
/// Columns that vanish under projection are dropped.
fn orthonormalize_block(
    w: &DMatrix<f64>,
    v: &DMatrix<f64>,
    mv: &DMatrix<f64>,
    m: &CsrMatrix,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = w.nrows();
    let mw = spmm(m, w);
    let mut kept: Vec<(nalgebra::DVector<f64>, nalgebra::DVector<f64>)> = Vec::new();
    for j in 0..w.ncols() {
        let mut x = w.column(j).into_owned();
        let n0 = x.dot(&mw.column(j)).max(0.0).sqrt();
        if n0 == 0.0 {
            continue;
        }
        // two passes of classical Gram–Schmidt are enough in floating point
        for _ in 0..2 {
            if v.ncols() > 0 {
                let c = mv.transpose() * &x;
                x -= v * c;
            }
            for (q, mq) in &kept {
                let c = mq.dot(&x);
                x.axpy(-c, q, 1.0);
            }
        }
        let mx = m.mul_vec(&x);
        let nrm = x.dot(&mx).max(0.0).sqrt();
        if nrm > 1e-8 * n0 {
            kept.push((x / nrm, mx / nrm));
        }
    }
    let q = DMatrix::from_fn(n, kept.len(), |i, j| kept[j].0[i]);
    let mq = DMatrix::from_fn(n, kept.len(), |i, j| kept[j].1[i]);
    (q, mq)
}

fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows().max(b.nrows()), a.ncols() + b.ncols());
    if a.ncols() > 0 {
        out.columns_mut(0, a.ncols()).copy_from(a);
    }
    if b.ncols() > 0 {
        out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    }
    out
}

pub(super) fn solve(
    a: &CsrMatrix,
    m: &CsrMatrix,
    wanted: usize,
    shift: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, DMatrix<f64>, usize)> {
    let n = a.n_rows();
    let mut trip: Vec<Triplet<usize, usize, f64>> = a.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    trip.extend(m.iter().map(|(i, j, v)| Triplet::new(i, j, -shift * v)));
    let shifted = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Consistency(format!("sparse matrix construction failed: {e:?}")))?;
    let llt = shifted.sp_cholesky(Side::Lower).map_err(|_| Error::Shift { shift })?;
    let op = Operator { llt };

    let b = cfg.block.max(1).min(n);
    // guard vectors keep the convergence of the last wanted pair independent
    // of the gap right after it
    let keep = n.min(2 * wanted + 2 * b);
    let max_basis = n.min((3 * keep).max(60));
    let (na, nm) = (a.norm_inf(), m.norm_inf());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random_block = |rng: &mut ChaCha8Rng, cols: usize| DMatrix::from_fn(n, cols, |_, _| rng.gen_range(-1.0..1.0));

    let mut v = DMatrix::<f64>::zeros(n, 0);
    let mut mv = DMatrix::<f64>::zeros(n, 0);
    let mut z = DMatrix::<f64>::zeros(n, 0);
    let mut w = random_block(&mut rng, b);
    let mut best = (f64::INFINITY, Vec::new(), DMatrix::zeros(n, 0));

    for it in 1..=cfg.max_iter {
        let (q, mq) = orthonormalize_block(&w, &v, &mv, m);
        let (q, mq) = if q.ncols() == 0 {
            if v.ncols() >= n {
                (q, mq)
            } else {
                orthonormalize_block(&random_block(&mut rng, b), &v, &mv, m)
            }
        } else {
            (q, mq)
        };
        let zq = if q.ncols() > 0 {
            op.solve(&mq)
        } else {
            DMatrix::zeros(n, 0)
        };
        v = hcat(&v, &q);
        mv = hcat(&mv, &mq);
        z = hcat(&z, &zq);

        let k = v.ncols();
        let h = mv.transpose() * &z;
        let h = (&h + h.transpose()) * 0.5;
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

        if k >= wanted {
            let y = DMatrix::from_fn(k, wanted, |r, c| eig.eigenvectors[(r, order[c])]);
            let x = &v * &y;
            let lambdas: Vec<f64> = order[..wanted]
                .iter()
                .map(|&i| shift + 1.0 / eig.eigenvalues[i])
                .collect();
            let worst = (0..wanted)
                .map(|c| relative_residual_with(a, m, lambdas[c], &x.column(c).into_owned(), na, nm))
                .fold(0.0, f64::max);
            if worst < best.0 {
                best = (worst, lambdas.clone(), x.clone());
            }
            if worst <= cfg.tol || k >= n {
                return Ok(sorted(best.1, best.2, it));
            }
        }
        w = zq;
        if w.ncols() == 0 {
            w = random_block(&mut rng, b);
        }
        if max_basis < n && k + b > max_basis {
            // the continuation block must be orthogonal to the whole basis,
            // not only to the retained part, to keep the Krylov relation
            w = orthonormalize_block(&w, &v, &mv, m).0;
            let kk = keep.min(k);
            let y = DMatrix::from_fn(k, kk, |r, c| eig.eigenvectors[(r, order[c])]);
            v = &v * &y;
            mv = &mv * &y;
            z = &z * &y;
        }
    }
    if best.1.is_empty() {
        return Err(Error::Iteration {
            iterations: cfg.max_iter,
            worst_residual: f64::INFINITY,
        });
    }
    // the caller re-checks the residuals and reports non-convergence
    Ok(sorted(best.1, best.2, cfg.max_iter))
}

fn sorted(vals: Vec<f64>, x: DMatrix<f64>, it: usize) -> (Vec<f64>, DMatrix<f64>, usize) {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let v = order.iter().map(|&i| vals[i]).collect();
    let xs = DMatrix::from_fn(x.nrows(), vals.len(), |r, c| x[(r, order[c])]);
    (v, xs, it)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_solve() {
        let t = vec![
            (0, 0, 4.0),
            (0, 1, 1.0),
            (1, 0, 1.0),
            (1, 1, 3.0),
            (2, 2, 2.0),
            (1, 2, 0.5),
            (2, 1, 0.5),
        ];
        let a = CsrMatrix::from_triplets(3, 3, &t);
        let trip: Vec<Triplet<usize, usize, f64>> = a.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let s = SparseColMat::<usize, f64>::try_new_from_triplets(3, 3, &trip).unwrap();
        let op = Operator {
            llt: s.sp_cholesky(Side::Lower).unwrap(),
        };
        let y = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let z = op.solve(&y);
        let back = a.mul_vec(&z.column(0).into_owned());
        assert!((back - y.column(0)).amax() < 1e-12, "{z}");
    }
}
