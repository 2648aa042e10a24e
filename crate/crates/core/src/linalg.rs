//! Column-pivoted Householder QR for least squares with rank detection.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{GnarError, Result};

/// `A P = Q R` with `|R_00| >= |R_11| >= ...`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Upper triangle holds `R`; below the diagonal is scratch.
    r: DMatrix<f64>,
    reflectors: Vec<(DVector<f64>, f64)>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (n, q) = a.shape();
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..q).collect();
        let mut reflectors = Vec::new();
        let steps = n.min(q);
        let mut first_pivot = 0.0;
        let mut rank = 0;
        for j in 0..steps {
            // recompute trailing norms each step; q is small so exact norms are affordable
            let (best, best_norm) = (j..q)
                .map(|c| (c, r.view((j, c), (n - j, 1)).norm()))
                .fold((j, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if j == 0 {
                first_pivot = best_norm;
            }
            let tol = (n.max(q) as f64) * f64::EPSILON * first_pivot;
            if best_norm <= tol || best_norm == 0.0 {
                break;
            }
            if best != j {
                r.swap_columns(j, best);
                perm.swap(j, best);
            }
            let x = r.view((j, j), (n - j, 1)).into_owned();
            let alpha = if x[0] >= 0.0 { -best_norm } else { best_norm };
            let mut v = x.column(0).into_owned();
            v[0] -= alpha;
            let vnorm2 = v.norm_squared();
            let tau = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
            if tau != 0.0 {
                let mut block = r.view_mut((j, j), (n - j, q - j));
                let w = block.tr_mul(&v) * tau;
                block.ger(-1.0, &v, &w, 1.0);
            }
            r[(j, j)] = alpha;
            for i in j + 1..n {
                r[(i, j)] = 0.0;
            }
            reflectors.push((v, tau));
            rank += 1;
        }
        Self {
            r,
            reflectors,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn columns(&self) -> usize {
        self.r.ncols()
    }

    /// Column permutation: position `i` of the factorisation is column `perm[i]` of `A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Columns left over once the leading independent set is chosen.
    pub fn dependent_columns(&self) -> &[usize] {
        &self.perm[self.rank..]
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.r.ncols()
    }

    fn apply_qt(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut y = b.clone();
        for (j, (v, tau)) in self.reflectors.iter().enumerate() {
            let mut tail = y.rows_mut(j, v.len());
            let s = v.dot(&tail) * tau;
            tail.axpy(-s, v, 1.0);
        }
        y
    }

    fn r_block(&self) -> DMatrix<f64> {
        let q = self.r.ncols();
        self.r.view((0, 0), (q, q)).upper_triangle()
    }

    /// Least-squares solution; requires full column rank.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert!(self.is_full_rank(), "least-squares solve needs full column rank");
        let q = self.r.ncols();
        let qtb = self.apply_qt(b);
        let z = self
            .r_block()
            .solve_upper_triangular(&qtb.rows(0, q).into_owned())
            .expect("nonzero diagonal on a full-rank factor");
        let mut theta = DVector::zeros(q);
        for (i, &col) in self.perm.iter().enumerate() {
            theta[col] = z[i];
        }
        theta
    }

    /// `(AᵀA)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ`; requires full column rank.
    pub fn inverse_gram(&self) -> DMatrix<f64> {
        assert!(self.is_full_rank(), "inverse gram needs full column rank");
        let q = self.r.ncols();
        let rinv = self
            .r_block()
            .solve_upper_triangular(&DMatrix::identity(q, q))
            .expect("nonzero diagonal on a full-rank factor");
        let inner = &rinv * rinv.transpose();
        let mut out = DMatrix::zeros(q, q);
        for i in 0..q {
            for j in 0..q {
                out[(self.perm[i], self.perm[j])] = inner[(i, j)];
            }
        }
        out
    }
}

/// Cholesky factor of a symmetric positive definite matrix, rejecting
/// asymmetric or numerically singular input.
pub fn spd_cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() {
        return Err(GnarError::NotPositiveDefinite(format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(GnarError::NotPositiveDefinite("matrix is zero or non-finite".into()));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(GnarError::NotPositiveDefinite(format!(
                    "entries ({}, {}) and ({}, {}) differ",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1
                )));
            }
        }
    }
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| GnarError::NotPositiveDefinite("factorisation failed".into()))?;
    let l = chol.l_dirty();
    let floor = (n as f64) * f64::EPSILON * scale;
    if let Some(i) = (0..n).find(|&i| l[(i, i)] * l[(i, i)] <= floor) {
        return Err(GnarError::NotPositiveDefinite(format!(
            "pivot {} is numerically zero",
            i + 1
        )));
    }
    Ok(chol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solution_of_square_system() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = &a * &x;
        let qr = PivotedQr::new(&a);
        assert!(qr.is_full_rank());
        assert!((qr.solve(&b) - x).amax() < 1e-12);
        let gram_inv = qr.inverse_gram();
        let expected = (a.transpose() * &a).try_inverse().unwrap();
        assert!((gram_inv - expected).amax() < 1e-12);
    }

    #[test]
    fn detects_dependent_column() {
        let a = DMatrix::from_row_slice(4, 3, &[
            1.0, 2.0, 3.0, //
            0.0, 1.0, 1.0, //
            1.0, 0.0, 1.0, //
            2.0, 1.0, 3.0,
        ]);
        let qr = PivotedQr::new(&a);
        assert_eq!(qr.rank(), 2);
        assert_eq!(qr.dependent_columns().len(), 1);
    }

    #[test]
    fn zero_column_is_dependent() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let qr = PivotedQr::new(&a);
        assert_eq!(qr.rank(), 1);
        assert_eq!(qr.dependent_columns(), &[1]);
    }

    #[test]
    fn cholesky_rejects_singular_and_asymmetric() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(spd_cholesky(&singular).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(spd_cholesky(&asym).is_err());
        assert!(spd_cholesky(&DMatrix::zeros(2, 2)).is_err());
        assert!(spd_cholesky(&DMatrix::identity(3, 3)).is_ok());
    }
}
