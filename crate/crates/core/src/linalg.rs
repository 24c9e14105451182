//! Positive-semidefinite quadratic forms through a cached eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// `h -> sqrt(h^T A h)` for a symmetric PSD `A`, together with its dual
/// `d -> sqrt(d^T A^+ d)` (infinite when `d` leaves the range of `A`).
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    eigenvectors: DMatrix<f64>,
    cutoff: f64,
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::dims("square matrix", n, m.ncols()));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::AsymmetricMatrix { i, j });
            }
        }
    }
    Ok(())
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n {
        return Err(Error::dims(format!("{what} rows"), n, rows.len()));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::dims(format!("{what} row {i}"), n, row.len()));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("{what} row {i}"),
                    index: j,
                });
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

impl QuadraticForm {
    /// Form of a symmetric PSD matrix; eigenvalues below `cutoff` count as zero.
    pub fn from_psd(a: &DMatrix<f64>, cutoff: f64) -> Result<Self> {
        check_symmetric(a)?;
        let eig = SymmetricEigen::new(a.clone());
        let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if let Some(&neg) = eig.eigenvalues.iter().find(|&&v| v < -cutoff * scale) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not positive semidefinite (eigenvalue {neg})"
            )));
        }
        let eigenvalues = eig
            .eigenvalues
            .iter()
            .map(|&v| if v.abs() <= cutoff { 0.0 } else { v })
            .collect();
        Ok(QuadraticForm {
            n: a.nrows(),
            eigenvalues,
            eigenvectors: eig.eigenvectors,
            cutoff,
        })
    }

    /// Form of `K^{-1}` for a positive-definite Gram matrix `K`.
    pub fn inverse_of_gram(k: &DMatrix<f64>, cutoff: f64) -> Result<Self> {
        check_symmetric(k)?;
        let eig = SymmetricEigen::new(k.clone());
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min <= cutoff {
            return Err(Error::SingularGram {
                min_eigenvalue: min,
            });
        }
        Ok(QuadraticForm {
            n: k.nrows(),
            eigenvalues: eig.eigenvalues.iter().map(|v| 1.0 / v).collect(),
            eigenvectors: eig.eigenvectors,
            cutoff,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn coords(&self, h: &[f64]) -> DVector<f64> {
        self.eigenvectors.tr_mul(&DVector::from_column_slice(h))
    }

    /// `h^T A h`.
    pub fn quad(&self, h: &[f64]) -> f64 {
        let c = self.coords(h);
        c.iter()
            .zip(&self.eigenvalues)
            .map(|(ci, l)| l * ci * ci)
            .sum::<f64>()
            .max(0.0)
    }

    /// `a^T A b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let (ca, cb) = (self.coords(a), self.coords(b));
        ca.iter()
            .zip(cb.iter())
            .zip(&self.eigenvalues)
            .map(|((x, y), l)| l * x * y)
            .sum()
    }

    pub fn norm(&self, h: &[f64]) -> f64 {
        self.quad(h).sqrt()
    }

    /// `d^T A^+ d`, or `+inf` when `d` has a component in the null space of `A`.
    pub fn dual_quad(&self, d: &[f64]) -> f64 {
        let c = self.coords(d);
        let scale = d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut acc = 0.0;
        for (ci, &l) in c.iter().zip(&self.eigenvalues) {
            if l == 0.0 {
                if ci.abs() > 1e-9 * scale {
                    return f64::INFINITY;
                }
            } else {
                acc += ci * ci / l;
            }
        }
        acc
    }

    pub fn dual_norm(&self, d: &[f64]) -> f64 {
        self.dual_quad(d).sqrt()
    }

    /// `A^+` as a dense matrix.
    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l != 0.0 {
                let v = self.eigenvectors.column(k);
                m += (v * v.transpose()) / l;
            }
        }
        m
    }

    /// Orthonormal basis of the null space, as columns.
    pub fn null_basis(&self) -> Vec<Vec<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 0.0)
            .map(|(k, _)| self.eigenvectors.column(k).iter().copied().collect())
            .collect()
    }

    /// Pairs `(lambda, v)` for the nonzero eigenvalues.
    pub fn range_pairs(&self) -> Vec<(f64, Vec<f64>)> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0.0)
            .map(|(k, &l)| (l, self.eigenvectors.column(k).iter().copied().collect()))
            .collect()
    }

    /// True when the null space is at most the constant direction, i.e. the
    /// dual norm is finite for every zero-sum vector.
    pub fn null_space_is_constants(&self) -> bool {
        let n = self.n as f64;
        self.null_basis().iter().all(|v| {
            let s: f64 = v.iter().sum();
            (s * s / n - 1.0).abs() < 1e-8
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// Weighted graph Laplacian with edge coefficient `w_ij (mu_i + mu_j)`:
/// `h^T L h = sum_i mu_i sum_{j ~ i} w_ij (h_j - h_i)^2`.
pub(crate) fn weighted_laplacian(
    n: usize,
    edges: &[(usize, usize, f64)],
    mu: &[f64],
) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for &(i, j, w) in edges {
        let c = w * (mu[i] + mu[j]);
        l[(i, i)] += c;
        l[(j, j)] += c;
        l[(i, j)] -= c;
        l[(j, i)] -= c;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_form_and_dual() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.25, 0.25]));
        let q = QuadraticForm::from_psd(&a, 1e-10).unwrap();
        let h = [1.0, 2.0, -2.0];
        assert!((q.quad(&h) - (0.5 + 1.0 + 1.0)).abs() < 1e-12);
        let d = [0.1, -0.2, 0.1];
        assert!((q.dual_quad(&d) - (0.02 + 0.16 + 0.04)).abs() < 1e-12);
    }

    #[test]
    fn laplacian_null_space() {
        let mu = [1.0 / 3.0; 3];
        let l = weighted_laplacian(3, &[(0, 1, 1.0), (1, 2, 1.0)], &mu);
        let q = QuadraticForm::from_psd(&l, 1e-10).unwrap();
        assert!(q.null_space_is_constants());
        assert!(q.dual_quad(&[1.0, 1.0, 1.0]).is_infinite());
        assert!(q.dual_quad(&[1.0, 0.0, -1.0]).is_finite());
    }

    #[test]
    fn singular_gram_rejected() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            QuadraticForm::inverse_of_gram(&k, 1e-10),
            Err(Error::SingularGram { .. })
        ));
    }
}
