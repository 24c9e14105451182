use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::check_symmetric;
use crate::tolerances::Tolerances;

use super::simplex_proj::project_simplex;

/// Result of [`maximize_concave_quadratic_over_simplex`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSolution {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Frank-Wolfe gap at `argmax`; the optimum lies in `[value, value + gap]`.
    pub gap: f64,
    pub iterations: usize,
}

/// Maximises `q^T Q q + c^T q` over the probability simplex.
///
/// Accelerated projected gradient with adaptive restart; stops once the
/// Frank-Wolfe gap, an upper bound on suboptimality, drops below
/// `tol.quadratic_gap`.
pub fn maximize_concave_quadratic_over_simplex(
    qmat: &DMatrix<f64>,
    c: &[f64],
    tol: &Tolerances,
) -> Result<QuadraticSolution> {
    let n = c.len();
    if qmat.nrows() != n {
        return Err(Error::dims("quadratic matrix", n, qmat.nrows()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty simplex".into()));
    }
    check_symmetric(qmat)?;
    let eig = SymmetricEigen::new(qmat.clone());
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let top = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if top > tol.eigen_cutoff * scale {
        return Err(Error::NotConcave(top));
    }
    let curvature = -eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let start = vec![1.0 / n as f64; n];
    Ok(ascend(
        qmat,
        c,
        2.0 * curvature,
        &start,
        tol.quadratic_gap,
        tol.quadratic_max_iter,
    ))
}

fn objective(qmat: &DMatrix<f64>, c: &[f64], q: &DVector<f64>) -> f64 {
    q.dot(&(qmat * q)) + c.iter().zip(q.iter()).map(|(a, b)| a * b).sum::<f64>()
}

fn gradient(qmat: &DMatrix<f64>, c: &[f64], q: &DVector<f64>) -> DVector<f64> {
    let mut g = qmat * q * 2.0;
    for (gi, ci) in g.iter_mut().zip(c) {
        *gi += ci;
    }
    g
}

fn fw_gap(g: &DVector<f64>, q: &DVector<f64>) -> f64 {
    (g.max() - g.dot(q)).max(0.0)
}

/// Core ascent loop given a Lipschitz bound `lip` of the gradient.
pub(crate) fn ascend(
    qmat: &DMatrix<f64>,
    c: &[f64],
    lip: f64,
    start: &[f64],
    gap_tol: f64,
    max_iter: usize,
) -> QuadraticSolution {
    let lip = lip.max(1e-9);
    let step = 1.0 / lip;
    let mut x = DVector::from_column_slice(&project_simplex(start));
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = objective(qmat, c, &x);
    let mut iterations = 0;
    // iterates are monotone: a step that would decrease the objective restarts momentum
    let mut gap = fw_gap(&gradient(qmat, c, &x), &x);
    while gap > gap_tol && iterations < max_iter {
        iterations += 1;
        let gy = gradient(qmat, c, &y);
        let trial: Vec<f64> = (0..y.len()).map(|i| y[i] + step * gy[i]).collect();
        let x_new = DVector::from_column_slice(&project_simplex(&trial));
        let f_new = objective(qmat, c, &x_new);
        if f_new < fx {
            if t == 1.0 {
                // a plain gradient step no longer ascends: round-off floor
                break;
            }
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_new + (&x_new - &x) * ((t - 1.0) / t_new);
        t = t_new;
        x = x_new;
        fx = f_new;
        gap = fw_gap(&gradient(qmat, c, &x), &x);
    }
    QuadraticSolution {
        value: fx,
        gap,
        argmax: x.iter().copied().collect(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_max(qmat: &DMatrix<f64>, c: &[f64]) -> f64 {
        let n = c.len();
        let steps = 1000;
        let mut best = f64::NEG_INFINITY;
        let mut eval = |q: &[f64]| {
            let v = DVector::from_column_slice(q);
            best = best.max(objective(qmat, c, &v));
        };
        match n {
            2 => (0..=steps).for_each(|i| {
                let a = i as f64 / steps as f64;
                eval(&[a, 1.0 - a]);
            }),
            3 => (0..=steps).for_each(|i| {
                (0..=steps - i).for_each(|j| {
                    let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    eval(&[a, b, 1.0 - a - b]);
                })
            }),
            _ => unreachable!(),
        }
        best
    }

    #[test]
    fn linear_objective_hits_vertex() {
        let q = DMatrix::zeros(3, 3);
        let s =
            maximize_concave_quadratic_over_simplex(&q, &[0.0, 1.0, 2.0], &Tolerances::default())
                .unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
        assert!((s.argmax[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_identity_is_uniform() {
        let q = -DMatrix::<f64>::identity(3, 3);
        let s =
            maximize_concave_quadratic_over_simplex(&q, &[0.0; 3], &Tolerances::default()).unwrap();
        assert!((s.value + 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn matches_grid_enumeration() {
        let q = -DMatrix::<f64>::identity(2, 2);
        let c = [2.0, 0.0];
        let s = maximize_concave_quadratic_over_simplex(&q, &c, &Tolerances::default()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
        assert!((s.value - grid_max(&q, &c)).abs() < 1e-3);

        let q = DMatrix::from_row_slice(3, 3, &[-2.0, 0.5, 0.0, 0.5, -1.0, 0.2, 0.0, 0.2, -0.5]);
        let c = [0.3, -0.1, 0.4];
        let s = maximize_concave_quadratic_over_simplex(&q, &c, &Tolerances::default()).unwrap();
        let g = grid_max(&q, &c);
        assert!(s.value >= g - 1e-9 && s.value - g < 1e-3);
    }

    #[test]
    fn convex_rejected() {
        let q = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            maximize_concave_quadratic_over_simplex(&q, &[0.0, 0.0], &Tolerances::default()),
            Err(Error::NotConcave(_))
        ));
    }
}
