//! Integral probability metrics `d_F(Q, P) = sup_{f in F} E_Q[f] - E_P[f]`.

use crate::domain::{
    check_same_space, dot, ClassKind, DiscreteDistribution, FunctionClass, SampleSpace,
};
use crate::error::{Error, Result};
use crate::solvers::{solve_lp_with, LpProblem, LpSolution, LpStatus};
use crate::tolerances::Tolerances;

/// Coupling LPs are used up to this many points; larger spaces use the
/// min-cost-flow form on the essential metric edges.
pub const COUPLING_LIMIT: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum IpmWitness {
    /// Index of the maximising member of an explicit class.
    Member(usize),
    /// A maximising function of the ball.
    Function(Vec<f64>),
    /// Optimal transport plan as `(from, to, mass)` triples with positive mass.
    Plan(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpmValue {
    /// May be negative for a non-even explicit class; `+inf` when the
    /// difference leaves the domain of a degenerate quadratic ball.
    pub value: f64,
    pub witness: Option<IpmWitness>,
}

fn optimal(sol: LpSolution, what: &str) -> Result<LpSolution> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        s => Err(Error::NumericalBreakdown(format!("{what} reported {s:?}"))),
    }
}

/// `d_F(Q, P)`, one-sided exactly as defined; symmetric only for even `F`.
pub fn ipm_distance(
    class: &FunctionClass,
    q: &DiscreteDistribution,
    p: &DiscreteDistribution,
    tol: &Tolerances,
) -> Result<IpmValue> {
    check_same_space(class.space(), q.space())?;
    check_same_space(class.space(), p.space())?;
    let d: Vec<f64> = q
        .weights()
        .iter()
        .zip(p.weights())
        .map(|(a, b)| a - b)
        .collect();
    let space = class.space();
    match class.kind() {
        ClassKind::Explicit(members) => {
            let (k, v) = members
                .iter()
                .map(|f| dot(f.values(), &d))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, v)| {
                    if v > bv {
                        (k, v)
                    } else {
                        (bk, bv)
                    }
                });
            Ok(IpmValue {
                value: v,
                witness: Some(IpmWitness::Member(k)),
            })
        }
        ClassKind::SupNorm => Ok(IpmValue {
            value: d.iter().map(|v| v.abs()).sum(),
            witness: Some(IpmWitness::Function(
                d.iter()
                    .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
                    .collect(),
            )),
        }),
        ClassKind::Lipschitz => {
            if space.len() <= COUPLING_LIMIT {
                transport_coupling(space, q.weights(), p.weights(), tol)
            } else {
                let (value, h) = kantorovich_dual(space, &d, tol)?;
                Ok(IpmValue {
                    value,
                    witness: Some(IpmWitness::Function(h)),
                })
            }
        }
        ClassKind::Rkhs { form, .. }
        | ClassKind::Fisher { form, .. }
        | ClassKind::Sobolev { form, .. } => {
            let value = form.dual_norm(&d);
            let witness = (value.is_finite() && value > 0.0).then(|| {
                let m = form.pseudo_inverse();
                let md = m * nalgebra::DVector::from_column_slice(&d);
                IpmWitness::Function(md.iter().map(|v| v / value).collect())
            });
            Ok(IpmValue { value, witness })
        }
        ClassKind::Dudley => {
            let (value, h) = dudley_dual(space, &d, tol)?;
            Ok(IpmValue {
                value,
                witness: Some(IpmWitness::Function(h)),
            })
        }
        ClassKind::Zeta(_) => Err(Error::UnsupportedVariant {
            op: "ipm_distance",
            variant: "zeta",
        }),
    }
}

/// 1-Wasserstein distance by the dense coupling LP `min <C, pi>`,
/// `pi 1 = q`, `pi^T 1 = p`.
fn transport_coupling(
    space: &SampleSpace,
    q: &[f64],
    p: &[f64],
    tol: &Tolerances,
) -> Result<IpmValue> {
    let n = q.len();
    let metric = space.metric().ok_or(Error::MissingMetric("lipschitz"))?;
    let mut lp = LpProblem::new(n * n);
    for k in 0..n * n {
        lp.objective[k] = -metric[k];
    }
    for i in 0..n {
        let row: Vec<(usize, f64)> = (0..n).map(|j| (i * n + j, 1.0)).collect();
        lp.add_eq(&row, q[i]);
    }
    for j in 0..n {
        let col: Vec<(usize, f64)> = (0..n).map(|i| (i * n + j, 1.0)).collect();
        lp.add_eq(&col, p[j]);
    }
    let sol = optimal(solve_lp_with(&lp, tol)?, "transport LP")?;
    let plan = sol
        .primal
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 1e-15)
        .map(|(k, &m)| (k / n, k % n, m))
        .collect();
    Ok(IpmValue {
        value: (-sol.objective).max(0.0),
        witness: Some(IpmWitness::Plan(plan)),
    })
}

/// `max <h, d>` over `Lip_c(h) <= 1` (pinned at `h_0 = 0`), by the flow LP on
/// essential edges. The potentials are the node multipliers.
pub fn kantorovich_dual(
    space: &SampleSpace,
    d: &[f64],
    tol: &Tolerances,
) -> Result<(f64, Vec<f64>)> {
    let edges = space
        .essential_edges()
        .ok_or(Error::MissingMetric("lipschitz"))?;
    let n = d.len();
    // flows f+_e, f-_e >= 0; node balance: outflow - inflow = d_i
    let ne = edges.len();
    let mut lp = LpProblem::new(2 * ne);
    for (k, e) in edges.iter().enumerate() {
        lp.objective[2 * k] = -e.cost;
        lp.objective[2 * k + 1] = -e.cost;
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        rows[e.i].push((2 * k, 1.0));
        rows[e.j].push((2 * k, -1.0));
        rows[e.i].push((2 * k + 1, -1.0));
        rows[e.j].push((2 * k + 1, 1.0));
    }
    for (i, row) in rows.iter().enumerate() {
        lp.add_eq(row, d[i]);
    }
    let sol = optimal(solve_lp_with(&lp, tol)?, "flow LP")?;
    // maximising -cost: node multipliers y satisfy |y_i - y_j| <= c_ij
    let y0 = sol.duals_eq[0];
    let h: Vec<f64> = sol.duals_eq.iter().map(|y| y0 - y).collect();
    let value = (-sol.objective).max(0.0);
    Ok((value, h))
}

/// `max <h, d>` over `|h|_inf + Lip_c(h) <= 1`.
fn dudley_dual(space: &SampleSpace, d: &[f64], tol: &Tolerances) -> Result<(f64, Vec<f64>)> {
    let edges = space
        .essential_edges()
        .ok_or(Error::MissingMetric("dudley"))?;
    let n = d.len();
    let (s, l) = (n, n + 1);
    let mut lp = LpProblem::new(n + 2);
    for i in 0..n {
        lp.set_free(i);
        lp.objective[i] = d[i];
    }
    for i in 0..n {
        lp.add_ub(&[(i, 1.0), (s, -1.0)], 0.0);
        lp.add_ub(&[(i, -1.0), (s, -1.0)], 0.0);
    }
    for e in edges {
        lp.add_ub(&[(e.i, 1.0), (e.j, -1.0), (l, -e.cost)], 0.0);
        lp.add_ub(&[(e.j, 1.0), (e.i, -1.0), (l, -e.cost)], 0.0);
    }
    lp.add_ub(&[(s, 1.0), (l, 1.0)], 1.0);
    let sol = optimal(solve_lp_with(&lp, tol)?, "Dudley LP")?;
    Ok((sol.objective, sol.primal[..n].to_vec()))
}
