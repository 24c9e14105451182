//! Worst-case expectations over IPM balls and the reports built on them.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::{
    check_same_space, dot, ClassKind, DiscreteDistribution, FunctionClass, FunctionVec,
};
use crate::error::{Error, Result};
use crate::linalg::QuadraticForm;
use crate::penalties::{centered_theta, j_penalty, lambda_penalty, theta};
use crate::solvers::{quadratic_ascent, solve_lp_with, LpProblem, LpStatus};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DroMethod {
    ExactLp,
    DualBisection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroResult {
    /// `E_{worst_q}[h]`, attained by a feasible distribution.
    pub value: f64,
    pub worst_q: DiscreteDistribution,
    pub method: DroMethod,
    /// Width of the certified bracket around the true supremum; zero for LPs.
    pub gap_estimate: f64,
}

impl DroResult {
    pub fn is_exact(&self) -> bool {
        self.method == DroMethod::ExactLp
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::EpsNegative(eps))
    }
}

fn method_for(class: &FunctionClass) -> DroMethod {
    if class.quadratic_form().is_some() {
        DroMethod::DualBisection
    } else {
        DroMethod::ExactLp
    }
}

/// `sup { E_Q[h] : d_F(Q, P) <= eps }`.
pub fn worst_case_expectation(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<DroResult> {
    check_eps(eps)?;
    check_same_space(class.space(), p.space())?;
    check_same_space(class.space(), h.space())?;
    if let ClassKind::Zeta(_) = class.kind() {
        return Err(Error::UnsupportedVariant {
            op: "worst_case_expectation",
            variant: "zeta",
        });
    }
    if eps == 0.0 || h.max() == h.min() {
        return Ok(DroResult {
            value: p.expect(h)?,
            worst_q: p.clone(),
            method: method_for(class),
            gap_estimate: 0.0,
        });
    }
    match class.kind() {
        ClassKind::Rkhs { form, .. }
        | ClassKind::Fisher { form, .. }
        | ClassKind::Sobolev { form, .. } => quadratic_ball(p, form, eps, h.values(), tol),
        _ => polyhedral_ball(p, class, eps, h.values(), tol),
    }
}

/// One LP over `q` plus auxiliary variables; `q` occupies the first `n` slots.
fn polyhedral_ball(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h: &[f64],
    tol: &Tolerances,
) -> Result<DroResult> {
    let n = h.len();
    let pw = p.weights();
    let all: Vec<(usize, f64)> = (0..n).map(|i| (i, 1.0)).collect();
    let lp = match class.kind() {
        ClassKind::Explicit(members) => {
            let mut lp = LpProblem::new(n);
            lp.objective.copy_from_slice(h);
            lp.add_eq(&all, 1.0);
            for f in members {
                let row: Vec<(usize, f64)> = f.values().iter().copied().enumerate().collect();
                lp.add_ub(&row, eps + dot(f.values(), pw));
            }
            lp
        }
        ClassKind::SupNorm => {
            // q - p = u - v, sum(u + v) <= eps
            let mut lp = LpProblem::new(3 * n);
            lp.objective[..n].copy_from_slice(h);
            for i in 0..n {
                lp.add_eq(&[(i, 1.0), (n + i, -1.0), (2 * n + i, 1.0)], pw[i]);
            }
            lp.add_eq(&all, 1.0);
            let budget: Vec<(usize, f64)> = (n..3 * n).map(|j| (j, 1.0)).collect();
            lp.add_ub(&budget, eps);
            lp
        }
        ClassKind::Lipschitz | ClassKind::Dudley => {
            let dudley = matches!(class.kind(), ClassKind::Dudley);
            let edges = class
                .space()
                .essential_edges()
                .ok_or(Error::MissingMetric(class.variant_name()))?;
            let ne = edges.len();
            // q, flows (2 per edge), and for Dudley the mass moves a+, a-
            let na = if dudley { 2 * n } else { 0 };
            let mut lp = LpProblem::new(n + 2 * ne + na);
            lp.objective[..n].copy_from_slice(h);
            let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(|i| vec![(i, 1.0)]).collect();
            for (k, e) in edges.iter().enumerate() {
                let (fwd, bwd) = (n + 2 * k, n + 2 * k + 1);
                // q_i - p_i = inflow - outflow (+ a+_i - a-_i)
                rows[e.i].push((fwd, 1.0));
                rows[e.j].push((fwd, -1.0));
                rows[e.i].push((bwd, -1.0));
                rows[e.j].push((bwd, 1.0));
            }
            if dudley {
                let base = n + 2 * ne;
                for (i, row) in rows.iter_mut().enumerate() {
                    row.push((base + i, -1.0));
                    row.push((base + n + i, 1.0));
                }
            }
            for (i, row) in rows.iter().enumerate() {
                lp.add_eq(row, pw[i]);
            }
            let cost: Vec<(usize, f64)> = edges
                .iter()
                .enumerate()
                .flat_map(|(k, e)| [(n + 2 * k, e.cost), (n + 2 * k + 1, e.cost)])
                .collect();
            lp.add_ub(&cost, eps);
            if dudley {
                let base = n + 2 * ne;
                let moves: Vec<(usize, f64)> = (base..base + 2 * n).map(|j| (j, 1.0)).collect();
                lp.add_ub(&moves, eps);
                lp.add_eq(&all, 1.0);
            }
            lp
        }
        _ => unreachable!("quadratic and zeta classes are routed elsewhere"),
    };
    let sol = solve_lp_with(&lp, tol)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::NumericalBreakdown(format!(
            "worst-case LP reported {:?} although the reference is feasible",
            sol.status
        )));
    }
    let worst_q = DiscreteDistribution::from_solver(p.space().clone(), sol.primal[..n].to_vec());
    Ok(DroResult {
        value: sol.objective,
        worst_q,
        method: DroMethod::ExactLp,
        gap_estimate: 0.0,
    })
}

/// Lagrangian bisection for `max <h, q>` over the simplex intersected with
/// `(q - p)^T M (q - p) <= eps^2`, `M = A^+`.
///
/// `g(lambda) = max_q <h, q> - lambda ((q - p)^T M (q - p) - eps^2)` is convex;
/// each evaluation is a concave quadratic over the simplex whose Frank-Wolfe
/// gap bounds it from above, and each inner maximiser shrunk towards `p`
/// into the ball gives a feasible lower bound.
fn quadratic_ball(
    p: &DiscreteDistribution,
    form: &QuadraticForm,
    eps: f64,
    h: &[f64],
    tol: &Tolerances,
) -> Result<DroResult> {
    if !form.null_space_is_constants() {
        return Err(Error::UnsupportedVariant {
            op: "worst_case_expectation",
            variant: "quadratic ball with zero-mass points",
        });
    }
    let n = h.len();
    let pw = p.weights();
    let dist = |q: &[f64]| {
        let d: Vec<f64> = q.iter().zip(pw).map(|(a, b)| a - b).collect();
        form.dual_norm(&d)
    };
    let shrink = |q: &[f64]| -> Vec<f64> {
        let r = dist(q);
        if r <= eps {
            q.to_vec()
        } else {
            let s = eps / r * (1.0 - 1e-12);
            q.iter().zip(pw).map(|(a, b)| b + s * (a - b)).collect()
        }
    };

    let (top, hmax) = h
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| {
            if x > bv {
                (i, x)
            } else {
                (bi, bv)
            }
        });
    let mut vertex = vec![0.0; n];
    vertex[top] = 1.0;
    if dist(&vertex) <= eps {
        return Ok(DroResult {
            value: hmax,
            worst_q: DiscreteDistribution::from_solver(p.space().clone(), vertex),
            method: DroMethod::DualBisection,
            gap_estimate: 0.0,
        });
    }

    let m = form.pseudo_inverse();
    let m_norm = form
        .range_pairs()
        .iter()
        .map(|(l, _)| 1.0 / l)
        .fold(0.0f64, f64::max);
    let mp = &m * DVector::from_column_slice(pw);
    let p_m_p = DVector::from_column_slice(pw).dot(&mp);

    let mut best_lower = (dot(pw, h), pw.to_vec());
    let mut best_upper = hmax;
    let mut warm = pw.to_vec();

    let eval = |lambda: f64,
                best_lower: &mut (f64, Vec<f64>),
                best_upper: &mut f64,
                warm: &mut Vec<f64>|
     -> (f64, Vec<f64>) {
        let qmat: DMatrix<f64> = &m * (-lambda);
        let c: Vec<f64> = (0..n).map(|i| h[i] + 2.0 * lambda * mp[i]).collect();
        let sol = quadratic_ascent(
            &qmat,
            &c,
            2.0 * lambda * m_norm,
            warm,
            tol.quadratic_gap,
            tol.quadratic_max_iter,
        );
        let g = sol.value - lambda * p_m_p + lambda * eps * eps;
        *best_upper = best_upper.min(g + sol.gap);
        let feasible = shrink(&sol.argmax);
        let lower = dot(h, &feasible);
        if lower > best_lower.0 {
            *best_lower = (lower, feasible);
        }
        *warm = sol.argmax.clone();
        (g, sol.argmax)
    };

    // bracket: grow lambda until the inner maximiser is inside the ball
    let mut hi = (h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - h.iter().copied().fold(f64::INFINITY, f64::min))
        / (eps * eps);
    for _ in 0..200 {
        let (_, q) = eval(hi, &mut best_lower, &mut best_upper, &mut warm);
        if dist(&q) <= eps {
            break;
        }
        hi *= 2.0;
    }
    let (mut a, mut b) = (0.0, hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1, &mut best_lower, &mut best_upper, &mut warm).0;
    let mut f2 = eval(x2, &mut best_lower, &mut best_upper, &mut warm).0;
    for _ in 0..tol.golden_iterations {
        if best_upper - best_lower.0 <= tol.quadratic_gap * (1.0 + best_upper.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1, &mut best_lower, &mut best_upper, &mut warm).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2, &mut best_lower, &mut best_upper, &mut warm).0;
        }
    }
    let (value, q) = best_lower;
    Ok(DroResult {
        value,
        worst_q: DiscreteDistribution::from_solver(p.space().clone(), q),
        method: DroMethod::DualBisection,
        gap_estimate: (best_upper - value).max(0.0),
    })
}

/// Both sides of `sup_ball E_Q[h] = E_P[h] + Lambda(h)`, computed independently.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub lhs: f64,
    pub e_p_h: f64,
    pub lambda_value: f64,
    pub residual: f64,
    /// Both sides came from exact LPs.
    pub exact: bool,
    /// Sum of the certified gaps of the iterative solves involved.
    pub gap_estimate: f64,
}

pub fn verify_identity(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<IdentityReport> {
    let lam = lambda_penalty(p, class, eps, h, tol)?;
    let dro = worst_case_expectation(p, class, eps, h, tol)?;
    let e_p_h = p.expect(h)?;
    Ok(IdentityReport {
        lhs: dro.value,
        e_p_h,
        lambda_value: lam.value,
        residual: (dro.value - (e_p_h + lam.value)).abs(),
        exact: dro.is_exact() && lam.exact,
        gap_estimate: dro.gap_estimate + lam.gap,
    })
}

/// Worst case against the centered-gauge bound `E_P[h] + eps inf_b Theta(h - b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub shift: f64,
    pub centered_theta: f64,
    /// `rhs - lhs`; non-negative up to solver tolerance.
    pub slack: f64,
    /// The bound holds with equality within the check tolerance.
    pub equality: bool,
}

pub fn centered_bound(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<BoundReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::EpsNonPositive(eps));
    }
    let dro = worst_case_expectation(p, class, eps, h, tol)?;
    let (shift, ct) = centered_theta(class, h, tol)?;
    let rhs = p.expect(h)? + eps * ct.value;
    let slack = rhs - dro.value;
    Ok(BoundReport {
        lhs: dro.value,
        rhs,
        shift,
        centered_theta: ct.value,
        slack,
        equality: slack.abs() <= tol.check_for(dro.is_exact()) + dro.gap_estimate,
    })
}

/// Random-pair check of `Lambda <= min(J_P, eps Theta)` and subadditivity.
#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport {
    pub pairs: usize,
    /// Largest `Lambda(h) - min(J_P(h), eps Theta(h))`.
    pub max_bound_violation: f64,
    /// Largest `Lambda(h + h') - Lambda(h) - Lambda(h')`.
    pub max_subadditivity_violation: f64,
    /// Pairs whose violation exceeds the allowed slack.
    pub violations: usize,
    /// Slack used for counting violations (larger for iterative classes).
    pub threshold: f64,
}

/// Draws `samples` Gaussian pairs `(h, h')` with the given seed, plus the
/// deterministic stress pairs `(h, -h)` and `(10 h, h)` built from the first draw.
pub fn tightness_report(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<TightnessReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "tightness needs at least one sample".into(),
        ));
    }
    let space = class.space().clone();
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..samples).map(|_| (draw(), draw())).collect();
    let first = pairs[0].0.clone();
    pairs.push((first.clone(), first.iter().map(|v| -v).collect()));
    pairs.push((first.iter().map(|v| 10.0 * v).collect(), first));

    let exact = class.quadratic_form().is_none();
    let base = if exact { 1e-8 } else { 0.0 };
    let mut report = TightnessReport {
        pairs: pairs.len(),
        max_bound_violation: f64::NEG_INFINITY,
        max_subadditivity_violation: f64::NEG_INFINITY,
        violations: 0,
        threshold: base,
    };
    for (a, b) in pairs {
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let fa = FunctionVec::new(space.clone(), a)?;
        let fb = FunctionVec::new(space.clone(), b)?;
        let fs = FunctionVec::new(space.clone(), sum)?;
        let la = lambda_penalty(p, class, eps, &fa, tol)?;
        let lb = lambda_penalty(p, class, eps, &fb, tol)?;
        let ls = lambda_penalty(p, class, eps, &fs, tol)?;
        let cap = j_penalty(p, &fa)?
            .value
            .min(eps * theta(class, &fa, tol)?.value);
        let bound = la.value - cap;
        let sub = ls.value - la.value - lb.value;
        // iterative values are upper bounds; subadditivity can only be
        // certified up to the lower-bound gaps of the right-hand side
        let slack = base + la.gap + lb.gap;
        if bound > base || sub > slack {
            report.violations += 1;
        }
        report.threshold = report.threshold.max(slack);
        report.max_bound_violation = report.max_bound_violation.max(bound);
        report.max_subadditivity_violation = report.max_subadditivity_violation.max(sub);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::domain::{discretize_structured_class, SampleSpace};
    use crate::ipm::ipm_distance;

    fn fv(s: &Arc<SampleSpace>, v: &[f64]) -> FunctionVec {
        FunctionVec::new(s.clone(), v.to_vec()).unwrap()
    }

    /// Greedy L1 transport: repeatedly move mass from the lowest value to the
    /// highest, each unit moved costing two units of budget.
    fn greedy_l1(p: &[f64], h: &[f64], eps: f64) -> f64 {
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| h[a].total_cmp(&h[b]));
        let top = *order.last().unwrap();
        let mut q = p.to_vec();
        let mut budget = eps / 2.0;
        for &i in &order {
            if i == top || budget <= 0.0 {
                continue;
            }
            let moved = q[i].min(budget);
            q[i] -= moved;
            q[top] += moved;
            budget -= moved;
        }
        dot(&q, h)
    }

    #[test]
    fn sup_norm_worked_example() {
        let s = Arc::new(SampleSpace::unstructured(3).unwrap());
        let u = DiscreteDistribution::uniform(s.clone());
        let h = fv(&s, &[0.0, 1.0, 2.0]);
        let sup = FunctionClass::sup_norm(s.clone());
        let tol = Tolerances::default();
        for eps in [0.3, 1.0, 0.05, 2.5] {
            let r = worst_case_expectation(&u, &sup, eps, &h, &tol).unwrap();
            let oracle = greedy_l1(u.weights(), h.values(), eps);
            let curve = (1.0 + eps).min(4.0 / 3.0 + eps / 2.0).min(2.0);
            assert!((r.value - oracle).abs() < 1e-12 && (oracle - curve).abs() < 1e-12);
        }
        assert!(matches!(
            worst_case_expectation(&u, &sup, -0.1, &h, &tol),
            Err(Error::EpsNegative(_))
        ));
    }

    #[test]
    fn zero_radius_collapses() {
        let s = Arc::new(SampleSpace::unstructured(3).unwrap());
        let p = DiscreteDistribution::new(s.clone(), vec![0.2, 0.3, 0.5]).unwrap();
        let h = fv(&s, &[1.0, -1.0, 4.0]);
        let sup = FunctionClass::sup_norm(s.clone());
        let r = worst_case_expectation(&p, &sup, 0.0, &h, &Tolerances::default()).unwrap();
        assert_eq!(r.worst_q, p);
        assert!((r.value - p.expect(&h).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn constants_only_ball_is_everything() {
        let s = Arc::new(SampleSpace::unstructured(4).unwrap());
        let p = DiscreteDistribution::new(s.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let f = FunctionClass::explicit_from_values(s.clone(), vec![vec![1.0; 4], vec![-1.0; 4]])
            .unwrap();
        let h = fv(&s, &[0.5, 3.0, -1.0, 2.0]);
        let tol = Tolerances::default();
        let rep = verify_identity(&p, &f, 0.2, &h, &tol).unwrap();
        assert!((rep.lhs - 3.0).abs() < 1e-12);
        assert!((rep.lambda_value - j_penalty(&p, &h).unwrap().value).abs() < 1e-12);
        assert!(rep.residual < 1e-9 && rep.exact);
    }

    #[test]
    fn centered_bound_equality_and_slack() {
        let s = Arc::new(SampleSpace::unstructured(3).unwrap());
        let u = DiscreteDistribution::uniform(s.clone());
        let h = fv(&s, &[0.0, 1.0, 2.0]);
        let sup = FunctionClass::sup_norm(s.clone());
        let tol = Tolerances::default();
        let r = centered_bound(&u, &sup, 0.3, &h, &tol).unwrap();
        assert!((r.lhs - 1.3).abs() < 1e-12 && (r.rhs - 1.3).abs() < 1e-12 && r.equality);
        let r = centered_bound(&u, &sup, 1.0, &h, &tol).unwrap();
        assert!((r.slack - 1.0 / 6.0).abs() < 1e-12 && !r.equality);
    }

    #[test]
    fn lipschitz_and_dudley_balls_are_feasible() {
        let s = Arc::new(SampleSpace::path(5).unwrap());
        let p = DiscreteDistribution::new(s.clone(), vec![0.3, 0.1, 0.2, 0.25, 0.15]).unwrap();
        let h = fv(&s, &[1.0, -2.0, 0.5, 3.0, 0.0]);
        let tol = Tolerances::default();
        for f in [
            FunctionClass::lipschitz(s.clone()).unwrap(),
            FunctionClass::dudley(s.clone()).unwrap(),
        ] {
            let r = worst_case_expectation(&p, &f, 0.4, &h, &tol).unwrap();
            let d = ipm_distance(&f, &r.worst_q, &p, &tol).unwrap().value;
            assert!(d <= 0.4 + 1e-7, "{} {d}", f.variant_name());
            let id = verify_identity(&p, &f, 0.4, &h, &tol).unwrap();
            assert!(id.residual <= 1e-6, "{id:?}");
        }
    }

    #[test]
    fn quadratic_balls_sandwich() {
        let s = Arc::new(SampleSpace::path(4).unwrap());
        let p = DiscreteDistribution::new(s.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let h = fv(&s, &[0.0, 1.0, -0.5, 2.0]);
        let tol = Tolerances::default();
        for f in [
            FunctionClass::fisher(p.clone(), false).unwrap(),
            FunctionClass::sobolev(p.clone(), false).unwrap(),
            FunctionClass::gaussian_rkhs(s.clone(), 1.0).unwrap(),
        ] {
            let r = worst_case_expectation(&p, &f, 0.15, &h, &tol).unwrap();
            assert_eq!(r.method, DroMethod::DualBisection);
            let d = ipm_distance(&f, &r.worst_q, &p, &tol).unwrap().value;
            assert!(d <= 0.15 + 1e-7);
            let id = verify_identity(&p, &f, 0.15, &h, &tol).unwrap();
            assert!(
                id.residual <= 5e-4 && id.gap_estimate <= 5e-4,
                "{} {id:?}",
                f.variant_name()
            );
        }
    }

    #[test]
    fn tightness_on_explicit_class() {
        let s = Arc::new(SampleSpace::unstructured(5).unwrap());
        let p = DiscreteDistribution::uniform(s.clone());
        let sup = FunctionClass::sup_norm(s.clone());
        let f = discretize_structured_class(&sup, 12, 4).unwrap();
        let r = tightness_report(&p, &f, 0.4, 40, 17, &Tolerances::default()).unwrap();
        assert_eq!(r.violations, 0, "{r:?}");
        assert_eq!(r.pairs, 42);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn monotone_in_radius_and_class(
            raw in prop::collection::vec(0.05f64..1.0, 4),
            h in prop::collection::vec(-2.0f64..2.0, 4),
            seed in 0u64..100,
        ) {
            let s = Arc::new(SampleSpace::path(4).unwrap());
            let t: f64 = raw.iter().sum();
            let p = DiscreteDistribution::new(s.clone(), raw.iter().map(|v| v / t).collect()).unwrap();
            let h = fv(&s, &h);
            let tol = Tolerances::default();
            let dud = FunctionClass::dudley(s.clone()).unwrap();
            let sub = discretize_structured_class(&dud, 10, seed).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for k in 0..20 {
                let eps = 0.05 * (k + 1) as f64;
                let full = worst_case_expectation(&p, &dud, eps, &h, &tol).unwrap().value;
                let small = worst_case_expectation(&p, &sub, eps, &h, &tol).unwrap().value;
                prop_assert!(full >= prev - 1e-9);
                prop_assert!(small >= full - 1e-7);
                prev = full;
            }
        }
    }
}
