//! Gauge, concentration and infimal-convolution penalties.
//!
//! * [`theta`] is the gauge `Theta_F(h) = inf{lambda > 0 : h in lambda conv F}`;
//! * [`j_penalty`] is `J_P(h) = max h - E_P[h]`;
//! * [`lambda_penalty`] is the infimal convolution
//!   `Lambda(h) = inf_{h1 + h2 = h} J_P(h1) + eps Theta_F(h2)`.

use nalgebra::DMatrix;

use crate::domain::{
    check_same_space, dot, ClassKind, DiscreteDistribution, FunctionClass, FunctionVec, ZetaBall,
};
use crate::error::{Error, Result};
use crate::linalg::QuadraticForm;
use crate::solvers::{minimize_scalar_convex, project_simplex, solve_lp_with, LpProblem, LpStatus};
use crate::tolerances::Tolerances;

/// Data that reproduces a penalty value.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyWitness {
    /// Conic weights `w` with `sum_k w_k f_k = h` and `sum w = value`.
    Weights(Vec<f64>),
    /// Index of a maximiser of `h`.
    Point(usize),
    /// `h = h1 + h2` with `J_P(h1) + eps Theta(h2) = value`.
    Decomposition { h1: Vec<f64>, h2: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyValue {
    /// Non-negative, possibly `+inf`.
    pub value: f64,
    pub witness: Option<PenaltyWitness>,
    /// False when `value` came from an iterative solve.
    pub exact: bool,
    /// Upper minus lower bound of an iterative solve; zero when exact.
    pub gap: f64,
    /// Set when `value` is only an upper bound on the gauge (non-convex zeta).
    pub upper_bound_only: bool,
}

impl PenaltyValue {
    fn exact(value: f64, witness: Option<PenaltyWitness>) -> Self {
        PenaltyValue {
            value,
            witness,
            exact: true,
            gap: 0.0,
            upper_bound_only: false,
        }
    }
}

fn check_function(class: &FunctionClass, h: &FunctionVec) -> Result<()> {
    check_same_space(class.space(), h.space())
}

/// Gauge of an explicit class by the conic-combination LP.
pub fn gauge_explicit(
    class: &FunctionClass,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<PenaltyValue> {
    check_function(class, h)?;
    let members = class.members().ok_or(Error::UnsupportedVariant {
        op: "gauge_explicit",
        variant: class.variant_name(),
    })?;
    let (value, weights) = conic_gauge(members, h.values(), None, tol)?;
    Ok(PenaltyValue::exact(
        value,
        weights.map(PenaltyWitness::Weights),
    ))
}

/// `min sum w` s.t. `sum w_k f_k (+ b 1) = h`, `w >= 0`; returns the value and
/// the weights, or `+inf` when infeasible. With `shift` set, a free constant
/// `b` is added and reported through the out-parameter.
fn conic_gauge(
    members: &[FunctionVec],
    h: &[f64],
    shift: Option<&mut f64>,
    tol: &Tolerances,
) -> Result<(f64, Option<Vec<f64>>)> {
    let n = h.len();
    let m = members.len();
    let with_shift = shift.is_some();
    let nv = m + usize::from(with_shift);
    let mut lp = LpProblem::new(nv);
    for k in 0..m {
        lp.objective[k] = -1.0;
    }
    if with_shift {
        lp.set_free(m);
    }
    for i in 0..n {
        let mut row: Vec<(usize, f64)> = members
            .iter()
            .enumerate()
            .filter(|(_, f)| f.values()[i] != 0.0)
            .map(|(k, f)| (k, f.values()[i]))
            .collect();
        if with_shift {
            row.push((m, 1.0));
        }
        lp.add_eq(&row, h[i]);
    }
    let sol = solve_lp_with(&lp, tol)?;
    match sol.status {
        LpStatus::Infeasible => Ok((f64::INFINITY, None)),
        LpStatus::Unbounded => Err(Error::NumericalBreakdown(
            "gauge LP reported unbounded".into(),
        )),
        LpStatus::Optimal => {
            if let Some(b) = shift {
                *b = sol.primal[m];
            }
            let w: Vec<f64> = sol.primal[..m].iter().map(|v| v.max(0.0)).collect();
            Ok(((-sol.objective).max(0.0), Some(w)))
        }
    }
}

/// Closed-form gauge of a structured ball.
pub fn theta_closed_form(class: &FunctionClass, h: &FunctionVec) -> Result<PenaltyValue> {
    check_function(class, h)?;
    match class.kind() {
        ClassKind::Explicit(_) => Err(Error::UnsupportedVariant {
            op: "theta_closed_form",
            variant: "explicit",
        }),
        ClassKind::Zeta(z) => gauge_from_zeta(z, h),
        _ => Ok(PenaltyValue::exact(
            class.penalty(h.values()).expect("structured class"),
            None,
        )),
    }
}

/// `zeta(h)^(1/k)`; flagged as an upper bound when zeta is not convex.
pub fn gauge_from_zeta(ball: &ZetaBall, h: &FunctionVec) -> Result<PenaltyValue> {
    let z = ball.eval(h.values());
    if z.is_nan() || z < 0.0 {
        return Err(Error::NegativeZeta(z));
    }
    Ok(PenaltyValue {
        upper_bound_only: !ball.convex(),
        ..PenaltyValue::exact(z.powf(1.0 / ball.degree()), None)
    })
}

/// Gauge of any class: the LP for explicit sets, closed forms otherwise.
pub fn theta(class: &FunctionClass, h: &FunctionVec, tol: &Tolerances) -> Result<PenaltyValue> {
    if class.is_explicit() {
        gauge_explicit(class, h, tol)
    } else {
        theta_closed_form(class, h)
    }
}

/// `max_i h_i - E_P[h]`, attained at a point mass.
pub fn j_penalty(p: &DiscreteDistribution, h: &FunctionVec) -> Result<PenaltyValue> {
    let mean = p.expect(h)?;
    let (arg, max) = argmax(h.values());
    Ok(PenaltyValue::exact(
        (max - mean).max(0.0),
        Some(PenaltyWitness::Point(arg)),
    ))
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| {
            if x > bv {
                (i, x)
            } else {
                (bi, bv)
            }
        })
}

fn j_raw(p: &[f64], h: &[f64]) -> f64 {
    argmax(h).1 - dot(p, h)
}

/// `inf_b Theta_F(h - b)`; returns the minimising shift and the value.
pub fn centered_theta(
    class: &FunctionClass,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<(f64, PenaltyValue)> {
    check_function(class, h)?;
    let v = h.values();
    let (lo, hi) = (h.min(), h.max());
    let at =
        |b: f64| -> Result<(f64, PenaltyValue)> { Ok((b, theta(class, &h.shifted(-b), tol)?)) };
    match class.kind() {
        ClassKind::Lipschitz | ClassKind::Sobolev { .. } => at(0.0),
        ClassKind::SupNorm => at(0.5 * (lo + hi)),
        ClassKind::Rkhs { form, .. } | ClassKind::Fisher { form, .. } => {
            let ones = vec![1.0; v.len()];
            let denom = form.bilinear(&ones, &ones);
            let b = if denom > 0.0 {
                form.bilinear(&ones, v) / denom
            } else {
                0.0
            };
            at(b)
        }
        ClassKind::Explicit(members) => {
            let mut b = 0.0;
            let (value, w) = conic_gauge(members, v, Some(&mut b), tol)?;
            Ok((
                b,
                PenaltyValue::exact(value, w.map(PenaltyWitness::Weights)),
            ))
        }
        ClassKind::Dudley | ClassKind::Zeta(_) => {
            if hi - lo <= 0.0 {
                return at(lo);
            }
            let f = |b: f64| {
                let shifted: Vec<f64> = v.iter().map(|x| x - b).collect();
                class.penalty(&shifted).unwrap_or(f64::INFINITY)
            };
            let (b, _) = minimize_scalar_convex(f, lo, hi, 1e-12 * (1.0 + hi - lo));
            at(b)
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::EpsNonPositive(eps))
    }
}

/// `inf_{h1 + h2 = h} J_P(h1) + eps Theta_F(h2)`.
///
/// Exact LPs for explicit, sup-norm, Lipschitz and Dudley classes; a
/// primal-dual iteration with a certified sandwich gap for the quadratic
/// (RKHS, Fisher, Sobolev) balls.
pub fn lambda_penalty(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<PenaltyValue> {
    check_eps(eps)?;
    check_function(class, h)?;
    check_same_space(class.space(), p.space())?;
    let (pw, hv) = (p.weights(), h.values());
    if h.max() - h.min() == 0.0 {
        let n = hv.len();
        return Ok(PenaltyValue::exact(
            0.0,
            Some(PenaltyWitness::Decomposition {
                h1: hv.to_vec(),
                h2: vec![0.0; n],
            }),
        ));
    }
    match class.kind() {
        ClassKind::Explicit(members) => lambda_explicit(pw, members, eps, hv, tol),
        ClassKind::SupNorm | ClassKind::Lipschitz | ClassKind::Dudley => {
            lambda_polyhedral(class, pw, eps, hv, tol)
        }
        ClassKind::Rkhs { form, .. }
        | ClassKind::Fisher { form, .. }
        | ClassKind::Sobolev { form, .. } => lambda_quadratic(pw, form, eps, hv, tol),
        ClassKind::Zeta(_) => Err(Error::UnsupportedVariant {
            op: "lambda_penalty",
            variant: "zeta",
        }),
    }
}

fn decomposition(h: &[f64], g: Vec<f64>) -> Option<PenaltyWitness> {
    Some(PenaltyWitness::Decomposition {
        h1: h.iter().zip(&g).map(|(a, b)| a - b).collect(),
        h2: g,
    })
}

fn lambda_explicit(
    p: &[f64],
    members: &[FunctionVec],
    eps: f64,
    h: &[f64],
    tol: &Tolerances,
) -> Result<PenaltyValue> {
    // variables: t (free), w_k >= 0; h2 = sum w_k f_k
    let (n, m) = (h.len(), members.len());
    let mut lp = LpProblem::new(1 + m);
    lp.set_free(0);
    lp.objective[0] = -1.0;
    for (k, f) in members.iter().enumerate() {
        lp.objective[1 + k] = -(dot(p, f.values()) + eps);
    }
    for i in 0..n {
        let mut row = vec![(0, -1.0)];
        row.extend(
            members
                .iter()
                .enumerate()
                .filter(|(_, f)| f.values()[i] != 0.0)
                .map(|(k, f)| (1 + k, -f.values()[i])),
        );
        lp.add_ub(&row, -h[i]);
    }
    let sol = optimal(solve_lp_with(&lp, tol)?, "penalty LP")?;
    let mut g = vec![0.0; n];
    for (k, f) in members.iter().enumerate() {
        let w = sol.primal[1 + k].max(0.0);
        for (gi, fi) in g.iter_mut().zip(f.values()) {
            *gi += w * fi;
        }
    }
    let value = (-sol.objective - dot(p, h)).max(0.0);
    Ok(PenaltyValue::exact(value, decomposition(h, g)))
}

fn optimal(sol: crate::solvers::LpSolution, what: &str) -> Result<crate::solvers::LpSolution> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        s => Err(Error::NumericalBreakdown(format!("{what} reported {s:?}"))),
    }
}

fn lambda_polyhedral(
    class: &FunctionClass,
    p: &[f64],
    eps: f64,
    h: &[f64],
    tol: &Tolerances,
) -> Result<PenaltyValue> {
    // variables: g (free, = h2), t (free), s >= 0 (sup term), l >= 0 (Lipschitz term)
    let n = h.len();
    let (use_sup, use_lip) = match class.kind() {
        ClassKind::SupNorm => (true, false),
        ClassKind::Lipschitz => (false, true),
        _ => (true, true),
    };
    let (t, s, l) = (n, n + 1, n + 2);
    let mut lp = LpProblem::new(n + 3);
    for i in 0..=n {
        lp.set_free(i);
    }
    for i in 0..n {
        lp.objective[i] = -p[i];
    }
    lp.objective[t] = -1.0;
    lp.objective[s] = if use_sup { -eps } else { 0.0 };
    lp.objective[l] = if use_lip { -eps } else { 0.0 };
    if !use_sup {
        lp.bounds[s] = (0.0, 0.0);
    }
    if !use_lip {
        lp.bounds[l] = (0.0, 0.0);
    }
    for i in 0..n {
        lp.add_ub(&[(i, -1.0), (t, -1.0)], -h[i]);
    }
    if use_sup {
        for i in 0..n {
            lp.add_ub(&[(i, 1.0), (s, -1.0)], 0.0);
            lp.add_ub(&[(i, -1.0), (s, -1.0)], 0.0);
        }
    }
    if use_lip {
        let edges = class
            .space()
            .essential_edges()
            .ok_or(Error::MissingMetric("lipschitz"))?;
        for e in edges {
            lp.add_ub(&[(e.i, 1.0), (e.j, -1.0), (l, -e.cost)], 0.0);
            lp.add_ub(&[(e.j, 1.0), (e.i, -1.0), (l, -e.cost)], 0.0);
        }
    }
    let sol = optimal(solve_lp_with(&lp, tol)?, "penalty LP")?;
    let g = sol.primal[..n].to_vec();
    let value = (-sol.objective - dot(p, h)).max(0.0);
    Ok(PenaltyValue::exact(value, decomposition(h, g)))
}

/// Chambolle-Pock on `min_g max_{nu in simplex} <nu - p, h - g> + eps |g|_A`.
///
/// `g = B z + N w` with `B = V_r diag(lambda_r)^{-1/2}` spanning the range of
/// `A` and `N` its null space, so `|g|_A = |z|_2` and the prox is a block
/// soft-threshold. Upper bounds come from primal iterates, lower bounds from
/// dual iterates shrunk towards `p` into the dual ball.
fn lambda_quadratic(
    p: &[f64],
    form: &QuadraticForm,
    eps: f64,
    h: &[f64],
    tol: &Tolerances,
) -> Result<PenaltyValue> {
    if !form.null_space_is_constants() {
        return Err(Error::UnsupportedVariant {
            op: "lambda_penalty",
            variant: "quadratic ball with zero-mass points",
        });
    }
    let n = h.len();
    let range = form.range_pairs();
    let null = form.null_basis();
    let (r, k) = (range.len(), null.len());
    let mut kmat = DMatrix::zeros(n, r + k);
    let mut min_l = f64::INFINITY;
    for (c, (l, v)) in range.iter().enumerate() {
        min_l = min_l.min(*l);
        for i in 0..n {
            kmat[(i, c)] = v[i] / l.sqrt();
        }
    }
    for (c, v) in null.iter().enumerate() {
        for i in 0..n {
            kmat[(i, r + c)] = v[i];
        }
    }
    let knorm = if k > 0 { 1.0f64 } else { 0.0 }.max(if r > 0 { 1.0 / min_l.sqrt() } else { 0.0 });
    let step = 0.99 / knorm;
    let (tau, sigma) = (step, step);
    let pv = nalgebra::DVector::from_column_slice(p);
    let hv = nalgebra::DVector::from_column_slice(h);
    let ktp = kmat.tr_mul(&pv);

    let upper_at = |x: &nalgebra::DVector<f64>| -> (f64, Vec<f64>) {
        let g = &kmat * x;
        let h1: Vec<f64> = (0..n).map(|i| h[i] - g[i]).collect();
        let zn = x.rows(0, r).norm();
        (j_raw(p, &h1) + eps * zn, g.iter().copied().collect())
    };
    let lower_at = |nu: &[f64]| -> f64 {
        let d: Vec<f64> = nu.iter().zip(p).map(|(a, b)| a - b).collect();
        let dn = form.dual_norm(&d);
        if !dn.is_finite() {
            return 0.0;
        }
        let s = if dn > eps { eps / dn } else { 1.0 };
        s * dot(&d, h)
    };

    let mut x = nalgebra::DVector::zeros(r + k);
    let mut nu = p.to_vec();
    let (mut best_upper, mut best_g) = upper_at(&x);
    // h2 = h, the other end of the decomposition
    let whole = eps * form.norm(h);
    if whole < best_upper {
        best_upper = whole;
        best_g = h.to_vec();
    }
    let mut best_lower = 0.0f64;
    let mut x_sum = nalgebra::DVector::zeros(r + k);
    let mut nu_sum = vec![0.0; n];
    let mut iters = 0usize;
    let target = |u: f64| tol.iterative_gap * (1.0 + u.abs());
    while best_upper - best_lower > target(best_upper) && iters < tol.iterative_max_iter {
        iters += 1;
        let ktnu = kmat.tr_mul(&nalgebra::DVector::from_column_slice(&nu));
        let mut v = &x + (ktnu - &ktp) * tau;
        let zn = v.rows(0, r).norm();
        let shrink = if zn > tau * eps {
            1.0 - tau * eps / zn
        } else {
            0.0
        };
        v.rows_mut(0, r).scale_mut(shrink);
        let xbar = &v * 2.0 - &x;
        x = v;
        let kx = &kmat * &xbar;
        let trial: Vec<f64> = (0..n).map(|i| nu[i] + sigma * (hv[i] - kx[i])).collect();
        nu = project_simplex(&trial);
        x_sum += &x;
        for (s, v) in nu_sum.iter_mut().zip(&nu) {
            *s += v;
        }
        if iters % 25 == 0 {
            let inv = 1.0 / iters as f64;
            let x_avg = &x_sum * inv;
            let nu_avg: Vec<f64> = nu_sum.iter().map(|v| v * inv).collect();
            for cand in [&x, &x_avg] {
                let (u, g) = upper_at(cand);
                if u < best_upper {
                    best_upper = u;
                    best_g = g;
                }
            }
            best_lower = best_lower.max(lower_at(&nu)).max(lower_at(&nu_avg));
        }
    }
    Ok(PenaltyValue {
        value: best_upper.max(0.0),
        witness: decomposition(h, best_g),
        exact: false,
        gap: (best_upper - best_lower).max(0.0),
        upper_bound_only: false,
    })
}
