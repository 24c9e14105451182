//! Dense two-phase simplex with a certified optimum.
//!
//! Problems are stated as `max c^T x` subject to equality rows, `<=` rows and
//! per-variable bounds. Internally every problem is rewritten in standard form
//! (`A x = b`, `x >= 0`, `b >= 0`), solved on a dense tableau, and the final
//! basis is refactorised with an LU decomposition to recover clean primal and
//! dual vectors. The returned [`LpCertificate`] reports primal feasibility,
//! dual feasibility, complementary slackness and the duality gap.
//!
//! Entering columns follow Dantzig's rule with lowest-index tie breaking; after
//! a run of degenerate pivots the solver switches to Bland's rule until the
//! objective moves again, which rules out cycling. Every choice is
//! deterministic.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Largest number of variables or constraints accepted.
pub const MAX_DIM: usize = 5000;

/// `max objective^T x` s.t. `eq`, `ub` rows and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_constraints: Vec<(Vec<f64>, f64)>,
    pub ub_constraints: Vec<(Vec<f64>, f64)>,
    /// Per-variable `(lower, upper)`; either side may be infinite.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// `n` variables, zero objective, bounds `[0, +inf)`.
    pub fn new(n: usize) -> Self {
        LpProblem {
            objective: vec![0.0; n],
            eq_constraints: Vec::new(),
            ub_constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, j: usize) {
        self.bounds[j] = (f64::NEG_INFINITY, f64::INFINITY);
    }

    /// Adds `sum coef * x_j = rhs` from sparse `(j, coef)` pairs.
    pub fn add_eq(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.eq_constraints.push((row, rhs));
    }

    /// Adds `sum coef * x_j <= rhs` from sparse `(j, coef)` pairs.
    pub fn add_ub(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.ub_constraints.push((row, rhs));
    }

    fn dense(&self, terms: &[(usize, f64)]) -> Vec<f64> {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, v) in terms {
            row[j] += v;
        }
        row
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::dims("LP variable bounds", n, self.bounds.len()));
        }
        let m = self.eq_constraints.len() + self.ub_constraints.len();
        if n > MAX_DIM || m > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "LP with {n} variables and {m} constraints exceeds the dense limit of {MAX_DIM}"
            )));
        }
        if let Some(index) = self.objective.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "LP objective".into(),
                index,
            });
        }
        for (k, (row, rhs)) in self
            .eq_constraints
            .iter()
            .chain(&self.ub_constraints)
            .enumerate()
        {
            if row.len() != n {
                return Err(Error::dims(format!("LP constraint {k}"), n, row.len()));
            }
            if let Some(index) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: format!("LP constraint {k}"),
                    index,
                });
            }
            if !rhs.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("LP constraint {k} right-hand side"),
                    index: 0,
                });
            }
        }
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::InvalidArgument(format!(
                    "invalid bounds for variable {j}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Residuals of the optimality conditions at the returned solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LpCertificate {
    /// Largest constraint or bound violation divided by `1 + |rhs|_inf`.
    pub primal_residual: f64,
    /// Largest positive reduced cost.
    pub dual_infeasibility: f64,
    /// `sum_j |x_j * reduced_cost_j|` in standard form.
    pub complementary_slackness: f64,
    /// `|primal objective - dual objective|`.
    pub duality_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// `+inf` when unbounded, `-inf` when infeasible.
    pub objective: f64,
    /// Multipliers of the equality rows.
    pub duals_eq: Vec<f64>,
    /// Multipliers of the `<=` rows (non-negative at an optimum).
    pub duals_ub: Vec<f64>,
    pub certificate: LpCertificate,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// All multipliers, equality rows first.
    pub fn duals(&self) -> Vec<f64> {
        self.duals_eq
            .iter()
            .chain(&self.duals_ub)
            .copied()
            .collect()
    }

    fn infeasible(n: usize, m_eq: usize, m_ub: usize, pivots: usize) -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            primal: vec![f64::NAN; n],
            objective: f64::NEG_INFINITY,
            duals_eq: vec![0.0; m_eq],
            duals_ub: vec![0.0; m_ub],
            certificate: LpCertificate::default(),
            pivots,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum RowOrigin {
    Eq(usize),
    Ub(usize),
    Bound,
}

/// Original variable `x_j = offset + sum coef * x'_col`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct StandardForm {
    m: usize,
    ncols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    c_offset: f64,
    vars: Vec<VarMap>,
    origin: Vec<RowOrigin>,
    sign: Vec<f64>,
    /// Slack column with coefficient +1 in the row, usable as initial basis.
    slack: Vec<Option<usize>>,
}

fn standardize(p: &LpProblem) -> Option<StandardForm> {
    let n = p.num_vars();
    let mut vars = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(l, u) in &p.bounds {
        if l.is_finite() && u.is_finite() && l > u {
            return None;
        }
        let map = if l.is_finite() {
            let col = ncols;
            ncols += 1;
            if u.is_finite() {
                bound_rows.push((col, u - l));
            }
            VarMap {
                offset: l,
                cols: vec![(col, 1.0)],
            }
        } else if u.is_finite() {
            ncols += 1;
            VarMap {
                offset: u,
                cols: vec![(ncols - 1, -1.0)],
            }
        } else {
            ncols += 2;
            VarMap {
                offset: 0.0,
                cols: vec![(ncols - 2, 1.0), (ncols - 1, -1.0)],
            }
        };
        vars.push(map);
    }
    let n_struct = ncols;
    let m_eq = p.eq_constraints.len();
    let m_ub = p.ub_constraints.len();
    let m = m_eq + m_ub + bound_rows.len();
    let n_slack = m_ub + bound_rows.len();
    let ncols = n_struct + n_slack;

    let mut a = vec![0.0; m * ncols];
    let mut b = vec![0.0; m];
    let mut origin = Vec::with_capacity(m);
    let mut slack = vec![None; m];

    let fill = |r: usize, row: &[f64], rhs: f64, a: &mut [f64], b: &mut [f64]| {
        let mut rhs = rhs;
        for (j, &coef) in row.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            let vm = &vars[j];
            rhs -= coef * vm.offset;
            for &(col, s) in &vm.cols {
                a[r * ncols + col] += coef * s;
            }
        }
        b[r] = rhs;
    };
    for (k, (row, rhs)) in p.eq_constraints.iter().enumerate() {
        fill(k, row, *rhs, &mut a, &mut b);
        origin.push(RowOrigin::Eq(k));
    }
    for (k, (row, rhs)) in p.ub_constraints.iter().enumerate() {
        let r = m_eq + k;
        fill(r, row, *rhs, &mut a, &mut b);
        let s = n_struct + k;
        a[r * ncols + s] = 1.0;
        slack[r] = Some(s);
        origin.push(RowOrigin::Ub(k));
    }
    for (k, &(col, width)) in bound_rows.iter().enumerate() {
        let r = m_eq + m_ub + k;
        a[r * ncols + col] = 1.0;
        b[r] = width;
        let s = n_struct + m_ub + k;
        a[r * ncols + s] = 1.0;
        slack[r] = Some(s);
        origin.push(RowOrigin::Bound);
    }
    let mut sign = vec![1.0; m];
    for r in 0..m {
        if b[r] < 0.0 {
            sign[r] = -1.0;
            b[r] = -b[r];
            for v in &mut a[r * ncols..(r + 1) * ncols] {
                *v = -*v;
            }
            slack[r] = None;
        }
    }
    let mut c = vec![0.0; ncols];
    let mut c_offset = 0.0;
    for (j, vm) in vars.iter().enumerate() {
        let cj = p.objective[j];
        c_offset += cj * vm.offset;
        for &(col, s) in &vm.cols {
            c[col] += cj * s;
        }
    }
    Some(StandardForm {
        m,
        ncols,
        a,
        b,
        c,
        c_offset,
        vars,
        origin,
        sign,
        slack,
    })
}

struct Tableau<'a> {
    sf: &'a StandardForm,
    tol: &'a Tolerances,
    width: usize,
    t: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    d: Vec<f64>,
    z: f64,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<'a> Tableau<'a> {
    fn new(sf: &'a StandardForm, tol: &'a Tolerances) -> Self {
        let n_art = sf.slack.iter().filter(|s| s.is_none()).count();
        let width = sf.ncols + n_art;
        let mut t = vec![0.0; sf.m * width];
        let mut basis = Vec::with_capacity(sf.m);
        let mut art = sf.ncols;
        for r in 0..sf.m {
            t[r * width..r * width + sf.ncols]
                .copy_from_slice(&sf.a[r * sf.ncols..(r + 1) * sf.ncols]);
            match sf.slack[r] {
                Some(s) => basis.push(s),
                None => {
                    t[r * width + art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
        }
        let mut is_basic = vec![false; width];
        for &j in &basis {
            is_basic[j] = true;
        }
        Tableau {
            sf,
            tol,
            width,
            t,
            rhs: sf.b.clone(),
            basis,
            is_basic,
            d: vec![0.0; width],
            z: 0.0,
            pivots: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.sf.ncols
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d.copy_from_slice(cost);
        self.z = 0.0;
        for r in 0..self.sf.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * w..(r + 1) * w];
                for (dj, &tj) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
                self.z += cb * self.rhs[r];
            }
        }
        for r in 0..self.sf.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let piv = self.t[p * w + q];
        {
            let row = &mut self.t[p * w..(p + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        self.rhs[p] /= piv;
        let (pivot_row, rhs_p) = (self.t[p * w..(p + 1) * w].to_vec(), self.rhs[p]);
        let nz: Vec<usize> = (0..w).filter(|&j| pivot_row[j] != 0.0).collect();
        for r in 0..self.sf.m {
            if r == p {
                continue;
            }
            let f = self.t[r * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[r * w..(r + 1) * w];
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
            row[q] = 0.0;
            self.rhs[r] -= f * rhs_p;
            if self.rhs[r] < 0.0 && self.rhs[r] > -1e-11 {
                self.rhs[r] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * pivot_row[j];
            }
            self.d[q] = 0.0;
            self.z += f * rhs_p;
        }
        self.is_basic[self.basis[p]] = false;
        self.is_basic[q] = true;
        self.basis[p] = q;
        self.pivots += 1;
    }

    fn run(&mut self, allow_artificial: bool) -> Result<Outcome> {
        let w = self.width;
        let mut streak = 0usize;
        loop {
            if self.pivots >= self.tol.lp_max_pivots {
                return Err(Error::NumericalBreakdown(format!(
                    "simplex exceeded {} pivots",
                    self.tol.lp_max_pivots
                )));
            }
            let bland = streak >= self.tol.lp_degenerate_streak;
            let mut q = None;
            let mut best = self.tol.lp_optimality;
            for j in 0..w {
                if self.is_basic[j] || (!allow_artificial && self.is_artificial(j)) {
                    continue;
                }
                let dj = self.d[j];
                if dj > best {
                    q = Some(j);
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some(q) = q else {
                return Ok(Outcome::Optimal);
            };
            let mut p: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.sf.m {
                let a = self.t[r * w + q];
                if a <= self.tol.lp_pivot {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                let tie = (ratio - best_ratio).abs() <= 1e-12 * best_ratio.max(1.0);
                let better = match p {
                    None => true,
                    Some(pr) if tie => {
                        if bland {
                            self.basis[r] < self.basis[pr]
                        } else {
                            let ap = self.t[pr * w + q];
                            a > ap || (a == ap && self.basis[r] < self.basis[pr])
                        }
                    }
                    Some(_) => ratio < best_ratio,
                };
                if better {
                    if !tie || p.is_none() {
                        best_ratio = ratio;
                    } else {
                        best_ratio = best_ratio.min(ratio);
                    }
                    p = Some(r);
                }
            }
            let Some(p) = p else {
                return Ok(Outcome::Unbounded);
            };
            if best_ratio <= 1e-14 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(p, q);
        }
    }

    /// Pivots basic artificials out where possible; rows that cannot be
    /// cleared are redundant and keep a zero-valued artificial.
    fn expel_artificials(&mut self) {
        let w = self.width;
        for r in 0..self.sf.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.sf.ncols {
                if self.is_basic[j] {
                    continue;
                }
                let v = self.t[r * w + j].abs();
                if v > 1e-9 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(r, j);
                if self.rhs[r] < 0.0 {
                    self.rhs[r] = 0.0;
                }
            }
        }
    }

    /// Column `j` of the standard-form matrix extended with artificial identity columns.
    fn column(&self, j: usize) -> DVector<f64> {
        let sf = self.sf;
        if j < sf.ncols {
            DVector::from_iterator(sf.m, (0..sf.m).map(|r| sf.a[r * sf.ncols + j]))
        } else {
            let k = j - sf.ncols;
            let row = (0..sf.m)
                .filter(|&r| sf.slack[r].is_none())
                .nth(k)
                .expect("artificial column maps to a row");
            let mut v = DVector::zeros(sf.m);
            v[row] = 1.0;
            v
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.sf.m;
        let mut bm = DMatrix::zeros(m, m);
        for (r, &j) in self.basis.iter().enumerate() {
            bm.set_column(r, &self.column(j));
        }
        bm
    }

    /// Recomputes the tableau, right-hand side and reduced costs from the
    /// original data and the current basis.
    fn refresh(&mut self, cost: &[f64]) -> Result<()> {
        let m = self.sf.m;
        if m == 0 {
            self.set_costs(cost);
            return Ok(());
        }
        let lu = self.basis_matrix().lu();
        let w = self.width;
        let mut full = DMatrix::zeros(m, w);
        for j in 0..w {
            full.set_column(j, &self.column(j));
        }
        let tab = lu
            .solve(&full)
            .ok_or_else(|| Error::NumericalBreakdown("singular basis on refactorisation".into()))?;
        let rhs = lu
            .solve(&DVector::from_column_slice(&self.sf.b))
            .ok_or_else(|| Error::NumericalBreakdown("singular basis on refactorisation".into()))?;
        for r in 0..m {
            for j in 0..w {
                self.t[r * w + j] = tab[(r, j)];
            }
            self.rhs[r] = rhs[r];
        }
        self.set_costs(cost);
        Ok(())
    }
}

/// Solves `p` with default tolerances.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(p, &Tolerances::default())
}

pub fn solve_lp_with(p: &LpProblem, tol: &Tolerances) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let (m_eq, m_ub) = (p.eq_constraints.len(), p.ub_constraints.len());
    let Some(sf) = standardize(p) else {
        return Ok(LpSolution::infeasible(n, m_eq, m_ub, 0));
    };
    let mut tab = Tableau::new(&sf, tol);
    let width = tab.width;
    let b_scale = 1.0 + sf.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    if width > sf.ncols {
        let mut phase_one = vec![0.0; width];
        phase_one[sf.ncols..].iter_mut().for_each(|c| *c = -1.0);
        tab.set_costs(&phase_one);
        tab.run(true)?;
        if tab.z < -tol.lp_phase_one * b_scale {
            // confirm against a refactorised basis before declaring infeasibility
            tab.refresh(&phase_one)?;
            tab.run(true)?;
            if tab.z < -tol.lp_phase_one * b_scale {
                return Ok(LpSolution::infeasible(n, m_eq, m_ub, tab.pivots));
            }
        }
        tab.expel_artificials();
    }

    let mut cost = vec![0.0; width];
    cost[..sf.ncols].copy_from_slice(&sf.c);
    tab.set_costs(&cost);
    let mut refreshes = 0;
    loop {
        let outcome = tab.run(false)?;
        if let Outcome::Unbounded = outcome {
            let primal = recover_primal(&sf, &tab.basis, &tab.rhs);
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                primal,
                objective: f64::INFINITY,
                duals_eq: vec![0.0; m_eq],
                duals_ub: vec![0.0; m_ub],
                certificate: LpCertificate::default(),
                pivots: tab.pivots,
            });
        }
        let sol = certify(&sf, &tab, p, &cost)?;
        let ok = sol.certificate.primal_residual <= tol.lp_feasibility
            && sol.certificate.dual_infeasibility <= 1e-9
            && sol.certificate.duality_gap <= 1e-9 * (1.0 + sol.objective.abs());
        if ok || refreshes >= 3 {
            if !ok {
                return Err(Error::NumericalBreakdown(format!(
                    "LP certificate failed after refactorisation: {:?}",
                    sol.certificate
                )));
            }
            return Ok(sol);
        }
        refreshes += 1;
        tab.refresh(&cost)?;
    }
}

fn recover_primal(sf: &StandardForm, basis: &[usize], values: &[f64]) -> Vec<f64> {
    let mut xs = vec![0.0; sf.ncols];
    for (r, &j) in basis.iter().enumerate() {
        if j < sf.ncols {
            xs[j] = values[r].max(0.0);
        }
    }
    sf.vars
        .iter()
        .map(|vm| vm.offset + vm.cols.iter().map(|&(c, s)| s * xs[c]).sum::<f64>())
        .collect()
}

fn certify(sf: &StandardForm, tab: &Tableau, p: &LpProblem, cost: &[f64]) -> Result<LpSolution> {
    let m = sf.m;
    let (x_b, y) = if m == 0 {
        (DVector::zeros(0), DVector::zeros(0))
    } else {
        let bm = tab.basis_matrix();
        let lu = bm.clone().lu();
        let x_b = lu
            .solve(&DVector::from_column_slice(&sf.b))
            .ok_or_else(|| Error::NumericalBreakdown("singular final basis".into()))?;
        let c_b = DVector::from_iterator(m, tab.basis.iter().map(|&j| cost[j]));
        let y = bm
            .transpose()
            .lu()
            .solve(&c_b)
            .ok_or_else(|| Error::NumericalBreakdown("singular final basis".into()))?;
        (x_b, y)
    };
    let mut xs = vec![0.0; sf.ncols];
    let mut art_mass = 0.0f64;
    for (r, &j) in tab.basis.iter().enumerate() {
        if j < sf.ncols {
            xs[j] = x_b[r].max(0.0);
        } else {
            art_mass = art_mass.max(x_b[r].abs());
        }
    }
    let primal: Vec<f64> = sf
        .vars
        .iter()
        .map(|vm| vm.offset + vm.cols.iter().map(|&(c, s)| s * xs[c]).sum::<f64>())
        .collect();

    // primal residual on the original problem
    let rhs_scale = 1.0
        + p.eq_constraints
            .iter()
            .chain(&p.ub_constraints)
            .fold(0.0f64, |acc, (_, b)| acc.max(b.abs()));
    let mut viol = 0.0f64;
    for (row, b) in &p.eq_constraints {
        viol = viol.max((dot(row, &primal) - b).abs());
    }
    for (row, b) in &p.ub_constraints {
        viol = viol.max(dot(row, &primal) - b);
    }
    for (x, &(l, u)) in primal.iter().zip(&p.bounds) {
        viol = viol.max(l - x).max(x - u);
    }

    // reduced costs over structural and slack columns
    let mut dual_inf = 0.0f64;
    let mut cs = 0.0;
    for j in 0..sf.ncols {
        let mut aty = 0.0;
        for r in 0..m {
            let a = sf.a[r * sf.ncols + j];
            if a != 0.0 {
                aty += a * y[r];
            }
        }
        let rc = sf.c[j] - aty;
        dual_inf = dual_inf.max(rc);
        cs += (xs[j] * rc).abs();
    }
    let primal_obj = dot(&sf.c, &xs) + sf.c_offset;
    let dual_obj: f64 = (0..m).map(|r| sf.b[r] * y[r]).sum::<f64>() + sf.c_offset;

    let (mut duals_eq, mut duals_ub) = (
        vec![0.0; p.eq_constraints.len()],
        vec![0.0; p.ub_constraints.len()],
    );
    for r in 0..m {
        match sf.origin[r] {
            RowOrigin::Eq(k) => duals_eq[k] = sf.sign[r] * y[r],
            RowOrigin::Ub(k) => duals_ub[k] = sf.sign[r] * y[r],
            RowOrigin::Bound => {}
        }
    }
    let objective = dot(&p.objective, &primal);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        objective,
        duals_eq,
        duals_ub,
        certificate: LpCertificate {
            primal_residual: viol.max(art_mass).max(0.0) / rhs_scale,
            dual_infeasibility: dual_inf.max(0.0),
            complementary_slackness: cs,
            duality_gap: (primal_obj - dual_obj).abs(),
        },
        pivots: tab.pivots,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_face() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 1.0];
        p.add_ub(&[(0, 1.0), (1, 1.0)], 1.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!((s.duals_ub[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_bounds_and_rows() {
        let mut p = LpProblem::new(1);
        p.objective = vec![1.0];
        p.add_ub(&[(0, 1.0)], 1.0);
        p.bounds[0] = (2.0, f64::INFINITY);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);

        let mut p = LpProblem::new(1);
        p.objective = vec![1.0];
        p.add_ub(&[(0, 1.0)], 1.0);
        p.add_ub(&[(0, -1.0)], -2.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 0.0];
        p.add_ub(&[(0, 1.0), (1, -1.0)], 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // max -|x - 3| via epigraph: max -t, t >= x - 3, t >= 3 - x, x free, x <= 2
        let mut p = LpProblem::new(2);
        p.objective = vec![0.0, -1.0];
        p.bounds[0] = (f64::NEG_INFINITY, 2.0);
        p.set_free(1);
        p.add_ub(&[(0, 1.0), (1, -1.0)], 3.0);
        p.add_ub(&[(0, -1.0), (1, -1.0)], -3.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.objective + 1.0).abs() < 1e-12);
        assert!((s.primal[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn l1_ball_around_uniform() {
        for (budget, expected) in [(0.3, 1.3), (0.6, 1.6), (1.0, 11.0 / 6.0)] {
            let s = l1_ball(budget);
            assert!((s.objective - expected).abs() < 1e-12, "{s:?}");
            let c = s.certificate;
            assert!(c.duality_gap < 1e-9 && c.complementary_slackness < 1e-7);
        }
    }

    fn l1_ball(budget: f64) -> LpSolution {
        // max <h,q>, q in simplex, |q - p|_1 <= budget with q - p = u - v
        let h = [0.0, 1.0, 2.0];
        let p = [1.0 / 3.0; 3];
        let mut lp = LpProblem::new(9);
        for i in 0..3 {
            lp.objective[i] = h[i];
            lp.add_eq(&[(i, 1.0), (3 + i, -1.0), (6 + i, 1.0)], p[i]);
        }
        lp.add_eq(&[(0, 1.0), (1, 1.0), (2, 1.0)], 1.0);
        let split: Vec<(usize, f64)> = (3..9).map(|j| (j, 1.0)).collect();
        lp.add_ub(&split, budget);
        solve_lp(&lp).unwrap()
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 2.0];
        p.add_eq(&[(0, 1.0), (1, 1.0)], 1.0);
        p.add_eq(&[(0, 2.0), (1, 2.0)], 2.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let mut p = LpProblem::new(2);
        p.eq_constraints.push((vec![1.0], 1.0));
        assert!(matches!(solve_lp(&p), Err(Error::DimensionMismatch { .. })));
    }
}
