//! Penalty-regularised critic losses and the alignment condition
//! `Lambda(h) = eps Theta(h)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{
    check_same_space, dot, symmetrize_class, DiscreteDistribution, FunctionClass, FunctionVec,
    SampleSpace,
};
use crate::dro::worst_case_expectation;
use crate::error::{Error, Result};
use crate::ipm::{ipm_distance, kantorovich_dual, IpmWitness};
use crate::penalties::{centered_theta, lambda_penalty, theta};
use crate::tolerances::Tolerances;

/// `E_P[h] - E_mu[h] + eps Theta_F(h)`.
pub fn critic_loss(
    p: &DiscreteDistribution,
    mu: &DiscreteDistribution,
    eps: f64,
    class: &FunctionClass,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::EpsNonPositive(eps));
    }
    check_same_space(p.space(), mu.space())?;
    let th = theta(class, h, tol)?.value;
    let diff = p.expect(h)? - mu.expect(h)?;
    if th.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(diff + eps * th)
}

/// `inf_h` of the critic loss, which is `0` or `-inf` by homogeneity.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticInfimum {
    /// `d_F(mu, P) <= eps`: the loss is non-negative and `h = 0` attains it.
    Bounded { distance: f64 },
    /// `d_F(mu, P) > eps`: the loss decreases linearly along `t * direction`.
    Unbounded {
        distance: f64,
        direction: Vec<f64>,
        /// Loss at `direction`, negative; the loss at `t * direction` is `t * slope`.
        slope: f64,
    },
}

pub fn critic_infimum(
    p: &DiscreteDistribution,
    mu: &DiscreteDistribution,
    eps: f64,
    class: &FunctionClass,
    tol: &Tolerances,
) -> Result<CriticInfimum> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::EpsNonPositive(eps));
    }
    let d = ipm_distance(class, mu, p, tol)?;
    if d.value <= eps {
        return Ok(CriticInfimum::Bounded { distance: d.value });
    }
    let direction = match d.witness {
        Some(IpmWitness::Member(k)) => class.members().expect("explicit")[k].values().to_vec(),
        Some(IpmWitness::Function(f)) => f,
        Some(IpmWitness::Plan(_)) | None => {
            let diff: Vec<f64> = mu
                .weights()
                .iter()
                .zip(p.weights())
                .map(|(a, b)| a - b)
                .collect();
            kantorovich_dual(class.space(), &diff, tol)?.1
        }
    };
    let dir = FunctionVec::new(class.space().clone(), direction)?;
    let slope = critic_loss(p, mu, eps, class, &dir, tol)?;
    Ok(CriticInfimum::Unbounded {
        distance: d.value,
        direction: dir.values().to_vec(),
        slope,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub lambda_value: f64,
    pub eps_theta: f64,
    pub aligned: bool,
    /// `eps Theta - Lambda`; zero up to tolerance when aligned.
    pub gap: f64,
    /// Optimum of `max <mu - P, h>` over the ball, i.e. the best any witness can reach.
    pub witness_lp_value: f64,
    pub witness_mu: Option<DiscreteDistribution>,
    /// `|<mu - P, h> - eps Theta|` at the witness.
    pub witness_residual: Option<f64>,
    /// `d_F(mu, P) - eps` at the witness; non-positive up to tolerance.
    pub ball_excess: Option<f64>,
    /// Both witness conditions hold within tolerance.
    pub witness_verified: bool,
    pub exact: bool,
    pub tolerance: f64,
}

/// Tests `Lambda(h) = eps Theta(h)` and, when it holds, extracts and checks a
/// witness measure from the worst-case LP.
pub fn check_alignment(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<AlignmentReport> {
    let lam = lambda_penalty(p, class, eps, h, tol)?;
    let eps_theta = eps * theta(class, h, tol)?.value;
    let dro = worst_case_expectation(p, class, eps, h, tol)?;
    let exact = lam.exact && dro.is_exact();
    let tolerance = tol.check_for(exact) + lam.gap;
    let gap = eps_theta - lam.value;
    let aligned = gap.abs() <= tolerance;
    let witness_lp_value = dro.value - p.expect(h)?;
    let mut report = AlignmentReport {
        lambda_value: lam.value,
        eps_theta,
        aligned,
        gap,
        witness_lp_value,
        witness_mu: None,
        witness_residual: None,
        ball_excess: None,
        witness_verified: false,
        exact,
        tolerance,
    };
    if aligned {
        let mu = dro.worst_q;
        let reached = mu.expect(h)? - p.expect(h)?;
        let residual = (reached - eps_theta).abs();
        let excess = ipm_distance(class, &mu, p, tol)?.value - eps;
        report.witness_verified =
            residual <= tolerance + dro.gap_estimate && excess <= tol.ball_feasibility;
        report.witness_residual = Some(residual);
        report.ball_excess = Some(excess);
        report.witness_mu = Some(mu);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedReport {
    pub eps_theta: f64,
    /// `sup_{B(P-)} E_Q[h]` and its predicted value `E_{P-}[h] + eps Theta`.
    pub sup_value: f64,
    pub sup_expected: f64,
    pub sup_residual: f64,
    /// `inf_{B(P+)} E_Q[h]` and its predicted value `E_{P+}[h] - eps Theta`.
    pub inf_value: f64,
    pub inf_expected: f64,
    pub inf_residual: f64,
    pub exact: bool,
}

/// Checks both robust statements for an aligned `h_star` with `P = p_minus`
/// and witness `mu = p_plus` on an even class.
pub fn two_sided_check(
    p_minus: &DiscreteDistribution,
    p_plus: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h_star: &FunctionVec,
    tol: &Tolerances,
) -> Result<TwoSidedReport> {
    if !class.contains_negations() {
        return Err(Error::NotEven);
    }
    let al = check_alignment(p_minus, class, eps, h_star, tol)?;
    if !al.aligned {
        return Err(Error::NotAligned(format!(
            "Lambda = {} but eps Theta = {}",
            al.lambda_value, al.eps_theta
        )));
    }
    let dist = ipm_distance(class, p_plus, p_minus, tol)?.value;
    let reached = p_plus.expect(h_star)? - p_minus.expect(h_star)?;
    if dist > eps + tol.ball_feasibility || (reached - al.eps_theta).abs() > al.tolerance {
        return Err(Error::NotAligned(format!(
            "P+ is not a witness: distance {dist}, <P+ - P-, h> = {reached}, eps Theta = {}",
            al.eps_theta
        )));
    }
    let sup = worst_case_expectation(p_minus, class, eps, h_star, tol)?;
    let inf = worst_case_expectation(p_plus, class, eps, &h_star.negated(), tol)?;
    let sup_expected = p_minus.expect(h_star)? + al.eps_theta;
    let inf_expected = p_plus.expect(h_star)? - al.eps_theta;
    Ok(TwoSidedReport {
        eps_theta: al.eps_theta,
        sup_value: sup.value,
        sup_expected,
        sup_residual: (sup.value - sup_expected).abs(),
        inf_value: -inf.value,
        inf_expected,
        inf_residual: (-inf.value - inf_expected).abs(),
        exact: sup.is_exact() && inf.is_exact(),
    })
}

/// A reference, even explicit class, radius and test function.
#[derive(Debug, Clone)]
pub struct AlignedInstance {
    pub p: DiscreteDistribution,
    pub class: FunctionClass,
    pub eps: f64,
    pub h: FunctionVec,
}

/// Random instance on `n` points with `extra` Gaussian members (closed under
/// negation and augmented with `+-e_i`).
///
/// The reference puts at least `0.5 / n` on every point and the radius stays
/// below that, so the simplex constraint is inactive and the worst case
/// reduces to `eps inf_b Theta(h - b)`; centering `h` at its optimal shift
/// therefore aligns it. With `shift` non-zero the constant `shift` is added
/// afterwards, which raises `Theta` but not `Lambda`.
pub fn aligned_instance(
    n: usize,
    extra: usize,
    seed: u64,
    shift: f64,
    tol: &Tolerances,
) -> Result<AlignedInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "aligned instances need at least two points".into(),
        ));
    }
    let space: Arc<SampleSpace> = Arc::new(SampleSpace::unstructured(n)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let p = DiscreteDistribution::new(space.clone(), raw.iter().map(|v| v / total).collect())?;
    let floor = p.weights().iter().copied().fold(f64::INFINITY, f64::min);
    let eps = floor * rng.random_range(0.1..0.9);
    let mut members: Vec<Vec<f64>> = (0..extra)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        members.push(e);
    }
    let class = symmetrize_class(&FunctionClass::explicit_from_values(
        space.clone(),
        members,
    )?)?
    .class;
    let h0: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let h0 = FunctionVec::new(space.clone(), h0)?;
    let (b, _) = centered_theta(&class, &h0, tol)?;
    let h = h0.shifted(shift - b);
    Ok(AlignedInstance { p, class, eps, h })
}

/// The witness LP value `max <mu - P, h>` over the ball for an explicit class,
/// solved directly.
pub fn witness_lp(
    p: &DiscreteDistribution,
    class: &FunctionClass,
    eps: f64,
    h: &FunctionVec,
    tol: &Tolerances,
) -> Result<f64> {
    let dro = worst_case_expectation(p, class, eps, h, tol)?;
    Ok(dro.value - dot(p.weights(), h.values()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_points() -> (
        Arc<SampleSpace>,
        DiscreteDistribution,
        DiscreteDistribution,
        FunctionClass,
        FunctionVec,
    ) {
        let s = Arc::new(SampleSpace::unstructured(3).unwrap());
        let p = DiscreteDistribution::point_mass(s.clone(), 0).unwrap();
        let mu = DiscreteDistribution::new(s.clone(), vec![0.5, 0.0, 0.5]).unwrap();
        let f = FunctionClass::sup_norm(s.clone());
        let h = FunctionVec::new(s.clone(), vec![-1.0, 0.0, 1.0]).unwrap();
        (s, p, mu, f, h)
    }

    #[test]
    fn loss_examples() {
        let (s, p, mu, f, h) = three_points();
        let tol = Tolerances::default();
        assert!(critic_loss(&p, &mu, 1.0, &f, &h, &tol).unwrap().abs() < 1e-15);
        assert!((critic_loss(&p, &mu, 0.5, &f, &h, &tol).unwrap() + 0.5).abs() < 1e-15);
        let zero = FunctionVec::constant(s, 0.0);
        assert_eq!(critic_loss(&p, &mu, 0.5, &f, &zero, &tol).unwrap(), 0.0);
        match critic_infimum(&p, &mu, 0.5, &f, &tol).unwrap() {
            CriticInfimum::Unbounded {
                slope, distance, ..
            } => {
                assert!(slope < 0.0 && (distance - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            critic_infimum(&p, &mu, 1.0, &f, &tol).unwrap(),
            CriticInfimum::Bounded { .. }
        ));
    }

    #[test]
    fn boundary_alignment() {
        let (_, p, mu, f, h) = three_points();
        let tol = Tolerances::default();
        let r = check_alignment(&p, &f, 1.0, &h, &tol).unwrap();
        assert!(r.aligned && r.witness_verified, "{r:?}");
        assert!((r.eps_theta - 1.0).abs() < 1e-12);
        let two = two_sided_check(&p, &mu, &f, 1.0, &h, &tol).unwrap();
        assert!(
            two.sup_residual <= 1e-6 && two.inf_residual <= 1e-6,
            "{two:?}"
        );
    }

    #[test]
    fn constants_are_not_aligned() {
        let (s, p, _, f, _) = three_points();
        let tol = Tolerances::default();
        let c = FunctionVec::constant(s, 2.0);
        let r = check_alignment(&p, &f, 0.7, &c, &tol).unwrap();
        assert!(!r.aligned && (r.gap - 1.4).abs() < 1e-12);
        assert!(r.witness_mu.is_none());
    }

    #[test]
    fn degenerate_model_prefers_constants() {
        let s = Arc::new(SampleSpace::unstructured(4).unwrap());
        let p = DiscreteDistribution::new(s.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let f = FunctionClass::sup_norm(s.clone());
        let tol = Tolerances::default();
        for c in [0.0, 1.5, -2.0] {
            let h = FunctionVec::constant(s.clone(), c);
            let loss = critic_loss(&p, &p, 0.3, &f, &h, &tol).unwrap();
            assert!((loss - 0.3 * c.abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn generated_instances_behave() {
        let tol = Tolerances::default();
        for seed in 0..10 {
            let inst = aligned_instance(5, 3, seed, 0.0, &tol).unwrap();
            let r = check_alignment(&inst.p, &inst.class, inst.eps, &inst.h, &tol).unwrap();
            assert!(r.aligned && r.witness_verified, "seed {seed}: {r:?}");
            let mu = r.witness_mu.unwrap();
            let two = two_sided_check(&inst.p, &mu, &inst.class, inst.eps, &inst.h, &tol).unwrap();
            assert!(two.sup_residual <= 1e-6 && two.inf_residual <= 1e-6);

            let bad = aligned_instance(5, 3, seed, 5.0, &tol).unwrap();
            let r = check_alignment(&bad.p, &bad.class, bad.eps, &bad.h, &tol).unwrap();
            assert!(!r.aligned && r.gap > 1e-4);
            let w = witness_lp(&bad.p, &bad.class, bad.eps, &bad.h, &tol).unwrap();
            assert!(w < r.eps_theta - 1e-6);
        }
    }

    #[test]
    fn odd_class_rejected() {
        let s = Arc::new(SampleSpace::unstructured(2).unwrap());
        let f = FunctionClass::explicit_from_values(s.clone(), vec![vec![1.0, 0.0]]).unwrap();
        let p = DiscreteDistribution::uniform(s.clone());
        let h = FunctionVec::new(s, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            two_sided_check(&p, &p, &f, 0.1, &h, &Tolerances::default()),
            Err(Error::NotEven)
        ));
    }
}
