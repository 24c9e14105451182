//! f-GAN objectives over finite discriminator sets and their robust versions.

use std::fmt;
use std::sync::Arc;

use crate::domain::{check_same_space, dot, DiscreteDistribution, FunctionClass, FunctionVec};
use crate::dro::worst_case_expectation;
use crate::error::{Error, Result};
use crate::penalties::theta;
use crate::tolerances::Tolerances;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Distance kept from an open endpoint of the conjugate domain.
pub const OPEN_MARGIN: f64 = 1e-9;

/// Interval `dom f*`, each end possibly infinite or open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateDomain {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl ConjugateDomain {
    pub const REAL_LINE: ConjugateDomain = ConjugateDomain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };

    pub fn contains(&self, y: f64) -> bool {
        if !y.is_finite() {
            return false;
        }
        let above = if self.lo_open {
            y >= self.lo + OPEN_MARGIN
        } else {
            y >= self.lo
        };
        let below = if self.hi_open {
            y <= self.hi - OPEN_MARGIN
        } else {
            y <= self.hi
        };
        above && below
    }
}

/// A convex `f` with `f(1) = 0` and its conjugate `f*(y) = sup_x xy - f(x)`.
#[derive(Clone)]
pub struct FDivergence {
    name: String,
    f: ScalarFn,
    conj: ScalarFn,
    domain: ConjugateDomain,
}

impl fmt::Debug for FDivergence {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("FDivergence")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

pub const CATALOG: [&str; 6] = ["kl", "reverse_kl", "js_gan", "chi2", "tv", "ipm_indicator"];

impl FDivergence {
    /// Validates `f(1) = 0` and the Fenchel-Young inequality on a 32 x 32 grid.
    pub fn new(
        name: impl Into<String>,
        f: ScalarFn,
        conj: ScalarFn,
        domain: ConjugateDomain,
    ) -> Result<Self> {
        let div = FDivergence {
            name: name.into(),
            f,
            conj,
            domain,
        };
        let f1 = (div.f)(1.0);
        if !(f1.abs() <= 1e-12) {
            return Err(Error::InvalidDivergence(format!(
                "{}: f(1) = {f1}",
                div.name
            )));
        }
        if let Some((x, y)) = div.fenchel_young_violation() {
            return Err(Error::InvalidDivergence(format!(
                "{}: Fenchel-Young fails at x = {x}, y = {y}",
                div.name
            )));
        }
        Ok(div)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn conjugate(&self, y: f64) -> f64 {
        (self.conj)(y)
    }

    pub fn domain(&self) -> ConjugateDomain {
        self.domain
    }

    /// Grid points `y` inside the conjugate domain, clipped to `[-5, 5]`.
    fn y_grid(&self) -> Vec<f64> {
        let d = self.domain;
        let lo = if d.lo.is_finite() {
            d.lo + if d.lo_open { 1e-3 } else { 0.0 }
        } else {
            -5.0
        };
        let hi = if d.hi.is_finite() {
            d.hi - if d.hi_open { 1e-3 } else { 0.0 }
        } else {
            5.0
        };
        let (lo, hi) = (lo.max(-5.0), hi.min(5.0));
        (0..32).map(|k| lo + (hi - lo) * k as f64 / 31.0).collect()
    }

    /// First grid pair with `f(x) + f*(y) < xy - 1e-9`, if any.
    pub fn fenchel_young_violation(&self) -> Option<(f64, f64)> {
        let xs: Vec<f64> = (0..32)
            .map(|k| 0.05 * (400f64).powf(k as f64 / 31.0))
            .collect();
        for &y in &self.y_grid() {
            let fy = self.conjugate(y);
            for &x in &xs {
                let lhs = self.f(x) + fy;
                if lhs < x * y - 1e-9 * (1.0 + (x * y).abs()) {
                    return Some((x, y));
                }
            }
        }
        None
    }
}

/// Built-in divergences by name.
pub fn f_divergence_catalog(name: &str) -> Result<FDivergence> {
    let ln2 = std::f64::consts::LN_2;
    let (f, conj, domain): (ScalarFn, ScalarFn, ConjugateDomain) = match name {
        "kl" => (
            Arc::new(|t: f64| if t == 0.0 { 0.0 } else { t * t.ln() }),
            Arc::new(|y: f64| (y - 1.0).exp()),
            ConjugateDomain::REAL_LINE,
        ),
        "reverse_kl" => (
            Arc::new(|t: f64| -t.ln()),
            Arc::new(|y: f64| -1.0 - (-y).ln()),
            ConjugateDomain {
                hi: 0.0,
                ..ConjugateDomain::REAL_LINE
            },
        ),
        "js_gan" => (
            Arc::new(|t: f64| {
                let a = if t == 0.0 { 0.0 } else { t * t.ln() };
                a - (t + 1.0) * ((t + 1.0) / 2.0).ln()
            }),
            Arc::new(|y: f64| -(2.0 - y.exp()).ln()),
            ConjugateDomain {
                hi: ln2,
                ..ConjugateDomain::REAL_LINE
            },
        ),
        "chi2" => (
            Arc::new(|t: f64| (t - 1.0) * (t - 1.0)),
            Arc::new(|y: f64| y + y * y / 4.0),
            ConjugateDomain::REAL_LINE,
        ),
        "tv" => (
            Arc::new(|t: f64| (t - 1.0).abs()),
            Arc::new(|y: f64| y),
            ConjugateDomain {
                lo: -1.0,
                hi: 1.0,
                lo_open: false,
                hi_open: false,
            },
        ),
        "ipm_indicator" => (
            Arc::new(|t: f64| if t == 1.0 { 0.0 } else { f64::INFINITY }),
            Arc::new(|y: f64| y),
            ConjugateDomain::REAL_LINE,
        ),
        other => return Err(Error::UnknownDivergence(other.to_string())),
    };
    FDivergence::new(name, f, conj, domain)
}

/// Maximum over a finite discriminator set.
#[derive(Debug, Clone, PartialEq)]
pub struct GanValue {
    pub value: f64,
    pub best_discriminator: usize,
    /// Objective of every member, in order.
    pub per_member: Vec<f64>,
    /// Largest certified gap of the inner solves (zero when all exact).
    pub gap_estimate: f64,
}

fn members_in_domain<'a>(div: &FDivergence, h: &'a FunctionClass) -> Result<&'a [FunctionVec]> {
    let members = h.members().ok_or(Error::UnsupportedVariant {
        op: "gan_objective",
        variant: h.variant_name(),
    })?;
    for (k, f) in members.iter().enumerate() {
        if let Some((i, &v)) = f
            .values()
            .iter()
            .enumerate()
            .find(|(_, &v)| !div.domain.contains(v))
        {
            return Err(Error::DiscriminatorOutOfDomain {
                member: k,
                point: i,
                value: v,
            });
        }
    }
    Ok(members)
}

fn conj_expectation(div: &FDivergence, mu: &DiscreteDistribution, h: &FunctionVec) -> f64 {
    mu.weights()
        .iter()
        .zip(h.values())
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, &v)| w * div.conjugate(v))
        .sum()
}

fn best(per_member: Vec<f64>, gap: f64) -> GanValue {
    let (k, v) = per_member
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| {
            if v > bv {
                (k, v)
            } else {
                (bk, bv)
            }
        });
    GanValue {
        value: v,
        best_discriminator: k,
        per_member,
        gap_estimate: gap,
    }
}

/// `max_{h in H} E_P[h] - E_mu[f*(h)]`.
pub fn gan_objective(
    div: &FDivergence,
    discriminators: &FunctionClass,
    mu: &DiscreteDistribution,
    p: &DiscreteDistribution,
) -> Result<GanValue> {
    check_same_space(discriminators.space(), mu.space())?;
    check_same_space(discriminators.space(), p.space())?;
    let members = members_in_domain(div, discriminators)?;
    let per = members
        .iter()
        .map(|h| dot(p.weights(), h.values()) - conj_expectation(div, mu, h))
        .collect();
    Ok(best(per, 0.0))
}

/// `max_{h in H} sup_{Q in B(P)} E_Q[h] - E_mu[f*(h)]`, one worst-case solve per member.
pub fn robust_gan_sup(
    div: &FDivergence,
    discriminators: &FunctionClass,
    class: &FunctionClass,
    eps: f64,
    mu: &DiscreteDistribution,
    p: &DiscreteDistribution,
    tol: &Tolerances,
) -> Result<GanValue> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::EpsNonPositive(eps));
    }
    check_same_space(discriminators.space(), mu.space())?;
    check_same_space(discriminators.space(), class.space())?;
    let members = members_in_domain(div, discriminators)?;
    let mut gap = 0.0f64;
    let mut per = Vec::with_capacity(members.len());
    for h in members {
        let dro = worst_case_expectation(p, class, eps, h, tol)?;
        gap = gap.max(dro.gap_estimate);
        per.push(dro.value - conj_expectation(div, mu, h));
    }
    Ok(best(per, gap))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanBoundReport {
    pub robust: f64,
    pub plain: f64,
    /// `eps max_{h in H} Theta_F(h)`.
    pub cap: f64,
    /// `plain + cap - robust`; non-negative up to solver tolerance.
    pub slack: f64,
    pub gap_estimate: f64,
}

pub fn gan_bound_check(
    div: &FDivergence,
    discriminators: &FunctionClass,
    class: &FunctionClass,
    eps: f64,
    mu: &DiscreteDistribution,
    p: &DiscreteDistribution,
    tol: &Tolerances,
) -> Result<GanBoundReport> {
    let plain = gan_objective(div, discriminators, mu, p)?;
    let robust = robust_gan_sup(div, discriminators, class, eps, mu, p, tol)?;
    let mut max_theta = 0.0f64;
    for h in discriminators.members().expect("checked explicit") {
        max_theta = max_theta.max(theta(class, h, tol)?.value);
    }
    let cap = eps * max_theta;
    Ok(GanBoundReport {
        robust: robust.value,
        plain: plain.value,
        cap,
        slack: plain.value + cap - robust.value,
        gap_estimate: robust.gap_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{symmetrize_class, SampleSpace};

    fn setup() -> (Arc<SampleSpace>, DiscreteDistribution, DiscreteDistribution) {
        let s = Arc::new(SampleSpace::unstructured(3).unwrap());
        let p = DiscreteDistribution::new(s.clone(), vec![0.2, 0.5, 0.3]).unwrap();
        let mu = DiscreteDistribution::new(s.clone(), vec![0.4, 0.4, 0.2]).unwrap();
        (s, p, mu)
    }

    #[test]
    fn catalog_entries_are_normalised() {
        for name in CATALOG {
            let d = f_divergence_catalog(name).unwrap();
            assert_eq!(d.f(1.0), 0.0, "{name}");
            assert!(d.fenchel_young_violation().is_none());
        }
        assert!(
            (f_divergence_catalog("kl").unwrap().conjugate(2.0) - std::f64::consts::E).abs()
                < 1e-15
        );
        assert!(matches!(
            f_divergence_catalog("hellinger"),
            Err(Error::UnknownDivergence(_))
        ));
    }

    #[test]
    fn broken_conjugate_rejected() {
        let bad = FDivergence::new(
            "bad",
            Arc::new(|t: f64| (t - 1.0).powi(2)),
            Arc::new(|y: f64| 0.5 * y),
            ConjugateDomain::REAL_LINE,
        );
        assert!(matches!(bad, Err(Error::InvalidDivergence(_))));
    }

    #[test]
    fn indicator_gives_ipm() {
        let (s, p, mu) = setup();
        let h = vec![0.5, -1.0, 2.0];
        let hs = FunctionClass::explicit_from_values(s.clone(), vec![h.clone()]).unwrap();
        let d = f_divergence_catalog("ipm_indicator").unwrap();
        let g = gan_objective(&d, &hs, &mu, &p).unwrap();
        let expected: f64 = (0..3)
            .map(|i| h[i] * (p.weights()[i] - mu.weights()[i]))
            .sum();
        assert!((g.value - expected).abs() < 1e-15);
        let even = symmetrize_class(&hs).unwrap().class;
        assert!(gan_objective(&d, &even, &p, &p).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn kl_matches_enumeration() {
        let (s, p, mu) = setup();
        let ratio: Vec<f64> = (0..3)
            .map(|i| (p.weights()[i] / mu.weights()[i]).ln().clamp(-3.0, 3.0))
            .collect();
        let members = vec![
            ratio.clone(),
            vec![0.0; 3],
            ratio.iter().map(|v| 0.5 * v).collect(),
        ];
        let hs = FunctionClass::explicit_from_values(s, members.clone()).unwrap();
        let d = f_divergence_catalog("kl").unwrap();
        let g = gan_objective(&d, &hs, &mu, &p).unwrap();
        let brute = members
            .iter()
            .map(|h| {
                (0..3)
                    .map(|i| p.weights()[i] * h[i] - mu.weights()[i] * (h[i] - 1.0).exp())
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((g.value - brute).abs() < 1e-12);
    }

    #[test]
    fn out_of_domain_rejected() {
        let (s, p, mu) = setup();
        let hs = FunctionClass::explicit_from_values(s, vec![vec![0.0, 1.0, 0.0]]).unwrap();
        let d = f_divergence_catalog("js_gan").unwrap();
        assert!(matches!(
            gan_objective(&d, &hs, &mu, &p),
            Err(Error::DiscriminatorOutOfDomain {
                member: 0,
                point: 1,
                ..
            })
        ));
        let tv = f_divergence_catalog("tv").unwrap();
        let edge =
            FunctionClass::explicit_from_values(mu.space().clone(), vec![vec![1.0, -1.0, 0.0]])
                .unwrap();
        assert!(gan_objective(&tv, &edge, &mu, &p).is_ok());
    }

    #[test]
    fn robust_bound_with_own_class() {
        let (s, p, mu) = setup();
        let hs = FunctionClass::explicit_from_values(
            s.clone(),
            vec![vec![0.3, -0.2, 0.6], vec![-0.5, 0.1, 0.0]],
        )
        .unwrap();
        let f = symmetrize_class(&hs).unwrap().class;
        let tol = Tolerances::default();
        for name in ["kl", "js_gan", "tv", "ipm_indicator"] {
            let d = f_divergence_catalog(name).unwrap();
            let r = gan_bound_check(&d, &hs, &f, 0.2, &mu, &p, &tol).unwrap();
            assert!(
                r.slack >= -1e-7 && r.cap <= 0.2 * (1.0 + 1e-9),
                "{name} {r:?}"
            );
            assert!(r.robust <= r.plain + 0.2 + 1e-7);
        }
        let zero = FunctionClass::explicit_from_values(s.clone(), vec![vec![0.0; 3]]).unwrap();
        let d = f_divergence_catalog("kl").unwrap();
        let r =
            gan_bound_check(&d, &zero, &FunctionClass::sup_norm(s), 0.5, &mu, &p, &tol).unwrap();
        assert!((r.robust - r.plain).abs() < 1e-15 && r.slack == r.cap);
    }
}
