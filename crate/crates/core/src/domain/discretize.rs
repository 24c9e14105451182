use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::class::{ClassKind, FunctionClass};
use super::distribution::FunctionVec;

/// Samples `budget` functions on the boundary of a structured ball.
///
/// The output for a given seed is a prefix of the output for any larger
/// budget, so increasing the budget yields nested explicit classes. Each
/// sequence starts with a deterministic block of extreme functions:
///
/// * sup-norm: the sign vectors `1 - 2 e_i` and their negations, then random
///   distinct sign vectors, then random points on the faces of the cube;
/// * Lipschitz: the distance functions `+-c(i, .)`;
/// * Dudley: the constants `+-1`.
///
/// Every other sample is a Gaussian vector rescaled to penalty one.
pub fn discretize_structured_class(
    class: &FunctionClass,
    budget: usize,
    seed: u64,
) -> Result<FunctionClass> {
    if budget < 2 {
        return Err(Error::InvalidArgument(format!(
            "discretization budget must be at least 2, got {budget}"
        )));
    }
    if class.is_explicit() {
        return Err(Error::UnsupportedVariant {
            op: "discretize_structured_class",
            variant: "explicit",
        });
    }
    let space = class.space().clone();
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(budget);

    match class.kind() {
        ClassKind::SupNorm => {
            let mut seen: HashSet<Vec<bool>> = HashSet::new();
            let mut push_sign = |signs: Vec<bool>, out: &mut Vec<Vec<f64>>| {
                if out.len() < budget && seen.insert(signs.clone()) {
                    out.push(signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect());
                }
            };
            for i in 0..n {
                let s: Vec<bool> = (0..n).map(|j| j != i).collect();
                let neg: Vec<bool> = s.iter().map(|b| !b).collect();
                push_sign(s, &mut out);
                push_sign(neg, &mut out);
            }
            let total = if n < 63 { 1u64 << n } else { u64::MAX };
            while out.len() < budget && (out.len() as u64) < total {
                let s: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
                push_sign(s, &mut out);
            }
            while out.len() < budget {
                let mut f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let k = rng.random_range(0..n);
                f[k] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                out.push(f);
            }
        }
        _ => {
            if n < 2
                && !matches!(
                    class.kind(),
                    ClassKind::Fisher { .. } | ClassKind::Rkhs { .. }
                )
            {
                return Err(Error::InvalidArgument(
                    "cannot place seminorm boundary samples on a single point".into(),
                ));
            }
            match class.kind() {
                ClassKind::Lipschitz => {
                    for i in 0..n {
                        let d: Vec<f64> = (0..n).map(|j| space.cost(i, j).unwrap()).collect();
                        for f in [d.clone(), d.iter().map(|v| -v).collect()] {
                            if out.len() < budget {
                                out.push(f);
                            }
                        }
                    }
                }
                ClassKind::Dudley => {
                    for c in [1.0, -1.0] {
                        out.push(vec![c; n]);
                    }
                }
                _ => {}
            }
            while out.len() < budget {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let norm = class.penalty(&g).expect("structured class");
                if norm > 1e-12 && norm.is_finite() {
                    out.push(g.iter().map(|v| v / norm).collect());
                }
            }
        }
    }
    out.truncate(budget);
    let functions = out
        .into_iter()
        .map(|v| FunctionVec::new(space.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    FunctionClass::explicit(space, functions)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{DiscreteDistribution, SampleSpace};

    #[test]
    fn fisher_samples_on_boundary() {
        let s = Arc::new(SampleSpace::unstructured(4).unwrap());
        let class = FunctionClass::fisher(DiscreteDistribution::uniform(s), false).unwrap();
        let d = discretize_structured_class(&class, 12, 3).unwrap();
        for f in d.members().unwrap() {
            let e: f64 = f.values().iter().map(|v| v * v / 4.0).sum();
            assert!((e - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lipschitz_samples_have_unit_constant() {
        let s = Arc::new(SampleSpace::path(3).unwrap());
        let class = FunctionClass::lipschitz(s).unwrap();
        let d = discretize_structured_class(&class, 8, 11).unwrap();
        assert_eq!(d.members().unwrap().len(), 8);
        for f in d.members().unwrap() {
            assert!((class.penalty(f.values()).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn outputs_are_nested() {
        let s = Arc::new(SampleSpace::path(5).unwrap());
        let class = FunctionClass::dudley(s).unwrap();
        let small = discretize_structured_class(&class, 6, 9).unwrap();
        let large = discretize_structured_class(&class, 20, 9).unwrap();
        for (a, b) in small
            .members()
            .unwrap()
            .iter()
            .zip(large.members().unwrap())
        {
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn budget_below_two_rejected() {
        let s = Arc::new(SampleSpace::unstructured(3).unwrap());
        assert!(discretize_structured_class(&FunctionClass::sup_norm(s), 1, 0).is_err());
    }
}
