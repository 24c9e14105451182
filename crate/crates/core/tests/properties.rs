use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use ipmdro::cli::config::{ClassConfig, EpsilonSpec, PointsSpec, SpaceConfig};
use ipmdro::cli::ProblemConfig;
use ipmdro::dro::{verify_identity, worst_case_expectation};
use ipmdro::gan::{f_divergence_catalog, gan_objective};
use ipmdro::ipm::ipm_distance;
use ipmdro::penalties::{j_penalty, lambda_penalty, theta};
use ipmdro::{
    symmetrize_class, DiscreteDistribution, FunctionClass, FunctionVec, SampleSpace, Tolerances,
};

fn normalise(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

/// `(weights, members, h, eps)` on a common dimension.
fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, f64)> {
    (3usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..1.0, n),
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), 1..5),
            prop::collection::vec(-3.0f64..3.0, n),
            0.05f64..2.0,
        )
    })
}

fn even_class(space: &Arc<SampleSpace>, members: &[Vec<f64>]) -> FunctionClass {
    let n = space.len();
    let mut all = members.to_vec();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        all.push(e);
    }
    symmetrize_class(&FunctionClass::explicit_from_values(space.clone(), all).unwrap())
        .unwrap()
        .class
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn worst_case_is_feasible_and_matches_identity((w, members, hv, eps) in instance()) {
        let tol = Tolerances::default();
        let space = Arc::new(SampleSpace::unstructured(w.len()).unwrap());
        let p = DiscreteDistribution::new(space.clone(), normalise(&w)).unwrap();
        let class = even_class(&space, &members);
        let h = FunctionVec::new(space, hv).unwrap();
        let dro = worst_case_expectation(&p, &class, eps, &h, &tol).unwrap();
        let d = ipm_distance(&class, &dro.worst_q, &p, &tol).unwrap().value;
        prop_assert!(d <= eps + 1e-7);
        prop_assert!(dro.value >= p.expect(&h).unwrap() - 1e-12);
        prop_assert!(dro.value <= h.max() + 1e-12);
        let r = verify_identity(&p, &class, eps, &h, &tol).unwrap();
        prop_assert!(r.residual <= 1e-6);
    }

    #[test]
    fn penalty_below_both_parts((w, members, hv, eps) in instance()) {
        let tol = Tolerances::default();
        let space = Arc::new(SampleSpace::unstructured(w.len()).unwrap());
        let p = DiscreteDistribution::new(space.clone(), normalise(&w)).unwrap();
        let class = even_class(&space, &members);
        let h = FunctionVec::new(space, hv).unwrap();
        let lam = lambda_penalty(&p, &class, eps, &h, &tol).unwrap().value;
        prop_assert!(lam <= j_penalty(&p, &h).unwrap().value + 1e-9);
        prop_assert!(lam <= eps * theta(&class, &h, &tol).unwrap().value + 1e-9);
        prop_assert!(lam >= -1e-12);
    }

    #[test]
    fn symmetrized_distance_is_the_larger_direction((w, members, _h, _eps) in instance(), v in prop::collection::vec(0.05f64..1.0, 7)) {
        let tol = Tolerances::default();
        let n = w.len();
        let space = Arc::new(SampleSpace::unstructured(n).unwrap());
        let p = DiscreteDistribution::new(space.clone(), normalise(&w)).unwrap();
        let q = DiscreteDistribution::new(space.clone(), normalise(&v[..n])).unwrap();
        let f = FunctionClass::explicit_from_values(space, members).unwrap();
        let sym = symmetrize_class(&f).unwrap().class;
        let forward = ipm_distance(&f, &q, &p, &tol).unwrap().value;
        let backward = ipm_distance(&f, &p, &q, &tol).unwrap().value;
        let both = ipm_distance(&sym, &q, &p, &tol).unwrap().value;
        prop_assert!((both - forward.max(backward)).abs() <= 1e-12);
    }

    #[test]
    fn indicator_gan_is_the_ipm((w, members, _h, _eps) in instance(), v in prop::collection::vec(0.05f64..1.0, 7)) {
        let tol = Tolerances::default();
        let n = w.len();
        let space = Arc::new(SampleSpace::unstructured(n).unwrap());
        let p = DiscreteDistribution::new(space.clone(), normalise(&w)).unwrap();
        let mu = DiscreteDistribution::new(space.clone(), normalise(&v[..n])).unwrap();
        let hs = FunctionClass::explicit_from_values(space, members).unwrap();
        let div = f_divergence_catalog("ipm_indicator").unwrap();
        let g = gan_objective(&div, &hs, &mu, &p).unwrap().value;
        let d = ipm_distance(&hs, &p, &mu, &tol).unwrap().value;
        prop_assert!((g - d).abs() <= 1e-12);
    }

    #[test]
    fn config_round_trip(
        weights in prop::collection::vec(0.0f64..1.0, 2..6),
        eps in prop::collection::vec(0.0f64..3.0, 1..4),
        seed in proptest::option::of(any::<u64>()),
        labels in any::<bool>(),
    ) {
        let n = weights.len();
        let points = if labels {
            PointsSpec::Labels((0..n).map(|i| format!("x{i}")).collect())
        } else {
            PointsSpec::Count(n)
        };
        let mut distributions = BTreeMap::new();
        distributions.insert("p".to_string(), weights.clone());
        let mut functions = BTreeMap::new();
        functions.insert("h".to_string(), weights.iter().map(|x| 1.0 / (1.0 + x)).collect());
        let cfg = ProblemConfig {
            schema_version: 1,
            space: Some(SpaceConfig { points, metric: None, coordinates: Some((0..n).map(|i| i as f64 * 0.1).collect()), edges: None }),
            distributions,
            functions,
            class: Some(ClassConfig::Explicit { members: vec![weights.clone()], symmetrize: true, unit_vectors: false }),
            epsilon: Some(if eps.len() == 1 { EpsilonSpec::Scalar(eps[0]) } else { EpsilonSpec::Grid(eps) }),
            reference: Some("p".into()),
            other: None,
            divergence: None,
            samples: None,
            tolerances: Some(Tolerances { exact_check: 1e-7, ..Tolerances::default() }),
            seed,
        };
        let once = ProblemConfig::parse(&cfg.to_json()).unwrap();
        prop_assert_eq!(&once, &cfg);
        let twice = ProblemConfig::parse(&once.to_json()).unwrap();
        prop_assert_eq!(once, twice);
    }
}
