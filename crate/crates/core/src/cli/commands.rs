//! One function per subcommand, each producing a [`Report`].

use std::sync::Arc;

use serde_json::{json, Value};

use crate::critic::{check_alignment, critic_infimum, critic_loss, CriticInfimum};
use crate::domain::{
    lipschitz_constant, DiscreteDistribution, FunctionClass, FunctionVec, SampleSpace,
};
use crate::dro::{
    centered_bound, tightness_report, verify_identity, worst_case_expectation, DroMethod,
};
use crate::error::Error;
use crate::gan::{f_divergence_catalog, gan_bound_check};
use crate::ipm::{ipm_distance, IpmWitness};
use crate::penalties::{centered_theta, j_penalty, lambda_penalty, theta, PenaltyWitness};
use crate::tolerances::Tolerances;

use super::config::{resolve, Problem, ProblemConfig};
use super::report::{num, nums, Report};
use super::{CliError, Subcommand};

const DEFAULT_SAMPLES: usize = 200;

type Out = Result<Report, CliError>;

fn lib(ctx: String) -> impl Fn(Error) -> CliError {
    move |e| CliError::from_library(e, &ctx)
}

pub fn execute(cmd: Subcommand, cfg: Option<&ProblemConfig>, seed: u64, tol: &Tolerances) -> Out {
    if cmd == Subcommand::ReproSin {
        if let Some(c) = cfg {
            c.check_fields(cmd)?;
        }
        let eps = cfg
            .and_then(|c| c.epsilon.as_ref())
            .map(|e| e.values())
            .unwrap_or_else(|| vec![1.0]);
        return repro_sin(&eps, seed, tol);
    }
    let cfg = cfg.expect("config required");
    let problem = resolve(cfg, cmd, tol)?;
    let reference =
        || problem.distribution(cfg.reference.as_deref().expect("checked"), "reference");
    let other = || problem.distribution(cfg.other.as_deref().expect("checked"), "other");
    match cmd {
        Subcommand::Ipm => ipm(&problem, reference()?, other()?, seed, tol),
        Subcommand::Penalty => penalty(&problem, reference()?, seed, tol),
        Subcommand::DroSup => dro_sup(&problem, reference()?, seed, tol),
        Subcommand::VerifyIdentity => {
            identity(&problem, reference()?, seed, tol, "verify-identity")
        }
        Subcommand::SweepEps => sweep(&problem, reference()?, seed, tol),
        Subcommand::Tightness => tightness(
            &problem,
            reference()?,
            cfg.samples.unwrap_or(DEFAULT_SAMPLES),
            seed,
            tol,
        ),
        Subcommand::CriticCheck => critic(&problem, reference()?, other()?, seed, tol),
        Subcommand::GanBound => gan(
            &problem,
            reference()?,
            other()?,
            cfg.divergence.as_deref().expect("checked"),
            seed,
            tol,
        ),
        Subcommand::ReproSin => unreachable!(),
    }
}

fn ipm_witness_json(w: &Option<IpmWitness>) -> Value {
    match w {
        None => Value::Null,
        Some(IpmWitness::Member(k)) => json!({ "member": k }),
        Some(IpmWitness::Function(f)) => json!({ "function": nums(f) }),
        Some(IpmWitness::Plan(plan)) => json!({
            "plan": plan.iter().map(|&(i, j, m)| json!([i, j, num(m)])).collect::<Vec<_>>()
        }),
    }
}

fn penalty_witness_json(w: &Option<PenaltyWitness>) -> Value {
    match w {
        None => Value::Null,
        Some(PenaltyWitness::Weights(v)) => json!({ "weights": nums(v) }),
        Some(PenaltyWitness::Point(i)) => json!({ "point": i }),
        Some(PenaltyWitness::Decomposition { h1, h2 }) => json!({ "h1": nums(h1), "h2": nums(h2) }),
    }
}

fn method_name(m: DroMethod) -> &'static str {
    match m {
        DroMethod::ExactLp => "exact_lp",
        DroMethod::DualBisection => "dual_bisection",
    }
}

fn ipm(
    pr: &Problem,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    seed: u64,
    tol: &Tolerances,
) -> Out {
    let class = pr.class();
    let forward = ipm_distance(class, q, p, tol).map_err(lib("ipm".into()))?;
    let backward = ipm_distance(class, p, q, tol).map_err(lib("ipm".into()))?;
    let mut r = Report::new(
        "ipm",
        Some(seed),
        vec!["class", "distance", "reverse_distance"],
    );
    r.push(
        vec![
            class.variant_name().into(),
            forward.value.into(),
            backward.value.into(),
        ],
        json!({
            "witness": ipm_witness_json(&forward.witness),
            "reverse_witness": ipm_witness_json(&backward.witness),
        }),
    );
    Ok(r)
}

fn positive(eps: f64, ctx: &str) -> Result<(), CliError> {
    if eps > 0.0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{ctx}: radius must be positive, got {eps}"
        )))
    }
}

fn penalty(pr: &Problem, p: &DiscreteDistribution, seed: u64, tol: &Tolerances) -> Out {
    let class = pr.class();
    let mut r = Report::new(
        "penalty",
        Some(seed),
        vec![
            "function",
            "epsilon",
            "theta",
            "j",
            "lambda",
            "centered_shift",
            "centered_theta",
            "exact",
            "gap",
        ],
    );
    for (name, h) in &pr.functions {
        let ctx = format!("penalty {name}");
        let th = theta(class, h, tol).map_err(lib(ctx.clone()))?;
        let j = j_penalty(p, h).map_err(lib(ctx.clone()))?;
        let (shift, ct) = centered_theta(class, h, tol).map_err(lib(ctx.clone()))?;
        for &eps in &pr.eps {
            positive(eps, &ctx)?;
            let lam = lambda_penalty(p, class, eps, h, tol).map_err(lib(ctx.clone()))?;
            r.push(
                vec![
                    name.as_str().into(),
                    eps.into(),
                    th.value.into(),
                    j.value.into(),
                    lam.value.into(),
                    shift.into(),
                    ct.value.into(),
                    (lam.exact && th.exact).into(),
                    lam.gap.into(),
                ],
                json!({
                    "theta_witness": penalty_witness_json(&th.witness),
                    "lambda_witness": penalty_witness_json(&lam.witness),
                }),
            );
        }
    }
    Ok(r)
}

fn dro_sup(pr: &Problem, p: &DiscreteDistribution, seed: u64, tol: &Tolerances) -> Out {
    let class = pr.class();
    let mut r = Report::new(
        "dro-sup",
        Some(seed),
        vec![
            "function",
            "epsilon",
            "value",
            "e_p_h",
            "method",
            "gap_estimate",
        ],
    );
    for (name, h) in &pr.functions {
        let ctx = format!("dro-sup {name}");
        let e_p_h = p.expect(h).map_err(lib(ctx.clone()))?;
        for &eps in &pr.eps {
            let d = worst_case_expectation(p, class, eps, h, tol).map_err(lib(ctx.clone()))?;
            r.push(
                vec![
                    name.as_str().into(),
                    eps.into(),
                    d.value.into(),
                    e_p_h.into(),
                    method_name(d.method).into(),
                    d.gap_estimate.into(),
                ],
                json!({ "worst_q": nums(d.worst_q.weights()) }),
            );
        }
    }
    Ok(r)
}

fn identity(
    pr: &Problem,
    p: &DiscreteDistribution,
    seed: u64,
    tol: &Tolerances,
    label: &str,
) -> Out {
    let class = pr.class();
    let mut r = Report::new(
        label,
        Some(seed),
        vec![
            "function",
            "epsilon",
            "lhs",
            "rhs",
            "e_p_h",
            "lambda",
            "residual",
            "tolerance",
            "pass",
        ],
    );
    for (name, h) in &pr.functions {
        let ctx = format!("{label} {name}");
        for &eps in &pr.eps {
            positive(eps, &ctx)?;
            let v = verify_identity(p, class, eps, h, tol).map_err(lib(ctx.clone()))?;
            let allowed = tol.check_for(v.exact) + v.gap_estimate;
            r.push(
                vec![
                    name.as_str().into(),
                    eps.into(),
                    v.lhs.into(),
                    (v.e_p_h + v.lambda_value).into(),
                    v.e_p_h.into(),
                    v.lambda_value.into(),
                    v.residual.into(),
                    allowed.into(),
                    (v.residual <= allowed).into(),
                ],
                json!({ "exact": v.exact, "gap_estimate": num(v.gap_estimate) }),
            );
        }
    }
    Ok(r)
}

fn sweep(pr: &Problem, p: &DiscreteDistribution, seed: u64, tol: &Tolerances) -> Out {
    let class = pr.class();
    let mut r = Report::new(
        "sweep-eps",
        Some(seed),
        vec![
            "function", "epsilon", "lhs", "rhs", "residual", "bound", "slack", "pass",
        ],
    );
    for (name, h) in &pr.functions {
        let ctx = format!("sweep-eps {name}");
        for &eps in &pr.eps {
            positive(eps, &ctx)?;
            let v = verify_identity(p, class, eps, h, tol).map_err(lib(ctx.clone()))?;
            let b = centered_bound(p, class, eps, h, tol).map_err(lib(ctx.clone()))?;
            let allowed = tol.check_for(v.exact) + v.gap_estimate;
            r.push(
                vec![
                    name.as_str().into(),
                    eps.into(),
                    v.lhs.into(),
                    (v.e_p_h + v.lambda_value).into(),
                    v.residual.into(),
                    b.rhs.into(),
                    b.slack.into(),
                    (v.residual <= allowed && b.slack >= -allowed).into(),
                ],
                json!({ "centered_shift": num(b.shift), "centered_theta": num(b.centered_theta), "equality": b.equality }),
            );
        }
    }
    Ok(r)
}

fn tightness(
    pr: &Problem,
    p: &DiscreteDistribution,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Out {
    let class = pr.class();
    let mut r = Report::new(
        "tightness",
        Some(seed),
        vec![
            "epsilon",
            "pairs",
            "max_bound_violation",
            "max_subadditivity_violation",
            "violations",
            "threshold",
        ],
    );
    for &eps in &pr.eps {
        positive(eps, "tightness")?;
        let t =
            tightness_report(p, class, eps, samples, seed, tol).map_err(lib("tightness".into()))?;
        r.push(
            vec![
                eps.into(),
                t.pairs.into(),
                t.max_bound_violation.into(),
                t.max_subadditivity_violation.into(),
                t.violations.into(),
                t.threshold.into(),
            ],
            Value::Null,
        );
    }
    Ok(r)
}

fn critic(
    pr: &Problem,
    p: &DiscreteDistribution,
    mu: &DiscreteDistribution,
    seed: u64,
    tol: &Tolerances,
) -> Out {
    let class = pr.class();
    let mut r = Report::new(
        "critic-check",
        Some(seed),
        vec![
            "function",
            "epsilon",
            "loss",
            "distance",
            "infimum",
            "lambda",
            "eps_theta",
            "gap",
            "aligned",
            "witness_verified",
        ],
    );
    for (name, h) in &pr.functions {
        let ctx = format!("critic-check {name}");
        for &eps in &pr.eps {
            positive(eps, &ctx)?;
            let loss = critic_loss(p, mu, eps, class, h, tol).map_err(lib(ctx.clone()))?;
            let inf = critic_infimum(p, mu, eps, class, tol).map_err(lib(ctx.clone()))?;
            let al = check_alignment(p, class, eps, h, tol).map_err(lib(ctx.clone()))?;
            let (distance, infimum, direction) = match &inf {
                CriticInfimum::Bounded { distance } => (*distance, 0.0, Value::Null),
                CriticInfimum::Unbounded {
                    distance,
                    direction,
                    ..
                } => (*distance, f64::NEG_INFINITY, nums(direction)),
            };
            r.push(
                vec![
                    name.as_str().into(),
                    eps.into(),
                    loss.into(),
                    distance.into(),
                    infimum.into(),
                    al.lambda_value.into(),
                    al.eps_theta.into(),
                    al.gap.into(),
                    al.aligned.into(),
                    al.witness_verified.into(),
                ],
                json!({
                    "descent_direction": direction,
                    "witness_mu": al.witness_mu.as_ref().map(|m| nums(m.weights())),
                    "witness_residual": al.witness_residual.map(num),
                    "ball_excess": al.ball_excess.map(num),
                }),
            );
        }
    }
    Ok(r)
}

fn gan(
    pr: &Problem,
    p: &DiscreteDistribution,
    mu: &DiscreteDistribution,
    divergence: &str,
    seed: u64,
    tol: &Tolerances,
) -> Out {
    let div = f_divergence_catalog(divergence).map_err(lib("divergence".into()))?;
    let names: Vec<&str> = pr.functions.iter().map(|(n, _)| n.as_str()).collect();
    let discriminators = FunctionClass::explicit(
        pr.space.clone(),
        pr.functions.iter().map(|(_, f)| f.clone()).collect(),
    )
    .map_err(lib("functions".into()))?;
    let mut r = Report::new(
        "gan-bound",
        Some(seed),
        vec![
            "divergence",
            "epsilon",
            "robust",
            "plain",
            "cap",
            "slack",
            "gap_estimate",
        ],
    );
    for &eps in &pr.eps {
        positive(eps, "gan-bound")?;
        let b = gan_bound_check(&div, &discriminators, pr.class(), eps, mu, p, tol)
            .map_err(lib("gan-bound".into()))?;
        r.push(
            vec![
                divergence.into(),
                eps.into(),
                b.robust.into(),
                b.plain.into(),
                b.cap.into(),
                b.slack.into(),
                b.gap_estimate.into(),
            ],
            json!({ "discriminators": names }),
        );
    }
    Ok(r)
}

/// Grid on `[-4, 4]` with `201` points and the discretised standard normal.
pub fn sin_grid() -> (Arc<SampleSpace>, DiscreteDistribution) {
    let t: Vec<f64> = (0..201).map(|i| -4.0 + 0.04 * i as f64).collect();
    let space = Arc::new(SampleSpace::line(&t).expect("grid is a valid line"));
    let raw: Vec<f64> = t.iter().map(|x| (-x * x / 2.0).exp()).collect();
    let total: f64 = raw.iter().sum();
    let p = DiscreteDistribution::with_tolerance(
        space.clone(),
        raw.iter().map(|w| w / total).collect(),
        1e-12,
    )
    .expect("normalised weights");
    (space, p)
}

fn coordinates(space: &SampleSpace) -> Vec<f64> {
    let m = space.metric().expect("line metric");
    m[..space.len()].iter().map(|d| d - 4.0).collect()
}

fn repro_sin(eps_grid: &[f64], seed: u64, tol: &Tolerances) -> Out {
    let (space, p) = sin_grid();
    let t = coordinates(&space);
    let class = FunctionClass::lipschitz(space.clone()).expect("line has a metric");
    let mk =
        |f: &dyn Fn(f64) -> f64| FunctionVec::new(space.clone(), t.iter().map(|&x| f(x)).collect());
    let ctx = || lib("repro-sin".into());
    let h = mk(&|x| (2.0 * x).sin() + x).map_err(ctx())?;
    let h1 = mk(&|x| (2.0 * x).sin()).map_err(ctx())?;
    let h2 = mk(&|x| x).map_err(ctx())?;
    let lip_h = lipschitz_constant(&space, h.values());
    let lip_h2 = lipschitz_constant(&space, h2.values());
    let j_h1 = j_penalty(&p, &h1).map_err(ctx())?.value;
    let mut r = Report::new(
        "repro-sin",
        Some(seed),
        vec![
            "epsilon",
            "eps_lip",
            "j_h1",
            "lip_h2",
            "lambda_upper",
            "lambda_lp",
            "lhs",
            "e_p_h",
            "residual",
            "gap",
        ],
    );
    for &eps in eps_grid {
        positive(eps, "repro-sin")?;
        let lam = lambda_penalty(&p, &class, eps, &h, tol).map_err(ctx())?;
        let dro = worst_case_expectation(&p, &class, eps, &h, tol).map_err(ctx())?;
        let e_p_h = p.expect(&h).map_err(ctx())?;
        let eps_lip = eps * lip_h;
        r.push(
            vec![
                eps.into(),
                eps_lip.into(),
                j_h1.into(),
                lip_h2.into(),
                (j_h1 + eps * lip_h2).into(),
                lam.value.into(),
                dro.value.into(),
                e_p_h.into(),
                (dro.value - e_p_h - lam.value).abs().into(),
                (eps_lip - lam.value).into(),
            ],
            json!({ "worst_q": nums(dro.worst_q.weights()) }),
        );
    }
    r.summary.insert(
        "grid".into(),
        json!({ "points": 201, "lo": num(-4.0), "hi": num(4.0) }),
    );
    Ok(r)
}
