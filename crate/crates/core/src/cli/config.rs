//! JSON problem files.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{
    symmetrize_class, DiscreteDistribution, Edge, FunctionClass, FunctionVec, SampleSpace,
};
use crate::error::Error;
use crate::tolerances::Tolerances;

use super::{CliError, Subcommand};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub distributions: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<EpsilonSpec>,
    /// Name of the reference distribution `P`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Name of the second distribution (`Q`, the critic's `mu` or the generator).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointsSpec {
    Count(usize),
    Labels(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub points: PointsSpec,
    /// Full cost matrix by rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
    /// Real coordinates; the metric becomes `|t_i - t_j|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeConfig>>,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub i: usize,
    pub j: usize,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassConfig {
    Explicit {
        members: Vec<Vec<f64>>,
        /// Close the members under negation.
        #[serde(default)]
        symmetrize: bool,
        /// Add `+-e_i` for every point.
        #[serde(default)]
        unit_vectors: bool,
    },
    SupNorm,
    Lipschitz,
    Dudley,
    Fisher {
        mu: String,
        #[serde(default)]
        allow_infinite: bool,
    },
    Sobolev {
        mu: String,
        #[serde(default)]
        allow_infinite: bool,
    },
    Rkhs {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gram: Option<Vec<Vec<f64>>>,
        /// Gaussian kernel bandwidth on the space metric.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Scalar(f64),
    Grid(Vec<f64>),
    Range(EpsilonRange),
}

/// `count` evenly spaced radii from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl EpsilonSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EpsilonSpec::Scalar(e) => vec![*e],
            EpsilonSpec::Grid(v) => v.clone(),
            EpsilonSpec::Range(r) if r.count == 1 => vec![r.start],
            EpsilonSpec::Range(r) => (0..r.count)
                .map(|k| r.start + (r.stop - r.start) * k as f64 / (r.count - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Field {
    Space,
    Distributions,
    Functions,
    Class,
    Epsilon,
    Reference,
    Other,
    Divergence,
    Samples,
}

impl Field {
    fn key(self) -> &'static str {
        match self {
            Field::Space => "space",
            Field::Distributions => "distributions",
            Field::Functions => "functions",
            Field::Class => "class",
            Field::Epsilon => "epsilon",
            Field::Reference => "reference",
            Field::Other => "other",
            Field::Divergence => "divergence",
            Field::Samples => "samples",
        }
    }
}

/// Required and optional fields per subcommand; `tolerances` and `seed` are
/// accepted everywhere.
fn field_sets(cmd: Subcommand) -> (&'static [Field], &'static [Field]) {
    use Field::*;
    const PER_FUNCTION: &[Field] = &[Space, Distributions, Functions, Class, Epsilon, Reference];
    match cmd {
        Subcommand::Ipm => (&[Space, Distributions, Class, Reference, Other], &[]),
        Subcommand::Penalty
        | Subcommand::DroSup
        | Subcommand::VerifyIdentity
        | Subcommand::SweepEps => (PER_FUNCTION, &[]),
        Subcommand::Tightness => (
            &[Space, Distributions, Class, Epsilon, Reference],
            &[Samples],
        ),
        Subcommand::CriticCheck => (
            &[
                Space,
                Distributions,
                Functions,
                Class,
                Epsilon,
                Reference,
                Other,
            ],
            &[],
        ),
        Subcommand::GanBound => (
            &[
                Space,
                Distributions,
                Functions,
                Class,
                Epsilon,
                Reference,
                Other,
                Divergence,
            ],
            &[],
        ),
        Subcommand::ReproSin => (&[], &[Epsilon]),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn at(ctx: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::from_library(e, ctx)
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ProblemConfig =
            serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "config: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn present(&self) -> Vec<Field> {
        let mut out = Vec::new();
        let mut mark = |on: bool, f: Field| {
            if on {
                out.push(f)
            }
        };
        mark(self.space.is_some(), Field::Space);
        mark(!self.distributions.is_empty(), Field::Distributions);
        mark(!self.functions.is_empty(), Field::Functions);
        mark(self.class.is_some(), Field::Class);
        mark(self.epsilon.is_some(), Field::Epsilon);
        mark(self.reference.is_some(), Field::Reference);
        mark(self.other.is_some(), Field::Other);
        mark(self.divergence.is_some(), Field::Divergence);
        mark(self.samples.is_some(), Field::Samples);
        out
    }

    /// Checks that the config carries exactly the fields `cmd` uses.
    pub fn check_fields(&self, cmd: Subcommand) -> Result<(), CliError> {
        let (required, optional) = field_sets(cmd);
        let present = self.present();
        if let Some(f) = required.iter().find(|f| !present.contains(f)) {
            return Err(invalid(format!(
                "config: {} needs the field {:?}",
                cmd.name(),
                f.key()
            )));
        }
        if let Some(f) = present
            .iter()
            .find(|f| !required.contains(f) && !optional.contains(f))
        {
            return Err(invalid(format!(
                "config: field {:?} is not used by {}",
                f.key(),
                cmd.name()
            )));
        }
        Ok(())
    }
}

/// A validated problem with every reference resolved.
#[derive(Debug, Clone)]
pub struct Problem {
    pub space: Arc<SampleSpace>,
    pub distributions: BTreeMap<String, DiscreteDistribution>,
    pub functions: Vec<(String, FunctionVec)>,
    pub class: Option<FunctionClass>,
    pub eps: Vec<f64>,
}

impl Problem {
    pub fn distribution(&self, name: &str, field: &str) -> Result<&DiscreteDistribution, CliError> {
        self.distributions.get(name).ok_or_else(|| {
            invalid(format!(
                "config: {field} refers to unknown distribution {name:?}"
            ))
        })
    }

    pub fn class(&self) -> &FunctionClass {
        self.class
            .as_ref()
            .expect("class checked by field validation")
    }
}

fn build_space(cfg: &SpaceConfig) -> Result<SampleSpace, CliError> {
    let labels: Vec<String> = match &cfg.points {
        PointsSpec::Count(n) => (0..*n).map(|i| i.to_string()).collect(),
        PointsSpec::Labels(l) => l.clone(),
    };
    let n = labels.len();
    let metric = match (&cfg.metric, &cfg.coordinates) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                "space: give either metric or coordinates, not both",
            ))
        }
        (Some(rows), None) => {
            if rows.len() != n {
                return Err(invalid(format!(
                    "space.metric has {} rows, expected {n}",
                    rows.len()
                )));
            }
            if let Some((k, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(invalid(format!(
                    "space.metric row {k} has length {}, expected {n}",
                    row.len()
                )));
            }
            Some(rows.clone())
        }
        (None, Some(t)) => {
            if t.len() != n {
                return Err(invalid(format!(
                    "space.coordinates has length {}, expected {n}",
                    t.len()
                )));
            }
            Some(
                t.iter()
                    .map(|a| t.iter().map(|b| (a - b).abs()).collect())
                    .collect(),
            )
        }
        (None, None) => None,
    };
    let graph = cfg.edges.as_ref().map(|es| {
        es.iter()
            .map(|e| Edge {
                i: e.i,
                j: e.j,
                weight: e.weight,
            })
            .collect()
    });
    SampleSpace::new(labels, metric, graph).map_err(at("space"))
}

fn build_class(
    cfg: &ClassConfig,
    space: &Arc<SampleSpace>,
    dists: &BTreeMap<String, DiscreteDistribution>,
) -> Result<FunctionClass, CliError> {
    let lookup = |name: &str| {
        dists.get(name).cloned().ok_or_else(|| {
            invalid(format!(
                "config: class.mu refers to unknown distribution {name:?}"
            ))
        })
    };
    let ctx = at("class");
    let class = match cfg {
        ClassConfig::Explicit {
            members,
            symmetrize,
            unit_vectors,
        } => {
            let n = space.len();
            if let Some((k, m)) = members.iter().enumerate().find(|(_, m)| m.len() != n) {
                return Err(invalid(format!(
                    "class.members[{k}] has length {}, expected {n}",
                    m.len()
                )));
            }
            let mut values = members.clone();
            if *unit_vectors {
                for i in 0..n {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    values.push(e.clone());
                    e[i] = -1.0;
                    values.push(e);
                }
            }
            let class = FunctionClass::explicit_from_values(space.clone(), values).map_err(&ctx)?;
            if *symmetrize {
                symmetrize_class(&class).map_err(&ctx)?.class
            } else {
                class
            }
        }
        ClassConfig::SupNorm => FunctionClass::sup_norm(space.clone()),
        ClassConfig::Lipschitz => FunctionClass::lipschitz(space.clone()).map_err(&ctx)?,
        ClassConfig::Dudley => FunctionClass::dudley(space.clone()).map_err(&ctx)?,
        ClassConfig::Fisher { mu, allow_infinite } => {
            FunctionClass::fisher(lookup(mu)?, *allow_infinite).map_err(&ctx)?
        }
        ClassConfig::Sobolev { mu, allow_infinite } => {
            FunctionClass::sobolev(lookup(mu)?, *allow_infinite).map_err(&ctx)?
        }
        ClassConfig::Rkhs { gram, bandwidth } => match (gram, bandwidth) {
            (Some(g), None) => {
                let n = space.len();
                if g.len() != n {
                    return Err(invalid(format!(
                        "class.gram has {} rows, expected {n}",
                        g.len()
                    )));
                }
                if let Some((k, row)) = g.iter().enumerate().find(|(_, r)| r.len() != n) {
                    return Err(invalid(format!(
                        "class.gram row {k} has length {}, expected {n}",
                        row.len()
                    )));
                }
                FunctionClass::rkhs(space.clone(), g).map_err(&ctx)?
            }
            (None, Some(s)) => FunctionClass::gaussian_rkhs(space.clone(), *s).map_err(&ctx)?,
            _ => {
                return Err(invalid(
                    "class: rkhs needs exactly one of gram or bandwidth",
                ))
            }
        },
    };
    Ok(class)
}

/// Validates the config against `cmd` and resolves every named reference.
pub fn resolve(
    cfg: &ProblemConfig,
    cmd: Subcommand,
    tol: &Tolerances,
) -> Result<Problem, CliError> {
    cfg.check_fields(cmd)?;
    let space = build_space(cfg.space.as_ref().expect("checked"))?.into_shared();
    let n = space.len();
    let mut distributions = BTreeMap::new();
    for (name, w) in &cfg.distributions {
        if w.len() != n {
            return Err(invalid(format!(
                "distributions.{name} has length {}, expected {n}",
                w.len()
            )));
        }
        let d = DiscreteDistribution::with_tolerance(space.clone(), w.clone(), tol.weight_sum)
            .map_err(|e| CliError::from_library(e, &format!("distributions.{name}")))?;
        distributions.insert(name.clone(), d);
    }
    let mut functions = Vec::new();
    for (name, v) in &cfg.functions {
        if v.len() != n {
            return Err(invalid(format!(
                "functions.{name} has length {}, expected {n}",
                v.len()
            )));
        }
        let f = FunctionVec::new(space.clone(), v.clone())
            .map_err(|e| CliError::from_library(e, &format!("functions.{name}")))?;
        functions.push((name.clone(), f));
    }
    let class = cfg
        .class
        .as_ref()
        .map(|c| build_class(c, &space, &distributions))
        .transpose()?;
    let eps = cfg
        .epsilon
        .as_ref()
        .map(EpsilonSpec::values)
        .unwrap_or_default();
    if cfg.epsilon.is_some() && eps.is_empty() {
        return Err(invalid("epsilon: grid is empty"));
    }
    if let Some((k, e)) = eps
        .iter()
        .enumerate()
        .find(|(_, e)| !(e.is_finite() && **e >= 0.0))
    {
        return Err(invalid(format!(
            "epsilon[{k}] = {e} must be finite and non-negative"
        )));
    }
    let problem = Problem {
        space,
        distributions,
        functions,
        class,
        eps,
    };
    if let Some(r) = &cfg.reference {
        problem.distribution(r, "reference")?;
    }
    if let Some(o) = &cfg.other {
        problem.distribution(o, "other")?;
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TV: &str = r#"{
        "schema_version": 1,
        "space": {"points": ["a", "b", "c"]},
        "distributions": {"p": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334]},
        "functions": {"h": [0, 1, 2]},
        "class": {"variant": "sup_norm"},
        "epsilon": 0.3,
        "reference": "p"
    }"#;

    #[test]
    fn round_trip_is_fixed_point() {
        let a = ProblemConfig::parse(TV).unwrap();
        let b = ProblemConfig::parse(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        let p = resolve(&a, Subcommand::VerifyIdentity, &Tolerances::default()).unwrap();
        assert_eq!(p.eps, vec![0.3]);
        assert_eq!(p.space.labels()[2], "c");
    }

    #[test]
    fn field_sets_enforced() {
        let cfg = ProblemConfig::parse(TV).unwrap();
        let err = resolve(&cfg, Subcommand::Ipm, &Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("other"), "{err}");
        let mut extra = cfg.clone();
        extra.divergence = Some("kl".into());
        let err = resolve(&extra, Subcommand::DroSup, &Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("divergence"), "{err}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ProblemConfig::parse(&TV.replace("\"epsilon\"", "\"epsilonn\"")).is_err());
        assert!(ProblemConfig::parse(
            &TV.replace("\"schema_version\": 1", "\"schema_version\": 2")
        )
        .is_err());
        let bad = TV.replace(
            r#"{"points": ["a", "b", "c"]}"#,
            r#"{"points": 3, "metric": [[0,1,1],[1,0],[1,1,0]]}"#,
        );
        let cfg = ProblemConfig::parse(&bad).unwrap();
        let err = resolve(&cfg, Subcommand::DroSup, &Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        let unknown = TV.replace("\"reference\": \"p\"", "\"reference\": \"q\"");
        let cfg = ProblemConfig::parse(&unknown).unwrap();
        assert!(resolve(&cfg, Subcommand::DroSup, &Tolerances::default()).is_err());
    }

    #[test]
    fn epsilon_forms() {
        let r: EpsilonSpec =
            serde_json::from_str(r#"{"start": 0.1, "stop": 2.0, "count": 20}"#).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 20);
        assert!((v[1] - 0.2).abs() < 1e-15 && v[19] == 2.0);
        let g: EpsilonSpec = serde_json::from_str("[0.5, 1]").unwrap();
        assert_eq!(g.values(), vec![0.5, 1.0]);
        let c: ClassConfig =
            serde_json::from_str(r#"{"variant": "rkhs", "bandwidth": 1.0}"#).unwrap();
        assert!(matches!(
            c,
            ClassConfig::Rkhs {
                bandwidth: Some(_),
                gram: None
            }
        ));
        assert!(
            serde_json::from_str::<ClassConfig>(r#"{"variant": "fisher", "mu": "p", "x": 1}"#)
                .is_err()
        );
    }
}
