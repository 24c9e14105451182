use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{matrix_from_rows, weighted_laplacian, QuadraticForm};

use super::distribution::{same_space, DiscreteDistribution, FunctionVec};
use super::space::SampleSpace;

/// Black-box penalty evaluator for [`ZetaBall`].
pub type ZetaFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Sublevel set `{h : zeta(h) <= 1}` of a positively homogeneous penalty.
#[derive(Clone)]
pub struct ZetaBall {
    name: String,
    zeta: ZetaFn,
    degree: f64,
    convex: bool,
}

impl fmt::Debug for ZetaBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZetaBall")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .field("convex", &self.convex)
            .finish()
    }
}

impl ZetaBall {
    pub fn new(name: impl Into<String>, zeta: ZetaFn, degree: f64, convex: bool) -> Result<Self> {
        if !(degree.is_finite() && degree > 0.0) {
            return Err(Error::InvalidDegree(degree));
        }
        Ok(ZetaBall {
            name: name.into(),
            zeta,
            degree,
            convex,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn convex(&self) -> bool {
        self.convex
    }

    pub fn eval(&self, h: &[f64]) -> f64 {
        (self.zeta)(h)
    }
}

/// Which of the supported function classes a [`FunctionClass`] is.
#[derive(Debug, Clone)]
pub enum ClassKind {
    /// Finite list of functions.
    Explicit(Vec<FunctionVec>),
    /// `{h : Lip_c(h) <= 1}` for the space metric.
    Lipschitz,
    /// `{h : |h|_inf <= 1}`.
    SupNorm,
    /// `{h : h^T K^{-1} h <= 1}` for a positive-definite Gram matrix `K`.
    Rkhs {
        gram: DMatrix<f64>,
        form: QuadraticForm,
    },
    /// `{h : E_mu[h^2] <= 1}`.
    Fisher {
        mu: DiscreteDistribution,
        form: QuadraticForm,
        allow_infinite: bool,
    },
    /// `{h : E_mu[|grad h|^2] <= 1}` with the graph gradient of the space.
    Sobolev {
        mu: DiscreteDistribution,
        form: QuadraticForm,
        allow_infinite: bool,
    },
    /// `{h : |h|_inf + Lip_c(h) <= 1}`.
    Dudley,
    /// `{h : zeta(h) <= 1}` for a caller-supplied homogeneous `zeta`.
    Zeta(ZetaBall),
}

/// A discriminator / test-function set on a sample space.
#[derive(Debug, Clone)]
pub struct FunctionClass {
    space: Arc<SampleSpace>,
    kind: ClassKind,
}

/// Outcome of [`symmetrize_class`].
#[derive(Debug, Clone)]
pub struct Symmetrized {
    pub class: FunctionClass,
    /// Set when the input was a structured ball, which is already even.
    pub already_even: bool,
}

impl FunctionClass {
    pub fn explicit(space: Arc<SampleSpace>, functions: Vec<FunctionVec>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::EmptyClass);
        }
        for f in &functions {
            f.check_space(&space)?;
        }
        Ok(FunctionClass {
            space,
            kind: ClassKind::Explicit(functions),
        })
    }

    /// Explicit class from raw value vectors.
    pub fn explicit_from_values(space: Arc<SampleSpace>, values: Vec<Vec<f64>>) -> Result<Self> {
        let functions = values
            .into_iter()
            .map(|v| FunctionVec::new(space.clone(), v))
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(space, functions)
    }

    pub fn lipschitz(space: Arc<SampleSpace>) -> Result<Self> {
        if !space.has_metric() {
            return Err(Error::MissingMetric("Lipschitz"));
        }
        Ok(FunctionClass {
            space,
            kind: ClassKind::Lipschitz,
        })
    }

    pub fn sup_norm(space: Arc<SampleSpace>) -> Self {
        FunctionClass {
            space,
            kind: ClassKind::SupNorm,
        }
    }

    pub fn dudley(space: Arc<SampleSpace>) -> Result<Self> {
        if !space.has_metric() {
            return Err(Error::MissingMetric("Dudley"));
        }
        Ok(FunctionClass {
            space,
            kind: ClassKind::Dudley,
        })
    }

    /// RKHS unit ball of a Gram matrix given by rows.
    pub fn rkhs(space: Arc<SampleSpace>, gram: &[Vec<f64>]) -> Result<Self> {
        let k = matrix_from_rows(gram, space.len(), "Gram matrix")?;
        let form = QuadraticForm::inverse_of_gram(&k, 1e-10)?;
        Ok(FunctionClass {
            space,
            kind: ClassKind::Rkhs { gram: k, form },
        })
    }

    /// Gaussian kernel `exp(-c(i,j)^2 / (2 sigma^2))` on the space metric.
    pub fn gaussian_rkhs(space: Arc<SampleSpace>, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel bandwidth must be positive, got {bandwidth}"
            )));
        }
        let n = space.len();
        let metric = space
            .metric()
            .ok_or(Error::MissingMetric("Gaussian RKHS"))?;
        let gram: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = metric[i * n + j];
                        (-c * c / (2.0 * bandwidth * bandwidth)).exp()
                    })
                    .collect()
            })
            .collect();
        Self::rkhs(space, &gram)
    }

    /// Fisher ball of a reference measure. Zero-mass points are rejected
    /// unless `allow_infinite`, in which case distances that charge them are `+inf`.
    pub fn fisher(mu: DiscreteDistribution, allow_infinite: bool) -> Result<Self> {
        if !allow_infinite {
            if let Some(index) = mu.weights().iter().position(|&w| w == 0.0) {
                return Err(Error::ZeroMassPoint { index });
            }
        }
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(mu.weights()));
        let form = QuadraticForm::from_psd(&a, 0.0)?;
        Ok(FunctionClass {
            space: mu.space().clone(),
            kind: ClassKind::Fisher {
                mu,
                form,
                allow_infinite,
            },
        })
    }

    /// Sobolev ball on the space graph, weighted by a reference measure.
    pub fn sobolev(mu: DiscreteDistribution, allow_infinite: bool) -> Result<Self> {
        let space = mu.space().clone();
        let graph = space.graph().ok_or(Error::MissingGraph("Sobolev"))?;
        if !space.graph_connected() {
            return Err(Error::GraphDisconnected);
        }
        if !allow_infinite {
            if let Some(index) = mu.weights().iter().position(|&w| w == 0.0) {
                return Err(Error::ZeroMassPoint { index });
            }
        }
        let edges: Vec<(usize, usize, f64)> = graph.iter().map(|e| (e.i, e.j, e.weight)).collect();
        let l = weighted_laplacian(space.len(), &edges, mu.weights());
        let form = QuadraticForm::from_psd(&l, 1e-10)?;
        Ok(FunctionClass {
            space,
            kind: ClassKind::Sobolev {
                mu,
                form,
                allow_infinite,
            },
        })
    }

    /// Sublevel set of `zeta`. Homogeneity is spot-checked on 16 random pairs.
    pub fn zeta(space: Arc<SampleSpace>, ball: ZetaBall) -> Result<Self> {
        let n = space.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2e7a);
        for _ in 0..16 {
            let h: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let a = 10f64.powf(rng.random_range(-1.0..1.0));
            let base = ball.eval(&h);
            if base < 0.0 {
                return Err(Error::NegativeZeta(base));
            }
            let scaled_h: Vec<f64> = h.iter().map(|v| a * v).collect();
            let scaled = ball.eval(&scaled_h);
            let expected = a.powf(ball.degree) * base;
            if (scaled - expected).abs() > 1e-9 * expected.abs().max(1e-12) {
                return Err(Error::NotHomogeneous {
                    degree: ball.degree,
                    a,
                    scaled,
                    expected,
                });
            }
        }
        Ok(FunctionClass {
            space,
            kind: ClassKind::Zeta(ball),
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn kind(&self) -> &ClassKind {
        &self.kind
    }

    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            ClassKind::Explicit(_) => "explicit",
            ClassKind::Lipschitz => "lipschitz",
            ClassKind::SupNorm => "sup_norm",
            ClassKind::Rkhs { .. } => "rkhs",
            ClassKind::Fisher { .. } => "fisher",
            ClassKind::Sobolev { .. } => "sobolev",
            ClassKind::Dudley => "dudley",
            ClassKind::Zeta(_) => "zeta",
        }
    }

    pub fn members(&self) -> Option<&[FunctionVec]> {
        match &self.kind {
            ClassKind::Explicit(fs) => Some(fs),
            _ => None,
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.kind, ClassKind::Explicit(_))
    }

    /// The quadratic penalty form for the RKHS, Fisher and Sobolev balls.
    pub fn quadratic_form(&self) -> Option<&QuadraticForm> {
        match &self.kind {
            ClassKind::Rkhs { form, .. }
            | ClassKind::Fisher { form, .. }
            | ClassKind::Sobolev { form, .. } => Some(form),
            _ => None,
        }
    }

    /// Closed-form gauge of a structured ball at `h`; `None` for explicit sets.
    ///
    /// For a non-convex zeta this is only an upper bound on the gauge.
    pub fn penalty(&self, h: &[f64]) -> Option<f64> {
        let space = &self.space;
        Some(match &self.kind {
            ClassKind::Explicit(_) => return None,
            ClassKind::Lipschitz => lipschitz_constant(space, h),
            ClassKind::SupNorm => sup_norm(h),
            ClassKind::Rkhs { form, .. } => form.norm(h),
            ClassKind::Fisher { mu, .. } => mu
                .weights()
                .iter()
                .zip(h)
                .map(|(m, v)| m * v * v)
                .sum::<f64>()
                .sqrt(),
            ClassKind::Sobolev { mu, .. } => sobolev_energy(space, mu.weights(), h).sqrt(),
            ClassKind::Dudley => sup_norm(h) + lipschitz_constant(space, h),
            ClassKind::Zeta(z) => z.eval(h).max(0.0).powf(1.0 / z.degree),
        })
    }

    /// True when the class is closed under negation (exactly, up to round-off for explicit sets).
    pub fn contains_negations(&self) -> bool {
        match &self.kind {
            ClassKind::Explicit(fs) => fs.iter().all(|f| {
                fs.iter().any(|g| {
                    f.values()
                        .iter()
                        .zip(g.values())
                        .all(|(a, b)| (a + b).abs() <= 1e-12 * (1.0 + a.abs()))
                })
            }),
            ClassKind::Zeta(_) => false,
            _ => true,
        }
    }
}

pub(crate) fn sup_norm(h: &[f64]) -> f64 {
    h.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Lipschitz constant of `h` with respect to the space metric (0 without one
/// point pair). Only non-decomposable pairs are scanned.
pub fn lipschitz_constant(space: &SampleSpace, h: &[f64]) -> f64 {
    let edges = space
        .essential_edges()
        .expect("Lipschitz constant needs a metric");
    edges
        .iter()
        .map(|e| (h[e.i] - h[e.j]).abs() / e.cost)
        .fold(0.0, f64::max)
}

fn sobolev_energy(space: &SampleSpace, mu: &[f64], h: &[f64]) -> f64 {
    space
        .graph()
        .map(|g| {
            g.iter()
                .map(|e| {
                    let d = h[e.i] - h[e.j];
                    e.weight * (mu[e.i] + mu[e.j]) * d * d
                })
                .sum()
        })
        .unwrap_or(0.0)
}

/// Closes an explicit class under negation, dropping exact duplicates.
/// Structured balls are returned unchanged and flagged as already even.
pub fn symmetrize_class(class: &FunctionClass) -> Result<Symmetrized> {
    match &class.kind {
        ClassKind::Explicit(fs) => {
            let mut out: Vec<FunctionVec> = Vec::with_capacity(2 * fs.len());
            let mut push = |f: FunctionVec| {
                // canonicalise -0.0 so it compares equal to 0.0
                let f = FunctionVec::from_raw(
                    f.space().clone(),
                    f.values().iter().map(|&v| v + 0.0).collect(),
                );
                if !out.iter().any(|g| g.values() == f.values()) {
                    out.push(f);
                }
            };
            for f in fs {
                push(f.clone());
                push(f.negated());
            }
            Ok(Symmetrized {
                class: FunctionClass::explicit(class.space.clone(), out)?,
                already_even: false,
            })
        }
        ClassKind::Zeta(_) => Err(Error::UnsupportedVariant {
            op: "symmetrize_class",
            variant: "zeta",
        }),
        _ => Ok(Symmetrized {
            class: class.clone(),
            already_even: true,
        }),
    }
}

pub(crate) fn check_same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}
