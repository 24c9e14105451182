//! Python bindings: worst-case expectations, penalties and the batch CLI.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ipmdro::dro::{verify_identity as verify, worst_case_expectation};
use ipmdro::ipm::ipm_distance as distance;
use ipmdro::penalties::{centered_theta as centered, lambda_penalty as lambda};
use ipmdro::{
    symmetrize_class, DiscreteDistribution, Error, FunctionClass, FunctionVec, SampleSpace,
    Tolerances,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NumericalBreakdown(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Class description shared by every binding.
#[derive(Debug, Clone, Default)]
pub struct ClassSpec {
    pub kind: String,
    pub members: Option<Vec<Vec<f64>>>,
    pub coordinates: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub gram: Option<Vec<Vec<f64>>>,
    pub bandwidth: Option<f64>,
}

impl ClassSpec {
    pub fn space(&self, n: usize) -> Result<Arc<SampleSpace>, Error> {
        let space = match (&self.coordinates, self.kind.as_str()) {
            (Some(t), _) => {
                if t.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "coordinates".into(),
                        expected: n,
                        got: t.len(),
                    });
                }
                if self.kind == "sobolev" {
                    let path = SampleSpace::path(n)?;
                    let metric = t
                        .iter()
                        .map(|a| t.iter().map(|b| (a - b).abs()).collect())
                        .collect();
                    SampleSpace::new(
                        path.labels().to_vec(),
                        Some(metric),
                        path.graph().map(|g| g.to_vec()),
                    )?
                } else {
                    SampleSpace::line(t)?
                }
            }
            (None, "sobolev") => SampleSpace::path(n)?,
            (None, _) => SampleSpace::unstructured(n)?,
        };
        Ok(Arc::new(space))
    }

    pub fn build(&self, space: &Arc<SampleSpace>) -> Result<FunctionClass, Error> {
        let mu = || -> Result<DiscreteDistribution, Error> {
            let w = self
                .mu
                .clone()
                .ok_or_else(|| Error::InvalidArgument(format!("{} needs mu", self.kind)))?;
            DiscreteDistribution::new(space.clone(), w)
        };
        match self.kind.as_str() {
            "explicit" | "explicit_even" => {
                let m = self
                    .members
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("explicit class needs members".into()))?;
                let class = FunctionClass::explicit_from_values(space.clone(), m)?;
                if self.kind == "explicit_even" {
                    Ok(symmetrize_class(&class)?.class)
                } else {
                    Ok(class)
                }
            }
            "sup_norm" => Ok(FunctionClass::sup_norm(space.clone())),
            "lipschitz" => FunctionClass::lipschitz(space.clone()),
            "dudley" => FunctionClass::dudley(space.clone()),
            "fisher" => FunctionClass::fisher(mu()?, false),
            "sobolev" => FunctionClass::sobolev(mu()?, false),
            "rkhs" => match (&self.gram, self.bandwidth) {
                (Some(g), None) => FunctionClass::rkhs(space.clone(), g),
                (None, Some(s)) => FunctionClass::gaussian_rkhs(space.clone(), s),
                _ => Err(Error::InvalidArgument(
                    "rkhs needs exactly one of gram or bandwidth".into(),
                )),
            },
            other => Err(Error::InvalidArgument(format!("unknown class {other:?}"))),
        }
    }
}

struct Problem {
    space: Arc<SampleSpace>,
    class: FunctionClass,
    tol: Tolerances,
}

fn problem(n: usize, spec: ClassSpec) -> PyResult<Problem> {
    let space = spec.space(n).map_err(py_err)?;
    let class = spec.build(&space).map_err(py_err)?;
    Ok(Problem {
        space,
        class,
        tol: Tolerances::default(),
    })
}

impl Problem {
    fn dist(&self, w: Vec<f64>) -> PyResult<DiscreteDistribution> {
        DiscreteDistribution::new(self.space.clone(), w).map_err(py_err)
    }

    fn func(&self, v: Vec<f64>) -> PyResult<FunctionVec> {
        FunctionVec::new(self.space.clone(), v).map_err(py_err)
    }
}

macro_rules! spec {
    ($cls:expr, $members:expr, $coordinates:expr, $mu:expr, $gram:expr, $bandwidth:expr) => {
        ClassSpec {
            kind: $cls.to_string(),
            members: $members,
            coordinates: $coordinates,
            mu: $mu,
            gram: $gram,
            bandwidth: $bandwidth,
        }
    };
}

/// `sup E_Q[h]` over the ball of radius `eps` around `p`; returns `(value, worst_q)`.
#[pyfunction]
#[pyo3(signature = (p, h, eps, cls = "sup_norm", members = None, coordinates = None, mu = None, gram = None, bandwidth = None))]
#[allow(clippy::too_many_arguments)]
fn worst_case(
    p: Vec<f64>,
    h: Vec<f64>,
    eps: f64,
    cls: &str,
    members: Option<Vec<Vec<f64>>>,
    coordinates: Option<Vec<f64>>,
    mu: Option<Vec<f64>>,
    gram: Option<Vec<Vec<f64>>>,
    bandwidth: Option<f64>,
) -> PyResult<(f64, Vec<f64>)> {
    let pr = problem(
        p.len(),
        spec!(cls, members, coordinates, mu, gram, bandwidth),
    )?;
    let r = worst_case_expectation(&pr.dist(p)?, &pr.class, eps, &pr.func(h)?, &pr.tol)
        .map_err(py_err)?;
    Ok((r.value, r.worst_q.weights().to_vec()))
}

/// Penalty value whose sum with `E_P[h]` equals the worst case.
#[pyfunction]
#[pyo3(signature = (p, h, eps, cls = "sup_norm", members = None, coordinates = None, mu = None, gram = None, bandwidth = None))]
#[allow(clippy::too_many_arguments)]
fn lambda_penalty(
    p: Vec<f64>,
    h: Vec<f64>,
    eps: f64,
    cls: &str,
    members: Option<Vec<Vec<f64>>>,
    coordinates: Option<Vec<f64>>,
    mu: Option<Vec<f64>>,
    gram: Option<Vec<Vec<f64>>>,
    bandwidth: Option<f64>,
) -> PyResult<f64> {
    let pr = problem(
        p.len(),
        spec!(cls, members, coordinates, mu, gram, bandwidth),
    )?;
    Ok(lambda(&pr.dist(p)?, &pr.class, eps, &pr.func(h)?, &pr.tol)
        .map_err(py_err)?
        .value)
}

/// Both sides of the worst-case identity as a dict.
#[pyfunction]
#[pyo3(signature = (p, h, eps, cls = "sup_norm", members = None, coordinates = None, mu = None, gram = None, bandwidth = None))]
#[allow(clippy::too_many_arguments)]
fn verify_identity<'py>(
    py: Python<'py>,
    p: Vec<f64>,
    h: Vec<f64>,
    eps: f64,
    cls: &str,
    members: Option<Vec<Vec<f64>>>,
    coordinates: Option<Vec<f64>>,
    mu: Option<Vec<f64>>,
    gram: Option<Vec<Vec<f64>>>,
    bandwidth: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let pr = problem(
        p.len(),
        spec!(cls, members, coordinates, mu, gram, bandwidth),
    )?;
    let r = verify(&pr.dist(p)?, &pr.class, eps, &pr.func(h)?, &pr.tol).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("lhs", r.lhs)?;
    d.set_item("e_p_h", r.e_p_h)?;
    d.set_item("lambda", r.lambda_value)?;
    d.set_item("residual", r.residual)?;
    d.set_item("exact", r.exact)?;
    d.set_item("gap_estimate", r.gap_estimate)?;
    Ok(d)
}

/// `d_F(q, p) = sup_f E_q[f] - E_p[f]`.
#[pyfunction]
#[pyo3(signature = (q, p, cls = "sup_norm", members = None, coordinates = None, mu = None, gram = None, bandwidth = None))]
#[allow(clippy::too_many_arguments)]
fn ipm_distance(
    q: Vec<f64>,
    p: Vec<f64>,
    cls: &str,
    members: Option<Vec<Vec<f64>>>,
    coordinates: Option<Vec<f64>>,
    mu: Option<Vec<f64>>,
    gram: Option<Vec<Vec<f64>>>,
    bandwidth: Option<f64>,
) -> PyResult<f64> {
    let pr = problem(
        p.len(),
        spec!(cls, members, coordinates, mu, gram, bandwidth),
    )?;
    Ok(distance(&pr.class, &pr.dist(q)?, &pr.dist(p)?, &pr.tol)
        .map_err(py_err)?
        .value)
}

/// `(b, inf_b Theta(h - b))`.
#[pyfunction]
#[pyo3(signature = (h, cls = "sup_norm", members = None, coordinates = None, mu = None, gram = None, bandwidth = None))]
fn centered_theta(
    h: Vec<f64>,
    cls: &str,
    members: Option<Vec<Vec<f64>>>,
    coordinates: Option<Vec<f64>>,
    mu: Option<Vec<f64>>,
    gram: Option<Vec<Vec<f64>>>,
    bandwidth: Option<f64>,
) -> PyResult<(f64, f64)> {
    let pr = problem(
        h.len(),
        spec!(cls, members, coordinates, mu, gram, bandwidth),
    )?;
    let (b, v) = centered(&pr.class, &pr.func(h)?, &pr.tol).map_err(py_err)?;
    Ok((b, v.value))
}

/// Runs the batch CLI with `args` (without the program name); returns the exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    ipmdro::cli::main_with_args(std::iter::once("ipmdro".to_string()).chain(args))
}

#[pymodule]
fn ipmdro_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(worst_case, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_penalty, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identity, m)?)?;
    m.add_function(wrap_pyfunction!(ipm_distance, m)?)?;
    m.add_function(wrap_pyfunction!(centered_theta, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_builds_every_kind() {
        let base = ClassSpec {
            coordinates: Some(vec![0.0, 1.0, 2.5]),
            mu: Some(vec![0.2, 0.3, 0.5]),
            members: Some(vec![vec![1.0, 0.0, -1.0]]),
            ..ClassSpec::default()
        };
        for kind in [
            "explicit",
            "explicit_even",
            "sup_norm",
            "lipschitz",
            "dudley",
            "fisher",
            "sobolev",
        ] {
            let s = ClassSpec {
                kind: kind.into(),
                ..base.clone()
            };
            let space = s.space(3).unwrap();
            s.build(&space).unwrap_or_else(|e| panic!("{kind}: {e}"));
        }
        let rkhs = ClassSpec {
            kind: "rkhs".into(),
            bandwidth: Some(1.0),
            ..base.clone()
        };
        assert!(rkhs.build(&rkhs.space(3).unwrap()).is_ok());
        let bad = ClassSpec {
            kind: "nope".into(),
            ..base
        };
        assert!(bad.build(&bad.space(3).unwrap()).is_err());
    }
}
