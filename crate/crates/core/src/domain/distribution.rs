use std::sync::Arc;

use crate::error::{Error, Result};

use super::space::SampleSpace;

pub(crate) fn same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Probability vector on a sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    space: Arc<SampleSpace>,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(space: Arc<SampleSpace>, weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(space, weights, 1e-12)
    }

    pub fn with_tolerance(
        space: Arc<SampleSpace>,
        weights: Vec<f64>,
        sum_tol: f64,
    ) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::dims(
                "distribution weights",
                space.len(),
                weights.len(),
            ));
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    what: "distribution weights".into(),
                    index,
                });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > sum_tol {
            return Err(Error::NotNormalized { sum });
        }
        Ok(DiscreteDistribution { space, weights })
    }

    /// Builds a distribution from a vector that is a probability vector up to
    /// solver round-off: tiny negatives are clipped and the sum renormalised.
    pub(crate) fn from_solver(space: Arc<SampleSpace>, mut weights: Vec<f64>) -> Self {
        for w in &mut weights {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let s: f64 = weights.iter().sum();
        if s > 0.0 {
            weights.iter_mut().for_each(|w| *w /= s);
        }
        DiscreteDistribution { space, weights }
    }

    pub fn uniform(space: Arc<SampleSpace>) -> Self {
        let n = space.len();
        DiscreteDistribution {
            weights: vec![1.0 / n as f64; n],
            space,
        }
    }

    pub fn point_mass(space: Arc<SampleSpace>, index: usize) -> Result<Self> {
        if index >= space.len() {
            return Err(Error::InvalidArgument(format!(
                "point {index} outside space of size {}",
                space.len()
            )));
        }
        let mut weights = vec![0.0; space.len()];
        weights[index] = 1.0;
        Ok(DiscreteDistribution { space, weights })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `E[h]` under this distribution.
    pub fn expect(&self, h: &FunctionVec) -> Result<f64> {
        self.check_space(h.space())?;
        Ok(dot(&self.weights, h.values()))
    }

    pub fn has_full_support(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    pub(crate) fn check_space(&self, other: &Arc<SampleSpace>) -> Result<()> {
        if same_space(&self.space, other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Real-valued function on a sample space, stored pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionVec {
    space: Arc<SampleSpace>,
    values: Vec<f64>,
}

impl FunctionVec {
    pub fn new(space: Arc<SampleSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::dims("function values", space.len(), values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "function values".into(),
                index,
            });
        }
        Ok(FunctionVec { space, values })
    }

    pub fn constant(space: Arc<SampleSpace>, c: f64) -> Self {
        FunctionVec {
            values: vec![c; space.len()],
            space,
        }
    }

    pub fn from_fn(space: Arc<SampleSpace>, f: impl FnMut(usize) -> f64) -> Result<Self> {
        let values = (0..space.len()).map(f).collect();
        Self::new(space, values)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn shifted(&self, b: f64) -> Self {
        self.map(|v| v + b)
    }

    pub fn negated(&self) -> Self {
        self.map(|v| -v)
    }

    /// Pointwise sum; panics if the spaces differ in size.
    pub fn add(&self, other: &FunctionVec) -> Self {
        assert_eq!(self.len(), other.len());
        FunctionVec {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &FunctionVec) -> Self {
        self.add(&other.negated())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        FunctionVec {
            space: self.space.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn check_space(&self, other: &Arc<SampleSpace>) -> Result<()> {
        if same_space(&self.space, other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub(crate) fn from_raw(space: Arc<SampleSpace>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), space.len());
        FunctionVec { space, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> Arc<SampleSpace> {
        Arc::new(SampleSpace::unstructured(n).unwrap())
    }

    #[test]
    fn rejects_bad_weights() {
        let s = space(3);
        assert!(matches!(
            DiscreteDistribution::new(s.clone(), vec![0.5, 0.6, -0.1]),
            Err(Error::NegativeWeight { index: 2, .. })
        ));
        assert!(matches!(
            DiscreteDistribution::new(s.clone(), vec![0.5, 0.6, 0.1]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(DiscreteDistribution::new(s, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn expectation() {
        let s = space(3);
        let p = DiscreteDistribution::uniform(s.clone());
        let h = FunctionVec::new(s, vec![0.0, 1.0, 2.0]).unwrap();
        assert!((p.expect(&h).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nan_function() {
        let s = space(2);
        assert!(FunctionVec::new(s, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn space_mismatch_detected() {
        let p = DiscreteDistribution::uniform(space(3));
        let h = FunctionVec::constant(space(4), 1.0);
        assert_eq!(p.expect(&h), Err(Error::SpaceMismatch));
    }
}
