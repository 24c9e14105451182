use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Undirected weighted edge between two point indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// A metric pair that cannot be split through an intermediate point.
///
/// Lipschitz constraints on these pairs imply the constraints on every pair,
/// so transport and Lipschitz programs only need these as edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEdge {
    pub i: usize,
    pub j: usize,
    pub cost: f64,
}

/// Finite ground set with an optional ground metric and an optional graph.
#[derive(Debug)]
pub struct SampleSpace {
    labels: Vec<String>,
    metric: Option<Vec<f64>>,
    graph: Option<Vec<Edge>>,
    essential: OnceLock<Vec<MetricEdge>>,
}

impl PartialEq for SampleSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.metric == other.metric && self.graph == other.graph
    }
}

impl SampleSpace {
    /// Validates and builds a space. `metric` is an `n x n` matrix given by rows.
    pub fn new(
        labels: Vec<String>,
        metric: Option<Vec<Vec<f64>>>,
        graph: Option<Vec<Edge>>,
    ) -> Result<Self> {
        Self::with_tolerance(labels, metric, graph, 1e-12)
    }

    pub fn with_tolerance(
        labels: Vec<String>,
        metric: Option<Vec<Vec<f64>>>,
        graph: Option<Vec<Edge>>,
        triangle_tol: f64,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let metric = match metric {
            Some(rows) => Some(validate_metric(&rows, n, triangle_tol)?),
            None => None,
        };
        if let Some(edges) = &graph {
            for e in edges {
                if e.i >= n || e.j >= n {
                    return Err(Error::EdgeOutOfRange { i: e.i, j: e.j, n });
                }
                if e.i == e.j {
                    return Err(Error::SelfLoop { node: e.i });
                }
                if !(e.weight.is_finite() && e.weight > 0.0) {
                    return Err(Error::NonPositiveEdgeWeight {
                        i: e.i,
                        j: e.j,
                        weight: e.weight,
                    });
                }
            }
        }
        Ok(SampleSpace {
            labels,
            metric,
            graph,
            essential: OnceLock::new(),
        })
    }

    /// Points labelled `0..n` with no extra structure.
    pub fn unstructured(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), None, None)
    }

    /// Points at the given real coordinates with metric `|t_i - t_j|`.
    pub fn line(coords: &[f64]) -> Result<Self> {
        let labels = coords.iter().map(|t| format!("{t}")).collect();
        let metric = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
            .collect();
        Self::new(labels, Some(metric), None)
    }

    /// `n` points on a path: metric `|i - j|` and unit-weight edges between neighbours.
    pub fn path(n: usize) -> Result<Self> {
        let coords: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let labels = (0..n).map(|i| i.to_string()).collect();
        let metric = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
            .collect();
        let graph = (1..n)
            .map(|i| Edge {
                i: i - 1,
                j: i,
                weight: 1.0,
            })
            .collect();
        Self::new(labels, Some(metric), Some(graph))
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_metric(&self) -> bool {
        self.metric.is_some()
    }

    /// Ground cost between two points, if a metric is present.
    pub fn cost(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.len();
        self.metric.as_ref().map(|m| m[i * n + j])
    }

    /// Row-major metric matrix.
    pub fn metric(&self) -> Option<&[f64]> {
        self.metric.as_deref()
    }

    pub fn graph(&self) -> Option<&[Edge]> {
        self.graph.as_deref()
    }

    /// True when the graph is present and connected (a single point counts).
    pub fn graph_connected(&self) -> bool {
        match &self.graph {
            Some(edges) => components(self.len(), edges.iter().map(|e| (e.i, e.j))) == 1,
            None => false,
        }
    }

    /// Metric pairs `i < j` admitting no intermediate `k` with
    /// `c(i,k) + c(k,j) <= c(i,j)` up to a relative `1e-12`.
    ///
    /// On a 1-D grid these are exactly the neighbouring pairs.
    pub fn essential_edges(&self) -> Option<&[MetricEdge]> {
        let metric = self.metric.as_ref()?;
        let n = self.len();
        Some(self.essential.get_or_init(|| {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    let cij = metric[i * n + j];
                    let slack = 1e-12 * cij.max(1.0);
                    let split = (0..n).any(|k| {
                        k != i && k != j && metric[i * n + k] + metric[k * n + j] <= cij + slack
                    });
                    if !split {
                        edges.push(MetricEdge { i, j, cost: cij });
                    }
                }
            }
            edges
        }))
    }
}

fn validate_metric(rows: &[Vec<f64>], n: usize, tol: f64) -> Result<Vec<f64>> {
    if rows.len() != n {
        return Err(Error::dims("metric rows", n, rows.len()));
    }
    let mut m = Vec::with_capacity(n * n);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::dims(format!("metric row {r}"), n, row.len()));
        }
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("metric row {r}"),
                    index: c,
                });
            }
        }
        m.extend_from_slice(row);
    }
    for i in 0..n {
        if m[i * n + i] != 0.0 {
            return Err(Error::NonZeroDiagonal {
                i,
                value: m[i * n + i],
            });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (m[i * n + j], m[j * n + i]);
            if a != b {
                return Err(Error::AsymmetricMetric { i, j, a, b });
            }
            if a <= 0.0 {
                return Err(Error::NonPositiveDistance { i, j, value: a });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let direct = m[i * n + k];
                let detour = m[i * n + j] + m[j * n + k];
                if direct > detour + tol {
                    return Err(Error::TriangleInequalityViolated {
                        i,
                        j,
                        k,
                        direct,
                        detour,
                    });
                }
            }
        }
    }
    Ok(m)
}

/// Number of connected components via union-find.
pub(crate) fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut count = n;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
            count -= 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn path_metric_is_valid() {
        let m = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let s = SampleSpace::new(labels(3), Some(m), None).unwrap();
        assert_eq!(s.cost(0, 2), Some(2.0));
        let e = s.essential_edges().unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|e| e.j == e.i + 1));
    }

    #[test]
    fn triangle_violation_is_rejected() {
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        let err = SampleSpace::new(labels(3), Some(m), None).unwrap_err();
        assert!(matches!(err, Error::TriangleInequalityViolated { .. }));
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let m = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        let err = SampleSpace::new(labels(2), Some(m), None).unwrap_err();
        assert!(matches!(err, Error::AsymmetricMetric { .. }));
    }

    #[test]
    fn self_loop_is_rejected() {
        let g = vec![Edge {
            i: 1,
            j: 1,
            weight: 1.0,
        }];
        let err = SampleSpace::new(labels(2), None, Some(g)).unwrap_err();
        assert_eq!(err, Error::SelfLoop { node: 1 });
    }

    #[test]
    fn grid_for_sine_example() {
        let t: Vec<f64> = (0..201).map(|i| -4.0 + 8.0 * i as f64 / 200.0).collect();
        let s = SampleSpace::line(&t).unwrap();
        assert_eq!(s.len(), 201);
        assert_eq!(s.essential_edges().unwrap().len(), 200);
    }

    #[test]
    fn ragged_metric_names_row() {
        let m = vec![vec![0.0, 1.0], vec![1.0]];
        let err = SampleSpace::new(labels(2), Some(m), None).unwrap_err();
        assert!(err.to_string().contains("metric row 1"));
    }

    #[test]
    fn connectivity() {
        let s = SampleSpace::path(4).unwrap();
        assert!(s.graph_connected());
        let g = vec![Edge {
            i: 0,
            j: 1,
            weight: 1.0,
        }];
        let s = SampleSpace::new(labels(3), None, Some(g)).unwrap();
        assert!(!s.graph_connected());
    }
}
