use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Tessellation};
use crate::scalar::{Scalar, TOL_GEO};

use super::DynamicsError;

/// One observation `(x_d, f_d)` of the vector field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub x: Point<T>,
    pub f: Point<T>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(x: Point<T>, f: Point<T>) -> Self {
        Sample { x, f }
    }

    /// Radius of the ball around `x` on which the sign information of `f`
    /// is guaranteed by the Lipschitz bound `m`.
    pub fn radius(&self, m: T) -> T {
        self.f.norm() / m
    }
}

/// A finite set of field samples together with the Lipschitz bound `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr<T>")]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Dataset<T> {
    samples: Vec<Sample<T>>,
    lipschitz: T,
}

#[derive(Deserialize)]
struct DatasetRepr<T> {
    samples: Vec<Sample<T>>,
    lipschitz: T,
}

impl<T: Scalar> TryFrom<DatasetRepr<T>> for Dataset<T> {
    type Error = DynamicsError;

    fn try_from(repr: DatasetRepr<T>) -> Result<Self, Self::Error> {
        Dataset::new(repr.samples, repr.lipschitz)
    }
}

impl<T: Scalar> Dataset<T> {
    /// Validates dimensions, finiteness and pairwise distinctness of the sample points.
    pub fn new(samples: Vec<Sample<T>>, lipschitz: T) -> Result<Self, DynamicsError> {
        if !(lipschitz > T::zero()) || !lipschitz.is_finite() {
            return Err(DynamicsError::InvalidLipschitz);
        }
        if let Some(first) = samples.first() {
            let n = first.x.dim();
            for (row, s) in samples.iter().enumerate() {
                if s.x.dim() != n || s.f.dim() != n {
                    return Err(DynamicsError::DimensionMismatch {
                        expected: n,
                        found: if s.x.dim() != n { s.x.dim() } else { s.f.dim() },
                    });
                }
                if !s.x.is_finite() || !s.f.is_finite() {
                    return Err(DynamicsError::NonFiniteSample { index: row });
                }
            }
        }
        if let Some((first, second)) = find_duplicate(&samples, T::lit(TOL_GEO)) {
            return Err(DynamicsError::DuplicateSample { first, second });
        }
        Ok(Dataset { samples, lipschitz })
    }

    pub fn empty(lipschitz: T) -> Result<Self, DynamicsError> {
        Dataset::new(Vec::new(), lipschitz)
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample<T>> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Ambient dimension, or `None` for an empty set.
    pub fn dim(&self) -> Option<usize> {
        self.samples.first().map(|s| s.x.dim())
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    /// Same samples with a different Lipschitz bound.
    pub fn with_lipschitz(self, lipschitz: T) -> Result<Self, DynamicsError> {
        Dataset::new(self.samples, lipschitz)
    }

    /// `r_d = |f_d| / M`.
    pub fn radius(&self, d: usize) -> T {
        self.samples[d].radius(self.lipschitz)
    }

    pub fn radii(&self) -> Vec<T> {
        (0..self.len()).map(|d| self.radius(d)).collect()
    }

    /// Keeps the samples selected by `keep`.
    pub fn filtered(&self, keep: impl Fn(&Sample<T>) -> bool) -> Self {
        Dataset {
            samples: self.samples.iter().filter(|s| keep(s)).cloned().collect(),
            lipschitz: self.lipschitz,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DynamicsError> {
        super::io::save_dataset(self, path)
    }

    pub fn load(path: impl AsRef<Path>, lipschitz: T) -> Result<Self, DynamicsError> {
        super::io::load_dataset(path, lipschitz)
    }
}

/// Returns the first pair of sample indices closer than `tol`.
pub(crate) fn find_duplicate<T: Scalar>(samples: &[Sample<T>], tol: T) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| {
        samples[a].x[0]
            .partial_cmp(&samples[b].x[0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut best: Option<(usize, usize)> = None;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if samples[j].x[0] - samples[i].x[0] > tol {
                break;
            }
            if samples[i].x.dist(&samples[j].x) <= tol {
                let pair = (i.min(j), i.max(j));
                if best.is_none_or(|b| pair < b) {
                    best = Some(pair);
                }
            }
        }
    }
    best
}

/// Result of the learnability test over the vertices of a tessellation.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport<T> {
    pub covered: bool,
    pub uncovered_vertices: Vec<usize>,
    /// `min_v max_d (r_d − |v − x_d|)`; strictly positive when covered.
    pub margin: T,
}

/// Checks that every tessellation vertex lies in the open ball
/// `B(x_d, |f_d| / M)` of at least one sample.
pub fn check_learnability<T: Scalar>(tess: &Tessellation<T>, data: &Dataset<T>) -> CoverageReport<T> {
    let radii = data.radii();
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| radii[b].partial_cmp(&radii[a]).unwrap().then(a.cmp(&b)));
    let mut uncovered = Vec::new();
    let mut margin = T::infinity();
    for (v, p) in tess.vertices().iter().enumerate() {
        let mut best = T::neg_infinity();
        for &d in &order {
            let gap = radii[d] - p.dist(&data.samples()[d].x);
            if gap > best {
                best = gap;
            }
        }
        if !(best > T::zero()) {
            uncovered.push(v);
        }
        margin = margin.min(best);
    }
    CoverageReport {
        covered: uncovered.is_empty(),
        uncovered_vertices: uncovered,
        margin,
    }
}
