use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::scalar::Scalar;

use super::LyapunovError;

/// `V_Q(x) = ½ xᵀ Q x` with `Q` symmetric positive definite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct QuadraticForm<T> {
    q: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<Vec<Vec<T>>> for QuadraticForm<T> {
    type Error = LyapunovError;

    fn try_from(q: Vec<Vec<T>>) -> Result<Self, Self::Error> {
        QuadraticForm::new(q)
    }
}

impl<T: Scalar> From<QuadraticForm<T>> for Vec<Vec<T>> {
    fn from(q: QuadraticForm<T>) -> Self {
        q.q
    }
}

impl<T: Scalar> QuadraticForm<T> {
    pub fn new(q: Vec<Vec<T>>) -> Result<Self, LyapunovError> {
        let n = q.len();
        if n == 0 || q.iter().any(|row| row.len() != n) {
            return Err(LyapunovError::DimensionMismatch {
                expected: n,
                found: q.first().map_or(0, |r| r.len()),
            });
        }
        let scale = q.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = T::lit(1e-12) * scale.max(T::one());
        for i in 0..n {
            for j in 0..i {
                if (q[i][j] - q[j][i]).abs() > tol {
                    return Err(LyapunovError::NotSymmetric);
                }
            }
        }
        if cholesky(&q).is_none() {
            return Err(LyapunovError::NotPositiveDefinite);
        }
        Ok(QuadraticForm { q })
    }

    pub fn identity(n: usize) -> Self {
        let q = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        QuadraticForm { q }
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn value(&self, x: &Point<T>) -> T {
        T::lit(0.5) * x.dot(&self.gradient(x))
    }

    /// `Q x`.
    pub fn gradient(&self, x: &Point<T>) -> Vec<T> {
        self.q.iter().map(|row| x.dot(row)).collect()
    }
}

fn cholesky<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: T = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > T::zero()) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}
