use crate::geometry::Point;
use crate::scalar::Scalar;

use super::DynamicsError;

/// Right-hand side `f` of `ẋ = f(x)`, available point-wise.
///
/// Implementations must be pure: the same input always yields the same output.
pub trait VectorField<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &Point<T>) -> Point<T>;

    /// A priori upper bound on the Lipschitz constant, when known.
    fn lipschitz_bound(&self) -> Option<T>;

    fn name(&self) -> &str;

    /// Box on which `lipschitz_bound` is claimed to hold.
    fn validity_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        None
    }
}

/// Evaluates `field` at `x`, rejecting dimension mismatches and non-finite output.
pub fn evaluate<T: Scalar, F: VectorField<T> + ?Sized>(field: &F, x: &Point<T>) -> Result<Point<T>, DynamicsError> {
    if x.dim() != field.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: field.dim(),
            found: x.dim(),
        });
    }
    if let Some((lo, hi)) = field.validity_box() {
        let outside = x.coords().iter().zip(lo.iter().zip(&hi)).any(|(v, (l, h))| v < l || v > h);
        if outside {
            log::trace!("{} evaluated outside its validity box", field.name());
        }
    }
    let fx = field.eval(x);
    if !fx.is_finite() {
        return Err(DynamicsError::NonFiniteValue);
    }
    Ok(fx)
}

/// Damped pendulum `(θ̇, ω̇) = (ω, −sin θ − 2ω)`.
#[derive(Clone, Debug)]
pub struct Pendulum<T> {
    lipschitz: T,
}

pub fn pendulum<T: Scalar>() -> Pendulum<T> {
    Pendulum { lipschitz: T::lit(2.5) }
}

impl<T: Scalar> VectorField<T> for Pendulum<T> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &Point<T>) -> Point<T> {
        let (theta, omega) = (x[0], x[1]);
        Point::xy(omega, -theta.sin() - T::lit(2.0) * omega)
    }

    fn lipschitz_bound(&self) -> Option<T> {
        Some(self.lipschitz)
    }

    fn name(&self) -> &str {
        "pendulum"
    }

    fn validity_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        Some((vec![-T::one(); 2], vec![T::one(); 2]))
    }
}

/// Van der Pol oscillator in reversed time, so the origin is stable:
/// `ẋ1 = −x2`, `ẋ2 = x1 − μ (1 − x1²) x2`.
#[derive(Clone, Debug)]
pub struct VanDerPol<T> {
    mu: T,
    lipschitz: T,
}

/// Reversed-time Van der Pol with `μ = 1`; `M = 3.2` on `[−1, 1]²`.
pub fn van_der_pol<T: Scalar>() -> VanDerPol<T> {
    VanDerPol {
        mu: T::one(),
        lipschitz: T::lit(3.2),
    }
}

impl<T: Scalar> VectorField<T> for VanDerPol<T> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &Point<T>) -> Point<T> {
        let (a, b) = (x[0], x[1]);
        Point::xy(-b, a - self.mu * (T::one() - a * a) * b)
    }

    fn lipschitz_bound(&self) -> Option<T> {
        Some(self.lipschitz)
    }

    fn name(&self) -> &str {
        "vanderpol"
    }

    fn validity_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        Some((vec![-T::one(); 2], vec![T::one(); 2]))
    }
}

/// Linear field `f(x) = A x`.
#[derive(Clone, Debug)]
pub struct LinearField<T> {
    matrix: Vec<Vec<T>>,
    lipschitz: T,
}

impl<T: Scalar> LinearField<T> {
    /// The Lipschitz bound is the Frobenius norm of `matrix`.
    pub fn new(matrix: Vec<Vec<T>>) -> Result<Self, DynamicsError> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|row| row.len() != n) {
            return Err(DynamicsError::DimensionMismatch {
                expected: n,
                found: matrix.first().map_or(0, |r| r.len()),
            });
        }
        let frob = matrix
            .iter()
            .flatten()
            .fold(T::zero(), |acc, a| acc + *a * *a)
            .sqrt();
        Ok(LinearField {
            matrix,
            lipschitz: frob.max(T::lit(1e-12)),
        })
    }

    /// `f(x) = −x`.
    pub fn contraction(dim: usize) -> Self {
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { -T::one() } else { T::zero() }).collect())
            .collect();
        LinearField {
            matrix,
            lipschitz: T::one(),
        }
    }
}

impl<T: Scalar> VectorField<T> for LinearField<T> {
    fn dim(&self) -> usize {
        self.matrix.len()
    }

    fn eval(&self, x: &Point<T>) -> Point<T> {
        Point::new(self.matrix.iter().map(|row| x.dot(row)).collect())
    }

    fn lipschitz_bound(&self) -> Option<T> {
        Some(self.lipschitz)
    }

    fn name(&self) -> &str {
        "linear"
    }
}

/// Field backed by a closure.
pub struct FnField<T, F> {
    dim: usize,
    f: F,
    lipschitz: Option<T>,
    name: String,
}

impl<T: Scalar, F: Fn(&Point<T>) -> Point<T> + Send + Sync> FnField<T, F> {
    pub fn new(name: impl Into<String>, dim: usize, lipschitz: Option<T>, f: F) -> Self {
        FnField {
            dim,
            f,
            lipschitz,
            name: name.into(),
        }
    }
}

impl<T: Scalar, F: Fn(&Point<T>) -> Point<T> + Send + Sync> VectorField<T> for FnField<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Point<T>) -> Point<T> {
        (self.f)(x)
    }

    fn lipschitz_bound(&self) -> Option<T> {
        self.lipschitz
    }

    fn name(&self) -> &str {
        &self.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectral_norm_2x2(m: [[f64; 2]; 2]) -> f64 {
        // sqrt of the largest eigenvalue of mᵀm
        let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
        let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
        let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
        let tr = a + d;
        let det = a * d - b * b;
        (0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt())).sqrt()
    }

    #[test]
    fn pendulum_values() {
        let f = pendulum::<f64>();
        assert_eq!(evaluate(&f, &Point::xy(0.0, 0.0)).unwrap(), Point::xy(0.0, 0.0));
        let v = evaluate(&f, &Point::xy(1.0, 0.0)).unwrap();
        assert_eq!(v[0], 0.0);
        assert!((v[1] + 0.841_470_984_807_896_5).abs() < 1e-15);
        assert_eq!(evaluate(&f, &Point::xy(0.0, 1.0)).unwrap(), Point::xy(1.0, -2.0));
    }

    #[test]
    fn pendulum_bound_dominates_jacobian_norm() {
        let m = pendulum::<f64>().lipschitz_bound().unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=200 {
            let theta = -1.0 + 2.0 * i as f64 / 200.0;
            worst = worst.max(spectral_norm_2x2([[0.0, 1.0], [-theta.cos(), -2.0]]));
        }
        assert!(worst < m, "jacobian norm {worst} vs M {m}");
    }

    #[test]
    fn van_der_pol_bound_dominates_jacobian_norm() {
        let m = van_der_pol::<f64>().lipschitz_bound().unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=100 {
            for j in 0..=100 {
                let a = -1.0 + 2.0 * i as f64 / 100.0;
                let b = -1.0 + 2.0 * j as f64 / 100.0;
                worst = worst.max(spectral_norm_2x2([[0.0, -1.0], [1.0 + 2.0 * a * b, -(1.0 - a * a)]]));
            }
        }
        assert!(worst < m, "jacobian norm {worst} vs M {m}");
    }

    #[test]
    fn linear_contraction() {
        let f = LinearField::<f64>::contraction(2);
        assert_eq!(evaluate(&f, &Point::xy(0.3, -0.4)).unwrap(), Point::xy(-0.3, 0.4));
        assert!(matches!(
            evaluate(&f, &Point::new(vec![1.0, 2.0, 3.0])),
            Err(DynamicsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_output_rejected() {
        let f = FnField::new("blowup", 1, None, |_x: &Point<f64>| Point::new(vec![f64::NAN]));
        assert!(matches!(
            evaluate(&f, &Point::new(vec![0.0])),
            Err(DynamicsError::NonFiniteValue)
        ));
    }

    #[test]
    fn generic_over_f32() {
        let f = pendulum::<f32>();
        let v = evaluate(&f, &Point::xy(1.0f32, 0.0)).unwrap();
        assert!((v[1] + 0.841_471).abs() < 1e-6);
    }
}
