use crate::geometry::Point;
use crate::scalar::Scalar;

use super::{DynamicsError, VectorField};

/// Classical fourth-order Runge–Kutta integration from `x0`, sampled every `dt`
/// up to `t_end`. The returned path starts with `x0`.
pub fn simulate_trajectory<T: Scalar, F: VectorField<T> + ?Sized>(
    field: &F,
    x0: &Point<T>,
    dt: T,
    t_end: T,
) -> Result<Vec<Point<T>>, DynamicsError> {
    if !(dt > T::zero()) || !(t_end > dt) {
        return Err(DynamicsError::InvalidStep);
    }
    if x0.dim() != field.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: field.dim(),
            found: x0.dim(),
        });
    }
    let steps = (t_end / dt).round().to_usize().ok_or(DynamicsError::InvalidStep)?;
    let half = T::lit(0.5);
    let sixth = T::lit(1.0 / 6.0);
    let two = T::lit(2.0);
    let mut path = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    path.push(x.clone());
    for step in 1..=steps {
        let k1 = field.eval(&x);
        let k2 = field.eval(&x.add(&k1.scaled(half * dt)));
        let k3 = field.eval(&x.add(&k2.scaled(half * dt)));
        let k4 = field.eval(&x.add(&k3.scaled(dt)));
        let incr = k1.add(&k2.scaled(two)).add(&k3.scaled(two)).add(&k4);
        x = x.add(&incr.scaled(dt * sixth));
        if !x.is_finite() {
            return Err(DynamicsError::Diverged { step });
        }
        path.push(x.clone());
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{pendulum, LinearField};

    #[test]
    fn linear_decay() {
        let f = LinearField::<f64>::contraction(2);
        let path = simulate_trajectory(&f, &Point::xy(1.0, 0.0), 0.01, 10.0).unwrap();
        assert_eq!(path.len(), 1001);
        assert!(path.last().unwrap().norm() <= (-10f64).exp() + 1e-4);
    }

    #[test]
    fn pendulum_converges() {
        let path = simulate_trajectory(&pendulum::<f64>(), &Point::xy(0.5, 0.5), 0.01, 20.0).unwrap();
        assert!(path.last().unwrap().norm() < 0.01);
    }

    #[test]
    fn fourth_order_convergence() {
        let f = pendulum::<f64>();
        let x0 = Point::xy(0.9, -0.7);
        let end = |dt: f64| simulate_trajectory(&f, &x0, dt, 2.0).unwrap().pop().unwrap();
        let (a, b, c) = (end(0.1), end(0.05), end(0.025));
        let ratio = a.dist(&b) / b.dist(&c);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_steps() {
        let f = pendulum::<f64>();
        assert_eq!(
            simulate_trajectory(&f, &Point::xy(0.0, 0.0), 0.0, 1.0),
            Err(DynamicsError::InvalidStep)
        );
        assert_eq!(
            simulate_trajectory(&f, &Point::xy(0.0, 0.0), 1.0, 0.5),
            Err(DynamicsError::InvalidStep)
        );
    }

    #[test]
    fn divergence_detected() {
        let f = crate::dynamics::FnField::new("square", 1, None, |x: &Point<f64>| Point::new(vec![x[0] * x[0]]));
        let r = simulate_trajectory(&f, &Point::new(vec![1.0]), 0.1, 50.0);
        assert!(matches!(r, Err(DynamicsError::Diverged { .. })));
    }
}
