use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{evaluate, VectorField};
use crate::geometry::{Point, Tessellation};
use crate::scalar::{Scalar, TOL_GEO};

use super::{pwa_interpolate, LyapunovError, PwaFunction, QuadraticForm};

/// Largest value of `∇V·f(x)` over `n_samples` points drawn uniformly (by
/// area) in the certified cells, using the true model `field`.
pub fn decrease_margin<T: Scalar, F: VectorField<T> + ?Sized>(
    v: &PwaFunction<T>,
    field: &F,
    n_samples: usize,
    seed: u64,
) -> Result<T, LyapunovError> {
    let tess = v.tess();
    if field.dim() != tess.dim() {
        return Err(LyapunovError::DimensionMismatch {
            expected: tess.dim(),
            found: field.dim(),
        });
    }
    let cells: Vec<usize> = (0..tess.num_cells()).filter(|&c| v.is_certified(c)).collect();
    if cells.is_empty() {
        return Err(LyapunovError::NoCertifiedCells);
    }
    let mut cumulative = Vec::with_capacity(cells.len());
    let mut total = 0.0;
    for &c in &cells {
        total += tess.cell_area(c).as_f64();
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::neg_infinity();
    for _ in 0..n_samples {
        let pick = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&w| w < pick).min(cells.len() - 1);
        let c = cells[idx];
        let x = interior_point(tess, c, &mut rng);
        let fx = evaluate(field, &x)?;
        worst = worst.max(fx.dot(&v.piece(c).g));
    }
    Ok(worst)
}

/// Uniform point of cell `c`, pulled towards the centroid so that it stays
/// at least `TOL_GEO` away from the facets.
fn interior_point<T: Scalar>(tess: &Tessellation<T>, c: usize, rng: &mut ChaCha8Rng) -> Point<T> {
    let (mut u, mut w): (f64, f64) = (rng.gen(), rng.gen());
    if u + w > 1.0 {
        u = 1.0 - u;
        w = 1.0 - w;
    }
    let [a, b, cc] = tess.cell_points(c);
    let p = a.add(&b.sub(a).scaled(T::lit(u))).add(&cc.sub(a).scaled(T::lit(w)));
    let centroid = tess.centroid(c);
    let inradius_ish = T::lit(2.0) * tess.cell_area(c) / (T::lit(3.0) * tess.cell_diameter(c));
    let shrink = (T::lit(2.0 * TOL_GEO) / inradius_ish).min(T::lit(0.5));
    p.lerp(&centroid, shrink)
}

/// Model-based existence check: interpolates `V_Q` on `tess` and tests the
/// Lipschitz decrease certificate `g_c·f(v) + M |g_c| h_c < 0` at every
/// vertex of every cell.
pub fn sanity_check<T: Scalar, F: VectorField<T> + ?Sized>(
    field: &F,
    q: &QuadraticForm<T>,
    tess: &Tessellation<T>,
) -> Result<(bool, PwaFunction<T>), LyapunovError> {
    if q.dim() != tess.dim() || field.dim() != tess.dim() {
        return Err(LyapunovError::DimensionMismatch {
            expected: tess.dim(),
            found: if q.dim() != tess.dim() { q.dim() } else { field.dim() },
        });
    }
    let m = field.lipschitz_bound().ok_or(LyapunovError::MissingLipschitz)?;
    let v = pwa_interpolate(|x| q.value(x), tess)?;
    let mut values = Vec::with_capacity(tess.vertices().len());
    for p in tess.vertices() {
        values.push(evaluate(field, p)?);
    }
    let mut ok = true;
    for (c, cell) in tess.cells().iter().enumerate() {
        let piece = v.piece(c);
        let slack = m * piece.grad_norm() * tess.cell_diameter(c);
        if cell.vertex_ids.iter().any(|&i| !(values[i].dot(&piece.g) + slack < T::zero())) {
            ok = false;
            break;
        }
    }
    Ok((ok, v))
}
