//! Planar kernels on raw coordinate pairs: orientation, clipping and
//! convex-polygon differencing.

use crate::scalar::Scalar;

pub(crate) type P2<T> = [T; 2];

/// Twice the signed area of triangle `(o, a, b)`; positive when counter-clockwise.
pub(crate) fn orient<T: Scalar>(o: P2<T>, a: P2<T>, b: P2<T>) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub(crate) fn signed_area<T: Scalar>(poly: &[P2<T>]) -> T {
    if poly.len() < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc = acc + (a[0] * b[1] - a[1] * b[0]);
    }
    acc * T::lit(0.5)
}

pub(crate) fn dist2<T: Scalar>(a: P2<T>, b: P2<T>) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Outward unit normal and offset of the edge `a -> b` of a counter-clockwise polygon.
pub(crate) fn edge_halfplane<T: Scalar>(a: P2<T>, b: P2<T>) -> Option<(P2<T>, T)> {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let len = (dx * dx + dy * dy).sqrt();
    if len <= T::zero() {
        return None;
    }
    let n = [dy / len, -dx / len];
    Some((n, n[0] * a[0] + n[1] * a[1]))
}

/// Keeps the part of a convex polygon satisfying `n·x <= c`.
pub(crate) fn clip_halfplane<T: Scalar>(poly: &[P2<T>], n: P2<T>, c: T) -> Vec<P2<T>> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    if poly.is_empty() {
        return out;
    }
    let eval = |p: P2<T>| n[0] * p[0] + n[1] * p[1] - c;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let fa = eval(a);
        let fb = eval(b);
        if fa <= T::zero() {
            out.push(a);
        }
        if (fa < T::zero() && fb > T::zero()) || (fa > T::zero() && fb < T::zero()) {
            let t = fa / (fa - fb);
            out.push([a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]);
        }
    }
    dedup_ring(out)
}

fn dedup_ring<T: Scalar>(mut poly: Vec<P2<T>>) -> Vec<P2<T>> {
    let eps = T::lit(1e-15);
    poly.dedup_by(|a, b| (a[0] - b[0]).abs() <= eps && (a[1] - b[1]).abs() <= eps);
    while poly.len() > 1 {
        let first = poly[0];
        let last = poly[poly.len() - 1];
        if (first[0] - last[0]).abs() <= eps && (first[1] - last[1]).abs() <= eps {
            poly.pop();
        } else {
            break;
        }
    }
    poly
}

/// Minimum width of a convex polygon: the smallest, over its edges, of the
/// largest vertex distance to the edge's supporting line.
pub(crate) fn convex_width<T: Scalar>(poly: &[P2<T>]) -> T {
    if poly.len() < 3 {
        return T::zero();
    }
    let mut width = T::infinity();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let Some((n, c)) = edge_halfplane(a, b) else {
            continue;
        };
        let far = poly
            .iter()
            .map(|p| (n[0] * p[0] + n[1] * p[1] - c).abs())
            .fold(T::zero(), T::max);
        width = width.min(far);
    }
    if width.is_infinite() {
        T::zero()
    } else {
        width
    }
}

/// Convex pieces covering `piece \ cutter`, where `cutter` is given by its
/// halfplanes `n·x <= c`. The cutter is dilated by `tol`, and pieces no wider
/// than `tol` are dropped.
pub(crate) fn subtract_convex<T: Scalar>(
    piece: &[P2<T>],
    cutter: &[(P2<T>, T)],
    tol: T,
) -> Vec<Vec<P2<T>>> {
    let mut out = Vec::new();
    let mut rest = piece.to_vec();
    for &(n, c) in cutter {
        if rest.len() < 3 {
            break;
        }
        let outside = clip_halfplane(&rest, [-n[0], -n[1]], -(c + tol));
        if outside.len() >= 3 && convex_width(&outside) > tol {
            out.push(outside);
        }
        rest = clip_halfplane(&rest, n, c + tol);
    }
    out
}

/// Convex pieces of `pieces \ (union of cutters)`.
pub(crate) fn subtract_all<T: Scalar>(
    mut pieces: Vec<Vec<P2<T>>>,
    cutters: &[Vec<(P2<T>, T)>],
    tol: T,
) -> Vec<Vec<P2<T>>> {
    for cutter in cutters {
        if pieces.is_empty() {
            break;
        }
        pieces = pieces
            .iter()
            .flat_map(|p| subtract_convex(p, cutter, tol))
            .collect();
    }
    pieces
}

/// Intersection of two convex polygons (the second given by halfplanes).
pub(crate) fn intersect_convex<T: Scalar>(poly: &[P2<T>], clipper: &[(P2<T>, T)]) -> Vec<P2<T>> {
    let mut out = poly.to_vec();
    for &(n, c) in clipper {
        if out.len() < 3 {
            return Vec::new();
        }
        out = clip_halfplane(&out, n, c);
    }
    if out.len() < 3 {
        Vec::new()
    } else {
        out
    }
}

/// Halfplanes of a counter-clockwise convex polygon.
pub(crate) fn halfplanes<T: Scalar>(poly: &[P2<T>]) -> Vec<(P2<T>, T)> {
    (0..poly.len())
        .filter_map(|i| edge_halfplane(poly[i], poly[(i + 1) % poly.len()]))
        .collect()
}

/// Returns a positive value when `d` lies strictly inside the circumcircle of
/// the counter-clockwise triangle `(a, b, c)`.
pub(crate) fn in_circle(a: P2<f64>, b: P2<f64>, c: P2<f64>, d: P2<f64>) -> f64 {
    let adx = a[0] - d[0];
    let ady = a[1] - d[1];
    let bdx = b[0] - d[0];
    let bdy = b[1] - d[1];
    let cdx = c[0] - d[0];
    let cdy = c[1] - d[1];
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

/// Andrew's monotone chain. Returns the hull counter-clockwise without
/// collinear points; fewer than three points means a degenerate input.
pub(crate) fn monotone_chain<T: Scalar>(points: &[P2<T>], tol: T) -> Vec<P2<T>> {
    let mut pts: Vec<P2<T>> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });
    pts.dedup_by(|a, b| dist2(*a, *b) <= tol);
    if pts.len() < 3 {
        return pts;
    }
    // Collinearity threshold scaled by the point-set extent.
    let extent = dist2(pts[0], pts[pts.len() - 1]).max(T::one());
    let eps = tol * extent;
    let mut lower: Vec<P2<T>> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2<T>> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
