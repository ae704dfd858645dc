use std::collections::BTreeMap;

use crate::geometry::plane::{halfplanes, intersect_convex, signed_area, subtract_all};
use crate::geometry::{Point, Polyunion};
use crate::scalar::{Scalar, TOL_GEO};

use super::{LyapunovError, PwaFunction};

/// Largest level `α` such that the sublevel set of `v` stays away from `∂X`
/// and from every uncertified cell, or `None` when that level does not
/// exceed the values on `∂A`.
///
/// Values are taken at vertices only: `v` is affine on each cell, so its
/// extrema over any union of faces are attained at vertices.
pub fn certified_level<T: Scalar>(
    v: &PwaFunction<T>,
    x: &Polyunion<T>,
    a: &Polyunion<T>,
) -> Result<Option<T>, LyapunovError> {
    level_with_barrier(v, x, a, None)
}

/// Like [`certified_level`], for a `V` whose uncertified cells are
/// covered by `c` wherever their decrease bound may fail.
///
/// Outside `c` every cell decreases, so only `∂X` bounds the level, and
/// `∂A` vertices buried inside `c` do not count towards the floor.
pub fn certified_level_outside<T: Scalar>(
    v: &PwaFunction<T>,
    x: &Polyunion<T>,
    a: &Polyunion<T>,
    c: &Polyunion<T>,
) -> Result<Option<T>, LyapunovError> {
    if c.dim() != v.tess().dim() {
        return Err(LyapunovError::DimensionMismatch {
            expected: v.tess().dim(),
            found: c.dim(),
        });
    }
    level_with_barrier(v, x, a, Some(c))
}

fn level_with_barrier<T: Scalar>(
    v: &PwaFunction<T>,
    x: &Polyunion<T>,
    a: &Polyunion<T>,
    region: Option<&Polyunion<T>>,
) -> Result<Option<T>, LyapunovError> {
    let tess = v.tess();
    if x.dim() != tess.dim() || a.dim() != tess.dim() {
        return Err(LyapunovError::DimensionMismatch {
            expected: tess.dim(),
            found: if x.dim() != tess.dim() { x.dim() } else { a.dim() },
        });
    }
    if v.num_certified() == 0 {
        return Err(LyapunovError::NoCertifiedCells);
    }
    let tol = T::lit(TOL_GEO);
    let verts = tess.vertices();
    let mut on_barrier = vec![false; verts.len()];
    for b in tess.boundary_vertices() {
        if !a.contains(&verts[b], tol) {
            on_barrier[b] = true;
        }
    }
    if region.is_none() {
        for (c, cell) in tess.cells().iter().enumerate() {
            if !v.is_certified(c) {
                for &i in &cell.vertex_ids {
                    on_barrier[i] = true;
                }
            }
        }
    }
    let mut alpha = T::infinity();
    let mut floor = T::neg_infinity();
    for (i, p) in verts.iter().enumerate() {
        let value = if region.is_some() { v.vertex_value(i) } else { v.certified_vertex_value(i) };
        let Some(val) = value else {
            continue;
        };
        if on_barrier[i] {
            alpha = alpha.min(val);
        }
        let buried = region.is_some_and(|c| c.contains(p, -tol));
        if a.contains(p, tol) && !buried {
            floor = floor.max(val);
        }
    }
    if !alpha.is_finite() || alpha <= floor {
        return Ok(None);
    }
    Ok(Some(alpha))
}

/// Strict sublevel set `{V < α}` extended over the holes of a patchy `V`:
/// points of `A` and of `C` are always inside, any other point of the mesh
/// is inside when every cell containing it gives `V < α`.
///
/// `C` is expected to cover each uncertified cell wherever its decrease
/// bound may fail, so outside `A ∪ C` the value of `V` is meaningful in
/// every cell.
#[derive(Clone, Copy, Debug)]
pub struct ExtendedSublevel<'a, T> {
    pub v: &'a PwaFunction<T>,
    pub alpha: T,
    pub a: &'a Polyunion<T>,
    pub c: &'a Polyunion<T>,
}

impl<'a, T: Scalar> ExtendedSublevel<'a, T> {
    pub fn new(v: &'a PwaFunction<T>, alpha: T, a: &'a Polyunion<T>, c: &'a Polyunion<T>) -> Self {
        ExtendedSublevel { v, alpha, a, c }
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        let tol = T::lit(TOL_GEO);
        if self.a.contains(p, tol) || self.c.contains(p, tol) {
            return true;
        }
        let owners = self.v.tess().cells_containing(p, tol);
        !owners.is_empty() && owners.iter().all(|&c| self.v.eval_in(c, p) < self.alpha)
    }

    /// Containment of a whole polyunion, see [`sublevel_contains`].
    pub fn contains_set(&self, s: &Polyunion<T>) -> bool {
        let h = s.diameter() / T::lit(50.0);
        for part in s.parts() {
            let verts = part.vertices();
            if verts.iter().any(|p| !self.contains(p)) {
                return false;
            }
            for i in 0..verts.len() {
                let (p, q) = (&verts[i], &verts[(i + 1) % verts.len()]);
                let steps = if h > T::zero() {
                    (T::lit(2.0) * p.dist(q) / h).ceil().to_usize().unwrap_or(1).max(1)
                } else {
                    1
                };
                for k in 1..steps {
                    if !self.contains(&p.lerp(q, T::lit(k as f64) / T::lit(steps as f64))) {
                        return false;
                    }
                }
            }
            if !part.is_degenerate() && !self.covers_part(part) {
                return false;
            }
        }
        true
    }

    /// Exact test over the cells: every cell piece of `part` outside `A ∪ C`
    /// must be certified with `V < α` at its corners.
    fn covers_part(&self, part: &crate::geometry::Polytope<T>) -> bool {
        let tol = T::lit(TOL_GEO);
        let clip = halfplanes(&part.ring());
        let holes: Vec<_> = self
            .a
            .parts()
            .iter()
            .chain(self.c.parts())
            .filter(|h| !h.is_degenerate())
            .map(|h| h.halfplanes())
            .collect();
        let (lo, hi) = part.bounds();
        let tess = self.v.tess();
        let mut covered = T::zero();
        for c in tess.cells_in_box([lo[0], lo[1]], [hi[0], hi[1]]) {
            let piece = intersect_convex(&tess.cell_ring(c), &clip);
            if piece.is_empty() {
                continue;
            }
            covered = covered + signed_area(&piece);
            let rest = subtract_all(vec![piece], &holes, tol);
            if rest.is_empty() {
                continue;
            }
            let ok = rest
                .iter()
                .flatten()
                .all(|q| self.v.eval_in(c, &Point::xy(q[0], q[1])) < self.alpha);
            if !ok {
                return false;
            }
        }
        // whatever the cells miss must lie in A ∪ C
        let gap = part.area() - covered;
        if gap > T::lit(1e-9) * part.area().max(T::one()) {
            let cells: Vec<_> = tess.cells_in_box([lo[0], lo[1]], [hi[0], hi[1]]);
            let mut cutters = holes.clone();
            cutters.extend(cells.iter().map(|&c| halfplanes(&tess.cell_ring(c))));
            if !subtract_all(vec![part.ring()], &cutters, tol).is_empty() {
                return false;
            }
        }
        true
    }
}

/// Whether `s` lies inside the extended sublevel set of `v` at `alpha`.
///
/// Tests every vertex of `s` and a midpoint-refined boundary sampling at
/// spacing `diam(s)/50`, then decides exactly on the cells: each cell
/// clipped to a convex part of `s`, minus `A ∪ C`, is split into convex
/// pieces whose corners must satisfy `V < α` (`V` is affine on each piece).
/// Parts of `s` not covered by cells must lie in `A ∪ C`.
pub fn sublevel_contains<T: Scalar>(
    v: &PwaFunction<T>,
    alpha: T,
    s: &Polyunion<T>,
    a: &Polyunion<T>,
    c: &Polyunion<T>,
) -> Result<bool, LyapunovError> {
    let n = v.tess().dim();
    for dim in [s.dim(), a.dim(), c.dim()] {
        if dim != n {
            return Err(LyapunovError::DimensionMismatch { expected: n, found: dim });
        }
    }
    Ok(ExtendedSublevel::new(v, alpha, a, c).contains_set(s))
}

/// Segments of `{V = α}` over the certified cells, obtained by linear
/// interpolation along cell edges. Each segment is tagged with the two mesh
/// edges it joins.
pub fn level_set_segments<T: Scalar>(v: &PwaFunction<T>, alpha: T) -> Vec<LevelSegment<T>> {
    let tess = v.tess();
    let mut out = Vec::new();
    for (c, cell) in tess.cells().iter().enumerate() {
        if !v.is_certified(c) {
            continue;
        }
        let ids = cell.vertex_ids;
        let pts = tess.cell_points(c);
        let vals = pts.map(|p| v.eval_in(c, p) - alpha);
        let mut hits = Vec::with_capacity(2);
        for e in 0..3 {
            let (i, j) = (e, (e + 1) % 3);
            let (above_i, above_j) = (vals[i] >= T::zero(), vals[j] >= T::zero());
            if above_i != above_j {
                let t = vals[i] / (vals[i] - vals[j]);
                let key = (ids[i].min(ids[j]), ids[i].max(ids[j]));
                hits.push((key, pts[i].lerp(pts[j], t)));
            }
        }
        if hits.len() == 2 {
            out.push(LevelSegment {
                cell: c,
                edges: [hits[0].0, hits[1].0],
                ends: [hits[0].1.clone(), hits[1].1.clone()],
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSegment<T> {
    pub cell: usize,
    pub edges: [(usize, usize); 2],
    pub ends: [Point<T>; 2],
}

/// Level-set segments chained into polylines through shared mesh edges.
pub fn level_set_polylines<T: Scalar>(v: &PwaFunction<T>, alpha: T) -> Vec<Vec<Point<T>>> {
    let segs = level_set_segments(v, alpha);
    let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, s) in segs.iter().enumerate() {
        for e in s.edges {
            by_edge.entry(e).or_default().push(i);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    let next = |edge: (usize, usize), from: usize, used: &[bool]| {
        by_edge[&edge].iter().copied().find(|&j| j != from && !used[j])
    };
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut forward = vec![segs[start].ends[1].clone()];
        let mut edge = segs[start].edges[1];
        let mut cur = start;
        while let Some(j) = next(edge, cur, &used) {
            used[j] = true;
            let k = if segs[j].edges[0] == edge { 1 } else { 0 };
            forward.push(segs[j].ends[k].clone());
            edge = segs[j].edges[k];
            cur = j;
        }
        let mut backward = vec![segs[start].ends[0].clone()];
        let mut edge = segs[start].edges[0];
        let mut cur = start;
        while let Some(j) = next(edge, cur, &used) {
            used[j] = true;
            let k = if segs[j].edges[0] == edge { 1 } else { 0 };
            backward.push(segs[j].ends[k].clone());
            edge = segs[j].edges[k];
            cur = j;
        }
        backward.reverse();
        backward.extend(forward);
        lines.push(backward);
    }
    lines
}
