use spade::{ConstrainedDelaunayTriangulation, DelaunayTriangulation, Point2, Triangulation};

use super::{GeometryError, Point, Polyunion, Tessellation};
use crate::scalar::{Scalar, TOL_GEO, VOL_MIN};

/// Delaunay triangulation of a planar point set.
pub fn delaunay_triangulate<T: Scalar>(points: &[Point<T>]) -> Result<Tessellation<T>, GeometryError> {
    check_planar(points)?;
    let (unique, _) = merge_points(points, TOL_GEO);
    let mut dt: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for p in &unique {
        dt.insert(Point2::new(p[0], p[1]))
            .map_err(|_| GeometryError::NonFinite)?;
    }
    let faces: Vec<[usize; 3]> = dt
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect();
    let vertices: Vec<[f64; 2]> = dt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    finish(vertices, faces, |_| true)
}

/// Constrained triangulation of `closure(X \ A)`.
///
/// Every edge of every part of `x` and `a` is a constraint, so the boundary
/// of the exclusion zone is made of tessellation edges. Triangles whose
/// centroid lies in `a` are discarded.
pub fn tessellate_annulus<T: Scalar>(
    x: &Polyunion<T>,
    a: &Polyunion<T>,
    seeds: &[Point<T>],
) -> Result<Tessellation<T>, GeometryError> {
    if x.dim() != 2 || a.dim() != 2 {
        return Err(GeometryError::UnsupportedDimension(x.dim().max(a.dim())));
    }
    let tol = T::lit(TOL_GEO);
    if !super::polyunion_subset(a, x, tol) {
        return Err(GeometryError::NotContained);
    }
    let origin = Point::origin(2);
    let origin_interior = a
        .parts()
        .iter()
        .any(|p| p.halfspaces().iter().all(|h| h.excess(origin.coords()) < -tol));
    if !origin_interior {
        return Err(GeometryError::OriginNotInterior);
    }
    for (index, s) in seeds.iter().enumerate() {
        if s.dim() != 2 || !s.is_finite() || !x.contains(s, tol) {
            return Err(GeometryError::SeedOutsideDomain { index });
        }
    }

    let mut raw: Vec<[f64; 2]> = Vec::new();
    let mut rings: Vec<(usize, usize)> = Vec::new();
    for part in x.parts().iter().chain(a.parts()) {
        let start = raw.len();
        raw.extend(part.vertices().iter().map(|v| [v[0].as_f64(), v[1].as_f64()]));
        rings.push((start, raw.len()));
    }
    for s in seeds {
        let deep_in_a = a
            .parts()
            .iter()
            .any(|p| p.halfspaces().iter().all(|h| h.excess(s.coords()) < -tol));
        if !deep_in_a {
            raw.push([s[0].as_f64(), s[1].as_f64()]);
        }
    }
    let (unique, map) = merge_raw(&raw, TOL_GEO);

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(unique.len());
    for p in &unique {
        handles.push(
            cdt.insert(Point2::new(p[0], p[1]))
                .map_err(|_| GeometryError::NonFinite)?,
        );
    }
    for &(start, end) in &rings {
        let n = end - start;
        for i in 0..n {
            let from = handles[map[start + i]];
            let to = handles[map[start + (i + 1) % n]];
            if from != to {
                cdt.add_constraint_and_split(from, to, |p| p);
            }
        }
    }
    let faces: Vec<[usize; 3]> = cdt
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect();
    let vertices: Vec<[f64; 2]> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    finish(vertices, faces, |centroid: &Point<T>| {
        x.contains(centroid, tol) && !a.contains(centroid, T::zero())
    })
}

fn check_planar<T: Scalar>(points: &[Point<T>]) -> Result<(), GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    for p in points {
        if p.dim() != 2 {
            return Err(GeometryError::UnsupportedDimension(p.dim()));
        }
        if !p.is_finite() {
            return Err(GeometryError::NonFinite);
        }
    }
    Ok(())
}

/// Drops slivers and rejected faces, compacts vertices, and builds the mesh.
fn finish<T: Scalar>(
    vertices: Vec<[f64; 2]>,
    faces: Vec<[usize; 3]>,
    keep: impl Fn(&Point<T>) -> bool,
) -> Result<Tessellation<T>, GeometryError> {
    let to_point = |p: [f64; 2]| Point::xy(T::lit(p[0]), T::lit(p[1]));
    let mut kept = Vec::with_capacity(faces.len());
    for f in faces {
        let [a, b, c] = f.map(|i| vertices[i]);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
        if area.abs() <= VOL_MIN {
            continue;
        }
        let centroid = to_point([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]);
        if keep(&centroid) {
            kept.push(f);
        }
    }
    if kept.is_empty() {
        return Err(GeometryError::Degenerate);
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut used = Vec::new();
    for f in &mut kept {
        for i in f.iter_mut() {
            if remap[*i] == usize::MAX {
                remap[*i] = used.len();
                used.push(to_point(vertices[*i]));
            }
            *i = remap[*i];
        }
    }
    Tessellation::new(used, kept)
}

fn merge_points<T: Scalar>(points: &[Point<T>], tol: f64) -> (Vec<[f64; 2]>, Vec<usize>) {
    let raw: Vec<[f64; 2]> = points.iter().map(|p| [p[0].as_f64(), p[1].as_f64()]).collect();
    merge_raw(&raw, tol)
}

/// Merges points closer than `tol`; returns the survivors and the index map.
pub(crate) fn merge_raw(raw: &[[f64; 2]], tol: f64) -> (Vec<[f64; 2]>, Vec<usize>) {
    use std::collections::HashMap;
    let cell = tol.max(f64::MIN_POSITIVE) * 4.0;
    let key = |p: [f64; 2]| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut unique: Vec<[f64; 2]> = Vec::new();
    let mut map = Vec::with_capacity(raw.len());
    for &p in raw {
        let (kx, ky) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    for &u in list {
                        let q = unique[u];
                        if (p[0] - q[0]).hypot(p[1] - q[1]) <= tol {
                            found = Some(u);
                            break 'search;
                        }
                    }
                }
            }
        }
        let idx = found.unwrap_or_else(|| {
            unique.push(p);
            grid.entry((kx, ky)).or_default().push(unique.len() - 1);
            unique.len() - 1
        });
        map.push(idx);
    }
    (unique, map)
}

/// One `(vertex, cell, other cell)` incidence used by continuity constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SharedVertex {
    pub vertex: usize,
    pub cell: usize,
    pub other: usize,
}

/// Every unordered pair of distinct cells containing a common tessellation
/// vertex, once per vertex.
pub fn shared_vertex_map<T: Scalar>(tess: &Tessellation<T>) -> Vec<SharedVertex> {
    let tol = T::lit(TOL_GEO);
    let mut out = Vec::new();
    for (v, p) in tess.vertices().iter().enumerate() {
        let mut cells = tess.cells_containing(p, tol);
        cells.extend_from_slice(tess.incidence(v));
        cells.sort_unstable();
        cells.dedup();
        for (i, &c) in cells.iter().enumerate() {
            for &d in &cells[i + 1..] {
                out.push(SharedVertex {
                    vertex: v,
                    cell: c,
                    other: d,
                });
            }
        }
    }
    out
}
