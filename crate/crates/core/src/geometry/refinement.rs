//! Longest-edge bisection with Lawson flips.
//!
//! Splitting an edge splits every triangle sharing it, so the mesh stays
//! conforming and boundary edges stay on the boundary. Flips only touch
//! interior edges.

use std::collections::HashMap;

use super::plane::in_circle;
use super::{GeometryError, Point, Polyunion, Tessellation};
use crate::scalar::{Scalar, TOL_GEO, VOL_MIN};

struct Work<T> {
    vertices: Vec<Point<T>>,
    cells: Vec<[usize; 3]>,
}

impl<T: Scalar> Work<T> {
    fn from(tess: &Tessellation<T>) -> Self {
        Work {
            vertices: tess.vertices().to_vec(),
            cells: tess.cells().iter().map(|c| c.vertex_ids).collect(),
        }
    }

    fn xy(&self, v: usize) -> [f64; 2] {
        [self.vertices[v][0].as_f64(), self.vertices[v][1].as_f64()]
    }

    fn edge_len(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.xy(a), self.xy(b));
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    /// Longest edge of cell `c` as `(u, v)` in the cell's orientation.
    fn longest_edge(&self, c: usize) -> (usize, usize) {
        let t = self.cells[c];
        (0..3)
            .map(|i| (t[i], t[(i + 1) % 3]))
            .max_by(|x, y| {
                self.edge_len(x.0, x.1)
                    .partial_cmp(&self.edge_len(y.0, y.1))
                    .unwrap()
                    .then_with(|| (y.0.min(y.1), y.0.max(y.1)).cmp(&(x.0.min(x.1), x.0.max(x.1))))
            })
            .unwrap()
    }

    fn diameter(&self, c: usize) -> f64 {
        let (a, b) = self.longest_edge(c);
        self.edge_len(a, b)
    }

    fn centroid(&self, c: usize) -> Point<T> {
        let t = self.cells[c];
        let third = T::lit(1.0 / 3.0);
        Point::xy(
            (self.vertices[t[0]][0] + self.vertices[t[1]][0] + self.vertices[t[2]][0]) * third,
            (self.vertices[t[0]][1] + self.vertices[t[1]][1] + self.vertices[t[2]][1]) * third,
        )
    }

    fn edge_map(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(self.cells.len() * 2);
        for (c, t) in self.cells.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(c);
            }
        }
        map
    }

    /// Splits the longest edge of the highest-priority cells, at most `limit`
    /// edges, never touching a cell twice. Returns the number of new vertices.
    fn split_pass(&mut self, ranked: &[usize], limit: usize, accept_mid: &dyn Fn(&Point<T>) -> bool) -> usize {
        let map = self.edge_map();
        let mut touched = vec![false; self.cells.len()];
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        for &c in ranked {
            if chosen.len() >= limit {
                break;
            }
            if touched[c] {
                continue;
            }
            let (a, b) = self.longest_edge(c);
            let key = (a.min(b), a.max(b));
            let owners = &map[&key];
            if owners.iter().any(|&o| touched[o]) {
                continue;
            }
            let mid = self.vertices[a].midpoint(&self.vertices[b]);
            if !accept_mid(&mid) {
                continue;
            }
            for &o in owners {
                touched[o] = true;
            }
            chosen.push(key);
        }
        for &(a, b) in &chosen {
            let m = self.vertices.len();
            self.vertices.push(self.vertices[a].midpoint(&self.vertices[b]));
            for &c in &map[&(a, b)] {
                let t = self.cells[c];
                let k = (0..3)
                    .find(|&i| {
                        let (u, v) = (t[i], t[(i + 1) % 3]);
                        (u == a && v == b) || (u == b && v == a)
                    })
                    .expect("edge belongs to cell");
                let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                self.cells[c] = [u, m, w];
                self.cells.push([m, v, w]);
            }
        }
        chosen.len()
    }

    /// Lawson flips until locally Delaunay (bounded number of sweeps).
    fn flip_to_delaunay(&mut self) {
        for _ in 0..64 {
            let map = self.edge_map();
            let mut keys: Vec<_> = map.iter().filter(|(_, c)| c.len() == 2).map(|(k, _)| *k).collect();
            keys.sort_unstable();
            let mut touched = vec![false; self.cells.len()];
            let mut flips = 0;
            for (a, b) in keys {
                let owners = &map[&(a, b)];
                let (c0, c1) = (owners[0], owners[1]);
                if touched[c0] || touched[c1] {
                    continue;
                }
                let opposite = |t: [usize; 3]| *t.iter().find(|&&v| v != a && v != b).unwrap();
                // Orient so that c0 = (p, q, r) with edge p->q.
                let t0 = self.cells[c0];
                let k = (0..3)
                    .find(|&i| {
                        let (u, v) = (t0[i], t0[(i + 1) % 3]);
                        (u == a && v == b) || (u == b && v == a)
                    })
                    .unwrap();
                let (p, q, r) = (t0[k], t0[(k + 1) % 3], t0[(k + 2) % 3]);
                let s = opposite(self.cells[c1]);
                let (pp, qq, rr, ss) = (self.xy(p), self.xy(q), self.xy(r), self.xy(s));
                let scale = self.edge_len(p, q).max(1e-300);
                if in_circle(pp, qq, rr, ss) <= 1e-12 * scale.powi(4) {
                    continue;
                }
                let n0 = [r, p, s];
                let n1 = [s, q, r];
                let area = |t: [usize; 3]| {
                    let [x, y, z] = t.map(|i| self.xy(i));
                    0.5 * ((y[0] - x[0]) * (z[1] - x[1]) - (y[1] - x[1]) * (z[0] - x[0]))
                };
                let min_area = VOL_MIN.max(1e-9 * scale * scale);
                if area(n0) <= min_area || area(n1) <= min_area {
                    continue;
                }
                self.cells[c0] = n0;
                self.cells[c1] = n1;
                touched[c0] = true;
                touched[c1] = true;
                flips += 1;
            }
            if flips == 0 {
                break;
            }
        }
    }

    fn finish(self) -> Result<Tessellation<T>, GeometryError> {
        Tessellation::new(self.vertices, self.cells)
    }
}

/// Inserts longest-edge midpoints inside `region` until the number of mesh
/// vertices in the region is at least `factor` times its initial value.
/// Vertices outside the region are left untouched.
pub fn refine<T: Scalar>(
    tess: &Tessellation<T>,
    region: &Polyunion<T>,
    factor: T,
) -> Result<Tessellation<T>, GeometryError> {
    if !(factor > T::one()) {
        return Err(GeometryError::InvalidFactor);
    }
    let tol = T::lit(TOL_GEO);
    let in_region = |p: &Point<T>| region.contains(p, tol);
    let count = |w: &Work<T>| w.vertices.iter().filter(|p| in_region(p)).count();
    let mut work = Work::from(tess);
    let initial = count(&work);
    let any_cell = (0..work.cells.len()).any(|c| in_region(&work.centroid(c)));
    if initial == 0 && !any_cell {
        return Err(GeometryError::EmptyRegion);
    }
    let target = ((factor.as_f64() * initial as f64).ceil() as usize).max(initial + 1);
    let mut have = initial;
    while have < target {
        let mut ranked: Vec<usize> = (0..work.cells.len())
            .filter(|&c| in_region(&work.centroid(c)))
            .collect();
        ranked.sort_by(|&x, &y| work.diameter(y).partial_cmp(&work.diameter(x)).unwrap().then(x.cmp(&y)));
        let added = work.split_pass(&ranked, target - have, &in_region);
        if added == 0 {
            return Err(GeometryError::EmptyRegion);
        }
        work.flip_to_delaunay();
        have = count(&work);
    }
    work.finish()
}

/// Splits cells in decreasing order of `diameter / size(centroid)` until the
/// mesh has at least `target_vertices` vertices.
pub fn refine_to_count<T: Scalar>(
    tess: &Tessellation<T>,
    target_vertices: usize,
    size: impl Fn(&Point<T>) -> f64,
) -> Result<Tessellation<T>, GeometryError> {
    let mut work = Work::from(tess);
    while work.vertices.len() < target_vertices {
        let ranked = rank_by_ratio(&work, &size, 0.0);
        let limit = (target_vertices - work.vertices.len()).min((work.cells.len() / 8).max(1));
        if work.split_pass(&ranked, limit, &|_| true) == 0 {
            break;
        }
        work.flip_to_delaunay();
    }
    work.finish()
}

/// Splits cells until every cell satisfies `diameter <= size(centroid)`, or
/// the vertex budget is exhausted.
pub fn refine_to_size<T: Scalar>(
    tess: &Tessellation<T>,
    size: impl Fn(&Point<T>) -> f64,
    max_vertices: usize,
) -> Result<Tessellation<T>, GeometryError> {
    let mut work = Work::from(tess);
    loop {
        let ranked = rank_by_ratio(&work, &size, 1.0);
        if ranked.is_empty() || work.vertices.len() >= max_vertices {
            break;
        }
        let limit = (max_vertices - work.vertices.len()).min((work.cells.len() / 4).max(1));
        if work.split_pass(&ranked, limit, &|_| true) == 0 {
            break;
        }
        work.flip_to_delaunay();
    }
    work.finish()
}

fn rank_by_ratio<T: Scalar>(work: &Work<T>, size: &dyn Fn(&Point<T>) -> f64, above: f64) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = (0..work.cells.len())
        .map(|c| (c, work.diameter(c) / size(&work.centroid(c)).max(1e-300)))
        .filter(|&(_, r)| r > above)
        .collect();
    scored.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
    scored.into_iter().map(|(c, _)| c).collect()
}
