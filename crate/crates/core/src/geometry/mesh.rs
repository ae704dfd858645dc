use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::plane::{self, P2};
use super::{GeometryError, Point, Polyunion};
use crate::scalar::{Scalar, VOL_MIN};

/// A triangle of a planar tessellation, vertices counter-clockwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub id: usize,
    pub vertex_ids: [usize; 3],
}

/// Simplicial cover of a planar region with pairwise disjoint cell interiors.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MeshRepr<T>", into = "MeshRepr<T>", bound = "T: Scalar")]
pub struct Tessellation<T> {
    vertices: Vec<Point<T>>,
    cells: Vec<Cell>,
    incidence: Vec<Vec<usize>>,
    locator: Locator,
}

impl<T: PartialEq> PartialEq for Tessellation<T> {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.cells == other.cells
    }
}

/// JSON layout `{"vertices": [[x, y], ...], "cells": [[i, j, k], ...]}`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct MeshRepr<T> {
    vertices: Vec<Point<T>>,
    cells: Vec<[usize; 3]>,
}

impl<T: Scalar> TryFrom<MeshRepr<T>> for Tessellation<T> {
    type Error = GeometryError;

    fn try_from(r: MeshRepr<T>) -> Result<Self, GeometryError> {
        Tessellation::new(r.vertices, r.cells)
    }
}

impl<T: Scalar> From<Tessellation<T>> for MeshRepr<T> {
    fn from(t: Tessellation<T>) -> Self {
        MeshRepr {
            cells: t.cells.iter().map(|c| c.vertex_ids).collect(),
            vertices: t.vertices,
        }
    }
}

impl<T: Scalar> Tessellation<T> {
    /// Validates and indexes a triangle mesh. Cells are re-oriented
    /// counter-clockwise; slivers with area at or below `VOL_MIN` are rejected.
    pub fn new(vertices: Vec<Point<T>>, cells: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        if cells.is_empty() {
            return Err(GeometryError::EmptyInput);
        }
        for v in &vertices {
            if v.dim() != 2 {
                return Err(GeometryError::UnsupportedDimension(v.dim()));
            }
            if !v.is_finite() {
                return Err(GeometryError::NonFinite);
            }
        }
        let mut out = Vec::with_capacity(cells.len());
        for (id, mut ids) in cells.into_iter().enumerate() {
            if ids.iter().any(|&i| i >= vertices.len()) {
                return Err(GeometryError::InvalidCell { id });
            }
            if ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2] {
                return Err(GeometryError::InvalidCell { id });
            }
            let [a, b, c] = ids.map(|i| vertices[i].as_xy());
            let twice = plane::orient(a, b, c);
            if twice.abs() * T::lit(0.5) <= T::lit(VOL_MIN) {
                return Err(GeometryError::DegenerateCell { id });
            }
            if twice < T::zero() {
                ids.swap(1, 2);
            }
            out.push(Cell { id, vertex_ids: ids });
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for c in &out {
            for &v in &c.vertex_ids {
                incidence[v].push(c.id);
            }
        }
        let locator = Locator::build(&vertices, &out);
        Ok(Tessellation {
            vertices,
            cells: out,
            incidence,
            locator,
        })
    }

    pub fn dim(&self) -> usize {
        2
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Cells having vertex `v` as a corner.
    pub fn incidence(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn cell_points(&self, c: usize) -> [&Point<T>; 3] {
        self.cells[c].vertex_ids.map(|i| &self.vertices[i])
    }

    pub(crate) fn cell_ring(&self, c: usize) -> [P2<T>; 3] {
        self.cells[c].vertex_ids.map(|i| self.vertices[i].as_xy())
    }

    pub fn cell_area(&self, c: usize) -> T {
        let [a, b, cc] = self.cell_ring(c);
        plane::orient(a, b, cc) * T::lit(0.5)
    }

    pub fn cell_diameter(&self, c: usize) -> T {
        let [a, b, cc] = self.cell_ring(c);
        plane::dist2(a, b).max(plane::dist2(b, cc)).max(plane::dist2(cc, a))
    }

    pub fn centroid(&self, c: usize) -> Point<T> {
        let [a, b, cc] = self.cell_ring(c);
        let third = T::lit(1.0 / 3.0);
        Point::xy((a[0] + b[0] + cc[0]) * third, (a[1] + b[1] + cc[1]) * third)
    }

    pub fn total_area(&self) -> T {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    pub fn max_diameter(&self) -> T {
        (0..self.cells.len())
            .map(|c| self.cell_diameter(c))
            .fold(T::zero(), T::max)
    }

    /// Largest cell diameter among cells whose centroid lies in `region`.
    pub fn max_diameter_in(&self, region: &Polyunion<T>, tol: T) -> T {
        (0..self.cells.len())
            .filter(|&c| region.contains(&self.centroid(c), tol))
            .map(|c| self.cell_diameter(c))
            .fold(T::zero(), T::max)
    }

    pub fn bounds(&self) -> ([T; 2], [T; 2]) {
        let mut lo = [T::infinity(); 2];
        let mut hi = [T::neg_infinity(); 2];
        for v in &self.vertices {
            for i in 0..2 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// Signed distance-like excess of `p` outside cell `c` (max over edges);
    /// non-positive means inside.
    pub fn cell_excess(&self, c: usize, p: &Point<T>) -> T {
        let ring = self.cell_ring(c);
        let q = p.as_xy();
        let mut worst = T::neg_infinity();
        for i in 0..3 {
            if let Some((n, off)) = plane::edge_halfplane(ring[i], ring[(i + 1) % 3]) {
                worst = worst.max(n[0] * q[0] + n[1] * q[1] - off);
            }
        }
        worst
    }

    pub fn cell_contains(&self, c: usize, p: &Point<T>, tol: T) -> bool {
        self.cell_excess(c, p) <= tol
    }

    /// Barycentric coordinates of `p` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, p: &Point<T>) -> [T; 3] {
        let [a, b, cc] = self.cell_ring(c);
        let q = p.as_xy();
        let total = plane::orient(a, b, cc);
        let la = plane::orient(q, b, cc) / total;
        let lb = plane::orient(a, q, cc) / total;
        [la, lb, T::one() - la - lb]
    }

    /// First cell containing `p` up to `tol`, preferring the deepest one.
    pub fn locate(&self, p: &Point<T>, tol: T) -> Option<usize> {
        if p.dim() != 2 {
            return None;
        }
        let mut best: Option<(usize, T)> = None;
        for c in self.locator.candidates(p.x().as_f64(), p.y().as_f64()) {
            let e = self.cell_excess(c, p);
            if e <= tol && best.is_none_or(|(_, b)| e < b) {
                best = Some((c, e));
                if e < T::zero() {
                    break;
                }
            }
        }
        best.map(|(c, _)| c)
    }

    /// All cells containing `p` up to `tol`.
    pub fn cells_containing(&self, p: &Point<T>, tol: T) -> Vec<usize> {
        self.locator
            .candidates(p.x().as_f64(), p.y().as_f64())
            .filter(|&c| self.cell_contains(c, p, tol))
            .collect()
    }

    /// Cells whose bounding box meets the box `[lo, hi]`.
    pub fn cells_in_box(&self, lo: [T; 2], hi: [T; 2]) -> Vec<usize> {
        let mut found = self
            .locator
            .in_box([lo[0].as_f64(), lo[1].as_f64()], [hi[0].as_f64(), hi[1].as_f64()]);
        found.sort_unstable();
        found.dedup();
        found
    }

    /// Undirected edges mapped to their incident cells.
    pub fn edges(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for c in &self.cells {
            let v = c.vertex_ids;
            for i in 0..3 {
                let (a, b) = (v[i], v[(i + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(c.id);
            }
        }
        map
    }

    /// Edges with a single incident cell.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .filter(|(_, cells)| cells.len() == 1)
            .map(|(e, _)| e)
            .collect()
    }

    pub fn boundary_vertices(&self) -> BTreeSet<usize> {
        self.boundary_edges()
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .collect()
    }
}

/// Uniform bucket grid over cell bounding boxes.
#[derive(Clone, Debug, Default)]
struct Locator {
    lo: [f64; 2],
    step: [f64; 2],
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    fn build<T: Scalar>(vertices: &[Point<T>], cells: &[Cell]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in vertices {
            for i in 0..2 {
                lo[i] = lo[i].min(v[i].as_f64());
                hi[i] = hi[i].max(v[i].as_f64());
            }
        }
        let side = ((cells.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let pad = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
        lo = [lo[0] - pad, lo[1] - pad];
        hi = [hi[0] + pad, hi[1] + pad];
        let step = [(hi[0] - lo[0]) / side as f64, (hi[1] - lo[1]) / side as f64];
        let mut loc = Locator {
            lo,
            step,
            nx: side,
            ny: side,
            buckets: vec![Vec::new(); side * side],
        };
        for c in cells {
            let pts = c.vertex_ids.map(|i| [vertices[i][0].as_f64(), vertices[i][1].as_f64()]);
            let bl = [
                pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - pad,
                pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min) - pad,
            ];
            let bh = [
                pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + pad,
                pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max) + pad,
            ];
            let (i0, j0) = loc.bucket(bl[0], bl[1]);
            let (i1, j1) = loc.bucket(bh[0], bh[1]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * loc.nx + i].push(c.id);
                }
            }
        }
        loc
    }

    fn bucket(&self, x: f64, y: f64) -> (usize, usize) {
        let fx = ((x - self.lo[0]) / self.step[0]).floor();
        let fy = ((y - self.lo[1]) / self.step[1]).floor();
        let clamp = |v: f64, n: usize| {
            if v.is_nan() || v < 0.0 {
                0
            } else {
                (v as usize).min(n - 1)
            }
        };
        (clamp(fx, self.nx), clamp(fy, self.ny))
    }

    fn candidates(&self, x: f64, y: f64) -> impl Iterator<Item = usize> + '_ {
        let outside = x < self.lo[0]
            || y < self.lo[1]
            || x > self.lo[0] + self.step[0] * self.nx as f64
            || y > self.lo[1] + self.step[1] * self.ny as f64;
        let bucket: &[usize] = if outside || self.buckets.is_empty() {
            &[]
        } else {
            let (i, j) = self.bucket(x, y);
            &self.buckets[j * self.nx + i]
        };
        bucket.iter().copied()
    }

    fn in_box(&self, lo: [f64; 2], hi: [f64; 2]) -> Vec<usize> {
        if self.buckets.is_empty() {
            return Vec::new();
        }
        let (i0, j0) = self.bucket(lo[0], lo[1]);
        let (i1, j1) = self.bucket(hi[0], hi[1]);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.buckets[j * self.nx + i]);
            }
        }
        out
    }
}
