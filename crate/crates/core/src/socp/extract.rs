use serde::{Deserialize, Serialize};

use crate::geometry::{norm, Point, Tessellation};
use crate::lyapunov::{Piece, PwaFunction};

use super::problem::ProblemSpec;
use super::solver::ConicSolution;
use super::SocpError;

/// Every `s_{i,c}`, indexed by cell and local vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackMap {
    pub cells: Vec<Vec<f64>>,
}

impl SlackMap {
    /// Tessellation vertices carrying at least one non-negative slack.
    pub fn bad_vertices(&self, cell_vertices: &[[usize; 3]]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .cells
            .iter()
            .zip(cell_vertices)
            .flat_map(|(s, ids)| s.iter().zip(ids).filter(|(v, _)| **v >= 0.0).map(|(_, &i)| i))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Corners of the region where the decrease bound may fail.
    ///
    /// The bound is convex on a cell, so it lies below the linear
    /// interpolation of the vertex slacks. The interpolated slack is
    /// non-negative exactly on the hull of the bad vertices and of the zero
    /// crossings along edges joining a bad vertex to a good one.
    pub fn uncertain_points(&self, tess: &Tessellation<f64>) -> Vec<Point<f64>> {
        let verts = tess.vertices();
        let mut out = Vec::new();
        for (s, cell) in self.cells.iter().zip(tess.cells()) {
            let ids = cell.vertex_ids;
            for i in 0..3 {
                if s[i] < 0.0 {
                    continue;
                }
                out.push(verts[ids[i]].clone());
                for j in [(i + 1) % 3, (i + 2) % 3] {
                    if s[j] < 0.0 {
                        let t = s[i] / (s[i] - s[j]);
                        out.push(verts[ids[i]].lerp(&verts[ids[j]], t));
                    }
                }
            }
        }
        out
    }

    pub fn all_negative(&self) -> bool {
        self.cells.iter().flatten().all(|&s| s < 0.0)
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().flatten().fold(f64::NEG_INFINITY, |m, &s| m.max(s))
    }
}

/// Makes a solver point exactly consistent.
///
/// Vertex values are averaged over incident cells and every piece is refit
/// through them, so neighbouring pieces agree at shared vertices up to
/// rounding. The change in `g_c` is absorbed by the first `γ` of the cell,
/// `t` is reset to `|γ|`, and each slack is recomputed as the left-hand side
/// of its decrease row (floored at `−μ`). The result satisfies every
/// constraint by construction.
pub fn polish(spec: &ProblemSpec, sol: &ConicSolution) -> ConicSolution {
    let tess = spec.tess();
    let verts = tess.vertices();
    let samples = spec.data().samples();
    let idx = &sol.index;
    let n = tess.dim();
    let mut x = sol.x.clone();

    let mut acc = vec![(0.0, 0usize); verts.len()];
    for (c, cell) in tess.cells().iter().enumerate() {
        let g = sol.g(c);
        for &v in &cell.vertex_ids {
            acc[v].0 += verts[v].dot(&g) + sol.b(c);
            acc[v].1 += 1;
        }
    }
    let value: Vec<f64> = acc.iter().map(|&(s, k)| s / k.max(1) as f64).collect();

    for (c, cell) in tess.cells().iter().enumerate() {
        let [i, j, k] = cell.vertex_ids;
        let Some(piece) = crate::lyapunov::affine_through(tess.cell_points(c), [value[i], value[j], value[k]]) else {
            continue;
        };
        let old = sol.g(c);
        for d in 0..n {
            x[idx.g(c, d)] = piece.g[d];
            x[idx.gamma(c, 0, d)] += piece.g[d] - old[d];
        }
        x[idx.b(c)] = piece.b;
        let sel = &spec.selection()[c];
        let mut norms = Vec::with_capacity(sel.len());
        for kk in 0..sel.len() {
            let gm: Vec<f64> = (0..n).map(|d| x[idx.gamma(c, kk, d)]).collect();
            let r = norm(&gm);
            x[idx.t(c, kk)] = r;
            norms.push((gm, r));
        }
        for (li, &vid) in cell.vertex_ids.iter().enumerate() {
            let v = &verts[vid];
            let lhs: f64 = sel
                .iter()
                .zip(&norms)
                .map(|(&d, (gm, r))| samples[d].f.dot(gm) + spec.lipschitz() * r * v.dist(&samples[d].x))
                .sum();
            x[idx.s(c, li)] = lhs.max(-spec.mu());
        }
    }
    let mut out = ConicSolution::from_values(idx.clone(), x, sol.status);
    out.detail = sol.detail.clone();
    out
}

/// The PWA candidate `(g_c, b_c)` and its slacks; a cell is certified when
/// all its slacks are strictly negative.
pub fn extract_candidate(spec: &ProblemSpec, sol: &ConicSolution) -> Result<(PwaFunction<f64>, SlackMap), SocpError> {
    let tess = spec.tess();
    let n = tess.dim();
    let pieces = (0..tess.num_cells()).map(|c| Piece::new(sol.g(c), sol.b(c))).collect();
    let cells: Vec<Vec<f64>> = (0..tess.num_cells())
        .map(|c| (0..=n).map(|i| sol.s(c, i)).collect())
        .collect();
    let certified = cells.iter().map(|s| s.iter().all(|&v| v < 0.0)).collect();
    let v = PwaFunction::new(tess.clone(), pieces, certified)?;
    Ok((v, SlackMap { cells }))
}
