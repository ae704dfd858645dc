use serde::{Deserialize, Serialize};

use crate::geometry::{shared_vertex_map, Point, Tessellation};
use crate::scalar::{Scalar, TOL_GEO};

use super::LyapunovError;

/// Affine piece `x ↦ g·x + b` of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Piece<T> {
    pub g: Vec<T>,
    pub b: T,
}

impl<T: Scalar> Piece<T> {
    pub fn new(g: Vec<T>, b: T) -> Self {
        Piece { g, b }
    }

    pub fn eval(&self, x: &Point<T>) -> T {
        x.dot(&self.g) + self.b
    }

    pub fn grad_norm(&self) -> T {
        crate::geometry::norm(&self.g)
    }
}

/// Continuous piecewise-affine function over a tessellation, with a mask of
/// the cells on which it is certified to decrease.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PwaRepr<T>", into = "PwaRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PwaFunction<T> {
    tess: Tessellation<T>,
    pieces: Vec<Piece<T>>,
    certified: Vec<bool>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct PwaRepr<T> {
    mesh: Tessellation<T>,
    cells: Vec<CellRepr<T>>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct CellRepr<T> {
    g: Vec<T>,
    b: T,
    certified: bool,
}

impl<T: Scalar> TryFrom<PwaRepr<T>> for PwaFunction<T> {
    type Error = LyapunovError;

    fn try_from(repr: PwaRepr<T>) -> Result<Self, Self::Error> {
        let (pieces, certified) = repr
            .cells
            .into_iter()
            .map(|c| (Piece::new(c.g, c.b), c.certified))
            .unzip();
        PwaFunction::new(repr.mesh, pieces, certified)
    }
}

impl<T: Scalar> From<PwaFunction<T>> for PwaRepr<T> {
    fn from(v: PwaFunction<T>) -> Self {
        let cells = v
            .pieces
            .into_iter()
            .zip(v.certified)
            .map(|(p, certified)| CellRepr {
                g: p.g,
                b: p.b,
                certified,
            })
            .collect();
        PwaRepr { mesh: v.tess, cells }
    }
}

impl<T: Scalar> PwaFunction<T> {
    pub fn new(tess: Tessellation<T>, pieces: Vec<Piece<T>>, certified: Vec<bool>) -> Result<Self, LyapunovError> {
        if pieces.len() != tess.num_cells() || certified.len() != tess.num_cells() {
            return Err(LyapunovError::PieceCountMismatch {
                cells: tess.num_cells(),
                pieces: pieces.len().min(certified.len()),
            });
        }
        for p in &pieces {
            if p.g.len() != tess.dim() {
                return Err(LyapunovError::DimensionMismatch {
                    expected: tess.dim(),
                    found: p.g.len(),
                });
            }
            if !p.b.is_finite() || p.g.iter().any(|v| !v.is_finite()) {
                return Err(LyapunovError::NonFinite);
            }
        }
        Ok(PwaFunction { tess, pieces, certified })
    }

    /// All cells certified.
    pub fn certified_everywhere(tess: Tessellation<T>, pieces: Vec<Piece<T>>) -> Result<Self, LyapunovError> {
        let n = tess.num_cells();
        PwaFunction::new(tess, pieces, vec![true; n])
    }

    pub fn tess(&self) -> &Tessellation<T> {
        &self.tess
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn piece(&self, c: usize) -> &Piece<T> {
        &self.pieces[c]
    }

    pub fn certified(&self) -> &[bool] {
        &self.certified
    }

    pub fn is_certified(&self, c: usize) -> bool {
        self.certified[c]
    }

    pub fn num_certified(&self) -> usize {
        self.certified.iter().filter(|&&c| c).count()
    }

    pub fn with_certified(mut self, certified: Vec<bool>) -> Result<Self, LyapunovError> {
        if certified.len() != self.tess.num_cells() {
            return Err(LyapunovError::PieceCountMismatch {
                cells: self.tess.num_cells(),
                pieces: certified.len(),
            });
        }
        self.certified = certified;
        Ok(self)
    }

    /// Value of the piece of cell `c` at `x` (no containment check).
    pub fn eval_in(&self, c: usize, x: &Point<T>) -> T {
        self.pieces[c].eval(x)
    }

    /// Value at tessellation vertex `v`, read from a certified incident
    /// cell when one exists.
    pub fn vertex_value(&self, v: usize) -> Option<T> {
        let cells = self.tess.incidence(v);
        let c = cells.iter().copied().find(|&c| self.certified[c]).or(cells.first().copied())?;
        Some(self.eval_in(c, &self.tess.vertices()[v]))
    }

    /// Value at vertex `v` read from certified incident cells only.
    pub fn certified_vertex_value(&self, v: usize) -> Option<T> {
        let c = self.tess.incidence(v).iter().copied().find(|&c| self.certified[c])?;
        Some(self.eval_in(c, &self.tess.vertices()[v]))
    }

    /// Evaluates `V(x)`; errors when `x` lies in no cell.
    pub fn evaluate(&self, x: &Point<T>) -> Result<T, LyapunovError> {
        if x.dim() != self.tess.dim() {
            return Err(LyapunovError::DimensionMismatch {
                expected: self.tess.dim(),
                found: x.dim(),
            });
        }
        let c = self.tess.locate(x, T::lit(TOL_GEO)).ok_or(LyapunovError::NotInDomain)?;
        Ok(self.eval_in(c, x))
    }

    /// Largest disagreement between neighbouring pieces at shared vertices.
    /// With `certified_only`, pairs involving an uncertified cell are skipped.
    pub fn continuity_defect(&self, certified_only: bool) -> T {
        let verts = self.tess.vertices();
        shared_vertex_map(&self.tess)
            .into_iter()
            .filter(|s| !certified_only || (self.certified[s.cell] && self.certified[s.other]))
            .map(|s| (self.eval_in(s.cell, &verts[s.vertex]) - self.eval_in(s.other, &verts[s.vertex])).abs())
            .fold(T::zero(), T::max)
    }
}

/// Interpolates `func` linearly on every cell of `tess`.
pub fn pwa_interpolate<T: Scalar>(
    func: impl Fn(&Point<T>) -> T,
    tess: &Tessellation<T>,
) -> Result<PwaFunction<T>, LyapunovError> {
    let values: Vec<T> = tess.vertices().iter().map(&func).collect();
    if let Some(v) = values.iter().position(|v| !v.is_finite()) {
        return Err(LyapunovError::NonFiniteVertexValue { vertex: v });
    }
    let mut pieces = Vec::with_capacity(tess.num_cells());
    for (c, cell) in tess.cells().iter().enumerate() {
        let [i, j, k] = cell.vertex_ids;
        let pts = tess.cell_points(c);
        pieces.push(affine_through(pts, [values[i], values[j], values[k]]).ok_or(LyapunovError::DegenerateCell { cell: c })?);
    }
    PwaFunction::certified_everywhere(tess.clone(), pieces)
}

/// The affine function taking values `f` at the three points.
pub(crate) fn affine_through<T: Scalar>(p: [&Point<T>; 3], f: [T; 3]) -> Option<Piece<T>> {
    let e1 = p[1].sub(p[0]);
    let e2 = p[2].sub(p[0]);
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    if det.abs() <= T::lit(crate::scalar::VOL_MIN) {
        return None;
    }
    let d1 = f[1] - f[0];
    let d2 = f[2] - f[0];
    let gx = (d1 * e2[1] - d2 * e1[1]) / det;
    let gy = (d2 * e1[0] - d1 * e2[0]) / det;
    let g = vec![gx, gy];
    let third = T::lit(1.0 / 3.0);
    let b = (0..3).map(|i| f[i] - p[i].dot(&g)).sum::<T>() * third;
    Some(Piece::new(g, b))
}
