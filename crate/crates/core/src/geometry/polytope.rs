use serde::{Deserialize, Serialize};

use super::plane::{self, P2};
use super::{GeometryError, Point};
use crate::scalar::{Scalar, TOL_GEO};

/// Halfspace `normal·x <= offset` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Scalar> Halfspace<T> {
    /// Signed distance of `p` past the boundary; positive means outside.
    pub fn excess(&self, p: &[T]) -> T {
        self.normal
            .iter()
            .zip(p)
            .fold(T::zero(), |acc, (n, x)| acc + *n * *x)
            - self.offset
    }
}

/// Bounded convex polytope kept in both vertex and halfspace form.
///
/// Planar polytopes store their vertices counter-clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr<T>", bound = "T: Scalar")]
pub struct Polytope<T> {
    vertices: Vec<Point<T>>,
    halfspaces: Vec<Halfspace<T>>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    degenerate: bool,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct PolytopeRepr<T> {
    vertices: Vec<Point<T>>,
    #[serde(default)]
    halfspaces: Option<Vec<Halfspace<T>>>,
}

impl<T: Scalar> TryFrom<PolytopeRepr<T>> for Polytope<T> {
    type Error = GeometryError;

    fn try_from(repr: PolytopeRepr<T>) -> Result<Self, GeometryError> {
        match repr.halfspaces {
            Some(halfspaces) if !halfspaces.is_empty() => {
                let dim = repr.vertices.first().map(|v| v.dim()).unwrap_or(0);
                if repr.vertices.iter().any(|v| v.dim() != dim)
                    || halfspaces.iter().any(|h| h.normal.len() != dim)
                {
                    return Err(GeometryError::DimensionMismatch {
                        expected: dim,
                        found: 0,
                    });
                }
                Ok(Polytope {
                    vertices: repr.vertices,
                    halfspaces,
                    degenerate: false,
                })
            }
            _ => convex_hull(&repr.vertices),
        }
    }
}

impl<T: Scalar> Polytope<T> {
    /// Builds a planar polygon from counter-clockwise vertices in convex position.
    pub(crate) fn from_ccw(ring: Vec<P2<T>>) -> Self {
        let halfspaces = plane::halfplanes(&ring)
            .into_iter()
            .map(|(n, c)| Halfspace {
                normal: n.to_vec(),
                offset: c,
            })
            .collect();
        Polytope {
            vertices: ring.into_iter().map(Point::from).collect(),
            halfspaces,
            degenerate: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map(|v| v.dim()).unwrap_or(0)
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace<T>] {
        &self.halfspaces
    }

    /// True when the hull has lower dimension than its ambient space.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn contains(&self, p: &Point<T>, tol: T) -> bool {
        p.dim() == self.dim() && self.halfspaces.iter().all(|h| h.excess(p.coords()) <= tol)
    }

    /// Area of a planar polytope.
    pub fn area(&self) -> T {
        debug_assert_eq!(self.dim(), 2);
        plane::signed_area(&self.ring()).abs()
    }

    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(b));
            }
        }
        d
    }

    /// Lower and upper corners of the axis-aligned bounding box.
    pub fn bounds(&self) -> (Vec<T>, Vec<T>) {
        let dim = self.dim();
        let mut lo = vec![T::infinity(); dim];
        let mut hi = vec![T::neg_infinity(); dim];
        for v in &self.vertices {
            for i in 0..dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// Image under `x -> beta x`.
    pub fn scaled(&self, beta: T) -> Polytope<T> {
        Polytope {
            vertices: self.vertices.iter().map(|v| v.scaled(beta)).collect(),
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal.clone(),
                    offset: h.offset * beta,
                })
                .collect(),
            degenerate: self.degenerate,
        }
    }

    pub(crate) fn ring(&self) -> Vec<P2<T>> {
        self.vertices.iter().map(|v| v.as_xy()).collect()
    }

    pub(crate) fn halfplanes(&self) -> Vec<(P2<T>, T)> {
        self.halfspaces
            .iter()
            .map(|h| ([h.normal[0], h.normal[1]], h.offset))
            .collect()
    }
}

/// Axis-aligned box `[lo, hi]`.
pub fn box_polytope<T: Scalar>(lo: &[T], hi: &[T]) -> Result<Polytope<T>, GeometryError> {
    if lo.len() != hi.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: lo.len(),
            found: hi.len(),
        });
    }
    if lo.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    for (axis, (l, h)) in lo.iter().zip(hi).enumerate() {
        if !l.is_finite() || !h.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if l >= h {
            return Err(GeometryError::InvalidBounds { axis });
        }
    }
    let n = lo.len();
    if n == 2 {
        return Ok(Polytope::from_ccw(vec![
            [lo[0], lo[1]],
            [hi[0], lo[1]],
            [hi[0], hi[1]],
            [lo[0], hi[1]],
        ]));
    }
    let vertices = (0..1usize << n)
        .map(|mask| {
            Point::new(
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                    .collect(),
            )
        })
        .collect();
    let mut halfspaces = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut neg = vec![T::zero(); n];
        neg[i] = -T::one();
        halfspaces.push(Halfspace {
            normal: neg,
            offset: -lo[i],
        });
        let mut pos = vec![T::zero(); n];
        pos[i] = T::one();
        halfspaces.push(Halfspace {
            normal: pos,
            offset: hi[i],
        });
    }
    Ok(Polytope {
        vertices,
        halfspaces,
        degenerate: false,
    })
}

/// Convex hull of planar points with a minimal vertex list.
///
/// Collinear input yields a segment flagged as degenerate.
pub fn convex_hull<T: Scalar>(points: &[Point<T>]) -> Result<Polytope<T>, GeometryError> {
    let first = points.first().ok_or(GeometryError::EmptyInput)?;
    let dim = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    if dim != 2 {
        return Err(GeometryError::UnsupportedDimension(dim));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let raw: Vec<P2<T>> = points.iter().map(|p| p.as_xy()).collect();
    let hull = plane::monotone_chain(&raw, T::lit(TOL_GEO));
    match hull.len() {
        0 | 1 => Err(GeometryError::CoincidentPoints),
        2 => {
            let (a, b) = (hull[0], hull[1]);
            // Segment: two opposite side constraints plus end caps.
            let len = plane::dist2(a, b);
            let d = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let n = [d[1], -d[0]];
            let side = n[0] * a[0] + n[1] * a[1];
            let halfspaces = vec![
                Halfspace {
                    normal: n.to_vec(),
                    offset: side,
                },
                Halfspace {
                    normal: vec![-n[0], -n[1]],
                    offset: -side,
                },
                Halfspace {
                    normal: d.to_vec(),
                    offset: d[0] * b[0] + d[1] * b[1],
                },
                Halfspace {
                    normal: vec![-d[0], -d[1]],
                    offset: -(d[0] * a[0] + d[1] * a[1]),
                },
            ];
            Ok(Polytope {
                vertices: vec![Point::from(a), Point::from(b)],
                halfspaces,
                degenerate: true,
            })
        }
        _ => Ok(Polytope::from_ccw(hull)),
    }
}

/// Bounded finite union of convex polytopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Polyunion<T> {
    parts: Vec<Polytope<T>>,
}

impl<T: Scalar> Polyunion<T> {
    pub fn new(parts: Vec<Polytope<T>>) -> Result<Self, GeometryError> {
        let first = parts.first().ok_or(GeometryError::EmptyInput)?;
        let dim = first.dim();
        if let Some(p) = parts.iter().find(|p| p.dim() != dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        Ok(Polyunion { parts })
    }

    pub fn single(part: Polytope<T>) -> Self {
        Polyunion { parts: vec![part] }
    }

    pub fn parts(&self) -> &[Polytope<T>] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts.first().map(|p| p.dim()).unwrap_or(0)
    }

    pub fn contains(&self, p: &Point<T>, tol: T) -> bool {
        self.parts.iter().any(|part| part.contains(p, tol))
    }

    /// Sum of part areas; parts overlap only on null sets.
    pub fn area(&self) -> T {
        self.parts.iter().map(|p| p.area()).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point<T>> {
        self.parts.iter().flat_map(|p| p.vertices().iter())
    }

    pub fn bounds(&self) -> (Vec<T>, Vec<T>) {
        let dim = self.dim();
        let mut lo = vec![T::infinity(); dim];
        let mut hi = vec![T::neg_infinity(); dim];
        for part in &self.parts {
            let (l, h) = part.bounds();
            for i in 0..dim {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> T {
        let verts: Vec<&Point<T>> = self.vertices().collect();
        let mut d = T::zero();
        for (i, a) in verts.iter().enumerate() {
            for b in &verts[i + 1..] {
                d = d.max(a.dist(b));
            }
        }
        d
    }

    pub fn scaled(&self, beta: T) -> Result<Polyunion<T>, GeometryError> {
        scale(self, beta)
    }
}

impl<T: Scalar> From<Polytope<T>> for Polyunion<T> {
    fn from(p: Polytope<T>) -> Self {
        Polyunion::single(p)
    }
}

/// Scales a polyunion about the origin.
pub fn scale<T: Scalar>(shape: &Polyunion<T>, beta: T) -> Result<Polyunion<T>, GeometryError> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(GeometryError::NonPositiveScale);
    }
    Ok(Polyunion {
        parts: shape.parts.iter().map(|p| p.scaled(beta)).collect(),
    })
}

/// True when `p` is within `tol` of `shape`.
pub fn contains<T: Scalar>(shape: &Polyunion<T>, p: &Point<T>, tol: T) -> bool {
    shape.contains(p, tol)
}

/// Decides `inner ⊆ outer` up to `tol` by explicit polygon differencing.
///
/// Outside the plane the test degrades to per-part vertex containment, which
/// is exact only when every inner part fits in a single outer part.
pub fn polyunion_subset<T: Scalar>(inner: &Polyunion<T>, outer: &Polyunion<T>, tol: T) -> bool {
    if inner.dim() != outer.dim() {
        return false;
    }
    if outer.parts.len() == 1 || inner.dim() != 2 {
        return inner.parts.iter().all(|ip| {
            outer
                .parts
                .iter()
                .any(|op| ip.vertices().iter().all(|v| op.contains(v, tol)))
        });
    }
    planar_subset(inner, outer, tol)
}

fn planar_subset<T: Scalar>(inner: &Polyunion<T>, outer: &Polyunion<T>, tol: T) -> bool {
    let cutters: Vec<_> = outer.parts.iter().map(|p| p.halfplanes()).collect();
    inner.parts.iter().all(|part| {
        if part.is_degenerate() {
            return part.vertices().iter().all(|v| outer.contains(v, tol))
                && planar_segment_covered(part, outer, tol);
        }
        plane::subtract_all(vec![part.ring()], &cutters, tol).is_empty()
    })
}

fn planar_segment_covered<T: Scalar>(seg: &Polytope<T>, outer: &Polyunion<T>, tol: T) -> bool {
    // Dense check along a degenerate (segment) part.
    let a = &seg.vertices()[0];
    let b = &seg.vertices()[1];
    let steps = 256;
    (0..=steps).all(|i| {
        let t = T::lit(i as f64 / steps as f64);
        outer.contains(&a.lerp(b, t), tol)
    })
}
