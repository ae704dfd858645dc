use serde::{Deserialize, Serialize};

use crate::dynamics::Dataset;
use crate::geometry::{shared_vertex_map, SharedVertex, Tessellation};

use super::SocpError;

/// Inputs of the learning problem: mesh, data, slack floor `μ`, Lipschitz
/// bound `M` and the data used by each cell.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    tess: Tessellation<f64>,
    data: Dataset<f64>,
    mu: f64,
    lipschitz: f64,
    selection: Vec<Vec<usize>>,
}

impl ProblemSpec {
    pub fn new(
        tess: Tessellation<f64>,
        data: Dataset<f64>,
        mu: f64,
        lipschitz: f64,
        selection: Vec<Vec<usize>>,
    ) -> Result<Self, SocpError> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(SocpError::InvalidParameter("mu must be finite and non-negative"));
        }
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(SocpError::InvalidParameter("Lipschitz bound must be positive"));
        }
        if tess.num_cells() == 0 {
            return Err(SocpError::EmptyCells);
        }
        if let Some(n) = data.dim() {
            if n != tess.dim() {
                return Err(SocpError::DimensionMismatch {
                    expected: tess.dim(),
                    found: n,
                });
            }
        }
        if selection.len() != tess.num_cells() {
            return Err(SocpError::SelectionLength {
                cells: tess.num_cells(),
                found: selection.len(),
            });
        }
        for (c, sel) in selection.iter().enumerate() {
            if sel.is_empty() {
                return Err(SocpError::EmptySelection { cell: c });
            }
            if let Some(&d) = sel.iter().find(|&&d| d >= data.len()) {
                return Err(SocpError::DatumOutOfRange { cell: c, datum: d });
            }
        }
        let spec = ProblemSpec {
            tess,
            data,
            mu,
            lipschitz,
            selection,
        };
        let uncovered = spec.uncovered_cells();
        if !uncovered.is_empty() {
            log::warn!(
                "{} cells have a vertex outside every selected data ball (first: {})",
                uncovered.len(),
                uncovered[0]
            );
        }
        Ok(spec)
    }

    /// Every cell uses every datum.
    pub fn full(tess: Tessellation<f64>, data: Dataset<f64>, mu: f64, lipschitz: f64) -> Result<Self, SocpError> {
        let all: Vec<usize> = (0..data.len()).collect();
        let selection = vec![all; tess.num_cells()];
        ProblemSpec::new(tess, data, mu, lipschitz, selection)
    }

    pub fn tess(&self) -> &Tessellation<f64> {
        &self.tess
    }

    pub fn data(&self) -> &Dataset<f64> {
        &self.data
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn selection(&self) -> &[Vec<usize>] {
        &self.selection
    }

    /// Cells with a vertex not strictly inside any selected datum ball.
    pub fn uncovered_cells(&self) -> Vec<usize> {
        let samples = self.data.samples();
        (0..self.tess.num_cells())
            .filter(|&c| {
                self.tess.cell_points(c).iter().any(|v| {
                    !self.selection[c]
                        .iter()
                        .any(|&d| v.dist(&samples[d].x) < samples[d].radius(self.lipschitz))
                })
            })
            .collect()
    }
}

/// Per cell, the `k_nearest` data closest to the centroid plus, for every
/// vertex of the cell, the datum whose ball covers it with the largest margin.
pub fn select_data(tess: &Tessellation<f64>, data: &Dataset<f64>, k_nearest: usize) -> Result<Vec<Vec<usize>>, SocpError> {
    if data.is_empty() {
        return Err(SocpError::EmptyDataset);
    }
    if k_nearest == 0 {
        return Err(SocpError::InvalidParameter("k_nearest must be at least 1"));
    }
    let samples = data.samples();
    let radii = data.radii();
    let best_cover: Vec<Option<usize>> = tess
        .vertices()
        .iter()
        .map(|v| {
            let mut best: Option<(f64, usize)> = None;
            for (d, s) in samples.iter().enumerate() {
                let gap = radii[d] - v.dist(&s.x);
                if gap > 0.0 && best.is_none_or(|(g, _)| gap > g) {
                    best = Some((gap, d));
                }
            }
            best.map(|(_, d)| d)
        })
        .collect();
    let k = k_nearest.min(samples.len());
    let mut out = Vec::with_capacity(tess.num_cells());
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    for (c, cell) in tess.cells().iter().enumerate() {
        let centroid = tess.centroid(c);
        dist.clear();
        dist.extend(samples.iter().enumerate().map(|(d, s)| (centroid.dist(&s.x), d)));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
        }
        let mut sel: Vec<usize> = dist[..k].iter().map(|&(_, d)| d).collect();
        sel.extend(cell.vertex_ids.iter().filter_map(|&v| best_cover[v]));
        sel.sort_unstable();
        sel.dedup();
        out.push(sel);
    }
    Ok(out)
}

/// Column positions of the named variables.
///
/// Per cell the layout is `g_c` (n), `b_c`, `s_{0..=n,c}`, then `(γ_{d,c}, t_{d,c})`
/// for each selected datum in selection order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableIndex {
    dim: usize,
    offsets: Vec<usize>,
    selected: Vec<usize>,
    total: usize,
}

impl VariableIndex {
    pub fn new(dim: usize, selection: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(selection.len());
        let mut selected = Vec::with_capacity(selection.len());
        let mut at = 0;
        for sel in selection {
            offsets.push(at);
            selected.push(sel.len());
            at += dim + 1 + (dim + 1) + (dim + 1) * sel.len();
        }
        VariableIndex {
            dim,
            offsets,
            selected,
            total: at,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.offsets.len()
    }

    pub fn num_selected(&self, c: usize) -> usize {
        self.selected[c]
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn g(&self, c: usize, j: usize) -> usize {
        self.offsets[c] + j
    }

    pub fn b(&self, c: usize) -> usize {
        self.offsets[c] + self.dim
    }

    pub fn s(&self, c: usize, i: usize) -> usize {
        self.offsets[c] + self.dim + 1 + i
    }

    /// Component `j` of `γ` for the `k`-th selected datum of cell `c`.
    pub fn gamma(&self, c: usize, k: usize, j: usize) -> usize {
        self.offsets[c] + 2 * (self.dim + 1) + k * (self.dim + 1) + j
    }

    pub fn t(&self, c: usize, k: usize) -> usize {
        self.gamma(c, k, self.dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    Zero,
    Nonneg,
    Soc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub dim: usize,
}

/// `min qᵀx` subject to `b − A x ∈ K`, with `K` a product of the cone blocks
/// taken in row order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    pub objective: Vec<(usize, f64)>,
    pub triplets: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    pub cones: Vec<ConeBlock>,
    pub num_vars: usize,
    pub index: Option<VariableIndex>,
}

/// Row counts per constraint family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowCounts {
    pub continuity: usize,
    pub gradient: usize,
    pub slack_floor: usize,
    pub decrease: usize,
    pub soc: usize,
}

impl RowCounts {
    pub fn total(&self) -> usize {
        self.continuity + self.gradient + self.slack_floor + self.decrease + self.soc
    }
}

impl ConicProblem {
    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.num_vars];
        for &(j, v) in &self.objective {
            q[j] += v;
        }
        q
    }

    /// `b − A x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.rhs.clone();
        for &(i, j, v) in &self.triplets {
            r[i] -= v * x[j];
        }
        r
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, v)| v * x[j]).sum()
    }

    /// Largest cone violation of `b − A x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        let mut at = 0;
        let mut worst: f64 = 0.0;
        for block in &self.cones {
            let z = &r[at..at + block.dim];
            let v = match block.kind {
                ConeKind::Zero => z.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                ConeKind::Nonneg => z.iter().fold(0.0f64, |m, v| m.max(-v)),
                ConeKind::Soc => (crate::geometry::norm(&z[1..]) - z[0]).max(0.0),
            };
            worst = worst.max(v);
            at += block.dim;
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.violation(x) <= tol
    }
}

/// Continuity pairs with full row rank: at each vertex, the cells sharing it
/// (sorted by id) are chained `c_0–c_1, c_1–c_2, …`. Equality along the chain
/// is equivalent to equality for every pair of [`shared_vertex_map`].
pub fn continuity_pairs<T: crate::scalar::Scalar>(tess: &Tessellation<T>) -> Vec<SharedVertex> {
    let all = shared_vertex_map(tess);
    let mut out = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let v = all[i].vertex;
        let mut cells: Vec<usize> = Vec::new();
        while i < all.len() && all[i].vertex == v {
            cells.push(all[i].cell);
            cells.push(all[i].other);
            i += 1;
        }
        cells.sort_unstable();
        cells.dedup();
        out.extend(cells.windows(2).map(|w| SharedVertex {
            vertex: v,
            cell: w[0],
            other: w[1],
        }));
    }
    out
}

/// Encodes the learning problem in conic standard form.
///
/// Row blocks, in order: continuity at shared vertices and `Σ_d γ_{d,c} = g_c`
/// (zero cone); `s_{i,c} ≥ −μ` and the decrease rows
/// `Σ_d γ_{d,c}·f_d + M |v_{i,c} − x_d| t_{d,c} ≤ s_{i,c}` (non-negative cone);
/// then one `(t_{d,c}, γ_{d,c})` second-order cone per cell and datum.
pub fn assemble(spec: &ProblemSpec) -> Result<(ConicProblem, RowCounts), SocpError> {
    let tess = spec.tess();
    let n = tess.dim();
    let samples = spec.data().samples();
    let m = spec.lipschitz();
    let index = VariableIndex::new(n, spec.selection());
    let verts = tess.vertices();
    let shared: Vec<SharedVertex> = continuity_pairs(tess);

    let mut triplets = Vec::new();
    let mut rhs = Vec::new();
    let mut row = 0;

    for sv in &shared {
        let v = &verts[sv.vertex];
        for j in 0..n {
            triplets.push((row, index.g(sv.cell, j), v[j]));
            triplets.push((row, index.g(sv.other, j), -v[j]));
        }
        triplets.push((row, index.b(sv.cell), 1.0));
        triplets.push((row, index.b(sv.other), -1.0));
        rhs.push(0.0);
        row += 1;
    }
    for c in 0..tess.num_cells() {
        for j in 0..n {
            for k in 0..index.num_selected(c) {
                triplets.push((row, index.gamma(c, k, j), 1.0));
            }
            triplets.push((row, index.g(c, j), -1.0));
            rhs.push(0.0);
            row += 1;
        }
    }
    let zero_rows = row;

    for c in 0..tess.num_cells() {
        for i in 0..=n {
            triplets.push((row, index.s(c, i), -1.0));
            rhs.push(spec.mu());
            row += 1;
        }
    }
    for (c, cell) in tess.cells().iter().enumerate() {
        for (i, &vid) in cell.vertex_ids.iter().enumerate() {
            let v = &verts[vid];
            for (k, &d) in spec.selection()[c].iter().enumerate() {
                for j in 0..n {
                    triplets.push((row, index.gamma(c, k, j), samples[d].f[j]));
                }
                triplets.push((row, index.t(c, k), m * v.dist(&samples[d].x)));
            }
            triplets.push((row, index.s(c, i), -1.0));
            rhs.push(0.0);
            row += 1;
        }
    }
    let nonneg_rows = row - zero_rows;

    let mut cones = vec![
        ConeBlock {
            kind: ConeKind::Zero,
            dim: zero_rows,
        },
        ConeBlock {
            kind: ConeKind::Nonneg,
            dim: nonneg_rows,
        },
    ];
    let mut soc_rows = 0;
    for c in 0..tess.num_cells() {
        for k in 0..index.num_selected(c) {
            triplets.push((row, index.t(c, k), -1.0));
            for j in 0..n {
                triplets.push((row + 1 + j, index.gamma(c, k, j), -1.0));
            }
            rhs.extend(std::iter::repeat_n(0.0, n + 1));
            row += n + 1;
            soc_rows += n + 1;
            cones.push(ConeBlock {
                kind: ConeKind::Soc,
                dim: n + 1,
            });
        }
    }

    let objective = (0..tess.num_cells())
        .flat_map(|c| (0..=n).map(move |i| (c, i)))
        .map(|(c, i)| (index.s(c, i), 1.0))
        .collect();
    let counts = RowCounts {
        continuity: shared.len(),
        gradient: n * tess.num_cells(),
        slack_floor: (n + 1) * tess.num_cells(),
        decrease: (n + 1) * tess.num_cells(),
        soc: soc_rows,
    };
    debug_assert_eq!(counts.total(), row);
    let problem = ConicProblem {
        objective,
        triplets,
        rhs,
        cones: cones.into_iter().filter(|b| b.dim > 0).collect(),
        num_vars: index.total(),
        index: Some(index),
    };
    Ok((problem, counts))
}
