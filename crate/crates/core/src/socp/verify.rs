use crate::geometry::{norm, shared_vertex_map};

use super::problem::ProblemSpec;
use super::solver::ConicSolution;

/// Largest residual of each constraint family, evaluated in the original
/// (non-conic) form with exact norms `|γ_{d,c}|`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VerificationReport {
    /// `max(−μ − s_{i,c}, 0)`.
    pub slack_floor: f64,
    /// `|(g_c − g_{c'})·v + b_c − b_{c'}|`.
    pub continuity: f64,
    /// `|Σ_d γ_{d,c} − g_c|`.
    pub gradient: f64,
    /// `max(Σ_d γ·f_d + M |γ| |v − x_d| − s_{i,c}, 0)`.
    pub decrease: f64,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        self.slack_floor.max(self.continuity).max(self.gradient).max(self.decrease)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

pub fn verify_solution(spec: &ProblemSpec, sol: &ConicSolution) -> VerificationReport {
    let tess = spec.tess();
    let verts = tess.vertices();
    let samples = spec.data().samples();
    let n = tess.dim();
    let mut report = VerificationReport::default();
    for c in 0..tess.num_cells() {
        for i in 0..=n {
            report.slack_floor = report.slack_floor.max(-spec.mu() - sol.s(c, i));
        }
    }
    for sv in shared_vertex_map(tess) {
        let v = &verts[sv.vertex];
        let a = v.dot(&sol.g(sv.cell)) + sol.b(sv.cell);
        let b = v.dot(&sol.g(sv.other)) + sol.b(sv.other);
        report.continuity = report.continuity.max((a - b).abs());
    }
    for (c, cell) in tess.cells().iter().enumerate() {
        let sel = &spec.selection()[c];
        let gammas: Vec<Vec<f64>> = (0..sel.len()).map(|k| sol.gamma(c, k)).collect();
        let norms: Vec<f64> = gammas.iter().map(|g| norm(g)).collect();
        let g = sol.g(c);
        let mut sum = vec![0.0; n];
        for gm in &gammas {
            for j in 0..n {
                sum[j] += gm[j];
            }
        }
        let diff: Vec<f64> = (0..n).map(|j| sum[j] - g[j]).collect();
        report.gradient = report.gradient.max(norm(&diff));
        for (i, &vid) in cell.vertex_ids.iter().enumerate() {
            let v = &verts[vid];
            let lhs: f64 = sel
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    samples[d].f.dot(&gammas[k]) + spec.lipschitz() * norms[k] * v.dist(&samples[d].x)
                })
                .sum();
            report.decrease = report.decrease.max(lhs - sol.s(c, i));
        }
    }
    report.slack_floor = report.slack_floor.max(0.0);
    report.decrease = report.decrease.max(0.0);
    report
}
