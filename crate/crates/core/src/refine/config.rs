use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RefineError;

/// Parameters of a certification run. Serialized as a flat TOML document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Outer box, one `[lo, hi]` pair per state dimension.
    #[serde(rename = "l_X")]
    pub l_x: Vec<[f64; 2]>,
    /// Initial attracted box, one `[lo, hi]` pair per state dimension.
    #[serde(rename = "l_A")]
    pub l_a: Vec<[f64; 2]>,
    pub mu: f64,
    #[serde(rename = "M")]
    pub lipschitz: f64,
    pub k_max: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::shrink_rho")]
    pub shrink_rho: f64,
    #[serde(default = "defaults::refine_factor")]
    pub refine_factor: f64,
    #[serde(default = "defaults::data_count")]
    pub data_count: usize,
    #[serde(default = "defaults::k_nearest")]
    pub k_nearest: usize,
    /// Vertex budget of the first mesh of every iteration.
    #[serde(default = "defaults::mesh_vertices")]
    pub mesh_vertices: usize,
    /// `pendulum`, `vanderpol`, `linear` or `csv:<path>`.
    #[serde(default = "defaults::field")]
    pub field: String,
    #[serde(default = "defaults::max_restarts")]
    pub max_restarts: usize,
    /// Growth of `data_count` on a restart.
    #[serde(default = "defaults::data_growth")]
    pub data_growth: f64,
    /// Dilation of the region sampled around the mesh.
    #[serde(default = "defaults::dilation")]
    pub dilation: f64,
    /// Cap on generated samples, as a multiple of `data_count`.
    #[serde(default = "defaults::cap_factor")]
    pub cap_factor: usize,
    /// Mesh grading: target cell size is `|x| + grading · r_A`, with `r_A`
    /// the radius of the current attracted set.
    #[serde(default = "defaults::grading")]
    pub grading: f64,
    #[serde(default = "defaults::solver_tol")]
    pub solver_tol: f64,
    /// Share of mesh vertices at which the field is also sampled on the
    /// first attempt of an iteration. Restarts sample every vertex.
    #[serde(default = "defaults::vertex_data")]
    pub vertex_data: f64,
}

mod defaults {
    pub fn shrink_rho() -> f64 {
        0.5
    }
    pub fn refine_factor() -> f64 {
        1.5
    }
    pub fn data_count() -> usize {
        300
    }
    pub fn k_nearest() -> usize {
        60
    }
    pub fn mesh_vertices() -> usize {
        600
    }
    pub fn field() -> String {
        "pendulum".into()
    }
    pub fn max_restarts() -> usize {
        3
    }
    pub fn data_growth() -> f64 {
        1.25
    }
    pub fn dilation() -> f64 {
        1.2
    }
    pub fn cap_factor() -> usize {
        4
    }
    pub fn grading() -> f64 {
        0.5
    }
    pub fn solver_tol() -> f64 {
        1e-9
    }
    pub fn vertex_data() -> f64 {
        0.5
    }
}

impl RunConfig {
    /// The reference pendulum setup: `X = [−1, 1]²`, `A = 0.1·X`, `μ = 5`, `M = 2.5`.
    pub fn pendulum() -> Self {
        RunConfig {
            l_x: vec![[-1.0, 1.0]; 2],
            l_a: vec![[-0.1, 0.1]; 2],
            mu: 5.0,
            lipschitz: 2.5,
            k_max: 10,
            seed: 0,
            shrink_rho: defaults::shrink_rho(),
            refine_factor: defaults::refine_factor(),
            data_count: defaults::data_count(),
            k_nearest: defaults::k_nearest(),
            mesh_vertices: defaults::mesh_vertices(),
            field: defaults::field(),
            max_restarts: defaults::max_restarts(),
            data_growth: defaults::data_growth(),
            dilation: defaults::dilation(),
            cap_factor: defaults::cap_factor(),
            grading: defaults::grading(),
            solver_tol: defaults::solver_tol(),
            vertex_data: defaults::vertex_data(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, RefineError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| RefineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RefineError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| RefineError::Io(e.to_string()))?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), RefineError> {
        let bad = |field: &str, why: &str| Err(RefineError::Config(format!("field `{field}`: {why}")));
        if self.l_x.len() != 2 || self.l_a.len() != 2 {
            return bad("l_X", "only planar systems are supported (two [lo, hi] rows)");
        }
        for (name, b) in [("l_X", &self.l_x), ("l_A", &self.l_a)] {
            if b.iter().any(|[lo, hi]| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
                return bad(name, "every row must satisfy lo < hi");
            }
            if b.iter().any(|[lo, hi]| !(*lo < 0.0 && *hi > 0.0)) {
                return bad(name, "the origin must be interior");
            }
        }
        if self.l_a.iter().zip(&self.l_x).any(|(a, x)| !(a[0] > x[0] && a[1] < x[1])) {
            return bad("l_A", "must lie strictly inside l_X");
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return bad("mu", "must be finite and non-negative");
        }
        if !(self.lipschitz > 0.0) || !self.lipschitz.is_finite() {
            return bad("M", "must be positive");
        }
        if !(self.shrink_rho > 0.0 && self.shrink_rho < 1.0) {
            return bad("shrink_rho", "must lie in (0, 1)");
        }
        if !(self.refine_factor > 1.0) {
            return bad("refine_factor", "must exceed 1");
        }
        if self.data_count == 0 {
            return bad("data_count", "must be at least 1");
        }
        if self.k_nearest == 0 {
            return bad("k_nearest", "must be at least 1");
        }
        if self.mesh_vertices < 8 {
            return bad("mesh_vertices", "must be at least 8");
        }
        if !(self.data_growth >= 1.0) {
            return bad("data_growth", "must be at least 1");
        }
        if !(self.dilation >= 1.0) {
            return bad("dilation", "must be at least 1");
        }
        if self.cap_factor == 0 {
            return bad("cap_factor", "must be at least 1");
        }
        if !(self.grading > 0.0) {
            return bad("grading", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.vertex_data) {
            return bad("vertex_data", "must lie in [0, 1]");
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1e-3) {
            return bad("solver_tol", "must lie in (0, 1e-3)");
        }
        Ok(())
    }
}
