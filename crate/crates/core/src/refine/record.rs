use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::Dataset;
use crate::geometry::{Polyunion, Tessellation};
use crate::lyapunov::PwaFunction;
use crate::socp::SlackMap;

use super::{RefineError, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything known about iteration `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationState {
    pub k: usize,
    #[serde(rename = "X_k")]
    pub x: Polyunion<f64>,
    #[serde(rename = "A_k")]
    pub a: Polyunion<f64>,
    #[serde(rename = "D_k")]
    pub data: Option<Dataset<f64>>,
    #[serde(rename = "tess_k")]
    pub tess: Option<Tessellation<f64>>,
    #[serde(rename = "V_k")]
    pub v: Option<PwaFunction<f64>>,
    pub alpha_k: Option<f64>,
    #[serde(rename = "C_k")]
    pub c: Option<Polyunion<f64>>,
    pub beta_k: Option<f64>,
    #[serde(default)]
    pub slacks: Option<SlackMap>,
    /// Restarts spent on this iteration before it was accepted.
    #[serde(default)]
    pub restarts: usize,
    /// Why each restart of this iteration was needed.
    #[serde(default)]
    pub restart_reasons: Vec<String>,
    #[serde(default)]
    pub diagnostics: Option<Diagnostics>,
}

impl IterationState {
    pub fn initial(x: Polyunion<f64>, a: Polyunion<f64>) -> Self {
        IterationState {
            k: 0,
            x,
            a,
            data: None,
            tess: None,
            v: None,
            alpha_k: None,
            c: None,
            beta_k: None,
            slacks: None,
            restarts: 0,
            restart_reasons: Vec::new(),
            diagnostics: None,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.v.is_some()
    }
}

/// Numbers gathered while solving one iteration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solver: String,
    /// Largest constraint residual of the raw solver output.
    pub raw_residual: f64,
    /// Largest constraint residual after polishing.
    pub residual: f64,
    pub objective: f64,
    pub coverage_margin: f64,
    pub mesh_vertices: usize,
    pub cells: usize,
    pub certified_cells: usize,
    pub solve_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Certified,
    MaxIter,
    Failed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "CERTIFIED",
            Verdict::MaxIter => "MAX_ITER",
            Verdict::Failed => "FAILED",
        })
    }
}

/// Reference to a certified level set `L^{V_k}_{α_k}` stored in `states[k]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetRef {
    pub k: usize,
    pub alpha: f64,
}

/// Persisted outcome of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub config: RunConfig,
    pub states: Vec<IterationState>,
    pub verdict: Verdict,
    pub certified_level_sets: Vec<LevelSetRef>,
    #[serde(default)]
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RefineError> {
        let rec: RunRecord = serde_json::from_str(text).map_err(|e| RefineError::Record(e.to_string()))?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(RefineError::Record(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                rec.schema_version
            )));
        }
        Ok(rec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RefineError> {
        std::fs::write(path.as_ref(), self.to_json()).map_err(|e| RefineError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RefineError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| RefineError::Io(e.to_string()))?;
        RunRecord::from_json(&text)
    }

    /// States that carry a solved candidate.
    pub fn solved_states(&self) -> impl Iterator<Item = &IterationState> {
        self.states.iter().filter(|s| s.is_solved())
    }
}
