use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus, SupportedConeT,
    ZeroConeT,
};
use serde::{Deserialize, Serialize};

use super::problem::{ConeKind, ConicProblem, VariableIndex};
use super::SocpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Raw primal output of a conic solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOutput {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Solver-specific termination message.
    pub detail: String,
}

/// Anything able to solve a [`ConicProblem`] in its block structure.
pub trait ConicSolver {
    fn solve(&self, problem: &ConicProblem) -> Result<SolverOutput, SocpError>;

    fn name(&self) -> &str;
}

/// Interior-point solver backed by Clarabel.
#[derive(Clone, Debug)]
pub struct ClarabelSolver {
    pub tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        ClarabelSolver {
            tol: 1e-9,
            max_iter: 200,
            verbose: false,
        }
    }
}

impl ClarabelSolver {
    pub fn with_tol(tol: f64) -> Self {
        ClarabelSolver {
            tol,
            ..Default::default()
        }
    }
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, problem: &ConicProblem) -> Result<SolverOutput, SocpError> {
        let n = problem.num_vars;
        let m = problem.num_rows();
        let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        for &(i, j, v) in &problem.triplets {
            if v != 0.0 {
                rows.push(i);
                cols.push(j);
                vals.push(v);
            }
        }
        let a = CscMatrix::new_from_triplets(m, n, rows, cols, vals);
        let p = CscMatrix::zeros((n, n));
        let q = problem.objective_dense();
        let cones: Vec<SupportedConeT<f64>> = problem
            .cones
            .iter()
            .map(|b| match b.kind {
                ConeKind::Zero => ZeroConeT(b.dim),
                ConeKind::Nonneg => NonnegativeConeT(b.dim),
                ConeKind::Soc => SecondOrderConeT(b.dim),
            })
            .collect();
        let settings = DefaultSettingsBuilder::default()
            .verbose(self.verbose)
            .max_iter(self.max_iter)
            .tol_feas(self.tol)
            .tol_gap_abs(self.tol)
            .tol_gap_rel(self.tol)
            .build()
            .map_err(|e| SocpError::Solver(e.to_string()))?;
        let mut solver =
            DefaultSolver::new(&p, &q, &a, &problem.rhs, &cones, settings).map_err(|e| SocpError::Solver(e.to_string()))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
            _ => SolveStatus::NumericalFailure,
        };
        log::debug!(
            "clarabel: {:?} after {} iterations, objective {:.6e}, {} vars, {} rows",
            sol.status,
            sol.iterations,
            sol.obj_val,
            n,
            m
        );
        Ok(SolverOutput {
            status,
            x: sol.x.clone(),
            objective: sol.obj_val,
            detail: format!("{:?} after {} iterations", sol.status, sol.iterations),
        })
    }

    fn name(&self) -> &str {
        "clarabel"
    }
}

/// Solver output with named access to the learning variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub index: VariableIndex,
    pub detail: String,
}

impl ConicSolution {
    pub fn from_values(index: VariableIndex, x: Vec<f64>, status: SolveStatus) -> Self {
        let objective = (0..index.num_cells())
            .flat_map(|c| (0..=index.dim()).map(move |i| (c, i)))
            .map(|(c, i)| x[index.s(c, i)])
            .sum();
        ConicSolution {
            status,
            x,
            objective,
            index,
            detail: String::new(),
        }
    }

    pub fn g(&self, c: usize) -> Vec<f64> {
        (0..self.index.dim()).map(|j| self.x[self.index.g(c, j)]).collect()
    }

    pub fn b(&self, c: usize) -> f64 {
        self.x[self.index.b(c)]
    }

    pub fn s(&self, c: usize, i: usize) -> f64 {
        self.x[self.index.s(c, i)]
    }

    pub fn gamma(&self, c: usize, k: usize) -> Vec<f64> {
        (0..self.index.dim()).map(|j| self.x[self.index.gamma(c, k, j)]).collect()
    }

    pub fn t(&self, c: usize, k: usize) -> f64 {
        self.x[self.index.t(c, k)]
    }

    /// `Σ s_{i,c}` recomputed from the slack values.
    pub fn slack_sum(&self) -> f64 {
        (0..self.index.num_cells())
            .flat_map(|c| (0..=self.index.dim()).map(move |i| (c, i)))
            .map(|(c, i)| self.s(c, i))
            .sum()
    }
}

/// Solves `problem` with `solver`, attaching the variable index.
pub fn solve(problem: &ConicProblem, solver: &dyn ConicSolver) -> Result<ConicSolution, SocpError> {
    let index = problem.index.clone().ok_or(SocpError::MissingIndex)?;
    let out = solver.solve(problem)?;
    if out.x.len() != problem.num_vars {
        return Err(SocpError::Solver(format!(
            "{} returned {} values for {} variables",
            solver.name(),
            out.x.len(),
            problem.num_vars
        )));
    }
    Ok(ConicSolution {
        status: out.status,
        x: out.x,
        objective: out.objective,
        index,
        detail: out.detail,
    })
}
