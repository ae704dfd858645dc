use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    check_learnability, evaluate, pendulum, Sample, van_der_pol, DataGenerator, Dataset, LinearField, SamplingStrategy, VectorField,
};
use crate::geometry::{box_polytope, convex_hull, polyunion_subset, refine_to_count, scale, tessellate_annulus, Point, Polyunion, Tessellation};
use crate::lyapunov::{certified_level_outside, sublevel_contains, PwaFunction};
use crate::socp::{
    assemble, extract_candidate, polish, select_data, solve, verify_solution, ClarabelSolver, ProblemSpec, SlackMap,
    SolveStatus, TOL_FEAS,
};
use crate::scalar::TOL_GEO;

use super::record::{Diagnostics, IterationState, LevelSetRef, RunRecord, Verdict, SCHEMA_VERSION};
use super::{RefineError, RunConfig};

/// Bisection precision of the upscaling search.
pub const TOL_BETA: f64 = 1e-3;
/// Upper end of the upscaling search.
pub const BETA_CAP: f64 = 64.0;

/// Where field samples come from.
pub enum DataSource {
    /// A field that can be sampled anywhere.
    Field(Box<dyn VectorField<f64>>),
    /// A fixed dataset; iterations use the samples falling near their region.
    Samples(Dataset<f64>),
}

impl DataSource {
    /// Resolves `pendulum`, `vanderpol`, `linear` or `csv:<path>`.
    pub fn from_name(name: &str, lipschitz: f64) -> Result<Self, RefineError> {
        match name {
            "pendulum" => Ok(DataSource::Field(Box::new(pendulum::<f64>()))),
            "vanderpol" => Ok(DataSource::Field(Box::new(van_der_pol::<f64>()))),
            "linear" => Ok(DataSource::Field(Box::new(LinearField::<f64>::contraction(2)))),
            other => match other.strip_prefix("csv:") {
                Some(path) => Ok(DataSource::Samples(
                    Dataset::load(path, lipschitz).map_err(|e| RefineError::Data(e.to_string()))?,
                )),
                None => Err(RefineError::Config(format!("field `field`: unknown field `{other}`"))),
            },
        }
    }
}

/// Why an iteration was rejected.
#[derive(Clone, Debug, PartialEq)]
pub enum FailureReason {
    /// The solver reported infeasibility.
    DataInsufficient,
    /// The dataset does not cover every mesh vertex.
    Coverage,
    /// `C_{k−1}` is not inside the new sublevel set.
    Chain,
    /// No level separates `A_k` from `∂X_k` and the uncertified cells.
    NoLevel,
    /// Not even `β = 1` keeps `C_k` inside the sublevel set.
    NoBeta,
    /// The solver failed, or its output did not verify.
    Numerical(String),
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::DataInsufficient => write!(f, "DATA_INSUFFICIENT"),
            FailureReason::Coverage => write!(f, "COVERAGE"),
            FailureReason::Chain => write!(f, "CHAIN"),
            FailureReason::NoLevel => write!(f, "NO_LEVEL"),
            FailureReason::NoBeta => write!(f, "NO_BETA"),
            FailureReason::Numerical(m) => write!(f, "NUMERICAL ({m})"),
        }
    }
}

/// Result of one loop body.
#[derive(Clone, Debug)]
pub enum StepOutcome {
    /// The solved state and the state of the next iteration.
    Next(Box<IterationState>, Box<IterationState>),
    Certified(Box<IterationState>),
    Failed(FailureReason, Box<IterationState>),
}

/// `conv(A ∪ {vertices with a non-negative slack})`, or `A` itself when
/// every slack is negative.
pub fn uncertified_region(
    slacks: &SlackMap,
    tess: &Tessellation<f64>,
    a: &Polyunion<f64>,
) -> Result<Polyunion<f64>, RefineError> {
    let ids: Vec<[usize; 3]> = tess.cells().iter().map(|c| c.vertex_ids).collect();
    let bad = slacks.bad_vertices(&ids);
    if bad.is_empty() {
        return Ok(a.clone());
    }
    let mut pts: Vec<Point<f64>> = a.vertices().cloned().collect();
    pts.extend(bad.iter().map(|&v| tess.vertices()[v].clone()));
    Ok(Polyunion::single(convex_hull(&pts)?))
}

/// `conv(A ∪ U)` where `U` is the part of the mesh on which the decrease
/// bound may fail (see [`SlackMap::uncertain_points`]). Contains
/// [`uncertified_region`] and is the `C_k` used by the driver.
pub fn uncertain_hull(
    slacks: &SlackMap,
    tess: &Tessellation<f64>,
    a: &Polyunion<f64>,
) -> Result<Polyunion<f64>, RefineError> {
    let extra = slacks.uncertain_points(tess);
    if extra.is_empty() {
        return Ok(a.clone());
    }
    let mut pts: Vec<Point<f64>> = a.vertices().cloned().collect();
    pts.extend(extra);
    Ok(Polyunion::single(convex_hull(&pts)?))
}

/// Largest `β ∈ [1, 64]` with `β·C` inside the extended sublevel set, found
/// by doubling then bisection to [`TOL_BETA`]; `None` when `β = 1` fails.
pub fn find_beta(c: &Polyunion<f64>, v: &PwaFunction<f64>, alpha: f64, a: &Polyunion<f64>) -> Result<Option<f64>, RefineError> {
    let fits = |beta: f64| -> Result<bool, RefineError> { Ok(sublevel_contains(v, alpha, &scale(c, beta)?, a, c)?) };
    if !fits(1.0)? {
        return Ok(None);
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    loop {
        if !fits(hi)? {
            break;
        }
        lo = hi;
        if hi >= BETA_CAP {
            return Ok(Some(BETA_CAP));
        }
        hi = (hi * 2.0).min(BETA_CAP);
    }
    while hi - lo > TOL_BETA {
        let mid = 0.5 * (lo + hi);
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// `ρ·A`.
pub fn shrink_a(a: &Polyunion<f64>, rho: f64) -> Result<Polyunion<f64>, RefineError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(RefineError::Config("field `shrink_rho`: must lie in (0, 1)".into()));
    }
    Ok(scale(a, rho)?)
}

/// Size of a run's iteration: mesh vertex budget, sample count and seed.
#[derive(Clone, Copy, Debug)]
struct Effort {
    vertices: usize,
    samples: usize,
    seed: u64,
    vertex_share: f64,
}

/// Mesh of `X \ A`, graded towards the origin.
fn build_mesh(state: &IterationState, cfg: &RunConfig, vertices: usize, previous: Option<&Tessellation<f64>>) -> Result<Tessellation<f64>, RefineError> {
    let r_a = state.a.diameter() * 0.5;
    let floor = cfg.grading * r_a;
    let size = move |p: &Point<f64>| p.norm() + floor;
    let base = match previous {
        Some(t) => t.clone(),
        None => tessellate_annulus(&state.x, &state.a, &[])?,
    };
    Ok(refine_to_count(&base, vertices, size)?)
}

fn build_data(
    source: &DataSource,
    tess: &Tessellation<f64>,
    region: &Polyunion<f64>,
    prior: Option<&Dataset<f64>>,
    cfg: &RunConfig,
    effort: Effort,
) -> Result<Dataset<f64>, RefineError> {
    let halo = scale(region, cfg.dilation)?;
    let tol = TOL_GEO;
    let keep: Vec<_> = prior
        .map(|d| d.samples().iter().filter(|s| halo.contains(&s.x, tol)).cloned().collect())
        .unwrap_or_default();
    match source {
        DataSource::Field(field) => {
            let mut keep = keep;
            if effort.vertex_share > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(effort.seed ^ 0x5eed);
                for v in tess.vertices() {
                    if !rng.gen_bool(effort.vertex_share.min(1.0)) {
                        continue;
                    }
                    let f = evaluate(field.as_ref(), v).map_err(|e| RefineError::Data(e.to_string()))?;
                    keep.push(Sample::new(v.clone(), f));
                }
            }
            let generated = DataGenerator::new(
                SamplingStrategy::Augmented {
                    dilation: cfg.dilation,
                    cap_factor: cfg.cap_factor,
                },
                effort.samples,
                effort.seed,
            )
            .lipschitz(cfg.lipschitz)
            .prior(keep)
            .generate(field.as_ref(), tess)
            .map_err(|e| RefineError::Data(e.to_string()))?;
            Ok(generated.data)
        }
        DataSource::Samples(all) => Ok(all
            .filtered(|s| halo.contains(&s.x, tol))
            .with_lipschitz(cfg.lipschitz)
            .map_err(|e| RefineError::Data(e.to_string()))?),
    }
}

/// `X_0` and `A_0` as boxes built from the configured bounds.
fn initial_sets(cfg: &RunConfig) -> Result<(Polyunion<f64>, Polyunion<f64>), RefineError> {
    let lo = |b: &[[f64; 2]]| b.iter().map(|r| r[0]).collect::<Vec<_>>();
    let hi = |b: &[[f64; 2]]| b.iter().map(|r| r[1]).collect::<Vec<_>>();
    Ok((
        box_polytope(&lo(&cfg.l_x), &hi(&cfg.l_x))?.into(),
        box_polytope(&lo(&cfg.l_a), &hi(&cfg.l_a))?.into(),
    ))
}

/// The graded mesh of `X_0 \ A_0` used by the first attempt of a run.
pub fn initial_mesh(cfg: &RunConfig) -> Result<Tessellation<f64>, RefineError> {
    cfg.validate()?;
    let (x0, a0) = initial_sets(cfg)?;
    build_mesh(&IterationState::initial(x0, a0), cfg, cfg.mesh_vertices, None)
}

/// Executes one iteration of the certification loop on `state`.
pub fn step(
    state: &IterationState,
    previous: Option<&IterationState>,
    cfg: &RunConfig,
    source: &DataSource,
) -> Result<StepOutcome, RefineError> {
    step_with(state, previous, cfg, source, None, Effort {
        vertices: cfg.mesh_vertices,
        samples: cfg.data_count,
        seed: iteration_seed(cfg.seed, state.k, 0),
        vertex_share: cfg.vertex_data,
    })
}

fn iteration_seed(seed: u64, k: usize, restart: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add((k as u64) * 101 + restart as u64)
}

fn step_with(
    state: &IterationState,
    previous: Option<&IterationState>,
    cfg: &RunConfig,
    source: &DataSource,
    coarse: Option<&Tessellation<f64>>,
    effort: Effort,
) -> Result<StepOutcome, RefineError> {
    let mut cur = state.clone();
    let tess = build_mesh(state, cfg, effort.vertices, coarse)?;
    let prior = state.data.as_ref().or(previous.and_then(|p| p.data.as_ref()));
    let data = build_data(source, &tess, &state.x, prior, cfg, effort)?;
    let coverage = check_learnability(&tess, &data);
    cur.tess = Some(tess.clone());
    cur.data = Some(data.clone());
    if !coverage.covered {
        log::info!(
            "k={}: {} of {} vertices uncovered",
            state.k,
            coverage.uncovered_vertices.len(),
            tess.vertices().len()
        );
        return Ok(StepOutcome::Failed(FailureReason::Coverage, Box::new(cur)));
    }

    let selection = select_data(&tess, &data, cfg.k_nearest)?;
    let spec = ProblemSpec::new(tess.clone(), data, cfg.mu, cfg.lipschitz, selection)?;
    let (problem, _) = assemble(&spec)?;
    let started = Instant::now();
    let raw = solve(&problem, &ClarabelSolver::with_tol(cfg.solver_tol))?;
    let seconds = started.elapsed().as_secs_f64();
    match raw.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Ok(StepOutcome::Failed(FailureReason::DataInsufficient, Box::new(cur))),
        SolveStatus::NumericalFailure => {
            return Ok(StepOutcome::Failed(FailureReason::Numerical(raw.detail.clone()), Box::new(cur)))
        }
    }
    let raw_report = verify_solution(&spec, &raw);
    let sol = polish(&spec, &raw);
    let report = verify_solution(&spec, &sol);
    if !raw_report.passes(TOL_FEAS) || !report.passes(TOL_FEAS) {
        return Ok(StepOutcome::Failed(
            FailureReason::Numerical(format!(
                "verification residual {:.3e} (raw {:.3e})",
                report.max_residual(),
                raw_report.max_residual()
            )),
            Box::new(cur),
        ));
    }
    let (v, slacks) = extract_candidate(&spec, &sol)?;
    let c = uncertain_hull(&slacks, &tess, &state.a)?;
    let alpha = if v.num_certified() > 0 {
        certified_level_outside(&v, &state.x, &state.a, &c)?
    } else {
        None
    };
    cur.diagnostics = Some(Diagnostics {
        solver: raw.detail.clone(),
        raw_residual: raw_report.max_residual(),
        residual: report.max_residual(),
        objective: sol.objective,
        coverage_margin: coverage.margin,
        mesh_vertices: tess.vertices().len(),
        cells: tess.num_cells(),
        certified_cells: v.num_certified(),
        solve_seconds: seconds,
    });
    log::info!(
        "k={}: {} vertices, {} samples, {}/{} cells certified, alpha={:?}, solve {:.2}s ({})",
        state.k,
        tess.vertices().len(),
        spec.data().len(),
        v.num_certified(),
        tess.num_cells(),
        alpha,
        seconds,
        raw.detail
    );
    let all_negative = slacks.all_negative();
    cur.v = Some(v);
    cur.slacks = Some(slacks);
    cur.c = Some(c.clone());
    cur.alpha_k = alpha;
    let Some(alpha) = alpha else {
        return Ok(StepOutcome::Failed(FailureReason::NoLevel, Box::new(cur)));
    };
    let v = cur.v.as_ref().expect("set above");

    if let Some(prev_c) = previous.and_then(|p| p.c.as_ref()) {
        if !sublevel_contains(v, alpha, prev_c, &state.a, &c)? {
            return Ok(StepOutcome::Failed(FailureReason::Chain, Box::new(cur)));
        }
    }
    if all_negative {
        return Ok(StepOutcome::Certified(Box::new(cur)));
    }
    let (_, a0) = initial_sets(cfg)?;
    if polyunion_subset(&c, &state.a, TOL_GEO) || polyunion_subset(&c, &a0, TOL_GEO) {
        return Ok(StepOutcome::Certified(Box::new(cur)));
    }
    let Some(beta) = find_beta(&c, v, alpha, &state.a)? else {
        return Ok(StepOutcome::Failed(FailureReason::NoBeta, Box::new(cur)));
    };
    let mut next = IterationState::initial(scale(&c, beta)?, shrink_a(&state.a, cfg.shrink_rho)?);
    next.k = state.k + 1;
    next.beta_k = Some(beta);
    Ok(StepOutcome::Next(Box::new(cur), Box::new(next)))
}

/// Runs the certification loop until certification, `k_max` iterations or an
/// unrecoverable failure.
pub fn run(cfg: &RunConfig, source: &DataSource) -> Result<RunRecord, RefineError> {
    cfg.validate()?;
    let (x0, a0) = initial_sets(cfg)?;
    let mut states: Vec<IterationState> = Vec::new();
    let mut state = IterationState::initial(x0, a0.clone());
    let mut record = RunRecord {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        states: Vec::new(),
        verdict: Verdict::MaxIter,
        certified_level_sets: Vec::new(),
        failure: None,
    };
    while state.k < cfg.k_max {
        let mut effort = Effort {
            vertices: cfg.mesh_vertices,
            samples: cfg.data_count,
            seed: iteration_seed(cfg.seed, state.k, 0),
            vertex_share: cfg.vertex_data,
        };
        let mut coarse: Option<Tessellation<f64>> = None;
        let mut restarts = 0;
        let mut reasons = Vec::new();
        let outcome = loop {
            let outcome = step_with(&state, states.last(), cfg, source, coarse.as_ref(), effort)?;
            let StepOutcome::Failed(reason, failed) = outcome else {
                break outcome;
            };
            log::warn!("k={}: iteration failed ({reason}), restart {}", state.k, restarts + 1);
            if restarts >= cfg.max_restarts {
                break StepOutcome::Failed(reason, failed);
            }
            restarts += 1;
            reasons.push(reason.to_string());
            effort = Effort {
                vertices: (effort.vertices as f64 * cfg.refine_factor).ceil() as usize,
                samples: (effort.samples as f64 * cfg.data_growth).ceil() as usize,
                seed: iteration_seed(cfg.seed, state.k, restarts),
                vertex_share: 1.0,
            };
            coarse = failed.tess.clone();
            state.data = failed.data.clone();
        };
        match outcome {
            StepOutcome::Next(mut solved, next) => {
                solved.restarts = restarts;
                solved.restart_reasons = reasons;
                record.certified_level_sets.push(LevelSetRef {
                    k: solved.k,
                    alpha: solved.alpha_k.expect("accepted states have a level"),
                });
                states.push(*solved);
                state = *next;
            }
            StepOutcome::Certified(mut solved) => {
                solved.restarts = restarts;
                solved.restart_reasons = reasons;
                record.certified_level_sets.push(LevelSetRef {
                    k: solved.k,
                    alpha: solved.alpha_k.expect("accepted states have a level"),
                });
                states.push(*solved);
                record.verdict = Verdict::Certified;
                break;
            }
            StepOutcome::Failed(reason, mut failed) => {
                failed.restarts = restarts;
                failed.restart_reasons = reasons;
                record.failure = Some(format!("iteration {} failed: {reason}", failed.k));
                states.push(*failed);
                record.verdict = Verdict::Failed;
                break;
            }
        }
    }
    if record.verdict == Verdict::MaxIter {
        states.push(state);
    }
    record.states = states;
    Ok(record)
}
