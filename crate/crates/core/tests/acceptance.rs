use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roa_core::dynamics::{check_learnability, pendulum, simulate_trajectory};
use roa_core::geometry::{box_polytope, delaunay_triangulate, norm, scale, tessellate_annulus};
use roa_core::lyapunov::{decrease_margin, pwa_interpolate, sanity_check, ExtendedSublevel};
use roa_core::refine::{check_theorem, find_beta, run, DataSource, IterationState, RunConfig, RunRecord, Verdict};
use roa_core::socp::{
    assemble, select_data, solve, verify_solution, ClarabelSolver, ConicSolution, ProblemSpec, SolveStatus,
    VariableIndex,
};
use roa_core::{Point, Polyunion, PwaFunction, QuadraticForm, Tessellation};

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn square(h: f64) -> Polyunion {
    Polyunion::single(box_polytope(&[-h, -h], &[h, h]).unwrap())
}

fn rect(lo: [f64; 2], hi: [f64; 2]) -> Polyunion {
    Polyunion::single(box_polytope(&lo, &hi).unwrap())
}

struct PendulumRuns {
    records: Vec<(u64, RunRecord, f64)>,
}

impl PendulumRuns {
    fn collect() -> Self {
        let records = SEEDS
            .iter()
            .map(|&seed| {
                let mut cfg = RunConfig::pendulum();
                cfg.seed = seed;
                let source = DataSource::from_name(&cfg.field, cfg.lipschitz).unwrap();
                let started = Instant::now();
                let record = run(&cfg, &source).unwrap();
                (seed, record, started.elapsed().as_secs_f64())
            })
            .collect();
        PendulumRuns { records }
    }

    fn certified(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().map(|(_, r, _)| r).filter(|r| r.verdict == Verdict::Certified)
    }

    fn solved_states(&self) -> impl Iterator<Item = &IterationState> {
        self.records.iter().flat_map(|(_, r, _)| r.solved_states())
    }
}

fn end_to_end(runs: &PendulumRuns) -> Outcome {
    let (_, rec, secs) = &runs.records[0];
    let iterations = rec.solved_states().count();
    Outcome::new(
        rec.verdict == Verdict::Certified && iterations <= 10 && *secs <= 900.0,
        format!("seed 0: {} after {iterations} iterations in {secs:.1} s", rec.verdict),
    )
}

fn bridging(runs: &PendulumRuns) -> Outcome {
    let f = pendulum::<f64>();
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for rec in runs.certified() {
        for s in rec.solved_states() {
            let margin = decrease_margin(s.v.as_ref().unwrap(), &f, 10_000, 17 + s.k as u64).unwrap();
            worst = worst.max(margin);
            count += 1;
        }
    }
    Outcome::new(count > 0 && worst < 0.0, format!("max decrease margin {worst:.4e} over {count} functions"))
}

fn trajectories(runs: &PendulumRuns) -> Outcome {
    let rec = &runs.records[0].1;
    let Some(s0) = rec.solved_states().next() else {
        return Outcome::new(false, "no solved state");
    };
    let (v, alpha, c, a) = (s0.v.as_ref().unwrap(), s0.alpha_k.unwrap(), s0.c.as_ref().unwrap(), &s0.a);
    let level = ExtendedSublevel::new(v, alpha, a, c);
    let f = pendulum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ([lo0, lo1], [hi0, hi1]) = v.tess().bounds();
    let mut failures = 0;
    let mut seeded = 0;
    while seeded < 100 {
        let x0 = Point::xy(rng.gen_range(lo0..hi0), rng.gen_range(lo1..hi1));
        if !level.contains(&x0) {
            continue;
        }
        seeded += 1;
        let path = simulate_trajectory(&f, &x0, 0.01, 50.0).unwrap();
        let stays = path.iter().all(|p| level.contains(p) || a.contains(p, 1e-12));
        if !stays || path.last().unwrap().norm() >= 0.05 {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{failures} of 100 trajectories failed"))
}

fn facet_continuity(v: &PwaFunction, rng: &mut ChaCha8Rng) -> f64 {
    let tess = v.tess();
    let mut worst: f64 = 0.0;
    for ((i, j), cells) in tess.edges() {
        if cells.len() != 2 {
            continue;
        }
        let (p, q) = (&tess.vertices()[i], &tess.vertices()[j]);
        for _ in 0..10 {
            let x = p.lerp(q, rng.gen::<f64>());
            worst = worst.max((v.eval_in(cells[0], &x) - v.eval_in(cells[1], &x)).abs());
        }
    }
    worst
}

fn verification(runs: &PendulumRuns) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut reported: f64 = 0.0;
    let mut continuity: f64 = 0.0;
    for s in runs.solved_states() {
        let d = s.diagnostics.as_ref().unwrap();
        reported = reported.max(d.raw_residual).max(d.residual);
        continuity = continuity.max(facet_continuity(s.v.as_ref().unwrap(), &mut rng));
    }
    let cfg = RunConfig::pendulum();
    let mut resolved: f64 = 0.0;
    let mut solves = 0;
    for s in runs.records[0].1.solved_states() {
        let (tess, data) = (s.tess.clone().unwrap(), s.data.clone().unwrap());
        let sel = select_data(&tess, &data, cfg.k_nearest).unwrap();
        let spec = ProblemSpec::new(tess, data, cfg.mu, cfg.lipschitz, sel).unwrap();
        let (problem, _) = assemble(&spec).unwrap();
        let raw = solve(&problem, &ClarabelSolver::with_tol(cfg.solver_tol)).unwrap();
        if raw.status == SolveStatus::Optimal {
            resolved = resolved.max(verify_solution(&spec, &raw).max_residual());
            solves += 1;
        }
    }
    Outcome::new(
        reported <= 1e-6 && resolved <= 1e-6 && continuity <= 1e-8 && solves > 0,
        format!(
            "recorded residual {reported:.2e}, re-solved residual {resolved:.2e} ({solves} solves), facet continuity {continuity:.2e}"
        ),
    )
}

fn learnability(runs: &PendulumRuns) -> Outcome {
    let mut checked = 0;
    let mut uncovered = 0;
    for s in runs.solved_states() {
        let report = check_learnability(s.tess.as_ref().unwrap(), s.data.as_ref().unwrap());
        checked += 1;
        uncovered += report.uncovered_vertices.len();
    }
    Outcome::new(checked > 0 && uncovered == 0, format!("{checked} datasets, {uncovered} uncovered vertices"))
}

/// Single inclusion violations applied to a certified record; each must
/// flip the verdict of `check_theorem`.
fn injections(rec: &RunRecord) -> Vec<(&'static str, RunRecord)> {
    let mut out = Vec::new();
    let solved: Vec<usize> = rec.states.iter().enumerate().filter(|(_, s)| s.is_solved()).map(|(i, _)| i).collect();
    let first = solved[0];
    let last = *solved.last().unwrap();

    let mut r = rec.clone();
    let alpha = r.states[first].alpha_k.unwrap() * 1e3;
    r.states[first].alpha_k = Some(alpha);
    r.certified_level_sets[0].alpha = alpha;
    out.push(("level set leaves X_0", r));

    let mut r = rec.clone();
    r.states[last].c = Some(r.states[last].x.clone());
    out.push(("C_K not inside A_0", r));

    let mut r = rec.clone();
    let a = r.states[first].a.clone();
    r.states[first].c = Some(scale(&a, 1.0 + 1e-3).unwrap());
    if !r.states[first].slacks.as_ref().unwrap().all_negative() {
        out.push(("C_0 misses uncertain points", r));
    }

    let mut r = rec.clone();
    r.states[first].a = scale(&a, 5.0).unwrap();
    out.push(("A_0 not inside C_0", r));

    if solved.len() >= 2 {
        let second = solved[1];
        let mut r = rec.clone();
        r.states[second].alpha_k = Some(1e-9);
        r.certified_level_sets[1].alpha = 1e-9;
        out.push(("C_0 not inside the next level set", r));

        let mut r = rec.clone();
        let x = scale(&r.states[second].x, 1.5).unwrap();
        r.states[second].x = x;
        out.push(("X_1 not inside the previous level set", r));
    }
    out
}

fn theorem_chain(runs: &PendulumRuns) -> Outcome {
    let mut passed = 0;
    let mut failures = Vec::new();
    let mut injected = 0;
    let mut missed = Vec::new();
    for (seed, rec, _) in &runs.records {
        if rec.verdict != Verdict::Certified {
            failures.push(format!("seed {seed}: {}", rec.failure.clone().unwrap_or_default()));
            continue;
        }
        let check = check_theorem(rec).unwrap();
        if !check.passed {
            failures.push(format!("seed {seed}: {:?}", check.violations));
            continue;
        }
        passed += 1;
        for (name, tampered) in injections(rec) {
            injected += 1;
            match check_theorem(&tampered) {
                Ok(c) if c.passed => missed.push(format!("seed {seed}: {name}")),
                _ => {}
            }
        }
    }
    Outcome::new(
        passed >= 5 && failures.is_empty() && missed.is_empty() && injected > 0,
        format!(
            "{passed} of {} seeds pass; {} of {injected} injections detected{}{}",
            runs.records.len(),
            injected - missed.len(),
            if failures.is_empty() { String::new() } else { format!("; failures {failures:?}") },
            if missed.is_empty() { String::new() } else { format!("; missed {missed:?}") },
        ),
    )
}

fn linear_smoke() -> Outcome {
    let mut cfg = RunConfig::pendulum();
    cfg.field = "linear".into();
    cfg.lipschitz = 1.0;
    let source = DataSource::from_name(&cfg.field, cfg.lipschitz).unwrap();
    let started = Instant::now();
    let rec = run(&cfg, &source).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let first = &rec.states[0];
    let all_negative = first.slacks.as_ref().is_some_and(|s| s.all_negative());
    Outcome::new(
        rec.verdict == Verdict::Certified && rec.states.len() == 1 && first.k == 0 && all_negative && secs < 60.0,
        format!("{} with {} states, all slacks negative: {all_negative}, {secs:.1} s", rec.verdict, rec.states.len()),
    )
}

/// Exact maximum of `v` over the frame `β·C \ int C` of an axis-aligned box
/// `C = [lo, hi]` containing the origin, taken over the vertices of the
/// overlay with the mesh. `None` when `β·C` leaves the mesh.
fn frame_max(v: &PwaFunction, lo: [f64; 2], hi: [f64; 2], beta: f64) -> Option<f64> {
    let tess = v.tess();
    let (blo, bhi) = ([lo[0] * beta, lo[1] * beta], [hi[0] * beta, hi[1] * beta]);
    let (mlo, mhi) = tess.bounds();
    if (0..2).any(|i| blo[i] < mlo[i] - 1e-12 || bhi[i] > mhi[i] + 1e-12) {
        return None;
    }
    let in_box = |p: &Point, l: [f64; 2], h: [f64; 2]| (0..2).all(|i| p[i] >= l[i] - 1e-12 && p[i] <= h[i] + 1e-12);
    let strictly_in = |p: &Point| (0..2).all(|i| p[i] > lo[i] + 1e-12 && p[i] < hi[i] - 1e-12);
    let mut candidates = Vec::new();
    for (l, h) in [(blo, bhi), (lo, hi)] {
        candidates.extend([Point::xy(l[0], l[1]), Point::xy(h[0], l[1]), Point::xy(h[0], h[1]), Point::xy(l[0], h[1])]);
    }
    candidates.extend(tess.vertices().iter().cloned());
    for (i, j) in tess.edges().keys() {
        let (p, q) = (&tess.vertices()[*i], &tess.vertices()[*j]);
        for (l, h) in [(blo, bhi), (lo, hi)] {
            for axis in 0..2 {
                for line in [l[axis], h[axis]] {
                    let (a, b) = (p[axis] - line, q[axis] - line);
                    if a * b < 0.0 {
                        candidates.push(p.lerp(q, a / (a - b)));
                    }
                }
            }
        }
    }
    candidates
        .into_iter()
        .filter(|p| in_box(p, blo, bhi) && !strictly_in(p))
        .map(|p| v.evaluate(&p).unwrap())
        .reduce(f64::max)
}

fn beta_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = square(0.1);
    let mut worst: f64 = 0.0;
    let mut capped = 0;
    for _ in 0..20 {
        let mut pts: Vec<Point> = (0..250).map(|_| Point::xy(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        pts.extend([Point::xy(-1.0, -1.0), Point::xy(1.0, -1.0), Point::xy(1.0, 1.0), Point::xy(-1.0, 1.0)]);
        let tess = delaunay_triangulate(&pts).unwrap();
        let (d0, d1, off) = (rng.gen_range(1.0..10.0), rng.gen_range(1.0..10.0), rng.gen_range(-0.9..0.9));
        let q = QuadraticForm::new(vec![vec![d0, off * (d0 * d1).sqrt()], vec![off * (d0 * d1).sqrt(), d1]]).unwrap();
        let v = pwa_interpolate(|p: &Point| q.value(p), &tess).unwrap();
        let lo = [-rng.gen_range(0.12..0.35), -rng.gen_range(0.12..0.35)];
        let hi = [rng.gen_range(0.12..0.35), rng.gen_range(0.12..0.35)];
        let c = rect(lo, hi);
        let alpha = frame_max(&v, lo, hi, 1.0).unwrap() * rng.gen_range(1.5..6.0);
        let bisected = find_beta(&c, &v, alpha, &a).unwrap().unwrap();
        let mut grid = 1.0;
        let mut j = 1;
        loop {
            let beta = 1.0 + j as f64 * 1e-3;
            if beta > 64.0 {
                capped += 1;
                break;
            }
            match frame_max(&v, lo, hi, beta) {
                Some(m) if m < alpha => grid = beta,
                _ => break,
            }
            j += 1;
        }
        worst = worst.max((bisected - grid).abs());
    }
    Outcome::new(worst <= 2e-3, format!("max |bisection − grid| = {worst:.2e} over 20 instances ({capped} capped)"))
}

/// A point satisfying continuity and `Σγ = g` exactly, with `t = ‖γ‖` and
/// slacks above the decrease bound; half of the points then push one slack
/// below its bound.
fn consistent_assignment(spec: &ProblemSpec, rng: &mut ChaCha8Rng) -> ConicSolution {
    let tess = spec.tess();
    let index = VariableIndex::new(2, spec.selection());
    let mut x = vec![0.0; index.total()];
    let values: Vec<f64> = (0..tess.vertices().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let samples = spec.data().samples();
    let mut bounds = Vec::new();
    for c in 0..tess.num_cells() {
        let [p0, p1, p2] = tess.cell_points(c);
        let ids = tess.cells()[c].vertex_ids;
        let (e1, e2) = (p1.sub(p0), p2.sub(p0));
        let (d1, d2) = (values[ids[1]] - values[ids[0]], values[ids[2]] - values[ids[0]]);
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        let g = [(d1 * e2[1] - d2 * e1[1]) / det, (e1[0] * d2 - e2[0] * d1) / det];
        x[index.g(c, 0)] = g[0];
        x[index.g(c, 1)] = g[1];
        x[index.b(c)] = values[ids[0]] - g[0] * p0[0] - g[1] * p0[1];
        let k_last = index.num_selected(c) - 1;
        let mut rest = g;
        for k in 0..k_last {
            let gm = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            x[index.gamma(c, k, 0)] = gm[0];
            x[index.gamma(c, k, 1)] = gm[1];
            rest = [rest[0] - gm[0], rest[1] - gm[1]];
        }
        x[index.gamma(c, k_last, 0)] = rest[0];
        x[index.gamma(c, k_last, 1)] = rest[1];
        for k in 0..=k_last {
            x[index.t(c, k)] = norm(&[x[index.gamma(c, k, 0)], x[index.gamma(c, k, 1)]]);
        }
        let sel = &spec.selection()[c];
        for (i, &vid) in ids.iter().enumerate() {
            let v = &tess.vertices()[vid];
            let bound: f64 = sel
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    let gm = [x[index.gamma(c, k, 0)], x[index.gamma(c, k, 1)]];
                    samples[d].f.dot(&gm) + spec.lipschitz() * norm(&gm) * v.dist(&samples[d].x)
                })
                .sum();
            bounds.push((index.s(c, i), bound));
            x[index.s(c, i)] = (bound + rng.gen_range(0.01..0.5)).max(-spec.mu() + 0.01);
        }
    }
    if rng.gen_bool(0.5) {
        let (slot, bound) = bounds[rng.gen_range(0..bounds.len())];
        x[slot] = bound - rng.gen_range(0.01..0.5);
    }
    ConicSolution::from_values(index, x, SolveStatus::Optimal)
}

fn encoding_oracle(runs: &PendulumRuns) -> Outcome {
    let s = runs.records[0].1.solved_states().next().unwrap();
    let cfg = RunConfig::pendulum();
    let (tess, data) = (s.tess.clone().unwrap(), s.data.clone().unwrap());
    let sel = select_data(&tess, &data, cfg.k_nearest).unwrap();
    let selected: usize = sel.iter().map(Vec::len).sum();
    let spec = ProblemSpec::new(tess.clone(), data, cfg.mu, cfg.lipschitz, sel).unwrap();
    let (problem, counts) = assemble(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut disagreements = 0;
    let mut feasible = 0;
    for _ in 0..100 {
        let sol = consistent_assignment(&spec, &mut rng);
        let conic = problem.violation(&sol.x);
        let report = verify_solution(&spec, &sol);
        worst = worst.max((conic - report.max_residual()).abs());
        let verdict = problem.is_feasible(&sol.x, 1e-9);
        disagreements += (verdict != report.passes(1e-9)) as usize;
        feasible += verdict as usize;
    }
    let (nc, nv) = (tess.num_cells(), tess.vertices().len());
    let continuity: usize = (0..nv).map(|v| tess.incidence(v).len() - 1).sum();
    let closed_form = continuity + 2 * nc + 3 * nc + 3 * nc + 3 * selected;
    let linear = (counts.total() - counts.soc) as f64;
    let order = linear / ((3 * 3 + 1) * nc) as f64;
    let counts_ok = counts.total() == closed_form && problem.num_rows() == closed_form && order > 0.5 && order < 2.0;
    Outcome::new(
        worst <= 1e-10 && disagreements == 0 && counts_ok && feasible > 0 && feasible < 100,
        format!(
            "max |conic − direct| = {worst:.2e}, {disagreements} disagreements, {feasible} feasible; {} rows vs closed form {closed_form}, linear/(10·N_c) = {order:.2}",
            counts.total()
        ),
    )
}

/// Square rings around `A = [−0.1, 0.1]²` whose spacing grows with the
/// distance to the origin and never exceeds `h_max`.
fn graded_seeds(h_max: f64) -> Vec<Point> {
    let mut seeds = Vec::new();
    let mut r: f64 = 0.1;
    loop {
        let h = (0.05 * r).min(h_max);
        let n = (2.0 * r / h).ceil() as usize;
        for i in 0..n {
            let t = -r + 2.0 * r * i as f64 / n as f64;
            seeds.extend([Point::xy(t, -r), Point::xy(r, t), Point::xy(-t, r), Point::xy(-r, -t)]);
        }
        if r >= 1.0 {
            return seeds;
        }
        r = (r + h).min(1.0);
    }
}

fn sanity() -> Outcome {
    let q = QuadraticForm::new(vec![vec![10.0, 3.0], vec![3.0, 4.0]]).unwrap();
    let tess: Tessellation = tessellate_annulus(&square(1.0), &square(0.1), &graded_seeds(0.03)).unwrap();
    let diameter = tess.max_diameter();
    let (ok, _) = sanity_check(&pendulum(), &q, &tess).unwrap();
    Outcome::new(
        ok && diameter <= 0.05,
        format!("certificate holds: {ok}, {} cells, max diameter {diameter:.4}", tess.num_cells()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((7, "linear smoke test", linear_smoke()));
    results.push((8, "beta search oracle", beta_oracle()));
    results.push((10, "quadratic sanity check", sanity()));
    let runs = PendulumRuns::collect();
    results.push((1, "end-to-end pendulum certification", end_to_end(&runs)));
    results.push((2, "bridging oracle", bridging(&runs)));
    results.push((3, "trajectory oracle", trajectories(&runs)));
    results.push((4, "solution verification", verification(&runs)));
    results.push((5, "learnability", learnability(&runs)));
    results.push((6, "inclusion chain", theorem_chain(&runs)));
    results.push((9, "conic encoding oracle", encoding_oracle(&runs)));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, outcome) in &results {
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}  {name}: {}", outcome.detail);
        failed += !outcome.passed as usize;
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
