use roa_core::geometry::{box_polytope, delaunay_triangulate, polyunion_subset, tessellate_annulus};
use roa_core::lyapunov::pwa_interpolate;
use roa_core::refine::{
    check_theorem, find_beta, initial_mesh, run, shrink_a, step, uncertain_hull, uncertified_region, DataSource,
    FailureReason, IterationState, RefineError, RunConfig, RunRecord, StepOutcome, Verdict,
};
use roa_core::socp::SlackMap;
use roa_core::{Point, Polyunion, PwaFunction, Tessellation};

fn square(h: f64) -> Polyunion {
    Polyunion::single(box_polytope(&[-h, -h], &[h, h]).unwrap())
}

fn grid(n: usize) -> Tessellation {
    let mut pts = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            pts.push(Point::xy(-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64));
        }
    }
    delaunay_triangulate(&pts).unwrap()
}

fn one_norm() -> PwaFunction {
    pwa_interpolate(|p: &Point| p[0].abs() + p[1].abs(), &grid(20)).unwrap()
}

fn linear_config() -> RunConfig {
    let mut cfg = RunConfig::pendulum();
    cfg.field = "linear".into();
    cfg.lipschitz = 1.0;
    cfg.mesh_vertices = 150;
    cfg.data_count = 150;
    cfg.k_nearest = 20;
    cfg
}

fn linear_run() -> RunRecord {
    let cfg = linear_config();
    run(&cfg, &DataSource::from_name("linear", cfg.lipschitz).unwrap()).unwrap()
}

fn annulus_with_bad_vertex() -> (Tessellation, SlackMap, usize) {
    let seeds = vec![Point::xy(0.5, 0.5), Point::xy(-0.5, 0.5), Point::xy(0.5, -0.5), Point::xy(-0.5, -0.5)];
    let tess = tessellate_annulus(&square(1.0), &square(0.1), &seeds).unwrap();
    let bad = tess.vertices().iter().position(|p| p.dist(&Point::xy(0.5, 0.5)) < 1e-12).unwrap();
    let cells = tess
        .cells()
        .iter()
        .map(|c| c.vertex_ids.iter().map(|&v| if v == bad { 0.5 } else { -1.0 }).collect())
        .collect();
    (tess, SlackMap { cells }, bad)
}

#[test]
fn uncertified_region_is_a_when_all_slacks_negative() {
    let tess = tessellate_annulus(&square(1.0), &square(0.1), &[]).unwrap();
    let slacks = SlackMap { cells: vec![vec![-1.0; 3]; tess.num_cells()] };
    let a = square(0.1);
    assert_eq!(uncertified_region(&slacks, &tess, &a).unwrap(), a);
    assert_eq!(uncertain_hull(&slacks, &tess, &a).unwrap(), a);
}

#[test]
fn uncertified_region_hulls_bad_vertices() {
    let (tess, slacks, bad) = annulus_with_bad_vertex();
    let a = square(0.1);
    let region = uncertified_region(&slacks, &tess, &a).unwrap();
    assert!(region.contains(&tess.vertices()[bad], 1e-12));
    assert!(polyunion_subset(&a, &region, 1e-12));
    assert!((region.area() - 0.12).abs() < 1e-12);
    let hull = uncertain_hull(&slacks, &tess, &a).unwrap();
    assert!(polyunion_subset(&region, &hull, 1e-12));
    assert!(polyunion_subset(&hull, &square(1.0), 1e-12));
}

#[test]
fn beta_for_one_norm_level() {
    let v = one_norm();
    let a = square(0.1);
    let beta = find_beta(&square(0.2), &v, 1.0, &a).unwrap().unwrap();
    assert!((beta - 2.5).abs() <= 1e-3, "beta {beta}");
    let beta = find_beta(&square(0.45), &v, 1.0, &a).unwrap().unwrap();
    assert!((beta - 1.0 / 0.9).abs() <= 1e-3, "beta {beta}");
    let beta = find_beta(&square(0.6), &v, 1.0, &a).unwrap().unwrap();
    assert!((beta - 1.0).abs() <= 1e-3, "beta {beta}");
}

#[test]
fn shrinking_a_nests_strictly() {
    let a = square(0.1);
    assert_eq!(shrink_a(&a, 0.5).unwrap(), square(0.05));
    let mut cur = a;
    for _ in 0..5 {
        let next = shrink_a(&cur, 0.5).unwrap();
        assert!(polyunion_subset(&next, &cur, 0.0));
        assert!(next.area() < cur.area());
        cur = next;
    }
    for rho in [0.0, 1.0, 1.5, -0.5, f64::NAN] {
        assert!(matches!(shrink_a(&cur, rho), Err(RefineError::Config(_))));
    }
}

#[test]
fn zero_iterations_end_with_max_iter() {
    let mut cfg = linear_config();
    cfg.k_max = 0;
    let rec = run(&cfg, &DataSource::from_name("linear", 1.0).unwrap()).unwrap();
    assert_eq!(rec.verdict, Verdict::MaxIter);
    assert!(rec.certified_level_sets.is_empty());
    assert_eq!(rec.states.len(), 1);
    assert!(!rec.states[0].is_solved());
}

#[test]
fn linear_field_certifies_at_first_iteration() {
    let rec = linear_run();
    assert_eq!(rec.verdict, Verdict::Certified, "{:?}", rec.failure);
    assert_eq!(rec.states.len(), 1);
    let s = &rec.states[0];
    assert_eq!(s.k, 0);
    assert!(s.slacks.as_ref().unwrap().all_negative());
    assert_eq!(s.c.as_ref().unwrap(), &square(0.1));
    let check = check_theorem(&rec).unwrap();
    assert!(check.passed, "{:?}", check.violations);
}

#[test]
fn runs_are_deterministic() {
    let untimed = |mut rec: RunRecord| {
        for s in &mut rec.states {
            if let Some(d) = s.diagnostics.as_mut() {
                d.solve_seconds = 0.0;
            }
        }
        rec.to_json()
    };
    assert_eq!(untimed(linear_run()), untimed(linear_run()));
}

#[test]
fn record_round_trip() {
    let rec = linear_run();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    rec.save(&path).unwrap();
    let back = RunRecord::load(&path).unwrap();
    assert_eq!(back.to_json(), rec.to_json());
    assert!(check_theorem(&back).unwrap().passed);
    assert!(RunRecord::from_json(&rec.to_json()[..200]).is_err());
}

#[test]
fn tampered_records_fail_the_check() {
    let rec = linear_run();
    let mut wrong_alpha = rec.clone();
    wrong_alpha.certified_level_sets[0].alpha *= 2.0;
    assert!(!check_theorem(&wrong_alpha).unwrap().passed);

    let mut huge_alpha = rec.clone();
    huge_alpha.states[0].alpha_k = Some(1e9);
    huge_alpha.certified_level_sets[0].alpha = 1e9;
    let check = check_theorem(&huge_alpha).unwrap();
    assert_eq!(check.first_violation(), Some("L^{V_0}_{α_0} ⊄ X_0"));

    let mut big_c = rec.clone();
    big_c.states[0].c = Some(square(0.5));
    let check = check_theorem(&big_c).unwrap();
    assert!(check.violations.iter().any(|v| v == "C_0 ⊄ A_0"), "{:?}", check.violations);

    let mut failed = rec;
    failed.verdict = Verdict::Failed;
    assert!(!check_theorem(&failed).unwrap().passed);
}

#[test]
fn step_reports_broken_chain() {
    let cfg = linear_config();
    let source = DataSource::from_name("linear", 1.0).unwrap();
    let mut previous = IterationState::initial(square(1.0), square(0.1));
    previous.c = Some(square(0.99));
    let mut state = IterationState::initial(square(1.0), square(0.1));
    state.k = 1;
    match step(&state, Some(&previous), &cfg, &source).unwrap() {
        StepOutcome::Failed(FailureReason::Chain, failed) => assert!(failed.v.is_some()),
        StepOutcome::Failed(other, _) => panic!("unexpected failure {other}"),
        _ => panic!("a chain through C_0 = X_0 must fail"),
    }
    match step(&state, None, &cfg, &source).unwrap() {
        StepOutcome::Certified(s) => assert_eq!(s.k, 1),
        _ => panic!("without a previous state the linear field certifies"),
    }
}

#[test]
fn initial_mesh_covers_annulus() {
    let cfg = linear_config();
    let tess = initial_mesh(&cfg).unwrap();
    assert!((tess.total_area() - 3.96).abs() < 1e-9);
    assert!(tess.vertices().len() >= cfg.mesh_vertices / 2);
}

#[test]
fn config_parsing_and_validation() {
    let cfg = RunConfig::pendulum();
    let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    let text = "l_X = [[-1.0, 1.0], [-1.0, 1.0]]\nl_A = [[-0.1, 0.1], [-0.1, 0.1]]\nmu = 5.0\nM = 2.5\nk_max = 10\nseed = 3\n";
    let parsed = RunConfig::from_toml(text).unwrap();
    assert_eq!(parsed.seed, 3);
    assert_eq!(parsed.k_nearest, cfg.k_nearest);

    let reject = |edit: &dyn Fn(&mut RunConfig), field: &str| {
        let mut c = RunConfig::pendulum();
        edit(&mut c);
        match c.validate() {
            Err(RefineError::Config(msg)) => assert!(msg.contains(&format!("`{field}`")), "{msg}"),
            other => panic!("{field}: expected a config error, got {other:?}"),
        }
    };
    reject(&|c| c.mu = -1.0, "mu");
    reject(&|c| c.lipschitz = 0.0, "M");
    reject(&|c| c.shrink_rho = 1.0, "shrink_rho");
    reject(&|c| c.l_a = vec![[-2.0, 2.0]; 2], "l_A");
    reject(&|c| c.l_x = vec![[1.0, -1.0]; 2], "l_X");
    reject(&|c| c.vertex_data = 1.5, "vertex_data");
    reject(&|c| c.k_nearest = 0, "k_nearest");

    assert!(matches!(RunConfig::from_toml("mu = 5.0\n"), Err(RefineError::Config(_))));
    assert!(matches!(RunConfig::from_toml(&format!("{text}bogus = 1\n")), Err(RefineError::Config(_))));
    assert!(DataSource::from_name("unknown", 1.0).is_err());
}
