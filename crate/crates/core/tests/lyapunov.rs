use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roa_core::dynamics::{pendulum, LinearField};
use roa_core::geometry::{box_polytope, delaunay_triangulate, tessellate_annulus};
use roa_core::lyapunov::{
    certified_level, decrease_margin, level_set_polylines, pwa_interpolate, sanity_check, sublevel_contains,
    ExtendedSublevel, LyapunovError,
};
use roa_core::{Piece, Point, Polyunion, PwaFunction, QuadraticForm, Tessellation, TOL_GEO};

fn square(h: f64) -> Polyunion {
    Polyunion::single(box_polytope(&[-h, -h], &[h, h]).unwrap())
}

fn l1(p: &Point) -> f64 {
    p[0].abs() + p[1].abs()
}

/// Seeds on both axes, so no cell straddles an axis and `|x1| + |x2|` is
/// reproduced exactly by its interpolant.
fn axis_seeds() -> Vec<Point> {
    let mut s = Vec::new();
    for t in [0.1, 0.4, 0.7, 1.0] {
        s.extend([Point::xy(t, 0.0), Point::xy(-t, 0.0), Point::xy(0.0, t), Point::xy(0.0, -t)]);
    }
    s
}

fn l1_on_annulus(extra: &[Point]) -> PwaFunction {
    let mut seeds = axis_seeds();
    seeds.extend_from_slice(extra);
    let tess = tessellate_annulus(&square(1.0), &square(0.1), &seeds).unwrap();
    pwa_interpolate(l1, &tess).unwrap()
}

fn quadrant_fan() -> Tessellation {
    let pts = vec![
        Point::xy(0.0, 0.0),
        Point::xy(1.0, 0.0),
        Point::xy(0.0, 1.0),
        Point::xy(-1.0, 0.0),
        Point::xy(0.0, -1.0),
    ];
    Tessellation::new(pts, vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]]).unwrap()
}

fn grid_mesh(n: usize) -> Tessellation {
    let mut pts = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            pts.push(Point::xy(-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64));
        }
    }
    delaunay_triangulate(&pts).unwrap()
}

fn random_annulus(seed: u64, n: usize) -> Tessellation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<Point> = (0..n)
        .map(|_| Point::xy(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    tessellate_annulus(&square(1.0), &square(0.1), &seeds).unwrap()
}

fn vq() -> QuadraticForm {
    QuadraticForm::new(vec![vec![10.0, 3.0], vec![3.0, 4.0]]).unwrap()
}

#[test]
fn evaluation_examples() {
    let pts = vec![Point::xy(0.0, 0.0), Point::xy(1.0, 0.0), Point::xy(0.0, 1.0)];
    let tess = Tessellation::new(pts, vec![[0, 1, 2]]).unwrap();
    let v = PwaFunction::certified_everywhere(tess, vec![Piece::new(vec![1.0, 0.0], 0.0)]).unwrap();
    assert_eq!(v.evaluate(&Point::xy(0.5, 0.2)).unwrap(), 0.5);
    assert_eq!(v.evaluate(&Point::xy(2.0, 2.0)), Err(LyapunovError::NotInDomain));

    let fan = pwa_interpolate(l1, &quadrant_fan()).unwrap();
    assert!((fan.evaluate(&Point::xy(0.3, -0.4)).unwrap() - 0.7).abs() < 1e-14);

    let ring = l1_on_annulus(&[]);
    assert_eq!(ring.evaluate(&Point::xy(0.0, 0.05)), Err(LyapunovError::NotInDomain));
}

#[test]
fn interpolation_reproduces_affine_functions() {
    let tess = random_annulus(4, 80);
    let v = pwa_interpolate(|p| 2.0 * p[0] - 0.5 * p[1] + 3.0, &tess).unwrap();
    for piece in v.pieces() {
        assert!((piece.g[0] - 2.0).abs() < 1e-12 && (piece.g[1] + 0.5).abs() < 1e-12);
        assert!((piece.b - 3.0).abs() < 1e-12);
    }
}

#[test]
fn quadratic_form_at_corner() {
    let q = vq();
    assert_eq!(q.value(&Point::xy(1.0, 1.0)), 10.0);
    let tess = random_annulus(2, 50);
    let v = pwa_interpolate(|p| q.value(p), &tess).unwrap();
    let corner = tess.vertices().iter().position(|p| p == &Point::xy(1.0, 1.0)).unwrap();
    assert!((v.vertex_value(corner).unwrap() - 10.0).abs() < 1e-12);
}

#[test]
fn interpolation_error_is_second_order() {
    let q = vq();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let probes: Vec<Point> = (0..2000)
        .map(|_| Point::xy(rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99)))
        .collect();
    let err = |n: usize| {
        let v = pwa_interpolate(|p| q.value(p), &grid_mesh(n)).unwrap();
        probes
            .iter()
            .map(|p| (v.evaluate(p).unwrap() - q.value(p)).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [8, 16, 32].into_iter().map(err).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(ratio > 3.0 && ratio < 5.0, "halving h shrank the error by {ratio}");
    }
}

#[test]
fn level_of_l1_interpolant() {
    let v = l1_on_annulus(&[]);
    let (x, a) = (square(1.0), square(0.1));
    assert_eq!(certified_level(&v, &x, &a).unwrap(), Some(1.0));
    let max_on_a = a
        .vertices()
        .map(|p| {
            let i = v.tess().vertices().iter().position(|q| q.dist(p) < TOL_GEO).unwrap();
            v.vertex_value(i).unwrap()
        })
        .fold(0.0, f64::max);
    assert!((max_on_a - 0.2).abs() < 1e-12);
}

#[test]
fn uncertified_cell_low_on_a_gives_no_level() {
    let v = l1_on_annulus(&[Point::xy(0.1, 0.05)]);
    let tess = v.tess().clone();
    let low = tess.vertices().iter().position(|p| p.dist(&Point::xy(0.1, 0.05)) < TOL_GEO).unwrap();
    let cell = tess.incidence(low)[0];
    let mut certified = vec![true; tess.num_cells()];
    certified[cell] = false;
    let v = v.with_certified(certified).unwrap();
    assert_eq!(certified_level(&v, &square(1.0), &square(0.1)).unwrap(), None);

    let none = v.clone().with_certified(vec![false; tess.num_cells()]).unwrap();
    assert_eq!(certified_level(&none, &square(1.0), &square(0.1)), Err(LyapunovError::NoCertifiedCells));
}

#[test]
fn level_is_attained_and_never_undercut_on_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for seed in 0..5 {
        let tess = random_annulus(seed, 150);
        let (w1, w2, w3) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0), rng.gen_range(-0.4..0.4));
        let v = pwa_interpolate(|p| w1 * p[0] * p[0] + w2 * p[1] * p[1] + w3 * p[0] * p[1] + 0.1 * p[0], &tess).unwrap();
        let (x, a) = (square(1.0), square(0.1));
        let Some(alpha) = certified_level(&v, &x, &a).unwrap() else {
            continue;
        };
        let mut attained = false;
        for (i, p) in tess.vertices().iter().enumerate() {
            let val = v.vertex_value(i).unwrap();
            if p[0].abs().max(p[1].abs()) > 1.0 - 1e-12 {
                assert!(val >= alpha);
                attained |= val == alpha;
            }
            if p[0].abs().max(p[1].abs()) < 0.1 + 1e-12 {
                assert!(val < alpha);
            }
        }
        assert!(attained);
        for _ in 0..10_000 {
            let t = rng.gen_range(-1.0..1.0);
            let p = match rng.gen_range(0..4) {
                0 => Point::xy(1.0, t),
                1 => Point::xy(-1.0, t),
                2 => Point::xy(t, 1.0),
                _ => Point::xy(t, -1.0),
            };
            assert!(v.evaluate(&p).unwrap() >= alpha - 1e-12);
        }
    }
}

#[test]
fn sublevel_examples() {
    let v = l1_on_annulus(&[]);
    let a = square(0.1);
    assert!(sublevel_contains(&v, 1.0, &a, &a, &a).unwrap());
    assert!(sublevel_contains(&v, 1.0, &square(0.3), &a, &a).unwrap());
    assert!(!sublevel_contains(&v, 1.0, &square(0.8), &a, &a).unwrap());
    let three = Polyunion::single(box_polytope(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap());
    assert!(matches!(
        sublevel_contains(&v, 1.0, &three, &a, &a),
        Err(LyapunovError::DimensionMismatch { .. })
    ));
}

#[test]
fn sublevel_agrees_with_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = square(0.1);
    let mut verdicts = [0, 0];
    for seed in 0..20 {
        let tess = random_annulus(seed, 120);
        let (w1, w2) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let v = pwa_interpolate(|p| w1 * p[0] * p[0] + w2 * p[1] * p[1] + 0.3 * p[0] * p[1], &tess).unwrap();
        let alpha = rng.gen_range(0.2..1.0);
        let lo = [rng.gen_range(-0.9..-0.1), rng.gen_range(-0.9..-0.1)];
        let hi = [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)];
        let s = Polyunion::single(box_polytope(&lo, &hi).unwrap());
        let exact = sublevel_contains(&v, alpha, &s, &a, &a).unwrap();
        let member = ExtendedSublevel::new(&v, alpha, &a, &a);
        let mut probes: Vec<Point> = s.vertices().cloned().collect();
        probes.extend((0..10_000).map(|_| Point::xy(rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1]))));
        let sampled = probes.iter().all(|p| member.contains(p));
        assert_eq!(exact, sampled, "instance {seed}");
        verdicts[exact as usize] += 1;
    }
    assert!(verdicts[0] > 0 && verdicts[1] > 0, "{verdicts:?}");
}

#[test]
fn decrease_margin_sign() {
    let v = pwa_interpolate(l1, &quadrant_fan()).unwrap();
    let stable = LinearField::contraction(2);
    let unstable = LinearField::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!(decrease_margin(&v, &stable, 2000, 1).unwrap() < 0.0);
    assert!(decrease_margin(&v, &unstable, 2000, 1).unwrap() > 0.0);
    assert_eq!(decrease_margin(&v, &stable, 2000, 1), decrease_margin(&v, &stable, 2000, 1));
}

#[test]
fn sanity_check_cases() {
    let mut seeds = Vec::new();
    for i in -20..=20 {
        for j in -20..=20 {
            seeds.push(Point::xy(i as f64 / 20.0, j as f64 / 20.0));
        }
    }
    let fine = tessellate_annulus(&square(1.0), &square(0.1), &seeds).unwrap();
    let contraction = LinearField::contraction(2);
    let (ok, v) = sanity_check(&contraction, &QuadraticForm::identity(2), &fine).unwrap();
    assert!(ok);
    assert_eq!(v.tess().num_cells(), fine.num_cells());

    let coarse = Tessellation::new(
        vec![Point::xy(-1.0, -1.0), Point::xy(1.0, -1.0), Point::xy(1.0, 1.0), Point::xy(-1.0, 1.0)],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap();
    assert!(sanity_check(&pendulum(), &vq(), &coarse).is_ok());
    assert!(QuadraticForm::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
}

#[test]
fn continuity_on_shared_facets() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let q = vq();
    let v = pwa_interpolate(|p| q.value(p), &random_annulus(3, 200)).unwrap();
    let tess = v.tess();
    for ((i, j), cells) in tess.edges() {
        if cells.len() != 2 {
            continue;
        }
        let (p, r) = (&tess.vertices()[i], &tess.vertices()[j]);
        for _ in 0..10 {
            let x = p.lerp(r, rng.gen_range(0.0..1.0));
            assert!((v.eval_in(cells[0], &x) - v.eval_in(cells[1], &x)).abs() < 1e-8);
        }
    }
    assert!(v.continuity_defect(false) < 1e-8);
}

#[test]
fn contour_points_lie_on_the_level() {
    let q = vq();
    let v = pwa_interpolate(|p| q.value(p), &random_annulus(6, 200)).unwrap();
    let lines = level_set_polylines(&v, 2.0);
    assert!(!lines.is_empty());
    for p in lines.iter().flatten() {
        assert!((v.evaluate(p).unwrap() - 2.0).abs() <= 1e-6);
    }
}

#[test]
fn json_layout() {
    let v = pwa_interpolate(l1, &quadrant_fan()).unwrap();
    let value = serde_json::to_value(&v).unwrap();
    let cell = &value["cells"][0];
    assert!(cell["g"].is_array() && cell["b"].is_number() && cell["certified"].is_boolean());
    let back: PwaFunction = serde_json::from_value(value).unwrap();
    assert_eq!(back, v);
}

proptest! {
    #[test]
    fn interpolant_of_convex_function_lies_above(seed in 0u64..200, w in 0.1..5.0f64) {
        let tess = random_annulus(seed, 60);
        let f = |p: &Point| w * p[0] * p[0] + p[1] * p[1] + 0.5 * p[0] * p[1];
        let v = pwa_interpolate(f, &tess).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let c = rng.gen_range(0..tess.num_cells());
            let [p0, p1, p2] = tess.cell_points(c);
            let (mut s, mut t) = (rng.gen::<f64>(), rng.gen::<f64>());
            if s + t > 1.0 {
                s = 1.0 - s;
                t = 1.0 - t;
            }
            let x = p0.lerp(p1, s).add(&p2.sub(p0).scaled(t));
            prop_assert!(v.eval_in(c, &x) >= f(&x) - 1e-12);
        }
    }
}
