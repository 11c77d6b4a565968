//! Oracle-driven suites: every pipeline stage checked against exact
//! synthetic scenes whose ground truth comes from elementary 3D geometry.

use rigidview::epipolar::{line_residual, predict_line};
use rigidview::focal::{
    concurrency_poly, eliminate_v, locate_from_basis, locate_projected_focal, LocatorOptions,
    TraceParams,
};
use rigidview::frame::LabeledFrame;
use rigidview::geometry::{
    canonical_frame_map, intersect_lines, line_through, AffineMap2, Point2, Point3, Vec3,
};
use rigidview::matching::{match_identities, MatchOptions, MatchProblem};
use rigidview::scene::{
    project, random_rigid_scene, true_projected_focal, CameraModel, RigidScene,
};
use rigidview::transfer::{basis_quotients, dq_coordinates, transfer_point, PlanarBasis};

fn frame_extent(frame: &LabeledFrame) -> f64 {
    frame
        .iter()
        .map(|(_, p)| p.x.abs().max(p.y.abs()))
        .fold(1.0_f64, f64::max)
}

/// Intersection of ray(f, through) with plane(p, q, r) by elementary algebra.
fn plane_hit(f: Point3, through: Point3, p: Point3, q: Point3, r: Point3) -> Point3 {
    let n: Vec3 = (q - p).cross(r - p);
    let dir = through - f;
    f + dir.scale(n.dot(p - f) / n.dot(dir))
}

/// Canonical trace reciprocals (1/X_P.x, 1/X_Q.y) of a canonical-frame point.
fn trace_reciprocals(b: Point2) -> (f64, f64) {
    let origin = Point2::new(0.0, 0.0);
    let unit_x = Point2::new(1.0, 0.0);
    let unit_y = Point2::new(0.0, 1.0);
    let x_axis = line_through(origin, unit_x).unwrap();
    let y_axis = line_through(origin, unit_y).unwrap();
    let bp = intersect_lines(line_through(b, unit_y).unwrap(), x_axis).unwrap();
    let bq = intersect_lines(line_through(b, unit_x).unwrap(), y_axis).unwrap();
    (1.0 / bp.x, 1.0 / bq.y)
}

struct Instance {
    scene: RigidScene,
    cam1: CameraModel,
    cam2: CameraModel,
    frame1: LabeledFrame,
    frame2: LabeledFrame,
}

fn instance(points: usize, seed: u64) -> Instance {
    let (scene, cam1, cam2) = random_rigid_scene(points, seed).unwrap();
    let frame1 = project(&scene, &cam1).unwrap();
    let frame2 = project(&scene, &cam2).unwrap();
    Instance {
        scene,
        cam1,
        cam2,
        frame1,
        frame2,
    }
}

/// True canonical trace reciprocals of the four auxiliary points.
fn true_traces(inst: &Instance) -> [(f64, f64); 4] {
    let get = |l: &str| inst.scene.get(l).unwrap();
    let (p3, q3, r3) = (get("P"), get("Q"), get("R"));
    let img2 = |x: Point3| inst.cam2.project(x).unwrap();
    let map = canonical_frame_map(img2(r3), img2(q3), img2(p3)).unwrap();
    let mut out = [(0.0, 0.0); 4];
    for (slot, label) in out.iter_mut().zip(["A", "C", "E", "G"]) {
        let hit = plane_hit(inst.cam1.focal_point, get(label), p3, q3, r3);
        *slot = trace_reciprocals(map.apply(img2(hit)));
    }
    out
}

#[test]
fn planar_dq_coordinates_agree_across_projections() {
    // a coplanar quadruple plus a fifth coplanar point, seen by two cameras
    let mut checked = 0;
    for seed in 0..40u64 {
        let (scene, cam1, cam2) = match random_rigid_scene(7, seed) {
            Ok(x) => x,
            Err(_) => continue,
        };
        let (p, q, r) = (
            scene.get("P").unwrap(),
            scene.get("Q").unwrap(),
            scene.get("R").unwrap(),
        );
        let in_plane = |a: f64, b: f64| {
            let u = q - p;
            let v = r - p;
            p + u.scale(a) + v.scale(b)
        };
        let quad = [p, q, r, in_plane(0.62, 0.55)];
        let z3 = in_plane(0.31, 0.18);
        let images = |cam: &CameraModel| -> Option<(PlanarBasis, Point2)> {
            let mut img = [Point2::new(0.0, 0.0); 4];
            for (slot, x) in img.iter_mut().zip(quad) {
                *slot = cam.project(x).ok()?;
            }
            Some((
                PlanarBasis::new(img[0], img[1], img[2], img[3]).ok()?,
                cam.project(z3).ok()?,
            ))
        };
        let (Some((basis1, z1)), Some((basis2, z2))) = (images(&cam1), images(&cam2)) else {
            continue;
        };
        let (Ok(c1), Ok(c2)) = (dq_coordinates(z1, &basis1), dq_coordinates(z2, &basis2)) else {
            continue;
        };
        let tol = 1e-9 * c1.q_b.abs().max(c1.q_c.abs()).max(1.0);
        assert!(
            (c1.q_b - c2.q_b).abs() < tol,
            "seed {seed}: q_b {} vs {}",
            c1.q_b,
            c2.q_b
        );
        assert!(
            (c1.q_c - c2.q_c).abs() < tol,
            "seed {seed}: q_c {} vs {}",
            c1.q_c,
            c2.q_c
        );
        // and the transferred point lands on the true second image
        let transferred = transfer_point(c1, &basis2).unwrap();
        assert!(transferred.distance(z2) <= 1e-9 * (1.0 + z2.x.abs() + z2.y.abs()));
        checked += 1;
    }
    assert!(checked >= 25, "only {checked} usable seeds");
}

#[test]
fn frame1_quotients_match_frame2_aux_traces() {
    for seed in 0..25u64 {
        let inst = instance(7, seed);
        let quotients = basis_quotients(&inst.frame1.basis().unwrap()).unwrap();
        let traces = true_traces(&inst);
        let (u, v) = traces[0];
        // the chained-trace relation reproduces the true reciprocals of D, F, H
        let link = [
            (quotients.q_cp, quotients.q_cq),
            (quotients.q_ep, quotients.q_eq),
            (quotients.q_gp, quotients.q_gq),
        ];
        for (k, (qp, qq)) in link.iter().enumerate() {
            let (ux, vx) = traces[k + 1];
            let pu = (1.0 - qp) + qp * u;
            let pv = (1.0 - qq) + qq * v;
            assert!(
                (ux - pu).abs() <= 1e-9 * (1.0 + ux.abs()),
                "seed {seed} aux {k}"
            );
            assert!(
                (vx - pv).abs() <= 1e-9 * (1.0 + vx.abs()),
                "seed {seed} aux {k}"
            );
        }
    }
}

#[test]
fn concurrency_vanishes_at_truth_and_not_elsewhere() {
    for seed in 0..25u64 {
        let inst = instance(7, seed);
        let quotients = basis_quotients(&inst.frame1.basis().unwrap()).unwrap();
        let b2 = inst.frame2.basis().unwrap();
        let map = canonical_frame_map(b2[0], b2[1], b2[2]).unwrap();
        let known: Vec<Point2> = (3..7).map(|i| map.apply(b2[i])).collect();
        let tb = TraceParams::unknowns();
        let td = TraceParams::chained(quotients.q_cp, quotients.q_cq);
        let tf = TraceParams::chained(quotients.q_ep, quotients.q_eq);
        let th = TraceParams::chained(quotients.q_gp, quotients.q_gq);
        let eq1 = concurrency_poly((known[0], &tb), (known[1], &td), (known[2], &tf));
        let eq2 = concurrency_poly((known[0], &tb), (known[1], &td), (known[3], &th));
        let (u, v) = true_traces(&inst)[0];
        let scale = eq1.max_abs_coeff() * (1.0 + u.abs()).powi(3) * (1.0 + v.abs()).powi(3);
        assert!(eq1.eval(u, v).abs() <= 1e-9 * scale, "seed {seed}");
        assert!(
            eq2.eval(u, v).abs()
                <= 1e-9 * eq2.max_abs_coeff() * (1.0 + u.abs()).powi(3) * (1.0 + v.abs()).powi(3),
            "seed {seed}"
        );
        // generic off-solution points do not satisfy the constraint
        let mut nonzero = 0;
        for k in 0..10 {
            let (du, dv) = (0.37 + 0.11 * k as f64, -0.23 + 0.07 * k as f64);
            if eq1.eval(u + du, v + dv).abs() > 1e-6 * eq1.max_abs_coeff() {
                nonzero += 1;
            }
        }
        assert!(
            nonzero >= 8,
            "seed {seed}: concurrency nearly everywhere zero"
        );
    }
}

#[test]
fn eliminated_quadratic_properties_on_exact_scenes() {
    for seed in 0..25u64 {
        let inst = instance(7, seed);
        let quotients = basis_quotients(&inst.frame1.basis().unwrap()).unwrap();
        let b2 = inst.frame2.basis().unwrap();
        let map = canonical_frame_map(b2[0], b2[1], b2[2]).unwrap();
        let known: Vec<Point2> = (3..7).map(|i| map.apply(b2[i])).collect();
        let tb = TraceParams::unknowns();
        let td = TraceParams::chained(quotients.q_cp, quotients.q_cq);
        let tf = TraceParams::chained(quotients.q_ep, quotients.q_eq);
        let th = TraceParams::chained(quotients.q_gp, quotients.q_gq);
        let eq1 = concurrency_poly((known[0], &tb), (known[1], &td), (known[2], &tf));
        let eq2 = concurrency_poly((known[0], &tb), (known[1], &td), (known[3], &th));
        let quad = eliminate_v(&eq1, &eq2);
        // v = 1 is a root identically in u
        let scale = quad
            .a2
            .max_abs_coeff()
            .max(quad.a1.max_abs_coeff())
            .max(quad.a0.max_abs_coeff());
        for k in 0..100 {
            let u = -5.0 + 0.1 * k as f64;
            let bound = 1e-8 * scale * (1.0 + u.abs()).powi(6);
            assert!(quad.eval(u, 1.0).abs() <= bound, "seed {seed} u {u}");
        }
        // the selector returns the true v at the true u
        let (u, v) = true_traces(&inst)[0];
        let vstar = quad.nondegenerate_root(u).unwrap();
        assert!(
            (vstar - v).abs() <= 1e-8 * (1.0 + v.abs()),
            "seed {seed}: {vstar} vs {v}"
        );
        // and the cleared univariate polynomial vanishes at the true u
        let p = rigidview::focal::final_polynomial(&eq1, &quad);
        let bound = 1e-8 * (1.0 + u.abs()).powi(p.degree() as i32);
        assert!(
            p.eval(u).abs() <= bound,
            "seed {seed}: p(u_true) = {}",
            p.eval(u)
        );
    }
}

#[test]
fn locator_recovers_true_focal_projection() {
    let options = LocatorOptions::default();
    for seed in 100..160u64 {
        let inst = instance(7, seed);
        let truth = true_projected_focal(&inst.cam1, &inst.cam2).unwrap();
        let sol = locate_projected_focal(&inst.frame1, &inst.frame2, &options).unwrap();
        let scale = frame_extent(&inst.frame2)
            .max(truth.x.abs())
            .max(truth.y.abs());
        assert!(
            sol.f1pp.distance(truth) <= 1e-6 * scale,
            "seed {seed}: {:?} vs {truth:?}",
            sol.f1pp
        );
        // the recovered trace reciprocals match the true ones
        let (u, v) = true_traces(&inst)[0];
        assert!(
            (sol.u_root - u).abs() <= 1e-6 * (1.0 + u.abs()),
            "seed {seed}"
        );
        assert!(
            (sol.v_root - v).abs() <= 1e-6 * (1.0 + v.abs()),
            "seed {seed}"
        );
    }
}

#[test]
fn locator_is_affine_equivariant_in_frame2() {
    let options = LocatorOptions::default();
    let maps = [
        AffineMap2 {
            m: [[2.0, 0.3], [-0.4, 1.5]],
            t: [3.0, -2.0],
        },
        AffineMap2 {
            m: [[-1.1, 0.8], [0.2, 0.9]],
            t: [-0.5, 4.0],
        },
        AffineMap2 {
            m: [[0.02, -1.3], [1.7, 0.01]],
            t: [10.0, 0.7],
        },
    ];
    for (k, map) in maps.iter().enumerate() {
        let inst = instance(7, 42 + k as u64);
        let sol = locate_projected_focal(&inst.frame1, &inst.frame2, &options).unwrap();
        let mapped_frame = LabeledFrame::from_points(
            "mapped",
            inst.frame2
                .iter()
                .map(|(l, p)| (l.to_string(), map.apply(p))),
        )
        .unwrap();
        let sol2 = locate_projected_focal(&inst.frame1, &mapped_frame, &options).unwrap();
        let expect = map.apply(sol.f1pp);
        let scale = frame_extent(&mapped_frame)
            .max(expect.x.abs())
            .max(expect.y.abs());
        assert!(
            sol2.f1pp.distance(expect) <= 1e-6 * scale,
            "map {k}: {:?} vs {expect:?}",
            sol2.f1pp
        );
    }
}

#[test]
fn constraint_line_contains_every_extra_point() {
    let options = LocatorOptions::default();
    for seed in 200..240u64 {
        let inst = instance(9, seed);
        let sol = locate_projected_focal(&inst.frame1, &inst.frame2, &options).unwrap();
        let extent = frame_extent(&inst.frame2);
        for label in ["Z1", "Z2"] {
            let z1 = inst.frame1.require(label).unwrap();
            let z2 = inst.frame2.require(label).unwrap();
            let line = predict_line(z1, &inst.frame1, &inst.frame2, &sol).unwrap();
            let residual = line_residual(z2, &line);
            assert!(
                residual <= 1e-6 * extent,
                "seed {seed} {label}: residual {residual}"
            );
        }
    }
}

#[test]
fn off_body_points_violate_their_line() {
    let options = LocatorOptions::default();
    let mut residuals = Vec::new();
    for seed in 300..330u64 {
        let inst = instance(8, seed);
        let sol = locate_projected_focal(&inst.frame1, &inst.frame2, &options).unwrap();
        // move the eighth 3D point between the frames: frame 1 sees the
        // original, frame 2 sees the displaced point
        let z3 = inst.scene.get("Z1").unwrap();
        let moved = Point3::new(z3.x + 0.12, z3.y - 0.09, z3.z + 0.15);
        let Ok(z2_moved) = inst.cam2.project(moved) else {
            continue;
        };
        let z1 = inst.frame1.require("Z1").unwrap();
        let line = predict_line(z1, &inst.frame1, &inst.frame2, &sol).unwrap();
        residuals.push(line_residual(z2_moved, &line) / frame_extent(&inst.frame2));
    }
    assert!(residuals.len() >= 25);
    residuals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // every instance detectable, and typically by a wide margin
    assert!(
        residuals[0] > 1e-6,
        "smallest off-body residual {}",
        residuals[0]
    );
    assert!(
        residuals[residuals.len() / 2] > 1e-3,
        "median {}",
        residuals[residuals.len() / 2]
    );
}

#[test]
fn matcher_recovers_shuffles_with_margin() {
    for seed in 400..408u64 {
        let inst = instance(8, seed);
        let s1 = inst.frame1.positions();
        let s2 = inst.frame2.positions();
        // deterministic shuffle derived from the seed
        let mut perm: Vec<usize> = (0..8).collect();
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        for i in (1..8usize).rev() {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            perm.swap(i, j);
        }
        let shuffled: Vec<Point2> = perm.iter().map(|&k| s2[k]).collect();
        let mut expected = vec![0usize; 8];
        for (pos, &orig) in perm.iter().enumerate() {
            expected[orig] = pos;
        }
        let problem = MatchProblem::new(s1, shuffled, MatchOptions::default()).unwrap();
        let result = match_identities(&problem).unwrap();
        assert_eq!(result.assignment, expected, "seed {seed}");
        assert!(
            result.badness <= 1e-6,
            "seed {seed}: badness {}",
            result.badness
        );
        assert!(
            result.runner_up_badness >= 1e3 * result.badness.max(1e-12),
            "seed {seed}: gap {} vs {}",
            result.runner_up_badness,
            result.badness
        );
        assert!(result.evaluated <= 40320, "seed {seed}");
    }
}

/// Frozen regression: the bundled observation-table fixture has exactly one
/// real solution, cross-checked against an independent seven-point epipolar
/// solve and a direct Newton solve of the concurrency equations.
#[test]
fn fixture_frames_regression() {
    let frame1 = LabeledFrame::from_points(
        "frame1",
        [
            ("R", Point2::new(1.00, 3.29)),
            ("Q", Point2::new(3.00, 11.50)),
            ("P", Point2::new(1.84, 5.53)),
            ("A", Point2::new(1.82, 6.05)),
            ("C", Point2::new(1.63, 5.42)),
            ("E", Point2::new(2.09, 7.51)),
            ("G", Point2::new(1.74, 5.56)),
        ],
    )
    .unwrap();
    let frame2 = LabeledFrame::from_points(
        "frame2",
        [
            ("R", Point2::new(0.00, 0.00)),
            ("Q", Point2::new(1.00, 0.00)),
            ("P", Point2::new(0.00, 1.00)),
            ("A", Point2::new(23.80, 33.95)),
            ("C", Point2::new(21.20, 30.26)),
            ("E", Point2::new(15.59, 20.73)),
            ("G", Point2::new(16.92, 24.92)),
        ],
    )
    .unwrap();
    let sol = locate_projected_focal(&frame1, &frame2, &LocatorOptions::default()).unwrap();
    assert!((sol.u_root - -0.7315973712782051).abs() < 1e-6);
    assert!((sol.v_root - -0.8670975268736268).abs() < 1e-6);
    assert!(
        sol.f1pp
            .distance(Point2::new(23.666421672989387, 33.74124471254647))
            < 1e-4
    );
    assert_eq!(sol.all_roots.iter().filter(|c| c.accepted).count(), 1);
    // the degenerate collapse root v = 1 surfaces as a rejected candidate
    assert!(sol
        .all_roots
        .iter()
        .any(|c| c.v.is_finite() && (c.v - 1.0).abs() < 1e-6 && !c.accepted));
}

#[test]
fn locate_from_basis_matches_frame_entry_point() {
    let inst = instance(7, 77);
    let options = LocatorOptions::default();
    let a = locate_projected_focal(&inst.frame1, &inst.frame2, &options).unwrap();
    let b = locate_from_basis(
        &inst.frame1.basis().unwrap(),
        &inst.frame2.basis().unwrap(),
        &options,
    )
    .unwrap();
    // NaN root candidates defeat plain equality; compare the usable fields
    assert_eq!(a.f1pp, b.f1pp);
    assert_eq!((a.u_root, a.v_root), (b.u_root, b.v_root));
    assert_eq!(a.concurrency_residual, b.concurrency_residual);
    assert_eq!(
        [a.aux_b, a.aux_d, a.aux_f, a.aux_h],
        [b.aux_b, b.aux_d, b.aux_f, b.aux_h]
    );
    assert_eq!(a.all_roots.len(), b.all_roots.len());
}
