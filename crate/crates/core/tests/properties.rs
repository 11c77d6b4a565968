//! Invariance and round-trip properties of the planar geometry layer.

use proptest::prelude::*;

use rigidview::geometry::{
    canonical_frame_map, cross_ratio, intersect_lines, line_through, AffineMap2, Point2, Vec2,
};
use rigidview::transfer::{dq_coordinates, transfer_point, PlanarBasis};

fn finite_coord() -> impl Strategy<Value = f64> {
    (-100.0..100.0f64).prop_filter("nonzero-ish", |x| x.abs() > 1e-6 || *x == 0.0)
}

fn affine_map() -> impl Strategy<Value = AffineMap2> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -3.0..3.0f64,
        -3.0..3.0f64,
        -20.0..20.0f64,
        -20.0..20.0f64,
    )
        .prop_map(|(a, b, c, d, tx, ty)| AffineMap2 {
            m: [[a, b], [c, d]],
            t: [tx, ty],
        })
        .prop_filter("invertible", |m| m.det().abs() > 1e-2)
}

/// A homography with bounded distortion over the test domain.
fn homography() -> impl Strategy<Value = [[f64; 3]; 3]> {
    (affine_map(), -5e-3..5e-3f64, -5e-3..5e-3f64).prop_map(|(m, g, h)| {
        [
            [m.m[0][0], m.m[0][1], m.t[0]],
            [m.m[1][0], m.m[1][1], m.t[1]],
            [g, h, 1.0],
        ]
    })
}

fn apply_homography(h: &[[f64; 3]; 3], p: Point2) -> Option<Point2> {
    let w = h[2][0] * p.x + h[2][1] * p.y + h[2][2];
    if w.abs() < 1e-3 {
        return None;
    }
    Some(Point2::new(
        (h[0][0] * p.x + h[0][1] * p.y + h[0][2]) / w,
        (h[1][0] * p.x + h[1][1] * p.y + h[1][2]) / w,
    ))
}

proptest! {
    #[test]
    fn cross_ratio_is_a_projective_invariant(
        origin_x in finite_coord(),
        origin_y in finite_coord(),
        dx in (-1.0..1.0f64).prop_filter("dir", |d| d.abs() > 1e-2),
        dy in (-1.0..1.0f64).prop_filter("dir", |d| d.abs() > 1e-2),
        params in proptest::array::uniform4(-5.0..5.0f64),
        h in homography(),
    ) {
        let mut t = params;
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assume!(t.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-2));
        let o = Point2::new(origin_x, origin_y);
        let dir = Vec2::new(dx, dy);
        let pts: Vec<Point2> = t.iter().map(|&s| o + dir.scale(s)).collect();
        let dq = cross_ratio(pts[0], pts[1], pts[2], pts[3]).unwrap();
        let mapped: Option<Vec<Point2>> =
            pts.iter().map(|p| apply_homography(&h, *p)).collect();
        prop_assume!(mapped.is_some());
        let m = mapped.unwrap();
        // mapped points must stay comfortably finite and separated
        prop_assume!(m.iter().all(|p| p.x.abs() < 1e7 && p.y.abs() < 1e7));
        prop_assume!(m[0].distance(m[3]) > 1e-5 && m[1].distance(m[2]) > 1e-5);
        let dq_mapped = cross_ratio(m[0], m[1], m[2], m[3]);
        prop_assume!(dq_mapped.is_ok());
        let dq_mapped = dq_mapped.unwrap();
        let rel = (dq - dq_mapped).abs() / dq.abs().max(1.0);
        prop_assert!(rel < 1e-9, "dq {dq} vs {dq_mapped}");
    }

    #[test]
    fn swapping_last_pair_inverts_the_quotient(
        t in proptest::array::uniform4(-5.0..5.0f64),
        ox in finite_coord(),
        oy in finite_coord(),
    ) {
        prop_assume!({
            let mut s = t;
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            s.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-2)
        });
        let o = Point2::new(ox, oy);
        let dir = Vec2::new(0.8, -0.6);
        let p: Vec<Point2> = t.iter().map(|&s| o + dir.scale(s)).collect();
        let dq = cross_ratio(p[0], p[1], p[2], p[3]).unwrap();
        let swapped = cross_ratio(p[0], p[1], p[3], p[2]).unwrap();
        prop_assert!((dq * swapped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_map_round_trips(
        r in (finite_coord(), finite_coord()),
        q in (finite_coord(), finite_coord()),
        p in (finite_coord(), finite_coord()),
        probe in proptest::collection::vec((finite_coord(), finite_coord()), 1..20),
    ) {
        let (r, q, p) = (
            Point2::new(r.0, r.1),
            Point2::new(q.0, q.1),
            Point2::new(p.0, p.1),
        );
        let area = (q - r).cross(p - r).abs();
        prop_assume!(area > 1e-2);
        let map = canonical_frame_map(r, q, p).unwrap();
        let inv = map.inverse().unwrap();
        prop_assert!(map.apply(r).distance(Point2::new(0.0, 0.0)) < 1e-9);
        prop_assert!(map.apply(q).distance(Point2::new(1.0, 0.0)) < 1e-9);
        prop_assert!(map.apply(p).distance(Point2::new(0.0, 1.0)) < 1e-9);
        for (x, y) in probe {
            let z = Point2::new(x, y);
            let back = inv.apply(map.apply(z));
            prop_assert!(back.distance(z) <= 1e-9 * (1.0 + x.abs() + y.abs()));
        }
    }

    #[test]
    fn join_then_meet_is_identity(
        p in (finite_coord(), finite_coord()),
        q in (finite_coord(), finite_coord()),
        r in (finite_coord(), finite_coord()),
    ) {
        let (p, q, r) = (
            Point2::new(p.0, p.1),
            Point2::new(q.0, q.1),
            Point2::new(r.0, r.1),
        );
        prop_assume!((q - p).cross(r - p).abs() > 1e-2);
        let l1 = line_through(p, q).unwrap();
        let l2 = line_through(p, r).unwrap();
        let meet = intersect_lines(l1, l2).unwrap();
        prop_assert!(meet.distance(p) < 1e-7 * (1.0 + p.x.abs() + p.y.abs()));
    }

    #[test]
    fn dq_transfer_round_trips(
        corners in proptest::array::uniform8(-10.0..10.0f64),
        z in (-8.0..8.0f64, -8.0..8.0f64),
    ) {
        let pts = [
            Point2::new(corners[0], corners[1]),
            Point2::new(corners[2], corners[3]),
            Point2::new(corners[4], corners[5]),
            Point2::new(corners[6], corners[7]),
        ];
        let basis = PlanarBasis::new(pts[0], pts[1], pts[2], pts[3]);
        prop_assume!(basis.is_ok());
        let basis = basis.unwrap();
        let z = Point2::new(z.0, z.1);
        let coords = dq_coordinates(z, &basis);
        prop_assume!(coords.is_ok());
        let coords = coords.unwrap();
        prop_assume!(coords.q_b.abs() < 1e4 && coords.q_c.abs() < 1e4);
        let back = transfer_point(coords, &basis);
        prop_assume!(back.is_ok());
        prop_assert!(back.unwrap().distance(z) <= 1e-7 * (1.0 + z.x.abs() + z.y.abs()));
    }
}
