//! Double-quotient coordinates of a point relative to a coplanar quadruple,
//! and point transfer between frames through those coordinates.
//!
//! Given four coplanar points A,B,C,D (no three collinear) and a fifth point
//! Z in their plane, two cross-ratios pin Z uniquely: one along line AC via
//! the traces of D and Z through B, one along line AB via the traces through
//! C. Both are preserved by any perspective projection, so evaluating them in
//! one image and inverting the construction in another transfers Z exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::LabeledFrame;
use crate::geometry::{axis_parameter, intersect_lines, line_through, Point2, COLLINEAR_TOL};

/// Cross-ratio pair identifying a point against a [`PlanarBasis`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqCoordinates {
    /// Quotient along line A-B (traces through C).
    pub q_c: f64,
    /// Quotient along line A-C (traces through B).
    pub q_b: f64,
}

/// Images of four coplanar scene points, no three collinear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarBasis {
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
    pub d: Point2,
}

impl PlanarBasis {
    pub fn new(a: Point2, b: Point2, c: Point2, d: Point2) -> Result<Self> {
        let pts = [a, b, c, d];
        for i in 0..4 {
            for j in (i + 1)..4 {
                for k in (j + 1)..4 {
                    if triple_collinear(pts[i], pts[j], pts[k]) {
                        return Err(Error::DegenerateConfiguration(
                            "three basis points are collinear".into(),
                        ));
                    }
                }
            }
        }
        Ok(Self { a, b, c, d })
    }
}

fn triple_collinear(p: Point2, q: Point2, r: Point2) -> bool {
    let pq = q - p;
    let pr = r - p;
    let span = pq.norm().max(pr.norm()).max((r - q).norm());
    span == 0.0 || pq.cross(pr).abs() <= COLLINEAR_TOL * span * span
}

fn degenerate(ctx: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::ParallelLines | Error::CoincidentPoints => {
            Error::DegenerateConfiguration(ctx.to_string())
        }
        other => other,
    }
}

/// Signed ratio ||first..x|| / ||second..x|| for the point at parameter `t`
/// along an axis with the first anchor at 0 and the second at 1.
fn anchor_ratio(t: f64) -> Result<f64> {
    if (t - 1.0).abs() <= 1e-14 {
        return Err(Error::DegenerateConfiguration(
            "trace coincides with axis endpoint".into(),
        ));
    }
    Ok(t / (t - 1.0))
}

/// Parameter along A->`other` of the intersection of line(through, via)
/// with line(A, other).
fn trace_parameter(basis_a: Point2, other: Point2, through: Point2, via: Point2) -> Result<f64> {
    let axis = line_through(basis_a, other).map_err(degenerate("axis line undefined"))?;
    let l = line_through(through, via).map_err(degenerate("trace line undefined"))?;
    let p = intersect_lines(l, axis).map_err(degenerate("trace parallel to axis"))?;
    axis_parameter(p, basis_a, other)
}

/// Double-quotient coordinates of `z` relative to `basis`.
pub fn dq_coordinates(z: Point2, basis: &PlanarBasis) -> Result<DqCoordinates> {
    // traces on line AC through B, and on line AB through C
    let t_db = trace_parameter(basis.a, basis.c, basis.d, basis.b)?;
    let t_zb = trace_parameter(basis.a, basis.c, z, basis.b)?;
    let t_dc = trace_parameter(basis.a, basis.b, basis.d, basis.c)?;
    let t_zc = trace_parameter(basis.a, basis.b, z, basis.c)?;
    let q_b = ratio_quotient(t_db, t_zb)?;
    let q_c = ratio_quotient(t_dc, t_zc)?;
    Ok(DqCoordinates { q_c, q_b })
}

fn ratio_quotient(t_ref: f64, t_z: f64) -> Result<f64> {
    let rz = anchor_ratio(t_z)?;
    if rz.abs() <= 1e-14 {
        return Err(Error::DegenerateConfiguration(
            "trace coincides with axis origin".into(),
        ));
    }
    Ok(anchor_ratio(t_ref)? / rz)
}

/// Inverse of [`dq_coordinates`]: the point with coordinates `coords` in
/// `target_basis`'s frame.
pub fn transfer_point(coords: DqCoordinates, target_basis: &PlanarBasis) -> Result<Point2> {
    let z_b = solve_trace(
        target_basis.a,
        target_basis.c,
        target_basis.d,
        target_basis.b,
        coords.q_b,
    )?;
    let z_c = solve_trace(
        target_basis.a,
        target_basis.b,
        target_basis.d,
        target_basis.c,
        coords.q_c,
    )?;
    let lb = line_through(target_basis.b, z_b)
        .map_err(degenerate("transfer line through B undefined"))?;
    let lc = line_through(target_basis.c, z_c)
        .map_err(degenerate("transfer line through C undefined"))?;
    intersect_lines(lb, lc).map_err(degenerate("transfer lines parallel"))
}

/// Locates the axis point whose anchor ratio is ratio(D-trace)/q.
fn solve_trace(a: Point2, other: Point2, d: Point2, via: Point2, q: f64) -> Result<Point2> {
    if !q.is_finite() || q.abs() <= 1e-14 {
        return Err(Error::DegenerateConfiguration(
            "degenerate quotient value".into(),
        ));
    }
    let t_d = trace_parameter(a, other, d, via)?;
    let r = anchor_ratio(t_d)? / q;
    if (r - 1.0).abs() <= 1e-14 {
        return Err(Error::DegenerateConfiguration(
            "transfer trace at infinity".into(),
        ));
    }
    // anchor_ratio is an involution: t = r/(r-1)
    let t = r / (r - 1.0);
    Ok(a + (other - a).scale(t))
}

/// The six frame-1 double quotients feeding the focal locator, computed from
/// the axis traces of A', C', E', G' through P' and Q'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quotients {
    pub q_cp: f64,
    pub q_cq: f64,
    pub q_ep: f64,
    pub q_eq: f64,
    pub q_gp: f64,
    pub q_gq: f64,
}

impl Quotients {
    pub fn is_finite(&self) -> bool {
        [
            self.q_cp, self.q_cq, self.q_ep, self.q_eq, self.q_gp, self.q_gq,
        ]
        .iter()
        .all(|q| q.is_finite())
    }
}

/// Computes the six quotients from a frame containing R, Q, P, A, C, E, G.
///
/// For each labeled point X, the P-trace is line(X,P) ∩ line(R,Q) measured
/// along R->Q and the Q-trace is line(X,Q) ∩ line(R,P) measured along R->P;
/// each quotient divides A's anchor ratio by X's.
pub fn frame_quotients(frame: &LabeledFrame) -> Result<Quotients> {
    basis_quotients(&frame.basis()?)
}

/// Same as [`frame_quotients`] for seven points already in role order
/// R, Q, P, A, C, E, G.
pub fn basis_quotients(basis: &[Point2; 7]) -> Result<Quotients> {
    let [r, q, p, a, c, e, g] = *basis;
    let tp = |x: Point2| trace_parameter(r, q, x, p);
    let tq = |x: Point2| trace_parameter(r, p, x, q);
    let (ap, aq) = (tp(a)?, tq(a)?);
    Ok(Quotients {
        q_cp: ratio_quotient(ap, tp(c)?)?,
        q_cq: ratio_quotient(aq, tq(c)?)?,
        q_ep: ratio_quotient(ap, tp(e)?)?,
        q_eq: ratio_quotient(aq, tq(e)?)?,
        q_gp: ratio_quotient(ap, tp(g)?)?,
        q_gq: ratio_quotient(aq, tq(g)?)?,
    })
}
