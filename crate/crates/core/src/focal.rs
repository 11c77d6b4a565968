//! Locating the projection of frame 1's focal point onto frame 2 from seven
//! labeled correspondences.
//!
//! Frame 2 is first mapped so that R''=(0,0), Q''=(1,0), P''=(0,1). In that
//! frame the unknown auxiliary point B'' (the image of the intersection of
//! ray F1-A with plane PQR) is parametrized by the reciprocals of its two
//! axis traces, u = 1/B_P.x and v = 1/B_Q.y:
//!
//!   B''.x = (v - 1) / (u*v - 1),   B''.y = (u - 1) / (u*v - 1)
//!
//! The remaining auxiliary points D'', F'', H'' have trace reciprocals affine
//! in (u, v) through the six frame-1 double quotients. The lines A''B'',
//! C''D'', E''F'', G''H'' must concur at F1''; expressing concurrency of
//! (A,C,E) and of (A,C,G) gives two polynomials cubic in each of u and v.
//! Eliminating v leaves a quadratic whose degenerate root v = 1 (collapse of
//! all auxiliary points onto P'') is discarded by Vieta; back-substitution
//! yields one univariate polynomial in u. Root finding scans the equivalent
//! factored system, refines by bisection, and geometrically validates every
//! candidate against the four-line concurrency before one is accepted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::LabeledFrame;
use crate::geometry::{canonical_frame_map, line_through, point_line_distance, Line2, Point2};
use crate::poly::{scan_roots, BivariatePoly, Polynomial};
use crate::transfer::{basis_quotients, dq_coordinates, transfer_point, PlanarBasis, Quotients};

/// Relative tolerance for the u*v = 1 trace degeneracy.
const TRACE_TOL: f64 = 1e-12;

/// |v - 1| below which a candidate counts as the degenerate collapse root.
const DEGENERATE_V_TOL: f64 = 1e-9;

/// Scan interval, step and acceptance gate for the locator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocatorOptions {
    pub scan_min: f64,
    pub scan_max: f64,
    pub scan_step: f64,
    /// Step of the complementary sweep over w = 1/u on [-1, 1], which covers
    /// the unbounded tails |u| > 1 (the trace reciprocal is heavy-tailed:
    /// nothing bounds u in general). Zero disables the sweep.
    pub reciprocal_step: f64,
    /// Concurrency residual gate, relative to the frame's coordinate extent.
    pub residual_gate: f64,
}

impl Default for LocatorOptions {
    fn default() -> Self {
        Self {
            scan_min: -50.0,
            scan_max: 50.0,
            scan_step: 1e-3,
            reciprocal_step: 1e-3,
            residual_gate: 1e-6,
        }
    }
}

/// One root of the final polynomial and how its reconstruction fared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCandidate {
    pub u: f64,
    /// The non-degenerate v selected for this u; NaN when the selector failed.
    pub v: f64,
    /// Max distance of the least-squares point from the four lines
    /// (canonical frame); infinite when reconstruction failed.
    pub residual: f64,
    pub accepted: bool,
}

/// Recovered projection of frame 1's focal point onto frame 2, with the
/// auxiliary plane-trace points, in original frame-2 coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalSolution {
    pub f1pp: Point2,
    pub aux_b: Point2,
    pub aux_d: Point2,
    pub aux_f: Point2,
    pub aux_h: Point2,
    pub u_root: f64,
    pub v_root: f64,
    /// Max distance of f1pp from lines A''B'', C''D'', E''F'', G''H'' in the
    /// original frame.
    pub concurrency_residual: f64,
    pub all_roots: Vec<RootCandidate>,
}

/// Trace reciprocals of one auxiliary point as affine functions of (u, v):
/// 1/X_P.x = u0 + u1*u and 1/X_Q.y = v0 + v1*v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl TraceParams {
    /// B'' carries the unknowns themselves.
    pub fn unknowns() -> Self {
        Self {
            u0: 0.0,
            u1: 1.0,
            v0: 0.0,
            v1: 1.0,
        }
    }

    /// Chained traces through a quotient pair (qXP, qXQ).
    pub fn chained(q_p: f64, q_q: f64) -> Self {
        Self {
            u0: 1.0 - q_p,
            u1: q_p,
            v0: 1.0 - q_q,
            v1: q_q,
        }
    }

    pub fn at(&self, u: f64, v: f64) -> (f64, f64) {
        (self.u0 + self.u1 * u, self.v0 + self.v1 * v)
    }
}

/// Canonical-frame point with trace reciprocals (u, v):
/// the meet of line{P''=(0,1), (1/u, 0)} and line{Q''=(1,0), (0, 1/v)}.
pub fn trace_to_point(u: f64, v: f64) -> Result<Point2> {
    let w = u * v - 1.0;
    if w.abs() <= TRACE_TOL * (1.0 + (u * v).abs()) {
        return Err(Error::DegenerateTraces);
    }
    Ok(Point2::new((v - 1.0) / w, (u - 1.0) / w))
}

/// Trace reciprocals of D'', F'', H'' for given unknowns and quotients.
pub fn chained_traces(u: f64, v: f64, q: &Quotients) -> [(f64, f64); 3] {
    [
        TraceParams::chained(q.q_cp, q.q_cq).at(u, v),
        TraceParams::chained(q.q_ep, q.q_eq).at(u, v),
        TraceParams::chained(q.q_gp, q.q_gq).at(u, v),
    ]
}

/// Homogeneous canonical coordinates of an auxiliary point, as bivariate
/// polynomials (hx, hy, hw) with hx/hw, hy/hw the affine position.
fn aux_homogeneous(t: &TraceParams) -> [BivariatePoly; 3] {
    let mut hx = BivariatePoly::zero();
    hx.c[0][0] = t.v0 - 1.0;
    hx.c[0][1] = t.v1;
    let mut hy = BivariatePoly::zero();
    hy.c[0][0] = t.u0 - 1.0;
    hy.c[1][0] = t.u1;
    let mut hw = BivariatePoly::zero();
    hw.c[0][0] = t.u0 * t.v0 - 1.0;
    hw.c[0][1] = t.u0 * t.v1;
    hw.c[1][0] = t.u1 * t.v0;
    hw.c[1][1] = t.u1 * t.v1;
    [hx, hy, hw]
}

/// Line through a known canonical point and an auxiliary point, as three
/// homogeneous coefficient polynomials (the cross product (x,y,1) x (hx,hy,hw)).
fn line_coeffs(p: Point2, aux: &[BivariatePoly; 3]) -> [BivariatePoly; 3] {
    let [hx, hy, hw] = aux;
    [
        hw.scale(p.y).sub(hy),
        hx.sub(&hw.scale(p.x)),
        hy.scale(p.x).sub(&hx.scale(p.y)),
    ]
}

/// Concurrency polynomial of three point/auxiliary line pairs: vanishes iff
/// the three lines meet in one point. Cubic in u and in v.
pub fn concurrency_poly(
    a: (Point2, &TraceParams),
    c: (Point2, &TraceParams),
    e: (Point2, &TraceParams),
) -> BivariatePoly {
    let la = line_coeffs(a.0, &aux_homogeneous(a.1));
    let lc = line_coeffs(c.0, &aux_homogeneous(c.1));
    let le = line_coeffs(e.0, &aux_homogeneous(e.1));
    det3(&la, &lc, &le)
}

fn det3(a: &[BivariatePoly; 3], b: &[BivariatePoly; 3], c: &[BivariatePoly; 3]) -> BivariatePoly {
    let minor = |i: usize, j: usize| b[i].mul(&c[j]).sub(&b[j].mul(&c[i]));
    a[0].mul(&minor(1, 2))
        .sub(&a[1].mul(&minor(0, 2)))
        .add(&a[2].mul(&minor(0, 1)))
}

/// The v-eliminated quadratic a2(u) v^2 + a1(u) v + a0(u).
///
/// v = 1 is a root identically in u (the collapse onto P''), so the other
/// root follows from Vieta as a0/a2.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminatedQuadratic {
    pub a2: Polynomial,
    pub a1: Polynomial,
    pub a0: Polynomial,
}

impl EliminatedQuadratic {
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        (self.a2.eval(u) * v + self.a1.eval(u)) * v + self.a0.eval(u)
    }

    /// The non-degenerate root v*(u) = a0(u)/a2(u).
    pub fn nondegenerate_root(&self, u: f64) -> Result<f64> {
        let a2 = self.a2.eval(u);
        // vanishing means cancellation against a2's own term magnitudes
        if a2 == 0.0 || a2.abs() <= 1e-12 * self.a2.eval_magnitude(u) {
            return Err(Error::LeadingCoefficientVanishes(u));
        }
        Ok(self.a0.eval(u) / a2)
    }
}

/// Cross-multiplies the two cubics by each other's v^3 coefficient and
/// subtracts, cancelling the cubic term.
pub fn eliminate_v(eq1: &BivariatePoly, eq2: &BivariatePoly) -> EliminatedQuadratic {
    let c13 = eq1.v_coefficient(3);
    let c23 = eq2.v_coefficient(3);
    let combine = |j: usize| {
        c23.mul(&eq1.v_coefficient(j))
            .add(&c13.mul(&eq2.v_coefficient(j)).scale(-1.0))
    };
    EliminatedQuadratic {
        a2: combine(2),
        a1: combine(1),
        a0: combine(0),
    }
}

/// Substitutes v = a0(u)/a2(u) into the cubic-in-v `eq` and clears a2^3,
/// yielding the final univariate polynomial in u, max-norm rescaled.
///
/// Also returns the cancellation ratio (final max coefficient over the summed
/// term magnitudes): a ratio at roundoff level means the concurrency system
/// is rank-deficient (no parallax) rather than solvable.
pub fn final_polynomial_with_scale(
    eq: &BivariatePoly,
    quad: &EliminatedQuadratic,
) -> (Polynomial, f64) {
    let mut acc = Polynomial::zero();
    let mut term_scale = 0.0_f64;
    for j in 0..4 {
        let mut term = eq.v_coefficient(j);
        for _ in 0..j {
            term = term.mul(&quad.a0);
        }
        for _ in j..3 {
            term = term.mul(&quad.a2);
        }
        term_scale = term_scale.max(term.max_abs_coeff());
        acc = acc.add(&term);
    }
    let ratio = if term_scale > 0.0 {
        acc.max_abs_coeff() / term_scale
    } else {
        0.0
    };
    (acc.normalized(), ratio)
}

/// See [`final_polynomial_with_scale`].
pub fn final_polynomial(eq: &BivariatePoly, quad: &EliminatedQuadratic) -> Polynomial {
    final_polynomial_with_scale(eq, quad).0
}

/// All sign-change roots of `p` in [lo, hi], ascending, bisection-refined.
pub fn solve_u(p: &Polynomial, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    scan_roots(p, lo, hi, step)
}

/// Least-squares meet of several normalized lines: the point minimizing the
/// sum of squared signed distances (2x2 normal equations).
pub fn least_squares_meet(lines: &[Line2]) -> Result<Point2> {
    let (mut saa, mut sab, mut sbb, mut sac, mut sbc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for l in lines {
        saa += l.a * l.a;
        sab += l.a * l.b;
        sbb += l.b * l.b;
        sac += l.a * l.c;
        sbc += l.b * l.c;
    }
    let det = saa * sbb - sab * sab;
    if det.abs() <= 1e-14 * (saa * sbb).max(1e-300) {
        return Err(Error::DegenerateConfiguration(
            "lines are mutually parallel".into(),
        ));
    }
    Ok(Point2::new(
        (-sac * sbb + sbc * sab) / det,
        (-saa * sbc + sab * sac) / det,
    ))
}

/// Full pipeline on two labeled frames carrying R, Q, P, A, C, E, G.
pub fn locate_projected_focal(
    frame1: &LabeledFrame,
    frame2: &LabeledFrame,
    options: &LocatorOptions,
) -> Result<FocalSolution> {
    locate_from_basis(&frame1.basis()?, &frame2.basis()?, options)
}

/// Values of the max-norm-rescaled final univariate polynomial on a grid;
/// the sign pattern exposes the bracketing structure of the u root search.
pub fn scan_table(
    frame1: &LabeledFrame,
    frame2: &LabeledFrame,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>> {
    let valid = step.is_finite() && step > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo;
    if !valid {
        return Err(Error::InvalidInput(
            "table interval must have positive step".into(),
        ));
    }
    let basis1 = frame1.basis()?;
    let basis2 = frame2.basis()?;
    let quotients = basis_quotients(&basis1)?;
    let to_canonical = canonical_frame_map(basis2[0], basis2[1], basis2[2])?;
    let known: Vec<Point2> = (3..7).map(|i| to_canonical.apply(basis2[i])).collect();
    let tb = TraceParams::unknowns();
    let td = TraceParams::chained(quotients.q_cp, quotients.q_cq);
    let tf = TraceParams::chained(quotients.q_ep, quotients.q_eq);
    let th = TraceParams::chained(quotients.q_gp, quotients.q_gq);
    let eq1 = concurrency_poly((known[0], &tb), (known[1], &td), (known[2], &tf));
    let eq2 = concurrency_poly((known[0], &tb), (known[1], &td), (known[3], &th));
    let quad = eliminate_v(&eq1, &eq2);
    let p = final_polynomial(&eq1, &quad);
    let count = ((hi - lo) / step).round() as usize;
    Ok((0..=count)
        .map(|k| {
            let u = lo + k as f64 * step;
            (u, p.eval(u))
        })
        .collect())
}

/// Four-lane Horner; the independent accumulator chains pipeline, which the
/// root scan's million-evaluation workloads need.
#[inline]
fn horner4(coeffs: &[f64], xs: &[f64; 4]) -> [f64; 4] {
    let mut acc = [0.0_f64; 4];
    for &c in coeffs.iter().rev() {
        for lane in 0..4 {
            acc[lane] = acc[lane] * xs[lane] + c;
        }
    }
    acc
}

#[inline]
fn bivariate_eval4(c: &[[f64; 4]; 4], us: &[f64; 4], vs: &[f64; 4]) -> [f64; 4] {
    let mut acc = [0.0_f64; 4];
    for i in (0..4).rev() {
        let row = c[i];
        for lane in 0..4 {
            let v = vs[lane];
            let r = ((row[3] * v + row[2]) * v + row[1]) * v + row[0];
            acc[lane] = acc[lane] * us[lane] + r;
        }
    }
    acc
}

/// Scans for roots of eq1(u, a0(u)/a2(u)) over the direct u grid plus the
/// reciprocal sweep, with raw division: sign flips across a2 poles create
/// spurious brackets, but those candidates fail geometric validation, while
/// guarding the division here would break brackets around genuine roots.
fn scan_system_roots(
    eq1: &BivariatePoly,
    quad: &EliminatedQuadratic,
    options: &LocatorOptions,
) -> Vec<f64> {
    let a0 = quad.a0.coeffs();
    let a2 = quad.a2.coeffs();
    let single = |u: f64| -> f64 {
        let us = [u; 4];
        let n0 = horner4(a0, &us);
        let n2 = horner4(a2, &us);
        bivariate_eval4(&eq1.c, &us, &[n0[0] / n2[0]; 4])[0]
    };

    let mut brackets: Vec<(f64, f64, bool)> = Vec::new();
    for pass in 0..2 {
        let reciprocal = pass == 1;
        let (lo, hi, step) = if reciprocal {
            if options.reciprocal_step <= 0.0 {
                break;
            }
            // the direct grid already covers |u| <= max(|scan bounds|);
            // sweep only the tails beyond it
            let cap = options.scan_min.abs().max(options.scan_max.abs()).max(1.0);
            (-1.0 / cap, 1.0 / cap, options.reciprocal_step)
        } else {
            (options.scan_min, options.scan_max, options.scan_step)
        };
        let valid = step.is_finite() && step > 0.0 && lo.is_finite() && hi.is_finite() && hi > lo;
        if !valid {
            continue;
        }
        let n_steps = (((hi - lo) / step).ceil() as usize).max(1);
        let dead_zone = (0.5 * step).max(1e-9);
        let mut prev: Option<(f64, f64)> = None;
        let mut idx = 0usize;
        while idx <= n_steps {
            let mut xs = [f64::NAN; 4];
            let count = (n_steps + 1 - idx).min(4);
            for (lane, x) in xs.iter_mut().enumerate().take(count) {
                let k = idx + lane;
                *x = if k == n_steps {
                    hi
                } else {
                    lo + k as f64 * step
                };
            }
            let us = if reciprocal {
                let mut us = [f64::NAN; 4];
                for lane in 0..count {
                    // w = 0 is the point at infinity; no bracket may cross it
                    us[lane] = if xs[lane].abs() < dead_zone {
                        f64::NAN
                    } else {
                        1.0 / xs[lane]
                    };
                }
                us
            } else {
                xs
            };
            let n0 = horner4(a0, &us);
            let n2 = horner4(a2, &us);
            let mut vs = [0.0_f64; 4];
            for lane in 0..4 {
                vs[lane] = n0[lane] / n2[lane];
            }
            let values = bivariate_eval4(&eq1.c, &us, &vs);
            for lane in 0..count {
                let (x, value) = (xs[lane], values[lane]);
                if !value.is_finite() {
                    prev = None;
                    continue;
                }
                if value == 0.0 {
                    brackets.push((x, x, reciprocal));
                } else if let Some((px, pv)) = prev {
                    if (pv < 0.0) != (value < 0.0) {
                        brackets.push((px, x, reciprocal));
                    }
                }
                prev = Some((x, value));
            }
            idx += count;
        }
    }

    let mut roots = Vec::with_capacity(brackets.len());
    for (xa, xb, reciprocal) in brackets {
        let (lo, hi) = if reciprocal {
            if xa.abs() < 1e-12 || xb.abs() < 1e-12 {
                continue;
            }
            let (ua, ub) = (1.0 / xa, 1.0 / xb);
            if ua <= ub {
                (ua, ub)
            } else {
                (ub, ua)
            }
        } else {
            (xa, xb)
        };
        roots.push(crate::poly::bisect_fn_root(single, lo, hi));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    roots
}

/// Newton refinement of a candidate on the exact bivariate system; the
/// scan/bisection root is accurate enough in u but the selected v inherits
/// the quadratic's conditioning, and the far-field meet of the four lines
/// amplifies any slack. Bails out rather than jump to a different root.
fn polish_root(eq1: &BivariatePoly, eq2: &BivariatePoly, u0: f64, v0: f64) -> (f64, f64) {
    let (mut u, mut v) = (u0, v0);
    for _ in 0..3 {
        let f1 = eq1.eval(u, v);
        let f2 = eq2.eval(u, v);
        let hu = 1e-7 * (1.0 + u.abs());
        let hv = 1e-7 * (1.0 + v.abs());
        let j11 = (eq1.eval(u + hu, v) - f1) / hu;
        let j12 = (eq1.eval(u, v + hv) - f1) / hv;
        let j21 = (eq2.eval(u + hu, v) - f2) / hu;
        let j22 = (eq2.eval(u, v + hv) - f2) / hv;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let du = (f1 * j22 - f2 * j12) / det;
        let dv = (f2 * j11 - f1 * j21) / det;
        if !(du.is_finite() && dv.is_finite()) {
            break;
        }
        if du.abs() > 0.01 * (1.0 + u.abs()) || dv.abs() > 0.01 * (1.0 + v.abs()) {
            break;
        }
        u -= du;
        v -= dv;
    }
    (u, v)
}

/// Reconstruction of one candidate in the canonical frame.
struct Reconstruction {
    aux: [Point2; 4],
    meet: Point2,
    residual: f64,
}

fn reconstruct(
    u: f64,
    v: f64,
    known: &[Point2; 4],
    quotients: &Quotients,
) -> Result<Reconstruction> {
    let b = trace_to_point(u, v)?;
    let chained = chained_traces(u, v, quotients);
    let mut aux = [b; 4];
    for (slot, (ux, vx)) in aux.iter_mut().skip(1).zip(chained) {
        *slot = trace_to_point(ux, vx)?;
    }
    let mut lines = [Line2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
    }; 4];
    for i in 0..4 {
        lines[i] = line_through(known[i], aux[i])?;
    }
    let meet = least_squares_meet(&lines)?;
    let residual = lines
        .iter()
        .map(|l| point_line_distance(meet, *l))
        .fold(0.0_f64, f64::max);
    Ok(Reconstruction {
        aux,
        meet,
        residual,
    })
}

/// Pipeline on seven points per frame in role order R, Q, P, A, C, E, G.
pub fn locate_from_basis(
    basis1: &[Point2; 7],
    basis2: &[Point2; 7],
    options: &LocatorOptions,
) -> Result<FocalSolution> {
    if frames_homography_consistent(basis1, basis2) {
        return Err(Error::DegenerateConfiguration(
            "frames are related by a single plane map (no parallax)".into(),
        ));
    }
    let quotients = basis_quotients(basis1)?;
    locate_with_quotients(&quotients, basis2, options)
}

/// True when frame 2 is a single plane-to-plane map of frame 1 over all
/// seven basis points: transferring C, E, G through the {P,Q,R,A} quadruple
/// reproduces their frame-2 images. Such a pair carries no parallax (zero
/// motion, or a fully coplanar body) and the focal point is unconstrained.
fn frames_homography_consistent(basis1: &[Point2; 7], basis2: &[Point2; 7]) -> bool {
    let source = match PlanarBasis::new(basis1[2], basis1[1], basis1[0], basis1[3]) {
        Ok(b) => b,
        Err(_) => return false,
    };
    let target = match PlanarBasis::new(basis2[2], basis2[1], basis2[0], basis2[3]) {
        Ok(b) => b,
        Err(_) => return false,
    };
    let extent = basis2
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0_f64, f64::max);
    for idx in 4..7 {
        let transferred =
            dq_coordinates(basis1[idx], &source).and_then(|coords| transfer_point(coords, &target));
        match transferred {
            Ok(p) if p.distance(basis2[idx]) <= 1e-9 * extent => {}
            _ => return false,
        }
    }
    true
}

/// Pipeline entry for callers that reuse frame-1 quotients across many
/// frame-2 bases (the correspondence search).
///
/// Root finding scans the factored form eq1(u, v*(u)) rather than the
/// expanded univariate polynomial: the expansion multiplies by a2(u)^3,
/// which crushes the sign change at poorly scaled roots below evaluation
/// noise, while the bivariate grid evaluates with uniform coefficient
/// magnitudes. The root sets agree away from the isolated a2 zeros, and
/// every candidate is geometrically validated anyway.
pub fn locate_with_quotients(
    quotients: &Quotients,
    basis2: &[Point2; 7],
    options: &LocatorOptions,
) -> Result<FocalSolution> {
    if !quotients.is_finite() {
        return Err(Error::DegenerateConfiguration(
            "non-finite frame-1 quotients".into(),
        ));
    }
    let to_canonical = canonical_frame_map(basis2[0], basis2[1], basis2[2])?;
    let known = [
        to_canonical.apply(basis2[3]),
        to_canonical.apply(basis2[4]),
        to_canonical.apply(basis2[5]),
        to_canonical.apply(basis2[6]),
    ];
    let scale = known
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0_f64, f64::max);

    let quotients = *quotients;
    let tb = TraceParams::unknowns();
    let td = TraceParams::chained(quotients.q_cp, quotients.q_cq);
    let tf = TraceParams::chained(quotients.q_ep, quotients.q_eq);
    let th = TraceParams::chained(quotients.q_gp, quotients.q_gq);
    let eq1 = concurrency_poly((known[0], &tb), (known[1], &td), (known[2], &tf));
    let eq2 = concurrency_poly((known[0], &tb), (known[1], &td), (known[3], &th));
    let quad = eliminate_v(&eq1, &eq2);

    let roots = scan_system_roots(&eq1, &quad, options);
    if roots.is_empty() {
        return Err(Error::NoValidRoot);
    }

    let mut candidates = Vec::with_capacity(roots.len());
    let mut best: Option<(usize, Reconstruction)> = None;
    for u in roots {
        let v = match quad.nondegenerate_root(u) {
            Ok(v) if v.is_finite() => v,
            _ => {
                candidates.push(RootCandidate {
                    u,
                    v: f64::NAN,
                    residual: f64::INFINITY,
                    accepted: false,
                });
                continue;
            }
        };
        let (u, v) = polish_root(&eq1, &eq2, u, v);
        if (v - 1.0).abs() <= DEGENERATE_V_TOL {
            candidates.push(RootCandidate {
                u,
                v,
                residual: f64::INFINITY,
                accepted: false,
            });
            continue;
        }
        let rec = match reconstruct(u, v, &known, &quotients) {
            Ok(rec) => rec,
            Err(_) => {
                candidates.push(RootCandidate {
                    u,
                    v,
                    residual: f64::INFINITY,
                    accepted: false,
                });
                continue;
            }
        };
        let accepted = rec.residual <= options.residual_gate * scale;
        candidates.push(RootCandidate {
            u,
            v,
            residual: rec.residual,
            accepted,
        });
        if accepted {
            // smaller residual wins; ties break to smaller |u|, then smaller u
            let key = |c: &RootCandidate| (c.residual, c.u.abs(), c.u);
            let idx = candidates.len() - 1;
            let better = best
                .as_ref()
                .is_none_or(|(prev, _)| key(&candidates[idx]) < key(&candidates[*prev]));
            if better {
                best = Some((idx, rec));
            }
        }
    }

    let (best_idx, rec) = best.ok_or(Error::NoValidRoot)?;
    let from_canonical = to_canonical.inverse()?;
    let aux: Vec<Point2> = rec.aux.iter().map(|p| from_canonical.apply(*p)).collect();
    // rebuild the four lines in original coordinates for the reported residual
    let originals = [basis2[3], basis2[4], basis2[5], basis2[6]];
    let mut meet = from_canonical.apply(rec.meet);
    let mut residual = f64::INFINITY;
    let mut lines = Vec::with_capacity(4);
    for i in 0..4 {
        lines.push(line_through(originals[i], aux[i])?);
    }
    if let Ok(m) = least_squares_meet(&lines) {
        meet = m;
        residual = lines
            .iter()
            .map(|l| point_line_distance(meet, *l))
            .fold(0.0_f64, f64::max);
    }
    Ok(FocalSolution {
        f1pp: meet,
        aux_b: aux[0],
        aux_d: aux[1],
        aux_f: aux[2],
        aux_h: aux[3],
        u_root: candidates[best_idx].u,
        v_root: candidates[best_idx].v,
        concurrency_residual: residual,
        all_roots: candidates,
    })
}
