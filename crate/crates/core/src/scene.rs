//! Ground-truth engine: exact rigid scenes, two-camera perspective
//! projection, the true projected focal point, and the one-parameter family
//! of distinct rigid bodies consistent with both frames.
//!
//! Everything asserted by tests against the analysis pipeline is computed
//! here with elementary 3D line/plane intersection only — no double-quotient
//! machinery — so the two sides stay independent.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focal::{locate_from_basis, LocatorOptions};
use crate::frame::{LabeledFrame, BASIS_LABELS};
use crate::geometry::{Point2, Point3, Vec3};

/// Perspective camera: an image plane spanned by two orthonormal axes and a
/// focal point off the plane. Image coordinates are measured along the axes
/// from the plane origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub plane_origin: Point3,
    pub axis_x: Vec3,
    pub axis_y: Vec3,
    pub focal_point: Point3,
}

impl CameraModel {
    pub fn new(
        plane_origin: Point3,
        axis_x: Vec3,
        axis_y: Vec3,
        focal_point: Point3,
    ) -> Result<Self> {
        let cam = Self {
            plane_origin,
            axis_x,
            axis_y,
            focal_point,
        };
        cam.validate()?;
        Ok(cam)
    }

    fn validate(&self) -> Result<()> {
        let tol = 1e-9;
        if (self.axis_x.norm() - 1.0).abs() > tol
            || (self.axis_y.norm() - 1.0).abs() > tol
            || self.axis_x.dot(self.axis_y).abs() > tol
        {
            return Err(Error::InvalidInput(
                "camera axes must be orthonormal".into(),
            ));
        }
        if self.focal_offset().abs() <= 1e-9 {
            return Err(Error::InvalidInput(
                "focal point lies on the image plane".into(),
            ));
        }
        Ok(())
    }

    /// Unit normal of the image plane.
    pub fn normal(&self) -> Vec3 {
        self.axis_x.cross(self.axis_y)
    }

    /// Signed distance of the focal point from the plane.
    fn focal_offset(&self) -> f64 {
        self.normal().dot(self.focal_point - self.plane_origin)
    }

    /// Same plane, different focal point.
    pub fn with_focal(&self, focal_point: Point3) -> Result<Self> {
        Self::new(self.plane_origin, self.axis_x, self.axis_y, focal_point)
    }

    /// Perspective projection: the intersection of line(focal, p) with the
    /// plane, in (axis_x, axis_y) coordinates.
    pub fn project(&self, p: Point3) -> Result<Point2> {
        let ray = p - self.focal_point;
        let len = ray.norm();
        if len <= 1e-12 * (1.0 + self.focal_point.distance(Point3::new(0.0, 0.0, 0.0))) {
            return Err(Error::PointAtFocus);
        }
        let n = self.normal();
        let denom = n.dot(ray);
        if denom.abs() <= 1e-12 * len {
            return Err(Error::RayParallelToPlane);
        }
        let t = n.dot(self.plane_origin - self.focal_point) / denom;
        let hit = self.focal_point + ray.scale(t);
        let d = hit - self.plane_origin;
        Ok(Point2::new(d.dot(self.axis_x), d.dot(self.axis_y)))
    }

    /// 3D position of an image point.
    pub fn embed(&self, p: Point2) -> Point3 {
        self.plane_origin + self.axis_x.scale(p.x) + self.axis_y.scale(p.y)
    }
}

/// Outcome of the general-position checks a generated scene must pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralPositionCertificate {
    /// No four of the seven basis points are coplanar.
    pub no_four_coplanar: bool,
    /// All points project in both cameras with angular margin, and the image
    /// configurations keep the trace constructions away from parallelism.
    pub projections_nondegenerate: bool,
    /// The true auxiliary trace construction (computed by elementary 3D
    /// intersection, not the analysis pipeline) stays clear of its
    /// singularities: traces exist, u*v is away from 1, v away from the
    /// degenerate collapse value 1, and the trace reciprocals are bounded.
    pub constructions_nondegenerate: bool,
    /// The focal locator solves the instance with exactly one accepted root,
    /// also found at the matcher's coarser scan step.
    pub locator_well_posed: bool,
}

impl GeneralPositionCertificate {
    pub fn holds(&self) -> bool {
        self.no_four_coplanar
            && self.projections_nondegenerate
            && self.constructions_nondegenerate
            && self.locator_well_posed
    }
}

/// A rigid body of labeled scene points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidScene {
    points: Vec<(String, Point3)>,
    pub certificate: GeneralPositionCertificate,
}

impl RigidScene {
    pub fn from_points<I, S>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Point3)>,
        S: Into<String>,
    {
        let mut out: Vec<(String, Point3)> = Vec::new();
        for (label, p) in points {
            let label = label.into();
            if !p.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite point {label:?}")));
            }
            if out.iter().any(|(l, _)| *l == label) {
                return Err(Error::InvalidInput(format!("duplicate label {label:?}")));
            }
            out.push((label, p));
        }
        Ok(Self {
            points: out,
            certificate: GeneralPositionCertificate::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<Point3> {
        self.points
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, p)| *p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Point3)> {
        self.points.iter().map(|(l, p)| (l.as_str(), *p))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.points.iter().map(|(l, _)| l.as_str())
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                d = d.max(self.points[i].1.distance(self.points[j].1));
            }
        }
        d
    }
}

/// Projects every scene point through `cam` into a labeled frame.
pub fn project(scene: &RigidScene, cam: &CameraModel) -> Result<LabeledFrame> {
    let mut frame = LabeledFrame::new("frame");
    for (label, p) in scene.iter() {
        frame.insert(label, cam.project(p)?)?;
    }
    Ok(frame)
}

/// Projection of camera 1's focal point through camera 2: the ground truth
/// the locator must reproduce.
pub fn true_projected_focal(cam1: &CameraModel, cam2: &CameraModel) -> Result<Point2> {
    cam2.project(cam1.focal_point)
}

/// Scale-free shape descriptor: all pairwise distances divided by the
/// largest, sorted ascending. Equal for similar shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSignature {
    values: Vec<f64>,
}

impl ShapeSignature {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest entrywise difference; signatures must describe the same
    /// number of points.
    pub fn divergence(&self, other: &ShapeSignature) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::InvalidInput(
                "signatures have different point counts".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max))
    }
}

pub fn shape_signature(scene: &RigidScene) -> ShapeSignature {
    let pts: Vec<Point3> = scene.iter().map(|(_, p)| p).collect();
    let mut dists = Vec::with_capacity(pts.len() * (pts.len().saturating_sub(1)) / 2);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            dists.push(pts[i].distance(pts[j]));
        }
    }
    let max = dists.iter().fold(0.0_f64, |m, d| m.max(*d));
    if max > 0.0 {
        for d in dists.iter_mut() {
            *d /= max;
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ShapeSignature { values: dists }
}

/// Options the generated fixtures must satisfy; thresholds are relative.
#[derive(Debug, Clone, Copy)]
pub struct GenerationOptions {
    pub tetra_volume_margin: f64,
    pub projection_angle_margin: f64,
    pub image_separation_margin: f64,
    pub max_attempts: usize,
    /// Minimum distance of every true trace product u*v from the singular
    /// value 1, and of the unknown v from the collapse value 1.
    pub trace_product_margin: f64,
    /// Largest admissible |u| for the true B trace, so scans can resolve it.
    pub max_trace_reciprocal: f64,
    /// The locator must also bracket the root at these coarser steps so that
    /// matcher-grade scans stay reliable.
    pub coarse_scan_step: f64,
    pub coarse_reciprocal_step: f64,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            tetra_volume_margin: 1e-6,
            projection_angle_margin: 1e-6,
            image_separation_margin: 1e-6,
            max_attempts: 400,
            trace_product_margin: 5e-3,
            max_trace_reciprocal: 40.0,
            coarse_scan_step: 0.1,
            coarse_reciprocal_step: 4e-3,
        }
    }
}

/// Deterministic scene + camera pair fixture generator. Labels the first
/// seven points R, Q, P, A, C, E, G and any extras Z1, Z2, ...
///
/// Rejection-samples until the general-position certificate holds; the
/// returned scene carries the verified certificate.
pub fn random_rigid_scene(
    point_count: usize,
    seed: u64,
) -> Result<(RigidScene, CameraModel, CameraModel)> {
    random_rigid_scene_with(point_count, seed, &GenerationOptions::default())
}

pub fn random_rigid_scene_with(
    point_count: usize,
    seed: u64,
    options: &GenerationOptions,
) -> Result<(RigidScene, CameraModel, CameraModel)> {
    if point_count < 7 {
        return Err(Error::InvalidInput(
            "a rigid scene needs at least 7 points".into(),
        ));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..options.max_attempts {
        let mut labeled = Vec::with_capacity(point_count);
        for label in scene_labels(point_count) {
            let p = Point3::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            );
            labeled.push((label, p));
        }
        let mut scene = RigidScene::from_points(labeled)?;
        let cam1 = random_camera(&mut rng);
        let cam2 = random_camera(&mut rng);
        let certificate = certify(&scene, &cam1, &cam2, options);
        if certificate.holds() {
            scene.certificate = certificate;
            return Ok((scene, cam1, cam2));
        }
    }
    Err(Error::GenerationFailed(options.max_attempts))
}

/// Labels for a generated scene: the seven basis roles then Z1, Z2, ...
fn scene_labels(count: usize) -> impl Iterator<Item = String> {
    (0..count).map(|i| {
        if i < 7 {
            BASIS_LABELS[i].to_string()
        } else {
            format!("Z{}", i - 6)
        }
    })
}

fn random_unit_vector(rng: &mut StdRng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v.scale(1.0 / n);
        }
    }
}

fn random_camera(rng: &mut StdRng) -> CameraModel {
    let dir = random_unit_vector(rng);
    let dist = rng.gen_range(2.0..5.0);
    let focal_length = rng.gen_range(0.5..2.0);
    let focal = Point3::new(0.0, 0.0, 0.0) + dir.scale(dist);
    let view = dir.scale(-1.0);
    let up = if view.z.abs() > 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let ex = up.cross(view).normalized();
    let ey = view.cross(ex).normalized();
    let roll = rng.gen_range(0.0..std::f64::consts::TAU);
    let (s, c) = roll.sin_cos();
    CameraModel {
        plane_origin: focal + view.scale(focal_length),
        axis_x: ex.scale(c) + ey.scale(s),
        axis_y: ex.scale(-s) + ey.scale(c),
        focal_point: focal,
    }
}

/// Evaluates the general-position certificate for a scene and camera pair.
pub fn certify(
    scene: &RigidScene,
    cam1: &CameraModel,
    cam2: &CameraModel,
    options: &GenerationOptions,
) -> GeneralPositionCertificate {
    let no_four_coplanar = no_four_coplanar(scene, options.tetra_volume_margin);
    let projections_ok = projections_nondegenerate(scene, cam1, cam2, options);
    let true_traces = if no_four_coplanar && projections_ok {
        constructions_nondegenerate(scene, cam1, cam2, options)
    } else {
        None
    };
    let locator_well_posed =
        true_traces.is_some_and(|true_uv| locator_well_posed(scene, cam1, cam2, options, true_uv));
    GeneralPositionCertificate {
        no_four_coplanar,
        projections_nondegenerate: projections_ok,
        constructions_nondegenerate: true_traces.is_some(),
        locator_well_posed,
    }
}

/// Margin checks on the true trace construction, computed with elementary
/// 3D line/plane intersections only. Returns the true (u, v) of the B trace
/// when all margins hold.
fn constructions_nondegenerate(
    scene: &RigidScene,
    cam1: &CameraModel,
    cam2: &CameraModel,
    options: &GenerationOptions,
) -> Option<(f64, f64)> {
    use crate::geometry::{canonical_frame_map, intersect_lines, line_through};

    let p3 = scene.get("P")?;
    let q3 = scene.get("Q")?;
    let r3 = scene.get("R")?;
    let f1 = cam1.focal_point;
    let plane_normal = (q3 - p3).cross(r3 - p3);

    let img2 = |x: Point3| cam2.project(x).ok();
    let (r_img, q_img, p_img) = (img2(r3)?, img2(q3)?, img2(p3)?);
    let map = canonical_frame_map(r_img, q_img, p_img).ok()?;

    let origin = Point2::new(0.0, 0.0);
    let unit_x = Point2::new(1.0, 0.0);
    let unit_y = Point2::new(0.0, 1.0);
    let x_axis = line_through(origin, unit_x).ok()?;
    let y_axis = line_through(origin, unit_y).ok()?;

    let mut b_trace = None;
    for label in ["A", "C", "E", "G"] {
        let a3 = scene.get(label)?;
        // intersection of ray F1->point with plane PQR
        let dir = a3 - f1;
        let denom = plane_normal.dot(dir);
        if denom.abs() <= options.projection_angle_margin * plane_normal.norm() * dir.norm() {
            return None;
        }
        let hit = f1 + dir.scale(plane_normal.dot(p3 - f1) / denom);
        let b = map.apply(img2(hit)?);
        // canonical trace reciprocals
        let lp = line_through(b, unit_y).ok()?;
        let lq = line_through(b, unit_x).ok()?;
        let bp = intersect_lines(lp, x_axis).ok()?;
        let bq = intersect_lines(lq, y_axis).ok()?;
        if bp.x.abs() <= 1e-6 || bq.y.abs() <= 1e-6 {
            return None;
        }
        let (u, v) = (1.0 / bp.x, 1.0 / bq.y);
        if (u * v - 1.0).abs() < options.trace_product_margin {
            return None;
        }
        if b_trace.is_none() {
            // margins for the unknowns themselves: degenerate collapse and
            // scan resolvability
            if (v - 1.0).abs() < options.trace_product_margin
                || u.abs() > options.max_trace_reciprocal
            {
                return None;
            }
            b_trace = Some((u, v));
        }
    }
    b_trace
}

fn no_four_coplanar(scene: &RigidScene, margin: f64) -> bool {
    let pts: Vec<Point3> = scene.iter().take(7).map(|(_, p)| p).collect();
    if pts.len() < 7 {
        return false;
    }
    let diam = scene.diameter();
    if diam <= 0.0 || !diam.is_finite() {
        return false;
    }
    for i in 0..7 {
        for j in (i + 1)..7 {
            for k in (j + 1)..7 {
                for l in (k + 1)..7 {
                    let v = (pts[j] - pts[i])
                        .cross(pts[k] - pts[i])
                        .dot(pts[l] - pts[i])
                        .abs();
                    if v <= margin * diam * diam * diam {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn projections_nondegenerate(
    scene: &RigidScene,
    cam1: &CameraModel,
    cam2: &CameraModel,
    options: &GenerationOptions,
) -> bool {
    for cam in [cam1, cam2] {
        let n = cam.normal();
        let mut images: Vec<Point2> = Vec::with_capacity(scene.len());
        for (_, p) in scene.iter() {
            let ray = p - cam.focal_point;
            let len = ray.norm();
            if len <= 1e-6 * scene.diameter()
                || n.dot(ray).abs() <= options.projection_angle_margin * len
            {
                return false;
            }
            match cam.project(p) {
                Ok(img) => images.push(img),
                Err(_) => return false,
            }
        }
        // every image point distinct, R/Q/P triangle not thin
        let mut extent = 0.0_f64;
        for p in &images {
            extent = extent.max(p.x.abs()).max(p.y.abs());
        }
        let extent = extent.max(1e-12);
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                if images[i].distance(images[j]) <= options.image_separation_margin * extent {
                    return false;
                }
            }
        }
        let (r, q, p) = (images[0], images[1], images[2]);
        let span = (q - r).norm().max((p - r).norm());
        if (q - r).cross(p - r).abs() <= options.image_separation_margin * span * span {
            return false;
        }
    }
    // the second frame's focal projection must itself exist
    if true_projected_focal(cam1, cam2).is_err() {
        return false;
    }
    true
}

/// The instance must be solvable with a single accepted root, both at the
/// default scan resolution and at the coarser matcher-grade step, and the
/// true root must be a simple, scan-resolvable crossing: the concurrency
/// function changes sign across the true trace reciprocal within one step
/// at either resolution (near-tangent instances sit next to a critical
/// configuration and no scan can see them reliably). Only used to reject
/// ill-posed fixtures; no expected values come from here.
fn locator_well_posed(
    scene: &RigidScene,
    cam1: &CameraModel,
    cam2: &CameraModel,
    options: &GenerationOptions,
    true_uv: (f64, f64),
) -> bool {
    use crate::focal::{concurrency_poly, eliminate_v, TraceParams};
    use crate::transfer::basis_quotients;

    let project_basis = |cam: &CameraModel| -> Option<[Point2; 7]> {
        let mut out = [Point2::new(0.0, 0.0); 7];
        for (slot, label) in out.iter_mut().zip(BASIS_LABELS) {
            *slot = cam.project(scene.get(label)?).ok()?;
        }
        Some(out)
    };
    let (Some(b1), Some(b2)) = (project_basis(cam1), project_basis(cam2)) else {
        return false;
    };

    // sign-window resolvability at the true root
    let Ok(quotients) = basis_quotients(&b1) else {
        return false;
    };
    let Ok(map) = crate::geometry::canonical_frame_map(b2[0], b2[1], b2[2]) else {
        return false;
    };
    let known: Vec<Point2> = (3..7).map(|i| map.apply(b2[i])).collect();
    let tb = TraceParams::unknowns();
    let td = TraceParams::chained(quotients.q_cp, quotients.q_cq);
    let tf = TraceParams::chained(quotients.q_ep, quotients.q_eq);
    let th = TraceParams::chained(quotients.q_gp, quotients.q_gq);
    let eq1 = concurrency_poly((known[0], &tb), (known[1], &td), (known[2], &tf));
    let eq2 = concurrency_poly((known[0], &tb), (known[1], &td), (known[3], &th));
    let quad = eliminate_v(&eq1, &eq2);
    let g = |u: f64| -> f64 {
        match quad.nondegenerate_root(u) {
            Ok(v) => eq1.eval(u, v),
            Err(_) => f64::NAN,
        }
    };
    let fine = LocatorOptions::default();
    let u_true = true_uv.0;
    // the exact scan cell containing the true root must bracket it (a pole
    // or twin root inside the same cell makes the crossing grid-invisible),
    // and the endpoint values must be loud enough against the coefficient
    // scale or refinement drowns in evaluation noise
    let visibility_floor = 1e-9 * eq1.max_abs_coeff();
    for step in [fine.scan_step, options.coarse_scan_step] {
        let k = ((u_true - fine.scan_min) / step).floor();
        let x0 = fine.scan_min + k * step;
        let x1 = x0 + step;
        let (lo, hi) = (g(x0), g(x1));
        if !(lo.is_finite() && hi.is_finite()) || (lo < 0.0) == (hi < 0.0) {
            return false;
        }
        if lo.abs() < visibility_floor || hi.abs() < visibility_floor {
            return false;
        }
    }

    let Ok(sol) = locate_from_basis(&b1, &b2, &fine) else {
        return false;
    };
    if sol.all_roots.iter().filter(|c| c.accepted).count() != 1 {
        return false;
    }
    // keep clear of the degenerate collapse and the trace singularity
    if (sol.v_root - 1.0).abs() < 1e-3 || (sol.u_root * sol.v_root - 1.0).abs() < 1e-3 {
        return false;
    }
    let coarse = LocatorOptions {
        scan_step: options.coarse_scan_step,
        reciprocal_step: options.coarse_reciprocal_step,
        ..fine
    };
    let Ok(sol2) = locate_from_basis(&b1, &b2, &coarse) else {
        return false;
    };
    if sol2.all_roots.iter().filter(|c| c.accepted).count() != 1 {
        return false;
    }
    (sol2.u_root - sol.u_root).abs() <= 1e-6 * (1.0 + sol.u_root.abs())
}

/// Slides camera 1's focal point along the baseline f = F1F2 by the affine
/// parameter `t` (t = 0 keeps F1, t = 1 would reach F2 and is excluded) and
/// re-intersects every viewing-ray pair, producing a different rigid body
/// that projects onto both original frames exactly.
pub fn ambiguity_family(
    scene: &RigidScene,
    cam1: &CameraModel,
    cam2: &CameraModel,
    t: f64,
) -> Result<(RigidScene, CameraModel)> {
    let f1 = cam1.focal_point;
    let f2 = cam2.focal_point;
    let baseline = f2 - f1;
    if baseline.norm() <= 1e-12 {
        return Err(Error::DegenerateConfiguration(
            "focal points coincide".into(),
        ));
    }
    if (t - 1.0).abs() <= 1e-9 {
        return Err(Error::InvalidInput(
            "t = 1 would move the focal point onto F2".into(),
        ));
    }
    let f1_star = f1 + baseline.scale(t);
    let moved = cam1.with_focal(f1_star).map_err(|_| {
        Error::DegenerateConfiguration("moved focal point lies on image plane 1".into())
    })?;
    let scale = scene.diameter().max(baseline.norm());
    let mut points = Vec::with_capacity(scene.len());
    for (label, p) in scene.iter() {
        let img1 = cam1.embed(cam1.project(p)?);
        let img2 = cam2.embed(cam2.project(p)?);
        let d1 = img1 - f1_star;
        let d2 = img2 - f2;
        let (a, b, c) = (d1.dot(d1), d1.dot(d2), d2.dot(d2));
        let w0 = f1_star - f2;
        let denom = a * c - b * b;
        if denom.abs() <= 1e-12 * a * c {
            return Err(Error::RaysParallel);
        }
        let d = d1.dot(w0);
        let e = d2.dot(w0);
        let s1 = (b * e - c * d) / denom;
        let s2 = (a * e - b * d) / denom;
        let p1 = f1_star + d1.scale(s1);
        let p2 = f2 + d2.scale(s2);
        if (p1 - p2).norm() > 1e-9 * scale {
            return Err(Error::RaysParallel);
        }
        points.push((
            label.to_string(),
            Point3::new(
                0.5 * (p1.x + p2.x),
                0.5 * (p1.y + p2.y),
                0.5 * (p1.z + p2.z),
            ),
        ));
    }
    let mut new_scene = RigidScene::from_points(points)?;
    new_scene.certificate = GeneralPositionCertificate::default();
    Ok((new_scene, moved))
}
