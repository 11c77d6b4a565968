//! Exact 2D geometric primitives: points, implicit lines, affine maps, and
//! the double quotient (cross-ratio) of four collinear points.
//!
//! Everything here is a pure function on plain `f64` values. Degeneracies
//! (coincident points, parallel lines, non-collinear quadruples) are errors,
//! not NaNs; tolerances are relative to the extent of the inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance below which a triple counts as collinear
/// (triangle height over longest side).
pub const COLLINEAR_TOL: f64 = 1e-9;

/// Sine-of-angle threshold below which two lines count as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Vec2;
    fn sub(self, rhs: Point2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add<Vec2> for Point2 {
    type Output = Point2;
    fn add(self, rhs: Vec2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// A point in scene space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: Point3) -> f64 {
        (*self - other).norm()
    }
}

impl std::ops::Sub for Point3 {
    type Output = Vec3;
    fn sub(self, rhs: Point3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Add<Vec3> for Point3 {
    type Output = Point3;
    fn add(self, rhs: Vec3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

/// Spatial displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        self.scale(1.0 / n)
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

/// Planar displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3D cross product; zero iff parallel.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// A line {(x,y) : a*x + b*y + c = 0}, stored with a^2 + b^2 = 1 so that
/// evaluating the left-hand side at a point is its signed distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Line2 {
    /// Normalizes (a,b,c); the normal (a,b) must not vanish.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let n = a.hypot(b);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput("line normal vanishes".into()));
        }
        Ok(Self {
            a: a / n,
            b: b / n,
            c: c / n,
        })
    }

    /// Signed distance of `p` from the line.
    pub fn eval(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }

    pub fn distance(&self, p: Point2) -> f64 {
        self.eval(p).abs()
    }
}

/// Line through two distinct points.
pub fn line_through(p: Point2, q: Point2) -> Result<Line2> {
    let d = q - p;
    let scale =
        p.x.abs()
            .max(p.y.abs())
            .max(q.x.abs())
            .max(q.y.abs())
            .max(1.0);
    if d.norm() <= 1e-12 * scale {
        return Err(Error::CoincidentPoints);
    }
    // normal is the direction rotated by 90 degrees
    let a = d.y;
    let b = -d.x;
    let c = -(a * p.x + b * p.y);
    Line2::new(a, b, c)
}

/// Intersection of two (normalized) lines.
pub fn intersect_lines(l1: Line2, l2: Line2) -> Result<Point2> {
    // normals are unit vectors, so the determinant is sin of the angle
    let det = l1.a * l2.b - l2.a * l1.b;
    if det.abs() < PARALLEL_TOL {
        return Err(Error::ParallelLines);
    }
    let x = (-l1.c * l2.b + l2.c * l1.b) / det;
    let y = (-l1.a * l2.c + l2.a * l1.c) / det;
    Ok(Point2::new(x, y))
}

/// Checks that all points lie on one line, within `COLLINEAR_TOL` of the
/// configuration's extent.
fn collinear(points: &[Point2]) -> bool {
    // anchor the line on the two farthest-apart points
    let mut best = (0, 1, 0.0);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = points[i].distance(points[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, span) = best;
    if span == 0.0 {
        return true;
    }
    let dir = (points[j] - points[i]).scale(1.0 / span);
    points.iter().all(|p| {
        let w = *p - points[i];
        (w.cross(dir)).abs() <= COLLINEAR_TOL * span
    })
}

/// Signed affine parameter of `p` along the line through `origin` and `unit`,
/// with `origin` at 0 and `unit` at 1.
pub fn axis_parameter(p: Point2, origin: Point2, unit: Point2) -> Result<f64> {
    let d = unit - origin;
    let n2 = d.dot(d);
    if n2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok((p - origin).dot(d) / n2)
}

/// Double quotient (cross-ratio) of four collinear points:
/// DQ(A,B,C,D) = (AC/AD) : (BC/BD), ratios taken as signed parameters along
/// the common line. Invariant under any perspective projection.
pub fn cross_ratio(a: Point2, b: Point2, c: Point2, d: Point2) -> Result<f64> {
    let pts = [a, b, c, d];
    if !collinear(&pts) {
        return Err(Error::NotCollinear);
    }
    // parametrize along the dominant span
    let mut far = (0, 1, 0.0);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let dist = pts[i].distance(pts[j]);
            if dist > far.2 {
                far = (i, j, dist);
            }
        }
    }
    let (o, u, span) = (pts[far.0], pts[far.1], far.2);
    if span == 0.0 {
        return Err(Error::DegenerateQuadruple);
    }
    let t = |p: Point2| -> f64 { (p - o).dot(u - o) / (span * span) };
    let (ta, tb, tc, td) = (t(a), t(b), t(c), t(d));
    let ad = td - ta;
    let bc = tc - tb;
    if ad.abs() <= COLLINEAR_TOL || bc.abs() <= COLLINEAR_TOL {
        return Err(Error::DegenerateQuadruple);
    }
    Ok(((tc - ta) * (td - tb)) / (ad * bc))
}

/// Invertible affine map x -> M x + t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap2 {
    pub m: [[f64; 2]; 2],
    pub t: [f64; 2],
}

impl AffineMap2 {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0], [0.0, 1.0]],
            t: [0.0, 0.0],
        }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.t[0],
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.t[1],
        )
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Result<AffineMap2> {
        let det = self.det();
        if det.abs() < 1e-300 {
            return Err(Error::DegenerateConfiguration(
                "affine map is singular".into(),
            ));
        }
        let m = [
            [self.m[1][1] / det, -self.m[0][1] / det],
            [-self.m[1][0] / det, self.m[0][0] / det],
        ];
        let t = [
            -(m[0][0] * self.t[0] + m[0][1] * self.t[1]),
            -(m[1][0] * self.t[0] + m[1][1] * self.t[1]),
        ];
        Ok(AffineMap2 { m, t })
    }
}

/// The unique affine map sending r -> (0,0), q -> (1,0), p -> (0,1).
///
/// Any cross-ratio preserving map would do for the canonical frame; the
/// affine one is the simplest and is exactly invertible.
pub fn canonical_frame_map(r: Point2, q: Point2, p: Point2) -> Result<AffineMap2> {
    let eq = q - r;
    let ep = p - r;
    let det = eq.cross(ep);
    let span = eq.norm().max(ep.norm());
    if span == 0.0 || det.abs() <= COLLINEAR_TOL * span * span {
        return Err(Error::CollinearBasis);
    }
    // columns of the inverse basis matrix [q-r, p-r]
    let m = [[ep.y / det, -ep.x / det], [-eq.y / det, eq.x / det]];
    let t = [
        -(m[0][0] * r.x + m[0][1] * r.y),
        -(m[1][0] * r.x + m[1][1] * r.y),
    ];
    Ok(AffineMap2 { m, t })
}

/// Distance of a point from a (normalized) line.
pub fn point_line_distance(p: Point2, l: Line2) -> f64 {
    l.distance(p)
}
