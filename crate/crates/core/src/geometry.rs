//! 2D workspace, convex obstacles and rigid-body footprints.
//!
//! Obstacles and robot footprints are strictly convex counter-clockwise
//! polygons; axis-aligned rectangles are the common case. Intersection
//! tests use the separating-axis theorem over both polygons' edge
//! normals, and touching counts as intersecting.

use thiserror::Error;

/// Tolerance for convexity / orientation checks at construction time.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("workspace bounds must satisfy xmin < xmax and ymin < ymax, got [{xmin}, {xmax}] x [{ymin}, {ymax}]")]
    BadWorkspace { xmin: f64, xmax: f64, ymin: f64, ymax: f64 },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not strictly convex and counter-clockwise at vertex {0}")]
    NotConvexCcw(usize),
    #[error("body dimensions must be positive, got length {length}, width {width}")]
    BadBody { length: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Axis-aligned bounded planning workspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workspace {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Workspace {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, GeometryError> {
        if !(xmin < xmax && ymin < ymax) {
            return Err(GeometryError::BadWorkspace { xmin, xmax, ymin, ymax });
        }
        Ok(Workspace { xmin, xmax, ymin, ymax })
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }
}

/// Strictly convex polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
            if cross <= GEOM_EPS {
                return Err(GeometryError::NotConvexCcw(i));
            }
        }
        Ok(ConvexPolygon { vertices })
    }

    /// Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
    pub fn rect(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, GeometryError> {
        ConvexPolygon::new(vec![
            Point::new(xmax, ymax),
            Point::new(xmin, ymax),
            Point::new(xmin, ymin),
            Point::new(xmax, ymin),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Signed shoelace area; positive for the enforced ccw orientation.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc += a.x * b.y - a.y * b.x;
        }
        acc / 2.0
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }

    /// Radius of the smallest circle around `centroid` containing all vertices.
    pub fn circumradius(&self) -> f64 {
        let c = self.centroid();
        self.vertices
            .iter()
            .map(|p| p.dist(c))
            .fold(0.0, f64::max)
    }
}

/// Rectangular rigid-body dimensions; the long axis points along the heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySpec {
    pub length: f64,
    pub width: f64,
}

impl BodySpec {
    pub fn new(length: f64, width: f64) -> Result<Self, GeometryError> {
        if length <= 0.0 || width <= 0.0 {
            return Err(GeometryError::BadBody { length, width });
        }
        Ok(BodySpec { length, width })
    }

    /// Grow the rectangle by `margin` on every side (planning safety margin).
    pub fn inflate(&self, margin: f64) -> BodySpec {
        BodySpec {
            length: self.length + 2.0 * margin,
            width: self.width + 2.0 * margin,
        }
    }

    /// Half-diagonal: radius of the circle around the center covering the body.
    pub fn circumradius(&self) -> f64 {
        ((self.length / 2.0).powi(2) + (self.width / 2.0).powi(2)).sqrt()
    }
}

/// Planar pose of a body center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// The four corners of `body` centered at the pose, rotated by its heading.
/// Returned counter-clockwise starting at the front-left corner.
pub fn footprint(body: BodySpec, pose: Pose) -> ConvexPolygon {
    let hl = body.length / 2.0;
    let hw = body.width / 2.0;
    let (sin, cos) = pose.theta.sin_cos();
    let corner = |lx: f64, ly: f64| Point {
        x: pose.x + lx * cos - ly * sin,
        y: pose.y + lx * sin + ly * cos,
    };
    ConvexPolygon {
        vertices: vec![
            corner(hl, hw),
            corner(-hl, hw),
            corner(-hl, -hw),
            corner(hl, -hw),
        ],
    }
}

fn project(vertices: &[Point], ax: f64, ay: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vertices {
        let d = v.x * ax + v.y * ay;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

/// True iff the closed polygons intersect; touching counts as intersecting.
pub fn polygons_intersect(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    for polygon in [a, b] {
        let verts = polygon.vertices();
        let n = verts.len();
        for i in 0..n {
            let p = verts[i];
            let q = verts[(i + 1) % n];
            // Outward edge normal of a ccw polygon.
            let (ax, ay) = (q.y - p.y, p.x - q.x);
            let (lo_a, hi_a) = project(a.vertices(), ax, ay);
            let (lo_b, hi_b) = project(b.vertices(), ax, ay);
            if hi_a < lo_b || hi_b < lo_a {
                return false;
            }
        }
    }
    true
}

/// True iff every vertex of `p` lies inside the workspace bounds.
pub fn inside_workspace(p: &ConvexPolygon, w: &Workspace) -> bool {
    p.vertices().iter().all(|&v| w.contains_point(v))
}
