use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// Shape of a bounded planar domain. Every shape except `Polygon` is centred at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    UnitDisk,
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Rectangle { width: f64, height: f64 },
    Polygon { vertices: Vec<Point> },
    Annulus { inner: f64, outer: f64 },
}

/// A line through `point` with direction `direction`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub point: Point,
    pub direction: Point,
}

impl Axis {
    pub fn x_axis() -> Self {
        Axis { point: [0.0, 0.0], direction: [1.0, 0.0] }
    }

    pub fn y_axis() -> Self {
        Axis { point: [0.0, 0.0], direction: [0.0, 1.0] }
    }

    /// Line through the origin at angle `theta` from the x axis.
    pub fn through_origin(theta: f64) -> Self {
        Axis { point: [0.0, 0.0], direction: [theta.cos(), theta.sin()] }
    }

    /// Mirror image of `p`. Reflections about the coordinate axes are exact.
    pub fn reflect(&self, p: Point) -> Point {
        let [px, py] = self.point;
        let [dx, dy] = self.direction;
        if px == 0.0 && py == 0.0 {
            if dy == 0.0 && dx != 0.0 {
                return [p[0], -p[1]];
            }
            if dx == 0.0 && dy != 0.0 {
                return [-p[0], p[1]];
            }
        }
        let norm = (dx * dx + dy * dy).sqrt();
        let (ux, uy) = (dx / norm, dy / norm);
        let (rx, ry) = (p[0] - px, p[1] - py);
        let along = rx * ux + ry * uy;
        let (fx, fy) = (px + along * ux, py + along * uy);
        [2.0 * fx - p[0], 2.0 * fy - p[1]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default, rename = "symmetry-axis", skip_serializing_if = "Option::is_none")]
    pub symmetry_axis: Option<Axis>,
}

impl From<Shape> for DomainSpec {
    fn from(shape: Shape) -> Self {
        DomainSpec { shape, symmetry_axis: None }
    }
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        Shape::UnitDisk.into()
    }

    pub fn disk(radius: f64) -> Self {
        Shape::Disk { radius }.into()
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Shape::Ellipse { a, b }.into()
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Shape::Rectangle { width, height }.into()
    }

    pub fn polygon(vertices: Vec<Point>) -> Self {
        Shape::Polygon { vertices }.into()
    }

    pub fn annulus(inner: f64, outer: f64) -> Self {
        Shape::Annulus { inner, outer }.into()
    }

    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.symmetry_axis = Some(axis);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::DegenerateDomain(format!("{name} must be positive, got {v}")))
            }
        };
        match &self.shape {
            Shape::UnitDisk => Ok(()),
            Shape::Disk { radius } => positive("radius", *radius),
            Shape::Ellipse { a, b } => positive("a", *a).and(positive("b", *b)),
            Shape::Rectangle { width, height } => positive("width", *width).and(positive("height", *height)),
            Shape::Annulus { inner, outer } => {
                positive("inner radius", *inner)?;
                positive("outer radius", *outer)?;
                if inner >= outer {
                    return Err(Error::DegenerateDomain(format!(
                        "annulus inner radius {inner} must be below outer radius {outer}"
                    )));
                }
                Ok(())
            }
            Shape::Polygon { vertices } => validate_polygon(vertices),
        }
    }

    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match &self.shape {
            Shape::UnitDisk => PI,
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Ellipse { a, b } => PI * a * b,
            Shape::Rectangle { width, height } => width * height,
            Shape::Polygon { vertices } => signed_area(vertices),
            Shape::Annulus { inner, outer } => PI * (outer * outer - inner * inner),
        }
    }

    pub fn is_curved(&self) -> bool {
        matches!(self.shape, Shape::UnitDisk | Shape::Disk { .. } | Shape::Ellipse { .. } | Shape::Annulus { .. })
    }

    pub fn is_multiply_connected(&self) -> bool {
        matches!(self.shape, Shape::Annulus { .. })
    }

    pub fn contains(&self, p: Point) -> bool {
        let [x, y] = p;
        let r2 = x * x + y * y;
        match &self.shape {
            Shape::UnitDisk => r2 < 1.0,
            Shape::Disk { radius } => r2 < radius * radius,
            Shape::Ellipse { a, b } => (x / a).powi(2) + (y / b).powi(2) < 1.0,
            Shape::Rectangle { width, height } => x.abs() < 0.5 * width && y.abs() < 0.5 * height,
            Shape::Annulus { inner, outer } => r2 > inner * inner && r2 < outer * outer,
            Shape::Polygon { vertices } => point_in_polygon(vertices, p),
        }
    }

    /// Moves a point lying near a curved boundary onto the exact curve. Polygonal
    /// boundaries are returned unchanged.
    pub fn project_to_boundary(&self, p: Point) -> Point {
        let [x, y] = p;
        let r = (x * x + y * y).sqrt();
        match &self.shape {
            Shape::UnitDisk => [x / r, y / r],
            Shape::Disk { radius } => [x * radius / r, y * radius / r],
            Shape::Ellipse { a, b } => {
                let s = ((x / a).powi(2) + (y / b).powi(2)).sqrt();
                [x / s, y / s]
            }
            Shape::Annulus { inner, outer } => {
                let target = if (r - inner).abs() < (r - outer).abs() { *inner } else { *outer };
                [x * target / r, y * target / r]
            }
            Shape::Rectangle { .. } | Shape::Polygon { .. } => p,
        }
    }

    /// Reference point used for radial constructions (origin, or polygon centroid).
    pub fn center(&self) -> Point {
        match &self.shape {
            Shape::Polygon { vertices } => polygon_centroid(vertices),
            _ => [0.0, 0.0],
        }
    }

    /// Radius of a ball around `center()` that fits in the domain (exact for the
    /// symmetric shapes, a lower bound for polygons). Zero for the annulus.
    pub fn inner_radius(&self) -> f64 {
        match &self.shape {
            Shape::UnitDisk => 1.0,
            Shape::Disk { radius } => *radius,
            Shape::Ellipse { a, b } => a.min(*b),
            Shape::Rectangle { width, height } => 0.5 * width.min(*height),
            Shape::Annulus { .. } => 0.0,
            Shape::Polygon { vertices } => {
                let c = polygon_centroid(vertices);
                let n = vertices.len();
                (0..n)
                    .map(|i| point_segment_distance(c, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::UnitDisk => 2.0,
            Shape::Disk { radius } => 2.0 * radius,
            Shape::Ellipse { a, b } => 2.0 * a.max(*b),
            Shape::Rectangle { width, height } => width.hypot(*height),
            Shape::Annulus { outer, .. } => 2.0 * outer,
            Shape::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for p in vertices {
                    for q in vertices {
                        d = d.max((p[0] - q[0]).hypot(p[1] - q[1]));
                    }
                }
                d
            }
        }
    }

    /// Whether `axis` maps the domain onto itself (checked on the closed-form shape).
    pub fn is_symmetric_about(&self, axis: &Axis) -> bool {
        let through_origin = axis.point == [0.0, 0.0];
        let [dx, dy] = axis.direction;
        let coordinate = dx == 0.0 || dy == 0.0;
        match &self.shape {
            Shape::UnitDisk | Shape::Disk { .. } | Shape::Annulus { .. } => through_origin,
            Shape::Ellipse { a, b } => through_origin && (coordinate || a == b),
            Shape::Rectangle { .. } => through_origin && coordinate,
            Shape::Polygon { vertices } => {
                let scale = self.diameter();
                vertices.iter().all(|&v| {
                    let r = axis.reflect(v);
                    vertices.iter().any(|w| (w[0] - r[0]).hypot(w[1] - r[1]) <= 1e-9 * scale)
                })
            }
        }
    }
}

pub(crate) fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut s = 0.0;
    for i in 0..n {
        let [x0, y0] = vertices[i];
        let [x1, y1] = vertices[(i + 1) % n];
        s += x0 * y1 - x1 * y0;
    }
    0.5 * s
}

fn polygon_centroid(vertices: &[Point]) -> Point {
    let n = vertices.len();
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let [x0, y0] = vertices[i];
        let [x1, y1] = vertices[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

pub(crate) fn point_in_polygon(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let [xi, yi] = vertices[i];
        let [xj, yj] = vertices[j];
        if (yi > p[1]) != (yj > p[1]) && p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len2 = ex * ex + ey * ey;
    let t = if len2 > 0.0 { (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - t * ex).hypot(p[1] - a[1] - t * ey)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn validate_polygon(vertices: &[Point]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::DegenerateDomain(format!("polygon needs 3 vertices, got {n}")));
    }
    if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
        return Err(Error::DegenerateDomain("polygon vertex is not finite".into()));
    }
    let area = signed_area(vertices);
    if area.abs() < 1e-14 {
        return Err(Error::DegenerateDomain("polygon has zero area".into()));
    }
    if area < 0.0 {
        return Err(Error::DegenerateDomain("polygon vertices must be counterclockwise".into()));
    }
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        if a == b {
            return Err(Error::DegenerateDomain(format!("repeated polygon vertex {i}")));
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return Err(Error::DegenerateDomain(format!("polygon edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}
