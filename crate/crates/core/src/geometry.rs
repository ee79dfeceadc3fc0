//! Compact obstacles in the plane and the convexity queries used by the
//! sliding argument.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid2D;

pub type Point = [f64; 2];

/// Boundary tolerance for analytic shapes.
pub const ANALYTIC_BOUNDARY_TOL: f64 = 1e-9;

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn normalize(a: Point) -> Option<Point> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| [a[0] / n, a[1] / n])
}

/// A boolean raster over the square `[-halfwidth, halfwidth]^2` with `n x n`
/// cells, stored row-major with row 0 at the lowest `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterMask {
    pub halfwidth: f64,
    pub n: usize,
    pub cells: Vec<bool>,
}

impl RasterMask {
    pub fn new(halfwidth: f64, n: usize, cells: Vec<bool>) -> Result<Self> {
        if !(halfwidth > 0.0) || n == 0 || cells.len() != n * n {
            return Err(invalid(
                "raster",
                "mask must be n*n cells over a positive box",
            ));
        }
        Ok(Self {
            halfwidth,
            n,
            cells,
        })
    }

    fn h(&self) -> f64 {
        2.0 * self.halfwidth / self.n as f64
    }

    fn center(&self, k: usize) -> Point {
        let h = self.h();
        let (ix, iy) = (k % self.n, k / self.n);
        [
            -self.halfwidth + (ix as f64 + 0.5) * h,
            -self.halfwidth + (iy as f64 + 0.5) * h,
        ]
    }

    fn cell_at(&self, x: Point) -> Option<usize> {
        let h = self.h();
        let fx = ((x[0] + self.halfwidth) / h).floor();
        let fy = ((x[1] + self.halfwidth) / h).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.n as f64 || fy >= self.n as f64 {
            return None;
        }
        Some(fy as usize * self.n + fx as usize)
    }

    fn set_centers(&self) -> Vec<Point> {
        (0..self.cells.len())
            .filter(|&k| self.cells[k])
            .map(|k| self.center(k))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Disk {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        semi_axes: [f64; 2],
    },
    /// Simple polygon, stored counterclockwise. Convexity is checked, not assumed.
    Polygon {
        vertices: Vec<Point>,
    },
    RasterMask(RasterMask),
}

/// A compact obstacle `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    shape: Shape,
    declared_convex: bool,
}

/// The open half-space `{x : x.e > offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub e: Point,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(e: Point, offset: f64) -> Result<Self> {
        let e = normalize(e).ok_or_else(|| invalid("e", "direction must be nonzero"))?;
        Ok(Self { e, offset })
    }

    pub fn contains(&self, x: Point) -> bool {
        dot(x, self.e) > self.offset
    }

    pub fn contains_closed(&self, x: Point) -> bool {
        dot(x, self.e) >= self.offset
    }
}

impl Obstacle {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid(
                "radius",
                format!("{radius} must be finite and nonnegative"),
            ));
        }
        Ok(Self {
            shape: Shape::Disk { center, radius },
            declared_convex: true,
        })
    }

    pub fn ellipse(center: Point, semi_axes: [f64; 2]) -> Result<Self> {
        if !semi_axes.iter().all(|a| *a > 0.0 && a.is_finite()) {
            return Err(invalid("semi_axes", "must be positive"));
        }
        Ok(Self {
            shape: Shape::Ellipse { center, semi_axes },
            declared_convex: true,
        })
    }

    /// Polygon from a vertex list in either orientation; stored counterclockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(invalid(
                "vertices",
                "a polygon needs at least three vertices",
            ));
        }
        if !vertices.iter().flatten().all(|c| c.is_finite()) {
            return Err(invalid("vertices", "coordinates must be finite"));
        }
        let area2: f64 = (0..vertices.len())
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % vertices.len()];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if area2.abs() < 1e-14 {
            return Err(invalid("vertices", "polygon has zero area"));
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        let mut obstacle = Self {
            shape: Shape::Polygon { vertices },
            declared_convex: false,
        };
        obstacle.declared_convex = obstacle.is_convex();
        Ok(obstacle)
    }

    /// Raster obstacle. Not treated as convex until [`Obstacle::certify_convex`].
    pub fn raster(mask: RasterMask) -> Self {
        Self {
            shape: Shape::RasterMask(mask),
            declared_convex: false,
        }
    }

    /// Mark the obstacle convex if [`Obstacle::is_convex`] confirms it.
    pub fn certify_convex(mut self) -> Self {
        self.declared_convex = self.is_convex();
        self
    }

    /// Convex hull as an obstacle; a raster's hull covers its cells' corners.
    pub fn hull(&self) -> Result<Self> {
        match &self.shape {
            Shape::Disk { .. } | Shape::Ellipse { .. } => Ok(self.clone()),
            Shape::Polygon { vertices } => Self::polygon(convex_hull(vertices)),
            Shape::RasterMask(m) => {
                let half = m.h() / 2.0;
                let corners: Vec<Point> = m
                    .set_centers()
                    .into_iter()
                    .flat_map(|c| {
                        [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
                            .map(|d: Point| [c[0] + d[0] * half, c[1] + d[1] * half])
                    })
                    .collect();
                if corners.is_empty() {
                    return Err(invalid("obstacle", "raster mask is empty"));
                }
                Self::polygon(convex_hull(&corners))
            }
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn declared_convex(&self) -> bool {
        self.declared_convex
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.shape {
            Shape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Shape::Ellipse { center, semi_axes } => (
                [center[0] - semi_axes[0], center[1] - semi_axes[1]],
                [center[0] + semi_axes[0], center[1] + semi_axes[1]],
            ),
            Shape::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for d in 0..2 {
                        lo[d] = lo[d].min(v[d]);
                        hi[d] = hi[d].max(v[d]);
                    }
                }
                (lo, hi)
            }
            Shape::RasterMask(m) => {
                let half = m.h() / 2.0;
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for c in m.set_centers() {
                    for d in 0..2 {
                        lo[d] = lo[d].min(c[d] - half);
                        hi[d] = hi[d].max(c[d] + half);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, x: Point) -> bool {
        match &self.shape {
            Shape::Disk { center, radius } => {
                norm(sub(x, *center)) <= radius + 1e-12 * radius.max(1.0)
            }
            Shape::Ellipse { center, semi_axes } => {
                let u = (x[0] - center[0]) / semi_axes[0];
                let v = (x[1] - center[1]) / semi_axes[1];
                u * u + v * v <= 1.0 + 1e-12
            }
            Shape::Polygon { vertices } => polygon_contains(vertices, x),
            Shape::RasterMask(m) => m.cell_at(x).is_some_and(|k| m.cells[k]),
        }
    }

    /// Closest point of the boundary to `x`.
    fn closest_boundary_point(&self, x: Point) -> Result<Point> {
        match &self.shape {
            Shape::Disk { center, radius } => {
                let d = sub(x, *center);
                let dir = normalize(d).unwrap_or([1.0, 0.0]);
                Ok([center[0] + radius * dir[0], center[1] + radius * dir[1]])
            }
            Shape::Ellipse { center, semi_axes } => {
                let p = closest_on_ellipse(semi_axes[0], semi_axes[1], sub(x, *center));
                Ok([p[0] + center[0], p[1] + center[1]])
            }
            Shape::Polygon { vertices } => Ok(closest_on_polygon(vertices, x).0),
            Shape::RasterMask(_) => Err(invalid(
                "obstacle",
                "boundary queries are not defined for raster masks",
            )),
        }
    }

    /// Outward unit normal at a boundary point (within `tol`). Polygon
    /// vertices get the bisector of the adjacent edge normals.
    pub fn outward_normal(&self, x: Point, tol: f64) -> Result<Point> {
        let p = self.closest_boundary_point(x)?;
        let distance = norm(sub(x, p));
        if distance > tol {
            return Err(Error::NotOnBoundary {
                x: x[0],
                y: x[1],
                distance,
                tol,
            });
        }
        let normal = match &self.shape {
            Shape::Disk { center, .. } => normalize(sub(x, *center)),
            Shape::Ellipse { center, semi_axes } => {
                let q = sub(p, *center);
                normalize([
                    q[0] / (semi_axes[0] * semi_axes[0]),
                    q[1] / (semi_axes[1] * semi_axes[1]),
                ])
            }
            Shape::Polygon { vertices } => {
                let m = vertices.len();
                let edge_normal = |i: usize| {
                    let d = sub(vertices[(i + 1) % m], vertices[i]);
                    normalize([d[1], -d[0]]).expect("non-degenerate edge")
                };
                if let Some(v) = (0..m).find(|&v| norm(sub(x, vertices[v])) <= tol) {
                    let a = edge_normal((v + m - 1) % m);
                    let b = edge_normal(v);
                    normalize([a[0] + b[0], a[1] + b[1]])
                } else {
                    Some(edge_normal(closest_on_polygon(vertices, x).1))
                }
            }
            Shape::RasterMask(_) => None,
        };
        normal.ok_or_else(|| invalid("x", "normal is undefined at this point"))
    }

    /// Supporting value `max_{y in K} y.e`.
    pub fn support(&self, e: Point) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => dot(*center, e) + radius * norm(e),
            Shape::Ellipse { center, semi_axes } => {
                dot(*center, e) + (semi_axes[0] * e[0]).hypot(semi_axes[1] * e[1])
            }
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|v| dot(*v, e))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::RasterMask(m) => {
                let half = m.h() / 2.0;
                m.set_centers()
                    .into_iter()
                    .map(|c| dot(c, e) + half * (e[0].abs() + e[1].abs()))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Half-space through `x0` whose complement contains `K`, oriented along
    /// the direction from the projection of `x0` onto `K` to `x0`.
    pub fn separating_halfspace(&self, x0: Point) -> Result<HalfSpace> {
        if !self.declared_convex {
            return Err(Error::Hypothesis(
                "separating half-spaces require a convex obstacle".into(),
            ));
        }
        if self.contains(x0) {
            return Err(Error::PointInsideObstacle { x: x0[0], y: x0[1] });
        }
        let p = match &self.shape {
            Shape::RasterMask(m) => {
                let hull = convex_hull(&m.set_centers());
                if hull.is_empty() {
                    return Err(invalid("obstacle", "raster mask is empty"));
                }
                if hull_contains(&hull, x0) {
                    return Err(Error::PointInsideObstacle { x: x0[0], y: x0[1] });
                }
                closest_on_chain(&hull, x0)
            }
            _ => self.closest_boundary_point(x0)?,
        };
        let e = normalize(sub(x0, p)).ok_or(Error::PointInsideObstacle { x: x0[0], y: x0[1] })?;
        Ok(HalfSpace {
            e,
            offset: dot(x0, e),
        })
    }

    /// Exact for analytic shapes; a raster is convex when it equals the
    /// rasterization of the convex hull of its cell centers.
    pub fn is_convex(&self) -> bool {
        match &self.shape {
            Shape::Disk { .. } | Shape::Ellipse { .. } => true,
            Shape::Polygon { vertices } => {
                let m = vertices.len();
                let scale = vertices
                    .iter()
                    .flatten()
                    .fold(1.0f64, |a, c| a.max(c.abs()));
                (0..m).all(|i| {
                    cross(vertices[i], vertices[(i + 1) % m], vertices[(i + 2) % m])
                        >= -1e-12 * scale * scale
                })
            }
            Shape::RasterMask(m) => {
                let centers = m.set_centers();
                if centers.is_empty() {
                    return true;
                }
                let hull = convex_hull(&centers);
                (0..m.cells.len()).all(|k| hull_contains(&hull, m.center(k)) == m.cells[k])
            }
        }
    }

    /// Cells of `grid` whose centers lie in `K`.
    pub fn rasterize(&self, grid: &Grid2D) -> Result<Vec<bool>> {
        let (lo, hi) = self.bounding_box();
        let l = grid.halfwidth();
        let empty = matches!(self.shape, Shape::RasterMask(ref m) if !m.cells.iter().any(|&c| c));
        if !empty && (lo[0] < -l || lo[1] < -l || hi[0] > l || hi[1] > l) {
            return Err(Error::ObstacleOutsideGrid);
        }
        Ok((0..grid.cell_count())
            .map(|k| self.contains(grid.center(k)))
            .collect())
    }
}

/// Free-function form of [`Obstacle::contains`].
pub fn contains(obstacle: &Obstacle, x: Point) -> bool {
    obstacle.contains(x)
}

/// Free-function form of [`Obstacle::outward_normal`].
pub fn outward_normal(obstacle: &Obstacle, x: Point, tol: f64) -> Result<Point> {
    obstacle.outward_normal(x, tol)
}

/// Free-function form of [`Obstacle::separating_halfspace`].
pub fn separating_halfspace(obstacle: &Obstacle, x0: Point) -> Result<HalfSpace> {
    obstacle.separating_halfspace(x0)
}

/// Free-function form of [`Obstacle::is_convex`].
pub fn is_convex(obstacle: &Obstacle) -> bool {
    obstacle.is_convex()
}

/// Free-function form of [`Obstacle::rasterize`].
pub fn rasterize(obstacle: &Obstacle, grid: &Grid2D) -> Result<Vec<bool>> {
    obstacle.rasterize(grid)
}

fn segment_closest(a: Point, b: Point, x: Point) -> Point {
    let d = sub(b, a);
    let len2 = dot(d, d);
    if len2 == 0.0 {
        return a;
    }
    let t = (dot(sub(x, a), d) / len2).clamp(0.0, 1.0);
    [a[0] + t * d[0], a[1] + t * d[1]]
}

/// Closest boundary point of a closed polygon and the index of its edge.
fn closest_on_polygon(vertices: &[Point], x: Point) -> (Point, usize) {
    let m = vertices.len();
    let mut best = (vertices[0], 0, f64::INFINITY);
    for i in 0..m {
        let p = segment_closest(vertices[i], vertices[(i + 1) % m], x);
        let d = norm(sub(x, p));
        if d < best.2 {
            best = (p, i, d);
        }
    }
    (best.0, best.1)
}

/// Closest point on a hull given as a CCW chain (possibly 1 or 2 points).
fn closest_on_chain(hull: &[Point], x: Point) -> Point {
    match hull.len() {
        1 => hull[0],
        2 => segment_closest(hull[0], hull[1], x),
        _ => closest_on_polygon(hull, x).0,
    }
}

fn polygon_contains(vertices: &[Point], x: Point) -> bool {
    let (p, _) = closest_on_polygon(vertices, x);
    if norm(sub(x, p)) <= 1e-12 {
        return true;
    }
    // Nonzero winding number.
    let m = vertices.len();
    let mut winding = 0i32;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        if a[1] <= x[1] {
            if b[1] > x[1] && cross(a, b, x) > 0.0 {
                winding += 1;
            }
        } else if b[1] <= x[1] && cross(a, b, x) < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

fn hull_contains(hull: &[Point], x: Point) -> bool {
    const EPS: f64 = 1e-9;
    match hull.len() {
        0 => false,
        1 => norm(sub(x, hull[0])) <= EPS,
        2 => norm(sub(x, segment_closest(hull[0], hull[1], x))) <= EPS,
        m => (0..m).all(|i| cross(hull[i], hull[(i + 1) % m], x) >= -EPS),
    }
}

/// Andrew's monotone chain; counterclockwise, without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Closest point on the ellipse `(x/a)^2 + (y/b)^2 = 1` to `y`, following
/// Eberly's bisection formulation.
fn closest_on_ellipse(a: f64, b: f64, y: Point) -> Point {
    let swap = a < b;
    let (e0, e1) = if swap { (b, a) } else { (a, b) };
    let (y0, y1) = if swap { (y[1], y[0]) } else { (y[0], y[1]) };
    let (s0, s1) = (y0.signum(), y1.signum());
    let (x0, x1) = closest_first_quadrant(e0, e1, y0.abs(), y1.abs());
    let (x0, x1) = (x0 * s0, x1 * s1);
    if swap {
        [x1, x0]
    } else {
        [x0, x1]
    }
}

fn closest_first_quadrant(e0: f64, e1: f64, y0: f64, y1: f64) -> (f64, f64) {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1) * (e0 / e1);
                let sbar = ellipse_root(r0, z0, z1, g);
                (r0 * y0 / (sbar + r0), y1 / (sbar + 1.0))
            } else {
                (y0, y1)
            }
        } else {
            (0.0, e1)
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            (e0 * xde0, e1 * (1.0 - xde0 * xde0).max(0.0).sqrt())
        } else {
            (e0, 0.0)
        }
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_centered() -> Obstacle {
        Obstacle::polygon(vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]).unwrap()
    }

    #[test]
    fn disk_membership() {
        let d = Obstacle::disk([0.0, 0.0], 1.0).unwrap();
        assert!(d.contains([0.0, 0.0]));
        assert!(!d.contains([2.0, 0.0]));
        assert!(d.contains([1.0, 0.0]));
    }

    #[test]
    fn polygon_membership_matches_winding() {
        let sq = Obstacle::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(sq.contains([0.5, 0.5]));
        assert!(!sq.contains([1.5, 0.5]));
        assert!(sq.contains([1.0, 0.5]));
        // Clockwise input is reoriented.
        let cw = Obstacle::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(cw.declared_convex());
    }

    #[test]
    fn normals() {
        let d = Obstacle::disk([0.0, 0.0], 1.0).unwrap();
        let n = d.outward_normal([1.0, 0.0], ANALYTIC_BOUNDARY_TOL).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        assert!(matches!(
            d.outward_normal([5.0, 5.0], ANALYTIC_BOUNDARY_TOL),
            Err(Error::NotOnBoundary { .. })
        ));

        let e = Obstacle::ellipse([0.0, 0.0], [2.0, 1.0]).unwrap();
        let n = e.outward_normal([2.0, 0.0], ANALYTIC_BOUNDARY_TOL).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-12 && n[1].abs() < 1e-12);
        // Generic ellipse point: normal is the normalized gradient (x/a^2, y/b^2).
        let t: f64 = 0.7;
        let p = [2.0 * t.cos(), t.sin()];
        let n = e.outward_normal(p, ANALYTIC_BOUNDARY_TOL).unwrap();
        let g = [p[0] / 4.0, p[1]];
        let gn = g[0].hypot(g[1]);
        assert!((n[0] - g[0] / gn).abs() < 1e-9 && (n[1] - g[1] / gn).abs() < 1e-9);

        let sq = unit_square_centered();
        let n = sq
            .outward_normal([0.5, 0.5], ANALYTIC_BOUNDARY_TOL)
            .unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n[0] - r).abs() < 1e-12 && (n[1] - r).abs() < 1e-12);
        let n = sq
            .outward_normal([0.1, 0.5], ANALYTIC_BOUNDARY_TOL)
            .unwrap();
        assert!(n[0].abs() < 1e-12 && (n[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_normals_are_radial_everywhere() {
        let d = Obstacle::disk([0.3, -0.2], 1.5).unwrap();
        for k in 0..360 {
            let t = (k as f64).to_radians();
            let p = [0.3 + 1.5 * t.cos(), -0.2 + 1.5 * t.sin()];
            let n = d.outward_normal(p, ANALYTIC_BOUNDARY_TOL).unwrap();
            assert!((n[0] - t.cos()).abs() < 1e-12 && (n[1] - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn separating_halfspaces() {
        let d = Obstacle::disk([0.0, 0.0], 1.0).unwrap();
        let h = d.separating_halfspace([3.0, 0.0]).unwrap();
        assert!((h.e[0] - 1.0).abs() < 1e-15 && h.e[1].abs() < 1e-15);
        assert!((h.offset - 3.0).abs() < 1e-15);
        assert!(matches!(
            d.separating_halfspace([0.0, 0.0]),
            Err(Error::PointInsideObstacle { .. })
        ));

        let sq = unit_square_centered();
        let h = sq.separating_halfspace([0.0, 2.0]).unwrap();
        assert!(h.e[0].abs() < 1e-15 && (h.e[1] - 1.0).abs() < 1e-15);

        let l = Obstacle::polygon(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        assert!(matches!(
            l.separating_halfspace([3.0, 3.0]),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn convexity() {
        assert!(Obstacle::disk([0.0, 0.0], 1.0).unwrap().is_convex());
        let reflex = Obstacle::polygon(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 2.0],
            [1.0, 0.5],
            [0.0, 2.0],
        ])
        .unwrap();
        assert!(!reflex.is_convex());
        assert!(!reflex.declared_convex());

        let n = 8;
        let mut cells = vec![false; n * n];
        for iy in 1..6 {
            for ix in 1..6 {
                if ix < 3 || iy < 3 {
                    cells[iy * n + ix] = true;
                }
            }
        }
        let l_shape = Obstacle::raster(RasterMask::new(4.0, n, cells).unwrap());
        assert!(!l_shape.is_convex());

        let mut block = vec![false; n * n];
        for iy in 2..5 {
            for ix in 3..6 {
                block[iy * n + ix] = true;
            }
        }
        let block = Obstacle::raster(RasterMask::new(4.0, n, block).unwrap());
        assert!(!block.declared_convex());
        assert!(block.is_convex());
        assert!(block.certify_convex().declared_convex());
    }

    #[test]
    fn rasterized_disk_area() {
        let grid = Grid2D::new(2.0, 40).unwrap();
        let mask = Obstacle::disk([0.0, 0.0], 1.0)
            .unwrap()
            .rasterize(&grid)
            .unwrap();
        let count = mask.iter().filter(|&&m| m).count() as f64;
        let expected = std::f64::consts::PI * 100.0;
        assert!((count - expected).abs() <= 0.05 * expected, "{count}");

        let empty = Obstacle::disk([0.0, 0.0], 0.0)
            .unwrap()
            .rasterize(&grid)
            .unwrap();
        assert!(empty.iter().all(|&m| !m));

        let outside = Obstacle::disk([5.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            outside.rasterize(&grid),
            Err(Error::ObstacleOutsideGrid)
        ));
    }

    #[test]
    fn hull_of_square_points() {
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.5],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.0],
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
    }
}
