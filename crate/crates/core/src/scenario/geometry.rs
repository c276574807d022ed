//! Planar shapes, separating-axis intersection and route polylines.
//!
//! All intersection tests are closed: touching shapes intersect.

use nalgebra::{Rotation2, Vector2};

use crate::io::ObstacleSpec;

pub type Vec2 = Vector2<f64>;

pub fn v2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

pub fn rotate(v: Vec2, angle: f64) -> Vec2 {
    Rotation2::new(angle) * v
}

/// Oriented rectangle; `half` holds half-length (along heading) and half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obb {
    pub center: Vec2,
    pub half: Vec2,
    pub yaw: f64,
}

impl Obb {
    pub fn new(center: Vec2, length: f64, width: f64, yaw: f64) -> Self {
        Obb { center, half: Vec2::new(length / 2.0, width / 2.0), yaw }
    }

    pub fn from_obstacle(o: &ObstacleSpec) -> Self {
        Obb::new(v2(o.center), o.length, o.width, o.yaw)
    }

    pub fn axes(&self) -> [Vec2; 2] {
        let (s, c) = self.yaw.sin_cos();
        [Vec2::new(c, s), Vec2::new(-s, c)]
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let [u, v] = self.axes();
        let (a, b) = (u * self.half.x, v * self.half.y);
        [self.center + a + b, self.center - a + b, self.center - a - b, self.center + a - b]
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        let [u, v] = self.axes();
        let d = p - self.center;
        d.dot(&u).abs() <= self.half.x + tol && d.dot(&v).abs() <= self.half.y + tol
    }

    fn radius_along(&self, n: &Vec2) -> f64 {
        let [u, v] = self.axes();
        self.half.x * u.dot(n).abs() + self.half.y * v.dot(n).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Box(Obb),
    Circle(Circle),
}

pub fn obb_obb(a: &Obb, b: &Obb) -> bool {
    let d = b.center - a.center;
    a.axes()
        .into_iter()
        .chain(b.axes())
        .all(|n| d.dot(&n).abs() <= a.radius_along(&n) + b.radius_along(&n))
}

pub fn obb_circle(b: &Obb, c: &Circle) -> bool {
    let [u, v] = b.axes();
    let d = c.center - b.center;
    let (lx, ly) = (d.dot(&u), d.dot(&v));
    let dx = lx - lx.clamp(-b.half.x, b.half.x);
    let dy = ly - ly.clamp(-b.half.y, b.half.y);
    dx * dx + dy * dy <= c.radius * c.radius
}

pub fn circle_circle(a: &Circle, b: &Circle) -> bool {
    (a.center - b.center).norm() <= a.radius + b.radius
}

pub fn shapes_intersect(a: &Shape, b: &Shape) -> bool {
    match (a, b) {
        (Shape::Box(x), Shape::Box(y)) => obb_obb(x, y),
        (Shape::Box(x), Shape::Circle(c)) | (Shape::Circle(c), Shape::Box(x)) => obb_circle(x, c),
        (Shape::Circle(x), Shape::Circle(y)) => circle_circle(x, y),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticHit {
    /// Index into the sweep of the first colliding placement.
    pub step: usize,
    pub obstacle: String,
}

/// Earliest sweep placement touching any obstacle; ties go to the first obstacle listed.
pub fn static_collision_check(sweep: &[Shape], obstacles: &[(String, Obb)]) -> Option<StaticHit> {
    sweep.iter().enumerate().find_map(|(step, s)| {
        obstacles
            .iter()
            .find(|(_, o)| shapes_intersect(s, &Shape::Box(*o)))
            .map(|(id, _)| StaticHit { step, obstacle: id.clone() })
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    /// Arc length of the closest point.
    pub s: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
}

impl Polyline {
    /// Zero-length segments are dropped. Needs at least two distinct points.
    pub fn new(points: &[[f64; 2]]) -> Option<Self> {
        let mut pts: Vec<Vec2> = Vec::with_capacity(points.len());
        for p in points {
            let p = v2(*p);
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if pts.len() < 2 {
            return None;
        }
        let mut cumulative = vec![0.0];
        for w in pts.windows(2) {
            cumulative.push(cumulative.last().unwrap() + (w[1] - w[0]).norm());
        }
        Some(Polyline { points: pts, cumulative })
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn segment_at(&self, s: f64) -> usize {
        let i = self.cumulative.partition_point(|c| *c <= s);
        i.saturating_sub(1).min(self.points.len() - 2)
    }

    /// Position and heading at arc length `s`, clamped to the ends.
    pub fn pose_at(&self, s: f64) -> (Vec2, f64) {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_at(s);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let seg = b - a;
        let len = self.cumulative[i + 1] - self.cumulative[i];
        let pos = a + seg * ((s - self.cumulative[i]) / len);
        (pos, seg.y.atan2(seg.x))
    }

    pub fn project(&self, p: Vec2) -> Projection {
        let mut best = Projection { s: 0.0, distance: f64::INFINITY };
        for (i, w) in self.points.windows(2).enumerate() {
            let seg = w[1] - w[0];
            let len = self.cumulative[i + 1] - self.cumulative[i];
            let t = ((p - w[0]).dot(&seg) / (len * len)).clamp(0.0, 1.0);
            let d = (w[0] + seg * t - p).norm();
            if d < best.distance {
                best = Projection { s: self.cumulative[i] + t * len, distance: d };
            }
        }
        best
    }
}
