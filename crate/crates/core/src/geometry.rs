//! Integer planar geometry shared by the statements and the local computations.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn sq_dist(self, other: Point) -> u128 {
        let dx = (self.x - other.x).unsigned_abs() as u128;
        let dy = (self.y - other.y).unsigned_abs() as u128;
        dx * dx + dy * dy
    }
}

impl From<(i64, i64)> for Point {
    fn from((x, y): (i64, i64)) -> Self {
        Self { x, y }
    }
}

/// Circle with integer center and radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: i64,
}

impl Circle {
    pub const fn new(u: i64, v: i64, r: i64) -> Self {
        Self { center: Point::new(u, v), radius: r }
    }

    /// Non-strict: points on the circle count as inside.
    pub fn contains(&self, p: Point) -> bool {
        let r = self.radius as u128;
        p.sq_dist(self.center) <= r * r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triangle(pub [Point; 3]);

impl Triangle {
    pub fn new(a: impl Into<Point>, b: impl Into<Point>, c: impl Into<Point>) -> Self {
        Self([a.into(), b.into(), c.into()])
    }

    pub fn vertices(&self) -> &[Point; 3] {
        &self.0
    }

    /// Same triangle with vertices 2 and 3 swapped (orientation flipped).
    pub fn flipped(&self) -> Self {
        let [a, b, c] = self.0;
        Self([a, c, b])
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`, closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub const fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x0..=self.x1).contains(&p.x) && (self.y0..=self.y1).contains(&p.y)
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn area(&self) -> i128 {
        if self.is_empty() {
            0
        } else {
            (self.x1 - self.x0) as i128 * (self.y1 - self.y0) as i128
        }
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        }
    }
}
