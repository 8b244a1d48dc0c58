//! Planar points and the small amount of polygon geometry the cut-cell code needs.
//!
//! Everything here is generic over the real scalar so the same routines serve
//! `f32` previews and the `f64` production path.

use num_traits::Float;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Float> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self.scale(T::one() / n))
        } else {
            None
        }
    }

    /// Counterclockwise rotation by a right angle.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Self, t: T) -> Self {
        self + (other - self).scale(t)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Float> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Float> AddAssign for Point2<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Float> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Float> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Float> Neg for Point2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Signed area of a triangle, positive when `a, b, c` run counterclockwise.
pub fn signed_area<T: Float>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b - a).cross(c - a) / (T::one() + T::one())
}

/// Shoelace area of a simple polygon given in counterclockwise order.
pub fn polygon_area<T: Float>(poly: &[Point2<T>]) -> T {
    let n = poly.len();
    let mut twice = T::zero();
    for i in 0..n {
        twice = twice + poly[i].cross(poly[(i + 1) % n]);
    }
    twice / (T::one() + T::one())
}

pub fn polygon_centroid<T: Float>(poly: &[Point2<T>]) -> Point2<T> {
    let n = T::from(poly.len()).unwrap();
    let sum = poly.iter().fold(Point2::zero(), |acc, &p| acc + p);
    sum.scale(T::one() / n)
}

/// Parameter along `v0 -> v1` where the linear interpolant of the two values vanishes.
pub fn zero_crossing<T: Float>(v0: T, v1: T) -> T {
    v0 / (v0 - v1)
}

/// Longest edge of a triangle.
pub fn triangle_diameter<T: Float>(p: [Point2<T>; 3]) -> T {
    p[0].distance(p[1]).max(p[1].distance(p[2])).max(p[2].distance(p[0]))
}

/// Barycentric coordinates of `x` with respect to triangle `p`.
pub fn barycentric<T: Float>(p: [Point2<T>; 3], x: Point2<T>) -> [T; 3] {
    let area = signed_area(p[0], p[1], p[2]);
    let l0 = signed_area(x, p[1], p[2]) / area;
    let l1 = signed_area(p[0], x, p[2]) / area;
    [l0, l1, T::one() - l0 - l1]
}

/// Gradients of the three barycentric coordinates (constant over the triangle).
pub fn barycentric_gradients<T: Float>(p: [Point2<T>; 3]) -> [Point2<T>; 3] {
    let two_area = (p[1] - p[0]).cross(p[2] - p[0]);
    let g = |a: Point2<T>, b: Point2<T>| {
        // gradient of the coordinate that vanishes on edge a-b
        let e = b - a;
        Point2::new(-e.y, e.x).scale(T::one() / two_area)
    };
    [g(p[1], p[2]), g(p[2], p[0]), g(p[0], p[1])]
}

/// Sub-triangles of a convex polygon fanned from its vertex centroid.
pub fn fan_triangulate<T: Float>(poly: &[Point2<T>]) -> Vec<[Point2<T>; 3]> {
    if poly.len() == 3 {
        return vec![[poly[0], poly[1], poly[2]]];
    }
    let c = polygon_centroid(poly);
    (0..poly.len()).map(|i| [c, poly[i], poly[(i + 1) % poly.len()]]).collect()
}
