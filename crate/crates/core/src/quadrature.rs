//! Fixed quadrature rules: a degree-4 rule on triangles and 3-point Gauss on segments.

use crate::geometry::{signed_area, Point2};
use num_traits::Float;

/// 6-point symmetric rule, exact for polynomials of total degree 4.
/// Entries are (barycentric coordinates, weight relative to the triangle area).
const TRIANGLE_DEG4: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_964_886_32;
    const WA: f64 = 0.223_381_589_678_011_465_70;
    const B: f64 = 0.091_576_213_509_770_743_46;
    const WB: f64 = 0.109_951_743_655_321_867_64;
    [
        ([1.0 - 2.0 * A, A, A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([A, A, 1.0 - 2.0 * A], WA),
        ([1.0 - 2.0 * B, B, B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([B, B, 1.0 - 2.0 * B], WB),
    ]
};

/// Gauss-Legendre nodes on [0, 1] with weights summing to one.
const SEGMENT_GAUSS3: [(f64, f64); 3] =
    [(0.112_701_665_379_258_311_48, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.887_298_334_620_741_688_52, 5.0 / 18.0)];

/// Quadrature points and absolute weights on a triangle.
pub fn triangle_points<T: Float>(tri: [Point2<T>; 3]) -> [(Point2<T>, T); 6] {
    let area = signed_area(tri[0], tri[1], tri[2]).abs();
    TRIANGLE_DEG4.map(|(l, w)| {
        let l = l.map(|v| T::from(v).unwrap());
        let x = tri[0].scale(l[0]) + tri[1].scale(l[1]) + tri[2].scale(l[2]);
        (x, area * T::from(w).unwrap())
    })
}

/// Quadrature points and absolute weights on the segment `a -> b`.
pub fn segment_points<T: Float>(a: Point2<T>, b: Point2<T>) -> [(Point2<T>, T); 3] {
    let len = a.distance(b);
    SEGMENT_GAUSS3.map(|(s, w)| (a.lerp(b, T::from(s).unwrap()), len * T::from(w).unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // exact integral of x^a y^b over the unit right triangle: a! b! / (a + b + 2)!
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn triangle_rule_exact_through_degree_four() {
        let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        for a in 0..=4 {
            for b in 0..=(4 - a) {
                let q: f64 =
                    triangle_points(tri).iter().map(|(x, w)| w * x.x.powi(a as i32) * x.y.powi(b as i32)).sum();
                assert_relative_eq!(q, monomial_exact(a, b), epsilon = 1e-15, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn segment_rule_exact_through_degree_five() {
        let a = Point2::new(1.0, 2.0);
        let b = Point2::new(4.0, 6.0);
        for p in 0..=5 {
            let q: f64 = segment_points(a, b).iter().map(|(x, w)| w * ((x.x - 1.0) / 3.0).powi(p)).sum();
            assert_relative_eq!(q, 5.0 / f64::from(p + 1), max_relative = 1e-14);
        }
    }

    #[test]
    fn single_precision_rule_integrates_area() {
        let tri = [Point2::new(0.0f32, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 1.0)];
        let s: f32 = triangle_points(tri).iter().map(|(_, w)| *w).sum();
        assert_relative_eq!(s, 1.0, epsilon = 1e-6);
    }
}
