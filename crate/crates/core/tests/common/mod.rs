#![allow(dead_code)]

use num_complex::Complex64;
use phaseplug::geometry::Point2;
use phaseplug::helmholtz::PhysicsParams;
use phaseplug::levelset::Wall;
use phaseplug::mesh::{structured_union, BenchmarkGeometry, Block, FacetSpec, FacetTag, Mesh, Region};
use phaseplug::optimizer::ShapeProblem;

pub const MM: f64 = 1e-3;

/// A scaled-down benchmark that meshes in milliseconds.
pub fn small_geometry() -> BenchmarkGeometry {
    BenchmarkGeometry {
        chamber_length: 12.0 * MM,
        chamber_depth: 2.0 * MM,
        waveguide_radius: 6.0 * MM,
        waveguide_length: 10.0 * MM,
        plug_length: 8.0 * MM,
        design_height: 12.0 * MM,
        slit_start: 0.0,
        slit_end: 5.0 * MM,
    }
}

pub fn small_wall() -> Wall {
    Wall { start: Point2::new(2.0 * MM, 5.13 * MM), end: Point2::new(10.0 * MM, 6.17 * MM) }
}

pub fn small_problem(losses: bool) -> ShapeProblem {
    let physics = PhysicsParams { losses, ..PhysicsParams::air() };
    ShapeProblem::benchmark(&small_geometry(), &[small_wall()], 1.4 * MM, physics, 1e-2).unwrap()
}

/// Straight duct `[0, length] x [0, width]`: diaphragm at `x = 0`, outlet at `x = length`,
/// lossless walls elsewhere.
pub fn duct_mesh(length: f64, width: f64, h: f64) -> Mesh {
    let block = Block { x0: 0.0, x1: length, y0: 0.0, y1: width, region: Region::FixedAir };
    structured_union(&[block], h / std::f64::consts::SQRT_2, |ctx| {
        if ctx.regions.1.is_some() {
            FacetSpec::INTERIOR
        } else if ctx.midpoint.x.abs() < 1e-12 {
            FacetSpec::wall(FacetTag::Diaphragm, false)
        } else if (ctx.midpoint.x - length).abs() < 1e-12 {
            FacetSpec::wall(FacetTag::Outlet, false)
        } else {
            FacetSpec::wall(FacetTag::FixedWall, false)
        }
    })
    .unwrap()
}

/// Gaussian elimination with partial pivoting on a dense row-major copy.
pub fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

pub fn dense_solve_real(a: Vec<Vec<f64>>, b: Vec<f64>) -> Vec<f64> {
    let a = a.into_iter().map(|r| r.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).collect();
    let b = b.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    dense_solve(a, b).into_iter().map(|v| v.re).collect()
}
