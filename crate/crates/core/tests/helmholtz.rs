mod common;

use approx::assert_relative_eq;
use num_complex::Complex64;
use phaseplug::geometry::Point2;
use phaseplug::helmholtz::{
    frequency_sweep, ghost_faces, ghost_penalty_triplets, PhysicsParams, StateOperator, WentzellCoeffs,
};
use phaseplug::levelset::{classify_and_cut, CellClass, CutGeometry};
use phaseplug::mesh::{FacetSpec, FacetTag, Mesh, Region};
use phaseplug::p2::{cell_dofs, interpolate, n_dofs};
use phaseplug::sparse::{max_asymmetry, ComplexLuSymbolic, CscMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn sparse_lu_matches_dense_oracle() {
    let n = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut dense = vec![vec![c(0.0, 0.0); n]; n];
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || rng.gen_bool(0.15) {
                let mut v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if i == j {
                    v += c(n as f64 * 0.5, 1.0);
                }
                dense[i][j] += v;
                triplets.push((i, j, v));
            }
        }
    }
    let a = CscMatrix::from_triplets(n, &triplets);
    let b: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let lu = ComplexLuSymbolic::new(a.pattern.clone()).unwrap().factor(&a).unwrap();
    let x = lu.solve(&b);
    let oracle = common::dense_solve(dense, b);
    for i in 0..n {
        assert!((x[i] - oracle[i]).norm() < 1e-10 * oracle[i].norm().max(1.0));
    }
}

#[test]
fn identity_system() {
    let n = 4;
    let a = CscMatrix::from_triplets(n, &(0..n).map(|i| (i, i, c(1.0, 0.0))).collect::<Vec<_>>());
    let lu = ComplexLuSymbolic::new(a.pattern.clone()).unwrap().factor(&a).unwrap();
    let mut e1 = vec![c(0.0, 0.0); n];
    e1[0] = c(1.0, 0.0);
    assert_eq!(lu.solve(&e1), e1);
}

/// Two equilateral triangles of side `s` sharing the vertical edge on `x = 0`.
fn rhombus(s: f64) -> Mesh {
    let hgt = s * 3f64.sqrt() / 2.0;
    let pts = vec![Point2::new(0.0, 0.0), Point2::new(0.0, s), Point2::new(-hgt, s / 2.0), Point2::new(hgt, s / 2.0)];
    Mesh::new(pts, vec![([0, 1, 2], Region::FixedAir), ([0, 3, 1], Region::FixedAir)], |ctx| {
        if ctx.regions.1.is_some() {
            FacetSpec::INTERIOR
        } else {
            FacetSpec::wall(FacetTag::FixedWall, false)
        }
    })
    .unwrap()
}

fn quadratic_form(a: &CscMatrix<f64>, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let ax = a.matvec(x);
    ax.iter().zip(y).map(|(u, v)| u * v).sum()
}

#[test]
fn ghost_penalty_of_a_kink() {
    let s = 0.1;
    let mesh = rhombus(s);
    let shared = mesh.facets.iter().position(|f| !f.is_boundary()).unwrap();
    assert_relative_eq!(mesh.facet_length(shared), s, max_relative = 1e-14);
    assert_relative_eq!(mesh.cells[0].diameter, s, max_relative = 1e-14);
    // zero on the left, slope 2 across the shared edge on the right
    let p = interpolate(&mesh, |x| c(2.0 * x.x.max(0.0), 0.0));
    let s_h = CscMatrix::from_triplets(n_dofs(&mesh), &ghost_penalty_triplets(&mesh, &[shared]));
    let value = quadratic_form(&s_h, &p, &p);
    assert_relative_eq!(value.re, s.powi(3) * 4.0 * s, max_relative = 1e-12);
    assert!(value.im.abs() < 1e-18);
}

#[test]
fn ghost_penalty_vanishes_on_smooth_quadratics() {
    let problem = common::small_problem(true);
    let cut = problem.cut(&problem.design0).unwrap();
    let faces = ghost_faces(&problem.mesh, &cut);
    assert!(!faces.is_empty());
    let s_h = CscMatrix::from_triplets(n_dofs(&problem.mesh), &ghost_penalty_triplets(&problem.mesh, &faces));
    let p = interpolate(&problem.mesh, |x| c(3.0 * x.x * x.x - 2.0 * x.x * x.y + x.y, 0.5 * x.y * x.y));
    let sp = s_h.matvec(&p);
    let scale = s_h.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) * p.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    assert!(sp.iter().all(|v| v.norm() < 1e-12 * scale));
}

fn all_fluid(problem: &phaseplug::optimizer::ShapeProblem) -> CutGeometry {
    let (design, dirichlet) = problem.space.design_for_target(&problem.mesh, |_| -1.0);
    let phi = problem.space.solve_poisson(&design, &dirichlet).unwrap();
    classify_and_cut(&problem.mesh, &problem.space, &phi).unwrap()
}

#[test]
fn uncut_domain_has_no_ghost_penalty() {
    let problem = common::small_problem(false);
    let cut = all_fluid(&problem);
    assert!(cut.class.iter().all(|&k| k == CellClass::Inside));
    assert!(ghost_faces(&problem.mesh, &cut).is_empty());
    let op = StateOperator::assemble(&problem.mesh, &cut, &problem.physics).unwrap();
    assert!(!op.has_ghost_penalty());
    let coeffs = WentzellCoeffs::new(&problem.physics, 6000.0);
    assert_eq!(op.matrix(&coeffs, 0.0).values, op.matrix(&coeffs, 1e-2).values);
    assert!(op.active.iter().all(|&a| a));
}

#[test]
fn assembled_matrix_is_complex_symmetric() {
    for losses in [false, true] {
        let problem = common::small_problem(losses);
        let cut = problem.cut(&problem.design0).unwrap();
        let op = problem.operator(&cut).unwrap();
        let a = op.matrix(&WentzellCoeffs::new(&problem.physics, 9000.0), 1e-2);
        assert_eq!(max_asymmetry(&a), 0.0);
    }
}

#[test]
fn lossless_matrix_equals_zero_thickness_matrix() {
    let problem = common::small_problem(false);
    let cut = problem.cut(&problem.design0).unwrap();
    let op = problem.operator(&cut).unwrap();
    let f = 8000.0;
    let off = WentzellCoeffs::new(&problem.physics, f);
    let zero = WentzellCoeffs::from_thicknesses(off.k, 0.0, 0.0, problem.physics.gamma);
    assert_eq!(op.matrix(&off, 1e-2).values, op.matrix(&zero, 1e-2).values);
    let lossy = WentzellCoeffs::new(&PhysicsParams::air(), f);
    assert_ne!(op.matrix(&lossy, 1e-2).values, op.matrix(&zero, 1e-2).values);
}

#[test]
fn outlet_mean_of_constant_and_linear_traces() {
    let problem = common::small_problem(false);
    let cut = problem.cut(&problem.design0).unwrap();
    let op = problem.operator(&cut).unwrap();
    let field = |values: Vec<Complex64>| phaseplug::helmholtz::AcousticField { values, k: 1.0 };
    let constant = field(vec![c(2.5, -1.0); n_dofs(&problem.mesh)]);
    let p = op.outlet_pressure(&constant);
    assert!((p - c(2.5, -1.0)).norm() < 1e-14);
    let r = problem.mesh.points.iter().map(|q| q.y).fold(0.0, f64::max);
    let r_wg = common::small_geometry().waveguide_radius;
    assert!(r > r_wg);
    let linear = field(interpolate(&problem.mesh, |x| c(1.0 + 4.0 * x.y / r_wg, 0.0)));
    assert_relative_eq!(op.outlet_pressure(&linear).re, 3.0, max_relative = 1e-13);
}

#[test]
fn outlet_functional_has_simpson_weights() {
    let problem = common::small_problem(false);
    let mesh = &problem.mesh;
    let op = StateOperator::assemble(mesh, &CutGeometry::uncut(mesh), &problem.physics).unwrap();
    let total = op.outlet_length();
    let r = op.outlet_functional();
    let nv = mesh.n_vertices();
    for e in mesh.facets_with_tag(FacetTag::Outlet) {
        assert_relative_eq!(r[nv + e], 4.0 / 6.0 * mesh.facet_length(e) / total, max_relative = 1e-13);
    }
    let sum: f64 = r.iter().sum();
    assert_relative_eq!(sum, 1.0, max_relative = 1e-13);
}

#[test]
fn solve_residual_and_inactive_dofs() {
    let problem = common::small_problem(true);
    let cut = problem.cut(&problem.design0).unwrap();
    let op = problem.operator(&cut).unwrap();
    assert!(op.active.iter().any(|&a| !a));
    let sol = op.solve(&problem.physics, 7000.0, problem.eps_s).unwrap();
    let res = phaseplug::helmholtz::relative_residual(&sol.matrix, &sol.field.values, &op.rhs());
    assert!(res < 1e-10);
    for (d, &a) in op.active.iter().enumerate() {
        if !a {
            assert_eq!(sol.field.values[d], c(0.0, 0.0));
        }
    }
    // a cell outside the fluid touches only inactive DOFs that no active cell shares
    let outside = (0..problem.mesh.cells.len()).find(|&k| cut.class[k] == CellClass::Outside).unwrap();
    let shared: Vec<usize> = cell_dofs(&problem.mesh, outside).into_iter().filter(|&d| op.active[d]).collect();
    for d in shared {
        assert!((0..problem.mesh.cells.len()).any(|k| cut.is_active(k) && cell_dofs(&problem.mesh, k).contains(&d)));
    }
}

#[test]
fn power_balance_and_loss() {
    for losses in [false, true] {
        let problem = common::small_problem(losses);
        let cut = problem.cut(&problem.design0).unwrap();
        let op = problem.operator(&cut).unwrap();
        for f in [4000.0, 9000.0, 14000.0] {
            let sol = op.solve(&problem.physics, f, problem.eps_s).unwrap();
            assert!(op.power_balance_residual(&sol.field, &sol.coeffs) < 1e-10);
            let (out, input) = (op.radiated_power(&sol.field), op.input_power(&sol.field));
            if losses {
                assert!(out < input);
            } else {
                assert_relative_eq!(out, input, max_relative = 1e-10);
            }
        }
    }
}

#[test]
fn single_frequency_sweep_matches_direct_solve() {
    let problem = common::small_problem(true);
    let cut = problem.cut(&problem.design0).unwrap();
    let op = problem.operator(&cut).unwrap();
    let sweep = frequency_sweep(&op, &problem.physics, &problem.lumped, &[5000.0], problem.eps_s).unwrap();
    assert_eq!(sweep.points.len(), 1);
    let sol = op.solve(&problem.physics, 5000.0, problem.eps_s).unwrap();
    assert_eq!(sweep.points[0].p_out, op.outlet_pressure(&sol.field));
    assert!(frequency_sweep(&op, &problem.physics, &problem.lumped, &[5000.0, 4000.0], 0.0).is_err());
}

#[test]
fn reciprocity_of_state_and_adjoint() {
    let problem = common::small_problem(true);
    let cut = problem.cut(&problem.design0).unwrap();
    let op = problem.operator(&cut).unwrap();
    for f in [4500.0, 11000.0] {
        let sol = op.solve(&problem.physics, f, problem.eps_s).unwrap();
        let z = phaseplug::shape_gradient::solve_adjoint(&op, &sol).unwrap();
        let lz: Complex64 = op.rhs().iter().zip(&z.values).map(|(b, v)| b * v).sum();
        let p_out = op.outlet_pressure(&sol.field);
        assert!((lz - p_out).norm() < 1e-10 * p_out.norm());
    }
}

#[test]
fn pattern_is_shared_across_frequencies() {
    let problem = common::small_problem(true);
    let cut = problem.cut(&problem.design0).unwrap();
    let op = problem.operator(&cut).unwrap();
    let a = op.matrix(&WentzellCoeffs::new(&problem.physics, 4000.0), 1e-2);
    let b = op.matrix(&WentzellCoeffs::new(&problem.physics, 12000.0), 1e-2);
    assert!(Arc::ptr_eq(&a.pattern, &b.pattern));
}
