mod common;

use approx::assert_relative_eq;
use num_complex::Complex64;
use phaseplug::geometry::Point2;
use phaseplug::helmholtz::{AcousticField, WentzellCoeffs};
use phaseplug::levelset::{classify_and_cut, IncidentKind};
use phaseplug::optimizer::{FrequencyGrid, ObjectiveKind, ObjectiveSpec};
use phaseplug::p2::{interpolate, CVec2};
use phaseplug::shape_gradient::{assemble_dj_terms, psi, solve_adjoint, AdjointField};
use std::collections::HashSet;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn wall_integrand_examples() {
    let coeffs = WentzellCoeffs::from_thicknesses(10.0, 2e-4, 3e-4, 1.4);
    let n = Point2::new(0.0, 1.0);
    let gq = CVec2 { x: c(1.0, 2.0), y: c(-3.0, 0.5) };
    let gp = CVec2 { x: c(0.5, -1.0), y: c(4.0, 4.0) };
    let (q, p) = (c(2.0, 1.0), c(-1.0, 0.25));
    // only the x components are tangential to a horizontal wall
    let expected = coeffs.alpha_t * q * p + coeffs.alpha_v * gq.x * gp.x;
    assert!((psi(q, p, gq, gp, n, &coeffs) - expected).norm() < 1e-15 * expected.norm());

    let lossless = WentzellCoeffs::from_thicknesses(10.0, 0.0, 0.0, 1.4);
    assert_eq!(psi(q, p, gq, gp, n, &lossless), c(0.0, 0.0));

    // rotation invariance of the tangential part
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rot = |v: CVec2| CVec2 { x: r * (v.x - v.y), y: r * (v.x + v.y) };
    let rn = Point2::new(-r, r);
    let rotated = psi(q, p, rot(gq), rot(gp), rn, &coeffs);
    assert!((rotated - expected).norm() < 1e-14 * expected.norm());
}

fn state_and_adjoint(
    losses: bool,
    f: f64,
) -> (phaseplug::optimizer::ShapeProblem, phaseplug::levelset::CutGeometry, AcousticField, AdjointField, WentzellCoeffs)
{
    let problem = common::small_problem(losses);
    let cut = problem.cut(&problem.design0).unwrap();
    let op = problem.operator(&cut).unwrap();
    let sol = op.solve(&problem.physics, f, problem.eps_s).unwrap();
    let z = solve_adjoint(&op, &sol).unwrap();
    (problem, cut, sol.field, z, sol.coeffs)
}

#[test]
fn lossless_walls_leave_only_the_volume_term() {
    let (problem, cut, p, z, coeffs) = state_and_adjoint(false, 8000.0);
    assert!(coeffs.lossless());
    let terms = assemble_dj_terms(&problem.mesh, &problem.space, &cut, &p, &z, &coeffs).unwrap();
    let zero = c(0.0, 0.0);
    assert!(terms.tangential.iter().chain(&terms.normal).chain(&terms.jump).all(|&v| v == zero));
    assert!(terms.volume.iter().any(|v| v.norm() > 0.0));
}

#[test]
fn derivative_is_supported_on_the_cut() {
    let (problem, cut, p, z, coeffs) = state_and_adjoint(true, 8000.0);
    let terms = assemble_dj_terms(&problem.mesh, &problem.space, &cut, &p, &z, &coeffs).unwrap();
    let mut touched = HashSet::new();
    for cc in &cut.cut_cells {
        touched.extend(problem.mesh.cells[cc.cell].vertices);
    }
    for cp in &cut.cut_points {
        touched.extend(problem.mesh.facets[cp.edge].vertices);
    }
    let total = terms.total();
    let mut nonzero = 0;
    for (l, &v) in problem.space.vertices.iter().enumerate() {
        if touched.contains(&v) {
            nonzero += usize::from(total[l].norm() > 0.0);
        } else {
            assert_eq!(total[l], c(0.0, 0.0));
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn straight_cut_jumps_cancel_for_smooth_fields() {
    let problem = common::small_problem(true);
    let y0 = 7.31 * common::MM;
    let (design, dirichlet) = problem.space.design_for_target(&problem.mesh, |x| x.y - y0);
    let phi = problem.space.solve_poisson(&design, &dirichlet).unwrap();
    let cut = classify_and_cut(&problem.mesh, &problem.space, &phi).unwrap();
    assert!(cut.cut_points.len() > 4);
    let p = AcousticField {
        values: interpolate(&problem.mesh, |x| c(1.0 + 300.0 * x.x * x.y, 50.0 * x.x - 20.0 * x.y)),
        k: 100.0,
    };
    let z = AdjointField {
        values: interpolate(&problem.mesh, |x| c(2.0 - 80.0 * x.y + 4e3 * x.x * x.x, 10.0 * x.y)),
        k: 100.0,
    };
    let coeffs = WentzellCoeffs::from_thicknesses(100.0, 2e-4, 2.4e-4, 1.4);
    let terms = assemble_dj_terms(&problem.mesh, &problem.space, &cut, &p, &z, &coeffs).unwrap();

    let mut near_walls = HashSet::new();
    for cp in &cut.cut_points {
        if cp.incident.iter().any(|i| i.kind != IncidentKind::CutFacet) {
            near_walls.extend(problem.mesh.facets[cp.edge].vertices);
        }
    }
    let scale = terms.normal.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(scale > 0.0);
    let mut checked = 0;
    for cp in &cut.cut_points {
        for v in problem.mesh.facets[cp.edge].vertices {
            if near_walls.contains(&v) {
                continue;
            }
            let l = problem.space.local_of(v).unwrap();
            assert!(terms.jump[l].norm() < 1e-12 * scale, "vertex {v}: {}", terms.jump[l]);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn gradient_adds_over_frequencies() {
    let problem = common::small_problem(true);
    let grid = FrequencyGrid { f_min: 5000.0, f_max: 10000.0, count: 2 };
    let spec = ObjectiveSpec { kind: ObjectiveKind::Track, tikhonov_eps: 0.0, grid };
    let ev = problem.eval_objective(&spec, &problem.design0).unwrap();
    let mut sum = vec![0.0; problem.n_design()];
    for (k, f) in grid.frequencies().into_iter().enumerate() {
        let (p_out, dj) = problem.outlet_pressure_gradient(&problem.design0, f).unwrap();
        assert_eq!(p_out, ev.response.points[k].p_out);
        let w = (p_out - ev.response.points[k].p_ideal).conj();
        for (s, d) in sum.iter_mut().zip(&dj) {
            *s += (w * d).re;
        }
    }
    let scale = sum.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for (a, b) in ev.gradient.iter().zip(&sum) {
        assert!((a - b).abs() <= 1e-13 * scale);
    }
}

#[test]
fn adjoint_matches_finite_differences_on_a_small_problem() {
    for losses in [false, true] {
        let problem = common::small_problem(losses);
        let n = problem.n_design();
        let components: Vec<usize> = (0..6).map(|j| j * (n - 1) / 5).collect();
        let (_, dj) = problem.outlet_pressure_gradient(&problem.design0, 9000.0).unwrap();
        // pick entries that actually move the boundary
        let mut ranked: Vec<usize> = (0..n).collect();
        ranked.sort_by(|&a, &b| dj[b].norm().total_cmp(&dj[a].norm()));
        let picked: Vec<usize> = ranked[..4].iter().copied().chain(components).collect();
        for row in problem.gradient_check(&problem.design0, 9000.0, &picked).unwrap() {
            assert!(row.rel_err < 1e-4, "losses {losses}, component {}: {row:?}", row.component);
        }
    }
}

#[test]
fn tikhonov_gradient_is_mass_weighted_difference() {
    let problem = common::small_problem(false);
    let mut design = problem.design0.clone();
    design[3] += 0.25;
    let (value, grad) = problem.space.tikhonov(&design, &problem.design0);
    let (zero, _) = problem.space.tikhonov(&problem.design0, &problem.design0);
    assert_eq!(zero, 0.0);
    assert!(value > 0.0);
    // quadratic: J(x0 + t e) = t^2 J(x0 + e), gradient at x0 + e dotted with e gives 2 J
    assert_relative_eq!(grad[3] * 0.25, 2.0 * value, max_relative = 1e-12);
}
