//! Objectives over a frequency set, the composed shape problem, and the BFGS driver.

use crate::error::{Error, Result};
use crate::helmholtz::{
    check_frequencies, frequency_sweep, FrequencyResponse, PhysicsParams, ResponsePoint, StateOperator,
};
use crate::levelset::{classify_and_cut, walls_distance, CutGeometry, DesignSpace, DesignVector, LevelSetField, Wall};
use crate::lumped::{ideal_outlet_target, LumpedParams};
use crate::mesh::{build_benchmark_mesh, BenchmarkGeometry, Mesh};
use crate::shape_gradient::{assemble_dj, solve_adjoint};
use crate::{Complex64, Point};
use log::{debug, info, warn};
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Harmonic mean of the output power, `1/2 sum 1/|p_out|^2`.
    Power,
    /// Distance to the ideal response, `1/2 sum |p_out - p_ideal|^2`.
    Track,
}

/// Geometric frequency grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub count: usize,
}

impl FrequencyGrid {
    /// 35 frequencies from 3.75 to 15 kHz, each `2^(1/17)` times the previous.
    pub fn optimization() -> Self {
        FrequencyGrid { f_min: 3750.0, f_max: 15000.0, count: 35 }
    }

    /// 69 frequencies over the same band spaced by `2^(1/34)`.
    pub fn evaluation() -> Self {
        FrequencyGrid { f_min: 3750.0, f_max: 15000.0, count: 69 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidInput("frequency count must be at least 1".into()));
        }
        if !(self.f_min > 0.0 && self.f_max.is_finite()) || (self.count > 1 && self.f_max <= self.f_min) {
            return Err(Error::InvalidInput(format!("invalid frequency range [{}, {}]", self.f_min, self.f_max)));
        }
        Ok(())
    }

    /// Per-step ratio `(f_max / f_min)^(1 / (count - 1))`, or 1 for a single frequency.
    pub fn ratio(&self) -> f64 {
        if self.count > 1 {
            (self.f_max / self.f_min).powf(1.0 / (self.count - 1) as f64)
        } else {
            1.0
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let r = self.ratio();
        (0..self.count)
            .map(|i| if i + 1 == self.count && self.count > 1 { self.f_max } else { self.f_min * r.powi(i as i32) })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub tikhonov_eps: f64,
    pub grid: FrequencyGrid,
}

/// Objective value of a response: tracking or harmonic-mean power, without regularization.
pub fn objective_value(kind: ObjectiveKind, response: &FrequencyResponse) -> Result<f64> {
    let mut j = 0.0;
    for pt in &response.points {
        j += match kind {
            ObjectiveKind::Track => 0.5 * (pt.p_out - pt.p_ideal).norm_sqr(),
            ObjectiveKind::Power => {
                let a2 = pt.p_out.norm_sqr();
                if a2 == 0.0 {
                    return Err(Error::DegenerateObjective(format!("zero outlet pressure at {} Hz", pt.f_hz)));
                }
                0.5 / a2
            }
        };
    }
    Ok(j)
}

/// Real gradient of the objective from per-frequency design derivatives of `p_out`.
/// `tikhonov` is the gradient of the regularization term, already mass weighted.
pub fn objective_gradient(
    kind: ObjectiveKind,
    response: &FrequencyResponse,
    dj_design: &[Vec<Complex64>],
    tikhonov_eps: f64,
    tikhonov: &[f64],
) -> Result<Vec<f64>> {
    if dj_design.len() != response.points.len() {
        return Err(Error::InvalidInput("derivatives and responses are not aligned".into()));
    }
    let mut g: Vec<f64> = tikhonov.iter().map(|t| tikhonov_eps * t).collect();
    for (pt, dj) in response.points.iter().zip(dj_design) {
        let weight = match kind {
            ObjectiveKind::Track => (pt.p_out - pt.p_ideal).conj(),
            ObjectiveKind::Power => {
                let a2 = pt.p_out.norm_sqr();
                if a2 == 0.0 {
                    return Err(Error::DegenerateObjective(format!("zero outlet pressure at {} Hz", pt.f_hz)));
                }
                -pt.p_out.conj() / (a2 * a2)
            }
        };
        for (gi, d) in g.iter_mut().zip(dj) {
            *gi += (weight * d).re;
        }
    }
    Ok(g)
}

/// Lumped model matching a benchmark cross-section: the compression ratio is the chamber
/// length over the waveguide width, and the phase distance runs from diaphragm to outlet.
pub fn benchmark_lumped(geometry: &BenchmarkGeometry, physics: &PhysicsParams) -> LumpedParams {
    LumpedParams {
        d: geometry.chamber_depth,
        kappa: geometry.chamber_length / geometry.waveguide_radius,
        rho0: physics.rho0,
        c0: physics.c0,
        a_d: physics.a_d,
        l: geometry.outlet_distance(),
    }
}

/// The full composition from design vector to outlet pressures.
pub struct ShapeProblem {
    pub mesh: Mesh,
    pub space: DesignSpace,
    pub dirichlet_data: Vec<f64>,
    pub physics: PhysicsParams,
    pub lumped: LumpedParams,
    pub eps_s: f64,
    /// Design reproducing the baseline level-set field.
    pub design0: DesignVector,
}

/// Everything computed by one objective evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub response: FrequencyResponse,
    pub tikhonov: f64,
    /// Zero contour of the level set.
    pub polyline: Vec<(Point, Point)>,
}

/// Relative finite-difference steps tried by [`ShapeProblem::gradient_check`].
pub const FD_STEPS: [f64; 4] = [1e-5, 1e-6, 1e-7, 1e-8];

/// Adjoint and finite-difference derivative of `p_out` along one design entry.
#[derive(Clone, Copy, Debug)]
pub struct GradientCheck {
    pub component: usize,
    pub adjoint: Complex64,
    pub fd: Complex64,
    pub rel_err: f64,
}

/// Settings for [`ShapeProblem::optimize`].
#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Largest level-set change of the first trial step; one mesh size when `None`.
    pub initial_step: Option<f64>,
    /// Stop once `J <= target_ratio * J(design0)`.
    pub target_ratio: Option<f64>,
}

impl ShapeProblem {
    /// Sets up a problem on `mesh` whose baseline level set is the union of the wall half-planes.
    pub fn new(mesh: Mesh, walls: &[Wall], physics: PhysicsParams, lumped: LumpedParams, eps_s: f64) -> Result<Self> {
        physics.validate()?;
        if !(eps_s >= 0.0 && eps_s.is_finite()) {
            return Err(Error::InvalidInput(format!("eps_s must be non-negative, got {eps_s}")));
        }
        let space = DesignSpace::new(&mesh)?;
        let (design0, dirichlet_data) = space.design_for_target(&mesh, |x| walls_distance(walls, x));
        Ok(ShapeProblem { mesh, space, dirichlet_data, physics, lumped, eps_s, design0 })
    }

    pub fn benchmark(
        geometry: &BenchmarkGeometry,
        walls: &[Wall],
        h_target: f64,
        physics: PhysicsParams,
        eps_s: f64,
    ) -> Result<Self> {
        let mesh = build_benchmark_mesh(geometry, h_target)?;
        let lumped = benchmark_lumped(geometry, &physics);
        Self::new(mesh, walls, physics, lumped, eps_s)
    }

    pub fn n_design(&self) -> usize {
        self.space.n_design()
    }

    pub fn levelset(&self, design: &[f64]) -> Result<LevelSetField> {
        self.space.solve_poisson(design, &self.dirichlet_data)
    }

    pub fn cut(&self, design: &[f64]) -> Result<CutGeometry> {
        classify_and_cut(&self.mesh, &self.space, &self.levelset(design)?)
    }

    pub fn operator(&self, cut: &CutGeometry) -> Result<StateOperator> {
        StateOperator::assemble(&self.mesh, cut, &self.physics)
    }

    pub fn sweep(&self, design: &[f64], frequencies: &[f64]) -> Result<FrequencyResponse> {
        let cut = self.cut(design)?;
        frequency_sweep(&self.operator(&cut)?, &self.physics, &self.lumped, frequencies, self.eps_s)
    }

    /// Outlet pressure at one frequency and its derivative with respect to every design entry.
    pub fn outlet_pressure_gradient(&self, design: &[f64], f_hz: f64) -> Result<(Complex64, Vec<Complex64>)> {
        let cut = self.cut(design)?;
        let op = self.operator(&cut)?;
        let (pt, dj) = self.frequency_derivative(&cut, &op, f_hz)?;
        Ok((pt.p_out, dj))
    }

    fn frequency_derivative(
        &self,
        cut: &CutGeometry,
        op: &StateOperator,
        f_hz: f64,
    ) -> Result<(ResponsePoint, Vec<Complex64>)> {
        let state = op.solve(&self.physics, f_hz, self.eps_s)?;
        let adjoint = solve_adjoint(op, &state)?;
        let dj = assemble_dj(&self.mesh, &self.space, cut, &state.field, &adjoint, &state.coeffs)?;
        let point = ResponsePoint {
            f_hz,
            k: state.coeffs.k,
            p_out: op.outlet_pressure(&state.field),
            p_ideal: ideal_outlet_target(&self.lumped, state.coeffs.k)?,
        };
        Ok((point, self.space.chain_to_design(&dj)))
    }

    /// Objective value, gradient and response for one design.
    pub fn eval_objective(&self, spec: &ObjectiveSpec, design: &[f64]) -> Result<Evaluation> {
        if design.len() != self.n_design() {
            return Err(Error::InvalidInput(format!(
                "design has {} entries, expected {}",
                design.len(),
                self.n_design()
            )));
        }
        spec.grid.validate()?;
        let frequencies = spec.grid.frequencies();
        check_frequencies(&frequencies)?;
        let cut = self.cut(design)?;
        if !cut.perturbed.is_empty() {
            warn!("{} level-set values sat on the zero floor", cut.perturbed.len());
        }
        let op = self.operator(&cut)?;
        let mut response = FrequencyResponse::default();
        let mut dj_design = Vec::with_capacity(frequencies.len());
        for &f in &frequencies {
            let (pt, dj) = self.frequency_derivative(&cut, &op, f)?;
            response.points.push(pt);
            dj_design.push(dj);
        }
        let (tik, tik_grad) = self.space.tikhonov(design, &self.design0);
        let value = objective_value(spec.kind, &response)? + spec.tikhonov_eps * tik;
        let gradient = objective_gradient(spec.kind, &response, &dj_design, spec.tikhonov_eps, &tik_grad)?;
        debug!("objective {value:e} over {} frequencies", frequencies.len());
        Ok(Evaluation { value, gradient, response, tikhonov: tik, polyline: cut.polyline() })
    }

    /// Largest level-set change caused by a unit change of design entry `i`.
    pub fn levelset_sensitivity(&self, i: usize) -> Result<f64> {
        let mut e = vec![0.0; self.n_design()];
        e[i] = 1.0;
        let zero = vec![0.0; self.dirichlet_data.len()];
        let dphi = self.space.solve_poisson(&e, &zero)?;
        Ok(dphi.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Compares the adjoint derivative of `p_out` at `f_hz` with central differences for
    /// each listed design entry. Steps move the level set by `s * L` for `s` in [`FD_STEPS`],
    /// `L` the mesh extent; the estimate from the pair of consecutive steps that agree best
    /// is kept.
    pub fn gradient_check(&self, design: &[f64], f_hz: f64, components: &[usize]) -> Result<Vec<GradientCheck>> {
        let (_, adjoint) = self.outlet_pressure_gradient(design, f_hz)?;
        let extent = {
            let (lo, hi) = self
                .mesh
                .points
                .iter()
                .fold((Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN)), |(lo, hi), p| {
                    (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y)))
                });
            (hi - lo).norm()
        };
        let p_at = |x: &[f64]| -> Result<Complex64> {
            let cut = self.cut(x)?;
            let op = self.operator(&cut)?;
            let state = op.solve(&self.physics, f_hz, self.eps_s)?;
            Ok(op.outlet_pressure(&state.field))
        };
        let mut rows = Vec::with_capacity(components.len());
        for &i in components {
            if i >= self.n_design() {
                return Err(Error::InvalidInput(format!("component {i} out of range")));
            }
            let unit = extent / self.levelset_sensitivity(i)?;
            let mut estimates = Vec::with_capacity(FD_STEPS.len());
            for s in FD_STEPS {
                let h = s * unit;
                let mut x = design.to_vec();
                x[i] = design[i] + h;
                let plus = p_at(&x)?;
                x[i] = design[i] - h;
                let minus = p_at(&x)?;
                estimates.push((plus - minus) / (2.0 * h));
            }
            let best = (0..estimates.len() - 1)
                .min_by(|&a, &b| {
                    let da = (estimates[a] - estimates[a + 1]).norm();
                    let db = (estimates[b] - estimates[b + 1]).norm();
                    da.total_cmp(&db)
                })
                .unwrap();
            let fd = estimates[best];
            let scale = fd.norm().max(adjoint[i].norm());
            let rel_err = if scale > 0.0 { (adjoint[i] - fd).norm() / scale } else { 0.0 };
            debug!("component {i}: adjoint {} fd {} rel {rel_err:e}", adjoint[i], fd);
            rows.push(GradientCheck { component: i, adjoint: adjoint[i], fd, rel_err });
        }
        Ok(rows)
    }

    /// Multiple of the identity for the initial inverse Hessian such that the first trial
    /// step `-scale * gradient` changes the level-set field by at most `step`.
    pub fn initial_scale(&self, gradient: &[f64], step: f64) -> Result<f64> {
        let zero = vec![0.0; self.dirichlet_data.len()];
        let dphi = self.space.solve_poisson(gradient, &zero)?;
        let largest = dphi.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if largest > 0.0 && largest.is_finite() {
            Ok(step / largest)
        } else {
            Err(Error::DegenerateObjective("gradient does not move the level set".into()))
        }
    }

    /// Runs BFGS from `design0`. `on_eval` sees every successful evaluation, trial points
    /// included; the history carries the evaluation of each accepted iterate.
    pub fn optimize(
        &self,
        spec: &ObjectiveSpec,
        options: &OptimizeOptions,
        mut on_eval: impl FnMut(&[f64], &Evaluation),
    ) -> Result<BfgsResult<f64, Evaluation>> {
        let first = self.eval_objective(spec, &self.design0)?;
        on_eval(&self.design0, &first);
        let step = options.initial_step.unwrap_or_else(|| self.mesh.max_diameter());
        let mut bfgs = BfgsOptions::new(options.max_iters, options.grad_tol);
        if inf_norm(&first.gradient) > 0.0 {
            bfgs.initial_scale = self.initial_scale(&first.gradient, step)?;
        }
        bfgs.target_value = options.target_ratio.map(|r| r * first.value);
        info!("J0 = {:e}, |g0| = {:e}, initial scale {:e}", first.value, inf_norm(&first.gradient), bfgs.initial_scale);
        let mut cached = Some(first);
        bfgs_minimize(self.design0.clone(), &bfgs, |x: &[f64]| {
            let ev = match cached.take() {
                Some(ev) => ev,
                None => {
                    let ev = self.eval_objective(spec, x)?;
                    on_eval(x, &ev);
                    ev
                }
            };
            Ok((ev.value, ev.gradient.clone(), ev))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfgsStatus {
    Converged,
    MaxIterations,
    LineSearchStall,
    /// The objective reached the requested target value.
    TargetReached,
}

#[derive(Clone, Debug)]
pub struct BfgsOptions<T> {
    pub max_iters: usize,
    pub grad_tol: T,
    /// Armijo sufficient-decrease constant.
    pub c1: T,
    pub shrink: T,
    pub max_backtracks: usize,
    /// Initial inverse Hessian is this multiple of the identity.
    pub initial_scale: T,
    /// Stop once the objective is at or below this value.
    pub target_value: Option<T>,
}

impl<T: Float> BfgsOptions<T> {
    pub fn new(max_iters: usize, grad_tol: T) -> Self {
        BfgsOptions {
            max_iters,
            grad_tol,
            c1: T::from(1e-4).unwrap(),
            shrink: T::from(0.5).unwrap(),
            max_backtracks: 30,
            initial_scale: T::one(),
            target_value: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationRecord<T, A> {
    pub iteration: usize,
    pub value: T,
    pub grad_inf_norm: T,
    /// Step length of the accepted line-search step (0 for the starting point).
    pub step: T,
    /// Caller data attached to the iterate.
    pub aux: A,
}

#[derive(Clone, Debug)]
pub struct BfgsResult<T, A> {
    pub x: Vec<T>,
    pub value: T,
    pub gradient: Vec<T>,
    pub status: BfgsStatus,
    pub history: Vec<IterationRecord<T, A>>,
    pub skipped_updates: usize,
    /// Final dense inverse-Hessian approximation, row major.
    pub inverse_hessian: Vec<T>,
}

fn inf_norm<T: Float>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

/// Dense inverse-Hessian BFGS with Armijo backtracking.
///
/// `f` returns the value, gradient, and auxiliary data to store in the history. Failed
/// evaluations at trial points are treated as rejected steps; a failure at `x0` is returned.
/// Before the first update the identity guess is rescaled by `s^T y / y^T y`.
pub fn bfgs_minimize<T, A, E, F>(
    x0: Vec<T>,
    options: &BfgsOptions<T>,
    mut f: F,
) -> std::result::Result<BfgsResult<T, A>, E>
where
    T: Float + std::fmt::Debug,
    E: std::fmt::Display,
    F: FnMut(&[T]) -> std::result::Result<(T, Vec<T>, A), E>,
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g, aux) = f(&x)?;
    let mut history =
        vec![IterationRecord { iteration: 0, value: fx, grad_inf_norm: inf_norm(&g), step: T::zero(), aux }];
    let mut h = vec![T::zero(); n * n];
    for i in 0..n {
        h[i * n + i] = options.initial_scale;
    }
    let mut updated = false;
    let mut skipped = 0;
    let mut status = BfgsStatus::MaxIterations;

    for iteration in 1..=options.max_iters {
        if inf_norm(&g) < options.grad_tol {
            status = BfgsStatus::Converged;
            break;
        }
        if options.target_value.is_some_and(|t| fx <= t) {
            status = BfgsStatus::TargetReached;
            break;
        }
        let mut d: Vec<T> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) {
            warn!("BFGS direction is not a descent direction; restarting from the scaled identity");
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = if i == j { options.initial_scale } else { T::zero() };
                }
            }
            updated = false;
            d = g.iter().map(|&gi| -options.initial_scale * gi).collect();
            slope = dot(&g, &d);
        }

        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..=options.max_backtracks {
            let trial: Vec<T> = x.iter().zip(&d).map(|(&xi, &di)| xi + alpha * di).collect();
            match f(&trial) {
                Ok((ft, gt, aux)) if ft.is_finite() && ft <= fx + options.c1 * alpha * slope => {
                    accepted = Some((trial, ft, gt, aux));
                    break;
                }
                Ok(_) => {}
                Err(e) => warn!("trial step of length {alpha:?} failed: {e}"),
            }
            alpha = alpha * options.shrink;
        }
        let Some((x_new, f_new, g_new, aux)) = accepted else {
            status = BfgsStatus::LineSearchStall;
            break;
        };

        let s: Vec<T> = x_new.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &y);
        let (ns, ny) = (dot(&s, &s).sqrt(), dot(&y, &y).sqrt());
        if sy > T::from(1e-12).unwrap() * ns * ny {
            if !updated {
                let scale = sy / dot(&y, &y);
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] = if i == j { scale } else { T::zero() };
                    }
                }
                updated = true;
            }
            let rho = sy.recip();
            let hy: Vec<T> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let coef = rho * rho * yhy + rho;
            for i in 0..n {
                let row = &mut h[i * n..(i + 1) * n];
                for j in 0..n {
                    row[j] = row[j] - rho * (hy[i] * s[j] + s[i] * hy[j]) + coef * s[i] * s[j];
                }
            }
        } else {
            skipped += 1;
            info!("iteration {iteration}: curvature condition failed, update skipped");
        }

        x = x_new;
        fx = f_new;
        g = g_new;
        history.push(IterationRecord { iteration, value: fx, grad_inf_norm: inf_norm(&g), step: alpha, aux });
        info!("iteration {iteration}: J = {fx:?}, step = {alpha:?}");
    }
    if status == BfgsStatus::MaxIterations {
        if inf_norm(&g) < options.grad_tol {
            status = BfgsStatus::Converged;
        } else if options.target_value.is_some_and(|t| fx <= t) {
            status = BfgsStatus::TargetReached;
        }
    }
    Ok(BfgsResult { x, value: fx, gradient: g, status, history, skipped_updates: skipped, inverse_hessian: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_ratios() {
        let g = FrequencyGrid::optimization();
        assert_relative_eq!(g.ratio(), 2f64.powf(1.0 / 17.0), max_relative = 1e-14);
        let f = g.frequencies();
        assert_eq!(f.len(), 35);
        assert_eq!(f[34], 15000.0);
        let e = FrequencyGrid::evaluation();
        assert_relative_eq!(e.ratio(), 2f64.powf(1.0 / 34.0), max_relative = 1e-14);
        let single = FrequencyGrid { f_min: 1000.0, f_max: 1000.0, count: 1 };
        assert_eq!(single.frequencies(), vec![1000.0]);
    }

    fn point(p_out: Complex64, p_ideal: Complex64) -> FrequencyResponse {
        FrequencyResponse { points: vec![ResponsePoint { f_hz: 1000.0, k: 1.0, p_out, p_ideal }] }
    }

    #[test]
    fn power_objective_value() {
        let r = point(Complex64::new(0.0, 2.0), Complex64::new(0.0, 0.0));
        assert_relative_eq!(objective_value(ObjectiveKind::Power, &r).unwrap(), 0.125);
        let zero = point(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(objective_value(ObjectiveKind::Power, &zero), Err(Error::DegenerateObjective(_))));
    }

    #[test]
    fn orthogonal_residual_has_zero_gradient() {
        let r = point(Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0));
        let dj = vec![vec![Complex64::new(0.0, 1.0), Complex64::new(3.0, 0.0)]];
        let g = objective_gradient(ObjectiveKind::Track, &r, &dj, 0.0, &[0.0, 0.0]).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 3.0);
    }

    #[test]
    fn bfgs_quadratic_in_three_iterations() {
        let res = bfgs_minimize(vec![1.0, 1.0], &BfgsOptions::new(10, 1e-14), |x: &[f64]| {
            Ok::<_, String>((0.5 * (x[0] * x[0] + x[1] * x[1]), x.to_vec(), ()))
        })
        .unwrap();
        assert!(res.history.len() <= 4);
        assert!(res.x.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10);
    }
}
