//! Stabilized CutFEM discretization of the Helmholtz problem with viscothermal wall losses.
//!
//! The frequency-independent pieces (stiffness, mass, outlet and wall boundary matrices,
//! ghost penalty, load) are assembled once per cut geometry on a shared sparsity pattern and
//! combined per wavenumber.

use crate::error::{Error, Result};
use crate::geometry::{fan_triangulate, Point2};
use crate::levelset::{CellClass, CutGeometry};
use crate::lumped::{ideal_outlet_target, LumpedParams};
use crate::mesh::{FacetTag, Mesh, Region};
use crate::p2::{cell_dofs, n_dofs, P2Element};
use crate::quadrature::{segment_points, triangle_points};
use crate::sparse::{norm2, ComplexLu, ComplexLuSymbolic, CscMatrix, Pattern};
use crate::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicsParams {
    pub c0: f64,
    pub rho0: f64,
    pub nu: f64,
    pub prandtl: f64,
    pub gamma: f64,
    pub cp: f64,
    pub a_d: f64,
    pub losses: bool,
}

impl PhysicsParams {
    /// Air at room conditions with unit diaphragm acceleration and losses enabled.
    pub fn air() -> Self {
        PhysicsParams {
            c0: 343.20,
            rho0: 1.2044,
            nu: 1.5061e-5,
            prandtl: 0.7078,
            gamma: 1.4,
            cp: 1.0049e3,
            a_d: 1.0,
            losses: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c0", self.c0),
            ("rho0", self.rho0),
            ("nu", self.nu),
            ("prandtl", self.prandtl),
            ("cp", self.cp),
            ("a_d", self.a_d),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn wavenumber(&self, f_hz: f64) -> f64 {
        TAU * f_hz / self.c0
    }

    /// Thermal conductivity `cp mu / Pr`.
    pub fn conductivity(&self) -> f64 {
        self.cp * self.rho0 * self.nu / self.prandtl
    }
}

/// Viscous and thermal boundary-layer thicknesses at angular frequency `omega`.
pub fn boundary_layer_thicknesses(physics: &PhysicsParams, omega: f64) -> (f64, f64) {
    let delta_v = (2.0 * physics.nu / omega).sqrt();
    let delta_t = (2.0 * physics.conductivity() / (omega * physics.rho0 * physics.cp)).sqrt();
    (delta_v, delta_t)
}

/// Wall-loss coefficients at one wavenumber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WentzellCoeffs {
    pub k: f64,
    pub delta_v: f64,
    pub delta_t: f64,
    pub alpha_t: Complex64,
    pub alpha_v: Complex64,
}

impl WentzellCoeffs {
    pub fn new(physics: &PhysicsParams, f_hz: f64) -> Self {
        let k = physics.wavenumber(f_hz);
        let (dv, dt) = if physics.losses { boundary_layer_thicknesses(physics, TAU * f_hz) } else { (0.0, 0.0) };
        Self::from_thicknesses(k, dv, dt, physics.gamma)
    }

    pub fn from_thicknesses(k: f64, delta_v: f64, delta_t: f64, gamma: f64) -> Self {
        let i_minus_1 = Complex64::new(-1.0, 1.0);
        WentzellCoeffs {
            k,
            delta_v,
            delta_t,
            alpha_t: i_minus_1 * (delta_t * k * k * (gamma - 1.0) / 2.0),
            alpha_v: i_minus_1 * (delta_v / 2.0),
        }
    }

    pub fn lossless(&self) -> bool {
        self.alpha_t == Complex64::new(0.0, 0.0) && self.alpha_v == Complex64::new(0.0, 0.0)
    }
}

/// Role of a boundary piece in the variational form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PieceKind {
    Diaphragm { lossy: bool },
    Outlet,
    Wall { lossy: bool },
}

impl PieceKind {
    pub fn lossy(self) -> bool {
        matches!(self, PieceKind::Diaphragm { lossy: true } | PieceKind::Wall { lossy: true })
    }
}

/// Straight part of the fluid boundary lying in one cell.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPiece {
    pub cell: usize,
    pub a: Point2,
    pub b: Point2,
    /// Outward unit normal.
    pub normal: Point2,
    pub kind: PieceKind,
}

impl BoundaryPiece {
    pub fn tangent(&self) -> Point2 {
        (self.b - self.a).normalized().expect("boundary piece of zero length")
    }
}

/// Part of segment `p0 -> p1` where the linear interpolant of `f0, f1` has sign `negative`.
fn clip_segment(p0: Point2, p1: Point2, f0: f64, f1: f64, negative: bool) -> Option<(Point2, Point2)> {
    let keep0 = (f0 < 0.0) == negative;
    let keep1 = (f1 < 0.0) == negative;
    match (keep0, keep1) {
        (true, true) => Some((p0, p1)),
        (false, false) => None,
        _ => {
            let x = p0.lerp(p1, crate::geometry::zero_crossing(f0, f1));
            if keep0 {
                Some((p0, x))
            } else {
                Some((x, p1))
            }
        }
    }
}

/// All boundary pieces of the cut fluid domain.
pub fn boundary_pieces(mesh: &Mesh, cut: &CutGeometry) -> Vec<BoundaryPiece> {
    let mut pieces = Vec::new();
    for (e, facet) in mesh.facets.iter().enumerate() {
        let [v0, v1] = facet.vertices;
        let (p0, p1) = (mesh.points[v0], mesh.points[v1]);
        match facet.cells {
            (c, None) => {
                let seg = match (mesh.cells[c].region, cut.class[c]) {
                    (Region::FixedAir, _) | (_, CellClass::Inside) => Some((p0, p1)),
                    (_, CellClass::Outside) => None,
                    (_, CellClass::Cut) => clip_segment(p0, p1, cut.phi[v0], cut.phi[v1], true),
                };
                let Some((a, b)) = seg else { continue };
                let kind = match facet.tag {
                    FacetTag::Diaphragm => PieceKind::Diaphragm { lossy: facet.lossy },
                    FacetTag::Outlet => PieceKind::Outlet,
                    _ => PieceKind::Wall { lossy: facet.lossy },
                };
                pieces.push(BoundaryPiece { cell: c, a, b, normal: mesh.facet_normal_from(e, c), kind });
            }
            (c0, Some(c1)) => {
                let (r0, r1) = (mesh.cells[c0].region, mesh.cells[c1].region);
                if r0 == r1 {
                    continue;
                }
                let fluid = if r0 == Region::FixedAir { c0 } else { c1 };
                if let Some((a, b)) = clip_segment(p0, p1, cut.phi[v0], cut.phi[v1], false) {
                    pieces.push(BoundaryPiece {
                        cell: fluid,
                        a,
                        b,
                        normal: mesh.facet_normal_from(e, fluid),
                        kind: PieceKind::Wall { lossy: facet.lossy },
                    });
                }
            }
        }
    }
    for cc in &cut.cut_cells {
        pieces.push(BoundaryPiece {
            cell: cc.cell,
            a: cc.facet.a,
            b: cc.facet.b,
            normal: cc.facet.normal,
            kind: PieceKind::Wall { lossy: true },
        });
    }
    pieces
}

/// Interior facets carrying the ghost penalty: both neighbours active, at least one cut.
pub fn ghost_faces(mesh: &Mesh, cut: &CutGeometry) -> Vec<usize> {
    (0..mesh.facets.len())
        .filter(|&e| match mesh.facets[e].cells {
            (c0, Some(c1)) => {
                cut.is_active(c0)
                    && cut.is_active(c1)
                    && (cut.class[c0] == CellClass::Cut || cut.class[c1] == CellClass::Cut)
            }
            _ => false,
        })
        .collect()
}

/// Pushes the symmetric local matrix `m` (only `a <= b` is evaluated) as mirrored triplets.
fn push_symmetric(out: &mut Vec<(usize, usize, f64)>, dofs: &[usize], m: impl Fn(usize, usize) -> f64) {
    for a in 0..dofs.len() {
        for b in a..dofs.len() {
            let v = m(a, b);
            out.push((dofs[a], dofs[b], v));
            if a != b {
                out.push((dofs[b], dofs[a], v));
            }
        }
    }
}

/// Ghost-penalty matrix `sum_S h^3 int_S [n.grad p][n.grad q]` over the given interior facets
/// (without the `eps_s` factor), as triplets.
pub fn ghost_penalty_triplets(mesh: &Mesh, faces: &[usize]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for &e in faces {
        let (c0, Some(c1)) = mesh.facets[e].cells else { panic!("ghost face {e} is a boundary facet") };
        let h = mesh.cells[c0].diameter.max(mesh.cells[c1].diameter);
        let n = mesh.facet_normal_from(e, c0);
        let [a, b] = mesh.facet_points(e);
        let d0 = cell_dofs(mesh, c0);
        let d1 = cell_dofs(mesh, c1);
        let mut dofs: Vec<usize> = d0.to_vec();
        let map1: Vec<usize> = d1
            .iter()
            .map(|d| {
                dofs.iter().position(|x| x == d).unwrap_or_else(|| {
                    dofs.push(*d);
                    dofs.len() - 1
                })
            })
            .collect();
        let (el0, el1) = (P2Element::of_cell(mesh, c0), P2Element::of_cell(mesh, c1));
        let qp: Vec<(Vec<f64>, f64)> = segment_points(a, b)
            .iter()
            .map(|&(x, w)| {
                let mut jump = vec![0.0; dofs.len()];
                for (i, g) in el0.gradients(x).iter().enumerate() {
                    jump[i] += n.dot(*g);
                }
                for (i, g) in el1.gradients(x).iter().enumerate() {
                    jump[map1[i]] -= n.dot(*g);
                }
                (jump, w)
            })
            .collect();
        let h3 = h * h * h;
        push_symmetric(&mut out, &dofs, |u, v| h3 * qp.iter().map(|(j, w)| w * (j[u] * j[v])).sum::<f64>());
    }
    out
}

/// Frequency-independent discrete operators for one cut geometry.
pub struct StateOperator {
    pub n_dofs: usize,
    pub active: Vec<bool>,
    pattern: Arc<Pattern>,
    stiffness: Vec<f64>,
    mass: Vec<f64>,
    outlet: Vec<f64>,
    wall_mass: Vec<f64>,
    wall_tangential: Vec<f64>,
    ghost: Vec<f64>,
    inactive_identity: Vec<f64>,
    /// Load vector `int_d rho0 a_d N_i (n.e_a)`.
    load: Vec<f64>,
    /// Outlet averaging functional `(1/|out|) int_out N_i`.
    outlet_functional: Vec<f64>,
    outlet_length: f64,
    symbolic: ComplexLuSymbolic,
}

/// Quadrature on the fluid part of a cell.
fn fluid_quadrature(mesh: &Mesh, cut: &CutGeometry, c: usize) -> Vec<(Point2, f64)> {
    let tris = match cut.class[c] {
        CellClass::Inside => vec![mesh.cell_points(c)],
        CellClass::Outside => Vec::new(),
        CellClass::Cut => fan_triangulate(&cut.cut_of_cell(c).unwrap().inside),
    };
    tris.into_iter().flat_map(triangle_points).collect()
}

impl StateOperator {
    pub fn assemble(mesh: &Mesh, cut: &CutGeometry, physics: &PhysicsParams) -> Result<Self> {
        let n = n_dofs(mesh);
        let mut active = vec![false; n];
        let mut k_t = Vec::new();
        let mut m_t = Vec::new();
        for c in 0..mesh.cells.len() {
            if !cut.is_active(c) {
                continue;
            }
            let dofs = cell_dofs(mesh, c);
            for &d in &dofs {
                active[d] = true;
            }
            let el = P2Element::of_cell(mesh, c);
            let qp: Vec<([f64; 6], [Point2; 6], f64)> =
                fluid_quadrature(mesh, cut, c).into_iter().map(|(x, w)| (el.values(x), el.gradients(x), w)).collect();
            push_symmetric(&mut k_t, &dofs, |a, b| qp.iter().map(|(_, g, w)| w * g[a].dot(g[b])).sum());
            push_symmetric(&mut m_t, &dofs, |a, b| qp.iter().map(|(v, _, w)| w * (v[a] * v[b])).sum());
        }
        if !active.iter().any(|&a| a) {
            return Err(Error::InvalidInput("no active degrees of freedom".into()));
        }

        let pieces = boundary_pieces(mesh, cut);
        let outlet_length: f64 = pieces.iter().filter(|p| p.kind == PieceKind::Outlet).map(|p| p.a.distance(p.b)).sum();
        let mut out_t = Vec::new();
        let mut wt_t = Vec::new();
        let mut wv_t = Vec::new();
        let mut load = vec![0.0; n];
        let mut outlet_functional = vec![0.0; n];
        // the acceleration axis is the diaphragm's outward normal, so n.e_a = 1 there
        let load_scale = physics.rho0 * physics.a_d;
        for piece in &pieces {
            let len = piece.a.distance(piece.b);
            if !(len > 0.0) {
                return Err(Error::Geometry(format!("zero-length boundary piece in cell {}", piece.cell)));
            }
            let dofs = cell_dofs(mesh, piece.cell);
            let el = P2Element::of_cell(mesh, piece.cell);
            let t = piece.tangent();
            let qp: Vec<([f64; 6], [f64; 6], f64)> = segment_points(piece.a, piece.b)
                .iter()
                .map(|&(x, w)| (el.values(x), el.gradients(x).map(|g| t.dot(g)), w))
                .collect();
            match piece.kind {
                PieceKind::Outlet => {
                    push_symmetric(&mut out_t, &dofs, |a, b| qp.iter().map(|(v, _, w)| w * (v[a] * v[b])).sum());
                    for (i, &d) in dofs.iter().enumerate() {
                        outlet_functional[d] += qp.iter().map(|(v, _, w)| w * v[i]).sum::<f64>() / outlet_length;
                    }
                }
                PieceKind::Diaphragm { .. } => {
                    for (i, &d) in dofs.iter().enumerate() {
                        load[d] += load_scale * qp.iter().map(|(v, _, w)| w * v[i]).sum::<f64>();
                    }
                }
                PieceKind::Wall { .. } => {}
            }
            if piece.kind.lossy() {
                push_symmetric(&mut wt_t, &dofs, |a, b| qp.iter().map(|(v, _, w)| w * (v[a] * v[b])).sum());
                push_symmetric(&mut wv_t, &dofs, |a, b| qp.iter().map(|(_, g, w)| w * (g[a] * g[b])).sum());
            }
        }
        if outlet_length == 0.0 {
            return Err(Error::Geometry("mesh has no outlet".into()));
        }

        let ghost_t = ghost_penalty_triplets(mesh, &ghost_faces(mesh, cut));
        let id_t: Vec<(usize, usize, f64)> = (0..n).filter(|&d| !active[d]).map(|d| (d, d, 1.0)).collect();

        let mut entries: Vec<(usize, usize)> = Vec::with_capacity(k_t.len() + ghost_t.len() + id_t.len());
        for t in k_t.iter().chain(&ghost_t).chain(&id_t) {
            entries.push((t.0, t.1));
        }
        let pattern = Arc::new(Pattern::from_entries(n, entries));
        let part = |trip: &[(usize, usize, f64)]| {
            let mut m = CscMatrix::<f64>::zeros(pattern.clone());
            m.accumulate(trip);
            m.values
        };
        let symbolic = ComplexLuSymbolic::new(pattern.clone())?;
        Ok(StateOperator {
            n_dofs: n,
            stiffness: part(&k_t),
            mass: part(&m_t),
            outlet: part(&out_t),
            wall_mass: part(&wt_t),
            wall_tangential: part(&wv_t),
            ghost: part(&ghost_t),
            inactive_identity: part(&id_t),
            active,
            pattern,
            load,
            outlet_functional,
            outlet_length,
            symbolic,
        })
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn outlet_length(&self) -> f64 {
        self.outlet_length
    }

    pub fn outlet_functional(&self) -> &[f64] {
        &self.outlet_functional
    }

    pub fn has_ghost_penalty(&self) -> bool {
        self.ghost.iter().any(|&v| v != 0.0)
    }

    /// System matrix `K - k^2 M + i k O + alpha_T W_T + alpha_V W_V + eps_s S` with identity
    /// rows on inactive DOFs. Terms whose coefficient vanishes are not added at all.
    pub fn matrix(&self, coeffs: &WentzellCoeffs, eps_s: f64) -> CscMatrix<Complex64> {
        let k = coeffs.k;
        let zero = Complex64::new(0.0, 0.0);
        let values = (0..self.pattern.nnz())
            .map(|i| {
                let mut v = Complex64::new(
                    self.stiffness[i] - k * k * self.mass[i] + self.inactive_identity[i],
                    k * self.outlet[i],
                );
                if coeffs.alpha_t != zero {
                    v += coeffs.alpha_t * self.wall_mass[i];
                }
                if coeffs.alpha_v != zero {
                    v += coeffs.alpha_v * self.wall_tangential[i];
                }
                if eps_s != 0.0 {
                    v += eps_s * self.ghost[i];
                }
                v
            })
            .collect();
        CscMatrix { pattern: self.pattern.clone(), values }
    }

    pub fn rhs(&self) -> Vec<Complex64> {
        self.load.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    /// Factorizes and solves the state problem at one frequency.
    pub fn solve(&self, physics: &PhysicsParams, f_hz: f64, eps_s: f64) -> Result<StateSolution> {
        let coeffs = WentzellCoeffs::new(physics, f_hz);
        let matrix = self.matrix(&coeffs, eps_s);
        let lu =
            self.symbolic.factor(&matrix).map_err(|e| Error::Solver { frequency_hz: f_hz, reason: e.to_string() })?;
        let values = solve_refined(&matrix, &lu, &self.rhs(), f_hz)?;
        Ok(StateSolution { field: AcousticField { values, k: coeffs.k }, coeffs, matrix, lu, f_hz })
    }

    /// Mean pressure over the outlet.
    pub fn outlet_pressure(&self, field: &AcousticField) -> Complex64 {
        self.outlet_functional.iter().zip(&field.values).map(|(r, p)| p * r).sum()
    }

    /// `p^H X p` for one of the stored real symmetric parts.
    fn energy(&self, part: &[f64], p: &[Complex64]) -> f64 {
        let mut s = 0.0;
        for c in 0..self.n_dofs {
            for (r, k) in self.pattern.column(c) {
                s += (p[r].conj() * p[c] * part[k]).re;
            }
        }
        s
    }

    /// Relative mismatch between dissipated/radiated power and input power.
    pub fn power_balance_residual(&self, field: &AcousticField, coeffs: &WentzellCoeffs) -> f64 {
        let p = &field.values;
        let radiated = coeffs.k * self.energy(&self.outlet, p);
        let thermal = coeffs.alpha_t.im * self.energy(&self.wall_mass, p);
        let viscous = coeffs.alpha_v.im * self.energy(&self.wall_tangential, p);
        let input: f64 = self.load.iter().zip(p).map(|(b, x)| (x.conj() * b).im).sum();
        (radiated + thermal + viscous - input).abs() / input.abs()
    }

    /// Outlet radiated power term `k int_out |p|^2`.
    pub fn radiated_power(&self, field: &AcousticField) -> f64 {
        field.k * self.energy(&self.outlet, &field.values)
    }

    /// Input power term `Im int_d rho0 conj(p) a_d`.
    pub fn input_power(&self, field: &AcousticField) -> f64 {
        self.load.iter().zip(&field.values).map(|(b, x)| (x.conj() * b).im).sum()
    }

    /// Diagnostic energy norm with boundary-layer contributions.
    pub fn w_norm(&self, field: &AcousticField, coeffs: &WentzellCoeffs, gamma: f64) -> f64 {
        let p = &field.values;
        let k2 = coeffs.k * coeffs.k;
        (k2 * self.energy(&self.mass, p)
            + self.energy(&self.stiffness, p)
            + coeffs.delta_t * (gamma - 1.0) * k2 * self.energy(&self.wall_mass, p)
            + coeffs.delta_v * self.energy(&self.wall_tangential, p))
        .sqrt()
    }
}

/// Complex pressure coefficients per P2 DOF.
#[derive(Clone, Debug)]
pub struct AcousticField {
    pub values: Vec<Complex64>,
    pub k: f64,
}

/// A solved state with its factorization kept for the adjoint.
pub struct StateSolution {
    pub field: AcousticField,
    pub coeffs: WentzellCoeffs,
    pub matrix: CscMatrix<Complex64>,
    pub lu: ComplexLu,
    pub f_hz: f64,
}

/// Relative residual threshold every linear solve must meet.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

pub fn relative_residual(a: &CscMatrix<Complex64>, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    norm2(&r) / norm2(b).max(f64::MIN_POSITIVE)
}

/// LU solve followed by up to three steps of iterative refinement.
pub fn solve_refined(a: &CscMatrix<Complex64>, lu: &ComplexLu, b: &[Complex64], f_hz: f64) -> Result<Vec<Complex64>> {
    let mut x = lu.solve(b);
    if norm2(b) == 0.0 {
        return Ok(x);
    }
    for _ in 0..3 {
        let ax = a.matvec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        if norm2(&r) / norm2(b) < 1e-14 {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
    }
    let res = relative_residual(a, &x, b);
    if !(res < SOLVE_TOLERANCE) {
        return Err(Error::Solver {
            frequency_hz: f_hz,
            reason: format!("relative residual {res:e} after refinement"),
        });
    }
    Ok(x)
}

/// Assembles the system matrix and load for one frequency.
pub fn assemble_state(
    mesh: &Mesh,
    cut: &CutGeometry,
    coeffs: &WentzellCoeffs,
    physics: &PhysicsParams,
    eps_s: f64,
) -> Result<(CscMatrix<Complex64>, Vec<Complex64>)> {
    let op = StateOperator::assemble(mesh, cut, physics)?;
    Ok((op.matrix(coeffs, eps_s), op.rhs()))
}

/// Factorizes `a` and solves `a x = b`.
pub fn solve_state(a: &CscMatrix<Complex64>, b: &[Complex64], f_hz: f64) -> Result<(Vec<Complex64>, ComplexLu)> {
    let lu = ComplexLuSymbolic::new(a.pattern.clone())?
        .factor(a)
        .map_err(|e| Error::Solver { frequency_hz: f_hz, reason: e.to_string() })?;
    let x = solve_refined(a, &lu, b, f_hz)?;
    Ok((x, lu))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponsePoint {
    pub f_hz: f64,
    pub k: f64,
    pub p_out: Complex64,
    pub p_ideal: Complex64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrequencyResponse {
    pub points: Vec<ResponsePoint>,
}

pub fn check_frequencies(frequencies: &[f64]) -> Result<()> {
    if frequencies.is_empty() {
        return Err(Error::InvalidInput("empty frequency list".into()));
    }
    if frequencies.iter().any(|&f| !(f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidInput("frequencies must be positive".into()));
    }
    if frequencies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("frequencies must be strictly increasing".into()));
    }
    Ok(())
}

/// One state solve per frequency on a fixed cut geometry.
pub fn frequency_sweep(
    op: &StateOperator,
    physics: &PhysicsParams,
    lumped: &LumpedParams,
    frequencies: &[f64],
    eps_s: f64,
) -> Result<FrequencyResponse> {
    check_frequencies(frequencies)?;
    let mut points = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        let sol = op.solve(physics, f, eps_s)?;
        points.push(ResponsePoint {
            f_hz: f,
            k: sol.coeffs.k,
            p_out: op.outlet_pressure(&sol.field),
            p_ideal: ideal_outlet_target(lumped, sol.coeffs.k)?,
        });
    }
    Ok(FrequencyResponse { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thickness_ratio_is_prandtl_root() {
        let phys = PhysicsParams::air();
        for f in [100.0, 3750.0, 15000.0] {
            let (dv, dt) = boundary_layer_thicknesses(&phys, TAU * f);
            assert_relative_eq!(dt / dv, phys.prandtl.powf(-0.5), max_relative = 1e-14);
        }
        let (a, _) = boundary_layer_thicknesses(&phys, 100.0);
        let (b, _) = boundary_layer_thicknesses(&phys, 400.0);
        assert_relative_eq!(b, a / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn losses_off_zeroes_coefficients() {
        let phys = PhysicsParams { losses: false, ..PhysicsParams::air() };
        let c = WentzellCoeffs::new(&phys, 5000.0);
        assert!(c.lossless());
        assert_eq!(c.delta_v, 0.0);
    }

    #[test]
    fn clip_keeps_requested_side() {
        let (a, b) = (Point2::new(0.0, 0.0), Point2::new(4.0, 0.0));
        let (p, q) = clip_segment(a, b, -1.0, 3.0, true).unwrap();
        assert_eq!(p, a);
        assert_relative_eq!(q.x, 1.0);
        let (p, q) = clip_segment(a, b, -1.0, 3.0, false).unwrap();
        assert_relative_eq!(p.x, 1.0);
        assert_eq!(q, b);
        assert!(clip_segment(a, b, 1.0, 3.0, true).is_none());
    }
}
