//! Adjoint state and the discrete shape derivative of the outlet pressure.

use crate::error::{Error, Result};
use crate::geometry::{barycentric, Point2};
use crate::helmholtz::{solve_refined, AcousticField, StateOperator, StateSolution, WentzellCoeffs};
use crate::levelset::{CutGeometry, DesignSpace};
use crate::mesh::Mesh;
use crate::p2::{CVec2, LocalField};
use crate::quadrature::segment_points;
use crate::Complex64;

/// Adjoint coefficients per P2 DOF.
#[derive(Clone, Debug)]
pub struct AdjointField {
    pub values: Vec<Complex64>,
    pub k: f64,
}

/// Solves `A^T z = r` with `r` the outlet-averaging functional, reusing the state factorization
/// (the system matrix is complex symmetric).
pub fn solve_adjoint(op: &StateOperator, state: &StateSolution) -> Result<AdjointField> {
    let rhs: Vec<Complex64> = op.outlet_functional().iter().map(|&r| Complex64::new(r, 0.0)).collect();
    let values = solve_refined(&state.matrix, &state.lu, &rhs, state.f_hz)?;
    Ok(AdjointField { values, k: state.coeffs.k })
}

/// Viscothermal wall integrand `alpha_T q p + alpha_V (grad q . grad p - dq/dn dp/dn)`.
pub fn psi(q: Complex64, p: Complex64, grad_q: CVec2, grad_p: CVec2, n: Point2, coeffs: &WentzellCoeffs) -> Complex64 {
    coeffs.alpha_t * q * p + coeffs.alpha_v * (grad_q.dot(grad_p) - grad_q.dot_real(n) * grad_p.dot_real(n))
}

/// The four contributions to the shape derivative, per local design vertex.
#[derive(Clone, Debug)]
pub struct DjTerms {
    /// Classical volume term.
    pub volume: Vec<Complex64>,
    /// Variation of the wall normal inside the tangential gradient.
    pub tangential: Vec<Complex64>,
    /// Normal derivative of the wall integrand.
    pub normal: Vec<Complex64>,
    /// Conormal jumps where the boundary crosses mesh edges.
    pub jump: Vec<Complex64>,
}

impl DjTerms {
    pub fn total(&self) -> Vec<Complex64> {
        (0..self.volume.len()).map(|i| self.volume[i] + self.tangential[i] + self.normal[i] + self.jump[i]).collect()
    }
}

/// Evaluates the shape derivative `dj(phi; w_l)` of the outlet pressure for every design
/// vertex `l`, given the state `p` and adjoint `z` at the same wavenumber.
pub fn assemble_dj_terms(
    mesh: &Mesh,
    space: &DesignSpace,
    cut: &CutGeometry,
    p: &AcousticField,
    z: &AdjointField,
    coeffs: &WentzellCoeffs,
) -> Result<DjTerms> {
    let n = space.n_local();
    let zero = Complex64::new(0.0, 0.0);
    let mut terms =
        DjTerms { volume: vec![zero; n], tangential: vec![zero; n], normal: vec![zero; n], jump: vec![zero; n] };
    let k2 = coeffs.k * coeffs.k;

    for cc in &cut.cut_cells {
        let c = cc.cell;
        let fp = LocalField::gather(mesh, c, &p.values);
        let fz = LocalField::gather(mesh, c, &z.values);
        let (hp, hz) = (fp.hessian(), fz.hessian());
        let pts = mesh.cell_points(c);
        let grad_w = fp.element.grad_lambda;
        let mut local = [0; 3];
        for (i, &v) in mesh.cells[c].vertices.iter().enumerate() {
            local[i] = space
                .local_of(v)
                .ok_or_else(|| Error::InvalidInput(format!("cut cell {c} outside the design region")))?;
        }
        let facet = &cc.facet;
        let (nrm, t) = (facet.normal, facet.tangent());
        let inv_g = 1.0 / facet.grad_norm;
        for (x, wt) in segment_points(facet.a, facet.b) {
            let lam = barycentric(pts, x);
            let (pv, zv) = (fp.value(x), fz.value(x));
            let (gp, gz) = (fp.gradient(x), fz.gradient(x));
            let (dnp, dnz) = (gp.dot_real(nrm), gz.dot_real(nrm));
            let vol = gz.dot(gp) - k2 * zv * pv;
            let (tgp, tgz) = (gp.dot_real(t), gz.dot_real(t));
            let dn_psi = coeffs.alpha_t * (dnz * pv + zv * dnp)
                + coeffs.alpha_v
                    * (hz.form_complex(nrm, gp) + hp.form_complex(nrm, gz)
                        - hz.form(nrm, nrm) * dnp
                        - dnz * hp.form(nrm, nrm));
            for i in 0..3 {
                let l = local[i];
                let tw = t.dot(grad_w[i]);
                terms.volume[l] += vol * (wt * lam[i] * inv_g);
                terms.tangential[l] += coeffs.alpha_v * (tw * tgz * dnp + dnz * tw * tgp) * (wt * inv_g);
                terms.normal[l] += dn_psi * (wt * lam[i] * inv_g);
            }
        }
    }

    for cp in &cut.cut_points {
        let mut acc = Complex64::new(0.0, 0.0);
        for inc in cp.incident.iter().filter(|i| i.lossy) {
            let fp = LocalField::gather(mesh, inc.cell, &p.values);
            let fz = LocalField::gather(mesh, inc.cell, &z.values);
            let x = cp.location;
            let val = psi(fz.value(x), fp.value(x), fz.gradient(x), fp.gradient(x), inc.normal, coeffs);
            acc += val * cp.n_s.dot(inc.conormal);
        }
        let [v0, v1] = mesh.facets[cp.edge].vertices;
        for (j, v) in [v0, v1].into_iter().enumerate() {
            let l = space
                .local_of(v)
                .ok_or_else(|| Error::InvalidInput(format!("cut edge {} leaves the design region", cp.edge)))?;
            terms.jump[l] += acc * (cp.hat_weights[j] / cp.grad_edge);
        }
    }
    Ok(terms)
}

/// Sum of [`assemble_dj_terms`].
pub fn assemble_dj(
    mesh: &Mesh,
    space: &DesignSpace,
    cut: &CutGeometry,
    p: &AcousticField,
    z: &AdjointField,
    coeffs: &WentzellCoeffs,
) -> Result<Vec<Complex64>> {
    Ok(assemble_dj_terms(mesh, space, cut, p, z, coeffs)?.total())
}
