//! Design variables, the level-set Poisson map, and extraction of the cut geometry.

use crate::error::{Error, Result};
use crate::geometry::{barycentric_gradients, zero_crossing, Point2};
use crate::mesh::{Mesh, Region};
use crate::sparse::{CscMatrix, RealCholesky};
use crate::Complex64;
use log::warn;

/// Poisson source values, one per free design vertex.
pub type DesignVector = Vec<f64>;

/// Piecewise-linear level-set values, one per design-region vertex in [`DesignSpace`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetField {
    pub values: Vec<f64>,
}

/// Returns `phi + t * w_l`, where `l` is a local design-vertex index.
pub fn perturb_levelset(phi: &LevelSetField, l: usize, t: f64) -> LevelSetField {
    let mut out = phi.clone();
    out.values[l] += t;
    out
}

/// Straight wall of the baseline channel; the solid lies to the left of `start -> end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wall {
    pub start: Point2,
    pub end: Point2,
}

impl Wall {
    pub fn signed_distance(&self, x: Point2) -> f64 {
        let t = (self.end - self.start).normalized().expect("wall of zero length");
        t.cross(x - self.start)
    }
}

/// Level-set target formed by the union of wall half-planes: `max` of their signed distances.
pub fn walls_distance(walls: &[Wall], x: Point2) -> f64 {
    walls.iter().map(|w| w.signed_distance(x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Indexing of design-region vertices plus the assembled P1 Poisson operators.
pub struct DesignSpace {
    /// Mesh vertex id of each design vertex.
    pub vertices: Vec<usize>,
    local: Vec<Option<usize>>,
    /// Local ids of free vertices; position in this list is the design-variable index.
    pub free: Vec<usize>,
    /// Local ids of vertices with prescribed values.
    pub dirichlet: Vec<usize>,
    free_index: Vec<Option<usize>>,
    pub design_cells: Vec<usize>,
    stiffness_ff: CscMatrix<f64>,
    stiffness_fd: Vec<(usize, usize, f64)>,
    mass_ff: CscMatrix<f64>,
    stiffness_factor: RealCholesky,
    mass_factor: RealCholesky,
}

impl DesignSpace {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let design_cells: Vec<usize> =
            (0..mesh.cells.len()).filter(|&c| mesh.cells[c].region == Region::DesignRegion).collect();
        if design_cells.is_empty() {
            return Err(Error::InvalidInput("mesh has no design region".into()));
        }
        let mut local = vec![None; mesh.n_vertices()];
        let mut vertices = Vec::new();
        for &c in &design_cells {
            for &v in &mesh.cells[c].vertices {
                if local[v].is_none() {
                    local[v] = Some(vertices.len());
                    vertices.push(v);
                }
            }
        }
        let (dirichlet, free): (Vec<usize>, Vec<usize>) =
            (0..vertices.len()).partition(|&l| mesh.levelset_dirichlet[vertices[l]]);
        if dirichlet.is_empty() {
            return Err(Error::Singular("level-set problem has no Dirichlet vertices".into()));
        }
        if free.is_empty() {
            return Err(Error::InvalidInput("design region has no free vertices".into()));
        }
        let mut free_index = vec![None; vertices.len()];
        for (i, &l) in free.iter().enumerate() {
            free_index[l] = Some(i);
        }
        let mut dirichlet_index = vec![None; vertices.len()];
        for (i, &l) in dirichlet.iter().enumerate() {
            dirichlet_index[l] = Some(i);
        }

        let mut k_ff = Vec::new();
        let mut k_fd = Vec::new();
        let mut m_ff = Vec::new();
        for &c in &design_cells {
            let p = mesh.cell_points(c);
            let area = mesh.cell_area(c);
            let g = barycentric_gradients(p);
            let ids = mesh.cells[c].vertices.map(|v| local[v].unwrap());
            for i in 0..3 {
                let Some(fi) = free_index[ids[i]] else { continue };
                for j in 0..3 {
                    let k = area * g[i].dot(g[j]);
                    let m = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                    match (free_index[ids[j]], dirichlet_index[ids[j]]) {
                        (Some(fj), _) => {
                            k_ff.push((fi, fj, k));
                            m_ff.push((fi, fj, m));
                        }
                        (None, Some(dj)) => k_fd.push((fi, dj, k)),
                        _ => unreachable!(),
                    }
                }
            }
        }
        let nf = free.len();
        let stiffness_ff = CscMatrix::from_triplets(nf, &k_ff);
        let mass_ff = CscMatrix::from_triplets(nf, &m_ff);
        let stiffness_factor = RealCholesky::new(&stiffness_ff)?;
        let mass_factor = RealCholesky::new(&mass_ff)?;

        Ok(DesignSpace {
            vertices,
            local,
            free,
            dirichlet,
            free_index,
            design_cells,
            stiffness_ff,
            stiffness_fd: k_fd,
            mass_ff,
            stiffness_factor,
            mass_factor,
        })
    }

    pub fn n_design(&self) -> usize {
        self.free.len()
    }

    pub fn n_local(&self) -> usize {
        self.vertices.len()
    }

    /// Local design-vertex index of a mesh vertex.
    pub fn local_of(&self, vertex: usize) -> Option<usize> {
        self.local[vertex]
    }

    pub fn free_index_of_local(&self, l: usize) -> Option<usize> {
        self.free_index[l]
    }

    pub fn mass(&self) -> &CscMatrix<f64> {
        &self.mass_ff
    }

    pub fn stiffness(&self) -> &CscMatrix<f64> {
        &self.stiffness_ff
    }

    /// `K_FD * phi_D` restricted to free rows.
    fn dirichlet_lift(&self, dirichlet_data: &[f64]) -> Vec<f64> {
        let mut lift = vec![0.0; self.free.len()];
        for &(r, c, v) in &self.stiffness_fd {
            lift[r] += v * dirichlet_data[c];
        }
        lift
    }

    /// Solves the Galerkin problem `K phi = M phi_hat` with `phi = dirichlet_data` on the
    /// Dirichlet vertices (given in [`DesignSpace::dirichlet`] order).
    pub fn solve_poisson(&self, design: &[f64], dirichlet_data: &[f64]) -> Result<LevelSetField> {
        if design.len() != self.free.len() || dirichlet_data.len() != self.dirichlet.len() {
            return Err(Error::InvalidInput(format!(
                "design has {} entries and Dirichlet data {}, expected {} and {}",
                design.len(),
                dirichlet_data.len(),
                self.free.len(),
                self.dirichlet.len()
            )));
        }
        if let Some(i) = design.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("design entry {i} is not finite")));
        }
        let lift = self.dirichlet_lift(dirichlet_data);
        let mut rhs = self.mass_ff.matvec(design);
        for (r, l) in rhs.iter_mut().zip(&lift) {
            *r -= l;
        }
        let phi_f = self.stiffness_factor.solve(&rhs);
        let mut values = vec![0.0; self.vertices.len()];
        for (i, &l) in self.free.iter().enumerate() {
            values[l] = phi_f[i];
        }
        for (i, &l) in self.dirichlet.iter().enumerate() {
            values[l] = dirichlet_data[i];
        }
        Ok(LevelSetField { values })
    }

    /// Relative residual of the free rows of the Poisson system.
    pub fn poisson_residual(&self, design: &[f64], dirichlet_data: &[f64], phi: &LevelSetField) -> f64 {
        let phi_f: Vec<f64> = self.free.iter().map(|&l| phi.values[l]).collect();
        let kphi = self.stiffness_ff.matvec(&phi_f);
        let lift = self.dirichlet_lift(dirichlet_data);
        let mphat = self.mass_ff.matvec(design);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..phi_f.len() {
            num += (kphi[i] + lift[i] - mphat[i]).powi(2);
            den += (mphat[i] - lift[i]).powi(2);
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    /// Design vector whose level-set field interpolates `target` at every design vertex,
    /// together with the Dirichlet data taken from `target`.
    pub fn design_for_target(&self, mesh: &Mesh, target: impl Fn(Point2) -> f64) -> (DesignVector, Vec<f64>) {
        let dirichlet_data: Vec<f64> = self.dirichlet.iter().map(|&l| target(mesh.points[self.vertices[l]])).collect();
        let phi_f: Vec<f64> = self.free.iter().map(|&l| target(mesh.points[self.vertices[l]])).collect();
        let mut rhs = self.stiffness_ff.matvec(&phi_f);
        for (r, l) in rhs.iter_mut().zip(self.dirichlet_lift(&dirichlet_data)) {
            *r += l;
        }
        (self.mass_factor.solve(&rhs), dirichlet_data)
    }

    /// Pulls a derivative with respect to level-set values back to the design variables:
    /// `M K^{-1} dj_F`, with `dj` given per local design vertex.
    pub fn chain_to_design(&self, dj: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = self.free.iter().map(|&l| dj[l].re).collect();
        let im: Vec<f64> = self.free.iter().map(|&l| dj[l].im).collect();
        let re = self.mass_ff.matvec(&self.stiffness_factor.solve(&re));
        let im = self.mass_ff.matvec(&self.stiffness_factor.solve(&im));
        re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect()
    }

    /// Tikhonov term `1/2 (x - x0)^T M (x - x0)` and its gradient.
    pub fn tikhonov(&self, design: &[f64], design0: &[f64]) -> (f64, Vec<f64>) {
        let diff: Vec<f64> = design.iter().zip(design0).map(|(a, b)| a - b).collect();
        let grad = self.mass_ff.matvec(&diff);
        let value = 0.5 * diff.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
        (value, grad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellClass {
    Inside,
    Outside,
    Cut,
}

/// Zero-set segment inside one cut cell.
#[derive(Clone, Debug)]
pub struct BoundaryFacet {
    pub a: Point2,
    pub b: Point2,
    pub length: f64,
    /// `grad phi / |grad phi|`, pointing out of the fluid.
    pub normal: Point2,
    pub grad_norm: f64,
    /// Mesh facets holding `a` and `b`.
    pub edges: [usize; 2],
}

impl BoundaryFacet {
    /// Unit tangent from `a` to `b`, taken exactly perpendicular to the normal.
    pub fn tangent(&self) -> Point2 {
        let t = self.normal.perp();
        if t.dot(self.b - self.a) < 0.0 {
            -t
        } else {
            t
        }
    }

    /// Unit tangent pointing away from the facet at its endpoint on `edge`.
    pub fn conormal_at(&self, edge: usize) -> Point2 {
        if self.edges[0] == edge {
            -self.tangent()
        } else {
            self.tangent()
        }
    }
}

#[derive(Clone, Debug)]
pub struct CutCell {
    pub cell: usize,
    /// Fluid part of the cell, counterclockwise.
    pub inside: Vec<Point2>,
    /// Solid part of the cell, counterclockwise.
    pub outside: Vec<Point2>,
    pub facet: BoundaryFacet,
}

/// Which boundary piece meets a cut point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncidentKind {
    /// Zero-set facet of a cut design cell.
    CutFacet,
    /// Wall part of a mesh facet, seen from the fluid cell `cell`.
    MeshWall,
}

#[derive(Clone, Copy, Debug)]
pub struct Incident {
    pub kind: IncidentKind,
    /// Cell whose fields are traced onto the piece.
    pub cell: usize,
    /// Outward unit normal of the piece.
    pub normal: Point2,
    /// Unit tangent of the piece directed away from it at the cut point.
    pub conormal: Point2,
    pub lossy: bool,
}

/// Intersection of the zero set with a mesh edge.
#[derive(Clone, Debug)]
pub struct CutPoint {
    pub edge: usize,
    pub location: Point2,
    /// Unit vector along the edge pointing out of the fluid.
    pub n_s: Point2,
    /// `|d phi / d n_s|` along the edge.
    pub grad_edge: f64,
    /// Values of the two edge-vertex hat functions at the point (edge vertex order).
    pub hat_weights: [f64; 2],
    pub incident: Vec<Incident>,
}

pub struct CutGeometry {
    /// Classification per mesh cell; fixed-air cells are always `Inside`.
    pub class: Vec<CellClass>,
    pub cut_cells: Vec<CutCell>,
    cut_index: Vec<Option<usize>>,
    pub cut_points: Vec<CutPoint>,
    /// Level-set value per mesh vertex after the zero-avoidance perturbation; NaN off the design region.
    pub phi: Vec<f64>,
    /// Mesh vertices whose value was nudged off zero.
    pub perturbed: Vec<usize>,
}

impl CutGeometry {
    /// Geometry with every cell inside, for meshes without a design region.
    pub fn uncut(mesh: &Mesh) -> Self {
        CutGeometry {
            class: vec![CellClass::Inside; mesh.cells.len()],
            cut_cells: Vec::new(),
            cut_index: vec![None; mesh.cells.len()],
            cut_points: Vec::new(),
            phi: vec![f64::NAN; mesh.n_vertices()],
            perturbed: Vec::new(),
        }
    }

    pub fn cut_of_cell(&self, cell: usize) -> Option<&CutCell> {
        self.cut_index[cell].map(|i| &self.cut_cells[i])
    }

    pub fn is_active(&self, cell: usize) -> bool {
        self.class[cell] != CellClass::Outside
    }

    /// Fluid area of a cell.
    pub fn inside_area(&self, mesh: &Mesh, cell: usize) -> f64 {
        match self.class[cell] {
            CellClass::Inside => mesh.cell_area(cell),
            CellClass::Outside => 0.0,
            CellClass::Cut => crate::geometry::polygon_area(&self.cut_of_cell(cell).unwrap().inside),
        }
    }

    /// Gradient of the level-set field on a design cell.
    pub fn grad_phi(&self, mesh: &Mesh, cell: usize) -> Point2 {
        let g = barycentric_gradients(mesh.cell_points(cell));
        let v = mesh.cells[cell].vertices;
        g[0] * self.phi[v[0]] + g[1] * self.phi[v[1]] + g[2] * self.phi[v[2]]
    }

    /// Boundary polyline as segments.
    pub fn polyline(&self) -> Vec<(Point2, Point2)> {
        self.cut_cells.iter().map(|c| (c.facet.a, c.facet.b)).collect()
    }
}

/// Relative threshold below which a vertex value counts as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Classifies every cell against the zero set of `phi` and builds the cut entities.
pub fn classify_and_cut(mesh: &Mesh, space: &DesignSpace, phi: &LevelSetField) -> Result<CutGeometry> {
    if phi.values.len() != space.n_local() {
        return Err(Error::InvalidInput(format!(
            "level-set field has {} values, expected {}",
            phi.values.len(),
            space.n_local()
        )));
    }
    let mut values = vec![f64::NAN; mesh.n_vertices()];
    for (l, &v) in space.vertices.iter().enumerate() {
        if !phi.values[l].is_finite() {
            return Err(Error::InvalidInput(format!("level-set value at vertex {v} is not finite")));
        }
        values[v] = phi.values[l];
    }
    let mut perturbed = Vec::new();
    for &v in &space.vertices {
        let scale = mesh.vertex_cells[v]
            .iter()
            .filter(|&&c| mesh.cells[c].region == Region::DesignRegion)
            .flat_map(|&c| mesh.cells[c].vertices)
            .map(|u| phi.values[space.local_of(u).unwrap()].abs())
            .fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        if values[v].abs() < ZERO_TOLERANCE * scale {
            warn!("level-set value {:e} at vertex {v} moved off zero", values[v]);
            values[v] = ZERO_TOLERANCE * scale;
            perturbed.push(v);
        }
    }

    let mut class = vec![CellClass::Inside; mesh.cells.len()];
    let mut cut_cells = Vec::new();
    let mut cut_index = vec![None; mesh.cells.len()];
    for &c in &space.design_cells {
        let vs = mesh.cells[c].vertices;
        let f = vs.map(|v| values[v]);
        class[c] = if f.iter().all(|&x| x < 0.0) {
            CellClass::Inside
        } else if f.iter().all(|&x| x > 0.0) {
            CellClass::Outside
        } else {
            CellClass::Cut
        };
        if class[c] == CellClass::Cut {
            cut_index[c] = Some(cut_cells.len());
            cut_cells.push(cut_cell(mesh, c, f, &values));
        }
    }

    let mut cut_points = Vec::new();
    for (e, facet) in mesh.facets.iter().enumerate() {
        let [v0, v1] = facet.vertices;
        let (f0, f1) = (values[v0], values[v1]);
        if !(f0.is_finite() && f1.is_finite()) || (f0 < 0.0) == (f1 < 0.0) {
            continue;
        }
        if !facet.cell_ids().any(|c| mesh.cells[c].region == Region::DesignRegion) {
            continue;
        }
        let (p0, p1) = (mesh.points[v0], mesh.points[v1]);
        let t = zero_crossing(f0, f1);
        let location = p0.lerp(p1, t);
        let len = p0.distance(p1);
        let to_positive = if f1 > f0 { p1 - p0 } else { p0 - p1 };
        let n_s = to_positive * (1.0 / len);
        let mut incident = Vec::new();
        for c in facet.cell_ids() {
            if mesh.cells[c].region == Region::DesignRegion {
                let cc = &cut_cells[cut_index[c].expect("cell with a sign change must be cut")];
                incident.push(Incident {
                    kind: IncidentKind::CutFacet,
                    cell: c,
                    normal: cc.facet.normal,
                    conormal: cc.facet.conormal_at(e),
                    lossy: true,
                });
            } else {
                // solid design cell against fixed air: the wall lies on the positive side
                incident.push(Incident {
                    kind: IncidentKind::MeshWall,
                    cell: c,
                    normal: mesh.facet_normal_from(e, c),
                    conormal: -n_s,
                    lossy: facet.lossy,
                });
            }
        }
        if facet.is_boundary() {
            // fluid part of an outer wall lies on the negative side
            incident.push(Incident {
                kind: IncidentKind::MeshWall,
                cell: facet.cells.0,
                normal: mesh.facet_normal_from(e, facet.cells.0),
                conormal: n_s,
                lossy: facet.lossy,
            });
        }
        cut_points.push(CutPoint {
            edge: e,
            location,
            n_s,
            grad_edge: (f1 - f0).abs() / len,
            hat_weights: [1.0 - t, t],
            incident,
        });
    }

    Ok(CutGeometry { class, cut_cells, cut_index, cut_points, phi: values, perturbed })
}

fn cut_cell(mesh: &Mesh, c: usize, f: [f64; 3], values: &[f64]) -> CutCell {
    let p = mesh.cell_points(c);
    let mut inside = Vec::with_capacity(4);
    let mut outside = Vec::with_capacity(4);
    let mut crossings = Vec::with_capacity(2);
    for i in 0..3 {
        let j = (i + 1) % 3;
        if f[i] < 0.0 {
            inside.push(p[i]);
        } else {
            outside.push(p[i]);
        }
        if (f[i] < 0.0) != (f[j] < 0.0) {
            let x = p[i].lerp(p[j], zero_crossing(f[i], f[j]));
            inside.push(x);
            outside.push(x);
            crossings.push((x, mesh.cell_facets[c][i]));
        }
    }
    let g = barycentric_gradients(p);
    let v = mesh.cells[c].vertices;
    let grad = g[0] * values[v[0]] + g[1] * values[v[1]] + g[2] * values[v[2]];
    let grad_norm = grad.norm();
    let (a, ea) = crossings[0];
    let (b, eb) = crossings[1];
    CutCell {
        cell: c,
        inside,
        outside,
        facet: BoundaryFacet {
            a,
            b,
            length: a.distance(b),
            normal: grad * (1.0 / grad_norm),
            grad_norm,
            edges: [ea, eb],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{FacetSpec, FacetTag, Mesh};
    use approx::assert_relative_eq;

    fn single_design_triangle() -> (Mesh, DesignSpace) {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let mesh = Mesh::new(pts, vec![([0, 1, 2], Region::DesignRegion)], |ctx| FacetSpec {
            levelset_dirichlet: ctx.midpoint.x == 0.0,
            ..FacetSpec::wall(FacetTag::FixedWall, false)
        })
        .unwrap();
        let space = DesignSpace::new(&mesh).unwrap();
        (mesh, space)
    }

    fn field(mesh: &Mesh, space: &DesignSpace, f: impl Fn(Point2) -> f64) -> LevelSetField {
        LevelSetField { values: space.vertices.iter().map(|&v| f(mesh.points[v])).collect() }
    }

    #[test]
    fn plane_cut_of_unit_triangle() {
        let (mesh, space) = single_design_triangle();
        let cut = classify_and_cut(&mesh, &space, &field(&mesh, &space, |p| p.x - 0.5)).unwrap();
        assert_eq!(cut.class[0], CellClass::Cut);
        let cc = &cut.cut_cells[0];
        assert_relative_eq!(crate::geometry::polygon_area(&cc.inside), 0.375, epsilon = 1e-15);
        assert_relative_eq!(cc.facet.length, 0.5, epsilon = 1e-15);
        assert_relative_eq!(cc.facet.normal.x, 1.0, epsilon = 1e-15);
        assert_relative_eq!(cc.facet.grad_norm, 1.0, epsilon = 1e-15);
        let mut ends = [cc.facet.a, cc.facet.b];
        ends.sort_by(|a, b| a.y.total_cmp(&b.y));
        assert_relative_eq!(ends[0].x, 0.5);
        assert_relative_eq!(ends[0].y, 0.0);
        assert_relative_eq!(ends[1].y, 0.5);
    }

    #[test]
    fn uniform_signs_classify() {
        let (mesh, space) = single_design_triangle();
        let inside = classify_and_cut(&mesh, &space, &field(&mesh, &space, |_| -1.0)).unwrap();
        assert_eq!(inside.class[0], CellClass::Inside);
        assert!(inside.cut_cells.is_empty());
        let outside = classify_and_cut(&mesh, &space, &field(&mesh, &space, |_| 1.0)).unwrap();
        assert_eq!(outside.class[0], CellClass::Outside);
    }

    #[test]
    fn zero_vertex_is_perturbed() {
        let (mesh, space) = single_design_triangle();
        let cut = classify_and_cut(&mesh, &space, &field(&mesh, &space, |p| p.x)).unwrap();
        assert_eq!(cut.perturbed.len(), 2);
        assert_eq!(cut.class[0], CellClass::Outside);
    }

    #[test]
    fn constant_dirichlet_gives_constant_field() {
        let mesh = crate::mesh::build_rectangle_mesh(1.0, 1.0, 0.25).unwrap();
        let mesh = Mesh::new(
            mesh.points.clone(),
            mesh.cells.iter().map(|c| (c.vertices, Region::DesignRegion)).collect(),
            |ctx| {
                if ctx.regions.1.is_some() {
                    FacetSpec::INTERIOR
                } else {
                    FacetSpec {
                        levelset_dirichlet: ctx.midpoint.x == 0.0,
                        ..FacetSpec::wall(FacetTag::FixedWall, false)
                    }
                }
            },
        )
        .unwrap();
        let space = DesignSpace::new(&mesh).unwrap();
        let phi = space.solve_poisson(&vec![0.0; space.n_design()], &vec![0.7; space.dirichlet.len()]).unwrap();
        for v in phi.values {
            assert_relative_eq!(v, 0.7, epsilon = 1e-13);
        }
    }
}
