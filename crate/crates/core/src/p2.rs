//! Quadratic Lagrange elements on triangles.
//!
//! Local DOF order is the three vertices followed by the midpoints of edges 0-1, 1-2, 2-0.
//! Global DOFs number the mesh vertices first, then one DOF per mesh facet.

use crate::geometry::{barycentric, barycentric_gradients, signed_area, Point2};
use crate::mesh::Mesh;
use crate::Complex64;

/// Local edge `k` joins local vertices `EDGE[k].0` and `EDGE[k].1`.
pub const EDGE: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn n_dofs(mesh: &Mesh) -> usize {
    mesh.n_vertices() + mesh.facets.len()
}

pub fn cell_dofs(mesh: &Mesh, c: usize) -> [usize; 6] {
    let v = mesh.cells[c].vertices;
    let f = mesh.cell_facets[c];
    let nv = mesh.n_vertices();
    [v[0], v[1], v[2], nv + f[0], nv + f[1], nv + f[2]]
}

/// Nodal interpolant of `f`: values at the mesh vertices, then at the facet midpoints.
pub fn interpolate(mesh: &Mesh, f: impl Fn(Point2) -> Complex64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = mesh.points.iter().map(|&p| f(p)).collect();
    out.extend((0..mesh.facets.len()).map(|e| {
        let [a, b] = mesh.facet_points(e);
        f(a.lerp(b, 0.5))
    }));
    out
}

/// Symmetric 2x2 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl Sym2<f64> {
    fn outer_sym(a: Point2, b: Point2) -> Self {
        // a b^T + b a^T
        Sym2 { xx: 2.0 * a.x * b.x, xy: a.x * b.y + a.y * b.x, yy: 2.0 * a.y * b.y }
    }
}

/// Complex vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CVec2 {
    pub x: Complex64,
    pub y: Complex64,
}

impl CVec2 {
    pub fn dot_real(self, v: Point2) -> Complex64 {
        self.x * v.x + self.y * v.y
    }

    /// Bilinear (unconjugated) product.
    pub fn dot(self, o: CVec2) -> Complex64 {
        self.x * o.x + self.y * o.y
    }
}

impl Sym2<Complex64> {
    /// `a^T H b` for real vectors.
    pub fn form(&self, a: Point2, b: Point2) -> Complex64 {
        self.xx * (a.x * b.x) + self.xy * (a.x * b.y + a.y * b.x) + self.yy * (a.y * b.y)
    }

    /// `a^T H v` for a real `a` and complex `v`.
    pub fn form_complex(&self, a: Point2, v: CVec2) -> Complex64 {
        (self.xx * a.x + self.xy * a.y) * v.x + (self.xy * a.x + self.yy * a.y) * v.y
    }
}

#[derive(Clone, Copy, Debug)]
pub struct P2Element {
    pub points: [Point2; 3],
    pub grad_lambda: [Point2; 3],
    pub area: f64,
}

impl P2Element {
    pub fn new(points: [Point2; 3]) -> Self {
        P2Element {
            points,
            grad_lambda: barycentric_gradients(points),
            area: signed_area(points[0], points[1], points[2]),
        }
    }

    pub fn of_cell(mesh: &Mesh, c: usize) -> Self {
        Self::new(mesh.cell_points(c))
    }

    pub fn values(&self, x: Point2) -> [f64; 6] {
        let l = barycentric(self.points, x);
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ]
    }

    pub fn gradients(&self, x: Point2) -> [Point2; 6] {
        let l = barycentric(self.points, x);
        let g = self.grad_lambda;
        let mut out = [Point2::zero(); 6];
        for i in 0..3 {
            out[i] = g[i] * (4.0 * l[i] - 1.0);
        }
        for (k, &(i, j)) in EDGE.iter().enumerate() {
            out[3 + k] = (g[j] * l[i] + g[i] * l[j]) * 4.0;
        }
        out
    }

    /// Constant Hessians of the six basis functions.
    pub fn hessians(&self) -> [Sym2<f64>; 6] {
        let g = self.grad_lambda;
        let mut out = [Sym2::default(); 6];
        for i in 0..3 {
            let h = Sym2::outer_sym(g[i], g[i]);
            out[i] = Sym2 { xx: 2.0 * h.xx, xy: 2.0 * h.xy, yy: 2.0 * h.yy };
        }
        for (k, &(i, j)) in EDGE.iter().enumerate() {
            let h = Sym2::outer_sym(g[i], g[j]);
            out[3 + k] = Sym2 { xx: 4.0 * h.xx, xy: 4.0 * h.xy, yy: 4.0 * h.yy };
        }
        out
    }
}

/// A quadratic field restricted to one cell.
#[derive(Clone, Copy, Debug)]
pub struct LocalField {
    pub element: P2Element,
    pub coeffs: [Complex64; 6],
}

impl LocalField {
    pub fn gather(mesh: &Mesh, c: usize, global: &[Complex64]) -> Self {
        LocalField { element: P2Element::of_cell(mesh, c), coeffs: cell_dofs(mesh, c).map(|d| global[d]) }
    }

    pub fn value(&self, x: Point2) -> Complex64 {
        self.element.values(x).iter().zip(&self.coeffs).map(|(n, c)| c * n).sum()
    }

    pub fn gradient(&self, x: Point2) -> CVec2 {
        let mut g = CVec2::default();
        for (n, c) in self.element.gradients(x).iter().zip(&self.coeffs) {
            g.x += c * n.x;
            g.y += c * n.y;
        }
        g
    }

    pub fn hessian(&self) -> Sym2<Complex64> {
        let mut h = Sym2::<Complex64>::default();
        for (n, c) in self.element.hessians().iter().zip(&self.coeffs) {
            h.xx += c * n.xx;
            h.xy += c * n.xy;
            h.yy += c * n.yy;
        }
        h
    }
}
