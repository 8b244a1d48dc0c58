//! Fixed triangulation of the hold-all domain with region and boundary tags.

use crate::error::{Error, Result};
use crate::geometry::{signed_area, triangle_diameter, Point2};
use std::collections::HashMap;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    FixedAir,
    DesignRegion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FacetTag {
    Interior,
    Diaphragm,
    Outlet,
    SymmetryNeumann,
    FixedWall,
    DesignInterfaceDirichlet,
}

impl FacetTag {
    pub fn name(self) -> &'static str {
        match self {
            FacetTag::Interior => "INTERIOR",
            FacetTag::Diaphragm => "DIAPHRAGM",
            FacetTag::Outlet => "OUTLET",
            FacetTag::SymmetryNeumann => "SYMMETRY_NEUMANN",
            FacetTag::FixedWall => "FIXED_WALL",
            FacetTag::DesignInterfaceDirichlet => "DESIGN_INTERFACE_DIRICHLET",
        }
    }
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::FixedAir => "FIXED_AIR",
            Region::DesignRegion => "DESIGN_REGION",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    /// Counterclockwise vertex ids.
    pub vertices: [usize; 3],
    pub region: Region,
    /// Longest edge length.
    pub diameter: f64,
}

#[derive(Clone, Debug)]
pub struct Facet {
    pub vertices: [usize; 2],
    pub cells: (usize, Option<usize>),
    pub tag: FacetTag,
    /// Whether the wall part of this facet carries viscothermal losses.
    pub lossy: bool,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.cells.0).chain(self.cells.1)
    }
}

/// What a geometry builder decides for one facet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacetSpec {
    pub tag: FacetTag,
    pub lossy: bool,
    /// Vertices of this facet carry Dirichlet data for the level-set problem.
    pub levelset_dirichlet: bool,
}

impl FacetSpec {
    pub const INTERIOR: FacetSpec = FacetSpec { tag: FacetTag::Interior, lossy: false, levelset_dirichlet: false };

    pub fn wall(tag: FacetTag, lossy: bool) -> Self {
        FacetSpec { tag, lossy, levelset_dirichlet: false }
    }
}

/// Information handed to the facet classifier while a mesh is built.
#[derive(Clone, Copy, Debug)]
pub struct FacetContext {
    pub a: Point2,
    pub b: Point2,
    pub midpoint: Point2,
    /// Region of each adjacent cell; the second is `None` on the boundary.
    pub regions: (Region, Option<Region>),
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub points: Vec<Point2>,
    pub cells: Vec<Cell>,
    pub facets: Vec<Facet>,
    /// `cell_facets[c][i]` is the facet on the edge from local vertex `i` to `i + 1`.
    pub cell_facets: Vec<[usize; 3]>,
    pub vertex_cells: Vec<Vec<usize>>,
    /// Vertices where the level-set field is prescribed.
    pub levelset_dirichlet: Vec<bool>,
}

impl Mesh {
    /// Builds connectivity for a list of triangles. Clockwise triangles are reoriented.
    pub fn new(
        points: Vec<Point2>,
        triangles: Vec<([usize; 3], Region)>,
        mut classify: impl FnMut(&FacetContext) -> FacetSpec,
    ) -> Result<Mesh> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("vertex {i} has non-finite coordinates")));
        }
        let mut cells = Vec::with_capacity(triangles.len());
        for (c, (mut v, region)) in triangles.into_iter().enumerate() {
            if v.iter().any(|&i| i >= points.len()) {
                return Err(Error::Geometry(format!("cell {c} references a missing vertex")));
            }
            if v[0] == v[1] || v[1] == v[2] || v[2] == v[0] {
                return Err(Error::Geometry(format!("cell {c} repeats a vertex")));
            }
            let p = v.map(|i| points[i]);
            let area = signed_area(p[0], p[1], p[2]);
            if area == 0.0 {
                return Err(Error::Geometry(format!("cell {c} has zero area")));
            }
            if area < 0.0 {
                v.swap(1, 2);
            }
            cells.push(Cell { vertices: v, region, diameter: triangle_diameter(v.map(|i| points[i])) });
        }

        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<([usize; 2], Vec<usize>)> = Vec::new();
        let mut cell_facets = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut local = [0; 3];
            for i in 0..3 {
                let a = cell.vertices[i];
                let b = cell.vertices[(i + 1) % 3];
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(([a, b], Vec::new()));
                    edges.len() - 1
                });
                edges[id].1.push(c);
                local[i] = id;
            }
            cell_facets.push(local);
        }

        let mut levelset_dirichlet = vec![false; points.len()];
        let mut facets = Vec::with_capacity(edges.len());
        for (id, (v, adj)) in edges.into_iter().enumerate() {
            let cells_of = match adj.as_slice() {
                [c] => (*c, None),
                [c0, c1] => (*c0, Some(*c1)),
                _ => {
                    return Err(Error::Connectivity {
                        facet: id,
                        reason: format!("edge shared by {} cells", adj.len()),
                    })
                }
            };
            let (a, b) = (points[v[0]], points[v[1]]);
            let ctx = FacetContext {
                a,
                b,
                midpoint: a.lerp(b, 0.5),
                regions: (cells[cells_of.0].region, cells_of.1.map(|c| cells[c].region)),
            };
            let spec = classify(&ctx);
            if cells_of.1.is_none() && spec.tag == FacetTag::Interior {
                return Err(Error::Connectivity { facet: id, reason: "boundary facet tagged INTERIOR".into() });
            }
            if spec.levelset_dirichlet {
                levelset_dirichlet[v[0]] = true;
                levelset_dirichlet[v[1]] = true;
            }
            facets.push(Facet { vertices: v, cells: cells_of, tag: spec.tag, lossy: spec.lossy });
        }

        let mut vertex_cells = vec![Vec::new(); points.len()];
        for (c, cell) in cells.iter().enumerate() {
            for &v in &cell.vertices {
                vertex_cells[v].push(c);
            }
        }
        if let Some(v) = vertex_cells.iter().position(Vec::is_empty) {
            return Err(Error::Geometry(format!("vertex {v} belongs to no cell")));
        }

        Ok(Mesh { points, cells, facets, cell_facets, vertex_cells, levelset_dirichlet })
    }

    pub fn cell_points(&self, c: usize) -> [Point2; 3] {
        self.cells[c].vertices.map(|v| self.points[v])
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let p = self.cell_points(c);
        signed_area(p[0], p[1], p[2])
    }

    pub fn facet_points(&self, f: usize) -> [Point2; 2] {
        self.facets[f].vertices.map(|v| self.points[v])
    }

    pub fn facet_length(&self, f: usize) -> f64 {
        let [a, b] = self.facet_points(f);
        a.distance(b)
    }

    /// Unit normal of a facet pointing out of the given adjacent cell.
    pub fn facet_normal_from(&self, f: usize, cell: usize) -> Point2 {
        let [a, b] = self.facet_points(f);
        let t = (b - a).normalized().expect("facet of zero length");
        let n = Point2::new(t.y, -t.x);
        let centroid = self.cell_points(cell).iter().fold(Point2::zero(), |s, &p| s + p) * (1.0 / 3.0);
        if n.dot(centroid - a) > 0.0 {
            -n
        } else {
            n
        }
    }

    pub fn facets_with_tag(&self, tag: FacetTag) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(move |&f| self.facets[f].tag == tag)
    }

    pub fn n_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn max_diameter(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    /// Writes the plain-text mesh export.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "POINTS {}", self.points.len())?;
        for (i, p) in self.points.iter().enumerate() {
            writeln!(w, "{i} {:.16e} {:.16e}", p.x, p.y)?;
        }
        writeln!(w, "CELLS {}", self.cells.len())?;
        for (i, c) in self.cells.iter().enumerate() {
            let [a, b, d] = c.vertices;
            writeln!(w, "{i} {a} {b} {d} {}", c.region.name())?;
        }
        writeln!(w, "FACETS {}", self.facets.len())?;
        for (i, f) in self.facets.iter().enumerate() {
            writeln!(w, "{i} {} {} {}", f.vertices[0], f.vertices[1], f.tag.name())?;
        }
        Ok(())
    }
}

/// Recomputes the facet-to-cell map from the cell list and checks it against the stored facets.
pub fn facet_adjacency(mesh: &Mesh) -> Result<Vec<(usize, Option<usize>)>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); mesh.facets.len()];
    for (c, fs) in mesh.cell_facets.iter().enumerate() {
        for &f in fs {
            adj.get_mut(f)
                .ok_or_else(|| Error::Connectivity {
                    facet: f,
                    reason: format!("cell {c} references a missing facet"),
                })?
                .push(c);
        }
    }
    adj.into_iter()
        .enumerate()
        .map(|(f, cells)| {
            let pair = match cells.as_slice() {
                [c] => (*c, None),
                [a, b] => (*a, Some(*b)),
                _ => return Err(Error::Connectivity { facet: f, reason: format!("{} adjacent cells", cells.len()) }),
            };
            let stored = &mesh.facets[f];
            let same = pair == stored.cells || (Some(pair.0) == stored.cells.1 && pair.1 == Some(stored.cells.0));
            if !same {
                return Err(Error::Connectivity { facet: f, reason: "stored adjacency disagrees with cells".into() });
            }
            if pair.1.is_none() && stored.tag == FacetTag::Interior {
                return Err(Error::Connectivity { facet: f, reason: "boundary facet tagged INTERIOR".into() });
            }
            Ok(pair)
        })
        .collect()
}

/// Axis-aligned rectangle of a structured union mesh.
#[derive(Clone, Copy, Debug)]
pub struct Block {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub region: Region,
}

impl Block {
    fn contains(&self, p: Point2) -> bool {
        p.x > self.x0 && p.x < self.x1 && p.y > self.y0 && p.y < self.y1
    }
}

fn grid_lines(mut breaks: Vec<f64>, spacing: f64) -> Vec<f64> {
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let mut lines = vec![breaks[0]];
    for w in breaks.windows(2) {
        let n = ((w[1] - w[0]) / spacing * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for i in 1..=n {
            lines.push(if i == n { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / n as f64 });
        }
    }
    lines
}

/// Triangulates a union of axis-aligned blocks on a tensor grid whose lines pass
/// through every block edge and whose spacing never exceeds `spacing`.
/// Each grid quad is split along its rising diagonal.
pub fn structured_union(
    blocks: &[Block],
    spacing: f64,
    classify: impl FnMut(&FacetContext) -> FacetSpec,
) -> Result<Mesh> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Geometry(format!("grid spacing must be positive, got {spacing}")));
    }
    for b in blocks {
        if !(b.x1 > b.x0 && b.y1 > b.y0) {
            return Err(Error::Geometry(format!("degenerate block {b:?}")));
        }
    }
    if blocks.is_empty() {
        return Err(Error::Geometry("no blocks".into()));
    }
    let xs = grid_lines(blocks.iter().flat_map(|b| [b.x0, b.x1]).collect(), spacing);
    let ys = grid_lines(blocks.iter().flat_map(|b| [b.y0, b.y1]).collect(), spacing);
    let (nx, ny) = (xs.len(), ys.len());

    let mut vertex_id = vec![usize::MAX; nx * ny];
    let mut points = Vec::new();
    let mut triangles = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let center = Point2::new(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
            let Some(block) = blocks.iter().find(|b| b.contains(center)) else {
                continue;
            };
            let mut vid = |ii: usize, jj: usize| {
                let slot = &mut vertex_id[jj * nx + ii];
                if *slot == usize::MAX {
                    *slot = points.len();
                    points.push(Point2::new(xs[ii], ys[jj]));
                }
                *slot
            };
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v11 = vid(i + 1, j + 1);
            let v01 = vid(i, j + 1);
            triangles.push(([v00, v10, v11], block.region));
            triangles.push(([v00, v11, v01], block.region));
        }
    }
    Mesh::new(points, triangles, classify)
}

/// Structured mesh of a single rectangle `[0, width] x [0, height]` with quad size at most
/// `spacing`, every facet on the outer boundary tagged `FIXED_WALL`.
pub fn build_rectangle_mesh(width: f64, height: f64, spacing: f64) -> Result<Mesh> {
    let block = Block { x0: 0.0, x1: width, y0: 0.0, y1: height, region: Region::FixedAir };
    structured_union(&[block], spacing, |ctx| {
        if ctx.regions.1.is_none() {
            FacetSpec::wall(FacetTag::FixedWall, false)
        } else {
            FacetSpec::INTERIOR
        }
    })
}

/// Dimensions of the 2D benchmark cross-section, in meters.
///
/// The axis of symmetry is `y = 0`. The chamber `[0, d] x [0, l_c]` has the diaphragm at `x = 0`;
/// the design region `[d, d + l_p] x [0, design_height]` follows, then the waveguide
/// `[d + l_p, d + l_p + l_wg] x [0, r_wg]` ending in the outlet. Sound leaves the chamber
/// through the slit `slit_start < y < slit_end` on the chamber/design interface.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkGeometry {
    pub chamber_length: f64,
    pub chamber_depth: f64,
    pub waveguide_radius: f64,
    pub waveguide_length: f64,
    pub plug_length: f64,
    pub design_height: f64,
    pub slit_start: f64,
    pub slit_end: f64,
}

impl Default for BenchmarkGeometry {
    /// Reference cross-section: 28 mm chamber of depth 0.5 mm, 17 mm plug region of the
    /// same height, 13 mm wide waveguide of length 33 mm, slit over the inner 10 mm.
    fn default() -> Self {
        BenchmarkGeometry {
            chamber_length: 28e-3,
            chamber_depth: 0.5e-3,
            waveguide_radius: 13e-3,
            waveguide_length: 33e-3,
            plug_length: 17e-3,
            design_height: 28e-3,
            slit_start: 0.0,
            slit_end: 10e-3,
        }
    }
}

impl BenchmarkGeometry {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("chamber_length", self.chamber_length),
            ("chamber_depth", self.chamber_depth),
            ("waveguide_radius", self.waveguide_radius),
            ("waveguide_length", self.waveguide_length),
            ("plug_length", self.plug_length),
            ("design_height", self.design_height),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.slit_start >= 0.0 && self.slit_end > self.slit_start) {
            return Err(Error::Geometry(format!("slit [{}, {}] is empty or negative", self.slit_start, self.slit_end)));
        }
        if self.slit_end > self.chamber_length.min(self.design_height) {
            return Err(Error::Geometry(format!(
                "slit end {} lies beyond the chamber interface ({})",
                self.slit_end,
                self.chamber_length.min(self.design_height)
            )));
        }
        if self.waveguide_radius > self.design_height {
            return Err(Error::Geometry("waveguide wider than the design region".into()));
        }
        Ok(())
    }

    pub fn plug_start(&self) -> f64 {
        self.chamber_depth
    }

    pub fn plug_end(&self) -> f64 {
        self.chamber_depth + self.plug_length
    }

    /// Axial distance from the diaphragm to the outlet.
    pub fn outlet_distance(&self) -> f64 {
        self.plug_end() + self.waveguide_length
    }

    pub fn area(&self) -> f64 {
        self.chamber_depth * self.chamber_length
            + self.plug_length * self.design_height
            + self.waveguide_length * self.waveguide_radius
    }

    pub fn blocks(&self) -> [Block; 3] {
        [
            Block { x0: 0.0, x1: self.plug_start(), y0: 0.0, y1: self.chamber_length, region: Region::FixedAir },
            Block {
                x0: self.plug_start(),
                x1: self.plug_end(),
                y0: 0.0,
                y1: self.design_height,
                region: Region::DesignRegion,
            },
            Block {
                x0: self.plug_end(),
                x1: self.outlet_distance(),
                y0: 0.0,
                y1: self.waveguide_radius,
                region: Region::FixedAir,
            },
        ]
    }

    fn classify(&self, ctx: &FacetContext) -> FacetSpec {
        let scale = self.outlet_distance().max(self.chamber_length).max(self.design_height);
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * scale;
        let m = ctx.midpoint;
        let vertical = near(ctx.a.x, ctx.b.x);
        match ctx.regions {
            (_, None) => {
                if vertical && near(m.x, 0.0) {
                    FacetSpec::wall(FacetTag::Diaphragm, true)
                } else if vertical && near(m.x, self.outlet_distance()) {
                    FacetSpec::wall(FacetTag::Outlet, false)
                } else if !vertical && near(m.y, 0.0) {
                    FacetSpec::wall(FacetTag::SymmetryNeumann, false)
                } else if vertical && near(m.x, self.plug_start()) && ctx.regions.0 == Region::FixedAir {
                    // chamber wall facing the diaphragm
                    FacetSpec::wall(FacetTag::FixedWall, true)
                } else {
                    FacetSpec::wall(FacetTag::FixedWall, false)
                }
            }
            (r0, Some(r1)) if r0 != r1 && near(m.x, self.plug_start()) => {
                if m.y > self.slit_start && m.y < self.slit_end {
                    FacetSpec { tag: FacetTag::Interior, lossy: false, levelset_dirichlet: true }
                } else {
                    FacetSpec { tag: FacetTag::DesignInterfaceDirichlet, lossy: true, levelset_dirichlet: true }
                }
            }
            _ => FacetSpec::INTERIOR,
        }
    }
}

/// Builds the benchmark triangulation with every cell diameter at most `h_target`.
pub fn build_benchmark_mesh(geometry: &BenchmarkGeometry, h_target: f64) -> Result<Mesh> {
    geometry.validate()?;
    if !(h_target > 0.0 && h_target < geometry.chamber_depth) {
        return Err(Error::Geometry(format!(
            "h_target {h_target} must be positive and below the chamber depth {}",
            geometry.chamber_depth
        )));
    }
    // quads of side h/sqrt(2) have diagonals of length h
    structured_union(&geometry.blocks(), h_target / std::f64::consts::SQRT_2, |ctx| geometry.classify(ctx))
}
