//! CSV and SVG writers. Floating-point columns use 17 significant digits.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::helmholtz::FrequencyResponse;
use crate::levelset::{DesignSpace, LevelSetField};
use crate::mesh::Mesh;
use crate::optimizer::IterationRecord;
use std::io::{BufRead, Write};

/// Level-set values at the design vertices: `x,y,phi`.
pub fn write_levelset(mut w: impl Write, mesh: &Mesh, space: &DesignSpace, phi: &LevelSetField) -> Result<()> {
    writeln!(w, "x,y,phi")?;
    for (l, &v) in space.vertices.iter().enumerate() {
        let p = mesh.points[v];
        writeln!(w, "{:.16e},{:.16e},{:.16e}", p.x, p.y, phi.values[l])?;
    }
    Ok(())
}

/// Boundary segments: `x0,y0,x1,y1`.
pub fn write_polyline(mut w: impl Write, segments: &[(Point2, Point2)]) -> Result<()> {
    writeln!(w, "x0,y0,x1,y1")?;
    for (a, b) in segments {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", a.x, a.y, b.x, b.y)?;
    }
    Ok(())
}

pub fn write_response(mut w: impl Write, response: &FrequencyResponse) -> Result<()> {
    writeln!(w, "f_hz,k,re_pout,im_pout,abs_pout,abs_ideal")?;
    for p in &response.points {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.f_hz,
            p.k,
            p.p_out.re,
            p.p_out.im,
            p.p_out.norm(),
            p.p_ideal.norm()
        )?;
    }
    Ok(())
}

/// Lumped response table: `f_hz,abs_p_pa`.
pub fn write_lumped(mut w: impl Write, table: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "f_hz,abs_p_pa")?;
    for (f, p) in table {
        writeln!(w, "{f:.16e},{p:.16e}")?;
    }
    Ok(())
}

fn write_vertex_values(mut w: impl Write, header: &str, space: &DesignSpace, values: &[f64]) -> Result<()> {
    writeln!(w, "{header}")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{},{:.16e}", space.vertices[space.free[i]], v)?;
    }
    Ok(())
}

/// Objective gradient keyed by mesh vertex: `vertex_id,grad_value`.
pub fn write_gradient(w: impl Write, space: &DesignSpace, gradient: &[f64]) -> Result<()> {
    write_vertex_values(w, "vertex_id,grad_value", space, gradient)
}

/// Design vector keyed by mesh vertex: `vertex_id,value`.
pub fn write_design(w: impl Write, space: &DesignSpace, design: &[f64]) -> Result<()> {
    write_vertex_values(w, "vertex_id,value", space, design)
}

/// Reads a design vector written by [`write_design`]; every free vertex must appear once.
pub fn read_design(r: impl BufRead, mesh: &Mesh, space: &DesignSpace) -> Result<Vec<f64>> {
    let mut design = vec![None; space.n_design()];
    for (n, line) in r.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Config { line: n + 1, message: msg.to_string() };
        let (id, value) = line.split_once(',').ok_or_else(|| bad("expected vertex_id,value"))?;
        let id: usize = id.trim().parse().map_err(|_| bad("invalid vertex id"))?;
        let value: f64 = value.trim().parse().map_err(|_| bad("invalid value"))?;
        let i = (id < mesh.n_vertices())
            .then(|| space.local_of(id))
            .flatten()
            .and_then(|l| space.free_index_of_local(l))
            .ok_or_else(|| bad("vertex is not a design variable"))?;
        if design[i].replace(value).is_some() {
            return Err(bad("duplicate vertex"));
        }
    }
    design
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| Error::InvalidInput(format!("design file misses vertex {}", space.vertices[space.free[i]])))
        })
        .collect()
}

pub fn write_history<A>(mut w: impl Write, history: &[IterationRecord<f64, A>]) -> Result<()> {
    writeln!(w, "iter,J,grad_inf_norm,step")?;
    for r in history {
        writeln!(w, "{},{:.16e},{:.16e},{:.16e}", r.iteration, r.value, r.grad_inf_norm, r.step)?;
    }
    Ok(())
}

/// One row of a gradient check.
#[derive(Clone, Copy, Debug)]
pub struct GradcheckRow {
    pub component: usize,
    pub adjoint: f64,
    pub fd: f64,
    pub rel_err: f64,
}

pub fn write_gradcheck(mut w: impl Write, rows: &[GradcheckRow]) -> Result<()> {
    writeln!(w, "component,adjoint,fd,rel_err")?;
    for r in rows {
        writeln!(w, "{},{:.16e},{:.16e},{:.16e}", r.component, r.adjoint, r.fd, r.rel_err)?;
    }
    Ok(())
}

/// Line plot of `|p_out|` and `|p_ideal|` in dB against log frequency.
pub fn write_response_svg(mut w: impl Write, response: &FrequencyResponse) -> Result<()> {
    let (width, height, margin) = (640.0, 400.0, 50.0);
    let pts = &response.points;
    let db = |p: f64| 20.0 * p.max(1e-300).log10();
    let fmin = pts.iter().map(|p| p.f_hz).fold(f64::INFINITY, f64::min).ln();
    let fmax = pts.iter().map(|p| p.f_hz).fold(f64::NEG_INFINITY, f64::max).ln();
    let levels = pts.iter().flat_map(|p| [db(p.p_out.norm()), db(p.p_ideal.norm())]);
    let (lo, hi) = levels.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span_f = if fmax > fmin { fmax - fmin } else { 1.0 };
    let span_db = if hi > lo { hi - lo } else { 1.0 };
    let sx = |f: f64| margin + (f.ln() - fmin) / span_f * (width - 2.0 * margin);
    let sy = |v: f64| height - margin - (v - lo) / span_db * (height - 2.0 * margin);
    let path = |value: &dyn Fn(usize) -> f64| {
        pts.iter()
            .enumerate()
            .map(|(i, p)| format!("{:.2},{:.2}", sx(p.f_hz), sy(value(i))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(
        w,
        r#"<rect x="{margin}" y="{margin}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        width - 2.0 * margin,
        height - 2.0 * margin
    )?;
    writeln!(
        w,
        r#"<polyline fill="none" stroke="gray" stroke-dasharray="4 3" points="{}"/>"#,
        path(&|i| db(pts[i].p_ideal.norm()))
    )?;
    writeln!(w, r#"<polyline fill="none" stroke="blue" points="{}"/>"#, path(&|i| db(pts[i].p_out.norm())))?;
    writeln!(
        w,
        r#"<text x="{margin}" y="{}">{:.0} Hz</text><text x="{}" y="{}" text-anchor="end">{:.0} Hz</text>"#,
        height - margin / 2.0,
        fmin.exp(),
        width - margin,
        height - margin / 2.0,
        fmax.exp()
    )?;
    writeln!(
        w,
        r#"<text x="5" y="{}">{:.1} dB</text><text x="5" y="{}">{:.1} dB</text>"#,
        margin,
        hi,
        height - margin,
        lo
    )?;
    writeln!(w, "</svg>")?;
    Ok(())
}
