//! Static SVG pictures of cells in `R¹` and `R²` and of trajectories.

use std::fmt::Write;

use anyhow::{bail, Result};

use semilinear::retraction::Trace;
use semilinear::scalar::to_f64;
use semilinear::{AffineMap, ExtAffine, LinearCell, Stage};

const SIZE: f64 = 640.0;

#[derive(Clone, Copy)]
struct View {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl View {
    fn grow_x(&mut self, x: f64) {
        self.x0 = self.x0.min(x);
        self.x1 = self.x1.max(x);
    }

    fn grow_y(&mut self, y: f64) {
        self.y0 = self.y0.min(y);
        self.y1 = self.y1.max(y);
    }
}

enum Shape {
    Dot(f64, f64),
    Line(Vec<(f64, f64)>),
    Area(Vec<(f64, f64)>),
}

/// Ends of the base of a cell, or of the cell itself in `R¹`. `None` is an
/// infinite end.
fn base_ends(stage: &Stage) -> (Option<f64>, Option<f64>) {
    match stage {
        Stage::Graph(f) => {
            let c = to_f64(f.constant_term());
            (Some(c), Some(c))
        }
        Stage::Band(lo, hi) => (const_end(lo), const_end(hi)),
    }
}

fn const_end(e: &ExtAffine) -> Option<f64> {
    e.finite().map(|f| to_f64(f.constant_term()))
}

fn at(f: &AffineMap, x: f64) -> f64 {
    let c = to_f64(f.constant_term());
    if f.arity() == 0 {
        c
    } else {
        c + to_f64(f.coeff(0)) * x
    }
}

fn ext_at(e: &ExtAffine, x: f64, view: &View) -> f64 {
    match e {
        ExtAffine::NegInf => view.y0,
        ExtAffine::PosInf => view.y1,
        ExtAffine::Finite(f) => at(f, x),
    }
}

/// Grows `view` by every finite coordinate a cell pins down.
fn bound_cell(cell: &LinearCell, view: &mut View) {
    let (a, b) = base_ends(cell.stage(0));
    let xs: Vec<f64> = [a, b].into_iter().flatten().collect();
    for &x in &xs {
        view.grow_x(x);
    }
    if cell.dim() == 1 {
        view.grow_y(0.0);
        return;
    }
    let maps: Vec<&AffineMap> = match cell.stage(1) {
        Stage::Graph(f) => vec![f],
        Stage::Band(lo, hi) => [lo, hi].into_iter().filter_map(ExtAffine::finite).collect(),
    };
    let probes = if xs.is_empty() { vec![0.0] } else { xs };
    for x in probes {
        for f in &maps {
            view.grow_y(at(f, x));
        }
    }
}

fn shape(cell: &LinearCell, view: &View) -> Shape {
    let (a, b) = base_ends(cell.stage(0));
    let (a, b) = (a.unwrap_or(view.x0), b.unwrap_or(view.x1));
    if cell.dim() == 1 {
        return if a == b { Shape::Dot(a, 0.0) } else { Shape::Line(vec![(a, 0.0), (b, 0.0)]) };
    }
    let point_base = matches!(cell.stage(0), Stage::Graph(_));
    match cell.stage(1) {
        Stage::Graph(f) if point_base => Shape::Dot(a, at(f, a)),
        Stage::Graph(f) => Shape::Line(vec![(a, at(f, a)), (b, at(f, b))]),
        Stage::Band(lo, hi) if point_base => Shape::Line(vec![(a, ext_at(lo, a, view)), (a, ext_at(hi, a, view))]),
        Stage::Band(lo, hi) => Shape::Area(vec![
            (a, ext_at(lo, a, view)),
            (b, ext_at(lo, b, view)),
            (b, ext_at(hi, b, view)),
            (a, ext_at(hi, a, view)),
        ]),
    }
}

/// Polylines `t ↦ H(t, x)`, one per starting point. In `R¹` the vertical
/// axis is the time, scaled to `[0, 1]`.
fn trajectories(trace: &Trace) -> Vec<Vec<(f64, f64)>> {
    let q = to_f64(&trace.q);
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut last = None;
    for s in &trace.samples {
        let p = match s.hx.len() {
            1 => (to_f64(&s.hx[0]), if q > 0.0 { to_f64(&s.t) / q } else { 0.0 }),
            _ => (to_f64(&s.hx[0]), to_f64(&s.hx[1])),
        };
        if last.as_ref() != Some(&s.x) {
            out.push(Vec::new());
            last = Some(s.x.clone());
        }
        out.last_mut().expect("pushed").push(p);
    }
    out
}

fn fmt_points(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(x, y)| format!("{x:.6},{y:.6}")).collect::<Vec<_>>().join(" ")
}

/// An SVG drawing of `cells` in `Rⁿ`, `n ≤ 2`, with the trajectories of
/// `trace` on top.
pub fn render(n: usize, cells: &[LinearCell], trace: Option<&Trace>) -> Result<String> {
    if n > 2 {
        bail!("render supports n ≤ 2, got n = {n}");
    }
    let paths = trace.map(trajectories).unwrap_or_default();
    if let Some(t) = trace {
        if let Some(d) = t.samples.first().map(|s| s.x.len()).filter(|&d| d != n && !cells.is_empty()) {
            bail!("trace is in R^{d} but the cells are in R^{n}");
        }
        if let Some(d) = t.samples.first().map(|s| s.x.len()).filter(|&d| d > 2) {
            bail!("render supports n ≤ 2, got a trace in R^{d}");
        }
    }
    let mut view = View { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
    for c in cells {
        bound_cell(c, &mut view);
    }
    for p in paths.iter().flatten() {
        view.grow_x(p.0);
        view.grow_y(p.1);
    }
    if !view.x0.is_finite() {
        (view.x0, view.x1) = (-1.0, 1.0);
    }
    if !view.y0.is_finite() {
        (view.y0, view.y1) = (-1.0, 1.0);
    }
    let pad = 1.0;
    view = View { x0: view.x0 - pad, x1: view.x1 + pad, y0: view.y0 - pad, y1: view.y1 + pad };
    let (w, h) = (view.x1 - view.x0, view.y1 - view.y0);
    let stroke = 0.004 * w.max(h);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        view.x0, -view.y1, w, h
    )?;
    writeln!(svg, r#"<g transform="scale(1,-1)" stroke-width="{stroke:.6}">"#)?;
    let mut shapes: Vec<(usize, Shape)> = cells.iter().map(|c| (c.cell_dim(), shape(c, &view))).collect();
    // Areas first so edges and points stay visible.
    shapes.sort_by_key(|(d, _)| std::cmp::Reverse(*d));
    for (_, s) in &shapes {
        match s {
            Shape::Area(p) => writeln!(svg, r##"<polygon points="{}" fill="#c8d4e3" stroke="none"/>"##, fmt_points(p))?,
            Shape::Line(p) => writeln!(svg, r##"<polyline points="{}" fill="none" stroke="#34495e"/>"##, fmt_points(p))?,
            Shape::Dot(x, y) => writeln!(svg, r##"<circle cx="{x:.6}" cy="{y:.6}" r="{:.6}" fill="#34495e"/>"##, 2.0 * stroke)?,
        }
    }
    for p in &paths {
        writeln!(svg, r##"<polyline points="{}" fill="none" stroke="#c0392b"/>"##, fmt_points(p))?;
        if let Some((x, y)) = p.last() {
            writeln!(svg, r##"<circle cx="{x:.6}" cy="{y:.6}" r="{:.6}" fill="#c0392b"/>"##, 1.5 * stroke)?;
        }
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}
