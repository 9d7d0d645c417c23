//! Flat crease pattern for cutting and sewing the envelope, and its SVG
//! export.
//!
//! The wall strip is laid out as `m` rows of `n` parallelograms with base
//! `s` and slanted side `b_g`, each split by a valley diagonal `d_g` at
//! angle `theta_g` from the base. Rows alternate chirality like the folded
//! stack, so the strip zig-zags instead of drifting sideways. Caps and
//! sheath strips are separate pieces placed next to the strip.

use std::io::{self, Write};

use serde::Serialize;

use crate::geometry::{derive_segment, GeometryError, KreslingParams, Stability};
use crate::mass::{DesignInputs, EdgeClass};

/// Gap between separate pieces on the sheet, mm.
const PIECE_GAP_MM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CreaseKind {
    Mountain,
    Valley,
    /// Cut line.
    Boundary,
}

impl CreaseKind {
    fn class(self) -> &'static str {
        match self {
            CreaseKind::Mountain => "mountain",
            CreaseKind::Valley => "valley",
            CreaseKind::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crease {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub kind: CreaseKind,
}

impl Crease {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PanelKind {
    Wall,
    Cap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub kind: PanelKind,
    /// Counter-clockwise outline.
    pub outline: Vec<[f64; 2]>,
}

impl Panel {
    pub fn area(&self) -> f64 {
        let pts = &self.outline;
        0.5 * (0..pts.len())
            .map(|i| {
                let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>()
            .abs()
    }

    fn centroid(&self) -> [f64; 2] {
        let k = self.outline.len() as f64;
        let (x, y) = self
            .outline
            .iter()
            .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
        [x / k, y / k]
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        let pts = &self.outline;
        (0..pts.len())
            .map(|i| {
                let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .collect()
    }
}

/// Sewn sleeve holding one tube edge, drawn as a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SheathStrip {
    pub origin: [f64; 2],
    pub length_mm: f64,
    pub width_mm: f64,
    pub edge: EdgeClass,
}

/// Seam-allowance line drawn parallel to a cut edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeamLine {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CreasePattern {
    pub panels: Vec<Panel>,
    pub creases: Vec<Crease>,
    pub sheaths: Vec<SheathStrip>,
    pub seam_lines: Vec<SeamLine>,
    /// Length of the wall strip along its base, `n s`.
    pub strip_length_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
}

impl CreasePattern {
    pub fn wall_panels(&self) -> impl Iterator<Item = &Panel> {
        self.panels.iter().filter(|p| p.kind == PanelKind::Wall)
    }

    /// Membrane area of walls and caps, mm^2.
    pub fn panel_area_mm2(&self) -> f64 {
        self.panels.iter().map(Panel::area).sum()
    }

    pub fn count(&self, kind: CreaseKind) -> usize {
        self.creases.iter().filter(|c| c.kind == kind).count()
    }

    fn translate(&mut self, dx: f64, dy: f64) {
        let mv = |p: &mut [f64; 2]| {
            p[0] += dx;
            p[1] += dy;
        };
        self.panels.iter_mut().flat_map(|p| p.outline.iter_mut()).for_each(mv);
        for c in &mut self.creases {
            mv(&mut c.a);
            mv(&mut c.b);
        }
        self.sheaths.iter_mut().for_each(|s| mv(&mut s.origin));
        for l in &mut self.seam_lines {
            mv(&mut l.a);
            mv(&mut l.b);
        }
    }

    fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        let panels = self.panels.iter().flat_map(|p| p.outline.iter().copied());
        let creases = self.creases.iter().flat_map(|c| [c.a, c.b]);
        let sheaths = self.sheaths.iter().flat_map(|s| {
            [
                s.origin,
                [s.origin[0] + s.length_mm, s.origin[1] + s.width_mm],
            ]
        });
        let seams = self.seam_lines.iter().flat_map(|l| [l.a, l.b]);
        panels.chain(creases).chain(sheaths).chain(seams)
    }

    /// Moves the minimum corner to the origin and records the extent.
    fn normalize(&mut self) {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in self.points() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if lo[0].is_finite() {
            self.translate(-lo[0], -lo[1]);
            self.width_mm = hi[0] - lo[0];
            self.height_mm = hi[1] - lo[1];
        }
    }
}

/// Sheath and seam settings taken from the design inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternOptions {
    pub sheath_ratio_pct: f64,
    pub sheath_width_mm: f64,
    pub seam_allowance_mm: f64,
}

impl From<&DesignInputs> for PatternOptions {
    fn from(inputs: &DesignInputs) -> Self {
        Self {
            sheath_ratio_pct: inputs.sheath_ratio_pct,
            sheath_width_mm: inputs.sheath_width_mm,
            seam_allowance_mm: inputs.weld_overlap_mm,
        }
    }
}

pub fn unfold(params: &KreslingParams, options: &PatternOptions) -> Result<CreasePattern, GeometryError> {
    let geom = derive_segment(params, Stability::Any)?;
    let n = params.sides as usize;
    let m = params.segments as usize;
    let s = geom.side;
    let shift = geom.diagonal_g * geom.theta_g.cos() - s;
    let row_height = geom.diagonal_g * geom.theta_g.sin();

    let mut pattern = CreasePattern {
        strip_length_mm: n as f64 * s,
        ..CreasePattern::default()
    };
    // (crease, owning panel) for seam-allowance placement
    let mut cut_edges: Vec<(Crease, usize)> = Vec::new();

    let mut x0 = 0.0;
    for k in 0..m {
        let y = k as f64 * row_height;
        let dir = if k % 2 == 0 { 1.0 } else { -1.0 };
        let bottom: Vec<[f64; 2]> = (0..=n).map(|j| [x0 + j as f64 * s, y]).collect();
        let top: Vec<[f64; 2]> = (0..=n)
            .map(|j| [x0 + dir * shift + j as f64 * s, y + row_height])
            .collect();

        for j in 0..n {
            let first = pattern.panels.len();
            let (tri_a, tri_b, diag) = if k % 2 == 0 {
                (
                    [bottom[j], bottom[j + 1], top[j + 1]],
                    [bottom[j], top[j + 1], top[j]],
                    (bottom[j], top[j + 1]),
                )
            } else {
                (
                    [bottom[j], bottom[j + 1], top[j]],
                    [bottom[j + 1], top[j + 1], top[j]],
                    (bottom[j + 1], top[j]),
                )
            };
            pattern.panels.push(wall(tri_a));
            pattern.panels.push(wall(tri_b));
            pattern.creases.push(Crease {
                a: diag.0,
                b: diag.1,
                kind: CreaseKind::Valley,
            });

            // bottom ring edge belongs to the first triangle, top to the second
            let lower = Crease {
                a: bottom[j],
                b: bottom[j + 1],
                kind: if k == 0 {
                    CreaseKind::Boundary
                } else {
                    CreaseKind::Mountain
                },
            };
            if k == 0 {
                cut_edges.push((lower, first));
            }
            pattern.creases.push(lower);
            if k == m - 1 {
                let upper = Crease {
                    a: top[j],
                    b: top[j + 1],
                    kind: CreaseKind::Boundary,
                };
                cut_edges.push((upper, first + 1));
                pattern.creases.push(upper);
            }
        }
        for j in 0..=n {
            let end = j == 0 || j == n;
            let side = Crease {
                a: bottom[j],
                b: top[j],
                kind: if end {
                    CreaseKind::Boundary
                } else {
                    CreaseKind::Mountain
                },
            };
            if end {
                // the panel touching this end of the row
                let base = pattern.panels.len() - 2 * n;
                let owner = match (j == 0, k % 2 == 0) {
                    (true, true) => base + 1,
                    (true, false) => base,
                    (false, true) => base + 2 * n - 2,
                    (false, false) => base + 2 * n - 1,
                };
                cut_edges.push((side, owner));
            }
            pattern.creases.push(side);
        }
        x0 += dir * shift;
    }

    // caps to the right of the strip
    let strip_right = pattern
        .panels
        .iter()
        .flat_map(|p| p.outline.iter())
        .fold(0.0_f64, |acc, p| acc.max(p[0]));
    let r = params.radius_mm;
    for c in 0..2 {
        let centre = [strip_right + PIECE_GAP_MM + r, r + c as f64 * (2.0 * r + PIECE_GAP_MM)];
        let outline: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / n as f64;
                [centre[0] + r * t.cos(), centre[1] + r * t.sin()]
            })
            .collect();
        let owner = pattern.panels.len();
        for j in 0..n {
            let edge = Crease {
                a: outline[j],
                b: outline[(j + 1) % n],
                kind: CreaseKind::Boundary,
            };
            pattern.creases.push(edge);
            cut_edges.push((edge, owner));
        }
        pattern.panels.push(Panel {
            kind: PanelKind::Cap,
            outline,
        });
    }

    place_sheaths(&mut pattern, params, &geom, options);

    if options.seam_allowance_mm > 0.0 {
        for (edge, owner) in &cut_edges {
            pattern.seam_lines.push(offset_away(edge, pattern.panels[*owner].centroid(), options.seam_allowance_mm));
        }
    }

    pattern.normalize();
    Ok(pattern)
}

fn wall(mut tri: [[f64; 2]; 3]) -> Panel {
    let cross = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
        - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
    if cross < 0.0 {
        tri.swap(1, 2);
    }
    Panel {
        kind: PanelKind::Wall,
        outline: tri.to_vec(),
    }
}

/// One strip per side and panel-side tube, wrapped into rows under the
/// wall strip.
fn place_sheaths(
    pattern: &mut CreasePattern,
    params: &KreslingParams,
    geom: &crate::geometry::SegmentGeometry,
    options: &PatternOptions,
) {
    if options.sheath_ratio_pct <= 0.0 || options.sheath_width_mm <= 0.0 {
        return;
    }
    let n = params.sides as usize;
    let m = params.segments as usize;
    let ratio = options.sheath_ratio_pct / 100.0;
    let strips = std::iter::repeat_n((EdgeClass::Side, geom.side), n * (m + 1))
        .chain(std::iter::repeat_n((EdgeClass::Panel, geom.side_g), n * m));
    let wrap = pattern.strip_length_mm.max(1.0);
    let width = options.sheath_width_mm;
    let (mut x, mut y) = (0.0, -PIECE_GAP_MM - width);
    for (edge, length) in strips {
        let length_mm = length * ratio;
        if x > 0.0 && x + length_mm > wrap {
            x = 0.0;
            y -= width + PIECE_GAP_MM / 2.0;
        }
        pattern.sheaths.push(SheathStrip {
            origin: [x, y],
            length_mm,
            width_mm: width,
            edge,
        });
        x += length_mm + PIECE_GAP_MM / 2.0;
    }
}

fn offset_away(edge: &Crease, from: [f64; 2], distance: f64) -> SeamLine {
    let (dx, dy) = (edge.b[0] - edge.a[0], edge.b[1] - edge.a[1]);
    let len = dx.hypot(dy);
    let mut normal = [-dy / len, dx / len];
    let mid = [(edge.a[0] + edge.b[0]) / 2.0, (edge.a[1] + edge.b[1]) / 2.0];
    if normal[0] * (mid[0] - from[0]) + normal[1] * (mid[1] - from[1]) < 0.0 {
        normal = [-normal[0], -normal[1]];
    }
    let off = |p: [f64; 2]| [p[0] + normal[0] * distance, p[1] + normal[1] * distance];
    SeamLine {
        a: off(edge.a),
        b: off(edge.b),
    }
}

/// SVG rendering switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgStyle {
    pub stroke_width_mm: f64,
    pub include_sheaths: bool,
    pub include_seam_allowance: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            stroke_width_mm: 0.5,
            include_sheaths: true,
            include_seam_allowance: true,
        }
    }
}

/// SVG 1.1 document in millimetre user units. Panels and creases are
/// `<path>` elements, sheaths `<rect>`, seam allowances `<line>`.
pub fn write_svg<W: Write>(
    pattern: &CreasePattern,
    style: &SvgStyle,
    mut w: W,
    header: &[String],
) -> io::Result<()> {
    let (width, height) = (pattern.width_mm, pattern.height_mm);
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#)?;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}mm" height="{height:.3}mm" viewBox="0 0 {width:.3} {height:.3}">"#
    )?;
    for h in header {
        writeln!(w, "<!-- {} -->", h.replace("--", "- -"))?;
    }
    let sw = style.stroke_width_mm;
    writeln!(w, "<style>")?;
    writeln!(w, "  .panel {{ fill: #f2efe6; stroke: none; }}")?;
    writeln!(w, "  .cap {{ fill: #e6eef2; stroke: none; }}")?;
    writeln!(w, "  .mountain {{ fill: none; stroke: #1f4ea0; stroke-width: {sw}; }}")?;
    writeln!(
        w,
        "  .valley {{ fill: none; stroke: #2e8b3e; stroke-width: {sw}; stroke-dasharray: 6 4; }}"
    )?;
    writeln!(w, "  .boundary {{ fill: none; stroke: #000000; stroke-width: {sw}; }}")?;
    writeln!(w, "  .sheath {{ fill: none; stroke: #b0522a; stroke-width: {sw}; }}")?;
    writeln!(
        w,
        "  .seam {{ fill: none; stroke: #888888; stroke-width: {sw}; stroke-dasharray: 1 2; }}"
    )?;
    writeln!(w, "</style>")?;

    writeln!(w, r#"<g id="panels">"#)?;
    for p in &pattern.panels {
        let class = match p.kind {
            PanelKind::Wall => "panel",
            PanelKind::Cap => "cap",
        };
        let mut d = String::new();
        for (i, q) in p.outline.iter().enumerate() {
            d.push_str(if i == 0 { "M " } else { " L " });
            d.push_str(&format!("{:.3} {:.3}", q[0], q[1]));
        }
        writeln!(w, r#"  <path class="{class}" d="{d} Z"/>"#)?;
    }
    writeln!(w, "</g>")?;

    writeln!(w, r#"<g id="creases">"#)?;
    for c in &pattern.creases {
        writeln!(
            w,
            r#"  <path class="{}" d="M {:.3} {:.3} L {:.3} {:.3}"/>"#,
            c.kind.class(),
            c.a[0],
            c.a[1],
            c.b[0],
            c.b[1]
        )?;
    }
    writeln!(w, "</g>")?;

    if style.include_sheaths && !pattern.sheaths.is_empty() {
        writeln!(w, r#"<g id="sheaths">"#)?;
        for s in &pattern.sheaths {
            writeln!(
                w,
                r#"  <rect class="sheath" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
                s.origin[0], s.origin[1], s.length_mm, s.width_mm
            )?;
        }
        writeln!(w, "</g>")?;
    }
    if style.include_seam_allowance && !pattern.seam_lines.is_empty() {
        writeln!(w, r#"<g id="seam-allowance">"#)?;
        for l in &pattern.seam_lines {
            writeln!(
                w,
                r#"  <line class="seam" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                l.a[0], l.a[1], l.b[0], l.b[1]
            )?;
        }
        writeln!(w, "</g>")?;
    }
    writeln!(w, "</svg>")
}
