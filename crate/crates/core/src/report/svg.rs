//! SVG spectral portraits: ε-contours, the unit circle and eigenvalues.

use std::fmt::Write;

use crate::matrix::C64;
use crate::pseudospectrum::{ContourSet, GridSpec};

const PANEL: f64 = 480.0;
const MARGIN: f64 = 44.0;
const LEGEND_W: f64 = 120.0;

/// Colour per contour level, cycled when there are more levels.
const PALETTE: [&str; 8] = [
    "#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725",
];

/// One panel of a portrait.
#[derive(Debug, Clone, Copy)]
pub struct Panel<'a> {
    pub title: &'a str,
    pub contours: &'a ContourSet,
    pub eigenvalues: &'a [C64],
}

/// Maps complex coordinates into a square panel with equal aspect ratio.
struct Frame {
    grid: GridSpec,
    scale: f64,
    ox: f64,
    oy: f64,
}

impl Frame {
    fn new(grid: &GridSpec, x0: f64) -> Self {
        let w = grid.re_max - grid.re_min;
        let h = grid.im_max - grid.im_min;
        let scale = PANEL / w.max(h);
        Self {
            grid: *grid,
            scale,
            ox: x0 + MARGIN + (PANEL - w * scale) / 2.0,
            oy: MARGIN + (PANEL - h * scale) / 2.0,
        }
    }

    fn x(&self, re: f64) -> f64 {
        self.ox + (re - self.grid.re_min) * self.scale
    }

    fn y(&self, im: f64) -> f64 {
        self.oy + (self.grid.im_max - im) * self.scale
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn level_label(eps: f64) -> String {
    let e = eps.log10();
    if (e - e.round()).abs() < 1e-9 {
        format!("1e{}", e.round() as i32)
    } else {
        format!("{eps:.3e}")
    }
}

fn draw_panel(out: &mut String, panel: &Panel, grid: &GridSpec, x0: f64) {
    let f = Frame::new(grid, x0);
    let (left, right) = (f.x(grid.re_min), f.x(grid.re_max));
    let (top, bottom) = (f.y(grid.im_max), f.y(grid.im_min));
    let _ = writeln!(out, "<g class=\"panel\">");
    let _ = writeln!(
        out,
        "<text class=\"title\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        (left + right) / 2.0,
        top - 14.0,
        escape(panel.title)
    );
    let _ = writeln!(
        out,
        "<rect class=\"frame\" x=\"{left:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#888\"/>",
        right - left,
        bottom - top
    );
    if grid.im_min <= 0.0 && grid.im_max >= 0.0 {
        let y = f.y(0.0);
        let _ = writeln!(
            out,
            "<line class=\"axis\" x1=\"{left:.2}\" y1=\"{y:.2}\" x2=\"{right:.2}\" y2=\"{y:.2}\" stroke=\"#ccc\"/>"
        );
    }
    if grid.re_min <= 0.0 && grid.re_max >= 0.0 {
        let x = f.x(0.0);
        let _ = writeln!(
            out,
            "<line class=\"axis\" x1=\"{x:.2}\" y1=\"{top:.2}\" x2=\"{x:.2}\" y2=\"{bottom:.2}\" stroke=\"#ccc\"/>"
        );
    }
    for (x, anchor, re) in [(left, "start", grid.re_min), (right, "end", grid.re_max)] {
        let _ = writeln!(
            out,
            "<text class=\"tick\" x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"{anchor}\" font-size=\"11\">{re:.3}</text>",
            bottom + 14.0
        );
    }
    for (y, im) in [(bottom, grid.im_min), (top + 10.0, grid.im_max)] {
        let _ = writeln!(
            out,
            "<text class=\"tick\" x=\"{:.2}\" y=\"{y:.2}\" text-anchor=\"end\" font-size=\"11\">{im:.3}i</text>",
            left - 4.0
        );
    }
    let _ = writeln!(
        out,
        "<circle class=\"unit-circle\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>",
        f.x(0.0),
        f.y(0.0),
        f.scale
    );
    for (k, (level, lines)) in panel.contours.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for line in lines {
            let mut d = String::new();
            for (idx, p) in line.points.iter().enumerate() {
                let cmd = if idx == 0 { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{:.2} {:.2} ", f.x(p.re), f.y(p.im));
            }
            if line.closed {
                d.push('Z');
            }
            let _ = writeln!(
                out,
                "<path class=\"contour\" data-level=\"{level:e}\" d=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.2\"/>",
                d.trim_end()
            );
        }
    }
    for z in panel.eigenvalues {
        if grid.contains(*z) {
            let _ = writeln!(
                out,
                "<circle class=\"eigenvalue\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#000\"/>",
                f.x(z.re),
                f.y(z.im)
            );
        }
    }
    let _ = writeln!(out, "</g>");
}

fn draw_legend(out: &mut String, levels: &[f64], x0: f64) {
    let _ = writeln!(out, "<g class=\"legend\" font-size=\"12\">");
    let _ = writeln!(out, "<text x=\"{x0:.2}\" y=\"{:.2}\">ε levels</text>", MARGIN);
    for (k, eps) in levels.iter().enumerate() {
        let y = MARGIN + 20.0 + 18.0 * k as f64;
        let colour = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            out,
            "<line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            y - 4.0,
            x0 + 22.0,
            y - 4.0
        );
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{y:.2}\">{}</text>", x0 + 28.0, level_label(*eps));
    }
    let y = MARGIN + 20.0 + 18.0 * levels.len() as f64;
    let _ = writeln!(
        out,
        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#000\"/><text x=\"{:.2}\" y=\"{y:.2}\">eigenvalue</text>",
        x0 + 11.0,
        y - 4.0,
        x0 + 28.0
    );
    let y = y + 18.0;
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/><text x=\"{:.2}\" y=\"{y:.2}\">|z| = 1</text>",
        y - 4.0,
        x0 + 22.0,
        y - 4.0,
        x0 + 28.0
    );
    let _ = writeln!(out, "</g>");
}

fn render(panels: &[Panel], grid: &GridSpec) -> String {
    let panel_w = PANEL + 2.0 * MARGIN;
    let width = panel_w * panels.len() as f64 + LEGEND_W;
    let height = PANEL + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>");
    for (k, panel) in panels.iter().enumerate() {
        draw_panel(&mut out, panel, grid, panel_w * k as f64);
    }
    let levels = panels.first().map(|p| p.contours.levels.as_slice()).unwrap_or(&[]);
    draw_legend(&mut out, levels, panel_w * panels.len() as f64);
    out.push_str("</svg>\n");
    out
}

/// Single-matrix portrait.
pub fn portrait_svg(panel: &Panel, grid: &GridSpec) -> String {
    render(std::slice::from_ref(panel), grid)
}

/// Two portraits side by side on the same axes.
pub fn compare_svg(before: &Panel, after: &Panel, grid: &GridSpec) -> String {
    render(&[*before, *after], grid)
}
