use std::fmt::Write as _;

use num_traits::ToPrimitive;

use super::{int, Diagram, SplittingPath, Width};
use crate::letter::format_word;

fn column(x: &Width, scale: usize) -> usize {
    (x * int(scale))
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(0)
}

fn float(x: &Width) -> f64 {
    x.to_f64().unwrap_or(0.0)
}

/// Text picture of a diagram, `scale` characters per unit of width. `|` marks
/// a subword boundary, `#` a black cell, and `-` the span of a substitution.
pub fn render_ascii(d: &Diagram, scale: usize) -> String {
    let scale = scale.max(2);
    let cols = column(&d.total_width(), scale) + 1;
    let mut out = String::new();
    let bounds: Vec<usize> = d.columns().iter().map(|&k| k * scale).collect();
    for (i, row) in d.rows().iter().enumerate() {
        let mut line = vec![' '; cols];
        for cell in row {
            let (c0, c1) = (column(&cell.x, scale), column(&cell.end(), scale));
            match cell.letter {
                Some(a) => {
                    let text = format_word(&[a]);
                    for (k, ch) in text.chars().take(c1.saturating_sub(c0 + 1)).enumerate() {
                        line[c0 + 1 + k] = ch;
                    }
                }
                None => line[c0 + 1..c1.max(c0 + 1)]
                    .iter_mut()
                    .for_each(|ch| *ch = '#'),
            }
        }
        for &b in &bounds {
            line[b] = '|';
        }
        writeln!(out, "{}", line.into_iter().collect::<String>().trim_end()).unwrap();
        if let Some(l) = d.lines().get(i) {
            let mut under = vec![' '; cols];
            let (c0, c1) = (column(&l.x0, scale), column(&l.x1, scale));
            under[c0..=c1.min(cols - 1)]
                .iter_mut()
                .for_each(|ch| *ch = '-');
            writeln!(out, "{}", under.into_iter().collect::<String>().trim_end()).unwrap();
        }
    }
    out
}

const UNIT: f64 = 40.0;
const ROW: f64 = 28.0;
const GAP: f64 = 10.0;

fn row_top(i: usize) -> f64 {
    i as f64 * (ROW + GAP)
}

/// SVG picture of a diagram. Border letters are gray. A path, if given, is
/// drawn dotted.
pub fn render_svg(d: &Diagram, path: Option<&SplittingPath>) -> String {
    let width = float(&d.total_width()) * UNIT;
    let height = row_top(d.rows().len()) - GAP;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="-2 -2 {vw:.1} {vh:.1}" font-family="monospace" font-size="14">"#,
        w = width + 4.0,
        h = height + 4.0,
        vw = width + 4.0,
        vh = height + 4.0
    )
    .unwrap();
    for (i, row) in d.rows().iter().enumerate() {
        let y = row_top(i);
        for cell in row {
            let x = float(&cell.x) * UNIT;
            let w = float(&cell.width) * UNIT;
            let fill = match (cell.letter, cell.border) {
                (None, _) => "black",
                (Some(_), true) => "#d0d0d0",
                (Some(_), false) => "white",
            };
            writeln!(out, r#"<rect x="{x:.3}" y="{y:.1}" width="{w:.3}" height="{ROW}" fill="{fill}" stroke="gray"/>"#).unwrap();
            if let Some(a) = cell.letter {
                let text = format_word(&[a]).replace('&', "&amp;").replace('<', "&lt;");
                writeln!(
                    out,
                    r#"<text x="{:.3}" y="{:.1}" text-anchor="middle">{text}</text>"#,
                    x + w / 2.0,
                    y + ROW * 0.65
                )
                .unwrap();
            }
        }
        if let Some(l) = d.lines().get(i) {
            let ly = y + ROW + GAP / 2.0;
            writeln!(
                out,
                r#"<line x1="{:.3}" y1="{ly:.1}" x2="{:.3}" y2="{ly:.1}" stroke="crimson" stroke-width="2"/>"#,
                float(&l.x0) * UNIT,
                float(&l.x1) * UNIT
            )
            .unwrap();
        }
    }
    for &k in d.columns() {
        let x = k as f64 * UNIT;
        writeln!(out, r#"<line x1="{x:.1}" y1="0" x2="{x:.1}" y2="{height:.1}" stroke="royalblue" stroke-width="2"/>"#).unwrap();
    }
    if let Some(p) = path {
        let mut points = Vec::new();
        for seg in &p.segments {
            let x = float(&seg.x) * UNIT;
            points.push(format!("{x:.3},{:.1}", row_top(seg.top)));
            points.push(format!("{x:.3},{:.1}", row_top(seg.bottom) + ROW));
        }
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="darkgreen" stroke-width="2" stroke-dasharray="3,3"/>"#,
            points.join(" ")
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
