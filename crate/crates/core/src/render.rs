//! SVG rendering of a path over its keyboard. The stroke changes colour from
//! green at the first point to yellow at the last.

use std::fmt::Write;

use crate::layout::KeyboardLayout;
use crate::path::Path;

pub const VIEW_WIDTH: f64 = 1000.0;
pub const VIEW_HEIGHT: f64 = 333.0;
pub const START_COLOR: [u8; 3] = [0x00, 0xa0, 0x00];
pub const END_COLOR: [u8; 3] = [0xe0, 0xc0, 0x00];

/// Colour at time `t` in `[0, 1]`, as `#rrggbb`.
pub fn stroke_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c: Vec<u8> = START_COLOR
        .iter()
        .zip(END_COLOR)
        .map(|(&a, b)| (a as f64 + (b as f64 - a as f64) * t).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn sx(x: f64) -> f64 {
    x * VIEW_WIDTH
}

fn sy(y: f64) -> f64 {
    y * VIEW_WIDTH
}

/// One `<line class="seg">` per consecutive point pair.
pub fn render_svg(layout: &KeyboardLayout, path: &Path) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW_WIDTH} {VIEW_HEIGHT}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#fafafa"/>"##);
    for &c in layout.alphabet() {
        let Ok(k) = layout.key(c) else { continue };
        let _ = writeln!(
            s,
            r##"<rect class="key" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#ffffff" stroke="#999999"/>"##,
            sx(k.center_x - k.width / 2.0),
            sy(k.center_y - k.height / 2.0),
            sx(k.width),
            sy(k.height)
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="28" text-anchor="middle" dominant-baseline="central" fill="#555555">{c}</text>"##,
            sx(k.center_x),
            sy(k.center_y)
        );
    }
    let segments = path.points.len().saturating_sub(1);
    for (i, w) in path.points.windows(2).enumerate() {
        let t = if segments > 1 { i as f64 / (segments - 1) as f64 } else { 0.0 };
        let _ = writeln!(
            s,
            r#"<line class="seg" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="6" stroke-linecap="round"/>"#,
            sx(w[0].x),
            sy(w[0].y),
            sx(w[1].x),
            sy(w[1].y),
            stroke_color(t)
        );
    }
    s.push_str("</svg>\n");
    s
}
