//! Text, ANSI and PNG renderings of palettes and reports.

use chromaharmony::srgb::{color_to_srgb, to_hex};
use chromaharmony::Color;
use image::{ImageFormat, Rgb, RgbImage};
use std::fmt::Write as _;
use std::io::Cursor;

use crate::wire::ReportJson;

pub const SWATCH: u32 = 64;
const BACKGROUND: Rgb<u8> = Rgb([128, 128, 128]);

pub fn swatch_line(c: &Color) -> String {
    let hex = to_hex(color_to_srgb(c).rgb);
    format!("{hex}  lch({:.2}, {:.2}, {:.2})", c.l, c.c, c.h)
}

pub fn ansi_line(c: &Color) -> String {
    let [r, g, b] = color_to_srgb(c).rgb;
    format!("\x1b[48;2;{r};{g};{b}m      \x1b[0m {}", swatch_line(c))
}

pub fn palette_text(colors: &[Color], ansi: bool) -> String {
    let mut out = String::new();
    for c in colors {
        let line = if ansi { ansi_line(c) } else { swatch_line(c) };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn report_text(r: &ReportJson, colors: &[Color], ansi: bool) -> String {
    let mut out = String::new();
    let verdict = if r.harmonic { "harmonic" } else { "not harmonic" };
    let _ = writeln!(out, "{verdict} (score {:.1}/10)", r.score);
    let _ = writeln!(out, "hue:  {} ({})", r.hue_label.name(), r.hue_code);
    let _ = writeln!(out, "tone: {} ({})", r.tone_label.name(), r.tone_code);
    if let Some(h) = r.fused_hue {
        let _ = writeln!(out, "fused hue: {h:.2}");
    }
    if let Some(l) = &r.line {
        let _ = writeln!(out, "line: r = {:.3}, phi = {:.3} deg", l.r, l.phi_deg);
    }
    if let Some(f) = &r.tone_failure {
        let _ = writeln!(out, "tone failure: {f}");
    }
    out.push_str(&palette_text(colors, ansi));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Layout {
    #[default]
    Strip,
    /// Disc split into equal sectors; only used for exactly three colors.
    Circle,
}

/// One band per color, left to right.
pub fn palette_image(colors: &[Color], layout: Layout) -> RgbImage {
    let rgbs: Vec<Rgb<u8>> = colors.iter().map(|c| Rgb(color_to_srgb(c).rgb)).collect();
    if layout == Layout::Circle && rgbs.len() == 3 {
        return sector_disc(&rgbs);
    }
    let w = SWATCH * rgbs.len().max(1) as u32;
    RgbImage::from_fn(w, SWATCH, |x, _| {
        rgbs.get((x / SWATCH) as usize).copied().unwrap_or(BACKGROUND)
    })
}

fn sector_disc(rgbs: &[Rgb<u8>]) -> RgbImage {
    let size = SWATCH * 3;
    let centre = size as f64 / 2.0;
    let radius = centre - 4.0;
    let n = rgbs.len() as f64;
    RgbImage::from_fn(size, size, |x, y| {
        let dx = x as f64 + 0.5 - centre;
        let dy = centre - (y as f64 + 0.5);
        if dx.hypot(dy) > radius {
            return BACKGROUND;
        }
        let a = dy.atan2(dx).to_degrees().rem_euclid(360.0);
        let idx = ((a / (360.0 / n)) as usize).min(rgbs.len() - 1);
        rgbs[idx]
    })
}

pub fn png_bytes(colors: &[Color], layout: Layout) -> Vec<u8> {
    let mut buf = Cursor::new(Vec::new());
    palette_image(colors, layout)
        .write_to(&mut buf, ImageFormat::Png)
        .expect("png encoding into memory");
    buf.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(l: f64, ch: f64, h: f64) -> Color {
        Color::new(l, ch, h).unwrap()
    }

    #[test]
    fn strip_dimensions() {
        let img = palette_image(&[c(50.0, 20.0, 0.0), c(60.0, 20.0, 90.0)], Layout::Circle);
        assert_eq!(img.dimensions(), (128, 64));
        assert_ne!(img.get_pixel(0, 0), img.get_pixel(127, 63));
    }

    #[test]
    fn three_colors_make_a_disc() {
        let cols = [c(50.0, 40.0, 0.0), c(60.0, 40.0, 120.0), c(70.0, 40.0, 240.0)];
        assert_eq!(palette_image(&cols, Layout::Strip).dimensions(), (192, 64));
        let img = palette_image(&cols, Layout::Circle);
        assert_eq!(img.dimensions(), (192, 192));
        assert_eq!(*img.get_pixel(0, 0), BACKGROUND);
        let expect = |i: usize| Rgb(color_to_srgb(&cols[i]).rgb);
        assert_eq!(*img.get_pixel(150, 80), expect(0));
        assert_eq!(*img.get_pixel(30, 80), expect(1));
        assert_eq!(*img.get_pixel(110, 170), expect(2));
    }

    #[test]
    fn png_signature() {
        let bytes = png_bytes(&[c(50.0, 0.0, 0.0)], Layout::Strip);
        assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");
    }

    #[test]
    fn ansi_has_escape() {
        let s = ansi_line(&c(50.0, 0.0, 0.0));
        assert!(s.starts_with("\x1b[48;2;"));
        assert!(s.contains("#777777"));
    }
}
