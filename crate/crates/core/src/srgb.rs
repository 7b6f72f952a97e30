//! sRGB (D65, 2° observer) to CIELCh conversion and constant-hue gamut mapping.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::color::{normalize_degrees, Color};

// D65 reference white, 2° observer.
const WHITE_X: f64 = 0.95047;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.08883;

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

// exact inverse of RGB_TO_XYZ, so that sRGB corners map back onto the cube
fn xyz_to_rgb() -> &'static [[f64; 3]; 3] {
    static INV: OnceLock<[[f64; 3]; 3]> = OnceLock::new();
    INV.get_or_init(|| {
        let m = Matrix3::from_fn(|i, j| RGB_TO_XYZ[i][j]);
        let inv = m.try_inverse().expect("sRGB matrix is invertible");
        std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)]))
    })
}

const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

/// Slack on nonlinear channel values when deciding gamut membership.
const GAMUT_SLACK: f64 = 1e-7;
/// Chroma tolerance of the gamut boundary bisection.
pub const GAMUT_TOLERANCE: f64 = 1e-3;

/// Unbounded CIELCh coordinates, used where chroma may exceed 100.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lch {
    pub l: f64,
    pub c: f64,
    pub h: f64,
}

impl From<Color> for Lch {
    fn from(c: Color) -> Self {
        Lch { l: c.l, c: c.c, h: c.h }
    }
}

/// Result of converting an 8-bit sRGB triple into an engine color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrgbConversion {
    pub color: Color,
    /// The exact chroma, before clamping to 100.
    pub raw_chroma: f64,
    pub chroma_clamped: bool,
}

/// Result of rendering a color to 8-bit sRGB.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SrgbRendering {
    pub rgb: [u8; 3],
    /// False when the color had to be pulled toward gray to fit sRGB.
    pub in_gamut: bool,
}

fn decode(u: f64) -> f64 {
    if u <= 0.04045 {
        u / 12.92
    } else {
        ((u + 0.055) / 1.055).powf(2.4)
    }
}

fn encode(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

fn mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let f3 = f * f * f;
    if f3 > EPSILON {
        f3
    } else {
        (116.0 * f - 16.0) / KAPPA
    }
}

/// Converts nonlinear sRGB in `[0, 1]` to CIELCh.
pub fn srgb_unit_to_lch(rgb: [f64; 3]) -> Lch {
    let lin = rgb.map(decode);
    let [x, y, z] = mul(&RGB_TO_XYZ, lin);
    let fx = lab_f(x / WHITE_X);
    let fy = lab_f(y / WHITE_Y);
    let fz = lab_f(z / WHITE_Z);
    let l = 116.0 * fy - 16.0;
    let a = 500.0 * (fx - fy);
    let b = 200.0 * (fy - fz);
    let c = a.hypot(b);
    let h = if c < 1e-12 {
        0.0
    } else {
        normalize_degrees(b.atan2(a).to_degrees())
    };
    Lch { l: l.max(0.0), c, h }
}

/// Converts CIELCh to nonlinear sRGB; the result may fall outside `[0, 1]`.
pub fn lch_to_srgb_unit(lch: Lch) -> [f64; 3] {
    let (sin, cos) = lch.h.to_radians().sin_cos();
    let a = lch.c * cos;
    let b = lch.c * sin;
    let fy = (lch.l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let y = if lch.l > KAPPA * EPSILON {
        fy * fy * fy
    } else {
        lch.l / KAPPA
    };
    let xyz = [lab_f_inv(fx) * WHITE_X, y * WHITE_Y, lab_f_inv(fz) * WHITE_Z];
    mul(xyz_to_rgb(), xyz).map(encode_signed)
}

// The transfer curve is odd-extended so out-of-gamut negatives stay ordered.
fn encode_signed(v: f64) -> f64 {
    if v < 0.0 {
        -encode(-v)
    } else {
        encode(v)
    }
}

pub fn srgb8_to_lch(rgb: [u8; 3]) -> Lch {
    srgb_unit_to_lch(rgb.map(|u| f64::from(u) / 255.0))
}

pub fn is_in_gamut(lch: Lch) -> bool {
    lch_to_srgb_unit(lch)
        .iter()
        .all(|&u| (-GAMUT_SLACK..=1.0 + GAMUT_SLACK).contains(&u))
}

/// Largest in-gamut chroma at `(L, h)`, found by bisection to [`GAMUT_TOLERANCE`].
///
/// The returned value is always on the in-gamut side of the boundary.
pub fn max_chroma(l: f64, h: f64, upper: f64) -> f64 {
    if is_in_gamut(Lch { l, c: upper, h }) {
        return upper;
    }
    let (mut lo, mut hi) = (0.0, upper);
    if !is_in_gamut(Lch { l, c: 0.0, h }) {
        return 0.0;
    }
    while hi - lo > GAMUT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if is_in_gamut(Lch { l, c: mid, h }) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// sRGB to engine color; chroma above 100 is clamped and flagged.
pub fn srgb_to_color(r: u8, g: u8, b: u8) -> SrgbConversion {
    let lch = srgb8_to_lch([r, g, b]);
    let clamped = lch.c > 100.0;
    let color = Color {
        l: lch.l.clamp(0.0, 100.0),
        c: lch.c.min(100.0),
        h: lch.h,
    };
    SrgbConversion {
        color,
        raw_chroma: lch.c,
        chroma_clamped: clamped,
    }
}

fn quantize(u: f64) -> u8 {
    (u.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Renders any LCh value, reducing chroma at constant `(L, h)` when needed.
pub fn lch_to_srgb8(lch: Lch) -> SrgbRendering {
    if is_in_gamut(lch) {
        return SrgbRendering {
            rgb: lch_to_srgb_unit(lch).map(quantize),
            in_gamut: true,
        };
    }
    let c = max_chroma(lch.l, lch.h, lch.c);
    SrgbRendering {
        rgb: lch_to_srgb_unit(Lch { c, ..lch }).map(quantize),
        in_gamut: false,
    }
}

pub fn color_to_srgb(color: &Color) -> SrgbRendering {
    lch_to_srgb8((*color).into())
}

/// Formats an 8-bit triple as `#rrggbb`.
pub fn to_hex(rgb: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}
