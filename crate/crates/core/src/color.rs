//! Colors in CIELCh and the per-color uncertainty model.
//!
//! Every color carries two Gaussian descriptions: a univariate one over hue,
//! whose spread grows sharply for near-neutral colors, and a bivariate one over
//! its tone `(c, L)` whose covariance follows the CIEDE2000 weighting terms.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{HarmonyError, Result};
use crate::params::HarmonyParams;

/// Wraps any finite angle into `[0, 360)`.
pub fn normalize_degrees(h: f64) -> f64 {
    let w = h.rem_euclid(360.0);
    // rem_euclid can return exactly 360.0 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// A point `(L, c, h)` in CIELCh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Color {
    pub l: f64,
    pub c: f64,
    pub h: f64,
}

impl Color {
    /// Validates ranges and normalizes the hue.
    pub fn new(l: f64, c: f64, h: f64) -> Result<Self> {
        for (name, v) in [("L", l), ("c", c), ("h", h)] {
            if !v.is_finite() {
                return Err(HarmonyError::NonFinite(name));
            }
        }
        check_range("L", l, 0.0, 100.0)?;
        check_range("c", c, 0.0, 100.0)?;
        Ok(Self {
            l,
            c,
            h: normalize_degrees(h),
        })
    }

    pub fn tone(&self) -> Tone {
        Tone { c: self.c, l: self.l }
    }
}

fn check_range(field: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value < min || value > max {
        return Err(HarmonyError::OutOfRange { field, value, min, max });
    }
    Ok(())
}

/// Projection of a color onto the chroma-lightness plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub c: f64,
    pub l: f64,
}

impl Tone {
    pub fn new(c: f64, l: f64) -> Self {
        Self { c, l }
    }

    pub fn as_vector(&self) -> Vector2<f64> {
        Vector2::new(self.c, self.l)
    }
}

/// Gaussian over the hue circle; `var_h` in degrees squared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HueDistribution {
    pub mean_h: f64,
    pub var_h: f64,
}

impl HueDistribution {
    pub fn stddev(&self) -> f64 {
        self.var_h.sqrt()
    }
}

/// Bivariate Gaussian over a tone `(c, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneDistribution {
    /// `[c, L]`
    pub mean: [f64; 2],
    /// Row-major 2x2 covariance over `(c, L)`.
    pub cov: [[f64; 2]; 2],
}

impl ToneDistribution {
    pub fn mean_vector(&self) -> Vector2<f64> {
        Vector2::new(self.mean[0], self.mean[1])
    }

    pub fn cov_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.cov[0][0], self.cov[0][1], self.cov[1][0], self.cov[1][1])
    }

    pub fn tone(&self) -> Tone {
        Tone::new(self.mean[0], self.mean[1])
    }
}

/// Hue rotation term of CIEDE2000 as printed for this model.
///
/// Note: the last cosine uses 65 degrees where CIEDE2000 uses 63 degrees.
pub fn rotation_term(h: f64) -> f64 {
    let h = normalize_degrees(h);
    let cosd = |deg: f64| deg.to_radians().cos();
    1.0 - 0.17 * cosd(h - 30.0) + 0.24 * cosd(2.0 * h) + 0.32 * cosd(3.0 * h + 6.0) - 0.20 * cosd(4.0 * h - 65.0)
}

/// Hue standard deviation `k_h (1 + 0.015 c H_T) + k_N γ² / (c² + γ²)` in degrees.
pub fn hue_stddev(h: f64, c: f64, p: &HarmonyParams) -> f64 {
    let rot = if p.flat_hue_rotation { 1.0 } else { rotation_term(h) };
    let g2 = p.gamma * p.gamma;
    p.k_h * (1.0 + 0.015 * c * rot) + p.k_n * g2 / (c * c + g2)
}

pub fn hue_distribution(color: &Color, p: &HarmonyParams) -> HueDistribution {
    let sd = hue_stddev(color.h, color.c, p);
    HueDistribution {
        mean_h: color.h,
        var_h: sd * sd,
    }
}

/// Returns `(S_c, S_L)`.
pub fn tone_scale_factors(c: f64, l: f64) -> (f64, f64) {
    let dl2 = (l - 50.0) * (l - 50.0);
    let s_l = 1.0 + 0.015 * dl2 / (20.0 + dl2).sqrt();
    let s_c = 1.0 + 0.045 * c;
    (s_c, s_l)
}

pub fn tone_distribution(color: &Color, p: &HarmonyParams) -> ToneDistribution {
    tone_distribution_at(color.tone(), p)
}

/// Tone distribution for an arbitrary `(c, L)` point.
pub fn tone_distribution_at(t: Tone, p: &HarmonyParams) -> ToneDistribution {
    let (s_c, s_l) = tone_scale_factors(t.c, t.l);
    let sc = p.k_c * s_c;
    let sl = p.k_l * s_l;
    ToneDistribution {
        mean: [t.c, t.l],
        cov: [[sc * sc, 0.0], [0.0, sl * sl]],
    }
}
