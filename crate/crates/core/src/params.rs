use serde::{Deserialize, Serialize};

use crate::error::{HarmonyError, Result};

/// Tunable constants of the harmony model.
///
/// Angular parameters are in degrees, tone-plane parameters in CIELCh units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarmonyParams {
    /// Base hue standard deviation (degrees).
    pub k_h: f64,
    /// Extra hue standard deviation granted to neutral colors (degrees).
    pub k_n: f64,
    /// Chroma scale below which a color reads as neutral.
    pub gamma: f64,
    /// Chroma uncertainty scale.
    pub k_c: f64,
    /// Lightness uncertainty scale.
    pub k_l: f64,
    /// Upper bound on the hue Bhattacharyya distance for a harmonic pair.
    pub hue_db_threshold: f64,
    /// Lower bound on the tone Bhattacharyya distance for an unambiguous pair.
    pub ambiguity_db_threshold: f64,
    /// Inlier tolerance for the tone line.
    pub t_line: f64,
    /// Mahalanobis gate used by the palette generator.
    pub maha_threshold: f64,
    /// Minimum separation of generated tone points.
    pub min_sep: f64,
    /// Replace the hue rotation term with 1. Diagnostic hook; off by default.
    pub flat_hue_rotation: bool,
}

impl Default for HarmonyParams {
    fn default() -> Self {
        Self {
            k_h: 3.0,
            k_n: 120.0,
            gamma: 5.0,
            k_c: 2.0,
            k_l: 2.0,
            hue_db_threshold: 3.0,
            ambiguity_db_threshold: 3.0,
            t_line: 5.0,
            maha_threshold: 3.0,
            min_sep: 20.0,
            flat_hue_rotation: false,
        }
    }
}

impl HarmonyParams {
    /// Checks that every numeric field is finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_h", self.k_h),
            ("k_n", self.k_n),
            ("gamma", self.gamma),
            ("k_c", self.k_c),
            ("k_l", self.k_l),
            ("hue_db_threshold", self.hue_db_threshold),
            ("ambiguity_db_threshold", self.ambiguity_db_threshold),
            ("t_line", self.t_line),
            ("maha_threshold", self.maha_threshold),
            ("min_sep", self.min_sep),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(HarmonyError::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        HarmonyParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_non_positive() {
        let p = HarmonyParams {
            t_line: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            p.validate(),
            Err(HarmonyError::InvalidParam { name: "t_line", .. })
        ));
        let p = HarmonyParams {
            gamma: f64::NAN,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn partial_deserialize_fills_defaults() {
        // serde(default) lets callers override a subset of fields.
        let p: HarmonyParams = serde_json_like("k_h", 4.0);
        assert_eq!(p.k_h, 4.0);
        assert_eq!(p.k_n, 120.0);
    }

    fn serde_json_like(key: &str, v: f64) -> HarmonyParams {
        use serde::de::value::{Error, MapDeserializer};
        let map = MapDeserializer::<_, Error>::new(std::iter::once((key, v)));
        HarmonyParams::deserialize(map).unwrap()
    }
}
