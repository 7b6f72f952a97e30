//! Color token parsing and the versioned JSON documents shared by the CLI and
//! the HTTP service.

use chromaharmony::engine::{ColorDiagnostics, HarmonyReport, Suggestion};
use chromaharmony::generate::{GenResult, GenSpec, RealizedColor};
use chromaharmony::hue::HueCheck;
use chromaharmony::srgb::{color_to_srgb, srgb_to_color, to_hex};
use chromaharmony::tone::ToneFailure;
use chromaharmony::{Color, HuePattern, TonePattern};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON Schema for [`ReportJson`].
pub const REPORT_SCHEMA: &str = include_str!("../schemas/report.schema.json");
/// JSON Schema for [`PaletteJson`].
pub const PALETTE_SCHEMA: &str = include_str!("../schemas/palette.schema.json");

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid color {token:?}: {reason}")]
pub struct ColorParseError {
    pub token: String,
    pub reason: String,
}

impl ColorParseError {
    fn new(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            token: token.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsedColor {
    pub color: Color,
    /// Set when an sRGB input exceeded chroma 100 and was clamped.
    pub chroma_clamped: bool,
}

/// Parses `#RRGGBB` or `lch(L, c, h)`.
pub fn parse_color(token: &str) -> Result<ParsedColor, ColorParseError> {
    let s = token.trim();
    if let Some(hex) = s.strip_prefix('#') {
        if hex.len() != 6 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(ColorParseError::new(token, "expected #RRGGBB"));
        }
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).expect("validated hex digits");
        let conv = srgb_to_color(byte(0), byte(2), byte(4));
        return Ok(ParsedColor {
            color: conv.color,
            chroma_clamped: conv.chroma_clamped,
        });
    }
    let lower = s.to_ascii_lowercase();
    if let Some(body) = lower.strip_prefix("lch(").and_then(|b| b.strip_suffix(')')) {
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(ColorParseError::new(token, "expected lch(L, c, h)"));
        }
        let mut vals = [0.0; 3];
        for (v, part) in vals.iter_mut().zip(&parts) {
            *v = part
                .parse()
                .map_err(|_| ColorParseError::new(token, format!("{part:?} is not a number")))?;
        }
        return lch_triple(token, vals);
    }
    Err(ColorParseError::new(token, "expected #RRGGBB or lch(L, c, h)"))
}

fn lch_triple(token: &str, [l, c, h]: [f64; 3]) -> Result<ParsedColor, ColorParseError> {
    Color::new(l, c, h)
        .map(|color| ParsedColor {
            color,
            chroma_clamped: false,
        })
        .map_err(|e| ColorParseError::new(token, e.to_string()))
}

/// Parses a JSON color: a token string or an `[L, c, h]` array.
pub fn parse_color_value(v: &Value) -> Result<ParsedColor, ColorParseError> {
    match v {
        Value::String(s) => parse_color(s),
        Value::Array(items) if items.len() == 3 => {
            let token = v.to_string();
            let mut vals = [0.0; 3];
            for (slot, item) in vals.iter_mut().zip(items) {
                *slot = item
                    .as_f64()
                    .ok_or_else(|| ColorParseError::new(&token, "array entries must be numbers"))?;
            }
            lch_triple(&token, vals)
        }
        other => Err(ColorParseError::new(
            other.to_string(),
            "expected a color string or [L, c, h]",
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineJson {
    pub r: f64,
    pub phi_deg: f64,
    pub cov: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneJson {
    pub min_db: Option<f64>,
    pub d_perp: Option<f64>,
    pub sigma_d_perp: Option<f64>,
    pub inlier: Option<bool>,
    pub accepted: bool,
    pub failure: Option<String>,
    pub ambiguous_with: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorEntryJson {
    pub index: usize,
    pub input_index: usize,
    pub lch: [f64; 3],
    pub hex: String,
    pub in_gamut: bool,
    pub hue_sigma: f64,
    pub hue: Option<HueCheck>,
    pub tone: ToneJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub schema_version: u32,
    pub hue_label: HuePattern,
    pub hue_code: u8,
    pub tone_label: TonePattern,
    pub tone_code: u8,
    pub harmonic: bool,
    pub score: f64,
    pub fused_hue: Option<f64>,
    pub line: Option<LineJson>,
    pub tone_failure: Option<String>,
    pub per_color: Vec<ColorEntryJson>,
}

fn failure_name(f: ToneFailure) -> (&'static str, Option<usize>) {
    match f {
        ToneFailure::Ambiguous { with } => ("ambiguous", Some(with)),
        ToneFailure::Outlier => ("outlier", None),
        ToneFailure::Degenerate => ("degenerate", None),
    }
}

pub fn lch_array(c: &Color) -> [f64; 3] {
    [c.l, c.c, c.h]
}

fn color_entry(index: usize, d: &ColorDiagnostics) -> ColorEntryJson {
    let rendering = color_to_srgb(&d.color);
    let failure = d.tone.failure.map(failure_name);
    ColorEntryJson {
        index,
        input_index: d.input_index,
        lch: lch_array(&d.color),
        hex: to_hex(rendering.rgb),
        in_gamut: rendering.in_gamut,
        hue_sigma: d.hue_sigma,
        hue: d.hue,
        tone: ToneJson {
            min_db: d.tone.min_db,
            d_perp: d.tone.d_perp,
            sigma_d_perp: d.tone.sigma_d_perp,
            inlier: d.tone.inlier,
            accepted: d.tone.accepted,
            failure: failure.map(|f| f.0.to_string()),
            ambiguous_with: failure.and_then(|f| f.1),
        },
    }
}

impl From<&HarmonyReport> for ReportJson {
    fn from(r: &HarmonyReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            hue_label: r.hue_label,
            hue_code: r.hue_label.code(),
            tone_label: r.tone_label,
            tone_code: r.tone_label.code(),
            harmonic: r.harmonic,
            score: r.score,
            fused_hue: r.fused_hue,
            line: r.line.map(|l| LineJson {
                r: l.r,
                phi_deg: l.phi_deg,
                cov: l.cov,
            }),
            tone_failure: r.tone_failure.map(|f| failure_name(f).0.to_string()),
            per_color: r.per_color.iter().enumerate().map(|(i, d)| color_entry(i, d)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwatchJson {
    pub lch: [f64; 3],
    pub hex: String,
}

impl From<&Color> for SwatchJson {
    fn from(c: &Color) -> Self {
        Self {
            lch: lch_array(c),
            hex: to_hex(color_to_srgb(c).rgb),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizedJson {
    pub target: [f64; 3],
    pub lch: [f64; 3],
    pub maha: f64,
    pub snap_distance: f64,
}

impl From<&RealizedColor> for RealizedJson {
    fn from(d: &RealizedColor) -> Self {
        Self {
            target: d.target,
            lch: lch_array(&d.color),
            maha: d.maha,
            snap_distance: d.snap_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaletteJson {
    pub schema_version: u32,
    pub r: f64,
    pub phi_deg: f64,
    pub k: usize,
    pub seed: u64,
    pub pattern: Option<String>,
    pub base_hue: Option<f64>,
    pub colors: Vec<SwatchJson>,
    pub diagnostics: Vec<RealizedJson>,
    /// Null on success, otherwise why the palette is empty.
    pub reason: Option<String>,
}

impl PaletteJson {
    pub fn new(spec: &GenSpec, res: &GenResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            r: spec.r,
            phi_deg: spec.phi,
            k: spec.k,
            seed: spec.seed,
            pattern: res.pattern_used.map(|p| p.name().to_string()),
            base_hue: res.base_hue,
            colors: res.colors.iter().map(SwatchJson::from).collect(),
            diagnostics: res.diagnostics.iter().map(RealizedJson::from).collect(),
            reason: res.failure.map(|f| f.reason().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestionJson {
    pub lch: [f64; 3],
    pub hex: String,
    pub score: f64,
}

impl From<&Suggestion> for SuggestionJson {
    fn from(s: &Suggestion) -> Self {
        Self {
            lch: lch_array(&s.color),
            hex: s.hex.clone(),
            score: s.score,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_hex() {
        let c = parse_color("#808080").unwrap();
        assert!((c.color.l - 53.585).abs() < 0.01);
        assert!(c.color.c < 1e-3);
        assert!(parse_color("#FF0000").unwrap().chroma_clamped);
    }

    #[test]
    fn parses_lch() {
        let c = parse_color("lch(50, 20.5, 370)").unwrap();
        assert_eq!(c.color, Color::new(50.0, 20.5, 10.0).unwrap());
        assert!(parse_color("LCH(1,2,3)").is_ok());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["#GGGGGG", "#12345", "red", "lch(1,2)", "lch(120, 0, 0)", "lch(a,b,c)"] {
            let e = parse_color(bad).unwrap_err();
            assert_eq!(e.token, bad);
        }
    }

    #[test]
    fn parses_json_values() {
        assert!(parse_color_value(&json!("#102030")).is_ok());
        let c = parse_color_value(&json!([40, 30, 200])).unwrap();
        assert_eq!(c.color, Color::new(40.0, 30.0, 200.0).unwrap());
        assert!(parse_color_value(&json!([40, 30])).is_err());
        assert!(parse_color_value(&json!(12)).is_err());
        assert!(parse_color_value(&json!(["a", 1, 2])).is_err());
    }

    #[test]
    fn schemas_are_json() {
        for s in [REPORT_SCHEMA, PALETTE_SCHEMA] {
            let v: Value = serde_json::from_str(s).unwrap();
            assert_eq!(v["type"], "object");
        }
    }
}
