//! Color harmony evaluation and generation in CIELCh with explicit uncertainty.
//!
//! Colors are judged on two planes. On the hue circle a palette is analog,
//! opposite or triad when every hue agrees with the running fused hue under
//! the corresponding fold. In the chroma-lightness plane a palette is harmonic
//! when its tones are pairwise distinguishable and lie on a line, within the
//! propagated uncertainty of that line.

pub mod color;
pub mod engine;
pub mod error;
pub mod generate;
pub mod hue;
pub mod params;
pub mod srgb;
pub mod tone;

pub use color::{Color, HueDistribution, Tone, ToneDistribution};
pub use engine::{evaluate_palette, suggest_next, HarmonyReport, Session, Suggestion};
pub use error::{HarmonyError, Result};
pub use generate::{generate_line_palette, GenHuePattern, GenResult, GenSpec};
pub use hue::{evaluate_hue_harmony, HuePattern};
pub use params::HarmonyParams;
pub use tone::{evaluate_tone_harmony, ToneLine, TonePattern};
