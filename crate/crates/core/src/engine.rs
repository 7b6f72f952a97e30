//! Combined evaluation, incremental sessions and next-color suggestions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::color::{hue_stddev, normalize_degrees, Color};
use crate::error::{HarmonyError, Result};
use crate::generate::clip_to_tone_square;
use crate::hue::{HueCheck, HuePattern, HueState};
use crate::params::HarmonyParams;
use crate::srgb::{lch_to_srgb8, srgb_to_color, to_hex, Lch};
use crate::tone::{ToneCheck, ToneFailure, ToneLine, TonePattern, ToneState};

/// Fitted tone line as reported at interfaces (angle in degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineReport {
    pub r: f64,
    pub phi_deg: f64,
    /// Covariance over `(r, phi_deg)`.
    pub cov: [[f64; 2]; 2],
}

impl From<&ToneLine> for LineReport {
    fn from(line: &ToneLine) -> Self {
        let c = line.cov_degrees();
        Self {
            r: line.r,
            phi_deg: line.phi_degrees(),
            cov: [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorDiagnostics {
    /// Position of this color in the caller's input.
    pub input_index: usize,
    pub color: Color,
    pub hue_sigma: f64,
    /// Check against the fused hue of the reported pattern; absent for the
    /// seed color and for colors after that pattern failed.
    pub hue: Option<HueCheck>,
    pub tone: ToneCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonyReport {
    pub hue_label: HuePattern,
    pub tone_label: TonePattern,
    pub harmonic: bool,
    /// Heuristic 0-10 summary of the tightest gate margin; not part of the model.
    pub score: f64,
    pub fused_hue: Option<f64>,
    pub line: Option<LineReport>,
    pub tone_failure: Option<ToneFailure>,
    pub per_color: Vec<ColorDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
struct ColorRecord {
    input_index: usize,
    color: Color,
    hue: Vec<(HuePattern, Option<HueCheck>)>,
    tone: ToneCheck,
}

#[derive(Debug, Clone, PartialEq)]
struct Snapshot {
    hue: HueState,
    tone: ToneState,
}

/// An ordered palette evaluated one color at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    params: HarmonyParams,
    hue: HueState,
    tone: ToneState,
    records: Vec<ColorRecord>,
    history: Vec<Snapshot>,
}

impl Session {
    pub fn new(params: HarmonyParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            hue: HueState::new(),
            tone: ToneState::new(),
            records: Vec::new(),
            history: Vec::new(),
        })
    }

    pub fn params(&self) -> &HarmonyParams {
        &self.params
    }

    pub fn colors(&self) -> Vec<Color> {
        self.records.iter().map(|r| r.color).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn hue_state(&self) -> &HueState {
        &self.hue
    }

    pub fn tone_state(&self) -> &ToneState {
        &self.tone
    }

    pub fn is_harmonic(&self) -> bool {
        !self.is_empty() && self.hue.label() != HuePattern::NoHarmony && self.tone.label() != TonePattern::NoHarmony
    }

    /// Appends a color. Disharmonious colors are kept and reported.
    pub fn add_color(&mut self, color: Color) -> HarmonyReport {
        let index = self.records.len();
        self.push_indexed(color, index);
        self.report()
    }

    fn push_indexed(&mut self, color: Color, input_index: usize) {
        self.history.push(Snapshot {
            hue: self.hue.clone(),
            tone: self.tone.clone(),
        });
        let hue = self.hue.push(&color, &self.params);
        let tone = self.tone.push(&color, &self.params);
        self.records.push(ColorRecord {
            input_index,
            color,
            hue,
            tone,
        });
    }

    /// Removes the most recent color, restoring the previous state exactly.
    pub fn undo(&mut self) -> Option<Color> {
        let snap = self.history.pop()?;
        self.hue = snap.hue;
        self.tone = snap.tone;
        self.records.pop().map(|r| r.color)
    }

    pub fn report(&self) -> HarmonyReport {
        let p = &self.params;
        let hue_label = self.hue.label();
        let tone_label = self.tone.label();
        let shown = if hue_label == HuePattern::NoHarmony {
            HuePattern::Analog
        } else {
            hue_label
        };
        let per_color: Vec<ColorDiagnostics> = self
            .records
            .iter()
            .map(|r| ColorDiagnostics {
                input_index: r.input_index,
                color: r.color,
                hue_sigma: hue_stddev(r.color.h, r.color.c, p),
                hue: r.hue.iter().find(|(pat, _)| *pat == shown).and_then(|(_, c)| *c),
                tone: r.tone,
            })
            .collect();

        let mut worst: f64 = 1.0;
        for d in &per_color {
            if let Some(h) = d.hue {
                worst = worst.min((p.hue_db_threshold - h.db) / p.hue_db_threshold);
            }
            if let Some(db) = d.tone.min_db {
                worst = worst.min((db - p.ambiguity_db_threshold) / p.ambiguity_db_threshold);
            }
            if let (Some(dp), Some(sd)) = (d.tone.d_perp, d.tone.sigma_d_perp) {
                worst = worst.min((p.t_line - (dp - 2.0 * sd)) / p.t_line);
            }
        }
        let harmonic = self.is_harmonic();
        let mut score = 10.0 * (worst.clamp(-1.0, 1.0) + 1.0) / 2.0;
        if !harmonic {
            score = score.min(5.0);
        }
        HarmonyReport {
            hue_label,
            tone_label,
            harmonic,
            score,
            fused_hue: self.hue.fused().map(|f| f.h_hat),
            line: self.tone.line().map(LineReport::from),
            tone_failure: self.tone.failure(),
            per_color,
        }
    }
}

/// Evaluates an ordered palette on both planes.
pub fn evaluate_palette(colors: &[Color], params: &HarmonyParams) -> Result<HarmonyReport> {
    if colors.is_empty() {
        return Err(HarmonyError::EmptyPalette);
    }
    let mut session = Session::new(*params)?;
    for c in colors {
        session.add_color(*c);
    }
    Ok(session.report())
}

/// Evaluates after ordering colors by decreasing weight (e.g. area), ties kept
/// in input order. `per_color[..].input_index` maps back to the input.
pub fn evaluate_palette_weighted(colors: &[Color], weights: &[f64], params: &HarmonyParams) -> Result<HarmonyReport> {
    if colors.is_empty() {
        return Err(HarmonyError::EmptyPalette);
    }
    if weights.len() != colors.len() {
        return Err(HarmonyError::LengthMismatch(colors.len(), weights.len()));
    }
    let mut order: Vec<usize> = (0..colors.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let mut session = Session::new(*params)?;
    for i in order {
        session.push_indexed(colors[i], i);
    }
    Ok(session.report())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub color: Color,
    pub hex: String,
    pub score: f64,
}

/// Number of raw candidates drawn per suggestion request.
const SUGGESTION_CANDIDATES: usize = 600;
/// Weight of the gate-margin term; the rest goes to the inclination prior.
const MARGIN_WEIGHT: f64 = 0.7;

/// Preference for a tone line by inclination: 0 at φ = 90°, rising linearly to
/// 1 at 10° away (modulo 180°).
pub fn inclination_prior(phi_deg: f64) -> f64 {
    let d = (phi_deg - 90.0).rem_euclid(180.0);
    let d = d.min(180.0 - d);
    (d / 10.0).min(1.0)
}

fn session_seed(s: &Session) -> u64 {
    // FNV-1a over the palette bits
    let mut h: u64 = 0xcbf29ce484222325;
    for c in s.colors() {
        for v in [c.l, c.c, c.h] {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x100000001b3);
            }
        }
    }
    h
}

fn lab_distance(a: &Color, b: &Color) -> f64 {
    let (sa, ca) = a.h.to_radians().sin_cos();
    let (sb, cb) = b.h.to_radians().sin_cos();
    let da = a.c * ca - b.c * cb;
    let db = a.c * sa - b.c * sb;
    (da * da + db * db + (a.l - b.l).powi(2)).sqrt()
}

/// Proposes up to `n` sRGB colors that keep the session harmonic when appended.
///
/// Every returned color has been checked by appending it to a copy of the
/// session. Fewer than `n` are returned when not enough candidates pass; an
/// inharmonic session yields none.
pub fn suggest_next(s: &Session, n: usize) -> Result<Vec<Suggestion>> {
    if s.is_empty() {
        return Err(HarmonyError::EmptyPalette);
    }
    if !s.is_harmonic() || n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(session_seed(s));

    // hue targets from every pattern hypothesis still alive
    let mut hue_targets: Vec<(f64, f64)> = Vec::new();
    for pattern in HuePattern::ORDERED {
        let Some(fold) = s.hue_state().fold(pattern) else {
            continue;
        };
        let (true, Some(fused)) = (fold.alive, fold.fused) else {
            continue;
        };
        let i = pattern.divisor().unwrap_or(1);
        let sd = fused.dist.stddev();
        for m in 0..i {
            hue_targets.push((fused.h_hat + f64::from(m) * 360.0 / f64::from(i), sd));
        }
    }
    let segment = s
        .tone_state()
        .line()
        .and_then(|l| clip_to_tone_square(l.r, l.phi_degrees()));

    let mut scored: Vec<Suggestion> = Vec::new();
    for _ in 0..SUGGESTION_CANDIDATES {
        let (h0, sd) = hue_targets[rng.random_range(0..hue_targets.len())];
        let h = normalize_degrees(h0 + Normal::new(0.0, sd).map_or(0.0, |d| d.sample(&mut rng)));
        let (c, l) = match segment {
            Some((foot, dir, lo, hi)) => {
                let t = rng.random_range(lo..=hi);
                let normal = nalgebra::Vector2::new(-dir[1], dir[0]);
                let off = Normal::new(0.0, 1.5).map_or(0.0, |d| d.sample(&mut rng));
                let q = foot + dir * t + normal * off;
                (q[0], q[1])
            }
            None => (rng.random_range(0.0..100.0), rng.random_range(3.0..97.0)),
        };
        if !(0.0..=100.0).contains(&c) || !(0.0..=100.0).contains(&l) {
            continue;
        }
        let rendering = lch_to_srgb8(Lch { l, c, h });
        if !rendering.in_gamut {
            continue;
        }
        let [r8, g8, b8] = rendering.rgb;
        let conv = srgb_to_color(r8, g8, b8);
        if conv.chroma_clamped {
            continue;
        }
        let mut trial = s.clone();
        let report = trial.add_color(conv.color);
        if !report.harmonic {
            continue;
        }
        let prior = report.line.map_or(1.0, |line| inclination_prior(line.phi_deg));
        let margin = (report.score / 10.0).clamp(0.0, 1.0);
        scored.push(Suggestion {
            color: conv.color,
            hex: to_hex(rendering.rgb),
            score: MARGIN_WEIGHT * margin + (1.0 - MARGIN_WEIGHT) * prior,
        });
    }
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut picked: Vec<Suggestion> = Vec::new();
    for cand in scored {
        if picked.len() == n {
            break;
        }
        if picked.iter().all(|q| lab_distance(&q.color, &cand.color) >= 8.0) {
            picked.push(cand);
        }
    }
    Ok(picked)
}
