//! Hue-circle patterns: analog, opposite and triad.
//!
//! Hues are compared through a folded ("standardized") angular difference so
//! that opposite and triad relations collapse to zero, and the comparison is a
//! Bhattacharyya distance between the two hue Gaussians.

use serde::{Deserialize, Serialize};

use crate::color::{hue_distribution, hue_stddev, normalize_degrees, Color, HueDistribution};
use crate::error::{HarmonyError, Result};
use crate::params::HarmonyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HuePattern {
    NoHarmony = 0,
    Analog = 1,
    Opposite = 2,
    Triad = 3,
}

impl HuePattern {
    /// Patterns in the order they are tried.
    pub const ORDERED: [HuePattern; 3] = [HuePattern::Analog, HuePattern::Opposite, HuePattern::Triad];

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Fold divisor `i`; `None` for [`HuePattern::NoHarmony`].
    pub fn divisor(self) -> Option<u32> {
        match self {
            HuePattern::NoHarmony => None,
            p => Some(p as u32),
        }
    }

    pub fn from_divisor(i: u32) -> Option<Self> {
        match i {
            1 => Some(HuePattern::Analog),
            2 => Some(HuePattern::Opposite),
            3 => Some(HuePattern::Triad),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HuePattern::NoHarmony => "no_harmony",
            HuePattern::Analog => "analog",
            HuePattern::Opposite => "opposite",
            HuePattern::Triad => "triad",
        }
    }
}

/// Central angle between two hues, in `[0, 180]`.
pub fn central_angle(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

fn fold(i: u32, theta: f64) -> f64 {
    let period = 360.0 / f64::from(i);
    f64::from(i) * theta.rem_euclid(period)
}

/// Angular difference after folding the circle `i` times, in `[0, 180 / i]`.
pub fn standardized_diff(i: u32, a: f64, b: f64) -> f64 {
    debug_assert!((1..=3).contains(&i));
    central_angle(fold(i, a), fold(i, b)) / f64::from(i)
}

/// Univariate Bhattacharyya distance with the mean gap replaced by `d`.
pub fn bhattacharyya_1d(var_a: f64, var_b: f64, d: f64) -> f64 {
    let sum = var_a + var_b;
    d * d / (4.0 * sum) + 0.5 * (sum / (2.0 * (var_a * var_b).sqrt())).ln()
}

/// Hue Bhattacharyya distance between two distributions under pattern `i`.
pub fn hue_distance(i: u32, a: &HueDistribution, b: &HueDistribution) -> f64 {
    bhattacharyya_1d(a.var_h, b.var_h, standardized_diff(i, a.mean_h, b.mean_h))
}

pub fn hue_pair_harmonic(i: u32, a: &HueDistribution, b: &HueDistribution, p: &HarmonyParams) -> bool {
    hue_distance(i, a, b) <= p.hue_db_threshold
}

/// Running estimate of a harmonic group's hue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusedHue {
    pub h_hat: f64,
    pub c_hat: f64,
    pub dist: HueDistribution,
}

impl FusedHue {
    pub fn seed(color: &Color, p: &HarmonyParams) -> Self {
        Self {
            h_hat: color.h,
            c_hat: color.c,
            dist: hue_distribution(color, p),
        }
    }
}

/// Inverse-variance fusion of two hue distributions under pattern `i`.
///
/// Means are averaged in the folded space `i (h mod 360/i)` after unwrapping
/// `b` onto the arc within 180° of `a`; the result is mapped back to the
/// representative nearest `a`. The fused variance is recomputed from the
/// fused hue and chroma rather than combined from the inputs.
pub fn fuse_hues(i: u32, a: &HueDistribution, c_a: f64, b: &HueDistribution, c_b: f64, p: &HarmonyParams) -> FusedHue {
    let v_a = 1.0 / a.var_h;
    let v_b = 1.0 / b.var_h;
    let w = v_a + v_b;

    let fa = fold(i, a.mean_h);
    let mut fb = fold(i, b.mean_h);
    if fb - fa > 180.0 {
        fb -= 360.0;
    } else if fa - fb > 180.0 {
        fb += 360.0;
    }
    let folded = ((v_a * fa + v_b * fb) / w).rem_euclid(360.0);

    let period = 360.0 / f64::from(i);
    let base = folded / f64::from(i);
    let h_hat = (0..i)
        .map(|m| normalize_degrees(base + f64::from(m) * period))
        .min_by(|x, y| central_angle(*x, a.mean_h).total_cmp(&central_angle(*y, a.mean_h)))
        .unwrap_or(base);

    let c_hat = (v_a * c_a + v_b * c_b) / w;
    let sd = hue_stddev(h_hat, c_hat, p);
    FusedHue {
        h_hat,
        c_hat,
        dist: HueDistribution {
            mean_h: h_hat,
            var_h: sd * sd,
        },
    }
}

/// Outcome of testing one color against a pattern's fused hue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HueCheck {
    pub std_diff: f64,
    pub db: f64,
    pub harmonic: bool,
}

/// Fold state of one pattern hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternFold {
    pub pattern: HuePattern,
    pub fused: Option<FusedHue>,
    pub alive: bool,
}

impl PatternFold {
    fn new(pattern: HuePattern) -> Self {
        Self {
            pattern,
            fused: None,
            alive: true,
        }
    }

    fn push(&mut self, color: &Color, p: &HarmonyParams) -> Option<HueCheck> {
        if !self.alive {
            return None;
        }
        let i = self.pattern.divisor().expect("pattern folds are never NoHarmony");
        let Some(fused) = self.fused else {
            self.fused = Some(FusedHue::seed(color, p));
            return None;
        };
        let dist = hue_distribution(color, p);
        let std_diff = standardized_diff(i, fused.dist.mean_h, dist.mean_h);
        let db = bhattacharyya_1d(fused.dist.var_h, dist.var_h, std_diff);
        let harmonic = db <= p.hue_db_threshold;
        if harmonic {
            self.fused = Some(fuse_hues(i, &fused.dist, fused.c_hat, &dist, color.c, p));
        } else {
            self.alive = false;
        }
        Some(HueCheck { std_diff, db, harmonic })
    }
}

/// Incremental hue evaluation: one fold per pattern, advanced together.
///
/// The label after any prefix equals the batch result on that prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct HueState {
    folds: Vec<PatternFold>,
    len: usize,
}

impl HueState {
    pub fn new() -> Self {
        Self::with_patterns(&HuePattern::ORDERED)
    }

    /// Restricts evaluation to the given patterns, tried in the given order.
    pub fn with_patterns(patterns: &[HuePattern]) -> Self {
        Self {
            folds: patterns
                .iter()
                .filter(|p| p.divisor().is_some())
                .map(|&p| PatternFold::new(p))
                .collect(),
            len: 0,
        }
    }

    /// Feeds one color; returns the check made by each pattern still alive.
    pub fn push(&mut self, color: &Color, p: &HarmonyParams) -> Vec<(HuePattern, Option<HueCheck>)> {
        self.len += 1;
        self.folds
            .iter_mut()
            .map(|f| {
                let alive = f.alive;
                let check = f.push(color, p);
                (f.pattern, if alive { check } else { None })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn label(&self) -> HuePattern {
        if self.len == 0 {
            return HuePattern::NoHarmony;
        }
        self.folds
            .iter()
            .find(|f| f.alive)
            .map_or(HuePattern::NoHarmony, |f| f.pattern)
    }

    pub fn fold(&self, pattern: HuePattern) -> Option<&PatternFold> {
        self.folds.iter().find(|f| f.pattern == pattern)
    }

    /// Fused hue of the winning pattern.
    pub fn fused(&self) -> Option<FusedHue> {
        let label = self.label();
        self.fold(label).and_then(|f| f.fused)
    }
}

impl Default for HueState {
    fn default() -> Self {
        Self::new()
    }
}

/// Labels an ordered color list, preferring analog, then opposite, then triad.
pub fn evaluate_hue_harmony(colors: &[Color], p: &HarmonyParams) -> Result<HuePattern> {
    evaluate_hue_harmony_with(colors, &HuePattern::ORDERED, p)
}

pub fn evaluate_hue_harmony_with(colors: &[Color], patterns: &[HuePattern], p: &HarmonyParams) -> Result<HuePattern> {
    if colors.is_empty() {
        return Err(HarmonyError::EmptyPalette);
    }
    // Each pattern is an independent pass over the list, as in the batch algorithm.
    for &pattern in patterns {
        let Some(i) = pattern.divisor() else { continue };
        let mut fused = FusedHue::seed(&colors[0], p);
        let mut ok = true;
        for color in &colors[1..] {
            let dist = hue_distribution(color, p);
            if !hue_pair_harmonic(i, &fused.dist, &dist, p) {
                ok = false;
                break;
            }
            fused = fuse_hues(i, &fused.dist, fused.c_hat, &dist, color.c, p);
        }
        if ok {
            return Ok(pattern);
        }
    }
    Ok(HuePattern::NoHarmony)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lch(l: f64, c: f64, h: f64) -> Color {
        Color::new(l, c, h).unwrap()
    }

    fn dist(mean_h: f64, sd: f64) -> HueDistribution {
        HueDistribution { mean_h, var_h: sd * sd }
    }

    #[test]
    fn central_angle_cases() {
        assert_eq!(central_angle(350.0, 10.0), 20.0);
        assert_eq!(central_angle(42.0, 42.0), 0.0);
        assert_eq!(central_angle(0.0, 180.0), 180.0);
    }

    #[test]
    fn standardized_diff_cases() {
        assert!(standardized_diff(2, 10.0, 190.0) < 1e-12);
        assert!(standardized_diff(3, 0.0, 120.0) < 1e-12);
        assert!((standardized_diff(1, 20.0, 50.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn bhattacharyya_1d_cases() {
        assert_eq!(bhattacharyya_1d(7.0, 7.0, 0.0), 0.0);
        let s2: f64 = 13.0;
        assert!((bhattacharyya_1d(s2, s2, 2.0 * s2.sqrt()) - 0.5).abs() < 1e-12);
        let expected = 0.5 * (10009.0f64 / (2.0 * 90000f64.sqrt())).ln();
        let got = bhattacharyya_1d(9.0, 10000.0, 0.0);
        assert!((got - expected).abs() < 1e-12);
        // 0.5 ln(10009 / 600) = 1.40716...
        assert!((got - 1.4072).abs() < 1e-4);
    }

    #[test]
    fn pair_harmonic_cases() {
        let p = HarmonyParams::default();
        let a = dist(100.0, 5.0);
        for i in 1..=3 {
            assert!(hue_pair_harmonic(i, &a, &a, &p));
        }
        // 900 / (4 * 50) = 4.5
        assert!((hue_distance(1, &dist(0.0, 5.0), &dist(30.0, 5.0)) - 4.5).abs() < 1e-12);
        assert!(!hue_pair_harmonic(1, &dist(0.0, 5.0), &dist(30.0, 5.0), &p));

        let neutral = dist(0.0, 123.0);
        let vivid = dist(180.0, 5.0);
        let db = hue_distance(1, &neutral, &vivid);
        assert!((db - 1.790).abs() < 5e-3, "{db}");
        assert!(hue_pair_harmonic(1, &neutral, &vivid, &p));
    }

    #[test]
    fn fusion_midpoints() {
        let p = HarmonyParams::default();
        let f = fuse_hues(1, &dist(10.0, 4.0), 20.0, &dist(30.0, 4.0), 40.0, &p);
        assert!((f.h_hat - 20.0).abs() < 1e-12);
        assert!((f.c_hat - 30.0).abs() < 1e-12);
        let sd = hue_stddev(20.0, 30.0, &p);
        assert!((f.dist.var_h - sd * sd).abs() < 1e-12);
    }

    #[test]
    fn fusion_weight_limit() {
        let p = HarmonyParams::default();
        let f = fuse_hues(1, &dist(10.0, 1e6), 20.0, &dist(70.0, 4.0), 40.0, &p);
        assert!((f.h_hat - 70.0).abs() < 1e-6);
        assert!((f.c_hat - 40.0).abs() < 1e-6);
    }

    #[test]
    fn fusion_across_seam() {
        let p = HarmonyParams::default();
        let f = fuse_hues(1, &dist(350.0, 4.0), 30.0, &dist(10.0, 4.0), 30.0, &p);
        assert!(central_angle(f.h_hat, 0.0) < 1e-9, "{}", f.h_hat);
        let g = fuse_hues(1, &dist(10.0, 4.0), 30.0, &dist(350.0, 4.0), 30.0, &p);
        assert!(central_angle(g.h_hat, 0.0) < 1e-9, "{}", g.h_hat);
    }

    #[test]
    fn fusion_in_folded_space_stays_near_seed() {
        let p = HarmonyParams::default();
        // Opposite pair: 20 and 210 fold to 40 and 60, fused 50 -> hue 25 near the seed.
        let f = fuse_hues(2, &dist(20.0, 4.0), 30.0, &dist(210.0, 4.0), 30.0, &p);
        assert!((f.h_hat - 25.0).abs() < 1e-9, "{}", f.h_hat);
        let g = fuse_hues(3, &dist(250.0, 4.0), 30.0, &dist(10.0, 4.0), 30.0, &p);
        assert!((g.h_hat - 250.0).abs() < 1e-9, "{}", g.h_hat);
    }

    #[test]
    fn analog_example() {
        let p = HarmonyParams::default();
        let colors = [lch(50.0, 40.0, 100.0), lch(60.0, 45.0, 105.0), lch(40.0, 35.0, 95.0)];
        assert_eq!(evaluate_hue_harmony(&colors, &p).unwrap(), HuePattern::Analog);
    }

    #[test]
    fn identical_colors_are_analog() {
        let p = HarmonyParams::default();
        let c = lch(50.0, 60.0, 200.0);
        assert_eq!(evaluate_hue_harmony(&[c, c, c], &p).unwrap(), HuePattern::Analog);
    }

    #[test]
    fn triad_example() {
        let p = HarmonyParams::default();
        let colors = [lch(50.0, 60.0, 0.0), lch(50.0, 60.0, 120.0), lch(50.0, 60.0, 240.0)];
        for c in &colors {
            let sd = hue_stddev(c.h, c.c, &p);
            assert!((4.0..=8.0).contains(&sd), "{sd}");
        }
        assert_eq!(evaluate_hue_harmony(&colors, &p).unwrap(), HuePattern::Triad);
    }

    #[test]
    fn opposite_example() {
        let p = HarmonyParams::default();
        let colors = [lch(50.0, 50.0, 30.0), lch(60.0, 50.0, 210.0)];
        assert_eq!(evaluate_hue_harmony(&colors, &p).unwrap(), HuePattern::Opposite);
    }

    #[test]
    fn single_and_empty() {
        let p = HarmonyParams::default();
        assert_eq!(
            evaluate_hue_harmony(&[lch(10.0, 10.0, 10.0)], &p).unwrap(),
            HuePattern::Analog
        );
        assert_eq!(evaluate_hue_harmony(&[], &p), Err(HarmonyError::EmptyPalette));
    }

    #[test]
    fn state_matches_batch_on_prefixes() {
        let p = HarmonyParams::default();
        let colors = [
            lch(50.0, 60.0, 0.0),
            lch(50.0, 60.0, 120.0),
            lch(50.0, 2.0, 300.0),
            lch(50.0, 60.0, 240.0),
            lch(50.0, 60.0, 90.0),
        ];
        let mut state = HueState::new();
        for n in 1..=colors.len() {
            state.push(&colors[n - 1], &p);
            assert_eq!(state.label(), evaluate_hue_harmony(&colors[..n], &p).unwrap());
        }
    }

    proptest! {
        #[test]
        fn standardized_diff_symmetric_and_bounded(i in 1u32..=3, a in -720.0f64..720.0, b in -720.0f64..720.0) {
            let d = standardized_diff(i, a, b);
            prop_assert!((d - standardized_diff(i, b, a)).abs() < 1e-9);
            prop_assert!(d >= 0.0 && d <= 180.0 / f64::from(i) + 1e-9);
        }

        #[test]
        fn standardized_diff_zero_on_fold(i in 1u32..=3, a in 0.0f64..360.0, m in 0u32..3) {
            let b = a + f64::from(m) * 360.0 / f64::from(i);
            prop_assert!(standardized_diff(i, a, b) < 1e-9);
        }

        #[test]
        fn bhattacharyya_nonnegative(va in 0.01f64..1e4, vb in 0.01f64..1e4, d in 0.0f64..180.0) {
            prop_assert!(bhattacharyya_1d(va, vb, d) >= -1e-12);
        }

        #[test]
        fn pair_test_symmetric(i in 1u32..=3, ha in 0.0f64..360.0, hb in 0.0f64..360.0, sa in 1.0f64..130.0, sb in 1.0f64..130.0) {
            let p = HarmonyParams::default();
            let (a, b) = (dist(ha, sa), dist(hb, sb));
            prop_assert_eq!(hue_pair_harmonic(i, &a, &b, &p), hue_pair_harmonic(i, &b, &a, &p));
        }

        #[test]
        fn opposite_implies_analog_failed(hs in proptest::collection::vec((0.0f64..360.0, 0.0f64..100.0), 1..6)) {
            let p = HarmonyParams::default();
            let colors: Vec<Color> = hs.iter().map(|&(h, c)| lch(50.0, c, h)).collect();
            if evaluate_hue_harmony(&colors, &p).unwrap() == HuePattern::Opposite {
                prop_assert_eq!(
                    evaluate_hue_harmony_with(&colors, &[HuePattern::Analog], &p).unwrap(),
                    HuePattern::NoHarmony
                );
            }
        }

        #[test]
        fn rotation_invariant_with_flat_rotation_term(
            hs in proptest::collection::vec((0.0f64..360.0, 0.0f64..100.0), 1..6),
            delta in 0.0f64..360.0,
        ) {
            let p = HarmonyParams { flat_hue_rotation: true, ..Default::default() };
            let colors: Vec<Color> = hs.iter().map(|&(h, c)| lch(50.0, c, h)).collect();
            let rotated: Vec<Color> = hs.iter().map(|&(h, c)| lch(50.0, c, h + delta)).collect();
            let a = evaluate_hue_harmony(&colors, &p).unwrap();
            let b = evaluate_hue_harmony(&rotated, &p).unwrap();
            // Rotation changes only floating-point rounding; skip knife-edge cases.
            let margin_ok = hs.len() < 2 || {
                let mut ok = true;
                for pat in HuePattern::ORDERED {
                    let mut st = HueState::with_patterns(&[pat]);
                    for c in &colors {
                        for (_, chk) in st.push(c, &p) {
                            if let Some(chk) = chk {
                                ok &= (chk.db - p.hue_db_threshold).abs() > 1e-6;
                            }
                        }
                    }
                }
                ok
            };
            if margin_ok {
                prop_assert_eq!(a, b);
            }
        }
    }
}
