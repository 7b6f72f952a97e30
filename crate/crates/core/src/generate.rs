//! Palette generation along a prescribed line in the tone plane.
//!
//! One call makes a single attempt: place `k` separated points on the line,
//! pick a base hue and a hue pattern, jitter each hue by its own uncertainty,
//! snap each ideal color into sRGB and keep the palette only if every snap is
//! small in Mahalanobis terms and every pair of tones is unambiguous.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::color::{hue_stddev, normalize_degrees, tone_distribution, Color, Tone};
use crate::error::{HarmonyError, Result};
use crate::params::HarmonyParams;
use crate::srgb::{is_in_gamut, max_chroma, Lch};
use crate::tone::{bhattacharyya_mv, mahalanobis};

/// Attempts made by the rejection sampler before giving up.
pub const PLACEMENT_ATTEMPTS: usize = 1000;

/// Hue layouts the generator can draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenHuePattern {
    Analog,
    Opposite,
    Triad,
    /// Two of the three triad vertices.
    IncompleteTriad,
}

impl GenHuePattern {
    pub const ALL: [GenHuePattern; 4] = [
        GenHuePattern::Analog,
        GenHuePattern::Opposite,
        GenHuePattern::Triad,
        GenHuePattern::IncompleteTriad,
    ];

    pub fn probability(self) -> f64 {
        match self {
            GenHuePattern::Analog => 0.3,
            GenHuePattern::Opposite => 0.3,
            GenHuePattern::Triad => 0.1,
            GenHuePattern::IncompleteTriad => 0.3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GenHuePattern::Analog => "analog",
            GenHuePattern::Opposite => "opposite",
            GenHuePattern::Triad => "triad",
            GenHuePattern::IncompleteTriad => "incomplete_triad",
        }
    }
}

impl std::str::FromStr for GenHuePattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        GenHuePattern::ALL
            .into_iter()
            .find(|p| p.name() == s || p.name().replace('_', "-") == s)
            .ok_or_else(|| format!("unknown hue pattern {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub r: f64,
    /// Normal inclination in degrees.
    pub phi: f64,
    pub k: usize,
    pub seed: u64,
    pub pattern_override: Option<GenHuePattern>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenFailure {
    NoFeasiblePoints,
    MahalanobisGate,
    AmbiguousTones,
}

impl GenFailure {
    pub fn reason(self) -> &'static str {
        match self {
            GenFailure::NoFeasiblePoints => "no_feasible_points",
            GenFailure::MahalanobisGate => "mahalanobis_gate",
            GenFailure::AmbiguousTones => "ambiguous_tones",
        }
    }
}

/// Per-color record of how an ideal color was realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizedColor {
    /// Ideal `(L, c, h)` before snapping.
    pub target: [f64; 3],
    pub color: Color,
    pub maha: f64,
    /// Euclidean `(c, L)` distance moved by the gamut snap.
    pub snap_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenResult {
    /// Empty unless every gate passed.
    pub colors: Vec<Color>,
    pub pattern_used: Option<GenHuePattern>,
    pub base_hue: Option<f64>,
    pub diagnostics: Vec<RealizedColor>,
    pub failure: Option<GenFailure>,
}

impl GenResult {
    fn failed(failure: GenFailure) -> Self {
        Self {
            colors: Vec::new(),
            pattern_used: None,
            base_hue: None,
            diagnostics: Vec::new(),
            failure: Some(failure),
        }
    }

    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }
}

/// Parameter interval of the line `F + t u` inside `[0, 100]²`, if any.
pub fn clip_to_tone_square(r: f64, phi_deg: f64) -> Option<(Vector2<f64>, Vector2<f64>, f64, f64)> {
    let (sin, cos) = phi_deg.to_radians().sin_cos();
    let foot = Vector2::new(r * cos, r * sin);
    let dir = Vector2::new(-sin, cos);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for axis in 0..2 {
        let (f, u) = (foot[axis], dir[axis]);
        if u.abs() < 1e-12 {
            if !(0.0..=100.0).contains(&f) {
                return None;
            }
        } else {
            let (a, b) = ((0.0 - f) / u, (100.0 - f) / u);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    (hi >= lo).then_some((foot, dir, lo, hi))
}

/// Samples `k` points on the clipped line with pairwise separation `min_sep`,
/// ordered along the line. `None` when the segment is too short or sampling
/// keeps failing.
pub fn place_points_on_line<R: Rng + ?Sized>(
    r: f64,
    phi_deg: f64,
    k: usize,
    min_sep: f64,
    rng: &mut R,
) -> Option<Vec<Tone>> {
    let (foot, dir, lo, hi) = clip_to_tone_square(r, phi_deg)?;
    if hi - lo < (k.saturating_sub(1)) as f64 * min_sep {
        return None;
    }
    for _ in 0..PLACEMENT_ATTEMPTS {
        let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
        ts.sort_by(f64::total_cmp);
        // points are collinear, so sorted neighbours carry the minimum gap
        if ts.windows(2).all(|w| w[1] - w[0] >= min_sep) {
            return Some(
                ts.into_iter()
                    .map(|t| {
                        let p = foot + dir * t;
                        Tone::new(p[0].clamp(0.0, 100.0), p[1].clamp(0.0, 100.0))
                    })
                    .collect(),
            );
        }
    }
    None
}

pub fn sample_hue_pattern<R: Rng + ?Sized>(rng: &mut R) -> GenHuePattern {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for p in GenHuePattern::ALL {
        acc += p.probability();
        if u < acc {
            return p;
        }
    }
    GenHuePattern::IncompleteTriad
}

/// Unperturbed hues, assigned round-robin over the pattern's positions.
pub fn nominal_hues(pattern: GenHuePattern, base_h: f64, k: usize) -> Vec<f64> {
    let offsets: &[f64] = match pattern {
        GenHuePattern::Analog => &[0.0],
        GenHuePattern::Opposite => &[0.0, 180.0],
        GenHuePattern::Triad => &[0.0, 120.0, 240.0],
        GenHuePattern::IncompleteTriad => &[0.0, 120.0],
    };
    (0..k)
        .map(|i| normalize_degrees(base_h + offsets[i % offsets.len()]))
        .collect()
}

/// Nominal hues jittered by each color's hue standard deviation at its chroma.
pub fn assign_hues<R: Rng + ?Sized>(
    pattern: GenHuePattern,
    base_h: f64,
    chromas: &[f64],
    p: &HarmonyParams,
    rng: &mut R,
) -> Vec<f64> {
    nominal_hues(pattern, base_h, chromas.len())
        .into_iter()
        .zip(chromas)
        .map(|(h, &c)| {
            let sd = hue_stddev(h, c, p);
            let noise = Normal::new(0.0, sd).map_or(0.0, |n| n.sample(rng));
            normalize_degrees(h + noise)
        })
        .collect()
}

fn snap_cost(target_l: f64, target_c: f64, h: f64, l: f64) -> (f64, f64) {
    let c = max_chroma(l, h, target_c);
    let dc = (target_c - c).max(0.0);
    ((l - target_l).powi(2) + dc * dc, c)
}

/// Nearest sRGB-realizable color at hue `h` in the `(c, L)` metric.
pub fn snap_to_gamut(target_l: f64, target_c: f64, h: f64) -> (f64, f64) {
    let target_l = target_l.clamp(0.0, 100.0);
    let target_c = target_c.clamp(0.0, 100.0);
    if is_in_gamut(Lch {
        l: target_l,
        c: target_c,
        h,
    }) {
        return (target_l, target_c);
    }
    // coarse scan over L, then golden-section refinement around the best cell
    let mut best_l = target_l;
    let mut best = snap_cost(target_l, target_c, h, target_l).0;
    for i in 0..=100 {
        let l = f64::from(i);
        let (cost, _) = snap_cost(target_l, target_c, h, l);
        if cost < best {
            best = cost;
            best_l = l;
        }
    }
    let (mut a, mut b) = ((best_l - 1.0).max(0.0), (best_l + 1.0).min(100.0));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-3 {
        let x1 = b - ratio * (b - a);
        let x2 = a + ratio * (b - a);
        if snap_cost(target_l, target_c, h, x1).0 <= snap_cost(target_l, target_c, h, x2).0 {
            b = x2;
        } else {
            a = x1;
        }
    }
    let l = 0.5 * (a + b);
    let (cost, c) = snap_cost(target_l, target_c, h, l);
    if cost <= best {
        (l, c)
    } else {
        (best_l, snap_cost(target_l, target_c, h, best_l).1)
    }
}

/// Snaps an ideal color into sRGB and measures the snap against the realized
/// color's tone covariance.
pub fn realize_color(target_l: f64, target_c: f64, target_h: f64, p: &HarmonyParams) -> Result<RealizedColor> {
    for (name, v) in [("L", target_l), ("c", target_c), ("h", target_h)] {
        if !v.is_finite() {
            return Err(HarmonyError::NonFinite(name));
        }
    }
    let h = normalize_degrees(target_h);
    let (l, c) = snap_to_gamut(target_l, target_c, h);
    let color = Color::new(l, c, h)?;
    let target = Vector2::new(target_c, target_l);
    let maha = mahalanobis(target, &tone_distribution(&color, p))?;
    Ok(RealizedColor {
        target: [target_l, target_c, h],
        color,
        maha,
        snap_distance: (target - Vector2::new(c, l)).norm(),
    })
}

/// One gated generation attempt for the line `(r, φ)`.
pub fn generate_line_palette(spec: &GenSpec, p: &HarmonyParams) -> Result<GenResult> {
    p.validate()?;
    if spec.k < 2 {
        return Err(HarmonyError::TooFewColors(spec.k));
    }
    if !spec.r.is_finite() {
        return Err(HarmonyError::NonFinite("r"));
    }
    if !spec.phi.is_finite() {
        return Err(HarmonyError::NonFinite("phi"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let Some(points) = place_points_on_line(spec.r, spec.phi, spec.k, p.min_sep, &mut rng) else {
        return Ok(GenResult::failed(GenFailure::NoFeasiblePoints));
    };
    let base_hue = rng.random_range(0.0..360.0);
    let pattern = sample_hue_pattern(&mut rng);
    let pattern = spec.pattern_override.unwrap_or(pattern);
    let chromas: Vec<f64> = points.iter().map(|t| t.c).collect();
    let hues = assign_hues(pattern, base_hue, &chromas, p, &mut rng);

    let diagnostics = points
        .iter()
        .zip(&hues)
        .map(|(t, &h)| realize_color(t.l, t.c, h, p))
        .collect::<Result<Vec<_>>>()?;

    let mut result = GenResult {
        colors: Vec::new(),
        pattern_used: Some(pattern),
        base_hue: Some(base_hue),
        diagnostics,
        failure: None,
    };
    if result.diagnostics.iter().any(|d| d.maha >= p.maha_threshold) {
        result.failure = Some(GenFailure::MahalanobisGate);
        return Ok(result);
    }
    let tones: Vec<_> = result
        .diagnostics
        .iter()
        .map(|d| tone_distribution(&d.color, p))
        .collect();
    for i in 0..tones.len() {
        for j in (i + 1)..tones.len() {
            if bhattacharyya_mv(&tones[i], &tones[j])? < p.ambiguity_db_threshold {
                result.failure = Some(GenFailure::AmbiguousTones);
                return Ok(result);
            }
        }
    }
    result.colors = result.diagnostics.iter().map(|d| d.color).collect();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hue::evaluate_hue_harmony;
    use crate::srgb::color_to_srgb;
    use crate::tone::{evaluate_tone_harmony, TonePattern};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn horizontal_line_fits_three_points() {
        let pts = place_points_on_line(50.0, 90.0, 3, 20.0, &mut rng(1)).unwrap();
        assert_eq!(pts.len(), 3);
        for t in &pts {
            assert!((t.l - 50.0).abs() < 1e-9);
        }
        for w in pts.windows(2) {
            assert!((w[1].c - w[0].c).abs() >= 20.0);
        }
    }

    #[test]
    fn segment_too_short() {
        // length 100 < 6 * 20
        assert!(place_points_on_line(50.0, 90.0, 7, 20.0, &mut rng(1)).is_none());
        // the diagonal is 141 long, enough for 7 points in principle
        let (_, _, lo, hi) = clip_to_tone_square(0.0, 135.0).unwrap();
        assert!(hi - lo >= 120.0);
    }

    #[test]
    fn points_lie_on_line() {
        for seed in 0..20 {
            let phi = 17.0 * seed as f64;
            let r = 30.0;
            if let Some(pts) = place_points_on_line(r, phi, 3, 20.0, &mut rng(seed)) {
                let (s, c) = phi.to_radians().sin_cos();
                for t in pts {
                    assert!((r - t.c * c - t.l * s).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn line_outside_square() {
        assert!(clip_to_tone_square(200.0, 90.0).is_none());
        let spec = GenSpec {
            r: 200.0,
            phi: 90.0,
            k: 3,
            seed: 3,
            pattern_override: None,
        };
        let res = generate_line_palette(&spec, &HarmonyParams::default()).unwrap();
        assert!(res.colors.is_empty());
        assert_eq!(res.failure, Some(GenFailure::NoFeasiblePoints));
    }

    #[test]
    fn rejects_k_below_two() {
        let spec = GenSpec {
            r: 10.0,
            phi: 135.0,
            k: 1,
            seed: 0,
            pattern_override: None,
        };
        assert_eq!(
            generate_line_palette(&spec, &HarmonyParams::default()),
            Err(HarmonyError::TooFewColors(1))
        );
    }

    #[test]
    fn pattern_sampling_is_seeded() {
        let a: Vec<_> = (0..50)
            .map({
                let mut r = rng(9);
                move |_| sample_hue_pattern(&mut r)
            })
            .collect();
        let b: Vec<_> = (0..50)
            .map({
                let mut r = rng(9);
                move |_| sample_hue_pattern(&mut r)
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn nominal_hue_layouts() {
        assert_eq!(nominal_hues(GenHuePattern::Opposite, 10.0, 3), vec![10.0, 190.0, 10.0]);
        assert_eq!(nominal_hues(GenHuePattern::Triad, 0.0, 3), vec![0.0, 120.0, 240.0]);
        assert_eq!(
            nominal_hues(GenHuePattern::IncompleteTriad, 300.0, 3),
            vec![300.0, 60.0, 300.0]
        );
        assert_eq!(nominal_hues(GenHuePattern::Analog, 42.0, 2), vec![42.0, 42.0]);
    }

    #[test]
    fn hue_noise_grows_for_neutrals() {
        let p = HarmonyParams::default();
        let spread = |c: f64| {
            let mut r = rng(5);
            let devs: Vec<f64> = (0..2000)
                .map(|_| {
                    let h = assign_hues(GenHuePattern::Analog, 180.0, &[c], &p, &mut r)[0];
                    (h - 180.0).abs()
                })
                .collect();
            devs.iter().sum::<f64>() / devs.len() as f64
        };
        assert!(spread(0.0) > 5.0 * spread(60.0));
    }

    #[test]
    fn realize_in_gamut_is_exact() {
        let p = HarmonyParams::default();
        let r = realize_color(50.0, 10.0, 30.0, &p).unwrap();
        assert_eq!(r.snap_distance, 0.0);
        assert_eq!(r.maha, 0.0);
    }

    #[test]
    fn mahalanobis_hand_value() {
        let d = crate::color::ToneDistribution {
            mean: [0.0, 0.0],
            cov: [[4.0, 0.0], [0.0, 4.0]],
        };
        assert!((mahalanobis(Vector2::new(4.0, 0.0), &d).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn realize_deep_blue() {
        let p = HarmonyParams::default();
        let r = realize_color(30.0, 100.0, 300.0, &p).unwrap();
        assert!(r.maha > 0.0);
        assert!(color_to_srgb(&r.color).in_gamut);
        assert!(r.color.c < 100.0);
    }

    #[test]
    fn generated_palette_round_trips() {
        let p = HarmonyParams::default();
        let mut found = false;
        for seed in 0..50 {
            let spec = GenSpec {
                r: 7.07,
                phi: 135.0,
                k: 3,
                seed,
                pattern_override: None,
            };
            let a = generate_line_palette(&spec, &p).unwrap();
            assert_eq!(a, generate_line_palette(&spec, &p).unwrap());
            if a.is_success() {
                found = true;
                assert_eq!(a.colors.len(), 3);
                assert_eq!(evaluate_tone_harmony(&a.colors, &p).unwrap(), TonePattern::Line);
                assert_ne!(
                    evaluate_hue_harmony(&a.colors, &p).unwrap(),
                    crate::HuePattern::NoHarmony
                );
                for c in &a.colors {
                    assert!(color_to_srgb(c).in_gamut);
                }
                break;
            }
        }
        assert!(found);
    }
}
