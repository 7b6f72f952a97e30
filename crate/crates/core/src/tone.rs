//! Chroma-lightness patterns: ambiguity, weighted line fit and inlier tests.
//!
//! Lines are kept in normal form `(r, φ)`: a tone `(c, L)` lies on the line
//! when `r = c cos φ + L sin φ`. `φ` is in radians here and in degrees at the
//! report and wire boundaries.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::color::{tone_distribution, tone_scale_factors, Color, Tone, ToneDistribution};
use crate::error::{HarmonyError, Result};
use crate::params::HarmonyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TonePattern {
    NoHarmony = 0,
    Point = 1,
    Line = 2,
}

impl TonePattern {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            TonePattern::NoHarmony => "no_harmony",
            TonePattern::Point => "point",
            TonePattern::Line => "line",
        }
    }
}

/// Line in normal form with its covariance over `(r, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneLine {
    pub r: f64,
    /// Radians in `[0, 2π)`.
    pub phi: f64,
    pub cov: Matrix2<f64>,
}

impl ToneLine {
    pub fn new(r: f64, phi: f64) -> Self {
        Self {
            r,
            phi,
            cov: Matrix2::zeros(),
        }
    }

    pub fn phi_degrees(&self) -> f64 {
        self.phi.to_degrees()
    }

    /// Covariance with the angle expressed in degrees.
    pub fn cov_degrees(&self) -> Matrix2<f64> {
        let s = Matrix2::new(1.0, 0.0, 0.0, 180.0 / PI);
        s * self.cov * s
    }

    /// Signed offset `r - c cos φ - L sin φ`.
    pub fn residual(&self, t: Tone) -> f64 {
        let (sin, cos) = self.phi.sin_cos();
        self.r - t.c * cos - t.l * sin
    }
}

pub fn bhattacharyya_mv(a: &ToneDistribution, b: &ToneDistribution) -> Result<f64> {
    let sa = a.cov_matrix();
    let sb = b.cov_matrix();
    let mean_cov = (sa + sb) * 0.5;
    let inv = mean_cov.try_inverse().ok_or(HarmonyError::SingularCovariance)?;
    let det = mean_cov.determinant();
    let det_ab = sa.determinant() * sb.determinant();
    if det <= 0.0 || det_ab <= 0.0 {
        return Err(HarmonyError::SingularCovariance);
    }
    let d = a.mean_vector() - b.mean_vector();
    let quad = (d.transpose() * inv * d)[(0, 0)];
    Ok(quad / 8.0 + 0.5 * (det / det_ab.sqrt()).ln())
}

pub fn tones_unambiguous(a: &ToneDistribution, b: &ToneDistribution, p: &HarmonyParams) -> Result<bool> {
    Ok(bhattacharyya_mv(a, b)? >= p.ambiguity_db_threshold)
}

/// Fit weight `(k_c S_c k_L S_L)^-2`.
pub fn point_weight(c: f64, l: f64, p: &HarmonyParams) -> f64 {
    let (s_c, s_l) = tone_scale_factors(c, l);
    (p.k_c * s_c * p.k_l * s_l).powi(-2)
}

pub fn mahalanobis(x: Vector2<f64>, dist: &ToneDistribution) -> Result<f64> {
    let inv = dist
        .cov_matrix()
        .try_inverse()
        .ok_or(HarmonyError::SingularCovariance)?;
    let d = x - dist.mean_vector();
    Ok((d.transpose() * inv * d)[(0, 0)].max(0.0).sqrt())
}

/// Weighted second moments about the weighted centroid.
struct Moments {
    weight: f64,
    c_bar: f64,
    l_bar: f64,
    s_cc: f64,
    s_ll: f64,
    s_cl: f64,
}

impl Moments {
    fn new(points: &[Tone], weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(HarmonyError::LengthMismatch(points.len(), weights.len()));
        }
        let weight: f64 = weights.iter().sum();
        let c_bar = points.iter().zip(weights).map(|(t, w)| w * t.c).sum::<f64>() / weight;
        let l_bar = points.iter().zip(weights).map(|(t, w)| w * t.l).sum::<f64>() / weight;
        let (mut s_cc, mut s_ll, mut s_cl) = (0.0, 0.0, 0.0);
        for (t, w) in points.iter().zip(weights) {
            let dc = t.c - c_bar;
            let dl = t.l - l_bar;
            s_cc += w * dc * dc;
            s_ll += w * dl * dl;
            s_cl += w * dc * dl;
        }
        Ok(Self {
            weight,
            c_bar,
            l_bar,
            s_cc,
            s_ll,
            s_cl,
        })
    }

    fn scatter(&self) -> f64 {
        self.s_cc + self.s_ll
    }

    // atan2 arguments for 2φ
    fn numer(&self) -> f64 {
        -2.0 * self.s_cl
    }

    fn denom(&self) -> f64 {
        self.s_ll - self.s_cc
    }
}

/// Weighted total-least-squares line through `points`.
///
/// The returned line has `r >= 0` and `φ` in `[0, 2π)`; its covariance is zero
/// until filled by [`line_covariance`].
pub fn fit_line(points: &[Tone], weights: &[f64]) -> Result<ToneLine> {
    if points.len() < 2 {
        return Err(HarmonyError::DegenerateFit);
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(HarmonyError::InvalidParam {
            name: "weights",
            reason: "weights must be finite and > 0".into(),
        });
    }
    let m = Moments::new(points, weights)?;
    let scale = 1.0 + m.c_bar * m.c_bar + m.l_bar * m.l_bar;
    if m.scatter() / m.weight <= 1e-20 * scale {
        return Err(HarmonyError::DegenerateFit);
    }
    let mut phi = 0.5 * m.numer().atan2(m.denom());
    let mut r = m.c_bar * phi.cos() + m.l_bar * phi.sin();
    if r < 0.0 {
        r = -r;
        phi += PI;
    }
    Ok(ToneLine::new(r, phi.rem_euclid(TAU)))
}

/// Weighted sum of squared perpendicular residuals.
pub fn fit_objective(points: &[Tone], weights: &[f64], r: f64, phi: f64) -> f64 {
    let line = ToneLine::new(r, phi);
    points
        .iter()
        .zip(weights)
        .map(|(t, w)| {
            let e = line.residual(*t);
            w * e * e
        })
        .sum()
}

/// Jacobians `∂(r, φ)/∂(c_i, L_i)` of the fit, one per point, weights held fixed.
pub fn line_jacobians(points: &[Tone], weights: &[f64], line: &ToneLine) -> Result<Vec<Matrix2<f64>>> {
    let m = Moments::new(points, weights)?;
    let (n, d) = (m.numer(), m.denom());
    let rho = n * n + d * d;
    if rho <= 1e-24 * m.scatter() * m.scatter() || rho == 0.0 {
        return Err(HarmonyError::DegenerateFit);
    }
    let (sin, cos) = line.phi.sin_cos();
    let dr_dphi = -m.c_bar * sin + m.l_bar * cos;
    Ok(points
        .iter()
        .zip(weights)
        .map(|(t, &w)| {
            let dc = t.c - m.c_bar;
            let dl = t.l - m.l_bar;
            // derivatives of the atan2 arguments w.r.t. c_i and L_i
            let (dn_dc, dd_dc) = (-2.0 * w * dl, -2.0 * w * dc);
            let (dn_dl, dd_dl) = (-2.0 * w * dc, 2.0 * w * dl);
            let dphi_dc = 0.5 * (d * dn_dc - n * dd_dc) / rho;
            let dphi_dl = 0.5 * (d * dn_dl - n * dd_dl) / rho;
            let share = w / m.weight;
            let dr_dc = share * cos + dr_dphi * dphi_dc;
            let dr_dl = share * sin + dr_dphi * dphi_dl;
            Matrix2::new(dr_dc, dr_dl, dphi_dc, dphi_dl)
        })
        .collect())
}

/// First-order covariance of `(r, φ)` from the per-point covariances.
pub fn line_covariance(
    points: &[Tone],
    weights: &[f64],
    covs: &[Matrix2<f64>],
    line: &ToneLine,
) -> Result<Matrix2<f64>> {
    if covs.len() != points.len() {
        return Err(HarmonyError::LengthMismatch(points.len(), covs.len()));
    }
    let jac = line_jacobians(points, weights, line)?;
    let cov = jac
        .iter()
        .zip(covs)
        .fold(Matrix2::zeros(), |acc, (b, c)| acc + b * c * b.transpose());
    Ok((cov + cov.transpose()) * 0.5)
}

/// Fits the line and fills in its covariance.
pub fn fit_line_with_covariance(points: &[Tone], weights: &[f64], covs: &[Matrix2<f64>]) -> Result<ToneLine> {
    let mut line = fit_line(points, weights)?;
    line.cov = line_covariance(points, weights, covs, &line)?;
    Ok(line)
}

pub fn perp_distance(t: Tone, line: &ToneLine) -> f64 {
    line.residual(t).abs()
}

/// First-order variance of the perpendicular distance, treating the tone and
/// the line as independent.
pub fn perp_distance_variance(t: Tone, tone_cov: &Matrix2<f64>, line: &ToneLine) -> f64 {
    let (sin, cos) = line.phi.sin_cos();
    // gradient of the signed residual; the sign of |.| cancels in the quadratic form
    let g_line = Vector2::new(1.0, t.c * sin - t.l * cos);
    let g_tone = Vector2::new(-cos, -sin);
    let v = (g_line.transpose() * line.cov * g_line)[(0, 0)] + (g_tone.transpose() * tone_cov * g_tone)[(0, 0)];
    v.max(0.0)
}

pub fn point_is_inlier(t: Tone, tone_cov: &Matrix2<f64>, line: &ToneLine, p: &HarmonyParams) -> bool {
    inlier_statistic(t, tone_cov, line) <= p.t_line
}

/// `d⊥ - 2σ(d⊥)`, the quantity compared against `t_line`.
pub fn inlier_statistic(t: Tone, tone_cov: &Matrix2<f64>, line: &ToneLine) -> f64 {
    perp_distance(t, line) - 2.0 * perp_distance_variance(t, tone_cov, line).sqrt()
}

/// Why a tone sequence stopped being harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToneFailure {
    /// Too close to the accepted tone at this index.
    Ambiguous { with: usize },
    /// Too far from the running line.
    Outlier,
    /// The accepted tones no longer determine a line.
    Degenerate,
}

/// Diagnostics for one tone fed to [`ToneState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneCheck {
    /// Smallest Bhattacharyya distance to an accepted tone.
    pub min_db: Option<f64>,
    pub d_perp: Option<f64>,
    pub sigma_d_perp: Option<f64>,
    pub inlier: Option<bool>,
    pub accepted: bool,
    pub failure: Option<ToneFailure>,
}

/// Incremental tone evaluation over an ordered color sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneState {
    accepted: Vec<ToneDistribution>,
    weights: Vec<f64>,
    line: Option<ToneLine>,
    failure: Option<ToneFailure>,
    len: usize,
}

impl ToneState {
    pub fn new() -> Self {
        Self {
            accepted: Vec::new(),
            weights: Vec::new(),
            line: None,
            failure: None,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn line(&self) -> Option<&ToneLine> {
        self.line.as_ref()
    }

    pub fn accepted(&self) -> &[ToneDistribution] {
        &self.accepted
    }

    pub fn failure(&self) -> Option<ToneFailure> {
        self.failure
    }

    pub fn label(&self) -> TonePattern {
        match (self.len, self.failure) {
            (0, _) | (_, Some(_)) => TonePattern::NoHarmony,
            (1, None) => TonePattern::Point,
            _ => TonePattern::Line,
        }
    }

    /// Feeds one color; once the sequence has failed, later colors are not examined.
    pub fn push(&mut self, color: &Color, p: &HarmonyParams) -> ToneCheck {
        self.len += 1;
        let mut check = ToneCheck {
            min_db: None,
            d_perp: None,
            sigma_d_perp: None,
            inlier: None,
            accepted: false,
            failure: None,
        };
        if self.failure.is_some() {
            return check;
        }
        let dist = tone_distribution(color, p);
        let tone = color.tone();

        let mut min_db = f64::INFINITY;
        for (idx, prev) in self.accepted.iter().enumerate() {
            let db = bhattacharyya_mv(prev, &dist).unwrap_or(0.0);
            min_db = min_db.min(db);
            if db < p.ambiguity_db_threshold && check.failure.is_none() {
                check.failure = Some(ToneFailure::Ambiguous { with: idx });
            }
        }
        if !self.accepted.is_empty() {
            check.min_db = Some(min_db);
        }
        if check.failure.is_some() {
            self.failure = check.failure;
            return check;
        }

        if let Some(line) = &self.line {
            let cov = dist.cov_matrix();
            let var = perp_distance_variance(tone, &cov, line);
            let d = perp_distance(tone, line);
            let inlier = d - 2.0 * var.sqrt() <= p.t_line;
            check.d_perp = Some(d);
            check.sigma_d_perp = Some(var.sqrt());
            check.inlier = Some(inlier);
            if !inlier {
                check.failure = Some(ToneFailure::Outlier);
                self.failure = check.failure;
                return check;
            }
        }

        self.accepted.push(dist);
        self.weights.push(point_weight(color.c, color.l, p));
        check.accepted = true;
        if self.accepted.len() >= 2 {
            let points: Vec<Tone> = self.accepted.iter().map(|d| d.tone()).collect();
            let covs: Vec<Matrix2<f64>> = self.accepted.iter().map(|d| d.cov_matrix()).collect();
            match fit_line_with_covariance(&points, &self.weights, &covs) {
                Ok(line) => self.line = Some(line),
                Err(_) => {
                    check.failure = Some(ToneFailure::Degenerate);
                    self.failure = check.failure;
                }
            }
        }
        check
    }
}

impl Default for ToneState {
    fn default() -> Self {
        Self::new()
    }
}

/// Labels an ordered color list in the tone plane.
pub fn evaluate_tone_harmony(colors: &[Color], p: &HarmonyParams) -> Result<TonePattern> {
    if colors.is_empty() {
        return Err(HarmonyError::EmptyPalette);
    }
    let dists: Vec<ToneDistribution> = colors.iter().map(|c| tone_distribution(c, p)).collect();
    if dists.len() == 1 {
        return Ok(TonePattern::Point);
    }
    let mut accepted = vec![0usize];
    let mut line: Option<ToneLine> = None;
    for j in 1..dists.len() {
        for &i in &accepted {
            if !tones_unambiguous(&dists[i], &dists[j], p)? {
                return Ok(TonePattern::NoHarmony);
            }
        }
        let ok = match &line {
            None => true,
            Some(l) => point_is_inlier(dists[j].tone(), &dists[j].cov_matrix(), l, p),
        };
        if !ok {
            return Ok(TonePattern::NoHarmony);
        }
        accepted.push(j);
        let points: Vec<Tone> = accepted.iter().map(|&i| dists[i].tone()).collect();
        let weights: Vec<f64> = accepted
            .iter()
            .map(|&i| point_weight(colors[i].c, colors[i].l, p))
            .collect();
        let covs: Vec<Matrix2<f64>> = accepted.iter().map(|&i| dists[i].cov_matrix()).collect();
        match fit_line_with_covariance(&points, &weights, &covs) {
            Ok(l) => line = Some(l),
            Err(HarmonyError::DegenerateFit) => return Ok(TonePattern::NoHarmony),
            Err(e) => return Err(e),
        }
    }
    Ok(TonePattern::Line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::tone_distribution_at;
    use proptest::prelude::*;

    fn diag(mean: [f64; 2], vc: f64, vl: f64) -> ToneDistribution {
        ToneDistribution {
            mean,
            cov: [[vc, 0.0], [0.0, vl]],
        }
    }

    fn lch(l: f64, c: f64, h: f64) -> Color {
        Color::new(l, c, h).unwrap()
    }

    #[test]
    fn bhattacharyya_mv_cases() {
        let a = diag([10.0, 10.0], 4.0, 4.0);
        assert_eq!(bhattacharyya_mv(&a, &a).unwrap(), 0.0);
        let b = diag([18.0, 10.0], 4.0, 4.0);
        assert!((bhattacharyya_mv(&a, &b).unwrap() - 2.0).abs() < 1e-12);
        let c = diag([10.0, 22.0], 4.0, 4.0);
        assert!((bhattacharyya_mv(&a, &c).unwrap() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn ambiguity_gate() {
        let p = HarmonyParams::default();
        let a = diag([10.0, 10.0], 4.0, 4.0);
        assert!(!tones_unambiguous(&a, &a, &p).unwrap());
        assert!(!tones_unambiguous(&a, &diag([18.0, 10.0], 4.0, 4.0), &p).unwrap());
        assert!(tones_unambiguous(&a, &diag([10.0, 22.0], 4.0, 4.0), &p).unwrap());
    }

    #[test]
    fn point_weight_cases() {
        let p = HarmonyParams::default();
        assert_eq!(point_weight(0.0, 50.0, &p), 1.0 / 16.0);
        let expected = (2.0f64 * 3.25 * 2.0).powi(-2);
        assert!((point_weight(50.0, 50.0, &p) - expected).abs() < 1e-15);
        assert!((point_weight(50.0, 50.0, &p) - 0.00592).abs() < 1e-5);
        assert!(point_weight(10.0, 30.0, &p) > point_weight(20.0, 30.0, &p));
    }

    #[test]
    fn fit_through_two_points() {
        let pts = [Tone::new(20.0, 30.0), Tone::new(40.0, 50.0)];
        let line = fit_line(&pts, &[1.0, 1.0]).unwrap();
        assert!((line.phi_degrees() - 135.0).abs() < 1e-9);
        assert!((line.r - 10.0 / 2f64.sqrt()).abs() < 1e-9);
        for t in pts {
            assert!(perp_distance(t, &line) < 1e-9);
        }
    }

    #[test]
    fn fit_collinear() {
        let pts = [Tone::new(0.0, 5.0), Tone::new(10.0, 25.0), Tone::new(30.0, 65.0)];
        let line = fit_line(&pts, &[0.3, 1.0, 2.0]).unwrap();
        for t in pts {
            assert!(perp_distance(t, &line) < 1e-9);
        }
    }

    #[test]
    fn fit_degenerate() {
        let pts = [Tone::new(7.0, 7.0); 3];
        assert_eq!(fit_line(&pts, &[1.0; 3]), Err(HarmonyError::DegenerateFit));
    }

    #[test]
    fn zero_point_covariance_gives_zero_line_covariance() {
        let pts = [Tone::new(10.0, 20.0), Tone::new(30.0, 35.0), Tone::new(55.0, 62.0)];
        let w = [1.0, 0.5, 0.25];
        let line = fit_line(&pts, &w).unwrap();
        let cov = line_covariance(&pts, &w, &[Matrix2::zeros(); 3], &line).unwrap();
        assert_eq!(cov, Matrix2::zeros());
        let c1 = [Matrix2::new(2.0, 0.3, 0.3, 1.0); 3];
        let c2 = c1.map(|m| m * 2.0);
        let a = line_covariance(&pts, &w, &c1, &line).unwrap();
        let b = line_covariance(&pts, &w, &c2, &line).unwrap();
        assert!((b - a * 2.0).norm() < 1e-12 * b.norm());
    }

    #[test]
    fn perp_distance_cases() {
        let flat = ToneLine::new(0.0, PI / 2.0);
        assert!((perp_distance(Tone::new(10.0, 7.0), &flat) - 7.0).abs() < 1e-12);
        let line = ToneLine::new(12.0, 0.7);
        let flipped = ToneLine::new(-12.0, 0.7 + PI);
        let t = Tone::new(33.0, 4.0);
        assert!((perp_distance(t, &line) - perp_distance(t, &flipped)).abs() < 1e-12);
    }

    #[test]
    fn perp_variance_cases() {
        let line = ToneLine::new(20.0, 1.1);
        let t = Tone::new(5.0, 40.0);
        assert_eq!(perp_distance_variance(t, &Matrix2::zeros(), &line), 0.0);
        let s2 = 6.25;
        let v = perp_distance_variance(t, &(Matrix2::identity() * s2), &line);
        assert!((v - s2).abs() < 1e-12);
    }

    #[test]
    fn inlier_cases() {
        let p = HarmonyParams::default();
        // the vertical line c = 10
        let line = ToneLine::new(10.0, 0.0);
        let z = Matrix2::zeros();
        assert!(point_is_inlier(Tone::new(10.0, 40.0), &z, &line, &p));
        assert!(point_is_inlier(Tone::new(10.0 + p.t_line, 40.0), &z, &line, &p));
        let far = Tone::new(60.0, 40.0);
        assert!(!point_is_inlier(far, &Matrix2::identity(), &line, &p));
    }

    #[test]
    fn algorithm_examples() {
        let p = HarmonyParams::default();
        assert_eq!(
            evaluate_tone_harmony(&[lch(50.0, 30.0, 10.0)], &p).unwrap(),
            TonePattern::Point
        );
        let c = lch(50.0, 30.0, 10.0);
        assert_eq!(evaluate_tone_harmony(&[c, c], &p).unwrap(), TonePattern::NoHarmony);
        let line = [lch(20.0, 10.0, 0.0), lch(40.0, 30.0, 0.0), lch(60.0, 50.0, 0.0)];
        assert_eq!(evaluate_tone_harmony(&line, &p).unwrap(), TonePattern::Line);
        assert_eq!(evaluate_tone_harmony(&[], &p), Err(HarmonyError::EmptyPalette));
    }

    #[test]
    fn off_line_vivid_tone_is_rejected() {
        let p = HarmonyParams::default();
        let colors = [lch(30.0, 10.0, 180.0), lch(50.0, 20.0, 180.0), lch(45.0, 90.0, 180.0)];
        assert_eq!(evaluate_tone_harmony(&colors, &p).unwrap(), TonePattern::NoHarmony);
    }

    #[test]
    fn state_matches_batch() {
        let p = HarmonyParams::default();
        let colors = [
            lch(20.0, 10.0, 0.0),
            lch(40.0, 30.0, 0.0),
            lch(60.0, 50.0, 0.0),
            lch(75.0, 70.0, 0.0),
            lch(90.0, 20.0, 0.0),
        ];
        let mut st = ToneState::new();
        for n in 1..=colors.len() {
            st.push(&colors[n - 1], &p);
            assert_eq!(
                st.label(),
                evaluate_tone_harmony(&colors[..n], &p).unwrap(),
                "prefix {n}"
            );
        }
    }

    fn arb_points() -> impl Strategy<Value = (Vec<Tone>, Vec<f64>)> {
        proptest::collection::vec((0.0f64..100.0, 0.0f64..100.0, 0.05f64..2.0), 3..10).prop_map(|v| {
            (
                v.iter().map(|&(c, l, _)| Tone::new(c, l)).collect(),
                v.iter().map(|&(_, _, w)| w).collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn translation_equivariance((pts, w) in arb_points(), dc in -30.0f64..30.0, dl in -30.0f64..30.0) {
            let a = fit_line(&pts, &w).unwrap();
            let moved: Vec<Tone> = pts.iter().map(|t| Tone::new(t.c + dc, t.l + dl)).collect();
            let b = fit_line(&moved, &w).unwrap();
            // compare as unoriented lines: (r, φ) ~ (-r, φ + π)
            let expected_r = a.r + dc * a.phi.cos() + dl * a.phi.sin();
            let dphi = (b.phi - a.phi).rem_euclid(TAU);
            if dphi.min(TAU - dphi) < 1e-6 {
                prop_assert!((b.r - expected_r).abs() < 1e-6);
            } else {
                prop_assert!((dphi - PI).abs() < 1e-6);
                prop_assert!((b.r + expected_r).abs() < 1e-6);
            }
        }

        #[test]
        fn rotation_equivariance((pts, w) in arb_points(), beta in 0.0f64..TAU) {
            let a = fit_line(&pts, &w).unwrap();
            let (s, c) = beta.sin_cos();
            let rot: Vec<Tone> = pts.iter().map(|t| Tone::new(c * t.c - s * t.l, s * t.c + c * t.l)).collect();
            let b = fit_line(&rot, &w).unwrap();
            prop_assert!((a.r - b.r).abs() < 1e-6);
            if a.r > 1e-6 {
                let d = (b.phi - a.phi - beta).rem_euclid(TAU);
                prop_assert!(d.min(TAU - d) < 1e-6);
            }
        }

        #[test]
        fn beats_every_two_point_line((pts, w) in arb_points()) {
            let best = fit_line(&pts, &w).unwrap();
            let f = fit_objective(&pts, &w, best.r, best.phi);
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    if let Ok(l) = fit_line(&[pts[i], pts[j]], &[1.0, 1.0]) {
                        prop_assert!(f <= fit_objective(&pts, &w, l.r, l.phi) + 1e-9);
                    }
                }
            }
        }

        #[test]
        fn collinear_permutations_are_lines(
            start in 0.0f64..20.0, lstart in 0.0f64..20.0, angle in 0.2f64..1.3, perm in 0usize..6
        ) {
            let p = HarmonyParams::default();
            let dir = (angle.cos(), angle.sin());
            let colors: Vec<Color> = (0..3)
                .map(|k| {
                    let s = 30.0 * k as f64;
                    lch(lstart + s * dir.1, start + s * dir.0, 0.0)
                })
                .collect();
            let order = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
            let permuted: Vec<Color> = order.iter().map(|&i| colors[i]).collect();
            let all_clear = (0..3).all(|i| (i + 1..3).all(|j| {
                tones_unambiguous(&tone_distribution_at(colors[i].tone(), &p), &tone_distribution_at(colors[j].tone(), &p), &p).unwrap()
            }));
            prop_assume!(all_clear);
            prop_assert_eq!(evaluate_tone_harmony(&permuted, &p).unwrap(), TonePattern::Line);
        }

        #[test]
        fn label_arity(cs in proptest::collection::vec((0.0f64..100.0, 0.0f64..100.0), 1..6)) {
            let p = HarmonyParams::default();
            let colors: Vec<Color> = cs.iter().map(|&(l, c)| lch(l, c, 0.0)).collect();
            let label = evaluate_tone_harmony(&colors, &p).unwrap();
            if colors.len() == 1 {
                prop_assert_eq!(label, TonePattern::Point);
            } else {
                prop_assert_ne!(label, TonePattern::Point);
            }
        }
    }
}
