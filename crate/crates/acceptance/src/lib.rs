//! Independent oracles used by the acceptance suite. Nothing here reuses the
//! closed forms it checks.

pub mod schema;

use chromaharmony::color::ToneDistribution;
use chromaharmony::Tone;
use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;

/// Weighted squared perpendicular residual for the line with normal angle
/// `phi`, using the best offset for that angle.
pub fn profile_objective(points: &[Tone], weights: &[f64], phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let wsum: f64 = weights.iter().sum();
    let r = points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * (p.c * c + p.l * s))
        .sum::<f64>()
        / wsum;
    let obj = points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * (p.c * c + p.l * s - r).powi(2))
        .sum();
    (obj, r)
}

/// Minimizes the weighted perpendicular objective by a dense grid over the
/// normal angle followed by golden-section refinement. Returns the objective.
pub fn numeric_min_objective(points: &[Tone], weights: &[f64]) -> f64 {
    const GRID: usize = 7200;
    let step = std::f64::consts::PI / GRID as f64;
    let f = |phi: f64| profile_objective(points, weights, phi).0;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..GRID {
        let phi = k as f64 * step;
        let v = f(phi);
        if v < best.0 {
            best = (v, phi);
        }
    }
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    best.0.min(f1).min(f2)
}

/// Weighted total least squares through the scatter matrix eigenvector.
/// Returns `(r, phi)` with `r >= 0` and `phi` in radians.
pub fn eigen_fit(points: &[Tone], weights: &[f64]) -> (f64, f64) {
    let wsum: f64 = weights.iter().sum();
    let mean = points
        .iter()
        .zip(weights)
        .fold(Vector2::zeros(), |acc, (p, w)| acc + *w * Vector2::new(p.c, p.l))
        / wsum;
    let mut scatter = Matrix2::zeros();
    for (p, w) in points.iter().zip(weights) {
        let d = Vector2::new(p.c, p.l) - mean;
        scatter += *w * d * d.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let mut n: Vector2<f64> = eig.eigenvectors.column(k).into();
    let mut r = n.dot(&mean);
    if r < 0.0 {
        n = -n;
        r = -r;
    }
    (r, n.y.atan2(n.x).rem_euclid(std::f64::consts::TAU))
}

fn wrap_pi(a: f64) -> f64 {
    (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
}

/// Central-difference Jacobians of `eigen_fit` with respect to each point,
/// with the weights held fixed. Rows are `(r, phi)`, columns `(c, L)`.
pub fn fd_line_jacobians(points: &[Tone], weights: &[f64], h: f64) -> Vec<Matrix2<f64>> {
    let base = eigen_fit(points, weights);
    (0..points.len())
        .map(|i| {
            let mut jac = Matrix2::zeros();
            for axis in 0..2 {
                let eval = |delta: f64| {
                    let mut pts = points.to_vec();
                    if axis == 0 {
                        pts[i].c += delta;
                    } else {
                        pts[i].l += delta;
                    }
                    eig_fit_near(&pts, weights, base)
                };
                let (rp, pp) = eval(h);
                let (rm, pm) = eval(-h);
                jac[(0, axis)] = (rp - rm) / (2.0 * h);
                jac[(1, axis)] = wrap_pi(pp - pm) / (2.0 * h);
            }
            jac
        })
        .collect()
}

// Keeps the (r, phi) branch continuous with `base` when r is near zero.
fn eig_fit_near(points: &[Tone], weights: &[f64], base: (f64, f64)) -> (f64, f64) {
    let (r, phi) = eigen_fit(points, weights);
    if wrap_pi(phi - base.1).abs() > std::f64::consts::FRAC_PI_2 {
        (-r, phi + std::f64::consts::PI)
    } else {
        (r, phi)
    }
}

/// Line covariance by finite-difference propagation.
pub fn fd_line_covariance(points: &[Tone], weights: &[f64], covs: &[Matrix2<f64>], h: f64) -> Matrix2<f64> {
    fd_line_jacobians(points, weights, h)
        .iter()
        .zip(covs)
        .fold(Matrix2::zeros(), |acc, (j, c)| acc + j * c * j.transpose())
}

/// Variance of the signed point-to-line distance by finite differences over
/// the line parameters and the tone.
pub fn fd_perp_variance(t: Tone, tone_cov: &Matrix2<f64>, r: f64, phi: f64, line_cov: &Matrix2<f64>, h: f64) -> f64 {
    let s = |c: f64, l: f64, r: f64, phi: f64| c * phi.cos() + l * phi.sin() - r;
    let gl = Vector2::new(
        (s(t.c, t.l, r + h, phi) - s(t.c, t.l, r - h, phi)) / (2.0 * h),
        (s(t.c, t.l, r, phi + h) - s(t.c, t.l, r, phi - h)) / (2.0 * h),
    );
    let gt = Vector2::new(
        (s(t.c + h, t.l, r, phi) - s(t.c - h, t.l, r, phi)) / (2.0 * h),
        (s(t.c, t.l + h, r, phi) - s(t.c, t.l - h, r, phi)) / (2.0 * h),
    );
    (gl.transpose() * line_cov * gl)[0] + (gt.transpose() * tone_cov * gt)[0]
}

fn gauss_pdf(x: Vector2<f64>, d: &ToneDistribution) -> f64 {
    let mu = d.mean_vector();
    let cov = d.cov_matrix();
    let inv = cov.try_inverse().expect("invertible covariance");
    let diff = x - mu;
    let q = (diff.transpose() * inv * diff)[0];
    (-0.5 * q).exp() / (std::f64::consts::TAU * cov.determinant().sqrt())
}

fn sample(d: &ToneDistribution, rng: &mut impl Rng) -> Vector2<f64> {
    let l = d.cov_matrix().cholesky().expect("positive definite").l();
    let z = Vector2::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    );
    d.mean_vector() + l * z
}

/// Monte-Carlo estimate of `-ln ∫ sqrt(p q)`. Samples come from the equal
/// mixture of `p` and `q`, which keeps every importance weight at most 1.
pub fn mc_bhattacharyya(p: &ToneDistribution, q: &ToneDistribution, n: usize, rng: &mut impl Rng) -> f64 {
    let mut acc = 0.0;
    for _ in 0..n {
        let x = if rng.random::<bool>() {
            sample(p, rng)
        } else {
            sample(q, rng)
        };
        let (a, b) = (gauss_pdf(x, p), gauss_pdf(x, q));
        acc += (a * b).sqrt() / (0.5 * (a + b));
    }
    -(acc / n as f64).ln()
}
