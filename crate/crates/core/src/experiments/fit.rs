//! Weighted least-squares fit of the fringe model A(1 + v·cos(φ + φ₀)).
//!
//! The start point comes from the unit-frequency Fourier component of the
//! data. Gauss-Newton then refines (A, v, φ₀) with fixed Poisson weights
//! 1/max(y, 1). Convergence is declared when the scaled step
//! √((ΔA/A)² + Δv² + Δφ₀²) drops below [`FIT_STEP_TOL`].

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::CountRecord;
use crate::error::{invalid, Result};

pub const FIT_MAX_ITERATIONS: usize = 100;
pub const FIT_STEP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub amplitude: f64,
    pub visibility_hat: f64,
    pub phase_hat: f64,
    pub stderr_visibility: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Scaled norm of the last Gauss-Newton step.
    pub final_step: f64,
}

pub fn fit_fringe(records: &[CountRecord]) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.phi, r.counts as f64)).collect();
    fit_fringe_points(&points)
}

struct Normal {
    jtj: Matrix3<f64>,
    jtr: Vector3<f64>,
    chi2: f64,
}

fn normal_equations(points: &[(f64, f64)], weights: &[f64], p: &Vector3<f64>) -> Normal {
    let (a, v, phase) = (p[0], p[1], p[2]);
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    let mut chi2 = 0.0;
    for (&(phi, y), &w) in points.iter().zip(weights) {
        let (s, c) = (phi + phase).sin_cos();
        let r = y - a * (1.0 + v * c);
        let j = Vector3::new(1.0 + v * c, a * c, -a * v * s);
        jtj += w * j * j.transpose();
        jtr += w * r * j;
        chi2 += w * r * r;
    }
    Normal { jtj, jtr, chi2 }
}

/// Pseudo-inverse with singular values below 1e-12 of the largest dropped,
/// which keeps the φ₀ direction harmless when v = 0.
fn pseudo_inverse(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    svd.pseudo_inverse(eps).unwrap_or_else(|_| Matrix3::zeros())
}

/// Fits `(phi, value)` samples. Values may be non-integer (noiseless
/// expected counts, for instance).
pub fn fit_fringe_points(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(invalid!("fringe fit needs at least 4 points, got {}", points.len()));
    }
    if points
        .iter()
        .any(|(phi, y)| !phi.is_finite() || !y.is_finite() || *y < 0.0)
    {
        return Err(invalid!("fringe samples must be finite with non-negative counts"));
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= std::f64::consts::PI {
        return Err(invalid!("phases span {:.4} rad; need more than half a period", hi - lo));
    }

    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    if mean <= 0.0 {
        return Err(invalid!("fringe has no counts"));
    }
    let z: Complex64 = points
        .iter()
        .map(|&(phi, y)| Complex64::from_polar(y, -phi))
        .sum::<Complex64>()
        * (2.0 / n);
    let mut params = Vector3::new(mean, z.norm() / mean, z.arg());
    let weights: Vec<f64> = points.iter().map(|p| 1.0 / p.1.max(1.0)).collect();

    let mut best = (normal_equations(points, &weights, &params).chi2, params);
    let mut converged = false;
    let mut iterations = 0;
    let mut final_step = f64::INFINITY;
    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        let eq = normal_equations(points, &weights, &params);
        let step = pseudo_inverse(&eq.jtj) * eq.jtr;
        params += step;
        let chi2 = normal_equations(points, &weights, &params).chi2;
        if chi2 <= best.0 {
            best = (chi2, params);
        }
        final_step =
            ((step[0] / params[0].abs().max(f64::MIN_POSITIVE)).powi(2) + step[1].powi(2) + step[2].powi(2)).sqrt();
        if final_step < FIT_STEP_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        params = best.1;
    }

    let cov = pseudo_inverse(&normal_equations(points, &weights, &params).jtj);
    let (amplitude, mut v, mut phase) = (params[0], params[1], params[2]);
    if v < 0.0 {
        v = -v;
        phase += std::f64::consts::PI;
    }
    let phase_hat = phase.sin().atan2(phase.cos());
    Ok(FitResult {
        amplitude,
        visibility_hat: v,
        phase_hat,
        stderr_visibility: cov[(1, 1)].max(0.0).sqrt(),
        iterations,
        converged,
        final_step,
    })
}
