//! The four reference configurations, visibility sweeps, simulated photon
//! counts, fringe fitting and the QKD reduction.
//!
//! Configurations (a)–(c) use two crystals per arm. Crystal lengths l₁ and l₂
//! give o/e separations of 150 µm and 310 µm. Each arm is listed in traversal
//! order: crystal b then a in the upper arm, b′ then a′ in the lower arm.
//! Configuration (d) replaces the crystals with one half-wave plate per arm.

mod fit;
mod sampling;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::interferometer::{contrast_shared_env, oracle_contrast, output_probability, InterferometerSpec};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::optics::{unpolarized, ArmElement, ArmSpec, L1_UM, L2_UM};

pub use fit::{fit_fringe, fit_fringe_points, FitResult, FIT_MAX_ITERATIONS, FIT_STEP_TOL};
pub use sampling::{point_rng, poisson_sample, NORMAL_APPROX_THRESHOLD};

/// Number of β points in a default sweep.
pub const DEFAULT_BETA_POINTS: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fig4Variant {
    A,
    B,
    C,
    D,
}

impl Fig4Variant {
    pub const ALL: [Fig4Variant; 4] = [Fig4Variant::A, Fig4Variant::B, Fig4Variant::C, Fig4Variant::D];

    pub fn tag(self) -> char {
        match self {
            Fig4Variant::A => 'a',
            Fig4Variant::B => 'b',
            Fig4Variant::C => 'c',
            Fig4Variant::D => 'd',
        }
    }
}

impl fmt::Display for Fig4Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl FromStr for Fig4Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Fig4Variant::A),
            "b" => Ok(Fig4Variant::B),
            "c" => Ok(Fig4Variant::C),
            "d" => Ok(Fig4Variant::D),
            other => Err(invalid!("unknown variant '{other}', expected one of a, b, c, d")),
        }
    }
}

/// Crystal-angle layout of one two-crystal configuration.
struct CrystalLayout {
    /// (angle, length) of crystals a, b, a′, b′.
    a: (f64, f64),
    b: (f64, f64),
    a_prime: (f64, f64),
    b_prime: (f64, f64),
}

impl CrystalLayout {
    fn into_spec(self) -> Result<InterferometerSpec> {
        let crystal = |(angle, len): (f64, f64)| ArmElement::crystal(angle, len);
        InterferometerSpec::new(
            ArmSpec::new(vec![crystal(self.b), crystal(self.a)]),
            ArmSpec::new(vec![crystal(self.b_prime), crystal(self.a_prime)]),
            unpolarized(),
        )
    }
}

/// Builds one of the four reference interferometers at angle `beta`, with a
/// maximally mixed input.
pub fn config_fig4(variant: Fig4Variant, beta: f64) -> Result<InterferometerSpec> {
    if !beta.is_finite() {
        return Err(invalid!("beta must be finite"));
    }
    let layout = match variant {
        // l_a = l_b′ = l₁, l_b = l_a′ = l₂, b = a′ = 0, a = b′ = β
        Fig4Variant::A => CrystalLayout {
            a: (beta, L1_UM),
            b: (0.0, L2_UM),
            a_prime: (0.0, L2_UM),
            b_prime: (beta, L1_UM),
        },
        // l_a = l_b′ = l₁, l_b = l_a′ = l₂, a = a′ = 0, b = b′ = β
        Fig4Variant::B => CrystalLayout {
            a: (0.0, L1_UM),
            b: (beta, L2_UM),
            a_prime: (0.0, L2_UM),
            b_prime: (beta, L1_UM),
        },
        // l_b = l_b′ = l₁, l_a = l_a′ = l₂, b = a′ = 0, a = b′ = β
        Fig4Variant::C => CrystalLayout {
            a: (beta, L2_UM),
            b: (0.0, L1_UM),
            a_prime: (0.0, L2_UM),
            b_prime: (beta, L1_UM),
        },
        Fig4Variant::D => {
            return InterferometerSpec::new(
                ArmSpec::new(vec![ArmElement::waveplate(FRAC_PI_8)]),
                ArmSpec::new(vec![ArmElement::waveplate(beta)]),
                unpolarized(),
            )
        }
    };
    layout.into_spec()
}

/// Closed-form contrast of a configuration, with sign. Variant (c) goes
/// negative beyond β = π/4, meaning a fringe shifted by π.
///
/// Variant (d) uses the standard Jones half-wave plate (rotation by twice the
/// axis angle), giving cos(2(β − π/8)). See [`printed_waveplate_visibility`].
pub fn closed_form(variant: Fig4Variant, beta: f64) -> f64 {
    match variant {
        Fig4Variant::A => 1.0 - (2.0 * beta).sin().powi(2) / 2.0,
        Fig4Variant::B => beta.cos().powi(2),
        Fig4Variant::C => beta.cos().powi(2) * (2.0 * beta).cos(),
        Fig4Variant::D => (2.0 * (beta - FRAC_PI_8)).cos(),
    }
}

/// Predicted visibility, |closed form|.
pub fn predicted_visibility(variant: Fig4Variant, beta: f64) -> f64 {
    closed_form(variant, beta).abs()
}

/// The waveplate visibility |cos(β − π/8)| as originally printed. It does not
/// follow from the Jones convention used here and agrees with it only at
/// β = π/8 (and at β = π/8 ± π).
pub fn printed_waveplate_visibility(beta: f64) -> f64 {
    (beta - FRAC_PI_8).cos().abs()
}

/// `n` evenly spaced angles covering [0, π/2] inclusive.
pub fn beta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| FRAC_PI_2 * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    /// Signed closed form.
    pub closed_form: f64,
    /// |C| from the Kraus-pair sum.
    pub simulated: f64,
    /// |C| recovered from the dilation oracle.
    pub oracle: f64,
    /// arg C from the Kraus-pair sum.
    pub fringe_phase: f64,
}

/// Closed-form, simulated and oracle visibilities for each β, in input order.
pub fn sweep(variant: Fig4Variant, betas: &[f64]) -> Result<Vec<SweepRow>> {
    betas
        .par_iter()
        .map(|&beta| {
            let spec = config_fig4(variant, beta)?;
            let fringe = contrast_shared_env(&spec)?;
            Ok(SweepRow {
                beta,
                closed_form: closed_form(variant, beta),
                simulated: fringe.visibility,
                oracle: oracle_contrast(&spec)?.visibility,
                fringe_phase: fringe.fringe_phase,
            })
        })
        .collect()
}

/// Coincidence counts at one phase setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountRecord {
    pub phi: f64,
    pub counts: u64,
    pub expected: f64,
}

/// Simulated counts: at each phase the expected count is
/// `mean_total · P|0⟩(φ)` and the observed count is a Poisson draw from the
/// stream `(seed, index)`, so the output does not depend on evaluation order.
pub fn poisson_fringe(spec: &InterferometerSpec, phis: &[f64], mean_total: u64, seed: u64) -> Result<Vec<CountRecord>> {
    if mean_total == 0 {
        return Err(invalid!("mean_total must be at least 1"));
    }
    let fringe = contrast_shared_env(spec)?;
    phis.par_iter()
        .enumerate()
        .map(|(idx, &phi)| {
            let expected = mean_total as f64 * output_probability(&fringe, phi)?;
            let mut rng = point_rng(seed, idx as u64);
            Ok(CountRecord {
                phi,
                counts: poisson_sample(expected, &mut rng),
                expected,
            })
        })
        .collect()
}

/// `n` phases evenly spaced over one period, starting at 0.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
}

/// Delays drawn by [`random_spec`], µm.
pub const RANDOM_DELAYS: [f64; 4] = [0.0, 75.0, 150.0, 310.0];

/// Random interferometer: each arm gets up to `max_elements` crystals
/// (angle uniform in [0, π), delay from [`RANDOM_DELAYS`]), half-wave plates
/// or global phases, and the input is a random mixed polarization state.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, max_elements: usize) -> InterferometerSpec {
    let arm = |rng: &mut R| {
        let n = rng.gen_range(0..=max_elements);
        let elements = (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => ArmElement::crystal(
                    rng.gen_range(0.0..std::f64::consts::PI),
                    RANDOM_DELAYS[rng.gen_range(0..RANDOM_DELAYS.len())],
                ),
                1 => ArmElement::waveplate(rng.gen_range(0.0..std::f64::consts::PI)),
                _ => ArmElement::phase(rng.gen_range(0.0..std::f64::consts::TAU)),
            })
            .collect();
        ArmSpec::new(elements)
    };
    let upper = arm(rng);
    let lower = arm(rng);

    // Bloch vector of length ≤ 1
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let azimuth: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let radius: f64 = rng.gen_range(0.0..=1.0);
    let (x, y, z) = (
        radius * theta.sin() * azimuth.cos(),
        radius * theta.sin() * azimuth.sin(),
        radius * theta.cos(),
    );
    let rho = ComplexMatrix::from_rows(&[
        [Complex64::new((1.0 + z) / 2.0, 0.0), Complex64::new(x / 2.0, -y / 2.0)],
        [Complex64::new(x / 2.0, y / 2.0), Complex64::new((1.0 - z) / 2.0, 0.0)],
    ]);
    let input = DensityMatrix::new(rho).expect("Bloch ball state");
    InterferometerSpec::new(upper, lower, input).expect("2x2 input")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleCheckRow {
    pub index: usize,
    pub shared: Complex64,
    pub oracle: Complex64,
    pub abs_diff: f64,
}

/// Compares the Kraus-pair contrast with the oracle-extracted contrast on
/// `count` random specs (at most 3 elements per arm). Spec `i` is drawn from
/// stream `i` of `seed`.
pub fn oracle_check(count: usize, seed: u64) -> Result<Vec<OracleCheckRow>> {
    (0..count)
        .into_par_iter()
        .map(|index| {
            let spec = random_spec(&mut point_rng(seed, index as u64), 3);
            let shared = contrast_shared_env(&spec)?.contrast;
            let oracle = oracle_contrast(&spec)?.contrast;
            Ok(OracleCheckRow {
                index,
                shared,
                oracle,
                abs_diff: (shared - oracle).norm(),
            })
        })
        .collect()
}

/// Four channel segments of the unbalanced-interferometer key distribution
/// scheme, with an identity channel between the two interferometers.
#[derive(Clone, Debug, PartialEq)]
pub struct QkdSpec {
    pub u1: Vec<ArmElement>,
    pub u2: Vec<ArmElement>,
    pub u3: Vec<ArmElement>,
    pub u4: Vec<ArmElement>,
    pub input: DensityMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QkdResult {
    pub visibility: f64,
    pub qber: f64,
}

/// Collapses the scheme onto one interferometer (u1, u2 on the upper arm; u3,
/// u4 on the lower arm) and reports its visibility with QBER = (1 − v)/2.
pub fn qkd_visibility(spec: &QkdSpec) -> Result<QkdResult> {
    let upper = ArmSpec::new(spec.u1.iter().chain(&spec.u2).cloned().collect());
    let lower = ArmSpec::new(spec.u3.iter().chain(&spec.u4).cloned().collect());
    let interferometer = InterferometerSpec::new(upper, lower, spec.input.clone())?;
    let visibility = contrast_shared_env(&interferometer)?.visibility;
    Ok(QkdResult {
        visibility,
        qber: (1.0 - visibility) / 2.0,
    })
}
