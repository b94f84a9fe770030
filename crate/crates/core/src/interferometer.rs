//! Mach-Zehnder fringes for two arm channels.
//!
//! When both arms share the time-bin environment, the contrast is
//! C = Σ Tr[u† v ρ] over Kraus pairs (u of the upper arm, v of the lower arm)
//! that land in the same bin, and the bright-port probability is
//! P|0⟩(φ) = ½(1 + Re[e^{iφ} C]).
//!
//! [`oracle_probability`] recomputes the same quantity by brute force: it
//! dilates both arms to unitaries on polarization ⊗ time bins, evolves the
//! full path ⊗ polarization ⊗ bins state through the interferometer and
//! traces out everything but the path.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{beamsplitter, phase_shifter, ComplexMatrix, DensityMatrix};
use crate::optics::{compose_arm, dilation_on_bins, time_bins, ArmSpec, DelayedKraus, DELAY_MERGE_TOL, L1_UM};

/// Largest joint path ⊗ polarization ⊗ bins dimension the oracle will build.
pub const ORACLE_MAX_DIM: usize = 4096;
/// Detection probability below which post-selection is refused.
pub const POSTSELECTION_MIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct InterferometerSpec {
    pub upper: ArmSpec,
    pub lower: ArmSpec,
    pub input: DensityMatrix,
    /// Wavepacket coherence length in µm. Informational only: distinct time
    /// bins never interfere.
    pub coherence_length: f64,
}

impl InterferometerSpec {
    pub fn new(upper: ArmSpec, lower: ArmSpec, input: DensityMatrix) -> Result<Self> {
        if input.dim() != 2 {
            return Err(invalid!("interferometer input must be a 2x2 polarization state"));
        }
        Ok(Self {
            upper,
            lower,
            input,
            coherence_length: L1_UM,
        })
    }

    /// Same interferometer with the arms exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            upper: self.lower.clone(),
            lower: self.upper.clone(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeResult {
    pub contrast: Complex64,
    pub visibility: f64,
    pub fringe_phase: f64,
}

impl FringeResult {
    pub fn from_contrast(contrast: Complex64) -> Self {
        Self {
            contrast,
            visibility: contrast.norm(),
            fringe_phase: contrast.arg(),
        }
    }
}

fn pair_trace(u: &ComplexMatrix, v: &ComplexMatrix, rho: &ComplexMatrix) -> Complex64 {
    (&(&u.adjoint() * v) * rho).trace().expect("2x2 operators")
}

fn shared_env_contrast(upper: &[DelayedKraus], lower: &[DelayedKraus], rho: &ComplexMatrix) -> Complex64 {
    upper
        .iter()
        .flat_map(|u| {
            lower
                .iter()
                .filter(move |v| (u.delay - v.delay).abs() <= DELAY_MERGE_TOL)
                .map(move |v| pair_trace(&u.op, &v.op, rho))
        })
        .sum()
}

/// Contrast when both arms share one time-bin environment.
pub fn contrast_shared_env(spec: &InterferometerSpec) -> Result<FringeResult> {
    let upper = compose_arm(&spec.upper)?;
    let lower = compose_arm(&spec.lower)?;
    Ok(FringeResult::from_contrast(shared_env_contrast(
        &upper,
        &lower,
        spec.input.matrix(),
    )))
}

fn undelayed(kraus: &[DelayedKraus]) -> ComplexMatrix {
    kraus
        .iter()
        .find(|k| k.delay.abs() <= DELAY_MERGE_TOL)
        .map(|k| k.op.clone())
        .unwrap_or_else(|| ComplexMatrix::zeros(2, 2))
}

/// Contrast when each arm has its own environment: only the undelayed Kraus
/// operators u₀, v₀ interfere, C = Tr[u₀† v₀ ρ].
pub fn contrast_independent_env(upper: &ArmSpec, lower: &ArmSpec, rho: &DensityMatrix) -> Result<FringeResult> {
    let u0 = undelayed(&compose_arm(upper)?);
    let v0 = undelayed(&compose_arm(lower)?);
    Ok(FringeResult::from_contrast(pair_trace(&u0, &v0, rho.matrix())))
}

/// P|0⟩(φ) = ½(1 + Re[e^{iφ} C]).
pub fn output_probability(fringe: &FringeResult, phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(invalid!("phase must be finite"));
    }
    let p = 0.5 * (1.0 + (Complex64::from_polar(1.0, phi) * fringe.contrast).re);
    if (p - 0.5).abs() > 0.5 + 1e-9 {
        return Err(Error::Internal(format!(
            "fringe probability {p} out of range for contrast {}",
            fringe.contrast
        )));
    }
    Ok(if (-1e-12..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + 1e-12 {
        1.0
    } else {
        p
    })
}

/// Brute-force evolution of the whole interferometer.
struct OracleRun {
    /// Output state on path ⊗ polarization ⊗ bins.
    state: ComplexMatrix,
    bins: usize,
}

impl OracleRun {
    fn new(spec: &InterferometerSpec, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(invalid!("phase must be finite"));
        }
        let upper = compose_arm(&spec.upper)?;
        let lower = compose_arm(&spec.lower)?;
        let bins = time_bins(upper.iter().chain(&lower).map(|k| &k.delay));
        let dim = 4 * bins.len();
        if dim > ORACLE_MAX_DIM {
            return Err(Error::ResourceLimit(format!(
                "oracle space of dimension {dim} exceeds {ORACLE_MAX_DIM}"
            )));
        }
        let u = dilation_on_bins(&upper, &bins)?.unitary;
        let v = dilation_on_bins(&lower, &bins)?.unitary;
        let env = 2 * bins.len();
        let id_env = ComplexMatrix::identity(env);

        let p0 = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 0.0]]);
        let p1 = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        let arms = &p0.kron(&u) + &p1.kron(&v);
        let split = beamsplitter().kron(&id_env);
        // The recombining beamsplitter is U_b†, which sends identical arms to port |0⟩.
        let recombine = beamsplitter().adjoint().kron(&id_env);
        let phase = phase_shifter(phi).kron(&id_env);
        let evolution = &recombine * &(&arms * &(&phase * &split));

        let mut e0 = ComplexMatrix::zeros(bins.len(), bins.len());
        e0.set(0, 0, Complex64::new(1.0, 0.0));
        let input = p0.kron(spec.input.matrix()).kron(&e0);
        let state = &(&evolution * &input) * &evolution.adjoint();
        Ok(Self {
            state,
            bins: bins.len(),
        })
    }

    fn path_probabilities(&self) -> (f64, f64) {
        let path = self
            .state
            .partial_trace(&[2, 2, self.bins], &[0])
            .expect("dimensions match by construction");
        (path.get(0, 0).re, path.get(1, 1).re)
    }

    /// Unnormalized polarization state in output port |0⟩.
    fn port_zero_polarization(&self) -> ComplexMatrix {
        let half = 2 * self.bins;
        self.state
            .block(0..half, 0..half)
            .partial_trace(&[2, self.bins], &[0])
            .expect("dimensions match by construction")
    }
}

/// Bright-port probability from the brute-force dilation evolution.
pub fn oracle_probability(spec: &InterferometerSpec, phi: f64) -> Result<f64> {
    Ok(OracleRun::new(spec, phi)?.path_probabilities().0)
}

/// Probabilities of both output ports, (P|0⟩, P|1⟩), from the oracle.
pub fn oracle_port_probabilities(spec: &InterferometerSpec, phi: f64) -> Result<(f64, f64)> {
    Ok(OracleRun::new(spec, phi)?.path_probabilities())
}

/// Contrast recovered from oracle probabilities at φ = 0 and φ = π/2:
/// Re C = 2P(0) − 1 and Im C = 1 − 2P(π/2).
pub fn oracle_contrast(spec: &InterferometerSpec) -> Result<FringeResult> {
    let p0 = oracle_probability(spec, 0.0)?;
    let p90 = oracle_probability(spec, std::f64::consts::FRAC_PI_2)?;
    Ok(FringeResult::from_contrast(Complex64::new(
        2.0 * p0 - 1.0,
        1.0 - 2.0 * p90,
    )))
}

/// Polarization state of photons detected in port |0⟩, normalized.
pub fn output_polarization_state(spec: &InterferometerSpec, phi: f64) -> Result<DensityMatrix> {
    let run = OracleRun::new(spec, phi)?;
    let (p0, _) = run.path_probabilities();
    if p0 < POSTSELECTION_MIN {
        return Err(Error::DegeneratePostselection(p0));
    }
    DensityMatrix::new(run.port_zero_polarization().scale(Complex64::new(1.0 / p0, 0.0)))
}
