//! Linear-inversion process tomography of single-qubit channels, and the
//! demonstration that it cannot distinguish arm configurations whose
//! interference visibilities differ.
//!
//! The process matrix is expressed in the Pauli basis {I, X, Y, Z} with
//! E(ρ) = Σ χ_mn P_m ρ P_n, so a trace-preserving channel has Tr χ = 1 and
//! the identity channel reads χ = diag(1, 0, 0, 0).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::experiments::{config_fig4, Fig4Variant};
use crate::interferometer::contrast_shared_env;
use crate::linalg::{paulis, ComplexMatrix, DensityMatrix, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
use crate::optics::arm_channel_apply;

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    chi: ComplexMatrix,
}

impl ProcessMatrix {
    pub fn new(chi: ComplexMatrix) -> Result<Self> {
        if chi.rows() != 4 || chi.cols() != 4 {
            return Err(Error::InvalidChannel(format!(
                "χ must be 4x4, got {}x{}",
                chi.rows(),
                chi.cols()
            )));
        }
        let herm = chi.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidChannel(format!(
                "χ is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = chi.trace()?;
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidChannel(format!(
                "χ has trace {tr}; channel is not trace preserving"
            )));
        }
        let min_ev = chi.hermitian_eigenvalues()?[0];
        if min_ev < PSD_TOL {
            return Err(Error::InvalidChannel(format!(
                "χ has eigenvalue {min_ev:e}; channel is not completely positive"
            )));
        }
        Ok(Self { chi })
    }

    pub fn chi(&self) -> &ComplexMatrix {
        &self.chi
    }

    /// Applies the reconstructed channel, Σ χ_mn P_m ρ P_n.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let p = paulis();
        let mut out = ComplexMatrix::zeros(2, 2);
        for (m, pm) in p.iter().enumerate() {
            let left = pm * rho;
            for (n, pn) in p.iter().enumerate() {
                let w = self.chi.get(m, n);
                if w.norm() == 0.0 {
                    continue;
                }
                out = &out + &(&left * pn).scale(w);
            }
        }
        out
    }
}

fn probe_states() -> [DensityMatrix; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket = |a: Complex64, b: Complex64| DensityMatrix::from_ket(&[a, b]).expect("normalized probe");
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    [
        ket(one, zero),
        ket(zero, one),
        ket(Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
        ket(Complex64::new(h, 0.0), Complex64::new(0.0, h)),
    ]
}

/// Reconstructs χ from the channel's action on |H⟩, |V⟩, |D⟩ and |R⟩.
///
/// The outputs on |j⟩⟨k| follow by linearity:
/// E(|0⟩⟨1|) = (A + iB)/2 and E(|1⟩⟨0|) = (A − iB)/2, with
/// A = 2E(D) − E(H) − E(V) and B = 2E(R) − E(H) − E(V).
/// χ_mn = ⟨⟨P_m| J |P_n⟩⟩ / 4, where J = Σ |j⟩⟨k| ⊗ E(|j⟩⟨k|) is the Choi
/// matrix and |P⟩⟩ = Σ_j |j⟩ ⊗ P|j⟩.
pub fn qpt<F>(channel: F) -> Result<ProcessMatrix>
where
    F: Fn(&DensityMatrix) -> ComplexMatrix,
{
    let outputs = probe_states()
        .iter()
        .map(|probe| {
            DensityMatrix::new(channel(probe))
                .map(DensityMatrix::into_matrix)
                .map_err(|e| Error::InvalidChannel(format!("channel output rejected: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let [eh, ev, ed, er] = <[ComplexMatrix; 4]>::try_from(outputs).expect("four probes");

    let base = &eh + &ev;
    let a = &ed.scale(Complex64::new(2.0, 0.0)) - &base;
    let b = &er.scale(Complex64::new(2.0, 0.0)) - &base;
    let ib = b.scale(Complex64::new(0.0, 1.0));
    let half = Complex64::new(0.5, 0.0);
    let e01 = (&a + &ib).scale(half);
    let e10 = (&a - &ib).scale(half);
    let images = [[&eh, &e01], [&e10, &ev]];

    let mut choi = ComplexMatrix::zeros(4, 4);
    for (j, row) in images.iter().enumerate() {
        for (k, image) in row.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    choi.set(j * 2 + r, k * 2 + c, image.get(r, c));
                }
            }
        }
    }

    let vecs: Vec<Vec<Complex64>> = paulis()
        .iter()
        .map(|p| {
            let mut v = vec![Complex64::new(0.0, 0.0); 4];
            for j in 0..2 {
                for r in 0..2 {
                    v[j * 2 + r] = p.get(r, j);
                }
            }
            v
        })
        .collect();

    let mut chi = ComplexMatrix::zeros(4, 4);
    for m in 0..4 {
        for n in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..4 {
                for c in 0..4 {
                    acc += vecs[m][r].conj() * choi.get(r, c) * vecs[n][c];
                }
            }
            chi.set(m, n, acc / 4.0);
        }
    }
    ProcessMatrix::new(chi)
}

/// Frobenius distance between two process matrices.
pub fn chi_distance(a: &ProcessMatrix, b: &ProcessMatrix) -> f64 {
    (a.chi() - b.chi()).frobenius_norm()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlindnessReport {
    pub beta: f64,
    pub chi_distance_upper: f64,
    pub chi_distance_lower: f64,
    /// Shared-environment visibility of configuration (a).
    pub visibility_a: f64,
    /// Shared-environment visibility of configuration (c).
    pub visibility_b: f64,
    pub visibility_gap: f64,
}

/// Compares configurations (a) and (c) at the same β. Their arms carry the
/// same crystal angles and differ only in which crystal lengths sit where,
/// so per-arm tomography sees identical channels while the interference
/// visibilities differ.
pub fn blindness_demo(beta: f64) -> Result<BlindnessReport> {
    let first = config_fig4(Fig4Variant::A, beta)?;
    let second = config_fig4(Fig4Variant::C, beta)?;

    let chi_of = |arm| {
        qpt(|rho| {
            arm_channel_apply(arm, rho)
                .map(DensityMatrix::into_matrix)
                .unwrap_or_else(|_| ComplexMatrix::zeros(2, 2))
        })
    };
    let chi_distance_upper = chi_distance(&chi_of(&first.upper)?, &chi_of(&second.upper)?);
    let chi_distance_lower = chi_distance(&chi_of(&first.lower)?, &chi_of(&second.lower)?);

    let visibility_a = contrast_shared_env(&first)?.visibility;
    let visibility_b = contrast_shared_env(&second)?.visibility;
    Ok(BlindnessReport {
        beta,
        chi_distance_upper,
        chi_distance_lower,
        visibility_a,
        visibility_b,
        visibility_gap: (visibility_a - visibility_b).abs(),
    })
}
