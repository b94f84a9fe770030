//! Interferometer arms as delay-tagged Kraus operators.
//!
//! A birefringent crystal with fast axis at θ splits a photon into an o-ray
//! (projected on |θ_o⟩, undelayed) and an e-ray (projected on |θ_e⟩, delayed
//! by the crystal's o/e separation). The arrival time is the environment: two
//! branches with the same accumulated delay land in the same time bin and add
//! coherently, branches with different delays are orthogonal.
//!
//! Delays are in micrometres of wavepacket separation.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{half_waveplate, maximally_mixed, rotated_basis, ComplexMatrix, DensityMatrix, KrausSet};

/// Delays closer than this (µm) occupy the same time bin.
pub const DELAY_MERGE_TOL: f64 = 1e-9;
/// Operators whose largest entry is below this are dropped.
pub const ZERO_OPERATOR_TOL: f64 = 1e-14;
/// Unitarity tolerance for raw arm elements.
pub const UNITARY_TOL: f64 = 1e-10;

/// Short crystal o/e separation, about 190λ at 780 nm.
pub const L1_UM: f64 = 150.0;
/// Long crystal o/e separation, about 398λ at 780 nm.
pub const L2_UM: f64 = 310.0;
/// Centre wavelength of the photons, used only for unit conversion.
pub const WAVELENGTH_UM: f64 = 0.78;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrystalSpec {
    /// Fast-axis angle relative to horizontal, radians.
    pub axis_angle: f64,
    /// Relative o/e wavepacket separation, µm.
    pub delay: f64,
}

impl CrystalSpec {
    pub fn new(axis_angle: f64, delay: f64) -> Result<Self> {
        if !axis_angle.is_finite() {
            return Err(invalid!("crystal axis angle must be finite"));
        }
        if !delay.is_finite() || delay < 0.0 {
            return Err(invalid!("crystal delay must be finite and non-negative, got {delay}"));
        }
        Ok(Self { axis_angle, delay })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArmElement {
    Crystal(CrystalSpec),
    /// Half-wave plate with fast axis at the given angle (radians).
    Waveplate {
        axis_angle: f64,
    },
    RawUnitary(ComplexMatrix),
}

impl ArmElement {
    pub fn crystal(axis_angle: f64, delay: f64) -> Self {
        ArmElement::Crystal(CrystalSpec { axis_angle, delay })
    }

    pub fn waveplate(axis_angle: f64) -> Self {
        ArmElement::Waveplate { axis_angle }
    }

    /// Global phase element e^{iθ}·I.
    pub fn phase(theta: f64) -> Self {
        ArmElement::RawUnitary(ComplexMatrix::identity(2).scale(Complex64::from_polar(1.0, theta)))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ArmElement::Crystal(c) => CrystalSpec::new(c.axis_angle, c.delay).map(|_| ()),
            ArmElement::Waveplate { axis_angle } if !axis_angle.is_finite() => {
                Err(invalid!("waveplate angle must be finite"))
            }
            ArmElement::Waveplate { .. } => Ok(()),
            ArmElement::RawUnitary(u) => {
                if u.rows() != 2 || u.cols() != 2 {
                    return Err(invalid!("raw unitary must be 2x2, got {}x{}", u.rows(), u.cols()));
                }
                let err = (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(2));
                if err > UNITARY_TOL {
                    return Err(invalid!("raw element is not unitary (U†U − I deviation {err:e})"));
                }
                Ok(())
            }
        }
    }

    fn branches(&self) -> Vec<DelayedKraus> {
        match self {
            ArmElement::Crystal(c) => crystal_kraus(c).to_vec(),
            ArmElement::Waveplate { axis_angle } => {
                vec![DelayedKraus {
                    op: half_waveplate(*axis_angle),
                    delay: 0.0,
                }]
            }
            ArmElement::RawUnitary(u) => vec![DelayedKraus {
                op: u.clone(),
                delay: 0.0,
            }],
        }
    }
}

/// Optical elements in the order light traverses them. Empty means identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArmSpec {
    pub elements: Vec<ArmElement>,
}

impl ArmSpec {
    pub fn new(elements: Vec<ArmElement>) -> Self {
        Self { elements }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        self.elements.iter().try_for_each(ArmElement::validate)
    }

    pub fn crystal_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, ArmElement::Crystal(_)))
            .count()
    }

    /// True when the arm contains only crystals and waveplates.
    pub fn is_passive_birefringent(&self) -> bool {
        !self.elements.iter().any(|e| matches!(e, ArmElement::RawUnitary(_)))
    }
}

/// A 2×2 polarization operator that leaves the environment in the time bin
/// `delay` µm after the undelayed pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayedKraus {
    pub op: ComplexMatrix,
    pub delay: f64,
}

/// The two branches of a crystal: o-ray projector at delay 0, e-ray
/// projector at the crystal's delay.
pub fn crystal_kraus(c: &CrystalSpec) -> [DelayedKraus; 2] {
    let (o, e) = rotated_basis(c.axis_angle);
    [
        DelayedKraus {
            op: ComplexMatrix::outer(&o, &o),
            delay: 0.0,
        },
        DelayedKraus {
            op: ComplexMatrix::outer(&e, &e),
            delay: c.delay,
        },
    ]
}

/// Sums operators that share a time bin, drops vanishing ones, and returns
/// the set sorted by delay.
fn merge(mut ops: Vec<DelayedKraus>) -> Vec<DelayedKraus> {
    ops.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    let mut merged: Vec<DelayedKraus> = Vec::with_capacity(ops.len());
    for k in ops {
        match merged.last_mut() {
            Some(last) if (k.delay - last.delay).abs() <= DELAY_MERGE_TOL => {
                last.op = &last.op + &k.op;
            }
            _ => merged.push(k),
        }
    }
    merged.retain(|k| k.op.max_abs() >= ZERO_OPERATOR_TOL);
    merged
}

/// Kraus operators of an arm. Each output is a product of one branch per
/// element (later elements multiply on the left) tagged with the summed
/// delay; coincident delays are merged and zero products dropped.
pub fn compose_arm(arm: &ArmSpec) -> Result<Vec<DelayedKraus>> {
    arm.validate()?;
    let mut acc = vec![DelayedKraus {
        op: ComplexMatrix::identity(2),
        delay: 0.0,
    }];
    for element in &arm.elements {
        let branches = element.branches();
        let next = acc
            .iter()
            .flat_map(|k| {
                branches.iter().map(move |b| DelayedKraus {
                    op: &b.op * &k.op,
                    delay: k.delay + b.delay,
                })
            })
            .collect();
        acc = merge(next);
    }
    Ok(acc)
}

/// The arm's Kraus operators as a plain [`KrausSet`] (time traced out).
/// An arm whose every branch vanishes is not trace preserving and is rejected.
pub fn arm_kraus_set(arm: &ArmSpec) -> Result<KrausSet> {
    KrausSet::new(compose_arm(arm)?.into_iter().map(|k| k.op).collect())
}

/// Sorted distinct delays of a set of Kraus operators, always including the
/// undelayed bin 0.
pub fn time_bins<'a, I>(delays: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a f64>,
{
    let mut bins: Vec<f64> = std::iter::once(0.0).chain(delays.into_iter().copied()).collect();
    bins.sort_by(|a, b| a.total_cmp(b));
    bins.dedup_by(|b, a| (*b - *a).abs() <= DELAY_MERGE_TOL);
    bins
}

/// Unitary on polarization ⊗ time bins, index `pol · bins.len() + bin`.
#[derive(Clone, Debug)]
pub struct Dilation {
    pub unitary: ComplexMatrix,
    pub bins: Vec<f64>,
}

impl Dilation {
    /// Block ⟨bin_k|U|bin_0⟩, the Kraus operator landing in bin `k`.
    pub fn kraus_block(&self, k: usize) -> ComplexMatrix {
        let b = self.bins.len();
        let mut out = ComplexMatrix::zeros(2, 2);
        for q in 0..2 {
            for p in 0..2 {
                out.set(q, p, self.unitary.get(q * b + k, p * b));
            }
        }
        out
    }
}

/// Unitary dilation of an arm over its own time bins.
pub fn arm_dilation(arm: &ArmSpec) -> Result<Dilation> {
    let kraus = compose_arm(arm)?;
    let bins = time_bins(kraus.iter().map(|k| &k.delay));
    dilation_on_bins(&kraus, &bins)
}

/// Unitary dilation of a Kraus set on a prescribed bin grid. `bins` must be
/// sorted, start at 0 (the initial environment state |e₀⟩), and contain
/// every delay of `kraus`.
///
/// The |e₀⟩ columns hold the Kraus operators; the remaining columns are a
/// Gram-Schmidt completion over the standard basis.
pub fn dilation_on_bins(kraus: &[DelayedKraus], bins: &[f64]) -> Result<Dilation> {
    if bins.first().is_none_or(|&b| b.abs() > DELAY_MERGE_TOL) {
        return Err(invalid!("time-bin grid must start at the undelayed bin 0"));
    }
    let b = bins.len();
    let n = 2 * b;
    let bin_of = |delay: f64| bins.iter().position(|&d| (d - delay).abs() <= DELAY_MERGE_TOL);

    let mut isometry = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    for k in kraus {
        let idx = bin_of(k.delay).ok_or_else(|| invalid!("delay {} µm missing from the bin grid", k.delay))?;
        for (p, col) in isometry.iter_mut().enumerate() {
            for q in 0..2 {
                col[q * b + idx] += k.op.get(q, p);
            }
        }
    }

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for col in &isometry {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(invalid!("Kraus set is not trace preserving (column norm {norm})"));
        }
        basis.push(col.clone());
    }
    for j in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[j] = Complex64::new(1.0, 0.0);
        // two passes keep the completion orthogonal to working precision
        for _ in 0..2 {
            for u in &basis {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, x)| a.conj() * x).sum();
                for (x, a) in v.iter_mut().zip(u) {
                    *x -= proj * a;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }

    // Columns pol·b + 0 carry the isometry; the rest take completion vectors in order.
    let mut unitary = ComplexMatrix::zeros(n, n);
    let mut extra = basis.drain(2..).collect::<Vec<_>>().into_iter();
    for col in 0..n {
        let vec = if col % b == 0 {
            basis[col / b].clone()
        } else {
            extra.next().expect("completion spans the space")
        };
        for (row, z) in vec.into_iter().enumerate() {
            unitary.set(row, col, z);
        }
    }
    Ok(Dilation {
        unitary,
        bins: bins.to_vec(),
    })
}

/// Polarization channel of an arm with the time bins traced out.
pub fn arm_channel_apply(arm: &ArmSpec, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(invalid!("arm channels act on 2x2 polarization states"));
    }
    let set = arm_kraus_set(arm)?;
    DensityMatrix::new(set.apply(rho.matrix()))
}

/// Delay in µm for a separation given in wavelengths.
pub fn wavelengths_to_um(n_lambda: f64) -> f64 {
    n_lambda * WAVELENGTH_UM
}

/// Convenience: I/2, the state used throughout the experiments.
pub fn unpolarized() -> DensityMatrix {
    maximally_mixed(2).expect("dimension 2 is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::validate_cptp;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn real(rows: [[f64; 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&rows)
    }

    const HH: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 0.0]];
    const VV: [[f64; 2]; 2] = [[0.0, 0.0], [0.0, 1.0]];

    #[test]
    fn crystal_kraus_axis_aligned() {
        let [o, e] = crystal_kraus(&CrystalSpec::new(0.0, L2_UM).unwrap());
        assert_eq!((o.delay, e.delay), (0.0, 310.0));
        assert!(o.op.approx_eq(&real(HH), 0.0));
        assert!(e.op.approx_eq(&real(VV), 1e-16));
    }

    #[test]
    fn crystal_kraus_diagonal_axis() {
        let [o, e] = crystal_kraus(&CrystalSpec::new(FRAC_PI_4, 75.0).unwrap());
        assert!(o.op.approx_eq(&real([[0.5, 0.5], [0.5, 0.5]]), 1e-15));
        assert!(e.op.approx_eq(&real([[0.5, -0.5], [-0.5, 0.5]]), 1e-15));
        let set = KrausSet::new(vec![o.op, e.op]).unwrap();
        assert!(validate_cptp(&set).pass);
    }

    #[test]
    fn crystal_spec_rejects_negative_delay() {
        assert!(CrystalSpec::new(0.0, -1.0).is_err());
        assert!(CrystalSpec::new(0.0, f64::INFINITY).is_err());
        let arm = ArmSpec::new(vec![ArmElement::crystal(0.0, -5.0)]);
        assert!(compose_arm(&arm).is_err());
    }

    #[test]
    fn raw_unitary_validation() {
        let bad = ArmSpec::new(vec![ArmElement::RawUnitary(real([[1.0, 0.0], [0.0, 0.5]]))]);
        assert!(matches!(compose_arm(&bad), Err(crate::Error::InvalidArgument(_))));
        let wrong_shape = ArmSpec::new(vec![ArmElement::RawUnitary(ComplexMatrix::identity(3))]);
        assert!(compose_arm(&wrong_shape).is_err());
    }

    #[test]
    fn empty_arm_is_identity() {
        let ks = compose_arm(&ArmSpec::empty()).unwrap();
        assert_eq!(
            ks,
            vec![DelayedKraus {
                op: ComplexMatrix::identity(2),
                delay: 0.0
            }]
        );
    }

    #[test]
    fn two_crystal_arm_matches_rotated_basis_form() {
        let beta = 0.3;
        let arm = ArmSpec::new(vec![ArmElement::crystal(0.0, L2_UM), ArmElement::crystal(beta, L1_UM)]);
        let ks = compose_arm(&arm).unwrap();
        let delays: Vec<f64> = ks.iter().map(|k| k.delay).collect();
        assert_eq!(delays, vec![0.0, 150.0, 310.0, 460.0]);

        // ⟨a_i|b_j⟩|a_i⟩⟨b_j| with a = β, b = 0
        let (ao, ae) = rotated_basis(beta);
        let (bo, be) = rotated_basis(0.0);
        let term = |a: &[Complex64; 2], b: &[Complex64; 2]| {
            let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            ComplexMatrix::outer(a, b).scale(overlap)
        };
        let expected = [term(&ao, &bo), term(&ae, &bo), term(&ao, &be), term(&ae, &be)];
        for (k, e) in ks.iter().zip(&expected) {
            assert!(k.op.approx_eq(e, 1e-15), "delay {}", k.delay);
        }
    }

    #[test]
    fn aligned_crystals_drop_cross_terms() {
        let arm = ArmSpec::new(vec![ArmElement::crystal(0.0, L1_UM), ArmElement::crystal(0.0, L2_UM)]);
        let ks = compose_arm(&arm).unwrap();
        assert_eq!(ks.len(), 2);
        assert_eq!(ks[0].delay, 0.0);
        assert!(ks[0].op.approx_eq(&real(HH), 0.0));
        assert_eq!(ks[1].delay, 460.0);
        assert!(ks[1].op.approx_eq(&real(VV), 1e-16));
    }

    #[test]
    fn equal_delays_merge_coherently() {
        // Two 75 µm crystals at ±45°: the |oe⟩ and |eo⟩ branches share delay 75.
        let arm = ArmSpec::new(vec![
            ArmElement::crystal(FRAC_PI_4, 75.0),
            ArmElement::crystal(-FRAC_PI_4, 75.0),
        ]);
        let ks = compose_arm(&arm).unwrap();
        // o⊥o' and e⊥e' vanish; only the merged 75 µm bin survives.
        assert_eq!(ks.len(), 1);
        assert_eq!(ks[0].delay, 75.0);
        assert!(validate_cptp(&KrausSet::new(vec![ks[0].op.clone()]).unwrap()).pass);
    }

    #[test]
    fn dilation_of_empty_arm() {
        let d = arm_dilation(&ArmSpec::empty()).unwrap();
        assert_eq!(d.bins, vec![0.0]);
        assert!(d.unitary.approx_eq(&ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn dilation_single_crystal_blocks() {
        let arm = ArmSpec::new(vec![ArmElement::crystal(0.0, 310.0)]);
        let d = arm_dilation(&arm).unwrap();
        assert_eq!(d.bins, vec![0.0, 310.0]);
        assert!(d.kraus_block(0).approx_eq(&real(HH), 0.0));
        assert!(d.kraus_block(1).approx_eq(&real(VV), 1e-16));
        let u = &d.unitary;
        assert!((&u.adjoint() * u).approx_eq(&ComplexMatrix::identity(4), 1e-12));
    }

    #[test]
    fn dilation_without_undelayed_branch_keeps_bin_zero() {
        let arm = ArmSpec::new(vec![
            ArmElement::crystal(0.0, 150.0),
            ArmElement::crystal(std::f64::consts::FRAC_PI_2, 150.0),
        ]);
        let ks = compose_arm(&arm).unwrap();
        assert!(ks.iter().all(|k| k.delay > 0.0));
        let d = arm_dilation(&arm).unwrap();
        assert_eq!(d.bins[0], 0.0);
        assert!(d.kraus_block(0).max_abs() < 1e-15);
    }

    #[test]
    fn channel_on_unpolarized_and_diagonal() {
        let arm = ArmSpec::new(vec![ArmElement::crystal(0.3, 150.0), ArmElement::crystal(1.1, 310.0)]);
        let out = arm_channel_apply(&arm, &unpolarized()).unwrap();
        assert!(out.matrix().approx_eq(unpolarized().matrix(), 1e-15));

        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let diag = DensityMatrix::from_ket(&[h, h]).unwrap();
        let single = ArmSpec::new(vec![ArmElement::crystal(0.0, 310.0)]);
        let out = arm_channel_apply(&single, &diag).unwrap();
        assert!(out.matrix().approx_eq(unpolarized().matrix(), 1e-15));

        let out = arm_channel_apply(&ArmSpec::empty(), &diag).unwrap();
        assert_eq!(out, diag);
    }

    #[test]
    fn lambda_conversion() {
        assert!((wavelengths_to_um(190.0) - 148.2).abs() < 1e-9);
        assert!((wavelengths_to_um(398.0) - 310.44).abs() < 1e-9);
    }

    fn element_strategy() -> impl Strategy<Value = ArmElement> {
        let delays = prop::sample::select(vec![0.0, 75.0, 150.0, 310.0]);
        prop_oneof![
            (0.0..std::f64::consts::PI, delays).prop_map(|(a, d)| ArmElement::crystal(a, d)),
            (0.0..std::f64::consts::PI).prop_map(ArmElement::waveplate),
            (
                0.0..std::f64::consts::TAU,
                0.0..std::f64::consts::TAU,
                0.0..std::f64::consts::PI
            )
                .prop_map(|(alpha, phi, theta)| {
                    let (s, c) = theta.sin_cos();
                    let a = Complex64::from_polar(c, alpha);
                    let b = Complex64::from_polar(s, phi);
                    ArmElement::RawUnitary(ComplexMatrix::from_rows(&[[a, -b.conj()], [b, a.conj()]]))
                }),
        ]
    }

    fn arm_strategy(max: usize) -> impl Strategy<Value = ArmSpec> {
        prop::collection::vec(element_strategy(), 0..=max).prop_map(ArmSpec::new)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn composed_arms_are_cptp(arm in arm_strategy(4)) {
            let set = arm_kraus_set(&arm).unwrap();
            prop_assert!(validate_cptp(&set).residual <= 1e-10);
            prop_assert!(set.operators().len() <= 1usize << arm.crystal_count());
        }

        #[test]
        fn zero_delays_reduce_to_jones_product(arm in arm_strategy(4)) {
            let flat = ArmSpec::new(arm.elements.iter().map(|e| match e {
                ArmElement::Crystal(c) => ArmElement::crystal(c.axis_angle, 0.0),
                other => other.clone(),
            }).collect());
            let ks = compose_arm(&flat).unwrap();
            prop_assert_eq!(ks.len(), 1);
            // a zero-delay crystal is the identity on polarization
            let product = flat.elements.iter().fold(ComplexMatrix::identity(2), |acc, e| match e {
                ArmElement::Crystal(_) => acc,
                ArmElement::Waveplate { axis_angle } => &half_waveplate(*axis_angle) * &acc,
                ArmElement::RawUnitary(u) => u * &acc,
            });
            prop_assert!(ks[0].op.approx_eq(&product, 1e-12));
        }

        #[test]
        fn passive_arms_are_unital(arm in arm_strategy(4)) {
            prop_assume!(arm.is_passive_birefringent());
            let out = arm_channel_apply(&arm, &unpolarized()).unwrap();
            prop_assert!(out.matrix().approx_eq(unpolarized().matrix(), 1e-12));
        }

        #[test]
        fn dilation_blocks_reproduce_kraus(arm in arm_strategy(4)) {
            let ks = compose_arm(&arm).unwrap();
            let d = arm_dilation(&arm).unwrap();
            let u = &d.unitary;
            prop_assert!((&u.adjoint() * u).approx_eq(&ComplexMatrix::identity(u.rows()), 1e-12));
            for (idx, &bin) in d.bins.iter().enumerate() {
                let block = d.kraus_block(idx);
                match ks.iter().find(|k| (k.delay - bin).abs() <= DELAY_MERGE_TOL) {
                    Some(k) => prop_assert!(block.approx_eq(&k.op, 1e-12)),
                    None => prop_assert!(block.max_abs() <= 1e-12),
                }
            }
        }
    }
}
