//! Dense complex matrices and the elementary quantum objects built on them.
//!
//! Basis conventions are global: polarization kets are ordered (H, V) and the
//! path qubit is ordered (|0⟩, |1⟩). Composite spaces use the row-major
//! Kronecker convention, so the first factor is the most significant index.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Entrywise tolerance for Hermiticity of a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on the unit trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;
/// Entrywise tolerance on Σ K†K = I.
pub const CPTP_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid!("matrix shape {rows}x{cols} has an empty dimension"));
        }
        if data.len() != rows * cols {
            return Err(invalid!("{} entries supplied for a {rows}x{cols} matrix", data.len()));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid!("entry {pos} is not finite"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            assert_eq!(r.as_ref().len(), m, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::new(n, m, data).expect("invalid matrix literal")
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    /// Column vector from a slice of amplitudes.
    pub fn column(entries: &[Complex64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    /// Outer product |a⟩⟨b| of two column vectors.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                m.data[i * b.len() + j] = x * y.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Complex64) {
        self.data[r * self.cols + c] = value;
    }

    /// Checked matrix product `self · rhs`.
    pub fn mat_mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(invalid!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(invalid!("trace of a non-square {}x{} matrix", self.rows, self.cols));
        }
        Ok((0..self.rows).map(|i| self.data[i * self.cols + i]).sum())
    }

    /// Tensor product with the row-major block convention:
    /// block (i, j) of the result is `self[i][j] · rhs`.
    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.data[(i * rhs.rows + k) * cols + j * rhs.cols + l] = a * rhs.data[k * rhs.cols + l];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`; shapes must match.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.max_abs_diff(other) <= tol
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part
    /// of `self` is used.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(invalid!("eigenvalues of a non-square matrix"));
        }
        let n = self.rows;
        let m = DMatrix::from_row_slice(n, n, &self.data);
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    /// Reduced matrix over the factors listed in `keep` (in their original
    /// order), tracing out the rest. `dims` gives the factor dimensions.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
        if !self.is_square() {
            return Err(invalid!("partial trace of a non-square matrix"));
        }
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || total != self.rows {
            return Err(invalid!("factor dimensions {dims:?} do not multiply to {}", self.rows));
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
            return Err(invalid!("kept factor {bad} out of range for {} factors", dims.len()));
        }

        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let offsets = |factors: &[usize]| -> Vec<usize> {
            let mut offs = vec![0usize];
            for &f in factors {
                let stride = strides[f];
                offs = offs
                    .iter()
                    .flat_map(|&o| (0..dims[f]).map(move |d| o + d * stride))
                    .collect();
            }
            offs
        };
        let kept_offsets = offsets(&keep);
        let traced_offsets = offsets(&traced);

        let n = kept_offsets.len();
        let mut out = Self::zeros(n, n);
        for (a, &ra) in kept_offsets.iter().enumerate() {
            for (b, &cb) in kept_offsets.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &traced_offsets {
                    acc += self.data[(ra + t) * self.cols + cb + t];
                }
                out.data[a * n + b] = acc;
            }
        }
        Ok(out)
    }

    /// Copy of the sub-block with the given row and column ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> ComplexMatrix {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                out.data[i * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a dimension mismatch; use [`ComplexMatrix::mat_mul`] for a
    /// checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.mat_mul(rhs).expect("matrix dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Free-function form of [`ComplexMatrix::mat_mul`].
pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.mat_mul(b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn trace(a: &ComplexMatrix) -> Result<Complex64> {
    a.trace()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// A valid quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            ));
        }
        let herm = matrix.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(invalid!("density matrix is not Hermitian (deviation {herm:e})"));
        }
        let tr = matrix.trace()?;
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(invalid!("density matrix trace is {tr}, expected 1"));
        }
        let min_ev = matrix.hermitian_eigenvalues()?[0];
        if min_ev < PSD_TOL {
            return Err(invalid!("density matrix has negative eigenvalue {min_ev:e}"));
        }
        Ok(Self { matrix })
    }

    /// Pure state |ψ⟩⟨ψ| from a normalized ket.
    pub fn from_ket(ket: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(ket, ket))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues().expect("density matrix is square")
    }
}

/// Reduced state over the `keep` factors of a composite state.
pub fn partial_trace(state: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    DensityMatrix::new(state.matrix().partial_trace(dims, keep)?)
}

/// The maximally mixed state I/d.
pub fn maximally_mixed(d: usize) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(invalid!("maximally mixed state needs dimension ≥ 1"));
    }
    DensityMatrix::new(ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0)))
}

/// Kraus representation of a channel; all operators share one square shape.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| invalid!("Kraus set must contain at least one operator"))?;
        let d = first.rows();
        if let Some(bad) = operators.iter().find(|k| !k.is_square() || k.rows() != d) {
            return Err(invalid!(
                "Kraus operators must all be {d}x{d}, found {}x{}",
                bad.rows(),
                bad.cols()
            ));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// ρ ↦ Σ K ρ K†.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &(&(k * rho) * &k.adjoint()))
    }
}

/// Outcome of the completeness check Σ K†K = I.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpCheck {
    pub residual: f64,
    pub pass: bool,
}

pub fn validate_cptp(kraus: &KrausSet) -> CptpCheck {
    let d = kraus.dim();
    let sum = kraus
        .operators()
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &(&k.adjoint() * k));
    let residual = sum.max_abs_diff(&ComplexMatrix::identity(d));
    CptpCheck {
        residual,
        pass: residual <= CPTP_TOL,
    }
}

/// Beamsplitter U_b = (1/√2)[[1, 1], [−1, 1]].
pub fn beamsplitter() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[[h, h], [-h, h]])
}

/// Phase shifter diag(1, e^{iφ}).
pub fn phase_shifter(phi: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[ONE, Complex64::from_polar(1.0, phi)])
}

/// Orthonormal pair (|θ_o⟩, |θ_e⟩) = ((cos θ, sin θ), (−sin θ, cos θ)).
pub fn rotated_basis(theta: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let (s, c) = theta.sin_cos();
    (
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
    )
}

/// Half-wave plate with fast axis at `theta`: [[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]].
/// The conventional −i global phase is dropped.
pub fn half_waveplate(theta: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    ComplexMatrix::from_real_rows(&[[c, s], [s, -c]])
}

/// Pauli matrices in the order I, X, Y, Z.
pub fn paulis() -> [ComplexMatrix; 4] {
    let i = Complex64::new(0.0, 1.0);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]),
        ComplexMatrix::from_rows(&[[ZERO, -i], [i, ZERO]]),
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]),
    ]
}
