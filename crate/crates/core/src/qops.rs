//! Small-dimension complex operator algebra.
//!
//! Everything here works on dense `d x d` complex matrices with `d` at most 4:
//! density operators, POVM effects, unitaries and Kraus operators, together
//! with Born-rule probabilities and the Schrödinger/Heisenberg update rules.
//! Values are validated once at construction and immutable afterwards.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical tolerances used when validating operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationPolicy {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
    pub completeness: f64,
    pub unitary: f64,
    pub norm: f64,
}

impl ValidationPolicy {
    pub const STRICT: ValidationPolicy = ValidationPolicy {
        hermitian: 1e-12,
        trace: 1e-12,
        psd: 1e-10,
        completeness: 1e-10,
        unitary: 1e-12,
        norm: 1e-12,
    };
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        Self::STRICT
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    /// Builds a matrix from row-major rows. Rejects ragged or non-square
    /// input and non-finite entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::MalformedMatrix { dim: 0, found: 0 });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::MalformedMatrix {
                    dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_slice(dim, &entries)
    }

    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(Error::MalformedMatrix {
                dim,
                found: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(dim, dim, entries)))
    }

    /// Real matrix from row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_slice(dim, &c)
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        ComplexMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// `|a><b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        let col = DVector::from_column_slice(a);
        let row = DVector::from_column_slice(b);
        ComplexMatrix(&col * row.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.0[(r, c)]).collect())
            .collect()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexMatrix(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn try_mul(&self, other: &ComplexMatrix) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(ComplexMatrix(&self.0 * &other.0))
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(ComplexMatrix(&self.0 + &other.0))
    }

    pub fn try_sub(&self, other: &ComplexMatrix) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(ComplexMatrix(&self.0 - &other.0))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dims(self.dim(), v.len())?;
        let out = &self.0 * DVector::from_column_slice(v);
        Ok(out.iter().copied().collect())
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        Ok(acc)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigenvalues of the Hermitian part, ascending. Closed form for 2x2,
    /// Jacobi-style iteration (via nalgebra) otherwise.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut eig = if herm.nrows() == 2 {
            let a = herm[(0, 0)].re;
            let d = herm[(1, 1)].re;
            let b = herm[(0, 1)].norm();
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mid - rad, mid + rad]
        } else {
            herm.symmetric_eigenvalues()
                .iter()
                .copied()
                .collect::<Vec<f64>>()
        };
        eig.sort_by(f64::total_cmp);
        eig
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Pauli matrices and the qubit observables built from them.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// `(I - sigma) / 2`: projector onto the -1 eigenspace of `sigma`.
    fn bit_observable(sigma: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::identity(2)
            .try_sub(sigma)
            .unwrap()
            .scale_real(0.5)
    }

    /// `q = (I - Z)/2`.
    pub fn q_hat() -> ComplexMatrix {
        bit_observable(&z())
    }

    /// `p = (I - X)/2`.
    pub fn p_hat() -> ComplexMatrix {
        bit_observable(&x())
    }

    /// `r = (I - Y)/2`.
    pub fn r_hat() -> ComplexMatrix {
        bit_observable(&y())
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_policy(amplitudes, &ValidationPolicy::STRICT)
    }

    pub fn with_policy(amplitudes: Vec<Complex64>, policy: &ValidationPolicy) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ZeroVector);
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > policy.norm {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n.is_finite() && n > 1e-300) {
            return Err(Error::ZeroVector);
        }
        Self::new(amplitudes.into_iter().map(|a| a / n).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        StateVector { amplitudes: amps }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.projector(),
        }
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        StateVector { amplitudes }
    }

    /// Applies a unitary; the result is renormalized to absorb rounding.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<StateVector> {
        StateVector::normalized(unitary.apply(&self.amplitudes)?)
    }

    /// Multiplies by a global phase so that the first amplitude with
    /// modulus above `1e-9` is real and positive.
    pub fn canonical_phase(&self) -> Result<StateVector> {
        let lead = self
            .amplitudes
            .iter()
            .find(|a| a.norm() > 1e-9)
            .ok_or(Error::ZeroVector)?;
        let phase = lead.conj() / lead.norm();
        let mut amplitudes: Vec<Complex64> = self.amplitudes.iter().map(|a| a * phase).collect();
        let idx = self
            .amplitudes
            .iter()
            .position(|a| a.norm() > 1e-9)
            .unwrap();
        amplitudes[idx] = Complex64::new(amplitudes[idx].norm(), 0.0);
        Ok(StateVector { amplitudes })
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_policy(matrix, &ValidationPolicy::STRICT)
    }

    pub fn with_policy(matrix: ComplexMatrix, policy: &ValidationPolicy) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > policy.hermitian {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > policy.trace {
            return Err(Error::TraceNotOne { trace });
        }
        let min_eigenvalue = matrix.hermitian_eigenvalues()[0];
        if min_eigenvalue < -policy.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityOperator { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Measurement effect `E(y)` with its outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    matrix: ComplexMatrix,
    label: String,
}

impl PovmElement {
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        Self::with_policy(label, matrix, &ValidationPolicy::STRICT)
    }

    pub fn with_policy(
        label: impl Into<String>,
        matrix: ComplexMatrix,
        policy: &ValidationPolicy,
    ) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > policy.hermitian {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = matrix.hermitian_eigenvalues();
        if eig[0] < -policy.psd {
            return Err(Error::NotPositive {
                min_eigenvalue: eig[0],
            });
        }
        let max_eigenvalue = *eig.last().unwrap();
        if max_eigenvalue > 1.0 + policy.psd {
            return Err(Error::EffectAboveIdentity { max_eigenvalue });
        }
        Ok(PovmElement {
            matrix,
            label: label.into(),
        })
    }

    pub fn projector(label: impl Into<String>, state: &StateVector) -> Self {
        PovmElement {
            matrix: state.projector(),
            label: label.into(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        PovmElement {
            matrix: ComplexMatrix::identity(dim),
            label: "1".into(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Complete measurement: effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSet {
    elements: Vec<PovmElement>,
}

impl PovmSet {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        Self::with_policy(elements, &ValidationPolicy::STRICT)
    }

    pub fn with_policy(elements: Vec<PovmElement>, policy: &ValidationPolicy) -> Result<Self> {
        let first = elements
            .first()
            .ok_or(Error::IncompletePovm { deviation: 1.0 })?;
        let dim = first.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for e in &elements {
            sum = sum.try_add(e.matrix())?;
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > policy.completeness {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(PovmSet { elements })
    }

    /// Projective measurement onto an orthonormal basis.
    pub fn projective(basis: &[(&str, StateVector)]) -> Result<Self> {
        Self::new(
            basis
                .iter()
                .map(|(l, s)| PovmElement::projector(*l, s))
                .collect(),
        )
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn element(&self, label: &str) -> Result<&PovmElement> {
        self.elements
            .iter()
            .find(|e| e.label() == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// Unitary operator applied at time step `t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryStep {
    matrix: ComplexMatrix,
    time_index: usize,
}

impl UnitaryStep {
    pub fn new(matrix: ComplexMatrix, time_index: usize) -> Result<Self> {
        Self::with_policy(matrix, time_index, &ValidationPolicy::STRICT)
    }

    pub fn with_policy(
        matrix: ComplexMatrix,
        time_index: usize,
        policy: &ValidationPolicy,
    ) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let gram = matrix.adjoint().try_mul(&matrix)?;
        let deviation = gram.max_abs_diff(&ComplexMatrix::identity(matrix.dim()));
        if deviation > policy.unitary {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryStep { matrix, time_index })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }
}

/// Kraus operator of a (possibly weak) measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator(ComplexMatrix);

impl KrausOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(KrausOperator(matrix))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Born rule `tr(E rho)`.
pub fn born_probability(effect: &PovmElement, rho: &DensityOperator) -> Result<f64> {
    let p = effect.matrix().trace_product(rho.matrix())?;
    if p.im.abs() > 1e-9 {
        return Err(Error::ImaginaryProbability { imag: p.im });
    }
    let mut value = p.re;
    if value < 0.0 && value > -1e-10 {
        value = 0.0;
    } else if value > 1.0 && value < 1.0 + 1e-10 {
        value = 1.0;
    }
    Ok(value)
}

/// `U rho U^dagger`.
pub fn schrodinger_step(step: &UnitaryStep, rho: &DensityOperator) -> Result<DensityOperator> {
    let u = step.matrix();
    let out = u.try_mul(rho.matrix())?.try_mul(&u.adjoint())?;
    // The output is a density operator by construction; only rounding is
    // removed here.
    Ok(DensityOperator {
        matrix: hermitize(&out),
    })
}

/// `U^dagger E U`.
pub fn heisenberg_step(step: &UnitaryStep, effect: &PovmElement) -> Result<PovmElement> {
    let u = step.matrix();
    let out = u.adjoint().try_mul(effect.matrix())?.try_mul(u)?;
    Ok(PovmElement {
        matrix: hermitize(&out),
        label: effect.label.clone(),
    })
}

/// `K rho K^dagger` together with its trace. The caller renormalizes.
pub fn apply_kraus(kraus: &KrausOperator, rho: &DensityOperator) -> Result<(ComplexMatrix, f64)> {
    let k = kraus.matrix();
    let out = hermitize(&k.try_mul(rho.matrix())?.try_mul(&k.adjoint())?);
    let weight = out.trace().re;
    if weight < -1e-12 {
        return Err(Error::NegativeWeight { weight });
    }
    Ok((out, weight.max(0.0)))
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix((&m.0 + m.0.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Common gates used by the stabilizer enumeration and the CLI.
pub mod gates {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn hadamard() -> ComplexMatrix {
        let h = FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, &[h, h, h, -h]).unwrap()
    }

    pub fn phase() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[ONE, I])
    }

    pub fn phase_dagger() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[ONE, -I])
    }

    pub fn t_gate() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[ONE, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])
    }

    /// CNOT with control on the first qubit.
    pub fn cnot_12() -> ComplexMatrix {
        ComplexMatrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
        .unwrap()
    }

    /// CNOT with control on the second qubit.
    pub fn cnot_21() -> ComplexMatrix {
        ComplexMatrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        )
        .unwrap()
    }

    /// Embeds a single-qubit gate on qubit `k` (0 or 1) of a two-qubit register.
    pub fn on_qubit(gate: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        if k == 0 {
            tensor(gate, &id)
        } else {
            tensor(&id, gate)
        }
    }
}

/// The six single-qubit eigenstates `|0>, |1>, |+>, |->, |i>, |-i>`.
pub mod kets {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(a: Complex64, b: Complex64) -> StateVector {
        StateVector {
            amplitudes: vec![a, b],
        }
    }

    pub fn zero() -> StateVector {
        ket(ONE, ZERO)
    }
    pub fn one() -> StateVector {
        ket(ZERO, ONE)
    }
    pub fn plus() -> StateVector {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        ket(h, h)
    }
    pub fn minus() -> StateVector {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        ket(h, -h)
    }
    pub fn plus_i() -> StateVector {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        ket(h, I * h)
    }
    pub fn minus_i() -> StateVector {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        ket(h, -I * h)
    }
}
