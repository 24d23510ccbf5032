//! Discrete Wigner representations of one- and two-qubit operators.
//!
//! A phase point is the tuple of `q` and `p` bits, one pair per qubit. The
//! single-qubit phase-point operator is
//!
//! ```text
//! A(q, p) = [(-1)^q Z + (-1)^p X + (-1)^(q+p) Y + I] / 2
//! ```
//!
//! and the two-qubit operator is `A+(q1, p1) ⊗ A-(q2, p2)`, where `A-` flips
//! the sign of the `Y` term. States map to `W1 = tr(A rho) / d` and effects to
//! `W2 = tr(A E)`, so that `sum W2 * W1 = tr(E rho)`.
//!
//! Tables are stored point-indexed in lexicographic order of
//! `[q1, .., qn, p1, .., pn]`. The "layout" form is only for display: rows are
//! `p` descending (`p = 1` on top), columns are `q` ascending.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qops::{pauli, tensor, ComplexMatrix, DensityOperator, PovmElement};

/// Default tolerance below which an entry counts as negative.
pub const NEGATIVITY_TOL: f64 = 1e-9;

const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    State,
    Povm,
    Posterior,
    Unnormalized,
}

impl TableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TableKind::State => "state",
            TableKind::Povm => "povm",
            TableKind::Posterior => "posterior",
            TableKind::Unnormalized => "unnormalized",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "state" => Ok(TableKind::State),
            "povm" => Ok(TableKind::Povm),
            "posterior" => Ok(TableKind::Posterior),
            "unnormalized" => Ok(TableKind::Unnormalized),
            other => Err(Error::Parse(format!("unknown table kind '{other}'"))),
        }
    }
}

/// Phase-space point `[q1, .., qn, p1, .., pn]` with `n` in `{1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    n_qubits: u8,
    coords: [u8; 4],
}

impl PhasePoint {
    pub fn new(coords: &[u8]) -> Result<Self> {
        if coords.len() != 2 && coords.len() != 4 {
            return Err(Error::Parse(format!(
                "phase point needs 2 or 4 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|&b| b > 1) {
            return Err(Error::Parse(format!(
                "phase point coordinates must be bits: {coords:?}"
            )));
        }
        let mut c = [0u8; 4];
        c[..coords.len()].copy_from_slice(coords);
        Ok(PhasePoint {
            n_qubits: (coords.len() / 2) as u8,
            coords: c,
        })
    }

    /// Point with the given lexicographic index.
    fn from_index(n_qubits: usize, index: usize) -> Self {
        let len = 2 * n_qubits;
        let mut c = [0u8; 4];
        for (i, slot) in c.iter_mut().take(len).enumerate() {
            *slot = ((index >> (len - 1 - i)) & 1) as u8;
        }
        PhasePoint {
            n_qubits: n_qubits as u8,
            coords: c,
        }
    }

    /// All `4^n` points in storage order.
    pub fn all(n_qubits: usize) -> Vec<PhasePoint> {
        (0..1usize << (2 * n_qubits))
            .map(|i| Self::from_index(n_qubits, i))
            .collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn coords(&self) -> &[u8] {
        &self.coords[..2 * self.n_qubits()]
    }

    /// `q` bit of qubit `k` (0-based).
    pub fn q(&self, k: usize) -> u8 {
        self.coords[k]
    }

    /// `p` bit of qubit `k` (0-based).
    pub fn p(&self, k: usize) -> u8 {
        self.coords[self.n_qubits() + k]
    }

    pub fn index(&self) -> usize {
        self.coords()
            .iter()
            .fold(0, |acc, &b| (acc << 1) | b as usize)
    }
}

impl std::fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.n_qubits();
        let q: String = (0..n).map(|k| char::from(b'0' + self.q(k))).collect();
        let p: String = (0..n).map(|k| char::from(b'0' + self.p(k))).collect();
        write!(f, "(q={q}, p={p})")
    }
}

/// Bit-valued phase-space observable of one qubit: `q`, `p`, or
/// `r = (q + p) mod 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    Q(usize),
    P(usize),
    R(usize),
}

impl Observable {
    /// Parses `q`, `p`, `r` for one qubit, `q1`..`r2` for two.
    pub fn parse(label: &str, n_qubits: usize) -> Result<Self> {
        let unknown = || Error::UnknownObservable(label.to_string());
        let mut chars = label.chars();
        let head = chars.next().ok_or_else(unknown)?;
        let rest: String = chars.collect();
        let qubit = match (n_qubits, rest.as_str()) {
            (1, "") => 0,
            (2, "1") => 0,
            (2, "2") => 1,
            _ => return Err(unknown()),
        };
        match head {
            'q' => Ok(Observable::Q(qubit)),
            'p' => Ok(Observable::P(qubit)),
            'r' => Ok(Observable::R(qubit)),
            _ => Err(unknown()),
        }
    }

    /// Every observable valid for the given register size.
    pub fn all(n_qubits: usize) -> Vec<Observable> {
        (0..n_qubits)
            .flat_map(|k| [Observable::Q(k), Observable::P(k), Observable::R(k)])
            .collect()
    }

    pub fn label(&self, n_qubits: usize) -> String {
        let (c, k) = match *self {
            Observable::Q(k) => ('q', k),
            Observable::P(k) => ('p', k),
            Observable::R(k) => ('r', k),
        };
        if n_qubits == 1 {
            c.to_string()
        } else {
            format!("{c}{}", k + 1)
        }
    }

    pub fn value_at(&self, point: &PhasePoint) -> u8 {
        match *self {
            Observable::Q(k) => point.q(k),
            Observable::P(k) => point.p(k),
            Observable::R(k) => (point.q(k) + point.p(k)) % 2,
        }
    }

    fn qubit(&self) -> usize {
        match *self {
            Observable::Q(k) | Observable::P(k) | Observable::R(k) => k,
        }
    }
}

/// Real-valued function on the discrete phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    n_qubits: usize,
    kind: TableKind,
    values: Vec<f64>,
}

impl WignerTable {
    /// Builds a table from point-indexed values. `State` and `Posterior`
    /// tables must sum to one.
    pub fn new(n_qubits: usize, kind: TableKind, values: Vec<f64>) -> Result<Self> {
        if n_qubits != 1 && n_qubits != 2 {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        let expected = 1usize << (2 * n_qubits);
        if values.len() != expected {
            return Err(Error::InvalidTable(format!(
                "{} entries for {n_qubits} qubit(s), expected {expected}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if matches!(kind, TableKind::State | TableKind::Posterior) {
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidTable(format!(
                    "{} table sums to {sum}, expected 1",
                    kind.as_str()
                )));
            }
        }
        Ok(WignerTable {
            n_qubits,
            kind,
            values,
        })
    }

    /// Builds a table from the display layout (`p` descending rows, `q`
    /// ascending columns).
    pub fn from_layout(n_qubits: usize, kind: TableKind, rows: &[Vec<f64>]) -> Result<Self> {
        if n_qubits != 1 && n_qubits != 2 {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        let side = 1usize << n_qubits;
        if rows.len() != side || rows.iter().any(|r| r.len() != side) {
            return Err(Error::InvalidTable(format!("layout must be {side}x{side}")));
        }
        let mut values = vec![0.0; side * side];
        for (row, r) in rows.iter().enumerate() {
            let p_index = side - 1 - row;
            for (q_index, &v) in r.iter().enumerate() {
                values[q_index * side + p_index] = v;
            }
        }
        Self::new(n_qubits, kind, values)
    }

    pub fn uniform(n_qubits: usize, kind: TableKind, value: f64) -> Result<Self> {
        Self::new(n_qubits, kind, vec![value; 1 << (2 * n_qubits)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, point: &PhasePoint) -> f64 {
        self.values[point.index()]
    }

    pub fn points(&self) -> Vec<PhasePoint> {
        PhasePoint::all(self.n_qubits)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhasePoint, f64)> + '_ {
        self.points().into_iter().zip(self.values.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Values in display layout.
    pub fn layout(&self) -> Vec<Vec<f64>> {
        let side = 1usize << self.n_qubits;
        (0..side)
            .map(|row| {
                let p_index = side - 1 - row;
                (0..side)
                    .map(|q_index| self.values[q_index * side + p_index])
                    .collect()
            })
            .collect()
    }

    /// Multiplies every entry by `factor`; the result is unnormalized.
    pub fn scaled(&self, factor: f64) -> WignerTable {
        WignerTable {
            n_qubits: self.n_qubits,
            kind: TableKind::Unnormalized,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &WignerTable) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn sign(bits: u8) -> f64 {
    if bits.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// One bracketed single-qubit factor; `y_sign` is `+1` for `A+`, `-1` for `A-`.
fn factor(q: u8, p: u8, y_sign: f64) -> ComplexMatrix {
    let z = pauli::z().scale_real(sign(q));
    let x = pauli::x().scale_real(sign(p));
    let y = pauli::y().scale_real(y_sign * sign(q + p));
    z.try_add(&x)
        .and_then(|m| m.try_add(&y))
        .and_then(|m| m.try_add(&ComplexMatrix::identity(2)))
        .expect("2x2 operands")
        .scale_real(0.5)
}

/// Single-qubit phase-point operator `A(q, p)`.
pub fn phase_point_op_1q(q: u8, p: u8) -> ComplexMatrix {
    factor(q & 1, p & 1, 1.0)
}

/// Two-qubit phase-point operator `A+(q1, p1) ⊗ A-(q2, p2)`.
pub fn phase_point_op_2q(q1: u8, q2: u8, p1: u8, p2: u8) -> ComplexMatrix {
    tensor(&factor(q1 & 1, p1 & 1, 1.0), &factor(q2 & 1, p2 & 1, -1.0))
}

pub fn phase_point_op(point: &PhasePoint) -> ComplexMatrix {
    match point.n_qubits() {
        1 => phase_point_op_1q(point.q(0), point.p(0)),
        _ => phase_point_op_2q(point.q(0), point.q(1), point.p(0), point.p(1)),
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// `scale * tr(A(point) m)` at every point. The imaginary residue must stay
/// below `1e-12` relative to the operator's size.
pub fn operator_to_wigner(m: &ComplexMatrix, scale: f64, kind: TableKind) -> Result<WignerTable> {
    let n_qubits = qubits_for_dim(m.dim())?;
    let size = m
        .rows()
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let mut values = Vec::with_capacity(1 << (2 * n_qubits));
    for point in PhasePoint::all(n_qubits) {
        let t: Complex64 = phase_point_op(&point).trace_product(m)?;
        if t.im.abs() > 1e-12 * size {
            return Err(Error::NotHermitian {
                deviation: t.im.abs(),
            });
        }
        values.push(scale * t.re);
    }
    WignerTable::new(n_qubits, kind, values)
}

/// The state map `W1 = tr(A rho) / d`.
pub fn state_to_wigner(rho: &DensityOperator) -> Result<WignerTable> {
    let d = rho.dim();
    operator_to_wigner(rho.matrix(), 1.0 / d as f64, TableKind::State)
}

/// The effect map `W2 = d * W1 = tr(A E)`.
pub fn povm_to_wigner(effect: &PovmElement) -> Result<WignerTable> {
    operator_to_wigner(effect.matrix(), 1.0, TableKind::Povm)
}

/// Inverse transform `sum W(point) A(point)`. Effect tables carry the extra
/// factor `d`, which is divided out so that both maps round-trip.
pub fn wigner_to_operator(table: &WignerTable) -> ComplexMatrix {
    let dim = 1usize << table.n_qubits;
    let norm = if table.kind == TableKind::Povm {
        1.0 / dim as f64
    } else {
        1.0
    };
    table
        .iter()
        .fold(ComplexMatrix::zeros(dim), |acc, (point, w)| {
            acc.try_add(&phase_point_op(&point).scale_real(w * norm))
                .unwrap()
        })
}

/// Phase-space Born rule `sum W2(point) W1(point)`.
pub fn phase_space_born(w2: &WignerTable, w1: &WignerTable) -> Result<f64> {
    if w1.n_qubits != w2.n_qubits {
        return Err(Error::ShapeMismatch(format!(
            "{}-qubit effect table against {}-qubit state table",
            w2.n_qubits, w1.n_qubits
        )));
    }
    if !matches!(w2.kind, TableKind::Povm | TableKind::Unnormalized) {
        return Err(Error::ShapeMismatch(format!(
            "expected an effect table, got a {} table",
            w2.kind.as_str()
        )));
    }
    if !matches!(w1.kind, TableKind::State | TableKind::Unnormalized) {
        return Err(Error::ShapeMismatch(format!(
            "expected a state table, got a {} table",
            w1.kind.as_str()
        )));
    }
    Ok(w2.values.iter().zip(&w1.values).map(|(a, b)| a * b).sum())
}

pub fn is_nonnegative(table: &WignerTable, tol: f64) -> bool {
    table.values.iter().all(|&v| v >= -tol)
}

/// Distribution of a bit observable: entry `v` sums the table over points
/// where the observable equals `v`.
pub fn marginal(table: &WignerTable, observable: Observable) -> Result<[f64; 2]> {
    if observable.qubit() >= table.n_qubits {
        return Err(Error::UnknownObservable(observable.label(2)));
    }
    let mut out = [0.0; 2];
    for (point, w) in table.iter() {
        out[observable.value_at(&point) as usize] += w;
    }
    Ok(out)
}

/// Parses an observable label and returns its marginal.
pub fn marginal_by_label(table: &WignerTable, label: &str) -> Result<[f64; 2]> {
    marginal(table, Observable::parse(label, table.n_qubits)?)
}
