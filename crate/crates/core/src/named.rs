//! Textual names for states, measurements, gates and history bases.
//!
//! States: single-qubit kets `0 1 + - i -i`, their two-qubit products
//! (`0+`, `i-i`), Bell states (`phi+ phi- psi+ psi-`), and unnormalized sums
//! of computational basis strings with optional sign and `i` coefficients
//! (`00+11`, `0-i1`), normalized on parsing.

use crate::error::{Error, Result};
use crate::qops::{
    gates, kets, ComplexMatrix, PovmElement, PovmSet, StateVector, UnitaryStep, I, ONE, ZERO,
};
use crate::Complex64;

const KET_TOKENS: [&str; 6] = ["-i", "0", "1", "+", "-", "i"];

fn single_ket(token: &str) -> StateVector {
    match token {
        "0" => kets::zero(),
        "1" => kets::one(),
        "+" => kets::plus(),
        "-" => kets::minus(),
        "i" => kets::plus_i(),
        _ => kets::minus_i(),
    }
}

fn product(spec: &str) -> Option<StateVector> {
    let mut rest = spec;
    let mut factors = Vec::new();
    while !rest.is_empty() {
        let token = KET_TOKENS.iter().find(|t| rest.starts_with(**t))?;
        factors.push(single_ket(token));
        rest = &rest[token.len()..];
    }
    if factors.is_empty() || factors.len() > 2 {
        return None;
    }
    let mut it = factors.into_iter();
    let first = it.next()?;
    Some(it.fold(first, |acc, f| acc.tensor(&f)))
}

/// `[sign][i]bits` terms; requires at least two terms of equal width.
fn basis_sum(spec: &str) -> Option<Vec<Complex64>> {
    let bytes = spec.as_bytes();
    let mut pos = 0;
    let mut width = None;
    let mut amps: Vec<Complex64> = Vec::new();
    let mut terms = 0;
    while pos < bytes.len() {
        let mut coeff = ONE;
        if bytes[pos] == b'+' || bytes[pos] == b'-' {
            if bytes[pos] == b'-' {
                coeff = -coeff;
            }
            pos += 1;
        } else if terms > 0 {
            return None;
        }
        if pos < bytes.len() && bytes[pos] == b'i' {
            coeff *= I;
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && (bytes[pos] == b'0' || bytes[pos] == b'1') {
            pos += 1;
        }
        let bits = &spec[start..pos];
        if bits.is_empty() || bits.len() > 2 || width.is_some_and(|w| w != bits.len()) {
            return None;
        }
        let w = *width.get_or_insert(bits.len());
        if amps.is_empty() {
            amps = vec![ZERO; 1 << w];
        }
        amps[usize::from_str_radix(bits, 2).ok()?] += coeff;
        terms += 1;
    }
    (terms >= 2).then_some(amps)
}

fn bell(spec: &str) -> Option<StateVector> {
    let amps = match spec {
        "phi+" => [ONE, ZERO, ZERO, ONE],
        "phi-" => [ONE, ZERO, ZERO, -ONE],
        "psi+" => [ZERO, ONE, ONE, ZERO],
        "psi-" => [ZERO, ONE, -ONE, ZERO],
        _ => return None,
    };
    StateVector::normalized(amps.to_vec()).ok()
}

pub fn parse_state(spec: &str) -> Result<StateVector> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(b) = bell(&s) {
        return Ok(b);
    }
    if let Some(amps) = basis_sum(&s) {
        return StateVector::normalized(amps);
    }
    product(&s).ok_or_else(|| Error::Parse(format!("unrecognized state '{spec}'")))
}

/// Single-qubit projective basis: `z` (0/1), `x` (+/-), `y` (i/-i).
pub fn basis(letter: char) -> Result<[(&'static str, StateVector); 2]> {
    match letter {
        'z' => Ok([("0", kets::zero()), ("1", kets::one())]),
        'x' => Ok([("+", kets::plus()), ("-", kets::minus())]),
        'y' => Ok([("i", kets::plus_i()), ("-i", kets::minus_i())]),
        c => Err(Error::Parse(format!("unknown basis '{c}'"))),
    }
}

/// `identity`, a basis letter per qubit (`z`, `xy`), or a single letter that
/// is repeated on every qubit. Outcome labels concatenate the per-qubit kets.
pub fn parse_povm(spec: &str, n_qubits: usize) -> Result<PovmSet> {
    if !(1..=2).contains(&n_qubits) {
        return Err(Error::UnsupportedQubits(n_qubits));
    }
    if spec == "identity" {
        return PovmSet::new(vec![PovmElement::identity(1 << n_qubits)]);
    }
    let letters: Vec<char> = match spec.chars().count() {
        1 => vec![spec.chars().next().unwrap_or('?'); n_qubits],
        n if n == n_qubits => spec.chars().collect(),
        _ => {
            return Err(Error::Parse(format!(
                "measurement '{spec}' does not fit {n_qubits} qubit(s)"
            )))
        }
    };
    let mut outcomes: Vec<(String, StateVector)> =
        vec![(String::new(), StateVector::new(vec![ONE])?)];
    for letter in letters {
        let b = basis(letter)?;
        outcomes = outcomes
            .into_iter()
            .flat_map(|(label, state)| {
                b.iter()
                    .map(move |(l, k)| (format!("{label}{l}"), state.tensor(k)))
            })
            .collect();
    }
    let pairs: Vec<(&str, StateVector)> = outcomes
        .iter()
        .map(|(l, s)| (l.as_str(), s.clone()))
        .collect();
    PovmSet::projective(&pairs)
}

/// Gate names: `h s sdg t x y z` (with qubit suffix `1`/`2` on two qubits),
/// `cnot12`, `cnot21`.
pub fn parse_gate(name: &str, n_qubits: usize) -> Result<ComplexMatrix> {
    let unknown = || Error::Parse(format!("unknown gate '{name}' for {n_qubits} qubit(s)"));
    if n_qubits == 2 {
        match name {
            "cnot12" => return Ok(gates::cnot_12()),
            "cnot21" => return Ok(gates::cnot_21()),
            _ => {}
        }
    }
    let (base, qubit) = match (n_qubits, name.chars().last()) {
        (1, _) => (name, None),
        (2, Some('1')) => (&name[..name.len() - 1], Some(0)),
        (2, Some('2')) => (&name[..name.len() - 1], Some(1)),
        (2, _) => return Err(unknown()),
        (n, _) => return Err(Error::UnsupportedQubits(n)),
    };
    let g = match base {
        "h" => gates::hadamard(),
        "s" => gates::phase(),
        "sdg" => gates::phase_dagger(),
        "t" => gates::t_gate(),
        "x" => crate::qops::pauli::x(),
        "y" => crate::qops::pauli::y(),
        "z" => crate::qops::pauli::z(),
        _ => return Err(unknown()),
    };
    Ok(match qubit {
        Some(k) => gates::on_qubit(&g, k),
        None => g,
    })
}

/// Comma-separated gate list, one step per gate at times `1, 2, ...`.
pub fn parse_steps(spec: &str, n_qubits: usize) -> Result<Vec<UnitaryStep>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(k, g)| UnitaryStep::new(parse_gate(g, n_qubits)?, k + 1))
        .collect()
}

/// Projector pair `(Π0, Π1)` of a single-qubit basis.
pub fn projector_pair(letter: char) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let [(_, a), (_, b)] = basis(letter)?;
    Ok((a.projector(), b.projector()))
}
