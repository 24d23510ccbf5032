//! Pure stabilizer states of one and two qubits, found as the orbit of
//! `|0..0>` under Hadamard, phase, and CNOT gates, and their classification
//! by Wigner non-negativity.

use crate::error::{Error, Result};
use crate::qops::{gates, ComplexMatrix, StateVector};
use crate::wigner::{is_nonnegative, state_to_wigner, NEGATIVITY_TOL};

/// Two states are the same ray when `|<a|b>|` is within this of 1.
pub const OVERLAP_TOL: f64 = 1e-9;

/// Maximum number of breadth-first layers before giving up.
pub const MAX_DEPTH: usize = 50;

/// Generators of the Clifford group used for the orbit.
pub fn generators(n_qubits: usize) -> Result<Vec<ComplexMatrix>> {
    match n_qubits {
        1 => Ok(vec![gates::hadamard(), gates::phase()]),
        2 => Ok(vec![
            gates::on_qubit(&gates::hadamard(), 0),
            gates::on_qubit(&gates::hadamard(), 1),
            gates::on_qubit(&gates::phase(), 0),
            gates::on_qubit(&gates::phase(), 1),
            gates::cnot_12(),
            gates::cnot_21(),
        ]),
        n => Err(Error::UnsupportedQubits(n)),
    }
}

pub fn canonical_phase(state: &StateVector) -> Result<StateVector> {
    state.canonical_phase()
}

fn same_ray(a: &StateVector, b: &StateVector) -> bool {
    a.inner(b)
        .map(|z| z.norm() > 1.0 - OVERLAP_TOL)
        .unwrap_or(false)
}

/// Index of `state` in `states` up to global phase.
pub fn position(states: &[StateVector], state: &StateVector) -> Option<usize> {
    states.iter().position(|s| same_ray(s, state))
}

/// Breadth-first closure of `|0..0>` under [`generators`], deduplicated up to
/// global phase. States are returned in discovery order with canonical phase.
pub fn enumerate_stabilizer_states(n_qubits: usize) -> Result<Vec<StateVector>> {
    let gens = generators(n_qubits)?;
    let dim = 1usize << n_qubits;
    let mut states = vec![StateVector::basis(dim, 0)];
    let mut frontier = states.clone();
    for _ in 0..MAX_DEPTH {
        let mut next = Vec::new();
        for s in &frontier {
            for g in &gens {
                let t = s.evolve(g)?.canonical_phase()?;
                if position(&states, &t).is_none() {
                    states.push(t.clone());
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            return Ok(states);
        }
        frontier = next;
    }
    Err(Error::InvalidParameter(format!(
        "stabilizer orbit did not close within {MAX_DEPTH} layers"
    )))
}

/// One classified stabilizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusEntry {
    pub state: StateVector,
    pub wigner_min: f64,
    pub nonnegative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCensus {
    pub n_qubits: usize,
    pub entries: Vec<CensusEntry>,
    pub nonnegative_count: usize,
    pub negative_count: usize,
}

impl StabilizerCensus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &StateVector> {
        self.entries.iter().map(|e| &e.state)
    }
}

/// Computes the Wigner table of each state and tallies non-negative ones.
pub fn classify_census(states: &[StateVector]) -> Result<StabilizerCensus> {
    let n_qubits = match states.first().map(|s| s.dim()) {
        Some(2) | None => 1,
        Some(4) => 2,
        Some(d) => return Err(Error::UnsupportedDimension(d)),
    };
    let entries = states
        .iter()
        .map(|s| {
            let table = state_to_wigner(&s.density())?;
            Ok(CensusEntry {
                state: s.clone(),
                wigner_min: table.min(),
                nonnegative: is_nonnegative(&table, NEGATIVITY_TOL),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let nonnegative_count = entries.iter().filter(|e| e.nonnegative).count();
    Ok(StabilizerCensus {
        n_qubits,
        negative_count: entries.len() - nonnegative_count,
        nonnegative_count,
        entries,
    })
}

/// Enumerates and classifies in one go.
pub fn census(n_qubits: usize) -> Result<StabilizerCensus> {
    classify_census(&enumerate_stabilizer_states(n_qubits)?)
}
