//! JSON encodings shared by the library and the command line.
//!
//! Complex scalars are `[re, im]`, matrices are row-major nested arrays,
//! states are `{"dim", "amplitudes"}` and operators `{"dim", "matrix"}`.

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::aav::{AavReport, CoherenceFunctional};
use crate::error::{Error, Result};
use crate::qops::{ComplexMatrix, PovmElement, PovmSet, StateVector};
use crate::smoothing::SmoothingResult;
use crate::stabilizer::StabilizerCensus;
use crate::wigner::WignerTable;
use crate::Complex64;

pub fn complex(c: Complex64) -> Value {
    json!([c.re, c.im])
}

pub fn matrix(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.rows()
            .into_iter()
            .map(|row| Value::Array(row.into_iter().map(complex).collect()))
            .collect(),
    )
}

pub fn state(s: &StateVector) -> Value {
    json!({
        "dim": s.dim(),
        "amplitudes": s.amplitudes().iter().map(|&a| complex(a)).collect::<Vec<_>>(),
    })
}

pub fn operator(m: &ComplexMatrix) -> Value {
    json!({ "dim": m.dim(), "matrix": matrix(m) })
}

/// Point list plus the display layout (rows `p` descending, columns `q`
/// ascending).
pub fn table(t: &WignerTable) -> Value {
    let points: Vec<Value> = t
        .iter()
        .map(|(pt, w)| json!({ "coords": pt.coords(), "w": w }))
        .collect();
    json!({
        "n_qubits": t.n_qubits(),
        "kind": t.kind().as_str(),
        "points": points,
        "matrix": t.layout(),
    })
}

pub fn smoothing(r: &SmoothingResult) -> Value {
    let map: Vec<&[u8]> = r.map_points.iter().map(|p| p.coords()).collect();
    json!({
        "posterior": table(&r.posterior),
        "evidence": r.evidence,
        "map": map,
        "ambiguous": r.ambiguous(),
        "averages": r.averages,
        "negative": r.negative,
        "illogical": r.illogical,
    })
}

pub fn aav_report(r: &AavReport) -> Value {
    json!({
        "delta_t": r.params.delta_t(),
        "delta_z": r.params.delta_z(),
        "xi": r.xi.as_str(),
        "mode": r.mode.as_str(),
        "tables": {
            "w1_t1": table(&r.w1_t1),
            "w1_t2": table(&r.w1_t2),
            "w2_t1": table(&r.w2_t1),
            "w2_t2": table(&r.w2_t2),
            "posterior_t1": table(&r.smooth_t1.posterior),
            "posterior_t2": table(&r.smooth_t2.posterior),
        },
        "w1_t2_weight": r.w1_t2_weight,
        "envelope_sq": r.envelope_sq,
        "smooth_t1": smoothing(&r.smooth_t1),
        "smooth_t2": smoothing(&r.smooth_t2),
        "q_marginal_t1": r.q_marginal_t1(),
        "q_marginal_t2": r.q_marginal_t2(),
        "q_map": r.q_map.as_str(),
        "q_bar": r.q_bar,
        "joint_density": r.joint_density,
    })
}

pub fn coherence(c: &CoherenceFunctional, weakly_consistent: bool) -> Value {
    json!({
        "matrix": matrix(c.entries()),
        "weakly_consistent": weakly_consistent,
    })
}

pub fn census(c: &StabilizerCensus) -> Value {
    let states: Vec<Value> = c
        .entries
        .iter()
        .map(|e| {
            json!({
                "amplitudes": e.state.amplitudes().iter().map(|&a| complex(a)).collect::<Vec<_>>(),
                "wigner_min": e.wigner_min,
                "nonnegative": e.nonnegative,
            })
        })
        .collect();
    json!({
        "n_qubits": c.n_qubits,
        "total": c.len(),
        "nonnegative_count": c.nonnegative_count,
        "negative_count": c.negative_count,
        "states": states,
    })
}

#[derive(Deserialize)]
struct StateFile {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct OperatorFile {
    dim: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct PovmEntry {
    label: String,
    #[serde(flatten)]
    op: OperatorFile,
}

#[derive(Deserialize)]
struct PovmFile {
    elements: Vec<PovmEntry>,
}

/// Operator or state read from a JSON document.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    State(StateVector),
    Operator(ComplexMatrix),
}

fn to_c(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn decode_operator(f: OperatorFile) -> Result<ComplexMatrix> {
    if f.matrix.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            found: f.matrix.len(),
        });
    }
    let rows: Vec<Vec<Complex64>> = f
        .matrix
        .iter()
        .map(|r| r.iter().map(to_c).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

fn parse_value(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::Parse("expected a JSON object".into())),
        Err(e) => Err(Error::Parse(e.to_string())),
    }
}

fn decode<T: for<'de> Deserialize<'de>>(map: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(map)).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads either a state (`amplitudes`) or an operator (`matrix`) document.
pub fn parse_input(text: &str) -> Result<Input> {
    let map = parse_value(text)?;
    if map.contains_key("amplitudes") {
        let f: StateFile = decode(map)?;
        if f.amplitudes.len() != f.dim {
            return Err(Error::DimensionMismatch {
                expected: f.dim,
                found: f.amplitudes.len(),
            });
        }
        Ok(Input::State(StateVector::new(
            f.amplitudes.iter().map(to_c).collect(),
        )?))
    } else if map.contains_key("matrix") {
        Ok(Input::Operator(decode_operator(decode(map)?)?))
    } else {
        Err(Error::Parse("expected \"amplitudes\" or \"matrix\"".into()))
    }
}

/// Reads `{"elements": [{"label", "dim", "matrix"}, ...]}`.
pub fn parse_povm(text: &str) -> Result<PovmSet> {
    let f: PovmFile = decode(parse_value(text)?)?;
    let elements = f
        .elements
        .into_iter()
        .map(|e| PovmElement::new(e.label, decode_operator(e.op)?))
        .collect::<Result<Vec<_>>>()?;
    PovmSet::new(elements)
}

pub fn povm(set: &PovmSet) -> Value {
    let elements: Vec<Value> = set
        .elements()
        .iter()
        .map(|e| json!({ "label": e.label(), "dim": e.dim(), "matrix": matrix(e.matrix()) }))
        .collect();
    json!({ "elements": elements })
}
