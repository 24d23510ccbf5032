//! Bayesian smoothing over phase space.
//!
//! Given a predictive table `W1(λ|x)` and a retrodictive table `W2(y|λ,x)`,
//! the smoothing posterior is `W2 * W1 / P(y|x)`. When both tables are
//! non-negative this is ordinary Bayes; otherwise the result is a
//! quasi-posterior and is flagged as such.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::qops::{
    born_probability, heisenberg_step, schrodinger_step, DensityOperator, PovmElement, PovmSet,
    UnitaryStep,
};
use crate::wigner::{
    is_nonnegative, marginal, povm_to_wigner, state_to_wigner, Observable, PhasePoint, TableKind,
    WignerTable, NEGATIVITY_TOL,
};

/// Evidence below this makes the posterior undefined.
pub const EVIDENCE_THRESHOLD: f64 = 1e-12;

/// Default tie tolerance for MAP estimates.
pub const MAP_TIE_TOL: f64 = 1e-12;

/// Classical Bayes rule over an indexed hypothesis space.
pub fn classical_posterior(prior: &[f64], likelihood: &[f64]) -> Result<Vec<f64>> {
    if prior.len() != likelihood.len() {
        return Err(Error::InvalidDistribution(format!(
            "prior has {} entries, likelihood {}",
            prior.len(),
            likelihood.len()
        )));
    }
    if prior
        .iter()
        .chain(likelihood)
        .any(|&v| v < 0.0 || !v.is_finite())
    {
        return Err(Error::InvalidDistribution(
            "entries must be finite and non-negative".into(),
        ));
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!("prior sums to {total}")));
    }
    let joint: Vec<f64> = prior.iter().zip(likelihood).map(|(a, b)| a * b).collect();
    let evidence: f64 = joint.iter().sum();
    if evidence < EVIDENCE_THRESHOLD {
        return Err(Error::IncompatibleOutcome { evidence });
    }
    Ok(joint.into_iter().map(|j| j / evidence).collect())
}

/// Posterior together with the estimates read off it.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingResult {
    pub posterior: WignerTable,
    pub evidence: f64,
    pub map_points: Vec<PhasePoint>,
    pub averages: BTreeMap<String, f64>,
    /// The posterior has an entry below `-NEGATIVITY_TOL`.
    pub negative: bool,
    /// Either input table, or the posterior, is negative somewhere.
    pub illogical: bool,
}

impl SmoothingResult {
    /// Assembles a result from an already-normalized posterior.
    pub fn from_posterior(
        posterior: WignerTable,
        evidence: f64,
        inputs_negative: bool,
    ) -> Result<Self> {
        if posterior.kind() != TableKind::Posterior {
            return Err(Error::InvalidTable("expected a posterior table".into()));
        }
        let map_points = map_estimate(&posterior, MAP_TIE_TOL);
        let averages = Observable::all(posterior.n_qubits())
            .into_iter()
            .map(|obs| {
                let avg = conditional_average(&posterior, obs)?;
                Ok((obs.label(posterior.n_qubits()), avg))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let negative = !is_nonnegative(&posterior, NEGATIVITY_TOL);
        Ok(SmoothingResult {
            posterior,
            evidence,
            map_points,
            averages,
            negative,
            illogical: negative || inputs_negative,
        })
    }

    pub fn ambiguous(&self) -> bool {
        self.map_points.len() > 1
    }
}

/// Forms the smoothing posterior from a predictive table (`state` or
/// `unnormalized`) and a retrodictive table (`povm` or `unnormalized`).
pub fn smooth(w1: &WignerTable, w2: &WignerTable) -> Result<SmoothingResult> {
    let evidence = crate::wigner::phase_space_born(w2, w1)?;
    if evidence.is_nan() || evidence < EVIDENCE_THRESHOLD {
        return Err(Error::IncompatibleOutcome { evidence });
    }
    let values: Vec<f64> = w2
        .values()
        .iter()
        .zip(w1.values())
        .map(|(a, b)| a * b / evidence)
        .collect();
    let posterior = WignerTable::new(w1.n_qubits(), TableKind::Posterior, values)?;
    let inputs_negative =
        !is_nonnegative(w1, NEGATIVITY_TOL) || !is_nonnegative(w2, NEGATIVITY_TOL);
    SmoothingResult::from_posterior(posterior, evidence, inputs_negative)
}

/// All points whose posterior value lies within `tie_tol` of the maximum.
pub fn map_estimate(posterior: &WignerTable, tie_tol: f64) -> Vec<PhasePoint> {
    let max = posterior.max();
    posterior
        .iter()
        .filter(|(_, w)| *w >= max - tie_tol)
        .map(|(p, _)| p)
        .collect()
}

/// `sum_v v * P(observable = v)` under the (quasi-)posterior.
pub fn conditional_average(posterior: &WignerTable, observable: Observable) -> Result<f64> {
    Ok(marginal(posterior, observable)?[1])
}

pub fn conditional_average_by_label(posterior: &WignerTable, label: &str) -> Result<f64> {
    conditional_average(posterior, Observable::parse(label, posterior.n_qubits())?)
}

/// Initial state, unitary steps `t_1..t_J`, and the final measurement with
/// its observed outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    initial: DensityOperator,
    steps: Vec<UnitaryStep>,
    final_povm: PovmSet,
    outcome: String,
}

impl Trajectory {
    pub fn new(
        initial: DensityOperator,
        steps: Vec<UnitaryStep>,
        final_povm: PovmSet,
        outcome: impl Into<String>,
    ) -> Result<Self> {
        let dim = initial.dim();
        for step in &steps {
            if step.matrix().dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: step.matrix().dim(),
                });
            }
        }
        if final_povm.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: final_povm.dim(),
            });
        }
        if steps
            .windows(2)
            .any(|w| w[0].time_index() >= w[1].time_index())
        {
            return Err(Error::UnorderedSteps);
        }
        let outcome = outcome.into();
        final_povm.element(&outcome)?;
        Ok(Trajectory {
            initial,
            steps,
            final_povm,
            outcome,
        })
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn steps(&self) -> &[UnitaryStep] {
        &self.steps
    }

    pub fn final_povm(&self) -> &PovmSet {
        &self.final_povm
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }

    /// Number of steps `J`; valid time indices are `0..=J`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// State and effect at time `t_j`.
    pub fn operators_at(&self, j: usize) -> Result<(DensityOperator, PovmElement)> {
        if j > self.steps.len() {
            return Err(Error::TimeIndexOutOfRange {
                index: j,
                max: self.steps.len(),
            });
        }
        let mut rho = self.initial.clone();
        for step in &self.steps[..j] {
            rho = schrodinger_step(step, &rho)?;
        }
        let mut effect = self.final_povm.element(&self.outcome)?.clone();
        for step in self.steps[j..].iter().rev() {
            effect = heisenberg_step(step, &effect)?;
        }
        Ok((rho, effect))
    }
}

/// Predictive and retrodictive tables at time `t_j`.
pub fn propagate(traj: &Trajectory, j: usize) -> Result<(WignerTable, WignerTable)> {
    let (rho, effect) = traj.operators_at(j)?;
    Ok((state_to_wigner(&rho)?, povm_to_wigner(&effect)?))
}

/// Evidence `P(y|x)` computed in phase space at every `t_j`.
pub fn evidence_invariance(traj: &Trajectory) -> Result<Vec<f64>> {
    (0..=traj.len())
        .map(|j| {
            let (w1, w2) = propagate(traj, j)?;
            crate::wigner::phase_space_born(&w2, &w1)
        })
        .collect()
}

/// Evidence from the operators directly, without phase space.
pub fn operator_evidence(traj: &Trajectory, j: usize) -> Result<f64> {
    let (rho, effect) = traj.operators_at(j)?;
    born_probability(&effect, &rho)
}
