//! Seeded invariant suite: each check reports its worst observed deviation
//! against a fixed tolerance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aav::{
    coherence_functional, kraus_exact, kraus_first_order, total_postselection_probability,
    WeakMeasurementParams, Xi,
};
use crate::error::Result;
use crate::qops::{
    born_probability, heisenberg_step, kets, schrodinger_step, ComplexMatrix, PovmElement, PovmSet,
    UnitaryStep,
};
use crate::random;
use crate::smoothing::{
    classical_posterior, evidence_invariance, operator_evidence, smooth, Trajectory,
};
use crate::stabilizer::census;
use crate::wigner::{
    phase_space_born, povm_to_wigner, state_to_wigner, wigner_to_operator, NEGATIVITY_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen (or, for scaling checks, the worst ratio).
    pub observed: f64,
    pub tolerance: f64,
    /// `observed <= tolerance` when true, `observed >= tolerance` otherwise.
    pub upper_bound: bool,
}

impl Check {
    fn at_most(name: &'static str, observed: f64, tolerance: f64) -> Self {
        Check {
            name,
            passed: observed <= tolerance,
            observed,
            tolerance,
            upper_bound: true,
        }
    }

    fn at_least(name: &'static str, observed: f64, tolerance: f64) -> Self {
        Check {
            name,
            passed: observed >= tolerance,
            observed,
            tolerance,
            upper_bound: false,
        }
    }
}

pub const RANDOM_PAIRS: usize = 1000;
pub const RANDOM_TRAJECTORIES: usize = 100;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `|Σ W2 W1 - tr(E ρ)|` over random state/effect pairs in dimensions 2 and 4.
pub fn born_identity(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 1);
    let mut worst: f64 = 0.0;
    for dim in [2, 4] {
        for _ in 0..RANDOM_PAIRS {
            let rho = random::density(&mut r, dim);
            let e = random::effect(&mut r, dim);
            let ps = phase_space_born(&povm_to_wigner(&e)?, &state_to_wigner(&rho)?)?;
            worst = worst.max((ps - born_probability(&e, &rho)?).abs());
        }
    }
    Ok(Check::at_most("phase-space Born rule", worst, 1e-10))
}

/// Operator -> table -> operator for states and effects.
pub fn round_trip(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 2);
    let mut worst: f64 = 0.0;
    for dim in [2, 4] {
        for _ in 0..RANDOM_PAIRS {
            let rho = random::density(&mut r, dim);
            let e = random::effect(&mut r, dim);
            worst =
                worst.max(wigner_to_operator(&state_to_wigner(&rho)?).max_abs_diff(rho.matrix()));
            worst = worst.max(wigner_to_operator(&povm_to_wigner(&e)?).max_abs_diff(e.matrix()));
        }
    }
    Ok(Check::at_most("Wigner round trip", worst, 1e-12))
}

/// Heisenberg-evolved effect on the initial state equals the effect on the
/// Schrodinger-evolved state.
pub fn picture_duality(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 3);
    let mut worst: f64 = 0.0;
    for dim in [2, 4] {
        for _ in 0..RANDOM_PAIRS {
            let rho = random::density(&mut r, dim);
            let e = random::effect(&mut r, dim);
            let u = UnitaryStep::new(random::unitary(&mut r, dim), 1)?;
            let a = born_probability(&heisenberg_step(&u, &e)?, &rho)?;
            let b = born_probability(&e, &schrodinger_step(&u, &rho)?)?;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Check::at_most(
        "Heisenberg/Schrodinger duality",
        worst,
        1e-12,
    ))
}

/// Phase-space evidence along random three-step trajectories is constant
/// in time and equals the operator evidence.
pub fn evidence_along_trajectories(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 4);
    let mut worst: f64 = 0.0;
    for dim in [2, 4] {
        for _ in 0..RANDOM_TRAJECTORIES {
            let rho = random::density(&mut r, dim);
            let e = random::effect(&mut r, dim);
            let complement = ComplexMatrix::identity(dim).try_sub(e.matrix())?;
            let povm = PovmSet::new(vec![e, PovmElement::new("not-e", complement)?])?;
            let steps = (1..=3)
                .map(|t| UnitaryStep::new(random::unitary(&mut r, dim), t))
                .collect::<Result<Vec<_>>>()?;
            let traj = Trajectory::new(rho, steps, povm, "e")?;
            let reference = operator_evidence(&traj, 0)?;
            for p in evidence_invariance(&traj)? {
                worst = worst.max((p - reference).abs());
            }
        }
    }
    Ok(Check::at_most(
        "evidence invariance along trajectories",
        worst,
        1e-10,
    ))
}

/// For non-negative stabilizer tables, phase-space smoothing is ordinary
/// Bayes.
pub fn classical_agreement() -> Result<Check> {
    let states: Vec<_> = census(2)?
        .entries
        .into_iter()
        .filter(|e| e.nonnegative)
        .map(|e| e.state)
        .collect();
    let mut worst: f64 = 0.0;
    for x in &states {
        let w1 = state_to_wigner(&x.density())?;
        for y in &states {
            let w2 = povm_to_wigner(&PovmElement::projector("y", y))?;
            let Ok(result) = smooth(&w1, &w2) else {
                continue;
            };
            let bayes = classical_posterior(w1.values(), w2.values())?;
            for (a, b) in result.posterior.values().iter().zip(&bayes) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(Check::at_most(
        "classical Bayes on non-negative tables",
        worst,
        1e-12,
    ))
}

/// Posterior sums to one for random pairs, including negative tables.
pub fn posterior_normalization(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 5);
    let mut worst: f64 = 0.0;
    for dim in [2, 4] {
        for _ in 0..RANDOM_PAIRS {
            let w1 = state_to_wigner(&random::state(&mut r, dim).density())?;
            let w2 = povm_to_wigner(&PovmElement::projector("y", &random::state(&mut r, dim)))?;
            match smooth(&w1, &w2) {
                Ok(res) => worst = worst.max((res.posterior.sum() - 1.0).abs()),
                Err(e) if e.is_incompatible_outcome() => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Check::at_most("posterior normalization", worst, 1e-10))
}

/// `|census(1)| = 6` all non-negative, `|census(2)| = 60` split 48/12.
/// Observed value is the number of mismatched counts.
pub fn census_counts() -> Result<Check> {
    let one = census(1)?;
    let two = census(2)?;
    let mismatches = [
        one.len() != 6,
        one.nonnegative_count != 6,
        two.len() != 60,
        two.nonnegative_count != 48,
        two.negative_count != 12,
        two.entries
            .iter()
            .any(|e| !e.nonnegative && e.wigner_min >= -NEGATIVITY_TOL),
    ]
    .iter()
    .filter(|&&m| m)
    .count();
    Ok(Check::at_most(
        "stabilizer census counts",
        mismatches as f64,
        0.0,
    ))
}

/// Largest entry of `|K_exact - K_first_order| / envelope`.
pub fn kraus_gap(delta_t: f64, delta_z: f64) -> Result<f64> {
    let p = WeakMeasurementParams::new(delta_t, delta_z)?;
    let diff = kraus_exact(&p)
        .matrix()
        .max_abs_diff(kraus_first_order(&p).matrix());
    Ok(diff / p.envelope())
}

/// Ratios of the Kraus gap between successive halvings of `δz` with
/// `δt = c δz²`.
pub fn kraus_gap_ratios(c: f64, delta_zs: &[f64]) -> Result<Vec<f64>> {
    let gaps = delta_zs
        .iter()
        .map(|&dz| kraus_gap(c * dz * dz, dz))
        .collect::<Result<Vec<_>>>()?;
    Ok(gaps.windows(2).map(|w| w[0] / w[1]).collect())
}

pub const GAP_STEPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Halving `δz` shrinks the Kraus gap at least quadratically.
pub fn kraus_gap_scaling() -> Result<Check> {
    let mut worst = f64::INFINITY;
    for c in [1.0, 0.5, 2.0] {
        for ratio in kraus_gap_ratios(c, &GAP_STEPS)? {
            worst = worst.min(ratio);
        }
    }
    Ok(Check::at_least(
        "Kraus gap scaling under halving",
        worst,
        3.5,
    ))
}

/// `(1 - exp(-δt/8)) / 2`, the total probability of post-selecting `+`
/// after a weak measurement on `|->`.
pub fn postselection_closed_form(delta_t: f64) -> f64 {
    0.5 * (1.0 - (-delta_t / 8.0).exp())
}

pub fn postselection_quadrature() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for dt in [0.1, 0.01] {
        let p = total_postselection_probability(&kets::minus(), dt, Xi::Plus)?;
        worst = worst.max((p - postselection_closed_form(dt)).abs());
    }
    Ok(Check::at_most(
        "post-selection probability quadrature",
        worst,
        1e-8,
    ))
}

/// Hermiticity and real diagonal of the coherence functional for random
/// pre/post pairs in every single-qubit basis.
pub fn coherence_hermiticity(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_TRAJECTORIES {
        let psi = random::state(&mut r, 2);
        let phi = random::state(&mut r, 2);
        for letter in ['z', 'x', 'y'] {
            let (p0, p1) = crate::named::projector_pair(letter)?;
            let c = coherence_functional(&psi, (&p0, &p1), &phi)?;
            worst = worst.max(c.entries().hermitian_deviation());
            worst = worst.max(c.get(0, 0).im.abs()).max(c.get(1, 1).im.abs());
        }
    }
    Ok(Check::at_most(
        "coherence functional Hermiticity",
        worst,
        1e-12,
    ))
}

/// Runs every check in a fixed order.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        born_identity(seed)?,
        round_trip(seed)?,
        picture_duality(seed)?,
        evidence_along_trajectories(seed)?,
        classical_agreement()?,
        posterior_normalization(seed)?,
        census_counts()?,
        kraus_gap_scaling()?,
        postselection_quadrature()?,
        coherence_hermiticity(seed)?,
    ])
}
