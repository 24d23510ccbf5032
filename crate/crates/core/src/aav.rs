//! Weak values, the Gaussian weak `q` measurement, and smoothing for the
//! pre/post-selected spin experiment.
//!
//! The weak measurement with outcome `δz` and strength `δt` has Kraus
//! operator `K(δz) = (2π δt)^(-1/4) exp[-(δz - q δt)² / (4 δt)]`. Since `q` is
//! diagonal with eigenvalues 0 and 1, `K` is the diagonal matrix of two
//! Gaussian amplitudes. The first-order form replaces the exponential by
//! `envelope · (1 + (δz/2) q - (δt/8) q²)`, keeping terms up to order `δt`
//! with `δz²` counted as `δt`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qops::{
    apply_kraus, kets, pauli, ComplexMatrix, DensityOperator, KrausOperator, PovmElement,
    StateVector,
};
use crate::series::{Series, SeriesMatrix};
use crate::smoothing::{smooth, SmoothingResult, EVIDENCE_THRESHOLD};
use crate::wigner::{
    is_nonnegative, marginal, operator_to_wigner, povm_to_wigner, state_to_wigner, Observable,
    TableKind, WignerTable, NEGATIVITY_TOL,
};

/// `<φ|A|ψ> / <φ|ψ>`.
pub fn weak_value(
    pre: &StateVector,
    post: &StateVector,
    observable: &ComplexMatrix,
) -> Result<Complex64> {
    let overlap = post.inner(pre)?;
    if overlap.norm() < 1e-12 {
        return Err(Error::OrthogonalSelection);
    }
    let a_psi = observable.apply(pre.amplitudes())?;
    let numerator: Complex64 = post
        .amplitudes()
        .iter()
        .zip(&a_psi)
        .map(|(p, a)| p.conj() * a)
        .sum();
    Ok(numerator / overlap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakMeasurementParams {
    delta_t: f64,
    delta_z: f64,
}

impl WeakMeasurementParams {
    pub fn new(delta_t: f64, delta_z: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_t must be positive, got {delta_t}"
            )));
        }
        if !delta_z.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta_z must be finite, got {delta_z}"
            )));
        }
        Ok(WeakMeasurementParams { delta_t, delta_z })
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn delta_z(&self) -> f64 {
        self.delta_z
    }

    /// Gaussian amplitude `(2π δt)^(-1/4) exp[-(δz - mean)² / (4 δt)]`.
    fn amplitude(&self, mean: f64) -> f64 {
        let d = self.delta_z - mean;
        (2.0 * PI * self.delta_t).powf(-0.25) * (-d * d / (4.0 * self.delta_t)).exp()
    }

    /// Common factor `(2π δt)^(-1/4) exp[-δz² / (4 δt)]` of both Kraus forms.
    pub fn envelope(&self) -> f64 {
        self.amplitude(0.0)
    }
}

/// Exact Kraus operator `diag(g(δz; 0), g(δz; δt))`.
pub fn kraus_exact(params: &WeakMeasurementParams) -> KrausOperator {
    let g0 = params.amplitude(0.0);
    let g1 = params.amplitude(params.delta_t);
    KrausOperator::new(ComplexMatrix::diagonal(&[
        Complex64::new(g0, 0.0),
        Complex64::new(g1, 0.0),
    ]))
    .expect("finite Gaussian amplitudes")
}

/// `1 + (δz/2) q - (δt/8) q²` as a series in `δz`.
fn kraus_bracket() -> SeriesMatrix {
    let q = pauli::q_hat();
    let q2 = q.try_mul(&q).unwrap();
    SeriesMatrix([
        ComplexMatrix::identity(2),
        q.scale_real(0.5),
        q2.scale_real(-0.125),
    ])
}

/// First-order Kraus operator `envelope · (1 + (δz/2) q - (δt/8) q²)`.
pub fn kraus_first_order(params: &WeakMeasurementParams) -> KrausOperator {
    let bracket = kraus_bracket().eval(params.delta_z, params.delta_t);
    KrausOperator::new(bracket.scale_real(params.envelope())).expect("finite entries")
}

/// Outcome of the final `p` measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Xi {
    Plus,
    Minus,
}

impl Xi {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Xi::Plus),
            "-" | "minus" => Ok(Xi::Minus),
            other => Err(Error::UnknownOutcome(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Xi::Plus => "+",
            Xi::Minus => "-",
        }
    }

    pub fn ket(self) -> StateVector {
        match self {
            Xi::Plus => kets::plus(),
            Xi::Minus => kets::minus(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionMode {
    Exact,
    FirstOrder,
}

impl ExpansionMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ExpansionMode::Exact),
            "first-order" | "first_order" => Ok(ExpansionMode::FirstOrder),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExpansionMode::Exact => "exact",
            ExpansionMode::FirstOrder => "first_order",
        }
    }
}

/// MAP estimate of a single bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitEstimate {
    Zero,
    One,
    Ambiguous,
}

impl BitEstimate {
    pub fn from_marginal(m: [f64; 2], tie_tol: f64) -> Self {
        if (m[0] - m[1]).abs() <= tie_tol {
            BitEstimate::Ambiguous
        } else if m[0] > m[1] {
            BitEstimate::Zero
        } else {
            BitEstimate::One
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BitEstimate::Zero => "0",
            BitEstimate::One => "1",
            BitEstimate::Ambiguous => "ambiguous",
        }
    }
}

/// Every table and estimate of one `(ψ, δt, δz, ξ)` run.
///
/// `w1_t2` and `w2_t1` are unnormalized: `w1_t2` sums to the outcome density
/// `P(δz|ψ)` (stored in `w1_t2_weight`), and `w2_t1` carries the squared
/// Gaussian envelope (`envelope_sq`).
#[derive(Debug, Clone, PartialEq)]
pub struct AavReport {
    pub params: WeakMeasurementParams,
    pub xi: Xi,
    pub mode: ExpansionMode,
    pub w1_t1: WignerTable,
    pub w1_t2: WignerTable,
    pub w2_t1: WignerTable,
    pub w2_t2: WignerTable,
    pub w1_t2_weight: f64,
    pub envelope_sq: f64,
    pub smooth_t1: SmoothingResult,
    pub smooth_t2: SmoothingResult,
    pub q_map: BitEstimate,
    pub q_bar: f64,
    pub joint_density: f64,
}

impl AavReport {
    pub fn q_marginal_t1(&self) -> [f64; 2] {
        marginal(&self.smooth_t1.posterior, Observable::Q(0)).unwrap()
    }

    pub fn q_marginal_t2(&self) -> [f64; 2] {
        marginal(&self.smooth_t2.posterior, Observable::Q(0)).unwrap()
    }
}

/// Runs the weak-then-projective measurement pipeline for a qubit prepared
/// in `psi`.
pub fn run_aav(
    psi: &StateVector,
    params: &WeakMeasurementParams,
    xi: Xi,
    mode: ExpansionMode,
) -> Result<AavReport> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: psi.dim(),
        });
    }
    let rho = psi.density();
    let effect = PovmElement::projector(xi.as_str(), &xi.ket());
    let w1_t1 = state_to_wigner(&rho)?;
    let w2_t2 = povm_to_wigner(&effect)?;
    let envelope_sq = params.envelope().powi(2);

    let (w1_t2, w2_t1, smooth_t1, smooth_t2) = match mode {
        ExpansionMode::Exact => {
            let k = kraus_exact(params);
            let (sigma, _) = apply_kraus(&k, &rho)?;
            let retro = k
                .matrix()
                .adjoint()
                .try_mul(effect.matrix())?
                .try_mul(k.matrix())?;
            let w1_t2 = operator_to_wigner(&sigma, 0.5, TableKind::Unnormalized)?;
            let w2_t1 = operator_to_wigner(&retro, 1.0, TableKind::Unnormalized)?;
            let s1 = smooth(&w1_t1, &w2_t1)?;
            let s2 = smooth(&w1_t2, &w2_t2)?;
            (w1_t2, w2_t1, s1, s2)
        }
        ExpansionMode::FirstOrder => first_order_pipeline(&rho, &effect, params, &w1_t1, &w2_t2)?,
    };

    let joint_density = smooth_t2.evidence;
    let q_marg = marginal(&smooth_t1.posterior, Observable::Q(0))?;
    let w1_t2_weight = w1_t2.sum();
    Ok(AavReport {
        params: *params,
        xi,
        mode,
        w1_t1,
        w1_t2,
        w2_t1,
        w2_t2,
        w1_t2_weight,
        envelope_sq,
        q_map: BitEstimate::from_marginal(q_marg, crate::smoothing::MAP_TIE_TOL),
        q_bar: q_marg[1],
        smooth_t1,
        smooth_t2,
        joint_density,
    })
}

/// Numerator and evidence are expanded separately in the series ring; the
/// posterior is their ratio evaluated at `(δz, δt)`.
fn series_smooth(
    predictive: &[Series],
    retrodictive: &[Series],
    params: &WeakMeasurementParams,
    envelope_sq: f64,
    inputs_negative: bool,
) -> Result<SmoothingResult> {
    let (dz, dt) = (params.delta_z, params.delta_t);
    let numerators: Vec<Series> = predictive
        .iter()
        .zip(retrodictive)
        .map(|(a, b)| *a * *b)
        .collect();
    let denominator: Series = numerators.iter().copied().sum();
    let d = denominator.eval(dz, dt);
    let evidence = envelope_sq * d;
    if evidence.is_nan() || evidence < EVIDENCE_THRESHOLD {
        return Err(Error::IncompatibleOutcome { evidence });
    }
    let values = numerators.iter().map(|n| n.eval(dz, dt) / d).collect();
    let posterior = WignerTable::new(1, TableKind::Posterior, values)?;
    SmoothingResult::from_posterior(posterior, evidence, inputs_negative)
}

fn first_order_pipeline(
    rho: &DensityOperator,
    effect: &PovmElement,
    params: &WeakMeasurementParams,
    w1_t1: &WignerTable,
    w2_t2: &WignerTable,
) -> Result<(WignerTable, WignerTable, SmoothingResult, SmoothingResult)> {
    let (dz, dt) = (params.delta_z, params.delta_t);
    let envelope_sq = params.envelope().powi(2);
    let bracket = kraus_bracket();
    let rho_s = SeriesMatrix::constant(rho.matrix().clone());
    let effect_s = SeriesMatrix::constant(effect.matrix().clone());

    let sigma = bracket.try_mul(&rho_s)?.try_mul(&bracket.adjoint())?;
    let retro = bracket.adjoint().try_mul(&effect_s)?.try_mul(&bracket)?;
    let w1_t2_s = sigma.wigner(0.5)?;
    let w2_t1_s = retro.wigner(1.0)?;
    let w1_t1_s: Vec<Series> = w1_t1
        .values()
        .iter()
        .map(|&v| Series::constant(v))
        .collect();
    let w2_t2_s: Vec<Series> = w2_t2
        .values()
        .iter()
        .map(|&v| Series::constant(v))
        .collect();

    let evaluated = |s: &[Series]| -> Result<WignerTable> {
        let values = s.iter().map(|x| envelope_sq * x.eval(dz, dt)).collect();
        WignerTable::new(1, TableKind::Unnormalized, values)
    };
    let w1_t2 = evaluated(&w1_t2_s)?;
    let w2_t1 = evaluated(&w2_t1_s)?;

    let neg = |t: &WignerTable| !is_nonnegative(t, NEGATIVITY_TOL);
    let s1 = series_smooth(
        &w1_t1_s,
        &w2_t1_s,
        params,
        envelope_sq,
        neg(w1_t1) || neg(&w2_t1),
    )?;
    let s2 = series_smooth(
        &w1_t2_s,
        &w2_t2_s,
        params,
        envelope_sq,
        neg(&w1_t2) || neg(w2_t2),
    )?;
    Ok((w1_t2, w2_t1, s1, s2))
}

/// Joint density `P(ξ, δz | ψ) = |<ξ|K(δz)|ψ>|²` with the exact Kraus operator.
pub fn joint_density(psi: &StateVector, params: &WeakMeasurementParams, xi: Xi) -> Result<f64> {
    let k = kraus_exact(params);
    let k_psi = k.matrix().apply(psi.amplitudes())?;
    let amp: Complex64 = xi
        .ket()
        .amplitudes()
        .iter()
        .zip(&k_psi)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(amp.norm_sqr())
}

/// Number of grid points used by [`total_postselection_probability`].
pub const QUADRATURE_POINTS: usize = 4001;

fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / (n - 1) as f64;
    let interior: f64 = (1..n - 1).map(|i| f(lo + i as f64 * h)).sum();
    h * (0.5 * (f(lo) + f(hi)) + interior)
}

/// `∫ P(ξ, δz | ψ) dδz` by trapezoidal quadrature over `±10 √δt` around the
/// two Gaussian centers. Fails if halving the grid changes the estimate by
/// more than `1e-12`.
pub fn total_postselection_probability(psi: &StateVector, delta_t: f64, xi: Xi) -> Result<f64> {
    let base = WeakMeasurementParams::new(delta_t, 0.0)?;
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: psi.dim(),
        });
    }
    let f = |dz: f64| {
        let p = WeakMeasurementParams {
            delta_z: dz,
            ..base
        };
        joint_density(psi, &p, xi).unwrap_or(f64::NAN)
    };
    let half_width = 10.0 * delta_t.sqrt();
    let lo = delta_t.min(0.0) - half_width;
    let hi = delta_t.max(0.0) + half_width;
    let fine = trapezoid(f, lo, hi, QUADRATURE_POINTS);
    let coarse = trapezoid(f, lo, hi, QUADRATURE_POINTS / 2 + 1);
    if !fine.is_finite() || (fine - coarse).abs() > 1e-12 {
        return Err(Error::QuadratureNotConverged { coarse, fine });
    }
    Ok(fine)
}

/// Consistent-histories coherence functional `C(p, p')` of a one-step
/// history between a pre-selected and a post-selected state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceFunctional {
    entries: ComplexMatrix,
}

impl CoherenceFunctional {
    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn get(&self, p: usize, p_prime: usize) -> Complex64 {
        self.entries.get(p, p_prime)
    }
}

/// Checks that `(Π0, Π1)` are orthogonal projectors summing to the identity.
fn check_projector_pair(p0: &ComplexMatrix, p1: &ComplexMatrix) -> Result<()> {
    let tol = 1e-10;
    let dim = p0.dim();
    if p1.dim() != dim {
        return Err(Error::InvalidProjectors(
            "projectors differ in dimension".into(),
        ));
    }
    for (name, p) in [("first", p0), ("second", p1)] {
        if p.hermitian_deviation() > tol {
            return Err(Error::InvalidProjectors(format!(
                "{name} projector is not Hermitian"
            )));
        }
        if p.try_mul(p)?.max_abs_diff(p) > tol {
            return Err(Error::InvalidProjectors(format!(
                "{name} projector is not idempotent"
            )));
        }
    }
    if p0.try_mul(p1)?.max_abs_diff(&ComplexMatrix::zeros(dim)) > tol {
        return Err(Error::InvalidProjectors(
            "projectors are not orthogonal".into(),
        ));
    }
    if p0.try_add(p1)?.max_abs_diff(&ComplexMatrix::identity(dim)) > tol {
        return Err(Error::InvalidProjectors(
            "projectors do not sum to the identity".into(),
        ));
    }
    Ok(())
}

/// `C(p, p') = <φ|Π_p|ψ> <ψ|Π_p'|φ>`, the trace of the chain
/// `|φ><φ|Π_p|ψ><ψ|Π_p'|φ><φ|`.
pub fn coherence_functional(
    psi: &StateVector,
    chain: (&ComplexMatrix, &ComplexMatrix),
    final_state: &StateVector,
) -> Result<CoherenceFunctional> {
    check_projector_pair(chain.0, chain.1)?;
    let amp = |proj: &ComplexMatrix| -> Result<Complex64> {
        let v = proj.apply(psi.amplitudes())?;
        Ok(final_state
            .amplitudes()
            .iter()
            .zip(&v)
            .map(|(a, b)| a.conj() * b)
            .sum())
    };
    let a = [amp(chain.0)?, amp(chain.1)?];
    let entries: Vec<Complex64> = (0..2)
        .flat_map(|p| (0..2).map(move |pp| a[p] * a[pp].conj()))
        .collect();
    Ok(CoherenceFunctional {
        entries: ComplexMatrix::from_row_slice(2, &entries)?,
    })
}

/// Weak consistency: the off-diagonal entries have no real part.
pub fn weak_consistency(c: &CoherenceFunctional, tol: f64) -> bool {
    c.get(0, 1).re.abs() <= tol && c.get(1, 0).re.abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::ONE;
    use crate::random;
    use crate::wigner::marginal_by_label;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(dt: f64, dz: f64) -> WeakMeasurementParams {
        WeakMeasurementParams::new(dt, dz).unwrap()
    }

    #[test]
    fn weak_value_examples() {
        let wv = weak_value(&kets::zero(), &kets::plus_i(), &pauli::p_hat()).unwrap();
        assert!((wv - c(0.5, 0.5)).norm() < 1e-12);

        let wv = weak_value(&kets::minus(), &kets::minus(), &pauli::p_hat()).unwrap();
        assert!((wv - ONE).norm() < 1e-12);

        let err = weak_value(&kets::minus(), &kets::plus(), &pauli::q_hat()).unwrap_err();
        assert_eq!(err, Error::OrthogonalSelection);

        // approaching the orthogonal post-selection makes the value blow up
        let near =
            |eps: f64| StateVector::normalized(vec![c(1.0, 0.0), c(1.0 - eps, 0.0)]).unwrap();
        let w1 = weak_value(&kets::minus(), &near(1e-3), &pauli::q_hat())
            .unwrap()
            .norm();
        let w2 = weak_value(&kets::minus(), &near(1e-6), &pauli::q_hat())
            .unwrap()
            .norm();
        assert!(w2 > 100.0 * w1);
    }

    #[test]
    fn params_validation() {
        assert!(WeakMeasurementParams::new(0.0, 0.1).is_err());
        assert!(WeakMeasurementParams::new(-1.0, 0.1).is_err());
        assert!(WeakMeasurementParams::new(0.1, f64::NAN).is_err());
    }

    #[test]
    fn kraus_completeness_by_quadrature() {
        // oracle: integrate K†K over a wide δz grid with the trapezoid rule
        for dt in [0.1, 0.01] {
            let half = 10.0 * f64::sqrt(dt);
            let (lo, hi, n) = (-half, dt + half, 8001);
            let h = (hi - lo) / (n - 1) as f64;
            let mut acc = [0.0f64; 2];
            for i in 0..n {
                let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                let k = kraus_exact(&params(dt, lo + i as f64 * h));
                acc[0] += w * k.matrix().get(0, 0).norm_sqr();
                acc[1] += w * k.matrix().get(1, 1).norm_sqr();
            }
            assert!((acc[0] - 1.0).abs() < 1e-6 && (acc[1] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn kraus_exact_symmetry_point_and_values() {
        let dt = 0.1;
        let k = kraus_exact(&params(dt, dt / 2.0));
        assert!((k.matrix().get(0, 0) - k.matrix().get(1, 1)).norm() < 1e-15);

        let dz = 0.1f64.sqrt();
        let k = kraus_exact(&params(dt, dz));
        let pre = (2.0 * PI * dt).powf(-0.25);
        let g0 = pre * (-dz * dz / (4.0 * dt)).exp();
        let g1 = pre * (-(dz - dt).powi(2) / (4.0 * dt)).exp();
        assert!((k.matrix().get(0, 0).re - g0).abs() < 1e-15);
        assert!((k.matrix().get(1, 1).re - g1).abs() < 1e-15);
        assert_eq!(k.matrix().get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn kraus_first_order_values() {
        let dt = 0.1;
        let dz = 0.1f64.sqrt();
        let k = kraus_first_order(&params(dt, dz));
        let env = (2.0 * PI * dt).powf(-0.25) * (-dz * dz / (4.0 * dt)).exp();
        assert!((k.matrix().get(0, 0).re - env).abs() < 1e-15);
        assert!((k.matrix().get(1, 1).re - env * (1.0 + dz / 2.0 - dt / 8.0)).abs() < 1e-15);

        // δz = 0 and δt -> 0: the bracket tends to the identity
        let p = params(1e-12, 0.0);
        let k = kraus_first_order(&p)
            .matrix()
            .scale_real(1.0 / p.envelope());
        assert!(k.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn kraus_weight_matches_trace_identity() {
        let k = kraus_exact(&params(0.1, 0.0));
        let rho = kets::minus().density();
        let (_, w) = apply_kraus(&k, &rho).unwrap();
        let kk = k.matrix().adjoint().try_mul(k.matrix()).unwrap();
        let direct = kk.trace_product(rho.matrix()).unwrap().re;
        assert!((w - direct).abs() < 1e-15);
        // |g0|² and |g1|² averaged over |->
        let g0 = k.matrix().get(0, 0).re;
        let g1 = k.matrix().get(1, 1).re;
        assert!((w - 0.5 * (g0 * g0 + g1 * g1)).abs() < 1e-15);
    }

    #[test]
    fn first_order_tables_match_expansion() {
        let (dt, dz) = (0.1, 0.1f64.sqrt());
        let r = run_aav(
            &kets::minus(),
            &params(dt, dz),
            Xi::Plus,
            ExpansionMode::FirstOrder,
        )
        .unwrap();
        let scale = r.envelope_sq;
        // W1(t2) ∝ [[1,1],[0,0]] + δz/2 [[.5,1.5],[-.5,.5]] + δt/8 [[-.5,-.5],[.5,.5]], half-weighted
        let expect_w1 = |a: f64, b: f64, c: f64| 0.5 * (a + dz / 2.0 * b + dt / 8.0 * c);
        let w1 = r.w1_t2.layout();
        assert!((w1[0][0] / scale - expect_w1(1.0, 0.5, -0.5)).abs() < 1e-14);
        assert!((w1[0][1] / scale - expect_w1(1.0, 1.5, -0.5)).abs() < 1e-14);
        assert!((w1[1][0] / scale - expect_w1(0.0, -0.5, 0.5)).abs() < 1e-14);
        assert!((w1[1][1] / scale - expect_w1(0.0, 0.5, 0.5)).abs() < 1e-14);
        // W2(+,δz|t1) ∝ [[0,0],[1,1]] + δz/2 [[-.5,.5],[.5,1.5]] + δt/8 [[.5,.5],[-.5,-.5]]
        let expect_w2 = |a: f64, b: f64, c: f64| a + dz / 2.0 * b + dt / 8.0 * c;
        let w2 = r.w2_t1.layout();
        assert!((w2[0][0] / scale - expect_w2(0.0, -0.5, 0.5)).abs() < 1e-14);
        assert!((w2[0][1] / scale - expect_w2(0.0, 0.5, 0.5)).abs() < 1e-14);
        assert!((w2[1][0] / scale - expect_w2(1.0, 0.5, -0.5)).abs() < 1e-14);
        assert!((w2[1][1] / scale - expect_w2(1.0, 1.5, -0.5)).abs() < 1e-14);
        let expected =
            WignerTable::from_layout(1, TableKind::Povm, &[vec![0.0, 0.0], vec![1.0, 1.0]])
                .unwrap();
        assert!(r.w2_t2.max_abs_diff(&expected) < 1e-14);
        assert!(!is_nonnegative(&r.w1_t2, NEGATIVITY_TOL));
        assert!(!is_nonnegative(&r.w2_t1, NEGATIVITY_TOL));
    }

    #[test]
    fn first_order_posteriors() {
        for (dt, dz) in [(0.1, 0.1f64.sqrt()), (0.05, -0.01), (0.2, 0.0)] {
            let r = run_aav(
                &kets::minus(),
                &params(dt, dz),
                Xi::Plus,
                ExpansionMode::FirstOrder,
            )
            .unwrap();
            let lo = 0.5 - 2.0 * dz / dt;
            let hi = 0.5 + 2.0 * dz / dt;
            let t1 = r.smooth_t1.posterior.layout();
            let t2 = r.smooth_t2.posterior.layout();
            assert!((t1[0][0] - lo).abs() < 1e-10 && (t1[0][1] - hi).abs() < 1e-10);
            assert_eq!(t1[1], vec![0.0, 0.0]);
            assert_eq!(t2[0], vec![0.0, 0.0]);
            assert!((t2[1][0] - lo).abs() < 1e-10 && (t2[1][1] - hi).abs() < 1e-10);
            assert!((r.q_bar - hi).abs() < 1e-10);
            assert!((r.smooth_t1.evidence - r.smooth_t2.evidence).abs() < 1e-12);
        }
    }

    #[test]
    fn q_map_by_sign() {
        let run = |dz: f64| {
            run_aav(
                &kets::minus(),
                &params(0.1, dz),
                Xi::Plus,
                ExpansionMode::FirstOrder,
            )
            .unwrap()
        };
        assert_eq!(run(-0.05).q_map, BitEstimate::Zero);
        assert_eq!(run(0.05).q_map, BitEstimate::One);
        let zero = run(0.0);
        assert_eq!(zero.q_map, BitEstimate::Ambiguous);
        assert_eq!(zero.smooth_t1.map_points.len(), 2);
    }

    #[test]
    fn exact_mode_evidence_and_marginals_agree() {
        for dz in [-0.3, -0.05, 0.0, 0.1, 0.1f64.sqrt()] {
            let p = params(0.1, dz);
            let r = run_aav(&kets::minus(), &p, Xi::Plus, ExpansionMode::Exact).unwrap();
            let joint = joint_density(&kets::minus(), &p, Xi::Plus).unwrap();
            assert!((r.smooth_t1.evidence - joint).abs() < 1e-10);
            assert!((r.smooth_t2.evidence - joint).abs() < 1e-10);
            let (m1, m2) = (r.q_marginal_t1(), r.q_marginal_t2());
            assert!((m1[0] - m2[0]).abs() < 1e-10 && (m1[1] - m2[1]).abs() < 1e-10);
            assert!((r.w1_t2_weight - r.w1_t2.sum()).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_mode_closed_form_marginal() {
        // ratio b/a = exp(δz/2 - δt/4) of the two Gaussian amplitudes gives
        // W(q=0) = 1/(1 - ratio)
        let (dt, dz) = (0.1, 0.1f64.sqrt());
        let r = run_aav(
            &kets::minus(),
            &params(dt, dz),
            Xi::Plus,
            ExpansionMode::Exact,
        )
        .unwrap();
        let ratio = (dz / 2.0 - dt / 4.0).exp();
        let m = r.q_marginal_t1();
        assert!((m[0] - 1.0 / (1.0 - ratio)).abs() < 1e-9);
        assert!((m[1] + ratio / (1.0 - ratio)).abs() < 1e-9);
    }

    #[test]
    fn exact_mode_incompatible_at_identity_kraus() {
        // at δz = δt/2 both amplitudes agree, K ∝ I, and |-> never yields +
        let err = run_aav(
            &kets::minus(),
            &params(0.1, 0.05),
            Xi::Plus,
            ExpansionMode::Exact,
        )
        .unwrap_err();
        assert!(err.is_incompatible_outcome());
    }

    #[test]
    fn qbar_complement() {
        let r = run_aav(
            &kets::minus(),
            &params(0.1, 0.2),
            Xi::Plus,
            ExpansionMode::FirstOrder,
        )
        .unwrap();
        let m = marginal_by_label(&r.smooth_t1.posterior, "q").unwrap();
        assert_eq!(r.q_bar + m[0], 1.0);
        assert!(r.q_bar > 1.0);
    }

    #[test]
    fn postselection_closed_form() {
        for dt in [0.1, 0.01] {
            let p = total_postselection_probability(&kets::minus(), dt, Xi::Plus).unwrap();
            assert!((p - 0.5 * (1.0 - (-dt / 8.0).exp())).abs() < 1e-8);
            let q = total_postselection_probability(&kets::minus(), dt, Xi::Minus).unwrap();
            assert!((p + q - 1.0).abs() < 1e-8);
            let pp = total_postselection_probability(&kets::plus(), dt, Xi::Plus).unwrap();
            assert!((pp - 0.5 * (1.0 + (-dt / 8.0).exp())).abs() < 1e-8);
        }
    }

    fn projectors(a: &StateVector, b: &StateVector) -> (ComplexMatrix, ComplexMatrix) {
        (a.projector(), b.projector())
    }

    #[test]
    fn coherence_examples() {
        let (p0, p1) = projectors(&kets::plus(), &kets::minus());
        let cf = coherence_functional(&kets::zero(), (&p0, &p1), &kets::plus_i()).unwrap();
        let expected = [[c(0.25, 0.0), c(0.0, -0.25)], [c(0.0, 0.25), c(0.25, 0.0)]];
        for (p, row) in expected.iter().enumerate() {
            for (q, want) in row.iter().enumerate() {
                assert!((cf.get(p, q) - want).norm() < 1e-12);
            }
        }
        assert!(weak_consistency(&cf, 1e-10));

        let cf = coherence_functional(&kets::plus(), (&p0, &p1), &kets::plus()).unwrap();
        assert!((cf.get(0, 0) - ONE).norm() < 1e-12);
        assert!(cf.get(0, 1).norm() < 1e-12 && cf.get(1, 1).norm() < 1e-12);
        assert!(weak_consistency(&cf, 1e-10));
    }

    #[test]
    fn weak_consistency_rejects_real_off_diagonal() {
        let m = ComplexMatrix::from_real(2, &[0.5, 0.2, 0.2, 0.5]).unwrap();
        assert!(!weak_consistency(
            &CoherenceFunctional { entries: m },
            1e-10
        ));
    }

    #[test]
    fn coherence_diagonal_is_chain_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (p0, p1) = projectors(&kets::zero(), &kets::one());
        for _ in 0..100 {
            let psi = random::state(&mut rng, 2);
            let phi = random::state(&mut rng, 2);
            let cf = coherence_functional(&psi, (&p0, &p1), &phi).unwrap();
            assert!(cf.entries().hermitian_deviation() < 1e-12);
            for (p, basis) in [(0, kets::zero()), (1, kets::one())] {
                let chain =
                    basis.inner(&psi).unwrap().norm_sqr() * phi.inner(&basis).unwrap().norm_sqr();
                assert!((cf.get(p, p).re - chain).abs() < 1e-12);
                assert!(cf.get(p, p).im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_projector_pairs() {
        let (p0, _) = projectors(&kets::zero(), &kets::one());
        let plus = kets::plus().projector();
        assert!(matches!(
            coherence_functional(&kets::zero(), (&p0, &plus), &kets::one()),
            Err(Error::InvalidProjectors(_))
        ));
        let not_proj = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            coherence_functional(&kets::zero(), (&not_proj, &not_proj), &kets::one()),
            Err(Error::InvalidProjectors(_))
        ));
    }

    fn posterior_gap(psi: &StateVector, dt: f64, dz: f64) -> f64 {
        let p = params(dt, dz);
        let exact = run_aav(psi, &p, Xi::Plus, ExpansionMode::Exact).unwrap();
        let first = run_aav(psi, &p, Xi::Plus, ExpansionMode::FirstOrder).unwrap();
        exact
            .smooth_t1
            .posterior
            .max_abs_diff(&first.smooth_t1.posterior)
            .max(
                exact
                    .smooth_t2
                    .posterior
                    .max_abs_diff(&first.smooth_t2.posterior),
            )
    }

    #[test]
    fn first_order_converges_with_overlapping_selection() {
        for psi in [kets::zero(), kets::plus_i()] {
            for ratio in [1.0, 0.3, -2.0] {
                let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4]
                    .iter()
                    .map(|&dt| posterior_gap(&psi, dt, ratio * dt))
                    .collect();
                assert!(
                    gaps[0] > 2.0 * gaps[1] && gaps[1] > 2.0 * gaps[2],
                    "{gaps:?}"
                );
                assert!(gaps[2] < 1e-4);
            }
        }
    }

    #[test]
    fn first_order_diverges_from_exact_with_orthogonal_selection() {
        // <+|-> = 0: the leading evidence term vanishes and the gap grows as dt shrinks
        let minus = kets::minus();
        for ratio in [1.0, 0.1, -2.0] {
            let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&dt| posterior_gap(&minus, dt, ratio * dt))
                .collect();
            assert!(gaps[1] > gaps[0] && gaps[2] > gaps[1], "{gaps:?}");
        }
    }
}
