//! KMS functionals on monomials, their linear extensions, and the numerical
//! probes built on them.
//!
//! Every state here is gauge invariant, so a monomial with `a ≠ b` evaluates
//! to exactly zero. Series states (`LowTemp`, `QuotientChar`, `QZChar`) are
//! truncated at `c ≤ C`, normalized by the full ζ(β), and report a bound on
//! the neglected tail.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{mono_mul, projection_e_f, sigma_ibeta_factor, AlgebraElement, Monomial};
use crate::arith::{self, check_beta, factorize, gcd, gcd_signed, partial_zeta, smooth_numbers, PrimeSet};
use crate::error::{out_of_range, Error, Result};
use crate::measures::{
    self, apply_a_set, check_low_temperature, epsilon, fourier, residue_power_sums, t_beta_exact_root, unit_phase,
    zeta_tail_bound, AtomicMeasure, RootOfUnity,
};

/// Grid size used to certify that a test function is non-negative.
pub const WITNESS_GRID: usize = 4096;

/// A KMS functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateSpec {
    /// ψ_{β,n}, the extremal state attached to ν_{β,n}.
    FiniteN { n: u64, beta: f64 },
    /// ψ_{β,∞}, attached to Lebesgue measure.
    LebesgueInf { beta: f64 },
    /// ψ_{β,ν} for an atomic measure ν.
    FromMeasure { nu: AtomicMeasure, beta: f64 },
    /// φ_{η,β} for β > 1, truncated at `c ≤ truncation`.
    LowTemp {
        eta: AtomicMeasure,
        beta: f64,
        truncation: u64,
    },
    /// ψ̄_{β,m} on the quotient by `U^n = 1`, for `m | n`, β ∈ (0, 1].
    Quotient { n: u64, m: u64, beta: f64 },
    /// ψ̄_{β,z} on the quotient by `U^n = 1`, for `ord z | n`, β > 1.
    QuotientChar {
        n: u64,
        zeta: RootOfUnity,
        beta: f64,
        truncation: u64,
    },
    /// ψ^∞_{β,H} at level `level` with `H = (1/m)ℤ/ℤ`, β ∈ (0, 1].
    QzSubgroup { level: u64, m: u64, beta: f64 },
    /// ψ^∞_{β,χ} at level `level` with `χ(r/level) = chi^r`, β > 1.
    QzChar {
        level: u64,
        chi: RootOfUnity,
        beta: f64,
        truncation: u64,
    },
}

impl StateSpec {
    pub fn beta(&self) -> f64 {
        match self {
            StateSpec::FiniteN { beta, .. }
            | StateSpec::LebesgueInf { beta }
            | StateSpec::FromMeasure { beta, .. }
            | StateSpec::LowTemp { beta, .. }
            | StateSpec::Quotient { beta, .. }
            | StateSpec::QuotientChar { beta, .. }
            | StateSpec::QzSubgroup { beta, .. }
            | StateSpec::QzChar { beta, .. } => *beta,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            StateSpec::FiniteN { .. } => "finite_n",
            StateSpec::LebesgueInf { .. } => "lebesgue_inf",
            StateSpec::FromMeasure { .. } => "from_measure",
            StateSpec::LowTemp { .. } => "low_temp",
            StateSpec::Quotient { .. } => "quotient",
            StateSpec::QuotientChar { .. } => "quotient_char",
            StateSpec::QzSubgroup { .. } => "qz_subgroup",
            StateSpec::QzChar { .. } => "qz_char",
        }
    }

    /// True for the families evaluated on `V_a U^k V_b^*` in the ℕ^× ⋉ ℤ algebra.
    pub fn is_integer_family(&self) -> bool {
        matches!(
            self,
            StateSpec::FiniteN { .. }
                | StateSpec::LebesgueInf { .. }
                | StateSpec::FromMeasure { .. }
                | StateSpec::LowTemp { .. }
        )
    }

    fn takes_qz(&self) -> bool {
        matches!(self, StateSpec::QzSubgroup { .. } | StateSpec::QzChar { .. })
    }

    /// Checks the divisibility and β constraints of the variant.
    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta())?;
        let sub_critical = |beta: f64| {
            if beta > 0.0 && beta <= 1.0 {
                Ok(())
            } else {
                Err(out_of_range(
                    "beta",
                    format!("{} needs beta in (0, 1], got {beta}", self.family()),
                ))
            }
        };
        let positive = |what: &'static str, v: u64| {
            if v == 0 {
                Err(out_of_range(what, "must be >= 1"))
            } else {
                Ok(())
            }
        };
        match self {
            StateSpec::FiniteN { n, .. } => positive("n", *n),
            StateSpec::LebesgueInf { .. } | StateSpec::FromMeasure { .. } => Ok(()),
            StateSpec::LowTemp { beta, truncation, .. } => {
                check_low_temperature(*beta)?;
                positive("truncation", *truncation)
            }
            StateSpec::Quotient { n, m, beta } | StateSpec::QzSubgroup { level: n, m, beta } => {
                positive("n", *n)?;
                if *m == 0 || n % m != 0 {
                    return Err(Error::Precondition(format!("m = {m} does not divide {n}")));
                }
                sub_critical(*beta)
            }
            StateSpec::QuotientChar {
                n,
                zeta: z,
                beta,
                truncation,
            }
            | StateSpec::QzChar {
                level: n,
                chi: z,
                beta,
                truncation,
            } => {
                positive("n", *n)?;
                if n % z.order() != 0 {
                    return Err(Error::Precondition(format!("order of {z} does not divide {n}")));
                }
                check_low_temperature(*beta)?;
                positive("truncation", *truncation)
            }
        }
    }
}

/// `V_a R_x V_b^*` in the ℕ^× ⋉ ℚ/ℤ algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QzMonomial {
    pub a: u64,
    pub x: RootOfUnity,
    pub b: u64,
}

impl QzMonomial {
    pub fn new(a: u64, x: RootOfUnity, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(out_of_range("monomial", format!("({a},{x},{b}) needs a, b >= 1")));
        }
        Ok(Self { a, x, b })
    }
}

/// What a state is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Argument {
    /// `V_a U^k V_b^*`; for the quotient families `U` is the generator `R`.
    Monomial(Monomial),
    Qz(QzMonomial),
}

impl From<Monomial> for Argument {
    fn from(m: Monomial) -> Self {
        Argument::Monomial(m)
    }
}

impl From<QzMonomial> for Argument {
    fn from(m: QzMonomial) -> Self {
        Argument::Qz(m)
    }
}

/// A state value, with a bound on the truncated tail for series states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: Complex64,
    pub tail_bound: Option<f64>,
}

impl Evaluation {
    fn exact(value: f64) -> Self {
        Self {
            value: Complex64::new(value, 0.0),
            tail_bound: None,
        }
    }
}

/// `m^{−β} Σ_{d|m} μ(d) φ_β(d)/φ(d)`, the value of the extremal states on a
/// unitary of order `m`. The summand is multiplicative, so the sum is the
/// product over `p | m` of `1 − (p^β − 1)/(p − 1)`.
pub fn order_weight(m: u64, beta: f64) -> Result<f64> {
    let f = factorize(m)?;
    let product = f.primes().fold(1.0, |acc, p| {
        let p = p as f64;
        acc * (1.0 - (p.powf(beta) - 1.0) / (p - 1.0))
    });
    Ok((m as f64).powf(-beta) * product)
}

/// `Σ_{c≤C} c^{−β} z^{kc} / ζ(β)` summed through residues of `c` modulo the
/// order of `z`.
fn character_series(z: RootOfUnity, k: i64, sums: &[f64], zeta: f64) -> Complex64 {
    let q = z.den();
    let step = (z.num() as i128 * k as i128).rem_euclid(q as i128) as u64;
    sums.iter()
        .enumerate()
        .map(|(r, s)| unit_phase((step as u128 * r as u128 % q as u128) as u64, q) * *s)
        .sum::<Complex64>()
        / zeta
}

/// `ζ(β)^{-1} Σ_{c≤C} c^{−β} ∫ z^{kc} dη` with its tail bound.
fn truncated_transfer_fourier(eta: &AtomicMeasure, k: i64, beta: f64, truncation: u64) -> Result<Evaluation> {
    let zeta = arith::zeta(beta)?;
    let mut by_order: BTreeMap<u64, Vec<(RootOfUnity, f64)>> = BTreeMap::new();
    for (z, w) in eta.iter() {
        by_order.entry(z.order()).or_default().push((z, w));
    }
    let mut value = Complex64::new(0.0, 0.0);
    for (&q, atoms) in &by_order {
        let sums = residue_power_sums(beta, truncation, q);
        for &(z, w) in atoms {
            value += character_series(z, k, &sums, zeta) * w;
        }
    }
    Ok(Evaluation {
        value,
        tail_bound: Some(eta.norm() * zeta_tail_bound(beta, truncation, zeta)),
    })
}

fn kind_mismatch(spec: &StateSpec, arg: &Argument) -> Error {
    Error::KindMismatch {
        state: spec.family(),
        argument: match arg {
            Argument::Monomial(_) => "an integer-level monomial",
            Argument::Qz(_) => "a rational-level monomial",
        },
    }
}

/// Evaluates a state on one monomial.
pub fn eval_state(spec: &StateSpec, arg: impl Into<Argument>) -> Result<Evaluation> {
    let arg = arg.into();
    spec.validate()?;
    let (a, b) = match (&arg, spec.takes_qz()) {
        (Argument::Monomial(m), false) => (m.a, m.b),
        (Argument::Qz(m), true) => (m.a, m.b),
        _ => return Err(kind_mismatch(spec, &arg)),
    };
    let zero_tail = match spec {
        StateSpec::LowTemp { .. } | StateSpec::QuotientChar { .. } | StateSpec::QzChar { .. } => Some(0.0),
        _ => None,
    };
    if a != b {
        return Ok(Evaluation {
            value: Complex64::new(0.0, 0.0),
            tail_bound: zero_tail,
        });
    }
    let beta = spec.beta();
    let scale = (a as f64).powf(-beta);
    let mut eval = match (spec, arg) {
        (StateSpec::FiniteN { n, .. }, Argument::Monomial(x)) => {
            Evaluation::exact(order_weight(n / gcd_signed(*n, x.k), beta)?)
        }
        (StateSpec::LebesgueInf { .. }, Argument::Monomial(x)) => Evaluation::exact(if x.k == 0 { 1.0 } else { 0.0 }),
        (StateSpec::FromMeasure { nu, .. }, Argument::Monomial(x)) => Evaluation {
            value: fourier(nu, x.k),
            tail_bound: None,
        },
        (StateSpec::LowTemp { eta, truncation, .. }, Argument::Monomial(x)) => {
            truncated_transfer_fourier(eta, x.k, beta, *truncation)?
        }
        (StateSpec::Quotient { m, .. }, Argument::Monomial(x)) => {
            Evaluation::exact(order_weight(m / gcd_signed(*m, x.k), beta)?)
        }
        (
            StateSpec::QuotientChar {
                zeta: z, truncation, ..
            },
            Argument::Monomial(x),
        ) => truncated_transfer_fourier(&AtomicMeasure::dirac(*z), x.k, beta, *truncation)?,
        (StateSpec::QzSubgroup { level, m, .. }, Argument::Qz(x)) => {
            check_level(x.x, *level)?;
            let q = x.x.order();
            Evaluation::exact(order_weight(q / gcd(q, *m), beta)?)
        }
        (
            StateSpec::QzChar {
                level, chi, truncation, ..
            },
            Argument::Qz(x),
        ) => {
            let r = check_level(x.x, *level)?;
            let value = chi.pow_u(r);
            truncated_transfer_fourier(&AtomicMeasure::dirac(value), 1, beta, *truncation)?
        }
        _ => return Err(kind_mismatch(spec, &arg)),
    };
    eval.value *= scale;
    eval.tail_bound = eval.tail_bound.map(|t| t * scale);
    Ok(eval)
}

/// Index `r` with `x = r/level`.
fn check_level(x: RootOfUnity, level: u64) -> Result<u64> {
    x.index_at_level(level)
        .ok_or_else(|| Error::Precondition(format!("order of {x} does not divide level {level}")))
}

/// Linear extension of [`eval_state`]; tail bounds add up weighted by `|coefficient|`.
pub fn eval_element(spec: &StateSpec, x: &AlgebraElement) -> Result<Evaluation> {
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail: Option<f64> = None;
    for (m, c) in x.iter() {
        let e = eval_state(spec, m)?;
        value += c * e.value;
        if let Some(t) = e.tail_bound {
            *tail.get_or_insert(0.0) += c.norm() * t;
        }
    }
    Ok(Evaluation {
        value,
        tail_bound: tail,
    })
}

/// `|ψ(xy) − (a/b)^{−β} ψ(yx)|` for `x = (a,k,b)`.
pub fn kms_residual(spec: &StateSpec, x: Monomial, y: Monomial) -> Result<f64> {
    if !spec.is_integer_family() {
        return Err(Error::KindMismatch {
            state: spec.family(),
            argument: "the integer-level KMS probe",
        });
    }
    let xy = eval_state(spec, mono_mul(x, y)?)?.value;
    let yx = eval_state(spec, mono_mul(y, x)?)?.value;
    Ok((xy - sigma_ibeta_factor(x, spec.beta()) * yx).norm())
}

/// A trigonometric polynomial `f(θ) = Σ_j c_j e^{2πijθ}`.
pub type TrigPolynomial = BTreeMap<i64, Complex64>;

/// Checks that `f` is real and non-negative on a [`WITNESS_GRID`]-point grid.
fn certify_nonnegative(f: &TrigPolynomial) -> Result<()> {
    let n = WITNESS_GRID as u64;
    for t in 0..n {
        let v: Complex64 = f
            .iter()
            .map(|(&j, &c)| c * unit_phase((j as i128 * t as i128).rem_euclid(n as i128) as u64, n))
            .sum();
        if v.im.abs() > 1e-9 || v.re < -1e-12 {
            return Err(Error::Precondition(format!(
                "test function is not non-negative at grid point {t}/{n}: {v}"
            )));
        }
    }
    Ok(())
}

/// `∫ f d(A_{β,F} ν)` for a test function `f ≥ 0`. A value below zero
/// shows that ν is not β-subconformal.
pub fn subconformal_witness_value(nu: &AtomicMeasure, beta: f64, set: &PrimeSet, f: &TrigPolynomial) -> Result<f64> {
    certify_nonnegative(f)?;
    let image = apply_a_set(nu, set, beta)?;
    let value: Complex64 = f.iter().map(|(&j, &c)| c * fourier(&image, j)).sum();
    Ok(value.re)
}

/// The same quantity computed in the algebra as `ψ_{β,ν}(e_F f(U) e_F)`.
pub fn subconformal_witness_via_algebra(
    nu: &AtomicMeasure,
    beta: f64,
    set: &PrimeSet,
    f: &TrigPolynomial,
) -> Result<f64> {
    certify_nonnegative(f)?;
    let e = projection_e_f(set)?;
    let poly = AlgebraElement::from_terms(f.iter().map(|(&j, &c)| (Monomial::unitary(j), c)));
    let element = e.checked_mul(&poly)?.checked_mul(&e)?;
    let spec = StateSpec::FromMeasure { nu: nu.clone(), beta };
    Ok(eval_element(&spec, &element)?.value.re)
}

/// κ_b: `U ↦ U^b`, `V_a ↦ V_a`.
pub fn apply_kappa(b: u64, x: Monomial) -> Result<Monomial> {
    let k = i64::try_from(b)
        .ok()
        .and_then(|b| x.k.checked_mul(b))
        .ok_or(Error::Overflow("kappa"))?;
    Ok(Monomial { a: x.a, k, b: x.b })
}

/// Distance of ψ_{β,n} from ψ_{β,∞} at one monomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakStarGap {
    pub gap: f64,
    /// `a^{−β} (n / gcd(n,k))^{−β}`.
    pub bound: f64,
}

pub fn weak_star_gap(beta: f64, n: u64, x: Monomial) -> Result<WeakStarGap> {
    if !(beta >= 0.0 && beta <= 1.0) {
        return Err(out_of_range(
            "beta",
            format!("gap estimate needs beta in [0, 1], got {beta}"),
        ));
    }
    let finite = eval_state(&StateSpec::FiniteN { n, beta }, x)?.value;
    let lebesgue = eval_state(&StateSpec::LebesgueInf { beta }, x)?.value;
    let order = n / gcd_signed(n, x.k);
    Ok(WeakStarGap {
        gap: (finite - lebesgue).norm(),
        bound: (x.a as f64).powf(-beta) * (order as f64).powf(-beta),
    })
}

/// Both sides of the reconstruction of ψ(U^k) from the corner state at `e_F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub lhs: f64,
    pub rhs: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// `ψ(U^k)` against `Σ_{a∈ℕ^×_F, a≤C} a^{−β} ψ(e_F U^{ak} e_F)`.
///
/// `|ψ(e_F U^j e_F)| ≤ ψ(e_F) = ζ_F(β)^{-1}`, so the omitted terms are
/// bounded by `1 − ζ_F(β)^{-1} Σ_{a≤C} a^{−β}`.
pub fn reconstruct_check(spec: &StateSpec, set: &PrimeSet, k: i64, truncation: u64) -> Result<Reconstruction> {
    if !matches!(
        spec,
        StateSpec::FiniteN { .. } | StateSpec::LebesgueInf { .. } | StateSpec::FromMeasure { .. }
    ) {
        return Err(Error::KindMismatch {
            state: spec.family(),
            argument: "corner reconstruction",
        });
    }
    let beta = spec.beta();
    if beta <= 0.0 {
        return Err(out_of_range("beta", "reconstruction needs beta > 0"));
    }
    let zeta_f = partial_zeta(set, beta)?;
    let e = projection_e_f(set)?;
    let lhs = eval_state(spec, Monomial::unitary(k))?.value.re;
    let smooth = smooth_numbers(set, truncation);
    let mut rhs = 0.0;
    let mut weights = 0.0;
    for &a in smooth.iter().rev() {
        let w = (a as f64).powf(-beta);
        let j = k
            .checked_mul(a as i64)
            .ok_or(Error::Overflow("reconstruction exponent"))?;
        let corner = e
            .checked_mul(&AlgebraElement::from(Monomial::unitary(j)))?
            .checked_mul(&e)?;
        rhs += w * eval_element(spec, &corner)?.value.re;
        weights += w;
    }
    Ok(Reconstruction {
        lhs,
        rhs,
        tail_bound: (1.0 - weights / zeta_f).max(0.0),
        terms: smooth.len(),
    })
}

/// Total variation distance of `T_β δ_z` from the uniform measure on `Z_n`,
/// `n = ord z`, along a list of β values.
pub fn limit_beta1(z: RootOfUnity, betas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let uniform = AtomicMeasure::uniform(z.order())?;
    betas
        .iter()
        .map(|&beta| Ok((beta, t_beta_exact_root(z, beta)?.tv_distance(&uniform))))
        .collect()
}

/// Largest deviation between ψ_{β,n} and the uniform average of φ_{δ_ξ,β}
/// over primitive `ξ`, with the truncation bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Superposition {
    pub max_deviation: f64,
    pub tail_bound: f64,
    pub monomials_checked: usize,
}

/// Compares on `(a, k, a)` for `a ∈ {1, 2, 3}` and `|k| ≤ 2n + 1`.
pub fn superposition_check(n: u64, beta: f64, truncation: u64) -> Result<Superposition> {
    check_low_temperature(beta)?;
    let closed = StateSpec::FiniteN { n, beta };
    let eps = epsilon(n)?;
    let zeta = arith::zeta(beta)?;
    let sums = residue_power_sums(beta, truncation, n);
    let span = 2 * n as i64 + 1;
    let mut max_deviation: f64 = 0.0;
    let mut checked = 0;
    for k in -span..=span {
        let series: Complex64 = eps.iter().map(|(xi, w)| character_series(xi, k, &sums, zeta) * w).sum();
        for a in 1..=3u64 {
            let scale = (a as f64).powf(-beta);
            let formula = eval_state(&closed, Monomial { a, k, b: a })?.value;
            max_deviation = max_deviation.max((formula - series * scale).norm());
            checked += 1;
        }
    }
    Ok(Superposition {
        max_deviation,
        tail_bound: zeta_tail_bound(beta, truncation, zeta),
        monomials_checked: checked,
    })
}

/// Both sides of the level-`n` restriction of a ℚ/ℤ subgroup state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coherence {
    pub lhs: f64,
    pub rhs: f64,
    /// Divisor of `n` labelling the quotient state on the right.
    pub quotient_divisor: u64,
}

/// ψ^∞_{β,H} at level `level`, `H = (1/m)ℤ/ℤ`, against ψ̄_{β,m'} on the
/// quotient by `U^n = 1`. Here `H ∩ (1/n)ℤ/ℤ = (1/gcd(m,n))ℤ/ℤ`, which is
/// the state labelled by `m' = n / gcd(m, n)`; `x = k/n` is sent to `R^k`.
pub fn qz_coherence(level: u64, m: u64, beta: f64, n: u64, x: QzMonomial) -> Result<Coherence> {
    if n == 0 || level % n != 0 {
        return Err(Error::Precondition(format!("n = {n} does not divide level {level}")));
    }
    let k = check_level(x.x, n)?;
    let spec = StateSpec::QzSubgroup { level, m, beta };
    let lhs = eval_state(&spec, x)?.value.re;
    let quotient_divisor = n / gcd(m, n);
    let k = i64::try_from(k).map_err(|_| Error::Overflow("coherence exponent"))?;
    let rhs = eval_state(
        &StateSpec::Quotient {
            n,
            m: quotient_divisor,
            beta,
        },
        Monomial { a: x.a, k, b: x.b },
    )?
    .value
    .re;
    Ok(Coherence {
        lhs,
        rhs,
        quotient_divisor,
    })
}

/// The measure ν_ψ with `ψ(U^k) = ∫ z^k dν_ψ`, for the families that are
/// given by a finitely supported measure.
pub fn boundary_measure(spec: &StateSpec) -> Result<AtomicMeasure> {
    match spec {
        StateSpec::FiniteN { n, beta } => measures::extremal_measure(*n, *beta),
        StateSpec::FromMeasure { nu, .. } => Ok(nu.clone()),
        _ => Err(Error::KindMismatch {
            state: spec.family(),
            argument: "a boundary measure request",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::extremal_measure;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn root(num: i64, den: u64) -> RootOfUnity {
        RootOfUnity::new(num, den).unwrap()
    }

    fn diag(a: u64, k: i64) -> Monomial {
        Monomial { a, k, b: a }
    }

    fn value(spec: &StateSpec, m: Monomial) -> Complex64 {
        eval_state(spec, m).unwrap().value
    }

    #[test]
    fn order_weight_matches_divisor_sum() {
        for m in 1..=200u64 {
            for beta in [0.0, 0.3, 1.0, 1.7] {
                let direct: f64 = arith::divisors(m)
                    .unwrap()
                    .into_iter()
                    .map(|d| {
                        arith::mobius(d).unwrap() as f64 * arith::totient_beta(d, beta).unwrap()
                            / arith::totient(d).unwrap() as f64
                    })
                    .sum::<f64>()
                    * (m as f64).powf(-beta);
                assert_abs_diff_eq!(order_weight(m, beta).unwrap(), direct, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_level_parity() {
        let beta = 0.6;
        let spec = StateSpec::FiniteN { n: 2, beta };
        for a in 1..5u64 {
            for k in -6..=6i64 {
                let expected = if k % 2 == 0 { 1.0 } else { 2f64.powf(1.0 - beta) - 1.0 } * (a as f64).powf(-beta);
                assert_abs_diff_eq!(value(&spec, diag(a, k)).re, expected, epsilon = 1e-14);
            }
        }
        assert_eq!(value(&StateSpec::FiniteN { n: 2, beta: 1.0 }, diag(1, 3)).re, 0.0);
    }

    #[test]
    fn lebesgue_and_zero_temperature_examples() {
        let beta = 0.8;
        let spec = StateSpec::LebesgueInf { beta };
        assert_eq!(value(&spec, diag(2, 5)).re, 0.0);
        assert_abs_diff_eq!(value(&spec, diag(2, 0)).re, 2f64.powf(-beta), epsilon = 1e-15);
        let one = StateSpec::FiniteN { n: 1, beta: 0.0 };
        let leb = StateSpec::LebesgueInf { beta: 0.0 };
        for a in 1..4 {
            for k in -3..=3 {
                assert_eq!(value(&one, diag(a, k)).re, 1.0);
                assert_eq!(value(&leb, diag(a, k)).re, if k == 0 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn off_diagonal_is_zero_for_every_family() {
        let specs = [
            StateSpec::FiniteN { n: 6, beta: 0.5 },
            StateSpec::LebesgueInf { beta: 0.5 },
            StateSpec::FromMeasure {
                nu: epsilon(5).unwrap(),
                beta: 0.5,
            },
            StateSpec::LowTemp {
                eta: epsilon(3).unwrap(),
                beta: 2.0,
                truncation: 100,
            },
            StateSpec::Quotient { n: 6, m: 3, beta: 0.5 },
            StateSpec::QuotientChar {
                n: 6,
                zeta: root(1, 3),
                beta: 2.0,
                truncation: 100,
            },
        ];
        for spec in &specs {
            assert_eq!(value(spec, Monomial { a: 2, k: 1, b: 3 }), Complex64::new(0.0, 0.0));
        }
        let qz = StateSpec::QzSubgroup {
            level: 12,
            m: 2,
            beta: 0.5,
        };
        let x = QzMonomial::new(3, root(1, 4), 2).unwrap();
        assert_eq!(eval_state(&qz, x).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn kind_and_range_errors() {
        let qz = QzMonomial::new(1, root(1, 2), 1).unwrap();
        assert!(matches!(
            eval_state(&StateSpec::FiniteN { n: 2, beta: 1.0 }, qz),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            eval_state(
                &StateSpec::QzSubgroup {
                    level: 4,
                    m: 2,
                    beta: 1.0
                },
                diag(1, 1)
            ),
            Err(Error::KindMismatch { .. })
        ));
        assert!(eval_state(&StateSpec::Quotient { n: 6, m: 4, beta: 0.5 }, diag(1, 1)).is_err());
        assert!(eval_state(&StateSpec::Quotient { n: 6, m: 3, beta: 1.5 }, diag(1, 1)).is_err());
        let low = StateSpec::LowTemp {
            eta: epsilon(2).unwrap(),
            beta: 1.0,
            truncation: 10,
        };
        assert!(eval_state(&low, diag(1, 1)).is_err());
        let qz_spec = StateSpec::QzSubgroup {
            level: 6,
            m: 2,
            beta: 0.5,
        };
        assert!(eval_state(&qz_spec, QzMonomial::new(1, root(1, 4), 1).unwrap()).is_err());
    }

    #[test]
    fn closed_form_matches_measure_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(1..=30);
            let beta = rng.gen_range(0.0..1.5);
            let x = diag(rng.gen_range(1..=20), rng.gen_range(-60..=60));
            let closed = value(&StateSpec::FiniteN { n, beta }, x);
            let via = value(
                &StateSpec::FromMeasure {
                    nu: extremal_measure(n, beta).unwrap(),
                    beta,
                },
                x,
            );
            assert!((closed - via).norm() < 1e-10, "n = {n}, beta = {beta}, x = {x}");
        }
    }

    #[test]
    fn kms_examples() {
        let id = Monomial::identity();
        assert_eq!(
            kms_residual(&StateSpec::FiniteN { n: 3, beta: 0.4 }, id, id).unwrap(),
            0.0
        );
        let residual = kms_residual(
            &StateSpec::LebesgueInf { beta: 1.0 },
            Monomial { a: 2, k: 1, b: 3 },
            Monomial { a: 3, k: 2, b: 5 },
        )
        .unwrap();
        assert_eq!(residual, 0.0);
    }

    #[test]
    fn e_f_mass_and_alpha_sum() {
        let set = PrimeSet::new(vec![2, 3, 5]).unwrap();
        let e = projection_e_f(&set).unwrap();
        for (spec, beta) in [
            (StateSpec::FiniteN { n: 12, beta: 0.7 }, 0.7),
            (StateSpec::LebesgueInf { beta: 0.4 }, 0.4),
            (
                StateSpec::FromMeasure {
                    nu: epsilon(7).unwrap(),
                    beta: 1.0,
                },
                1.0,
            ),
        ] {
            let mass = eval_element(&spec, &e).unwrap().value.re;
            assert_abs_diff_eq!(mass, 1.0 / partial_zeta(&set, beta).unwrap(), epsilon = 1e-12);
        }
        let beta = 2.0;
        let spec = StateSpec::FiniteN { n: 4, beta };
        let mut total = 0.0;
        for a in smooth_numbers(&set, 100_000) {
            total += eval_element(&spec, &crate::algebra::alpha(a, &e).unwrap())
                .unwrap()
                .value
                .re;
        }
        assert!((1.0 - total).abs() < 1e-4, "{total}");
    }

    #[test]
    fn witness_examples() {
        let f: TrigPolynomial = [(-1, 0.5), (0, 1.0), (1, 0.5)]
            .into_iter()
            .map(|(j, c)| (j, Complex64::new(c, 0.0)))
            .collect();
        let half = AtomicMeasure::dirac(root(1, 2));
        let two = PrimeSet::new(vec![2]).unwrap();
        let v = subconformal_witness_value(&half, 1.0, &two, &f).unwrap();
        assert_abs_diff_eq!(v, -1.0, epsilon = 1e-12);
        let via = subconformal_witness_via_algebra(&half, 1.0, &two, &f).unwrap();
        assert_abs_diff_eq!(via, v, epsilon = 1e-12);

        let nu = extremal_measure(6, 0.8).unwrap();
        for primes in [
            vec![],
            vec![2],
            vec![3],
            vec![5],
            vec![2, 3],
            vec![2, 5],
            vec![3, 5],
            vec![2, 3, 5],
        ] {
            let set = PrimeSet::new(primes).unwrap();
            let v = subconformal_witness_value(&nu, 0.8, &set, &f).unwrap();
            assert!(v >= -1e-10);
            let via = subconformal_witness_via_algebra(&nu, 0.8, &set, &f).unwrap();
            assert_abs_diff_eq!(via, v, epsilon = 1e-12);
        }

        let one: TrigPolynomial = [(0, Complex64::new(1.0, 0.0))].into_iter().collect();
        let set = PrimeSet::new(vec![2, 3]).unwrap();
        let nu = epsilon(5).unwrap().scaled(0.75);
        let v = subconformal_witness_value(&nu, 0.5, &set, &one).unwrap();
        let expected: f64 = arith::squarefree_products(&set)
            .unwrap()
            .into_iter()
            .map(|(d, mu)| mu as f64 * (d as f64).powf(-0.5) * nu.mass())
            .sum();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-12);

        let negative: TrigPolynomial = [
            (0, Complex64::new(0.5, 0.0)),
            (1, Complex64::new(1.0, 0.0)),
            (-1, Complex64::new(1.0, 0.0)),
        ]
        .into_iter()
        .collect();
        assert!(subconformal_witness_value(&nu, 0.5, &set, &negative).is_err());
    }

    #[test]
    fn kappa_examples() {
        let x = Monomial { a: 3, k: -7, b: 5 };
        assert_eq!(apply_kappa(1, x).unwrap(), x);
        assert_eq!(apply_kappa(0, x).unwrap(), Monomial { a: 3, k: 0, b: 5 });
        assert_eq!(
            apply_kappa(2, apply_kappa(3, x).unwrap()).unwrap(),
            apply_kappa(6, x).unwrap()
        );
        assert!(apply_kappa(u64::MAX, x).is_err());
    }

    #[test]
    fn gap_examples() {
        let g = weak_star_gap(1.0, 997, diag(1, 1)).unwrap();
        assert!(g.gap < 0.002 && g.gap <= g.bound);
        assert_eq!(weak_star_gap(0.7, 12, diag(3, 0)).unwrap().gap, 0.0);
        let gaps: Vec<f64> = (1..=12)
            .map(|j| weak_star_gap(0.6, 1 << j, diag(1, 3)).unwrap().gap)
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
    }

    #[test]
    fn reconstruction_examples() {
        let set = PrimeSet::new(vec![2, 3]).unwrap();
        let spec = StateSpec::FiniteN { n: 4, beta: 0.9 };
        let r = reconstruct_check(&spec, &set, 0, 10_000).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-15);
        assert!((r.lhs - r.rhs).abs() <= r.tail_bound + 1e-12);
        for k in [1, 2, 3, 5] {
            let r = reconstruct_check(&spec, &set, k, 10_000).unwrap();
            assert!((r.lhs - r.rhs).abs() <= r.tail_bound + 1e-12, "k = {k}: {r:?}");
        }
    }

    #[test]
    fn beta_one_limit_trend() {
        let betas: Vec<f64> = (1..=6).map(|j| 1.0 + 10f64.powi(-j)).collect();
        let quarter = limit_beta1(root(1, 4), &betas).unwrap();
        assert!(quarter.windows(2).all(|w| w[1].1 <= w[0].1), "{quarter:?}");
        for (_, d) in limit_beta1(RootOfUnity::one(), &betas).unwrap() {
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn superposition_small() {
        for (n, beta, c) in [(1, 2.0, 1000), (4, 2.0, 100_000)] {
            let s = superposition_check(n, beta, c).unwrap();
            assert!(s.max_deviation <= s.tail_bound, "n = {n}: {s:?}");
        }
    }

    #[test]
    fn coherence_examples() {
        let beta = 0.7;
        // H = everything at level N: every x is trivial modulo H
        let c = qz_coherence(12, 12, beta, 6, QzMonomial::new(2, root(1, 6), 2).unwrap()).unwrap();
        assert_abs_diff_eq!(c.lhs, 2f64.powf(-beta), epsilon = 1e-15);
        assert_abs_diff_eq!(c.lhs, c.rhs, epsilon = 1e-12);
        // trivial H recovers the integer states at the order of x
        for q in [1u64, 2, 3, 4, 6, 12] {
            let x = QzMonomial::new(1, root(1, q), 1).unwrap();
            let c = qz_coherence(12, 1, beta, 12, x).unwrap();
            assert_eq!(c.quotient_divisor, 12);
            let finite = value(&StateSpec::FiniteN { n: q, beta }, diag(1, 1)).re;
            assert_abs_diff_eq!(c.lhs, finite, epsilon = 1e-12);
            assert_abs_diff_eq!(c.rhs, finite, epsilon = 1e-12);
        }
    }

    #[test]
    fn series_families_agree_with_transfer() {
        let beta = 2.0;
        let z = root(1, 6);
        let char_spec = StateSpec::QuotientChar {
            n: 6,
            zeta: z,
            beta,
            truncation: 20_000,
        };
        let low = StateSpec::LowTemp {
            eta: AtomicMeasure::dirac(z),
            beta,
            truncation: 20_000,
        };
        let exact = t_beta_exact_root(z, beta).unwrap();
        for k in -7..=7 {
            let a = eval_state(&char_spec, diag(1, k)).unwrap();
            let b = eval_state(&low, diag(1, k)).unwrap();
            assert!((a.value - b.value).norm() < 1e-15);
            assert!((a.value - fourier(&exact, k)).norm() <= a.tail_bound.unwrap());
        }
        let qz = StateSpec::QzChar {
            level: 12,
            chi: root(5, 12),
            beta,
            truncation: 20_000,
        };
        // chi(1/6) = chi^2
        let x = QzMonomial::new(1, root(1, 6), 1).unwrap();
        let v = eval_state(&qz, x).unwrap();
        let expected = fourier(&t_beta_exact_root(root(5, 6), beta).unwrap(), 1);
        assert!((v.value - expected).norm() <= v.tail_bound.unwrap());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = StateSpec::FromMeasure {
            nu: epsilon(6).unwrap(),
            beta: 0.5,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: StateSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let spec = StateSpec::QuotientChar {
            n: 6,
            zeta: root(1, 3),
            beta: 2.0,
            truncation: 10,
        };
        let back: StateSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
