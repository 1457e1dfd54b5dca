//! Atomic measures on the roots of unity in the circle.
//!
//! Atoms are kept as exact reduced fractions `num/den` of a full turn; only
//! weights are floating point. Every operation returns a fresh measure.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{
    self, check_beta, divisors_of, factorize, gcd, mobius_of, squarefree_products, totient, totient_beta_of, PrimeSet,
};
use crate::error::{out_of_range, Error, Result};

/// Weights at or below this magnitude are dropped by [`AtomicMeasure::cleanup`].
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Residual allowed when solving for `A_{β,n}^{-1}`.
const INVERSE_RESIDUAL_TOL: f64 = 1e-9;

/// Largest prime window accepted by [`check_subconformal`].
const MAX_CHECK_PRIMES: usize = 20;

/// A point of ℚ/ℤ ⊂ 𝕋, stored as a reduced fraction of a full turn.
///
/// `den` is the order of the point in the circle group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRoot", into = "RawRoot")]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

#[derive(Serialize, Deserialize)]
struct RawRoot {
    num: i64,
    den: u64,
}

impl TryFrom<RawRoot> for RootOfUnity {
    type Error = Error;

    fn try_from(raw: RawRoot) -> Result<Self> {
        RootOfUnity::new(raw.num, raw.den)
    }
}

impl From<RootOfUnity> for RawRoot {
    fn from(z: RootOfUnity) -> Self {
        RawRoot {
            num: z.num as i64,
            den: z.den,
        }
    }
}

impl RootOfUnity {
    /// The point `num/den` reduced modulo 1 and to lowest terms.
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 || den > i64::MAX as u64 {
            return Err(out_of_range("root of unity denominator", format!("{den}")));
        }
        let r = (num as i128).rem_euclid(den as i128) as u64;
        let g = gcd(r, den);
        Ok(Self {
            num: r / g,
            den: den / g,
        })
    }

    /// The identity `1 ∈ 𝕋`, written `0/1`.
    pub const fn one() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Order in the circle group.
    pub fn order(&self) -> u64 {
        self.den
    }

    /// `z^k`.
    pub fn pow(&self, k: i64) -> Self {
        let r = (self.num as i128 * k as i128).rem_euclid(self.den as i128) as u64;
        let g = gcd(r, self.den);
        Self {
            num: r / g,
            den: self.den / g,
        }
    }

    /// `z^k` for unsigned exponents.
    pub fn pow_u(&self, k: u64) -> Self {
        let r = ((self.num as u128 * k as u128) % self.den as u128) as u64;
        let g = gcd(r, self.den);
        Self {
            num: r / g,
            den: self.den / g,
        }
    }

    /// Group product (sum of fractions).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let den = arith::lcm(self.den, other.den)?;
        let a = self.num as u128 * (den / self.den) as u128;
        let b = other.num as u128 * (den / other.den) as u128;
        let r = ((a + b) % den as u128) as u64;
        let g = gcd(r, den);
        Ok(Self {
            num: r / g,
            den: den / g,
        })
    }

    /// Exponent `j` such that this point is `j / level`; requires `den | level`.
    pub fn index_at_level(&self, level: u64) -> Option<u64> {
        (level % self.den == 0).then(|| self.num * (level / self.den))
    }

    /// The complex number `exp(2πi·num/den)`.
    pub fn value(&self) -> Complex64 {
        unit_phase(self.num, self.den)
    }
}

/// `exp(2πi·r/q)`.
pub(crate) fn unit_phase(r: u64, q: u64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * (r as f64) / (q as f64))
}

impl Ord for RootOfUnity {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for RootOfUnity {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RootOfUnity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num = num
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("root numerator {num:?}: {e}")))?;
        let den = den
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("root denominator {den:?}: {e}")))?;
        RootOfUnity::new(num, den)
    }
}

/// A finitely supported measure on the roots of unity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomicMeasure {
    atoms: BTreeMap<RootOfUnity, f64>,
    /// β used by the constructor, if any. Bookkeeping only.
    pub beta_tag: Option<f64>,
}

impl AtomicMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Point mass at `z`.
    pub fn dirac(z: RootOfUnity) -> Self {
        Self::from_atoms([(z, 1.0)])
    }

    /// Accumulates weights of repeated atoms; exact zeros are not stored.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (RootOfUnity, f64)>) -> Self {
        let mut out = Self::zero();
        for (z, w) in atoms {
            out.add_atom(z, w);
        }
        out
    }

    /// Normalized counting measure on all of Z_n.
    pub fn uniform(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(out_of_range("n", "uniform measure needs n >= 1"));
        }
        let w = 1.0 / n as f64;
        Ok(Self::from_atoms(
            (0..n).map(|j| (RootOfUnity::new(j as i64, n).expect("n >= 1"), w)),
        ))
    }

    pub fn add_atom(&mut self, z: RootOfUnity, w: f64) {
        if w == 0.0 {
            return;
        }
        let entry = self.atoms.entry(z).or_insert(0.0);
        *entry += w;
        if *entry == 0.0 {
            self.atoms.remove(&z);
        }
    }

    pub fn atoms(&self) -> &BTreeMap<RootOfUnity, f64> {
        &self.atoms
    }

    pub fn iter(&self) -> impl Iterator<Item = (RootOfUnity, f64)> + '_ {
        self.atoms.iter().map(|(&z, &w)| (z, w))
    }

    pub fn weight(&self, z: &RootOfUnity) -> f64 {
        self.atoms.get(z).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass Σ weights.
    pub fn mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    /// Total variation norm Σ |weights|.
    pub fn norm(&self) -> f64 {
        self.atoms.values().map(|w| w.abs()).sum()
    }

    /// True when some weight is negative.
    pub fn is_signed(&self) -> bool {
        self.atoms.values().any(|&w| w < 0.0)
    }

    pub fn min_weight(&self) -> Option<(RootOfUnity, f64)> {
        self.iter().min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Least common multiple of the atom orders; 1 for the zero measure.
    pub fn level(&self) -> Result<u64> {
        self.atoms.keys().try_fold(1u64, |acc, z| arith::lcm(acc, z.order()))
    }

    /// ν(Z_m^*), the mass on the primitive m-th roots.
    pub fn mass_of_order(&self, m: u64) -> f64 {
        self.iter().filter(|(z, _)| z.order() == m).map(|(_, w)| w).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_atoms(self.iter().map(|(z, w)| (z, c * w)))
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Self {
        let mut out = self.clone();
        for (z, w) in other.iter() {
            out.add_atom(z, c * w);
        }
        out
    }

    /// Drops atoms with `|weight| <= PRUNE_THRESHOLD`.
    pub fn cleanup(&mut self) {
        self.atoms.retain(|_, w| w.abs() > PRUNE_THRESHOLD);
    }

    /// Largest atom-wise difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.difference(other)
            .into_iter()
            .fold(0.0, |acc, (_, d)| acc.max(d.abs()))
    }

    /// Total variation norm of `self − other`.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        self.difference(other).into_iter().map(|(_, d)| d.abs()).sum()
    }

    fn difference(&self, other: &Self) -> Vec<(RootOfUnity, f64)> {
        let mut keys: Vec<RootOfUnity> = self.atoms.keys().chain(other.atoms.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|z| (z, self.weight(&z) - other.weight(&z)))
            .collect()
    }

    fn with_tag(mut self, beta: f64) -> Self {
        self.beta_tag = Some(beta);
        self
    }

    /// Weights as a dense vector indexed by `j` for the atom `j/level`.
    fn to_dense(&self, level: u64) -> Result<Vec<f64>> {
        let mut v = vec![0.0; level as usize];
        for (z, w) in self.iter() {
            let j = z
                .index_at_level(level)
                .ok_or_else(|| Error::Precondition(format!("atom {z} has order not dividing level {level}")))?;
            v[j as usize] += w;
        }
        Ok(v)
    }

    fn from_dense(v: &[f64]) -> Self {
        let level = v.len() as u64;
        Self::from_atoms(
            v.iter()
                .enumerate()
                .map(|(j, &w)| (RootOfUnity::new(j as i64, level).expect("level >= 1"), w)),
        )
    }
}

/// Pushforward ω_{d*}ν along the covering `z ↦ z^d`.
pub fn pushforward(nu: &AtomicMeasure, d: u64) -> Result<AtomicMeasure> {
    if d == 0 {
        return Err(out_of_range("d", "pushforward needs d >= 1"));
    }
    Ok(AtomicMeasure::from_atoms(nu.iter().map(|(z, w)| (z.pow_u(d), w))))
}

/// ε_n, the uniform probability measure on the primitive n-th roots of unity.
pub fn epsilon(n: u64) -> Result<AtomicMeasure> {
    let phi = totient(n)?;
    let w = 1.0 / phi as f64;
    Ok(AtomicMeasure::from_atoms(
        (0..n)
            .filter(|&j| gcd(j, n) == 1)
            .map(|j| (RootOfUnity::new(j as i64, n).expect("n >= 1"), w)),
    ))
}

/// A_{β,n}ν = Σ_{d|n} μ(d) d^{−β} ω_{d*}ν.
pub fn apply_a(nu: &AtomicMeasure, n: u64, beta: f64) -> Result<AtomicMeasure> {
    apply_a_set(nu, &PrimeSet::dividing(n)?, beta)
}

/// A_{β,F}ν = ∏_{p∈F} (1 − p^{−β} ω_{p*}) ν.
pub fn apply_a_set(nu: &AtomicMeasure, set: &PrimeSet, beta: f64) -> Result<AtomicMeasure> {
    check_beta(beta)?;
    let mut out = AtomicMeasure::zero();
    for (d, mu) in squarefree_products(set)? {
        let c = mu as f64 * (d as f64).powf(-beta);
        for (z, w) in nu.iter() {
            out.add_atom(z.pow_u(d), c * w);
        }
    }
    Ok(out)
}

/// Applies `1 − p^{−β} ω_{p*}` to a dense vector on Z_level.
fn apply_prime_dense(v: &[f64], p: u64, beta: f64) -> Vec<f64> {
    let level = v.len() as u64;
    let c = (p as f64).powf(-beta);
    let mut out = v.to_vec();
    for (j, &w) in v.iter().enumerate() {
        if w != 0.0 {
            let target = (j as u64 * p % level) as usize;
            out[target] -= c * w;
        }
    }
    out
}

/// Solves `A_{β,n} μ = ν` for μ supported on Z_level.
///
/// The operator restricted to measures on Z_level is a `level × level`
/// matrix; it is solved directly and the residual is checked.
pub fn apply_a_inv(nu: &AtomicMeasure, n: u64, beta: f64, level: u64) -> Result<AtomicMeasure> {
    check_beta(beta)?;
    if beta == 0.0 {
        return Err(out_of_range("beta", "A_{0,n} is not invertible"));
    }
    if level == 0 {
        return Err(out_of_range("level", "level must be >= 1"));
    }
    let rhs = DVector::from_vec(nu.to_dense(level)?);
    let size = level as usize;
    let mut matrix = DMatrix::<f64>::zeros(size, size);
    for (d, mu) in squarefree_products(&PrimeSet::dividing(n)?)? {
        let c = mu as f64 * (d as f64).powf(-beta);
        for j in 0..size {
            let target = (j as u64 * d % level) as usize;
            matrix[(target, j)] += c;
        }
    }
    let solution = matrix
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical(format!("A_(beta,{n}) singular on level {level}")))?;
    let residual = (&matrix * &solution - &rhs).amax();
    if !(residual <= INVERSE_RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "A_(beta,{n}) inverse residual {residual:e} exceeds {INVERSE_RESIDUAL_TOL:e}"
        )));
    }
    Ok(AtomicMeasure::from_dense(solution.as_slice()).with_tag(beta))
}

/// Fourier coefficient ∫ z^k dν, with the phase reduced exactly before the
/// trigonometric call.
pub fn fourier(nu: &AtomicMeasure, k: i64) -> Complex64 {
    nu.iter()
        .map(|(z, w)| {
            let r = (z.num() as i128 * k as i128).rem_euclid(z.den() as i128) as u64;
            unit_phase(r, z.den()) * w
        })
        .sum()
}

/// Outcome of [`check_subconformal`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubconformalVerdict {
    /// Every checked `A_{β,F}ν` is non-negative. This is a certificate for
    /// the checked prime window only.
    Pass { primes: Vec<u64>, subsets_checked: usize },
    /// `A_{β,F}ν` has a negative atom, which disproves subconformality.
    Fail(SubconformalWitness),
}

impl SubconformalVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, SubconformalVerdict::Pass { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubconformalWitness {
    pub primes: Vec<u64>,
    pub atom: RootOfUnity,
    pub value: f64,
}

/// Checks `A_{β,F}ν ≥ −tol` for every subset `F` of the primes dividing the
/// support level together with all primes up to `extra_prime_bound`.
///
/// Subsets are visited in increasing bitmask order over the sorted primes;
/// the first failing subset is reported with its most negative atom.
pub fn check_subconformal(
    nu: &AtomicMeasure,
    beta: f64,
    extra_prime_bound: u64,
    tol: f64,
) -> Result<SubconformalVerdict> {
    check_beta(beta)?;
    if let Some((z, w)) = nu.min_weight().filter(|&(_, w)| w < 0.0) {
        return Err(Error::Precondition(format!(
            "subconformality check needs a positive measure, atom {z} has weight {w}"
        )));
    }
    let level = nu.level()?;
    let mut primes: Vec<u64> = factorize(level)?.primes().collect();
    primes.extend(arith::primes_up_to(extra_prime_bound));
    primes.sort_unstable();
    primes.dedup();
    if primes.len() > MAX_CHECK_PRIMES {
        return Err(out_of_range(
            "prime window",
            format!("{} primes exceeds {MAX_CHECK_PRIMES}", primes.len()),
        ));
    }

    let base = nu.to_dense(level)?;
    let subsets = 1usize << primes.len();
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(subsets);
    images.push(base);
    for mask in 0..subsets {
        if mask > 0 {
            let top = usize::BITS - 1 - mask.leading_zeros();
            let parent = mask & !(1 << top);
            let image = apply_prime_dense(&images[parent], primes[top as usize], beta);
            images.push(image);
        }
        let image = &images[mask];
        let (j, &value) = image
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("level >= 1");
        if value < -tol {
            let chosen = (0..primes.len())
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| primes[i])
                .collect();
            return Ok(SubconformalVerdict::Fail(SubconformalWitness {
                primes: chosen,
                atom: RootOfUnity::new(j as i64, level)?,
                value,
            }));
        }
    }
    Ok(SubconformalVerdict::Pass {
        primes,
        subsets_checked: subsets,
    })
}

/// ν|_k, the atoms whose order divides `k`.
pub fn restrict(nu: &AtomicMeasure, k: u64) -> Result<AtomicMeasure> {
    if k == 0 {
        return Err(out_of_range("k", "restriction level must be >= 1"));
    }
    Ok(AtomicMeasure::from_atoms(nu.iter().filter(|(z, _)| k % z.order() == 0)))
}

/// The extremal measure ν_{β,n}: weight `n^{−β} φ_β(ord z)/φ(ord z)` at each
/// `z ∈ Z_n`.
pub fn extremal_measure(n: u64, beta: f64) -> Result<AtomicMeasure> {
    check_beta(beta)?;
    let f = factorize(n)?;
    let scale = (n as f64).powf(-beta);
    let per_order: BTreeMap<u64, f64> = divisors_of(&f)
        .into_iter()
        .map(|d| {
            let fd = factorize(d).expect("divisor in range");
            let phi = totient(d).expect("divisor in range") as f64;
            (d, scale * totient_beta_of(&fd, beta) / phi)
        })
        .collect();
    Ok(AtomicMeasure::from_atoms((0..n).map(|j| {
        let z = RootOfUnity::new(j as i64, n).expect("n >= 1");
        (z, per_order[&z.order()])
    }))
    .with_tag(beta))
}

/// Coefficients of an atomic measure in terms of the extremal measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub beta: f64,
    /// Nonzero λ_n keyed by n.
    pub coefficients: BTreeMap<u64, f64>,
    /// Σ λ_n.
    pub total: f64,
    /// Largest atom-wise deviation of Σ λ_n ν_{β,n} from the input.
    pub reconstruction_error: f64,
}

/// Writes a positive atomic measure as Σ λ_n ν_{β,n} with
/// `λ_n = n^β Σ_d μ(d) ν(Z_{nd}^*) / φ_β(nd)`.
///
/// Fails with [`Error::NotSubconformal`] when some `λ_n < −tol`.
pub fn decompose(nu: &AtomicMeasure, beta: f64, tol: f64) -> Result<Decomposition> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(out_of_range(
            "beta",
            format!("decomposition needs beta in (0, 1], got {beta}"),
        ));
    }
    if let Some((z, w)) = nu.min_weight().filter(|&(_, w)| w < 0.0) {
        return Err(Error::Precondition(format!(
            "decomposition needs a positive measure, atom {z} has weight {w}"
        )));
    }
    let level = nu.level()?;
    let level_divisors = arith::divisors(level)?;
    let mass_at: BTreeMap<u64, f64> = level_divisors.iter().map(|&m| (m, nu.mass_of_order(m))).collect();
    let phi_beta: BTreeMap<u64, f64> = level_divisors
        .iter()
        .map(|&m| (m, totient_beta_of(&factorize(m).expect("divisor in range"), beta)))
        .collect();

    let mut coefficients = BTreeMap::new();
    let mut worst: Option<(u64, f64)> = None;
    for &n in &level_divisors {
        let mut acc = 0.0;
        for d in arith::divisors(level / n)? {
            let mu = mobius_of(&factorize(d)?);
            if mu != 0 {
                let nd = n * d;
                acc += mu as f64 * mass_at[&nd] / phi_beta[&nd];
            }
        }
        let lambda = (n as f64).powf(beta) * acc;
        if lambda < -tol && worst.map_or(true, |(_, v)| lambda < v) {
            worst = Some((n, lambda));
        }
        if lambda.abs() > PRUNE_THRESHOLD {
            coefficients.insert(n, lambda);
        }
    }
    if let Some((n, value)) = worst {
        return Err(Error::NotSubconformal { n, value });
    }

    let mut rebuilt = AtomicMeasure::zero();
    for (&n, &lambda) in &coefficients {
        rebuilt = rebuilt.add_scaled(&extremal_measure(n, beta)?, lambda);
    }
    Ok(Decomposition {
        beta,
        total: coefficients.values().sum(),
        reconstruction_error: rebuilt.max_abs_diff(nu),
        coefficients,
    })
}

/// Truncated image under `T_β = ζ(β)^{-1} Σ_c c^{−β} ω_{c*}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTransfer {
    pub measure: AtomicMeasure,
    /// `ζ(β)^{-1} Σ_{c > C} c^{−β}`, computed as `1 − partial/ζ(β)`.
    pub tail_mass: f64,
    /// Upper bound on the total variation truncation error:
    /// `‖ν‖ · C^{1−β} / ((β − 1) ζ(β))`.
    pub tail_bound: f64,
}

/// `Σ_{c≤C} c^{−β}` split by residue of `c` modulo `q`, each summed from the
/// smallest term upwards.
pub(crate) fn residue_power_sums(beta: f64, truncation: u64, q: u64) -> Vec<f64> {
    let mut sums = vec![0.0; q as usize];
    for c in (1..=truncation).rev() {
        sums[(c % q) as usize] += (c as f64).powf(-beta);
    }
    sums
}

pub(crate) fn check_low_temperature(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 1.0 {
        Ok(())
    } else {
        Err(out_of_range("beta", format!("series needs beta > 1, got {beta}")))
    }
}

/// `ζ(β)^{-1} Σ_{c > C} c^{−β} ≤ C^{1−β} / ((β − 1) ζ(β))`.
pub(crate) fn zeta_tail_bound(beta: f64, truncation: u64, zeta: f64) -> f64 {
    (truncation as f64).powf(1.0 - beta) / ((beta - 1.0) * zeta)
}

/// Partial sum of the transfer series through `c ≤ truncation`, normalized by
/// the full ζ(β).
pub fn t_beta(nu: &AtomicMeasure, beta: f64, truncation: u64) -> Result<TruncatedTransfer> {
    check_low_temperature(beta)?;
    if truncation == 0 {
        return Err(out_of_range("truncation", "must be >= 1"));
    }
    let zeta = arith::zeta(beta)?;
    let mut by_order: BTreeMap<u64, Vec<(RootOfUnity, f64)>> = BTreeMap::new();
    for (z, w) in nu.iter() {
        by_order.entry(z.order()).or_default().push((z, w));
    }
    let mut out = AtomicMeasure::zero();
    for (&q, atoms) in &by_order {
        let sums = residue_power_sums(beta, truncation, q);
        for &(z, w) in atoms {
            for (r, s) in sums.iter().enumerate() {
                out.add_atom(z.pow_u(r as u64), w * s / zeta);
            }
        }
    }
    let partial: f64 = (1..=truncation).rev().map(|c| (c as f64).powf(-beta)).sum();
    Ok(TruncatedTransfer {
        measure: out.with_tag(beta),
        tail_mass: 1.0 - partial / zeta,
        tail_bound: nu.norm() * zeta_tail_bound(beta, truncation, zeta),
    })
}

/// `T_β δ_z = (n^{−β}/ζ(β)) Σ_{k=1}^{n} ζ(β, k/n) δ_{z^k}` for `z` of order `n`,
/// with no truncation.
pub fn t_beta_exact_root(z: RootOfUnity, beta: f64) -> Result<AtomicMeasure> {
    check_low_temperature(beta)?;
    let n = z.order();
    let zeta = arith::zeta(beta)?;
    let scale = (n as f64).powf(-beta) / zeta;
    let mut out = AtomicMeasure::zero();
    for k in 1..=n {
        let h = arith::hurwitz_zeta(beta, k as f64 / n as f64)?;
        out.add_atom(z.pow_u(k), scale * h);
    }
    Ok(out.with_tag(beta))
}

impl Serialize for AtomicMeasure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureDocument::from_measure(self)
            .map_err(serde::ser::Error::custom)?
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AtomicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        MeasureDocument::deserialize(deserializer)?
            .to_measure()
            .map_err(serde::de::Error::custom)
    }
}

/// On-disk form of a measure: `{"level", "signed", "atoms": [{num, den, weight}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDocument {
    pub level: u64,
    pub signed: bool,
    pub atoms: Vec<AtomRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub num: u64,
    pub den: u64,
    pub weight: f64,
}

impl MeasureDocument {
    /// Serializes `nu` with its own level.
    pub fn from_measure(nu: &AtomicMeasure) -> Result<Self> {
        Self::with_level(nu, nu.level()?)
    }

    /// Serializes `nu` at a declared level, which must be a multiple of
    /// every atom order.
    pub fn with_level(nu: &AtomicMeasure, level: u64) -> Result<Self> {
        if let Some((z, _)) = nu.iter().find(|(z, _)| level == 0 || level % z.order() != 0) {
            return Err(Error::Precondition(format!(
                "atom {z} has order not dividing level {level}"
            )));
        }
        Ok(Self {
            level,
            signed: nu.is_signed(),
            atoms: nu
                .iter()
                .map(|(z, w)| AtomRecord {
                    num: z.num(),
                    den: z.den(),
                    weight: w,
                })
                .collect(),
        })
    }

    /// Rebuilds the measure, validating fractions, weights and the level.
    pub fn to_measure(&self) -> Result<AtomicMeasure> {
        if self.level == 0 {
            return Err(Error::Parse("measure level must be >= 1".into()));
        }
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            if a.den == 0 || a.num >= a.den || gcd(a.num, a.den) != 1 {
                return Err(Error::Parse(format!(
                    "atom {}/{} is not a reduced fraction in [0, 1)",
                    a.num, a.den
                )));
            }
            if !a.weight.is_finite() {
                return Err(Error::Parse(format!("atom {}/{} has non-finite weight", a.num, a.den)));
            }
            if self.level % a.den != 0 {
                return Err(Error::Parse(format!(
                    "atom {}/{} has order not dividing level {}",
                    a.num, a.den, self.level
                )));
            }
            if !self.signed && a.weight < 0.0 {
                return Err(Error::Parse(format!(
                    "negative weight at {}/{} in an unsigned measure",
                    a.num, a.den
                )));
            }
            atoms.push((RootOfUnity::new(a.num as i64, a.den)?, a.weight));
        }
        Ok(AtomicMeasure::from_atoms(atoms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn root(num: i64, den: u64) -> RootOfUnity {
        RootOfUnity::new(num, den).unwrap()
    }

    #[test]
    fn roots_reduce() {
        assert_eq!(root(2, 4), root(1, 2));
        assert_eq!(root(-1, 4), root(3, 4));
        assert_eq!(root(6, 6), RootOfUnity::one());
        assert_eq!(root(1, 6).pow(3), root(1, 2));
        assert_eq!("3/12".parse::<RootOfUnity>().unwrap(), root(1, 4));
        assert!(RootOfUnity::new(1, 0).is_err());
        assert!(root(1, 3) < root(1, 2));
    }

    #[test]
    fn epsilon_pushforward_lowers_order() {
        let pushed = pushforward(&epsilon(12).unwrap(), 8).unwrap();
        assert!(pushed.max_abs_diff(&epsilon(3).unwrap()) < 1e-15);
        let half = AtomicMeasure::dirac(root(1, 2));
        assert_eq!(pushforward(&half, 2).unwrap(), AtomicMeasure::dirac(RootOfUnity::one()));
    }

    #[test]
    fn pushforward_preserves_signed_mass() {
        let nu = AtomicMeasure::from_atoms([(root(1, 6), 0.7), (root(2, 5), -1.3), (root(3, 4), 0.25)]);
        for d in 1..20 {
            assert_abs_diff_eq!(pushforward(&nu, d).unwrap().mass(), nu.mass(), epsilon = 1e-15);
        }
    }

    #[test]
    fn epsilon_support() {
        assert_eq!(epsilon(1).unwrap(), AtomicMeasure::dirac(RootOfUnity::one()));
        let e4 = epsilon(4).unwrap();
        assert_eq!(e4, AtomicMeasure::from_atoms([(root(1, 4), 0.5), (root(3, 4), 0.5)]));
        for n in 1..=200 {
            let e = epsilon(n).unwrap();
            assert_eq!(e.len() as u64, totient(n).unwrap());
            assert_abs_diff_eq!(e.mass(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn apply_a_examples() {
        let nu = AtomicMeasure::from_atoms([(root(1, 3), 0.4), (root(1, 5), 0.6)]);
        assert_eq!(apply_a(&nu, 1, 0.7).unwrap(), nu);
        let half = AtomicMeasure::dirac(root(1, 2));
        let image = apply_a(&half, 2, 1.0).unwrap();
        let expected = AtomicMeasure::from_atoms([(root(1, 2), 1.0), (RootOfUnity::one(), -0.5)]);
        assert!(image.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn apply_a_inverse_round_trip() {
        let nu = AtomicMeasure::from_atoms([(root(1, 12), 0.3), (root(5, 6), 0.2), (root(1, 4), 0.5)]);
        for n in [2, 5, 6, 12, 30] {
            let inv = apply_a_inv(&nu, n, 0.6, 12).unwrap();
            let back = apply_a(&inv, n, 0.6).unwrap();
            assert!(back.max_abs_diff(&nu) < 1e-10, "n = {n}");
        }
        assert!(apply_a_inv(&nu, 2, 0.0, 12).is_err());
        assert!(apply_a_inv(&nu, 2, 0.5, 8).is_err());
    }

    #[test]
    fn fourier_of_uniform() {
        let u = AtomicMeasure::uniform(6).unwrap();
        for k in -13..=13 {
            let c = fourier(&u, k);
            let expected = if k % 6 == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(c.re, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-12);
        }
        let nu = AtomicMeasure::from_atoms([(root(1, 7), 0.25), (root(2, 9), 0.5)]);
        assert_abs_diff_eq!(fourier(&nu, 0).re, nu.mass(), epsilon = 1e-15);
    }

    #[test]
    fn extremal_small_cases() {
        for beta in [0.0, 0.4, 1.0, 2.0] {
            assert_eq!(
                extremal_measure(1, beta).unwrap().atoms(),
                AtomicMeasure::dirac(RootOfUnity::one()).atoms()
            );
        }
        let uniform = AtomicMeasure::uniform(6).unwrap();
        assert!(extremal_measure(6, 1.0).unwrap().max_abs_diff(&uniform) < 1e-15);
        let beta = 0.35;
        let expected = AtomicMeasure::from_atoms([
            (RootOfUnity::one(), 2f64.powf(-beta)),
            (root(1, 2), 1.0 - 2f64.powf(-beta)),
        ]);
        assert!(extremal_measure(2, beta).unwrap().max_abs_diff(&expected) < 1e-15);
        for n in 1..=12 {
            let zero = extremal_measure(n, 0.0).unwrap();
            assert_eq!(zero.atoms(), AtomicMeasure::dirac(RootOfUnity::one()).atoms());
        }
    }

    #[test]
    fn restrict_filters_by_order() {
        let nu = AtomicMeasure::from_atoms([
            (RootOfUnity::one(), 0.1),
            (root(1, 2), 0.2),
            (root(1, 3), 0.3),
            (root(1, 6), 0.4),
        ]);
        let r = restrict(&nu, 2).unwrap();
        assert_eq!(
            r,
            AtomicMeasure::from_atoms([(RootOfUnity::one(), 0.1), (root(1, 2), 0.2)])
        );
        assert_eq!(restrict(&nu, nu.level().unwrap()).unwrap(), nu);
    }

    #[test]
    fn checker_examples() {
        let half = AtomicMeasure::dirac(root(1, 2));
        match check_subconformal(&half, 1.0, 30, 1e-9).unwrap() {
            SubconformalVerdict::Fail(w) => {
                assert_eq!(w.primes, vec![2]);
                assert_eq!(w.atom, RootOfUnity::one());
                assert_abs_diff_eq!(w.value, -0.5, epsilon = 1e-12);
            }
            other => panic!("expected failure, got {other:?}"),
        }
        let one = AtomicMeasure::dirac(RootOfUnity::one());
        for beta in [0.0, 0.5, 1.0, 3.0] {
            assert!(check_subconformal(&one, beta, 30, 1e-12).unwrap().passed());
        }
        let signed = AtomicMeasure::from_atoms([(root(1, 2), -1.0)]);
        assert!(check_subconformal(&signed, 1.0, 5, 1e-9).is_err());
    }

    #[test]
    fn restriction_keeps_subconformality() {
        let nu = extremal_measure(12, 0.6)
            .unwrap()
            .scaled(0.5)
            .add_scaled(&extremal_measure(10, 0.6).unwrap(), 0.5);
        assert!(check_subconformal(&nu, 0.6, 13, 1e-9).unwrap().passed());
        for k in [1, 2, 3, 4, 5, 6, 10, 12] {
            let r = restrict(&nu, k).unwrap();
            assert!(check_subconformal(&r, 0.6, 13, 1e-9).unwrap().passed(), "k = {k}");
        }
    }

    #[test]
    fn decompose_uniform_on_four() {
        let d = decompose(&AtomicMeasure::uniform(4).unwrap(), 1.0, 1e-12).unwrap();
        assert_eq!(d.coefficients.len(), 1);
        assert_abs_diff_eq!(d.coefficients[&4], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decompose_rejects_non_subconformal() {
        let quarter = AtomicMeasure::dirac(root(1, 4));
        assert!(matches!(
            decompose(&quarter, 0.5, 1e-9),
            Err(Error::NotSubconformal { n: 2, .. })
        ));
        assert!(decompose(&quarter, 1.5, 1e-9).is_err());
    }

    #[test]
    fn t_beta_on_one_is_one() {
        let t = t_beta(&AtomicMeasure::dirac(RootOfUnity::one()), 2.0, 1000).unwrap();
        assert_eq!(t.measure.len(), 1);
        assert_abs_diff_eq!(
            t.measure.weight(&RootOfUnity::one()) + t.tail_mass,
            1.0,
            epsilon = 1e-12
        );
        assert!(t.tail_mass <= t.tail_bound);
        assert!(t_beta(&AtomicMeasure::zero(), 1.0, 10).is_err());
    }

    #[test]
    fn t_beta_mass_bookkeeping() {
        let nu = AtomicMeasure::from_atoms([(root(1, 5), 0.3), (root(1, 6), 0.9)]);
        let t = t_beta(&nu, 1.7, 5000).unwrap();
        assert_abs_diff_eq!(t.measure.mass() + t.tail_mass * nu.mass(), nu.mass(), epsilon = 1e-12);
    }

    #[test]
    fn exact_root_transfer() {
        let one = t_beta_exact_root(RootOfUnity::one(), 2.0).unwrap();
        assert!(one.max_abs_diff(&AtomicMeasure::dirac(RootOfUnity::one())) < 1e-12);
        let fifth = t_beta_exact_root(root(1, 5), 2.0).unwrap();
        assert_abs_diff_eq!(fifth.mass(), 1.0, epsilon = 1e-10);
        // z^k with k = 1..5: larger weight for smaller k, i.e. closer phase distance
        let weights: Vec<f64> = (1..=5).map(|k| fifth.weight(&root(1, 5).pow(k))).collect();
        assert!(weights.iter().all(|&w| w > 0.0));
        assert!(weights.windows(2).all(|w| w[0] > w[1]), "{weights:?}");
    }

    #[test]
    fn document_rejects_bad_atoms() {
        let doc = MeasureDocument {
            level: 4,
            signed: false,
            atoms: vec![AtomRecord {
                num: 2,
                den: 4,
                weight: 1.0,
            }],
        };
        assert!(doc.to_measure().is_err());
        let doc = MeasureDocument {
            level: 4,
            signed: false,
            atoms: vec![AtomRecord {
                num: 1,
                den: 3,
                weight: 1.0,
            }],
        };
        assert!(doc.to_measure().is_err());
        let doc = MeasureDocument {
            level: 4,
            signed: false,
            atoms: vec![AtomRecord {
                num: 1,
                den: 2,
                weight: -1.0,
            }],
        };
        assert!(doc.to_measure().is_err());
    }
}
