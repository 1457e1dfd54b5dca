//! Integer and real arithmetic functions: factorization, Möbius and totient
//! functions, divisors, smooth numbers, partial Euler products and the
//! Hurwitz zeta function.
//!
//! Integers are `u64` with checked overflow. Real values are `f64`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Primes below this bound are tabulated once and shared by all callers.
pub const SIEVE_LIMIT: u64 = 1 << 21;

/// Largest input accepted by [`factorize`]: trial division by the tabulated
/// primes is complete below `SIEVE_LIMIT^2`.
pub const MAX_FACTOR_INPUT: u64 = SIEVE_LIMIT * SIEVE_LIMIT;

/// Default absolute tolerance for [`hurwitz_zeta`].
pub const HURWITZ_DEFAULT_TOL: f64 = 1e-12;

/// Minimum number of directly summed terms in the Hurwitz zeta evaluation.
const HURWITZ_MIN_TERMS: u64 = 50;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn prime_table() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| sieve(SIEVE_LIMIT))
}

/// All primes `<= limit` by the sieve of Eratosthenes.
pub fn sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let len = limit as usize + 1;
    let mut composite = vec![false; len];
    let mut primes = Vec::new();
    for i in 2..len {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j < len {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// All primes `<= limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit <= SIEVE_LIMIT {
        let table = prime_table();
        let end = table.partition_point(|&p| p <= limit);
        table[..end].to_vec()
    } else {
        sieve(limit)
    }
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Result<Vec<u64>> {
    let table = prime_table();
    if count > table.len() {
        return Err(out_of_range(
            "prime count",
            format!("{count} exceeds tabulated {}", table.len()),
        ));
    }
    Ok(table[..count].to_vec())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin test, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b)).checked_mul(b).ok_or(Error::Overflow("lcm"))
}

/// `gcd(n, |k|)` for a signed `k`, with `gcd(n, 0) = n`.
pub fn gcd_signed(n: u64, k: i64) -> u64 {
    gcd(n, k.unsigned_abs())
}

/// Prime factorization `value = ∏ p^e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Distinct prime divisors.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    /// Re-multiplies the factors; `None` on overflow.
    pub fn product(&self) -> Option<u64> {
        self.factors
            .iter()
            .try_fold(1u64, |acc, &(p, e)| p.checked_pow(e).and_then(|pe| acc.checked_mul(pe)))
    }
}

/// Factorizes `n` by trial division over the tabulated primes.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(out_of_range("factorize input", "0 has no factorization"));
    }
    if n > MAX_FACTOR_INPUT {
        return Err(out_of_range(
            "factorize input",
            format!("{n} exceeds {MAX_FACTOR_INPUT}"),
        ));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    for &p in prime_table() {
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { value: n, factors })
}

fn factorize_small(n: u64) -> Factorization {
    // Callers pass n >= 1 coming from divisor bookkeeping well inside range.
    factorize(n).expect("factorize: argument in range")
}

/// Möbius function μ(n).
pub fn mobius(n: u64) -> Result<i32> {
    let f = factorize(n)?;
    Ok(mobius_of(&f))
}

pub fn mobius_of(f: &Factorization) -> i32 {
    if f.is_squarefree() {
        if f.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

/// Euler's totient φ(n), exact.
pub fn totient(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    Ok(f.factors.iter().fold(n, |acc, &(p, _)| acc / p * (p - 1)))
}

/// Generalized totient φ_β(n) = n^β ∏_{p|n} (1 − p^{−β}).
///
/// φ_1 is Euler's function and φ_0 is the indicator of `n = 1`.
pub fn totient_beta(n: u64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let f = factorize(n)?;
    Ok(totient_beta_of(&f, beta))
}

pub(crate) fn totient_beta_of(f: &Factorization, beta: f64) -> f64 {
    f.factors.iter().fold((f.value as f64).powf(beta), |acc, &(p, _)| {
        acc * (1.0 - (p as f64).powf(-beta))
    })
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(out_of_range(
            "beta",
            format!("{beta} is not a finite non-negative real"),
        ))
    }
}

/// Sorted list of the positive divisors of `n`.
pub fn divisors(n: u64) -> Result<Vec<u64>> {
    let f = factorize(n)?;
    Ok(divisors_of(&f))
}

pub fn divisors_of(f: &Factorization) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(p, e) in &f.factors {
        let current = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..current {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// A finite set of primes, sorted and duplicate free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PrimeSet {
    primes: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl PrimeSet {
    /// Builds a set from arbitrary input, rejecting non-primes.
    pub fn new(primes: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut primes: Vec<u64> = primes.into_iter().collect();
        if let Some(&bad) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::Precondition(format!("{bad} is not prime")));
        }
        primes.sort_unstable();
        primes.dedup();
        Ok(Self { primes, label: None })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// 𝒫_n, the first `n` primes.
    pub fn first_n(n: usize) -> Result<Self> {
        Ok(Self {
            primes: first_primes(n)?,
            label: Some(format!("first {n} primes")),
        })
    }

    /// All primes `<= y`.
    pub fn up_to(y: u64) -> Self {
        Self {
            primes: primes_up_to(y),
            label: Some(format!("primes <= {y}")),
        }
    }

    /// The primes dividing `n`.
    pub fn dividing(n: u64) -> Result<Self> {
        Ok(Self {
            primes: factorize(n)?.primes().collect(),
            label: Some(format!("primes dividing {n}")),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    pub fn max(&self) -> Option<u64> {
        self.primes.last().copied()
    }

    /// Set difference `self \ other`.
    pub fn without(&self, other: &PrimeSet) -> PrimeSet {
        PrimeSet {
            primes: self.primes.iter().copied().filter(|&p| !other.contains(p)).collect(),
            label: None,
        }
    }

    /// Product of all members.
    pub fn product(&self) -> Result<u64> {
        self.primes
            .iter()
            .try_fold(1u64, |acc, &p| acc.checked_mul(p))
            .ok_or(Error::Overflow("prime set product"))
    }
}

/// Square-free products `d` of members of `set` paired with μ(d), ascending in `d`.
pub fn squarefree_products(set: &PrimeSet) -> Result<Vec<(u64, i32)>> {
    let mut out = vec![(1u64, 1i32)];
    for &p in set.primes() {
        let current = out.len();
        for i in 0..current {
            let (d, mu) = out[i];
            let dp = d.checked_mul(p).ok_or(Error::Overflow("square-free product"))?;
            out.push((dp, -mu));
        }
    }
    out.sort_unstable_by_key(|&(d, _)| d);
    Ok(out)
}

/// The elements of ℕ^×_F not exceeding `bound`, ascending. Always contains 1.
pub fn smooth_numbers(set: &PrimeSet, bound: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if bound == 0 {
        return out;
    }
    fn walk(primes: &[u64], start: usize, current: u64, bound: u64, out: &mut Vec<u64>) {
        out.push(current);
        for (i, &p) in primes.iter().enumerate().skip(start) {
            match current.checked_mul(p) {
                Some(next) if next <= bound => walk(primes, i, next, bound, out),
                _ => break,
            }
        }
    }
    walk(set.primes(), 0, 1, bound, &mut out);
    out.sort_unstable();
    out
}

/// Partial Euler product ζ_F(β) = ∏_{p∈F} (1 − p^{−β})^{−1}.
pub fn partial_zeta(set: &PrimeSet, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 0.0 && !set.is_empty() {
        return Err(out_of_range(
            "beta",
            "partial zeta diverges at beta = 0 for a nonempty prime set",
        ));
    }
    Ok(set
        .primes()
        .iter()
        .fold(1.0, |acc, &p| acc / (1.0 - (p as f64).powf(-beta))))
}

/// Möbius inversion on the divisor lattice of `n`: returns `f` with
/// `g(m) = Σ_{d|m} f(d)` for every `m | n`.
pub fn mobius_invert(g: &BTreeMap<u64, f64>, n: u64) -> Result<BTreeMap<u64, f64>> {
    let divs = divisors(n)?;
    if let Some(&missing) = divs.iter().find(|d| !g.contains_key(d)) {
        return Err(Error::MissingDivisor(missing));
    }
    let mut f = BTreeMap::new();
    for &m in &divs {
        let mut acc = 0.0;
        for d in divisors_of(&factorize_small(m)) {
            let mu = mobius_of(&factorize_small(d));
            if mu != 0 {
                acc += mu as f64 * g[&(m / d)];
            }
        }
        f.insert(m, acc);
    }
    Ok(f)
}

/// Dirichlet summation over divisors: `g(m) = Σ_{d|m} f(d)` for `m | n`.
pub fn divisor_sum(f: &BTreeMap<u64, f64>, n: u64) -> Result<BTreeMap<u64, f64>> {
    let divs = divisors(n)?;
    if let Some(&missing) = divs.iter().find(|d| !f.contains_key(d)) {
        return Err(Error::MissingDivisor(missing));
    }
    Ok(divs
        .iter()
        .map(|&m| {
            let sum = divisors_of(&factorize_small(m)).iter().map(|d| f[d]).sum();
            (m, sum)
        })
        .collect())
}

// B_{2j} / (2j)! for j = 1..=5.
const BERNOULLI_OVER_FACTORIAL: [f64; 5] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
];

/// Hurwitz zeta ζ(β, a) = Σ_{n≥0} (n + a)^{−β} to the default tolerance.
pub fn hurwitz_zeta(beta: f64, a: f64) -> Result<f64> {
    hurwitz_zeta_tol(beta, a, HURWITZ_DEFAULT_TOL)
}

/// Hurwitz zeta by direct summation of the leading terms followed by an
/// Euler–Maclaurin tail with four Bernoulli corrections.
///
/// The number of direct terms starts at 50 and doubles until the first
/// omitted correction is below `tol`.
pub fn hurwitz_zeta_tol(beta: f64, a: f64, tol: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 1.0) {
        return Err(out_of_range("beta", format!("hurwitz zeta needs beta > 1, got {beta}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(out_of_range("hurwitz parameter a", format!("{a} not in (0, 1]")));
    }
    if !(tol > 0.0) {
        return Err(out_of_range("tolerance", format!("{tol}")));
    }
    let mut terms = HURWITZ_MIN_TERMS;
    loop {
        let x = terms as f64 + a;
        if em_remainder_estimate(beta, x) <= tol || terms >= 1 << 24 {
            break;
        }
        terms *= 2;
    }
    let x = terms as f64 + a;
    let head: f64 = (0..terms).rev().map(|n| (n as f64 + a).powf(-beta)).sum();
    let mut tail = x.powf(1.0 - beta) / (beta - 1.0) + 0.5 * x.powf(-beta);
    // rising factorial β(β+1)…(β+2j−2) times x^{−β−2j+1}
    let mut rising = beta;
    let mut power = x.powf(-beta - 1.0);
    for (j, coeff) in BERNOULLI_OVER_FACTORIAL[..4].iter().enumerate() {
        tail += coeff * rising * power;
        let m = 2.0 * j as f64 + 1.0;
        rising *= (beta + m) * (beta + m + 1.0);
        power /= x * x;
    }
    Ok(head + tail)
}

fn em_remainder_estimate(beta: f64, x: f64) -> f64 {
    let rising: f64 = (0..9).map(|i| beta + i as f64).product();
    (BERNOULLI_OVER_FACTORIAL[4] * rising * x.powf(-beta - 9.0)).abs()
}

/// Riemann zeta ζ(β) for β > 1.
pub fn zeta(beta: f64) -> Result<f64> {
    hurwitz_zeta(beta, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn factorize_small_values() {
        assert_eq!(factorize(1).unwrap().factors, vec![]);
        assert_eq!(factorize(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        assert!(factorize(0).is_err());
        assert!(factorize(MAX_FACTOR_INPUT + 1).is_err());
    }

    #[test]
    fn factorize_two_to_forty_plus_one() {
        let n = (1u64 << 40) + 1;
        let f = factorize(n).unwrap();
        assert_eq!(f.product(), Some(n));
        assert!(f.primes().all(is_prime));
        assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = sieve(10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), primes.binary_search(&n).is_ok(), "n = {n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
    }

    #[test]
    fn mobius_values() {
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(mobius(12).unwrap(), 0);
        // brute force: 30 = 2·3·5, three distinct primes
        let brute = {
            let ps: Vec<u64> = (2..=30).filter(|&p| is_prime(p) && 30 % p == 0).collect();
            let square = (2..=30u64).any(|d| 30 % (d * d) == 0);
            if square {
                0
            } else if ps.len() % 2 == 0 {
                1
            } else {
                -1
            }
        };
        assert_eq!(mobius(30).unwrap(), brute);
        assert_eq!(brute, -1);
    }

    #[test]
    fn totient_values() {
        assert_eq!(totient(12).unwrap(), 4);
        assert_eq!(totient_beta(6, 0.0).unwrap(), 0.0);
        assert_eq!(totient_beta(1, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            totient_beta(6, 2.0).unwrap(),
            36.0 * 0.75 * (8.0 / 9.0),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(totient_beta(6, 2.0).unwrap(), 24.0, epsilon = 1e-12);
        for n in 1..500 {
            assert_abs_diff_eq!(
                totient_beta(n, 1.0).unwrap(),
                totient(n).unwrap() as f64,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn mobius_convolution_gives_totient() {
        for n in 1..=10_000u64 {
            let s: i64 = divisors(n)
                .unwrap()
                .iter()
                .map(|&d| mobius(d).unwrap() as i64 * (n / d) as i64)
                .sum();
            assert_eq!(s, totient(n).unwrap() as i64, "n = {n}");
        }
    }

    #[test]
    fn divisors_values() {
        assert_eq!(divisors(1).unwrap(), vec![1]);
        assert_eq!(divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        for n in [360, 997, 1024, 30_030, 123_456_789] {
            let ds = divisors(n).unwrap();
            assert!(ds.iter().all(|&d| n % d == 0 && d * (n / d) == n));
            let brute = (1..=n).filter(|d| n % d == 0).count();
            if n < 1_000_000 {
                assert_eq!(ds.len(), brute);
            }
        }
    }

    #[test]
    fn smooth_number_lists() {
        let two = PrimeSet::new([2]).unwrap();
        assert_eq!(smooth_numbers(&two, 20), vec![1, 2, 4, 8, 16]);
        let two_three = PrimeSet::new([3, 2]).unwrap();
        let brute: Vec<u64> = (1..=12u64)
            .filter(|&m| {
                let mut r = m;
                for p in [2, 3] {
                    while r % p == 0 {
                        r /= p;
                    }
                }
                r == 1
            })
            .collect();
        assert_eq!(smooth_numbers(&two_three, 12), brute);
        assert_eq!(brute, vec![1, 2, 3, 4, 6, 8, 9, 12]);
        assert_eq!(smooth_numbers(&PrimeSet::empty(), 100), vec![1]);
    }

    #[test]
    fn prime_set_rejects_composites() {
        assert!(PrimeSet::new([2, 4]).is_err());
        assert_eq!(PrimeSet::new([5, 2, 5]).unwrap().primes(), &[2, 5]);
        assert_eq!(PrimeSet::first_n(4).unwrap().primes(), &[2, 3, 5, 7]);
    }

    #[test]
    fn partial_zeta_values() {
        let two = PrimeSet::new([2]).unwrap();
        assert_abs_diff_eq!(partial_zeta(&two, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        let two_three = PrimeSet::new([2, 3]).unwrap();
        assert_abs_diff_eq!(partial_zeta(&two_three, 1.0).unwrap(), 3.0, epsilon = 1e-14);
        assert!(partial_zeta(&two, 0.0).is_err());
        assert_eq!(partial_zeta(&PrimeSet::empty(), 0.0).unwrap(), 1.0);

        // ∏_{p≤100} (1 − p^{-2})^{-1} falls short of ζ(2) by at most the
        // sum over integers with a prime factor > 100, i.e. < Σ_{m>100} m^{-2}.
        let small = PrimeSet::up_to(100);
        let value = partial_zeta(&small, 2.0).unwrap();
        let tail: f64 = (101..2_000_000u64).map(|m| (m as f64).powi(-2)).sum::<f64>() + 1.0 / 2e6;
        let full = PI * PI / 6.0;
        assert!(value <= full && full - value <= tail, "{value} vs {full}");
    }

    #[test]
    fn partial_zeta_reciprocal_is_mobius_sum() {
        let set = PrimeSet::new([2, 3, 5, 7, 11]).unwrap();
        for beta in [0.3, 1.0, 2.5] {
            let direct: f64 = squarefree_products(&set)
                .unwrap()
                .iter()
                .map(|&(d, mu)| mu as f64 * (d as f64).powf(-beta))
                .sum();
            assert_abs_diff_eq!(1.0 / partial_zeta(&set, beta).unwrap(), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn mobius_inversion_examples() {
        let ones: BTreeMap<u64, f64> = divisors(30).unwrap().into_iter().map(|d| (d, 1.0)).collect();
        let f = mobius_invert(&ones, 30).unwrap();
        for (&d, &v) in &f {
            assert_eq!(v, if d == 1 { 1.0 } else { 0.0 });
        }
        let ident: BTreeMap<u64, f64> = divisors(60).unwrap().into_iter().map(|d| (d, d as f64)).collect();
        let f = mobius_invert(&ident, 60).unwrap();
        for (&d, &v) in &f {
            assert_eq!(v, totient(d).unwrap() as f64);
        }
        let mut partial = ones.clone();
        partial.remove(&15);
        assert_eq!(mobius_invert(&partial, 30), Err(Error::MissingDivisor(15)));
    }

    #[test]
    fn hurwitz_special_values() {
        assert_abs_diff_eq!(hurwitz_zeta(2.0, 1.0).unwrap(), PI * PI / 6.0, epsilon = 1e-12);
        assert!(hurwitz_zeta(1.0, 0.5).is_err());
        assert!(hurwitz_zeta(2.0, 0.0).is_err());
    }

    fn direct_hurwitz(beta: f64, a: f64, terms: u64) -> f64 {
        // direct summation with the integral tail ∫_{N}^{∞} (t + a)^{-β} dt plus
        // the half-term endpoint correction; accurate to O(N^{-β-1}).
        let head: f64 = (0..terms).rev().map(|n| (n as f64 + a).powf(-beta)).sum();
        let x = terms as f64 + a;
        head + x.powf(1.0 - beta) / (beta - 1.0) + 0.5 * x.powf(-beta) + beta / 12.0 * x.powf(-beta - 1.0)
    }

    #[test]
    fn hurwitz_multiplication_theorem() {
        let n = 4u64;
        let beta = 2.0;
        let lhs: f64 = (1..=n)
            .map(|k| direct_hurwitz(beta, k as f64 / n as f64, 200_000))
            .sum();
        let rhs = (n as f64).powf(beta) * direct_hurwitz(beta, 1.0, 200_000);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
        let lhs: f64 = (1..=n).map(|k| hurwitz_zeta(beta, k as f64 / n as f64).unwrap()).sum();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
    }

    #[test]
    fn hurwitz_half_identity() {
        for beta in [1.5, 2.0, 3.0] {
            let oracle = direct_hurwitz(beta, 0.5, 400_000);
            let expected = (2f64.powf(beta) - 1.0) * direct_hurwitz(beta, 1.0, 400_000);
            assert_abs_diff_eq!(oracle, expected, epsilon = 1e-9);
            assert_abs_diff_eq!(hurwitz_zeta(beta, 0.5).unwrap(), expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn hurwitz_near_pole_has_unit_residue() {
        for j in 1..=6 {
            let eps = 10f64.powi(-j);
            let beta = 1.0 + eps;
            let value = hurwitz_zeta(beta, 0.25).unwrap();
            // ζ(1+ε, a) = 1/ε − ψ(a) + O(ε), ψ(1/4) = −γ − π/2 − 3 ln 2
            let digamma = -EULER_GAMMA - PI / 2.0 - 3.0 * 2f64.ln();
            assert!((value - 1.0 / (beta - 1.0) + digamma).abs() < 10.0 * eps, "j = {j}");
        }
    }
}
