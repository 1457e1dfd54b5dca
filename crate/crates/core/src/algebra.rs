//! The spanning monomials `V_a U^k V_b^*` of the Toeplitz algebra of ℕ^× ⋉ ℤ
//! and finite linear combinations of them.
//!
//! The span of monomials is closed under products, so a monomial is stored
//! directly as its triple `(a, k, b)` and no rewriting is needed.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, factorize, gcd, mobius_of, squarefree_products, PrimeSet};
use crate::error::{out_of_range, Error, Result};
use crate::measures::RootOfUnity;

/// Coefficients at or below this magnitude are dropped by [`AlgebraElement::cleanup`].
pub const COEFF_PRUNE: f64 = 1e-14;

/// Largest prime set accepted by [`projection_e_f`].
pub const MAX_PROJECTION_PRIMES: usize = 20;

/// `V_a U^k V_b^*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub a: u64,
    pub k: i64,
    pub b: u64,
}

impl Monomial {
    pub fn new(a: u64, k: i64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(out_of_range("monomial", format!("({a},{k},{b}) needs a, b >= 1")));
        }
        Ok(Self { a, k, b })
    }

    /// The unit `V_1 U^0 V_1^*`.
    pub const fn identity() -> Self {
        Self { a: 1, k: 0, b: 1 }
    }

    /// `U^k`.
    pub const fn unitary(k: i64) -> Self {
        Self { a: 1, k, b: 1 }
    }

    /// `V_a`.
    pub const fn isometry(a: u64) -> Self {
        Self { a, k: 0, b: 1 }
    }

    /// `V_a V_a^*`.
    pub const fn range_projection(a: u64) -> Self {
        Self { a, k: 0, b: a }
    }

    pub fn is_diagonal(&self) -> bool {
        self.a == self.b
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.k, self.b)
    }
}

/// Product of monomials: with `x = (a,m,b)`, `y = (c,n,d)`, `g = gcd(b,c)`,
/// `c' = c/g`, `b' = b/g`, the result is `(a c', m c' + n b', b' d)`.
pub fn mono_mul(x: Monomial, y: Monomial) -> Result<Monomial> {
    let g = gcd(x.b, y.a);
    let c1 = y.a / g;
    let b1 = x.b / g;
    let overflow = || Error::Overflow("monomial product");
    let a = x.a.checked_mul(c1).ok_or_else(overflow)?;
    let b = b1.checked_mul(y.b).ok_or_else(overflow)?;
    let c1_signed = i64::try_from(c1).map_err(|_| overflow())?;
    let b1_signed = i64::try_from(b1).map_err(|_| overflow())?;
    let k =
        x.k.checked_mul(c1_signed)
            .and_then(|u| y.k.checked_mul(b1_signed).and_then(|v| u.checked_add(v)))
            .ok_or_else(overflow)?;
    Ok(Monomial { a, k, b })
}

/// `(a,k,b)^* = (b,−k,a)`.
pub fn adjoint(x: Monomial) -> Monomial {
    Monomial {
        a: x.b,
        k: x.k.wrapping_neg(),
        b: x.a,
    }
}

/// The scalar `(a/b)^{−β}` by which σ_{iβ} acts on `x`.
pub fn sigma_ibeta_factor(x: Monomial, beta: f64) -> f64 {
    (x.a as f64 / x.b as f64).powf(-beta)
}

/// A finite linear combination of monomials with complex coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlgebraElement {
    terms: BTreeMap<Monomial, Complex64>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from(Monomial::identity())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Complex64)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Complex64> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.iter().map(|(m, v)| (m, c * v)))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (x, cx) in self.iter() {
            for (y, cy) in other.iter() {
                out.add_term(mono_mul(x, y)?, cx * cy);
            }
        }
        Ok(out)
    }

    /// Antilinear extension of the monomial adjoint.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.iter().map(|(m, c)| (adjoint(m), c.conj())))
    }

    /// Drops coefficients with modulus at or below [`COEFF_PRUNE`].
    pub fn cleanup(&mut self) {
        self.terms.retain(|_, c| c.norm() > COEFF_PRUNE);
    }

    /// True when every coefficient is a real integer, so sums and products
    /// of such elements are computed exactly.
    pub fn is_integral(&self) -> bool {
        self.terms
            .values()
            .all(|c| c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() < 2f64.powi(52))
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let diff = self.clone() - other.clone();
        diff.terms.values().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

impl From<Monomial> for AlgebraElement {
    fn from(m: Monomial) -> Self {
        Self::from_terms([(m, Complex64::new(1.0, 0.0))])
    }
}

impl Add for AlgebraElement {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.iter() {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for AlgebraElement {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Panics on index overflow; use [`AlgebraElement::checked_mul`] for
/// untrusted inputs.
impl Mul for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: Self) -> AlgebraElement {
        self.checked_mul(rhs).expect("monomial product overflow")
    }
}

/// `e_F = ∏_{p∈F} (1 − V_p V_p^*) = Σ_d μ(d) V_d V_d^*` over square-free
/// products `d` of primes in `F`.
pub fn projection_e_f(set: &PrimeSet) -> Result<AlgebraElement> {
    if set.len() > MAX_PROJECTION_PRIMES {
        return Err(out_of_range(
            "prime set",
            format!("{} primes exceeds {MAX_PROJECTION_PRIMES}", set.len()),
        ));
    }
    Ok(AlgebraElement::from_terms(squarefree_products(set)?.into_iter().map(
        |(d, mu)| (Monomial::range_projection(d), Complex64::new(mu as f64, 0.0)),
    )))
}

/// `e_{a,b} = Σ_{d | a/b} μ(d) V_{bd} V_{bd}^*`.
pub fn projection_e_ab(a: u64, b: u64) -> Result<AlgebraElement> {
    if a == 0 || b == 0 || a % b != 0 {
        return Err(Error::Precondition(format!(
            "e_(a,b) needs b | a, got a = {a}, b = {b}"
        )));
    }
    let mut out = AlgebraElement::zero();
    for d in divisors(a / b)? {
        let mu = mobius_of(&factorize(d)?);
        if mu != 0 {
            out.add_term(Monomial::range_projection(b * d), Complex64::new(mu as f64, 0.0));
        }
    }
    Ok(out)
}

/// `α_a(x) = V_a x V_a^*`.
pub fn alpha(a: u64, x: &AlgebraElement) -> Result<AlgebraElement> {
    let v = AlgebraElement::from(Monomial::new(a, 0, 1)?);
    v.checked_mul(x)?.checked_mul(&v.adjoint())
}

/// A point `(z, d)` of the level spaces `𝕋 × Δ_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub z: RootOfUnity,
    pub d: u64,
}

/// `Ψ_{a,b}(z, d) = (z^{d / gcd(a,d)}, gcd(a,d))`, mapping level `b` to level `a`.
pub fn spectra_project(p: SpectrumPoint, a: u64, b: u64) -> Result<SpectrumPoint> {
    if a == 0 || b == 0 || b % a != 0 {
        return Err(Error::Precondition(format!(
            "projection needs a | b, got a = {a}, b = {b}"
        )));
    }
    if p.d == 0 || b % p.d != 0 {
        return Err(Error::Precondition(format!(
            "divisor label {} does not divide {b}",
            p.d
        )));
    }
    let g = gcd(a, p.d);
    Ok(SpectrumPoint {
        z: p.z.pow_u(p.d / g),
        d: g,
    })
}

/// One term of a serialized element: `{"a", "k", "b", "re", "im"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub a: u64,
    pub k: i64,
    pub b: u64,
    pub re: f64,
    pub im: f64,
}

impl AlgebraElement {
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.iter()
            .map(|(m, c)| TermRecord {
                a: m.a,
                k: m.k,
                b: m.b,
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn from_records(records: &[TermRecord]) -> Result<Self> {
        let mut out = Self::zero();
        for r in records {
            if !r.re.is_finite() || !r.im.is_finite() {
                return Err(Error::Parse(format!(
                    "non-finite coefficient on ({},{},{})",
                    r.a, r.k, r.b
                )));
            }
            out.add_term(Monomial::new(r.a, r.k, r.b)?, Complex64::new(r.re, r.im));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::lcm;
    use proptest::prelude::*;

    fn m(a: u64, k: i64, b: u64) -> Monomial {
        Monomial::new(a, k, b).unwrap()
    }

    fn int(c: i64) -> Complex64 {
        Complex64::new(c as f64, 0.0)
    }

    #[test]
    fn product_examples() {
        assert_eq!(mono_mul(m(2, 1, 3), m(3, 1, 5)).unwrap(), m(2, 2, 5));
        for (a, mm, b, n) in [(2, 3, 5, -1), (7, 0, 4, 9), (1, -2, 3, 3)] {
            assert_eq!(
                mono_mul(m(a, mm, 1), m(b, n, 1)).unwrap(),
                m(a * b, b as i64 * mm + n, 1)
            );
        }
        assert!(mono_mul(m(u64::MAX, 0, 1), m(2, 0, 1)).is_err());
    }

    #[test]
    fn unitary_commutes_past_isometry() {
        for a in 1..=100 {
            assert_eq!(
                mono_mul(Monomial::unitary(1), Monomial::isometry(a)).unwrap(),
                m(a, a as i64, 1)
            );
            assert_eq!(
                mono_mul(Monomial::isometry(a), Monomial::unitary(1)).unwrap(),
                m(a, 1, 1)
            );
            // V_a^* V_a = 1
            assert_eq!(
                mono_mul(adjoint(Monomial::isometry(a)), Monomial::isometry(a)).unwrap(),
                Monomial::identity()
            );
        }
    }

    #[test]
    fn coprime_isometries_doubly_commute() {
        // V_a^* V_b = V_b V_a^* for coprime a, b
        for a in 1..=30u64 {
            for b in 1..=30u64 {
                if gcd(a, b) == 1 {
                    let lhs = mono_mul(adjoint(Monomial::isometry(a)), Monomial::isometry(b)).unwrap();
                    let rhs = mono_mul(Monomial::isometry(b), adjoint(Monomial::isometry(a))).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn diagonal_product_rule() {
        for b in 1..=50u64 {
            for c in 1..=50u64 {
                for (mm, n) in [(0i64, 0i64), (1, 2), (-3, 5)] {
                    let l = lcm(b, c).unwrap();
                    let k = mm * (l / b) as i64 + n * (l / c) as i64;
                    assert_eq!(mono_mul(m(b, mm, b), m(c, n, c)).unwrap(), m(l, k, l));
                }
            }
        }
    }

    #[test]
    fn sigma_factor_examples() {
        assert_eq!(sigma_ibeta_factor(m(4, 3, 4), 2.5), 1.0);
        assert_eq!(sigma_ibeta_factor(m(2, 7, 1), 1.0), 0.5);
        let x = m(6, -2, 15);
        assert!((sigma_ibeta_factor(x, 1.3) * sigma_ibeta_factor(adjoint(x), 1.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn e_f_examples() {
        assert_eq!(projection_e_f(&PrimeSet::empty()).unwrap(), AlgebraElement::one());
        let e2 = projection_e_f(&PrimeSet::new(vec![2]).unwrap()).unwrap();
        let expected = AlgebraElement::one() - AlgebraElement::from(Monomial::range_projection(2));
        assert_eq!(e2, expected);
        let e23 = projection_e_f(&PrimeSet::new(vec![2, 3]).unwrap()).unwrap();
        assert_eq!(e23.len(), 4);
        assert_eq!(&e23 * &e23, e23);
        assert_eq!(e23.adjoint(), e23);
        assert!(projection_e_f(&PrimeSet::first_n(21).unwrap()).is_err());
    }

    #[test]
    fn e_ab_examples() {
        assert_eq!(
            projection_e_ab(12, 12).unwrap(),
            AlgebraElement::from(Monomial::range_projection(12))
        );
        let e61 = projection_e_ab(6, 1).unwrap();
        let expected = AlgebraElement::from_terms([
            (Monomial::identity(), int(1)),
            (Monomial::range_projection(2), int(-1)),
            (Monomial::range_projection(3), int(-1)),
            (Monomial::range_projection(6), int(1)),
        ]);
        assert_eq!(e61, expected);
        let mut sum = AlgebraElement::zero();
        for d in divisors(6).unwrap() {
            sum = sum + projection_e_ab(12, 2 * d).unwrap();
        }
        assert_eq!(sum, AlgebraElement::from(Monomial::range_projection(2)));
        assert!(projection_e_ab(12, 5).is_err());
    }

    #[test]
    fn complete_projections_are_orthogonal_idempotents() {
        for a in 1..=60u64 {
            for b in divisors(a).unwrap() {
                let family: Vec<AlgebraElement> = divisors(a / b)
                    .unwrap()
                    .into_iter()
                    .map(|d| projection_e_ab(a, b * d).unwrap())
                    .collect();
                for (i, x) in family.iter().enumerate() {
                    assert_eq!(x.adjoint(), *x);
                    assert_eq!(&(x * x), x, "a = {a}, b = {b}");
                    for y in &family[i + 1..] {
                        assert!((x * y).is_zero(), "a = {a}, b = {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_of_e_f_is_conjugation() {
        let e = projection_e_f(&PrimeSet::new(vec![2, 3]).unwrap()).unwrap();
        let a4 = alpha(4, &e).unwrap();
        let expected = AlgebraElement::from_terms([
            (Monomial::range_projection(4), int(1)),
            (Monomial::range_projection(8), int(-1)),
            (Monomial::range_projection(12), int(-1)),
            (Monomial::range_projection(24), int(1)),
        ]);
        assert_eq!(a4, expected);
    }

    #[test]
    fn spectrum_projection_examples() {
        let z = RootOfUnity::new(1, 6).unwrap();
        let p = spectra_project(SpectrumPoint { z, d: 6 }, 2, 6).unwrap();
        assert_eq!(
            p,
            SpectrumPoint {
                z: RootOfUnity::new(1, 2).unwrap(),
                d: 2
            }
        );
        let q = spectra_project(SpectrumPoint { z, d: 3 }, 6, 12).unwrap();
        assert_eq!(q, SpectrumPoint { z, d: 3 });
        assert!(spectra_project(SpectrumPoint { z, d: 5 }, 2, 6).is_err());
        assert!(spectra_project(SpectrumPoint { z, d: 1 }, 4, 6).is_err());
    }

    #[test]
    fn records_round_trip() {
        let x = AlgebraElement::from_terms([
            (m(2, -3, 5), Complex64::new(0.25, -1.5)),
            (m(1, 0, 1), Complex64::new(1.0 / 3.0, 0.0)),
        ]);
        let json = serde_json::to_string(&x.to_records()).unwrap();
        let back: Vec<TermRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(AlgebraElement::from_records(&back).unwrap(), x);
    }

    fn small_monomial() -> impl Strategy<Value = Monomial> {
        (1u64..=40, -20i64..=20, 1u64..=40).prop_map(|(a, k, b)| Monomial { a, k, b })
    }

    fn small_element() -> impl Strategy<Value = AlgebraElement> {
        prop::collection::vec((small_monomial(), -5i64..=5), 0..5)
            .prop_map(|terms| AlgebraElement::from_terms(terms.into_iter().map(|(m, c)| (m, int(c)))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn product_is_associative(x in small_monomial(), y in small_monomial(), z in small_monomial()) {
            let left = mono_mul(mono_mul(x, y).unwrap(), z).unwrap();
            let right = mono_mul(x, mono_mul(y, z).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn adjoint_reverses_products(x in small_monomial(), y in small_monomial()) {
            prop_assert_eq!(adjoint(adjoint(x)), x);
            prop_assert_eq!(adjoint(mono_mul(x, y).unwrap()), mono_mul(adjoint(y), adjoint(x)).unwrap());
        }

        #[test]
        fn identity_is_neutral(x in small_monomial()) {
            prop_assert_eq!(mono_mul(Monomial::identity(), x).unwrap(), x);
            prop_assert_eq!(mono_mul(x, Monomial::identity()).unwrap(), x);
        }

        #[test]
        fn elements_distribute(x in small_element(), y in small_element(), z in small_element()) {
            let lhs = &(x.clone() + y.clone()) * &z;
            let rhs = (&x * &z) + (&y * &z);
            prop_assert!(lhs.is_integral());
            prop_assert_eq!(lhs, rhs);
            prop_assert!((&AlgebraElement::zero() * &x).is_zero());
            prop_assert_eq!(&AlgebraElement::one() * &x, x);
        }

        #[test]
        fn elements_associate(x in small_element(), y in small_element(), z in small_element()) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        }

        #[test]
        fn spectrum_projections_compose(
            z in (0i64..60, 1u64..=60),
            a in 1u64..=6, s in 1u64..=6, t in 1u64..=6, d_index in 0usize..64,
        ) {
            let b = a * s;
            let c = b * t;
            let divs = divisors(c).unwrap();
            let d = divs[d_index % divs.len()];
            let p = SpectrumPoint { z: RootOfUnity::new(z.0, z.1).unwrap(), d };
            let two_step = spectra_project(spectra_project(p, b, c).unwrap(), a, b).unwrap();
            prop_assert_eq!(two_step, spectra_project(p, a, c).unwrap());
            prop_assert_eq!(a % two_step.d, 0);
        }
    }
}
