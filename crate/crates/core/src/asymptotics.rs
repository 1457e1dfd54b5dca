//! Smooth-number counting, the Dickman function, Mertens products and the
//! vanishing harmonic sums over smooth numbers.
//!
//! Limit statements are exercised as finite trends; every truncated sum
//! reports what it left out.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primes_up_to, smooth_numbers, PrimeSet, EULER_GAMMA, SIEVE_LIMIT};
use crate::error::{out_of_range, Error, Result};
use crate::measures::{fourier, AtomicMeasure};

/// Largest `x` accepted by [`psi_count`].
pub const PSI_MAX_X: u64 = 1_000_000_000_000;

/// Ψ(x, p) is tabulated densely for `x` up to this bound and `p² ≤` it.
const SMALL_X: u64 = 1 << 16;

/// Integrand level at which [`delta_estimate`] stops extending its range.
const DELTA_CUTOFF: f64 = 1e-6;

/// Sample points in the [`delta_estimate`] trapezoid rule.
const DELTA_SAMPLES: usize = 64;

/// Counts y-smooth integers in `[1, x]`, reusing a memo table across queries
/// with the same smoothness bound. One instance per thread.
#[derive(Debug)]
pub struct PsiCounter {
    y: u64,
    primes: Vec<u64>,
    /// `small[k][v] = Ψ(v, p_k)` for `v ≤ SMALL_X` and `p_k² ≤ SMALL_X`.
    small: Vec<Vec<u32>>,
    memo: FxHashMap<(u64, u32), u64>,
}

impl PsiCounter {
    pub fn new(y: u64) -> Result<Self> {
        if y < 2 {
            return Err(out_of_range("y", format!("smoothness bound must be >= 2, got {y}")));
        }
        Ok(Self {
            y,
            primes: Vec::new(),
            small: Vec::new(),
            memo: FxHashMap::default(),
        })
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    /// Ψ(x, y).
    pub fn count(&mut self, x: u64) -> Result<u64> {
        if x > PSI_MAX_X {
            return Err(out_of_range("x", format!("{x} exceeds {PSI_MAX_X}")));
        }
        if self.y >= x {
            return Ok(x);
        }
        if self.primes.is_empty() {
            if self.y > SIEVE_LIMIT {
                return Err(out_of_range(
                    "y",
                    format!("{} exceeds the sieve limit {SIEVE_LIMIT} while below x", self.y),
                ));
            }
            self.primes = primes_up_to(self.y);
        }
        if self.small.is_empty() {
            self.build_small_table();
        }
        let k = self.primes.len() - 1;
        Ok(self.psi(x, k))
    }

    fn build_small_table(&mut self) {
        let size = SMALL_X as usize + 1;
        let rows = self.primes.iter().take_while(|&&p| p * p <= SMALL_X).count();
        let mut first = vec![0u32; size];
        for (v, slot) in first.iter_mut().enumerate().skip(1) {
            *slot = v.ilog2() + 1;
        }
        self.small.push(first);
        for k in 1..rows {
            let p = self.primes[k] as usize;
            let mut row = self.small[k - 1].clone();
            for v in p..size {
                row[v] += row[v / p];
            }
            self.small.push(row);
        }
    }

    /// Ψ(x, p_k) with `p_k = primes[k]`.
    fn psi(&mut self, x: u64, k: usize) -> u64 {
        if x <= 1 {
            return x;
        }
        if x <= SMALL_X && k < self.small.len() {
            return u64::from(self.small[k][x as usize]);
        }
        let p = self.primes[k];
        if p >= x {
            return x;
        }
        if k == 0 {
            return u64::from(x.ilog2()) + 1;
        }
        if p.saturating_mul(p) > x {
            // each smooth m <= x has at most one prime factor above sqrt(x)
            let root = x.isqrt();
            let j = self.primes.partition_point(|&q| q <= root);
            let tail: u64 = self.primes[j..=k].iter().map(|&q| x / q).sum();
            return if j == 0 { 1 + tail } else { self.psi(x, j - 1) + tail };
        }
        if let Some(&v) = self.memo.get(&(x, k as u32)) {
            return v;
        }
        let v = self.psi(x, k - 1) + self.psi(x / p, k);
        self.memo.insert((x, k as u32), v);
        v
    }
}

/// Ψ(x, y): the number of integers in `[1, x]` with no prime factor above `y`.
pub fn psi_count(x: u64, y: u64) -> Result<u64> {
    PsiCounter::new(y)?.count(x)
}

/// The Dickman function on a uniform grid.
///
/// Values come from trapezoidal stepping of `u ρ(u) = ∫_{u−1}^{u} ρ` at
/// steps `h` and `h/2`, combined by Richardson extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct DickmanGrid {
    step: f64,
    values: Vec<f64>,
}

/// Trapezoidal solution at `steps_per_unit` nodes per unit interval.
fn dickman_trapezoid(steps_per_unit: usize, nodes: usize) -> Vec<f64> {
    let m = steps_per_unit;
    let h = 1.0 / m as f64;
    let mut rho = vec![1.0; nodes.max(m + 1)];
    for i in (m + 1)..rho.len() {
        // Σ_{j=i−M+1}^{i−1} ρ_j, smallest terms first; a running sum loses
        // everything to cancellation once ρ is far below 1
        let window: f64 = rho[i + 1 - m..i].iter().rev().sum();
        let u = i as f64 * h;
        rho[i] = h * (0.5 * rho[i - m] + window) / (u - 0.5 * h);
    }
    rho.truncate(nodes);
    rho
}

impl DickmanGrid {
    /// Grid covering `[0, u_max]` with step `h`; `1/h` is rounded to an integer.
    pub fn new(u_max: f64, h: f64) -> Result<Self> {
        if !(u_max.is_finite() && u_max >= 0.0 && u_max <= 50.0) {
            return Err(out_of_range(
                "u",
                format!("Dickman grid needs 0 <= u <= 50, got {u_max}"),
            ));
        }
        if !(h > 0.0 && h <= 0.01) {
            return Err(out_of_range("h", format!("Dickman step must be in (0, 0.01], got {h}")));
        }
        let m = (1.0 / h).round() as usize;
        let nodes = (u_max * m as f64).ceil() as usize + 1;
        let coarse = dickman_trapezoid(m, nodes);
        let fine = dickman_trapezoid(2 * m, 2 * nodes - 1);
        let values = coarse
            .iter()
            .enumerate()
            .map(|(i, &c)| (4.0 * fine[2 * i] - c) / 3.0)
            .collect();
        Ok(Self {
            step: 1.0 / m as f64,
            values,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn u_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    fn per_unit(&self) -> usize {
        (1.0 / self.step).round() as usize
    }

    /// ρ(u) by four-point Lagrange interpolation, with the stencil kept inside
    /// the unit interval containing `u` so it never spans a kink at an integer.
    pub fn value_at(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0 && u <= self.u_max() + 1e-12) {
            return Err(out_of_range("u", format!("{u} outside grid [0, {}]", self.u_max())));
        }
        if u <= 1.0 {
            return Ok(1.0);
        }
        let m = self.per_unit();
        let last = self.values.len() - 1;
        let x = u / self.step;
        let i = (x.floor() as usize).min(last);
        if (x - i as f64).abs() < 1e-9 {
            return Ok(self.values[i]);
        }
        let cell_lo = (i / m) * m;
        let cell_hi = (cell_lo + m).min(last);
        let start = i.saturating_sub(1).max(cell_lo).min(cell_hi.saturating_sub(3));
        let stencil: Vec<usize> = (start..=(start + 3).min(cell_hi)).collect();
        let mut total = 0.0;
        for &a in &stencil {
            let mut weight = 1.0;
            for &b in &stencil {
                if a != b {
                    weight *= (x - b as f64) / (a as f64 - b as f64);
                }
            }
            total += weight * self.values[a];
        }
        Ok(total)
    }

    /// Largest `|u ρ'(u) + ρ(u − 1)|` over interior grid points, with ρ'
    /// from central differences. Integer nodes are skipped: ρ' jumps at
    /// `u = 1` and ρ'' jumps at `u = 2`, which a centered stencil cannot see.
    pub fn max_ode_residual(&self) -> f64 {
        let m = self.per_unit();
        let mut worst: f64 = 0.0;
        for i in (m + 1)..self.values.len().saturating_sub(1) {
            if i % m == 0 {
                continue;
            }
            let u = i as f64 * self.step;
            let derivative = (self.values[i + 1] - self.values[i - 1]) / (2.0 * self.step);
            worst = worst.max((u * derivative + self.values[i - m]).abs());
        }
        worst
    }

    /// ∫_0^{u_max} ρ by Simpson's rule on each unit interval.
    pub fn integral(&self) -> f64 {
        let m = self.per_unit();
        let last = self.values.len() - 1;
        let mut total = 0.0;
        let mut lo = 0;
        while lo < last {
            let hi = (lo + m).min(last);
            total += composite_simpson(&self.values[lo..=hi], self.step);
            lo = hi;
        }
        total
    }
}

/// Simpson's rule on equally spaced samples, closing an odd panel count with
/// one trapezoid.
fn composite_simpson(y: &[f64], h: f64) -> f64 {
    let panels = y.len() - 1;
    let even = panels - panels % 2;
    let mut total = 0.0;
    for j in (0..even).step_by(2) {
        total += h / 3.0 * (y[j] + 4.0 * y[j + 1] + y[j + 2]);
    }
    if even < panels {
        total += h / 2.0 * (y[panels - 1] + y[panels]);
    }
    total
}

/// ρ(u).
pub fn dickman(u: f64, h: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(out_of_range("u", format!("Dickman argument must be >= 0, got {u}")));
    }
    DickmanGrid::new(u.max(h), h)?.value_at(u)
}

/// ∫_0^{u_max} ρ(u) du. The full integral is e^γ.
pub fn dickman_mass(u_max: f64, h: f64) -> Result<f64> {
    Ok(DickmanGrid::new(u_max, h)?.integral())
}

/// `∏_{p≤x}(1 − 1/p)`, compared with e^{−γ}/log x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mertens {
    pub x: u64,
    pub product: f64,
    /// `log(x) · product`.
    pub scaled: f64,
    /// `|scaled − e^{−γ}| / e^{−γ}`.
    pub rel_dev: f64,
}

pub fn mertens_product(x: u64) -> Result<Mertens> {
    if x < 3 {
        return Err(out_of_range("x", format!("Mertens product needs x >= 3, got {x}")));
    }
    if x > SIEVE_LIMIT {
        return Err(out_of_range("x", format!("{x} exceeds the sieve limit {SIEVE_LIMIT}")));
    }
    let product = primes_up_to(x)
        .into_iter()
        .fold(1.0, |acc, p| acc * (1.0 - 1.0 / p as f64));
    let scaled = (x as f64).ln() * product;
    let target = (-EULER_GAMMA).exp();
    Ok(Mertens {
        x,
        product,
        scaled,
        rel_dev: (scaled - target).abs() / target,
    })
}

/// A bounded non-negative sequence `(a_m)_{m≥1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum SequenceSpec {
    ConstOne,
    PrimeIndicator,
    SquareIndicator,
    /// `values[m − 1] = a_m`; zero past the end.
    Custom(Vec<f64>),
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        if let SequenceSpec::Custom(values) = self {
            if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 1.0)) {
                return Err(out_of_range("sequence", format!("a_{} = {v} is outside [0, 1]", i + 1)));
            }
        }
        Ok(())
    }

    pub fn value(&self, m: u64) -> f64 {
        let hit = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            SequenceSpec::ConstOne => 1.0,
            SequenceSpec::PrimeIndicator => hit(is_prime(m)),
            SequenceSpec::SquareIndicator => {
                let r = m.isqrt();
                hit(r * r == m)
            }
            SequenceSpec::Custom(values) => values.get((m as usize).wrapping_sub(1)).copied().unwrap_or(0.0),
        }
    }
}

/// `∏_{p∈P_n}(1 − 1/p) Σ_{m∈ℕ^×_n, m≤C} a_m/m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothSum {
    pub n_primes: usize,
    pub value: f64,
    /// `∏_{p∈P_n}(1 − 1/p)`.
    pub euler_factor: f64,
    /// `1 − euler_factor · Σ_{m≤C} 1/m`, the normalized mass of the smooth
    /// numbers above `C`. Bounds the truncation error since `a_m ≤ 1`.
    pub truncation_share: f64,
    pub terms: usize,
}

pub fn smooth_harmonic_sum(n_primes: usize, seq: &SequenceSpec, bound: u64) -> Result<SmoothSum> {
    seq.validate()?;
    let set = PrimeSet::first_n(n_primes)?;
    let euler_factor = set.primes().iter().fold(1.0, |acc, &p| acc * (1.0 - 1.0 / p as f64));
    let smooth = smooth_numbers(&set, bound);
    let mut weighted = 0.0;
    let mut harmonic = 0.0;
    for &m in smooth.iter().rev() {
        let r = 1.0 / m as f64;
        harmonic += r;
        weighted += seq.value(m) * r;
    }
    Ok(SmoothSum {
        n_primes,
        value: euler_factor * weighted,
        euler_factor,
        truncation_share: (1.0 - euler_factor * harmonic).max(0.0),
        terms: smooth.len(),
    })
}

/// [`smooth_harmonic_sum`] for `n = 3..=n_primes`.
pub fn density_sum(seq: &SequenceSpec, n_primes: usize, bound: u64) -> Result<Vec<SmoothSum>> {
    if n_primes < 3 {
        return Err(out_of_range(
            "n_primes",
            format!("trend needs n_primes >= 3, got {n_primes}"),
        ));
    }
    (3..=n_primes).map(|n| smooth_harmonic_sum(n, seq, bound)).collect()
}

/// Fourier data `m ↦ ν̂(m)` with `|ν̂| ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum FourierData {
    /// Finitely many coefficients, zero elsewhere.
    Finite(BTreeMap<i64, Complex64>),
    /// Coefficients of an atomic probability measure.
    Atomic(AtomicMeasure),
}

impl FourierData {
    pub fn validate(&self) -> Result<()> {
        match self {
            FourierData::Finite(map) => {
                if let Some((m, c)) = map.iter().find(|(_, c)| !(c.norm() <= 1.0 + 1e-12)) {
                    return Err(out_of_range(
                        "fourier data",
                        format!("|coefficient at {m}| = {} > 1", c.norm()),
                    ));
                }
                Ok(())
            }
            FourierData::Atomic(nu) => {
                if nu.norm() > 1.0 + 1e-12 {
                    return Err(out_of_range("fourier data", format!("measure norm {} > 1", nu.norm())));
                }
                Ok(())
            }
        }
    }

    pub fn coefficient(&self, m: i64) -> Complex64 {
        match self {
            FourierData::Finite(map) => map.get(&m).copied().unwrap_or_default(),
            FourierData::Atomic(nu) => fourier(nu, m),
        }
    }
}

/// `(1/ζ_n(1)) Σ_{m∈ℕ^×_{P_n∖B}, m≤C} ν̂(ℓm + k)/m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WienerSum {
    pub n_primes: usize,
    pub value: Complex64,
    pub euler_factor: f64,
    pub terms: usize,
}

pub fn wiener_sum(
    nu_hat: &FourierData,
    n_primes: usize,
    excluded: &PrimeSet,
    ell: i64,
    k: i64,
    bound: u64,
) -> Result<WienerSum> {
    if ell == 0 {
        return Err(out_of_range("ell", "must be nonzero"));
    }
    nu_hat.validate()?;
    let all = PrimeSet::first_n(n_primes)?;
    let euler_factor = all.primes().iter().fold(1.0, |acc, &p| acc * (1.0 - 1.0 / p as f64));
    let smooth = smooth_numbers(&all.without(excluded), bound);
    let mut value = Complex64::new(0.0, 0.0);
    for &m in smooth.iter().rev() {
        let arg = i64::try_from(m)
            .ok()
            .and_then(|m| ell.checked_mul(m))
            .and_then(|v| v.checked_add(k))
            .ok_or(Error::Overflow("wiener sum index"))?;
        value += nu_hat.coefficient(arg) / m as f64;
    }
    Ok(WienerSum {
        n_primes,
        value: value * euler_factor,
        euler_factor,
        terms: smooth.len(),
    })
}

/// Estimate of `δ(u) = limsup_x ∫_u^∞ Ψ(x^s, x)/x^s ds` at one `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub u: f64,
    pub x: u64,
    pub value: f64,
    /// Upper end of the integration range.
    pub s_max: f64,
    /// Integrand at `s_max`.
    pub integrand_at_end: f64,
    /// True when `x^s` hit the counting limit before the integrand fell
    /// below the cutoff.
    pub truncated: bool,
}

/// Integrates `Ψ(⌊x^s⌋, x)/x^s` over `[u, s_max]` by the trapezoid rule on
/// [`DELTA_SAMPLES`] points. `s_max` grows in half steps until the integrand
/// drops below 1e−6 or `x^s` would exceed [`PSI_MAX_X`].
pub fn delta_estimate(u: f64, x: u64) -> Result<DeltaEstimate> {
    if !(u.is_finite() && u >= 1.0) {
        return Err(out_of_range("u", format!("needs u >= 1, got {u}")));
    }
    if !(2..=1000).contains(&x) {
        return Err(out_of_range("x", format!("needs 2 <= x <= 1000, got {x}")));
    }
    let mut counter = PsiCounter::new(x)?;
    let log_x = (x as f64).ln();
    let s_cap = (PSI_MAX_X as f64).ln() / log_x;
    let mut integrand = |s: f64| -> Result<f64> {
        let power = (s * log_x).exp();
        Ok(counter.count(power.floor() as u64)? as f64 / power)
    };
    if u >= s_cap {
        return Ok(DeltaEstimate {
            u,
            x,
            value: 0.0,
            s_max: u,
            integrand_at_end: integrand(s_cap)?,
            truncated: true,
        });
    }
    let mut s_max = u;
    let mut at_end = integrand(u)?;
    let mut truncated = false;
    while at_end >= DELTA_CUTOFF {
        if s_max + 0.5 > s_cap {
            s_max = s_cap;
            at_end = integrand(s_max)?;
            truncated = at_end >= DELTA_CUTOFF;
            break;
        }
        s_max += 0.5;
        at_end = integrand(s_max)?;
    }
    if s_max == u {
        return Ok(DeltaEstimate {
            u,
            x,
            value: 0.0,
            s_max,
            integrand_at_end: at_end,
            truncated,
        });
    }
    let h = (s_max - u) / (DELTA_SAMPLES - 1) as f64;
    let mut samples = Vec::with_capacity(DELTA_SAMPLES);
    for i in 0..DELTA_SAMPLES {
        let s = if i + 1 == DELTA_SAMPLES {
            s_max
        } else {
            u + i as f64 * h
        };
        samples.push(integrand(s)?);
    }
    let value = h * (samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[DELTA_SAMPLES - 1]));
    Ok(DeltaEstimate {
        u,
        x,
        value,
        s_max,
        integrand_at_end: at_end,
        truncated,
    })
}
