//! Build parameters and their exact validation.
//!
//! The growth conditions on (m_j) and (n_j) involve the exponent
//! log₂ m_{j+1}. When the relevant integers are powers of two the
//! inequality is decided by bignum powering alone; otherwise it is
//! decided rigorously through dyadic interval bounds on the logarithms
//! (see `log2_interval`). No floating point is involved.

use crate::scalar::Scalar;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Growth-condition violations refuse to build.
    Strict,
    /// Violations are recorded as warnings; structural checks still run,
    /// norm bounds become measured quantities.
    Toy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetPolicy {
    /// D_n = N_n! with N_n minimal above N_{n-1} such that the net
    /// certificate passes (subject to per-stage overrides).
    Factorial,
    /// D_n is the smallest denominator whose certificate passes; N_n is
    /// then the smallest admissible stage index with D_n | N_n!.
    CertMinimal,
    /// Explicit grid denominators, one per stage 1..N-1.
    Explicit(Vec<u64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Beta0Choice {
    /// The first element of Δ₂ in build order.
    First,
    /// A fixed position within Δ₂ (build order).
    Index(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    /// Weight denominators m_j (1-indexed conceptually; m[0] is m₁).
    pub m: Vec<u64>,
    /// Companion sequence n_j.
    pub n: Vec<u64>,
    /// Number of stages to build.
    pub max_stage: usize,
    pub mode: Mode,
    pub net_policy: NetPolicy,
    /// Optional explicit N_n per stage n = 1..N-1.
    pub net_n_overrides: Vec<Option<u64>>,
    pub beta0: Beta0Choice,
    /// Hard cap on the total number of elements.
    pub budget: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("m and n must be non-empty")]
    Empty,
    #[error("need at least {needed} entries of {seq}, got {got}")]
    TooShort { seq: &'static str, needed: usize, got: usize },
    #[error("m must start at 2 or more and increase strictly (violated at index {0})")]
    NonMonotoneM(usize),
    #[error("n must be positive (violated at index {0})")]
    NonPositiveN(usize),
    #[error("max_stage must be at least 1")]
    NoStages,
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("explicit net denominators: need {needed}, got {got}")]
    ExplicitNetLength { needed: usize, got: usize },
    #[error("growth condition undecidable at working precision: {0}")]
    Indeterminate(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BulletCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ParamReport {
    pub mode: Mode,
    pub checks: Vec<BulletCheck>,
}

impl ParamReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BulletCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

impl Params {
    /// Strict reference parameters: the smallest pair satisfying every
    /// growth condition with equality, built to two stages with N₁ = 2.
    pub fn reference() -> Self {
        Params {
            m: vec![4, 16],
            n: vec![16, 4_294_967_296],
            max_stage: 2,
            mode: Mode::Strict,
            net_policy: NetPolicy::Factorial,
            net_n_overrides: vec![Some(2)],
            beta0: Beta0Choice::First,
            budget: 100_000,
        }
    }

    /// Small toy parameters (powers of two) with unit net denominators.
    /// Growth conditions fail and are reported as warnings.
    pub fn toy(max_stage: usize) -> Self {
        let len = max_stage.max(2);
        let m: Vec<u64> = (1..=len as u32).map(|j| 1u64 << j).collect();
        let n: Vec<u64> = (1..=len as u32).map(|j| 1u64 << j).collect();
        Params {
            m,
            n,
            max_stage,
            mode: Mode::Toy,
            net_policy: NetPolicy::Explicit(vec![1; max_stage.saturating_sub(1)]),
            net_n_overrides: vec![None; max_stage.saturating_sub(1)],
            beta0: Beta0Choice::First,
            budget: 100_000,
        }
    }

    /// Toy variant with n₁ = n₂ = 1, which switches on the odd-weight
    /// admission rule and switches off all type-2 admissions.
    pub fn toy_odd_weights(max_stage: usize) -> Self {
        let mut p = Self::toy(max_stage);
        let len = p.n.len();
        p.n = (0..len)
            .map(|i| if i < 2 { 1 } else { 1u64 << (i - 1) })
            .collect();
        p
    }

    /// m_j for a 1-based weight index.
    pub fn m_at(&self, j: usize) -> u64 {
        self.m[j - 1]
    }

    pub fn n_at(&self, j: usize) -> u64 {
        self.n[j - 1]
    }

    /// weight = 1/m_j.
    pub fn weight(&self, j: usize) -> Scalar {
        crate::scalar::unit_fraction(self.m_at(j))
    }

    pub fn weight_index_count(&self) -> usize {
        self.m.len()
    }

    /// Structural requirements that hold in both modes.
    pub fn check_shape(&self) -> Result<(), ParamError> {
        if self.m.is_empty() || self.n.is_empty() {
            return Err(ParamError::Empty);
        }
        if self.max_stage == 0 {
            return Err(ParamError::NoStages);
        }
        if self.budget == 0 {
            return Err(ParamError::ZeroBudget);
        }
        if self.m.len() < self.max_stage {
            return Err(ParamError::TooShort {
                seq: "m",
                needed: self.max_stage,
                got: self.m.len(),
            });
        }
        if self.n.len() < self.max_stage {
            return Err(ParamError::TooShort {
                seq: "n",
                needed: self.max_stage,
                got: self.n.len(),
            });
        }
        let mut prev = 1u64;
        for (i, &mj) in self.m.iter().enumerate() {
            if mj < 2 || mj <= prev {
                return Err(ParamError::NonMonotoneM(i));
            }
            prev = mj;
        }
        for (i, &nj) in self.n.iter().enumerate() {
            if nj == 0 {
                return Err(ParamError::NonPositiveN(i));
            }
        }
        if let NetPolicy::Explicit(ds) = &self.net_policy {
            let needed = self.max_stage.saturating_sub(1);
            if ds.len() < needed {
                return Err(ParamError::ExplicitNetLength { needed, got: ds.len() });
            }
            if ds.iter().any(|&d| d == 0) {
                return Err(ParamError::ZeroBudget);
            }
        }
        Ok(())
    }
}

/// Evaluates every growth condition exactly. Shape violations are hard
/// errors in both modes; the growth bullets are reported per item.
pub fn validate_params(p: &Params) -> Result<ParamReport, ParamError> {
    p.check_shape()?;
    let mut checks = Vec::new();

    let m1 = p.m[0];
    checks.push(BulletCheck {
        name: "assumption.m1".into(),
        holds: m1 >= 4,
        detail: format!("m1 = {m1} >= 4: {}", m1 >= 4),
    });
    let n1 = p.n[0];
    let m1sq = BigUint::from(m1) * BigUint::from(m1);
    let holds = BigUint::from(n1) >= m1sq;
    checks.push(BulletCheck {
        name: "assumption.n1".into(),
        holds,
        detail: format!("n1 = {n1} >= m1^2 = {}: {holds}", m1 * m1),
    });

    for j in 0..p.m.len().saturating_sub(1) {
        let mj = BigUint::from(p.m[j]);
        let mj1 = BigUint::from(p.m[j + 1]);
        let holds = mj1 >= &mj * &mj;
        checks.push(BulletCheck {
            name: format!("assumption.m_growth[{}]", j + 1),
            holds,
            detail: format!("m{} = {} >= m{}^2 = {}: {holds}", j + 2, p.m[j + 1], j + 1, &mj * &mj),
        });
    }

    for j in 0..p.n.len().saturating_sub(1).min(p.m.len().saturating_sub(1)) {
        let (holds, detail) = n_growth_holds(p.n[j + 1], p.m[j + 1], p.n[j])?;
        checks.push(BulletCheck {
            name: format!("assumption.n_growth[{}]", j + 1),
            holds,
            detail,
        });
    }

    Ok(ParamReport { mode: p.mode, checks })
}

/// Decides n_next >= m^2 * (4*n_prev)^(log2 m), exactly.
fn n_growth_holds(n_next: u64, m: u64, n_prev: u64) -> Result<(bool, String), ParamError> {
    let b = BigUint::from(4u64) * BigUint::from(n_prev);
    let lhs = BigUint::from(n_next);
    let msq = BigUint::from(m) * BigUint::from(m);

    if let Some(t) = exact_log2(&BigUint::from(m)) {
        let rhs = &msq * b.pow(t);
        let holds = lhs >= rhs;
        return Ok((
            holds,
            format!("n_next = {n_next} >= m^2*(4*n_prev)^log2(m) = {rhs}: {holds}"),
        ));
    }
    if let Some(s) = exact_log2(&b) {
        // (4 n_prev)^(log2 m) = m^(log2(4 n_prev)); condition becomes
        // n_next >= m^(s+2).
        let rhs = BigUint::from(m).pow(s + 2);
        let holds = lhs >= rhs;
        return Ok((
            holds,
            format!("n_next = {n_next} >= m^(log2(4*n_prev)+2) = {rhs}: {holds}"),
        ));
    }

    // General case: compare log2(n_next/m^2) with log2(m)*log2(4*n_prev)
    // through rigorous dyadic intervals, refining on demand.
    let a = BigRational::new(BigInt::from(lhs.clone()), BigInt::from(msq.clone()));
    if a <= BigRational::one() {
        return Ok((
            false,
            format!("n_next = {n_next} <= m^2 = {msq}, growth condition fails"),
        ));
    }
    let m_rat = BigRational::from_integer(BigInt::from(m));
    let b_rat = BigRational::from_integer(BigInt::from(b));
    for prec in [32u32, 64, 128, 256] {
        let (a_lo, a_hi) = log2_interval(&a, prec);
        let (m_lo, m_hi) = log2_interval(&m_rat, prec);
        let (b_lo, b_hi) = log2_interval(&b_rat, prec);
        let prod_lo = &m_lo * &b_lo;
        let prod_hi = &m_hi * &b_hi;
        if a_lo >= prod_hi {
            return Ok((
                true,
                format!(
                    "log2(n_next/m^2) in [{a_lo}, {a_hi}] >= log2(m)*log2(4*n_prev) in [{prod_lo}, {prod_hi}]"
                ),
            ));
        }
        if a_hi < prod_lo {
            return Ok((
                false,
                format!(
                    "log2(n_next/m^2) in [{a_lo}, {a_hi}] < log2(m)*log2(4*n_prev) in [{prod_lo}, {prod_hi}]"
                ),
            ));
        }
    }
    Err(ParamError::Indeterminate(format!(
        "n_next = {n_next}, m = {m}, n_prev = {n_prev}"
    )))
}

/// log2 of a power of two, or None.
fn exact_log2(x: &BigUint) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    if x.count_ones() == 1 {
        (x.bits() - 1).to_u32()
    } else {
        None
    }
}

/// Rigorous dyadic bounds on log2(x) for rational x > 0, with interval
/// width at most 2^-prec plus the straddle allowance. Uses the classic
/// square-and-extract-bit recurrence on a directed-rounded mantissa
/// interval, so every bound is exact.
pub fn log2_interval(x: &BigRational, prec: u32) -> (BigRational, BigRational) {
    assert!(x.is_positive(), "log2 needs a positive argument");
    // Integer part: e with 2^e <= x < 2^(e+1).
    let mut e: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    loop {
        if pow2_cmp_le(e, x) {
            if !pow2_cmp_le(e + 1, x) {
                break;
            }
            e += 1;
        } else {
            e -= 1;
        }
    }
    // Mantissa y = x / 2^e in [1, 2), as a dyadic interval at k bits.
    let k = prec + 8;
    let one_shift = BigUint::one() << k;
    let two_shift = &one_shift << 1u32;
    let (mut lo, mut hi) = dyadic_bounds(x, e, k);
    let mut bits = BigUint::zero();
    let mut produced = 0u32;
    while produced < prec {
        // Square the interval, renormalising to k bits with outward rounding.
        lo = (&lo * &lo) >> k;
        hi = ((&hi * &hi) + (&one_shift - BigUint::one())) >> k;
        bits <<= 1u32;
        produced += 1;
        if lo >= two_shift {
            bits += BigUint::one();
            lo >>= 1u32;
            hi = (&hi + BigUint::one()) >> 1u32;
        } else if hi < two_shift {
            // bit 0, nothing to do
        } else {
            // Undecided bit: stop and widen by the full remaining range.
            let denom = BigInt::one() << produced;
            let f_lo = BigRational::new(BigInt::from(bits.clone()), denom.clone());
            let f_hi = BigRational::new(BigInt::from(bits + BigUint::from(2u32)), denom);
            let base = BigRational::from_integer(BigInt::from(e));
            return (&base + f_lo, base + f_hi);
        }
    }
    let denom = BigInt::one() << produced;
    let f_lo = BigRational::new(BigInt::from(bits.clone()), denom.clone());
    let f_hi = BigRational::new(BigInt::from(bits + BigUint::one()), denom);
    let base = BigRational::from_integer(BigInt::from(e));
    (&base + f_lo, base + f_hi)
}

/// 2^e <= x, exactly, for signed e.
fn pow2_cmp_le(e: i64, x: &BigRational) -> bool {
    let num = x.numer().magnitude().clone();
    let den = x.denom().magnitude().clone();
    if e >= 0 {
        num >= den << (e as u64)
    } else {
        num << ((-e) as u64) >= den
    }
}

/// Outward dyadic bounds at k bits for x / 2^e (assumed in [1, 2)).
fn dyadic_bounds(x: &BigRational, e: i64, k: u32) -> (BigUint, BigUint) {
    let mut num = x.numer().magnitude().clone() << k;
    let mut den = x.denom().magnitude().clone();
    if e >= 0 {
        den <<= e as u64;
    } else {
        num <<= (-e) as u64;
    }
    let lo = &num / &den;
    let hi = if (&lo * &den) == num { lo.clone() } else { &lo + BigUint::one() };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters_pass_strict() {
        let p = Params::reference();
        let report = validate_params(&p).unwrap();
        assert!(report.all_hold(), "{:?}", report.checks);
    }

    #[test]
    fn m_growth_violation_fails() {
        // m2 = 8 < m1^2 = 16.
        let mut p = Params::reference();
        p.m = vec![4, 8];
        p.n = vec![16, 4_294_967_296];
        let report = validate_params(&p).unwrap();
        let growth = report
            .checks
            .iter()
            .find(|c| c.name == "assumption.m_growth[1]")
            .unwrap();
        assert!(!growth.holds);
    }

    #[test]
    fn toy_parameters_warn_but_validate() {
        let p = Params::toy(5);
        let report = validate_params(&p).unwrap();
        assert!(!report.all_hold());
        assert!(report.failures().count() > 0);
    }

    #[test]
    fn non_monotone_m_is_a_hard_error() {
        let mut p = Params::toy(2);
        p.m = vec![4, 4];
        assert_eq!(validate_params(&p).unwrap_err(), ParamError::NonMonotoneM(1));
    }

    #[test]
    fn log2_interval_brackets_known_values() {
        use crate::scalar::{int, ratio};
        let (lo, hi) = log2_interval(&int(8), 20);
        assert!(lo <= int(3) && int(3) <= hi);
        assert!(hi - lo <= ratio(1, 1 << 20) + ratio(2, 1 << 10));

        let (lo, hi) = log2_interval(&ratio(3, 2), 24);
        // log2(3/2) = 0.58496...
        assert!(lo < ratio(585, 1000) && ratio(584, 1000) < hi);
        assert!(lo < hi);

        let (lo, hi) = log2_interval(&ratio(1, 3), 24);
        assert!(lo < ratio(-15849, 10000) && ratio(-15850, 10000) < hi);
    }

    #[test]
    fn n_growth_with_non_power_of_two_m() {
        // m = 5, n_prev = 2: 8^log2(5) = 5^3, so the threshold is exactly
        // 25 * 125 = 3125 (power-of-two base path).
        let (holds, _) = n_growth_holds(3125, 5, 2).unwrap();
        assert!(holds);
        let (holds, _) = n_growth_holds(3124, 5, 2).unwrap();
        assert!(!holds);
        // m = 5, n_prev = 3: both logs irrational; the threshold
        // 25 * 12^log2(5) ≈ 8012 is bracketed by the interval path.
        let (holds, _) = n_growth_holds(8100, 5, 3).unwrap();
        assert!(holds);
        let (holds, _) = n_growth_holds(7900, 5, 3).unwrap();
        assert!(!holds);
    }

    #[test]
    fn n_growth_power_of_two_equality_is_accepted() {
        // Reference: n2 = m2^2*(4 n1)^4 exactly.
        let (holds, _) = n_growth_holds(4_294_967_296, 16, 16).unwrap();
        assert!(holds);
        let (holds, _) = n_growth_holds(4_294_967_295, 16, 16).unwrap();
        assert!(!holds);
    }
}
