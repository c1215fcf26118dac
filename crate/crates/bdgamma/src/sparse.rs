//! Finitely supported vectors over the index set Γ.
//!
//! `SparseVec` holds exact rational coefficients keyed by element id and
//! never stores a zero. The same structure serves both dual roles: an
//! element of ℓ₁(Γ_N) (a functional, paired below) and an element of
//! ℓ∞(Γ_N) (a point); the aliases make signatures self-documenting.

use crate::scalar::{self, Scalar};
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

pub type ElemId = usize;

/// Functionals live in ℓ₁: their natural size is the coefficient sum.
pub type SparseFunctional = SparseVec;
/// Points live in ℓ∞: their natural size is the largest coefficient.
pub type SparsePoint = SparseVec;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndexError {
    #[error("index {id} outside the universe of {len} elements")]
    OutOfUniverse { id: ElemId, len: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec {
    entries: BTreeMap<ElemId, Scalar>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(id: ElemId) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(id, scalar::int(1));
        Self { entries }
    }

    /// Builds from (id, coefficient) pairs, dropping zeros. Later pairs
    /// overwrite earlier ones with the same id.
    pub fn from_entries<I: IntoIterator<Item = (ElemId, Scalar)>>(iter: I) -> Self {
        let mut v = Self::new();
        for (id, c) in iter {
            v.set(id, c);
        }
        v
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn coeff(&self, id: ElemId) -> Scalar {
        self.entries.get(&id).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn get(&self, id: ElemId) -> Option<&Scalar> {
        self.entries.get(&id)
    }

    pub fn set(&mut self, id: ElemId, value: Scalar) {
        if value.is_zero() {
            self.entries.remove(&id);
        } else {
            self.entries.insert(id, value);
        }
    }

    pub fn add_to(&mut self, id: ElemId, delta: &Scalar) {
        if delta.is_zero() {
            return;
        }
        let new = self.coeff(id) + delta;
        self.set(id, new);
    }

    pub fn iter(&self) -> impl Iterator<Item = (ElemId, &Scalar)> {
        self.entries.iter().map(|(id, c)| (*id, c))
    }

    pub fn support(&self) -> impl Iterator<Item = ElemId> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_id(&self) -> Option<ElemId> {
        self.entries.keys().next_back().copied()
    }

    pub fn min_id(&self) -> Option<ElemId> {
        self.entries.keys().next().copied()
    }

    pub fn scale(&self, factor: &Scalar) -> Self {
        if factor.is_zero() {
            return Self::new();
        }
        Self {
            entries: self
                .entries
                .iter()
                .map(|(id, c)| (*id, c * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (id, c) in other.iter() {
            out.add_to(id, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (id, c) in other.iter() {
            out.add_to(id, &(-c.clone()));
        }
        out
    }

    /// `self += factor * other`, the workhorse of every triangular solve.
    pub fn add_scaled(&mut self, other: &Self, factor: &Scalar) {
        if factor.is_zero() {
            return;
        }
        for (id, c) in other.iter() {
            self.add_to(id, &(c * factor));
        }
    }

    /// Keeps only the ids accepted by the predicate.
    pub fn restrict<F: Fn(ElemId) -> bool>(&self, keep: F) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(id, _)| keep(**id))
                .map(|(id, c)| (*id, c.clone()))
                .collect(),
        }
    }

    pub fn l1_norm(&self) -> Scalar {
        let mut sum = Scalar::zero();
        for c in self.entries.values() {
            sum += scalar::abs(c);
        }
        sum
    }

    pub fn sup_norm(&self) -> Scalar {
        let mut best = Scalar::zero();
        for c in self.entries.values() {
            let a = scalar::abs(c);
            if a > best {
                best = a;
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L1,
    Sup,
}

pub fn norm(v: &SparseVec, kind: NormKind) -> Scalar {
    match kind {
        NormKind::L1 => v.l1_norm(),
        NormKind::Sup => v.sup_norm(),
    }
}

/// The duality bracket Σ_γ f(γ)·x(γ).
pub fn duality_pair(f: &SparseFunctional, x: &SparsePoint) -> Scalar {
    // Walk the smaller support.
    let (small, large) = if f.len() <= x.len() { (f, x) } else { (x, f) };
    let mut sum = Scalar::zero();
    for (id, c) in small.iter() {
        if let Some(d) = large.get(id) {
            sum += c * d;
        }
    }
    sum
}

/// As `duality_pair`, but rejects indices outside a common universe
/// of `len` elements.
pub fn duality_pair_in(
    len: usize,
    f: &SparseFunctional,
    x: &SparsePoint,
) -> Result<Scalar, IndexError> {
    for v in [f, x] {
        if let Some(id) = v.max_id() {
            if id >= len {
                return Err(IndexError::OutOfUniverse { id, len });
            }
        }
    }
    Ok(duality_pair(f, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coordinate_functionals_pair_to_kronecker_delta() {
        let e_star = SparseVec::unit(3);
        assert_eq!(duality_pair(&e_star, &SparseVec::unit(3)), int(1));
        assert_eq!(duality_pair(&e_star, &SparseVec::unit(5)), int(0));
    }

    #[test]
    fn norms() {
        let f = SparseVec::from_entries([(1, int(1)), (2, ratio(-1, 2))]);
        assert_eq!(f.l1_norm(), ratio(3, 2));
        assert_eq!(f.sup_norm(), int(1));
        assert_eq!(SparseVec::new().sup_norm(), int(0));
        assert_eq!(norm(&f, NormKind::L1), ratio(3, 2));
    }

    #[test]
    fn zeros_are_never_stored() {
        let mut v = SparseVec::unit(0);
        v.add_to(0, &int(-1));
        assert!(v.is_empty());
        let w = SparseVec::from_entries([(4, int(0)), (5, int(2))]);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn universe_mismatch_is_an_index_error() {
        let f = SparseVec::unit(10);
        let x = SparseVec::unit(1);
        assert!(duality_pair_in(5, &f, &x).is_err());
        assert_eq!(duality_pair_in(11, &f, &x).unwrap(), int(0));
    }

    fn random_vec(rng: &mut ChaCha8Rng, ids: usize) -> SparseVec {
        SparseVec::from_entries((0..ids).map(|id| {
            (
                id,
                ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4) as i64),
            )
        }))
    }

    #[test]
    fn pairing_is_bilinear_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_vec(&mut rng, 8);
            let g = random_vec(&mut rng, 8);
            let x = random_vec(&mut rng, 8);
            let alpha = ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3) as i64);
            let lhs = duality_pair(&f.scale(&alpha).add(&g), &x);
            let rhs = alpha * duality_pair(&f, &x) + duality_pair(&g, &x);
            assert_eq!(lhs, rhs);
        }
    }
}
