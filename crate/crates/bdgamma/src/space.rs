//! The frozen staged structure: elements of Γ with their bookkeeping
//! attributes, the c* table, chosen net data, and the derived subset Γ′.
//!
//! A `Space` is immutable once built. Element ids are assigned in build
//! order, so ids are ordered by (rank, intra-stage order) and the
//! change of basis from the coordinate functionals e* to the dual
//! basis d* = e* − c* is unitriangular in id order.

use crate::matrix::RationalMatrix;
use crate::params::Params;
use crate::scalar::Scalar;
use crate::sparse::{ElemId, SparseFunctional, SparseVec};
use num_traits::Zero;
use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    Base,
    Type1,
    Type2,
}

impl ElementKind {
    pub fn label(self) -> &'static str {
        match self {
            ElementKind::Base => "base",
            ElementKind::Type1 => "type1",
            ElementKind::Type2 => "type2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaElement {
    pub id: ElemId,
    pub rank: usize,
    pub kind: ElementKind,
    /// Weight index j, so weight = 1/m_j.
    pub weight_idx: usize,
    pub age: usize,
    pub sigma: u64,
    /// The admitted payload functional; absent for the base element.
    pub b_star: Option<SparseFunctional>,
    /// Type-2 only: the referenced element and its stage p.
    pub xi: Option<ElemId>,
    pub xi_stage: Option<usize>,
}

/// Net-adequacy certificate for one stage's grid denominator.
///
/// For any point of the unit ball of ℓ₁ on k coordinates there is a
/// grid point (coordinates in (1/D)·ℤ, still inside the ball) within
/// ℓ₁ distance k/(2D) + ⌊k/2⌋/D: rounding to the nearest grid value
/// costs at most 1/(2D) per coordinate, and restoring ball membership
/// costs at most ⌊k/2⌋ corrective steps of size 1/D. The certificate
/// passes when that bound is at most 2^-n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetCertificate {
    pub coords: usize,
    pub denominator: u64,
    pub bound: Scalar,
    pub target: Scalar,
    pub passes: bool,
    /// Smallest denominator for which this certificate would pass.
    pub minimal_adequate: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetStageInfo {
    /// Nets over Γ_stage, used to admit Δ_{stage+1}.
    pub stage: usize,
    pub n_value: u64,
    pub denominator: u64,
    pub certificate: NetCertificate,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageStats {
    pub stage: usize,
    pub type1_even: usize,
    pub type1_odd: usize,
    pub type2_even: usize,
    pub type2_odd: usize,
    /// Admitted elements whose payload is the zero functional.
    pub zero_payload: usize,
}

impl StageStats {
    pub fn total(&self) -> usize {
        self.type1_even + self.type1_odd + self.type2_even + self.type2_odd
    }
}

#[derive(Clone, Debug)]
pub struct Space {
    pub(crate) params: Params,
    pub(crate) elements: Vec<GammaElement>,
    /// stage_ends[n-1] = |Γ_n|.
    pub(crate) stage_ends: Vec<usize>,
    pub(crate) cstar: Vec<SparseFunctional>,
    pub(crate) nets: Vec<NetStageInfo>,
    pub(crate) stage_stats: Vec<StageStats>,
    pub(crate) warnings: Vec<String>,
    pub(crate) gamma_prime: Vec<bool>,
    /// Δ′_n for n = 2..N (index n-2).
    pub(crate) gp_stages: Vec<Vec<ElemId>>,
    pub(crate) beta0: Option<ElemId>,
}

impl Space {
    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Number of built stages N.
    pub fn stage_count(&self) -> usize {
        self.stage_ends.len()
    }

    /// |Γ_N|.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, id: ElemId) -> &GammaElement {
        &self.elements[id]
    }

    pub fn elements(&self) -> &[GammaElement] {
        &self.elements
    }

    /// |Γ_n|.
    pub fn gamma_len(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else {
            self.stage_ends[n - 1]
        }
    }

    /// Id range of Δ_n.
    pub fn stage_range(&self, n: usize) -> Range<ElemId> {
        let lo = if n <= 1 { 0 } else { self.stage_ends[n - 2] };
        lo..self.stage_ends[n - 1]
    }

    pub fn stage_elements(&self, n: usize) -> &[GammaElement] {
        let r = self.stage_range(n);
        &self.elements[r]
    }

    pub fn all_ids(&self) -> Vec<ElemId> {
        (0..self.len()).collect()
    }

    pub fn rank_of(&self, id: ElemId) -> usize {
        self.elements[id].rank
    }

    pub fn weight_idx_of(&self, id: ElemId) -> usize {
        self.elements[id].weight_idx
    }

    /// weight γ = 1/m_j, exactly.
    pub fn weight_of(&self, id: ElemId) -> Scalar {
        self.params.weight(self.elements[id].weight_idx)
    }

    pub fn c_star(&self, id: ElemId) -> &SparseFunctional {
        &self.cstar[id]
    }

    /// d*_γ = e*_γ − c*_γ.
    pub fn d_star(&self, id: ElemId) -> SparseFunctional {
        let mut f = SparseVec::unit(id);
        f.add_scaled(&self.cstar[id], &-Scalar::from_integer(1.into()));
        f
    }

    pub fn net_info(&self) -> &[NetStageInfo] {
        &self.nets
    }

    pub fn stage_stats(&self) -> &[StageStats] {
        &self.stage_stats
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn beta0(&self) -> Option<ElemId> {
        self.beta0
    }

    pub fn has_gamma_prime(&self) -> bool {
        self.beta0.is_some()
    }

    pub fn in_gamma_prime(&self, id: ElemId) -> bool {
        self.gamma_prime[id]
    }

    /// Γ′_n as a sorted id list (empty for n < 2).
    pub fn gamma_prime_up_to(&self, n: usize) -> Vec<ElemId> {
        (0..self.gamma_len(n)).filter(|&id| self.gamma_prime[id]).collect()
    }

    /// All of Γ′ at truncation.
    pub fn gamma_prime_ids(&self) -> Vec<ElemId> {
        self.gamma_prime_up_to(self.stage_count())
    }

    /// Δ′_n.
    pub fn gamma_prime_stage(&self, n: usize) -> &[ElemId] {
        if n < 2 || n > self.stage_count() {
            &[]
        } else {
            &self.gp_stages[n - 2]
        }
    }

    pub fn max_sigma(&self) -> u64 {
        self.elements.iter().map(|e| e.sigma).max().unwrap_or(0)
    }

    /// Coefficients of f in the d*-basis: the unique t with
    /// f = Σ_γ t_γ d*_γ, found by back-substitution along decreasing
    /// ids (supp c*_γ sits strictly below γ).
    pub fn dstar_coords(&self, f: &SparseFunctional) -> SparseVec {
        let mut work = f.clone();
        let mut t = SparseVec::new();
        while let Some(id) = work.max_id() {
            let v = work.coeff(id);
            work.set(id, Scalar::zero());
            if v.is_zero() {
                continue;
            }
            t.set(id, v.clone());
            // e*_id = d*_id + c*_id, so the coefficient cascades down.
            work.add_scaled(&self.cstar[id], &v);
        }
        t
    }

    /// P*_{(0,p]} f = Σ_{γ ∈ Γ_p} t_γ d*_γ, applied to a single
    /// functional without assembling the projection matrix.
    pub fn apply_p_star(&self, p: usize, f: &SparseFunctional) -> SparseFunctional {
        let cutoff = self.gamma_len(p);
        let t = self.dstar_coords(f);
        let mut out = SparseVec::new();
        for (id, c) in t.iter() {
            if id >= cutoff {
                continue;
            }
            out.add_to(id, c);
            out.add_scaled(&self.cstar[id], &-c.clone());
        }
        out
    }

    /// The change-of-basis matrix A with columns d*_γ in e*-coordinates
    /// (unitriangular in id order).
    pub fn dstar_matrix(&self) -> RationalMatrix {
        let ids = self.all_ids();
        let mut a = RationalMatrix::zero(ids.clone(), ids);
        for id in 0..self.len() {
            a.set_column(id, self.d_star(id));
        }
        a
    }
}
