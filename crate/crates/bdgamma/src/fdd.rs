//! Dual-basis analysis at truncation: the biorthogonal coordinate
//! vectors d_γ, the canonical projections P*_{(p,q]} and their
//! adjoints, the extension operators i_n, ranges and local supports,
//! and exact basis/decomposition constants.

use crate::matrix::{MatrixError, RationalMatrix};
use crate::norms::{opnorm_linf_on_subspace, NormError};
use crate::scalar::Scalar;
use crate::space::Space;
use crate::sparse::{duality_pair, ElemId, SparsePoint, SparseVec};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FddError {
    #[error("invalid stage interval ({p}, {q}] with {built} built stages")]
    InvalidInterval { p: usize, q: usize, built: usize },
    #[error("the zero vector has no range")]
    ZeroVector,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// The change of basis between the coordinate functionals e* and the
/// dual basis d* at truncation, with its exact inverse. Rows of the
/// inverse are the coordinate vectors d_γ.
#[derive(Clone, Debug)]
pub struct DualBasis {
    a: RationalMatrix,
    a_inv: RationalMatrix,
    a_inv_t: RationalMatrix,
}

impl DualBasis {
    pub fn compute(space: &Space) -> Self {
        let a = space.dstar_matrix();
        let a_inv = a
            .unitriangular_invert_unverified()
            .expect("the c* table is unitriangular by construction");
        let a_inv_t = a_inv.transpose();
        Self { a, a_inv, a_inv_t }
    }

    /// Columns are d*_γ in e*-coordinates.
    pub fn dstar_matrix(&self) -> &RationalMatrix {
        &self.a
    }

    pub fn inverse(&self) -> &RationalMatrix {
        &self.a_inv
    }

    /// The unique point with ⟨d*_η, d_γ⟩ = δ_{γη} for all built η.
    pub fn d_vector(&self, id: ElemId) -> SparsePoint {
        self.a_inv_t.column(id).clone()
    }

    /// x = Σ_γ t_γ d_γ.
    pub fn point_from_d_coords(&self, t: &SparseVec) -> SparsePoint {
        self.a_inv_t.apply(t)
    }

    /// t_γ = ⟨d*_γ, x⟩.
    pub fn d_coords_of_point(&self, x: &SparsePoint) -> SparseVec {
        self.a.apply_transpose(x)
    }

    /// Exhaustive biorthogonality check over all pairs: returns the
    /// number of pairs on success, or the first offending pair.
    pub fn verify_full_duality(&self) -> Result<usize, (ElemId, ElemId)> {
        let n = self.a.n_cols();
        let prod = self.a_inv.mul(&self.a).expect("square matrices over the same ids");
        for &eta in self.a.col_ids() {
            let col = prod.column(eta);
            if col.len() != 1 || !col.coeff(eta).is_one() {
                let gamma = col
                    .iter()
                    .find(|(g, _)| *g != eta)
                    .map(|(g, _)| g)
                    .unwrap_or(eta);
                return Err((gamma, eta));
            }
        }
        Ok(n * n)
    }
}

/// Matrices of P*_{(p,q]} (on ℓ₁, e*-coordinates) and of its adjoint
/// P_{(p,q]} (on ℓ∞, e-coordinates).
#[derive(Clone, Debug)]
pub struct ProjectionPair {
    pub p: usize,
    pub q: usize,
    pub star: RationalMatrix,
    pub adjoint: RationalMatrix,
}

impl ProjectionPair {
    /// Exhaustive idempotence check (meaningful for p = 0).
    pub fn is_idempotent(&self) -> bool {
        match self.star.mul(&self.star) {
            Ok(sq) => sq == self.star,
            Err(_) => false,
        }
    }
}

/// P*_{(p,q]} = Σ over the d*-window: built as A·R_{(p,q]}·A⁻¹.
pub fn proj_star_interval(
    space: &Space,
    duals: &DualBasis,
    p: usize,
    q: usize,
) -> Result<ProjectionPair, FddError> {
    let built = space.stage_count();
    if p >= q || q > built {
        return Err(FddError::InvalidInterval { p, q, built });
    }
    let lo = space.gamma_len(p);
    let hi = space.gamma_len(q);
    let ids = space.all_ids();
    let mut windowed = RationalMatrix::zero(ids.clone(), ids);
    for id in 0..space.len() {
        let col = duals
            .inverse()
            .column(id)
            .restrict(|row| lo <= row && row < hi);
        windowed.set_column(id, col);
    }
    let star = duals.dstar_matrix().mul(&windowed)?;
    let adjoint = star.transpose();
    Ok(ProjectionPair { p, q, star, adjoint })
}

/// Applies P_{(0,n]} to a single point without assembling the matrix:
/// P x = Σ_{γ ∈ Γ_n} ⟨d*_γ, x⟩ d_γ.
pub fn apply_projection_point(
    space: &Space,
    duals: &DualBasis,
    n: usize,
    x: &SparsePoint,
) -> SparsePoint {
    let cutoff = space.gamma_len(n);
    let t = duals.d_coords_of_point(x).restrict(|id| id < cutoff);
    duals.point_from_d_coords(&t)
}

/// i_q(u) for u ∈ ℓ∞(Γ_q): the unique point of the d-span of Γ_q whose
/// restriction to Γ_q is u.
pub fn extend_point(space: &Space, duals: &DualBasis, q: usize, u: &SparsePoint) -> SparsePoint {
    let mut t = SparseVec::new();
    for id in 0..space.gamma_len(q) {
        t.set(id, duality_pair(&space.d_star(id), u));
    }
    duals.point_from_d_coords(&t)
}

/// The extension operator i_n with its definitional checks.
#[derive(Clone, Debug)]
pub struct ExtensionOp {
    pub n: usize,
    /// e-coordinate matrix, Γ_N rows by Γ_n columns.
    pub matrix: RationalMatrix,
    /// ‖i_n‖ (the domain ball is the full box of Γ_n coordinates).
    pub norm: Scalar,
    /// i_n(x)(γ) = x(γ) on Γ_n, checked on every basis vector.
    pub extension_ok: bool,
    /// ‖x‖∞ ≤ ‖i_n(x)‖∞ on every basis vector.
    pub lower_inequality_ok: bool,
    /// Image is exactly the d-span of Γ_n: d-coordinates of every
    /// column stay inside Γ_n, and the rank is |Γ_n|.
    pub image_rank: usize,
    pub image_in_window: bool,
}

pub fn extension_op(space: &Space, duals: &DualBasis, n: usize) -> Result<ExtensionOp, FddError> {
    let built = space.stage_count();
    if n == 0 || n > built {
        return Err(FddError::InvalidInterval { p: 0, q: n, built });
    }
    let pair = proj_star_interval(space, duals, 0, n)?;
    let window: Vec<ElemId> = (0..space.gamma_len(n)).collect();
    let matrix = pair.adjoint.restrict_cols(window.clone());
    let mut extension_ok = true;
    let mut lower_ok = true;
    let mut in_window = true;
    for &eta in &window {
        let col = matrix.column(eta);
        let restricted = col.restrict(|id| id < space.gamma_len(n));
        if restricted != SparseVec::unit(eta) {
            extension_ok = false;
        }
        if col.sup_norm() < Scalar::one() {
            lower_ok = false;
        }
        let t = duals.d_coords_of_point(col);
        if t.max_id().map_or(false, |m| m >= space.gamma_len(n)) {
            in_window = false;
        }
    }
    Ok(ExtensionOp {
        n,
        norm: matrix.opnorm_sup_full(),
        extension_ok,
        lower_inequality_ok: lower_ok,
        image_rank: matrix.rank(),
        image_in_window: in_window,
        matrix,
    })
}

/// The range and local support of a nonzero vector given in
/// d-coordinates, with the reconstruction identity x = i_q(x|Γ_q)
/// verified at q = max ran x.
#[derive(Clone, Debug)]
pub struct LocalSupport {
    pub range: (usize, usize),
    pub ids: Vec<ElemId>,
    pub reconstruction_ok: bool,
}

pub fn local_support(
    space: &Space,
    duals: &DualBasis,
    d_coords: &SparseVec,
) -> Result<LocalSupport, FddError> {
    if d_coords.is_empty() {
        return Err(FddError::ZeroVector);
    }
    let ranks: Vec<usize> = d_coords.support().map(|id| space.rank_of(id)).collect();
    let lo = *ranks.iter().min().unwrap();
    let hi = *ranks.iter().max().unwrap();
    let x = duals.point_from_d_coords(d_coords);
    let cutoff = space.gamma_len(hi);
    let restricted = x.restrict(|id| id < cutoff);
    let ids: Vec<ElemId> = restricted.support().collect();
    let rebuilt = extend_point(space, duals, hi, &restricted);
    Ok(LocalSupport {
        range: (lo, hi),
        ids,
        reconstruction_ok: rebuilt == x,
    })
}

#[derive(Clone, Debug)]
pub struct StageConstants {
    pub n: usize,
    /// ‖P*_{(0,n]}‖ on ℓ₁ (largest column sum).
    pub dual_norm: Scalar,
    /// ‖P_{(0,n]}‖ on ℓ∞ over the full truncation box (largest row sum
    /// of the adjoint); equals the dual norm, computed independently.
    pub primal_norm: Scalar,
}

/// Exact basis and decomposition constants of the built truncation.
#[derive(Clone, Debug)]
pub struct BasisReport {
    pub per_stage: Vec<StageConstants>,
    /// max_n ‖P*_{(0,n]}‖, the stagewise dual constant.
    pub m_dual: Scalar,
    /// max_n ‖P_{(0,n]}‖: the decomposition constant of the Δ-blocking.
    pub m_primal: Scalar,
    /// Basis constant of the d*-sequence over arbitrary id prefixes.
    pub m_dual_elementwise: Scalar,
    /// Whether the measured dual constant is at most 2.
    pub dual_at_most_two: bool,
}

pub fn basis_constants(space: &Space, duals: &DualBasis) -> BasisReport {
    let mut per_stage = Vec::new();
    let mut m_dual = Scalar::zero();
    let mut m_primal = Scalar::zero();
    for n in 1..=space.stage_count() {
        let pair = proj_star_interval(space, duals, 0, n)
            .expect("interval (0, n] is valid for built n");
        let dual_norm = pair.star.opnorm_l1();
        let primal_norm = pair.adjoint.opnorm_sup_full();
        if dual_norm > m_dual {
            m_dual = dual_norm.clone();
        }
        if primal_norm > m_primal {
            m_primal = primal_norm.clone();
        }
        per_stage.push(StageConstants { n, dual_norm, primal_norm });
    }

    // Elementwise prefixes: for each γ, walk the partial sums of the
    // d*-expansion of e*_γ; the ℓ₁ norm only changes at support ids.
    let mut m_elem = Scalar::zero();
    for gamma in 0..space.len() {
        let t = duals.inverse().column(gamma);
        let mut g = SparseVec::new();
        for (id, c) in t.iter() {
            g.add_to(id, c);
            g.add_scaled(space.c_star(id), &-c.clone());
            let norm = g.l1_norm();
            if norm > m_elem {
                m_elem = norm;
            }
        }
    }

    let two = Scalar::from_integer(2.into());
    BasisReport {
        per_stage,
        dual_at_most_two: m_dual <= two,
        m_dual,
        m_primal,
        m_dual_elementwise: m_elem,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileDirection {
    /// ‖T − P_{(0,n]}T‖: approximation of a map into the truncation.
    Into,
    /// ‖T − T·P_{(0,n]}‖: approximation of a map out of it.
    OutOf,
}

/// Exact norm profile of T against the canonical projections over the
/// given schedule, on the subspace spanned by `domain_basis`. The
/// sequence reaches exactly zero once n covers the finite support of T.
pub fn compact_approx_profile(
    space: &Space,
    duals: &DualBasis,
    t: &RationalMatrix,
    domain_basis: &[SparsePoint],
    direction: ProfileDirection,
    schedule: &[usize],
) -> Result<Vec<Scalar>, FddError> {
    let mut out = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let pair = proj_star_interval(space, duals, 0, n)?;
        let residual = match direction {
            ProfileDirection::Into => t.sub(&pair.adjoint.mul(t)?),
            ProfileDirection::OutOf => t.sub(&t.mul(&pair.adjoint)?),
        };
        out.push(opnorm_linf_on_subspace(&residual, domain_basis)?.value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_space;
    use crate::params::Params;
    use crate::scalar::{int, ratio};

    fn reference() -> (Space, DualBasis) {
        let s = build_space(&Params::reference()).unwrap();
        let d = DualBasis::compute(&s);
        (s, d)
    }

    fn toy(n: usize) -> (Space, DualBasis) {
        let s = build_space(&Params::toy(n)).unwrap();
        let d = DualBasis::compute(&s);
        (s, d)
    }

    #[test]
    fn duality_table_is_kronecker_on_stage_three() {
        let (space, duals) = toy(3);
        let pairs = duals.verify_full_duality().unwrap();
        assert_eq!(pairs, space.len() * space.len());
        // Spot-check through the public pairing route as well.
        for gamma in 0..space.len() {
            for eta in 0..space.len() {
                let expected = if gamma == eta { int(1) } else { int(0) };
                assert_eq!(
                    duality_pair(&space.d_star(eta), &duals.d_vector(gamma)),
                    expected
                );
            }
        }
    }

    #[test]
    fn projection_fixes_early_dual_vectors_and_kills_late_ones() {
        let (space, duals) = reference();
        let pair = proj_star_interval(&space, &duals, 0, 1).unwrap();
        let d1 = space.d_star(0);
        assert_eq!(pair.star.apply(&d1), d1);
        for id in space.stage_range(2) {
            assert!(pair.star.apply(&space.d_star(id)).is_empty());
        }
        assert!(pair.is_idempotent());
    }

    #[test]
    fn projection_image_is_the_initial_block() {
        let (space, duals) = toy(3);
        let pair = proj_star_interval(&space, &duals, 0, 2).unwrap();
        assert_eq!(pair.star.rank(), space.gamma_len(2));
        // Interval projections subtract: P*_{(p,q]} = P*_{(0,q]} − P*_{(0,p]}.
        let p02 = pair;
        let p01 = proj_star_interval(&space, &duals, 0, 1).unwrap();
        let p12 = proj_star_interval(&space, &duals, 1, 2).unwrap();
        assert_eq!(p12.star, p02.star.sub(&p01.star));
    }

    #[test]
    fn stage_two_projection_norms_by_hand() {
        // Columns of P*_{(0,1]} on the reference build: e*₁ ↦ e*₁ and
        // e*_γ ↦ b*(1)/m₂ · e*₁, so the norm is exactly 1; the interval
        // complement picks up 1 + 1/m₂.
        let (space, duals) = reference();
        let p01 = proj_star_interval(&space, &duals, 0, 1).unwrap();
        assert_eq!(p01.star.opnorm_l1(), int(1));
        let p12 = proj_star_interval(&space, &duals, 1, 2).unwrap();
        assert_eq!(p12.star.opnorm_l1(), int(1) + ratio(1, 16));
    }

    #[test]
    fn d_vector_at_stage_two_matches_hand_solution() {
        let (space, duals) = reference();
        let d1 = duals.d_vector(0);
        assert_eq!(d1.coeff(0), int(1));
        for id in space.stage_range(2) {
            let a_gamma = space.element(id).b_star.as_ref().unwrap().coeff(0);
            assert_eq!(d1.coeff(id), a_gamma / int(16));
        }
        // Unitriangularity: d_γ(γ) = 1, support in {γ} ∪ (Γ_N ∖ Γ_rank).
        let (toy_space, toy_duals) = toy(4);
        for gamma in 0..toy_space.len() {
            let d = toy_duals.d_vector(gamma);
            assert_eq!(d.coeff(gamma), int(1));
            let cutoff = toy_space.gamma_len(toy_space.rank_of(gamma));
            assert!(d.support().all(|id| id == gamma || id >= cutoff));
        }
    }

    #[test]
    fn extension_operator_checks() {
        let (space, duals) = reference();
        let i1 = extension_op(&space, &duals, 1).unwrap();
        assert!(i1.extension_ok && i1.lower_inequality_ok && i1.image_in_window);
        assert_eq!(i1.image_rank, 1);
        // i₁(e₁) equals d₁ at truncation.
        assert_eq!(i1.matrix.column(0), &duals.d_vector(0));
        assert!(i1.matrix.column(0).sup_norm() >= int(1));

        let i2 = extension_op(&space, &duals, 2).unwrap();
        assert!(i2.extension_ok);
        assert_eq!(i2.image_rank, 6);
    }

    #[test]
    fn local_support_and_reconstruction() {
        let (space, duals) = toy(4);
        let ls = local_support(&space, &duals, &SparseVec::unit(0)).unwrap();
        assert_eq!(ls.range, (1, 1));
        assert_eq!(ls.ids, vec![0]);
        assert!(ls.reconstruction_ok);

        for id in space.stage_range(2) {
            let ls = local_support(&space, &duals, &SparseVec::unit(id)).unwrap();
            assert_eq!(ls.range, (2, 2));
            assert!(ls.reconstruction_ok);
            let expected: Vec<ElemId> = duals
                .d_vector(id)
                .restrict(|i| i < space.gamma_len(2))
                .support()
                .collect();
            assert_eq!(ls.ids, expected);
        }

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = SparseVec::from_entries((0..space.len()).filter_map(|id| {
                if rng.gen_bool(0.1) {
                    Some((id, ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2) as i64)))
                } else {
                    None
                }
            }));
            if t.is_empty() {
                continue;
            }
            let ls = local_support(&space, &duals, &t).unwrap();
            assert!(ls.reconstruction_ok);
        }
        assert!(matches!(
            local_support(&space, &duals, &SparseVec::new()),
            Err(FddError::ZeroVector)
        ));
    }

    #[test]
    fn basis_constants_on_small_builds() {
        let (space, duals) = reference();
        let report = basis_constants(&space, &duals);
        assert_eq!(report.m_dual, int(1));
        assert_eq!(report.m_primal, int(1));
        assert!(report.dual_at_most_two);
        assert!(report.m_dual_elementwise >= report.m_dual);

        // Single-stage space: all constants are 1.
        let single = build_space(&Params {
            max_stage: 1,
            ..Params::toy(2)
        })
        .unwrap();
        let duals = DualBasis::compute(&single);
        let report = basis_constants(&single, &duals);
        assert_eq!(report.m_dual, int(1));
        assert_eq!(report.m_primal, int(1));
        assert_eq!(report.m_dual_elementwise, int(1));
    }

    #[test]
    fn primal_norm_agrees_with_the_lp_route() {
        let (space, duals) = toy(3);
        let report = basis_constants(&space, &duals);
        let full_basis: Vec<SparsePoint> =
            (0..space.len()).map(|id| duals.d_vector(id)).collect();
        for sc in &report.per_stage {
            let pair = proj_star_interval(&space, &duals, 0, sc.n).unwrap();
            let lp_norm = opnorm_linf_on_subspace(&pair.adjoint, &full_basis)
                .unwrap()
                .value;
            assert_eq!(lp_norm, sc.primal_norm);
            assert_eq!(sc.primal_norm, sc.dual_norm);
        }
    }

    #[test]
    fn compact_profiles_hit_zero_at_the_support_stage() {
        let (space, duals) = toy(3);
        let ids = space.all_ids();
        // Rank-one d₁ ⊗ d*₁.
        let mut t = RationalMatrix::zero(ids.clone(), ids.clone());
        let d1 = duals.d_vector(0);
        let dstar1 = space.d_star(0);
        for col in &ids {
            let c = dstar1.coeff(*col);
            if !c.is_zero() {
                t.set_column(*col, d1.scale(&c));
            }
        }
        let basis: Vec<SparsePoint> = (0..space.len()).map(|id| duals.d_vector(id)).collect();
        let profile =
            compact_approx_profile(&space, &duals, &t, &basis, ProfileDirection::Into, &[1, 2, 3])
                .unwrap();
        assert_eq!(profile, vec![int(0), int(0), int(0)]);

        // A map whose image sits in the d-span of Γ₂ vanishes from
        // n = 2 on and is nonzero before.
        let mut t2 = RationalMatrix::zero(ids.clone(), ids.clone());
        let late = space.stage_range(2).next().unwrap();
        t2.set_column(0, duals.d_vector(late));
        let profile = compact_approx_profile(
            &space,
            &duals,
            &t2,
            &basis,
            ProfileDirection::Into,
            &[1, 2, 3],
        )
        .unwrap();
        assert!(profile[0] > int(0));
        assert_eq!(profile[1], int(0));
        assert_eq!(profile[2], int(0));
    }
}
