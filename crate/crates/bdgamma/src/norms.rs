//! Sup-norm computations on finite-dimensional subspaces of ℓ∞(Γ_N),
//! reduced to exact linear programs.
//!
//! The full coordinate box has cheap row-sum norms (see
//! `RationalMatrix::opnorm_sup_full`); these routines handle the proper
//! subspaces, where the unit ball is a genuine polytope and the optimum
//! is attained at one of its vertices.

use crate::lp::{self, LinearProgram, LpError};
use crate::matrix::{rank_of_columns, RationalMatrix};
use crate::scalar::Scalar;
use crate::sparse::{ElemId, SparsePoint};
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormError {
    #[error("basis is linearly dependent ({rank} independent among {len})")]
    DegenerateBasis { rank: usize, len: usize },
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug)]
pub struct SubspaceOpNorm {
    pub value: Scalar,
    /// Ball point of the subspace attaining the value.
    pub witness: SparsePoint,
    /// Output coordinate where the value is attained, if nonzero.
    pub attained_at: Option<ElemId>,
}

#[derive(Clone, Debug)]
pub struct SubspaceDistance {
    pub distance: Scalar,
    /// Point of the subspace realising the distance.
    pub minimizer: SparsePoint,
}

fn check_independent(basis: &[SparsePoint]) -> Result<(), NormError> {
    let rank = rank_of_columns(basis.iter());
    if rank != basis.len() {
        return Err(NormError::DegenerateBasis { rank, len: basis.len() });
    }
    Ok(())
}

fn union_support<'a, I: IntoIterator<Item = &'a SparsePoint>>(vs: I) -> Vec<ElemId> {
    let mut ids = BTreeSet::new();
    for v in vs {
        ids.extend(v.support());
    }
    ids.into_iter().collect()
}

fn combine(basis: &[SparsePoint], coeffs: &[Scalar]) -> SparsePoint {
    let mut out = SparsePoint::new();
    for (b, c) in basis.iter().zip(coeffs) {
        out.add_scaled(b, c);
    }
    out
}

/// sup { ‖Mx‖∞ : x ∈ span(basis), ‖x‖∞ ≤ 1 }, exactly.
///
/// One LP per output coordinate and sign; the optimum of each is
/// attained at a vertex of the coefficient polytope, and the best
/// combination is returned as a witness.
pub fn opnorm_linf_on_subspace(
    m: &RationalMatrix,
    basis: &[SparsePoint],
) -> Result<SubspaceOpNorm, NormError> {
    check_independent(basis)?;
    if basis.is_empty() {
        return Ok(SubspaceOpNorm {
            value: Scalar::zero(),
            witness: SparsePoint::new(),
            attained_at: None,
        });
    }
    let ball_coords = union_support(basis.iter());
    let images: Vec<SparsePoint> = basis.iter().map(|b| m.apply(b)).collect();
    let out_coords = union_support(images.iter());

    let constraints: Vec<(Vec<Scalar>, Scalar)> = ball_coords
        .iter()
        .flat_map(|&gamma| {
            let row: Vec<Scalar> = basis.iter().map(|b| b.coeff(gamma)).collect();
            let neg: Vec<Scalar> = row.iter().map(|c| -c.clone()).collect();
            [(row, Scalar::one()), (neg, Scalar::one())]
        })
        .collect();

    let mut best = SubspaceOpNorm {
        value: Scalar::zero(),
        witness: SparsePoint::new(),
        attained_at: None,
    };
    for &delta in &out_coords {
        for sign in [1i64, -1] {
            let objective: Vec<Scalar> = images
                .iter()
                .map(|im| {
                    let c = im.coeff(delta);
                    if sign < 0 {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            if objective.iter().all(|c| c.is_zero()) {
                continue;
            }
            let sol = lp::maximize(&LinearProgram {
                num_vars: basis.len(),
                objective,
                constraints: constraints.clone(),
            })?;
            if sol.value > best.value {
                best = SubspaceOpNorm {
                    value: sol.value,
                    witness: combine(basis, &sol.point),
                    attained_at: Some(delta),
                };
            }
        }
    }
    Ok(best)
}

/// min { ‖x − v‖∞ : v ∈ span(basis) }, exactly, with the minimizing v.
pub fn dist_linf_to_subspace(
    x: &SparsePoint,
    basis: &[SparsePoint],
) -> Result<SubspaceDistance, NormError> {
    check_independent(basis)?;
    if basis.is_empty() {
        return Ok(SubspaceDistance {
            distance: x.sup_norm(),
            minimizer: SparsePoint::new(),
        });
    }
    let coords = union_support(basis.iter().chain(std::iter::once(x)));
    let k = basis.len();
    // Variables: k combination coefficients, then the bound t.
    let mut objective = vec![Scalar::zero(); k + 1];
    objective[k] = -Scalar::one();
    let mut constraints = Vec::with_capacity(2 * coords.len());
    for &gamma in &coords {
        let mut row = Vec::with_capacity(k + 1);
        for b in basis {
            row.push(b.coeff(gamma));
        }
        row.push(-Scalar::one());
        let mut neg: Vec<Scalar> = row.iter().map(|c| -c.clone()).collect();
        neg[k] = -Scalar::one();
        constraints.push((row, x.coeff(gamma)));
        constraints.push((neg, -x.coeff(gamma)));
    }
    let sol = lp::maximize(&LinearProgram { num_vars: k + 1, objective, constraints })?;
    Ok(SubspaceDistance {
        distance: -sol.value,
        minimizer: combine(basis, &sol.point[..k]),
    })
}

/// Exact span membership, decided by rank.
pub fn in_span(x: &SparsePoint, basis: &[SparsePoint]) -> bool {
    let base_rank = rank_of_columns(basis.iter());
    let full_rank = rank_of_columns(basis.iter().chain(std::iter::once(x)));
    base_rank == full_rank
}
