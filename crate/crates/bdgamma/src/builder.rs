//! The staged recursion: admission of type-1 and type-2 elements over
//! grid nets, σ assignment, and the subset recursion for Γ′.
//!
//! Everything here is deterministic: nets are enumerated in a fixed
//! lexicographic order, candidates are admitted type-1 before type-2
//! with ascending (j, payload) and (p, ξ, payload) keys, and σ values
//! are consecutive integers above the running maximum. Rebuilding from
//! equal parameters yields an identical `Space`.

use crate::params::{validate_params, Beta0Choice, Mode, NetPolicy, ParamError, Params};
use crate::scalar::{unit_fraction, Scalar};
use crate::space::{
    ElementKind, GammaElement, NetCertificate, NetStageInfo, Space, StageStats,
};
use crate::sparse::{ElemId, SparseFunctional, SparseVec};
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("strict mode refuses to build, failed growth conditions: {0:?}")]
    StrictAssumption(Vec<String>),
    #[error("invalid net window: p = {p}, n = {n} with {built} built stages")]
    InvalidWindow { p: usize, n: usize, built: usize },
    #[error(
        "net certificate fails at stage {stage}: D = {got} but the minimal adequate denominator is {minimal}"
    )]
    NetCertificate { stage: usize, got: u64, minimal: u64 },
    #[error("net bookkeeping overflows u64 at stage {stage}")]
    NetOverflow { stage: usize },
    #[error(
        "element budget exceeded at stage {stage}: {existing} existing + {planned} planned > {budget} \
         (type1 even {t1e}, type1 odd {t1o}, type2 even {t2e}, type2 odd {t2o})"
    )]
    Explosion {
        stage: usize,
        existing: usize,
        planned: u128,
        budget: usize,
        t1e: u128,
        t1o: u128,
        t2e: u128,
        t2o: u128,
    },
    #[error("the subset recursion needs at least two built stages")]
    NoStage2,
    #[error("Δ₂ has no second element to witness properness")]
    NoPropernessWitness,
    #[error("β₀ index {index} out of range, Δ₂ has {len} elements")]
    Beta0OutOfRange { index: usize, len: usize },
    #[error("structural violation: {0}")]
    Structural(String),
}

/// One net B_{p,n} together with its adequacy certificate.
#[derive(Clone, Debug)]
pub struct NetSet {
    pub p: usize,
    pub n: usize,
    pub denominator: u64,
    pub functionals: Vec<SparseFunctional>,
    pub certificate: NetCertificate,
}

fn factorial_u64(n: u64) -> Option<u64> {
    let mut acc = 1u64;
    for k in 2..=n {
        acc = acc.checked_mul(k)?;
    }
    Some(acc)
}

/// Certificate data for grid denominator d on k coordinates at stage n.
pub fn net_certificate(k: usize, d: u64, stage: usize) -> Result<NetCertificate, BuildError> {
    use num_bigint::BigInt;
    assert!(stage >= 1, "nets exist from stage 1 on");
    let weight = (k as u128) + 2 * (k as u128 / 2);
    let bound = Scalar::new(BigInt::from(weight), BigInt::from(2u128 * d as u128));
    let two_pow: u128 = 1u128
        .checked_shl(stage as u32)
        .ok_or(BuildError::NetOverflow { stage })?;
    let target = Scalar::new(BigInt::one(), BigInt::from(two_pow));
    let passes = bound <= target;
    let minimal = (two_pow / 2).saturating_mul(weight);
    let minimal_adequate =
        u64::try_from(minimal.max(1)).map_err(|_| BuildError::NetOverflow { stage })?;
    Ok(NetCertificate {
        coords: k,
        denominator: d,
        bound,
        target,
        passes,
        minimal_adequate,
    })
}

/// Smallest N with d | N!.
fn minimal_factorial_cover(d: u64) -> u64 {
    let mut rem = d;
    let mut n = 1u64;
    while rem > 1 {
        n += 1;
        rem /= gcd(rem, n);
    }
    n
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Chooses (N_n, D_n) for stage n, with k the worst-case coordinate
/// count |Γ_n|, according to the configured policy.
fn choose_net_stage(
    params: &Params,
    prev_n_value: u64,
    stage: usize,
    k: usize,
    warnings: &mut Vec<String>,
) -> Result<NetStageInfo, BuildError> {
    let override_n = params
        .net_n_overrides
        .get(stage - 1)
        .copied()
        .flatten();
    let (n_value, denominator) = match &params.net_policy {
        NetPolicy::Factorial => {
            if let Some(nv) = override_n {
                let d = factorial_u64(nv).ok_or(BuildError::NetOverflow { stage })?;
                (nv, d)
            } else {
                let mut nv = prev_n_value + 1;
                loop {
                    let d = factorial_u64(nv).ok_or(BuildError::NetOverflow { stage })?;
                    if net_certificate(k, d, stage)?.passes {
                        break (nv, d);
                    }
                    nv += 1;
                }
            }
        }
        NetPolicy::CertMinimal => {
            let d = net_certificate(k, 1, stage)?.minimal_adequate;
            let nv = override_n.unwrap_or_else(|| minimal_factorial_cover(d).max(prev_n_value + 1));
            (nv, d)
        }
        NetPolicy::Explicit(ds) => {
            let d = ds[stage - 1];
            let nv = override_n.unwrap_or_else(|| minimal_factorial_cover(d).max(prev_n_value + 1));
            (nv, d)
        }
    };
    if n_value <= prev_n_value {
        warnings.push(format!(
            "stage {stage}: N_n = {n_value} does not exceed N_{} = {prev_n_value}",
            stage - 1
        ));
    }
    let certificate = net_certificate(k, denominator, stage)?;
    if !certificate.passes {
        match params.mode {
            Mode::Strict => {
                return Err(BuildError::NetCertificate {
                    stage,
                    got: denominator,
                    minimal: certificate.minimal_adequate,
                })
            }
            Mode::Toy => warnings.push(format!(
                "stage {stage}: net certificate fails (D = {denominator}, bound {} > {}), minimal adequate D = {}",
                certificate.bound, certificate.target, certificate.minimal_adequate
            )),
        }
    }
    Ok(NetStageInfo { stage, n_value, denominator, certificate })
}

/// Number of integer vectors z over k coordinates with Σ|z_i| ≤ d:
/// Σ_j C(k,j)·2^j·C(d,j), saturating at u128::MAX.
fn grid_count(k: usize, d: u64) -> u128 {
    let mut total: u128 = 0;
    let jmax = (k as u64).min(d);
    for j in 0..=jmax {
        let mut term: u128 = 1;
        // C(k, j) * C(d, j) * 2^j with overflow saturation.
        for i in 0..j {
            term = term.saturating_mul((k as u128) - i as u128);
            term /= i as u128 + 1;
        }
        for i in 0..j {
            term = term.saturating_mul(d as u128 - i as u128);
            term /= i as u128 + 1;
        }
        term = term.saturating_mul(1u128.checked_shl(j as u32).unwrap_or(u128::MAX));
        total = total.saturating_add(term);
    }
    total
}

/// All grid functionals on the given coordinates with ℓ1 norm at most
/// one and denominators dividing d, in lexicographic order of their
/// integer coefficient vectors.
fn enumerate_grid(coords: &[ElemId], d: u64) -> Vec<SparseFunctional> {
    let mut out = Vec::new();
    let mut current: Vec<(ElemId, i64)> = Vec::new();
    fn rec(
        coords: &[ElemId],
        pos: usize,
        remaining: i64,
        d: u64,
        current: &mut Vec<(ElemId, i64)>,
        out: &mut Vec<SparseFunctional>,
    ) {
        if pos == coords.len() {
            out.push(SparseVec::from_entries(current.iter().map(|&(id, z)| {
                (
                    id,
                    Scalar::new(num_bigint::BigInt::from(z), num_bigint::BigInt::from(d)),
                )
            })));
            return;
        }
        for z in -remaining..=remaining {
            if z != 0 {
                current.push((coords[pos], z));
            }
            rec(coords, pos + 1, remaining - z.abs(), d, current, out);
            if z != 0 {
                current.pop();
            }
        }
    }
    rec(coords, 0, d as i64, d, &mut current, &mut out);
    out
}

/// B_{p,n}: every ℓ₁-ball grid functional supported on Γ_n ∖ Γ_p, with
/// the stage's adequacy certificate. The denominator is taken from the
/// recorded stage data when available and recomputed from the policy
/// otherwise.
pub fn generate_net(space: &Space, p: usize, n: usize) -> Result<NetSet, BuildError> {
    let built = space.stage_count();
    if p >= n || n > built {
        return Err(BuildError::InvalidWindow { p, n, built });
    }
    let info = match space.net_info().iter().find(|i| i.stage == n) {
        Some(i) => i.clone(),
        None => {
            let prev = space
                .net_info()
                .iter()
                .map(|i| i.n_value)
                .max()
                .unwrap_or(0);
            let mut warnings = Vec::new();
            choose_net_stage(space.params(), prev, n, space.gamma_len(n), &mut warnings)?
        }
    };
    let coords: Vec<ElemId> = (space.gamma_len(p)..space.gamma_len(n)).collect();
    let certificate = net_certificate(coords.len(), info.denominator, n)?;
    if space.params().mode == Mode::Strict && !certificate.passes {
        return Err(BuildError::NetCertificate {
            stage: n,
            got: info.denominator,
            minimal: certificate.minimal_adequate,
        });
    }
    Ok(NetSet {
        p,
        n,
        denominator: info.denominator,
        functionals: enumerate_grid(&coords, info.denominator),
        certificate,
    })
}

struct Candidate {
    kind: ElementKind,
    weight_idx: usize,
    b_star: SparseFunctional,
    xi: Option<(ElemId, usize)>,
}

/// Whether η qualifies as the payload of an odd-weight type-1 element
/// at weight index j: weight η = 1/m_{4i-2} and m_{4i-2} > n_j².
fn odd_type1_qualifies(params: &Params, eta_weight_idx: usize, j: usize) -> bool {
    if eta_weight_idx % 4 != 2 {
        return false;
    }
    let m = params.m_at(eta_weight_idx) as u128;
    let nj = params.n_at(j) as u128;
    m > nj * nj
}

fn plan_candidates(
    space: &Space,
    info: &NetStageInfo,
) -> Result<(Vec<Candidate>, StageStats), BuildError> {
    let n = space.stage_count();
    let params = space.params();
    let d = info.denominator;
    let gamma_n: Vec<ElemId> = (0..space.gamma_len(n)).collect();

    // Budget pre-check from counts alone.
    let mut t1e: u128 = 0;
    let mut t1o: u128 = 0;
    let mut t2e: u128 = 0;
    let mut t2o: u128 = 0;
    let full = grid_count(gamma_n.len(), d);
    for j in 1..=n + 1 {
        if j % 2 == 0 {
            t1e = t1e.saturating_add(full);
        } else {
            let q = gamma_n
                .iter()
                .filter(|&&id| odd_type1_qualifies(params, space.weight_idx_of(id), j))
                .count();
            t1o = t1o.saturating_add(q as u128);
        }
    }
    for p in 1..n {
        for xi in space.stage_range(p) {
            let j = space.weight_idx_of(xi);
            if space.element(xi).age as u64 >= params.n_at(j) {
                continue;
            }
            if j % 2 == 0 {
                t2e = t2e.saturating_add(grid_count(space.gamma_len(n) - space.gamma_len(p), d));
            } else {
                let target = 4u128 * space.element(xi).sigma as u128;
                let q = (space.gamma_len(p)..space.gamma_len(n))
                    .filter(|&id| space.weight_idx_of(id) as u128 == target)
                    .count();
                t2o = t2o.saturating_add(q as u128);
            }
        }
    }
    let planned = t1e
        .saturating_add(t1o)
        .saturating_add(t2e)
        .saturating_add(t2o);
    if planned.saturating_add(space.len() as u128) > params.budget as u128 {
        return Err(BuildError::Explosion {
            stage: n + 1,
            existing: space.len(),
            planned,
            budget: params.budget,
            t1e,
            t1o,
            t2e,
            t2o,
        });
    }

    let mut stats = StageStats { stage: n + 1, ..StageStats::default() };
    let mut candidates = Vec::with_capacity(planned as usize);

    // Type 1, ascending j; even j takes the whole net over Γ_n.
    let b0n = enumerate_grid(&gamma_n, d);
    for j in 1..=n + 1 {
        if j % 2 == 0 {
            for b in &b0n {
                if b.is_empty() {
                    stats.zero_payload += 1;
                }
                stats.type1_even += 1;
                candidates.push(Candidate {
                    kind: ElementKind::Type1,
                    weight_idx: j,
                    b_star: b.clone(),
                    xi: None,
                });
            }
        } else {
            for &eta in &gamma_n {
                if odd_type1_qualifies(params, space.weight_idx_of(eta), j) {
                    stats.type1_odd += 1;
                    candidates.push(Candidate {
                        kind: ElementKind::Type1,
                        weight_idx: j,
                        b_star: SparseVec::unit(eta),
                        xi: None,
                    });
                }
            }
        }
    }

    // Type 2, ascending (p, ξ); the weight index is inherited from ξ.
    for p in 1..n {
        let window: Vec<ElemId> = (space.gamma_len(p)..space.gamma_len(n)).collect();
        let bpn = enumerate_grid(&window, d);
        for xi in space.stage_range(p) {
            let j = space.weight_idx_of(xi);
            if space.element(xi).age as u64 >= params.n_at(j) {
                continue;
            }
            if j % 2 == 0 {
                for b in &bpn {
                    if b.is_empty() {
                        stats.zero_payload += 1;
                    }
                    stats.type2_even += 1;
                    candidates.push(Candidate {
                        kind: ElementKind::Type2,
                        weight_idx: j,
                        b_star: b.clone(),
                        xi: Some((xi, p)),
                    });
                }
            } else {
                let target = 4u128 * space.element(xi).sigma as u128;
                for &eta in &window {
                    if space.weight_idx_of(eta) as u128 == target {
                        stats.type2_odd += 1;
                        candidates.push(Candidate {
                            kind: ElementKind::Type2,
                            weight_idx: j,
                            b_star: SparseVec::unit(eta),
                            xi: Some((xi, p)),
                        });
                    }
                }
            }
        }
    }
    Ok((candidates, stats))
}

/// Extends a space with n built stages by Δ_{n+1}. The admission rules,
/// c* formulas, age and σ bookkeeping follow the staged recursion
/// exactly; see the module docs for the candidate order.
pub fn build_next_stage(space: &Space) -> Result<Space, BuildError> {
    let n = space.stage_count();
    let mut out = space.clone();
    let prev_n_value = out.nets.iter().map(|i| i.n_value).max().unwrap_or(0);
    let mut warnings = Vec::new();
    let info = choose_net_stage(space.params(), prev_n_value, n, space.gamma_len(n), &mut warnings)?;
    out.warnings.extend(warnings);
    let (candidates, stats) = plan_candidates(space, &info)?;
    if candidates.is_empty() {
        return Err(BuildError::Structural(format!(
            "stage {} admits no elements",
            n + 1
        )));
    }

    let mut sigma = space.max_sigma();
    for cand in candidates {
        let id = out.elements.len();
        sigma += 1;
        let weight = unit_fraction(out.params.m_at(cand.weight_idx));
        let (cstar, age) = match cand.kind {
            ElementKind::Type1 => (cand.b_star.scale(&weight), 1),
            ElementKind::Type2 => {
                let (xi, p) = cand.xi.expect("type-2 candidate carries xi");
                // c* = e*_ξ + (b* − P*_{(0,p]} b*)/m_j, evaluated against
                // the stages built so far.
                let projected = space.apply_p_star(p, &cand.b_star);
                let mut c = SparseVec::unit(xi);
                c.add_scaled(&cand.b_star, &weight);
                c.add_scaled(&projected, &-weight.clone());
                (c, space.element(xi).age + 1)
            }
            ElementKind::Base => unreachable!("base elements are never candidates"),
        };
        debug_assert!(cstar.max_id().map_or(true, |m| m < space.gamma_len(n)));
        out.cstar.push(cstar);
        out.elements.push(GammaElement {
            id,
            rank: n + 1,
            kind: cand.kind,
            weight_idx: cand.weight_idx,
            age,
            sigma,
            b_star: Some(cand.b_star),
            xi: cand.xi.map(|(x, _)| x),
            xi_stage: cand.xi.map(|(_, p)| p),
        });
        out.gamma_prime.push(false);
    }
    out.stage_ends.push(out.elements.len());
    out.nets.push(info);
    out.stage_stats.push(stats);
    Ok(out)
}

/// Builds stage 1 only: the single base element with c* = 0 and σ = 2.
pub fn initial_space(params: &Params) -> Result<Space, BuildError> {
    params.check_shape()?;
    let mut warnings = Vec::new();
    let report = validate_params(params)?;
    if !report.all_hold() {
        let failures: Vec<String> = report.failures().map(|c| c.detail.clone()).collect();
        match params.mode {
            Mode::Strict => return Err(BuildError::StrictAssumption(failures)),
            Mode::Toy => {
                warnings.extend(failures.into_iter().map(|f| format!("growth condition: {f}")))
            }
        }
    }
    let base = GammaElement {
        id: 0,
        rank: 1,
        kind: ElementKind::Base,
        weight_idx: 1,
        age: 1,
        sigma: 2,
        b_star: None,
        xi: None,
        xi_stage: None,
    };
    Ok(Space {
        params: params.clone(),
        elements: vec![base],
        stage_ends: vec![1],
        cstar: vec![SparseVec::new()],
        nets: Vec::new(),
        stage_stats: Vec::new(),
        warnings,
        gamma_prime: vec![false],
        gp_stages: Vec::new(),
        beta0: None,
    })
}

/// Recomputes Γ′ from a chosen β₀: Δ′₂ = {β₀} and Δ′_{n+1} collects the
/// elements whose c* meets Γ′_n. Non-emptiness and properness of every
/// stage are verified on the way.
pub fn build_gamma_prime(space: &Space, beta0: Beta0Choice) -> Result<Space, BuildError> {
    if space.stage_count() < 2 {
        return Err(BuildError::NoStage2);
    }
    let delta2 = space.stage_range(2);
    if delta2.len() < 2 {
        return Err(BuildError::NoPropernessWitness);
    }
    let beta0_id = match beta0 {
        Beta0Choice::First => delta2.start,
        Beta0Choice::Index(k) => {
            if k >= delta2.len() {
                return Err(BuildError::Beta0OutOfRange { index: k, len: delta2.len() });
            }
            delta2.start + k
        }
    };
    let mut out = space.clone();
    out.gamma_prime = vec![false; out.len()];
    out.gp_stages.clear();
    out.gamma_prime[beta0_id] = true;
    out.gp_stages.push(vec![beta0_id]);
    out.beta0 = Some(beta0_id);
    for n in 2..out.stage_count() {
        let mut stage = Vec::new();
        for id in out.stage_range(n + 1) {
            if out.cstar[id].iter().any(|(eta, _)| out.gamma_prime[eta]) {
                out.gamma_prime[id] = true;
                stage.push(id);
            }
        }
        if stage.is_empty() {
            return Err(BuildError::Structural(format!("Δ′_{} is empty", n + 1)));
        }
        if stage.len() == out.stage_range(n + 1).len() {
            return Err(BuildError::Structural(format!(
                "Δ′_{} is not a proper subset",
                n + 1
            )));
        }
        out.gp_stages.push(stage);
    }
    Ok(out)
}

/// Full staged build to `params.max_stage`, including Γ′ when at least
/// two stages exist.
pub fn build_space(params: &Params) -> Result<Space, BuildError> {
    let mut space = initial_space(params)?;
    for _ in 1..params.max_stage {
        space = build_next_stage(&space)?;
    }
    if space.stage_count() >= 2 {
        space = build_gamma_prime(&space, params.beta0)?;
    }
    Ok(space)
}

/// Outcome of the exhaustive Γ′ structure verification.
#[derive(Clone, Debug, Default)]
pub struct GammaPrimeStructureReport {
    pub membership_checked: usize,
    pub dstar_checked: usize,
    pub dvector_checked: usize,
    pub beta0_exception_ok: bool,
    pub violations: Vec<String>,
}

impl GammaPrimeStructureReport {
    pub fn ok(&self) -> bool {
        self.beta0_exception_ok && self.violations.is_empty()
    }
}

/// Verifies, for every built γ: membership in Γ′ ∖ {β₀} is equivalent
/// to c*_γ meeting Γ′; membership in Γ′ is equivalent to d*_γ meeting
/// Γ′; and the truncated coordinate vector d_γ of every γ ∈ Γ′
/// vanishes off Γ′.
pub fn verify_gamma_prime_structure(
    space: &Space,
    duals: &crate::fdd::DualBasis,
) -> GammaPrimeStructureReport {
    let mut report = GammaPrimeStructureReport::default();
    let Some(beta0) = space.beta0() else {
        report
            .violations
            .push("Γ′ has not been built".to_string());
        return report;
    };

    report.beta0_exception_ok = space.in_gamma_prime(beta0)
        && !space.c_star(beta0).iter().any(|(eta, _)| space.in_gamma_prime(eta));

    for id in 0..space.len() {
        let in_prime = space.in_gamma_prime(id);
        let cstar_meets = space
            .c_star(id)
            .iter()
            .any(|(eta, _)| space.in_gamma_prime(eta));
        let lhs = in_prime && id != beta0;
        report.membership_checked += 1;
        if lhs != cstar_meets {
            report.violations.push(format!(
                "membership: element {id}: in Γ′∖{{β₀}} = {lhs}, c*|Γ′ ≠ 0 = {cstar_meets}"
            ));
        }
        let dstar_meets = space
            .d_star(id)
            .iter()
            .any(|(eta, _)| space.in_gamma_prime(eta));
        report.dstar_checked += 1;
        if in_prime != dstar_meets {
            report.violations.push(format!(
                "dual support: element {id}: in Γ′ = {in_prime}, d*|Γ′ ≠ 0 = {dstar_meets}"
            ));
        }
        if in_prime {
            report.dvector_checked += 1;
            let d_vec = duals.d_vector(id);
            let offender = d_vec
                .iter()
                .find(|(eta, _)| !space.in_gamma_prime(*eta))
                .map(|(eta, v)| (eta, v.clone()));
            if let Some((eta, v)) = offender {
                report.violations.push(format!(
                    "coordinate vector: d_{id}({eta}) = {v} outside Γ′"
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn reference_stage_two_is_the_five_type_one_elements() {
        let space = build_space(&Params::reference()).unwrap();
        assert_eq!(space.stage_count(), 2);
        assert_eq!(space.gamma_len(1), 1);
        assert_eq!(space.gamma_len(2), 6);
        let delta2: Vec<_> = space.stage_elements(2).iter().collect();
        assert_eq!(delta2.len(), 5);
        assert!(delta2.iter().all(|e| e.kind == ElementKind::Type1));
        assert!(delta2.iter().all(|e| e.weight_idx == 2 && e.age == 1 && e.rank == 2));
        // Payloads are exactly {0, ±(1/2)e*₁, ±e*₁}; in particular ±e*₁.
        let payloads: Vec<Scalar> = delta2
            .iter()
            .map(|e| e.b_star.as_ref().unwrap().coeff(0))
            .collect();
        assert_eq!(
            payloads,
            vec![int(-1), ratio(-1, 2), int(0), ratio(1, 2), int(1)]
        );
        // c* = b*/m₂ with m₂ = 16.
        for e in &delta2 {
            let expected = e.b_star.as_ref().unwrap().scale(&ratio(1, 16));
            assert_eq!(space.c_star(e.id), &expected);
        }
    }

    #[test]
    fn sigma_is_injective_and_dominates_rank() {
        let space = build_space(&Params::toy(4)).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for e in space.elements() {
            assert!(seen.insert(e.sigma), "σ repeated at {}", e.id);
            assert!(e.sigma as usize > e.rank);
            assert!(e.weight_idx <= e.rank);
        }
    }

    #[test]
    fn cstar_supported_strictly_below_and_unitriangular() {
        let space = build_space(&Params::toy(4)).unwrap();
        for id in 0..space.len() {
            let rank = space.rank_of(id);
            if let Some(max) = space.c_star(id).max_id() {
                assert!(max < space.gamma_len(rank - 1));
            }
        }
        // The change of basis inverts as unitriangular.
        assert!(space.dstar_matrix().unitriangular_invert().is_ok());
    }

    #[test]
    fn nets_at_stage_one() {
        // D = 2: five functionals, certificate bound 1/4 <= 1/2.
        let space = build_space(&Params::reference()).unwrap();
        let net = generate_net(&space, 0, 1).unwrap();
        assert_eq!(net.functionals.len(), 5);
        assert!(net.certificate.passes);
        assert_eq!(net.certificate.bound, ratio(1, 4));
        assert_eq!(net.certificate.target, ratio(1, 2));
        for f in &net.functionals {
            assert!(f.l1_norm() <= int(1));
        }

        // D = 1: three functionals, boundary case 1/2 <= 1/2 passes.
        let toy = build_space(&Params::toy(2)).unwrap();
        let net = generate_net(&toy, 0, 1).unwrap();
        assert_eq!(net.functionals.len(), 3);
        assert!(net.certificate.passes);
        assert_eq!(net.certificate.bound, ratio(1, 2));

        // p = n is an invalid window.
        assert!(matches!(
            generate_net(&toy, 1, 1),
            Err(BuildError::InvalidWindow { .. })
        ));
    }

    #[test]
    fn toy_stage_counts_match_hand_enumeration() {
        let space = build_space(&Params::toy(4)).unwrap();
        assert_eq!(space.gamma_len(1), 1);
        assert_eq!(space.gamma_len(2), 4); // 3 type-1 over B_{0,1}
        assert_eq!(space.gamma_len(3), 13); // 9 type-1 over B_{0,2}
        assert_eq!(space.gamma_len(4), 124); // 54 type-1 + 57 type-2
        let s4 = &space.stage_stats()[2];
        assert_eq!(s4.type1_even, 54);
        assert_eq!(s4.type2_even, 57);
        assert_eq!(s4.type1_odd + s4.type2_odd, 0);

        let odd = build_space(&Params::toy_odd_weights(3)).unwrap();
        let s3 = &odd.stage_stats()[1];
        assert_eq!(s3.type1_odd, 3); // (3, 1/m₁, e*_η) for the three η ∈ Δ₂
        assert_eq!(odd.gamma_len(3), 16);
    }

    #[test]
    fn strict_mode_refuses_bad_growth_and_toy_warns() {
        let mut p = Params::reference();
        p.m = vec![4, 8];
        assert!(matches!(
            build_space(&p),
            Err(BuildError::StrictAssumption(_))
        ));
        p.mode = Mode::Toy;
        p.net_policy = NetPolicy::Explicit(vec![2]);
        let space = build_space(&p).unwrap();
        assert!(!space.warnings().is_empty());
    }

    #[test]
    fn budget_overflow_reports_per_rule_counts() {
        let mut p = Params::toy(4);
        p.budget = 50;
        match build_space(&p) {
            Err(BuildError::Explosion { stage, t1e, t2e, .. }) => {
                assert_eq!(stage, 4);
                assert_eq!(t1e, 54);
                assert_eq!(t2e, 57);
            }
            other => panic!("expected explosion, got {other:?}"),
        }
    }

    #[test]
    fn gamma_prime_recursion_examples() {
        let space = build_space(&Params::toy(4)).unwrap();
        let beta0 = space.beta0().unwrap();
        assert_eq!(space.gamma_prime_stage(2), &[beta0]);
        // (n+1, 1/m₂, e*_{β₀}) is admitted and lands in Δ′_{n+1}; the
        // ζ-payload sibling for ζ ∈ Δ₂ ∖ {β₀} does not.
        for n in 2..space.stage_count() {
            let present = space
                .gamma_prime_stage(n + 1)
                .iter()
                .any(|&id| {
                    let e = space.element(id);
                    e.kind == ElementKind::Type1
                        && e.weight_idx == 2
                        && e.b_star.as_ref().unwrap() == &SparseVec::unit(beta0)
                });
            assert!(present, "e*_β₀ element missing from Δ′_{}", n + 1);
            let zeta = space.stage_range(2).find(|&z| z != beta0).unwrap();
            let absent = space.stage_range(n + 1).any(|id| {
                let e = space.element(id);
                e.kind == ElementKind::Type1
                    && e.weight_idx == 2
                    && e.b_star.as_ref().unwrap() == &SparseVec::unit(zeta)
                    && !space.in_gamma_prime(id)
            });
            assert!(absent, "e*_ζ element not excluded from Δ′_{}", n + 1);
        }
        // Every Δ′_n is nonempty and proper.
        for n in 2..=space.stage_count() {
            let len = space.gamma_prime_stage(n).len();
            assert!(len > 0 && len < space.stage_range(n).len());
        }
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let a = build_space(&Params::toy(4)).unwrap();
        let b = build_space(&Params::toy(4)).unwrap();
        assert_eq!(a.elements(), b.elements());
        assert_eq!(a.gamma_prime_ids(), b.gamma_prime_ids());
        for id in 0..a.len() {
            assert_eq!(a.c_star(id), b.c_star(id));
        }
    }
}
