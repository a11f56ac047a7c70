//! Truncated q-character series and exact checks of the QQ̃-system.
//!
//! The prefundamental characters `χ_j` are never expanded for a general
//! algebra. They are carried as opaque symbols with integer multiplicities,
//! matched across both sides of an identity and divided out. What remains is
//! an identity between finite sums of ℓ-weights, checked exactly after
//! truncation by α-depth (the number of `A⁻¹` factors).

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::liedata::{AlgebraData, Q64};
use crate::lweight::{
    a_monomial, bracket, psi, psi_tilde, GrothElement, LWeightTerm, PsiMonomial, ShiftIndex,
    WeightVector,
};

/// `Σ_{r=0..R} (A_{i,k} A_{i,k-2d_i} ⋯ A_{i,k-2d_i(r-1)})⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSeries {
    pub node: usize,
    pub base: i64,
    pub depth: usize,
    pub value: GrothElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerificationStatus {
    ExactZero,
    Nonzero,
    /// The `χ_j` multiplicities differ between the two sides.
    MultiplicityMismatch,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub algebra: String,
    /// 1-based node label.
    pub node: usize,
    pub depth: usize,
    pub base: i64,
    pub status: VerificationStatus,
    pub residual_terms: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn is_exact_zero(&self) -> bool {
        self.status == VerificationStatus::ExactZero
    }
}

/// α-depth of a term: minus the height of its weight.
pub fn alpha_depth(alg: &AlgebraData, t: &LWeightTerm) -> Q64 {
    -alg.omega_to_alpha(&t.weight.coords())
        .into_iter()
        .fold(Q64::from_integer(0), |a, b| a + b)
}

/// Keeps the terms of α-depth at most `depth`.
pub fn truncate(alg: &AlgebraData, g: &GrothElement, depth: usize) -> GrothElement {
    let cap = Q64::from_integer(depth as i64);
    g.filter(|t| alpha_depth(alg, t) <= cap)
}

pub fn chi_series(alg: &AlgebraData, i: usize, k: i64, depth: usize) -> Result<ChiSeries> {
    alg.check_node(i)?;
    let d = alg.sym[i];
    let mut value = GrothElement::one(alg.rank);
    let mut layer = LWeightTerm::one(alg.rank);
    for m in 0..depth as i64 {
        layer = &layer * &a_monomial(alg, i, k - 2 * d * m)?.inv();
        value.add_term(layer.clone(), 1);
    }
    Ok(ChiSeries {
        node: i,
        base: k,
        depth,
        value,
    })
}

/// Shifts of the right-hand side `Π Q_{j,a q^s}` of the QQ̃-relation at `a = q^0`.
pub fn qq_rhs_shifts(alg: &AlgebraData, i: usize) -> Result<Vec<(usize, i64)>> {
    alg.check_node(i)?;
    let mut out = Vec::new();
    for j in alg.neighbors(i) {
        let shifts: &[i64] = match alg.cartan[i][j] {
            -1 => &[0],
            -2 => &[-1, 1],
            -3 => &[-2, 0, 2],
            c => {
                return Err(crate::Error::Invalid(format!(
                    "unexpected Cartan entry {c}"
                )))
            }
        };
        out.extend(shifts.iter().map(|&s| (j, s)));
    }
    Ok(out)
}

fn report(
    identity: &str,
    alg: &AlgebraData,
    i: usize,
    depth: usize,
    base: i64,
    status: VerificationStatus,
    residual: &GrothElement,
    start: Instant,
) -> VerificationReport {
    VerificationReport {
        identity: identity.to_string(),
        algebra: alg.name(),
        node: i + 1,
        depth,
        base,
        status,
        residual_terms: residual.terms().map(|(t, c)| format!("{c}*{t}")).collect(),
        elapsed: start.elapsed(),
    }
}

fn zero_or_not(g: &GrothElement) -> VerificationStatus {
    if g.is_zero() {
        VerificationStatus::ExactZero
    } else {
        VerificationStatus::Nonzero
    }
}

/// `χ_{i,k-d_i} = 1 + A_{i,k-d_i}⁻¹ χ_{i,k-3d_i}` at depth `R`.
pub fn verify_recursion_at(
    alg: &AlgebraData,
    i: usize,
    k: i64,
    depth: usize,
) -> Result<VerificationReport> {
    let start = Instant::now();
    alg.check_node(i)?;
    let d = alg.sym[i];
    let lhs = chi_series(alg, i, k - d, depth)?.value;
    let mut rhs = GrothElement::one(alg.rank);
    if depth > 0 {
        let tail = chi_series(alg, i, k - 3 * d, depth - 1)?.value;
        rhs += &tail.mul_term(&a_monomial(alg, i, k - d)?.inv())?;
    }
    let diff = truncate(alg, &(&lhs - &rhs), depth);
    Ok(report(
        "recursion",
        alg,
        i,
        depth,
        k,
        zero_or_not(&diff),
        &diff,
        start,
    ))
}

pub fn verify_recursion(alg: &AlgebraData, i: usize, depth: usize) -> Result<VerificationReport> {
    verify_recursion_at(alg, i, 0, depth)
}

/// Product of formal characters `Π χ_j^{chi[j]}` times a finite sum.
#[derive(Debug, Clone)]
struct Formal {
    chi: Vec<i64>,
    body: GrothElement,
}

impl Formal {
    fn mul(&self, o: &Formal) -> Result<Formal> {
        Ok(Formal {
            chi: self.chi.iter().zip(&o.chi).map(|(a, b)| a + b).collect(),
            body: self.body.try_mul(&o.body)?,
        })
    }

    fn term(rank: usize, t: LWeightTerm) -> Formal {
        Formal {
            chi: vec![0; rank],
            body: GrothElement::from_term(t),
        }
    }
}

fn half_alpha(alg: &AlgebraData, i: usize, sign: i64) -> LWeightTerm {
    // 2·(α_i/2) = α_i has integer coordinates, so halving its half-units is exact.
    bracket(WeightVector::from_halves(
        alg.alpha_in_omega(i)
            .into_iter()
            .map(|c| sign * c)
            .collect(),
    ))
}

/// `Q_{i,b} = [Ψ_{i,b}] χ_i`.
fn q_formal(alg: &AlgebraData, i: usize, b: i64) -> Result<Formal> {
    let mut f = Formal::term(alg.rank, psi(alg, i, b)?);
    f.chi[i] += 1;
    Ok(f)
}

/// `Q̃_{i,b} = [Ψ̃_{i,b-2d_i}] χ_{i,b-2d_i} Π_{j≠i} χ_j^{-C_ij} χ_i⁻¹ [-α_i/2]`.
fn qt_formal(alg: &AlgebraData, i: usize, b: i64, depth: usize) -> Result<Formal> {
    let c = b - 2 * alg.sym[i];
    let head = &psi_tilde(alg, i, c)? * &half_alpha(alg, i, -1);
    let body = chi_series(alg, i, c, depth)?.value.mul_term(&head)?;
    let mut chi = vec![0; alg.rank];
    for j in alg.neighbors(i) {
        chi[j] -= alg.cartan[i][j];
    }
    chi[i] -= 1;
    Ok(Formal { chi, body })
}

/// QQ̃-relation at `a = q^k` with all `χ_j` cancelled symbolically.
pub fn verify_qq_system_at(
    alg: &AlgebraData,
    i: usize,
    k: i64,
    depth: usize,
) -> Result<VerificationReport> {
    let start = Instant::now();
    alg.check_node(i)?;
    let d = alg.sym[i];
    let plus = Formal::term(alg.rank, half_alpha(alg, i, 1));
    let minus = Formal::term(alg.rank, half_alpha(alg, i, -1));
    let t1 = plus
        .mul(&q_formal(alg, i, k - d)?)?
        .mul(&qt_formal(alg, i, k + d, depth)?)?;
    let t2 = minus
        .mul(&q_formal(alg, i, k + d)?)?
        .mul(&qt_formal(alg, i, k - d, depth)?)?;
    let mut rhs = Formal::term(alg.rank, LWeightTerm::one(alg.rank));
    for (j, s) in qq_rhs_shifts(alg, i)? {
        rhs = rhs.mul(&q_formal(alg, j, k + s)?)?;
    }
    if t1.chi != t2.chi || t1.chi != rhs.chi {
        let empty = GrothElement::zero();
        return Ok(report(
            "qq-system",
            alg,
            i,
            depth,
            k,
            VerificationStatus::MultiplicityMismatch,
            &empty,
            start,
        ));
    }
    let diff = truncate(alg, &(&(&t1.body - &t2.body) - &rhs.body), depth);
    Ok(report(
        "qq-system",
        alg,
        i,
        depth,
        k,
        zero_or_not(&diff),
        &diff,
        start,
    ))
}

pub fn verify_qq_system(alg: &AlgebraData, i: usize, depth: usize) -> Result<VerificationReport> {
    verify_qq_system_at(alg, i, 0, depth)
}

/// Truncations of `χ_q(L⁺_{1,k})` and `χ_q(L⁻_{1,k})` for sl2.
#[derive(Debug, Clone)]
pub struct Sl2ClosedForms {
    pub positive: GrothElement,
    pub negative: GrothElement,
    /// `negative` agrees with `[Ψ⁻¹_{1,k}]·chi_series(1, k, R)`.
    pub matches_series: bool,
}

pub fn sl2_closed_forms(alg: &AlgebraData, k: i64, depth: usize) -> Result<Sl2ClosedForms> {
    if alg.type_tag != 'A' || alg.rank != 1 {
        return Err(crate::Error::Invalid(format!(
            "closed forms need A1, got {}",
            alg.name()
        )));
    }
    let omega = |r: i64| bracket(WeightVector::omega(1, 0).scale(-2 * r));
    let mut positive = GrothElement::zero();
    let mut negative = GrothElement::zero();
    let sh = ShiftIndex::int;
    for r in 0..depth as i64 {
        positive.add_term(&psi(alg, 0, k)? * &omega(r), 1);
        // Π_{m<r} A⁻¹_{k-2m} telescopes to Ψ_{k+2}Ψ_k Ψ⁻¹_{k-2r+2}Ψ⁻¹_{k-2r}.
        let mut m = PsiMonomial::single(0, sh(k), -1);
        if r > 0 {
            m.add_factor(0, sh(k + 2), 1);
            m.add_factor(0, sh(k), 1);
            m.add_factor(0, sh(k - 2 * r + 2), -1);
            m.add_factor(0, sh(k - 2 * r), -1);
        }
        negative.add_term(
            &LWeightTerm {
                psi: m,
                weight: WeightVector::zero(1),
            } * &omega(r),
            1,
        );
    }
    positive.add_term(&psi(alg, 0, k)? * &omega(depth as i64), 1);
    let r = depth as i64;
    let mut m = PsiMonomial::single(0, sh(k), -1);
    if r > 0 {
        m.add_factor(0, sh(k + 2), 1);
        m.add_factor(0, sh(k), 1);
        m.add_factor(0, sh(k - 2 * r + 2), -1);
        m.add_factor(0, sh(k - 2 * r), -1);
    }
    negative.add_term(
        &LWeightTerm {
            psi: m,
            weight: WeightVector::zero(1),
        } * &omega(r),
        1,
    );
    let series = chi_series(alg, 0, k, depth)?
        .value
        .mul_term(&psi(alg, 0, k)?.inv())?;
    Ok(Sl2ClosedForms {
        matches_series: series == negative,
        positive,
        negative,
    })
}

/// sl2 quantum Wronskian with `χ = Σ_r [-2rω]` and `χ⁻¹ = 1 - [-2ω]` expanded.
pub fn verify_wronskian_sl2(alg: &AlgebraData, k: i64, depth: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    if alg.type_tag != 'A' || alg.rank != 1 {
        return Err(crate::Error::Invalid(format!(
            "Wronskian check needs A1, got {}",
            alg.name()
        )));
    }
    let mut chi = GrothElement::zero();
    for r in 0..=depth as i64 {
        chi.add_term(bracket(WeightVector::omega(1, 0).scale(-2 * r)), 1);
    }
    let mut chi_inv = GrothElement::one(1);
    chi_inv.add_term(bracket(WeightVector::omega(1, 0).scale(-2)), -1);
    let q = |b: i64| -> Result<GrothElement> { chi.mul_term(&psi(alg, 0, b)?) };
    let qt = |b: i64| -> Result<GrothElement> {
        let c = b - 2;
        let head = &psi_tilde(alg, 0, c)? * &half_alpha(alg, 0, -1);
        chi_series(alg, 0, c, depth)?
            .value
            .mul_term(&head)?
            .try_mul(&chi_inv)
    };
    let t1 = q(k - 1)?
        .try_mul(&qt(k + 1)?)?
        .mul_term(&half_alpha(alg, 0, 1))?;
    let t2 = q(k + 1)?
        .try_mul(&qt(k - 1)?)?
        .mul_term(&half_alpha(alg, 0, -1))?;
    let diff = truncate(alg, &(&(&t1 - &t2) - &GrothElement::one(1)), depth);
    Ok(report(
        "wronskian",
        alg,
        0,
        depth,
        k,
        zero_or_not(&diff),
        &diff,
        start,
    ))
}

/// Shift data of the QQ*-relation at one node and the Bethe multisets it implies.
#[derive(Debug, Clone, Serialize)]
pub struct QqStarShiftData {
    pub algebra: String,
    /// 1-based node label.
    pub node: usize,
    /// `(j, -d_j C_ji)`: shifts of the first product.
    pub rhs_plain: Vec<(usize, i64)>,
    /// `(j, +d_j C_ji)`: shifts of the product carrying `[-α_i]`.
    pub rhs_weighted: Vec<(usize, i64)>,
    /// Highest ℓ-weight of `Q*_{i,a}` at `a = q^0`, in text form.
    pub highest: String,
    /// Bethe numerator and denominator shifts implied by the QQ*-relation.
    pub bae_from_qq_star: (Vec<(usize, i64)>, Vec<(usize, i64)>),
    /// The same, derived from the QQ̃-relation.
    pub bae_from_qq_tilde: (Vec<(usize, i64)>, Vec<(usize, i64)>),
    /// `{(j, +B_ij)}` and `{(j, -B_ij)}`.
    pub bae_expected: (Vec<(usize, i64)>, Vec<(usize, i64)>),
    pub consistent: bool,
}

fn cancel_multisets(
    mut num: Vec<(usize, i64)>,
    mut den: Vec<(usize, i64)>,
) -> (Vec<(usize, i64)>, Vec<(usize, i64)>) {
    num.sort();
    den.sort();
    let mut n_out = Vec::new();
    let mut d_iter = den.into_iter().peekable();
    let mut d_out = Vec::new();
    for x in num {
        while let Some(&y) = d_iter.peek() {
            if y < x {
                d_out.push(y);
                d_iter.next();
            } else {
                break;
            }
        }
        if d_iter.peek() == Some(&x) {
            d_iter.next();
        } else {
            n_out.push(x);
        }
    }
    d_out.extend(d_iter);
    (n_out, d_out)
}

pub fn qq_star_shift_data(alg: &AlgebraData, i: usize) -> Result<QqStarShiftData> {
    alg.check_node(i)?;
    let mut plain = Vec::new();
    let mut weighted = Vec::new();
    let mut high = PsiMonomial::single(i, ShiftIndex::ZERO, -1);
    for j in 0..alg.rank {
        let c = alg.cartan[j][i];
        if c != 0 {
            let s = alg.sym[j] * c;
            plain.push((j, -s));
            weighted.push((j, s));
            high.add_factor(j, ShiftIndex::int(-s), 1);
        }
    }
    // At a zero w of Q_i: Π Q_j(w q^{-s}) = -[-α_i] Π Q_j(w q^{s}).
    let star = cancel_multisets(weighted.clone(), plain.clone());

    // From Q̃: evaluate at u = w q_i^{∓1}.
    let d = alg.sym[i];
    let rhs = qq_rhs_shifts(alg, i)?;
    let mut num = vec![(i, 2 * d)];
    let mut den = vec![(i, -2 * d)];
    for &(j, s) in &rhs {
        num.push((j, s - d));
        den.push((j, s + d));
    }
    let tilde = cancel_multisets(num, den);

    let mut e_num: Vec<_> = (0..alg.rank)
        .filter(|&j| alg.bmatrix[i][j] != 0)
        .map(|j| (j, alg.bmatrix[i][j]))
        .collect();
    let mut e_den: Vec<_> = e_num.iter().map(|&(j, b)| (j, -b)).collect();
    e_num.sort();
    e_den.sort();
    let expected = (e_num, e_den);
    let consistent = star == expected && tilde == expected;
    Ok(QqStarShiftData {
        algebra: alg.name(),
        node: i + 1,
        rhs_plain: plain,
        rhs_weighted: weighted,
        highest: LWeightTerm {
            psi: high,
            weight: WeightVector::zero(alg.rank),
        }
        .to_string(),
        bae_from_qq_star: star,
        bae_from_qq_tilde: tilde,
        bae_expected: expected,
        consistent,
    })
}

/// Which identity a batch job checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    QqSystem,
    Recursion,
}

/// Runs every `(algebra, node)` pair at the given depths in parallel.
pub fn verify_all(
    algs: &[AlgebraData],
    identity: Identity,
    depths: &[usize],
    base: i64,
) -> Result<Vec<VerificationReport>> {
    let jobs: Vec<(&AlgebraData, usize, usize)> = algs
        .iter()
        .flat_map(|a| (0..a.rank).flat_map(move |i| depths.iter().map(move |&r| (a, i, r))))
        .collect();
    jobs.into_par_iter()
        .map(|(a, i, r)| match identity {
            Identity::QqSystem => verify_qq_system_at(a, i, base, r),
            Identity::Recursion => verify_recursion_at(a, i, base, r),
        })
        .collect()
}
