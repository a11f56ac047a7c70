//! First-order matrix operators `∂ + M(t)`, their reduction to companion form,
//! and the factorized (Miura) description of scalar operators.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::laurent::Laurent;
use crate::error::{Error, Result};

pub const MAX_RANK: usize = 5;

/// Scalar operator `Σ coeffs[m] ∂^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScalarOp {
    pub coeffs: Vec<Laurent>,
}

impl ScalarOp {
    pub fn identity() -> Self {
        ScalarOp {
            coeffs: vec![Laurent::one()],
        }
    }

    /// `∂ − u`.
    pub fn first_order(u: &Laurent) -> Self {
        ScalarOp {
            coeffs: vec![-u, Laurent::one()],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coefficient(&self, m: usize) -> Laurent {
        self.coeffs.get(m).cloned().unwrap_or_else(Laurent::zero)
    }

    /// Operator product `self ∘ rhs`.
    pub fn compose(&self, rhs: &ScalarOp) -> ScalarOp {
        let mut out = vec![Laurent::zero(); self.order() + rhs.order() + 1];
        for (m, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            // a ∂^m ∘ b ∂^n = a Σ_k C(m,k) b^(k) ∂^(m−k+n)
            for (n, b) in rhs.coeffs.iter().enumerate() {
                let mut db = b.clone();
                let mut binom = BigInt::one();
                for k in 0..=m {
                    if db.is_zero() {
                        break;
                    }
                    let term = (a * &db).scale(&BigRational::from_integer(binom.clone()));
                    out[m - k + n] = &out[m - k + n] + &term;
                    db = db.derivative();
                    binom = binom * BigInt::from(m - k) / BigInt::from(k + 1);
                }
            }
        }
        while out.len() > 1 && out.last().is_some_and(Laurent::is_zero) {
            out.pop();
        }
        ScalarOp { coeffs: out }
    }

    pub fn apply(&self, f: &Laurent) -> Laurent {
        let mut acc = Laurent::zero();
        let mut df = f.clone();
        for c in &self.coeffs {
            acc = &acc + &(c * &df);
            df = df.derivative();
        }
        acc
    }
}

impl fmt::Display for ScalarOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match m {
                0 => write!(f, "({c})")?,
                _ if *c == Laurent::one() => write!(f, "d^{m}")?,
                _ => write!(f, "({c})*d^{m}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

type Mat = Vec<Vec<Laurent>>;

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let r = a.len();
    let mut out = vec![vec![Laurent::zero(); r]; r];
    for i in 0..r {
        for k in 0..r {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..r {
                if !b[k][j].is_zero() {
                    out[i][j] = &out[i][j] + &(&a[i][k] * &b[k][j]);
                }
            }
        }
    }
    out
}

fn identity(r: usize) -> Mat {
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        Laurent::one()
                    } else {
                        Laurent::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// `∂_t + M(t)` with `M` in pre-reduction form: ones on the subdiagonal and
/// zeros below it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixDiffOp {
    entries: Mat,
}

impl MatrixDiffOp {
    pub fn new(entries: Vec<Vec<Laurent>>) -> Result<Self> {
        let r = entries.len();
        if !(2..=MAX_RANK).contains(&r) {
            return Err(Error::Invalid(format!(
                "matrix size {r} outside 2..={MAX_RANK}"
            )));
        }
        if entries.iter().any(|row| row.len() != r) {
            return Err(Error::Invalid("matrix is not square".into()));
        }
        for i in 1..r {
            if entries[i][i - 1] != Laurent::one() {
                return Err(Error::Invalid(format!(
                    "subdiagonal entry ({}, {}) is not 1",
                    i + 1,
                    i
                )));
            }
            for j in 0..i - 1 {
                if !entries[i][j].is_zero() {
                    return Err(Error::Invalid(format!(
                        "entry ({}, {}) below the subdiagonal is nonzero",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let trace = (0..r).fold(Laurent::zero(), |acc, i| &acc + &entries[i][i]);
        if !trace.is_zero() {
            return Err(Error::Invalid(format!("trace {trace} is not zero")));
        }
        Ok(MatrixDiffOp { entries })
    }

    /// `∂ + p̄₋₁ + diag(a)`.
    pub fn diagonal(a: &[Laurent]) -> Result<Self> {
        let r = a.len();
        let mut m = vec![vec![Laurent::zero(); r]; r];
        for i in 0..r {
            m[i][i] = a[i].clone();
            if i > 0 {
                m[i][i - 1] = Laurent::one();
            }
        }
        MatrixDiffOp::new(m)
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Laurent {
        &self.entries[i][j]
    }

    /// Gauge by `g = 1 + n` with `n` strictly upper triangular:
    /// `M ↦ g M g⁻¹ − g′ g⁻¹`.
    pub fn gauge(&self, n: &[Vec<Laurent>]) -> Result<Self> {
        let r = self.size();
        if n.len() != r || n.iter().any(|row| row.len() != r) {
            return Err(Error::Invalid("gauge matrix has the wrong shape".into()));
        }
        for i in 0..r {
            for j in 0..=i {
                if !n[i][j].is_zero() {
                    return Err(Error::Invalid(
                        "gauge must be strictly upper triangular".into(),
                    ));
                }
            }
        }
        let n: Mat = n.to_vec();
        let mut g = identity(r);
        let mut ginv = identity(r);
        let mut power = identity(r);
        for k in 1..r {
            power = mat_mul(&power, &n);
            for i in 0..r {
                for j in 0..r {
                    if k % 2 == 1 {
                        ginv[i][j] = &ginv[i][j] - &power[i][j];
                    } else {
                        ginv[i][j] = &ginv[i][j] + &power[i][j];
                    }
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                g[i][j] = &g[i][j] + &n[i][j];
            }
        }
        let dg: Mat = n
            .iter()
            .map(|row| row.iter().map(Laurent::derivative).collect())
            .collect();
        let conj = mat_mul(&mat_mul(&g, &self.entries), &ginv);
        let corr = mat_mul(&dg, &ginv);
        let entries = (0..r)
            .map(|i| (0..r).map(|j| &conj[i][j] - &corr[i][j]).collect())
            .collect();
        MatrixDiffOp::new(entries)
    }

    /// True when only the first row and the subdiagonal are nonzero.
    pub fn is_companion(&self) -> bool {
        let r = self.size();
        (1..r).all(|i| (i..r).all(|j| self.entries[i][j].is_zero())) && self.entries[0][0].is_zero()
    }
}

/// Companion coefficients `v_1..v_{r−1}` (first row, columns 2..r).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalForm {
    pub v: Vec<Laurent>,
}

impl CanonicalForm {
    /// `∂^r + Σ_j (−1)^j v_j ∂^(r−j−1)`, the equation for the last component.
    pub fn scalar_operator(&self) -> ScalarOp {
        let r = self.v.len() + 1;
        let mut coeffs = vec![Laurent::zero(); r + 1];
        coeffs[r] = Laurent::one();
        for (j0, v) in self.v.iter().enumerate() {
            let j = j0 + 1;
            coeffs[r - j - 1] = if j % 2 == 0 { v.clone() } else { -v };
        }
        ScalarOp { coeffs }
    }
}

/// Brings `op` to companion form by upper-unipotent gauges, one principal
/// degree at a time, and returns the surviving first-row entries.
pub fn canonical_form(op: &MatrixDiffOp) -> Result<CanonicalForm> {
    let r = op.size();
    let mut cur = op.clone();
    for j in 0..r - 1 {
        let mut n = vec![vec![Laurent::zero(); r]; r];
        let mut np = Laurent::zero();
        for p in (1..r - j).rev() {
            np = &np + cur.entry(p, p + j);
            n[p - 1][p + j] = np.clone();
        }
        cur = cur.gauge(&n)?;
    }
    if !cur.is_companion() {
        return Err(Error::Numerical(
            "gauge reduction left entries outside the first row".into(),
        ));
    }
    Ok(CanonicalForm {
        v: (1..r).map(|j| cur.entry(0, j).clone()).collect(),
    })
}

/// Expands `(∂ − u_1)(∂ − u_2)⋯(∂ − u_r)`.
pub fn miura(u: &[Laurent]) -> Result<ScalarOp> {
    if u.is_empty() || u.len() > MAX_RANK {
        return Err(Error::Invalid(format!(
            "need 1..={MAX_RANK} factors, got {}",
            u.len()
        )));
    }
    let trace = u.iter().fold(Laurent::zero(), |acc, x| &acc + x);
    if !trace.is_zero() {
        return Err(Error::Invalid(format!("sum of u_i is {trace}, not zero")));
    }
    Ok(u.iter().fold(ScalarOp::identity(), |acc, ui| {
        acc.compose(&ScalarOp::first_order(ui))
    }))
}

fn falling(s: &BigRational, m: usize) -> BigRational {
    (0..m).fold(BigRational::one(), |acc, k| {
        acc * (s - BigRational::from_integer(BigInt::from(k)))
    })
}

/// `c_1..c_{r−1}` with `(∂ − ν_1/z)⋯(∂ − ν_r/z) = ∂^r + Σ (−1)^i c_i z^(−i−1) ∂^(r−i−1)`.
///
/// Solved from the action on `z^s`, which turns the factorized form into the
/// indicial polynomial `Π_i (s − (r−i) − ν_i)`.
pub fn c_of_nu(nu: &[BigRational]) -> Result<Vec<BigRational>> {
    let r = nu.len();
    if r == 0 || r > MAX_RANK {
        return Err(Error::Invalid(format!(
            "need 1..={MAX_RANK} exponents, got {r}"
        )));
    }
    if !nu.iter().fold(BigRational::zero(), |a, x| a + x).is_zero() {
        return Err(Error::Invalid("exponents must sum to zero".into()));
    }
    let indicial = |s: &BigRational| -> BigRational {
        (1..=r).fold(BigRational::one(), |acc, i| {
            acc * (s - BigRational::from_integer(BigInt::from(r - i)) - &nu[i - 1])
        })
    };
    let sign = |i: usize| {
        if i % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        }
    };
    let mut c = vec![BigRational::zero(); r];
    for m in 0..r.saturating_sub(1) {
        let s = BigRational::from_integer(BigInt::from(m));
        let i = r - 1 - m;
        let mut rest = indicial(&s) - falling(&s, r);
        for (ip, cp) in c.iter().enumerate().skip(i + 1) {
            rest -= sign(ip) * cp * falling(&s, r - ip - 1);
        }
        c[i] = sign(i) * rest / falling(&s, r - i - 1);
    }
    Ok(c[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operkit::laurent::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Laurent {
        Laurent::from_terms(
            (lo..=hi).map(|e| (e, rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)))),
        )
    }

    fn random_op(rng: &mut ChaCha8Rng, r: usize) -> MatrixDiffOp {
        let mut m = vec![vec![Laurent::zero(); r]; r];
        for i in 0..r {
            for j in i..r {
                m[i][j] = random_poly(rng, -1, 2);
            }
            if i > 0 {
                m[i][i - 1] = Laurent::one();
            }
        }
        let tr = (0..r - 1).fold(Laurent::zero(), |acc, i| &acc + &m[i][i]);
        m[r - 1][r - 1] = -&tr;
        MatrixDiffOp::new(m).unwrap()
    }

    fn random_gauge(rng: &mut ChaCha8Rng, r: usize) -> Vec<Vec<Laurent>> {
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        if j > i {
                            random_poly(rng, -2, 2)
                        } else {
                            Laurent::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn sl2_completion() {
        let a = Laurent::from_terms([(-1, rat(1, 2)), (2, rat(3, 1))]);
        let b = Laurent::from_terms([(0, rat(-7, 5)), (1, rat(1, 1))]);
        let op =
            MatrixDiffOp::new(vec![vec![a.clone(), b.clone()], vec![Laurent::one(), -&a]]).unwrap();
        let cf = canonical_form(&op).unwrap();
        assert_eq!(cf.v, vec![&(&b + &(&a * &a)) + &a.derivative()]);
    }

    #[test]
    fn canonical_is_idempotent_and_gauge_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in 2..=4 {
            for _ in 0..10 {
                let op = random_op(&mut rng, r);
                let cf = canonical_form(&op).unwrap();
                let gauged = op.gauge(&random_gauge(&mut rng, r)).unwrap();
                assert_eq!(canonical_form(&gauged).unwrap(), cf);
                let mut m = vec![vec![Laurent::zero(); r]; r];
                for i in 1..r {
                    m[i][i - 1] = Laurent::one();
                }
                for (j, v) in cf.v.iter().enumerate() {
                    m[0][j + 1] = v.clone();
                }
                let comp = MatrixDiffOp::new(m).unwrap();
                assert_eq!(canonical_form(&comp).unwrap(), cf);
            }
        }
    }

    #[test]
    fn malformed_input_rejected() {
        let bad = vec![
            vec![Laurent::zero(), Laurent::zero()],
            vec![Laurent::t(), Laurent::zero()],
        ];
        assert!(MatrixDiffOp::new(bad).is_err());
        let traced = vec![
            vec![Laurent::one(), Laurent::zero()],
            vec![Laurent::one(), Laurent::zero()],
        ];
        assert!(MatrixDiffOp::new(traced).is_err());
    }

    #[test]
    fn miura_two_factors() {
        let u = Laurent::from_terms([(-1, rat(2, 3)), (1, rat(1, 1))]);
        let op = miura(&[u.clone(), -&u]).unwrap();
        let expected = -&(&(&u * &u) - &u.derivative());
        assert_eq!(op.coeffs, vec![expected, Laurent::zero(), Laurent::one()]);
        let op = miura(&[-&u, u.clone()]).unwrap();
        assert_eq!(op.coeffs[0], -&(&(&u * &u) + &u.derivative()));
        let zero = miura(&[Laurent::zero(), Laurent::zero(), Laurent::zero()]).unwrap();
        assert_eq!(
            zero.coeffs,
            vec![
                Laurent::zero(),
                Laurent::zero(),
                Laurent::zero(),
                Laurent::one()
            ]
        );
        assert!(miura(&[u.clone(), u]).is_err());
    }

    #[test]
    fn miura_matches_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u1 = random_poly(&mut rng, -1, 1);
        let u2 = random_poly(&mut rng, -1, 1);
        let u3 = -&(&u1 + &u2);
        let op = miura(&[u1.clone(), u2.clone(), u3.clone()]).unwrap();
        for m in 0..=5 {
            let f = Laurent::monomial(rat(1, 1), m);
            let mut g = f.clone();
            for u in [&u3, &u2, &u1] {
                g = &g.derivative() - &(u * &g);
            }
            assert_eq!(op.apply(&f), g);
        }
    }

    #[test]
    fn diagonal_connection_reduces_to_miura() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for r in 2..=4 {
            let mut a: Vec<Laurent> = (0..r - 1).map(|_| random_poly(&mut rng, -1, 1)).collect();
            a.push(-&a.iter().fold(Laurent::zero(), |acc, x| &acc + x));
            let cf = canonical_form(&MatrixDiffOp::diagonal(&a).unwrap()).unwrap();
            let neg: Vec<Laurent> = a.iter().map(|x| -x).collect();
            assert_eq!(cf.scalar_operator(), miura(&neg).unwrap());
        }
    }

    #[test]
    fn c_of_nu_examples() {
        let nu = rat(3, 7);
        assert_eq!(
            c_of_nu(&[nu.clone(), -nu.clone()]).unwrap(),
            vec![&nu * (&nu + rat(1, 1))]
        );
        assert_eq!(c_of_nu(&vec![rat(0, 1); 4]).unwrap(), vec![rat(0, 1); 3]);
        assert!(c_of_nu(&[rat(1, 1), rat(1, 1)]).is_err());
    }

    #[test]
    fn c_of_nu_matches_miura() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in 2..=5 {
            for _ in 0..5 {
                let mut nu: Vec<BigRational> = (0..r - 1)
                    .map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
                    .collect();
                let s = nu.iter().fold(rat(0, 1), |a, x| a + x);
                nu.push(-s);
                let c = c_of_nu(&nu).unwrap();
                let us: Vec<Laurent> = nu
                    .iter()
                    .map(|x| Laurent::monomial(x.clone(), -1))
                    .collect();
                let op = miura(&us).unwrap();
                assert!(op.coeffs[r - 1].is_zero());
                for i in 1..r {
                    let sign = if i % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
                    assert_eq!(
                        op.coeffs[r - i - 1],
                        Laurent::monomial(sign * &c[i - 1], -(i as i64) - 1)
                    );
                }
            }
        }
    }
}
