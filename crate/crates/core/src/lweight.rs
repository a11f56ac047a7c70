//! Monomial ℓ-weights on a q-lattice and the ℤ-module of formal characters.
//!
//! A spectral point `a q^{k/2}` is stored as the half-integer [`ShiftIndex`];
//! since `q` is never a root of unity, two points are equal exactly when their
//! indices are. Weights live in the fundamental-weight basis with coefficients
//! in `½ℤ`, which is enough to hold the brackets `[±α_i/2]`.
//!
//! Text form (nodes are 1-based): `P[1,-1] P[1,+1]^-1 @w(0,1/2)`. An empty
//! monomial prints as `1`; a formal sum prints as `c*term + c*term`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::liedata::{AlgebraData, Q64};

/// Lattice index of the spectral point `a q^{k/den}` with `den` in {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ShiftIndex {
    twice: i64,
}

impl ShiftIndex {
    pub const ZERO: ShiftIndex = ShiftIndex { twice: 0 };

    /// `num / den`, where `den` must be 1 or 2.
    pub fn new(num: i64, den: i64) -> Result<ShiftIndex> {
        match den {
            1 => Ok(ShiftIndex { twice: 2 * num }),
            2 => Ok(ShiftIndex { twice: num }),
            _ => Err(Error::Lattice(format!(
                "shift denominator {den} is not 1 or 2"
            ))),
        }
    }

    pub const fn int(k: i64) -> ShiftIndex {
        ShiftIndex { twice: 2 * k }
    }

    pub const fn from_halves(h: i64) -> ShiftIndex {
        ShiftIndex { twice: h }
    }

    pub const fn halves(self) -> i64 {
        self.twice
    }

    pub fn is_integral(self) -> bool {
        self.twice % 2 == 0
    }

    /// `(numerator, denominator)` in lowest terms.
    pub fn parts(self) -> (i64, i64) {
        if self.is_integral() {
            (self.twice / 2, 1)
        } else {
            (self.twice, 2)
        }
    }

    pub fn as_ratio(self) -> Q64 {
        Q64::new(self.twice, 2)
    }
}

impl From<i64> for ShiftIndex {
    fn from(k: i64) -> Self {
        ShiftIndex::int(k)
    }
}

impl Add for ShiftIndex {
    type Output = ShiftIndex;
    fn add(self, o: ShiftIndex) -> ShiftIndex {
        ShiftIndex {
            twice: self.twice + o.twice,
        }
    }
}

impl Sub for ShiftIndex {
    type Output = ShiftIndex;
    fn sub(self, o: ShiftIndex) -> ShiftIndex {
        ShiftIndex {
            twice: self.twice - o.twice,
        }
    }
}

impl fmt::Display for ShiftIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.parts();
        let sign = if n > 0 { "+" } else { "" };
        if d == 1 {
            write!(f, "{sign}{n}")
        } else {
            write!(f, "{sign}{n}/2")
        }
    }
}

impl FromStr for ShiftIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<ShiftIndex> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: i64 = num
            .trim_start_matches('+')
            .parse()
            .map_err(|_| Error::Parse(format!("bad shift `{s}`")))?;
        let den: i64 = den
            .parse()
            .map_err(|_| Error::Parse(format!("bad shift `{s}`")))?;
        ShiftIndex::new(num, den)
    }
}

/// Sparse product `Π Ψ_{i,k}^{e}`; zero exponents are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PsiMonomial(BTreeMap<(usize, ShiftIndex), i64>);

impl PsiMonomial {
    pub fn one() -> PsiMonomial {
        PsiMonomial(BTreeMap::new())
    }

    pub fn single(i: usize, k: ShiftIndex, e: i64) -> PsiMonomial {
        let mut m = PsiMonomial::one();
        m.add_factor(i, k, e);
        m
    }

    pub fn add_factor(&mut self, i: usize, k: ShiftIndex, e: i64) {
        if e == 0 {
            return;
        }
        let slot = self.0.entry((i, k)).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.0.remove(&(i, k));
        }
    }

    pub fn exponent(&self, i: usize, k: ShiftIndex) -> i64 {
        self.0.get(&(i, k)).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (usize, ShiftIndex, i64)> + '_ {
        self.0.iter().map(|(&(i, k), &e)| (i, k, e))
    }

    pub fn mul(&self, o: &PsiMonomial) -> PsiMonomial {
        let mut out = self.clone();
        for (&(i, k), &e) in &o.0 {
            out.add_factor(i, k, e);
        }
        out
    }

    pub fn pow(&self, n: i64) -> PsiMonomial {
        PsiMonomial(
            self.0
                .iter()
                .filter(|_| n != 0)
                .map(|(&key, &e)| (key, e * n))
                .collect(),
        )
    }

    pub fn inv(&self) -> PsiMonomial {
        self.pow(-1)
    }

    /// Translates every spectral point by `q^{delta}`.
    pub fn shifted(&self, delta: ShiftIndex) -> PsiMonomial {
        PsiMonomial(
            self.0
                .iter()
                .map(|(&(i, k), &e)| ((i, k + delta), e))
                .collect(),
        )
    }
}

impl fmt::Display for PsiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (n, (&(i, k), &e)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "P[{},{}]", i + 1, k)?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Weight in the fundamental-weight basis, coefficients in ½ℤ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightVector {
    half: Vec<i64>,
}

impl WeightVector {
    pub fn zero(rank: usize) -> WeightVector {
        WeightVector {
            half: vec![0; rank],
        }
    }

    /// Builds from rational coordinates; each must lie in ½ℤ.
    pub fn from_ratios(c: &[Q64]) -> Result<WeightVector> {
        c.iter()
            .map(|x| {
                let h = *x * Q64::from_integer(2);
                if h.is_integer() {
                    Ok(h.to_integer())
                } else {
                    Err(Error::Lattice(format!(
                        "weight coefficient {x} is not in (1/2)Z"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(|half| WeightVector { half })
    }

    pub fn from_halves(half: Vec<i64>) -> WeightVector {
        WeightVector { half }
    }

    pub fn omega(rank: usize, i: usize) -> WeightVector {
        let mut w = WeightVector::zero(rank);
        w.half[i] = 2;
        w
    }

    /// `α_i = Σ_j C_ji ω_j`.
    pub fn alpha(alg: &AlgebraData, i: usize) -> WeightVector {
        WeightVector {
            half: alg.alpha_in_omega(i).into_iter().map(|c| 2 * c).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.half.len()
    }

    pub fn halves(&self) -> &[i64] {
        &self.half
    }

    pub fn coords(&self) -> Vec<Q64> {
        self.half.iter().map(|&h| Q64::new(h, 2)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.half.iter().all(|&h| h == 0)
    }

    pub fn try_add(&self, o: &WeightVector) -> Result<WeightVector> {
        if self.rank() != o.rank() {
            return Err(Error::Lattice(format!(
                "weights of rank {} and {}",
                self.rank(),
                o.rank()
            )));
        }
        Ok(WeightVector {
            half: self.half.iter().zip(&o.half).map(|(a, b)| a + b).collect(),
        })
    }

    /// `n · self` for integer `n`.
    pub fn scale(&self, n: i64) -> WeightVector {
        WeightVector {
            half: self.half.iter().map(|h| h * n).collect(),
        }
    }

    /// `self / 2`; fails unless every coordinate stays in ½ℤ.
    pub fn halved(&self) -> Result<WeightVector> {
        if self.half.iter().any(|h| h % 2 != 0) {
            return Err(Error::Lattice("halving leaves (1/2)Z".into()));
        }
        Ok(WeightVector {
            half: self.half.iter().map(|h| h / 2).collect(),
        })
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@w(")?;
        for (n, &h) in self.half.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            if h % 2 == 0 {
                write!(f, "{}", h / 2)?;
            } else {
                write!(f, "{h}/2")?;
            }
        }
        write!(f, ")")
    }
}

/// A monomial ℓ-weight together with a weight-lattice bracket `[ω]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LWeightTerm {
    pub psi: PsiMonomial,
    pub weight: WeightVector,
}

impl LWeightTerm {
    pub fn one(rank: usize) -> LWeightTerm {
        LWeightTerm {
            psi: PsiMonomial::one(),
            weight: WeightVector::zero(rank),
        }
    }

    pub fn rank(&self) -> usize {
        self.weight.rank()
    }

    pub fn is_one(&self) -> bool {
        self.psi.is_one() && self.weight.is_zero()
    }

    pub fn try_mul(&self, o: &LWeightTerm) -> Result<LWeightTerm> {
        Ok(LWeightTerm {
            psi: self.psi.mul(&o.psi),
            weight: self.weight.try_add(&o.weight)?,
        })
    }

    pub fn inv(&self) -> LWeightTerm {
        self.pow(-1)
    }

    pub fn pow(&self, n: i64) -> LWeightTerm {
        LWeightTerm {
            psi: self.psi.pow(n),
            weight: self.weight.scale(n),
        }
    }

    pub fn shifted(&self, delta: ShiftIndex) -> LWeightTerm {
        LWeightTerm {
            psi: self.psi.shifted(delta),
            weight: self.weight.clone(),
        }
    }
}

impl Mul for &LWeightTerm {
    type Output = LWeightTerm;
    /// Panics if the ranks differ; use [`LWeightTerm::try_mul`] to get an error instead.
    fn mul(self, o: &LWeightTerm) -> LWeightTerm {
        self.try_mul(o)
            .expect("multiplying terms of different rank")
    }
}

impl Mul for LWeightTerm {
    type Output = LWeightTerm;
    fn mul(self, o: LWeightTerm) -> LWeightTerm {
        &self * &o
    }
}

impl fmt::Display for LWeightTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.psi, self.weight)
    }
}

impl FromStr for LWeightTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<LWeightTerm> {
        let s = s.trim();
        let at = s
            .rfind("@w(")
            .ok_or_else(|| Error::Parse(format!("missing weight in `{s}`")))?;
        let (psi_part, w_part) = s.split_at(at);
        let inner = w_part
            .strip_prefix("@w(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("bad weight `{w_part}`")))?;
        let mut half = Vec::new();
        if !inner.trim().is_empty() {
            for tok in inner.split(',') {
                let tok = tok.trim();
                let h = match tok.split_once('/') {
                    Some((n, "2")) => n.parse::<i64>().ok(),
                    Some(_) => None,
                    None => tok.parse::<i64>().ok().map(|v| 2 * v),
                };
                half.push(
                    h.ok_or_else(|| Error::Parse(format!("bad weight coefficient `{tok}`")))?,
                );
            }
        }
        let mut psi = PsiMonomial::one();
        let psi_part = psi_part.trim();
        if psi_part != "1" {
            for fac in psi_part.split_whitespace() {
                let (base, exp) = match fac.split_once('^') {
                    Some((b, e)) => (
                        b,
                        e.parse::<i64>()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{fac}`")))?,
                    ),
                    None => (fac, 1),
                };
                let body = base
                    .strip_prefix("P[")
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| Error::Parse(format!("bad factor `{fac}`")))?;
                let (node, shift) = body
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad factor `{fac}`")))?;
                let node: usize = node
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad node in `{fac}`")))?;
                if node == 0 || node > half.len() {
                    return Err(Error::Parse(format!("node {node} out of range in `{fac}`")));
                }
                psi.add_factor(node - 1, shift.parse()?, exp);
            }
        }
        Ok(LWeightTerm {
            psi,
            weight: WeightVector { half },
        })
    }
}

/// Finite ℤ-linear combination of [`LWeightTerm`]s.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrothElement(BTreeMap<LWeightTerm, i64>);

impl GrothElement {
    pub fn zero() -> GrothElement {
        GrothElement(BTreeMap::new())
    }

    pub fn one(rank: usize) -> GrothElement {
        GrothElement::from_term(LWeightTerm::one(rank))
    }

    pub fn from_term(t: LWeightTerm) -> GrothElement {
        let mut g = GrothElement::zero();
        g.add_term(t, 1);
        g
    }

    pub fn add_term(&mut self, t: LWeightTerm, c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.0.entry(t.clone()).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.0.remove(&t);
        }
    }

    pub fn coefficient(&self, t: &LWeightTerm) -> i64 {
        self.0.get(t).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&LWeightTerm, i64)> {
        self.0.iter().map(|(t, &c)| (t, c))
    }

    pub fn try_mul(&self, o: &GrothElement) -> Result<GrothElement> {
        let mut out = GrothElement::zero();
        for (a, ca) in &self.0 {
            for (b, cb) in &o.0 {
                out.add_term(a.try_mul(b)?, ca * cb);
            }
        }
        Ok(out)
    }

    /// Multiplies every term by the monomial `t`.
    pub fn mul_term(&self, t: &LWeightTerm) -> Result<GrothElement> {
        let mut out = GrothElement::zero();
        for (a, &c) in &self.0 {
            out.add_term(a.try_mul(t)?, c);
        }
        Ok(out)
    }

    pub fn scale(&self, n: i64) -> GrothElement {
        let mut out = GrothElement::zero();
        for (t, &c) in &self.0 {
            out.add_term(t.clone(), c * n);
        }
        out
    }

    pub fn pow(&self, n: u32, rank: usize) -> Result<GrothElement> {
        let mut acc = GrothElement::one(rank);
        for _ in 0..n {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// Keeps the terms accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&LWeightTerm) -> bool) -> GrothElement {
        GrothElement(
            self.0
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, &c)| (t.clone(), c))
                .collect(),
        )
    }
}

impl AddAssign<&GrothElement> for GrothElement {
    fn add_assign(&mut self, o: &GrothElement) {
        for (t, &c) in &o.0 {
            self.add_term(t.clone(), c);
        }
    }
}

impl Add for &GrothElement {
    type Output = GrothElement;
    fn add(self, o: &GrothElement) -> GrothElement {
        let mut out = self.clone();
        out += o;
        out
    }
}

impl Sub for &GrothElement {
    type Output = GrothElement;
    fn sub(self, o: &GrothElement) -> GrothElement {
        let mut out = self.clone();
        out += &o.scale(-1);
        out
    }
}

impl Neg for &GrothElement {
    type Output = GrothElement;
    fn neg(self) -> GrothElement {
        self.scale(-1)
    }
}

impl Mul for &GrothElement {
    type Output = GrothElement;
    /// Panics on mixed ranks; see [`GrothElement::try_mul`].
    fn mul(self, o: &GrothElement) -> GrothElement {
        self.try_mul(o)
            .expect("multiplying elements of different rank")
    }
}

impl fmt::Display for GrothElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (n, (t, c)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{t}")?;
        }
        Ok(())
    }
}

impl FromStr for GrothElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<GrothElement> {
        let s = s.trim();
        let mut g = GrothElement::zero();
        if s == "0" {
            return Ok(g);
        }
        for part in s.split(" + ") {
            let (c, t) = part
                .split_once('*')
                .ok_or_else(|| Error::Parse(format!("missing coefficient in `{part}`")))?;
            let c: i64 = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{c}`")))?;
            g.add_term(t.parse()?, c);
        }
        Ok(g)
    }
}

fn shift_by(k: impl Into<ShiftIndex>, delta: i64) -> ShiftIndex {
    k.into() + ShiftIndex::int(delta)
}

/// `Ψ_{i,k}` with zero weight.
pub fn psi(alg: &AlgebraData, i: usize, k: impl Into<ShiftIndex>) -> Result<LWeightTerm> {
    alg.check_node(i)?;
    Ok(LWeightTerm {
        psi: PsiMonomial::single(i, k.into(), 1),
        weight: WeightVector::zero(alg.rank),
    })
}

/// The one-dimensional class `[w]`.
pub fn bracket(w: WeightVector) -> LWeightTerm {
    LWeightTerm {
        psi: PsiMonomial::one(),
        weight: w,
    }
}

/// `Ỹ_{i,k} = Ψ_{i,k-d_i} Ψ_{i,k+d_i}^{-1}`.
pub fn y_tilde(alg: &AlgebraData, i: usize, k: impl Into<ShiftIndex>) -> Result<LWeightTerm> {
    alg.check_node(i)?;
    let k = k.into();
    let d = alg.sym[i];
    let mut m = PsiMonomial::one();
    m.add_factor(i, shift_by(k, -d), 1);
    m.add_factor(i, shift_by(k, d), -1);
    Ok(LWeightTerm {
        psi: m,
        weight: WeightVector::zero(alg.rank),
    })
}

/// `Ã_{i,k} = [-α_i] A_{i,k}` written in Ψ's.
pub fn a_tilde(alg: &AlgebraData, i: usize, k: impl Into<ShiftIndex>) -> Result<LWeightTerm> {
    alg.check_node(i)?;
    let k = k.into();
    let di = alg.sym[i];
    let mut m = PsiMonomial::one();
    m.add_factor(i, shift_by(k, -2 * di), 1);
    m.add_factor(i, shift_by(k, 2 * di), -1);
    for j in alg.neighbors(i) {
        let dj = alg.sym[j];
        let s = di.max(dj);
        m.add_factor(j, shift_by(k, -s), -1);
        m.add_factor(j, shift_by(k, s), 1);
    }
    Ok(LWeightTerm {
        psi: m,
        weight: WeightVector::zero(alg.rank),
    })
}

/// `A_{i,k} = [α_i] Ã_{i,k}`.
pub fn a_monomial(alg: &AlgebraData, i: usize, k: impl Into<ShiftIndex>) -> Result<LWeightTerm> {
    let at = a_tilde(alg, i, k)?;
    Ok(LWeightTerm {
        psi: at.psi,
        weight: WeightVector::alpha(alg, i),
    })
}

/// Highest ℓ-weight `Ψ̃_{i,k}` of `X_{i,k}`.
pub fn psi_tilde(alg: &AlgebraData, i: usize, k: impl Into<ShiftIndex>) -> Result<LWeightTerm> {
    alg.check_node(i)?;
    let k = k.into();
    let di = alg.sym[i];
    let mut m = PsiMonomial::one();
    m.add_factor(i, k, -1);
    for j in alg.neighbors(i) {
        let shifts: &[i64] = match alg.cartan[i][j] {
            -1 => &[di],
            -2 => &[0, 2],
            -3 => &[-1, 1, 3],
            c => return Err(Error::Invalid(format!("unexpected Cartan entry {c}"))),
        };
        for &s in shifts {
            m.add_factor(j, shift_by(k, s), 1);
        }
    }
    Ok(LWeightTerm {
        psi: m,
        weight: WeightVector::zero(alg.rank),
    })
}
