//! Laurent polynomials in one variable with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Sparse map exponent → nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Laurent(BTreeMap<i64, BigRational>);

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent(BTreeMap::new())
    }

    pub fn one() -> Self {
        Laurent::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Laurent::monomial(c, 0)
    }

    pub fn monomial(c: BigRational, exp: i64) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(exp, c);
        }
        Laurent(m)
    }

    /// The variable `t` itself.
    pub fn t() -> Self {
        Laurent::monomial(BigRational::one(), 1)
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, BigRational)>>(terms: I) -> Self {
        let mut out = Laurent::zero();
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn add_term(&mut self, exp: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(exp).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, exp: i64) -> BigRational {
        self.0.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.0.iter().map(|(e, c)| (*e, c))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Laurent::zero();
        }
        Laurent(self.0.iter().map(|(e, x)| (*e, x * c)).collect())
    }

    pub fn derivative(&self) -> Self {
        Laurent::from_terms(
            self.0
                .iter()
                .map(|(e, c)| (e - 1, c * BigRational::from_integer(BigInt::from(*e)))),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * t.powi(*e as i32))
            .sum()
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (e, c) in &rhs.0 {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (e, c) in &rhs.0 {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent(self.0.iter().map(|(e, c)| (*e, -c.clone())).collect())
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &rhs.0 {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Laurent {
            type Output = Laurent;
            fn $f(self, rhs: Laurent) -> Laurent {
                (&self).$f(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.0.iter().rev().enumerate() {
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if n == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match *e {
                0 => write!(f, "{mag}")?,
                _ if mag.is_one() => {}
                _ => write!(f, "{mag}*")?,
            }
            match *e {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{e}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Laurent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_display() {
        let p = Laurent::from_terms([(-2, rat(3, 2)), (1, rat(1, 1))]);
        let q = Laurent::from_terms([(2, rat(-1, 1)), (1, rat(1, 1))]);
        assert_eq!(p.to_string(), "t + 3/2*t^-2");
        assert_eq!((&p - &p), Laurent::zero());
        let prod = &p * &q;
        assert_eq!(prod.coefficient(3), rat(-1, 1));
        assert_eq!(prod.coefficient(0), rat(-3, 2));
        assert_eq!(prod.coefficient(-1), rat(3, 2));
        assert_eq!(
            p.derivative(),
            Laurent::from_terms([(-3, rat(-3, 1)), (0, rat(1, 1))])
        );
        assert!((p.eval(2.0) - (2.0 + 3.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn leibniz() {
        let p = Laurent::from_terms([(-1, rat(2, 3)), (0, rat(1, 1)), (4, rat(-5, 7))]);
        let q = Laurent::from_terms([(-3, rat(1, 1)), (2, rat(1, 2))]);
        assert_eq!(
            (&p * &q).derivative(),
            &(&p.derivative() * &q) + &(&p * &q.derivative())
        );
    }
}
