//! Coordinate changes of second-order operators and the parameter dictionary
//! between the z-form oper, the x-form Schrödinger operator and the Virasoro
//! data.

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liedata::{dual_alpha, AlgebraData, Q64};

/// Value and first three derivatives of a map at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

pub trait CoordinateMap {
    fn jet(&self, x: f64) -> Result<Jet>;
}

/// `φ(x) = coeff · x^exponent` on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerMap {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerMap {
    pub fn inverse(&self) -> Result<PowerMap> {
        if self.coeff <= 0.0 || self.exponent == 0.0 {
            return Err(Error::Invalid(
                "power map is not invertible on x > 0".into(),
            ));
        }
        Ok(PowerMap {
            coeff: self.coeff.powf(-1.0 / self.exponent),
            exponent: 1.0 / self.exponent,
        })
    }
}

impl CoordinateMap for PowerMap {
    fn jet(&self, x: f64) -> Result<Jet> {
        if x <= 0.0 {
            return Err(Error::Invalid(format!(
                "power map evaluated at x = {x} <= 0"
            )));
        }
        let (c, a) = (self.coeff, self.exponent);
        Ok(Jet {
            f: c * x.powf(a),
            d1: c * a * x.powf(a - 1.0),
            d2: c * a * (a - 1.0) * x.powf(a - 2.0),
            d3: c * a * (a - 1.0) * (a - 2.0) * x.powf(a - 3.0),
        })
    }
}

impl<F: Fn(f64) -> f64> CoordinateMap for F {
    /// Central differences on a 7-point stencil of width `6h`, `h = 1e-2·max(|x|, 1)`.
    fn jet(&self, x: f64) -> Result<Jet> {
        let h = 1e-2 * x.abs().max(1.0);
        let s: Vec<f64> = (-3..=3).map(|i| self(x + i as f64 * h)).collect();
        Ok(Jet {
            f: s[3],
            d1: (-s[0] + 9.0 * s[1] - 45.0 * s[2] + 45.0 * s[4] - 9.0 * s[5] + s[6]) / (60.0 * h),
            d2: (2.0 * s[0] - 27.0 * s[1] + 270.0 * s[2] - 490.0 * s[3] + 270.0 * s[4]
                - 27.0 * s[5]
                + 2.0 * s[6])
                / (180.0 * h * h),
            d3: (s[0] - 8.0 * s[1] + 13.0 * s[2] - 13.0 * s[4] + 8.0 * s[5] - s[6])
                / (8.0 * h * h * h),
        })
    }
}

/// `{φ, x} = φ‴/φ′ − (3/2)(φ″/φ′)²`.
pub fn schwarzian(j: &Jet) -> Result<f64> {
    if j.d1 == 0.0 || !j.d1.is_finite() {
        return Err(Error::Invalid(
            "schwarzian needs a nonzero finite first derivative".into(),
        ));
    }
    let r = j.d2 / j.d1;
    Ok(j.d3 / j.d1 - 1.5 * r * r)
}

pub fn schwarzian_at<M: CoordinateMap + ?Sized>(map: &M, x: f64) -> Result<f64> {
    schwarzian(&map.jet(x)?)
}

/// Potential of `∂² − v` after `z = φ(x)`: `v(φ(x)) φ′² − ½{φ, x}`.
pub fn transform_projective<V, M>(v: V, map: &M, x: f64) -> Result<f64>
where
    V: Fn(f64) -> f64,
    M: CoordinateMap + ?Sized,
{
    let j = map.jet(x)?;
    let s = schwarzian(&j)?;
    Ok(v(j.f) * j.d1 * j.d1 - 0.5 * s)
}

fn ser_q<S: serde::Serializer>(x: &Q64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn q(n: i64) -> Q64 {
    Q64::from_integer(n)
}

fn qf(x: Q64) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parameters attached to spin `r` and level `k` for sl2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlConstants {
    #[serde(serialize_with = "ser_q")]
    pub r: Q64,
    #[serde(serialize_with = "ser_q")]
    pub k: Q64,
    #[serde(serialize_with = "ser_q")]
    pub central_charge: Q64,
    #[serde(serialize_with = "ser_q")]
    pub delta: Q64,
    #[serde(serialize_with = "ser_q")]
    pub alpha: Q64,
    #[serde(serialize_with = "ser_q")]
    pub beta2: Q64,
    /// Root with `2ℓ + 1 = 2(α+1)(2r+1)`; the other root is `−1 − ℓ`.
    #[serde(serialize_with = "ser_q")]
    pub ell: Q64,
    /// `z = x^p / p²` with `p = 2α + 2`.
    #[serde(serialize_with = "ser_q")]
    pub map_exponent: Q64,
    /// `E = factor · λ`.
    pub e_over_lambda: f64,
}

impl SlConstants {
    pub fn z_to_x_map(&self) -> PowerMap {
        let p = qf(self.map_exponent);
        PowerMap {
            coeff: 1.0 / (p * p),
            exponent: p,
        }
    }

    /// `ℓ(ℓ+1)/x² + x^{2α} − E`, the x-form potential for `m = 0`.
    pub fn x_potential(&self, e: f64) -> impl Fn(f64) -> f64 {
        let ll = qf(self.ell * (self.ell + q(1)));
        let a2 = 2.0 * qf(self.alpha);
        move |x| ll / (x * x) + x.powf(a2) - e
    }

    /// `r(r+1)/z² + 1/z + λ z^k`, the z-form potential for `m = 0`.
    pub fn z_potential(&self, lambda: f64) -> impl Fn(f64) -> f64 {
        let rr = qf(self.r * (self.r + q(1)));
        let k = qf(self.k);
        move |z| rr / (z * z) + 1.0 / z + lambda * z.powf(k)
    }

    /// True when the displayed relations between the constants all hold exactly.
    pub fn identities_hold(&self) -> bool {
        let (a, r, k) = (self.alpha, self.r, self.k);
        let ll = self.ell * (self.ell + q(1));
        let quarter = Q64::new(1, 4);
        ll == q(4) * (a + q(1)) * (a + q(1)) * r * (r + q(1)) + a * a + q(2) * a + Q64::new(3, 4)
            && ll == q(4) * (a + q(1)) * self.delta + a * a - quarter
            && self.delta == ((q(2) * self.ell + q(1)).pow(2) - q(4) * a * a) / (q(16) * (a + q(1)))
            && self.central_charge == q(1) - q(6) * a * a / (a + q(1))
            && self.beta2 * (a + q(1)) == q(1)
            && a == -(k + q(1)) / (k + q(2))
    }

    /// Half-integer `ℓ` makes `2ℓ+1` an integer and the small-x series resonant.
    pub fn resonant(&self) -> bool {
        (q(2) * self.ell + q(1)).is_integer()
    }
}

pub fn constants(r: Q64, k: Q64) -> Result<SlConstants> {
    if k == q(-2) {
        return Err(Error::Invalid("level k = -2 is excluded".into()));
    }
    let kp2 = k + q(2);
    let alpha = -(k + q(1)) / kp2;
    let ap1 = alpha + q(1);
    let p = q(2) * ap1;
    Ok(SlConstants {
        r,
        k,
        central_charge: q(1) - q(6) * (k + q(1)) * (k + q(1)) / kp2,
        delta: ((q(2) * r + q(1)).pow(2) - (k + q(1)).pow(2)) / (q(4) * kp2),
        alpha,
        beta2: q(1) / ap1,
        ell: ap1 * (q(2) * r + q(1)) - Q64::new(1, 2),
        map_exponent: p,
        e_over_lambda: -qf(p).powf(qf(q(2) * alpha / ap1)),
    })
}

/// Scalar data for a general simple algebra at level `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralConstants {
    pub algebra: String,
    pub dual_coxeter: i64,
    pub lacing: i64,
    #[serde(serialize_with = "ser_q")]
    pub k: Q64,
    #[serde(serialize_with = "ser_q")]
    pub alpha: Q64,
    #[serde(serialize_with = "ser_q")]
    pub beta2: Q64,
    /// `z = x^a / a^{h∨}` with `a = h∨(α+1)`.
    #[serde(serialize_with = "ser_q")]
    pub map_exponent: Q64,
    pub map_denominator: f64,
    pub e_over_lambda: f64,
    /// Parameter of the dual family, `α̌ + 1 = 1/(ř(α+1))`.
    #[serde(serialize_with = "ser_q")]
    pub dual_alpha: Q64,
}

impl GeneralConstants {
    /// `z^k (dz/dx)^{h∨}` has no x-dependence.
    pub fn spectral_term_is_constant(&self) -> bool {
        let h = q(self.dual_coxeter);
        let a = self.map_exponent;
        self.k * a + h * (a - q(1)) == Q64::zero()
    }

    pub fn z_to_x_map(&self) -> PowerMap {
        PowerMap {
            coeff: 1.0 / self.map_denominator,
            exponent: qf(self.map_exponent),
        }
    }
}

pub fn general_constants(alg: &AlgebraData, k: Q64) -> Result<GeneralConstants> {
    let h = alg.dual_coxeter;
    if k == q(-h) {
        return Err(Error::Invalid(format!(
            "level k = -{h} is excluded for {}",
            alg.name()
        )));
    }
    let alpha = -(k + q(h - 1)) / (k + q(h));
    let ap1 = alpha + q(1);
    let a = q(h) * ap1;
    let lacing = alg
        .cartan
        .iter()
        .flat_map(|row| row.iter().copied())
        .filter(|c| *c < 0)
        .map(|c| -c)
        .max()
        .unwrap_or(1);
    Ok(GeneralConstants {
        algebra: alg.name(),
        dual_coxeter: h,
        lacing,
        k,
        alpha,
        beta2: q(1) / ap1,
        map_exponent: a,
        map_denominator: qf(a).powi(h as i32),
        e_over_lambda: -qf(a).powf(qf(q(h) * alpha / ap1)),
        dual_alpha: dual_alpha(alpha, lacing)?,
    })
}
