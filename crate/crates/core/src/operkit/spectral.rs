//! Spectral determinant `Q(E)` of `−ψ″ + (ℓ(ℓ+1)/x² + x^{2α})ψ = Eψ` on `x > 0`.
//!
//! Normalization: `ψ(x, E)` is the solution with
//! `ψ ~ x^{−α/2} exp(−S(x))` as `x → ∞`, where `S` is the sum of the pure
//! powers in the large-x expansion of `∫√P` (plus `−(E/2)ln x` when `α = 1`).
//! Near `x = 0`, `ψ = Q(E) ψ₋ + (…) ψ₊` with `ψ₋ = x^{−ℓ}(1 + …)` and
//! `ψ₊ = x^{ℓ+1}(1 + …)`. Only zeros of `Q` and ratios of its values are
//! convention independent.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::ode::{integrate, OdeOptions, C64};
use crate::error::{Error, Result};

/// The x-form operator with `m = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XOper {
    pub alpha: f64,
    pub ell: f64,
}

impl XOper {
    pub fn new(alpha: f64, ell: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Invalid(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(ell > -0.5 && ell.is_finite()) {
            return Err(Error::Invalid(format!("ell must exceed -1/2, got {ell}")));
        }
        Ok(XOper { alpha, ell })
    }

    fn l(&self) -> f64 {
        self.ell * (self.ell + 1.0)
    }

    /// `2ℓ + 1` within `1e-9` of an integer.
    pub fn resonant(&self) -> bool {
        let t = 2.0 * self.ell + 1.0;
        (t - t.round()).abs() < 1e-9
    }

    /// `β² = 1/(α+1)`.
    pub fn beta2(&self) -> f64 {
        1.0 / (self.alpha + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QOptions {
    pub rtol: f64,
    pub x_min: f64,
    /// `None` selects [`default_x_max`].
    pub x_max: Option<f64>,
    pub series_order: usize,
}

impl Default for QOptions {
    fn default() -> Self {
        QOptions {
            rtol: 1e-11,
            x_min: 1e-3,
            x_max: None,
            series_order: 12,
        }
    }
}

/// `max((200(α+1))^{1/(α+1)}, (|E|+10)^{1/(2α)}·1.5)`: the leading WKB
/// exponent reaches 200 and `|E|` stays well below `x^{2α}`.
pub fn default_x_max(alpha: f64, e: C64) -> f64 {
    let subdominance = (200.0 * (alpha + 1.0)).powf(1.0 / (alpha + 1.0));
    ((e.norm() + 10.0).powf(1.0 / (2.0 * alpha)) * 1.5).max(subdominance)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QValue {
    pub e: C64,
    pub q: C64,
    pub x_max: f64,
    pub steps: usize,
}

/// `(ψ, ψ′)` at `x` for the Frobenius solution with leading term `x^s`.
fn frobenius(op: &XOper, s: f64, e: C64, x: f64, order: usize) -> Result<(C64, C64)> {
    let l = op.l();
    let step = 2.0 * op.alpha + 2.0;
    // c[m][n] multiplies x^{s + 2m + step·n}
    let mut c = vec![vec![Complex::new(0.0, 0.0); order + 1]; order + 1];
    c[0][0] = Complex::new(1.0, 0.0);
    let (mut val, mut der) = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    for tot in 0..=order {
        for m in 0..=tot {
            let n = tot - m;
            let ex = s + 2.0 * m as f64 + step * n as f64;
            if tot > 0 {
                let denom = ex * (ex - 1.0) - l;
                if denom.abs() < 1e-10 {
                    return Err(Error::Numerical(format!(
                        "small-x series is resonant at exponent {ex:.6} (2l+1 hits the lattice 2m + (2a+2)n)"
                    )));
                }
                let mut num = Complex::new(0.0, 0.0);
                if n > 0 {
                    num += c[m][n - 1];
                }
                if m > 0 {
                    num -= e * c[m - 1][n];
                }
                c[m][n] = num / denom;
            }
            let xe = x.powf(ex);
            val += c[m][n] * xe;
            der += c[m][n] * ex * xe / x;
        }
    }
    Ok((val, der))
}

fn p_value(op: &XOper, e: C64, x: f64) -> C64 {
    op.l() / (x * x) + x.powf(2.0 * op.alpha) - e
}

fn p_prime(op: &XOper, _e: C64, x: f64) -> C64 {
    let a = op.alpha;
    Complex::new(
        -2.0 * op.l() / x.powi(3) + 2.0 * a * x.powf(2.0 * a - 1.0),
        0.0,
    )
}

/// `(√P, y₂)` with `y₂ = (5P′²/(16P²) − P″/(4P)) / (2√P)`.
fn wkb_second_order(op: &XOper, e: C64, x: f64) -> (C64, C64) {
    let (a, l) = (op.alpha, op.l());
    let p = p_value(op, e, x);
    let p1 = p_prime(op, e, x);
    let p2 = 6.0 * l / x.powi(4) + 2.0 * a * (2.0 * a - 1.0) * x.powf(2.0 * a - 2.0);
    let u = (l / (x * x) - e) / x.powf(2.0 * a);
    let sq = x.powf(a) * (1.0 + u).sqrt();
    (
        sq,
        (-p2 / (4.0 * p) + 5.0 * p1 * p1 / (16.0 * p * p)) / (2.0 * sq),
    )
}

/// `∫_X^∞ y₂ dx` by Simpson's rule after `x = X/t²`.
fn wkb_tail(op: &XOper, e: C64, x: f64) -> C64 {
    let n = 2000;
    let h = 1.0 / n as f64;
    let f = |t: f64| -> C64 {
        if t == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        let xs = x / (t * t);
        wkb_second_order(op, e, xs).1 * (2.0 * x / (t * t * t))
    };
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// `ln ψ(X)` and `ψ′/ψ` at `X` from the large-x expansion.
fn wkb_start(op: &XOper, e: C64, x: f64) -> Result<(C64, C64)> {
    let (a, l) = (op.alpha, op.l());
    let u = (l / (x * x) - e) / x.powf(2.0 * a);
    if u.norm() > 0.9 {
        return Err(Error::Numerical(format!(
            "x_max = {x} is too small for E = {e}"
        )));
    }
    // S(X) = Σ_n Σ_m C(1/2, n) C(n, m) L^m (−E)^{n−m} ∫ x^{a − 2an − 2m}
    let mut s_val = Complex::new(0.0, 0.0);
    let mut b = 1.0;
    for n in 0..=80usize {
        if n > 0 {
            b *= (0.5 - (n as f64 - 1.0)) / n as f64;
        }
        let mut block = Complex::new(0.0, 0.0);
        let mut binom = 1.0;
        for m in 0..=n {
            if m > 0 {
                binom *= (n - m + 1) as f64 / m as f64;
            }
            let g1 = a - 2.0 * a * n as f64 - 2.0 * m as f64 + 1.0;
            let integral = if g1.abs() < 1e-12 {
                x.ln()
            } else {
                x.powf(g1) / g1
            };
            block += b * binom * l.powi(m as i32) * (-e).powi((n - m) as i32) * integral;
        }
        s_val += block;
        if n > 4 && block.norm() < 1e-18 * s_val.norm().max(1.0) {
            break;
        }
    }
    let (sq, y2) = wkb_second_order(op, e, x);
    let dlog = -sq - 0.25 * p_prime(op, e, x) / p_value(op, e, x) + y2;
    // odd orders sum to −½ d/dx ln(√P − y₂); even orders are integrated from ∞
    let tail = wkb_tail(op, e, x);
    let lnpsi = -s_val - 0.5 * a * x.ln() - 0.5 * ((1.0 + u).sqrt() - y2 / x.powf(a)).ln() - tail;
    Ok((lnpsi, dlog))
}

pub fn q_of_e(op: &XOper, e: C64, opts: &QOptions) -> Result<QValue> {
    let x_max = opts.x_max.unwrap_or_else(|| default_x_max(op.alpha, e));
    if !(opts.x_min > 0.0 && opts.x_min < x_max) {
        return Err(Error::Invalid(format!(
            "need 0 < x_min < x_max, got {} and {x_max}",
            opts.x_min
        )));
    }
    let (lnpsi, dlog) = wkb_start(op, e, x_max)?;
    let mut log_scale = lnpsi.re;
    let psi0 = Complex::from_polar(1.0, lnpsi.im);
    let (a2, l) = (2.0 * op.alpha, op.l());
    let rhs = |x: f64, y: &[C64; 2]| [y[1], (l / (x * x) + x.powf(a2) - e) * y[0]];
    let ode = OdeOptions {
        rtol: opts.rtol,
        h0: 1e-3,
        max_steps: 20_000_000,
    };
    let (y, stats) = integrate(rhs, x_max, [psi0, psi0 * dlog], opts.x_min, &ode, |y| {
        let n = y[0].norm().max(y[1].norm());
        if n > 1e150 || (n < 1e-150 && n > 0.0) {
            y[0] /= n;
            y[1] /= n;
            log_scale += n.ln();
        }
    })?;
    let (pm, dpm) = frobenius(op, -op.ell, e, opts.x_min, opts.series_order)?;
    let (pp, dpp) = frobenius(op, op.ell + 1.0, e, opts.x_min, opts.series_order)?;
    let w0 = pm * dpp - dpm * pp;
    let w1 = y[0] * dpp - y[1] * pp;
    let ratio = w1 / w0;
    if ratio == Complex::new(0.0, 0.0) {
        return Ok(QValue {
            e,
            q: ratio,
            x_max,
            steps: stats.accepted,
        });
    }
    let lnq = ratio.ln() + log_scale;
    if lnq.re > 700.0 {
        return Err(Error::Numerical(format!(
            "Q(E) overflows at E = {e} (ln|Q| = {:.1})",
            lnq.re
        )));
    }
    Ok(QValue {
        e,
        q: lnq.exp(),
        x_max,
        steps: stats.accepted,
    })
}

/// Leading density of eigenvalues, `(1/2π) E^{(1−α)/(2α)} ∫₀¹ dt/√(1−t^{2α})`.
fn level_density(alpha: f64, e: f64) -> f64 {
    let g = 1.0 / (2.0 * alpha);
    let b = PI.sqrt() * libm::tgamma(1.0 + g) / libm::tgamma(0.5 + g);
    b * e.max(1.0).powf((1.0 - alpha) / (2.0 * alpha)) / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QZero {
    pub e: f64,
    /// `|dQ/dE|` at the zero, divided by the typical `|Q|/spacing` nearby.
    pub slope: f64,
    pub bracket: (f64, f64),
}

/// `Q` for a fixed `(α, ℓ)` with a shared evaluation cache.
#[derive(Debug)]
pub struct QFunction {
    pub op: XOper,
    pub opts: QOptions,
    pub zeros: Vec<QZero>,
    pub warnings: Vec<String>,
    cache: RwLock<HashMap<(u64, u64), C64>>,
}

pub const NORMALIZATION_TAG: &str = "wkb-infinity/frobenius-x^-l";

impl QFunction {
    pub fn new(op: XOper, opts: QOptions) -> Self {
        let mut warnings = Vec::new();
        if op.resonant() {
            warnings.push(format!(
                "2l+1 = {} is an integer; the small-x basis may need log terms",
                2.0 * op.ell + 1.0
            ));
        }
        QFunction {
            op,
            opts,
            zeros: Vec::new(),
            warnings,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn normalization(&self) -> &'static str {
        NORMALIZATION_TAG
    }

    pub fn eval(&self, e: C64) -> Result<C64> {
        let key = (e.re.to_bits(), e.im.to_bits());
        if let Some(v) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = q_of_e(&self.op, e, &self.opts)?.q;
        self.cache.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn eval_many(&self, es: &[C64]) -> Vec<Result<C64>> {
        es.par_iter().map(|e| self.eval(*e)).collect()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    fn re_q(&self, e: f64) -> Result<f64> {
        Ok(self.eval(Complex::new(e, 0.0))?.re)
    }

    fn illinois(&self, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Result<f64> {
        let mut side = 0;
        for _ in 0..200 {
            let c = (a * fb - b * fa) / (fb - fa);
            if (b - a).abs() < 4e-15 * c.abs().max(1.0) {
                return Ok(c);
            }
            let fc = self.re_q(c)?;
            if fc == 0.0 {
                return Ok(c);
            }
            if (fc > 0.0) == (fb > 0.0) {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            } else {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            }
            if (b - a).abs() < 1e-13 * a.abs().max(1.0) {
                return Ok(if fa.abs() < fb.abs() { a } else { b });
            }
        }
        Err(Error::Numerical(format!(
            "zero refinement did not converge in [{a}, {b}]"
        )))
    }

    /// Locates the first `count` real zeros in `(0, e_max]` by a sign scan of
    /// `Q` on a grid finer than the local level spacing, then refines each
    /// bracket.
    pub fn find_zeros(&mut self, e_max: f64, count: usize) -> Result<&[QZero]> {
        let mut grid = vec![0.0];
        let mut e = 0.0;
        while e < e_max {
            e += 1.0 / (8.0 * level_density(self.op.alpha, e + 1.0));
            grid.push(e.min(e_max));
        }
        let pts: Vec<C64> = grid.iter().map(|x| Complex::new(*x, 0.0)).collect();
        let vals: Vec<f64> = self
            .eval_many(&pts)
            .into_iter()
            .map(|r| r.map(|q| q.re))
            .collect::<Result<_>>()?;
        let brackets: Vec<(usize, usize)> = (0..grid.len() - 1)
            .filter(|&i| vals[i] != 0.0 && (vals[i] > 0.0) != (vals[i + 1] > 0.0))
            .map(|i| (i, i + 1))
            .take(count)
            .collect();
        let this = &*self;
        let zeros: Vec<QZero> = brackets
            .par_iter()
            .map(|&(i, j)| {
                let z = this.illinois(grid[i], vals[i], grid[j], vals[j])?;
                let h = 1e-5 * z.max(1.0);
                let d = (this.re_q(z + h)? - this.re_q(z - h)?) / (2.0 * h);
                let typical = vals[i].abs().max(vals[j].abs()) / (grid[j] - grid[i]);
                Ok(QZero {
                    e: z,
                    slope: d.abs() / typical,
                    bracket: (grid[i], grid[j]),
                })
            })
            .collect::<Result<_>>()?;
        if zeros.len() < count {
            self.warnings.push(format!(
                "found {} of {count} requested zeros below E = {e_max}",
                zeros.len()
            ));
        }
        self.zeros = zeros;
        Ok(&self.zeros)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub beta2: f64,
    pub q: C64,
    pub zeros: Vec<f64>,
    /// `Q(q⁻²E_k) / Q(q²E_k)`.
    pub ratios: Vec<C64>,
    /// `max_k |R_k/R_1 − 1|`.
    pub spread: f64,
    /// Same with the shift `q^{∓1}` in place of `q^{∓2}`.
    pub control_spread: f64,
    /// `−q^{2ℓ+1}`.
    pub predicted: C64,
}

fn spread(r: &[C64]) -> f64 {
    r.iter()
        .map(|x| (x / r[0] - 1.0).norm())
        .fold(0.0, f64::max)
}

/// Bethe-ratio check on the zeros already stored in `qf`.
pub fn bae_ratio_check(qf: &QFunction, beta2: Option<f64>) -> Result<RatioReport> {
    let zeros: Vec<f64> = qf.zeros.iter().map(|z| z.e).collect();
    ratio_check_at(qf, &zeros, beta2)
}

/// Bethe-ratio check at arbitrary points, which lets callers perturb zeros.
pub fn ratio_check_at(qf: &QFunction, zeros: &[f64], beta2: Option<f64>) -> Result<RatioReport> {
    if zeros.len() < 2 {
        return Err(Error::Invalid("need at least two zeros".into()));
    }
    let beta2 = beta2.unwrap_or_else(|| qf.op.beta2());
    let q = Complex::from_polar(1.0, PI * beta2);
    let q2 = q * q;
    if q2.im.abs() < 1e-9 {
        return Err(Error::Invalid(format!(
            "beta^2 = {beta2} makes q^2 real; the shifted points degenerate"
        )));
    }
    let mut pts = Vec::with_capacity(4 * zeros.len());
    for &e in zeros {
        pts.extend([e / q2, e * q2, e / q, e * q]);
    }
    let vals = qf.eval_many(&pts);
    let mut ratios = Vec::new();
    let mut control = Vec::new();
    for (k, chunk) in vals.chunks(4).enumerate() {
        let get = |i: usize| -> Result<C64> {
            chunk[i].clone().map_err(|err| {
                Error::Numerical(format!(
                    "shifted evaluation for E_{} = {}: {err}",
                    k + 1,
                    zeros[k]
                ))
            })
        };
        ratios.push(get(0)? / get(1)?);
        control.push(get(2)? / get(3)?);
    }
    Ok(RatioReport {
        beta2,
        q,
        zeros: zeros.to_vec(),
        spread: spread(&ratios),
        control_spread: spread(&control),
        ratios,
        predicted: -q.powf(2.0 * qf.op.ell + 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_solves_the_equation() {
        let op = XOper::new(1.3, 0.3).unwrap();
        let e = Complex::new(2.0, 0.5);
        for s in [-op.ell, op.ell + 1.0] {
            let x = 0.05;
            let h = 1e-4;
            let f = |x| frobenius(&op, s, e, x, 12).unwrap().0;
            let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let p = op.l() / (x * x) + x.powf(2.6) - e;
            assert!((d2 - p * f(x)).norm() < 1e-5 * (p * f(x)).norm());
        }
    }

    #[test]
    fn wkb_start_is_consistent() {
        // ln ψ at two nearby points must differ by ∫ψ′/ψ
        let op = XOper::new(2.4, 0.3).unwrap();
        let e = Complex::new(7.0, 3.0);
        let (l1, d1) = wkb_start(&op, e, 20.0).unwrap();
        let (l2, d2) = wkb_start(&op, e, 20.01).unwrap();
        let avg = 0.5 * (d1 + d2) * 0.01;
        assert!(((l2 - l1) - avg).norm() < 1e-5 * avg.norm());
    }

    #[test]
    fn harmonic_spectrum() {
        let mut qf = QFunction::new(XOper::new(1.0, 0.3).unwrap(), QOptions::default());
        let zeros = qf.find_zeros(22.0, 5).unwrap().to_vec();
        assert_eq!(zeros.len(), 5);
        for (n, z) in zeros.iter().enumerate() {
            assert!((z.e - (4.0 * n as f64 + 3.6)).abs() < 1e-6, "{n}: {}", z.e);
            assert!(z.slope > 1e-3);
        }
        let q = qf.eval(Complex::new(5.0, 0.0)).unwrap();
        assert!(q.im.abs() < 1e-12 * q.norm());
        assert!(qf.cache_len() > 10);
    }

    #[test]
    fn stable_under_integration_settings() {
        let op = XOper::new(2.4, 0.3).unwrap();
        for e in [Complex::new(4.0, 0.0), Complex::new(-3.0, 6.0)] {
            let base = q_of_e(&op, e, &QOptions::default()).unwrap().q;
            for opts in [
                QOptions {
                    rtol: 1e-13,
                    ..QOptions::default()
                },
                QOptions {
                    x_max: Some(2.0 * default_x_max(2.4, e)),
                    ..QOptions::default()
                },
                QOptions {
                    x_min: 5e-4,
                    ..QOptions::default()
                },
            ] {
                let q = q_of_e(&op, e, &opts).unwrap().q;
                assert!((q / base - 1.0).norm() < 1e-8, "{opts:?}: {q} vs {base}");
            }
        }
    }

    #[test]
    fn ratios_constant_on_zeros() {
        let mut qf = QFunction::new(XOper::new(2.4, 0.3).unwrap(), QOptions::default());
        qf.find_zeros(80.0, 6).unwrap();
        let rep = bae_ratio_check(&qf, None).unwrap();
        assert!(rep.spread < 1e-8, "{}", rep.spread);
        assert!(rep.control_spread > 0.1);
        assert!((rep.ratios[0] - rep.predicted).norm() < 1e-8);
        let mut z = rep.zeros.clone();
        z[3] *= 1.01;
        assert!(ratio_check_at(&qf, &z, None).unwrap().spread > 10.0 * rep.spread.max(1e-4));
    }

    #[test]
    fn parameter_checks() {
        assert!(XOper::new(0.0, 0.3).is_err());
        assert!(XOper::new(1.0, -0.6).is_err());
        assert!(XOper::new(1.0, 0.5).unwrap().resonant());
        let qf = QFunction::new(XOper::new(1.0, 0.5).unwrap(), QOptions::default());
        assert_eq!(qf.warnings.len(), 1);
        let qf = QFunction::new(XOper::new(1.0, 0.3).unwrap(), QOptions::default());
        assert!(ratio_check_at(&qf, &[3.6, 7.6], Some(0.5)).is_err());
    }
}
