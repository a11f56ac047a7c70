//! The z-form sl2 oper `∂² − v(z) − λ z^k` with apparent singularities at
//! `w_1..w_m`, the accessory equations that make those singularities
//! monodromy-free, and a numerical monodromy check.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::Serialize;

use super::ode::{integrate, OdeOptions, C64};
use crate::error::{Error, Result};

/// `v(z) = r(r+1)/z² + (s − Σ k/w_j)/z + Σ 2/(z−w_j)² + Σ (k/w_j)/(z−w_j)`.
///
/// `s` is the coefficient of the irregular term and equals 1 in the standard
/// normalization; it is kept free so the rescaling `(w, s) → (cw, s/c)` can be
/// expressed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdvOper {
    pub r: f64,
    pub k: f64,
    pub s: f64,
    pub w: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalExpansion {
    pub double_pole: C64,
    pub simple_pole: C64,
    pub v0: C64,
    pub v1: C64,
}

impl KdvOper {
    pub fn new(r: f64, k: f64, w: Vec<C64>) -> Result<Self> {
        KdvOper { r, k, s: 1.0, w }.validated()
    }

    pub fn with_irregular(mut self, s: f64) -> Result<Self> {
        self.s = s;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.r.is_finite() && self.k.is_finite() && self.s.is_finite()) {
            return Err(Error::Invalid("r, k and s must be finite".into()));
        }
        for (j, wj) in self.w.iter().enumerate() {
            if !(wj.norm() > 0.0) || !wj.norm().is_finite() {
                return Err(Error::Invalid(format!(
                    "w_{} = {wj} must be finite and nonzero",
                    j + 1
                )));
            }
            for (l, wl) in self.w.iter().enumerate().skip(j + 1) {
                if (wj - wl).norm() <= 1e-12 * wj.norm().max(wl.norm()) {
                    return Err(Error::Invalid(format!(
                        "w_{} and w_{} coincide",
                        j + 1,
                        l + 1
                    )));
                }
            }
        }
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.w.len()
    }

    fn rr(&self) -> f64 {
        self.r * (self.r + 1.0)
    }

    fn residue_at_zero(&self) -> C64 {
        self.w
            .iter()
            .fold(Complex::new(self.s, 0.0), |acc, wj| acc - self.k / wj)
    }

    pub fn potential(&self, z: C64) -> C64 {
        let mut v = self.rr() / (z * z) + self.residue_at_zero() / z;
        for wj in &self.w {
            let d = z - wj;
            v += 2.0 / (d * d) + (self.k / wj) / d;
        }
        v
    }

    /// `v(z) + λ z^k`, with `z^k` taken on the principal branch.
    pub fn spectral_potential(&self, z: C64, lambda: C64) -> C64 {
        self.potential(z) + lambda * z.powf(self.k)
    }

    /// Coefficients of `v` around `w_j`: `2/(z−w)² + (k/w)/(z−w) + v0 + v1 (z−w) + …`.
    pub fn local_expansion(&self, j: usize) -> Result<LocalExpansion> {
        let w = *self.w.get(j).ok_or_else(|| {
            Error::Invalid(format!(
                "point index {} out of range 1..={}",
                j + 1,
                self.m()
            ))
        })?;
        let a = self.residue_at_zero();
        let mut v0 = self.rr() / (w * w) + a / w;
        let mut v1 = -2.0 * self.rr() / (w * w * w) - a / (w * w);
        for (l, wl) in self.w.iter().enumerate() {
            if l == j {
                continue;
            }
            let d = w - wl;
            let c = self.k / wl;
            v0 += 2.0 / (d * d) + c / d;
            v1 += -4.0 / (d * d * d) - c / (d * d);
        }
        Ok(LocalExpansion {
            double_pole: Complex::new(2.0, 0.0),
            simple_pole: self.k / w,
            v0,
            v1,
        })
    }

    /// `(1/4)(k/w_j)³ − (k/w_j) v_{j,0} + v_{j,1}` for every `j`.
    pub fn accessory_residual(&self) -> Vec<C64> {
        (0..self.m())
            .map(|j| {
                let e = self.local_expansion(j).expect("index in range");
                let c = self.k / self.w[j];
                0.25 * c * c * c - c * e.v0 + e.v1
            })
            .collect()
    }

    fn with_points(&self, w: Vec<C64>) -> KdvOper {
        KdvOper { w, ..self.clone() }
    }
}

/// The single-point solution `w = (k+2)(k(k+2)/4 − r(r+1)) / (s(k+1))`.
pub fn accessory_m1_closed_form(r: f64, k: f64, s: f64) -> Result<C64> {
    if (k + 1.0).abs() < 1e-14 || s == 0.0 {
        return Err(Error::Invalid(
            "no finite solution for k = -1 or s = 0".into(),
        ));
    }
    let w = (k + 2.0) * (k * (k + 2.0) / 4.0 - r * (r + 1.0)) / (s * (k + 1.0));
    if w == 0.0 {
        return Err(Error::Invalid("the solution collapses onto z = 0".into()));
    }
    Ok(Complex::new(w, 0.0))
}

#[derive(Debug, Clone, Copy)]
pub struct AccessoryOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AccessoryOptions {
    fn default() -> Self {
        AccessoryOptions {
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AccessorySolution {
    pub w: Vec<C64>,
    pub residuals: Vec<C64>,
    pub residual_max: f64,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Newton iteration on the accessory equations starting from `init`.
pub fn solve_accessory(
    base: &KdvOper,
    init: &[C64],
    opts: &AccessoryOptions,
) -> Result<AccessorySolution> {
    let m = init.len();
    if m == 0 || m > 3 {
        return Err(Error::Invalid(format!(
            "accessory solver supports 1..=3 points, got {m}"
        )));
    }
    let mut op = base.with_points(init.to_vec()).validated()?;
    let mut res = op.accessory_residual();
    let mut iterations = 0;
    let finish =
        |op: KdvOper, res: Vec<C64>, iterations, converged, message: String| AccessorySolution {
            residual_max: max_norm(&res),
            w: op.w,
            residuals: res,
            iterations,
            converged,
            message,
        };
    while max_norm(&res) > opts.tol {
        if iterations >= opts.max_iter {
            return Ok(finish(
                op,
                res,
                iterations,
                false,
                "iteration limit reached".into(),
            ));
        }
        iterations += 1;
        let mut jac = DMatrix::<C64>::zeros(m, m);
        for l in 0..m {
            let h = 1e-6 * op.w[l].norm();
            let mut wp = op.w.clone();
            let mut wm = op.w.clone();
            wp[l] += h;
            wm[l] -= h;
            let rp = op.with_points(wp).accessory_residual();
            let rm = op.with_points(wm).accessory_residual();
            for i in 0..m {
                jac[(i, l)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(m, res.iter().map(|x| -x));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Ok(finish(
                op,
                res,
                iterations,
                false,
                "singular Jacobian".into(),
            ));
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let w: Vec<C64> =
                op.w.iter()
                    .zip(step.iter())
                    .map(|(w, d)| w + d * t)
                    .collect();
            if let Ok(cand) = base.with_points(w).validated() {
                let r = cand.accessory_residual();
                if max_norm(&r).is_finite() && max_norm(&r) < max_norm(&res) {
                    accepted = Some((cand, r));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, r)) = accepted else {
            return Ok(finish(
                op,
                res,
                iterations,
                false,
                "line search failed to reduce the residual".into(),
            ));
        };
        op = cand;
        res = r;
        if let Some(j) = op.w.iter().position(|w| w.norm() < 1e-8) {
            return Ok(finish(
                op,
                res,
                iterations,
                false,
                format!("w_{} collapsed onto z = 0", j + 1),
            ));
        }
    }
    Ok(finish(op, res, iterations, true, "converged".into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyReport {
    pub center: usize,
    pub radius: f64,
    pub lambda: C64,
    pub matrix: [[C64; 2]; 2],
    pub deviation: f64,
    pub det: C64,
    pub steps: usize,
}

/// Transfer matrix of `y″ = (v + λ z^k) y` around `w_j + ρ e^{iθ}`, in the basis
/// with `Y(θ=0) = 1`. `deviation` is the Frobenius norm of `M − 1`.
pub fn monodromy_matrix(
    op: &KdvOper,
    j: usize,
    radius: f64,
    lambda: C64,
    opts: &OdeOptions,
) -> Result<MonodromyReport> {
    if op.m() == 0 {
        return Err(Error::Invalid(
            "no finite singular points to encircle".into(),
        ));
    }
    let w = *op.w.get(j).ok_or_else(|| {
        Error::Invalid(format!("point index {} out of range 1..={}", j + 1, op.m()))
    })?;
    let nearest =
        op.w.iter()
            .enumerate()
            .filter(|(l, _)| *l != j)
            .map(|(_, wl)| (w - wl).norm())
            .fold(w.norm(), f64::min);
    if !(radius > 0.0) || radius >= 0.9 * nearest {
        return Err(Error::Invalid(format!(
            "radius {radius} must be positive and below 0.9 x distance {nearest:.6e} to the nearest other singular point"
        )));
    }
    let wk = w.powf(op.k);
    let rhs = |theta: f64, y: &[C64; 4]| -> [C64; 4] {
        let e = Complex::from_polar(radius, theta);
        let z = w + e;
        let dz = C64::i() * e;
        let v = op.potential(z) + lambda * wk * (z / w).powf(op.k);
        // columns (y, y′) of two solutions
        [dz * y[2], dz * y[3], dz * v * y[0], dz * v * y[1]]
    };
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let (y, stats) = integrate(rhs, 0.0, [one, zero, zero, one], 2.0 * PI, opts, |_| {})?;
    let matrix = [[y[0], y[1]], [y[2], y[3]]];
    let deviation =
        ((y[0] - one).norm_sqr() + y[1].norm_sqr() + y[2].norm_sqr() + (y[3] - one).norm_sqr())
            .sqrt();
    Ok(MonodromyReport {
        center: j,
        radius,
        lambda,
        matrix,
        deviation,
        det: y[0] * y[3] - y[1] * y[2],
        steps: stats.accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn empty_sums() {
        let op = KdvOper::new(0.4, 0.7, vec![]).unwrap();
        let z = c(1.3, -0.2);
        assert!((op.potential(z) - (0.4 * 1.4 / (z * z) + 1.0 / z)).norm() < 1e-15);
        assert!(op.accessory_residual().is_empty());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(KdvOper::new(0.4, 0.7, vec![c(0.0, 0.0)]).is_err());
        assert!(KdvOper::new(0.4, 0.7, vec![c(1.0, 1.0), c(1.0, 1.0)]).is_err());
    }

    #[test]
    fn local_expansion_matches_contour_fit() {
        let op = KdvOper::new(0.3, 0.45, vec![c(1.2, 0.4), c(-0.7, 1.1)]).unwrap();
        for j in 0..2 {
            let e = op.local_expansion(j).unwrap();
            let w = op.w[j];
            let rho = 0.05;
            let n = 64;
            let (mut a_m2, mut a_m1, mut a0, mut a1) =
                (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
            for p in 0..n {
                let u = Complex::from_polar(rho, 2.0 * PI * p as f64 / n as f64);
                let val = op.potential(w + u) / n as f64;
                a_m2 += val * u * u;
                a_m1 += val * u;
                a0 += val;
                a1 += val / u;
            }
            assert!((a_m2 - e.double_pole).norm() < 1e-12);
            assert!((a_m1 - e.simple_pole).norm() < 1e-12);
            assert!((a0 - e.v0).norm() < 1e-11);
            assert!((a1 - e.v1).norm() < 1e-9);
        }
    }

    #[test]
    fn single_point_closed_form() {
        for &(r, k, s) in &[(0.3, 0.45, 1.0), (1.1, -0.3, 1.0), (0.2, 2.5, 0.7)] {
            let w = accessory_m1_closed_form(r, k, s).unwrap();
            let op = KdvOper::new(r, k, vec![w])
                .unwrap()
                .with_irregular(s)
                .unwrap();
            assert!(op.accessory_residual()[0].norm() < 1e-12 * (1.0 + 1.0 / w.norm().powi(3)));
            let sol =
                solve_accessory(&op, &[w * c(1.3, 0.2)], &AccessoryOptions::default()).unwrap();
            assert!(sol.converged, "{}", sol.message);
            assert!((sol.w[0] - w).norm() < 1e-9 * w.norm());
        }
    }

    #[test]
    fn k_zero_keeps_only_v1() {
        let op = KdvOper::new(0.6, 0.0, vec![c(0.8, 0.3)]).unwrap();
        let e = op.local_expansion(0).unwrap();
        assert!((op.accessory_residual()[0] - e.v1).norm() < 1e-15);
    }

    #[test]
    fn rescaling_law() {
        let op = KdvOper::new(0.35, 0.8, vec![c(1.1, 0.2), c(-0.4, 0.9), c(0.3, -1.5)]).unwrap();
        let base = op.accessory_residual();
        for &s in &[2.0, 0.3, -1.7] {
            let scaled = KdvOper {
                s: op.s / s,
                w: op.w.iter().map(|w| w * s).collect(),
                ..op.clone()
            };
            for (a, b) in scaled.accessory_residual().iter().zip(&base) {
                assert!((a * s.powi(3) - b).norm() < 1e-12 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn two_points_converge() {
        let op = KdvOper::new(0.3, 0.6, vec![]).unwrap();
        let sol = solve_accessory(
            &op,
            &[c(-2.0, 1.5), c(-2.0, -1.5)],
            &AccessoryOptions::default(),
        )
        .unwrap();
        assert!(sol.converged, "{} {:?}", sol.message, sol.w);
        assert!(sol.residual_max < 1e-12);
    }

    #[test]
    fn monodromy_trivial_only_at_solution() {
        let (r, k) = (0.25, 0.45);
        let w = accessory_m1_closed_form(r, k, 1.0).unwrap();
        let op = KdvOper::new(r, k, vec![w]).unwrap();
        let radius = 0.5 * w.norm();
        for lam in [c(0.5, 0.0), c(-1.3, 0.4), c(2.0, -1.0)] {
            let rep = monodromy_matrix(&op, 0, radius, lam, &OdeOptions::default()).unwrap();
            assert!(rep.deviation < 1e-6, "{}", rep.deviation);
            assert!((rep.det - 1.0).norm() < 1e-8);
        }
        let off = KdvOper::new(r, k, vec![w + 1e-2]).unwrap();
        let rep = monodromy_matrix(&off, 0, radius, c(0.5, 0.0), &OdeOptions::default()).unwrap();
        assert!(rep.deviation > 0.1, "{}", rep.deviation);
        assert!((rep.det - 1.0).norm() < 1e-8);
        assert!(monodromy_matrix(
            &KdvOper::new(r, k, vec![]).unwrap(),
            0,
            0.1,
            c(1.0, 0.0),
            &OdeOptions::default()
        )
        .is_err());
        assert!(monodromy_matrix(&op, 0, w.norm(), c(1.0, 0.0), &OdeOptions::default()).is_err());
    }
}
