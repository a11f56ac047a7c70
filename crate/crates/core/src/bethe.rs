//! Bethe equations attached to the QQ̃-system and functional residuals.
//!
//! For a root `w` of `Q_i` the equation reads
//! `v_i^{-2} Π_j Q_j(w q^{B_ij}) / Q_j(w q^{-B_ij}) = -1`. Unknowns are the
//! logarithms of the roots; the quantum numbers `n` enter through
//! `-iπ(2n+1)` and are inputs.
//!
//! The equations only see ratios of roots, so a common rescaling of all roots
//! maps solutions to solutions. Newton therefore takes minimum-norm steps and
//! the solution reports the dimension of the family it lies on.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liedata::{AlgebraData, TwistedFoldData};
use crate::qqverify::qq_rhs_shifts;

pub type C64 = Complex<f64>;
/// Roots grouped by node.
pub type Roots = Vec<Vec<C64>>;
/// A function of the spectral parameter.
pub type QFn<'a> = &'a (dyn Fn(C64) -> C64 + Sync);

/// `β²` values `p/den` with `den` up to this bound are refused (q a low-order root of unity).
pub const ROOT_OF_UNITY_BOUND: i64 = 8;

const I: C64 = Complex { re: 0.0, im: 1.0 };

/// `Π_l (u - roots_l)`.
pub fn poly_eval(roots: &[C64], u: C64) -> C64 {
    roots
        .iter()
        .fold(Complex::new(1.0, 0.0), |acc, &w| acc * (u - w))
}

/// `q^s` for `q = e^{iπβ²}`.
pub fn q_pow(beta2: f64, s: f64) -> C64 {
    Complex::from_polar(1.0, PI * beta2 * s)
}

#[derive(Debug, Clone)]
pub struct BetheSystem {
    pub algebra: AlgebraData,
    pub beta2: f64,
    pub v: Vec<C64>,
    pub degrees: Vec<usize>,
    /// One quantum number per root, grouped by node.
    pub branch: Vec<Vec<i64>>,
}

impl BetheSystem {
    pub fn new(
        algebra: AlgebraData,
        beta2: f64,
        v: Vec<C64>,
        degrees: Vec<usize>,
    ) -> Result<BetheSystem> {
        let n = algebra.rank;
        if v.len() != n || degrees.len() != n {
            return Err(Error::Invalid(format!(
                "need {n} values of v and N, got {} and {}",
                v.len(),
                degrees.len()
            )));
        }
        if v.iter().any(|x| x.norm() == 0.0 || !x.is_finite()) {
            return Err(Error::Invalid("v_i must be finite and nonzero".into()));
        }
        if !beta2.is_finite() {
            return Err(Error::Invalid("beta2 must be finite".into()));
        }
        for den in 1..=ROOT_OF_UNITY_BOUND {
            let p = (beta2 * den as f64).round();
            if (beta2 * den as f64 - p).abs() < 1e-12 {
                return Err(Error::Invalid(format!(
                    "beta2 = {p}/{den} makes q a root of unity"
                )));
            }
        }
        let branch = degrees.iter().map(|&d| vec![0; d]).collect();
        Ok(BetheSystem {
            algebra,
            beta2,
            v,
            degrees,
            branch,
        })
    }

    pub fn with_branches(mut self, branch: Vec<Vec<i64>>) -> Result<BetheSystem> {
        if branch.len() != self.degrees.len()
            || branch.iter().zip(&self.degrees).any(|(b, &d)| b.len() != d)
        {
            return Err(Error::Invalid(
                "branch integers do not match the degrees".into(),
            ));
        }
        self.branch = branch;
        Ok(self)
    }

    pub fn q(&self) -> C64 {
        q_pow(self.beta2, 1.0)
    }

    fn qb(&self, s: i64) -> C64 {
        q_pow(self.beta2, s as f64)
    }

    pub fn root_count(&self) -> usize {
        self.degrees.iter().sum()
    }

    /// Checks shape, nonvanishing and the collision condition.
    pub fn check_roots(&self, roots: &Roots, collision_tol: f64) -> Result<()> {
        if roots.len() != self.degrees.len()
            || roots.iter().zip(&self.degrees).any(|(r, &d)| r.len() != d)
        {
            return Err(Error::Invalid(
                "root counts do not match the degrees".into(),
            ));
        }
        for (i, ri) in roots.iter().enumerate() {
            for (a, w) in ri.iter().enumerate() {
                if !w.is_finite() || w.norm() == 0.0 {
                    return Err(Error::Singular(format!(
                        "root {} of node {} is zero or not finite",
                        a + 1,
                        i + 1
                    )));
                }
            }
        }
        for (i, ri) in roots.iter().enumerate() {
            for (j, rj) in roots.iter().enumerate() {
                let b = self.algebra.bmatrix[i][j];
                for (a, &wa) in ri.iter().enumerate() {
                    for (c, &wc) in rj.iter().enumerate() {
                        if i == j && a == c {
                            continue;
                        }
                        let scale = wa.norm().max(wc.norm());
                        let mut shifts = vec![];
                        if i == j {
                            shifts.push(0);
                        }
                        if b != 0 {
                            shifts.extend([b, -b]);
                        }
                        if let Some(s) = shifts
                            .into_iter()
                            .find(|&s| (wa * self.qb(s) - wc).norm() <= collision_tol * scale)
                        {
                            return Err(Error::Singular(format!(
                                "root {} of node {} times q^{s} hits root {} of node {}",
                                a + 1,
                                i + 1,
                                c + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Log-form residual, one entry per root in node order.
    pub fn log_residual(&self, roots: &Roots) -> Result<Vec<C64>> {
        self.check_roots(roots, 0.0)?;
        let mut out = Vec::with_capacity(self.root_count());
        for (i, ri) in roots.iter().enumerate() {
            for (a, &w) in ri.iter().enumerate() {
                let mut f = (self.v[i].powi(-2)).ln() - I * PI * (2 * self.branch[i][a] + 1) as f64;
                for (j, rj) in roots.iter().enumerate() {
                    let b = self.algebra.bmatrix[i][j];
                    if b == 0 {
                        continue;
                    }
                    let (up, dn) = (w * self.qb(b), w * self.qb(-b));
                    for &wl in rj {
                        f += (up - wl).ln() - (dn - wl).ln();
                    }
                }
                out.push(f);
            }
        }
        Ok(out)
    }

    /// `v_i^{-2} Π_j Q_j(wq^{B_ij}) / Q_j(wq^{-B_ij}) + 1` per root.
    pub fn product_residual(&self, roots: &Roots) -> Result<Vec<C64>> {
        self.check_roots(roots, 0.0)?;
        let mut out = Vec::with_capacity(self.root_count());
        for (i, ri) in roots.iter().enumerate() {
            for &w in ri {
                let mut p = self.v[i].powi(-2);
                for (j, rj) in roots.iter().enumerate() {
                    let b = self.algebra.bmatrix[i][j];
                    if b != 0 {
                        p *= poly_eval(rj, w * self.qb(b)) / poly_eval(rj, w * self.qb(-b));
                    }
                }
                out.push(p + 1.0);
            }
        }
        Ok(out)
    }

    /// Jacobian of [`Self::log_residual`] with respect to `log w`.
    pub fn jacobian_log(&self, roots: &Roots) -> DMatrix<C64> {
        let flat: Vec<(usize, C64)> = roots
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&w| (i, w)))
            .collect();
        let n = flat.len();
        let mut jac = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
        for (a, &(i, w)) in flat.iter().enumerate() {
            for (c, &(j, wl)) in flat.iter().enumerate() {
                if a == c {
                    continue;
                }
                let b = self.algebra.bmatrix[i][j];
                if b == 0 {
                    continue;
                }
                let (qp, qm) = (self.qb(b), self.qb(-b));
                let (up, dn) = (w * qp - wl, w * qm - wl);
                jac[(a, a)] += w * (qp / up - qm / dn);
                jac[(a, c)] += wl * (-1.0 / up + 1.0 / dn);
            }
        }
        jac
    }

    /// Quantum numbers that bring each log residual closest to zero.
    pub fn fit_branches(&self, roots: &Roots) -> Result<Vec<Vec<i64>>> {
        let mut probe = self.clone();
        probe.branch = self.degrees.iter().map(|&d| vec![0; d]).collect();
        let f = probe.log_residual(roots)?;
        let mut it = f.into_iter();
        Ok(self
            .degrees
            .iter()
            .map(|&d| {
                (0..d)
                    .map(|_| (it.next().unwrap().im / (2.0 * PI)).round() as i64)
                    .collect()
            })
            .collect())
    }
}

/// Residual map of the Bethe equations for `system`.
pub fn build_bae(system: &BetheSystem) -> impl Fn(&Roots) -> Result<Vec<C64>> + '_ {
    move |roots| system.log_residual(roots)
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub collision_tol: f64,
    pub record_trajectory: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 200,
            collision_tol: 1e-8,
            record_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Isolated solution.
    Converged,
    /// Residual below tolerance on a family of dimension `null_dim`.
    Underdetermined,
    NotConverged,
    /// Damping could not reduce the residual.
    Stalled,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub iteration: usize,
    pub node: usize,
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub residual_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheSolution {
    pub roots: Roots,
    /// Product-form residual per root.
    pub residuals: Vec<C64>,
    pub residual_max: f64,
    pub log_residual_max: f64,
    pub converged: bool,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Numerical nullity of the Jacobian at the final point.
    pub null_dim: usize,
    /// `σ_max / σ_min` of the final Jacobian.
    pub condition: f64,
    pub message: String,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryRow>,
}

struct NewtonOutcome {
    x: Vec<C64>,
    fmax: f64,
    iterations: usize,
    null_dim: usize,
    condition: f64,
    stalled: bool,
}

fn max_norm(f: &[C64]) -> f64 {
    f.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sum_sq(f: &[C64]) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum()
}

fn spectrum(jac: &DMatrix<C64>) -> (usize, f64) {
    if jac.nrows() == 0 {
        return (0, 1.0);
    }
    let sv = jac.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let cut = 1e-8 * smax.max(1.0);
    let null = sv.iter().filter(|&&s| s <= cut).count();
    let cond = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    (null, cond)
}

/// Damped Newton in log coordinates with minimum-norm steps.
fn damped_newton<F, J, R>(
    x0: Vec<C64>,
    f: F,
    jac: J,
    opts: &NewtonOptions,
    mut record: R,
) -> Result<NewtonOutcome>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
    J: Fn(&[C64]) -> DMatrix<C64>,
    R: FnMut(usize, &[C64], f64),
{
    let mut x = x0;
    let mut fx = f(&x)?;
    let mut fmax = max_norm(&fx);
    record(0, &x, fmax);
    let mut iterations = 0;
    let mut stalled = false;
    while fmax >= opts.tol && iterations < opts.max_iter {
        let j = jac(&x);
        let svd = j.svd(true, true);
        let cut = 1e-10 * svd.singular_values.max().max(1e-300);
        let rhs = nalgebra::DVector::from_iterator(fx.len(), fx.iter().map(|z| -z));
        let step = match svd.solve(&rhs, cut) {
            Ok(s) => s,
            Err(_) => {
                stalled = true;
                break;
            }
        };
        if step.iter().all(|z| z.norm() == 0.0) {
            stalled = true;
            break;
        }
        let base = sum_sq(&fx);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<C64> = x
                .iter()
                .zip(step.iter())
                .map(|(xi, s)| xi + s * lambda)
                .collect();
            if let Ok(ft) = f(&trial) {
                if sum_sq(&ft) < base {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((xn, fnew)) => {
                x = xn;
                fx = fnew;
                fmax = max_norm(&fx);
                record(iterations, &x, fmax);
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    let (null_dim, condition) = spectrum(&jac(&x));
    Ok(NewtonOutcome {
        x,
        fmax,
        iterations,
        null_dim,
        condition,
        stalled,
    })
}

fn unflatten(degrees: &[usize], logs: &[C64]) -> Roots {
    let mut it = logs.iter();
    degrees
        .iter()
        .map(|&d| (0..d).map(|_| it.next().unwrap().exp()).collect())
        .collect()
}

/// Solves the Bethe equations from `init`.
pub fn solve_newton(
    system: &BetheSystem,
    init: &Roots,
    opts: &NewtonOptions,
) -> Result<BetheSolution> {
    system.check_roots(init, opts.collision_tol)?;
    let degrees = system.degrees.clone();
    let x0: Vec<C64> = init.iter().flatten().map(|w| w.ln()).collect();
    let f = |x: &[C64]| {
        let r = unflatten(&degrees, x);
        system.check_roots(&r, opts.collision_tol)?;
        system.log_residual(&r)
    };
    let jac = |x: &[C64]| system.jacobian_log(&unflatten(&degrees, x));
    let mut trajectory = Vec::new();
    let record = |it: usize, x: &[C64], fmax: f64| {
        if opts.record_trajectory {
            let r = unflatten(&degrees, x);
            for (i, ri) in r.iter().enumerate() {
                for (a, w) in ri.iter().enumerate() {
                    trajectory.push(TrajectoryRow {
                        iteration: it,
                        node: i + 1,
                        index: a + 1,
                        re: w.re,
                        im: w.im,
                        residual_max: fmax,
                    });
                }
            }
        }
    };
    let out = damped_newton(x0, f, jac, opts, record)?;
    let roots = unflatten(&degrees, &out.x);
    let residuals = system.product_residual(&roots)?;
    let converged = out.fmax < opts.tol;
    let status = if converged {
        if out.null_dim > 0 {
            SolveStatus::Underdetermined
        } else {
            SolveStatus::Converged
        }
    } else if out.stalled {
        SolveStatus::Stalled
    } else {
        SolveStatus::NotConverged
    };
    let message = match status {
        SolveStatus::Converged => "isolated solution".to_string(),
        SolveStatus::Underdetermined => format!("solution family of dimension {}", out.null_dim),
        SolveStatus::NotConverged => format!("max iterations reached, residual {:.3e}", out.fmax),
        SolveStatus::Stalled => format!(
            "damping failed at residual {:.3e}, condition {:.3e}",
            out.fmax, out.condition
        ),
    };
    Ok(BetheSolution {
        residual_max: max_norm(&residuals),
        roots,
        residuals,
        log_residual_max: out.fmax,
        converged,
        status,
        iterations: out.iterations,
        null_dim: out.null_dim,
        condition: out.condition,
        message,
        trajectory,
    })
}

/// Right-hand side `Π_j Q_j(u q^s)` of the QQ̃-relation at node `i`.
pub fn qq_rhs_eval(system: &BetheSystem, i: usize, q: &[QFn], u: C64) -> Result<C64> {
    let mut p = Complex::new(1.0, 0.0);
    for (j, s) in qq_rhs_shifts(&system.algebra, i)? {
        p *= q[j](u * system.qb(s));
    }
    Ok(p)
}

/// Max over nodes and grid of `|v Q(uq_i⁻¹)Q̃(uq_i) - v⁻¹Q(uq_i)Q̃(uq_i⁻¹) - RHS(u)|`.
pub fn qsyst_residual(system: &BetheSystem, q: &[QFn], qt: &[QFn], grid: &[C64]) -> Result<f64> {
    let n = system.algebra.rank;
    if q.len() != n || qt.len() != n {
        return Err(Error::Invalid(format!("need {n} Q and Q~ functions")));
    }
    let vals: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&u| {
            let mut m: f64 = 0.0;
            for i in 0..n {
                let qi = system.qb(system.algebra.sym[i]);
                let v = system.v[i];
                let lhs = v * q[i](u / qi) * qt[i](u * qi) - q[i](u * qi) * qt[i](u / qi) / v;
                let r = (lhs - qq_rhs_eval(system, i, q, u)?).norm();
                if !r.is_finite() {
                    return Err(Error::Numerical(format!(
                        "evaluation failed at node {} u = {u}",
                        i + 1
                    )));
                }
                m = m.max(r);
            }
            Ok(m)
        })
        .collect();
    vals.into_iter()
        .try_fold(0.0_f64, |acc, r| r.map(|x| acc.max(x)))
}

/// Q̃_i along `p_m = start·q_i^{2m}` from the first-order recurrence, seeded with 0.
pub fn qtilde_lattice(
    system: &BetheSystem,
    roots: &Roots,
    i: usize,
    start: C64,
    steps: usize,
) -> Result<Vec<C64>> {
    system.algebra.check_node(i)?;
    let polys: Vec<Box<dyn Fn(C64) -> C64 + Sync>> = roots
        .iter()
        .map(|r| Box::new(move |u: C64| poly_eval(r, u)) as Box<dyn Fn(C64) -> C64 + Sync>)
        .collect();
    let refs: Vec<QFn> = polys.iter().map(|b| b.as_ref()).collect();
    let qi = system.qb(system.algebra.sym[i]);
    let v = system.v[i];
    let mut p = start;
    let mut qt = Complex::new(0.0, 0.0);
    let mut out = vec![qt];
    for _ in 0..steps {
        let next = p * qi * qi;
        let num = qq_rhs_eval(system, i, &refs, p * qi)? + refs[i](next) * qt / v;
        qt = num / (v * refs[i](p));
        out.push(qt);
        p = next;
    }
    Ok(out)
}

/// Largest `|Q̃|` over lattices started just below each root of node `i`.
///
/// The lattice starts at `w q_i^{-2}(1+η)`, so the second step divides by
/// `Q_i(w(1+η)) = O(η)`; the numerator is small exactly when the Bethe
/// equation holds at `w`.
pub fn blowup_indicator(
    system: &BetheSystem,
    roots: &Roots,
    i: usize,
    steps: usize,
    eta: f64,
) -> Result<f64> {
    let qi = system.qb(system.algebra.sym[i]);
    let mut worst: f64 = 0.0;
    for &w in &roots[i] {
        let vals = qtilde_lattice(system, roots, i, w / (qi * qi) * (1.0 + eta), steps)?;
        worst = worst.max(vals.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

/// Right-hand side of the twisted relation at orbit `i`.
pub fn twisted_rhs(fold: &TwistedFoldData, i: usize, a: C64, q: &[QFn]) -> Result<C64> {
    let m = fold.orbits.len();
    if i >= m {
        return Err(Error::BadNode { node: i, rank: m });
    }
    if q.len() != m {
        return Err(Error::Invalid(format!("need {m} Q functions")));
    }
    if a.norm() == 0.0 {
        return Err(Error::Invalid(
            "a = 0 has no r-th roots to enumerate".into(),
        ));
    }
    let r = fold.order as i64;
    let rq = crate::liedata::Q64::from_integer(r);
    let one = crate::liedata::Q64::from_integer(1);
    let is_r = |j: usize| fold.d[j] == rq;
    let mut p = Complex::new(1.0, 0.0);
    if fold.d[i] == rq {
        let base = a.powf(1.0 / r as f64);
        for j in fold.neighbors(i) {
            if is_r(j) {
                p *= q[j](a);
            } else {
                for k in 0..r {
                    p *= q[j](base * Complex::from_polar(1.0, 2.0 * PI * k as f64 / r as f64));
                }
            }
        }
    } else if fold.d[i] == one {
        for j in fold.neighbors(i) {
            p *= if is_r(j) {
                q[j](a.powi(r as i32))
            } else {
                q[j](a)
            };
        }
    } else {
        p *= q[i](-a);
        for j in fold.neighbors(i) {
            p *= q[j](a);
        }
    }
    Ok(p)
}

/// Quantum parameters of the toroidal relation, with `(q1 q3)^{-1} = q2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Gl1Params {
    pub q1: C64,
    pub q2: C64,
    pub q3: C64,
}

impl Gl1Params {
    pub fn new(q1: C64, q2: C64, q3: C64) -> Result<Gl1Params> {
        if [q1, q2, q3].iter().any(|z| z.norm() == 0.0) {
            return Err(Error::Invalid("q1, q2, q3 must be nonzero".into()));
        }
        if (q1 * q2 * q3 - 1.0).norm() > 1e-12 {
            return Err(Error::Invalid("parameters violate (q1 q3)^-1 = q2".into()));
        }
        Ok(Gl1Params { q1, q2, q3 })
    }

    /// From `q` with `q2 = q²` and a free `q1`.
    pub fn from_q(q: C64, q1: C64) -> Result<Gl1Params> {
        let q2 = q * q;
        Gl1Params::new(q1, q2, 1.0 / (q1 * q2))
    }

    fn list(&self) -> [C64; 3] {
        [self.q1, self.q2, self.q3]
    }
}

/// `Q(wq1)Q(wq2)Q(wq3) + t Q(wq1⁻¹)Q(wq2⁻¹)Q(wq3⁻¹)` at every root `w`.
pub fn gl1_bae_residual(roots: &[C64], p: &Gl1Params, t: C64) -> Result<Vec<C64>> {
    roots
        .iter()
        .map(|&w| {
            if w.norm() == 0.0 {
                return Err(Error::Invalid("root at 0".into()));
            }
            let up = p.list().iter().fold(Complex::new(1.0, 0.0), |acc, &qk| {
                acc * poly_eval(roots, w * qk)
            });
            let dn = p.list().iter().fold(Complex::new(1.0, 0.0), |acc, &qk| {
                acc * poly_eval(roots, w / qk)
            });
            Ok(up + t * dn)
        })
        .collect()
}

/// The value of `t` that solves the one-root equation.
pub fn gl1_single_root_t(p: &Gl1Params) -> C64 {
    p.q1 * p.q2 * p.q3
}

#[derive(Debug, Clone, Serialize)]
pub struct Gl1Solution {
    pub roots: Vec<C64>,
    pub residuals: Vec<C64>,
    pub residual_max: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Newton on `log w` for the toroidal Bethe equation, residuals scaled by `w^{-3N}`.
pub fn gl1_solve(init: &[C64], p: &Gl1Params, t: C64, opts: &NewtonOptions) -> Result<Gl1Solution> {
    let n = init.len() as i32;
    let f = |x: &[C64]| -> Result<Vec<C64>> {
        let r: Vec<C64> = x.iter().map(|z| z.exp()).collect();
        for a in 0..r.len() {
            for b in 0..a {
                if (r[a] - r[b]).norm() <= opts.collision_tol * r[a].norm() {
                    return Err(Error::Singular(format!(
                        "roots {} and {} coincide",
                        b + 1,
                        a + 1
                    )));
                }
            }
        }
        let res = gl1_bae_residual(&r, p, t)?;
        Ok(res.iter().zip(&r).map(|(z, w)| z / w.powi(3 * n)).collect())
    };
    let jac = |x: &[C64]| {
        let r: Vec<C64> = x.iter().map(|z| z.exp()).collect();
        let m = r.len();
        let mut jm = DMatrix::from_element(m, m, Complex::new(0.0, 0.0));
        for (a, &w) in r.iter().enumerate() {
            let mut du = vec![Complex::new(0.0, 0.0); m];
            let mut dd = vec![Complex::new(0.0, 0.0); m];
            for &qk in &p.list() {
                for (l, &wl) in r.iter().enumerate() {
                    let (eu, ed) = (w * qk, w / qk);
                    du[a] += eu / (eu - wl);
                    dd[a] += ed / (ed - wl);
                    du[l] -= wl / (eu - wl);
                    dd[l] -= wl / (ed - wl);
                }
            }
            let up = p.list().iter().fold(Complex::new(1.0, 0.0), |acc, &qk| {
                acc * poly_eval(&r, w * qk)
            });
            let dn = p.list().iter().fold(Complex::new(1.0, 0.0), |acc, &qk| {
                acc * poly_eval(&r, w / qk)
            });
            let scale = w.powi(-3 * n);
            for b in 0..m {
                let mut g = up * du[b] + t * dn * dd[b];
                if b == a {
                    g -= (up + t * dn) * (3 * n) as f64;
                }
                jm[(a, b)] = g * scale;
            }
        }
        jm
    };
    let x0: Vec<C64> = init.iter().map(|w| w.ln()).collect();
    let out = damped_newton(x0, f, jac, opts, |_, _, _| {})?;
    let roots: Vec<C64> = out.x.iter().map(|z| z.exp()).collect();
    let residuals = gl1_bae_residual(&roots, p, t)?;
    Ok(Gl1Solution {
        residual_max: max_norm(&residuals),
        converged: out.fmax < opts.tol,
        iterations: out.iterations,
        roots,
        residuals,
    })
}
