//! Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex;
use qqsys::bethe::{gl1_bae_residual, gl1_single_root_t, gl1_solve, q_pow, solve_newton, Roots};
use qqsys::operkit::laurent::rat;
use qqsys::operkit::ode::OdeOptions;
use qqsys::operkit::{
    accessory_m1_closed_form, bae_ratio_check, c_of_nu, canonical_form, constants,
    general_constants, miura, monodromy_matrix, ratio_check_at, solve_accessory,
    transform_projective, AccessoryOptions,
};
use qqsys::qqverify::{qq_star_shift_data, sl2_closed_forms, verify_wronskian_sl2};
use qqsys::{
    dual_alpha, load_algebra, supported_algebras, BetheSystem, Gl1Params, KdvOper, Laurent,
    MatrixDiffOp, NewtonOptions, QFunction, QOptions, SolveStatus, XOper, C64, Q64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < budget_s, || {
        format!("took {:.1} s, budget {budget_s} s", elapsed.as_secs_f64())
    })
}

fn cli_json(args: &[&str]) -> Result<(i32, Value), String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["qqsys"];
    argv.extend_from_slice(args);
    let code = qqsys_cli::run_with(argv, &mut out, &mut err);
    let v: Value = serde_json::from_slice(&out)
        .map_err(|e| format!("no JSON ({e}): {}", String::from_utf8_lossy(&err)))?;
    Ok((code, v))
}

fn all_exact(v: &Value) -> (usize, usize) {
    let reps = v["result"]["reports"].as_array().cloned().unwrap_or_default();
    let ok = reps.iter().filter(|r| r["status"] == "exact-zero").count();
    (ok, reps.len())
}

const SWEEP: &str = "A1,A2,A3,B2,B3,C2,C3,D4,G2,F4";

// 1
fn qq_sweep() -> Check {
    let start = Instant::now();
    let (code, v) = cli_json(&["qq", "verify", "--algebra", SWEEP, "--depth", "1-6"])?;
    let (ok, n) = all_exact(&v);
    ensure(code == 0 && ok == n && n == 26 * 6, || {
        format!("depth 1-6: {ok}/{n} exact, exit {code}")
    })?;
    let (code8, v8) = cli_json(&["qq", "verify", "--algebra", "A1,A2", "--depth", "8"])?;
    let (ok8, n8) = all_exact(&v8);
    ensure(code8 == 0 && ok8 == n8 && n8 == 3, || {
        format!("depth 8: {ok8}/{n8} exact, exit {code8}")
    })?;
    // lattice-translation covariance
    let mut shifted = 0;
    for base in ["-3", "-1", "1", "3"] {
        let (code, v) = cli_json(&[
            "qq", "verify", "--algebra", SWEEP, "--depth", "4", "--base", base,
        ])?;
        let (ok, n) = all_exact(&v);
        ensure(code == 0 && ok == n, || format!("base {base}: {ok}/{n} exact"))?;
        shifted += n;
    }
    let el = start.elapsed();
    within(el, 60.0)?;
    Ok(format!(
        "{} reports at depth 1-6, {n8} at depth 8, {shifted} at shifted bases, all exact-zero ({:.2} s)",
        n,
        el.as_secs_f64()
    ))
}

// 2
fn recursion() -> Check {
    let start = Instant::now();
    let (code, v) = cli_json(&["qq", "recursion", "--algebra", SWEEP, "--depth", "1-8"])?;
    let (ok, n) = all_exact(&v);
    ensure(code == 0 && ok == n && n == 26 * 8, || {
        format!("{ok}/{n} exact, exit {code}")
    })?;
    let el = start.elapsed();
    within(el, 10.0)?;
    Ok(format!("{n} reports exact-zero ({:.2} s)", el.as_secs_f64()))
}

// 3
fn sl2_forms() -> Check {
    let a1 = load_algebra('A', 1).map_err(|e| e.to_string())?;
    let mut count = 0;
    for k in [-3, -1, 0, 1, 3] {
        let f = sl2_closed_forms(&a1, k, 8).map_err(|e| e.to_string())?;
        ensure(f.matches_series, || format!("closed forms differ at base {k}"))?;
        // L⁺ is a single term; L⁻ has one term per depth.
        ensure(f.positive.len() == 9 && f.negative.len() == 9, || {
            format!("term counts {} / {}", f.positive.len(), f.negative.len())
        })?;
        let w = verify_wronskian_sl2(&a1, k, 8).map_err(|e| e.to_string())?;
        ensure(w.is_exact_zero(), || {
            format!("Wronskian at base {k}: {:?}", w.residual_terms)
        })?;
        count += 1;
    }
    Ok(format!(
        "closed forms and Wronskian exact at depth 8 for {count} base points"
    ))
}

// 4
fn star_shifts() -> Check {
    let mut nodes = 0;
    for alg in supported_algebras() {
        for i in 0..alg.rank {
            let d = qq_star_shift_data(&alg, i).map_err(|e| e.to_string())?;
            // B_ij = d_i C_ij, built here from the Cartan matrix.
            let mut num: Vec<(usize, i64)> = Vec::new();
            for j in 0..alg.rank {
                let b = alg.sym[i] * alg.cartan[i][j];
                ensure(b == alg.sym[j] * alg.cartan[j][i], || {
                    format!("{} DC not symmetric", alg.name())
                })?;
                if b != 0 {
                    num.push((j, b));
                }
            }
            let mut den: Vec<(usize, i64)> = num.iter().map(|&(j, b)| (j, -b)).collect();
            num.sort();
            den.sort();
            let expect = (num, den);
            ensure(
                d.bae_from_qq_star == expect && d.bae_from_qq_tilde == expect,
                || {
                    format!(
                        "{} node {}: star {:?} tilde {:?} expected {:?}",
                        alg.name(),
                        i + 1,
                        d.bae_from_qq_star,
                        d.bae_from_qq_tilde,
                        expect
                    )
                },
            )?;
            nodes += 1;
        }
    }
    Ok(format!(
        "{nodes} nodes over {} algebras match {{(j, ±B_ij)}}",
        supported_algebras().len()
    ))
}

fn product_residual_oracle(
    b: &[Vec<i64>],
    v: &[C64],
    beta2: f64,
    roots: &Roots,
) -> Vec<C64> {
    // v_i⁻² Π_j Π_b (w q^{B_ij} − w_jb)/(w q^{−B_ij} − w_jb) + 1 at each root w of node i.
    let q = |s: i64| q_pow(beta2, s as f64);
    let mut out = Vec::new();
    for (i, ri) in roots.iter().enumerate() {
        for &w in ri {
            let mut p = 1.0 / (v[i] * v[i]);
            for (j, rj) in roots.iter().enumerate() {
                for &x in rj {
                    p *= (w * q(b[i][j]) - x) / (w * q(-b[i][j]) - x);
                }
            }
            out.push(p + 1.0);
        }
    }
    out
}

fn max_norm(z: &[C64]) -> f64 {
    z.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn solved(sys: &BetheSystem, init: &Roots) -> Result<qqsys::BetheSolution, String> {
    let s = sys
        .clone()
        .with_branches(sys.fit_branches(init).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    solve_newton(&s, init, &NewtonOptions::default()).map_err(|e| e.to_string())
}

// 5
fn bethe() -> Check {
    let start = Instant::now();
    let beta2 = 0.3183;
    let q = q_pow(beta2, 1.0);
    let a1 = load_algebra('A', 1).map_err(|e| e.to_string())?;

    // N = 1: w cancels and the equation reads v⁻²(q² − 1)/(q⁻² − 1) = −1,
    // i.e. (q² − 1) + v²(q⁻² − 1) = 0. With v² = q² this is an identity in q.
    let mono = |e: i64| Laurent::monomial(rat(1, 1), e);
    let cert = &(&mono(2) - &mono(0)) + &(&mono(2) * &(&mono(-2) - &mono(0)));
    ensure(cert.is_zero(), || format!("certificate reduces to {cert}"))?;
    let sys = BetheSystem::new(a1.clone(), beta2, vec![q], vec![1]).map_err(|e| e.to_string())?;
    for w in [c(1.0, 0.0), c(-0.3, 2.0), c(0.4, -0.7)] {
        let sol = solved(&sys, &vec![vec![w]])?;
        ensure(
            sol.status == SolveStatus::Underdetermined && sol.null_dim == 1,
            || format!("N=1 at {w}: {:?} null {}", sol.status, sol.null_dim),
        )?;
    }

    // N = 2: the equations are linear in (w1, w2); a nontrivial solution needs
    // v² = q⁴ and then w2 = −w1.
    let v = q * q;
    let m11 = q.powi(4) - v * v / (q * q);
    let m12 = v * v - q * q;
    ensure((m11 * m11 - m12 * m12).norm() < 1e-14, || "N=2 determinant".into())?;
    let ratio = -m11 / m12;
    let sys = BetheSystem::new(a1.clone(), beta2, vec![v], vec![2]).map_err(|e| e.to_string())?;
    let sol = solved(&sys, &vec![vec![c(1.0, 0.1), c(-0.8, 0.2)]])?;
    let b1 = a1.bmatrix.clone();
    let r2 = max_norm(&product_residual_oracle(&b1, &[v], beta2, &sol.roots));
    let (w1, w2) = (sol.roots[0][0], sol.roots[0][1]);
    ensure(
        sol.converged && r2 < 1e-10 && (w2 / w1 - ratio).norm() < 1e-10,
        || format!("N=2: residual {r2:.2e}, ratio gap {:.2e}", (w2 / w1 - ratio).norm()),
    )?;

    // A2, N = (1,0): the residual is the constant 1 − q²/v₁², so v₁ = q solves
    // for every w and any other v₁ cannot.
    let a2 = load_algebra('A', 2).map_err(|e| e.to_string())?;
    let sys = BetheSystem::new(a2.clone(), beta2, vec![q, c(1.3, 0.2)], vec![1, 0])
        .map_err(|e| e.to_string())?;
    let sol = solved(&sys, &vec![vec![c(0.6, -0.9)], vec![]])?;
    let ra = max_norm(&product_residual_oracle(&a2.bmatrix, &sys.v, beta2, &sol.roots));
    ensure(sol.converged && ra < 1e-10, || format!("A2 (1,0): residual {ra:.2e}"))?;
    let vg = c(1.3, 0.4);
    let sys = BetheSystem::new(a2.clone(), beta2, vec![vg, c(1.0, 0.0)], vec![1, 0])
        .map_err(|e| e.to_string())?;
    let sol = solved(&sys, &vec![vec![c(1.0, 0.0)], vec![]])?;
    let gap = (sol.residuals[0] - (1.0 - q * q / (vg * vg))).norm();
    ensure(!sol.converged && gap < 1e-12, || {
        format!("A2 generic v: converged {} gap {gap:.2e}", sol.converged)
    })?;

    // scaling covariance
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g2 = load_algebra('G', 2).map_err(|e| e.to_string())?;
    let sys = BetheSystem::new(g2, 0.2718, vec![c(1.1, 0.2), c(0.7, -0.4)], vec![2, 2])
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let roots: Roots = (0..2)
            .map(|_| {
                (0..2)
                    .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                    .collect()
            })
            .collect();
        let s = c(rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0));
        let scaled: Roots = roots.iter().map(|r| r.iter().map(|w| w * s).collect()).collect();
        let a = sys.product_residual(&roots).map_err(|e| e.to_string())?;
        let b = sys.product_residual(&scaled).map_err(|e| e.to_string())?;
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).norm() / (1.0 + x.norm()));
        }
    }
    ensure(worst < 1e-12, || format!("scaling drift {worst:.2e}"))?;
    let el = start.elapsed();
    within(el, 5.0)?;
    Ok(format!(
        "N=1 family certified, N=2 residual {r2:.1e}, A2 (1,0) residual {ra:.1e}, scaling drift {worst:.1e} ({:.2} s)",
        el.as_secs_f64()
    ))
}

/// Roots of a monic cubic by Durand–Kerner.
fn cubic_roots(a: [C64; 4]) -> Vec<C64> {
    let p = |x: C64| ((a[3] * x + a[2]) * x + a[1]) * x + a[0];
    let mut z = vec![c(0.4, 0.9), c(0.4, 0.9).powi(2), c(0.4, 0.9).powi(3)];
    for _ in 0..500 {
        for i in 0..3 {
            let mut d = a[3];
            for j in 0..3 {
                if j != i {
                    d *= z[i] - z[j];
                }
            }
            let step = p(z[i]) / d;
            z[i] -= step;
        }
    }
    z
}

// 6
fn gl1() -> Check {
    let p = Gl1Params::from_q(q_pow(0.3183, 1.0), c(0.8, 0.5)).map_err(|e| e.to_string())?;
    let qs = [p.q1, p.q2, p.q3];
    // One root: t = −Π(wq_k − w)/Π(w/q_k − w), evaluated directly.
    let t = gl1_single_root_t(&p);
    let mut worst_t: f64 = 0.0;
    for w in [c(1.0, 0.0), c(-0.4, 2.0), c(3.0, -1.5)] {
        let up: C64 = qs.iter().map(|&k| w * k - w).product();
        let dn: C64 = qs.iter().map(|&k| w / k - w).product();
        worst_t = worst_t.max((-up / dn - t).norm());
        let r = gl1_bae_residual(&[w], &p, t).map_err(|e| e.to_string())?;
        ensure(r[0].norm() < 1e-12 * w.norm().powi(3).max(1.0), || {
            format!("single-root residual {:.2e}", r[0].norm())
        })?;
    }
    ensure(worst_t < 1e-12, || format!("closed-form t off by {worst_t:.2e}"))?;

    // Two roots, x = w2/w1: the equation at w1 is the cubic
    // P(x) = Π(q_k − 1)(q_k − x) + t Π(q_k⁻¹ − 1)(q_k⁻¹ − x), and the one at w2 is
    // P(1/x). Common roots exist iff Res(P, x³P(1/x)) = 0; t = −1 is such a value.
    let cubic = |t: C64| -> [C64; 4] {
        let mut coef = [c(0.0, 0.0); 4];
        for (sgn, ks) in [(1.0, qs), (0.0, qs.map(|k| 1.0 / k))] {
            let pref: C64 = ks.iter().map(|k| k - 1.0).product::<C64>() * if sgn == 1.0 { c(1.0, 0.0) } else { t };
            // Π(k − x) = −x³ + e1 x² − e2 x + e3
            let e1: C64 = ks.iter().sum();
            let e2 = ks[0] * ks[1] + ks[0] * ks[2] + ks[1] * ks[2];
            let e3 = ks[0] * ks[1] * ks[2];
            coef[0] += pref * e3;
            coef[1] -= pref * e2;
            coef[2] += pref * e1;
            coef[3] -= pref;
        }
        coef
    };
    let eval = |a: &[C64; 4], x: C64| ((a[3] * x + a[2]) * x + a[1]) * x + a[0];
    let tt = c(-1.0, 0.0);
    let pc = cubic(tt);
    let mut paired = Vec::new();
    for x in cubic_roots(pc) {
        let scale = pc.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (x - 1.0).norm() > 1e-6 && eval(&pc, 1.0 / x).norm() < 1e-9 * scale {
            paired.push(x);
        }
    }
    ensure(!paired.is_empty(), || "oracle found no admissible pair".into())?;
    // Off the special value the two cubics share no root.
    let pb = cubic(c(-1.1, 0.0));
    let best = cubic_roots(pb)
        .into_iter()
        .map(|x| eval(&pb, 1.0 / x).norm())
        .fold(f64::INFINITY, f64::min);
    ensure(best > 1e-3, || format!("t = -1.1 unexpectedly solvable ({best:.2e})"))?;

    let x = paired[0];
    let sol = gl1_solve(&[c(1.0, 0.0), x * 1.05], &p, tt, &NewtonOptions::default())
        .map_err(|e| e.to_string())?;
    let ratio = sol.roots[1] / sol.roots[0];
    let gap = paired
        .iter()
        .map(|y| (ratio - y).norm())
        .fold(f64::INFINITY, f64::min);
    ensure(
        sol.converged && sol.residual_max < 1e-10 && gap < 1e-9,
        || format!("degree 2: residual {:.2e}, ratio gap {gap:.2e}", sol.residual_max),
    )?;
    Ok(format!(
        "closed-form t gap {worst_t:.1e}; degree-2 residual {:.1e}, oracle ratio gap {gap:.1e}",
        sol.residual_max
    ))
}

/// Eigenvalues of −ψ″ + (x^{2α} + ℓ(ℓ+1)/x²)ψ = Eψ by finite differences.
///
/// With x = e^t and ψ = e^{t/2}φ the problem becomes
/// −φ″ + ((ℓ+½)² + e^{(2α+2)t})φ = E e^{2t} φ, discretized on a uniform t grid
/// with Dirichlet ends. Eigenvalues come from Sturm counts of A − E W.
fn fd_levels(alpha: f64, ell: f64, n: usize, count: usize) -> Vec<f64> {
    let (t0, t1) = (-12.0, 2.5);
    let h = (t1 - t0) / n as f64;
    let ts: Vec<f64> = (1..n).map(|i| t0 + h * i as f64).collect();
    let l2 = (ell + 0.5) * (ell + 0.5);
    let diag: Vec<f64> = ts
        .iter()
        .map(|&t| 2.0 / (h * h) + l2 + ((2.0 * alpha + 2.0) * t).exp())
        .collect();
    let wt: Vec<f64> = ts.iter().map(|&t| (2.0 * t).exp()).collect();
    let off2 = 1.0 / (h * h * h * h);
    let below = |e: f64| -> usize {
        let mut neg = 0;
        let mut d = 1.0;
        for i in 0..diag.len() {
            d = diag[i] - e * wt[i] - if i > 0 { off2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                neg += 1;
            }
        }
        neg
    };
    (0..count)
        .map(|k| {
            let (mut lo, mut hi) = (0.0, 100.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

// 7
fn spectrum_anchor() -> Check {
    let start = Instant::now();
    let op = XOper::new(1.0, 0.3).map_err(|e| e.to_string())?;
    let mut qf = QFunction::new(op, QOptions::default());
    let zeros: Vec<f64> = qf
        .find_zeros(24.0, 5)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|z| z.e)
        .collect();
    ensure(zeros.len() == 5, || format!("found {} zeros", zeros.len()))?;
    let exact_gap = zeros
        .iter()
        .enumerate()
        .map(|(n, e)| (e - (4.0 * n as f64 + 3.6)).abs())
        .fold(0.0, f64::max);
    ensure(exact_gap < 1e-6, || format!("zeros off 4n+3.6 by {exact_gap:.2e}"))?;
    let coarse = fd_levels(1.0, 0.3, 20_000, 5);
    let fine = fd_levels(1.0, 0.3, 40_000, 5);
    let fd: Vec<f64> = coarse.iter().zip(&fine).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let fd_gap = fd
        .iter()
        .zip(&zeros)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(fd_gap < 1e-5, || format!("finite differences differ by {fd_gap:.2e}"))?;
    let el = start.elapsed();
    within(el, 30.0)?;
    Ok(format!(
        "max |E_n - (4n+3.6)| = {exact_gap:.1e}, finite-difference gap {fd_gap:.1e} ({:.2} s)",
        el.as_secs_f64()
    ))
}

// 8
fn ratio_constancy() -> Check {
    let start = Instant::now();
    let op = XOper::new(2.4, 0.3).map_err(|e| e.to_string())?;
    let mut qf = QFunction::new(op, QOptions::default());
    let zeros: Vec<f64> = qf
        .find_zeros(80.0, 6)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|z| z.e)
        .collect();
    ensure(zeros.len() == 6, || format!("found {} zeros", zeros.len()))?;
    let rep = bae_ratio_check(&qf, None).map_err(|e| e.to_string())?;
    ensure(rep.spread < 1e-3, || format!("spread {:.2e}", rep.spread))?;

    // Step-halving: tolerance down by 2⁵ moves neither zeros nor constancy.
    let opts = QOptions {
        rtol: QOptions::default().rtol / 32.0,
        ..QOptions::default()
    };
    let mut fine = QFunction::new(op, opts);
    let fz: Vec<f64> = fine
        .find_zeros(80.0, 6)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|z| z.e)
        .collect();
    let shift = zeros
        .iter()
        .zip(&fz)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let fine_rep = bae_ratio_check(&fine, None).map_err(|e| e.to_string())?;
    ensure(shift < 1e-7 && fine_rep.spread < 1e-3, || {
        format!("refinement moved zeros by {shift:.2e}, spread {:.2e}", fine_rep.spread)
    })?;

    let pert: Vec<f64> = zeros.iter().map(|e| e * 1.01).collect();
    let bad = ratio_check_at(&qf, &pert, None).map_err(|e| e.to_string())?;
    ensure(bad.spread >= 10.0 * rep.spread.max(fine_rep.spread), || {
        format!("perturbed spread {:.2e} vs {:.2e}", bad.spread, rep.spread)
    })?;
    let el = start.elapsed();
    within(el, 180.0)?;
    Ok(format!(
        "spread {:.1e} (rtol/32: {:.1e}, zero shift {shift:.1e}); 1% perturbed {:.1e}; R_1 = {:.6}{:+.6}i ({:.2} s)",
        rep.spread,
        fine_rep.spread,
        bad.spread,
        rep.ratios[0].re,
        rep.ratios[0].im,
        el.as_secs_f64()
    ))
}

// 9
fn trivial_monodromy() -> Check {
    let start = Instant::now();
    let (r, k, s) = (0.25, 0.45, 1.0);
    let base = KdvOper::new(r, k, vec![]).map_err(|e| e.to_string())?;
    let closed = accessory_m1_closed_form(r, k, s).map_err(|e| e.to_string())?;
    let sol = solve_accessory(&base, &[closed * 1.2], &AccessoryOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(sol.converged, || sol.message.clone())?;
    let w = sol.w[0];
    // Accessory condition from the Laurent data at w of
    // v = r(r+1)/z² + (s − k/w)/z + 2/(z−w)² + (k/w)/(z−w):
    // regular part R = r(r+1)/z² + (s − k/w)/z, v0 = R(w), v1 = R′(w).
    let rr = r * (r + 1.0);
    let v0 = rr / (w * w) + (s - k / w) / w;
    let v1 = -2.0 * rr / (w * w * w) - (s - k / w) / (w * w);
    let acc = k * k * k / (4.0 * w * w * w) - k / w * v0 + v1;
    ensure(acc.norm() < 1e-10 * (k / w).norm().powi(3), || {
        format!("accessory oracle residual {:.2e}", acc.norm())
    })?;
    ensure((w - closed).norm() < 1e-10 * closed.norm(), || {
        format!("Newton {w} vs closed form {closed}")
    })?;

    let op = KdvOper::new(r, k, vec![w]).map_err(|e| e.to_string())?;
    let radius = 0.5 * w.norm();
    let opts = OdeOptions::default();
    let lambdas = [c(1.0, 0.0), c(-2.5, 0.0), c(0.5, 2.0)];
    let mut dev: f64 = 0.0;
    let mut det: f64 = 0.0;
    let mut pert_min = f64::INFINITY;
    let moved = KdvOper::new(r, k, vec![w + 1e-2]).map_err(|e| e.to_string())?;
    for &lam in &lambdas {
        let m = monodromy_matrix(&op, 0, radius, lam, &opts).map_err(|e| e.to_string())?;
        dev = dev.max(m.deviation);
        det = det.max((m.det - 1.0).norm());
        let p = monodromy_matrix(&moved, 0, radius, lam, &opts).map_err(|e| e.to_string())?;
        det = det.max((p.det - 1.0).norm());
        pert_min = pert_min.min(p.deviation);
    }
    ensure(dev < 1e-6, || format!("||M - 1|| = {dev:.2e}"))?;
    ensure(pert_min > 0.1, || format!("perturbed ||M - 1|| = {pert_min:.2e}"))?;
    ensure(det < 1e-8, || format!("|det M - 1| = {det:.2e}"))?;
    let el = start.elapsed();
    within(el, 60.0)?;
    Ok(format!(
        "w = {:.10}, ||M - 1|| <= {dev:.1e} at 3 lambdas, perturbed >= {pert_min:.3}, |det - 1| <= {det:.1e} ({:.2} s)",
        w.re,
        el.as_secs_f64()
    ))
}

fn random_poly(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Laurent {
    Laurent::from_terms((lo..=hi).map(|e| (e, rat(rng.gen_range(-5..=5), rng.gen_range(1..=4)))))
}

// 10
fn classical_layer() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut gauges = 0;
    for r in [2usize, 3] {
        for _ in 0..50 {
            let mut m = vec![vec![Laurent::zero(); r]; r];
            for i in 0..r {
                for j in i..r {
                    m[i][j] = random_poly(&mut rng, -2, 2);
                }
                if i > 0 {
                    m[i][i - 1] = Laurent::one();
                }
            }
            let tr = (0..r - 1).fold(Laurent::zero(), |acc, i| &acc + &m[i][i]);
            m[r - 1][r - 1] = -&tr;
            let op = MatrixDiffOp::new(m).map_err(|e| e.to_string())?;
            let n: Vec<Vec<Laurent>> = (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| {
                            if j > i {
                                random_poly(&mut rng, -3, 3)
                            } else {
                                Laurent::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            let g = op.gauge(&n).map_err(|e| e.to_string())?;
            let a = canonical_form(&op).map_err(|e| e.to_string())?;
            let b = canonical_form(&g).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("gauge changed the canonical form for r = {r}"))?;
            gauges += 1;
        }
    }

    // Miura vs c(ν): apply both operators to z^s and compare with
    // Π_i (s − (r−i) − ν_i) z^{s−r}, all exact.
    let mut miura_cases = 0;
    for r in 2..=4usize {
        for _ in 0..5 {
            let mut nu: Vec<_> = (0..r - 1)
                .map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
                .collect();
            let total = nu.iter().fold(rat(0, 1), |a, x| a + x);
            nu.push(-total);
            let u: Vec<Laurent> = nu.iter().map(|x| Laurent::monomial(x.clone(), -1)).collect();
            let op = miura(&u).map_err(|e| e.to_string())?;
            let cs = c_of_nu(&nu).map_err(|e| e.to_string())?;
            for s in -2..=(r as i64 + 2) {
                let f = Laurent::monomial(rat(1, 1), s);
                let mut indicial = rat(1, 1);
                for (i, x) in nu.iter().enumerate() {
                    indicial = indicial * (rat(s - (r as i64 - i as i64 - 1), 1) - x);
                }
                let expect = Laurent::monomial(indicial, s - r as i64);
                let mut canon = f.nth_derivative(r);
                for (i, ci) in cs.iter().enumerate().take(r - 1) {
                    let sign = if (i + 1) % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
                    let coef = Laurent::monomial(sign * ci, -(i as i64) - 2);
                    canon = &canon + &(&coef * &f.nth_derivative(r - i - 2));
                }
                ensure(op.apply(&f) == expect && canon == expect, || {
                    format!("r = {r}, s = {s}: miura or c(nu) disagrees")
                })?;
            }
            miura_cases += 1;
        }
    }

    // z-form to x-form through z = x^p / p², against the closed form
    // ℓ(ℓ+1)/x² + x^{2α} − E.
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for (rn, rd, kn, kd) in [(3, 10, -7, 17), (1, 4, 9, 20), (2, 3, 1, 3)] {
        let (rq, kq) = (Q64::new(rn, rd), Q64::new(kn, kd));
        let cst = constants(rq, kq).map_err(|e| e.to_string())?;
        let (r, k) = (rn as f64 / rd as f64, kn as f64 / kd as f64);
        let alpha = -(k + 1.0) / (k + 2.0);
        let p = 2.0 * (alpha + 1.0);
        let ell = (alpha + 1.0) * (2.0 * r + 1.0) - 0.5;
        let lambda = -0.8;
        let e = -p.powf(2.0 * alpha / (alpha + 1.0)) * lambda;
        let vz = move |z: f64| r * (r + 1.0) / (z * z) + 1.0 / z + lambda * z.powf(k);
        for i in 0..20 {
            let x = 0.2 + 0.15 * i as f64;
            let got = transform_projective(vz, &cst.z_to_x_map(), x).map_err(|e| e.to_string())?;
            let want = ell * (ell + 1.0) / (x * x) + x.powf(2.0 * alpha) - e;
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
            samples += 1;
        }
    }
    ensure(worst < 1e-12, || format!("coordinate change off by {worst:.2e}"))?;

    // Constants: exact relations over Q, and the duality involution.
    let mut const_cases = 0;
    for kn in [-7i64, -3, 1, 2, 5, 11] {
        for rn in [0i64, 1, 2, 5] {
            let (r, k) = (Q64::new(rn, 2), Q64::new(kn, 4));
            let cst = constants(r, k).map_err(|e| e.to_string())?;
            let one = Q64::from_integer(1);
            let a = cst.alpha;
            let c_expect = one - Q64::from_integer(6) * a * a / (a + one);
            let ell = cst.ell;
            let delta = ((Q64::from_integer(2) * ell + one).pow(2) - Q64::from_integer(4) * a * a)
                / (Q64::from_integer(16) * (a + one));
            ensure(
                cst.central_charge == c_expect
                    && cst.delta == delta
                    && cst.beta2 * (a + one) == one
                    && a == -(k + one) / (k + Q64::from_integer(2))
                    && cst.identities_hold(),
                || format!("constants fail at r = {r}, k = {k}"),
            )?;
            const_cases += 1;
        }
    }
    for alg in supported_algebras() {
        let g = general_constants(&alg, Q64::new(3, 7)).map_err(|e| e.to_string())?;
        let back = dual_alpha(g.dual_alpha, g.lacing).map_err(|e| e.to_string())?;
        ensure(back == g.alpha && g.spectral_term_is_constant(), || {
            format!("{}: duality or spectral-term check fails", alg.name())
        })?;
    }
    Ok(format!(
        "{gauges} gauges exact, {miura_cases} Miura/c(nu) cases exact, {samples} coordinate samples within {worst:.1e}, {const_cases} constant sets exact"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 QQ-tilde verification sweep", qq_sweep),
        ("2 recursion identity", recursion),
        ("3 sl2 closed forms and Wronskian", sl2_forms),
        ("4 QQ*/QQ-tilde Bethe shifts", star_shifts),
        ("5 Bethe solver", bethe),
        ("6 gl1 toroidal", gl1),
        ("7 spectrum anchor", spectrum_anchor),
        ("8 Bethe-ratio constancy", ratio_constancy),
        ("9 trivial monodromy", trivial_monodromy),
        ("10 exact classical layer", classical_layer),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS [{name}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
