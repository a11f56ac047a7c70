//! Adaptive Dormand–Prince 5(4) for complex linear systems on a real interval.

use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            h0: 1e-3,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `after_step` runs on every accepted state and may rescale it in place.
pub fn integrate<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [C64; N],
    t1: f64,
    opts: &OdeOptions,
    mut after_step: G,
) -> Result<([C64; N], OdeStats)>
where
    F: Fn(f64, &[C64; N]) -> [C64; N],
    G: FnMut(&mut [C64; N]),
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h0.min(span).max(1e-300) * dir;
    let mut k1 = f(t, &y);
    let mut stats = OdeStats {
        accepted: 0,
        rejected: 0,
    };
    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(Error::Numerical(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let ynew = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(t + h, &ynew);
        let ymax = y
            .iter()
            .chain(ynew.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opts.rtol * y[i].norm().max(ynew[i].norm()).max(1e-3 * ymax).max(1e-300);
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            h *= 0.25;
            stats.rejected += 1;
            if h.abs() < 1e-14 * span.max(1e-300) {
                return Err(Error::Numerical(format!("non-finite state near t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
            after_step(&mut y);
            k1 = if y == ynew { k7 } else { f(t, &y) };
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
        if h.abs() < 1e-15 * t.abs().max(1e-300) {
            return Err(Error::Numerical(format!("step size underflow at t = {t}")));
        }
    }
    Ok((y, stats))
}
