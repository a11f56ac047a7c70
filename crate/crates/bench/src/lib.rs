//! Fixed inputs shared by the benchmarks.

use num_complex::Complex;
use qqsys::operkit::laurent::rat;
use qqsys::operkit::{accessory_m1_closed_form, KdvOper};
use qqsys::{load_algebra, AlgebraData, BetheSystem, Laurent, MatrixDiffOp, C64};

pub fn algebra(series: char, rank: usize) -> AlgebraData {
    load_algebra(series, rank).expect("known algebra")
}

/// G2 with two roots per node and generic twists.
pub fn g2_system() -> (BetheSystem, Vec<Vec<C64>>) {
    let sys = BetheSystem::new(
        algebra('G', 2),
        0.2718,
        vec![Complex::new(1.1, 0.2), Complex::new(0.7, -0.4)],
        vec![2, 2],
    )
    .expect("valid system");
    let init = vec![
        vec![Complex::new(0.9, 0.3), Complex::new(-0.6, 1.1)],
        vec![Complex::new(1.4, -0.5), Complex::new(-1.2, -0.8)],
    ];
    (sys, init)
}

/// A traceless sl_r operator with a dense upper triangle and a gauge to go with it.
pub fn ds_pair(r: usize) -> (MatrixDiffOp, Vec<Vec<Laurent>>) {
    let poly = |seed: i64| {
        Laurent::from_terms((-2..=2).map(|e| (e, rat((seed * 7 + e * 3) % 5 - 2, 1 + (seed + e).rem_euclid(3)))))
    };
    let mut m = vec![vec![Laurent::zero(); r]; r];
    let mut n = vec![vec![Laurent::zero(); r]; r];
    for i in 0..r {
        for j in i..r {
            m[i][j] = poly((i * r + j) as i64);
            if j > i {
                n[i][j] = poly((i + 3 * j) as i64 + 11);
            }
        }
        if i > 0 {
            m[i][i - 1] = Laurent::one();
        }
    }
    let tr = (0..r - 1).fold(Laurent::zero(), |acc, i| &acc + &m[i][i]);
    m[r - 1][r - 1] = -&tr;
    (MatrixDiffOp::new(m).expect("valid operator"), n)
}

/// The one-root oper with trivial monodromy at r = 1/4, k = 0.45.
pub fn kdv_m1() -> KdvOper {
    let w = accessory_m1_closed_form(0.25, 0.45, 1.0).expect("closed form");
    KdvOper::new(0.25, 0.45, vec![w]).expect("valid oper")
}
