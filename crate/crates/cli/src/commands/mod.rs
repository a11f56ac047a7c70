//! One module per subcommand group.

pub mod bae;
pub mod lie;
pub mod odeim;
pub mod oper;
pub mod qq;

use qqsys::C64;
use serde::Serialize;

/// Complex number as `{re, im}` in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cx {
    fn from(z: C64) -> Cx {
        Cx { re: z.re, im: z.im }
    }
}

pub fn cx(z: &[C64]) -> Vec<Cx> {
    z.iter().map(|&w| w.into()).collect()
}

pub fn max_norm(z: &[C64]) -> f64 {
    z.iter().map(|w| w.norm()).fold(0.0, f64::max)
}
