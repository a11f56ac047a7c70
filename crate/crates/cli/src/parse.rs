//! Literal syntax shared by the subcommands.
//!
//! Complex numbers are written `a+bi`, `-2.5i`, `1e-3-4i` or plain reals.
//! Root sets are grouped by node with `;` and separated within a node by `,`,
//! so `0.5+0.1i;` is one root at node 1 and none at node 2.

use std::str::FromStr;

use num_complex::Complex;
use qqsys::{parse_algebra, supported_algebras, AlgebraData, C64, Q64};

use crate::CliError;

fn bad(what: &str, s: &str) -> CliError {
    CliError::usage(format!("cannot parse {what} from {s:?}"))
}

pub fn complex(s: &str) -> Result<C64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad("a complex number", s));
    }
    let Some(body) = t.strip_suffix('i') else {
        let re = f64::from_str(&t).map_err(|_| bad("a complex number", s))?;
        return Ok(Complex::new(re, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |p: &str| -> Result<f64, CliError> {
        match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => f64::from_str(p).map_err(|_| bad("a complex number", s)),
        }
    };
    let (re, im) = match split {
        Some(k) => (
            f64::from_str(&body[..k]).map_err(|_| bad("a complex number", s))?,
            imag(&body[k..])?,
        ),
        None => (0.0, imag(body)?),
    };
    let z = Complex::new(re, im);
    if !z.is_finite() {
        return Err(bad("a finite complex number", s));
    }
    Ok(z)
}

pub fn complex_list(s: &str) -> Result<Vec<C64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(complex)
        .collect()
}

/// Node-grouped values, e.g. `1+i,2;3`.
pub fn grouped<T>(
    s: &str,
    nodes: usize,
    item: impl Fn(&str) -> Result<T, CliError>,
) -> Result<Vec<Vec<T>>, CliError> {
    let groups: Vec<&str> = s.split(';').collect();
    if groups.len() != nodes {
        return Err(CliError::usage(format!(
            "expected {nodes} ';'-separated groups, got {} in {s:?}",
            groups.len()
        )));
    }
    groups
        .iter()
        .map(|g| {
            g.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(&item)
                .collect()
        })
        .collect()
}

pub fn int_list<T: FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| T::from_str(x).map_err(|_| bad("an integer", x)))
        .collect()
}

/// `6`, `1-6` or `1,3,5`.
pub fn depths(s: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad("a depth range", part))?;
                let b: usize = b.trim().parse().map_err(|_| bad("a depth range", part))?;
                if a > b {
                    return Err(bad("a depth range", part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad("a depth", part))?),
        }
    }
    if out.is_empty() {
        return Err(bad("a depth list", s));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Exact rational from `3`, `-1/2` or a terminating decimal such as `0.25`.
pub fn rational(s: &str) -> Result<Q64, CliError> {
    let t = s.trim();
    if let Ok(q) = Q64::from_str(t) {
        return Ok(q);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').ok_or_else(|| bad("a rational", s))?;
    if frac.len() > 15 || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("a rational", s));
    }
    let den = 10i64.pow(frac.len() as u32);
    let digits = format!("{int}{frac}");
    let num: i64 = if digits.is_empty() {
        return Err(bad("a rational", s));
    } else {
        digits.parse().map_err(|_| bad("a rational", s))?
    };
    let q = Q64::new(num, den);
    Ok(if neg { -q } else { q })
}

/// One `v_i` token: `q`, `q^N`, `-q^N`, or a complex literal.
pub fn v_token(s: &str, q: C64) -> Result<C64, CliError> {
    let t = s.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) if b.starts_with('q') => (-1.0, b),
        _ => (1.0, t),
    };
    if let Some(rest) = body.strip_prefix('q') {
        let n: i32 = match rest.strip_prefix('^') {
            Some(e) => e.parse().map_err(|_| bad("a power of q", t))?,
            None if rest.is_empty() => 1,
            None => return Err(bad("a power of q", t)),
        };
        return Ok(q.powi(n) * sign);
    }
    complex(t)
}

pub fn v_list(s: &str, q: C64) -> Result<Vec<C64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| v_token(x, q))
        .collect()
}

/// `G2`, `A1,A2`, or `all` for every supported algebra.
pub fn algebras(names: &[String]) -> Result<Vec<AlgebraData>, CliError> {
    let mut out = Vec::new();
    for n in names.iter().flat_map(|n| n.split(',')).map(str::trim) {
        if n.eq_ignore_ascii_case("all") {
            out.extend(supported_algebras());
        } else if !n.is_empty() {
            out.push(parse_algebra(n)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("no algebra selected"));
    }
    Ok(out)
}
