//! Cartan data for the finite types A..G and the diagram folding used by the
//! twisted QQ̃-system.
//!
//! The tables live in `data/algebras.txt` (Bourbaki numbering) and are parsed
//! once on first use. Everything downstream reads through [`AlgebraData`], so
//! the numbering convention is fixed in exactly one place.

use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Rational with `i64` parts, used for the small exact quantities in this module.
pub type Q64 = Ratio<i64>;

const BUILTIN_TABLE: &str = include_str!("../data/algebras.txt");
const TABLE_FORMAT: &str = "format qqsys-algebras 1";

/// Cartan data of one finite simple Lie algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlgebraData {
    pub type_tag: char,
    pub rank: usize,
    /// `cartan[i][j] = <alpha_i^vee, alpha_j>`.
    pub cartan: Vec<Vec<i64>>,
    /// Symmetrizer `d_i` (long roots carry the larger value).
    pub sym: Vec<i64>,
    /// `B = DC`, the symmetrized Cartan matrix `(alpha_i, alpha_j)`.
    pub bmatrix: Vec<Vec<i64>>,
    /// Exponents as a multiset, sorted ascending. `D_{2n}` repeats one value.
    pub exponents: Vec<i64>,
    pub coxeter: i64,
    pub dual_coxeter: i64,
    /// Marks `a_0, a_1, .., a_n` of the highest root, with `a_0 = 1`.
    pub kac_labels: Vec<i64>,
    #[serde(skip)]
    cartan_inv: Vec<Vec<Q64>>,
}

impl AlgebraData {
    /// Short name such as `"G2"`.
    pub fn name(&self) -> String {
        format!("{}{}", self.type_tag, self.rank)
    }

    pub fn is_simply_laced(&self) -> bool {
        self.sym.iter().all(|&d| d == 1)
    }

    pub fn check_node(&self, i: usize) -> Result<()> {
        if i < self.rank {
            Ok(())
        } else {
            Err(Error::BadNode {
                node: i,
                rank: self.rank,
            })
        }
    }

    /// Nodes `j != i` with `C_ij != 0`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.rank)
            .filter(|&j| j != i && self.cartan[i][j] != 0)
            .collect()
    }

    /// Coordinates of `alpha_i` in the fundamental-weight basis: `alpha_i = sum_j C_ji omega_j`.
    pub fn alpha_in_omega(&self, i: usize) -> Vec<i64> {
        (0..self.rank).map(|j| self.cartan[j][i]).collect()
    }

    /// Expands a weight given in the omega basis into simple-root coordinates.
    pub fn omega_to_alpha(&self, w: &[Q64]) -> Vec<Q64> {
        // w = sum_j m_j alpha_j = sum_k (sum_j C_kj m_j) omega_k, so m = C^{-1} w.
        (0..self.rank)
            .map(|j| {
                (0..self.rank).fold(Q64::from_integer(0), |acc, k| {
                    acc + self.cartan_inv[j][k] * w[k]
                })
            })
            .collect()
    }

    /// Determinant of the Cartan matrix.
    pub fn cartan_det(&self) -> Q64 {
        rational_det(&self.cartan)
    }
}

impl fmt::Display for AlgebraData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A parsed table of algebra records.
#[derive(Debug, Clone)]
pub struct AlgebraTable {
    records: Vec<AlgebraData>,
}

impl AlgebraTable {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static AlgebraTable {
        static TABLE: OnceLock<AlgebraTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            AlgebraTable::parse(BUILTIN_TABLE).expect("builtin algebra table is valid")
        })
    }

    /// Parses the plain-text table format documented in the README.
    pub fn parse(text: &str) -> Result<AlgebraTable> {
        let mut records = Vec::new();
        let mut saw_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != TABLE_FORMAT {
                    return Err(Error::Table {
                        line: line_no,
                        msg: format!("expected header `{TABLE_FORMAT}`"),
                    });
                }
                saw_header = true;
                continue;
            }
            let rec = parse_record(line).map_err(|msg| Error::Table { line: line_no, msg })?;
            records.push(rec);
        }
        if !saw_header {
            return Err(Error::Table {
                line: 0,
                msg: "missing format header".into(),
            });
        }
        Ok(AlgebraTable { records })
    }

    pub fn get(&self, type_tag: char, rank: usize) -> Result<&AlgebraData> {
        let tag = type_tag.to_ascii_uppercase();
        self.records
            .iter()
            .find(|r| r.type_tag == tag && r.rank == rank)
            .ok_or_else(|| Error::UnknownAlgebra(format!("{tag}{rank}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &AlgebraData> {
        self.records.iter()
    }
}

/// Loads `(type_tag, rank)` from the builtin table.
pub fn load_algebra(type_tag: char, rank: usize) -> Result<AlgebraData> {
    AlgebraTable::builtin().get(type_tag, rank).cloned()
}

/// Parses names like `"A2"`, `"g2"`, `"E8"`.
pub fn parse_algebra(name: &str) -> Result<AlgebraData> {
    let name = name.trim();
    let mut chars = name.chars();
    let tag = chars
        .next()
        .ok_or_else(|| Error::UnknownAlgebra(name.to_string()))?;
    let rank: usize = chars
        .as_str()
        .parse()
        .map_err(|_| Error::UnknownAlgebra(name.to_string()))?;
    load_algebra(tag, rank)
}

/// All algebras in the builtin table, in table order.
pub fn supported_algebras() -> Vec<AlgebraData> {
    AlgebraTable::builtin().iter().cloned().collect()
}

fn parse_ints(field: &str) -> std::result::Result<Vec<i64>, String> {
    field
        .split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| format!("bad integer `{t}`")))
        .collect()
}

fn parse_record(line: &str) -> std::result::Result<AlgebraData, String> {
    let fields: Vec<&str> = line.split(';').map(str::trim).collect();
    if fields.len() != 7 {
        return Err(format!("expected 7 fields, found {}", fields.len()));
    }
    let head: Vec<&str> = fields[0].split_whitespace().collect();
    if head.len() != 2 || head[0].chars().count() != 1 {
        return Err("first field must be `<type> <rank>`".into());
    }
    let type_tag = head[0].chars().next().unwrap().to_ascii_uppercase();
    if !"ABCDEFG".contains(type_tag) {
        return Err(format!("unknown type `{type_tag}`"));
    }
    let rank: usize = head[1].parse().map_err(|_| "bad rank".to_string())?;
    if rank == 0 {
        return Err("rank must be positive".into());
    }
    let cartan: Vec<Vec<i64>> = fields[1]
        .split(',')
        .map(parse_ints)
        .collect::<std::result::Result<_, _>>()?;
    if cartan.len() != rank || cartan.iter().any(|r| r.len() != rank) {
        return Err("cartan matrix has wrong shape".into());
    }
    let sym = parse_ints(fields[2])?;
    let exponents = {
        let mut e = parse_ints(fields[3])?;
        e.sort_unstable();
        e
    };
    let coxeter: i64 = fields[4]
        .parse()
        .map_err(|_| "bad coxeter number".to_string())?;
    let dual_coxeter: i64 = fields[5]
        .parse()
        .map_err(|_| "bad dual coxeter number".to_string())?;
    let kac_labels = parse_ints(fields[6])?;
    build_record(
        type_tag,
        rank,
        cartan,
        sym,
        exponents,
        coxeter,
        dual_coxeter,
        kac_labels,
    )
}

#[allow(clippy::too_many_arguments)]
fn build_record(
    type_tag: char,
    rank: usize,
    cartan: Vec<Vec<i64>>,
    sym: Vec<i64>,
    exponents: Vec<i64>,
    coxeter: i64,
    dual_coxeter: i64,
    kac_labels: Vec<i64>,
) -> std::result::Result<AlgebraData, String> {
    if sym.len() != rank {
        return Err("symmetrizer length differs from rank".into());
    }
    if sym.iter().any(|&d| d <= 0) {
        return Err("symmetrizer entries must be positive".into());
    }
    if sym.iter().fold(0i64, |g, &d| g.gcd(&d)) != 1 {
        return Err("symmetrizer entries must be relatively prime".into());
    }
    for i in 0..rank {
        if cartan[i][i] != 2 {
            return Err(format!("C[{i}][{i}] must be 2"));
        }
        for j in 0..rank {
            if i != j && cartan[i][j] > 0 {
                return Err(format!("C[{i}][{j}] must be non-positive"));
            }
        }
    }
    let bmatrix: Vec<Vec<i64>> = (0..rank)
        .map(|i| (0..rank).map(|j| sym[i] * cartan[i][j]).collect())
        .collect();
    for i in 0..rank {
        for j in 0..rank {
            if bmatrix[i][j] != bmatrix[j][i] {
                return Err(format!("B = DC is not symmetric at ({i},{j})"));
            }
        }
    }
    if exponents.len() != rank {
        return Err("exponent count differs from rank".into());
    }
    if kac_labels.len() != rank + 1 || kac_labels[0] != 1 {
        return Err("labels must list a_0 = 1 followed by rank entries".into());
    }
    let cartan_inv =
        rational_inverse(&cartan).ok_or_else(|| "cartan matrix is singular".to_string())?;
    Ok(AlgebraData {
        type_tag,
        rank,
        cartan,
        sym,
        bmatrix,
        exponents,
        coxeter,
        dual_coxeter,
        kac_labels,
        cartan_inv,
    })
}

fn rational_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<Q64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q64>> = m
        .iter()
        .map(|r| r.iter().map(|&x| Q64::from_integer(x)).collect())
        .collect();
    let mut inv: Vec<Vec<Q64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Q64::from_integer(i64::from(i == j)))
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != Q64::from_integer(0))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col && a[r][col] != Q64::from_integer(0) {
                let f = a[r][col];
                for j in 0..n {
                    let (ac, ic) = (a[col][j], inv[col][j]);
                    a[r][j] -= f * ac;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    Some(inv)
}

fn rational_det(m: &[Vec<i64>]) -> Q64 {
    let n = m.len();
    let mut a: Vec<Vec<Q64>> = m
        .iter()
        .map(|r| r.iter().map(|&x| Q64::from_integer(x)).collect())
        .collect();
    let mut det = Q64::from_integer(1);
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != Q64::from_integer(0)) else {
            return Q64::from_integer(0);
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            let f = a[r][col] / p;
            for j in col..n {
                let v = a[col][j];
                a[r][j] -= f * v;
            }
        }
    }
    det
}

/// Orbit data of a diagram automorphism of a simply-laced diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistedFoldData {
    pub algebra: String,
    pub sigma: Vec<usize>,
    /// Order of `sigma`, 2 or 3.
    pub order: usize,
    /// Orbits of `sigma`, each sorted, ordered by smallest element.
    pub orbits: Vec<Vec<usize>>,
    /// Chosen representative of each orbit.
    pub representatives: Vec<usize>,
    /// Twisted symmetrizer per orbit: `r`, `1` or `1/2`.
    #[serde(serialize_with = "ser_ratios")]
    pub d: Vec<Q64>,
    /// Cartan entries between representatives.
    pub cartan: Vec<Vec<i64>>,
}

fn ser_ratios<S: serde::Serializer>(v: &[Q64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

impl TwistedFoldData {
    /// Orbits `j` adjacent to orbit `i` (`C_ij < 0` between representatives).
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.orbits.len())
            .filter(|&j| j != i && self.cartan[i][j] < 0)
            .collect()
    }
}

/// Folds a simply-laced diagram by the automorphism `sigma` (0-based images).
pub fn fold_twisted(alg: &AlgebraData, sigma: &[usize]) -> Result<TwistedFoldData> {
    let n = alg.rank;
    if !alg.is_simply_laced() || !matches!(alg.type_tag, 'A' | 'D' | 'E') {
        return Err(Error::Invalid(format!(
            "{} is not of type A, D or E",
            alg.name()
        )));
    }
    if sigma.len() != n {
        return Err(Error::Invalid(format!(
            "permutation has length {}, expected {n}",
            sigma.len()
        )));
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(Error::Invalid("sigma is not a permutation".into()));
        }
        seen[s] = true;
    }
    for i in 0..n {
        for j in 0..n {
            if alg.cartan[sigma[i]][sigma[j]] != alg.cartan[i][j] {
                return Err(Error::Invalid("sigma is not a diagram automorphism".into()));
            }
        }
    }
    let order = (1..=6)
        .find(|&k| (0..n).all(|i| (0..k).fold(i, |x, _| sigma[x]) == i))
        .unwrap_or(0);
    if order != 2 && order != 3 {
        return Err(Error::Invalid(format!(
            "automorphism has order {order}, expected 2 or 3"
        )));
    }

    let mut orbit_of = vec![usize::MAX; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let mut orb = vec![i];
        let mut x = sigma[i];
        while x != i {
            orb.push(x);
            x = sigma[x];
        }
        orb.sort_unstable();
        for &x in &orb {
            orbit_of[x] = orbits.len();
        }
        orbits.push(orb);
    }

    // First representative choice (in lexicographic order) satisfying the -1 rule.
    let m = orbits.len();
    let mut choice = vec![0usize; m];
    let reps = loop {
        let reps: Vec<usize> = (0..m).map(|o| orbits[o][choice[o]]).collect();
        if representatives_ok(alg, &orbits, &reps) {
            break reps;
        }
        let mut k = m;
        loop {
            if k == 0 {
                return Err(Error::Invalid(
                    "no admissible choice of orbit representatives".into(),
                ));
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < orbits[k].len() {
                break;
            }
            choice[k] = 0;
        }
    };

    let d = reps
        .iter()
        .map(|&i| match alg.cartan[i][sigma[i]] {
            2 => Ok(Q64::from_integer(order as i64)),
            0 => Ok(Q64::from_integer(1)),
            -1 => Ok(Q64::new(1, 2)),
            c => Err(Error::Invalid(format!("unexpected C_(i,sigma(i)) = {c}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let cartan = reps
        .iter()
        .map(|&i| reps.iter().map(|&j| alg.cartan[i][j]).collect())
        .collect();
    Ok(TwistedFoldData {
        algebra: alg.name(),
        sigma: sigma.to_vec(),
        order,
        orbits,
        representatives: reps,
        d,
        cartan,
    })
}

fn representatives_ok(alg: &AlgebraData, orbits: &[Vec<usize>], reps: &[usize]) -> bool {
    for (a, &i) in reps.iter().enumerate() {
        for (b, &j) in reps.iter().enumerate() {
            if a == b {
                continue;
            }
            let touches = orbits[b].iter().any(|&x| alg.cartan[i][x] != 0);
            if touches && alg.cartan[i][j] != -1 {
                return false;
            }
        }
    }
    true
}

/// Langlands-dual deformation parameter: `dual + 1 = 1 / (r_check (alpha + 1))`.
pub fn dual_alpha(alpha: Q64, r_check: i64) -> Result<Q64> {
    if r_check <= 0 {
        return Err(Error::Invalid(format!(
            "r_check must be positive, got {r_check}"
        )));
    }
    let s = alpha + Q64::from_integer(1);
    if s == Q64::from_integer(0) {
        return Err(Error::Invalid("alpha = -1 has no dual".into()));
    }
    Ok(Q64::from_integer(1) / (Q64::from_integer(r_check) * s) - Q64::from_integer(1))
}
