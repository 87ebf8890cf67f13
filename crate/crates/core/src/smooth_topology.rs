//! Framed links, their linking matrices and the first homology of the surgered
//! manifold. This is the smooth oracle every contact-level construction is
//! checked against.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::contact_diagram::{smooth_framing, ContactDiagram, DiagramError, KnotType};
use crate::rationals::SurgeryCoefficient;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("component {0} has contact coefficient {1}; normalize the diagram to ±1 first")]
    NormalizationRequired(String, String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("linking matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("{n} tags for {m} components")]
    TagCount { n: usize, m: usize },
    #[error("blow-down not applicable to component {index}: {reason}")]
    MoveNotApplicable { index: usize, reason: String },
    #[error("bad manifold name {0:?}")]
    BadManifold(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Smooth knot type of a framed-link component, as far as it is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentTag {
    Unknot,
    RhTrefoil,
    Opaque,
}

impl From<KnotType> for ComponentTag {
    fn from(k: KnotType) -> Self {
        match k {
            KnotType::Unknot => ComponentTag::Unknot,
            KnotType::RhTrefoil => ComponentTag::RhTrefoil,
        }
    }
}

/// Integer framed link: framings on the diagonal, linking numbers off it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedLink {
    matrix: Vec<Vec<i64>>,
    tags: Vec<ComponentTag>,
}

impl FramedLink {
    pub fn new(matrix: Vec<Vec<i64>>, tags: Vec<ComponentTag>) -> Result<Self, TopologyError> {
        let n = matrix.len();
        for row in &matrix {
            if row.len() != n {
                return Err(TopologyError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(TopologyError::NotSymmetric(i, j));
                }
            }
        }
        if tags.len() != n {
            return Err(TopologyError::TagCount {
                n: tags.len(),
                m: n,
            });
        }
        Ok(Self { matrix, tags })
    }

    /// Framed link with every component tagged opaque.
    pub fn untagged(matrix: Vec<Vec<i64>>) -> Result<Self, TopologyError> {
        let n = matrix.len();
        Self::new(matrix, vec![ComponentTag::Opaque; n])
    }

    pub fn n(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn tags(&self) -> &[ComponentTag] {
        &self.tags
    }
}

/// `H_1 ≅ Z^free_rank ⊕ Z/d_1 ⊕ … ⊕ Z/d_m` with `d_i ≥ 2` and `d_i | d_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyResult {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyResult {
    /// Group order, with `0` standing for an infinite group.
    pub fn order(&self) -> BigInt {
        if self.free_rank > 0 {
            BigInt::zero()
        } else {
            self.torsion.iter().product()
        }
    }

    /// Cyclic (including trivial and `Z`).
    pub fn is_cyclic(&self) -> bool {
        self.free_rank + self.torsion.len() <= 1
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("0");
        }
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        f.write_str(&parts.join(" + "))
    }
}

/// Framed link of a normalized contact diagram: smooth framing `tb ± 1` on the
/// diagonal, recorded linkings elsewhere.
pub fn linking_matrix(d: &ContactDiagram) -> Result<FramedLink, TopologyError> {
    let comps = d.components();
    let mut matrix = vec![vec![0i64; comps.len()]; comps.len()];
    let mut tags = Vec::with_capacity(comps.len());
    for (i, c) in comps.iter().enumerate() {
        let unit = c
            .coeff
            .as_ref()
            .is_some_and(|r| r.is_integer_value(1) || r.is_integer_value(-1));
        if !unit {
            let shown = c
                .coeff
                .as_ref()
                .map_or("none".to_string(), |r| r.to_string());
            return Err(TopologyError::NormalizationRequired(
                c.id.to_string(),
                shown,
            ));
        }
        let framing = smooth_framing(c).expect("coefficient present");
        matrix[i][i] = framing
            .finite()
            .and_then(|q| q.to_integer().to_i64())
            .expect("integer framing");
        for (j, o) in comps.iter().enumerate() {
            if i != j {
                matrix[i][j] = d.linking(&c.id, &o.id);
            }
        }
        tags.push(d.knot_type(&c.id)?.into());
    }
    FramedLink::new(matrix, tags)
}

/// Arithmetic the elimination routines need; `None` signals overflow.
trait Exact: Clone + Integer + Signed + CheckedMul + CheckedSub + From<i64> {}
impl Exact for i128 {}
impl Exact for BigInt {}

fn lift<T: Exact>(m: &[Vec<i64>]) -> Vec<Vec<T>> {
    m.iter()
        .map(|r| r.iter().map(|&x| T::from(x)).collect())
        .collect()
}

fn min_nonzero<T: Exact>(a: &[Vec<T>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().skip(t) {
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Diagonalizes by unimodular row and column operations and returns the
/// absolute values of the nonzero diagonal entries.
fn diagonal_entries<T: Exact>(mut a: Vec<Vec<T>>, cols: usize) -> Option<Vec<T>> {
    let rows = a.len();
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = min_nonzero(&a, t) else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut again = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let sub = q.checked_mul(&a[t][j])?;
                    a[i][j] = a[i][j].checked_sub(&sub)?;
                }
                if !a[i][t].is_zero() {
                    again = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let sub = q.checked_mul(&row[t])?;
                    row[j] = row[j].checked_sub(&sub)?;
                }
                if !a[t][j].is_zero() {
                    again = true;
                }
            }
            if !again {
                break;
            }
            // a remainder is smaller than the pivot: move it into place
            let (pi, pj) = min_nonzero(&a, t).expect("nonzero remainder");
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
        }
        diag.push(a[t][t].abs());
    }
    Some(diag)
}

/// Invariant factors of the cokernel of an integer matrix.
pub fn smith_normal_form(m: &[Vec<i64>]) -> HomologyResult {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let diag: Vec<BigInt> = match diagonal_entries::<i128>(lift(m), cols) {
        Some(d) => d.into_iter().map(BigInt::from).collect(),
        None => diagonal_entries::<BigInt>(lift(m), cols).expect("big integers do not overflow"),
    };
    let mut factors = diag;
    for i in 0..factors.len() {
        for j in i + 1..factors.len() {
            let g = factors[i].gcd(&factors[j]);
            let l = factors[i].lcm(&factors[j]);
            factors[i] = g;
            factors[j] = l;
        }
    }
    HomologyResult {
        free_rank: rows - factors.len(),
        torsion: factors.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// First homology of the manifold obtained by surgery on a framed link.
pub fn h1(fl: &FramedLink) -> HomologyResult {
    smith_normal_form(fl.matrix())
}

/// First homology of a normalized contact diagram's underlying manifold.
pub fn h1_diagram(d: &ContactDiagram) -> Result<HomologyResult, TopologyError> {
    Ok(h1(&linking_matrix(d)?))
}

fn bareiss<T: Exact>(mut a: Vec<Vec<T>>) -> Option<T> {
    let n = a.len();
    if n == 0 {
        return Some(T::one());
    }
    let mut negate = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Some(T::zero());
            };
            a.swap(k, p);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let lhs = a[i][j].checked_mul(&a[k][k])?;
                let rhs = a[i][k].checked_mul(&a[k][j])?;
                a[i][j] = lhs.checked_sub(&rhs)? / prev.clone();
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Some(if negate { -d } else { d })
}

/// Exact determinant by fraction-free elimination.
pub fn det_signed(m: &[Vec<i64>]) -> Result<BigInt, TopologyError> {
    let n = m.len();
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(TopologyError::NotSquare {
            rows: n,
            cols: row.len(),
        });
    }
    Ok(match bareiss::<i128>(lift(m)) {
        Some(d) => BigInt::from(d),
        None => bareiss::<BigInt>(lift(m)).expect("big integers do not overflow"),
    })
}

/// Blows down a `±1`-framed unknot. Components that linked it lose their
/// knot-type tag, since twisting along the disk can knot them.
pub fn blow_down(fl: &FramedLink, i: usize) -> Result<FramedLink, TopologyError> {
    let n = fl.n();
    let not_applicable = |reason: String| TopologyError::MoveNotApplicable { index: i, reason };
    if i >= n {
        return Err(not_applicable(format!("only {n} components")));
    }
    if fl.tags[i] != ComponentTag::Unknot {
        return Err(not_applicable(format!(
            "component is tagged {:?}",
            fl.tags[i]
        )));
    }
    let eps = fl.matrix[i][i];
    if eps != 1 && eps != -1 {
        return Err(not_applicable(format!("framing {eps} is not ±1")));
    }
    let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let matrix = keep
        .iter()
        .map(|&j| {
            keep.iter()
                .map(|&k| fl.matrix[j][k] - eps * fl.matrix[i][j] * fl.matrix[i][k])
                .collect()
        })
        .collect();
    let tags = keep
        .iter()
        .map(|&j| {
            if fl.matrix[i][j] == 0 {
                fl.tags[j]
            } else {
                ComponentTag::Opaque
            }
        })
        .collect();
    FramedLink::new(matrix, tags)
}

/// Whether `|H_1|` of the third manifold of a surgery triangle can be
/// `|d_{M_n} ± d_M|`.
pub fn triangle_det_check(d_m: u64, d_mn: u64, d_mn1: u64) -> bool {
    d_mn1 == d_m + d_mn || d_mn1 == d_m.abs_diff(d_mn)
}

/// Named closed oriented 3-manifolds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ManifoldId {
    S3,
    S1xS2,
    /// `L(p, q)` with `p ≥ 2`, `0 < q < p`, `gcd(p, q) = 1`.
    Lens {
        p: u64,
        q: u64,
    },
    PoincareSphere,
    /// `−V_k`, the orientation reversal of `Y_{k/(k−1)}`.
    MinusVk(u64),
    /// `r`-surgery on the right-handed trefoil.
    Yr(SurgeryCoefficient),
    Opaque(String),
}

impl ManifoldId {
    /// Normalizes `L(1, q)` to `S³` and `L(0, 1)` to `S¹×S²`; `p` is taken up to sign.
    pub fn lens(p: i64, q: i64) -> Result<Self, TopologyError> {
        let p_abs = p.unsigned_abs();
        let bad = || TopologyError::BadManifold(format!("L({p},{q})"));
        if p_abs.gcd(&q.unsigned_abs()) != 1 {
            return Err(bad());
        }
        Ok(match p_abs {
            0 => ManifoldId::S1xS2,
            1 => ManifoldId::S3,
            _ => ManifoldId::Lens {
                p: p_abs,
                q: q.rem_euclid(p_abs as i64) as u64,
            },
        })
    }

    /// `Y_∞ = S³`; every other slope stays symbolic.
    pub fn yr(r: SurgeryCoefficient) -> Self {
        if r.is_infinite() {
            ManifoldId::S3
        } else {
            ManifoldId::Yr(r)
        }
    }

    /// `V_k = Y_{k/(k−1)}`.
    pub fn vk(k: u64) -> Self {
        Self::yr(SurgeryCoefficient::new(k, k as i64 - 1).expect("k >= 1"))
    }

    /// `|H_1|`, with `0` for infinite `H_1`; `None` when unknown.
    pub fn h1_order(&self) -> Option<BigInt> {
        match self {
            ManifoldId::S3 | ManifoldId::PoincareSphere => Some(BigInt::one()),
            ManifoldId::S1xS2 => Some(BigInt::zero()),
            ManifoldId::Lens { p, .. } => Some(BigInt::from(*p)),
            ManifoldId::MinusVk(k) => Some(BigInt::from(*k)),
            ManifoldId::Yr(r) => Some(r.numerator().abs()),
            ManifoldId::Opaque(_) => None,
        }
    }

    /// The manifold `−M` whose Heegaard Floer group holds the contact invariant
    /// of a structure on `M`, when it has a name in the rank tables.
    pub fn hf_home(&self) -> Option<ManifoldId> {
        match self {
            ManifoldId::S3 => Some(ManifoldId::S3),
            ManifoldId::S1xS2 => Some(ManifoldId::S1xS2),
            ManifoldId::Lens { p, q } => Some(ManifoldId::Lens { p: *p, q: p - q }),
            ManifoldId::Yr(r) if r.is_integer_value(1) => Some(ManifoldId::PoincareSphere),
            ManifoldId::Yr(r) => {
                // r = k/(k-1) with k >= 2
                let q = r.finite()?;
                let k = q.numer().to_u64()?;
                (k >= 2 && *q.denom() == BigInt::from(k - 1)).then_some(ManifoldId::MinusVk(k))
            }
            _ => None,
        }
    }
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldId::S3 => f.write_str("S3"),
            ManifoldId::S1xS2 => f.write_str("S1xS2"),
            ManifoldId::Lens { p, q } => write!(f, "L({p},{q})"),
            ManifoldId::PoincareSphere => f.write_str("Poincare"),
            ManifoldId::MinusVk(k) => write!(f, "-V{k}"),
            ManifoldId::Yr(r) => write!(f, "Y({r})"),
            ManifoldId::Opaque(label) => write!(f, "opaque:{label}"),
        }
    }
}

impl FromStr for ManifoldId {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || TopologyError::BadManifold(s.to_string());
        let inner = |prefix: &str| {
            t.strip_prefix(prefix)
                .and_then(|rest| rest.strip_suffix(')'))
                .map(str::trim)
        };
        match t {
            "S3" => return Ok(ManifoldId::S3),
            "S1xS2" => return Ok(ManifoldId::S1xS2),
            "Poincare" => return Ok(ManifoldId::PoincareSphere),
            _ => {}
        }
        if let Some(body) = inner("L(") {
            let (p, q) = body.split_once(',').ok_or_else(bad)?;
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            return ManifoldId::lens(p, q);
        }
        if let Some(body) = inner("Y(") {
            let r: SurgeryCoefficient = body.parse().map_err(|_| bad())?;
            return Ok(ManifoldId::yr(r));
        }
        if let Some(k) = t.strip_prefix("-V") {
            let k: u64 = k.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            return Ok(ManifoldId::MinusVk(k));
        }
        if let Some(label) = t.strip_prefix("opaque:") {
            return Ok(ManifoldId::Opaque(label.to_string()));
        }
        Err(bad())
    }
}

impl Serialize for ManifoldId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ManifoldId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
