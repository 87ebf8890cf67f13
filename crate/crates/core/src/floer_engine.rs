//! Rank bookkeeping for Heegaard Floer hat groups over the two-element field.
//!
//! Nothing here computes a Floer group. Ranks enter as declared facts
//! ([`base_facts`]) and are narrowed through exact triangles: in an exact
//! triangle `A → B → C → A` the three maps have ranks `f, g, h` with
//! `dim A = f + h`, `dim B = f + g`, `dim C = g + h`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::smooth_topology::ManifoldId;

/// Upper bound on round-robin sweeps before [`propagate`] gives up.
pub const MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("no exact triangle with dimensions ({a}, {b}, {c}): {reason}")]
    NoExactTriangle {
        a: u64,
        b: u64,
        c: u64,
        reason: &'static str,
    },
    #[error("contradiction at {manifold} from triangle [{provenance}]: {detail}")]
    Contradiction {
        manifold: ManifoldId,
        provenance: String,
        detail: String,
    },
    #[error("propagation did not reach a fixpoint within {0} sweeps")]
    NoFixpoint(usize),
}

/// Closed interval of admissible ranks; `hi = None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankInterval {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl RankInterval {
    pub fn exact(n: u64) -> Self {
        Self { lo: n, hi: Some(n) }
    }

    pub fn unknown() -> Self {
        Self { lo: 0, hi: None }
    }

    pub fn bounded(lo: u64, hi: u64) -> Self {
        Self { lo, hi: Some(hi) }
    }

    pub fn exact_value(&self) -> Option<u64> {
        (self.hi == Some(self.lo)).then_some(self.lo)
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= self.lo && self.hi.is_none_or(|h| x <= h)
    }
}

impl fmt::Display for RankInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.exact_value(), self.hi) {
            (Some(n), _) => write!(f, "{n}"),
            (None, Some(h)) => write!(f, "[{}, {}]", self.lo, h),
            (None, None) => write!(f, "[{}, inf)", self.lo),
        }
    }
}

/// Admissible values for the third vertex given the other two: an interval
/// whose members all share the parity of `known1 + known2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankBounds {
    pub lo: u64,
    pub hi: Option<u64>,
    /// Required residue mod 2, when determined.
    pub parity: Option<u64>,
}

impl RankBounds {
    pub fn contains(&self, x: u64) -> bool {
        x >= self.lo && self.hi.is_none_or(|h| x <= h) && self.parity.is_none_or(|p| x % 2 == p)
    }
}

/// Third-vertex bounds from two exact ranks.
pub fn rank_bounds(known1: u64, known2: u64) -> RankBounds {
    RankBounds {
        lo: known1.abs_diff(known2),
        hi: Some(known1 + known2),
        parity: Some((known1 + known2) % 2),
    }
}

/// Third-vertex bounds from two intervals.
pub fn interval_bounds(x: &RankInterval, y: &RankInterval) -> RankBounds {
    // smallest |a - b| over the two intervals
    let lo = match (x.hi, y.hi) {
        (Some(xh), _) if xh < y.lo => y.lo - xh,
        (_, Some(yh)) if yh < x.lo => x.lo - yh,
        _ => 0,
    };
    let hi = x.hi.zip(y.hi).map(|(a, b)| a + b);
    let parity = x
        .exact_value()
        .zip(y.exact_value())
        .map(|(a, b)| (a + b) % 2);
    RankBounds { lo, hi, parity }
}

/// Declared rank facts with an optional lens-space axiom `rank L(p, q) = p`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankDb {
    facts: BTreeMap<ManifoldId, RankInterval>,
    lens_axiom: bool,
}

impl RankDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fact(mut self, id: ManifoldId, fact: RankInterval) -> Self {
        self.facts.insert(id, fact);
        self
    }

    pub fn with_lens_axiom(mut self, on: bool) -> Self {
        self.lens_axiom = on;
        self
    }

    pub fn lens_axiom(&self) -> bool {
        self.lens_axiom
    }

    /// Explicit fact, else the lens axiom, else `[0, ∞)`.
    pub fn get(&self, id: &ManifoldId) -> RankInterval {
        if let Some(f) = self.facts.get(id) {
            return *f;
        }
        match id {
            ManifoldId::Lens { p, .. } if self.lens_axiom => RankInterval::exact(*p),
            _ => RankInterval::unknown(),
        }
    }

    pub fn exact(&self, id: &ManifoldId) -> Option<u64> {
        self.get(id).exact_value()
    }

    pub fn facts(&self) -> &BTreeMap<ManifoldId, RankInterval> {
        &self.facts
    }
}

/// `S³ ↦ 1`, `S¹×S² ↦ 2`, `L(p,q) ↦ p`, Poincaré sphere `↦ 1`, `−V_1 = S³ ↦ 1`.
pub fn base_facts() -> RankDb {
    RankDb::new()
        .with_fact(ManifoldId::S3, RankInterval::exact(1))
        .with_fact(ManifoldId::S1xS2, RankInterval::exact(2))
        .with_fact(ManifoldId::PoincareSphere, RankInterval::exact(1))
        .with_fact(ManifoldId::MinusVk(1), RankInterval::exact(1))
        .with_lens_axiom(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleInstance {
    pub a: ManifoldId,
    pub b: ManifoldId,
    pub c: ManifoldId,
    pub provenance: String,
    /// Recorded for reference only; never used to narrow ranks.
    #[serde(default)]
    pub informational: bool,
}

impl TriangleInstance {
    pub fn new(a: ManifoldId, b: ManifoldId, c: ManifoldId, provenance: impl Into<String>) -> Self {
        Self {
            a,
            b,
            c,
            provenance: provenance.into(),
            informational: false,
        }
    }

    pub fn vertices(&self) -> [&ManifoldId; 3] {
        [&self.a, &self.b, &self.c]
    }
}

/// Ranks of the maps `f: A → B`, `g: B → C`, `h: C → A` of an exact triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleSolution {
    pub rank_f: u64,
    pub rank_g: u64,
    pub rank_h: u64,
    pub f_injective: bool,
    pub f_surjective: bool,
    pub g_injective: bool,
    pub g_surjective: bool,
    pub h_injective: bool,
    pub h_surjective: bool,
}

impl TriangleSolution {
    /// `(dim A, dim B, dim C)`.
    pub fn dimensions(&self) -> (u64, u64, u64) {
        (
            self.rank_f + self.rank_h,
            self.rank_f + self.rank_g,
            self.rank_g + self.rank_h,
        )
    }
}

/// Solves for the map ranks of an exact triangle with the given dimensions.
///
/// Exactness at each vertex makes the kernel of the outgoing map the image of
/// the incoming one, so `f = (a+b−c)/2`, `g = (b+c−a)/2`, `h = (a+c−b)/2`.
pub fn triangle_solve(a: u64, b: u64, c: u64) -> Result<TriangleSolution, RankError> {
    let fail = |reason| RankError::NoExactTriangle { a, b, c, reason };
    let (sa, sb, sc) = (a as i128, b as i128, c as i128);
    if (sa + sb + sc) % 2 != 0 {
        return Err(fail("a + b + c is odd"));
    }
    let f = (sa + sb - sc) / 2;
    let g = (sb + sc - sa) / 2;
    let h = (sa + sc - sb) / 2;
    if f < 0 || g < 0 || h < 0 {
        return Err(fail("a map would need negative rank"));
    }
    let (f, g, h) = (f as u64, g as u64, h as u64);
    let sol = TriangleSolution {
        rank_f: f,
        rank_g: g,
        rank_h: h,
        // ker f = im h, im f = ker g, and so on around the triangle
        f_injective: h == 0,
        f_surjective: g == 0,
        g_injective: f == 0,
        g_surjective: h == 0,
        h_injective: g == 0,
        h_surjective: f == 0,
    };
    debug_assert_eq!(sol.dimensions(), (a, b, c));
    Ok(sol)
}

fn narrow(current: RankInterval, bounds: RankBounds) -> Option<RankInterval> {
    let mut lo = current.lo.max(bounds.lo);
    let mut hi = match (current.hi, bounds.hi) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if let Some(p) = bounds.parity {
        if lo % 2 != p {
            lo += 1;
        }
        if let Some(h) = hi {
            if h % 2 != p {
                if h == 0 {
                    return None;
                }
                hi = Some(h - 1);
            }
        }
    }
    match hi {
        Some(h) if h < lo => None,
        _ => Some(RankInterval { lo, hi }),
    }
}

/// Narrows every interval through every non-informational triangle, sweeping
/// the triangles in order until nothing changes.
pub fn propagate(db: &RankDb, triangles: &[TriangleInstance]) -> Result<RankDb, RankError> {
    let mut out = db.clone();
    let active: Vec<&TriangleInstance> = triangles.iter().filter(|t| !t.informational).collect();
    for t in &active {
        for id in t.vertices() {
            let fact = out.get(id);
            out.facts.entry(id.clone()).or_insert(fact);
        }
    }
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for t in &active {
            let v = t.vertices();
            for pos in 0..3 {
                let target = v[pos];
                let x = out.get(v[(pos + 1) % 3]);
                let y = out.get(v[(pos + 2) % 3]);
                let current = out.get(target);
                let bounds = interval_bounds(&x, &y);
                let next = narrow(current, bounds).ok_or_else(|| RankError::Contradiction {
                    manifold: target.clone(),
                    provenance: t.provenance.clone(),
                    detail: format!("rank {current} is incompatible with neighbours {x} and {y}"),
                })?;
                if next != current {
                    out.facts.insert(target.clone(), next);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(out);
        }
    }
    Err(RankError::NoFixpoint(MAX_SWEEPS))
}

/// The surgery triangle relating `S³`, `S¹×S²` (zero-framed unknot) and `S³`.
pub fn unknot_triangle() -> TriangleInstance {
    TriangleInstance::new(
        ManifoldId::S3,
        ManifoldId::S1xS2,
        ManifoldId::S3,
        "surgery exact triangle for the unknot: S3 -> S1xS2 (framing 0) -> S3 (framing 1)",
    )
}

/// Contact (+1)-surgery triangle `−V_k → −V_{k+1} → −Y_{+1}`.
pub fn vk_step_triangle(k: u64) -> TriangleInstance {
    TriangleInstance::new(
        ManifoldId::MinusVk(k),
        ManifoldId::MinusVk(k + 1),
        ManifoldId::PoincareSphere,
        format!(
            "surgery exact triangle of the contact (+1)-surgery V_{k} -> V_{}; third term -Y_(+1), the Poincare sphere",
            k + 1
        ),
    )
}

/// Lens-space triangle `L(7k−9, 7) → L(8k−9, 8) → −V_k` from the framed-link
/// presentation of `−V_k`. At `k = 1` the orders are negative and the instance
/// is only informational.
pub fn vk_lens_triangle(k: u64) -> TriangleInstance {
    let p7 = 7 * k as i64 - 9;
    let p8 = 8 * k as i64 - 9;
    let a = ManifoldId::lens(p7, 7).expect("gcd(7k-9, 7) = 1");
    let b = ManifoldId::lens(p8, 8).expect("gcd(8k-9, 8) = 1");
    let mut t = TriangleInstance::new(
        a,
        b,
        ManifoldId::MinusVk(k),
        format!(
            "surgery exact triangle on the 2-framed knot of the -V_{k} diagram: L({p7},7) -> L({p8},8) -> -V_{k}"
        ),
    );
    if k == 1 {
        t.informational = true;
        t.provenance
            .push_str(" [informational: negative lens orders at k = 1, taken up to sign]");
    }
    t
}

/// Both triangle families for `1 ≤ k ≤ max_k`, interleaved by `k`.
pub fn vk_triangles(max_k: u64) -> Vec<TriangleInstance> {
    (1..=max_k)
        .flat_map(|k| [vk_lens_triangle(k), vk_step_triangle(k)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// All non-negative `(x, y, z)` with `x + z = a`, `x + y = b`, `y + z = c`.
    fn brute_force(a: u64, b: u64, c: u64) -> Vec<(u64, u64, u64)> {
        let mut out = Vec::new();
        for x in 0..=a.max(b) {
            for y in 0..=b.max(c) {
                for z in 0..=a.max(c) {
                    if x + z == a && x + y == b && y + z == c {
                        out.push((x, y, z));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn solver_examples() {
        let s = triangle_solve(1, 2, 1).unwrap();
        assert_eq!(s.rank_f, 1);
        assert!(s.f_injective);
        for k in 1..=100 {
            assert!(triangle_solve(k, k + 1, 1).unwrap().f_injective);
        }
        assert!(matches!(
            triangle_solve(1, 1, 1),
            Err(RankError::NoExactTriangle { .. })
        ));
        let s = triangle_solve(0, 5, 5).unwrap();
        assert_eq!(s.rank_f, 0);
        assert!(s.g_injective && s.g_surjective);
        assert!(triangle_solve(5, 1, 2).is_err());
    }

    #[test]
    fn solver_matches_enumeration() {
        for a in 0..=8 {
            for b in 0..=8 {
                for c in 0..=8 {
                    let sols = brute_force(a, b, c);
                    match triangle_solve(a, b, c) {
                        Ok(s) => {
                            assert_eq!(sols, vec![(s.rank_f, s.rank_g, s.rank_h)]);
                            assert_eq!(s.dimensions(), (a, b, c));
                        }
                        Err(_) => assert!(sols.is_empty(), "({a},{b},{c})"),
                    }
                }
            }
        }
    }

    #[test]
    fn bounds_examples() {
        for d in 1..20 {
            let b = rank_bounds(d, 1);
            let admissible: Vec<u64> = (0..50).filter(|&x| b.contains(x)).collect();
            assert_eq!(admissible, vec![d - 1, d + 1]);
        }
        for k in 2..20u64 {
            assert_eq!(rank_bounds(7 * k - 9, 8 * k - 9).lo, k);
        }
        let b = rank_bounds(0, 7);
        assert_eq!(
            (0..50).filter(|&x| b.contains(x)).collect::<Vec<_>>(),
            vec![7]
        );
    }

    #[test]
    fn base_fact_values() {
        let db = base_facts();
        assert_eq!(db.exact(&ManifoldId::S3), Some(1));
        assert_eq!(db.exact(&ManifoldId::S1xS2), Some(2));
        assert_eq!(db.exact(&ManifoldId::lens(12, 7).unwrap()), Some(12));
        assert_eq!(db.exact(&ManifoldId::PoincareSphere), Some(1));
        assert_eq!(db.exact(&ManifoldId::MinusVk(1)), Some(1));
        assert_eq!(db.exact(&ManifoldId::MinusVk(2)), None);
    }

    #[test]
    fn vk_ranks_by_propagation() {
        let db = propagate(&base_facts(), &vk_triangles(30)).unwrap();
        for k in 1..=30 {
            assert_eq!(db.exact(&ManifoldId::MinusVk(k)), Some(k));
        }
        // no lens triangle pins the last step
        assert_eq!(
            db.get(&ManifoldId::MinusVk(31)),
            RankInterval::bounded(29, 31)
        );
    }

    #[test]
    fn propagation_edge_cases() {
        assert_eq!(propagate(&base_facts(), &[]).unwrap(), base_facts());
        let bad = TriangleInstance::new(ManifoldId::S3, ManifoldId::S3, ManifoldId::S3, "odd");
        let err = propagate(&base_facts(), &[bad]).unwrap_err();
        assert!(
            matches!(err, RankError::Contradiction { ref provenance, .. } if provenance == "odd")
        );
    }

    #[test]
    fn vk_triangle_family() {
        let one = vk_triangles(1);
        assert_eq!(one.iter().filter(|t| !t.informational).count(), 1);
        let step = one.iter().find(|t| !t.informational).unwrap();
        assert_eq!(
            (step.a.clone(), step.b.clone(), step.c.clone()),
            (
                ManifoldId::MinusVk(1),
                ManifoldId::MinusVk(2),
                ManifoldId::PoincareSphere
            )
        );
        let three = vk_lens_triangle(3);
        assert_eq!(three.a, ManifoldId::Lens { p: 12, q: 7 });
        assert_eq!(three.b, ManifoldId::Lens { p: 15, q: 8 });
        assert_eq!(three.c, ManifoldId::MinusVk(3));
        assert!(vk_lens_triangle(1).informational);
    }

    proptest! {
        #[test]
        fn solver_identities(a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
            if let Ok(s) = triangle_solve(a, b, c) {
                prop_assert_eq!(s.dimensions(), (a, b, c));
            }
        }

        #[test]
        fn propagation_is_order_independent(seed in any::<u64>(), k in 2u64..25) {
            let mut tris = vk_triangles(k);
            tris.push(unknot_triangle());
            let reference = propagate(&base_facts(), &tris).unwrap();
            let mut s = seed;
            for i in (1..tris.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                tris.swap(i, (s >> 33) as usize % (i + 1));
            }
            let shuffled = propagate(&base_facts(), &tris).unwrap();
            prop_assert_eq!(shuffled, reference.clone());
            // monotone: every output interval sits inside the input one
            for (id, fact) in reference.facts() {
                let before = base_facts().get(id);
                prop_assert!(fact.lo >= before.lo);
                if let Some(h) = before.hi {
                    prop_assert!(fact.hi.is_some_and(|x| x <= h));
                }
            }
        }
    }
}
