//! Tightness certificates.
//!
//! A [`Certificate`] is a self-contained proof object: the contact structures
//! it talks about (as diagrams), the contact `(+1)`-surgery edges between them,
//! and an ordered list of rule applications. [`verify_certificate`] replays it
//! from scratch and trusts nothing but the rule set below and the rank table it
//! recomputes itself.
//!
//! | rule | premises | conclusion |
//! |------|----------|------------|
//! | R1 | `SteinFillable(n)` | `Nonvanishing(n)` |
//! | R2 | overtwisted | `c = 0` (never admissible in a tightness proof) |
//! | R3 | `Nonvanishing(n)` | `Tight(n)` |
//! | R4 | edge `e: a → b`, `Nonvanishing(b)` | `Nonvanishing(a)` |
//! | R5 | edge `e: a → b`, `Nonvanishing(a)`, `Injective(e)` | `Nonvanishing(b)` |
//! | R6 | node whose reduced diagram is all Legendrian surgeries | `SteinFillable(n)` |
//! | EXACT | edge, three ranks, solved triangle | `Injective(e)` |
//! | DG | raw node, normalized node, choices, `Tight(normalized)` | `Tight(raw)` |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact_diagram::{
    generate_vk, generate_yr_diagram, ComponentId, ContactDiagram, DiagramError,
    LegendrianComponent, NormalizeChoices, TopoType,
};
use crate::floer_engine::{
    base_facts, propagate, triangle_solve, unknot_triangle, vk_step_triangle, vk_triangles,
    RankError, TriangleInstance, TriangleSolution,
};
use crate::rationals::{
    eval_cf, min_k_negative, neg_cf, prop7_inverse, prop7_transform, r_from_rprime, rprime_from_r,
    unit_fraction, NegContinuedFraction, RationalError, SurgeryCoefficient,
};
use crate::smooth_topology::{h1_diagram, ManifoldId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("slope 1 is excluded: Y_1 is not covered and no claim is made about it")]
    ExcludedSlope,
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}: {reason}", step.map_or("certificate".to_string(), |i| format!("step {i}")))]
pub struct VerificationError {
    /// Index of the first failing step; `None` for structural failures.
    pub step: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    #[serde(rename = "EXACT")]
    Exact,
    #[serde(rename = "DG")]
    Dg,
}

impl Rule {
    pub const ALL: [Rule; 8] = [
        Rule::R1,
        Rule::R2,
        Rule::R3,
        Rule::R4,
        Rule::R5,
        Rule::R6,
        Rule::Exact,
        Rule::Dg,
    ];

    /// Statement recorded as the provenance of every application.
    pub fn statement(self) -> &'static str {
        match self {
            Rule::R1 => "a Stein fillable contact structure has nonvanishing contact invariant",
            Rule::R2 => "an overtwisted contact structure has vanishing contact invariant",
            Rule::R3 => "nonvanishing contact invariant implies tight (contrapositive of R2)",
            Rule::R4 => {
                "for a contact (+1)-surgery M1 -> M2 the cobordism map sends c(M1) to c(M2); \
                 so c(M2) != 0 implies c(M1) != 0"
            }
            Rule::R5 => {
                "for a contact (+1)-surgery M1 -> M2 the cobordism map sends c(M1) to c(M2); \
                 if the map is injective then c(M1) != 0 implies c(M2) != 0"
            }
            Rule::R6 => {
                "Legendrian surgery on a link in the standard contact S3 (every coefficient -1) \
                 gives a Stein fillable structure"
            }
            Rule::Exact => {
                "ranks in an exact triangle of F2 vector spaces determine the map ranks; \
                 the first map is injective iff the third map vanishes"
            }
            Rule::Dg => {
                "contact r-surgery equals the normalized +/-1 presentation with the recorded \
                 stabilization choices"
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
            Rule::R5 => "R5",
            Rule::R6 => "R6",
            Rule::Exact => "EXACT",
            Rule::Dg => "DG",
        };
        f.write_str(s)
    }
}

/// A contact structure presented by a surgery diagram on a named manifold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactNode {
    pub id: String,
    pub label: String,
    pub diagram: ContactDiagram,
    pub manifold: ManifoldId,
}

/// The Legendrian knot surgered along an edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Contact `(+1)`-surgery on a fresh Legendrian pushoff of a component.
    Pushoff { of: ComponentId },
    /// Contact `(+1)`-surgery on an unknot split from the rest of the diagram.
    SplitUnknot { tb: i64, rot: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    ContactPlusOne,
}

/// `to` is obtained from `from` by one contact `(+1)`-surgery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "claim", content = "target")]
pub enum Claim {
    SteinFillable(String),
    Nonvanishing(String),
    Tight(String),
    Injective(String),
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::SteinFillable(n) => write!(f, "{n} is Stein fillable"),
            Claim::Nonvanishing(n) => write!(f, "c({n}) != 0"),
            Claim::Tight(n) => write!(f, "{n} is tight"),
            Claim::Injective(e) => write!(f, "the map along {e} is injective"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Premise {
    Node {
        id: String,
    },
    Edge {
        id: String,
    },
    Step {
        index: usize,
    },
    Rank {
        manifold: ManifoldId,
        rank: u64,
    },
    Triangle {
        instance: TriangleInstance,
        solution: TriangleSolution,
    },
    Choices {
        choices: NormalizeChoices,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub rule: Rule,
    pub premises: Vec<Premise>,
    pub conclusion: Claim,
    pub provenance: String,
}

impl Step {
    fn new(rule: Rule, premises: Vec<Premise>, conclusion: Claim) -> Self {
        Self {
            rule,
            premises,
            conclusion,
            provenance: rule.statement().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// The queried slope; the final step must conclude tightness of the
    /// contact structure presented by the trefoil diagram for this slope.
    pub slope: SurgeryCoefficient,
    pub nodes: Vec<ContactNode>,
    pub edges: Vec<SurgeryEdge>,
    pub steps: Vec<Step>,
}

impl Certificate {
    pub fn node(&self, id: &str) -> Option<&ContactNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&SurgeryEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn conclusion(&self) -> Option<&Claim> {
        self.steps.last().map(|s| &s.conclusion)
    }

    /// One-line description, e.g. `Y(2): TIGHT via V_2 and 0 cancellation(s) (…)`.
    pub fn summary(&self) -> String {
        let route = match branch(&self.slope) {
            Ok(Branch::Stein) => "Legendrian surgery".to_string(),
            Ok(Branch::VChain { k, m }) => format!("V_{k} and {m} cancellation(s)"),
            Err(_) => "an excluded slope".to_string(),
        };
        format!(
            "Y({}): TIGHT via {} ({} nodes, {} edges, {} steps)",
            self.slope,
            route,
            self.nodes.len(),
            self.edges.len(),
            self.steps.len()
        )
    }
}

fn unknot(id: &str, tb: i64, rot: i64, coeff: SurgeryCoefficient) -> LegendrianComponent {
    LegendrianComponent::new(id, TopoType::Unknot, tb, rot, Some(coeff))
}

/// Applies an edge witness: the new knot gets contact coefficient `+1`.
pub fn apply_witness(d: &ContactDiagram, w: &Witness) -> Result<ContactDiagram, DiagramError> {
    match w {
        Witness::Pushoff { of } => {
            let (next, id) = d.contact_pushoff(of)?;
            next.with_coefficient(&id, Some(SurgeryCoefficient::one()))
        }
        Witness::SplitUnknot { tb, rot } => {
            let id = (0..)
                .map(|n| {
                    if n == 0 {
                        "U".to_string()
                    } else {
                        format!("U{n}")
                    }
                })
                .find(|s| !d.contains(&ComponentId::new(s.as_str())))
                .expect("unbounded id space");
            d.add_component(unknot(&id, *tb, *rot, SurgeryCoefficient::one()), &[])
        }
    }
}

/// The V chain: `V_1 … V_{K+1}` joined by `(+1)`-surgeries on trefoil pushoffs,
/// with derivations of `c(V_k) ≠ 0` for every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VkChain {
    pub nodes: Vec<ContactNode>,
    pub edges: Vec<SurgeryEdge>,
    pub steps: Vec<Step>,
    /// Exact ranks used by the chain's EXACT steps.
    pub ranks: BTreeMap<ManifoldId, u64>,
    /// `nonvanishing[k − 1]` is the step concluding `c(V_k) ≠ 0`.
    pub nonvanishing: Vec<usize>,
}

pub fn vk_node_id(k: u64) -> String {
    format!("V{k}")
}

fn rank_table(max_k: u64) -> Result<crate::floer_engine::RankDb, RankError> {
    let mut triangles = vec![unknot_triangle()];
    triangles.extend(vk_triangles(max_k.max(1)));
    propagate(&base_facts(), &triangles)
}

fn exact_rank(db: &crate::floer_engine::RankDb, m: &ManifoldId) -> Result<u64, CertifyError> {
    db.exact(m)
        .ok_or_else(|| CertifyError::Internal(format!("rank of {m} not pinned: {}", db.get(m))))
}

fn exact_step(
    edge: &SurgeryEdge,
    instance: TriangleInstance,
    db: &crate::floer_engine::RankDb,
) -> Result<Step, CertifyError> {
    let [a, b, c] = instance.vertices().map(|m| exact_rank(db, m));
    let (a, b, c) = (a?, b?, c?);
    let solution = triangle_solve(a, b, c)?;
    if !solution.f_injective {
        return Err(CertifyError::Internal(format!(
            "triangle ({a}, {b}, {c}) along {} is not injective",
            edge.id
        )));
    }
    Ok(Step::new(
        Rule::Exact,
        vec![
            Premise::Edge {
                id: edge.id.clone(),
            },
            Premise::Rank {
                manifold: instance.a.clone(),
                rank: a,
            },
            Premise::Rank {
                manifold: instance.b.clone(),
                rank: b,
            },
            Premise::Rank {
                manifold: instance.c.clone(),
                rank: c,
            },
            Premise::Triangle { instance, solution },
        ],
        Claim::Injective(edge.id.clone()),
    ))
}

/// Builds the V chain for `1 ≤ k ≤ K + 1`, plus a second derivation of
/// `c(V_1) ≠ 0` through `(S¹×S², η)`.
///
/// Ranks come from propagating the base facts through `vk_triangles(K + 1)`,
/// which is what pins `rank HF(−V_{K+1})`.
pub fn build_vk_chain(max_k: u64) -> Result<VkChain, CertifyError> {
    if max_k == 0 {
        return Err(CertifyError::Internal("V chain needs K >= 1".into()));
    }
    let db = rank_table(max_k + 1)?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut steps = Vec::new();
    let mut nonvanishing = Vec::new();
    let mut ranks = BTreeMap::new();

    for k in 1..=max_k + 1 {
        nodes.push(ContactNode {
            id: vk_node_id(k),
            label: format!("(V_{k}, xi_{k})"),
            diagram: generate_vk(k)?,
            manifold: ManifoldId::vk(k),
        });
    }

    steps.push(Step::new(
        Rule::R6,
        vec![Premise::Node { id: vk_node_id(1) }],
        Claim::SteinFillable(vk_node_id(1)),
    ));
    steps.push(Step::new(
        Rule::R1,
        vec![Premise::Step { index: 0 }],
        Claim::Nonvanishing(vk_node_id(1)),
    ));
    nonvanishing.push(1);

    for k in 1..=max_k {
        let edge = SurgeryEdge {
            id: format!("V{k}->V{}", k + 1),
            from: vk_node_id(k),
            to: vk_node_id(k + 1),
            kind: EdgeKind::ContactPlusOne,
            witness: Witness::Pushoff {
                of: ComponentId::new("T"),
            },
        };
        let exact = exact_step(&edge, vk_step_triangle(k), &db)?;
        for p in &exact.premises {
            if let Premise::Rank { manifold, rank } = p {
                ranks.insert(manifold.clone(), *rank);
            }
        }
        steps.push(exact);
        let injective = steps.len() - 1;
        steps.push(Step::new(
            Rule::R5,
            vec![
                Premise::Edge {
                    id: edge.id.clone(),
                },
                Premise::Step {
                    index: nonvanishing[k as usize - 1],
                },
                Premise::Step { index: injective },
            ],
            Claim::Nonvanishing(vk_node_id(k + 1)),
        ));
        nonvanishing.push(steps.len() - 1);
        edges.push(edge);
    }

    // second route to c(V_1) != 0: xi_st -> eta by a split unknot, then back
    // from eta to an alternative V_1 presentation
    let t = LegendrianComponent::new(
        "T",
        TopoType::RhTrefoil,
        1,
        0,
        Some(SurgeryCoefficient::minus_one()),
    );
    let v1_alt = ContactDiagram::from_parts(
        vec![t, unknot("U", -1, 0, SurgeryCoefficient::one())],
        [((ComponentId::new("T"), ComponentId::new("U")), 1)],
    )?;
    nodes.push(ContactNode {
        id: "xi_st".into(),
        label: "(S3, xi_st)".into(),
        diagram: ContactDiagram::empty(),
        manifold: ManifoldId::S3,
    });
    nodes.push(ContactNode {
        id: "eta".into(),
        label: "(S1xS2, eta)".into(),
        diagram: ContactDiagram::empty()
            .add_component(unknot("U", -1, 0, SurgeryCoefficient::one()), &[])?,
        manifold: ManifoldId::S1xS2,
    });
    nodes.push(ContactNode {
        id: "V1_alt".into(),
        label: "(V_1, xi_1) drawn with an unknot in place of the trefoil pushoff".into(),
        diagram: v1_alt,
        manifold: ManifoldId::S3,
    });
    let split = SurgeryEdge {
        id: "xi_st->eta".into(),
        from: "xi_st".into(),
        to: "eta".into(),
        kind: EdgeKind::ContactPlusOne,
        witness: Witness::SplitUnknot { tb: -1, rot: 0 },
    };
    let erase = SurgeryEdge {
        id: "V1_alt->eta".into(),
        from: "V1_alt".into(),
        to: "eta".into(),
        kind: EdgeKind::ContactPlusOne,
        witness: Witness::Pushoff {
            of: ComponentId::new("T"),
        },
    };
    let base = steps.len();
    steps.push(Step::new(
        Rule::R6,
        vec![Premise::Node { id: "xi_st".into() }],
        Claim::SteinFillable("xi_st".into()),
    ));
    steps.push(Step::new(
        Rule::R1,
        vec![Premise::Step { index: base }],
        Claim::Nonvanishing("xi_st".into()),
    ));
    steps.push(exact_step(&split, unknot_triangle(), &db)?);
    steps.push(Step::new(
        Rule::R5,
        vec![
            Premise::Edge {
                id: split.id.clone(),
            },
            Premise::Step { index: base + 1 },
            Premise::Step { index: base + 2 },
        ],
        Claim::Nonvanishing("eta".into()),
    ));
    steps.push(Step::new(
        Rule::R4,
        vec![
            Premise::Edge {
                id: erase.id.clone(),
            },
            Premise::Step { index: base + 3 },
        ],
        Claim::Nonvanishing("V1_alt".into()),
    ));
    edges.push(split);
    edges.push(erase);

    Ok(VkChain {
        nodes,
        edges,
        steps,
        ranks,
        nonvanishing,
    })
}

/// Component ids of the Legendrian-surgery chain hanging off `start`, in order.
fn chain_knots(d: &ContactDiagram, start: &ComponentId) -> Vec<ComponentId> {
    let mut out = Vec::new();
    if !d
        .component(start)
        .is_ok_and(|c| c.coeff.as_ref().is_some_and(|r| r.is_integer_value(-1)))
    {
        return out;
    }
    out.push(start.clone());
    loop {
        let last = out.last().expect("non-empty").clone();
        let next = d.components().iter().find(|c| {
            c.topo == TopoType::PushoffOf(last.clone())
                && c.coeff.as_ref().is_some_and(|r| r.is_integer_value(-1))
        });
        match next {
            Some(c) => out.push(c.id.clone()),
            None => return out,
        }
    }
}

fn truncated(cf: &NegContinuedFraction, len: usize) -> SurgeryCoefficient {
    if len == 0 {
        return SurgeryCoefficient::Infinity;
    }
    eval_cf(&NegContinuedFraction {
        coefficients: cf.coefficients[..len].to_vec(),
    })
}

/// Which normalization applies to `r`, together with the `(+1)` count `k`
/// when the pushoff carries a positive coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    /// `r' < 0` or `r' = ∞`: the normalized diagram is a Legendrian surgery.
    Stein,
    /// `r' > 0`: `k` contact `(+1)`-surgeries and a chain of length `m`.
    VChain { k: u64, m: usize },
}

pub fn branch(r: &SurgeryCoefficient) -> Result<Branch, CertifyError> {
    if r.is_integer_value(1) {
        return Err(CertifyError::ExcludedSlope);
    }
    let rp = rprime_from_r(r)?;
    if rp.is_infinite() || rp.is_negative() {
        return Ok(Branch::Stein);
    }
    if rp.is_zero() {
        return Err(CertifyError::Internal("r' = 0 for r != 1".into()));
    }
    let k = match unit_fraction(&rp) {
        Some(j) => j,
        None => min_k_negative(&rp)?,
    };
    let rpp = prop7_transform(&rp, k)?;
    let m = if rpp.is_infinite() {
        0
    } else if rpp.is_negative() {
        neg_cf(&rpp)?.len()
    } else {
        return Err(CertifyError::Internal(format!(
            "r'' = {rpp} is not negative"
        )));
    };
    Ok(Branch::VChain { k, m })
}

/// Certificate that the contact structure presented by the trefoil diagram
/// for `r` (with all-negative stabilizations) is tight.
pub fn certify_tight(r: &SurgeryCoefficient) -> Result<Certificate, CertifyError> {
    let which = branch(r)?;
    let raw = generate_yr_diagram(r)?;
    let choices = NormalizeChoices::default();
    let normalized = raw.dg_normalize(&choices)?;
    let raw_node = ContactNode {
        id: "Y".into(),
        label: format!("contact structure on Y({r}) from the trefoil diagram"),
        diagram: raw,
        manifold: ManifoldId::yr(r.clone()),
    };

    match which {
        Branch::Stein => {
            let norm_node = ContactNode {
                id: "N".into(),
                label: format!("normalized presentation of Y({r})"),
                diagram: normalized,
                manifold: ManifoldId::yr(r.clone()),
            };
            let steps = vec![
                Step::new(
                    Rule::R6,
                    vec![Premise::Node { id: "N".into() }],
                    Claim::SteinFillable("N".into()),
                ),
                Step::new(
                    Rule::R1,
                    vec![Premise::Step { index: 0 }],
                    Claim::Nonvanishing("N".into()),
                ),
                Step::new(
                    Rule::R3,
                    vec![Premise::Step { index: 1 }],
                    Claim::Tight("N".into()),
                ),
                Step::new(
                    Rule::Dg,
                    vec![
                        Premise::Node { id: "Y".into() },
                        Premise::Node { id: "N".into() },
                        Premise::Choices { choices },
                        Premise::Step { index: 2 },
                    ],
                    Claim::Tight("Y".into()),
                ),
            ];
            Ok(Certificate {
                slope: r.clone(),
                nodes: vec![raw_node, norm_node],
                edges: Vec::new(),
                steps,
            })
        }
        Branch::VChain { k, m } => {
            let chain = build_vk_chain(k.saturating_sub(1).max(1))?;
            let mut nodes = vec![raw_node];
            nodes.extend(chain.nodes);
            let mut edges = chain.edges;
            let mut steps = chain.steps;
            let vk_step = chain.nonvanishing[k as usize - 1];

            let rp = rprime_from_r(r)?;
            let rpp = prop7_transform(&rp, k)?;
            let knots = chain_knots(&normalized, &ComponentId::new("T.1"));
            if knots.len() != m {
                return Err(CertifyError::Internal(format!(
                    "normalized diagram has {} chain knots, expected {m}",
                    knots.len()
                )));
            }
            let cf = if m == 0 {
                NegContinuedFraction {
                    coefficients: Vec::new(),
                }
            } else {
                neg_cf(&rpp)?
            };

            // D_i keeps the first m − i chain knots; D_m is V_k
            let mut diagrams = vec![normalized];
            for knot in knots.iter().rev() {
                let next = diagrams.last().expect("non-empty").remove_component(knot)?;
                diagrams.push(next);
            }
            let d_id = |i: usize| {
                if i == m {
                    vk_node_id(k)
                } else {
                    format!("D{i}")
                }
            };
            for (i, d) in diagrams.iter().enumerate().take(m) {
                let ri = r_from_rprime(&prop7_inverse(&truncated(&cf, m - i), k));
                nodes.push(ContactNode {
                    id: d_id(i),
                    label: format!("Y({ri}) with {} Legendrian chain knot(s) left", m - i),
                    diagram: d.clone(),
                    manifold: ManifoldId::yr(ri),
                });
            }
            for i in 0..m {
                edges.push(SurgeryEdge {
                    id: format!("{}->{}", d_id(i), d_id(i + 1)),
                    from: d_id(i),
                    to: d_id(i + 1),
                    kind: EdgeKind::ContactPlusOne,
                    witness: Witness::Pushoff {
                        of: knots[m - 1 - i].clone(),
                    },
                });
            }
            let mut last = vk_step;
            for i in (0..m).rev() {
                steps.push(Step::new(
                    Rule::R4,
                    vec![
                        Premise::Edge {
                            id: format!("{}->{}", d_id(i), d_id(i + 1)),
                        },
                        Premise::Step { index: last },
                    ],
                    Claim::Nonvanishing(d_id(i)),
                ));
                last = steps.len() - 1;
            }
            steps.push(Step::new(
                Rule::R3,
                vec![Premise::Step { index: last }],
                Claim::Tight(d_id(0)),
            ));
            let tight = steps.len() - 1;
            steps.push(Step::new(
                Rule::Dg,
                vec![
                    Premise::Node { id: "Y".into() },
                    Premise::Node { id: d_id(0) },
                    Premise::Choices { choices },
                    Premise::Step { index: tight },
                ],
                Claim::Tight("Y".into()),
            ));
            Ok(Certificate {
                slope: r.clone(),
                nodes,
                edges,
                steps,
            })
        }
    }
}

/// `−V_1` and `S³` name the same rank-table entry.
fn same_home(a: &ManifoldId, b: &ManifoldId) -> bool {
    let canon = |m: &ManifoldId| match m {
        ManifoldId::MinusVk(1) => ManifoldId::S3,
        other => other.clone(),
    };
    canon(a) == canon(b)
}

struct Checker<'a> {
    cert: &'a Certificate,
    nodes: BTreeMap<&'a str, &'a ContactNode>,
    edges: BTreeMap<&'a str, &'a SurgeryEdge>,
    ranks: crate::floer_engine::RankDb,
    registry: Vec<TriangleInstance>,
}

fn fail<T>(step: Option<usize>, reason: impl Into<String>) -> Result<T, VerificationError> {
    Err(VerificationError {
        step,
        reason: reason.into(),
    })
}

fn check_node(n: &ContactNode) -> Result<(), String> {
    n.diagram
        .validate()
        .map_err(|e| format!("node {}: {e}", n.id))?;
    let expected = n
        .manifold
        .h1_order()
        .ok_or_else(|| format!("node {}: no homology oracle for {}", n.id, n.manifold))?;
    let normalized = n
        .diagram
        .dg_normalize(&NormalizeChoices::default())
        .map_err(|e| format!("node {}: {e}", n.id))?;
    let h = h1_diagram(&normalized).map_err(|e| format!("node {}: {e}", n.id))?;
    if !h.is_cyclic() || h.order() != expected {
        return Err(format!(
            "node {}: diagram has H1 = {h}, but {} needs a cyclic group of order {expected}",
            n.id, n.manifold
        ));
    }
    Ok(())
}

fn check_edge(e: &SurgeryEdge, nodes: &BTreeMap<&str, &ContactNode>) -> Result<(), String> {
    let from = nodes
        .get(e.from.as_str())
        .ok_or_else(|| format!("edge {}: unknown source {}", e.id, e.from))?;
    let to = nodes
        .get(e.to.as_str())
        .ok_or_else(|| format!("edge {}: unknown target {}", e.id, e.to))?;
    let after = apply_witness(&from.diagram, &e.witness)
        .map_err(|err| format!("edge {}: witness does not apply: {err}", e.id))?;
    if !after
        .cancel_pushoff_pairs()
        .same_presentation(&to.diagram.cancel_pushoff_pairs())
    {
        return Err(format!(
            "edge {}: surgering the witness on {} does not give {}",
            e.id, e.from, e.to
        ));
    }
    Ok(())
}

impl<'a> Checker<'a> {
    fn new(cert: &'a Certificate) -> Result<Self, VerificationError> {
        let mut nodes = BTreeMap::new();
        for n in &cert.nodes {
            if nodes.insert(n.id.as_str(), n).is_some() {
                return fail(None, format!("duplicate node id {}", n.id));
            }
        }
        let mut edges = BTreeMap::new();
        for e in &cert.edges {
            if edges.insert(e.id.as_str(), e).is_some() {
                return fail(None, format!("duplicate edge id {}", e.id));
            }
        }
        // the rank table covers every -V_k a triangle premise mentions
        let max_k = cert
            .steps
            .iter()
            .flat_map(|s| &s.premises)
            .filter_map(|p| match p {
                Premise::Triangle { instance, .. } => Some(instance),
                _ => None,
            })
            .flat_map(|t| [&t.a, &t.b, &t.c])
            .filter_map(|m| match m {
                ManifoldId::MinusVk(k) => Some(*k),
                _ => None,
            })
            .max()
            .unwrap_or(1)
            .min(10_000);
        let mut registry = vec![unknot_triangle()];
        registry.extend(vk_triangles(max_k));
        let ranks = propagate(&base_facts(), &registry).map_err(|e| VerificationError {
            step: None,
            reason: format!("rank table: {e}"),
        })?;
        Ok(Self {
            cert,
            nodes,
            edges,
            ranks,
            registry,
        })
    }

    fn node(&self, i: usize, id: &str) -> Result<&'a ContactNode, VerificationError> {
        match self.nodes.get(id) {
            Some(n) => Ok(n),
            None => fail(Some(i), format!("unknown node {id}")),
        }
    }

    fn edge(&self, i: usize, id: &str) -> Result<&'a SurgeryEdge, VerificationError> {
        match self.edges.get(id) {
            Some(e) => Ok(e),
            None => fail(Some(i), format!("unknown edge {id}")),
        }
    }

    /// Conclusion of an earlier step.
    fn cited(&self, i: usize, p: &Premise) -> Result<&'a Claim, VerificationError> {
        match p {
            Premise::Step { index } if *index < i => Ok(&self.cert.steps[*index].conclusion),
            Premise::Step { index } => fail(
                Some(i),
                format!("premise cites step {index}, which does not precede it"),
            ),
            other => fail(Some(i), format!("expected a step premise, found {other:?}")),
        }
    }

    fn expect_claim(&self, i: usize, got: &Claim, want: &Claim) -> Result<(), VerificationError> {
        if got == want {
            Ok(())
        } else {
            fail(
                Some(i),
                format!("premise proves `{got}`, rule needs `{want}`"),
            )
        }
    }

    fn arity(&self, i: usize, step: &Step, n: usize) -> Result<(), VerificationError> {
        if step.premises.len() == n {
            Ok(())
        } else {
            fail(
                Some(i),
                format!(
                    "{} takes {n} premises, {} given",
                    step.rule,
                    step.premises.len()
                ),
            )
        }
    }

    fn edge_premise(&self, i: usize, p: &Premise) -> Result<&'a SurgeryEdge, VerificationError> {
        match p {
            Premise::Edge { id } => self.edge(i, id),
            other => fail(
                Some(i),
                format!("expected an edge premise, found {other:?}"),
            ),
        }
    }

    fn node_premise(&self, i: usize, p: &Premise) -> Result<&'a ContactNode, VerificationError> {
        match p {
            Premise::Node { id } => self.node(i, id),
            other => fail(Some(i), format!("expected a node premise, found {other:?}")),
        }
    }

    fn rank_premise(
        &self,
        i: usize,
        p: &Premise,
        vertex: &ManifoldId,
    ) -> Result<u64, VerificationError> {
        let Premise::Rank { manifold, rank } = p else {
            return fail(Some(i), format!("expected a rank premise, found {p:?}"));
        };
        if manifold != vertex {
            return fail(
                Some(i),
                format!("rank premise for {manifold}, triangle vertex is {vertex}"),
            );
        }
        match self.ranks.exact(manifold) {
            Some(r) if r == *rank => Ok(r),
            Some(r) => fail(
                Some(i),
                format!("rank of {manifold} is {r}, certificate says {rank}"),
            ),
            None => fail(
                Some(i),
                format!(
                    "rank of {manifold} is not determined ({})",
                    self.ranks.get(manifold)
                ),
            ),
        }
    }

    fn check_step(&self, i: usize, step: &Step) -> Result<(), VerificationError> {
        if step.provenance != step.rule.statement() {
            return fail(
                Some(i),
                format!("provenance does not match rule {}", step.rule),
            );
        }
        let ps = &step.premises;
        match step.rule {
            Rule::R2 => fail(
                Some(i),
                "R2 concludes vanishing and has no place in a tightness proof",
            ),
            Rule::R6 => {
                self.arity(i, step, 1)?;
                let n = self.node_premise(i, &ps[0])?;
                let reduced = n.diagram.cancel_pushoff_pairs();
                if let Some(c) = reduced
                    .components()
                    .iter()
                    .find(|c| !c.coeff.as_ref().is_some_and(|r| r.is_integer_value(-1)))
                {
                    return fail(
                        Some(i),
                        format!(
                            "node {}: component {} is not a Legendrian surgery",
                            n.id, c.id
                        ),
                    );
                }
                self.expect_claim(i, &step.conclusion, &Claim::SteinFillable(n.id.clone()))
            }
            Rule::R1 | Rule::R3 => {
                self.arity(i, step, 1)?;
                let (from, to): (fn(String) -> Claim, fn(String) -> Claim) = match step.rule {
                    Rule::R1 => (Claim::SteinFillable, Claim::Nonvanishing),
                    _ => (Claim::Nonvanishing, Claim::Tight),
                };
                let target = match &step.conclusion {
                    Claim::Nonvanishing(n) | Claim::Tight(n) => n.clone(),
                    other => {
                        return fail(Some(i), format!("{} cannot conclude `{other}`", step.rule))
                    }
                };
                self.expect_claim(i, &step.conclusion, &to(target.clone()))?;
                self.node(i, &target)?;
                self.expect_claim(i, self.cited(i, &ps[0])?, &from(target))
            }
            Rule::R4 => {
                self.arity(i, step, 2)?;
                let e = self.edge_premise(i, &ps[0])?;
                self.expect_claim(
                    i,
                    self.cited(i, &ps[1])?,
                    &Claim::Nonvanishing(e.to.clone()),
                )?;
                self.expect_claim(i, &step.conclusion, &Claim::Nonvanishing(e.from.clone()))
            }
            Rule::R5 => {
                self.arity(i, step, 3)?;
                let e = self.edge_premise(i, &ps[0])?;
                self.expect_claim(
                    i,
                    self.cited(i, &ps[1])?,
                    &Claim::Nonvanishing(e.from.clone()),
                )?;
                self.expect_claim(i, self.cited(i, &ps[2])?, &Claim::Injective(e.id.clone()))?;
                self.expect_claim(i, &step.conclusion, &Claim::Nonvanishing(e.to.clone()))
            }
            Rule::Exact => {
                self.arity(i, step, 5)?;
                let e = self.edge_premise(i, &ps[0])?;
                let Premise::Triangle { instance, solution } = &ps[4] else {
                    return fail(Some(i), "expected a triangle premise");
                };
                if !self.registry.contains(instance) {
                    return fail(
                        Some(i),
                        "triangle instance is not a declared exact triangle",
                    );
                }
                let from = &self.node(i, &e.from)?.manifold;
                let to = &self.node(i, &e.to)?.manifold;
                let homes = from.hf_home().zip(to.hf_home());
                if !homes
                    .is_some_and(|(f, t)| same_home(&f, &instance.a) && same_home(&t, &instance.b))
                {
                    return fail(
                        Some(i),
                        format!(
                            "triangle {} -> {} does not carry the map of edge {} ({} -> {})",
                            instance.a, instance.b, e.id, from, to
                        ),
                    );
                }
                let a = self.rank_premise(i, &ps[1], &instance.a)?;
                let b = self.rank_premise(i, &ps[2], &instance.b)?;
                let c = self.rank_premise(i, &ps[3], &instance.c)?;
                let solved = triangle_solve(a, b, c).map_err(|err| VerificationError {
                    step: Some(i),
                    reason: err.to_string(),
                })?;
                if &solved != solution {
                    return fail(
                        Some(i),
                        "recorded triangle solution differs from the re-solved one",
                    );
                }
                if !solved.f_injective {
                    return fail(Some(i), "the first map of the triangle is not injective");
                }
                self.expect_claim(i, &step.conclusion, &Claim::Injective(e.id.clone()))
            }
            Rule::Dg => {
                self.arity(i, step, 4)?;
                let raw = self.node_premise(i, &ps[0])?;
                let norm = self.node_premise(i, &ps[1])?;
                let Premise::Choices { choices } = &ps[2] else {
                    return fail(Some(i), "expected a choices premise");
                };
                let redone =
                    raw.diagram
                        .dg_normalize(choices)
                        .map_err(|err| VerificationError {
                            step: Some(i),
                            reason: err.to_string(),
                        })?;
                if !redone.same_presentation(&norm.diagram) {
                    return fail(
                        Some(i),
                        format!("normalizing {} does not give {}", raw.id, norm.id),
                    );
                }
                if raw.manifold != norm.manifold {
                    return fail(
                        Some(i),
                        format!("{} and {} name different manifolds", raw.id, norm.id),
                    );
                }
                self.expect_claim(i, self.cited(i, &ps[3])?, &Claim::Tight(norm.id.clone()))?;
                self.expect_claim(i, &step.conclusion, &Claim::Tight(raw.id.clone()))
            }
        }
    }
}

/// Replays a certificate; the error names the first failing step.
pub fn verify_certificate(cert: &Certificate) -> Result<(), VerificationError> {
    let checker = Checker::new(cert)?;
    for n in &cert.nodes {
        check_node(n).map_err(|reason| VerificationError { step: None, reason })?;
    }
    for e in &cert.edges {
        check_edge(e, &checker.nodes).map_err(|reason| VerificationError { step: None, reason })?;
    }
    for (i, step) in cert.steps.iter().enumerate() {
        checker.check_step(i, step)?;
    }

    if cert.slope.is_integer_value(1) {
        return fail(None, "slope 1 is excluded");
    }
    let Some(Claim::Tight(target)) = cert.conclusion() else {
        return fail(None, "final step does not conclude tightness");
    };
    let node = checker.node(cert.steps.len() - 1, target)?;
    let expected = generate_yr_diagram(&cert.slope).map_err(|e| VerificationError {
        step: None,
        reason: e.to_string(),
    })?;
    if !node.diagram.same_presentation(&expected)
        || node.manifold != ManifoldId::yr(cert.slope.clone())
    {
        return fail(
            None,
            format!(
                "final conclusion is about {}, not the diagram for Y({})",
                node.id, cert.slope
            ),
        );
    }
    Ok(())
}

pub fn check_certificate(cert: &Certificate) -> bool {
    verify_certificate(cert).is_ok()
}

/// Rules cited anywhere in a certificate.
pub fn rules_used(cert: &Certificate) -> BTreeSet<String> {
    cert.steps.iter().map(|s| s.rule.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> SurgeryCoefficient {
        s.parse().unwrap()
    }

    #[test]
    fn e7_and_e6_boundaries_certify() {
        for r in ["2", "3"] {
            let cert = certify_tight(&c(r)).unwrap();
            assert_eq!(verify_certificate(&cert), Ok(()), "r = {r}");
            assert_eq!(cert.conclusion(), Some(&Claim::Tight("Y".into())));
        }
    }

    #[test]
    fn half_takes_the_stein_branch() {
        assert_eq!(branch(&c("1/2")).unwrap(), Branch::Stein);
        let cert = certify_tight(&c("1/2")).unwrap();
        assert!(cert.edges.is_empty());
        assert!(check_certificate(&cert));
    }

    #[test]
    fn slope_one_is_refused() {
        assert_eq!(certify_tight(&c("1")), Err(CertifyError::ExcludedSlope));
    }

    #[test]
    fn branch_two_parameters() {
        // r = 2: r' = 1/2, k = 2, r'' = inf
        assert_eq!(branch(&c("2")).unwrap(), Branch::VChain { k: 2, m: 0 });
        // r = 3: r' = 2/3, k = 2, r'' = -2
        assert_eq!(branch(&c("3")).unwrap(), Branch::VChain { k: 2, m: 1 });
        assert_eq!(branch(&c("0")).unwrap(), Branch::Stein);
        assert_eq!(branch(&c("inf")).unwrap(), Branch::VChain { k: 1, m: 0 });
    }

    #[test]
    fn vk_chain_shape() {
        let chain = build_vk_chain(3).unwrap();
        assert_eq!(chain.nonvanishing.len(), 4);
        for (k, &s) in chain.nonvanishing.iter().enumerate() {
            assert_eq!(
                chain.steps[s].conclusion,
                Claim::Nonvanishing(vk_node_id(k as u64 + 1))
            );
        }
        for k in 1..=4u64 {
            assert_eq!(chain.ranks.get(&ManifoldId::MinusVk(k)), Some(&k));
        }
        let orders: Vec<_> = chain
            .nodes
            .iter()
            .filter(|n| n.id.starts_with('V') && n.id != "V1_alt")
            .map(|n| n.manifold.h1_order().unwrap())
            .collect();
        assert_eq!(
            orders,
            (1..=4).map(num_bigint::BigInt::from).collect::<Vec<_>>()
        );
    }

    #[test]
    fn vk_chain_alone_verifies_as_steps() {
        let chain = build_vk_chain(2).unwrap();
        let cert = Certificate {
            slope: c("2"),
            nodes: chain.nodes,
            edges: chain.edges,
            steps: chain.steps,
        };
        // every step checks; the certificate only fails on its final target
        let err = verify_certificate(&cert).unwrap_err();
        assert_eq!(err.step, None);
        assert!(err.reason.contains("final"), "{err}");
    }

    #[test]
    fn chain_edges_match_cf_length() {
        for r in ["3", "5/2", "-1", "-3/2", "7/3", "-7/4"] {
            let cert = certify_tight(&c(r)).unwrap();
            let Branch::VChain { m, .. } = branch(&c(r)).unwrap() else {
                panic!("{r} should take the chain branch");
            };
            let d_edges = cert
                .edges
                .iter()
                .filter(|e| e.from.starts_with('D'))
                .count();
            assert_eq!(d_edges, m, "r = {r}");
            assert!(check_certificate(&cert), "r = {r}");
        }
    }

    #[test]
    fn tampered_rank_reports_the_step() {
        let mut cert = certify_tight(&c("2")).unwrap();
        let (i, step) = cert
            .steps
            .iter_mut()
            .enumerate()
            .find(|(_, s)| s.rule == Rule::Exact)
            .unwrap();
        if let Premise::Rank { rank, .. } = &mut step.premises[1] {
            *rank += 1;
        }
        let err = verify_certificate(&cert).unwrap_err();
        assert_eq!(err.step, Some(i));
    }

    #[test]
    fn reversed_edge_is_rejected() {
        let mut cert = certify_tight(&c("2")).unwrap();
        let e = &mut cert.edges[0];
        std::mem::swap(&mut e.from, &mut e.to);
        assert!(!check_certificate(&cert));
    }

    #[test]
    fn r2_is_never_admitted() {
        let mut cert = certify_tight(&c("1/2")).unwrap();
        cert.steps[1].rule = Rule::R2;
        cert.steps[1].provenance = Rule::R2.statement().into();
        assert_eq!(verify_certificate(&cert).unwrap_err().step, Some(1));
    }

    #[test]
    fn round_trips_through_json() {
        let cert = certify_tight(&c("-5/3")).unwrap();
        let text = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
        assert!(check_certificate(&back));
    }
}
