//! JSON file formats shared by the library and the command line.
//!
//! * diagrams: `{"components": [{id, type, tb, rot, coeff}], "linkings": [{a, b, lk}]}`
//!   where `type` is `"unknot"`, `"rhtrefoil"` or `"pushoff:<id>"`. Linking
//!   records override defaults: a pushoff links its parent `tb(parent)` times
//!   and every other earlier component as its parent does; other pairs link 0.
//! * framed links: `{"n", "matrix" (row-major, n·n entries), "tags"}`.
//! * rank facts: `{"facts": [{"manifold", "rank"} | {"manifold", "interval": [lo, hi|null]}]}`.
//! * triangles: `{"triangles": [{"a", "b", "c", "provenance"}]}`.
//!
//! Coefficients are the strings `"p/q"`, `"n"` or `"inf"`.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact_diagram::{
    ComponentId, ContactDiagram, DiagramError, LegendrianComponent, TopoType,
};
use crate::floer_engine::{RankDb, RankInterval, TriangleInstance};
use crate::rationals::SurgeryCoefficient;
use crate::smooth_topology::{ComponentTag, FramedLink, ManifoldId, TopologyError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid diagram: {0}")]
    Diagram(#[from] DiagramError),
    #[error("invalid framed link: {0}")]
    Topology(#[from] TopologyError),
    #[error("invalid record: {0}")]
    Record(String),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Parses JSON, reporting the line and column of the first problem.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRecord {
    pub id: ComponentId,
    #[serde(rename = "type")]
    pub kind: String,
    pub tb: i64,
    pub rot: i64,
    #[serde(default)]
    pub coeff: Option<SurgeryCoefficient>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkingRecord {
    pub a: ComponentId,
    pub b: ComponentId,
    pub lk: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramFile {
    pub components: Vec<ComponentRecord>,
    #[serde(default)]
    pub linkings: Vec<LinkingRecord>,
}

fn topo_from_str(id: &ComponentId, s: &str) -> Result<TopoType, DiagramError> {
    match s {
        "unknot" => Ok(TopoType::Unknot),
        "rhtrefoil" => Ok(TopoType::RhTrefoil),
        _ => match s.strip_prefix("pushoff:") {
            Some(parent) if !parent.is_empty() => Ok(TopoType::PushoffOf(ComponentId::new(parent))),
            _ => Err(DiagramError::Argument {
                id: id.clone(),
                reason: format!("unknown component type {s:?}"),
            }),
        },
    }
}

fn topo_to_string(t: &TopoType) -> String {
    match t {
        TopoType::Unknot => "unknot".into(),
        TopoType::RhTrefoil => "rhtrefoil".into(),
        TopoType::PushoffOf(p) => format!("pushoff:{p}"),
    }
}

/// Default linking of components `i < j` given the resolved linkings of
/// earlier pairs.
fn default_linking(
    comps: &[LegendrianComponent],
    i: usize,
    j: usize,
    resolved: &BTreeMap<(usize, usize), i64>,
) -> i64 {
    let TopoType::PushoffOf(parent) = &comps[j].topo else {
        return 0;
    };
    let Some(p) = comps.iter().position(|c| &c.id == parent) else {
        return 0;
    };
    if p == i {
        return comps[i].tb;
    }
    let pair = if p < i { (p, i) } else { (i, p) };
    resolved.get(&pair).copied().unwrap_or(0)
}

impl TryFrom<DiagramFile> for ContactDiagram {
    type Error = DiagramError;

    fn try_from(file: DiagramFile) -> Result<Self, Self::Error> {
        let comps = file
            .components
            .into_iter()
            .map(|r| {
                Ok(LegendrianComponent {
                    topo: topo_from_str(&r.id, &r.kind)?,
                    id: r.id,
                    tb: r.tb,
                    rot: r.rot,
                    coeff: r.coeff,
                })
            })
            .collect::<Result<Vec<_>, DiagramError>>()?;
        let pos = |id: &ComponentId| {
            comps
                .iter()
                .position(|c| &c.id == id)
                .ok_or_else(|| DiagramError::DanglingLinking(id.clone()))
        };
        let mut overrides = BTreeMap::new();
        for rec in &file.linkings {
            let (a, b) = (pos(&rec.a)?, pos(&rec.b)?);
            if a == b {
                return Err(DiagramError::SelfLinking(rec.a.clone()));
            }
            overrides.insert((a.min(b), a.max(b)), rec.lk);
        }
        let mut resolved = BTreeMap::new();
        for j in 0..comps.len() {
            for i in 0..j {
                let lk = match overrides.get(&(i, j)) {
                    Some(&lk) => lk,
                    None => default_linking(&comps, i, j, &resolved),
                };
                resolved.insert((i, j), lk);
            }
        }
        let linkings: Vec<_> = resolved
            .into_iter()
            .map(|((i, j), lk)| ((comps[i].id.clone(), comps[j].id.clone()), lk))
            .collect();
        ContactDiagram::from_parts(comps, linkings)
    }
}

impl From<ContactDiagram> for DiagramFile {
    fn from(d: ContactDiagram) -> Self {
        let comps = d.components();
        let mut resolved = BTreeMap::new();
        let mut linkings = Vec::new();
        for j in 0..comps.len() {
            for i in 0..j {
                let lk = d.linking(&comps[i].id, &comps[j].id);
                if lk != 0 || default_linking(comps, i, j, &resolved) != lk {
                    linkings.push(LinkingRecord {
                        a: comps[i].id.clone(),
                        b: comps[j].id.clone(),
                        lk,
                    });
                }
                resolved.insert((i, j), lk);
            }
        }
        DiagramFile {
            components: comps
                .iter()
                .map(|c| ComponentRecord {
                    id: c.id.clone(),
                    kind: topo_to_string(&c.topo),
                    tb: c.tb,
                    rot: c.rot,
                    coeff: c.coeff.clone(),
                })
                .collect(),
            linkings,
        }
    }
}

pub fn parse_diagram(text: &str) -> Result<ContactDiagram, FormatError> {
    let file: DiagramFile = parse_json(text)?;
    Ok(ContactDiagram::try_from(file)?)
}

pub fn diagram_to_json(d: &ContactDiagram) -> String {
    serde_json::to_string_pretty(&DiagramFile::from(d.clone())).expect("diagram serializes")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramedLinkFile {
    pub n: usize,
    pub matrix: Vec<i64>,
    #[serde(default)]
    pub tags: Option<Vec<ComponentTag>>,
}

impl TryFrom<FramedLinkFile> for FramedLink {
    type Error = FormatError;

    fn try_from(f: FramedLinkFile) -> Result<Self, Self::Error> {
        if f.matrix.len() != f.n * f.n {
            return Err(FormatError::Record(format!(
                "matrix has {} entries, expected n*n = {}",
                f.matrix.len(),
                f.n * f.n
            )));
        }
        let rows = if f.n == 0 {
            Vec::new()
        } else {
            f.matrix.chunks(f.n).map(<[i64]>::to_vec).collect()
        };
        let tags = f.tags.unwrap_or_else(|| vec![ComponentTag::Opaque; f.n]);
        Ok(FramedLink::new(rows, tags)?)
    }
}

impl From<&FramedLink> for FramedLinkFile {
    fn from(fl: &FramedLink) -> Self {
        FramedLinkFile {
            n: fl.n(),
            matrix: fl.matrix().iter().flatten().copied().collect(),
            tags: Some(fl.tags().to_vec()),
        }
    }
}

pub fn parse_framed_link(text: &str) -> Result<FramedLink, FormatError> {
    let file: FramedLinkFile = parse_json(text)?;
    FramedLink::try_from(file)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactRecord {
    pub manifold: ManifoldId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(u64, Option<u64>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsFile {
    pub facts: Vec<FactRecord>,
    /// Include the lens-space rank axiom (default on).
    #[serde(default = "default_true")]
    pub lens_axiom: bool,
}

fn default_true() -> bool {
    true
}

/// Rank facts file; records are applied on top of an empty database.
pub fn parse_facts(text: &str) -> Result<RankDb, FormatError> {
    let file: FactsFile = parse_json(text)?;
    let mut db = RankDb::new().with_lens_axiom(file.lens_axiom);
    for rec in file.facts {
        let fact = match (rec.rank, rec.interval) {
            (Some(r), None) => RankInterval::exact(r),
            (None, Some((lo, hi))) => {
                if hi.is_some_and(|h| h < lo) {
                    return Err(FormatError::Record(format!(
                        "{}: empty interval [{lo}, {}]",
                        rec.manifold,
                        hi.unwrap_or_default()
                    )));
                }
                RankInterval { lo, hi }
            }
            _ => {
                return Err(FormatError::Record(format!(
                    "{}: give exactly one of rank or interval",
                    rec.manifold
                )))
            }
        };
        db = db.with_fact(rec.manifold, fact);
    }
    Ok(db)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrianglesFile {
    pub triangles: Vec<TriangleInstance>,
}

pub fn parse_triangles(text: &str) -> Result<Vec<TriangleInstance>, FormatError> {
    let file: TrianglesFile = parse_json(text)?;
    Ok(file.triangles)
}
