//! Contact surgery diagrams on Legendrian knots in the standard contact `S³`.
//!
//! Diagrams are values: every operation returns a new diagram and re-checks the
//! structural invariants (unique ids, resolvable pushoff parents, nonzero
//! coefficients, Bennequin bounds) before handing it back.
//!
//! Linking numbers are recorded eagerly when a pushoff is created. Later
//! stabilizations of either knot do not touch the recorded values.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rationals::{
    min_k_negative, neg_cf, prop7_transform, rprime_from_r, unit_fraction, RationalError,
    SurgeryCoefficient,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("no tight extension: contact coefficient 0 on component {0}")]
    NoTightExtension(ComponentId),
    #[error("unknown component {0}")]
    UnknownComponent(ComponentId),
    #[error("duplicate component id {0}")]
    DuplicateId(ComponentId),
    #[error("component {id}: pushoff parent {parent} does not precede it in the diagram")]
    DanglingParent {
        id: ComponentId,
        parent: ComponentId,
    },
    #[error("component {0}: pushoff ancestry is cyclic")]
    CyclicAncestry(ComponentId),
    #[error("component {id} violates the Bennequin bound: tb + |rot| = {value} > {bound}")]
    Bennequin {
        id: ComponentId,
        value: i64,
        bound: i64,
    },
    #[error("linking record references {0}, which is not in the diagram")]
    DanglingLinking(ComponentId),
    #[error("self-linking record on {0}")]
    SelfLinking(ComponentId),
    #[error("component {id}: {reason}")]
    Argument { id: ComponentId, reason: String },
    #[error("domain error on component {id}: {reason}")]
    Domain { id: ComponentId, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub String);

impl ComponentId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TopoType {
    Unknot,
    RhTrefoil,
    PushoffOf(ComponentId),
}

/// Smooth knot type at the root of a pushoff ancestry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnotType {
    Unknot,
    RhTrefoil,
}

impl KnotType {
    /// Maximal `tb + |rot|` over Legendrian representatives.
    pub fn bennequin_bound(self) -> i64 {
        match self {
            KnotType::Unknot => -1,
            KnotType::RhTrefoil => 1,
        }
    }
}

/// Direction of a stabilization; `Positive` raises the rotation number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendrianComponent {
    pub id: ComponentId,
    pub topo: TopoType,
    pub tb: i64,
    pub rot: i64,
    /// `None` marks a knot that carries no surgery (yet).
    pub coeff: Option<SurgeryCoefficient>,
}

impl LegendrianComponent {
    pub fn new(
        id: impl Into<String>,
        topo: TopoType,
        tb: i64,
        rot: i64,
        coeff: Option<SurgeryCoefficient>,
    ) -> Self {
        Self {
            id: ComponentId::new(id),
            topo,
            tb,
            rot,
            coeff,
        }
    }
}

/// Smooth surgery coefficient `tb + contact coefficient`.
pub fn smooth_framing(c: &LegendrianComponent) -> Option<SurgeryCoefficient> {
    c.coeff.as_ref().map(|r| r.add_integer(&BigInt::from(c.tb)))
}

/// Stabilization signs for [`ContactDiagram::convert_negative`]: one vector per
/// chain knot, each as long as that knot's stabilization count.
pub type ChainChoice = Vec<Vec<Sign>>;

/// Per-component stabilization choices used by [`ContactDiagram::dg_normalize`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeChoices(pub BTreeMap<ComponentId, ChainChoice>);

/// Position-indexed view of a diagram, used to compare presentations
/// independently of component ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub components: Vec<(CanonicalTopo, i64, i64, Option<SurgeryCoefficient>)>,
    pub linking: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanonicalTopo {
    Unknot,
    RhTrefoil,
    PushoffOf(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    try_from = "crate::formats::DiagramFile",
    into = "crate::formats::DiagramFile"
)]
pub struct ContactDiagram {
    components: Vec<LegendrianComponent>,
    linkings: BTreeMap<(ComponentId, ComponentId), i64>,
}

fn key(a: &ComponentId, b: &ComponentId) -> (ComponentId, ComponentId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl ContactDiagram {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a diagram from components and explicit linking numbers
    /// (pairs not listed link zero).
    pub fn from_parts(
        components: Vec<LegendrianComponent>,
        linkings: impl IntoIterator<Item = ((ComponentId, ComponentId), i64)>,
    ) -> Result<Self, DiagramError> {
        let mut d = Self {
            components,
            linkings: BTreeMap::new(),
        };
        for ((a, b), lk) in linkings {
            if a == b {
                return Err(DiagramError::SelfLinking(a));
            }
            d.set_linking(&a, &b, lk);
        }
        d.checked()
    }

    pub fn components(&self) -> &[LegendrianComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn linkings(&self) -> &BTreeMap<(ComponentId, ComponentId), i64> {
        &self.linkings
    }

    pub fn component(&self, id: &ComponentId) -> Result<&LegendrianComponent, DiagramError> {
        self.components
            .iter()
            .find(|c| &c.id == id)
            .ok_or_else(|| DiagramError::UnknownComponent(id.clone()))
    }

    fn component_mut(
        &mut self,
        id: &ComponentId,
    ) -> Result<&mut LegendrianComponent, DiagramError> {
        self.components
            .iter_mut()
            .find(|c| &c.id == id)
            .ok_or_else(|| DiagramError::UnknownComponent(id.clone()))
    }

    pub fn position(&self, id: &ComponentId) -> Option<usize> {
        self.components.iter().position(|c| &c.id == id)
    }

    pub fn contains(&self, id: &ComponentId) -> bool {
        self.position(id).is_some()
    }

    /// Recorded linking number; `0` for unrecorded pairs.
    pub fn linking(&self, a: &ComponentId, b: &ComponentId) -> i64 {
        self.linkings.get(&key(a, b)).copied().unwrap_or(0)
    }

    fn set_linking(&mut self, a: &ComponentId, b: &ComponentId, lk: i64) {
        if lk == 0 {
            self.linkings.remove(&key(a, b));
        } else {
            self.linkings.insert(key(a, b), lk);
        }
    }

    /// Root knot type of a component, following pushoff ancestry.
    pub fn knot_type(&self, id: &ComponentId) -> Result<KnotType, DiagramError> {
        let mut current = self.component(id)?;
        for _ in 0..=self.components.len() {
            match &current.topo {
                TopoType::Unknot => return Ok(KnotType::Unknot),
                TopoType::RhTrefoil => return Ok(KnotType::RhTrefoil),
                TopoType::PushoffOf(parent) => {
                    current = self
                        .component(parent)
                        .map_err(|_| DiagramError::DanglingParent {
                            id: current.id.clone(),
                            parent: parent.clone(),
                        })?;
                }
            }
        }
        Err(DiagramError::CyclicAncestry(id.clone()))
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), DiagramError> {
        let mut index: BTreeMap<&ComponentId, usize> = BTreeMap::new();
        for (i, c) in self.components.iter().enumerate() {
            if index.insert(&c.id, i).is_some() {
                return Err(DiagramError::DuplicateId(c.id.clone()));
            }
        }
        // root knot type per position; parents precede their pushoffs, so one
        // forward pass resolves every ancestry
        let mut roots: Vec<KnotType> = Vec::with_capacity(self.components.len());
        for (i, c) in self.components.iter().enumerate() {
            let root = match &c.topo {
                TopoType::Unknot => KnotType::Unknot,
                TopoType::RhTrefoil => KnotType::RhTrefoil,
                TopoType::PushoffOf(parent) => match index.get(parent) {
                    Some(&p) if p < i => roots[p],
                    _ => {
                        return Err(DiagramError::DanglingParent {
                            id: c.id.clone(),
                            parent: parent.clone(),
                        })
                    }
                },
            };
            roots.push(root);
            if c.coeff.as_ref().is_some_and(SurgeryCoefficient::is_zero) {
                return Err(DiagramError::NoTightExtension(c.id.clone()));
            }
            let bound = root.bennequin_bound();
            let value = c.tb.saturating_add(c.rot.saturating_abs());
            if value > bound {
                return Err(DiagramError::Bennequin {
                    id: c.id.clone(),
                    value,
                    bound,
                });
            }
        }
        for (a, b) in self.linkings.keys() {
            if a == b {
                return Err(DiagramError::SelfLinking(a.clone()));
            }
            for x in [a, b] {
                if !index.contains_key(x) {
                    return Err(DiagramError::DanglingLinking(x.clone()));
                }
            }
        }
        Ok(())
    }

    fn checked(self) -> Result<Self, DiagramError> {
        self.validate()?;
        Ok(self)
    }

    /// Id of the form `base.n` not yet used in the diagram.
    fn fresh_id(&self, base: &ComponentId) -> ComponentId {
        (1..)
            .map(|n| ComponentId(format!("{}.{}", base.0, n)))
            .find(|id| !self.contains(id))
            .expect("unbounded id space")
    }

    /// Appends a component with the given linkings to existing components.
    pub fn add_component(
        &self,
        component: LegendrianComponent,
        links: &[(ComponentId, i64)],
    ) -> Result<Self, DiagramError> {
        let mut d = self.clone();
        let id = component.id.clone();
        d.components.push(component);
        for (other, lk) in links {
            if other == &id {
                return Err(DiagramError::SelfLinking(id));
            }
            d.set_linking(&id, other, *lk);
        }
        d.checked()
    }

    pub fn with_coefficient(
        &self,
        id: &ComponentId,
        coeff: Option<SurgeryCoefficient>,
    ) -> Result<Self, DiagramError> {
        let mut d = self.clone();
        d.component_mut(id)?.coeff = coeff;
        d.checked()
    }

    /// One stabilization: `tb − 1`, `rot ± 1`.
    pub fn stabilize(&self, id: &ComponentId, sign: Sign) -> Result<Self, DiagramError> {
        let mut d = self.clone();
        let c = d.component_mut(id)?;
        c.tb -= 1;
        c.rot += sign.as_i64();
        d.checked()
    }

    /// Legendrian pushoff along the contact framing. The copy carries no surgery.
    pub fn contact_pushoff(&self, id: &ComponentId) -> Result<(Self, ComponentId), DiagramError> {
        let mut d = self.clone();
        let new_id = d.push_pushoff(id)?;
        Ok((d.checked()?, new_id))
    }

    /// In-place pushoff without revalidation, for builders that check once at the end.
    fn push_pushoff(&mut self, id: &ComponentId) -> Result<ComponentId, DiagramError> {
        let parent = self.component(id)?.clone();
        let new_id = self.fresh_id(id);
        let others: Vec<(ComponentId, i64)> = self
            .components
            .iter()
            .filter(|c| &c.id != id)
            .map(|c| (c.id.clone(), self.linking(id, &c.id)))
            .collect();
        self.components.push(LegendrianComponent {
            id: new_id.clone(),
            topo: TopoType::PushoffOf(id.clone()),
            tb: parent.tb,
            rot: parent.rot,
            coeff: None,
        });
        self.set_linking(&new_id, id, parent.tb);
        for (other, lk) in others {
            self.set_linking(&new_id, &other, lk);
        }
        Ok(new_id)
    }

    /// Deletes a component and its linking records. Pushoffs of the deleted
    /// knot inherit its ancestry.
    pub fn remove_component(&self, id: &ComponentId) -> Result<Self, DiagramError> {
        let removed = self.component(id)?.clone();
        let mut d = self.clone();
        d.components.retain(|c| &c.id != id);
        for c in &mut d.components {
            if c.topo == TopoType::PushoffOf(id.clone()) {
                c.topo = removed.topo.clone();
            }
        }
        d.linkings.retain(|(a, b), _| a != id && b != id);
        d.checked()
    }

    /// Replaces contact `r`-surgery (`r < 0`) on `id` by a chain of Legendrian
    /// surgeries read off the negative continued fraction of `r`.
    ///
    /// `choices[i]` gives the stabilization signs of the `i`-th chain knot;
    /// missing entries default to all-negative stabilizations.
    pub fn convert_negative(
        &self,
        id: &ComponentId,
        choices: &[Vec<Sign>],
    ) -> Result<Self, DiagramError> {
        let r = self
            .component(id)?
            .coeff
            .clone()
            .ok_or_else(|| DiagramError::Domain {
                id: id.clone(),
                reason: "component carries no surgery".into(),
            })?;
        if !r.is_negative() {
            return Err(DiagramError::Domain {
                id: id.clone(),
                reason: format!("chain conversion needs a negative coefficient, got {r}"),
            });
        }
        let counts = stabilization_counts(&r, id)?;
        if choices.len() > counts.len() {
            return Err(DiagramError::Argument {
                id: id.clone(),
                reason: format!(
                    "{} choice vectors given for a chain of length {}",
                    choices.len(),
                    counts.len()
                ),
            });
        }
        for (i, (choice, &s)) in choices.iter().zip(&counts).enumerate() {
            if choice.len() != s {
                return Err(DiagramError::Argument {
                    id: id.clone(),
                    reason: format!(
                        "chain knot {}: {} stabilization signs given, {} required",
                        i + 1,
                        choice.len(),
                        s
                    ),
                });
            }
        }

        let mut d = self.clone();
        let mut current = id.clone();
        for (i, &s) in counts.iter().enumerate() {
            if i > 0 {
                current = d.push_pushoff(&current)?;
            }
            let default_signs = vec![Sign::Negative; s];
            let signs = choices.get(i).unwrap_or(&default_signs);
            let c = d.component_mut(&current)?;
            for &sign in signs {
                c.tb -= 1;
                c.rot += sign.as_i64();
            }
            c.coeff = Some(SurgeryCoefficient::minus_one());
        }
        d.checked()
    }

    /// Replaces contact `r'`-surgery (`r' > 0`) on `id` by `k` contact
    /// `(+1)`-surgeries on pushoffs of `id` together with `r''`-surgery on `id`,
    /// `r'' = r'/(1 − k r')`. When `r'' = ∞` the component is deleted.
    pub fn convert_positive(&self, id: &ComponentId, k: u64) -> Result<Self, DiagramError> {
        let rp = self
            .component(id)?
            .coeff
            .clone()
            .ok_or_else(|| DiagramError::Domain {
                id: id.clone(),
                reason: "component carries no surgery".into(),
            })?;
        let rpp = prop7_transform(&rp, k).map_err(|e| DiagramError::Domain {
            id: id.clone(),
            reason: e.to_string(),
        })?;
        let mut d = self.clone();
        for _ in 0..k {
            let new_id = d.push_pushoff(id)?;
            d.component_mut(&new_id)?.coeff = Some(SurgeryCoefficient::one());
        }
        if rpp.is_infinite() {
            d.remove_component(id)
        } else {
            d.with_coefficient(id, Some(rpp))
        }
    }

    /// Rewrites the diagram so every contact coefficient is `±1`.
    ///
    /// Components without surgery or with coefficient `∞` are deleted first.
    /// Positive coefficients other than `1` go through [`Self::convert_positive`]
    /// with `k = j` when `r' = 1/j` and `k = min_k_negative(r')` otherwise; the
    /// remaining negative coefficients other than `−1` are chain-converted.
    pub fn dg_normalize(&self, choices: &NormalizeChoices) -> Result<Self, DiagramError> {
        self.validate()?;
        let mut d = self.clone();
        let dropped: Vec<ComponentId> = d
            .components
            .iter()
            .filter(|c| c.coeff.as_ref().is_none_or(SurgeryCoefficient::is_infinite))
            .map(|c| c.id.clone())
            .collect();
        for id in &dropped {
            d = d.remove_component(id)?;
        }

        let positive: Vec<(ComponentId, SurgeryCoefficient)> = d
            .components
            .iter()
            .filter_map(|c| c.coeff.clone().map(|r| (c.id.clone(), r)))
            .filter(|(_, r)| r.is_positive() && !r.is_integer_value(1))
            .collect();
        for (id, rp) in positive {
            let k = match unit_fraction(&rp) {
                Some(j) => j,
                None => min_k_negative(&rp)?,
            };
            d = d.convert_positive(&id, k)?;
        }

        let negative: Vec<ComponentId> = d
            .components
            .iter()
            .filter(|c| {
                c.coeff
                    .as_ref()
                    .is_some_and(|r| r.is_negative() && !r.is_integer_value(-1))
            })
            .map(|c| c.id.clone())
            .collect();
        for id in negative {
            let choice = choices.0.get(&id).map(Vec::as_slice).unwrap_or(&[]);
            d = d.convert_negative(&id, choice)?;
        }
        Ok(d)
    }

    /// Whether every surgery coefficient is `+1` or `−1`.
    pub fn is_normalized(&self) -> bool {
        self.components.iter().all(|c| {
            c.coeff
                .as_ref()
                .is_some_and(|r| r.is_integer_value(1) || r.is_integer_value(-1))
        })
    }

    fn cancellable_pair(&self) -> Option<(ComponentId, ComponentId)> {
        for p in &self.components {
            let TopoType::PushoffOf(parent) = &p.topo else {
                continue;
            };
            if !p.coeff.as_ref().is_some_and(|r| r.is_integer_value(1)) {
                continue;
            }
            let Ok(k) = self.component(parent) else {
                continue;
            };
            if !k.coeff.as_ref().is_some_and(|r| r.is_integer_value(-1)) {
                continue;
            }
            // the pushoff must still be an unstabilized parallel copy of K
            if p.tb != k.tb || p.rot != k.rot || self.linking(&p.id, &k.id) != k.tb {
                continue;
            }
            let parallel = self
                .components
                .iter()
                .filter(|j| j.id != p.id && j.id != k.id)
                .all(|j| self.linking(&j.id, &k.id) == self.linking(&j.id, &p.id));
            if parallel {
                return Some((k.id.clone(), p.id.clone()));
            }
        }
        None
    }

    /// Removes Legendrian-surgery knots cancelled by a contact `(+1)`-surgery on
    /// an unstabilized pushoff, until no such pair remains.
    pub fn cancel_pushoff_pairs(&self) -> Self {
        let mut d = self.clone();
        while let Some((k, p)) = d.cancellable_pair() {
            d = d
                .remove_component(&p)
                .and_then(|d| d.remove_component(&k))
                .expect("cancellable pair refers to present components");
        }
        d
    }

    pub fn canonical(&self) -> CanonicalForm {
        let components = self
            .components
            .iter()
            .map(|c| {
                let topo = match &c.topo {
                    TopoType::Unknot => CanonicalTopo::Unknot,
                    TopoType::RhTrefoil => CanonicalTopo::RhTrefoil,
                    TopoType::PushoffOf(p) => {
                        CanonicalTopo::PushoffOf(self.position(p).unwrap_or(usize::MAX))
                    }
                };
                (topo, c.tb, c.rot, c.coeff.clone())
            })
            .collect();
        let linking = self
            .components
            .iter()
            .map(|a| {
                self.components
                    .iter()
                    .map(|b| {
                        if a.id == b.id {
                            0
                        } else {
                            self.linking(&a.id, &b.id)
                        }
                    })
                    .collect()
            })
            .collect();
        CanonicalForm {
            components,
            linking,
        }
    }

    /// Same components, in the same order, up to renaming ids.
    pub fn same_presentation(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

fn stabilization_counts(
    r: &SurgeryCoefficient,
    id: &ComponentId,
) -> Result<Vec<usize>, DiagramError> {
    neg_cf(r)?
        .stabilization_counts()
        .into_iter()
        .map(|s| {
            s.to_usize().ok_or_else(|| DiagramError::Domain {
                id: id.clone(),
                reason: format!("stabilization count {s} is too large"),
            })
        })
        .collect()
}

/// Number of distinct tight presentations produced by normalizing contact
/// `r`-surgery: `∏ (s_i + 1)` over the chain's stabilization counts.
pub fn count_presentations(r: &SurgeryCoefficient) -> Result<BigUint, DiagramError> {
    let chain_coeff = if r.is_zero() {
        return Err(DiagramError::NoTightExtension(ComponentId::new("r")));
    } else if r.is_infinite() || unit_fraction(r).is_some() {
        return Ok(BigUint::one());
    } else if r.is_positive() {
        prop7_transform(r, min_k_negative(r)?)?
    } else {
        r.clone()
    };
    let counts = neg_cf(&chain_coeff)?.stabilization_counts();
    Ok(counts
        .into_iter()
        .map(|s| (s + BigInt::one()).to_biguint().expect("non-negative"))
        .product())
}

/// The right-handed trefoil with `tb = 1`, `rot = 0` and contact `(−1)`-surgery,
/// followed by `k` contact `(+1)`-surgeries on successive pushoffs of it.
pub fn generate_vk(k: u64) -> Result<ContactDiagram, DiagramError> {
    let trefoil = ComponentId::new("T");
    if k == 0 {
        return Err(DiagramError::Argument {
            id: trefoil,
            reason: "V_k needs k >= 1".into(),
        });
    }
    let mut d = ContactDiagram::empty().add_component(
        LegendrianComponent::new(
            "T",
            TopoType::RhTrefoil,
            1,
            0,
            Some(SurgeryCoefficient::minus_one()),
        ),
        &[],
    )?;
    for _ in 0..k {
        let id = d.push_pushoff(&trefoil)?;
        d.component_mut(&id)?.coeff = Some(SurgeryCoefficient::one());
    }
    d.checked()
}

/// Trefoil with contact `(−1)`-surgery and a pushoff with contact
/// `r' = (r − 1)/r`; the pushoff is omitted when `r' = ∞`.
pub fn generate_yr_diagram(r: &SurgeryCoefficient) -> Result<ContactDiagram, DiagramError> {
    let rp = rprime_from_r(r)?;
    let trefoil = ComponentId::new("T");
    let d = ContactDiagram::empty().add_component(
        LegendrianComponent::new(
            "T",
            TopoType::RhTrefoil,
            1,
            0,
            Some(SurgeryCoefficient::minus_one()),
        ),
        &[],
    )?;
    if rp.is_infinite() {
        return Ok(d);
    }
    let (d, p) = d.contact_pushoff(&trefoil)?;
    d.with_coefficient(&p, Some(rp))
}
