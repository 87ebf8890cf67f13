//! Tampered certificates shared by the certifier tests and the acceptance suite.

#![allow(dead_code)]

use surgery_core::contact_certifier::{Claim, Premise, Rule, Witness};
use surgery_core::contact_diagram::{ComponentId, Sign};
use surgery_core::smooth_topology::ManifoldId;
use surgery_core::{certify_tight, Certificate, SurgeryCoefficient};

pub fn coeff(s: &str) -> SurgeryCoefficient {
    s.parse().unwrap()
}

type Mutator = fn(&Certificate) -> Option<Certificate>;

fn exact_index(c: &Certificate) -> Option<usize> {
    c.steps.iter().position(|s| s.rule == Rule::Exact)
}

fn bump_rank(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let i = exact_index(&c)?;
    match &mut c.steps[i].premises[1] {
        Premise::Rank { rank, .. } => *rank += 1,
        _ => return None,
    }
    Some(c)
}

fn lower_third_rank(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let i = c.steps.iter().rposition(|s| s.rule == Rule::Exact)?;
    match &mut c.steps[i].premises[3] {
        Premise::Rank { rank, .. } => *rank = rank.checked_sub(1).unwrap_or(5),
        _ => return None,
    }
    Some(c)
}

fn reverse_edge(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let e = c.edges.first_mut()?;
    std::mem::swap(&mut e.from, &mut e.to);
    Some(c)
}

fn reverse_last_edge(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let e = c.edges.iter_mut().rfind(|e| e.from.starts_with('D'))?;
    std::mem::swap(&mut e.from, &mut e.to);
    Some(c)
}

fn retarget_conclusion(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let other = c.nodes.iter().find(|n| n.id != "Y")?.id.clone();
    let last = c.steps.last_mut()?;
    last.conclusion = Claim::Tight(other);
    Some(c)
}

fn truncate(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    c.steps.pop()?;
    // when the raw diagram is already normalized the shorter proof is still a proof
    let Some(Claim::Tight(target)) = c.conclusion() else {
        return Some(c);
    };
    let raw = c.node("Y")?;
    let node = c.node(target)?;
    (!node.diagram.same_presentation(&raw.diagram)).then_some(c)
}

fn drop_first(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    c.steps.remove(0);
    Some(c)
}

fn drop_all_but_first(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    c.steps.truncate(1);
    Some(c)
}

fn change_trefoil_coefficient(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let n = c.nodes.iter_mut().find(|n| n.id == "Y")?;
    n.diagram = n
        .diagram
        .with_coefficient(
            &ComponentId::new("T"),
            Some(SurgeryCoefficient::integer(-2)),
        )
        .ok()?;
    Some(c)
}

fn stabilize_trefoil(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let n = c
        .nodes
        .iter_mut()
        .find(|n| n.id != "Y" && n.diagram.contains(&ComponentId::new("T")))?;
    n.diagram = n
        .diagram
        .stabilize(&ComponentId::new("T"), Sign::Negative)
        .ok()?;
    Some(c)
}

fn swap_rule(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let s = c.steps.first_mut()?;
    s.rule = if s.rule == Rule::R1 {
        Rule::R3
    } else {
        Rule::R1
    };
    s.provenance = s.rule.statement().to_string();
    Some(c)
}

fn r6_on_vk(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let s = c.steps.iter_mut().find(|s| s.rule == Rule::R6)?;
    s.premises = vec![Premise::Node { id: "V2".into() }];
    s.conclusion = Claim::SteinFillable("V2".into());
    Some(c)
}

fn flip_flag(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let i = exact_index(&c)?;
    match &mut c.steps[i].premises[4] {
        Premise::Triangle { solution, .. } => solution.f_surjective = !solution.f_surjective,
        _ => return None,
    }
    Some(c)
}

fn forward_reference(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let n = c.steps.len();
    let s = c
        .steps
        .iter_mut()
        .find(|s| s.premises.iter().any(|p| matches!(p, Premise::Step { .. })))?;
    for p in &mut s.premises {
        if let Premise::Step { index } = p {
            *index = n - 1;
        }
    }
    Some(c)
}

fn change_manifold(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let n = c.nodes.iter_mut().find(|n| n.id == "Y")?;
    n.manifold = ManifoldId::yr(c.slope.add_integer(&7.into()));
    Some(c)
}

fn change_slope(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let next = c.slope.add_integer(&3.into());
    if next.is_integer_value(1) {
        return None;
    }
    c.slope = next;
    Some(c)
}

fn swap_triangle_vertices(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let i = exact_index(&c)?;
    match &mut c.steps[i].premises[4] {
        Premise::Triangle { instance, .. } => std::mem::swap(&mut instance.a, &mut instance.b),
        _ => return None,
    }
    Some(c)
}

fn remove_edge(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    if c.edges.is_empty() {
        return None;
    }
    c.edges.remove(0);
    Some(c)
}

fn wrong_witness(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let e = c.edges.first_mut()?;
    e.witness = Witness::SplitUnknot { tb: -1, rot: 0 };
    Some(c)
}

fn remove_node(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let i = c.nodes.iter().position(|n| n.id != "Y")?;
    c.nodes.remove(i);
    Some(c)
}

fn inject_r2(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let s = c.steps.iter_mut().find(|s| s.rule == Rule::R1)?;
    s.rule = Rule::R2;
    s.provenance = Rule::R2.statement().to_string();
    Some(c)
}

fn edit_provenance(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    c.steps.first_mut()?.provenance.push_str(" (edited)");
    Some(c)
}

fn skip_dg(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let last = c.steps.pop()?;
    if last.rule != Rule::Dg {
        return None;
    }
    // conclude about the raw node straight from the normalized node's R3
    let mut r3 = c.steps.last()?.clone();
    r3.conclusion = Claim::Tight("Y".into());
    c.steps.push(r3);
    Some(c)
}

fn injective_other_edge(c: &Certificate) -> Option<Certificate> {
    let mut c = c.clone();
    let i = exact_index(&c)?;
    let other = c
        .edges
        .iter()
        .rev()
        .find(|e| e.from.starts_with('D'))?
        .id
        .clone();
    c.steps[i].premises[0] = Premise::Edge { id: other.clone() };
    c.steps[i].conclusion = Claim::Injective(other);
    Some(c)
}

pub const MUTATORS: &[(&str, Mutator)] = &[
    ("rank premise +1", bump_rank),
    ("third rank premise changed", lower_third_rank),
    ("first edge reversed", reverse_edge),
    ("cancellation edge reversed", reverse_last_edge),
    ("final target changed", retarget_conclusion),
    ("last step removed", truncate),
    ("first step removed", drop_first),
    ("all steps after the first removed", drop_all_but_first),
    ("trefoil coefficient altered", change_trefoil_coefficient),
    ("trefoil tb altered", stabilize_trefoil),
    ("rule id swapped", swap_rule),
    ("R6 applied to V2", r6_on_vk),
    ("solution flag flipped", flip_flag),
    ("forward step reference", forward_reference),
    ("manifold changed", change_manifold),
    ("slope changed", change_slope),
    ("triangle vertices swapped", swap_triangle_vertices),
    ("edge removed", remove_edge),
    ("witness replaced", wrong_witness),
    ("node removed", remove_node),
    ("R2 injected", inject_r2),
    ("provenance edited", edit_provenance),
    ("normalization step skipped", skip_dg),
    ("triangle attached to another edge", injective_other_edge),
];

pub const MUTATION_SLOPES: &[&str] = &[
    "2", "3", "-1", "-5/3", "7/3", "1/2", "0", "5", "inf", "10/9", "-3/7",
];

/// `(slope, mutation name, tampered certificate)` for every applicable pair.
pub fn mutation_corpus() -> Vec<(String, &'static str, Certificate)> {
    let mut out = Vec::new();
    for s in MUTATION_SLOPES {
        let cert = certify_tight(&coeff(s)).unwrap();
        for (name, m) in MUTATORS {
            if let Some(t) = m(&cert) {
                if t != cert {
                    out.push((s.to_string(), *name, t));
                }
            }
        }
    }
    out
}
