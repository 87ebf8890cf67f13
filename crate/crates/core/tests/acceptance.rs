//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use surgery_core::contact_diagram::{
    count_presentations, ComponentId, ContactDiagram, LegendrianComponent, NormalizeChoices, Sign,
    TopoType,
};
use surgery_core::floer_engine::{base_facts, propagate, triangle_solve, vk_triangles};
use surgery_core::rationals::{neg_cf, NegContinuedFraction};
use surgery_core::smooth_topology::{det_signed, h1, h1_diagram, linking_matrix, ManifoldId};
use surgery_core::{
    certify_tight, check_certificate, generate_vk, generate_yr_diagram, SurgeryCoefficient,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_slope(
    rng: &mut ChaCha8Rng,
    p_range: std::ops::RangeInclusive<i64>,
    q_max: i64,
) -> SurgeryCoefficient {
    loop {
        let p = rng.gen_range(p_range.clone());
        let q = rng.gen_range(1..=q_max);
        if p.gcd(&q) != 1 || p == q {
            continue;
        }
        return SurgeryCoefficient::new(p, q).unwrap();
    }
}

fn criterion_1() -> Outcome {
    let db = propagate(&base_facts(), &vk_triangles(100)).map_err(|e| e.to_string())?;
    for k in 1..=100u64 {
        let got = db.get(&ManifoldId::MinusVk(k));
        ensure(got.exact_value() == Some(k), || {
            format!("rank of -V{k} is {got}")
        })?;
    }
    Ok("rank HF(-V_k) = k for 1 <= k <= 100".into())
}

fn criterion_2() -> Outcome {
    for k in 1..=100u64 {
        let s = triangle_solve(k, k + 1, 1).map_err(|e| e.to_string())?;
        ensure(s.f_injective, || {
            format!("({k}, {}, 1) is not injective", k + 1)
        })?;
    }
    let s = triangle_solve(1, 2, 1).map_err(|e| e.to_string())?;
    ensure(s.f_injective, || "(1, 2, 1) is not injective".into())?;
    Ok("f injective on (k, k+1, 1) for 1 <= k <= 100 and on (1, 2, 1)".into())
}

fn criterion_3() -> Outcome {
    let mut seen = BTreeSet::new();
    let (mut stein, mut chain) = (0, 0);
    for p in -10i64..=10 {
        for q in 1i64..=10 {
            let r = SurgeryCoefficient::new(p, q).unwrap();
            if r.is_integer_value(1) || !seen.insert(r.to_string()) {
                continue;
            }
            let cert = certify_tight(&r).map_err(|e| format!("r = {r}: {e}"))?;
            ensure(check_certificate(&cert), || {
                format!("r = {r}: certificate rejected")
            })?;
            if cert.edges.is_empty() {
                stein += 1;
            } else {
                chain += 1;
            }
        }
    }
    ensure(stein > 0 && chain > 0, || {
        "one branch was never exercised".into()
    })?;
    ensure(certify_tight(&SurgeryCoefficient::one()).is_err(), || {
        "r = 1 produced a certificate".into()
    })?;
    let corpus = common::mutation_corpus();
    ensure(corpus.len() >= 50, || {
        format!("only {} mutations", corpus.len())
    })?;
    if let Some((s, name, _)) = corpus.iter().find(|(_, _, c)| check_certificate(c)) {
        return Err(format!("r = {s}: mutation `{name}` accepted"));
    }
    Ok(format!(
        "{} slopes certified ({stein} Stein, {chain} V chain), r = 1 refused, {} mutations rejected",
        seen.len(),
        corpus.len()
    ))
}

fn unknot_with(r: &SurgeryCoefficient) -> ContactDiagram {
    ContactDiagram::empty()
        .add_component(
            LegendrianComponent::new("U", TopoType::Unknot, -1, 0, Some(r.clone())),
            &[],
        )
        .unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let r = random_slope(&mut rng, -60..=60, 40);
        let d = generate_yr_diagram(&r)
            .and_then(|d| d.dg_normalize(&NormalizeChoices::default()))
            .map_err(|e| format!("r = {r}: {e}"))?;
        let h = h1(&linking_matrix(&d).map_err(|e| e.to_string())?);
        ensure(h.is_cyclic() && h.order() == r.numerator().abs(), || {
            format!("r = {r}: H1 = {h}")
        })?;
    }
    for _ in 0..50 {
        let r = random_slope(&mut rng, -60..=-1, 40);
        let d = unknot_with(&r)
            .convert_negative(&ComponentId::new("U"), &[])
            .map_err(|e| format!("r = {r}: {e}"))?;
        let det = det_signed(linking_matrix(&d).map_err(|e| e.to_string())?.matrix())
            .map_err(|e| e.to_string())?;
        let expected = (r.numerator() - r.denominator()).abs();
        ensure(det.abs() == expected, || {
            format!("r = {r}: |det| = {}, expected {expected}", det.abs())
        })?;
    }
    Ok(
        "200 trefoil slopes give cyclic H1 of order |p|; 50 unknot chains give |det| = |p - q|"
            .into(),
    )
}

/// Distinct `(tb, rot)` chains over every choice of stabilization signs.
fn brute_force_presentations(r: &SurgeryCoefficient) -> usize {
    let counts: Vec<usize> = neg_cf(r)
        .unwrap()
        .stabilization_counts()
        .iter()
        .map(|s| s.to_usize().unwrap())
        .collect();
    let total: usize = counts.iter().sum();
    let base = unknot_with(r);
    let mut outcomes = BTreeSet::new();
    for mask in 0u64..(1 << total) {
        let mut bit = 0;
        let choice: Vec<Vec<Sign>> = counts
            .iter()
            .map(|&s| {
                (0..s)
                    .map(|_| {
                        bit += 1;
                        if mask >> (bit - 1) & 1 == 1 {
                            Sign::Positive
                        } else {
                            Sign::Negative
                        }
                    })
                    .collect()
            })
            .collect();
        let d = base
            .convert_negative(&ComponentId::new("U"), &choice)
            .unwrap();
        let key: Vec<(i64, i64)> = d.components().iter().map(|c| (c.tb, c.rot)).collect();
        outcomes.insert(key);
    }
    outcomes.len()
}

/// `∏ |b_i + 1|` over the negative continued fraction of the smooth slope `r − 1`.
fn lens_product(r: &SurgeryCoefficient) -> BigUint {
    let smooth = r.add_integer(&BigInt::from(-1));
    let NegContinuedFraction { coefficients } = neg_cf(&smooth).unwrap();
    coefficients
        .iter()
        .map(|b| (b + BigInt::from(1)).abs().to_biguint().unwrap())
        .product()
}

fn criterion_5() -> Outcome {
    for k in 1..=20i64 {
        let n = count_presentations(&SurgeryCoefficient::new(1, k).unwrap())
            .map_err(|e| e.to_string())?;
        ensure(n == BigUint::from(1u32), || {
            format!("r = 1/{k}: {n} presentations")
        })?;
    }
    for (r, want) in [("-5/3", 4u32), ("-3/2", 2)] {
        let r: SurgeryCoefficient = r.parse().unwrap();
        let n = count_presentations(&r).map_err(|e| e.to_string())?;
        ensure(n == BigUint::from(want), || {
            format!("r = {r}: {n}, expected {want}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let r = random_slope(&mut rng, -12..=-1, 9);
        let n = count_presentations(&r).map_err(|e| e.to_string())?;
        let brute = BigUint::from(brute_force_presentations(&r));
        let lens = lens_product(&r);
        ensure(n == brute && n == lens, || {
            format!("r = {r}: count {n}, brute force {brute}, lens product {lens}")
        })?;
    }
    Ok(
        "1/k unique for k <= 20; 20 negative slopes agree with brute force and the lens product"
            .into(),
    )
}

fn criterion_6() -> Outcome {
    for a in 0..=8u64 {
        for b in 0..=8u64 {
            for c in 0..=8u64 {
                let mut sols = Vec::new();
                for x in 0..=8u64 {
                    for y in 0..=8u64 {
                        for z in 0..=8u64 {
                            if x + z == a && x + y == b && y + z == c {
                                sols.push((x, y, z));
                            }
                        }
                    }
                }
                match (triangle_solve(a, b, c), sols.as_slice()) {
                    (Ok(s), [(x, y, z)]) if (s.rank_f, s.rank_g, s.rank_h) == (*x, *y, *z) => {}
                    (Err(_), []) => {}
                    (got, _) => {
                        return Err(format!(
                            "({a}, {b}, {c}): solver {got:?}, brute force {sols:?}"
                        ))
                    }
                }
            }
        }
    }
    Ok("triangle_solve matches brute force on all 729 triples with entries <= 8".into())
}

fn criterion_7() -> Outcome {
    let order = |m: &ManifoldId| m.h1_order().and_then(|o| o.to_u64());
    for t in vk_triangles(100).iter().filter(|t| !t.informational) {
        let dims = (order(&t.a), order(&t.b), order(&t.c));
        let (Some(a), Some(b), Some(c)) = dims else {
            return Err(format!("no H1 order for a vertex of [{}]", t.provenance));
        };
        ensure(
            surgery_core::smooth_topology::triangle_det_check(a, b, c),
            || format!("orders ({a}, {b}, {c}) fail for [{}]", t.provenance),
        )?;
    }
    for k in 1..=100u64 {
        let h =
            h1_diagram(&generate_vk(k).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(h.is_cyclic() && h.order() == BigInt::from(k), || {
            format!("H1(V{k}) = {h}")
        })?;
    }
    Ok(
        "order checks hold on both triangle families for 2 <= k <= 100; |H1(V_k)| = k for k <= 100"
            .into(),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 7] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (n, run) in criteria {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS [{secs:.2}s] ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL [{secs:.2}s] ({detail})");
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("acceptance: {} of 7 passed in {elapsed:.2}s", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
