use std::collections::BTreeSet;

use creature_core::builder::{
    audit_exactness, build_generic, is_condition, schedule_requirements, with_order_f, BuildConfig, Builder,
    ConditionViolation, DiscrepancyClass, RequirementKind, Separation, Status,
};
use creature_core::coder::{decode_relation, StepContext, StepInput};
use creature_core::creature::{validate_creature, Axiom, Creature};
use creature_core::order::{ground_elements, Id, Poset, SymMap, Tag, WitnessKind};

/// Minimal upper bounds computed from the strict pair list only.
fn mub_oracle(c: &Creature, x: Id, y: Id) -> BTreeSet<Id> {
    let lt: BTreeSet<(Id, Id)> = c.order().lt_pairs().into_iter().collect();
    let le = |a: Id, b: Id| a == b || lt.contains(&(a, b));
    let ubs: Vec<Id> = c.order().ids().filter(|&z| le(x, z) && le(y, z)).collect();
    ubs.iter().copied().filter(|&z| !ubs.iter().any(|&w| w != z && le(w, z))).collect()
}

fn antichain_ctx(n: u32, pairs: &[(u32, u32)], spares: usize) -> StepContext {
    let ground = Creature::from_order(Poset::antichain(ground_elements(n)).unwrap());
    let relation = pairs.iter().map(|&(a, b)| (Id(a), Id(b))).collect();
    StepContext::new(StepInput::new(ground, relation).unwrap(), spares).unwrap()
}

/// Ground `0, 1 < 2` with `F(0, 1) = 2`.
fn v_ctx(pairs: &[(u32, u32)], spares: usize) -> StepContext {
    let order = Poset::from_pairs(ground_elements(3), &[(Id(0), Id(2)), (Id(1), Id(2))]).unwrap();
    let ground = Creature::new(order, SymMap::from_iter([((Id(0), Id(1)), Id(2))]), []);
    let relation = pairs.iter().map(|&(a, b)| (Id(a), Id(b))).collect();
    StepContext::new(StepInput::new(ground, relation).unwrap(), spares).unwrap()
}

fn config(seed: u64, depth_budget: usize) -> BuildConfig {
    BuildConfig { seed, depth_budget, check_conditions: true }
}

#[test]
fn empty_relation_adds_only_e() {
    let ctx = antichain_ctx(2, &[], 4);
    let out = build_generic(&ctx, &ctx.core(), config(0, 3)).unwrap();
    assert!(out.is_complete());
    let mut expected = ctx.ground().carrier();
    expected.insert(ctx.alloc.e.id);
    assert_eq!(out.mg.carrier(), expected);
    assert!(audit_exactness(&out.mg, &ctx, &ctx.core()).is_exact());
}

#[test]
fn one_pair_builds_the_gadget_shape() {
    let ctx = antichain_ctx(2, &[(0, 1)], 256);
    let out = build_generic(&ctx, &ctx.core(), config(0, 3)).unwrap();
    assert!(out.is_complete(), "{:?}", out.unmet());
    let g = &ctx.alloc.gadgets[&(Id(0), Id(1))];
    let [a, b, c] = g.delta.map(|e| e.id);
    let gamma = g.gamma.id;
    let e = ctx.alloc.e.id;
    let order = out.mg.order();
    let below = |z: Id| -> BTreeSet<Id> { order.down_set(z).unwrap() };
    let ids = |v: &[Id]| v.iter().copied().collect::<BTreeSet<_>>();
    assert_eq!(below(a), ids(&[Id(0), g.a_set[0].id, g.a_set[1].id]));
    assert_eq!(below(b), ids(&[Id(1), g.b_set[0].id, g.b_set[1].id, g.b_set[2].id]));
    assert_eq!(below(c), ids(&[e, g.c_set.id]));
    assert!([a, b, c].iter().all(|&v| order.lt(v, gamma)));
    assert!(validate_creature(&out.mg).is_valid());

    let report = audit_exactness(&out.mg, &ctx, &ctx.core());
    assert_eq!(report.separation, Separation::Separated);
    assert!(report.is_exact(), "{:?}", report.discrepancies);
    assert_eq!(decode_relation(&out.mg, e), ctx.input.relation);
    assert_eq!(decode_relation(&with_order_f(&out.mg), e), ctx.input.relation);
}

#[test]
fn twins_split_the_a_pair() {
    let ctx = antichain_ctx(2, &[(0, 1)], 256);
    let out = build_generic(&ctx, &ctx.core(), config(0, 3)).unwrap();
    let g = &ctx.alloc.gadgets[&(Id(0), Id(1))];
    let (x, x2) = (g.a_set[0].id, g.a_set[1].id);
    let mubs = mub_oracle(&out.mg, x, x2);
    assert_eq!(mubs.len(), 3);
    assert!(mubs.contains(&g.delta[0].id));
    let twins: Vec<Id> = mubs.into_iter().filter(|&z| z != g.delta[0].id).collect();
    for &z in &twins {
        assert_eq!(out.mg.order().element(z).unwrap().tag, Tag::Witness(WitnessKind::Twin));
        assert!(out.mg.order().up_set(z).unwrap().is_empty());
        assert!(out.mg.h_contains(x, x2, z));
    }
    assert_eq!(out.mg.order().down_set(twins[0]).unwrap(), out.mg.order().down_set(twins[1]).unwrap());
}

#[test]
fn umub_agrees_with_oracle() {
    let ctx = antichain_ctx(3, &[(0, 1), (2, 0)], 256);
    let out = build_generic(&ctx, &ctx.core(), config(1, 3)).unwrap();
    let ids: Vec<Id> = out.mg.order().ids().collect();
    for (i, &x) in ids.iter().enumerate() {
        for &y in &ids[i + 1..] {
            let mubs = mub_oracle(&out.mg, x, y);
            let expected = if mubs.len() == 1 && !out.mg.order().comparable(x, y) { mubs.first().copied() } else { None };
            assert_eq!(out.mg.order().umub(x, y), expected);
        }
    }
}

#[test]
fn ground_f_value_is_placed_below_gamma() {
    let ctx = v_ctx(&[(0, 1)], 256);
    let out = build_generic(&ctx, &ctx.core(), config(0, 3)).unwrap();
    let gamma = ctx.alloc.gadgets[&(Id(0), Id(1))].gamma.id;
    assert!(out.mg.order().lt(Id(2), gamma));
    assert_eq!(mub_oracle(&out.mg, Id(0), Id(1)), BTreeSet::from([Id(2)]));
    assert!(out.requirements.iter().any(|r| r.kind == RequirementKind::ExtraUb(Id(0), Id(1), gamma) && r.status == Status::Met));
    assert!(audit_exactness(&out.mg, &ctx, &ctx.core()).is_exact());
}

#[test]
fn zero_depth_leaves_truncation() {
    let ctx = v_ctx(&[(0, 1)], 256);
    let out = build_generic(&ctx, &ctx.core(), config(0, 0)).unwrap();
    assert!(!out.is_complete());
    let report = audit_exactness(&out.mg, &ctx, &ctx.core());
    let d = report.discrepancies.iter().find(|d| d.pair == (Id(0), Id(1))).unwrap();
    assert_eq!(d.class, DiscrepancyClass::ChainTruncation);
    assert_eq!(report.count(DiscrepancyClass::Genuine), 0);
}

#[test]
fn seed_changes_only_witness_ids() {
    let ctx = antichain_ctx(3, &[(0, 1), (1, 2)], 256);
    let verdicts: Vec<_> = (0..4)
        .map(|seed| {
            let out = build_generic(&ctx, &ctx.core(), config(seed, 3)).unwrap();
            let report = audit_exactness(&out.mg, &ctx, &ctx.core());
            (report.is_exact(), report.pairs_checked, out.mg.len(), decode_relation(&out.mg, ctx.alloc.e.id))
        })
        .collect();
    assert!(verdicts.windows(2).all(|w| w[0] == w[1]));
    assert!(verdicts[0].0);
}

#[test]
fn condition_examples() {
    let ctx = antichain_ctx(2, &[(0, 1)], 8);
    let builder = Builder::new(&ctx, config(0, 3)).unwrap();
    assert!(is_condition(builder.condition(), &ctx).is_valid());
    assert_eq!(builder.condition().carrier(), BTreeSet::from([ctx.alloc.e.id]));

    let g = &ctx.alloc.gadgets[&(Id(0), Id(1))];
    let a = g.delta[0].id;
    let lonely = builder.placement().restrict(&BTreeSet::from([a])).unwrap();
    let report = is_condition(&lonely, &ctx);
    assert!(report.violations.iter().any(|v| matches!(v, ConditionViolation::OmegaNotClosed { element, .. } if *element == a)));

    // put the A-elements below an extra spare that sits below a
    let mut carrier = ctx.alloc.omega_of(a);
    carrier.insert(ctx.alloc.e.id);
    let full = builder.placement().restrict(&carrier).unwrap();
    let z = ctx.alloc.spares[0];
    let mut pairs: Vec<(Id, Id)> = full.order().lt_pairs();
    pairs.extend([(Id(0), z.id), (g.a_set[0].id, z.id), (z.id, a)]);
    let mut elements = full.order().elements().to_vec();
    elements.push(z);
    let bad = full.with_order(Poset::from_pairs(elements, &pairs).unwrap());
    let report = is_condition(&bad, &ctx);
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, ConditionViolation::Creature(v) if v.axiom == Axiom::FMinimality)));
}

#[test]
fn element_requirement_brings_omega() {
    let ctx = antichain_ctx(2, &[(0, 1)], 8);
    let mut builder = Builder::new(&ctx, config(0, 3)).unwrap();
    let a = ctx.alloc.gadgets[&(Id(0), Id(1))].delta[0].id;
    assert_eq!(builder.extend_to_meet(RequirementKind::Element(a)).unwrap(), Status::Met);
    let carrier = builder.condition().carrier();
    assert!(ctx.alloc.omega_of(a).is_subset(&carrier));
    assert!(is_condition(builder.condition(), &ctx).is_valid());
}

#[test]
fn schedule_examples() {
    let ctx = antichain_ctx(2, &[(0, 1)], 0);
    assert!(schedule_requirements(&ctx, &BTreeSet::new()).unwrap().is_empty());
    let schedule = schedule_requirements(&ctx, &ctx.core()).unwrap();
    let core = ctx.core();
    let elements = schedule.iter().filter(|r| matches!(r.kind, RequirementKind::Element(_))).count();
    assert_eq!(elements, core.len());
    let order = ctx.spec_order().unwrap();
    let core: Vec<Id> = core.into_iter().collect();
    let mut incomparable = 0;
    for (i, &x) in core.iter().enumerate() {
        for &y in &core[i + 1..] {
            if !order.comparable(x, y) && !ctx.fspec.contains(x, y) {
                incomparable += 1;
            }
        }
    }
    let witnesses = schedule.iter().filter(|r| matches!(r.kind, RequirementKind::PairWitness(..))).count();
    assert_eq!(witnesses, 2 * incomparable);
    let a = ctx.alloc.gadgets[&(Id(0), Id(1))].delta[0].id;
    assert!(!schedule.iter().any(|r| r.kind == RequirementKind::PairWitness(Id(0), a)));
}

#[test]
fn diagonal_pair_hits_the_finite_obstruction() {
    let ctx = antichain_ctx(1, &[(0, 0)], 128);
    let out = build_generic(&ctx, &ctx.core(), config(0, 3)).unwrap();
    let g = &ctx.alloc.gadgets[&(Id(0), Id(0))];
    let a = g.delta[0].id;
    let x = g.b_set[0].id;
    assert!(out.hazards.contains(&(a.min(x), a.max(x))));
    // every upper bound of a and x is above gamma
    assert_eq!(mub_oracle(&out.mg, a, x), BTreeSet::from([g.gamma.id]));
    let report = audit_exactness(&out.mg, &ctx, &ctx.core());
    assert_eq!(report.count(DiscrepancyClass::Genuine), 0);
    assert_eq!(report.count(DiscrepancyClass::FiniteObstruction), 5);
    assert_eq!(decode_relation(&out.mg, ctx.alloc.e.id), ctx.input.relation);
    assert_eq!(decode_relation(&with_order_f(&out.mg), ctx.alloc.e.id), ctx.input.relation);
}

/// Ground `0 < 1`, coding one pair of comparable points.
fn comparable_ctx(pair: (u32, u32)) -> StepContext {
    let order = Poset::from_pairs(ground_elements(2), &[(Id(0), Id(1))]).unwrap();
    let relation = [(Id(pair.0), Id(pair.1))].into();
    StepContext::new(StepInput::new(Creature::from_order(order), relation).unwrap(), 256).unwrap()
}

#[test]
fn comparable_pairs_hit_the_finite_obstruction() {
    // alpha < beta forces F(x, b) = gamma for x in A; beta < alpha forces F(a, y) for y in B
    for (pair, forced) in [((0, 1), 2), ((1, 0), 3)] {
        let ctx = comparable_ctx(pair);
        let out = build_generic(&ctx, &ctx.core(), config(0, 3)).unwrap();
        let report = audit_exactness(&out.mg, &ctx, &ctx.core());
        assert_eq!(report.count(DiscrepancyClass::Genuine), 0);
        assert_eq!(report.count(DiscrepancyClass::FiniteObstruction), forced, "{pair:?}");
        let g = &ctx.alloc.gadgets[&(Id(pair.0), Id(pair.1))];
        for d in &report.discrepancies {
            assert_eq!((d.expected, d.actual), (None, Some(g.gamma.id)));
        }
        assert_eq!(decode_relation(&out.mg, ctx.alloc.e.id), ctx.input.relation);
    }
}

#[test]
fn unordered_encoding_flags_every_f_pair() {
    let ctx = antichain_ctx(2, &[(0, 1)], 0);
    let spec = ctx.spec_creature().unwrap();
    let flat = spec.with_order(Poset::antichain(spec.order().elements().to_vec()).unwrap());
    let report = audit_exactness(&flat, &ctx, &ctx.core());
    let flagged: BTreeSet<(Id, Id)> = report.discrepancies.iter().map(|d| d.pair).collect();
    let f_pairs: BTreeSet<(Id, Id)> = ctx.fspec.iter().map(|(p, _)| p).collect();
    assert_eq!(flagged, f_pairs);
}

#[test]
fn spare_pool_runs_out() {
    let ctx = antichain_ctx(2, &[(0, 1)], 1);
    assert!(build_generic(&ctx, &ctx.core(), config(0, 3)).is_err());
}
