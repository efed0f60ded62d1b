use std::collections::BTreeSet;
use std::time::Instant;

use creature_core::builder::{build_generic, with_order_f, BuildConfig};
use creature_core::coder::{decode_relation, StepContext, StepInput};
use creature_core::creature::Creature;
use creature_core::logic::{build_decoder_formula, extension, DEFAULT_BUDGET};
use creature_core::order::{ground_elements, Id, Poset};

fn antichain_ctx(n: u32, pairs: &[(u32, u32)]) -> StepContext {
    let ground = Creature::from_order(Poset::antichain(ground_elements(n)).unwrap());
    let relation = pairs.iter().map(|&(a, b)| (Id(a), Id(b))).collect();
    StepContext::new(StepInput::new(ground, relation).unwrap(), 256).unwrap()
}

fn check(n: u32, pairs: &[(u32, u32)]) {
    let ctx = antichain_ctx(n, pairs);
    let cfg = BuildConfig { seed: 7, depth_budget: 3, check_conditions: false };
    let out = build_generic(&ctx, &ctx.core(), cfg).unwrap();
    let e = ctx.alloc.e.id;
    let phi = build_decoder_formula(e);
    let start = Instant::now();
    let found = extension(&phi, out.mg.order(), &["alpha", "beta"], DEFAULT_BUDGET).unwrap();
    let elapsed = start.elapsed();
    let decoded: BTreeSet<Vec<Id>> =
        decode_relation(&with_order_f(&out.mg), e).into_iter().map(|(a, b)| vec![a, b]).collect();
    assert_eq!(found, decoded, "|MG| = {}", out.mg.order().len());
    eprintln!("|MG| = {}, decoder formula {:?}", out.mg.order().len(), elapsed);
}

#[test]
fn decoder_formula_matches_decoder_on_off_diagonal_pairs() {
    check(3, &[(0, 1), (2, 0)]);
}

#[test]
fn decoder_formula_matches_decoder_with_diagonal_pair() {
    check(2, &[(0, 0), (0, 1)]);
}

#[test]
fn decoder_formula_on_empty_relation() {
    check(2, &[]);
}
