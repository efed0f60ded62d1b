//! Seeded generators for posets, step inputs, amalgamation inputs and
//! monotone maps. All randomness flows from a [`SeedTree`].

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amalgam::{type_over, AmalgamationInput};
use crate::coder::StepInput;
use crate::creature::{validate_creature, Creature};
use crate::error::Result;
use crate::order::{ground_elements, Element, Id, Poset};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Deterministic splittable seed: children are derived from the parent
/// seed and a label or index, never from generator state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> SeedTree {
        SeedTree { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn child(&self, label: &str) -> SeedTree {
        SeedTree { seed: splitmix64(self.seed ^ fnv1a(label)) }
    }

    pub fn index(&self, i: u64) -> SeedTree {
        SeedTree { seed: splitmix64(self.seed ^ splitmix64(i)) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Random order on ground ids `0..n`: each pair of a random linear
/// extension is related with probability `density` before closure.
pub fn random_poset<R: Rng>(rng: &mut R, n: u32, density: f64) -> Poset {
    let mut perm: Vec<u32> = (0..n).collect();
    perm.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 0..n as usize {
        for j in i + 1..n as usize {
            if rng.gen_bool(density) {
                pairs.push((Id(perm[i]), Id(perm[j])));
            }
        }
    }
    Poset::from_pairs(ground_elements(n), &pairs).expect("pairs follow a linear order")
}

/// Random order on `0..n` whose strict down-sets are chains, so no two
/// incomparable elements have a common upper bound.
pub fn random_forest<R: Rng>(rng: &mut R, n: u32) -> Poset {
    let mut perm: Vec<u32> = (0..n).collect();
    perm.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 1..n as usize {
        if rng.gen_bool(0.6) {
            let parent = rng.gen_range(0..i);
            pairs.push((Id(perm[parent]), Id(perm[i])));
        }
    }
    Poset::from_pairs(ground_elements(n), &pairs).expect("parents come first")
}

/// Ground of 1 to `max_ground` elements (antichain or forest, empty `F`)
/// with up to `max_pairs` relation pairs; a pair is diagonal with
/// probability `diagonal`.
pub fn random_step_input<R: Rng>(rng: &mut R, max_ground: u32, max_pairs: usize, diagonal: f64) -> StepInput {
    let n = rng.gen_range(1..=max_ground);
    let order = if rng.gen_bool(0.5) {
        Poset::antichain(ground_elements(n)).expect("fresh ids")
    } else {
        random_forest(rng, n)
    };
    let k = rng.gen_range(0..=max_pairs);
    let mut relation = BTreeSet::new();
    for _ in 0..k {
        let a = rng.gen_range(0..n);
        let b = if rng.gen_bool(diagonal) { a } else { rng.gen_range(0..n) };
        relation.insert((Id(a), Id(b)));
    }
    StepInput::new(Creature::from_order(order), relation).expect("ground is valid")
}

/// `(p, x, q, y)` satisfying the amalgamation preconditions.
#[derive(Clone, Debug)]
pub struct AmalgamCase {
    pub p: Creature,
    pub x: Id,
    pub q: Creature,
    pub y: Id,
}

impl AmalgamCase {
    pub fn input(&self) -> Result<AmalgamationInput<'_>> {
        AmalgamationInput::new(&self.p, self.x, &self.q, self.y)
    }

    pub fn len(&self) -> usize {
        self.p.carrier().union(&self.q.carrier()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn down_closed_subsets(r: &Poset) -> Vec<BTreeSet<Id>> {
    let ids: Vec<Id> = r.ids().collect();
    (0u32..1 << ids.len())
        .map(|mask| ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect())
        .filter(|s: &BTreeSet<Id>| s.iter().all(|&x| r.down_set(x).unwrap().is_subset(s)))
        .collect()
}

/// Every end extension of `r` by the new ids, as distinct orders.
fn end_extensions(r: &Poset, new: &[u32]) -> Vec<Poset> {
    let downs = down_closed_subsets(r);
    let mut carrier = r.elements().to_vec();
    carrier.extend(new.iter().map(|&i| Element::ground(i)));
    let internal: Vec<Vec<(u32, u32)>> = match new {
        [_] => vec![vec![]],
        [a, b] => vec![vec![], vec![(*a, *b)], vec![(*b, *a)]],
        _ => unimplemented!("at most two new points"),
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut choice = vec![0usize; new.len()];
    loop {
        for inner in &internal {
            let mut pairs = r.lt_pairs();
            for (k, &nid) in new.iter().enumerate() {
                pairs.extend(downs[choice[k]].iter().map(|&u| (u, Id(nid))));
            }
            pairs.extend(inner.iter().map(|&(a, b)| (Id(a), Id(b))));
            let order = Poset::from_pairs(carrier.clone(), &pairs).expect("acyclic by construction");
            if seen.insert(order.lt_pairs()) {
                out.push(order);
            }
        }
        let Some(i) = choice.iter().position(|&c| c + 1 < downs.len()) else { break };
        choice[i] += 1;
        choice[..i].fill(0);
    }
    out
}

/// Every valid input with `F` and `H` empty, a common part from
/// `commons`, and one or two new points on each side.
pub fn exhaustive_amalgam_cases(commons: &[Poset], max_total: usize) -> Vec<AmalgamCase> {
    let mut out = Vec::new();
    for_each_amalgam_case(commons, max_total, |input| {
        out.push(AmalgamCase { p: input.p.clone(), x: input.x, q: input.q.clone(), y: input.y })
    });
    out
}

/// Streams the family of [`exhaustive_amalgam_cases`] as validated inputs
/// without collecting it.
pub fn for_each_amalgam_case(commons: &[Poset], max_total: usize, mut visit: impl FnMut(&AmalgamationInput<'_>)) {
    for r in commons {
        let k = r.len() as u32;
        for (np, nq) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            if r.len() + np + nq > max_total {
                continue;
            }
            let p_new: Vec<u32> = (k..k + np as u32).collect();
            let q_new: Vec<u32> = (k + np as u32..k + (np + nq) as u32).collect();
            let ps: Vec<Creature> = end_extensions(r, &p_new).into_iter().map(Creature::from_order).collect();
            let qs: Vec<Creature> = end_extensions(r, &q_new).into_iter().map(Creature::from_order).collect();
            for p in &ps {
                for q in &qs {
                    for &x in &p_new {
                        for &y in &q_new {
                            // cheap type test before the full precondition check
                            if r.ids().all(|z| p.order().lt(z, Id(x)) == q.order().lt(z, Id(y))) {
                                if let Ok(input) = AmalgamationInput::new(p, Id(x), q, Id(y)) {
                                    visit(&input);
                                }
                            }
                        }
                    }
                    if np == 1 && nq == 1 {
                        for x in r.ids() {
                            if let Ok(input) = AmalgamationInput::new(p, x, q, x) {
                                visit(&input);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Random side: `r` plus `new`, each new point above a random
/// down-closed part of `r`, with a few `F` values on pairs meeting the
/// new part. When `first_below` is given, the first new point sits
/// exactly above it and below nothing new.
fn random_side<R: Rng>(rng: &mut R, r: &Creature, new: &[u32], first_below: Option<&BTreeSet<Id>>) -> Creature {
    let old: Vec<Id> = r.order().ids().collect();
    let mut carrier = r.order().elements().to_vec();
    carrier.extend(new.iter().map(|&i| Element::ground(i)));
    let mut pairs = r.order().lt_pairs();
    for (k, &nid) in new.iter().enumerate() {
        match (k, first_below) {
            (0, Some(t)) => pairs.extend(t.iter().map(|&u| (u, Id(nid)))),
            _ => pairs.extend(old.iter().filter(|_| rng.gen_bool(0.3)).map(|&u| (u, Id(nid)))),
        }
        for &earlier in &new[..k] {
            if rng.gen_bool(0.35) {
                pairs.push((Id(earlier), Id(nid)));
            }
        }
    }
    let order = Poset::from_pairs(carrier, &pairs).expect("new points are added in order");
    let mut f = r.f().clone();
    let umubs = order.umub_map();
    let mut candidates: Vec<((Id, Id), Id)> = umubs
        .iter()
        .filter(|((a, b), _)| new.contains(&a.0) || new.contains(&b.0))
        .collect();
    candidates.shuffle(rng);
    for ((a, b), z) in candidates.into_iter().take(rng.gen_range(0..=2)) {
        f.insert(a, b, z);
    }
    Creature::new(order, f, r.h().iter().copied())
}

/// Random valid input with at most `max_total` elements, by rejection.
pub fn random_amalgam_case<R: Rng>(rng: &mut R, max_total: usize) -> AmalgamCase {
    loop {
        let k = rng.gen_range(0..=(max_total - 2).min(6)) as u32;
        let room = max_total - k as usize;
        let np = rng.gen_range(1..=(room - 1).min(4)) as u32;
        let nq = rng.gen_range(1..=(room - np as usize).min(4)) as u32;
        let r = Creature::from_order(random_poset(rng, k, 0.35));
        let p_new: Vec<u32> = (k..k + np).collect();
        let q_new: Vec<u32> = (k + np..k + np + nq).collect();
        let p = random_side(rng, &r, &p_new, None);
        let x = Id(*p_new.choose(rng).unwrap());
        let common = r.carrier();
        let ty = type_over(&p, x, &common).expect("x is in p");
        let q = random_side(rng, &r, &q_new, Some(&ty));
        let y = Id(q_new[0]);
        if !validate_creature(&p).is_valid() || !validate_creature(&q).is_valid() {
            continue;
        }
        if AmalgamationInput::new(&p, x, &q, y).is_ok() {
            return AmalgamCase { p, x, q, y };
        }
    }
}

fn canonical(n: usize, lt: &[(usize, usize)]) -> u64 {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    permute(&mut perm, 0, &mut |perm| {
        let code = lt.iter().fold(0u64, |acc, &(a, b)| acc | 1 << (perm[a] * n + perm[b]));
        best = best.min(code);
    });
    best
}

fn permute(v: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// One representative per isomorphism class of orders on `n <= 6`
/// points, on ground ids `0..n`.
pub fn posets_up_to_iso(n: usize) -> Vec<Poset> {
    assert!(n <= 6, "enumeration is factorial in n");
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..1 << slots.len() {
        let lt: Vec<(usize, usize)> =
            slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &s)| s).collect();
        let set: HashSet<(usize, usize)> = lt.iter().copied().collect();
        let transitive =
            lt.iter().all(|&(a, b)| lt.iter().filter(|&&(c, _)| c == b).all(|&(_, d)| set.contains(&(a, d))));
        if transitive && seen.insert(canonical(n, &lt)) {
            let pairs: Vec<(Id, Id)> = lt.iter().map(|&(a, b)| (Id(a as u32), Id(b as u32))).collect();
            out.push(Poset::from_pairs(ground_elements(n as u32), &pairs).expect("upper-triangular"));
        }
    }
    out
}

/// Random monotone self-map: starting from the identity, `moves` times
/// pick a point and a new value and keep the change when the map stays
/// monotone.
pub fn random_monotone_map<R: Rng>(rng: &mut R, p: &Poset, moves: usize) -> BTreeMap<Id, Id> {
    let ids: Vec<Id> = p.ids().collect();
    let mut g: BTreeMap<Id, Id> = ids.iter().map(|&x| (x, x)).collect();
    if ids.is_empty() {
        return g;
    }
    for _ in 0..moves {
        let x = *ids.choose(rng).unwrap();
        // bias towards values near x so that maps stay varied
        let v = if rng.gen_bool(0.5) {
            let near: Vec<Id> = p.up_set(g[&x]).unwrap().into_iter().chain(p.down_set(g[&x]).unwrap()).collect();
            near.choose(rng).copied().unwrap_or(x)
        } else {
            *ids.choose(rng).unwrap()
        };
        let ok = p.down_set(x).unwrap().iter().all(|y| p.le(g[y], v))
            && p.up_set(x).unwrap().iter().all(|y| p.le(v, g[y]));
        if ok {
            g.insert(x, v);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::check_monotone;

    #[test]
    fn seed_tree_is_stable() {
        let t = SeedTree::new(42);
        assert_eq!(t.child("a"), SeedTree::new(42).child("a"));
        assert_ne!(t.child("a"), t.child("b"));
        assert_ne!(t.index(0), t.index(1));
        let x: u64 = t.child("a").rng().gen();
        let y: u64 = t.child("a").rng().gen();
        assert_eq!(x, y);
    }

    #[test]
    fn iso_class_counts() {
        let counts: Vec<usize> = (0..=5).map(|n| posets_up_to_iso(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 16, 63]);
    }

    #[test]
    fn forests_have_no_common_upper_bounds() {
        let mut rng = SeedTree::new(1).rng();
        for _ in 0..50 {
            let p = random_forest(&mut rng, 8);
            for x in p.ids() {
                for y in p.ids() {
                    if !p.comparable(x, y) && x != y {
                        assert!(p.minimal_upper_bounds(x, y).unwrap().is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_maps_are_monotone() {
        let mut rng = SeedTree::new(2).rng();
        for _ in 0..30 {
            let p = random_poset(&mut rng, 7, 0.4);
            let g = random_monotone_map(&mut rng, &p, 40);
            check_monotone(&p, &g).unwrap();
        }
    }

    #[test]
    fn amalgam_cases_are_valid() {
        let commons: Vec<Poset> = (0..=2).flat_map(posets_up_to_iso).collect();
        let cases = exhaustive_amalgam_cases(&commons, 6);
        assert!(!cases.is_empty());
        assert!(cases.iter().all(|c| c.input().is_ok() && c.len() <= 6));
        let mut rng = SeedTree::new(3).rng();
        for _ in 0..20 {
            let c = random_amalgam_case(&mut rng, 14);
            assert!(c.len() <= 14);
            assert!(c.input().is_ok());
        }
    }
}
