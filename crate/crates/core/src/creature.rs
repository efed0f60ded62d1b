//! Creatures `(M, <, F, H)`: a finite order with a partial symmetric
//! function `F` picking minimal upper bounds of incomparable pairs and a
//! ternary relation `H` of alternative minimal upper bounds.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::order::{is_end_extension, unordered, Element, Id, Poset, SymMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Creature {
    order: Poset,
    f: SymMap,
    // (x, y, z) with x <= y; H(x, y) = H(y, x) by construction.
    h: BTreeSet<(Id, Id, Id)>,
}

impl Creature {
    pub fn new(order: Poset, f: SymMap, h: impl IntoIterator<Item = (Id, Id, Id)>) -> Creature {
        let h = h
            .into_iter()
            .map(|(x, y, z)| {
                let (a, b) = unordered(x, y);
                (a, b, z)
            })
            .collect();
        Creature { order, f, h }
    }

    /// A creature with empty `F` and `H`.
    pub fn from_order(order: Poset) -> Creature {
        Creature { order, f: SymMap::new(), h: BTreeSet::new() }
    }

    pub fn empty() -> Creature {
        Creature::from_order(Poset::empty())
    }

    pub fn order(&self) -> &Poset {
        &self.order
    }

    pub fn f(&self) -> &SymMap {
        &self.f
    }

    /// `H` triples in canonical form `(x, y, z)` with `x <= y`.
    pub fn h(&self) -> &BTreeSet<(Id, Id, Id)> {
        &self.h
    }

    pub fn h_contains(&self, x: Id, y: Id, z: Id) -> bool {
        let (a, b) = unordered(x, y);
        self.h.contains(&(a, b, z))
    }

    /// `H(x, y) = {z : H(x, y, z)}`.
    pub fn h_of(&self, x: Id, y: Id) -> BTreeSet<Id> {
        let (a, b) = unordered(x, y);
        self.h.range((a, b, Id(0))..=(a, b, Id(u32::MAX))).map(|t| t.2).collect()
    }

    pub fn carrier(&self) -> BTreeSet<Id> {
        self.order.id_set()
    }

    pub fn contains(&self, id: Id) -> bool {
        self.order.contains(id)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn with_f(&self, f: SymMap) -> Creature {
        Creature { order: self.order.clone(), f, h: self.h.clone() }
    }

    pub fn with_order(&self, order: Poset) -> Creature {
        Creature { order, f: self.f.clone(), h: self.h.clone() }
    }

    /// Restriction to `subset`: the suborder, `F` entries whose arguments
    /// and value lie in `subset`, and `H` triples inside `subset`.
    pub fn restrict(&self, subset: &BTreeSet<Id>) -> Result<Creature> {
        let order = self.order.restrict(subset)?;
        let f = self.f.restrict(subset);
        let h = self
            .h
            .iter()
            .filter(|(x, y, z)| subset.contains(x) && subset.contains(y) && subset.contains(z))
            .copied()
            .collect();
        Ok(Creature { order, f, h })
    }

    /// Adds new elements above the current carrier together with their
    /// `F` and `H` additions.
    pub fn end_extend(
        &self,
        new: Vec<Element>,
        pairs: &[(Id, Id)],
        f_add: impl IntoIterator<Item = ((Id, Id), Id)>,
        h_add: impl IntoIterator<Item = (Id, Id, Id)>,
    ) -> Result<Creature> {
        let order = self.order.end_extend(new, pairs)?;
        let mut f = self.f.clone();
        for ((x, y), z) in f_add {
            f.insert(x, y, z);
        }
        let mut h = self.h.clone();
        for (x, y, z) in h_add {
            let (a, b) = unordered(x, y);
            h.insert((a, b, z));
        }
        Ok(Creature { order, f, h })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    FOutsideCarrier,
    FIncomparability,
    FUpperBound,
    FMinimality,
    LocalFiniteness,
    HOutsideCarrier,
    HIncomparability,
    HUpperBound,
    HMinimality,
    HMeetsDomF,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<Id>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Number of finite F-closed sets computed for local finiteness.
    pub closures_checked: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

/// `z` is an upper bound of `x, y` and no `z' < z` has `x <= z'` and `y <= z'`.
fn minimal_upper_bound_violation(order: &Poset, x: Id, y: Id, z: Id) -> (bool, bool) {
    let upper = order.lt(x, z) && order.lt(y, z);
    (upper, order.no_smaller_upper_bound(x, y, z))
}

/// Smallest superset of `seed` closed under `F` (within the carrier).
fn f_closure(c: &Creature, seed: &BTreeSet<Id>) -> Option<BTreeSet<Id>> {
    let mut set = seed.clone();
    loop {
        let mut added = Vec::new();
        for ((x, y), z) in c.f.iter() {
            if set.contains(&x) && set.contains(&y) && !set.contains(&z) {
                added.push(z);
            }
        }
        if added.is_empty() {
            return Some(set);
        }
        for z in added {
            if !c.contains(z) {
                return None;
            }
            set.insert(z);
        }
    }
}

/// Checks every creature axiom and lists the violations with witnesses.
pub fn validate_creature(c: &Creature) -> ValidationReport {
    let order = &c.order;
    let mut report = ValidationReport::default();
    let mut push = |axiom, witness: Vec<Id>| report.violations.push(Violation { axiom, witness });

    for ((x, y), z) in c.f.iter() {
        let w = vec![x, y, z];
        if !(order.contains(x) && order.contains(y) && order.contains(z)) {
            push(Axiom::FOutsideCarrier, w);
            continue;
        }
        if order.comparable(x, y) {
            push(Axiom::FIncomparability, w.clone());
        }
        let (upper, minimal) = minimal_upper_bound_violation(order, x, y, z);
        if !upper {
            push(Axiom::FUpperBound, w.clone());
        }
        if !minimal {
            push(Axiom::FMinimality, w);
        }
    }

    for &(x, y, z) in &c.h {
        let w = vec![x, y, z];
        if !(order.contains(x) && order.contains(y) && order.contains(z)) {
            push(Axiom::HOutsideCarrier, w);
            continue;
        }
        if order.comparable(x, y) {
            push(Axiom::HIncomparability, w.clone());
        }
        let (upper, minimal) = minimal_upper_bound_violation(order, x, y, z);
        if !upper {
            push(Axiom::HUpperBound, w.clone());
        }
        if !minimal {
            push(Axiom::HMinimality, w.clone());
        }
        if c.f.contains(x, y) {
            push(Axiom::HMeetsDomF, w);
        }
    }

    // Local finiteness: every singleton and every F-argument pair has a
    // finite F-closed superset inside the carrier.
    let mut closures = 0;
    let seeds = order
        .ids()
        .map(|x| BTreeSet::from([x]))
        .chain(c.f.iter().map(|((x, y), _)| BTreeSet::from([x, y])));
    for seed in seeds {
        closures += 1;
        if f_closure(c, &seed).is_none() {
            push(Axiom::LocalFiniteness, seed.into_iter().collect());
        }
    }
    report.closures_checked = closures;
    report
}

/// `c1 <= c2`: `c1` is the restriction of `c2` to its carrier.
pub fn creature_leq(c1: &Creature, c2: &Creature) -> bool {
    let m1 = c1.carrier();
    for e in c1.order.elements() {
        if c2.order.element(e.id) != Some(e) {
            return false;
        }
    }
    for &a in &m1 {
        for &b in &m1 {
            if c1.order.lt(a, b) != c2.order.lt(a, b) {
                return false;
            }
        }
    }
    if c2.f.restrict_domain(&m1) != c1.f {
        return false;
    }
    let h2: BTreeSet<_> = c2
        .h
        .iter()
        .filter(|(x, y, z)| m1.contains(x) && m1.contains(y) && m1.contains(z))
        .copied()
        .collect();
    h2 == c1.h
}

/// A 3-set all of whose pairs are in `dom(F)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triangle {
    /// Sorted.
    pub vertices: [Id; 3],
    /// Vertices that are the `F`-value of exactly one unordered pair.
    pub base_points: BTreeSet<Id>,
    /// Elements `b` with `F(b, c)` a base point for some `c`.
    pub anchors: BTreeSet<Id>,
}

impl Triangle {
    pub fn contains(&self, id: Id) -> bool {
        self.vertices.contains(&id)
    }

    pub fn vertex_set(&self) -> BTreeSet<Id> {
        self.vertices.iter().copied().collect()
    }

    pub fn unique_base(&self) -> Option<Id> {
        if self.base_points.len() == 1 {
            self.base_points.first().copied()
        } else {
            None
        }
    }
}

fn preimages(f: &SymMap) -> HashMap<Id, Vec<(Id, Id)>> {
    let mut pre: HashMap<Id, Vec<(Id, Id)>> = HashMap::new();
    for (pair, z) in f.iter() {
        pre.entry(z).or_default().push(pair);
    }
    pre
}

/// All triangles of `F`, with base points and anchors.
pub fn find_triangles(c: &Creature) -> Vec<Triangle> {
    let mut adj: BTreeMap<Id, BTreeSet<Id>> = BTreeMap::new();
    for ((x, y), _) in c.f.iter() {
        if x != y {
            adj.entry(x).or_default().insert(y);
            adj.entry(y).or_default().insert(x);
        }
    }
    let pre = preimages(&c.f);
    let mut out = Vec::new();
    for (&x, nx) in &adj {
        for &y in nx.range((std::ops::Bound::Excluded(x), std::ops::Bound::Unbounded)) {
            let ny = &adj[&y];
            for &z in nx.range((std::ops::Bound::Excluded(y), std::ops::Bound::Unbounded)) {
                if !ny.contains(&z) {
                    continue;
                }
                let vertices = [x, y, z];
                let base_points: BTreeSet<Id> = vertices
                    .iter()
                    .copied()
                    .filter(|v| pre.get(v).map_or(0, Vec::len) == 1)
                    .collect();
                let anchors = base_points
                    .iter()
                    .flat_map(|b| pre[b].iter().flat_map(|&(u, v)| [u, v]))
                    .collect();
                out.push(Triangle { vertices, base_points, anchors });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeparationViolation {
    /// A triangle meets both the old carrier and the new part.
    Straddles(Triangle),
    /// A new triangle is anchored at an old point.
    AnchoredInside { triangle: Triangle, anchor: Id },
    /// A new `H`-witness for a pair of old points.
    NewHWitness(Id, Id, Id),
}

impl SeparationViolation {
    /// Clause number of the separation definition that fails.
    pub fn clause(&self) -> u8 {
        match self {
            SeparationViolation::Straddles(_) => 1,
            SeparationViolation::AnchoredInside { .. } => 2,
            SeparationViolation::NewHWitness(..) => 3,
        }
    }
}

/// Whether `c2` is a separated extension of `c1`; on failure returns the
/// first violation found. Requires `c1 <= c2` with `c1` downward closed.
pub fn is_separated_extension(
    c1: &Creature,
    c2: &Creature,
) -> Result<Result<(), SeparationViolation>> {
    if !creature_leq(c1, c2) {
        return Err(Error::PreconditionFailed("first creature is not a restriction of the second".into()));
    }
    if !is_end_extension(&c1.order, &c2.order)? {
        return Err(Error::PreconditionFailed("extension is not an end extension".into()));
    }
    Ok(separation_check(c1, c2))
}

pub(crate) fn separation_check(c1: &Creature, c2: &Creature) -> Result<(), SeparationViolation> {
    let m1 = c1.carrier();
    for t in find_triangles(c2) {
        let inside = t.vertices.iter().filter(|v| m1.contains(v)).count();
        if inside != 0 && inside != 3 {
            return Err(SeparationViolation::Straddles(t));
        }
        if inside == 0 {
            if let Some(&anchor) = t.anchors.iter().find(|a| m1.contains(a)) {
                return Err(SeparationViolation::AnchoredInside { triangle: t, anchor });
            }
        }
    }
    for &(x, y, z) in &c2.h {
        if m1.contains(&x) && m1.contains(&y) && !m1.contains(&z) {
            return Err(SeparationViolation::NewHWitness(x, y, z));
        }
    }
    Ok(())
}
