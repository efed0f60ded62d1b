//! Gadget allocation, the encoding of a relation on the ground into new
//! `F`-values, and the triangle-counting decoder.

use std::collections::{BTreeMap, BTreeSet};

use crate::creature::{find_triangles, is_separated_extension, validate_creature, Creature};
use crate::error::{Error, Result};
use crate::order::{Element, GadgetRole, Id, Poset, SymMap, Tag, DEFAULT_CARRIER_LIMIT};

/// One construction step: a ground creature and a relation on it.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInput {
    pub ground: Creature,
    pub relation: BTreeSet<(Id, Id)>,
}

impl StepInput {
    pub fn new(ground: Creature, relation: BTreeSet<(Id, Id)>) -> Result<StepInput> {
        if let Some(&(a, b)) = relation.iter().find(|(a, b)| !ground.contains(*a) || !ground.contains(*b)) {
            let missing = if ground.contains(a) { b } else { a };
            return Err(Error::UnknownElement(missing));
        }
        let report = validate_creature(&ground);
        if let Some(v) = report.violations.first() {
            return Err(Error::Invalid(format!("ground is not a creature: {:?} at {:?}", v.axiom, v.witness)));
        }
        Ok(StepInput { ground, relation })
    }
}

/// The fresh elements coding one pair `(alpha, beta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    pub pair: (Id, Id),
    pub a_set: [Element; 2],
    pub b_set: [Element; 3],
    pub c_set: Element,
    /// `[a, b, c]`.
    pub delta: [Element; 3],
    pub gamma: Element,
}

impl Gadget {
    /// The ten elements of the gadget.
    pub fn members(&self) -> Vec<Element> {
        let mut out = self.a_set.to_vec();
        out.extend(self.b_set);
        out.push(self.c_set);
        out.extend(self.delta);
        out.push(self.gamma);
        out
    }

    pub fn member_ids(&self) -> BTreeSet<Id> {
        self.members().iter().map(|e| e.id).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetAllocation {
    pub e: Element,
    pub gadgets: BTreeMap<(Id, Id), Gadget>,
    /// Reserved fresh ids; the builder turns them into witnesses.
    pub spares: Vec<Element>,
    /// `Omega(x)` for every gadget member.
    pub omega: BTreeMap<Id, BTreeSet<Id>>,
}

impl GadgetAllocation {
    /// `Omega(x)`; empty for `e`, spares and ground elements.
    pub fn omega_of(&self, x: Id) -> BTreeSet<Id> {
        self.omega.get(&x).cloned().unwrap_or_default()
    }

    /// `e` followed by all gadget members, in id order.
    pub fn new_elements(&self) -> Vec<Element> {
        let mut out = vec![self.e];
        out.extend(self.gadgets.values().flat_map(Gadget::members));
        out.sort_by_key(|el| el.id);
        out
    }

    /// Whether `id` was allocated here (as `e`, a gadget member or a spare).
    pub fn contains(&self, id: Id) -> bool {
        id == self.e.id
            || self.omega.contains_key(&id)
            || self.spares.binary_search_by_key(&id, |el| el.id).is_ok()
    }

    pub fn gadget_ids(&self) -> BTreeSet<Id> {
        self.gadgets.values().flat_map(|g| g.member_ids()).collect()
    }
}

/// Allocates `e`, ten gadget elements per pair (in sorted pair order) and
/// `spare_floor` spares, with ids following the largest ground id.
pub fn allocate_gadgets(input: &StepInput, spare_floor: usize) -> Result<GadgetAllocation> {
    let ground = input.ground.order();
    let total = ground.len() + 1 + 10 * input.relation.len();
    if total > DEFAULT_CARRIER_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "core would have {total} elements (limit {DEFAULT_CARRIER_LIMIT})"
        )));
    }
    let last = ground.ids().map(|id| u64::from(id.0)).max().unwrap_or(0) + (total + spare_floor) as u64;
    if last >= u64::from(u32::MAX) {
        return Err(Error::BudgetExceeded("element ids overflow".into()));
    }
    let mut next = ground.ids().map(|id| id.0 + 1).max().unwrap_or(0);
    let step = ground.elements().iter().map(|e| e.step + 1).max().unwrap_or(1);
    let mut fresh = |tag: Tag| {
        let el = Element::new(next, tag, step);
        next += 1;
        el
    };
    let e = fresh(Tag::EPoint);
    let mut gadgets = BTreeMap::new();
    let mut omega = BTreeMap::new();
    for &pair in &input.relation {
        let mut role = |role: GadgetRole| fresh(Tag::Gadget { role, pair });
        let gadget = Gadget {
            pair,
            a_set: [role(GadgetRole::A), role(GadgetRole::A)],
            b_set: [role(GadgetRole::B), role(GadgetRole::B), role(GadgetRole::B)],
            c_set: role(GadgetRole::C),
            delta: [role(GadgetRole::DeltaA), role(GadgetRole::DeltaB), role(GadgetRole::DeltaC)],
            gamma: role(GadgetRole::Gamma),
        };
        let mut closure = gadget.member_ids();
        closure.extend([pair.0, pair.1]);
        for id in gadget.member_ids() {
            omega.insert(id, closure.clone());
        }
        gadgets.insert(pair, gadget);
    }
    let spares = (0..spare_floor).map(|_| fresh(Tag::Spare)).collect();
    Ok(GadgetAllocation { e, gadgets, spares, omega })
}

/// The new `F`: ground `F`, plus for each coded pair `F(alpha, x) = a` on
/// `A`, `F(beta, x) = b` on `B`, `F(e, x) = c` on `C` and `gamma` on every
/// pair from `Delta`.
pub fn encode_relation(input: &StepInput, alloc: &GadgetAllocation) -> Result<SymMap> {
    let keys: BTreeSet<(Id, Id)> = alloc.gadgets.keys().copied().collect();
    if keys != input.relation {
        return Err(Error::AllocationMismatch("gadgets do not match the relation".into()));
    }
    let mut seen = input.ground.carrier();
    for el in alloc.new_elements().iter().chain(&alloc.spares) {
        if !seen.insert(el.id) {
            return Err(Error::AllocationMismatch(format!("id {} is used twice", el.id)));
        }
    }
    let mut f = input.ground.f().clone();
    let e = alloc.e.id;
    for (&(alpha, beta), g) in &alloc.gadgets {
        let [a, b, c] = g.delta.map(|el| el.id);
        for x in &g.a_set {
            f.insert(alpha, x.id, a);
        }
        for x in &g.b_set {
            f.insert(beta, x.id, b);
        }
        f.insert(e, g.c_set.id, c);
        f.insert(a, b, g.gamma.id);
        f.insert(a, c, g.gamma.id);
        f.insert(b, c, g.gamma.id);
    }
    Ok(f)
}

/// A step with its allocation and the encoded `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepContext {
    pub input: StepInput,
    pub alloc: GadgetAllocation,
    pub fspec: SymMap,
}

impl StepContext {
    pub fn new(input: StepInput, spare_floor: usize) -> Result<StepContext> {
        let alloc = allocate_gadgets(&input, spare_floor)?;
        let fspec = encode_relation(&input, &alloc)?;
        Ok(StepContext { input, alloc, fspec })
    }

    /// Enough spares for two witnesses on every pair of core elements.
    pub fn with_default_spares(input: StepInput) -> Result<StepContext> {
        let core = input.ground.len() + 1 + 10 * input.relation.len();
        StepContext::new(input, core * core.saturating_sub(1))
    }

    pub fn ground(&self) -> &Creature {
        &self.input.ground
    }

    /// Ground, `e` and gadget members: the part the exactness guarantees cover.
    pub fn core(&self) -> BTreeSet<Id> {
        let mut core = self.ground().carrier();
        core.insert(self.alloc.e.id);
        core.extend(self.alloc.gadget_ids());
        core
    }

    /// The ground order extended by putting both arguments of every new
    /// `F`-value below it, over ground, `e` and the gadgets.
    pub fn spec_order(&self) -> Result<Poset> {
        let ground = self.ground();
        let mut pairs = Vec::new();
        for ((u, v), w) in self.fspec.iter() {
            if !ground.f().contains(u, v) {
                pairs.push((u, w));
                pairs.push((v, w));
            }
        }
        let mut elements = ground.order().elements().to_vec();
        elements.extend(self.alloc.new_elements());
        let mut all = ground.order().lt_pairs();
        all.extend(pairs);
        Poset::from_pairs(elements, &all)
    }

    /// `spec_order` with the encoded `F` attached.
    pub fn spec_creature(&self) -> Result<Creature> {
        let order = self.spec_order()?;
        let carrier = order.id_set();
        Ok(Creature::new(order, self.fspec.restrict(&carrier), self.ground().h().iter().copied()))
    }
}

/// Pairs `(alpha, beta)` coded by triangles with a unique base point
/// anchored at `e`: counts 2 and 3 for `alpha != beta`, 5 for `alpha = beta`.
pub fn decode_relation(c: &Creature, e: Id) -> BTreeSet<(Id, Id)> {
    let mut out = BTreeSet::new();
    for t in find_triangles(c) {
        if t.unique_base().is_none() || !t.anchors.contains(&e) {
            continue;
        }
        let mut counts: BTreeMap<Id, usize> = BTreeMap::new();
        for ((u, v), w) in c.f().iter() {
            if t.contains(w) {
                *counts.entry(u).or_default() += 1;
                *counts.entry(v).or_default() += 1;
            }
        }
        for (&alpha, &n) in &counts {
            if n == 5 {
                out.insert((alpha, alpha));
            }
            if n == 2 {
                for (&beta, &m) in &counts {
                    if m == 3 && beta != alpha {
                        out.insert((alpha, beta));
                    }
                }
            }
        }
    }
    out
}

/// Whether decoding at `e` gives the same answer in both creatures;
/// requires a separated extension whose small part is closed under
/// `F`-preimages.
pub fn check_absoluteness(small: &Creature, big: &Creature, e: Id) -> Result<bool> {
    match is_separated_extension(small, big)? {
        Ok(()) => {}
        Err(v) => {
            return Err(Error::PreconditionFailed(format!(
                "not a separated extension (clause {})",
                v.clause()
            )))
        }
    }
    for ((u, v), w) in big.f().iter() {
        if small.contains(w) && !(small.contains(u) && small.contains(v)) {
            return Err(Error::PreconditionFailed(format!(
                "F({u}, {v}) = {w} has an argument outside the smaller creature"
            )));
        }
    }
    Ok(decode_relation(small, e) == decode_relation(big, e))
}
