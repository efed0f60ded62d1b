//! Amalgamation of creatures: the plain union `oplus`, the amalgam `amal`
//! that additionally puts a marked point of one creature below a marked
//! point of the other, the three-clause description of the amalgamated
//! order, Delta-system extraction and the strong-chain-condition probe.

use std::collections::{BTreeMap, BTreeSet};

use crate::creature::{creature_leq, is_separated_extension, Creature};
use crate::error::{Error, Result};
use crate::order::{Element, Id, Poset};

/// `{z in r : z < x}`; only the below-set matters for equal types.
pub fn type_over(c: &Creature, x: Id, r: &BTreeSet<Id>) -> Result<BTreeSet<Id>> {
    if !c.contains(x) {
        return Err(Error::UnknownElement(x));
    }
    if let Some(&z) = r.iter().find(|z| !c.contains(**z)) {
        return Err(Error::UnknownElement(z));
    }
    Ok(r.iter().copied().filter(|&z| c.order().lt(z, x)).collect())
}

/// Common carrier of `p` and `q`, after checking that elements, orders and
/// `F` agree on it.
pub fn common_part(p: &Creature, q: &Creature) -> Result<BTreeSet<Id>> {
    let common: BTreeSet<Id> = p.carrier().intersection(&q.carrier()).copied().collect();
    for &a in &common {
        if p.order().element(a) != q.order().element(a) {
            return Err(Error::Disagreement(vec![a]));
        }
    }
    for &a in &common {
        for &b in &common {
            if p.order().lt(a, b) != q.order().lt(a, b) {
                return Err(Error::Disagreement(vec![a, b]));
            }
            if a < b && p.f().get(a, b) != q.f().get(a, b) {
                return Err(Error::Disagreement(vec![a, b]));
            }
        }
    }
    Ok(common)
}

fn union_elements(p: &Creature, q: &Creature) -> Vec<Element> {
    let mut elements = p.order().elements().to_vec();
    elements.extend(q.order().elements().iter().filter(|e| !p.contains(e.id)).copied());
    elements
}

fn union_with_pairs(p: &Creature, q: &Creature, extra: Option<(Id, Id)>) -> Result<Creature> {
    let mut pairs = p.order().lt_pairs();
    pairs.extend(q.order().lt_pairs());
    pairs.extend(extra);
    let order = Poset::from_pairs(union_elements(p, q), &pairs)?;
    let mut f = p.f().clone();
    for ((a, b), z) in q.f().iter() {
        f.insert(a, b, z);
    }
    let h = p.h().iter().chain(q.h().iter()).copied();
    Ok(Creature::new(order, f, h))
}

/// Union of two creatures that agree on their common part; the order is
/// the transitive closure of the union.
pub fn oplus(p: &Creature, q: &Creature) -> Result<Creature> {
    common_part(p, q)?;
    union_with_pairs(p, q, None)
}

/// Checked hypotheses of an amalgamation `amal(p, x, q, y)`.
#[derive(Clone, Debug)]
pub struct AmalgamationInput<'a> {
    pub p: &'a Creature,
    pub x: Id,
    pub q: &'a Creature,
    pub y: Id,
    /// The common part `p ∩ q`.
    pub r: Creature,
}

impl<'a> AmalgamationInput<'a> {
    pub fn new(p: &'a Creature, x: Id, q: &'a Creature, y: Id) -> Result<Self> {
        let fail = |msg: &str| Err(Error::PreconditionFailed(msg.to_string()));
        if !p.contains(x) {
            return fail("x is not in p");
        }
        if !q.contains(y) {
            return fail("y is not in q");
        }
        let common = common_part(p, q)?;
        let r = p.restrict(&common)?;
        if !creature_leq(&r, p) || !creature_leq(&r, q) {
            return fail("the common part is not a substructure of both sides");
        }
        for (side, c) in [("p", p), ("q", q)] {
            match is_separated_extension(&r, c) {
                Ok(Ok(())) => {}
                Ok(Err(v)) => {
                    return Err(Error::PreconditionFailed(format!(
                        "{side} is not separated over the common part (clause {})",
                        v.clause()
                    )))
                }
                Err(_) => {
                    return Err(Error::PreconditionFailed(format!(
                        "{side} is not an end extension of the common part"
                    )))
                }
            }
        }
        if x != y && (common.contains(&x) || common.contains(&y)) {
            return fail("marked points must lie outside the common part");
        }
        if type_over(p, x, &common)? != type_over(q, y, &common)? {
            return fail("x and y have different types over the common part");
        }
        Ok(AmalgamationInput { p, x, q, y, r })
    }

    fn degenerate(&self) -> bool {
        self.x == self.y
    }

    /// Third clause: `p ⊨ a ≤ x` and `q ⊨ y ≤ b`.
    fn through_marks(&self, a: Id, b: Id) -> bool {
        self.p.order().le(a, self.x) && self.q.order().le(self.y, b)
    }

    /// The relation described by the three clauses, as strict pairs.
    pub fn star_order(&self) -> BTreeSet<(Id, Id)> {
        let ids: Vec<Id> = union_elements(self.p, self.q).iter().map(|e| e.id).collect();
        let mut out = BTreeSet::new();
        for &a in &ids {
            for &b in &ids {
                if a != b
                    && (self.p.order().lt(a, b)
                        || self.q.order().lt(a, b)
                        || self.through_marks(a, b))
                {
                    out.insert((a, b));
                }
            }
        }
        out
    }

    pub fn amalgamate(&self) -> Result<Creature> {
        let extra = (!self.degenerate()).then_some((self.x, self.y));
        union_with_pairs(self.p, self.q, extra)
    }
}

/// The amalgam over the common part with `x` placed below `y`.
pub fn amal(p: &Creature, x: Id, q: &Creature, y: Id) -> Result<Creature> {
    AmalgamationInput::new(p, x, q, y)?.amalgamate()
}

/// The order described by the three-clause rule (`a < b` in `p`, or in
/// `q`, or `a ≤ x` in `p` and `y ≤ b` in `q`).
pub fn star_order(p: &Creature, x: Id, q: &Creature, y: Id) -> Result<BTreeSet<(Id, Id)>> {
    Ok(AmalgamationInput::new(p, x, q, y)?.star_order())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    P,
    Q,
    Marks,
}

/// Occurrence counts of the nine `(first step, second step)` cases.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NineCaseReport {
    pub counts: BTreeMap<(Clause, Clause), usize>,
    pub triples: usize,
}

impl NineCaseReport {
    pub fn occurred(&self, first: Clause, second: Clause) -> bool {
        self.counts.get(&(first, second)).copied().unwrap_or(0) > 0
    }
}

fn case_name(first: Clause, second: Clause) -> String {
    format!("{first:?}->{second:?}")
}

/// Walks every composable `a <* b <* c` and checks the conclusion of each
/// transitivity case that applies.
pub fn check_nine_cases(p: &Creature, x: Id, q: &Creature, y: Id) -> Result<NineCaseReport> {
    AmalgamationInput::new(p, x, q, y)?.nine_cases()
}

impl AmalgamationInput<'_> {
    /// [`check_nine_cases`] on an already validated input.
    pub fn nine_cases(&self) -> Result<NineCaseReport> {
        nine_cases(self)
    }
}

fn nine_cases(input: &AmalgamationInput<'_>) -> Result<NineCaseReport> {
    let (p, q) = (input.p, input.q);
    let r = input.r.carrier();
    let star = input.star_order();
    let (po, qo) = (p.order(), q.order());
    let clauses = |a: Id, b: Id| -> Vec<Clause> {
        let mut out = Vec::new();
        if po.lt(a, b) {
            out.push(Clause::P);
        }
        if qo.lt(a, b) {
            out.push(Clause::Q);
        }
        if !input.degenerate() && input.through_marks(a, b) {
            out.push(Clause::Marks);
        }
        out
    };
    let mut succ: BTreeMap<Id, Vec<Id>> = BTreeMap::new();
    for &(a, b) in &star {
        succ.entry(a).or_default().push(b);
    }
    let mut report = NineCaseReport::default();
    for &(a, b) in &star {
        let Some(next) = succ.get(&b) else { continue };
        for &c in next {
            report.triples += 1;
            for first in clauses(a, b) {
                for second in clauses(b, c) {
                    let holds = match (first, second) {
                        (Clause::P, Clause::P) => po.lt(a, c),
                        (Clause::P, Clause::Q) => r.contains(&b) && qo.lt(a, b) && qo.lt(a, c),
                        (Clause::P, Clause::Marks) => input.through_marks(a, c),
                        (Clause::Q, Clause::P) => r.contains(&b) && po.lt(a, b) && po.lt(a, c),
                        (Clause::Q, Clause::Q) => qo.lt(a, c),
                        (Clause::Q, Clause::Marks) => {
                            r.contains(&b) && po.lt(a, b) && input.through_marks(a, c)
                        }
                        (Clause::Marks, Clause::Q) => input.through_marks(a, c),
                        (Clause::Marks, Clause::P) | (Clause::Marks, Clause::Marks) => false,
                    };
                    if !holds || !star.contains(&(a, c)) {
                        return Err(Error::TableViolation {
                            case: case_name(first, second),
                            witness: vec![a, b, c],
                        });
                    }
                    *report.counts.entry((first, second)).or_default() += 1;
                }
            }
        }
    }
    Ok(report)
}

/// For `{a, b}` inside `p` or inside `q`: the amalgam puts both below `c`
/// iff `p` does, or `q` does, or `a, b ≤ x` in `p` and `y ≤ c` in `q`.
/// Returns whether the equivalence holds for this triple.
pub fn key_fact_common_ub(
    p: &Creature,
    x: Id,
    q: &Creature,
    y: Id,
    a: Id,
    b: Id,
    c: Id,
) -> Result<bool> {
    if !((p.contains(a) && p.contains(b)) || (q.contains(a) && q.contains(b))) {
        return Err(Error::PreconditionFailed("a and b must lie in the same side".into()));
    }
    let input = AmalgamationInput::new(p, x, q, y)?;
    let amalgam = input.amalgamate()?;
    let lhs = amalgam.order().lt(a, c) && amalgam.order().lt(b, c);
    let (po, qo) = (p.order(), q.order());
    let rhs = (po.lt(a, c) && po.lt(b, c))
        || (qo.lt(a, c) && qo.lt(b, c))
        || (po.le(a, x) && po.le(b, x) && qo.le(y, c));
    Ok(lhs == rhs)
}

/// A subfamily whose members pairwise intersect in `heart`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaSystem {
    pub indices: BTreeSet<usize>,
    pub heart: BTreeSet<Id>,
    /// Whether the subfamily is maximum (exact search) or greedy.
    pub exact: bool,
}

/// Largest family size searched exactly.
pub const DELTA_EXACT_LIMIT: usize = 20;

fn max_clique(candidates: &[usize], compatible: &[u64], chosen: u64, best: &mut u64) {
    if chosen.count_ones() + candidates.len() as u32 <= best.count_ones() {
        return;
    }
    let Some((&first, rest)) = candidates.split_first() else {
        if chosen.count_ones() > best.count_ones()
            || (chosen.count_ones() == best.count_ones() && lexicographically_smaller(chosen, *best))
        {
            *best = chosen;
        }
        return;
    };
    let with: Vec<usize> = rest.iter().copied().filter(|&j| compatible[first] >> j & 1 == 1).collect();
    max_clique(&with, compatible, chosen | 1 << first, best);
    max_clique(rest, compatible, chosen, best);
}

fn lexicographically_smaller(a: u64, b: u64) -> bool {
    // smaller index set in sorted-list order
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

pub fn find_delta_system(family: &[BTreeSet<Id>], min_size: usize) -> Result<DeltaSystem> {
    let n = family.len();
    let exact = n <= DELTA_EXACT_LIMIT;
    if n == 0 {
        return if min_size == 0 {
            Ok(DeltaSystem { indices: BTreeSet::new(), heart: BTreeSet::new(), exact })
        } else {
            Err(Error::NotFound(min_size))
        };
    }
    let mut hearts: BTreeSet<BTreeSet<Id>> = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            hearts.insert(family[i].intersection(&family[j]).copied().collect());
        }
    }
    let mut best = DeltaSystem { indices: BTreeSet::from([0]), heart: family[0].clone(), exact };
    for heart in hearts {
        let members: Vec<usize> = (0..n).filter(|&i| heart.is_subset(&family[i])).collect();
        if members.len() < best.indices.len().max(2) {
            continue;
        }
        let petals: Vec<BTreeSet<Id>> =
            members.iter().map(|&i| family[i].difference(&heart).copied().collect()).collect();
        let chosen: BTreeSet<usize> = if exact {
            let mut compatible = vec![0u64; members.len()];
            for a in 0..members.len() {
                for b in 0..members.len() {
                    if a != b && petals[a].is_disjoint(&petals[b]) {
                        compatible[a] |= 1 << b;
                    }
                }
            }
            let order: Vec<usize> = (0..members.len()).collect();
            let mut mask = 0u64;
            max_clique(&order, &compatible, 0, &mut mask);
            (0..members.len()).filter(|&k| mask >> k & 1 == 1).map(|k| members[k]).collect()
        } else {
            let mut used: BTreeSet<Id> = BTreeSet::new();
            let mut chosen = BTreeSet::new();
            for (k, &i) in members.iter().enumerate() {
                if petals[k].is_disjoint(&used) {
                    used.extend(petals[k].iter().copied());
                    chosen.insert(i);
                }
            }
            chosen
        };
        if chosen.len() > best.indices.len() {
            best = DeltaSystem { indices: chosen, heart, exact };
        }
    }
    if best.indices.len() < min_size {
        return Err(Error::NotFound(min_size));
    }
    Ok(best)
}

/// Outcome of a strong-chain-condition probe.
#[derive(Clone, Debug)]
pub enum ProbeResult {
    /// First pair `alpha < beta` (lexicographic) whose amalgam sits inside the structure.
    Found { alpha: usize, beta: usize, amalgam: Creature },
    /// No pair qualifies; rejection reasons with counts.
    Exhausted { pairs_tried: usize, rejections: BTreeMap<String, usize> },
}

/// Restrictions of `m` to the given carriers, each with its marked point.
pub fn marked_substructures(m: &Creature, marked: &[(BTreeSet<Id>, Id)]) -> Result<Vec<(Creature, Id)>> {
    marked.iter().map(|(set, x)| Ok((m.restrict(set)?, *x))).collect()
}

/// Searches for `alpha < beta` such that the marked substructures can be
/// amalgamated over their intersection and the amalgam is a substructure
/// of `m`.
pub fn scc_probe(m: &Creature, family: &[(Creature, Id)]) -> ProbeResult {
    let mut rejections: BTreeMap<String, usize> = BTreeMap::new();
    let mut pairs_tried = 0;
    for alpha in 0..family.len() {
        for beta in (alpha + 1)..family.len() {
            pairs_tried += 1;
            let (xa, ma) = (&family[alpha].0, family[alpha].1);
            let (xb, mb) = (&family[beta].0, family[beta].1);
            let reason = if !creature_leq(xa, m) || !creature_leq(xb, m) {
                "not a substructure".to_string()
            } else {
                match amal(xa, ma, xb, mb) {
                    Ok(amalgam) if creature_leq(&amalgam, m) => {
                        return ProbeResult::Found { alpha, beta, amalgam }
                    }
                    Ok(_) => "amalgam not inside the structure".to_string(),
                    Err(Error::PreconditionFailed(msg)) => msg,
                    Err(e) => e.to_string(),
                }
            };
            *rejections.entry(reason).or_default() += 1;
        }
    }
    ProbeResult::Exhausted { pairs_tried, rejections }
}
