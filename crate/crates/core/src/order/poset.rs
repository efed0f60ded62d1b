use std::collections::{BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;

use super::{Element, Id, SymMap};
use crate::error::{Error, Result};

/// Largest carrier accepted by the constructors unless a limit is given.
pub const DEFAULT_CARRIER_LIMIT: usize = 4096;

/// A finite strict partial order.
///
/// The relation is stored closed: `below[i]` holds every `j` with
/// `elements[j] < elements[i]`, and `above` is its transpose. Every
/// constructor either closes and re-checks the relation or builds it in a
/// way that is closed by construction (`end_extend`).
#[derive(Clone, Debug)]
pub struct Poset {
    elements: Vec<Element>,
    index: FxHashMap<Id, usize>,
    below: Vec<FixedBitSet>,
    above: Vec<FixedBitSet>,
}

fn build_index(elements: &[Element], limit: usize) -> Result<FxHashMap<Id, usize>> {
    if elements.len() > limit {
        return Err(Error::BudgetExceeded(format!(
            "carrier of {} elements exceeds limit {limit}",
            elements.len()
        )));
    }
    let mut index = FxHashMap::with_capacity_and_hasher(elements.len(), Default::default());
    for (i, e) in elements.iter().enumerate() {
        if index.insert(e.id, i).is_some() {
            return Err(Error::DuplicateElement(e.id));
        }
    }
    Ok(index)
}

fn transpose(rows: &[FixedBitSet]) -> Vec<FixedBitSet> {
    let n = rows.len();
    let mut out = vec![FixedBitSet::with_capacity(n); n];
    for (i, row) in rows.iter().enumerate() {
        for j in row.ones() {
            out[j].insert(i);
        }
    }
    out
}

/// Finds a cycle through `start` in the edge lists `succ`.
fn find_cycle(succ: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if v == start {
                let mut path = vec![u];
                let mut cur = u;
                while cur != start {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return path;
            }
            if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(v) {
                slot.insert(u);
                queue.push_back(v);
            }
        }
    }
    vec![start]
}

/// Smallest strict order on `carrier` containing `pairs`.
pub fn transitive_closure(carrier: Vec<Element>, pairs: &[(Id, Id)]) -> Result<Poset> {
    Poset::from_pairs(carrier, pairs)
}

impl Poset {
    pub fn empty() -> Poset {
        Poset { elements: Vec::new(), index: FxHashMap::default(), below: Vec::new(), above: Vec::new() }
    }

    pub fn antichain(carrier: Vec<Element>) -> Result<Poset> {
        Poset::from_pairs(carrier, &[])
    }

    pub fn from_pairs(carrier: Vec<Element>, pairs: &[(Id, Id)]) -> Result<Poset> {
        Poset::from_pairs_with_limit(carrier, pairs, DEFAULT_CARRIER_LIMIT)
    }

    pub fn from_pairs_with_limit(
        carrier: Vec<Element>,
        pairs: &[(Id, Id)],
        limit: usize,
    ) -> Result<Poset> {
        let index = build_index(&carrier, limit)?;
        let n = carrier.len();
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in pairs {
            let i = *index.get(&a).ok_or(Error::UnknownElement(a))?;
            let j = *index.get(&b).ok_or(Error::UnknownElement(b))?;
            below[j].insert(i);
            succ[i].push(j);
        }
        for k in 0..n {
            let row_k = below[k].clone();
            if row_k.is_clear() {
                continue;
            }
            for row in below.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| below[i].contains(i)) {
            let cycle = find_cycle(&succ, i).into_iter().map(|k| carrier[k].id).collect();
            return Err(Error::CycleDetected(cycle));
        }
        let above = transpose(&below);
        Ok(Poset { elements: carrier, index, below, above })
    }

    /// Adds `new` elements above the existing carrier.
    ///
    /// Every pair must end in a new element, so the existing carrier stays
    /// downward closed and its order is untouched.
    pub fn end_extend(&self, new: Vec<Element>, pairs: &[(Id, Id)]) -> Result<Poset> {
        let old_n = self.elements.len();
        let mut elements = self.elements.clone();
        elements.extend(new);
        let index = build_index(&elements, DEFAULT_CARRIER_LIMIT.max(elements.len()))?;
        let n = elements.len();
        let k = n - old_n;

        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut new_succ: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut indegree = vec![0usize; k];
        for &(a, b) in pairs {
            let i = *index.get(&a).ok_or(Error::UnknownElement(a))?;
            let j = *index.get(&b).ok_or(Error::UnknownElement(b))?;
            if j < old_n {
                return Err(Error::PreconditionFailed(format!(
                    "pair ({a}, {b}) places an element below an existing one"
                )));
            }
            preds[j - old_n].push(i);
            if i >= old_n {
                new_succ[i - old_n].push(j - old_n);
                indegree[j - old_n] += 1;
            }
        }
        let mut order = Vec::with_capacity(k);
        let mut queue: VecDeque<usize> = (0..k).filter(|&v| indegree[v] == 0).collect();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &new_succ[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if order.len() < k {
            let stuck = (0..k).find(|&v| indegree[v] > 0).unwrap_or(0);
            let cycle = find_cycle(&new_succ, stuck)
                .into_iter()
                .map(|v| elements[old_n + v].id)
                .collect();
            return Err(Error::CycleDetected(cycle));
        }

        let mut below: Vec<FixedBitSet> = self
            .below
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.grow(n);
                row
            })
            .collect();
        let mut above: Vec<FixedBitSet> = self
            .above
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.grow(n);
                row
            })
            .collect();
        below.resize(n, FixedBitSet::with_capacity(n));
        above.resize(n, FixedBitSet::with_capacity(n));
        for v in order {
            let target = old_n + v;
            let mut row = FixedBitSet::with_capacity(n);
            for &p in &preds[v] {
                row.insert(p);
                row.union_with(&below[p]);
            }
            for j in row.ones() {
                above[j].insert(target);
            }
            below[target] = row;
        }
        Ok(Poset { elements, index, below, above })
    }

    /// The suborder on `subset`.
    pub fn restrict(&self, subset: &BTreeSet<Id>) -> Result<Poset> {
        for id in subset {
            if !self.index.contains_key(id) {
                return Err(Error::UnknownElement(*id));
            }
        }
        let keep: Vec<usize> =
            (0..self.elements.len()).filter(|&i| subset.contains(&self.elements[i].id)).collect();
        let n = keep.len();
        let mut remap = vec![usize::MAX; self.elements.len()];
        for (new_i, &old_i) in keep.iter().enumerate() {
            remap[old_i] = new_i;
        }
        let elements: Vec<Element> = keep.iter().map(|&i| self.elements[i]).collect();
        let index = build_index(&elements, usize::MAX)?;
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for (new_i, &old_i) in keep.iter().enumerate() {
            for j in self.below[old_i].ones() {
                if remap[j] != usize::MAX {
                    below[new_i].insert(remap[j]);
                }
            }
        }
        let above = transpose(&below);
        Ok(Poset { elements, index, below, above })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements in insertion order.
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn ids(&self) -> impl Iterator<Item = Id> + '_ {
        self.elements.iter().map(|e| e.id)
    }

    pub fn id_set(&self) -> BTreeSet<Id> {
        self.ids().collect()
    }

    pub fn element(&self, id: Id) -> Option<&Element> {
        self.index.get(&id).map(|&i| &self.elements[i])
    }

    pub fn contains(&self, id: Id) -> bool {
        self.index.contains_key(&id)
    }

    pub(crate) fn idx(&self, id: Id) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownElement(id))
    }

    pub(crate) fn id_at(&self, i: usize) -> Id {
        self.elements[i].id
    }

    pub(crate) fn below_bits(&self, i: usize) -> &FixedBitSet {
        &self.below[i]
    }

    pub(crate) fn above_bits(&self, i: usize) -> &FixedBitSet {
        &self.above[i]
    }

    pub(crate) fn ids_of(&self, bits: &FixedBitSet) -> BTreeSet<Id> {
        bits.ones().map(|i| self.elements[i].id).collect()
    }

    /// Strict order test; false when either element is unknown.
    pub fn lt(&self, a: Id, b: Id) -> bool {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&i), Some(&j)) => self.below[j].contains(i),
            _ => false,
        }
    }

    /// Non-strict order: `lt` plus identity on the carrier.
    pub fn le(&self, a: Id, b: Id) -> bool {
        (a == b && self.contains(a)) || self.lt(a, b)
    }

    pub fn comparable(&self, a: Id, b: Id) -> bool {
        self.le(a, b) || self.le(b, a)
    }

    /// `{y : y < x}`.
    pub fn down_set(&self, x: Id) -> Result<BTreeSet<Id>> {
        let i = self.idx(x)?;
        Ok(self.ids_of(&self.below[i]))
    }

    /// `{y : x < y}`.
    pub fn up_set(&self, x: Id) -> Result<BTreeSet<Id>> {
        let i = self.idx(x)?;
        Ok(self.ids_of(&self.above[i]))
    }

    /// Minimal elements of `{z : x < z, y < z}`; empty for comparable pairs.
    pub fn minimal_upper_bounds(&self, x: Id, y: Id) -> Result<BTreeSet<Id>> {
        let i = self.idx(x)?;
        let j = self.idx(y)?;
        Ok(self.ids_of(&self.mub_bits(i, j)))
    }

    /// No `w < z` has `x <= w` and `y <= w`; false for unknown elements.
    pub fn no_smaller_upper_bound(&self, x: Id, y: Id, z: Id) -> bool {
        let (Ok(i), Ok(j), Ok(k)) = (self.idx(x), self.idx(y), self.idx(z)) else {
            return false;
        };
        let mut common = self.above_bits(i).clone();
        common.insert(i);
        let mut other = self.above[j].clone();
        other.insert(j);
        common.intersect_with(&other);
        common.is_disjoint(&self.below[k])
    }

    pub(crate) fn mub_bits(&self, i: usize, j: usize) -> FixedBitSet {
        let n = self.elements.len();
        if i == j || self.below[i].contains(j) || self.below[j].contains(i) {
            return FixedBitSet::with_capacity(n);
        }
        let mut common = self.above[i].clone();
        common.intersect_with(&self.above[j]);
        let mut out = FixedBitSet::with_capacity(n);
        for z in common.ones() {
            if self.below[z].is_disjoint(&common) {
                out.insert(z);
            }
        }
        out
    }

    /// The unique minimal upper bound of an incomparable pair, if any.
    pub fn umub(&self, x: Id, y: Id) -> Option<Id> {
        let i = self.index.get(&x).copied()?;
        let j = self.index.get(&y).copied()?;
        let bits = self.mub_bits(i, j);
        let mut ones = bits.ones();
        match (ones.next(), ones.next()) {
            (Some(z), None) => Some(self.elements[z].id),
            _ => None,
        }
    }

    /// The partial function sending incomparable pairs to their unique
    /// minimal upper bound.
    pub fn umub_map(&self) -> SymMap {
        let n = self.elements.len();
        let mut map = SymMap::new();
        let mut common = FixedBitSet::with_capacity(n);
        for i in 0..n {
            if self.above[i].is_clear() {
                continue;
            }
            for j in (i + 1)..n {
                if self.below[i].contains(j) || self.below[j].contains(i) {
                    continue;
                }
                common.clone_from(&self.above[i]);
                common.intersect_with(&self.above[j]);
                let mut found = None;
                let mut unique = true;
                for z in common.ones() {
                    if self.below[z].is_disjoint(&common) {
                        if found.is_some() {
                            unique = false;
                            break;
                        }
                        found = Some(z);
                    }
                }
                if let (Some(z), true) = (found, unique) {
                    map.insert(self.elements[i].id, self.elements[j].id, self.elements[z].id);
                }
            }
        }
        map
    }

    /// All pairs `(a, b)` with `a < b`, sorted.
    pub fn lt_pairs(&self) -> Vec<(Id, Id)> {
        let mut out = Vec::new();
        for (j, row) in self.below.iter().enumerate() {
            for i in row.ones() {
                out.push((self.elements[i].id, self.elements[j].id));
            }
        }
        out.sort();
        out
    }

    /// Covering pairs (transitive reduction), sorted.
    pub fn hasse_edges(&self) -> Vec<(Id, Id)> {
        let n = self.elements.len();
        let mut out = Vec::new();
        for j in 0..n {
            let mut covers = self.below[j].clone();
            for c in self.below[j].ones() {
                covers.difference_with(&self.below[c]);
            }
            for i in covers.ones() {
                out.push((self.elements[i].id, self.elements[j].id));
            }
        }
        out.sort();
        out
    }

    /// A maximum antichain, via a maximum matching in the comparability
    /// bipartite graph and the König cover.
    pub fn max_antichain(&self) -> Result<Vec<Id>> {
        let n = self.elements.len();
        if n > DEFAULT_CARRIER_LIMIT {
            return Err(Error::BudgetExceeded(format!("antichain search over {n} elements")));
        }
        let mut match_right: Vec<Option<usize>> = vec![None; n];
        let mut match_left: Vec<Option<usize>> = vec![None; n];
        for u in 0..n {
            let mut seen = FixedBitSet::with_capacity(n);
            self.augment(u, &mut seen, &mut match_left, &mut match_right);
        }
        // Alternating reachability from unmatched left vertices.
        let mut reach_left = FixedBitSet::with_capacity(n);
        let mut reach_right = FixedBitSet::with_capacity(n);
        let mut stack: Vec<usize> = (0..n).filter(|&u| match_left[u].is_none()).collect();
        for &u in &stack {
            reach_left.insert(u);
        }
        while let Some(u) = stack.pop() {
            for v in self.above[u].ones() {
                if match_left[u] == Some(v) || reach_right.contains(v) {
                    continue;
                }
                reach_right.insert(v);
                if let Some(w) = match_right[v] {
                    if !reach_left.contains(w) {
                        reach_left.insert(w);
                        stack.push(w);
                    }
                }
            }
        }
        let mut out: Vec<Id> = (0..n)
            .filter(|&i| reach_left.contains(i) && !reach_right.contains(i))
            .map(|i| self.elements[i].id)
            .collect();
        out.sort();
        Ok(out)
    }

    fn augment(
        &self,
        u: usize,
        seen: &mut FixedBitSet,
        match_left: &mut [Option<usize>],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for v in self.above[u].ones() {
            if seen.contains(v) {
                continue;
            }
            seen.insert(v);
            let free = match match_right[v] {
                None => true,
                Some(w) => self.augment(w, seen, match_left, match_right),
            };
            if free {
                match_right[v] = Some(u);
                match_left[u] = Some(v);
                return true;
            }
        }
        false
    }

    pub fn max_antichain_size(&self) -> Result<usize> {
        Ok(self.max_antichain()?.len())
    }
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        if self.elements.len() != other.elements.len() {
            return false;
        }
        let mut remap = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            match other.index.get(&e.id) {
                Some(&j) if other.elements[j] == *e => remap.push(j),
                _ => return false,
            }
        }
        let count = |rows: &[FixedBitSet]| rows.iter().map(|r| r.count_ones(..)).sum::<usize>();
        if count(&self.below) != count(&other.below) {
            return false;
        }
        self.below
            .iter()
            .enumerate()
            .all(|(j, row)| row.ones().all(|i| other.below[remap[j]].contains(remap[i])))
    }
}

impl Eq for Poset {}

/// Whether `small` is a downward closed suborder of `big`.
pub fn is_end_extension(small: &Poset, big: &Poset) -> Result<bool> {
    for e in small.elements() {
        if !big.contains(e.id) {
            return Err(Error::NotASubstructure(e.id, e.id));
        }
    }
    for a in small.ids() {
        for b in small.ids() {
            if small.lt(a, b) != big.lt(a, b) {
                return Err(Error::NotASubstructure(a, b));
            }
        }
    }
    for y in small.ids() {
        let j = big.idx(y)?;
        if big.below_bits(j).ones().any(|i| !small.contains(big.id_at(i))) {
            return Ok(false);
        }
    }
    Ok(true)
}
