use std::collections::{BTreeMap, BTreeSet};

use super::Id;

/// A symmetric partial map from unordered pairs of elements to elements.
///
/// Keys are stored with the smaller id first, so `get(x, y) == get(y, x)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymMap {
    entries: BTreeMap<(Id, Id), Id>,
}

pub(crate) fn unordered(x: Id, y: Id) -> (Id, Id) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

impl SymMap {
    pub fn new() -> Self {
        SymMap::default()
    }

    pub fn get(&self, x: Id, y: Id) -> Option<Id> {
        self.entries.get(&unordered(x, y)).copied()
    }

    pub fn contains(&self, x: Id, y: Id) -> bool {
        self.entries.contains_key(&unordered(x, y))
    }

    /// Inserts `{x, y} -> z`, returning the previous value of the pair.
    pub fn insert(&mut self, x: Id, y: Id, z: Id) -> Option<Id> {
        self.entries.insert(unordered(x, y), z)
    }

    pub fn remove(&mut self, x: Id, y: Id) -> Option<Id> {
        self.entries.remove(&unordered(x, y))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in canonical order: `((x, y), z)` with `x <= y`.
    pub fn iter(&self) -> impl Iterator<Item = ((Id, Id), Id)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Entries whose arguments and value all lie in `carrier`.
    pub fn restrict(&self, carrier: &BTreeSet<Id>) -> SymMap {
        let entries = self
            .entries
            .iter()
            .filter(|(&(x, y), z)| carrier.contains(&x) && carrier.contains(&y) && carrier.contains(*z))
            .map(|(&k, &v)| (k, v))
            .collect();
        SymMap { entries }
    }

    /// Entries with both arguments in `carrier`, whatever the value.
    pub fn restrict_domain(&self, carrier: &BTreeSet<Id>) -> SymMap {
        let entries = self
            .entries
            .iter()
            .filter(|(&(x, y), _)| carrier.contains(&x) && carrier.contains(&y))
            .map(|(&k, &v)| (k, v))
            .collect();
        SymMap { entries }
    }

    /// Number of unordered pairs mapped to `z`.
    pub fn preimage_count(&self, z: Id) -> usize {
        self.entries.values().filter(|&&v| v == z).count()
    }

    pub fn values(&self) -> BTreeSet<Id> {
        self.entries.values().copied().collect()
    }
}

impl FromIterator<((Id, Id), Id)> for SymMap {
    fn from_iter<T: IntoIterator<Item = ((Id, Id), Id)>>(iter: T) -> Self {
        let mut map = SymMap::new();
        for ((x, y), z) in iter {
            map.insert(x, y, z);
        }
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_lookup() {
        let mut m = SymMap::new();
        m.insert(Id(5), Id(2), Id(9));
        assert_eq!(m.get(Id(2), Id(5)), Some(Id(9)));
        assert_eq!(m.get(Id(5), Id(2)), Some(Id(9)));
        assert_eq!(m.iter().next(), Some(((Id(2), Id(5)), Id(9))));
        assert_eq!(m.insert(Id(2), Id(5), Id(1)), Some(Id(9)));
        assert_eq!(m.len(), 1);
    }
}
