//! Finite strict partial orders and the order-theoretic primitives used by
//! the rest of the crate: closures, down-sets, minimal upper bounds, the
//! unique-minimal-upper-bound map, antichains and end extensions.

mod element;
mod poset;
mod symmap;

pub use element::{Element, GadgetRole, Id, Tag, WitnessKind};
pub use poset::{is_end_extension, transitive_closure, Poset, DEFAULT_CARRIER_LIMIT};
pub use symmap::SymMap;
pub(crate) use symmap::unordered;

/// Ground elements with ids `0..n`.
pub fn ground_elements(n: u32) -> Vec<Element> {
    (0..n).map(Element::ground).collect()
}

/// Builds a poset on ground elements `0..n` from `(a, b)` pairs meaning `a < b`.
pub fn poset_from(n: u32, pairs: &[(u32, u32)]) -> crate::Result<Poset> {
    let pairs: Vec<(Id, Id)> = pairs.iter().map(|&(a, b)| (Id(a), Id(b))).collect();
    Poset::from_pairs(ground_elements(n), &pairs)
}
