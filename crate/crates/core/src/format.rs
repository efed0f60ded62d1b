//! Canonical JSON documents for posets, creatures, symmetric maps and
//! step inputs.
//!
//! Posets are written as their Hasse edges; loading re-closes the order.
//! Elements are sorted by id, `F` and `H` rows by `(x, y)` with `x < y`,
//! so a loaded-then-saved document is byte-identical to a canonical one.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::creature::Creature;
use crate::error::{Error, Result};
use crate::order::{Element, Id, Poset, SymMap};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ElementDoc {
    pub id: u32,
    pub tag: String,
    pub step: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PosetDoc {
    pub elements: Vec<ElementDoc>,
    pub lt: Vec<[u32; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CreatureDoc {
    pub elements: Vec<ElementDoc>,
    pub lt: Vec<[u32; 2]>,
    #[serde(rename = "F", default)]
    pub f: Vec<[u32; 3]>,
    #[serde(rename = "H", default)]
    pub h: Vec<[u32; 3]>,
}

/// A symmetric map written like a creature's `F` block.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SymMapDoc {
    #[serde(rename = "F")]
    pub f: Vec<[u32; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StepInputDoc {
    pub ground: CreatureDoc,
    #[serde(rename = "R")]
    pub relation: Vec<[u32; 2]>,
}

fn element_docs(order: &Poset) -> Vec<ElementDoc> {
    let mut elements: Vec<ElementDoc> = order
        .elements()
        .iter()
        .map(|e| ElementDoc { id: e.id.0, tag: e.tag.to_string(), step: e.step })
        .collect();
    elements.sort_by_key(|e| e.id);
    elements
}

fn elements_from_docs(docs: &[ElementDoc]) -> Result<Vec<Element>> {
    docs.iter().map(|d| Ok(Element { id: Id(d.id), tag: d.tag.parse()?, step: d.step })).collect()
}

fn pairs_from(rows: &[[u32; 2]]) -> Vec<(Id, Id)> {
    rows.iter().map(|&[a, b]| (Id(a), Id(b))).collect()
}

pub fn symmap_rows(f: &SymMap) -> Vec<[u32; 3]> {
    f.iter().map(|((x, y), z)| [x.0, y.0, z.0]).collect()
}

pub fn symmap_from_rows(rows: &[[u32; 3]]) -> Result<SymMap> {
    let mut map = SymMap::new();
    for &[x, y, z] in rows {
        if let Some(old) = map.insert(Id(x), Id(y), Id(z)) {
            if old != Id(z) {
                return Err(Error::Invalid(format!("F assigns two values to ({x}, {y})")));
            }
        }
    }
    Ok(map)
}

impl PosetDoc {
    pub fn from_poset(order: &Poset) -> PosetDoc {
        PosetDoc {
            elements: element_docs(order),
            lt: order.hasse_edges().into_iter().map(|(a, b)| [a.0, b.0]).collect(),
        }
    }

    pub fn to_poset(&self) -> Result<Poset> {
        Poset::from_pairs(elements_from_docs(&self.elements)?, &pairs_from(&self.lt))
    }
}

impl CreatureDoc {
    pub fn from_creature(c: &Creature) -> CreatureDoc {
        CreatureDoc {
            elements: element_docs(c.order()),
            lt: c.order().hasse_edges().into_iter().map(|(a, b)| [a.0, b.0]).collect(),
            f: symmap_rows(c.f()),
            h: c.h().iter().map(|&(x, y, z)| [x.0, y.0, z.0]).collect(),
        }
    }

    pub fn to_creature(&self) -> Result<Creature> {
        let order = Poset::from_pairs(elements_from_docs(&self.elements)?, &pairs_from(&self.lt))?;
        let f = symmap_from_rows(&self.f)?;
        let h = self.h.iter().map(|&[x, y, z]| (Id(x), Id(y), Id(z)));
        Ok(Creature::new(order, f, h))
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn poset_to_json(order: &Poset) -> String {
    to_json(&PosetDoc::from_poset(order))
}

pub fn poset_from_json(text: &str) -> Result<Poset> {
    serde_json::from_str::<PosetDoc>(text)?.to_poset()
}

pub fn creature_to_json(c: &Creature) -> String {
    to_json(&CreatureDoc::from_creature(c))
}

pub fn creature_from_json(text: &str) -> Result<Creature> {
    serde_json::from_str::<CreatureDoc>(text)?.to_creature()
}

pub fn symmap_to_json(f: &SymMap) -> String {
    to_json(&SymMapDoc { f: symmap_rows(f) })
}

pub fn symmap_from_json(text: &str) -> Result<SymMap> {
    symmap_from_rows(&serde_json::from_str::<SymMapDoc>(text)?.f)
}

/// Parses a step input into its ground creature and relation.
pub fn step_input_from_json(text: &str) -> Result<(Creature, BTreeSet<(Id, Id)>)> {
    let doc: StepInputDoc = serde_json::from_str(text)?;
    Ok((doc.ground.to_creature()?, pairs_from(&doc.relation).into_iter().collect()))
}

pub fn step_input_to_json(ground: &Creature, relation: &BTreeSet<(Id, Id)>) -> String {
    to_json(&StepInputDoc {
        ground: CreatureDoc::from_creature(ground),
        relation: relation.iter().map(|&(a, b)| [a.0, b.0]).collect(),
    })
}
