use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Element identifier, unique within a carrier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Id(pub u32);

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Position of a gadget member inside the apparatus coding one pair.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GadgetRole {
    A,
    B,
    C,
    DeltaA,
    DeltaB,
    DeltaC,
    Gamma,
}

impl GadgetRole {
    pub const ALL: [GadgetRole; 7] = [
        GadgetRole::A,
        GadgetRole::B,
        GadgetRole::C,
        GadgetRole::DeltaA,
        GadgetRole::DeltaB,
        GadgetRole::DeltaC,
        GadgetRole::Gamma,
    ];

    fn as_str(self) -> &'static str {
        match self {
            GadgetRole::A => "A",
            GadgetRole::B => "B",
            GadgetRole::C => "C",
            GadgetRole::DeltaA => "delta_a",
            GadgetRole::DeltaB => "delta_b",
            GadgetRole::DeltaC => "delta_c",
            GadgetRole::Gamma => "gamma",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum WitnessKind {
    /// Maximal element realising an alternative minimal upper bound.
    Twin,
    /// Intermediate upper bound inserted while chasing an extra upper bound.
    Chain,
}

/// Provenance of an element.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Tag {
    Ground,
    EPoint,
    Gadget { role: GadgetRole, pair: (Id, Id) },
    Witness(WitnessKind),
    Spare,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Ground => f.write_str("ground"),
            Tag::EPoint => f.write_str("e_point"),
            Tag::Gadget { role, pair } => {
                write!(f, "gadget:{}:{}:{}", role.as_str(), pair.0, pair.1)
            }
            Tag::Witness(WitnessKind::Twin) => f.write_str("witness:twin"),
            Tag::Witness(WitnessKind::Chain) => f.write_str("witness:chain"),
            Tag::Spare => f.write_str("spare"),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("unknown element tag `{s}`"));
        match s {
            "ground" => return Ok(Tag::Ground),
            "e_point" => return Ok(Tag::EPoint),
            "witness:twin" => return Ok(Tag::Witness(WitnessKind::Twin)),
            "witness:chain" => return Ok(Tag::Witness(WitnessKind::Chain)),
            "spare" => return Ok(Tag::Spare),
            _ => {}
        }
        let mut parts = s.split(':');
        if parts.next() != Some("gadget") {
            return Err(bad());
        }
        let role_str = parts.next().ok_or_else(bad)?;
        let role = GadgetRole::ALL
            .into_iter()
            .find(|r| r.as_str() == role_str)
            .ok_or_else(bad)?;
        let mut id = || -> Result<Id, Error> {
            parts
                .next()
                .and_then(|p| p.parse::<u32>().ok())
                .map(Id)
                .ok_or_else(bad)
        };
        let pair = (id()?, id()?);
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(Tag::Gadget { role, pair })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Element {
    pub id: Id,
    pub tag: Tag,
    /// Construction stage that created the element.
    pub step: u32,
}

impl Element {
    pub fn new(id: u32, tag: Tag, step: u32) -> Self {
        Element { id: Id(id), tag, step }
    }

    pub fn ground(id: u32) -> Self {
        Element::new(id, Tag::Ground, 0)
    }
}
