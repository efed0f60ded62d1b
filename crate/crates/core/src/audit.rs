//! Finite reports for the four smallness conditions on a poset, against
//! a threshold that stands in for "small".

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::{check_monotone, define_finite_relation, extension, monotone_data, synthesize_monotone_definition};
use crate::order::{Id, Poset};

/// Largest carrier for which every self-map is enumerated.
pub const EXHAUSTIVE_MAP_LIMIT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AuditConfig {
    /// Sizes strictly below this are small.
    pub small_threshold: usize,
    /// Partial assignments allowed per formula check.
    pub budget: usize,
}

impl AuditConfig {
    pub fn new(small_threshold: usize) -> AuditConfig {
        AuditConfig { small_threshold, budget: crate::logic::DEFAULT_BUDGET }
    }

    fn check(&self, p: &Poset) -> Result<()> {
        if self.small_threshold > p.len() {
            return Err(Error::Invalid(format!(
                "threshold {} exceeds carrier size {}",
                self.small_threshold,
                p.len()
            )));
        }
        Ok(())
    }

    fn small(&self, n: usize) -> bool {
        n < self.small_threshold
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct C1Report {
    pub antichain: Vec<Id>,
    pub pass: bool,
}

/// Every antichain is small: the witness is a maximum antichain.
pub fn audit_c1(p: &Poset, cfg: &AuditConfig) -> Result<C1Report> {
    cfg.check(p)?;
    let antichain = p.max_antichain()?;
    Ok(C1Report { pass: cfg.small(antichain.len()), antichain })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct C2Report {
    /// `{g(a) : g(a) != a}`, the least `A` with `g(a)` in `A` or equal to `a`.
    pub moved: BTreeSet<Id>,
    pub pass: bool,
}

pub fn audit_c2(p: &Poset, g: &BTreeMap<Id, Id>, cfg: &AuditConfig) -> Result<C2Report> {
    cfg.check(p)?;
    if let Some(x) = p.ids().find(|x| !g.contains_key(x)) {
        return Err(Error::Invalid(format!("map undefined at {x}")));
    }
    let moved: BTreeSet<Id> = g.iter().filter(|(x, v)| x != v).map(|(_, &v)| v).collect();
    Ok(C2Report { pass: cfg.small(moved.len()), moved })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct C3Report {
    /// Element with the most strict predecessors, if any.
    pub witness: Option<Id>,
    pub size: usize,
    pub pass: bool,
}

/// Every strict down-set is small.
pub fn audit_c3(p: &Poset, cfg: &AuditConfig) -> Result<C3Report> {
    cfg.check(p)?;
    let mut best: Option<(usize, Id)> = None;
    for x in p.ids() {
        let n = p.down_set(x)?.len();
        if best.is_none_or(|(m, _)| n > m) {
            best = Some((n, x));
        }
    }
    let size = best.map_or(0, |(n, _)| n);
    Ok(C3Report { witness: best.map(|(_, x)| x), size, pass: cfg.small(size) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct C4Certificate {
    pub set: BTreeSet<(Id, Id)>,
    pub formula: String,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct C4Report {
    pub certificates: Vec<C4Certificate>,
    pub pass: bool,
}

/// Small sets of pairs are definable: each sampled set gets a finite
/// disjunction whose extension is checked.
pub fn audit_c4_sample(p: &Poset, sample: &[BTreeSet<(Id, Id)>], cfg: &AuditConfig) -> Result<C4Report> {
    cfg.check(p)?;
    let mut certificates = Vec::with_capacity(sample.len());
    for s in sample {
        if !cfg.small(s.len()) {
            return Err(Error::PreconditionFailed(format!("sampled set of size {} is not small", s.len())));
        }
        if let Some(&(a, b)) = s.iter().find(|(a, b)| !p.contains(*a) || !p.contains(*b)) {
            return Err(Error::UnknownElement(if p.contains(a) { b } else { a }));
        }
        let phi = define_finite_relation(s);
        let found = extension(&phi, p, &["x", "y"], cfg.budget)?;
        let verified = found.len() == s.len() && s.iter().all(|&(a, b)| found.contains(&vec![a, b]));
        certificates.push(C4Certificate { set: s.clone(), formula: phi.to_string(), verified });
    }
    Ok(C4Report { pass: certificates.iter().all(|c| c.verified), certificates })
}

/// Sets for the C4 audit: the restrictions of `g` to `P0` and `P1` when
/// small, then `extra` random small sets.
pub fn c4_sample<R: Rng>(
    p: &Poset,
    g: &BTreeMap<Id, Id>,
    cfg: &AuditConfig,
    extra: usize,
    rng: &mut R,
) -> Result<Vec<BTreeSet<(Id, Id)>>> {
    let data = monotone_data(p, g)?;
    let mut sample = Vec::new();
    for part in [&data.p0, &data.p1] {
        if cfg.small(part.len()) {
            sample.push(part.iter().map(|&x| (x, g[&x])).collect());
        }
    }
    let ids: Vec<Id> = p.ids().collect();
    for _ in 0..extra {
        if cfg.small_threshold == 0 || ids.is_empty() {
            break;
        }
        let k = rng.gen_range(0..cfg.small_threshold);
        let s: BTreeSet<(Id, Id)> =
            (0..k).map(|_| (*ids.choose(rng).unwrap(), *ids.choose(rng).unwrap())).collect();
        sample.push(s);
    }
    Ok(sample)
}

/// Every monotone self-map of a poset with at most
/// [`EXHAUSTIVE_MAP_LIMIT`] elements.
pub fn monotone_maps(p: &Poset) -> Result<Vec<BTreeMap<Id, Id>>> {
    let n = p.len();
    if n > EXHAUSTIVE_MAP_LIMIT {
        return Err(Error::BudgetExceeded(format!("{n} elements exceed the map enumeration limit")));
    }
    let ids: Vec<Id> = p.ids().collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let g: BTreeMap<Id, Id> = ids.iter().zip(&digits).map(|(&x, &d)| (x, ids[d])).collect();
        if check_monotone(p, &g).is_ok() {
            out.push(g);
        }
        let Some(i) = digits.iter().position(|&d| d + 1 < n) else { break };
        digits[i] += 1;
        digits[..i].fill(0);
    }
    Ok(out)
}

/// All four audits for one map, together with the definition they imply.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapAudit {
    pub c1: bool,
    pub c2: C2Report,
    pub c3: bool,
    pub c4: bool,
    pub definition_verified: bool,
    pub definition_small: bool,
}

impl MapAudit {
    pub fn conditions_hold(&self) -> bool {
        self.c1 && self.c2.pass && self.c3 && self.c4
    }

    /// The conditions imply a verified definition. Smallness of the
    /// parameter sets is reported separately since finite sums of small
    /// sets need not stay below the threshold.
    pub fn consistent(&self) -> bool {
        !self.conditions_hold() || self.definition_verified
    }
}

pub fn audit_map<R: Rng>(p: &Poset, g: &BTreeMap<Id, Id>, cfg: &AuditConfig, rng: &mut R) -> Result<MapAudit> {
    let c1 = audit_c1(p, cfg)?.pass;
    let c2 = audit_c2(p, g, cfg)?;
    let c3 = audit_c3(p, cfg)?.pass;
    let sample = c4_sample(p, g, cfg, 2, rng)?;
    let c4 = audit_c4_sample(p, &sample, cfg)?.pass;
    let cert = synthesize_monotone_definition(p, g, cfg.small_threshold)?;
    Ok(MapAudit { c1, c2, c3, c4, definition_verified: cert.verified, definition_small: cert.small })
}
