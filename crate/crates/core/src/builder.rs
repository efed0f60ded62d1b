//! Finite simulation of the generic extension for one step: conditions,
//! requirements, the builder that meets them, and the exactness audit of
//! the resulting order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coder::StepContext;
use crate::creature::{is_separated_extension, validate_creature, Creature, Violation};
use crate::error::{Error, Result};
use crate::order::{is_end_extension, Element, Id, Poset, SymMap, Tag, WitnessKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConditionViolation {
    Creature(Violation),
    /// The ground part is not a restriction of the ground creature.
    GroundMismatch,
    OutsideCarrier(Id),
    OmegaNotClosed { element: Id, missing: Id },
    /// `F` differs from the encoded map on this pair.
    FMismatch(Id, Id),
    NotEndExtension,
    NotSeparated(u8),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionReport {
    pub violations: Vec<ConditionViolation>,
}

impl ConditionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every clause of the condition definition.
pub fn is_condition(c: &Creature, ctx: &StepContext) -> ConditionReport {
    let mut violations: Vec<ConditionViolation> = validate_creature(c)
        .violations
        .into_iter()
        .map(ConditionViolation::Creature)
        .collect();
    let ground = ctx.ground();
    let carrier = c.carrier();
    violations.extend(
        carrier
            .iter()
            .filter(|&&id| !ground.contains(id) && !ctx.alloc.contains(id))
            .map(|&id| ConditionViolation::OutsideCarrier(id)),
    );
    let old: BTreeSet<Id> = carrier.iter().copied().filter(|&id| ground.contains(id)).collect();
    let (Ok(c_old), Ok(g_old)) = (c.restrict(&old), ground.restrict(&old)) else {
        violations.push(ConditionViolation::GroundMismatch);
        return ConditionReport { violations };
    };
    if c_old != g_old {
        violations.push(ConditionViolation::GroundMismatch);
    }
    for &x in carrier.difference(&old) {
        if let Some(&missing) = ctx.alloc.omega_of(x).iter().find(|m| !carrier.contains(m)) {
            violations.push(ConditionViolation::OmegaNotClosed { element: x, missing });
        }
    }
    let expected = ctx.fspec.restrict_domain(&carrier);
    let pairs: BTreeSet<(Id, Id)> = expected.iter().chain(c.f().iter()).map(|(p, _)| p).collect();
    for (x, y) in pairs {
        if expected.get(x, y) != c.f().get(x, y) {
            violations.push(ConditionViolation::FMismatch(x, y));
        }
    }
    match is_separated_extension(&c_old, c) {
        Ok(Ok(())) => {}
        Ok(Err(v)) => violations.push(ConditionViolation::NotSeparated(v.clause())),
        Err(_) => violations.push(ConditionViolation::NotEndExtension),
    }
    ConditionReport { violations }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RequirementKind {
    /// The element must belong to the condition.
    Element(Id),
    /// The incomparable pair needs a fresh minimal upper bound.
    PairWitness(Id, Id),
    /// An upper bound `z` of an `F`-pair must sit above another upper bound.
    ExtraUb(Id, Id, Id),
}

impl fmt::Display for RequirementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequirementKind::Element(x) => write!(f, "element {x}"),
            RequirementKind::PairWitness(x, y) => write!(f, "pair_witness ({x},{y})"),
            RequirementKind::ExtraUb(x, y, z) => write!(f, "extra_ub ({x},{y}) below {z}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Met,
    Unmet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Requirement {
    pub kind: RequirementKind,
    pub status: Status,
}

impl Requirement {
    fn unmet(kind: RequirementKind) -> Self {
        Requirement { kind, status: Status::Unmet }
    }
}

/// Upper bounds `z` of an `F`-pair that are not above its value.
fn extra_ub_violations(order: &Poset, f: &SymMap) -> Vec<(Id, Id, Id)> {
    let mut out = Vec::new();
    for ((x, y), w) in f.iter() {
        let (Ok(ux), Ok(uy)) = (order.up_set(x), order.up_set(y)) else { continue };
        for &z in ux.intersection(&uy) {
            if z != x && z != y && !order.le(w, z) {
                out.push((x, y, z));
            }
        }
    }
    out
}

fn schedule_on(order: &Poset, ctx: &StepContext, core: &BTreeSet<Id>) -> Vec<Requirement> {
    let mut out: Vec<Requirement> = Vec::new();
    let core: Vec<Id> = core.iter().copied().filter(|&x| order.contains(x)).collect();
    let core_set: BTreeSet<Id> = core.iter().copied().collect();
    out.extend(core.iter().map(|&x| Requirement::unmet(RequirementKind::Element(x))));
    for (i, &x) in core.iter().enumerate() {
        for &y in &core[i + 1..] {
            if !order.comparable(x, y) && !ctx.fspec.contains(x, y) {
                let req = Requirement::unmet(RequirementKind::PairWitness(x, y));
                out.extend([req, req]);
            }
        }
    }
    for (x, y, z) in extra_ub_violations(order, &ctx.fspec) {
        if core_set.contains(&x) && core_set.contains(&y) {
            out.push(Requirement::unmet(RequirementKind::ExtraUb(x, y, z)));
        }
    }
    out
}

/// Requirements for `core` against the order obtained by putting both
/// arguments of each new `F`-value below it.
pub fn schedule_requirements(ctx: &StepContext, core: &BTreeSet<Id>) -> Result<Vec<Requirement>> {
    Ok(schedule_on(&ctx.spec_order()?, ctx, core))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    /// Only perturbs which spare ids become witnesses.
    pub seed: u64,
    /// Rounds of `extra_ub` repair.
    pub depth_budget: usize,
    /// Run `is_condition` after every extension.
    pub check_conditions: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { seed: 0, depth_budget: 3, check_conditions: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TwinPlan {
    Skip,
    Twins,
    Hazard,
}

/// Builds a chain of increasing conditions for one step.
#[derive(Debug)]
pub struct Builder<'a> {
    ctx: &'a StepContext,
    config: BuildConfig,
    /// Order on ground, `e` and gadgets that every condition restricts.
    placed: Creature,
    current: Creature,
    spares: Vec<Element>,
    plans: BTreeMap<(Id, Id), TwinPlan>,
    twins: BTreeMap<(Id, Id), Vec<Id>>,
    extra: Vec<Requirement>,
    log: Vec<String>,
    conditions_checked: usize,
}

impl<'a> Builder<'a> {
    /// Fixes the placement order (repairing `extra_ub` requirements by
    /// putting `F`-values below upper bounds, at most `depth_budget`
    /// rounds) and starts from the condition `{e}`.
    pub fn new(ctx: &'a StepContext, config: BuildConfig) -> Result<Builder<'a>> {
        let mut placed = ctx.spec_creature()?;
        let mut log = Vec::new();
        let mut extra = Vec::new();
        let ground = ctx.ground();
        for round in 0..config.depth_budget {
            let pending = extra_ub_violations(placed.order(), placed.f());
            if pending.is_empty() {
                break;
            }
            let mut pairs = placed.order().lt_pairs();
            for &(x, y, z) in &pending {
                let w = placed.f().get(x, y).expect("violation comes from an F-pair");
                if ground.contains(z) || placed.order().lt(z, w) {
                    continue;
                }
                pairs.push((w, z));
                log.push(format!("extra_ub ({x},{y}) below {z}: reuse {w} (round {round})"));
                extra.push(Requirement { kind: RequirementKind::ExtraUb(x, y, z), status: Status::Met });
            }
            let order = Poset::from_pairs(placed.order().elements().to_vec(), &pairs)?;
            placed = placed.with_order(order);
        }
        for (x, y, z) in extra_ub_violations(placed.order(), placed.f()) {
            log.push(format!("extra_ub ({x},{y}) below {z}: unmet, depth budget {}", config.depth_budget));
            extra.push(Requirement::unmet(RequirementKind::ExtraUb(x, y, z)));
        }
        let e = ctx.alloc.e.id;
        let current = placed.restrict(&BTreeSet::from([e]))?;
        let mut spares = ctx.alloc.spares.clone();
        spares.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
        spares.reverse();
        let mut builder = Builder {
            ctx,
            config,
            placed,
            current,
            spares,
            plans: BTreeMap::new(),
            twins: BTreeMap::new(),
            extra,
            log,
            conditions_checked: 0,
        };
        builder.check()?;
        Ok(builder)
    }

    pub fn condition(&self) -> &Creature {
        &self.current
    }

    /// The order every condition restricts to, before witnesses.
    pub fn placement(&self) -> &Creature {
        &self.placed
    }

    pub fn log(&self) -> &[String] {
        &self.log
    }

    fn check(&mut self) -> Result<()> {
        if !self.config.check_conditions {
            return Ok(());
        }
        self.conditions_checked += 1;
        let report = is_condition(&self.current, self.ctx);
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::Invalid(format!("intermediate condition fails: {v:?}"))),
        }
    }

    /// Closure of `seed` under `Omega`, placement down-sets and `F`-values.
    fn closure(&self, seed: BTreeSet<Id>) -> Result<BTreeSet<Id>> {
        let ground = self.ctx.ground();
        let mut set = seed;
        loop {
            let mut next = set.clone();
            for &y in &set {
                next.extend(self.placed.order().down_set(y)?);
                if !ground.contains(y) {
                    next.extend(self.ctx.alloc.omega_of(y));
                }
            }
            for ((u, v), w) in self.ctx.fspec.iter() {
                if next.contains(&u) && next.contains(&v) {
                    next.insert(w);
                }
            }
            if next == set {
                return Ok(set);
            }
            set = next;
        }
    }

    fn add_element(&mut self, x: Id) -> Result<Status> {
        if self.current.contains(x) {
            return Ok(Status::Met);
        }
        if !self.placed.contains(x) {
            return Err(Error::UnknownElement(x));
        }
        let mut seed = self.current.carrier();
        seed.insert(x);
        let all = self.closure(seed)?;
        let fresh: BTreeSet<Id> = all.iter().copied().filter(|id| !self.current.contains(*id)).collect();
        let order = self.placed.order();
        let new: Vec<Element> = fresh.iter().map(|&id| *order.element(id).expect("placed")).collect();
        let pairs: Vec<(Id, Id)> = order
            .lt_pairs()
            .into_iter()
            .filter(|(a, b)| fresh.contains(b) && all.contains(a))
            .collect();
        let f_add: Vec<((Id, Id), Id)> = self
            .placed
            .f()
            .iter()
            .filter(|((u, v), _)| (fresh.contains(u) || fresh.contains(v)) && all.contains(u) && all.contains(v))
            .collect();
        let h_add: Vec<(Id, Id, Id)> = self
            .placed
            .h()
            .iter()
            .copied()
            .filter(|(a, b, c)| [a, b, c].iter().all(|v| all.contains(v)) && [a, b, c].iter().any(|v| fresh.contains(v)))
            .collect();
        self.current = self.current.end_extend(new, &pairs, f_add, h_add)?;
        self.log.push(format!(
            "element {x}: added {}",
            fresh.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(" ")
        ));
        self.check()?;
        Ok(Status::Met)
    }

    /// Down-closure of `{x, y}` in the current condition, closed under `F`.
    pub fn f_closed_down_set(&self, x: Id, y: Id) -> Result<BTreeSet<Id>> {
        f_closed_down_set(&self.current, x, y)
    }

    fn pair_witness(&mut self, x: Id, y: Id) -> Result<Status> {
        let key = (x.min(y), x.max(y));
        let order = self.current.order();
        if !order.contains(x) || !order.contains(y) {
            return Err(Error::PreconditionFailed(format!("pair ({x},{y}) is not in the condition")));
        }
        if order.comparable(x, y) || self.current.f().contains(x, y) {
            self.log.push(format!("pair_witness ({x},{y}): not applicable"));
            return Ok(Status::Met);
        }
        let plan = match self.plans.get(&key) {
            Some(&plan) => plan,
            None => {
                let mubs = order.minimal_upper_bounds(x, y)?;
                let plan = if mubs.len() != 1 {
                    TwinPlan::Skip
                } else {
                    let down = self.f_closed_down_set(x, y)?;
                    if down.iter().any(|&d| order.le(x, d) && order.le(y, d)) {
                        TwinPlan::Hazard
                    } else {
                        TwinPlan::Twins
                    }
                };
                self.plans.insert(key, plan);
                plan
            }
        };
        match plan {
            TwinPlan::Skip => {
                self.log.push(format!("pair_witness ({x},{y}): upper bounds already not unique"));
                Ok(Status::Met)
            }
            TwinPlan::Hazard => {
                self.log.push(format!(
                    "pair_witness ({x},{y}): aborted, F-closed down-set contains an upper bound"
                ));
                Ok(Status::Unmet)
            }
            TwinPlan::Twins => {
                if self.twins.get(&key).map_or(0, Vec::len) >= 2 {
                    return Ok(Status::Met);
                }
                let down = self.f_closed_down_set(x, y)?;
                let spare = self.spares.pop().ok_or(Error::SparePoolExhausted)?;
                let twin = Element { tag: Tag::Witness(WitnessKind::Twin), ..spare };
                let ground = self.ctx.ground();
                let h = (!(ground.contains(x) && ground.contains(y))).then_some((x, y, twin.id));
                let pairs: Vec<(Id, Id)> = down.iter().map(|&d| (d, twin.id)).collect();
                self.current = self.current.end_extend(vec![twin], &pairs, [], h)?;
                self.twins.entry(key).or_default().push(twin.id);
                self.log.push(format!("pair_witness ({x},{y}): twin {}", twin.id));
                self.check()?;
                Ok(Status::Met)
            }
        }
    }

    /// Extends the current condition to meet `req`.
    pub fn extend_to_meet(&mut self, req: RequirementKind) -> Result<Status> {
        match req {
            RequirementKind::Element(x) => self.add_element(x),
            RequirementKind::PairWitness(x, y) => self.pair_witness(x, y),
            RequirementKind::ExtraUb(x, y, z) => {
                let order = self.current.order();
                let met = match self.current.f().get(x, y) {
                    Some(w) => order.le(w, z),
                    None => false,
                };
                if !met {
                    self.log.push(format!("extra_ub ({x},{y}) below {z}: cannot change placed order"));
                }
                Ok(if met { Status::Met } else { Status::Unmet })
            }
        }
    }

    pub fn finish(self, requirements: Vec<Requirement>) -> BuildOutcome {
        let hazards = self
            .plans
            .iter()
            .filter(|(_, p)| **p == TwinPlan::Hazard)
            .map(|(k, _)| *k)
            .collect();
        BuildOutcome {
            mg: self.current,
            log: self.log,
            requirements,
            hazards,
            conditions_checked: self.conditions_checked,
        }
    }
}

/// Down-closure of `{x, y}` closed under `F`-values of pairs inside it.
pub fn f_closed_down_set(c: &Creature, x: Id, y: Id) -> Result<BTreeSet<Id>> {
    let order = c.order();
    let mut set = order.down_set(x)?;
    set.extend(order.down_set(y)?);
    set.extend([x, y]);
    loop {
        let mut grown = false;
        for ((u, v), w) in c.f().iter() {
            if set.contains(&u) && set.contains(&v) && !set.contains(&w) {
                set.extend(order.down_set(w)?);
                set.insert(w);
                grown = true;
            }
        }
        if !grown {
            return Ok(set);
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildOutcome {
    /// Union of the chain of conditions.
    pub mg: Creature,
    pub log: Vec<String>,
    pub requirements: Vec<Requirement>,
    /// Pairs whose witness was aborted: every candidate lies above an upper bound.
    pub hazards: BTreeSet<(Id, Id)>,
    pub conditions_checked: usize,
}

impl BuildOutcome {
    pub fn unmet(&self) -> Vec<Requirement> {
        self.requirements.iter().copied().filter(|r| r.status == Status::Unmet).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.unmet().is_empty()
    }

    pub fn log_text(&self) -> String {
        let mut text = self.log.join("\n");
        text.push('\n');
        text
    }
}

/// Meets elements of `core` then pair witnesses, in id order.
pub fn build_generic(ctx: &StepContext, core: &BTreeSet<Id>, config: BuildConfig) -> Result<BuildOutcome> {
    let mut builder = Builder::new(ctx, config)?;
    let schedule = schedule_on(builder.placed.order(), ctx, core);
    let mut requirements = builder.extra.clone();
    for req in schedule {
        if let RequirementKind::ExtraUb(..) = req.kind {
            continue;
        }
        let status = builder.extend_to_meet(req.kind)?;
        requirements.push(Requirement { kind: req.kind, status });
    }
    Ok(builder.finish(requirements))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiscrepancyClass {
    /// The value is a minimal upper bound, but another one was never pushed above it.
    ChainTruncation,
    /// Every upper bound of the pair lies above the `F`-closure of the pair, so
    /// no finite witness can exist.
    FiniteObstruction,
    Genuine,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub pair: (Id, Id),
    pub expected: Option<Id>,
    pub actual: Option<Id>,
    pub class: DiscrepancyClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Separation {
    Separated,
    Violates(u8),
    NotAnExtension,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub pairs_checked: usize,
    pub discrepancies: Vec<Discrepancy>,
    pub separation: Separation,
    pub end_extension: bool,
}

impl AuditReport {
    pub fn is_exact(&self) -> bool {
        self.discrepancies.is_empty() && self.separation == Separation::Separated && self.end_extension
    }

    pub fn count(&self, class: DiscrepancyClass) -> usize {
        self.discrepancies.iter().filter(|d| d.class == class).count()
    }
}

/// Compares the unique-minimal-upper-bound map of `mg` with the encoded
/// `F` on pairs from `core`.
pub fn audit_exactness(mg: &Creature, ctx: &StepContext, core: &BTreeSet<Id>) -> AuditReport {
    let order = mg.order();
    let core: Vec<Id> = core.iter().copied().filter(|&x| mg.contains(x)).collect();
    let mut discrepancies = Vec::new();
    let mut pairs_checked = 0;
    for (i, &x) in core.iter().enumerate() {
        for &y in &core[i + 1..] {
            pairs_checked += 1;
            let expected = ctx.fspec.get(x, y);
            let actual = order.umub(x, y);
            if expected == actual {
                continue;
            }
            let class = match (expected, actual) {
                (Some(w), None) => {
                    let mubs = order.minimal_upper_bounds(x, y).unwrap_or_default();
                    if mubs.contains(&w) && mubs.len() > 1 {
                        DiscrepancyClass::ChainTruncation
                    } else {
                        DiscrepancyClass::Genuine
                    }
                }
                (None, Some(_)) => {
                    let down = f_closed_down_set(mg, x, y).unwrap_or_default();
                    if down.iter().any(|&d| order.le(x, d) && order.le(y, d)) {
                        DiscrepancyClass::FiniteObstruction
                    } else {
                        DiscrepancyClass::Genuine
                    }
                }
                _ => DiscrepancyClass::Genuine,
            };
            discrepancies.push(Discrepancy { pair: (x, y), expected, actual, class });
        }
    }
    let ground = ctx.ground();
    let end_extension = is_end_extension(ground.order(), order).unwrap_or(false);
    let separation = match is_separated_extension(ground, mg) {
        Ok(Ok(())) => Separation::Separated,
        Ok(Err(v)) => Separation::Violates(v.clause()),
        Err(_) => Separation::NotAnExtension,
    };
    AuditReport { pairs_checked, discrepancies, separation, end_extension }
}

/// `mg` with `F` replaced by the unique-minimal-upper-bound map of its order.
pub fn with_order_f(mg: &Creature) -> Creature {
    mg.with_f(mg.order().umub_map())
}
