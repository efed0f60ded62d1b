//! Multi-step runs: each step codes a relation over the structure built
//! by the previous one, then audits and decodes it.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use creature_core::builder::{audit_exactness, build_generic, with_order_f, BuildConfig, Status};
use creature_core::coder::{check_absoluteness, decode_relation, StepContext, StepInput};
use creature_core::corpus::SeedTree;
use creature_core::creature::Creature;
use creature_core::format::{creature_to_json, step_input_to_json, symmap_to_json, CreatureDoc};
use creature_core::order::Id;

use crate::error::CliError;
use crate::{write_json, SCHEMA_VERSION};

pub const DEFAULT_SPARE_FLOOR: usize = 4096;

fn default_depth() -> usize {
    3
}

fn default_spares() -> usize {
    DEFAULT_SPARE_FLOOR
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StepDoc {
    #[serde(rename = "R")]
    pub relation: Vec<[u32; 2]>,
}

/// Pipeline document. Step 1 codes over `ground`; step `k` codes over the
/// structure built at step `k - 1`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PipelineSpec {
    pub seed: u64,
    #[serde(default = "default_depth")]
    pub depth_budget: usize,
    #[serde(default = "default_spares")]
    pub spare_floor: usize,
    #[serde(default)]
    pub check_conditions: bool,
    #[serde(default)]
    pub ground: Option<CreatureDoc>,
    #[serde(default)]
    pub steps: Vec<StepDoc>,
}

impl PipelineSpec {
    pub fn new(seed: u64, ground: &Creature, steps: &[BTreeSet<(Id, Id)>]) -> PipelineSpec {
        PipelineSpec {
            seed,
            depth_budget: default_depth(),
            spare_floor: DEFAULT_SPARE_FLOOR,
            check_conditions: false,
            ground: Some(CreatureDoc::from_creature(ground)),
            steps: steps
                .iter()
                .map(|r| StepDoc { relation: r.iter().map(|&(a, b)| [a.0, b.0]).collect() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepSummary {
    pub step: usize,
    pub e: Id,
    pub relation: BTreeSet<(Id, Id)>,
    pub decoded: BTreeSet<(Id, Id)>,
    pub complete: bool,
    pub exact: bool,
    /// `(earlier step, holds)` for every earlier step.
    pub absoluteness: Vec<(usize, bool)>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineOutcome {
    pub steps: Vec<StepSummary>,
    pub ok: bool,
}

fn pairs_json(pairs: &BTreeSet<(Id, Id)>) -> Value {
    json!(pairs.iter().map(|&(a, b)| [a.0, b.0]).collect::<Vec<_>>())
}

/// Runs every step, writing `stepK_*` artifacts into `out`.
pub fn run_pipeline(spec: &PipelineSpec, out: &Path) -> Result<PipelineOutcome, CliError> {
    if spec.steps.is_empty() {
        return Ok(PipelineOutcome { steps: vec![], ok: true });
    }
    let ground_doc = spec.ground.as_ref().ok_or_else(|| CliError::BadInput("pipeline has steps but no ground".into()))?;
    let mut ground = ground_doc.to_creature()?;
    fs::create_dir_all(out)?;
    let seeds = SeedTree::new(spec.seed).child("pipeline");
    let mut built: Vec<(Creature, Id)> = Vec::new();
    let mut summaries = Vec::new();
    for (i, step) in spec.steps.iter().enumerate() {
        let k = i + 1;
        let relation: BTreeSet<(Id, Id)> = step.relation.iter().map(|&[a, b]| (Id(a), Id(b))).collect();
        let summary = run_step(spec, &seeds, k, &ground, relation, &built, out).map_err(|e| e.at_step(k))?;
        ground = summary.1.clone();
        built.push((summary.1, summary.0.e));
        summaries.push(summary.0);
    }
    let ok = summaries.iter().all(|s| s.ok);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "seed": spec.seed,
        "steps": summaries.iter().map(|s| json!({"step": s.step, "ok": s.ok})).collect::<Vec<_>>(),
        "ok": ok,
    });
    write_json(&out.join("pipeline_report.json"), &report)?;
    Ok(PipelineOutcome { steps: summaries, ok })
}

fn run_step(
    spec: &PipelineSpec,
    seeds: &SeedTree,
    k: usize,
    ground: &Creature,
    relation: BTreeSet<(Id, Id)>,
    earlier: &[(Creature, Id)],
    out: &Path,
) -> Result<(StepSummary, Creature), CliError> {
    let input = StepInput::new(ground.clone(), relation.clone())?;
    let ctx = StepContext::new(input, spec.spare_floor)?;
    fs::write(out.join(format!("step{k}_input.json")), step_input_to_json(ground, &relation))?;
    fs::write(out.join(format!("step{k}_fspec.json")), symmap_to_json(&ctx.fspec))?;

    let build_seed = seeds.child("build").index(k as u64).seed();
    let config = BuildConfig { seed: build_seed, depth_budget: spec.depth_budget, check_conditions: spec.check_conditions };
    let outcome = build_generic(&ctx, &ctx.core(), config)?;
    let mg = outcome.mg.clone();
    fs::write(out.join(format!("step{k}_mg.json")), creature_to_json(&mg))?;
    fs::write(out.join(format!("step{k}_build.log")), outcome.log_text())?;

    let e = ctx.alloc.e.id;
    let audit = audit_exactness(&mg, &ctx, &ctx.core());
    let decoded = decode_relation(&mg, e);
    let decoded_from_order = decode_relation(&with_order_f(&mg), e);
    let mut absoluteness = Vec::new();
    let mut absoluteness_json = Vec::new();
    for (j, (small, e_j)) in earlier.iter().enumerate() {
        let (holds, error) = match check_absoluteness(small, &mg, *e_j) {
            Ok(h) => (h, None),
            Err(err) => (false, Some(err.to_string())),
        };
        absoluteness.push((j + 1, holds));
        absoluteness_json.push(json!({"step": j + 1, "e": e_j.0, "holds": holds, "error": error}));
    }
    let complete = outcome.is_complete();
    let exact = audit.is_exact();
    let ok = complete && exact && decoded == relation && absoluteness.iter().all(|&(_, h)| h);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "seed": spec.seed,
        "build_seed": build_seed,
        "step": k,
        "e": e.0,
        "relation": pairs_json(&relation),
        "decoded": pairs_json(&decoded),
        "decoded_from_order": pairs_json(&decoded_from_order),
        "build": {
            "complete": complete,
            "mg_size": mg.len(),
            "conditions_checked": outcome.conditions_checked,
            "unmet": outcome.requirements.iter().filter(|r| r.status == Status::Unmet)
                .map(|r| r.kind.to_string()).collect::<Vec<_>>(),
            "hazards": outcome.hazards.iter().map(|&(a, b)| [a.0, b.0]).collect::<Vec<_>>(),
        },
        "audit": { "exact": exact, "report": audit },
        "absoluteness": absoluteness_json,
        "ok": ok,
    });
    write_json(&out.join(format!("step{k}_report.json")), &report)?;
    let summary = StepSummary { step: k, e, relation, decoded, complete, exact, absoluteness, ok };
    Ok((summary, mg))
}
