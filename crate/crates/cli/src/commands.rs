use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use creature_core::amalgam::{find_delta_system, marked_substructures, scc_probe, ProbeResult};
use creature_core::audit::{audit_c1, audit_c2, audit_c3, audit_c4_sample, c4_sample, AuditConfig};
use creature_core::builder::{build_generic, with_order_f, BuildConfig, Status};
use creature_core::coder::{decode_relation, StepContext, StepInput};
use creature_core::corpus::SeedTree;
use creature_core::creature::Creature;
use creature_core::format::{creature_from_json, creature_to_json, step_input_from_json, symmap_to_json, CreatureDoc};
use creature_core::logic::{build_decoder_formula, extension, synthesize_monotone_definition, Formula};
use creature_core::order::Id;
use creature_core::Error;

use crate::error::CliError;
use crate::pipeline::{run_pipeline, PipelineSpec};
use crate::{to_pretty, write_json, Command, SCHEMA_VERSION};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

fn read_creature(path: &Path) -> Result<Creature, CliError> {
    Ok(creature_from_json(&read(path)?)?)
}

fn emit(out: Option<&PathBuf>, value: &Value) -> Result<(), CliError> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            print!("{}", to_pretty(value));
            Ok(())
        }
    }
}

fn pairs_json(pairs: &BTreeSet<(Id, Id)>) -> Value {
    json!(pairs.iter().map(|&(a, b)| [a.0, b.0]).collect::<Vec<_>>())
}

#[derive(Deserialize)]
struct MapDoc {
    g: Vec<[u32; 2]>,
}

fn read_map(path: &Path) -> Result<BTreeMap<Id, Id>, CliError> {
    let doc: MapDoc = serde_json::from_str(&read(path)?)?;
    Ok(doc.g.iter().map(|&[x, v]| (Id(x), Id(v))).collect())
}

#[derive(Deserialize)]
struct FamilyDoc {
    sets: Vec<Vec<u32>>,
}

#[derive(Deserialize)]
struct Marked {
    set: Vec<u32>,
    mark: u32,
}

#[derive(Deserialize)]
struct MarkedDoc {
    marked: Vec<Marked>,
}

fn ids(v: &[u32]) -> BTreeSet<Id> {
    v.iter().map(|&i| Id(i)).collect()
}

pub(crate) fn dispatch(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Encode { input, out, spares } => {
            let (ground, relation) = step_input_from_json(&read(&input)?)?;
            let ctx = StepContext::new(StepInput::new(ground, relation)?, spares)?;
            fs::write(out, symmap_to_json(&ctx.fspec))?;
            Ok(true)
        }
        Command::Build { input, core, depth, seed, spares, check_conditions, out, log, report } => {
            if core != "auto" {
                return Err(CliError::BadInput(format!("unsupported core `{core}`; only `auto` is available")));
            }
            let (ground, relation) = step_input_from_json(&read(&input)?)?;
            let ctx = StepContext::new(StepInput::new(ground, relation)?, spares)?;
            let config = BuildConfig { seed, depth_budget: depth, check_conditions };
            let outcome = build_generic(&ctx, &ctx.core(), config)?;
            fs::write(&out, creature_to_json(&outcome.mg))?;
            if let Some(log) = log {
                fs::write(log, outcome.log_text())?;
            }
            let complete = outcome.is_complete();
            let summary = json!({
                "schema_version": SCHEMA_VERSION,
                "seed": seed,
                "e": ctx.alloc.e.id.0,
                "complete": complete,
                "mg_size": outcome.mg.len(),
                "conditions_checked": outcome.conditions_checked,
                "unmet": outcome.requirements.iter().filter(|r| r.status == Status::Unmet)
                    .map(|r| r.kind.to_string()).collect::<Vec<_>>(),
                "hazards": outcome.hazards.iter().map(|&(a, b)| [a.0, b.0]).collect::<Vec<_>>(),
            });
            emit(report.as_ref(), &summary)?;
            Ok(complete)
        }
        Command::Decode { input, e, order_f, out } => {
            let c = read_creature(&input)?;
            let c = if order_f { with_order_f(&c) } else { c };
            let decoded = decode_relation(&c, Id(e));
            emit(out.as_ref(), &json!({"schema_version": SCHEMA_VERSION, "e": e, "R": pairs_json(&decoded)}))?;
            Ok(true)
        }
        Command::DecodeFo { input, e, budget, out } => {
            let c = read_creature(&input)?;
            let phi = build_decoder_formula(Id(e));
            let found = extension(&phi, c.order(), &["alpha", "beta"], budget)?;
            let pairs: BTreeSet<(Id, Id)> = found.into_iter().map(|t| (t[0], t[1])).collect();
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "e": e,
                "formula": phi.to_string(),
                "R": pairs_json(&pairs),
            });
            emit(out.as_ref(), &report)?;
            Ok(true)
        }
        Command::DefineMonotone { input, g, threshold, out } => {
            let c = read_creature(&input)?;
            let g = read_map(&g)?;
            let cert = synthesize_monotone_definition(c.order(), &g, threshold)?;
            let ok = cert.verified && cert.claim1_failures.is_empty() && cert.claim2_failures.is_empty();
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "threshold": threshold,
                "formula": cert.formula.to_string(),
                "parameters": cert.parameters,
                "p0": cert.p0,
                "p1": cert.p1,
                "verified": cert.verified,
                "mismatches": cert.mismatches,
                "claim1_failures": cert.claim1_failures,
                "claim2_failures": cert.claim2_failures,
                "small": cert.small,
            });
            emit(out.as_ref(), &report)?;
            Ok(ok)
        }
        Command::Audit { input, threshold, g, seed, samples, out } => {
            let c = read_creature(&input)?;
            let p = c.order();
            let cfg = AuditConfig::new(threshold);
            let c1 = audit_c1(p, &cfg)?;
            let c3 = audit_c3(p, &cfg)?;
            let mut ok = c1.pass && c3.pass;
            let mut report = json!({
                "schema_version": SCHEMA_VERSION,
                "seed": seed,
                "threshold": threshold,
                "c1": c1,
                "c3": c3,
            });
            if let Some(g) = g {
                let g = read_map(&g)?;
                let c2 = audit_c2(p, &g, &cfg)?;
                let mut rng = SeedTree::new(seed).child("c4").rng();
                let sample = c4_sample(p, &g, &cfg, samples, &mut rng)?;
                let c4 = audit_c4_sample(p, &sample, &cfg)?;
                let cert = synthesize_monotone_definition(p, &g, threshold)?;
                ok &= c2.pass && c4.pass;
                report["c2"] = json!(c2);
                report["c4"] = json!(c4);
                report["definition"] = json!({"verified": cert.verified, "small": cert.small});
                if c1.pass && c2.pass && c3.pass && c4.pass && !cert.verified {
                    ok = false;
                }
            }
            report["pass"] = json!(ok);
            emit(out.as_ref(), &report)?;
            Ok(ok)
        }
        Command::DeltaSystem { input, min, out } => {
            let doc: FamilyDoc = serde_json::from_str(&read(&input)?)?;
            let family: Vec<BTreeSet<Id>> = doc.sets.iter().map(|s| ids(s)).collect();
            match find_delta_system(&family, min) {
                Ok(d) => {
                    let report = json!({
                        "schema_version": SCHEMA_VERSION,
                        "found": true,
                        "indices": d.indices,
                        "heart": d.heart,
                        "exact": d.exact,
                    });
                    emit(out.as_ref(), &report)?;
                    Ok(true)
                }
                Err(Error::NotFound(n)) => {
                    emit(out.as_ref(), &json!({"schema_version": SCHEMA_VERSION, "found": false, "min": n}))?;
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::ProbeScc { input, family, out } => {
            let m = read_creature(&input)?;
            let doc: MarkedDoc = serde_json::from_str(&read(&family)?)?;
            let marked: Vec<(BTreeSet<Id>, Id)> = doc.marked.iter().map(|x| (ids(&x.set), Id(x.mark))).collect();
            let subs = marked_substructures(&m, &marked)?;
            let report = match scc_probe(&m, &subs) {
                ProbeResult::Found { alpha, beta, amalgam } => json!({
                    "schema_version": SCHEMA_VERSION,
                    "result": "found",
                    "alpha": alpha,
                    "beta": beta,
                    "amalgam": CreatureDoc::from_creature(&amalgam),
                }),
                ProbeResult::Exhausted { pairs_tried, rejections } => json!({
                    "schema_version": SCHEMA_VERSION,
                    "result": "exhausted",
                    "pairs_tried": pairs_tried,
                    "rejections": rejections,
                }),
            };
            emit(out.as_ref(), &report)?;
            Ok(true)
        }
        Command::Pipeline { spec, out } => {
            let spec: PipelineSpec = serde_json::from_str(&read(&spec)?)?;
            Ok(run_pipeline(&spec, &out)?.ok)
        }
        Command::Eval { input, formula, vars, budget, out } => {
            let c = read_creature(&input)?;
            let phi: Formula = formula.parse()?;
            let vars: Vec<&str> = vars.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            let found = extension(&phi, c.order(), &vars, budget)?;
            let tuples: Vec<Vec<u32>> = found.iter().map(|t| t.iter().map(|i| i.0).collect()).collect();
            let report = json!({"schema_version": SCHEMA_VERSION, "vars": vars, "tuples": tuples});
            emit(out.as_ref(), &report)?;
            Ok(true)
        }
    }
}
