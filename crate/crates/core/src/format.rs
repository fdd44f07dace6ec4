//! The JSON instance format and canonical serialization.
//!
//! Instances are objects with `contracts` (name + participant agent names)
//! and `agents` (name, optional side, and a tagged CF spec). Canonical output
//! has sorted object keys, agents and contracts in declaration order, and
//! menus as name lists in contract declaration order, so serialization is
//! byte-stable.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::cf::{CfKind, ChoiceFunction};
use crate::error::{Error, Result};
use crate::menu::{GroundSet, Menu};
use crate::problem::{Bipartition, Frame, Problem};
use crate::split::SplitResult;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    contracts: Vec<ContractDoc>,
    agents: Vec<AgentDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContractDoc {
    name: String,
    participants: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    name: String,
    #[serde(default)]
    side: Option<String>,
    cf: CfSpec,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum CfSpec {
    Linear {
        order: Vec<String>,
    },
    Quota {
        order: Vec<String>,
        q: usize,
    },
    Weak {
        classes: Vec<Vec<String>>,
    },
    Sequential {
        stages: Vec<CfSpec>,
    },
    Union {
        parts: Vec<CfSpec>,
    },
    Table {
        entries: Vec<TableEntryDoc>,
    },
    Integral {
        base: Box<CfSpec>,
        fibers: Vec<FiberDoc>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntryDoc {
    menu: Vec<String>,
    choice: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiberDoc {
    base_contract: String,
    members: Vec<String>,
    cf: CfSpec,
}

fn resolve_menu(names: &[String], ground: &GroundSet, what: &str) -> Result<Menu> {
    let mut menu = Menu::EMPTY;
    for n in names {
        let idx = ground
            .index_of(n)
            .ok_or_else(|| Error::UnknownName(format!("{what}: contract {n:?}")))?;
        menu = menu.with(idx);
    }
    Ok(menu)
}

fn resolve_cf(spec: &CfSpec, expected: Menu, ground: &GroundSet, agent: &str) -> Result<ChoiceFunction> {
    let cf = match spec {
        CfSpec::Linear { order } => {
            let order = order
                .iter()
                .map(|n| {
                    ground
                        .index_of(n)
                        .ok_or_else(|| Error::UnknownName(format!("agent {agent:?}: contract {n:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            ChoiceFunction::linear(order)?
        }
        CfSpec::Quota { order, q } => {
            let order = order
                .iter()
                .map(|n| {
                    ground
                        .index_of(n)
                        .ok_or_else(|| Error::UnknownName(format!("agent {agent:?}: contract {n:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            ChoiceFunction::quota(order, *q)?
        }
        CfSpec::Weak { classes } => {
            let classes = classes
                .iter()
                .map(|class| {
                    class
                        .iter()
                        .map(|n| {
                            ground.index_of(n).ok_or_else(|| {
                                Error::UnknownName(format!("agent {agent:?}: contract {n:?}"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            ChoiceFunction::weak_order(classes)?
        }
        CfSpec::Sequential { stages } => {
            let stages = stages
                .iter()
                .map(|s| resolve_cf(s, expected, ground, agent))
                .collect::<Result<Vec<_>>>()?;
            ChoiceFunction::sequential(stages)?
        }
        CfSpec::Union { parts } => {
            let parts = parts
                .iter()
                .map(|s| resolve_cf(s, expected, ground, agent))
                .collect::<Result<Vec<_>>>()?;
            ChoiceFunction::union_compose(parts)?
        }
        CfSpec::Table { entries } => {
            let mut map = BTreeMap::new();
            for entry in entries {
                let menu = resolve_menu(&entry.menu, ground, &format!("agent {agent:?} table"))?;
                let choice =
                    resolve_menu(&entry.choice, ground, &format!("agent {agent:?} table"))?;
                if map.insert(menu, choice).is_some() {
                    return Err(Error::InvalidStructure(format!(
                        "agent {agent:?}: duplicate table entry for menu {menu}"
                    )));
                }
            }
            ChoiceFunction::table(expected, map).map_err(|e| match e {
                Error::InvalidStructure(msg) => {
                    Error::InvalidStructure(format!("agent {agent:?}: {msg}"))
                }
                other => other,
            })?
        }
        CfSpec::Integral { base, fibers } => {
            let base_labels: Vec<String> =
                fibers.iter().map(|f| f.base_contract.clone()).collect();
            let base_ground = GroundSet::new(base_labels.clone())?;
            let base_cf = resolve_cf(base, base_ground.full_menu(), &base_ground, agent)?;
            let mut fiber_cfs = BTreeMap::new();
            for (i, fiber) in fibers.iter().enumerate() {
                let members = resolve_menu(
                    &fiber.members,
                    ground,
                    &format!("agent {agent:?} fiber {:?}", fiber.base_contract),
                )?;
                fiber_cfs.insert(i, resolve_cf(&fiber.cf, members, ground, agent)?);
            }
            ChoiceFunction::integrate(base_cf, base_labels, fiber_cfs)?
        }
    };
    if cf.domain() != expected {
        return Err(Error::InvalidStructure(format!(
            "agent {agent:?}: choice function covers {} but its incidence is {}",
            cf.domain(),
            expected
        )));
    }
    Ok(cf)
}

/// Parse an instance document into a validated problem.
pub fn parse_instance(text: &str) -> Result<Problem> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let agent_names: Vec<String> = doc.agents.iter().map(|a| a.name.clone()).collect();
    let contract_names: Vec<String> = doc.contracts.iter().map(|c| c.name.clone()).collect();
    let mut participants = Vec::new();
    for c in &doc.contracts {
        let mut ps = BTreeSet::new();
        for name in &c.participants {
            let idx = agent_names.iter().position(|a| a == name).ok_or_else(|| {
                Error::UnknownName(format!("contract {:?}: agent {name:?}", c.name))
            })?;
            ps.insert(idx);
        }
        participants.push(ps);
    }
    let frame = Frame::new(agent_names, contract_names, participants)?;
    let ground = frame.contract_ground();

    let mut cfs = Vec::new();
    for (a, agent) in doc.agents.iter().enumerate() {
        cfs.push(resolve_cf(
            &agent.cf,
            frame.incidence(a),
            &ground,
            &agent.name,
        )?);
    }

    let sides: Vec<Option<&str>> = doc.agents.iter().map(|a| a.side.as_deref()).collect();
    let declared = sides.iter().filter(|s| s.is_some()).count();
    let bipartition = if declared == 0 {
        None
    } else if declared < sides.len() {
        return Err(Error::InvalidStructure(
            "either every agent declares a side or none does".into(),
        ));
    } else {
        let mut firms = BTreeSet::new();
        let mut workers = BTreeSet::new();
        for (a, side) in sides.iter().enumerate() {
            match side {
                Some("firm") => {
                    firms.insert(a);
                }
                Some("worker") => {
                    workers.insert(a);
                }
                Some(other) => {
                    return Err(Error::Parse(format!(
                        "agent {:?}: side must be \"firm\" or \"worker\", got {other:?}",
                        doc.agents[a].name
                    )));
                }
                None => unreachable!(),
            }
        }
        Some(Bipartition { firms, workers })
    };
    Problem::new(frame, cfs, bipartition)
}

fn names_value(ground: &GroundSet, menu: Menu) -> Value {
    Value::Array(
        menu.iter()
            .map(|i| Value::String(ground.label(i).to_string()))
            .collect(),
    )
}

fn cf_value(cf: &ChoiceFunction, ground: &GroundSet) -> Value {
    match cf.kind() {
        CfKind::Linear { order } => json!({
            "kind": "linear",
            "order": order.iter().map(|&i| ground.label(i)).collect::<Vec<_>>(),
        }),
        CfKind::Quota { order, quota } => json!({
            "kind": "quota",
            "order": order.iter().map(|&i| ground.label(i)).collect::<Vec<_>>(),
            "q": quota,
        }),
        CfKind::WeakOrder { classes } => json!({
            "kind": "weak",
            "classes": classes
                .iter()
                .map(|c| c.iter().map(|&i| ground.label(i)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        CfKind::Sequential { stages } => json!({
            "kind": "sequential",
            "stages": stages.iter().map(|s| cf_value(s, ground)).collect::<Vec<_>>(),
        }),
        CfKind::Union { parts } => json!({
            "kind": "union",
            "parts": parts.iter().map(|p| cf_value(p, ground)).collect::<Vec<_>>(),
        }),
        CfKind::Integral {
            base,
            base_labels,
            fibers,
        } => {
            let base_ground = GroundSet::new(base_labels.clone()).expect("validated labels");
            json!({
                "kind": "integral",
                "base": cf_value(base, &base_ground),
                "fibers": fibers
                    .iter()
                    .map(|(&x, fiber)| json!({
                        "base_contract": base_labels[x],
                        "members": fiber.domain().iter().map(|i| ground.label(i)).collect::<Vec<_>>(),
                        "cf": cf_value(fiber, ground),
                    }))
                    .collect::<Vec<_>>(),
            })
        }
        CfKind::Table { entries } => json!({
            "kind": "table",
            "entries": entries
                .iter()
                .map(|(&menu, &choice)| json!({
                    "menu": names_value(ground, menu),
                    "choice": names_value(ground, choice),
                }))
                .collect::<Vec<_>>(),
        }),
    }
}

/// Canonical JSON for a problem: sorted keys, declaration order inside lists.
pub fn problem_to_value(p: &Problem) -> Value {
    let frame = p.frame();
    let ground = frame.contract_ground();
    let contracts: Vec<Value> = (0..frame.n_contracts())
        .map(|e| {
            json!({
                "name": frame.contract_name(e),
                "participants": frame
                    .participants(e)
                    .iter()
                    .map(|&a| frame.agent_name(a))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let agents: Vec<Value> = (0..frame.n_agents())
        .map(|a| {
            let mut obj = Map::new();
            obj.insert("cf".into(), cf_value(p.cf(a), &ground));
            obj.insert("name".into(), Value::String(frame.agent_name(a).into()));
            if let Some(bp) = p.bipartition() {
                let side = if bp.firms.contains(&a) { "firm" } else { "worker" };
                obj.insert("side".into(), Value::String(side.into()));
            }
            Value::Object(obj)
        })
        .collect();
    json!({ "agents": agents, "contracts": contracts })
}

/// Render any canonical value as the byte-stable document form.
pub fn to_canonical_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn serialize_problem(p: &Problem) -> String {
    to_canonical_string(&problem_to_value(p))
}

/// Mapping file for a split: modified names keyed to original names plus the
/// floor of every modified contract.
pub fn mapping_to_value(sr: &SplitResult, original: &Problem) -> Value {
    let mframe = sr.modified.frame();
    let oframe = original.frame();
    let agent_map: Map<String, Value> = sr
        .agent_map
        .iter()
        .enumerate()
        .map(|(idx, &orig)| {
            (
                mframe.agent_name(idx).to_string(),
                Value::String(oframe.agent_name(orig).to_string()),
            )
        })
        .collect();
    let contract_map: Map<String, Value> = sr
        .contract_map
        .iter()
        .enumerate()
        .map(|(idx, &orig)| {
            (
                mframe.contract_name(idx).to_string(),
                Value::String(oframe.contract_name(orig).to_string()),
            )
        })
        .collect();
    let floor_of: Map<String, Value> = sr
        .floor_of
        .iter()
        .enumerate()
        .map(|(idx, &floor)| (mframe.contract_name(idx).to_string(), json!(floor)))
        .collect();
    json!({
        "agent_map": agent_map,
        "contract_map": contract_map,
        "floor_of": floor_of,
    })
}

pub fn serialize_mapping(sr: &SplitResult, original: &Problem) -> String {
    to_canonical_string(&mapping_to_value(sr, original))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingDoc {
    agent_map: BTreeMap<String, String>,
    contract_map: BTreeMap<String, String>,
    floor_of: BTreeMap<String, usize>,
}

/// Rebuild a split result from the modified instance plus its mapping file.
pub fn parse_mapping(text: &str, original: &Problem, modified: &Problem) -> Result<SplitResult> {
    let doc: MappingDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mframe = modified.frame();
    let oframe = original.frame();
    let mut agent_map = Vec::with_capacity(mframe.n_agents());
    for idx in 0..mframe.n_agents() {
        let name = mframe.agent_name(idx);
        let orig = doc
            .agent_map
            .get(name)
            .ok_or_else(|| Error::UnknownName(format!("mapping misses agent {name:?}")))?;
        agent_map.push(oframe.agent_index(orig)?);
    }
    let mut contract_map = Vec::with_capacity(mframe.n_contracts());
    let mut floor_of = Vec::with_capacity(mframe.n_contracts());
    for idx in 0..mframe.n_contracts() {
        let name = mframe.contract_name(idx);
        let orig = doc
            .contract_map
            .get(name)
            .ok_or_else(|| Error::UnknownName(format!("mapping misses contract {name:?}")))?;
        contract_map.push(oframe.contract_index(orig)?);
        let floor = doc
            .floor_of
            .get(name)
            .ok_or_else(|| Error::UnknownName(format!("mapping misses floor of {name:?}")))?;
        floor_of.push(*floor);
    }
    // clones are renamed "orig#j"; unsplit agents keep their exact name
    let split_agents = (0..mframe.n_agents())
        .filter(|&idx| mframe.agent_name(idx) != oframe.agent_name(agent_map[idx]))
        .map(|idx| agent_map[idx])
        .collect();
    Ok(SplitResult {
        modified: modified.clone(),
        contract_map,
        agent_map,
        floor_of,
        split_agents,
    })
}
