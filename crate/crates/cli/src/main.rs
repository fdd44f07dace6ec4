//! `plott`: audit choice functions, check and enumerate stable contract
//! systems, run the worker-return solver, split sequential agents into
//! linear clones, and verify the split preserves the stable systems.
//!
//! Machine-readable output is a single JSON document on stdout; diagnostics
//! and timing go to stderr. Exit codes: 0 success / property holds,
//! 1 checked property false, 2 input or precondition error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use plott_core::format::{
    parse_instance, serialize_mapping, serialize_problem, to_canonical_string,
};
use plott_core::{
    audit_axioms, find_sequential_decomposition, quota_as_stages, AxiomReport, CfKind,
    ChoiceFunction, Limits, Menu, Problem, StepOutcome,
};

#[derive(Parser)]
#[command(name = "plott", version, about = "Choice functions and stable contract systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Choice-function tools.
    #[command(subcommand)]
    Cf(CfCmd),
    /// Stability tools.
    #[command(subcommand)]
    Stable(StableCmd),
    /// Split sequential workers into chains of linear clones.
    Split(SplitArgs),
    /// Split, enumerate both problems, and verify they are equivalent.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum CfCmd {
    /// Exhaustively audit the axioms of agents' choice functions.
    Audit {
        file: PathBuf,
        /// Audit one agent instead of all.
        #[arg(long)]
        agent: Option<String>,
    },
    /// Search for a serial decomposition into linear orders.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        agent: String,
        /// Longest decomposition considered (default: domain size).
        #[arg(long)]
        max_q: Option<usize>,
    },
}

#[derive(Subcommand)]
enum StableCmd {
    /// Check one contract system for stability.
    Check {
        file: PathBuf,
        /// Comma-separated contract names (empty for the empty system).
        #[arg(long)]
        system: String,
    },
    /// Enumerate every stable system by brute force.
    Enumerate { file: PathBuf },
    /// Build a stable system by returning workers one at a time.
    Solve {
        file: PathBuf,
        /// Comma-separated worker order (default: declaration order).
        #[arg(long)]
        order: Option<String>,
    },
    /// Compare two systems in the revealed-preference order.
    Compare {
        file: PathBuf,
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        /// Compare for one agent instead of all firms.
        #[arg(long)]
        agent: Option<String>,
    },
}

#[derive(Args)]
struct SplitArgs {
    file: PathBuf,
    /// Comma-separated workers to split (default: declared workers with
    /// quota or sequential choice functions).
    #[arg(long)]
    workers: Option<String>,
    /// Where to write the modified instance.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the name mapping.
    #[arg(long)]
    map: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    workers: Option<String>,
}

fn limits_from_env() -> anyhow::Result<Limits> {
    let mut limits = Limits::default();
    let read = |name: &str| -> anyhow::Result<Option<usize>> {
        match std::env::var(name) {
            Ok(v) => Ok(Some(
                v.parse()
                    .with_context(|| format!("{name} must be a number, got {v:?}"))?,
            )),
            Err(_) => Ok(None),
        }
    };
    if let Some(v) = read("PLOTT_MENU_AUDIT_LIMIT")? {
        limits.menu_audit = v;
    }
    if let Some(v) = read("PLOTT_PAIR_AUDIT_LIMIT")? {
        limits.pair_audit = v;
    }
    if let Some(v) = read("PLOTT_ENUM_LIMIT")? {
        limits.enumeration = v;
    }
    if let Some(v) = read("PLOTT_DECOMPOSE_LIMIT")? {
        limits.decompose = v;
    }
    Ok(limits)
}

fn load(file: &PathBuf) -> anyhow::Result<Problem> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading {}", file.display()))?;
    Ok(parse_instance(&text)?)
}

fn parse_names(list: &str) -> Vec<&str> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn system_from(p: &Problem, list: &str) -> anyhow::Result<Menu> {
    let mut menu = Menu::EMPTY;
    for name in parse_names(list) {
        menu = menu.with(p.frame().contract_index(name)?);
    }
    Ok(menu)
}

fn system_value(p: &Problem, s: Menu) -> Value {
    json!({
        "indices": s.indices(),
        "names": p.frame().system_names(s),
    })
}

fn report_value(p: &Problem, agent: &str, report: &AxiomReport) -> Value {
    let pair = |w: &Option<plott_core::MenuPair>| match w {
        Some(pair) => json!({"a": system_value(p, pair.a), "b": system_value(p, pair.b)}),
        None => Value::Null,
    };
    json!({
        "agent": agent,
        "consistent": report.consistent,
        "substitutable": report.substitutable,
        "path_independent": report.path_independent,
        "plott": report.plott,
        "cardinally_monotone": report.cardinally_monotone,
        "nonempty_valued": report.nonempty_valued,
        "quota": report.quota,
        "witnesses": {
            "consistency": pair(&report.witnesses.consistency),
            "substitution": pair(&report.witnesses.substitution),
            "path_independence": pair(&report.witnesses.path_independence),
            "cardinal_monotonicity": pair(&report.witnesses.cardinal_monotonicity),
            "nonempty": report.witnesses.nonempty.map(|m| system_value(p, m)),
        },
    })
}

/// Declared or default stage list for one worker.
fn stages_for(p: &Problem, agent: usize) -> Vec<ChoiceFunction> {
    let cf = p.cf(agent);
    if let Some(stages) = quota_as_stages(cf) {
        return stages;
    }
    if let CfKind::Sequential { stages } = cf.kind() {
        return stages.clone();
    }
    vec![cf.clone()]
}

fn split_decomposition(
    p: &Problem,
    workers: &Option<String>,
) -> anyhow::Result<BTreeMap<usize, Vec<ChoiceFunction>>> {
    let mut decomposition = BTreeMap::new();
    match workers {
        Some(list) => {
            for name in parse_names(list) {
                let a = p.frame().agent_index(name)?;
                decomposition.insert(a, stages_for(p, a));
            }
        }
        None => {
            let bp = p.bipartition().ok_or_else(|| {
                anyhow!("no workers given and the instance declares no sides")
            })?;
            for &w in &bp.workers {
                if matches!(
                    p.cf(w).kind(),
                    CfKind::Quota { .. } | CfKind::Sequential { .. }
                ) {
                    decomposition.insert(w, stages_for(p, w));
                }
            }
        }
    }
    if decomposition.is_empty() {
        return Err(anyhow!("nothing to split: no quota or sequential workers"));
    }
    Ok(decomposition)
}

fn run(cmd: &Cmd, limits: &Limits) -> anyhow::Result<(Value, u8)> {
    match cmd {
        Cmd::Cf(CfCmd::Audit { file, agent }) => {
            let p = load(file)?;
            let agents: Vec<usize> = match agent {
                Some(name) => vec![p.frame().agent_index(name)?],
                None => (0..p.frame().n_agents()).collect(),
            };
            let mut reports = Vec::new();
            let mut all_plott = true;
            for a in agents {
                let report = audit_axioms(p.cf(a), limits)?;
                all_plott &= report.plott;
                reports.push(report_value(&p, p.frame().agent_name(a), &report));
            }
            Ok((json!({"reports": reports}), u8::from(!all_plott)))
        }
        Cmd::Cf(CfCmd::Decompose { file, agent, max_q }) => {
            let p = load(file)?;
            let a = p.frame().agent_index(agent)?;
            let cf = p.cf(a);
            let max_q = max_q.unwrap_or_else(|| cf.domain().len().max(1));
            let found = find_sequential_decomposition(cf, max_q, limits)?;
            let ground = p.frame().contract_ground();
            match found {
                Some(stages) => {
                    let orders: Vec<Vec<String>> = stages
                        .iter()
                        .map(|stage| match stage.kind() {
                            CfKind::Linear { order } => {
                                order.iter().map(|&i| ground.label(i).to_string()).collect()
                            }
                            _ => unreachable!("search returns linear stages"),
                        })
                        .collect();
                    Ok((json!({"agent": agent, "stages": orders}), 0))
                }
                None => Ok((json!({"agent": agent, "stages": Value::Null}), 1)),
            }
        }
        Cmd::Stable(StableCmd::Check { file, system }) => {
            let p = load(file)?;
            let s = system_from(&p, system)?;
            let report = plott_core::is_stable(&p, s)?;
            let violations: Vec<&str> = report
                .acceptability_violations
                .iter()
                .map(|&a| p.frame().agent_name(a))
                .collect();
            Ok((
                json!({
                    "system": system_value(&p, s),
                    "stable": report.stable,
                    "acceptability_violations": violations,
                    "blocking": system_value(&p, report.blocking),
                }),
                u8::from(!report.stable),
            ))
        }
        Cmd::Stable(StableCmd::Enumerate { file }) => {
            let p = load(file)?;
            let family = plott_core::enumerate_stable(&p, limits)?;
            Ok((
                json!({
                    "count": family.len(),
                    "systems": family
                        .iter()
                        .map(|&s| system_value(&p, s))
                        .collect::<Vec<_>>(),
                }),
                0,
            ))
        }
        Cmd::Stable(StableCmd::Solve { file, order }) => {
            let p = load(file)?;
            let order_indices: Option<Vec<usize>> = match order {
                Some(list) => Some(
                    parse_names(list)
                        .into_iter()
                        .map(|n| p.frame().agent_index(n))
                        .collect::<plott_core::Result<_>>()?,
                ),
                None => None,
            };
            let out = plott_core::solve_by_worker_return(&p, order_indices.as_deref(), limits)?;
            let trace: Vec<Value> = out
                .trace
                .iter()
                .map(|step| {
                    let mut obj = json!({
                        "worker": p.frame().agent_name(step.worker),
                        "situation": step.outcome.situation(),
                        "system": system_value(&p, step.outcome.system()),
                    });
                    if let StepOutcome::Displaced {
                        evicted, rejected, ..
                    } = &step.outcome
                    {
                        obj["evicted"] = json!(p.frame().agent_name(*evicted));
                        obj["rejected"] = json!(p.frame().contract_name(*rejected));
                    }
                    obj
                })
                .collect();
            Ok((
                json!({
                    "system": system_value(&p, out.system),
                    "trace": trace,
                }),
                0,
            ))
        }
        Cmd::Stable(StableCmd::Compare { file, s, t, agent }) => {
            let p = load(file)?;
            let s = system_from(&p, s)?;
            let t = system_from(&p, t)?;
            match agent {
                Some(name) => {
                    let a = p.frame().agent_index(name)?;
                    let forward = plott_core::blair_compare_systems(&p, a, s, t)?;
                    let backward = plott_core::blair_compare_systems(&p, a, t, s)?;
                    Ok((
                        json!({
                            "agent": name,
                            "s": system_value(&p, s),
                            "t": system_value(&p, t),
                            "s_leq_t": forward,
                            "t_leq_s": backward,
                        }),
                        u8::from(!forward),
                    ))
                }
                None => {
                    let bp = p.bipartition().ok_or_else(|| {
                        anyhow!("instance declares no firm side; pass --agent")
                    })?;
                    let per_firm: Vec<Value> = bp
                        .firms
                        .iter()
                        .map(|&m| -> anyhow::Result<Value> {
                            Ok(json!({
                                "agent": p.frame().agent_name(m),
                                "s_leq_t": plott_core::blair_compare_systems(&p, m, s, t)?,
                                "t_leq_s": plott_core::blair_compare_systems(&p, m, t, s)?,
                            }))
                        })
                        .collect::<anyhow::Result<_>>()?;
                    let forward = plott_core::blair_leq_all_firms(&p, s, t)?;
                    let backward = plott_core::blair_leq_all_firms(&p, t, s)?;
                    Ok((
                        json!({
                            "s": system_value(&p, s),
                            "t": system_value(&p, t),
                            "per_firm": per_firm,
                            "s_leq_t": forward,
                            "t_leq_s": backward,
                        }),
                        u8::from(!forward),
                    ))
                }
            }
        }
        Cmd::Split(args) => {
            let p = load(&args.file)?;
            let decomposition = split_decomposition(&p, &args.workers)?;
            let sr = plott_core::split_workers(&p, &decomposition, limits)?;
            std::fs::write(&args.out, serialize_problem(&sr.modified))
                .with_context(|| format!("writing {}", args.out.display()))?;
            std::fs::write(&args.map, serialize_mapping(&sr, &p))
                .with_context(|| format!("writing {}", args.map.display()))?;
            Ok((
                json!({
                    "out": args.out.display().to_string(),
                    "map": args.map.display().to_string(),
                    "agents": sr.modified.frame().n_agents(),
                    "contracts": sr.modified.frame().n_contracts(),
                    "split": sr.split_agents
                        .iter()
                        .map(|&w| p.frame().agent_name(w))
                        .collect::<Vec<_>>(),
                }),
                0,
            ))
        }
        Cmd::Verify(args) => {
            let p = load(&args.file)?;
            let decomposition = split_decomposition(&p, &args.workers)?;
            let report = plott_core::verify_equivalence(&p, &decomposition, limits)?;
            let ok =
                report.bijection_ok && report.monotone_ok && report.iso_ok != Some(false);
            let counterexample = report.counterexample.as_ref().map(|ce| {
                json!({
                    "note": ce.note,
                    "modified": ce.modified.map(|m| m.indices()),
                    "original": ce.original.map(|m| system_value(&p, m)),
                })
            });
            Ok((
                json!({
                    "bijection_ok": report.bijection_ok,
                    "monotone_ok": report.monotone_ok,
                    "iso_ok": report.iso_ok,
                    "pairing": report.pairing
                        .iter()
                        .map(|&(m, o)| json!({
                            "modified": m.indices(),
                            "original": system_value(&p, o),
                        }))
                        .collect::<Vec<_>>(),
                    "counterexample": counterexample,
                }),
                u8::from(!ok),
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let limits = match limits_from_env() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cli.cmd, &limits) {
        Ok((result, code)) => {
            let doc = json!({
                "command": argv,
                "result": result,
                "status": code,
            });
            print!("{}", to_canonical_string(&doc));
            eprintln!("elapsed: {} ms", started.elapsed().as_millis());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("elapsed: {} ms", started.elapsed().as_millis());
            ExitCode::from(2)
        }
    }
}
