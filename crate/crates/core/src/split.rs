//! Replacing agents by ordered chains of clones.
//!
//! Splitting a worker `w` whose CF decomposes as `C1 * ... * Cq` duplicates
//! each of its contracts onto q floors, gives floor j to a clone `w#j`
//! carrying `Cj`, and turns every adjacent agent's CF into the integral of
//! its original CF with fibers ordered floor 1 first. [`project_system`] and
//! [`lift_system`] translate contract systems between the two problems;
//! [`verify_equivalence`] checks empirically that they biject and preserve
//! the revealed-preference order.

use std::collections::{BTreeMap, BTreeSet};

use crate::audit::audit_axioms;
use crate::cf::ChoiceFunction;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::menu::Menu;
use crate::problem::{Bipartition, ContractSystem, Frame, Problem};
use crate::stability::{blair_compare_systems, enumerate_stable, is_stable, lattice_join_bipartite};

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub modified: Problem,
    /// Modified contract index → original contract index.
    pub contract_map: Vec<usize>,
    /// Modified agent index → original agent index.
    pub agent_map: Vec<usize>,
    /// Floor of each modified contract (1..q), 0 for untouched contracts.
    pub floor_of: Vec<usize>,
    /// Original indices of the agents that were split.
    pub split_agents: BTreeSet<usize>,
}

impl SplitResult {
    /// Clones of an original agent, in floor order; unsplit agents map to
    /// their single image.
    pub fn clones_of(&self, original_agent: usize) -> Vec<usize> {
        self.agent_map
            .iter()
            .enumerate()
            .filter(|(_, &orig)| orig == original_agent)
            .map(|(idx, _)| idx)
            .collect()
    }

    /// Copies of an original contract, in floor order.
    pub fn copies_of(&self, original_contract: usize) -> Vec<usize> {
        self.contract_map
            .iter()
            .enumerate()
            .filter(|(_, &orig)| orig == original_contract)
            .map(|(idx, _)| idx)
            .collect()
    }

    /// A clone's stage CF pulled back to the original contract indices.
    pub fn stage_in_original_space(&self, clone: usize) -> Result<ChoiceFunction> {
        let map = self.contract_map.clone();
        self.modified.cf(clone).relabel(&move |e| map[e])
    }
}

fn check_stages(
    p: &Problem,
    w: usize,
    stages: &[ChoiceFunction],
    limits: &Limits,
) -> Result<()> {
    if stages.is_empty() {
        return Err(Error::InvalidStructure(format!(
            "agent {:?}: decomposition must have at least one stage",
            p.frame().agent_name(w)
        )));
    }
    let incidence = p.frame().incidence(w);
    for (j, stage) in stages.iter().enumerate() {
        if stage.domain() != incidence {
            return Err(Error::InvalidStructure(format!(
                "agent {:?}: stage {} domain {} differs from incidence {}",
                p.frame().agent_name(w),
                j + 1,
                stage.domain(),
                incidence
            )));
        }
        let report = audit_axioms(stage, limits)?;
        if !report.plott {
            return Err(Error::PreconditionFailed(format!(
                "agent {:?}: stage {} is not a Plott choice function",
                p.frame().agent_name(w),
                j + 1
            )));
        }
    }
    let composed = ChoiceFunction::sequential(stages.to_vec())?;
    if composed.to_table(limits.menu_audit)? != p.cf(w).to_table(limits.menu_audit)? {
        return Err(Error::PreconditionFailed(format!(
            "agent {:?}: declared stages do not compose to its choice function",
            p.frame().agent_name(w)
        )));
    }
    Ok(())
}

/// Split every agent in `decomposition` into one clone per stage. The split
/// agents must be pairwise non-adjacent.
pub fn split_workers(
    p: &Problem,
    decomposition: &BTreeMap<usize, Vec<ChoiceFunction>>,
    limits: &Limits,
) -> Result<SplitResult> {
    for (&w, stages) in decomposition {
        if w >= p.frame().n_agents() {
            return Err(Error::UnknownName(format!("agent index {w}")));
        }
        check_stages(p, w, stages, limits)?;
    }
    for e in 0..p.frame().n_contracts() {
        let shared: Vec<usize> = p
            .frame()
            .participants(e)
            .iter()
            .copied()
            .filter(|a| decomposition.contains_key(a))
            .collect();
        if shared.len() > 1 {
            return Err(Error::Connectivity(format!(
                "split agents {} share contract {:?}",
                shared
                    .iter()
                    .map(|&a| format!("{:?}", p.frame().agent_name(a)))
                    .collect::<Vec<_>>()
                    .join(" and "),
                p.frame().contract_name(e)
            )));
        }
    }
    build_split(p, decomposition)
}

/// The two-clone case: split one agent by a declared pair of stages.
pub fn split_agent_once(
    p: &Problem,
    w: usize,
    stages: [ChoiceFunction; 2],
    limits: &Limits,
) -> Result<SplitResult> {
    let mut decomposition = BTreeMap::new();
    decomposition.insert(w, stages.to_vec());
    split_workers(p, &decomposition, limits)
}

fn build_split(
    p: &Problem,
    decomposition: &BTreeMap<usize, Vec<ChoiceFunction>>,
) -> Result<SplitResult> {
    let frame = p.frame();

    // modified agents: clones in floor order replace each split agent
    let mut agent_names = Vec::new();
    let mut agent_map = Vec::new();
    let mut unsplit_image = vec![usize::MAX; frame.n_agents()];
    let mut clone_image: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for a in 0..frame.n_agents() {
        match decomposition.get(&a) {
            Some(stages) => {
                for j in 1..=stages.len() {
                    clone_image.insert((a, j), agent_names.len());
                    agent_names.push(format!("{}#{}", frame.agent_name(a), j));
                    agent_map.push(a);
                }
            }
            None => {
                unsplit_image[a] = agent_names.len();
                agent_names.push(frame.agent_name(a).to_string());
                agent_map.push(a);
            }
        }
    }

    // modified contracts: floored copies for split owners, otherwise carried
    let mut contract_names = Vec::new();
    let mut contract_map = Vec::new();
    let mut floor_of = Vec::new();
    let mut participants = Vec::new();
    let mut copies: Vec<Vec<usize>> = vec![Vec::new(); frame.n_contracts()];
    for e in 0..frame.n_contracts() {
        let owner = frame
            .participants(e)
            .iter()
            .copied()
            .find(|a| decomposition.contains_key(a));
        match owner {
            Some(w) => {
                let q = decomposition[&w].len();
                for j in 1..=q {
                    let mut ps: BTreeSet<usize> = frame
                        .participants(e)
                        .iter()
                        .filter(|&&a| a != w)
                        .map(|&a| unsplit_image[a])
                        .collect();
                    ps.insert(clone_image[&(w, j)]);
                    copies[e].push(contract_names.len());
                    contract_names.push(format!("{}#{}", frame.contract_name(e), j));
                    contract_map.push(e);
                    floor_of.push(j);
                    participants.push(ps);
                }
            }
            None => {
                copies[e].push(contract_names.len());
                contract_names.push(frame.contract_name(e).to_string());
                contract_map.push(e);
                floor_of.push(0);
                participants.push(
                    frame
                        .participants(e)
                        .iter()
                        .map(|&a| unsplit_image[a])
                        .collect(),
                );
            }
        }
    }
    let new_frame = Frame::new(agent_names, contract_names, participants)?;

    // choice functions
    let mut cfs: Vec<Option<ChoiceFunction>> = vec![None; new_frame.n_agents()];
    for a in 0..frame.n_agents() {
        match decomposition.get(&a) {
            Some(stages) => {
                for (j, stage) in stages.iter().enumerate() {
                    let floor = j + 1;
                    // send each original contract to its floor-j copy
                    let copy_on_floor: Vec<usize> = (0..frame.n_contracts())
                        .map(|e| {
                            copies[e]
                                .get(floor - 1)
                                .copied()
                                .unwrap_or(usize::MAX)
                        })
                        .collect();
                    let relabeled = stage.relabel(&move |e| copy_on_floor[e])?;
                    cfs[clone_image[&(a, floor)]] = Some(relabeled);
                }
            }
            None => {
                let incidence = frame.incidence(a);
                let touched = incidence.iter().any(|e| copies[e].len() > 1 || floor_of[copies[e][0]] > 0);
                let image = unsplit_image[a];
                if touched {
                    let mut fibers = BTreeMap::new();
                    for e in incidence.iter() {
                        fibers.insert(e, ChoiceFunction::linear(copies[e].clone())?);
                    }
                    cfs[image] = Some(ChoiceFunction::integrate(
                        p.cf(a).clone(),
                        frame.contract_names().to_vec(),
                        fibers,
                    )?);
                } else {
                    let map: Vec<usize> = (0..frame.n_contracts())
                        .map(|e| copies[e].first().copied().unwrap_or(usize::MAX))
                        .collect();
                    cfs[image] = Some(p.cf(a).relabel(&move |e| map[e])?);
                }
            }
        }
    }
    let cfs: Vec<ChoiceFunction> = cfs.into_iter().map(|c| c.expect("every agent assigned")).collect();

    let bipartition = p.bipartition().map(|bp| {
        let mut firms = BTreeSet::new();
        let mut workers = BTreeSet::new();
        for (idx, &orig) in agent_map.iter().enumerate() {
            if bp.firms.contains(&orig) {
                firms.insert(idx);
            } else {
                workers.insert(idx);
            }
        }
        Bipartition { firms, workers }
    });

    let modified = Problem::new(new_frame, cfs, bipartition)?;
    Ok(SplitResult {
        modified,
        contract_map,
        agent_map,
        floor_of,
        split_agents: decomposition.keys().copied().collect(),
    })
}

/// π: map a modified-problem system to the original contract space.
pub fn project_system(sr: &SplitResult, modified_system: ContractSystem) -> ContractSystem {
    let mut out = Menu::EMPTY;
    for e in modified_system.iter() {
        out = out.with(sr.contract_map[e]);
    }
    out
}

/// Lift a stable original system to the modified problem: untouched contracts
/// pass through the bijection; each split worker's holding is dealt onto
/// floors stage by stage, floor j taking `Cj` of what floors 1..j-1 left.
pub fn lift_system(
    sr: &SplitResult,
    original: &Problem,
    s: ContractSystem,
) -> Result<ContractSystem> {
    if !is_stable(original, s)?.stable {
        return Err(Error::PreconditionFailed(format!(
            "system {s} is not stable in the original problem"
        )));
    }
    let mut lifted = Menu::EMPTY;
    let split = &sr.split_agents;
    // untouched contracts
    for e in s.iter() {
        let copies = sr.copies_of(e);
        if copies.len() == 1 && sr.floor_of[copies[0]] == 0 {
            lifted = lifted.union(Menu::singleton(copies[0]));
        }
    }
    for &w in split {
        let mut remaining = original.held(s, w);
        for (pos, clone) in sr.clones_of(w).into_iter().enumerate() {
            let stage = sr.stage_in_original_space(clone)?;
            let chosen = stage.choose(remaining)?;
            for e in chosen.iter() {
                lifted = lifted.with(sr.copies_of(e)[pos]);
            }
            remaining = remaining.minus(chosen);
        }
    }
    debug_assert_eq!(project_system(sr, lifted), s);
    Ok(lifted)
}

/// Witness of an equivalence failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub note: String,
    pub modified: Option<ContractSystem>,
    pub original: Option<ContractSystem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    /// π maps stable systems of the modified problem bijectively onto the
    /// stable systems of the original, injectively on each system.
    pub bijection_ok: bool,
    /// The revealed-preference order is carried forward through π.
    pub monotone_ok: bool,
    /// Order isomorphism plus stable joins; only evaluated for bipartite
    /// problems with cardinally monotone firms and linear modified workers.
    pub iso_ok: Option<bool>,
    /// (modified stable system, its projection), in subset order.
    pub pairing: Vec<(ContractSystem, ContractSystem)>,
    pub counterexample: Option<Counterexample>,
}

/// Core engine: compare stable families through an arbitrary projection.
pub fn verify_projection(
    original: &Problem,
    modified: &Problem,
    contract_map: &[usize],
    agent_map: &[usize],
    limits: &Limits,
) -> Result<EquivalenceReport> {
    let original_stable = enumerate_stable(original, limits)?;
    let modified_stable = enumerate_stable(modified, limits)?;
    let project = |s: Menu| -> Menu {
        let mut out = Menu::EMPTY;
        for e in s.iter() {
            out = out.with(contract_map[e]);
        }
        out
    };

    let mut counterexample = None;
    let mut bijection_ok = true;
    let mut pairing = Vec::new();
    let mut images = BTreeSet::new();
    for &s in &modified_stable {
        let image = project(s);
        pairing.push((s, image));
        if image.len() != s.len() {
            bijection_ok = false;
            counterexample.get_or_insert(Counterexample {
                note: "projection is not injective on a stable system".into(),
                modified: Some(s),
                original: Some(image),
            });
            continue;
        }
        if !original_stable.contains(&image) {
            bijection_ok = false;
            counterexample.get_or_insert(Counterexample {
                note: "projection of a stable system is not stable in the original".into(),
                modified: Some(s),
                original: Some(image),
            });
            continue;
        }
        if !images.insert(image) {
            bijection_ok = false;
            counterexample.get_or_insert(Counterexample {
                note: "two stable systems project to the same original system".into(),
                modified: Some(s),
                original: Some(image),
            });
        }
    }
    if bijection_ok {
        for &s in &original_stable {
            if !images.contains(&s) {
                bijection_ok = false;
                counterexample.get_or_insert(Counterexample {
                    note: "an original stable system has no stable preimage".into(),
                    modified: None,
                    original: Some(s),
                });
                break;
            }
        }
    }

    // avatars: modified agents that are the unique image of their original
    let mut multiplicity: BTreeMap<usize, usize> = BTreeMap::new();
    for &orig in agent_map {
        *multiplicity.entry(orig).or_default() += 1;
    }
    let avatars: Vec<(usize, usize)> = agent_map
        .iter()
        .enumerate()
        .filter(|(_, &orig)| multiplicity[&orig] == 1)
        .map(|(idx, &orig)| (idx, orig))
        .collect();

    let mut monotone_ok = true;
    'mono: for &s in &modified_stable {
        for &t in &modified_stable {
            for &(avatar, orig) in &avatars {
                if blair_compare_systems(modified, avatar, s, t)?
                    && !blair_compare_systems(original, orig, project(s), project(t))?
                {
                    monotone_ok = false;
                    counterexample.get_or_insert(Counterexample {
                        note: format!(
                            "agent {:?} prefers the projection order differently",
                            modified.frame().agent_name(avatar)
                        ),
                        modified: Some(s),
                        original: Some(project(s)),
                    });
                    break 'mono;
                }
            }
        }
    }

    Ok(EquivalenceReport {
        bijection_ok,
        monotone_ok,
        iso_ok: None,
        pairing,
        counterexample,
    })
}

/// Split and verify: the bijection via project/lift, the forward monotone
/// map, and (under the lattice preconditions) the order isomorphism and join
/// stability.
pub fn verify_equivalence(
    p: &Problem,
    decomposition: &BTreeMap<usize, Vec<ChoiceFunction>>,
    limits: &Limits,
) -> Result<EquivalenceReport> {
    let sr = split_workers(p, decomposition, limits)?;
    verify_split(p, &sr, limits)
}

/// Verify an already-built split.
pub fn verify_split(p: &Problem, sr: &SplitResult, limits: &Limits) -> Result<EquivalenceReport> {
    let mut report = verify_projection(
        p,
        &sr.modified,
        &sr.contract_map,
        &sr.agent_map,
        limits,
    )?;

    let original_stable = enumerate_stable(p, limits)?;
    let modified_stable = enumerate_stable(&sr.modified, limits)?;

    // lift is the two-sided inverse of projection on stable systems
    if report.bijection_ok {
        for &s in &modified_stable {
            let lifted = lift_system(sr, p, project_system(sr, s))?;
            if lifted != s {
                report.bijection_ok = false;
                report.counterexample.get_or_insert(Counterexample {
                    note: "lift of the projection differs from the stable system".into(),
                    modified: Some(s),
                    original: Some(project_system(sr, s)),
                });
            }
        }
        for &s in &original_stable {
            let lifted = lift_system(sr, p, s)?;
            if project_system(sr, lifted) != s || !modified_stable.contains(&lifted) {
                report.bijection_ok = false;
                report.counterexample.get_or_insert(Counterexample {
                    note: "lift of a stable system is not a stable preimage".into(),
                    modified: Some(lifted),
                    original: Some(s),
                });
            }
        }
    }

    // acceptability criterion on every stable modified system: each avatar's
    // held set maps bijectively onto an acceptable original held set
    let split = &sr.split_agents;
    if report.bijection_ok {
        'lemma: for &s in &modified_stable {
            for (idx, &orig) in sr.agent_map.iter().enumerate() {
                if split.contains(&orig) {
                    continue;
                }
                let held = sr.modified.held(s, idx);
                let image = project_system(sr, held);
                if image.len() != held.len() || !p.cf(orig).is_acceptable(image)? {
                    report.bijection_ok = false;
                    report.counterexample.get_or_insert(Counterexample {
                        note: format!(
                            "agent {:?}: held copies do not match an acceptable original set",
                            sr.modified.frame().agent_name(idx)
                        ),
                        modified: Some(s),
                        original: Some(project_system(sr, s)),
                    });
                    break 'lemma;
                }
            }
        }
    }

    // per-floor acceptability and no cross-floor desirability on lifts
    if report.bijection_ok {
        'floors: for &s in &original_stable {
            for &w in split {
                let clones = sr.clones_of(w);
                let mut parts = Vec::new();
                let mut remaining = p.held(s, w);
                for &clone in &clones {
                    let stage = sr.stage_in_original_space(clone)?;
                    let chosen = stage.choose(remaining)?;
                    parts.push((clone, chosen));
                    remaining = remaining.minus(chosen);
                }
                for (i, &(clone, part)) in parts.iter().enumerate() {
                    let stage = sr.stage_in_original_space(clone)?;
                    if stage.choose(part)? != part {
                        report.bijection_ok = false;
                        report.counterexample.get_or_insert(Counterexample {
                            note: format!(
                                "floor {} of a lift is not acceptable for its stage",
                                i + 1
                            ),
                            modified: None,
                            original: Some(s),
                        });
                        break 'floors;
                    }
                    for &(_, later) in &parts[i + 1..] {
                        for e in later.iter() {
                            if stage.choose(part.with(e))? != part {
                                report.bijection_ok = false;
                                report.counterexample.get_or_insert(Counterexample {
                                    note: format!(
                                        "floor {} would poach a later floor's contract",
                                        i + 1
                                    ),
                                    modified: None,
                                    original: Some(s),
                                });
                                break 'floors;
                            }
                        }
                    }
                }
            }
        }
    }

    report.iso_ok = iso_check(p, sr, &modified_stable, limits)?;
    if report.iso_ok == Some(false) && report.counterexample.is_none() {
        report.counterexample = Some(Counterexample {
            note: "order isomorphism or join stability failed".into(),
            modified: None,
            original: None,
        });
    }
    Ok(report)
}

/// Isomorphism scope: bipartite pair contracts, cardinally monotone Plott
/// firms, linear modified workers. Outside it no lattice claim is made.
fn iso_check(
    p: &Problem,
    sr: &SplitResult,
    modified_stable: &[ContractSystem],
    limits: &Limits,
) -> Result<Option<bool>> {
    if p.require_pair_bipartite().is_err() || sr.modified.require_pair_bipartite().is_err() {
        return Ok(None);
    }
    let bp = p.bipartition().expect("checked above");
    for &m in &bp.firms {
        let report = audit_axioms(p.cf(m), limits)?;
        if !report.plott || !report.cardinally_monotone {
            return Ok(None);
        }
    }
    let mbp = sr.modified.bipartition().expect("checked above");
    for &w in &mbp.workers {
        let report = audit_axioms(sr.modified.cf(w), limits)?;
        let expect = if sr.modified.cf(w).domain().is_empty() {
            0
        } else {
            1
        };
        if !report.plott || report.quota != Some(expect) {
            return Ok(None);
        }
    }

    let project = |s: Menu| project_system(sr, s);
    // the bijection is an order isomorphism for the all-firm order
    for &s in modified_stable {
        for &t in modified_stable {
            let up = crate::stability::blair_leq_all_firms(&sr.modified, s, t)?;
            let down = crate::stability::blair_leq_all_firms(p, project(s), project(t))?;
            if up != down {
                return Ok(Some(false));
            }
        }
    }
    // joins computed by the firm formula are stable and dominate both
    for &s in modified_stable {
        for &t in modified_stable {
            let join = lattice_join_bipartite(&sr.modified, s, t, limits)?;
            if !is_stable(&sr.modified, join)?.stable
                || !crate::stability::blair_leq_all_firms(&sr.modified, s, join)?
                || !crate::stability::blair_leq_all_firms(&sr.modified, t, join)?
            {
                return Ok(Some(false));
            }
        }
    }
    Ok(Some(true))
}

/// Outcome of the deliberately unchecked simultaneous two-sided split.
#[derive(Clone, Debug)]
pub struct TwoSidedSplit {
    pub modified: Problem,
    pub contract_map: Vec<usize>,
    pub agent_map: Vec<usize>,
}

/// Split both sides of pair contracts at once, skipping the connectivity
/// check that [`split_workers`] enforces. Contracts between two split agents
/// become a grid of copies `e#i#j`; each clone's CF is the integral of its
/// stage over the other side's floors (level 1 best). This construction does
/// not preserve stable systems; it exists to demonstrate the failure.
pub fn two_sided_split_unchecked(
    p: &Problem,
    decomposition: &BTreeMap<usize, Vec<ChoiceFunction>>,
    limits: &Limits,
) -> Result<TwoSidedSplit> {
    let frame = p.frame();
    for (&w, stages) in decomposition {
        if w >= frame.n_agents() {
            return Err(Error::UnknownName(format!("agent index {w}")));
        }
        check_stages(p, w, stages, limits)?;
    }
    for e in 0..frame.n_contracts() {
        let split_count = frame
            .participants(e)
            .iter()
            .filter(|a| decomposition.contains_key(a))
            .count();
        if split_count > 2 {
            return Err(Error::InvalidStructure(format!(
                "contract {:?} has more than two split participants",
                frame.contract_name(e)
            )));
        }
    }

    let mut agent_names = Vec::new();
    let mut agent_map = Vec::new();
    let mut unsplit_image = vec![usize::MAX; frame.n_agents()];
    let mut clone_image: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for a in 0..frame.n_agents() {
        match decomposition.get(&a) {
            Some(stages) => {
                for j in 1..=stages.len() {
                    clone_image.insert((a, j), agent_names.len());
                    agent_names.push(format!("{}#{}", frame.agent_name(a), j));
                    agent_map.push(a);
                }
            }
            None => {
                unsplit_image[a] = agent_names.len();
                agent_names.push(frame.agent_name(a).to_string());
                agent_map.push(a);
            }
        }
    }

    let mut contract_names = Vec::new();
    let mut contract_map = Vec::new();
    let mut participants = Vec::new();
    // per original contract, copies with the floor vector of split owners
    let mut copies: Vec<Vec<usize>> = vec![Vec::new(); frame.n_contracts()];
    for e in 0..frame.n_contracts() {
        let owners: Vec<usize> = frame
            .participants(e)
            .iter()
            .copied()
            .filter(|a| decomposition.contains_key(a))
            .collect();
        let floors: Vec<Vec<usize>> = owners
            .iter()
            .map(|w| (1..=decomposition[w].len()).collect())
            .collect();
        let mut vectors = vec![Vec::new()];
        for level in &floors {
            let mut next = Vec::new();
            for v in &vectors {
                for &j in level {
                    let mut v2 = v.clone();
                    v2.push(j);
                    next.push(v2);
                }
            }
            vectors = next;
        }
        for v in vectors {
            let mut name = frame.contract_name(e).to_string();
            for j in &v {
                name.push_str(&format!("#{j}"));
            }
            let mut ps: BTreeSet<usize> = frame
                .participants(e)
                .iter()
                .filter(|a| !decomposition.contains_key(a))
                .map(|&a| unsplit_image[a])
                .collect();
            for (w, &j) in owners.iter().zip(&v) {
                ps.insert(clone_image[&(*w, j)]);
            }
            copies[e].push(contract_names.len());
            contract_names.push(name);
            contract_map.push(e);
            participants.push(ps);
        }
    }
    let new_frame = Frame::new(agent_names, contract_names, participants)?;

    let mut cfs: Vec<Option<ChoiceFunction>> = vec![None; new_frame.n_agents()];
    for a in 0..frame.n_agents() {
        let incidence = frame.incidence(a);
        match decomposition.get(&a) {
            Some(stages) => {
                for (j, stage) in stages.iter().enumerate() {
                    let clone = clone_image[&(a, j + 1)];
                    let clone_incidence = new_frame.incidence(clone);
                    let mut fibers = BTreeMap::new();
                    for e in incidence.iter() {
                        let mine: Vec<usize> = copies[e]
                            .iter()
                            .copied()
                            .filter(|&c| clone_incidence.contains(c))
                            .collect();
                        fibers.insert(e, ChoiceFunction::linear(mine)?);
                    }
                    cfs[clone] = Some(ChoiceFunction::integrate(
                        stage.clone(),
                        frame.contract_names().to_vec(),
                        fibers,
                    )?);
                }
            }
            None => {
                let image = unsplit_image[a];
                let touched = incidence.iter().any(|e| copies[e].len() > 1);
                if touched {
                    let mut fibers = BTreeMap::new();
                    for e in incidence.iter() {
                        fibers.insert(e, ChoiceFunction::linear(copies[e].clone())?);
                    }
                    cfs[image] = Some(ChoiceFunction::integrate(
                        p.cf(a).clone(),
                        frame.contract_names().to_vec(),
                        fibers,
                    )?);
                } else {
                    let map: Vec<usize> = (0..frame.n_contracts())
                        .map(|e| copies[e].first().copied().unwrap_or(usize::MAX))
                        .collect();
                    cfs[image] = Some(p.cf(a).relabel(&move |e| map[e])?);
                }
            }
        }
    }
    let cfs: Vec<ChoiceFunction> = cfs
        .into_iter()
        .map(|c| c.expect("every agent assigned"))
        .collect();
    let modified = Problem::new(new_frame, cfs, None)?;
    Ok(TwoSidedSplit {
        modified,
        contract_map,
        agent_map,
    })
}
