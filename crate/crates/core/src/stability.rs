//! Stability checking, brute-force enumeration, and the inductive
//! worker-return solver for bipartite pair-contract problems.

use std::collections::{BTreeMap, BTreeSet};

use crate::audit::audit_axioms;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::menu::Menu;
use crate::problem::{ContractSystem, Problem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    /// Agents whose held set is not acceptable.
    pub acceptability_violations: Vec<usize>,
    /// Contracts outside the system that are desirable for every participant.
    pub blocking: Menu,
}

/// Per-agent evaluation with tabulated lookups where the domain allows it.
struct Evaluator<'a> {
    problem: &'a Problem,
    tables: Vec<Option<BTreeMap<Menu, Menu>>>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a Problem, limits: &Limits) -> Evaluator<'a> {
        let tables = problem
            .cfs()
            .iter()
            .map(|cf| {
                if cf.domain().len() <= limits.menu_audit {
                    match cf.to_table(limits.menu_audit) {
                        Ok(t) => match t.kind() {
                            crate::cf::CfKind::Table { entries } => Some(entries.clone()),
                            _ => None,
                        },
                        Err(_) => None,
                    }
                } else {
                    None
                }
            })
            .collect();
        Evaluator { problem, tables }
    }

    fn choose(&self, a: usize, menu: Menu) -> Result<Menu> {
        match &self.tables[a] {
            Some(entries) => entries.get(&menu).copied().ok_or(Error::DomainViolation {
                menu,
                domain: self.problem.cf(a).domain(),
            }),
            None => self.problem.cf(a).choose(menu),
        }
    }

    fn report(&self, s: ContractSystem) -> Result<StabilityReport> {
        let frame = self.problem.frame();
        let mut violations = Vec::new();
        for a in 0..frame.n_agents() {
            let held = self.problem.held(s, a);
            if self.choose(a, held)? != held {
                violations.push(a);
            }
        }
        let mut blocking = Menu::EMPTY;
        for e in 0..frame.n_contracts() {
            if s.contains(e) {
                continue;
            }
            let mut desired_by_all = true;
            for &a in frame.participants(e) {
                let held = self.problem.held(s, a);
                if !self.choose(a, held.with(e))?.contains(e) {
                    desired_by_all = false;
                    break;
                }
            }
            if desired_by_all {
                blocking = blocking.with(e);
            }
        }
        Ok(StabilityReport {
            stable: violations.is_empty() && blocking.is_empty(),
            acceptability_violations: violations,
            blocking,
        })
    }
}

/// Full stability report for `s`: per-agent acceptability plus the set of
/// blocking contracts.
pub fn is_stable(p: &Problem, s: ContractSystem) -> Result<StabilityReport> {
    if !s.is_subset_of(p.frame().all_contracts()) {
        return Err(Error::DomainViolation {
            menu: s,
            domain: p.frame().all_contracts(),
        });
    }
    Evaluator::new(p, &Limits::default()).report(s)
}

/// Brute-force oracle: every stable subset of the contract set, in ascending
/// subset order.
pub fn enumerate_stable(p: &Problem, limits: &Limits) -> Result<Vec<ContractSystem>> {
    let n = p.frame().n_contracts();
    if n > limits.enumeration {
        return Err(Error::LimitExceeded {
            what: "stable-set enumeration",
            limit: limits.enumeration,
            actual: n,
        });
    }
    let eval = Evaluator::new(p, limits);
    let mut out = Vec::new();
    for s in p.frame().all_contracts().subsets() {
        if eval.report(s)?.stable {
            out.push(s);
        }
    }
    Ok(out)
}

/// `S ⪯_a T`: agent `a` weakly prefers `T`, i.e. `C_a(S(a) ∪ T(a)) ⊆ T(a)`.
pub fn blair_compare_systems(
    p: &Problem,
    a: usize,
    s: ContractSystem,
    t: ContractSystem,
) -> Result<bool> {
    if a >= p.frame().n_agents() {
        return Err(Error::UnknownName(format!("agent index {a}")));
    }
    let sa = p.held(s, a);
    let ta = p.held(t, a);
    Ok(p.cf(a).choose(sa.union(ta))?.is_subset_of(ta))
}

/// `S ⪯_M T`: the conjunction of `⪯_m` over all firms.
pub fn blair_leq_all_firms(p: &Problem, s: ContractSystem, t: ContractSystem) -> Result<bool> {
    let bp = p
        .bipartition()
        .ok_or_else(|| Error::PreconditionFailed("problem declares no firm side".into()))?;
    for &m in &bp.firms {
        if !blair_compare_systems(p, m, s, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One reinstatement step outcome; the numbering follows the situation the
/// step lands in (0: no interest, 1: accepted outright, 2: one contract
/// displaced and its worker evicted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    NoInterest {
        system: ContractSystem,
    },
    Accepted {
        system: ContractSystem,
    },
    Displaced {
        system: ContractSystem,
        evicted: usize,
        rejected: usize,
    },
}

impl StepOutcome {
    pub fn situation(&self) -> u8 {
        match self {
            StepOutcome::NoInterest { .. } => 0,
            StepOutcome::Accepted { .. } => 1,
            StepOutcome::Displaced { .. } => 2,
        }
    }

    pub fn system(&self) -> ContractSystem {
        match self {
            StepOutcome::NoInterest { system }
            | StepOutcome::Accepted { system }
            | StepOutcome::Displaced { system, .. } => *system,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    /// Worker being returned.
    pub worker: usize,
    pub outcome: StepOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub system: ContractSystem,
    pub trace: Vec<TraceStep>,
}

/// Stability of `s` in the subproblem where `absent` workers (and their
/// contracts) are removed, evaluated in the full index space.
fn stable_without(p: &Problem, s: ContractSystem, absent: &BTreeSet<usize>) -> Result<bool> {
    let frame = p.frame();
    let mut gone = Menu::EMPTY;
    for &w in absent {
        gone = gone.union(frame.incidence(w));
    }
    if !s.intersect(gone).is_empty() {
        return Ok(false);
    }
    for a in 0..frame.n_agents() {
        if absent.contains(&a) {
            continue;
        }
        let held = p.held(s, a);
        if p.cf(a).choose(held)? != held {
            return Ok(false);
        }
    }
    for e in 0..frame.n_contracts() {
        if s.contains(e) || gone.contains(e) {
            continue;
        }
        let mut desired = true;
        for &a in frame.participants(e) {
            if !p.cf(a).is_desirable(p.held(s, a), e)? {
                desired = false;
                break;
            }
        }
        if desired {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Preconditions shared by the reinstatement machinery: declared sides with
/// pair contracts, Plott cardinally monotone firms, linear workers.
fn check_solver_preconditions(p: &Problem, workers: &[usize], limits: &Limits) -> Result<()> {
    let bp = p.require_pair_bipartite()?;
    for &m in &bp.firms {
        let report = audit_axioms(p.cf(m), limits)?;
        if !report.plott {
            return Err(Error::PreconditionFailed(format!(
                "firm {:?} is not a Plott choice function",
                p.frame().agent_name(m)
            )));
        }
        if !report.cardinally_monotone {
            let w = report.witnesses.cardinal_monotonicity;
            return Err(Error::PreconditionFailed(format!(
                "firm {:?} is not cardinally monotone{}",
                p.frame().agent_name(m),
                w.map(|pair| format!(" (witness menus {} ⊆ {})", pair.a, pair.b))
                    .unwrap_or_default()
            )));
        }
    }
    for &w in workers {
        if !bp.workers.contains(&w) {
            return Err(Error::PreconditionFailed(format!(
                "agent {:?} is not a declared worker",
                p.frame().agent_name(w)
            )));
        }
        let report = audit_axioms(p.cf(w), limits)?;
        // quota 1 on a nonempty domain, quota 0 for an isolated worker
        let expect = if p.cf(w).domain().is_empty() { 0 } else { 1 };
        if !report.plott || report.quota != Some(expect) {
            return Err(Error::PreconditionFailed(format!(
                "worker {:?} is not linear",
                p.frame().agent_name(w)
            )));
        }
    }
    Ok(())
}

/// D = ∪_m D(m): the contracts of `w0` some firm would take on top of `s0`.
pub fn interested_set(p: &Problem, s0: ContractSystem, w0: usize) -> Result<Menu> {
    p.require_pair_bipartite()?;
    if !stable_without(p, s0, &BTreeSet::from([w0]))? {
        return Err(Error::PreconditionFailed(format!(
            "system is not stable once {:?} is deleted",
            p.frame().agent_name(w0)
        )));
    }
    interested_raw(p, s0, w0)
}

fn interested_raw(p: &Problem, s0: ContractSystem, w0: usize) -> Result<Menu> {
    let mut interested = Menu::EMPTY;
    for e in p.frame().incidence(w0).iter() {
        let m = p.counterparty(e, w0)?;
        if p.cf(m).is_desirable(p.held(s0, m), e)? {
            interested = interested.with(e);
        }
    }
    Ok(interested)
}

/// One reinstatement step: return worker `w0` to a system `s0` that is
/// stable without it.
pub fn reinstate_step(
    p: &Problem,
    s0: ContractSystem,
    w0: usize,
    limits: &Limits,
) -> Result<StepOutcome> {
    check_solver_preconditions(p, &[w0], limits)?;
    if !stable_without(p, s0, &BTreeSet::from([w0]))? {
        return Err(Error::PreconditionFailed(format!(
            "system is not stable once {:?} is deleted",
            p.frame().agent_name(w0)
        )));
    }
    step_raw(p, s0, w0)
}

fn step_raw(p: &Problem, s0: ContractSystem, w0: usize) -> Result<StepOutcome> {
    let interested = interested_raw(p, s0, w0)?;
    if interested.is_empty() {
        return Ok(StepOutcome::NoInterest { system: s0 });
    }
    // the worker's own choice from the interested set is its best contract
    let best = p.cf(w0).choose(interested)?;
    let d = best.iter().next().ok_or_else(|| {
        Error::Internal("linear worker chose nothing from a nonempty menu".into())
    })?;
    if best.len() != 1 {
        return Err(Error::Internal(format!(
            "worker {:?} is not linear: chose {} from {}",
            p.frame().agent_name(w0),
            best,
            interested
        )));
    }
    let m = p.counterparty(d, w0)?;
    let held = p.held(s0, m);
    let choice = p.cf(m).choose(held.with(d))?;
    if choice == held.with(d) {
        return Ok(StepOutcome::Accepted {
            system: s0.with(d),
        });
    }
    let rejected = held.with(d).minus(choice);
    if rejected.len() != 1 || !choice.contains(d) {
        return Err(Error::Internal(format!(
            "firm {:?} rejected {} when offered {}; its choice function is not cardinally monotone",
            p.frame().agent_name(m),
            rejected,
            held.with(d)
        )));
    }
    let s = rejected.iter().next().expect("exactly one rejected");
    let evicted = p.counterparty(s, m)?;
    Ok(StepOutcome::Displaced {
        system: s0.minus(rejected).with(d),
        evicted,
        rejected: s,
    })
}

/// Build a stable system by returning workers one at a time.
///
/// Starts from the worker-free subproblem with the empty system; each
/// scheduled worker is reinstated, and every displacement immediately
/// reinstates the evicted worker before the schedule resumes. The default
/// order is by agent index.
pub fn solve_by_worker_return(
    p: &Problem,
    order: Option<&[usize]>,
    limits: &Limits,
) -> Result<SolveOutcome> {
    let bp = p.require_pair_bipartite()?;
    let default: Vec<usize> = bp.workers.iter().copied().collect();
    let schedule: Vec<usize> = match order {
        Some(o) => {
            let requested: BTreeSet<usize> = o.iter().copied().collect();
            if requested != bp.workers || o.len() != bp.workers.len() {
                return Err(Error::PreconditionFailed(
                    "order must list every worker exactly once".into(),
                ));
            }
            o.to_vec()
        }
        None => default,
    };
    resume_worker_return(p, Menu::EMPTY, &schedule, limits)
}

/// Resume the induction from a system `s0` stable in the problem with
/// `pending` workers deleted, returning them in the given order.
pub fn resume_worker_return(
    p: &Problem,
    s0: ContractSystem,
    pending: &[usize],
    limits: &Limits,
) -> Result<SolveOutcome> {
    // evictions can reach workers outside the schedule, so every worker
    // must satisfy the step preconditions
    let all_workers: Vec<usize> = p
        .require_pair_bipartite()?
        .workers
        .iter()
        .copied()
        .collect();
    check_solver_preconditions(p, &all_workers, limits)?;
    for w in pending {
        if !all_workers.contains(w) {
            return Err(Error::PreconditionFailed(format!(
                "agent {:?} is not a declared worker",
                p.frame().agent_name(*w)
            )));
        }
    }
    let mut absent: BTreeSet<usize> = pending.iter().copied().collect();
    if !stable_without(p, s0, &absent)? {
        return Err(Error::PreconditionFailed(
            "starting system is not stable in the worker-deleted subproblem".into(),
        ));
    }
    let cap = 1usize
        .checked_shl(p.frame().n_contracts() as u32)
        .unwrap_or(usize::MAX)
        .saturating_add(pending.len());
    let mut system = s0;
    let mut trace = Vec::new();
    let mut steps = 0usize;
    for &scheduled in pending {
        let mut current = scheduled;
        loop {
            steps += 1;
            if steps > cap {
                return Err(Error::Internal(
                    "reinstatement exceeded its iteration cap; a precondition must be violated"
                        .into(),
                ));
            }
            let outcome = step_raw(p, system, current)?;
            system = outcome.system();
            absent.remove(&current);
            trace.push(TraceStep {
                worker: current,
                outcome: outcome.clone(),
            });
            match outcome {
                StepOutcome::Displaced { evicted, .. } => {
                    absent.insert(evicted);
                    current = evicted;
                }
                _ => break,
            }
        }
    }
    let report = is_stable(p, system)?;
    if !report.stable {
        return Err(Error::Internal(format!(
            "worker return produced an unstable system {system}"
        )));
    }
    Ok(SolveOutcome { system, trace })
}

/// Join of two stable systems in the firm lattice: per firm,
/// `C_m(S(m) ∪ T(m))`, united over firms.
pub fn lattice_join_bipartite(
    p: &Problem,
    s: ContractSystem,
    t: ContractSystem,
    limits: &Limits,
) -> Result<ContractSystem> {
    let bp = p.require_pair_bipartite()?;
    // firms first: the usual failure mode is a non-monotone firm
    for &m in &bp.firms {
        let report = audit_axioms(p.cf(m), limits)?;
        if !report.cardinally_monotone {
            let w = report.witnesses.cardinal_monotonicity;
            return Err(Error::PreconditionFailed(format!(
                "firm {:?} is not cardinally monotone{}",
                p.frame().agent_name(m),
                w.map(|pair| format!(" (witness menus {} ⊆ {})", pair.a, pair.b))
                    .unwrap_or_default()
            )));
        }
        if !report.plott {
            return Err(Error::PreconditionFailed(format!(
                "firm {:?} is not a Plott choice function",
                p.frame().agent_name(m)
            )));
        }
    }
    // the join formula is justified for quotable workers via their linear
    // clones; linear workers are the quota-1 case
    for &w in &bp.workers {
        let report = audit_axioms(p.cf(w), limits)?;
        if !report.plott || report.quota.is_none() {
            return Err(Error::PreconditionFailed(format!(
                "worker {:?} is not a quotable Plott choice function",
                p.frame().agent_name(w)
            )));
        }
    }
    for (name, sys) in [("first", s), ("second", t)] {
        if !is_stable(p, sys)?.stable {
            return Err(Error::PreconditionFailed(format!(
                "{name} system is not stable"
            )));
        }
    }
    let mut join = Menu::EMPTY;
    for &m in &bp.firms {
        let sm = p.held(s, m);
        let tm = p.held(t, m);
        join = join.union(p.cf(m).choose(sm.union(tm))?);
    }
    Ok(join)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::ChoiceFunction;
    use crate::problem::{Bipartition, Frame};

    fn lin(order: &[usize]) -> ChoiceFunction {
        ChoiceFunction::linear(order.to_vec()).unwrap()
    }

    /// FIX-A: m ranks l>e>r; w ranks r>l; w0 holds only e.
    fn fix_a() -> Problem {
        let frame = Frame::new(
            vec!["m".into(), "w".into(), "w0".into()],
            vec!["l".into(), "r".into(), "e".into()],
            vec![
                BTreeSet::from([0, 1]),
                BTreeSet::from([0, 1]),
                BTreeSet::from([0, 2]),
            ],
        )
        .unwrap();
        Problem::new(
            frame,
            vec![lin(&[0, 2, 1]), lin(&[1, 0]), lin(&[2])],
            Some(Bipartition {
                firms: BTreeSet::from([0]),
                workers: BTreeSet::from([1, 2]),
            }),
        )
        .unwrap()
    }

    const L: usize = 0;
    const R: usize = 1;
    const E: usize = 2;

    #[test]
    fn triangle_has_unique_stable_set() {
        let p = fix_a();
        let stable = enumerate_stable(&p, &Limits::default()).unwrap();
        assert_eq!(stable, vec![Menu::singleton(L)]);
    }

    #[test]
    fn r_is_stable_without_w0_but_not_with() {
        let p = fix_a();
        let deleted = p.delete_agent(2, &Limits::default()).unwrap();
        // in the deleted problem the contracts are l, r at indices 0, 1
        let r = Menu::singleton(1);
        assert!(is_stable(&deleted, r).unwrap().stable);
        let report = is_stable(&p, Menu::singleton(R)).unwrap();
        assert!(!report.stable);
        assert_eq!(report.blocking, Menu::singleton(E));
        // and deletion enlarged the stable family
        let family = enumerate_stable(&deleted, &Limits::default()).unwrap();
        assert!(family.contains(&r));
        assert!(family.contains(&Menu::singleton(0)));
    }

    #[test]
    fn interested_set_from_r() {
        let p = fix_a();
        let d = interested_set(&p, Menu::singleton(R), 2).unwrap();
        assert_eq!(d, Menu::singleton(E));
    }

    #[test]
    fn interested_set_empty_at_l() {
        let p = fix_a();
        let d = interested_set(&p, Menu::singleton(L), 2).unwrap();
        assert_eq!(d, Menu::EMPTY);
    }

    #[test]
    fn reinstate_walks_the_triangle() {
        let p = fix_a();
        let limits = Limits::default();
        // S0 = {r}, return w0: firm switches to e, abandoning r
        let step1 = reinstate_step(&p, Menu::singleton(R), 2, &limits).unwrap();
        assert_eq!(
            step1,
            StepOutcome::Displaced {
                system: Menu::singleton(E),
                evicted: 1,
                rejected: R,
            }
        );
        // S1 = {e}, return w: firm offers l, abandoning e
        let step2 = reinstate_step(&p, Menu::singleton(E), 1, &limits).unwrap();
        assert_eq!(
            step2,
            StepOutcome::Displaced {
                system: Menu::singleton(L),
                evicted: 2,
                rejected: E,
            }
        );
        // S2 = {l}, return w0: nobody is interested
        let step3 = reinstate_step(&p, Menu::singleton(L), 2, &limits).unwrap();
        assert_eq!(
            step3,
            StepOutcome::NoInterest {
                system: Menu::singleton(L)
            }
        );
    }

    #[test]
    fn resume_from_r_reaches_l() {
        let p = fix_a();
        let out = resume_worker_return(&p, Menu::singleton(R), &[2], &Limits::default()).unwrap();
        assert_eq!(out.system, Menu::singleton(L));
        let situations: Vec<u8> = out.trace.iter().map(|t| t.outcome.situation()).collect();
        assert_eq!(situations, vec![2, 2, 0]);
    }

    #[test]
    fn solve_finds_the_stable_set() {
        let p = fix_a();
        let out = solve_by_worker_return(&p, None, &Limits::default()).unwrap();
        assert_eq!(out.system, Menu::singleton(L));
    }

    #[test]
    fn solve_with_no_workers_gives_empty() {
        let frame = Frame::new(vec!["f".into()], vec![], vec![]).unwrap();
        let p = Problem::new(
            frame,
            vec![lin(&[])],
            Some(Bipartition {
                firms: BTreeSet::from([0]),
                workers: BTreeSet::new(),
            }),
        )
        .unwrap();
        let out = solve_by_worker_return(&p, None, &Limits::default()).unwrap();
        assert_eq!(out.system, Menu::EMPTY);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn blair_comparison_is_reflexive() {
        let p = fix_a();
        let s = Menu::singleton(L);
        assert!(blair_compare_systems(&p, 0, s, s).unwrap());
    }

    #[test]
    fn empty_contract_set_enumerates_empty_system() {
        let frame = Frame::new(vec!["a".into()], vec![], vec![]).unwrap();
        let p = Problem::new(frame, vec![lin(&[])], None).unwrap();
        assert_eq!(
            enumerate_stable(&p, &Limits::default()).unwrap(),
            vec![Menu::EMPTY]
        );
    }

    #[test]
    fn blocking_never_reports_members() {
        let p = fix_a();
        for s in p.frame().all_contracts().subsets() {
            let report = is_stable(&p, s).unwrap();
            assert!(report.blocking.intersect(s).is_empty());
        }
    }
}
