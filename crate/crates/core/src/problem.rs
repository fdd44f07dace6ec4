//! Frames, problems, and agent deletion.
//!
//! A frame is the incidence structure between agents and contracts; a problem
//! equips every agent with a choice function over its incident contracts.
//! Contract systems are plain menus over the contract index space.

use std::collections::BTreeSet;

use crate::cf::ChoiceFunction;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::menu::{GroundSet, Menu, MAX_GROUND_SIZE};

/// A candidate set of contracts, indexed like the frame's contract list.
pub type ContractSystem = Menu;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    agents: Vec<String>,
    contracts: Vec<String>,
    /// Participant agents per contract.
    participants: Vec<BTreeSet<usize>>,
}

impl Frame {
    pub fn new(
        agents: Vec<String>,
        contracts: Vec<String>,
        participants: Vec<BTreeSet<usize>>,
    ) -> Result<Self> {
        for (i, a) in agents.iter().enumerate() {
            if agents[..i].contains(a) {
                return Err(Error::InvalidStructure(format!("duplicate agent {a:?}")));
            }
        }
        for (i, c) in contracts.iter().enumerate() {
            if contracts[..i].contains(c) {
                return Err(Error::InvalidStructure(format!("duplicate contract {c:?}")));
            }
        }
        if contracts.len() > MAX_GROUND_SIZE {
            return Err(Error::LimitExceeded {
                what: "contract set",
                limit: MAX_GROUND_SIZE,
                actual: contracts.len(),
            });
        }
        if participants.len() != contracts.len() {
            return Err(Error::InvalidStructure(
                "participant list length differs from contract list".into(),
            ));
        }
        for (e, ps) in participants.iter().enumerate() {
            if ps.is_empty() {
                return Err(Error::InvalidStructure(format!(
                    "contract {:?} has no participants",
                    contracts[e]
                )));
            }
            for &a in ps {
                if a >= agents.len() {
                    return Err(Error::InvalidStructure(format!(
                        "contract {:?} references agent index {a} out of range",
                        contracts[e]
                    )));
                }
            }
        }
        Ok(Frame {
            agents,
            contracts,
            participants,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_contracts(&self) -> usize {
        self.contracts.len()
    }

    pub fn agent_name(&self, a: usize) -> &str {
        &self.agents[a]
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn contract_name(&self, e: usize) -> &str {
        &self.contracts[e]
    }

    pub fn contract_names(&self) -> &[String] {
        &self.contracts
    }

    pub fn agent_index(&self, name: &str) -> Result<usize> {
        self.agents
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownName(format!("agent {name:?}")))
    }

    pub fn contract_index(&self, name: &str) -> Result<usize> {
        self.contracts
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownName(format!("contract {name:?}")))
    }

    pub fn participants(&self, e: usize) -> &BTreeSet<usize> {
        &self.participants[e]
    }

    /// E(a): the contracts agent `a` participates in.
    pub fn incidence(&self, a: usize) -> Menu {
        let mut m = Menu::EMPTY;
        for (e, ps) in self.participants.iter().enumerate() {
            if ps.contains(&a) {
                m = m.with(e);
            }
        }
        m
    }

    pub fn all_contracts(&self) -> Menu {
        Menu::full(self.contracts.len())
    }

    pub fn contract_ground(&self) -> GroundSet {
        GroundSet::new(self.contracts.clone()).expect("frame names validated")
    }

    pub fn system_names(&self, s: ContractSystem) -> Vec<String> {
        s.iter().map(|e| self.contracts[e].clone()).collect()
    }
}

/// Firm/worker sides, when declared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    pub firms: BTreeSet<usize>,
    pub workers: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    frame: Frame,
    cfs: Vec<ChoiceFunction>,
    bipartition: Option<Bipartition>,
}

impl Problem {
    pub fn new(
        frame: Frame,
        cfs: Vec<ChoiceFunction>,
        bipartition: Option<Bipartition>,
    ) -> Result<Self> {
        let p = Problem {
            frame,
            cfs,
            bipartition,
        };
        p.validate()?;
        Ok(p)
    }

    /// Check all structural invariants: one CF per agent whose domain is the
    /// agent's incidence set, and when sides are declared, a proper
    /// bipartition whose workers never share a contract.
    pub fn validate(&self) -> Result<()> {
        if self.cfs.len() != self.frame.n_agents() {
            return Err(Error::InvalidStructure(format!(
                "{} choice functions for {} agents",
                self.cfs.len(),
                self.frame.n_agents()
            )));
        }
        for (a, cf) in self.cfs.iter().enumerate() {
            let incidence = self.frame.incidence(a);
            if cf.domain() != incidence {
                return Err(Error::InvalidStructure(format!(
                    "agent {:?}: choice function domain {} differs from incidence {}",
                    self.frame.agent_name(a),
                    cf.domain(),
                    incidence
                )));
            }
        }
        if let Some(bp) = &self.bipartition {
            for a in 0..self.frame.n_agents() {
                let in_f = bp.firms.contains(&a);
                let in_w = bp.workers.contains(&a);
                if in_f == in_w {
                    return Err(Error::InvalidStructure(format!(
                        "agent {:?} must be on exactly one side",
                        self.frame.agent_name(a)
                    )));
                }
            }
            if bp.firms.len() + bp.workers.len() != self.frame.n_agents() {
                return Err(Error::InvalidStructure(
                    "bipartition references unknown agents".into(),
                ));
            }
            for e in 0..self.frame.n_contracts() {
                let shared: Vec<usize> = self
                    .frame
                    .participants(e)
                    .iter()
                    .copied()
                    .filter(|a| bp.workers.contains(a))
                    .collect();
                if shared.len() > 1 {
                    return Err(Error::Connectivity(format!(
                        "workers {} share contract {:?}",
                        shared
                            .iter()
                            .map(|&a| format!("{:?}", self.frame.agent_name(a)))
                            .collect::<Vec<_>>()
                            .join(" and "),
                        self.frame.contract_name(e)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn cf(&self, a: usize) -> &ChoiceFunction {
        &self.cfs[a]
    }

    pub fn cfs(&self) -> &[ChoiceFunction] {
        &self.cfs
    }

    pub fn bipartition(&self) -> Option<&Bipartition> {
        self.bipartition.as_ref()
    }

    /// S(a) = S ∩ E(a).
    pub fn held(&self, s: ContractSystem, a: usize) -> Menu {
        s.intersect(self.frame.incidence(a))
    }

    /// Pair contracts between declared sides: every contract has exactly two
    /// participants, one firm and one worker.
    pub fn require_pair_bipartite(&self) -> Result<&Bipartition> {
        let bp = self.bipartition.as_ref().ok_or_else(|| {
            Error::PreconditionFailed("problem declares no firm/worker sides".into())
        })?;
        for e in 0..self.frame.n_contracts() {
            let ps = self.frame.participants(e);
            let firms = ps.iter().filter(|a| bp.firms.contains(a)).count();
            let workers = ps.iter().filter(|a| bp.workers.contains(a)).count();
            if ps.len() != 2 || firms != 1 || workers != 1 {
                return Err(Error::PreconditionFailed(format!(
                    "contract {:?} is not a firm-worker pair",
                    self.frame.contract_name(e)
                )));
            }
        }
        Ok(bp)
    }

    /// The single non-`a` participant of a pair contract.
    pub fn counterparty(&self, e: usize, a: usize) -> Result<usize> {
        let others: Vec<usize> = self
            .frame
            .participants(e)
            .iter()
            .copied()
            .filter(|&x| x != a)
            .collect();
        match others.as_slice() {
            [other] => Ok(*other),
            _ => Err(Error::PreconditionFailed(format!(
                "contract {:?} is not a pair contract",
                self.frame.contract_name(e)
            ))),
        }
    }

    /// I(−a): remove the agent and its contracts; restrict the remaining
    /// agents' CFs extensionally (table restriction) to surviving contracts.
    pub fn delete_agent(&self, a: usize, limits: &Limits) -> Result<Problem> {
        if a >= self.frame.n_agents() {
            return Err(Error::UnknownName(format!("agent index {a}")));
        }
        let gone = self.frame.incidence(a);
        let survivors: Vec<usize> = (0..self.frame.n_contracts())
            .filter(|&e| !gone.contains(e))
            .collect();
        let mut new_index = vec![usize::MAX; self.frame.n_contracts()];
        for (new, &old) in survivors.iter().enumerate() {
            new_index[old] = new;
        }
        let keep = Menu::from_indices(survivors.iter().copied());

        let agents: Vec<String> = (0..self.frame.n_agents())
            .filter(|&x| x != a)
            .map(|x| self.frame.agent_name(x).to_string())
            .collect();
        let mut agent_index = vec![usize::MAX; self.frame.n_agents()];
        let mut next = 0usize;
        for x in 0..self.frame.n_agents() {
            if x != a {
                agent_index[x] = next;
                next += 1;
            }
        }
        let contracts: Vec<String> = survivors
            .iter()
            .map(|&e| self.frame.contract_name(e).to_string())
            .collect();
        let participants: Vec<BTreeSet<usize>> = survivors
            .iter()
            .map(|&e| {
                self.frame
                    .participants(e)
                    .iter()
                    .map(|&x| agent_index[x])
                    .collect()
            })
            .collect();
        let frame = Frame::new(agents, contracts, participants)?;

        let mut cfs = Vec::new();
        for x in 0..self.frame.n_agents() {
            if x == a {
                continue;
            }
            let restricted = self.cfs[x].restrict_to(keep, limits.menu_audit)?;
            cfs.push(restricted.relabel(&|e| new_index[e])?);
        }
        let bipartition = self.bipartition.as_ref().map(|bp| Bipartition {
            firms: bp
                .firms
                .iter()
                .filter(|&&x| x != a)
                .map(|&x| agent_index[x])
                .collect(),
            workers: bp
                .workers
                .iter()
                .filter(|&&x| x != a)
                .map(|&x| agent_index[x])
                .collect(),
        });
        Problem::new(frame, cfs, bipartition)
    }
}
