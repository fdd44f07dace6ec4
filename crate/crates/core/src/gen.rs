//! Seeded random generators for property tests and benchmarks.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::cf::ChoiceFunction;
use crate::menu::Menu;
use crate::problem::{Bipartition, Frame, Problem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_linear(rng: &mut impl Rng, domain: Menu) -> ChoiceFunction {
    let mut order = domain.indices();
    order.shuffle(rng);
    ChoiceFunction::linear(order).expect("permutation of the domain")
}

pub fn random_quota(rng: &mut impl Rng, domain: Menu) -> ChoiceFunction {
    let mut order = domain.indices();
    order.shuffle(rng);
    let q = rng.gen_range(1..=order.len().max(1));
    ChoiceFunction::quota(order, q).expect("permutation of the domain")
}

pub fn random_weak(rng: &mut impl Rng, domain: Menu) -> ChoiceFunction {
    let mut elems = domain.indices();
    elems.shuffle(rng);
    let mut classes = Vec::new();
    let mut rest = elems.as_slice();
    while !rest.is_empty() {
        let take = rng.gen_range(1..=rest.len());
        classes.push(rest[..take].to_vec());
        rest = &rest[take..];
    }
    ChoiceFunction::weak_order(classes).expect("partition of the domain")
}

/// A random Plott CF: linear/quota/weak leaves combined by serial
/// composition and union.
pub fn random_plott(rng: &mut impl Rng, domain: Menu, depth: usize) -> ChoiceFunction {
    if depth == 0 || domain.len() <= 1 {
        return match rng.gen_range(0..3) {
            0 => random_linear(rng, domain),
            1 => random_quota(rng, domain),
            _ => random_weak(rng, domain),
        };
    }
    match rng.gen_range(0..3) {
        0 => ChoiceFunction::seq_compose(
            random_plott(rng, domain, depth - 1),
            random_plott(rng, domain, depth - 1),
        )
        .expect("same domain"),
        1 => ChoiceFunction::union_compose(vec![
            random_plott(rng, domain, depth - 1),
            random_plott(rng, domain, depth - 1),
        ])
        .expect("same domain"),
        _ => random_plott(rng, domain, 0),
    }
}

/// A uniformly random table CF: an arbitrary choice on every menu.
pub fn random_table(rng: &mut impl Rng, domain: Menu) -> ChoiceFunction {
    let entries = domain
        .subsets()
        .map(|menu| (menu, Menu::from_bits(rng.gen::<u64>() & menu.bits())))
        .collect();
    ChoiceFunction::table(domain, entries).expect("entries total by construction")
}

#[derive(Clone, Debug)]
pub struct BipartiteConfig {
    pub firms: usize,
    /// Linear workers besides the optional sequential one.
    pub extra_workers: usize,
    /// One worker with a quota-2 CF over 2-3 contracts.
    pub sequential_worker: bool,
    pub max_contracts: usize,
    /// Restrict firm CFs to linear/quota (otherwise weak orders also appear).
    pub cardinally_monotone_firms: bool,
}

/// A random bipartite pair-contract problem.
pub fn random_bipartite(rng: &mut impl Rng, cfg: &BipartiteConfig) -> Problem {
    let firms = cfg.firms.max(1);
    let mut agent_names: Vec<String> = (0..firms).map(|i| format!("f{i}")).collect();
    let mut worker_slots = Vec::new();
    if cfg.sequential_worker {
        worker_slots.push((agent_names.len(), true));
        agent_names.push("w0".into());
    }
    for i in 0..cfg.extra_workers {
        worker_slots.push((agent_names.len(), false));
        agent_names.push(format!("w{}", i + 1));
    }

    let mut contract_names = Vec::new();
    let mut participants = Vec::new();
    let mut owner_worker = Vec::new();
    for &(w, sequential) in &worker_slots {
        let wanted = if sequential {
            rng.gen_range(2..=3)
        } else {
            rng.gen_range(1..=2)
        };
        for _ in 0..wanted {
            if contract_names.len() >= cfg.max_contracts {
                break;
            }
            let firm = rng.gen_range(0..firms);
            contract_names.push(format!("e{}", contract_names.len()));
            participants.push(BTreeSet::from([firm, w]));
            owner_worker.push(w);
        }
    }
    let frame = Frame::new(agent_names.clone(), contract_names, participants)
        .expect("generated names are distinct");

    let mut cfs = Vec::new();
    for a in 0..frame.n_agents() {
        let domain = frame.incidence(a);
        if a < firms {
            let cf = if cfg.cardinally_monotone_firms {
                if rng.gen_bool(0.5) {
                    random_linear(rng, domain)
                } else {
                    random_quota(rng, domain)
                }
            } else {
                match rng.gen_range(0..3) {
                    0 => random_linear(rng, domain),
                    1 => random_quota(rng, domain),
                    _ => random_weak(rng, domain),
                }
            };
            cfs.push(cf);
        } else {
            let sequential = worker_slots
                .iter()
                .any(|&(w, seq)| w == a && seq);
            if sequential && domain.len() >= 2 {
                let mut order = domain.indices();
                order.shuffle(rng);
                cfs.push(ChoiceFunction::quota(order, 2).expect("permutation"));
            } else {
                cfs.push(random_linear(rng, domain));
            }
        }
    }

    let bipartition = Bipartition {
        firms: (0..firms).collect(),
        workers: (firms..frame.n_agents()).collect(),
    };
    Problem::new(frame, cfs, Some(bipartition)).expect("generated problem is structurally valid")
}
