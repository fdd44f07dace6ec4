//! Exhaustive search for serial decompositions into linear stages.
//!
//! A composition of k linear stages chooses exactly min(k, |A|) elements, so
//! a Plott CF can only decompose at its reported quota; the search fixes that
//! length and walks stage tuples depth-first in lexicographic order, pruning
//! with the first-stage constraint: once a stage order is chosen, every
//! constrained menu propagates to a residual requirement on the remaining
//! stages, and conflicting residuals kill the branch.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::audit::audit_axioms;
use crate::cf::ChoiceFunction;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::menu::Menu;

/// Find linear orders `L1..Lq` with `L1*...*Lq` equal to `cf` on every menu,
/// searching lengths up to `max_q`. Returns the lexicographically first
/// match, or `None` when no tuple exists.
pub fn find_sequential_decomposition(
    cf: &ChoiceFunction,
    max_q: usize,
    limits: &Limits,
) -> Result<Option<Vec<ChoiceFunction>>> {
    let n = cf.domain().len();
    if n > limits.decompose {
        return Err(Error::LimitExceeded {
            what: "sequential decomposition search",
            limit: limits.decompose,
            actual: n,
        });
    }
    let report = audit_axioms(cf, limits)?;
    if !report.plott {
        return Err(Error::PreconditionFailed(
            "sequential decomposition requires a Plott choice function".into(),
        ));
    }
    // Serial compositions are quotable, so a non-quotable CF has none.
    let Some(q) = report.quota else {
        return Ok(None);
    };
    if n == 0 {
        return Ok(Some(vec![ChoiceFunction::linear(Vec::new())?]));
    }
    if q == 0 || q > max_q {
        return Ok(None);
    }

    let positions = cf.domain().indices();
    let compress = |menu: Menu| -> u64 {
        let mut out = 0u64;
        for (i, &p) in positions.iter().enumerate() {
            if menu.contains(p) {
                out |= 1 << i;
            }
        }
        out
    };

    let mut constraints: BTreeMap<u64, u64> = BTreeMap::new();
    for menu in cf.domain().subsets() {
        if !menu.is_empty() {
            constraints.insert(compress(menu), compress(cf.choose(menu)?));
        }
    }

    let orders: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let found = search(&constraints, q, &orders);
    Ok(found.map(|perms| {
        perms
            .into_iter()
            .map(|perm| {
                ChoiceFunction::linear(perm.iter().map(|&i| positions[i]).collect())
                    .expect("permutation of the domain")
            })
            .collect()
    }))
}

fn search(constraints: &BTreeMap<u64, u64>, depth: usize, orders: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
    if depth == 0 {
        return constraints.values().all(|&r| r == 0).then(Vec::new);
    }
    // every remaining stage picks from each nonempty constrained menu, so an
    // already-empty requirement is unsatisfiable
    if constraints.values().any(|&r| r == 0) {
        return None;
    }
    'next_order: for order in orders {
        let mut residual: BTreeMap<u64, u64> = BTreeMap::new();
        for (&menu, &req) in constraints {
            let pick = order
                .iter()
                .find(|&&x| menu >> x & 1 == 1)
                .copied()
                .expect("constrained menus are nonempty");
            if req >> pick & 1 == 0 {
                continue 'next_order;
            }
            let rest = menu & !(1 << pick);
            if rest == 0 {
                continue;
            }
            let need = req & !(1 << pick);
            match residual.insert(rest, need) {
                Some(prev) if prev != need => continue 'next_order,
                _ => {}
            }
        }
        if let Some(mut tail) = search(&residual, depth - 1, orders) {
            let mut out = vec![order.clone()];
            out.append(&mut tail);
            return Some(out);
        }
    }
    None
}

/// The canonical decomposition of a quota CF: its order repeated q times.
pub fn quota_as_stages(cf: &ChoiceFunction) -> Option<Vec<ChoiceFunction>> {
    match cf.kind() {
        crate::cf::CfKind::Quota { order, quota } => Some(
            (0..*quota)
                .map(|_| ChoiceFunction::linear(order.clone()).expect("validated order"))
                .collect(),
        ),
        _ => None,
    }
}
