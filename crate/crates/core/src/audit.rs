//! Exhaustive axiom auditing over all menus of a domain.
//!
//! Checks run in a compacted index space (domain bits renumbered 0..n) over a
//! dense table, so the inner loops are array lookups. Witnesses are
//! decompressed back to original indices and always report the
//! lexicographically first violating pair, iterating menus in ascending mask
//! order.

use crate::cf::ChoiceFunction;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::menu::Menu;

/// A pair of menus exhibiting an axiom failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MenuPair {
    pub a: Menu,
    pub b: Menu,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witnesses {
    pub consistency: Option<MenuPair>,
    pub substitution: Option<MenuPair>,
    pub path_independence: Option<MenuPair>,
    pub cardinal_monotonicity: Option<MenuPair>,
    pub nonempty: Option<Menu>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub consistent: bool,
    pub substitutable: bool,
    pub path_independent: bool,
    /// Consistent and substitutable.
    pub plott: bool,
    pub cardinally_monotone: bool,
    pub nonempty_valued: bool,
    /// Smallest q with `|C(A)| = min(q, |A|)` on every menu, if any.
    pub quota: Option<usize>,
    pub witnesses: Witnesses,
}

/// Dense compact table of a CF, for tight audit loops.
struct Dense {
    /// Original bit position of each compact index.
    positions: Vec<usize>,
    /// Choice mask per compact menu mask.
    choice: Vec<u64>,
}

impl Dense {
    fn build(cf: &ChoiceFunction) -> Dense {
        let positions = cf.domain().indices();
        let n = positions.len();
        let mut choice = vec![0u64; 1 << n];
        for (m, slot) in choice.iter_mut().enumerate() {
            let menu = expand(m as u64, &positions);
            let chosen = cf
                .choose(menu)
                .expect("menu constructed inside the domain");
            *slot = compress(chosen, &positions);
        }
        Dense { positions, choice }
    }

    fn n(&self) -> usize {
        self.positions.len()
    }

    fn menu(&self, compact: u64) -> Menu {
        expand(compact, &self.positions)
    }
}

fn expand(compact: u64, positions: &[usize]) -> Menu {
    let mut menu = Menu::EMPTY;
    for (i, &p) in positions.iter().enumerate() {
        if compact >> i & 1 == 1 {
            menu = menu.with(p);
        }
    }
    menu
}

fn compress(menu: Menu, positions: &[usize]) -> u64 {
    let mut compact = 0u64;
    for (i, &p) in positions.iter().enumerate() {
        if menu.contains(p) {
            compact |= 1 << i;
        }
    }
    compact
}

/// Ascending submasks of `mask`, including 0 and `mask`.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(cur.wrapping_sub(mask) & mask)
        };
        Some(cur)
    })
}

fn check_limits(cf: &ChoiceFunction, limits: &Limits) -> Result<()> {
    let n = cf.domain().len();
    if n > limits.menu_audit {
        return Err(Error::LimitExceeded {
            what: "axiom audit",
            limit: limits.menu_audit,
            actual: n,
        });
    }
    if n > limits.pair_audit {
        return Err(Error::LimitExceeded {
            what: "path-independence pair audit",
            limit: limits.pair_audit,
            actual: n,
        });
    }
    Ok(())
}

/// Audit every axiom of `cf` by exhaustive quantifier evaluation.
pub fn audit_axioms(cf: &ChoiceFunction, limits: &Limits) -> Result<AxiomReport> {
    check_limits(cf, limits)?;
    let dense = Dense::build(cf);
    let n = dense.n();
    let full: u64 = if n == 0 { 0 } else { (1 << n) - 1 };
    let choice = &dense.choice;
    let mut w = Witnesses::default();

    // Consistency: C(A) ⊆ B ⊆ A implies C(B) = C(A).
    'cons: for a in 0..=full {
        let ca = choice[a as usize];
        for t in submasks(a & !ca) {
            let b = ca | t;
            if choice[b as usize] != ca {
                w.consistency = Some(MenuPair {
                    a: dense.menu(a),
                    b: dense.menu(b),
                });
                break 'cons;
            }
        }
    }

    // Substitution: B ⊆ A implies C(A) ∩ B ⊆ C(B).
    'subst: for a in 0..=full {
        let ca = choice[a as usize];
        for b in submasks(a) {
            if ca & b & !choice[b as usize] != 0 {
                w.substitution = Some(MenuPair {
                    a: dense.menu(a),
                    b: dense.menu(b),
                });
                break 'subst;
            }
        }
    }

    // Path independence: C(A ∪ B) = C(C(A) ∪ B) for arbitrary pairs.
    'pi: for a in 0..=full {
        for b in 0..=full {
            if choice[(a | b) as usize] != choice[(choice[a as usize] | b) as usize] {
                w.path_independence = Some(MenuPair {
                    a: dense.menu(a),
                    b: dense.menu(b),
                });
                break 'pi;
            }
        }
    }

    // Cardinal monotonicity: A ⊆ B implies |C(A)| ≤ |C(B)|.
    'card: for a in 0..=full {
        let size_a = choice[a as usize].count_ones();
        for t in submasks(full & !a) {
            if t == 0 {
                continue;
            }
            let b = a | t;
            if size_a > choice[b as usize].count_ones() {
                w.cardinal_monotonicity = Some(MenuPair {
                    a: dense.menu(a),
                    b: dense.menu(b),
                });
                break 'card;
            }
        }
    }

    // Non-empty-valued: C(A) ≠ ∅ for nonempty A.
    for a in 1..=full {
        if choice[a as usize] == 0 {
            w.nonempty = Some(dense.menu(a));
            break;
        }
    }

    // Quota: the only candidate is |C(X)| (or n when the full menu is kept).
    let q_candidate = choice[full as usize].count_ones() as usize;
    let quota = (0..=full)
        .all(|a| choice[a as usize].count_ones() as usize == q_candidate.min(a.count_ones() as usize))
        .then_some(q_candidate);

    let consistent = w.consistency.is_none();
    let substitutable = w.substitution.is_none();
    Ok(AxiomReport {
        consistent,
        substitutable,
        path_independent: w.path_independence.is_none(),
        plott: consistent && substitutable,
        cardinally_monotone: w.cardinal_monotonicity.is_none(),
        nonempty_valued: w.nonempty.is_none(),
        quota,
        witnesses: w,
    })
}

/// Whether `|C(A)| = min(q, |A|)` holds on every menu.
pub fn is_quotable_with(cf: &ChoiceFunction, q: usize, limits: &Limits) -> Result<bool> {
    let n = cf.domain().len();
    if n > limits.menu_audit {
        return Err(Error::LimitExceeded {
            what: "quota check",
            limit: limits.menu_audit,
            actual: n,
        });
    }
    for menu in cf.domain().subsets() {
        if cf.choose(menu)?.len() != q.min(menu.len()) {
            return Ok(false);
        }
    }
    Ok(true)
}
