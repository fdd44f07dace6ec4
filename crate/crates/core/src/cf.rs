//! Choice-function representations and their evaluation.
//!
//! A [`ChoiceFunction`] is a map from menus to sub-menus of a fixed domain.
//! The structured representations (linear, quota, weak order, sequential,
//! union, integral) all evaluate lazily; [`ChoiceFunction::to_table`] expands
//! any of them into the extensional table form used by exhaustive audits.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::menu::Menu;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CfKind {
    /// Maximization of a strict order, best element first. Picks one element.
    Linear { order: Vec<usize> },
    /// The `q` best elements of a strict order.
    Quota { order: Vec<usize>, quota: usize },
    /// The best nonempty indifference class, best class first.
    WeakOrder { classes: Vec<Vec<usize>> },
    /// Serial application: each stage chooses from what the earlier stages
    /// left, `(F*G)(A) = F(A) ∪ G(A − F(A))`, associated to the left.
    Sequential { stages: Vec<ChoiceFunction> },
    /// Union of the parts' choices on every menu.
    Union { parts: Vec<ChoiceFunction> },
    /// Fibered choice: pick base points from the projection of the menu,
    /// then choose inside each selected fiber,
    /// `D(B) = ∪_{x ∈ C(π(B))} C_x(B ∩ fiber(x))`.
    ///
    /// The base operates on its own index space, described by `base_labels`
    /// so the function stays serializable on its own.
    Integral {
        base: Box<ChoiceFunction>,
        base_labels: Vec<String>,
        fibers: BTreeMap<usize, ChoiceFunction>,
    },
    /// Extensional form: one entry per subset of the domain.
    Table { entries: BTreeMap<Menu, Menu> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceFunction {
    domain: Menu,
    kind: CfKind,
}

fn permutation_of_domain(order: &[usize]) -> Result<Menu> {
    let mut domain = Menu::EMPTY;
    for &x in order {
        if x >= crate::menu::MAX_GROUND_SIZE {
            return Err(Error::InvalidStructure(format!(
                "element index {x} out of range"
            )));
        }
        if domain.contains(x) {
            return Err(Error::InvalidStructure(format!(
                "element {x} repeated in order"
            )));
        }
        domain = domain.with(x);
    }
    Ok(domain)
}

impl ChoiceFunction {
    pub fn linear(order: Vec<usize>) -> Result<Self> {
        let domain = permutation_of_domain(&order)?;
        Ok(ChoiceFunction {
            domain,
            kind: CfKind::Linear { order },
        })
    }

    pub fn quota(order: Vec<usize>, quota: usize) -> Result<Self> {
        if quota == 0 {
            return Err(Error::InvalidStructure("quota must be positive".into()));
        }
        let domain = permutation_of_domain(&order)?;
        Ok(ChoiceFunction {
            domain,
            kind: CfKind::Quota { order, quota },
        })
    }

    pub fn weak_order(classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut domain = Menu::EMPTY;
        for class in &classes {
            if class.is_empty() {
                return Err(Error::InvalidStructure(
                    "weak order contains an empty class".into(),
                ));
            }
            for &x in class {
                if x >= crate::menu::MAX_GROUND_SIZE || domain.contains(x) {
                    return Err(Error::InvalidStructure(format!(
                        "element {x} repeated across classes or out of range"
                    )));
                }
                domain = domain.with(x);
            }
        }
        Ok(ChoiceFunction {
            domain,
            kind: CfKind::WeakOrder { classes },
        })
    }

    /// n-ary serial composition; the stages must share one domain.
    pub fn sequential(stages: Vec<ChoiceFunction>) -> Result<Self> {
        let first = stages
            .first()
            .ok_or_else(|| Error::InvalidStructure("sequential needs at least one stage".into()))?;
        let domain = first.domain;
        for s in &stages {
            if s.domain != domain {
                return Err(Error::InvalidStructure(format!(
                    "sequential stage domain {} differs from {}",
                    s.domain, domain
                )));
            }
        }
        Ok(ChoiceFunction {
            domain,
            kind: CfKind::Sequential { stages },
        })
    }

    /// `f * g`. Existing sequential operands are flattened; left association
    /// and flattening agree because the operation is associative.
    pub fn seq_compose(f: ChoiceFunction, g: ChoiceFunction) -> Result<Self> {
        if f.domain != g.domain {
            return Err(Error::InvalidStructure(format!(
                "serial composition over mismatched domains {} and {}",
                f.domain, g.domain
            )));
        }
        let mut stages = Vec::new();
        for cf in [f, g] {
            match cf.kind {
                CfKind::Sequential { stages: inner } => stages.extend(inner),
                _ => stages.push(cf),
            }
        }
        ChoiceFunction::sequential(stages)
    }

    pub fn union_compose(parts: Vec<ChoiceFunction>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidStructure("union needs at least one part".into()))?;
        let domain = first.domain;
        for p in &parts {
            if p.domain != domain {
                return Err(Error::InvalidStructure(format!(
                    "union part domain {} differs from {}",
                    p.domain, domain
                )));
            }
        }
        Ok(ChoiceFunction {
            domain,
            kind: CfKind::Union { parts },
        })
    }

    /// Build the fibered CF over `base`. `fibers` maps every base-domain
    /// element to the CF on its fiber; the fiber domains must be disjoint and
    /// together form the new CF's domain. `base_labels` names the base
    /// elements for serialization.
    pub fn integrate(
        base: ChoiceFunction,
        base_labels: Vec<String>,
        fibers: BTreeMap<usize, ChoiceFunction>,
    ) -> Result<Self> {
        if !base.domain.is_subset_of(Menu::full(base_labels.len())) {
            return Err(Error::InvalidStructure(
                "integral base domain not covered by base labels".into(),
            ));
        }
        for (i, l) in base_labels.iter().enumerate() {
            if base_labels[..i].contains(l) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate base label {l:?}"
                )));
            }
        }
        let keys = Menu::from_indices(fibers.keys().copied());
        if keys != base.domain {
            return Err(Error::InvalidStructure(format!(
                "fibers keyed by {} do not match base domain {}",
                keys, base.domain
            )));
        }
        let mut domain = Menu::EMPTY;
        for fiber in fibers.values() {
            if !domain.intersect(fiber.domain).is_empty() {
                return Err(Error::InvalidStructure(
                    "fibers overlap; they must partition the domain".into(),
                ));
            }
            domain = domain.union(fiber.domain);
        }
        Ok(ChoiceFunction {
            domain,
            kind: CfKind::Integral {
                base: Box::new(base),
                base_labels,
                fibers,
            },
        })
    }

    /// Extensional CF from explicit entries; they must be total over the
    /// domain and satisfy `C(A) ⊆ A`.
    pub fn table(domain: Menu, entries: BTreeMap<Menu, Menu>) -> Result<Self> {
        if domain.len() > 24 {
            return Err(Error::LimitExceeded {
                what: "table representation",
                limit: 24,
                actual: domain.len(),
            });
        }
        if entries.len() != 1usize << domain.len() {
            return Err(Error::InvalidStructure(format!(
                "table has {} entries, domain {} requires {}",
                entries.len(),
                domain,
                1usize << domain.len()
            )));
        }
        for (&menu, &choice) in &entries {
            if !menu.is_subset_of(domain) {
                return Err(Error::InvalidStructure(format!(
                    "table menu {menu} outside domain {domain}"
                )));
            }
            if !choice.is_subset_of(menu) {
                return Err(Error::InvalidStructure(format!(
                    "table choice {choice} not contained in its menu {menu}"
                )));
            }
        }
        Ok(ChoiceFunction {
            domain,
            kind: CfKind::Table { entries },
        })
    }

    pub fn domain(&self) -> Menu {
        self.domain
    }

    pub fn kind(&self) -> &CfKind {
        &self.kind
    }

    /// The base element owning `index`, for integral CFs.
    pub fn fiber_of(&self, index: usize) -> Option<usize> {
        match &self.kind {
            CfKind::Integral { fibers, .. } => fibers
                .iter()
                .find(|(_, f)| f.domain.contains(index))
                .map(|(&x, _)| x),
            _ => None,
        }
    }

    /// Evaluate the choice from `menu`.
    pub fn choose(&self, menu: Menu) -> Result<Menu> {
        if !menu.is_subset_of(self.domain) {
            return Err(Error::DomainViolation {
                menu,
                domain: self.domain,
            });
        }
        Ok(self.choose_raw(menu))
    }

    fn choose_raw(&self, menu: Menu) -> Menu {
        match &self.kind {
            CfKind::Linear { order } => order
                .iter()
                .find(|&&x| menu.contains(x))
                .map(|&x| Menu::singleton(x))
                .unwrap_or(Menu::EMPTY),
            CfKind::Quota { order, quota } => {
                let mut chosen = Menu::EMPTY;
                for &x in order {
                    if chosen.len() == *quota {
                        break;
                    }
                    if menu.contains(x) {
                        chosen = chosen.with(x);
                    }
                }
                chosen
            }
            CfKind::WeakOrder { classes } => {
                for class in classes {
                    let hit = menu.intersect(Menu::from_indices(class.iter().copied()));
                    if !hit.is_empty() {
                        return hit;
                    }
                }
                Menu::EMPTY
            }
            CfKind::Sequential { stages } => {
                let mut chosen = Menu::EMPTY;
                let mut rest = menu;
                for stage in stages {
                    let c = stage.choose_raw(rest);
                    chosen = chosen.union(c);
                    rest = rest.minus(c);
                }
                chosen
            }
            CfKind::Union { parts } => parts
                .iter()
                .fold(Menu::EMPTY, |acc, p| acc.union(p.choose_raw(menu))),
            CfKind::Integral { base, fibers, .. } => {
                let mut projected = Menu::EMPTY;
                for (&x, fiber) in fibers {
                    if !menu.intersect(fiber.domain).is_empty() {
                        projected = projected.with(x);
                    }
                }
                let base_choice = base.choose_raw(projected);
                let mut chosen = Menu::EMPTY;
                for x in base_choice.iter() {
                    let fiber = &fibers[&x];
                    chosen = chosen.union(fiber.choose_raw(menu.intersect(fiber.domain)));
                }
                chosen
            }
            CfKind::Table { entries } => *entries
                .get(&menu)
                .expect("table entries are total over the domain"),
        }
    }

    /// Expand into the extensional table form.
    pub fn to_table(&self, limit: usize) -> Result<ChoiceFunction> {
        if self.domain.len() > limit {
            return Err(Error::LimitExceeded {
                what: "table expansion",
                limit,
                actual: self.domain.len(),
            });
        }
        let entries: BTreeMap<Menu, Menu> = self
            .domain
            .subsets()
            .map(|menu| (menu, self.choose_raw(menu)))
            .collect();
        ChoiceFunction::table(self.domain, entries)
    }

    /// Extensional restriction to `domain ∩ keep`: a table that agrees with
    /// this CF on every surviving menu.
    pub fn restrict_to(&self, keep: Menu, limit: usize) -> Result<ChoiceFunction> {
        let new_domain = self.domain.intersect(keep);
        if new_domain.len() > limit {
            return Err(Error::LimitExceeded {
                what: "table restriction",
                limit,
                actual: new_domain.len(),
            });
        }
        let entries: BTreeMap<Menu, Menu> = new_domain
            .subsets()
            .map(|menu| (menu, self.choose_raw(menu)))
            .collect();
        ChoiceFunction::table(new_domain, entries)
    }

    /// Rewrite element indices through `map` (injective on the domain). The
    /// base space of an integral is untouched; only fiber contents move.
    pub fn relabel(&self, map: &dyn Fn(usize) -> usize) -> Result<ChoiceFunction> {
        match &self.kind {
            CfKind::Linear { order } => {
                ChoiceFunction::linear(order.iter().map(|&x| map(x)).collect())
            }
            CfKind::Quota { order, quota } => {
                ChoiceFunction::quota(order.iter().map(|&x| map(x)).collect(), *quota)
            }
            CfKind::WeakOrder { classes } => ChoiceFunction::weak_order(
                classes
                    .iter()
                    .map(|c| c.iter().map(|&x| map(x)).collect())
                    .collect(),
            ),
            CfKind::Sequential { stages } => ChoiceFunction::sequential(
                stages
                    .iter()
                    .map(|s| s.relabel(map))
                    .collect::<Result<_>>()?,
            ),
            CfKind::Union { parts } => ChoiceFunction::union_compose(
                parts
                    .iter()
                    .map(|p| p.relabel(map))
                    .collect::<Result<_>>()?,
            ),
            CfKind::Integral {
                base,
                base_labels,
                fibers,
            } => {
                let fibers = fibers
                    .iter()
                    .map(|(&x, f)| Ok((x, f.relabel(map)?)))
                    .collect::<Result<_>>()?;
                ChoiceFunction::integrate((**base).clone(), base_labels.clone(), fibers)
            }
            CfKind::Table { entries } => {
                let remap = |m: Menu| Menu::from_indices(m.iter().map(map));
                let domain = remap(self.domain);
                if domain.len() != self.domain.len() {
                    return Err(Error::InvalidStructure(
                        "relabel map is not injective on the domain".into(),
                    ));
                }
                let entries = entries.iter().map(|(&a, &c)| (remap(a), remap(c))).collect();
                ChoiceFunction::table(domain, entries)
            }
        }
    }

    pub fn is_acceptable(&self, menu: Menu) -> Result<bool> {
        Ok(self.choose(menu)? == menu)
    }

    /// Revealed-preference comparison: `a ⪯ b` iff `C(a ∪ b) ⊆ b`.
    pub fn blair_leq(&self, a: Menu, b: Menu) -> Result<bool> {
        let choice = self.choose(a.union(b))?;
        Ok(choice.is_subset_of(b))
    }

    /// Strict Blair comparison: `a ≺ b`.
    pub fn blair_lt(&self, a: Menu, b: Menu) -> Result<bool> {
        Ok(self.blair_leq(a, b)? && !self.blair_leq(b, a)?)
    }

    /// `x` is desirable under `a` iff `x ∈ C(a ∪ {x})`.
    pub fn is_desirable(&self, a: Menu, x: usize) -> Result<bool> {
        let choice = self.choose(a.with(x))?;
        Ok(choice.contains(x))
    }

    /// Join of two acceptable menus in the Blair lattice: `C(a ∪ b)`.
    pub fn acceptable_join(&self, a: Menu, b: Menu) -> Result<Menu> {
        if !self.is_acceptable(a)? {
            return Err(Error::PreconditionFailed(format!(
                "menu {a} is not acceptable"
            )));
        }
        if !self.is_acceptable(b)? {
            return Err(Error::PreconditionFailed(format!(
                "menu {b} is not acceptable"
            )));
        }
        self.choose(a.union(b))
    }
}
