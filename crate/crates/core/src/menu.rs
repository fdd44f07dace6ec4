//! Menus as bit-indexed subsets of a finite ground set.
//!
//! Every exhaustive quantifier in the crate ("for all menus", "for all pairs
//! A ⊆ B") iterates submasks of a domain mask, so a menu is a `u64` and the
//! ground set is capped at 64 elements.

use std::fmt;

use crate::error::{Error, Result};

/// Hard cap on ground-set size imposed by the bitset representation.
pub const MAX_GROUND_SIZE: usize = 64;

/// A subset of `{0, .., size-1}` for some ground set, stored as a bitmask.
///
/// The numeric order on masks is the canonical "subset order" used for
/// enumeration results and lexicographically-first witnesses.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Menu(u64);

impl Menu {
    pub const EMPTY: Menu = Menu(0);

    pub fn from_bits(bits: u64) -> Self {
        Menu(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_GROUND_SIZE);
        Menu(1 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut bits = 0u64;
        for i in indices {
            assert!(i < MAX_GROUND_SIZE);
            bits |= 1 << i;
        }
        Menu(bits)
    }

    /// Full menu over a ground set of `size` elements.
    pub fn full(size: usize) -> Self {
        assert!(size <= MAX_GROUND_SIZE);
        if size == 64 {
            Menu(u64::MAX)
        } else {
            Menu((1u64 << size) - 1)
        }
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_GROUND_SIZE && self.0 >> index & 1 == 1
    }

    pub fn with(self, index: usize) -> Self {
        Menu(self.0 | Menu::singleton(index).0)
    }

    pub fn without(self, index: usize) -> Self {
        Menu(self.0 & !Menu::singleton(index).0)
    }

    pub fn union(self, other: Menu) -> Self {
        Menu(self.0 | other.0)
    }

    pub fn intersect(self, other: Menu) -> Self {
        Menu(self.0 & other.0)
    }

    pub fn minus(self, other: Menu) -> Self {
        Menu(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Menu) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All submasks of `self` in ascending mask order, including ∅ and `self`.
    pub fn subsets(self) -> Submasks {
        Submasks {
            mask: self.0,
            next: Some(0),
        }
    }

    /// All menus B with `self ⊆ B ⊆ universe`, ascending by mask.
    pub fn supersets_within(self, universe: Menu) -> impl Iterator<Item = Menu> {
        let base = self;
        universe.minus(self).subsets().map(move |free| base.union(free))
    }
}

/// Ascending submask iterator. `next = (cur - mask) & mask` visits submasks
/// of `mask` in increasing numeric order.
pub struct Submasks {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Submasks {
    type Item = Menu;

    fn next(&mut self) -> Option<Menu> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some(cur.wrapping_sub(self.mask) & self.mask)
        };
        Some(Menu(cur))
    }
}

impl fmt::Debug for Menu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Menu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// A finite indexed ground set: distinct display names for indices `0..size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    labels: Vec<String>,
}

impl GroundSet {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() > MAX_GROUND_SIZE {
            return Err(Error::LimitExceeded {
                what: "ground set",
                limit: MAX_GROUND_SIZE,
                actual: labels.len(),
            });
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate ground-set label {a:?}"
                )));
            }
        }
        Ok(GroundSet { labels })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn full_menu(&self) -> Menu {
        Menu::full(self.size())
    }

    pub fn names(&self, menu: Menu) -> Vec<String> {
        menu.iter().map(|i| self.labels[i].clone()).collect()
    }
}
