//! Valuation functions over item subsets.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::instance::Bundle;
use crate::rational::Rational;

/// Largest item count a [`TableValuation`] may cover (2^20 entries).
pub const MAX_TABLE_ITEMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    /// One value per item; a bundle is worth the sum of its items.
    Additive(Vec<Rational>),
    /// Explicit value for every subset, indexed by item bitmask.
    Table(TableValuation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableValuation {
    items: usize,
    values: Vec<Rational>,
}

/// Sign class of an item for one agent, from its marginal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemKind {
    /// Every marginal is `>= 0` (this includes items whose marginals are all zero).
    Good,
    /// Every marginal is `<= 0` and at least one is strictly negative.
    Chore,
    Neither,
}

impl TableValuation {
    pub fn new(items: usize, values: Vec<Rational>) -> Result<Self> {
        if items > MAX_TABLE_ITEMS {
            return Err(Error::InvalidInstance(format!(
                "table valuations support at most {MAX_TABLE_ITEMS} items, got {items}"
            )));
        }
        if values.len() != 1usize << items {
            return Err(Error::InvalidInstance(format!(
                "table over {items} items needs {} entries, got {}",
                1usize << items,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidInstance("table valuation must have v(empty) = 0".into()));
        }
        Ok(TableValuation { items, values })
    }

    pub fn from_fn(items: usize, mut f: impl FnMut(u32) -> Rational) -> Result<Self> {
        if items > MAX_TABLE_ITEMS {
            return Err(Error::InvalidInstance(format!(
                "table valuations support at most {MAX_TABLE_ITEMS} items, got {items}"
            )));
        }
        let values = (0..1u32 << items).map(&mut f).collect();
        Self::new(items, values)
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, mask: u32) -> &Rational {
        &self.values[mask as usize]
    }
}

fn mask_of(bundle: &Bundle) -> u32 {
    bundle.iter().fold(0u32, |m, &j| m | (1 << j))
}

impl Valuation {
    pub fn item_count(&self) -> usize {
        match self {
            Valuation::Additive(v) => v.len(),
            Valuation::Table(t) => t.items,
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Valuation::Additive(_))
    }

    /// Per-item values of an additive valuation.
    pub fn additive_values(&self) -> Option<&[Rational]> {
        match self {
            Valuation::Additive(v) => Some(v),
            Valuation::Table(_) => None,
        }
    }

    /// Value of `bundle`. Item indices must be below [`Self::item_count`].
    pub fn value(&self, bundle: &Bundle) -> Rational {
        match self {
            Valuation::Additive(v) => bundle.iter().map(|&j| &v[j]).sum(),
            Valuation::Table(t) => t.get(mask_of(bundle)).clone(),
        }
    }

    /// `v(bundle \ {item})`; equals `v(bundle)` when the item is absent.
    pub fn value_without(&self, bundle: &Bundle, item: usize) -> Rational {
        match self {
            Valuation::Additive(v) => bundle
                .iter()
                .filter(|&&j| j != item)
                .map(|&j| &v[j])
                .sum(),
            Valuation::Table(t) => t.get(mask_of(bundle) & !(1 << item)).clone(),
        }
    }

    /// Marginal value `v(item | bundle)` for an item not in `bundle`.
    pub fn marginal(&self, item: usize, bundle: &Bundle) -> Rational {
        match self {
            Valuation::Additive(v) => v[item].clone(),
            Valuation::Table(t) => {
                let m = mask_of(bundle);
                t.get(m | (1 << item)) - t.get(m)
            }
        }
    }

    fn marginals_of(&self, item: usize) -> Box<dyn Iterator<Item = Rational> + '_> {
        match self {
            Valuation::Additive(v) => Box::new(std::iter::once(v[item].clone())),
            Valuation::Table(t) => {
                let bit = 1u32 << item;
                Box::new(
                    (0..1u32 << t.items)
                        .filter(move |s| s & bit == 0)
                        .map(move |s| t.get(s | bit) - t.get(s)),
                )
            }
        }
    }

    /// Every marginal of `item` is `>= 0`.
    pub fn has_nonnegative_marginals(&self, item: usize) -> bool {
        self.marginals_of(item).all(|d| !d.is_negative())
    }

    /// Every marginal of `item` is `<= 0`.
    pub fn has_nonpositive_marginals(&self, item: usize) -> bool {
        self.marginals_of(item).all(|d| !d.is_positive())
    }

    pub fn classify(&self, item: usize) -> ItemKind {
        let mut all_nonneg = true;
        let mut all_nonpos = true;
        let mut some_neg = false;
        for d in self.marginals_of(item) {
            if d.is_negative() {
                all_nonneg = false;
                some_neg = true;
            } else if d.is_positive() {
                all_nonpos = false;
            }
        }
        if all_nonneg {
            ItemKind::Good
        } else if all_nonpos && some_neg {
            ItemKind::Chore
        } else {
            ItemKind::Neither
        }
    }

    /// `S ⊆ T ⇒ v(S) >= v(T)`.
    pub fn is_monotone_nonincreasing(&self) -> bool {
        (0..self.item_count()).all(|j| self.has_nonpositive_marginals(j))
    }

    /// `S ⊆ T ⇒ v(S) <= v(T)`.
    pub fn is_monotone_nondecreasing(&self) -> bool {
        (0..self.item_count()).all(|j| self.has_nonnegative_marginals(j))
    }

    pub fn is_doubly_monotone(&self) -> bool {
        (0..self.item_count()).all(|j| self.classify(j) != ItemKind::Neither)
    }

    /// Expands to an explicit subset table (at most [`MAX_TABLE_ITEMS`] items).
    pub fn to_table(&self) -> Result<TableValuation> {
        match self {
            Valuation::Table(t) => Ok(t.clone()),
            Valuation::Additive(v) => TableValuation::from_fn(v.len(), |mask| {
                (0..v.len())
                    .filter(|j| mask & (1 << j) != 0)
                    .map(|j| &v[j])
                    .sum()
            }),
        }
    }
}
