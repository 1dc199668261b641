//! Instances and allocations.

use std::collections::BTreeSet;

use crate::cake::{CakePiece, DivisibleKind, PiecewiseConstantDensity};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::valuation::{ItemKind, Valuation, MAX_TABLE_ITEMS};

/// A set of item indices.
pub type Bundle = BTreeSet<usize>;

/// One agent's split of the items into goods and chores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemPartition {
    pub goods: Bundle,
    pub chores: Bundle,
}

/// Agents `0..n`, items `0..m`, one valuation per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndivisibleInstance {
    items: usize,
    valuations: Vec<Valuation>,
    partition: Option<Vec<ItemPartition>>,
}

impl IndivisibleInstance {
    pub fn new(items: usize, valuations: Vec<Valuation>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidInstance("at least one agent is required".into()));
        }
        for (i, v) in valuations.iter().enumerate() {
            if v.item_count() != items {
                return Err(Error::InvalidInstance(format!(
                    "agent {i} values {} items, instance has {items}",
                    v.item_count()
                )));
            }
            if !v.is_additive() && items > MAX_TABLE_ITEMS {
                return Err(Error::InvalidInstance(format!(
                    "table valuations need m <= {MAX_TABLE_ITEMS}, got {items}"
                )));
            }
        }
        Ok(IndivisibleInstance { items, valuations, partition: None })
    }

    /// Builds an additive instance from an `n x m` matrix.
    pub fn additive(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let items = rows.first().map_or(0, Vec::len);
        Self::new(items, rows.into_iter().map(Valuation::Additive).collect())
    }

    /// Attaches an explicit goods/chores split, checked against the marginal signs.
    pub fn with_partition(mut self, partition: Vec<ItemPartition>) -> Result<Self> {
        if partition.len() != self.agents() {
            return Err(Error::InvalidInstance(format!(
                "partition covers {} agents, instance has {}",
                partition.len(),
                self.agents()
            )));
        }
        for (i, (p, v)) in partition.iter().zip(&self.valuations).enumerate() {
            if !p.goods.is_disjoint(&p.chores) {
                return Err(Error::InvalidInstance(format!("agent {i}: goods and chores overlap")));
            }
            if p.goods.len() + p.chores.len() != self.items
                || p.goods.iter().chain(&p.chores).any(|&j| j >= self.items)
            {
                return Err(Error::InvalidInstance(format!(
                    "agent {i}: goods and chores must partition all {} items",
                    self.items
                )));
            }
            if let Some(j) = p.goods.iter().find(|&&j| !v.has_nonnegative_marginals(j)) {
                return Err(Error::InvalidInstance(format!(
                    "agent {i}: item {j} is listed as a good but has a negative marginal"
                )));
            }
            if let Some(j) = p.chores.iter().find(|&&j| !v.has_nonpositive_marginals(j)) {
                return Err(Error::InvalidInstance(format!(
                    "agent {i}: item {j} is listed as a chore but has a positive marginal"
                )));
            }
        }
        self.partition = Some(partition);
        Ok(self)
    }

    pub fn agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn value(&self, agent: usize, bundle: &Bundle) -> Rational {
        self.valuations[agent].value(bundle)
    }

    pub fn explicit_partition(&self) -> Option<&[ItemPartition]> {
        self.partition.as_deref()
    }

    pub fn is_additive(&self) -> bool {
        self.valuations.iter().all(Valuation::is_additive)
    }

    pub fn is_monotone_nonincreasing(&self) -> bool {
        self.valuations.iter().all(Valuation::is_monotone_nonincreasing)
    }

    pub fn is_monotone_nondecreasing(&self) -> bool {
        self.valuations.iter().all(Valuation::is_monotone_nondecreasing)
    }

    /// The goods/chores split used by the doubly monotone algorithms: the
    /// explicit one if present, otherwise derived item by item. Fails when some
    /// item is neither a good nor a chore for some agent.
    pub fn doubly_monotone_partition(&self) -> Result<Vec<ItemPartition>> {
        if let Some(p) = &self.partition {
            return Ok(p.clone());
        }
        self.valuations
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut part = ItemPartition { goods: Bundle::new(), chores: Bundle::new() };
                for j in 0..self.items {
                    match v.classify(j) {
                        ItemKind::Good => part.goods.insert(j),
                        ItemKind::Chore => part.chores.insert(j),
                        ItemKind::Neither => {
                            return Err(Error::Precondition(format!(
                                "instance is not doubly monotone: item {j} is neither a good nor a chore for agent {i}"
                            )))
                        }
                    };
                }
                Ok(part)
            })
            .collect()
    }

    /// Additive chores: every value `<= 0`.
    pub fn is_additive_chores(&self) -> bool {
        self.is_additive() && self.is_monotone_nonincreasing()
    }

    /// Copy of an additive instance with `extra` zero-valued items appended.
    pub(crate) fn padded_additive(&self, extra: usize) -> Result<Self> {
        let rows = self
            .valuations
            .iter()
            .map(|v| {
                let vals = v.additive_values().ok_or_else(|| {
                    Error::Precondition("padding requires additive valuations".into())
                })?;
                let mut row = vals.to_vec();
                row.extend(std::iter::repeat_with(crate::rational::zero).take(extra));
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        IndivisibleInstance::new(self.items + extra, rows.into_iter().map(Valuation::Additive).collect())
    }
}

/// Disjoint bundles, one per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(agents: usize) -> Self {
        Allocation { bundles: vec![Bundle::new(); agents] }
    }

    /// Builds an allocation, rejecting bundles that share an item.
    pub fn from_bundles(bundles: Vec<Bundle>) -> Result<Self> {
        let mut seen = Bundle::new();
        for (i, b) in bundles.iter().enumerate() {
            for &j in b {
                if !seen.insert(j) {
                    return Err(Error::InvalidAllocation(format!(
                        "item {j} appears in more than one bundle (again in agent {i}'s)"
                    )));
                }
            }
        }
        Ok(Allocation { bundles })
    }

    /// Builds an allocation from an item-owner vector.
    pub fn from_owners(agents: usize, owners: &[usize]) -> Self {
        let mut a = Allocation::empty(agents);
        for (j, &i) in owners.iter().enumerate() {
            a.bundles[i].insert(j);
        }
        a
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &Bundle {
        &self.bundles[agent]
    }

    pub fn into_bundles(self) -> Vec<Bundle> {
        self.bundles
    }

    pub fn assign(&mut self, item: usize, agent: usize) {
        self.bundles[agent].insert(item);
    }

    pub fn owner(&self, item: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(&item))
    }

    pub fn assigned_count(&self) -> usize {
        self.bundles.iter().map(Bundle::len).sum()
    }

    pub fn is_complete(&self, items: usize) -> bool {
        self.assigned_count() == items && self.bundles.iter().flatten().all(|&j| j < items)
    }

    /// Checks shape against an instance: one bundle per agent, items in range.
    pub fn validate_for(&self, instance: &IndivisibleInstance) -> Result<()> {
        if self.agents() != instance.agents() {
            return Err(Error::InvalidAllocation(format!(
                "allocation has {} bundles, instance has {} agents",
                self.agents(),
                instance.agents()
            )));
        }
        if let Some(j) = self.bundles.iter().flatten().find(|&&j| j >= instance.items()) {
            return Err(Error::InvalidAllocation(format!(
                "item {j} out of range for {} items",
                instance.items()
            )));
        }
        Allocation::from_bundles(self.bundles.clone()).map(|_| ())
    }

    /// Drops every item with index `>= items` (virtual padding).
    pub fn strip_items_from(&mut self, items: usize) {
        for b in &mut self.bundles {
            b.retain(|&j| j < items);
        }
    }

    pub(crate) fn bundles_mut(&mut self) -> &mut Vec<Bundle> {
        &mut self.bundles
    }
}

/// Indivisible items plus a divisible resource on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedInstance {
    indivisible: IndivisibleInstance,
    densities: Vec<PiecewiseConstantDensity>,
    kind: DivisibleKind,
}

impl MixedInstance {
    pub fn new(
        indivisible: IndivisibleInstance,
        densities: Vec<PiecewiseConstantDensity>,
        kind: DivisibleKind,
    ) -> Result<Self> {
        if densities.len() != indivisible.agents() {
            return Err(Error::InvalidInstance(format!(
                "{} densities for {} agents",
                densities.len(),
                indivisible.agents()
            )));
        }
        if let Some(i) = densities.iter().position(|d| !d.fits(kind)) {
            return Err(Error::InvalidInstance(format!(
                "density of agent {i} violates the {kind:?} sign constraint"
            )));
        }
        Ok(MixedInstance { indivisible, densities, kind })
    }

    pub fn indivisible(&self) -> &IndivisibleInstance {
        &self.indivisible
    }

    pub fn densities(&self) -> &[PiecewiseConstantDensity] {
        &self.densities
    }

    pub fn density(&self, agent: usize) -> &PiecewiseConstantDensity {
        &self.densities[agent]
    }

    pub fn kind(&self) -> DivisibleKind {
        self.kind
    }

    pub fn agents(&self) -> usize {
        self.indivisible.agents()
    }

    /// `v_agent(M_owner) + f_agent(C_owner)`.
    pub fn utility(&self, agent: usize, alloc: &MixedAllocation, owner: usize) -> Rational {
        self.indivisible.value(agent, alloc.items.bundle(owner))
            + self.densities[agent].value(&alloc.cake[owner])
    }
}

/// Item bundles plus cake pieces, one of each per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MixedAllocation {
    items: Allocation,
    cake: Vec<CakePiece>,
}

impl MixedAllocation {
    pub fn new(items: Allocation, cake: Vec<CakePiece>) -> Result<Self> {
        if items.agents() != cake.len() {
            return Err(Error::InvalidAllocation(format!(
                "{} item bundles but {} cake pieces",
                items.agents(),
                cake.len()
            )));
        }
        for a in 0..cake.len() {
            for b in a + 1..cake.len() {
                if cake[a].overlaps(&cake[b]) {
                    return Err(Error::InvalidAllocation(format!(
                        "cake pieces of agents {a} and {b} overlap"
                    )));
                }
            }
        }
        Ok(MixedAllocation { items, cake })
    }

    pub fn from_items(items: Allocation) -> Self {
        let n = items.agents();
        MixedAllocation { items, cake: vec![CakePiece::empty(); n] }
    }

    pub fn agents(&self) -> usize {
        self.items.agents()
    }

    pub fn items(&self) -> &Allocation {
        &self.items
    }

    pub fn cake(&self) -> &[CakePiece] {
        &self.cake
    }

    pub fn cake_piece(&self, agent: usize) -> &CakePiece {
        &self.cake[agent]
    }

    pub fn allocated_cake_length(&self) -> Rational {
        self.cake.iter().map(CakePiece::length).sum()
    }

    pub fn into_parts(self) -> (Allocation, Vec<CakePiece>) {
        (self.items, self.cake)
    }

    pub fn validate_for(&self, instance: &MixedInstance) -> Result<()> {
        self.items.validate_for(instance.indivisible())?;
        MixedAllocation::new(self.items.clone(), self.cake.clone()).map(|_| ())
    }

    /// Adds `piece` to an agent's cake. The caller guarantees disjointness
    /// from every other piece.
    pub(crate) fn add_cake(&mut self, agent: usize, piece: &CakePiece) -> Result<()> {
        self.cake[agent] = self.cake[agent].union(piece)?;
        Ok(())
    }

    pub(crate) fn items_mut(&mut self) -> &mut Allocation {
        &mut self.items
    }

    pub(crate) fn cake_mut(&mut self) -> &mut Vec<CakePiece> {
        &mut self.cake
    }
}
