//! Seeded random instance families.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cake::{DivisibleKind, PiecewiseConstantDensity};
use crate::error::{Error, Result};
use crate::hardness::{reduce_set_splitting, SetSplittingInstance};
use crate::instance::{IndivisibleInstance, MixedInstance};
use crate::rational::{int, ratio, Rational};
use crate::valuation::{TableValuation, Valuation};

pub type Generator = ChaCha8Rng;

pub fn rng(seed: u64) -> Generator {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small rational in `[lo, hi]` with denominator 1, 2 or 3.
fn small(rng: &mut Generator, lo: i64, hi: i64) -> Rational {
    let den = rng.gen_range(1..=3);
    ratio(rng.gen_range(lo * den..=hi * den), den)
}

fn additive(rows: Vec<Vec<Rational>>, items: usize) -> IndivisibleInstance {
    if rows.is_empty() {
        return IndivisibleInstance::new(items, vec![]).expect("no agents");
    }
    IndivisibleInstance::additive(rows).expect("generated rows are rectangular")
}

/// Additive chores with costs in `[0, max_cost]`.
pub fn additive_chores(rng: &mut Generator, agents: usize, items: usize, max_cost: i64) -> IndivisibleInstance {
    let rows = (0..agents)
        .map(|_| (0..items).map(|_| -small(rng, 0, max_cost)).collect())
        .collect();
    additive(rows, items)
}

/// Additive chores with every value in {-1, 0}.
pub fn binary_chores(rng: &mut Generator, agents: usize, items: usize) -> IndivisibleInstance {
    let rows = (0..agents)
        .map(|_| (0..items).map(|_| if rng.gen_bool(0.5) { int(-1) } else { int(0) }).collect())
        .collect();
    additive(rows, items)
}

/// A random set function over `items` built in order of bundle size:
/// `f(S) = best_{j in S} f(S - j) + step` with the step drawn from
/// `[0, 3]`, `best` = max and `sign = 1` for non-decreasing functions,
/// `best` = min and `sign = -1` for non-increasing ones.
fn monotone_table(rng: &mut Generator, items: usize, sign: i64) -> Vec<Rational> {
    let size = 1usize << items;
    let mut masks: Vec<u32> = (0..size as u32).collect();
    masks.sort_by_key(|m| m.count_ones());
    let mut values = vec![int(0); size];
    for mask in masks.into_iter().skip(1) {
        let subs = (0..items).filter(|j| mask >> j & 1 == 1).map(|j| &values[(mask & !(1 << j)) as usize]);
        let base = if sign > 0 { subs.max() } else { subs.min() }.expect("non-empty mask").clone();
        values[mask as usize] = base + int(sign) * small(rng, 0, 3);
    }
    values
}

/// Monotone non-increasing (generally non-additive) chores, as tables.
pub fn table_chores(rng: &mut Generator, agents: usize, items: usize) -> Result<IndivisibleInstance> {
    let valuations = (0..agents)
        .map(|_| TableValuation::new(items, monotone_table(rng, items, -1)).map(Valuation::Table))
        .collect::<Result<Vec<_>>>()?;
    IndivisibleInstance::new(items, valuations)
}

/// Additive doubly monotone items: each value is a good in `[0, max]` or
/// a chore in `[-max, 0]`, decided independently per agent and item.
pub fn doubly_monotone_additive(rng: &mut Generator, agents: usize, items: usize, max: i64) -> IndivisibleInstance {
    let rows = (0..agents)
        .map(|_| {
            (0..items)
                .map(|_| if rng.gen_bool(0.5) { small(rng, 0, max) } else { -small(rng, 0, max) })
                .collect()
        })
        .collect();
    additive(rows, items)
}

/// Non-additive doubly monotone items: for a random split of the items into
/// goods `G` and chores `C`, `v(S) = g(S ∩ G) + c(S ∩ C)` with `g`
/// non-decreasing and `c` non-increasing.
pub fn doubly_monotone_table(rng: &mut Generator, agents: usize, items: usize) -> Result<IndivisibleInstance> {
    let mut valuations = Vec::with_capacity(agents);
    for _ in 0..agents {
        let goods: u32 = (0..items).filter(|_| rng.gen_bool(0.5)).fold(0, |acc, j| acc | 1 << j);
        let g = monotone_table(rng, items, 1);
        let c = monotone_table(rng, items, -1);
        let table = TableValuation::from_fn(items, |mask| &g[(mask & goods) as usize] + &c[(mask & !goods) as usize])?;
        valuations.push(Valuation::Table(table));
    }
    IndivisibleInstance::new(items, valuations)
}

/// Additive chores ranked identically by the agents in `0..identical`;
/// the others draw independent costs.
pub fn ranked_chores(rng: &mut Generator, agents: usize, items: usize, identical: usize, max_cost: i64) -> IndivisibleInstance {
    let mut order: Vec<usize> = (0..items).collect();
    order.shuffle(rng);
    let rows = (0..agents)
        .map(|a| {
            let mut costs: Vec<Rational> = (0..items).map(|_| small(rng, 0, max_cost)).collect();
            let mut row = vec![int(0); items];
            if a < identical {
                costs.sort();
                for (rank, &item) in order.iter().enumerate() {
                    row[item] = -costs[rank].clone();
                }
            } else {
                for (item, cost) in costs.into_iter().enumerate() {
                    row[item] = -cost;
                }
            }
            row
        })
        .collect();
    additive(rows, items)
}

/// Additive chores with identical rankings.
pub fn identical_rankings(rng: &mut Generator, agents: usize, items: usize, max_cost: i64) -> IndivisibleInstance {
    ranked_chores(rng, agents, items, agents, max_cost)
}

/// A set splitting instance with `members` random non-empty subsets of `0..universe`.
pub fn set_splitting(rng: &mut Generator, universe: usize, members: usize) -> Result<SetSplittingInstance> {
    if universe == 0 && members > 0 {
        return Err(Error::Precondition("non-empty family over an empty universe".into()));
    }
    let family = (0..members)
        .map(|_| loop {
            let set: BTreeSet<usize> = (0..universe).filter(|_| rng.gen_bool(0.5)).collect();
            if !set.is_empty() {
                break set;
            }
        })
        .collect();
    SetSplittingInstance::new(universe, family)
}

/// A random step density with between 1 and `max_segments` segments on a
/// grid of twelfths, admissible for `kind`. Zero levels are common.
pub fn density(rng: &mut Generator, kind: DivisibleKind, max_segments: usize) -> PiecewiseConstantDensity {
    let segments = rng.gen_range(1..=max_segments.clamp(1, 12));
    let mut cuts: Vec<i64> = (1..12).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(segments - 1).collect();
    cuts.sort();
    let mut breakpoints = vec![int(0)];
    breakpoints.extend(cuts.into_iter().map(|c| ratio(c, 12)));
    breakpoints.push(int(1));
    let sign = match kind {
        DivisibleKind::Cake => 1,
        DivisibleKind::BadCake => -1,
    };
    let levels = (0..segments)
        .map(|_| if rng.gen_bool(0.2) { int(0) } else { int(sign) * small(rng, 0, 4) })
        .collect();
    PiecewiseConstantDensity::new(breakpoints, levels).expect("generated density is valid")
}

pub fn mixed(
    rng: &mut Generator,
    items: IndivisibleInstance,
    kind: DivisibleKind,
    max_segments: usize,
) -> Result<MixedInstance> {
    let densities = (0..items.agents()).map(|_| density(rng, kind, max_segments)).collect();
    MixedInstance::new(items, densities, kind)
}

/// Named families for the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    AdditiveChores,
    BinaryChores,
    TableChores,
    DoublyMonotone,
    IdenticalRankings,
    SetSplittingReduced,
    MixedBadCake,
    MixedCake,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::AdditiveChores,
        Family::BinaryChores,
        Family::TableChores,
        Family::DoublyMonotone,
        Family::IdenticalRankings,
        Family::SetSplittingReduced,
        Family::MixedBadCake,
        Family::MixedCake,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::AdditiveChores => "additive-chores",
            Family::BinaryChores => "binary-chores",
            Family::TableChores => "table-chores",
            Family::DoublyMonotone => "doubly-monotone",
            Family::IdenticalRankings => "identical-rankings",
            Family::SetSplittingReduced => "set-splitting-reduced",
            Family::MixedBadCake => "mixed-badcake",
            Family::MixedCake => "mixed-cake",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Size parameters shared by the families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    pub agents: usize,
    pub items: usize,
    pub max_value: i64,
    pub segments: usize,
    /// Set splitting: universe size.
    pub universe: usize,
    /// Set splitting: number of family members.
    pub members: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams { agents: 3, items: 6, max_value: 5, segments: 3, universe: 3, members: 2 }
    }
}

/// An instance of a family; mixed families return the cake part as well.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Indivisible(IndivisibleInstance),
    Mixed(MixedInstance),
}

pub fn generate(family: Family, seed: u64, p: &FamilyParams) -> Result<Generated> {
    let mut r = rng(seed);
    if p.max_value < 0 {
        return Err(Error::Precondition("max value must be non-negative".into()));
    }
    let table_limit = |items: usize| {
        if items > 12 {
            Err(Error::Precondition(format!("table families support at most 12 items, got {items}")))
        } else {
            Ok(())
        }
    };
    Ok(match family {
        Family::AdditiveChores => Generated::Indivisible(additive_chores(&mut r, p.agents, p.items, p.max_value)),
        Family::BinaryChores => Generated::Indivisible(binary_chores(&mut r, p.agents, p.items)),
        Family::TableChores => {
            table_limit(p.items)?;
            Generated::Indivisible(table_chores(&mut r, p.agents, p.items)?)
        }
        Family::DoublyMonotone => {
            Generated::Indivisible(doubly_monotone_additive(&mut r, p.agents, p.items, p.max_value))
        }
        Family::IdenticalRankings => {
            Generated::Indivisible(identical_rankings(&mut r, p.agents, p.items, p.max_value))
        }
        Family::SetSplittingReduced => {
            Generated::Indivisible(reduce_set_splitting(&set_splitting(&mut r, p.universe, p.members)?))
        }
        Family::MixedBadCake => {
            let items = doubly_monotone_additive(&mut r, p.agents, p.items, p.max_value);
            Generated::Mixed(mixed(&mut r, items, DivisibleKind::BadCake, p.segments)?)
        }
        Family::MixedCake => {
            let items = additive_chores(&mut r, p.agents, p.items, p.max_value);
            Generated::Mixed(mixed(&mut r, items, DivisibleKind::Cake, p.segments)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixed::common_ranking;

    #[test]
    fn families_satisfy_their_validators() {
        for seed in 0..50 {
            let mut r = rng(seed);
            assert!(additive_chores(&mut r, 3, 5, 4).is_additive_chores());
            assert!(table_chores(&mut r, 2, 4).unwrap().is_monotone_nonincreasing());
            assert!(doubly_monotone_table(&mut r, 3, 4).unwrap().doubly_monotone_partition().is_ok());
            assert!(doubly_monotone_additive(&mut r, 3, 4, 3).doubly_monotone_partition().is_ok());
            let ir = identical_rankings(&mut r, 4, 7, 5);
            assert!(common_ranking(&ir, &[0, 1, 2, 3]).is_some());
            let bc = binary_chores(&mut r, 2, 5);
            assert!(crate::hardness::is_binary_chores(&bc));
            assert!(density(&mut r, DivisibleKind::BadCake, 4).fits(DivisibleKind::BadCake));
            assert!(density(&mut r, DivisibleKind::Cake, 4).levels().len() <= 4);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = FamilyParams::default();
        for family in Family::ALL {
            assert_eq!(generate(family, 7, &p).unwrap(), generate(family, 7, &p).unwrap());
            assert_eq!(Family::from_name(family.name()), Some(family));
        }
    }
}
