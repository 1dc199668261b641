//! EF, EF1 and EFM checkers.
//!
//! Every checker returns a [`FairnessCertificate`] with one verdict per
//! ordered pair of distinct agents. Witnesses name the removed item, so a
//! certificate can be replayed against the allocation it was issued for
//! (see [`FairnessCertificate::verify`]).

use num_traits::{Signed, Zero};

use crate::instance::{Allocation, Bundle, IndivisibleInstance, MixedAllocation, MixedInstance};
use crate::rational::Rational;
use crate::valuation::Valuation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Notion {
    Ef,
    Ef1,
    Efm,
}

impl Notion {
    pub fn name(self) -> &'static str {
        match self {
            Notion::Ef => "EF",
            Notion::Ef1 => "EF1",
            Notion::Efm => "EFM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    /// The envier strictly prefers the other bundle (EF).
    Envy,
    /// No single item removal bounds the envy.
    NoRemovableItem,
    /// The envier holds cake it values negatively (EFM condition a).
    EnvierHoldsBadCake,
    /// The envied agent holds cake the envier values positively (EFM condition b).
    EnviedHoldsCake,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairStatus {
    NoEnvy,
    Ef1Witness { item: usize },
    /// Conditions (a) and (b) hold and removing `item` satisfies (c).
    EfmWitness { item: usize },
    Violation(Violation),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairVerdict {
    pub envier: usize,
    pub envied: usize,
    pub status: PairStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FairnessCertificate {
    pub notion: Notion,
    pub pairs: Vec<PairVerdict>,
}

impl FairnessCertificate {
    pub fn holds(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn violations(&self) -> impl Iterator<Item = &PairVerdict> {
        self.pairs
            .iter()
            .filter(|p| matches!(p.status, PairStatus::Violation(_)))
    }

    pub fn pair(&self, envier: usize, envied: usize) -> Option<&PairVerdict> {
        self.pairs.iter().find(|p| p.envier == envier && p.envied == envied)
    }

    /// Replays every verdict against an items-only allocation.
    pub fn verify(&self, instance: &IndivisibleInstance, alloc: &Allocation) -> bool {
        let view = View::indivisible(instance, alloc);
        self.verify_view(&view)
    }

    /// Replays every verdict against a mixed allocation.
    pub fn verify_mixed(&self, instance: &MixedInstance, alloc: &MixedAllocation) -> bool {
        let view = View::mixed(instance, alloc);
        self.verify_view(&view)
    }

    fn verify_view(&self, view: &View<'_>) -> bool {
        let n = view.agents();
        if self.pairs.len() != n * n.saturating_sub(1) {
            return false;
        }
        self.pairs.iter().all(|p| {
            if p.envier == p.envied || p.envier >= n || p.envied >= n {
                return false;
            }
            let (i, k) = (p.envier, p.envied);
            let envious = view.own(i) < view.other(i, k);
            match p.status {
                PairStatus::NoEnvy => !envious,
                PairStatus::Ef1Witness { item } => {
                    self.notion == Notion::Ef1 && view.removal_bounds(i, k, item)
                }
                PairStatus::EfmWitness { item } => {
                    self.notion == Notion::Efm
                        && !view.cake_value(i, i).is_negative()
                        && !view.cake_value(i, k).is_positive()
                        && view.removal_bounds(i, k, item)
                }
                PairStatus::Violation(Violation::Envy) => self.notion == Notion::Ef && envious,
                PairStatus::Violation(Violation::EnvierHoldsBadCake) => {
                    envious && view.cake_value(i, i).is_negative()
                }
                PairStatus::Violation(Violation::EnviedHoldsCake) => {
                    envious && view.cake_value(i, k).is_positive()
                }
                PairStatus::Violation(Violation::NoRemovableItem) => {
                    envious && !view.union(i, k).any(|j| view.removal_bounds(i, k, j))
                }
            }
        })
    }
}

/// Valuations, item bundles and (optionally) cake values `cake[i][k] = f_i(C_k)`.
struct View<'a> {
    valuations: &'a [Valuation],
    bundles: &'a [Bundle],
    cake: Option<Vec<Vec<Rational>>>,
    totals: Vec<Vec<Rational>>,
}

impl<'a> View<'a> {
    fn indivisible(instance: &'a IndivisibleInstance, alloc: &'a Allocation) -> Self {
        Self::build(instance.valuations(), alloc.bundles(), None)
    }

    fn mixed(instance: &'a MixedInstance, alloc: &'a MixedAllocation) -> Self {
        let n = instance.agents();
        let cake = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| instance.density(i).value(alloc.cake_piece(k)))
                    .collect()
            })
            .collect();
        Self::build(instance.indivisible().valuations(), alloc.items().bundles(), Some(cake))
    }

    fn build(valuations: &'a [Valuation], bundles: &'a [Bundle], cake: Option<Vec<Vec<Rational>>>) -> Self {
        let n = bundles.len();
        let totals = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let v = valuations[i].value(&bundles[k]);
                        match &cake {
                            Some(c) => v + &c[i][k],
                            None => v,
                        }
                    })
                    .collect()
            })
            .collect();
        View { valuations, bundles, cake, totals }
    }

    fn agents(&self) -> usize {
        self.bundles.len()
    }

    fn own(&self, i: usize) -> &Rational {
        &self.totals[i][i]
    }

    fn other(&self, i: usize, k: usize) -> &Rational {
        &self.totals[i][k]
    }

    fn cake_value(&self, i: usize, k: usize) -> Rational {
        self.cake.as_ref().map_or_else(Rational::zero, |c| c[i][k].clone())
    }

    fn union(&self, i: usize, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.bundles[i].union(&self.bundles[k]).copied()
    }

    /// `v_i(A_i \ {j}) >= v_i(A_k \ {j})`, cake untouched.
    fn removal_bounds(&self, i: usize, k: usize, item: usize) -> bool {
        if !self.bundles[i].contains(&item) && !self.bundles[k].contains(&item) {
            return false;
        }
        let v = &self.valuations[i];
        let mut own = v.value_without(&self.bundles[i], item);
        let mut other = v.value_without(&self.bundles[k], item);
        if let Some(c) = &self.cake {
            own += &c[i][i];
            other += &c[i][k];
        }
        own >= other
    }

    fn certificate(&self, notion: Notion) -> FairnessCertificate {
        let n = self.agents();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    pairs.push(PairVerdict { envier: i, envied: k, status: self.pair_status(notion, i, k) });
                }
            }
        }
        FairnessCertificate { notion, pairs }
    }

    fn pair_status(&self, notion: Notion, i: usize, k: usize) -> PairStatus {
        if self.own(i) >= self.other(i, k) {
            return PairStatus::NoEnvy;
        }
        match notion {
            Notion::Ef => PairStatus::Violation(Violation::Envy),
            Notion::Ef1 => match self.union(i, k).find(|&j| self.removal_bounds(i, k, j)) {
                Some(item) => PairStatus::Ef1Witness { item },
                None => PairStatus::Violation(Violation::NoRemovableItem),
            },
            Notion::Efm => {
                if self.cake_value(i, i).is_negative() {
                    PairStatus::Violation(Violation::EnvierHoldsBadCake)
                } else if self.cake_value(i, k).is_positive() {
                    PairStatus::Violation(Violation::EnviedHoldsCake)
                } else {
                    match self.union(i, k).find(|&j| self.removal_bounds(i, k, j)) {
                        Some(item) => PairStatus::EfmWitness { item },
                        None => PairStatus::Violation(Violation::NoRemovableItem),
                    }
                }
            }
        }
    }
}

pub fn check_ef(instance: &IndivisibleInstance, alloc: &Allocation) -> FairnessCertificate {
    View::indivisible(instance, alloc).certificate(Notion::Ef)
}

pub fn check_ef1(instance: &IndivisibleInstance, alloc: &Allocation) -> FairnessCertificate {
    View::indivisible(instance, alloc).certificate(Notion::Ef1)
}

pub fn check_efm(instance: &MixedInstance, alloc: &MixedAllocation) -> FairnessCertificate {
    View::mixed(instance, alloc).certificate(Notion::Efm)
}

/// EF of a mixed allocation (items and cake together).
pub fn check_ef_mixed(instance: &MixedInstance, alloc: &MixedAllocation) -> FairnessCertificate {
    View::mixed(instance, alloc).certificate(Notion::Ef)
}
