//! Set splitting, its reduction to envy-free chore allocation, and
//! brute-force search over all complete allocations.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::check::Notion;
use crate::error::{Error, Result};
use crate::instance::{Allocation, IndivisibleInstance};
use crate::rational::{int, Rational};

/// Default cap on the number of complete allocations a search may visit.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// A universe `0..universe` and a family of non-empty subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSplittingInstance {
    universe: usize,
    family: Vec<BTreeSet<usize>>,
}

impl SetSplittingInstance {
    pub fn new(universe: usize, family: Vec<BTreeSet<usize>>) -> Result<Self> {
        for (t, set) in family.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidInstance(format!("family member {t} is empty")));
            }
            if let Some(x) = set.iter().find(|&&x| x >= universe) {
                return Err(Error::InvalidInstance(format!("family member {t} contains {x} outside 0..{universe}")));
            }
        }
        Ok(SetSplittingInstance { universe, family })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn family(&self) -> &[BTreeSet<usize>] {
        &self.family
    }

    /// Number of edge agents (and dummy chores) in the reduction.
    pub fn edge_agents(&self) -> usize {
        self.universe.max(self.family.len())
    }

    /// First 2-colouring (colour of element `x` is bit `x`, counting up)
    /// under which every member sees both colours.
    pub fn splitting(&self) -> Option<Vec<bool>> {
        let q = self.universe;
        (0u64..1 << q)
            .find(|&mask| {
                self.family.iter().all(|set| {
                    let ones = set.iter().filter(|&&x| mask >> x & 1 == 1).count();
                    ones > 0 && ones < set.len()
                })
            })
            .map(|mask| (0..q).map(|x| mask >> x & 1 == 1).collect())
    }

    pub fn is_splittable(&self) -> bool {
        self.splitting().is_some()
    }
}

/// The chores instance of the reduction.
///
/// With `r' = max(q, |F|)`, items `0..r'` are dummy chores and `r'..r'+q`
/// are vertex chores; agents `0..r'` are edge agents and `r'`, `r'+1` are
/// the two colour agents. Dummy chores cost 1 to everyone. Vertex chore
/// `x` costs 1 to edge agent `e` iff `x` is in the `e`-th family member;
/// edge agents past `|F|` stand for the whole universe. Colour agents do
/// not mind vertex chores.
pub fn reduce_set_splitting(ss: &SetSplittingInstance) -> IndivisibleInstance {
    let q = ss.universe;
    let r = ss.edge_agents();
    let everything: BTreeSet<usize> = (0..q).collect();
    let mut rows = Vec::with_capacity(r + 2);
    for e in 0..r {
        let edge = ss.family.get(e).unwrap_or(&everything);
        let mut row = vec![int(-1); r];
        row.extend((0..q).map(|x| if edge.contains(&x) { int(-1) } else { int(0) }));
        rows.push(row);
    }
    for _ in 0..2 {
        let mut row = vec![int(-1); r];
        row.extend((0..q).map(|_| int(0)));
        rows.push(row);
    }
    IndivisibleInstance::additive(rows).expect("reduction rows are rectangular")
}

/// The envy-free allocation built from a splitting: one dummy chore per
/// edge agent, vertex chores to the colour agent of their colour.
pub fn allocation_from_splitting(ss: &SetSplittingInstance, colouring: &[bool]) -> Allocation {
    let r = ss.edge_agents();
    let mut owners: Vec<usize> = (0..r).collect();
    owners.extend(colouring.iter().map(|&c| r + usize::from(c)));
    Allocation::from_owners(r + 2, &owners)
}

/// `n^m`, saturating.
pub fn search_space(agents: usize, items: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 0..items {
        total = total.saturating_mul(agents as u128);
    }
    total
}

/// First EF allocation in lexicographic order of the owner vector
/// `(owner(0), owner(1), ...)`, or `None` if no allocation is EF.
pub fn brute_force_ef_exists(instance: &IndivisibleInstance, budget: u128) -> Result<Option<Allocation>> {
    brute_force_fair_search(instance, Notion::Ef, budget)
}

/// First allocation in lexicographic owner-vector order satisfying `notion`
/// (EF or EF1).
///
/// The search is split across threads by the owner of item 0; the result
/// is the same as a sequential scan.
pub fn brute_force_fair_search(
    instance: &IndivisibleInstance,
    notion: Notion,
    budget: u128,
) -> Result<Option<Allocation>> {
    if notion == Notion::Efm {
        return Err(Error::Precondition("brute-force search covers EF and EF1 only".into()));
    }
    let n = instance.agents();
    let m = instance.items();
    let required = search_space(n, m);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    if m == 0 {
        return Ok(Some(Allocation::empty(n)).filter(|_| n > 0));
    }
    if n == 0 {
        return Ok(None);
    }
    let values = Values::new(instance);
    let pruning = if instance.is_monotone_nonincreasing() {
        Pruning::Chores
    } else if instance.is_monotone_nondecreasing() {
        Pruning::Goods
    } else {
        Pruning::None
    };
    let search = Search { values: &values, notion, pruning, n, m };
    // Workers own a first-item agent each; a hit for agent a makes every
    // worker with a larger first agent irrelevant.
    let best = AtomicUsize::new(usize::MAX);
    let hits: Vec<Option<Vec<usize>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n)
            .map(|first| {
                let search = &search;
                let best = &best;
                scope.spawn(move || {
                    let hit = search.run_from(first, best);
                    if hit.is_some() {
                        best.fetch_min(first, Ordering::SeqCst);
                    }
                    hit
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    Ok(hits.into_iter().flatten().next().map(|owners| Allocation::from_owners(n, &owners)))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pruning {
    None,
    Chores,
    Goods,
}

/// Bundle values by bitmask, either as exact rationals or, when every
/// agent's values share a small enough denominator, as scaled integers.
enum Values<'a> {
    Scaled(Vec<Vec<i128>>),
    Tables(Vec<Vec<Rational>>),
    Direct(&'a IndivisibleInstance),
}

const MAX_PRECOMPUTED_ITEMS: usize = 16;

impl<'a> Values<'a> {
    fn new(instance: &'a IndivisibleInstance) -> Self {
        let m = instance.items();
        if m > MAX_PRECOMPUTED_ITEMS {
            return Values::Direct(instance);
        }
        let tables: Vec<Vec<Rational>> = (0..instance.agents())
            .map(|a| {
                let v = instance.valuation(a);
                (0u32..1 << m).map(|mask| v.value(&bundle_of(mask))).collect()
            })
            .collect();
        match tables.iter().map(|t| scale(t)).collect::<Option<Vec<_>>>() {
            Some(scaled) => Values::Scaled(scaled),
            None => Values::Tables(tables),
        }
    }

    /// Sign of `v_a(x) - v_a(y)`.
    fn cmp(&self, agent: usize, x: u32, y: u32) -> std::cmp::Ordering {
        match self {
            Values::Scaled(t) => t[agent][x as usize].cmp(&t[agent][y as usize]),
            Values::Tables(t) => t[agent][x as usize].cmp(&t[agent][y as usize]),
            Values::Direct(inst) => {
                let v = inst.valuation(agent);
                v.value(&bundle_of(x)).cmp(&v.value(&bundle_of(y)))
            }
        }
    }
}

fn bundle_of(mask: u32) -> BTreeSet<usize> {
    (0..32).filter(|&j| mask >> j & 1 == 1).collect()
}

/// Multiplies a table by the lcm of its denominators if the result fits i128.
fn scale(table: &[Rational]) -> Option<Vec<i128>> {
    let lcm = table.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    table
        .iter()
        .map(|v| {
            let scaled = v.numer() * (&lcm / v.denom());
            scaled.to_i128()
        })
        .collect()
}

struct Search<'a> {
    values: &'a Values<'a>,
    notion: Notion,
    pruning: Pruning,
    n: usize,
    m: usize,
}

impl Search<'_> {
    fn run_from(&self, first: usize, best: &AtomicUsize) -> Option<Vec<usize>> {
        let mut owners = vec![0; self.m];
        let mut masks = vec![0u32; self.n];
        owners[0] = first;
        masks[first] |= 1;
        self.dfs(1, &mut owners, &mut masks, first, best).then_some(owners)
    }

    fn dfs(&self, item: usize, owners: &mut [usize], masks: &mut [u32], first: usize, best: &AtomicUsize) -> bool {
        if best.load(Ordering::Relaxed) < first {
            return false;
        }
        if item == self.m {
            return self.fair(masks);
        }
        if self.notion == Notion::Ef && self.pruning != Pruning::None && !self.may_become_ef(masks, item) {
            return false;
        }
        for agent in 0..self.n {
            owners[item] = agent;
            masks[agent] |= 1 << item;
            if self.dfs(item + 1, owners, masks, first, best) {
                return true;
            }
            masks[agent] &= !(1 << item);
        }
        false
    }

    /// False when some envy is already certain whatever happens to the
    /// unassigned items `from..m`.
    fn may_become_ef(&self, masks: &[u32], from: usize) -> bool {
        let rest: u32 = ((1u64 << self.m) - (1u64 << from)) as u32;
        (0..self.n).all(|i| {
            (0..self.n).all(|k| {
                i == k
                    || match self.pruning {
                        // own value can only drop, the other bundle is worth at least A_k + rest
                        Pruning::Chores => self.values.cmp(i, masks[i], masks[k] | rest).is_ge(),
                        // own value is at most A_i + rest, the other bundle at least A_k
                        Pruning::Goods => self.values.cmp(i, masks[i] | rest, masks[k]).is_ge(),
                        Pruning::None => true,
                    }
            })
        })
    }

    fn fair(&self, masks: &[u32]) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|k| {
                if i == k || self.values.cmp(i, masks[i], masks[k]).is_ge() {
                    return true;
                }
                if self.notion == Notion::Ef {
                    return false;
                }
                let union = masks[i] | masks[k];
                (0..self.m).filter(|j| union >> j & 1 == 1).any(|j| {
                    let drop = !(1u32 << j);
                    self.values.cmp(i, masks[i] & drop, masks[k] & drop).is_ge()
                })
            })
        })
    }
}

/// Whether an instance value table is binary (every value in {-1, 0}).
pub fn is_binary_chores(instance: &IndivisibleInstance) -> bool {
    instance.valuations().iter().all(|v| {
        v.additive_values()
            .is_some_and(|row| row.iter().all(|x| x.is_zero() || *x == -Rational::one()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{check_ef, check_ef1};
    use crate::rational::ratio;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn reduction_matrix_small() {
        let ss = SetSplittingInstance::new(2, vec![set(&[0, 1])]).unwrap();
        let inst = reduce_set_splitting(&ss);
        assert_eq!((inst.agents(), inst.items()), (4, 4));
        let rows: Vec<Vec<Rational>> = (0..4).map(|a| inst.valuation(a).additive_values().unwrap().to_vec()).collect();
        let expect = |r: [i64; 4]| r.iter().map(|&v| int(v)).collect::<Vec<_>>();
        assert_eq!(rows[0], expect([-1, -1, -1, -1]));
        assert_eq!(rows[1], expect([-1, -1, -1, -1]));
        assert_eq!(rows[2], expect([-1, -1, 0, 0]));
        assert_eq!(rows[3], expect([-1, -1, 0, 0]));
        assert!(is_binary_chores(&inst));
    }

    #[test]
    fn empty_family_uses_imaginary_edges() {
        let ss = SetSplittingInstance::new(3, vec![]).unwrap();
        assert_eq!(ss.edge_agents(), 3);
        let inst = reduce_set_splitting(&ss);
        for e in 0..3 {
            assert!(inst.valuation(e).additive_values().unwrap().iter().all(|v| *v == int(-1)));
        }
    }

    #[test]
    fn invalid_family_rejected() {
        assert!(SetSplittingInstance::new(2, vec![set(&[])]).is_err());
        assert!(SetSplittingInstance::new(2, vec![set(&[2])]).is_err());
    }

    #[test]
    fn splitting_and_constructed_allocation() {
        let ss = SetSplittingInstance::new(3, vec![set(&[0, 1]), set(&[1, 2])]).unwrap();
        let colouring = ss.splitting().unwrap();
        let inst = reduce_set_splitting(&ss);
        assert!(check_ef(&inst, &allocation_from_splitting(&ss, &colouring)).holds());
        let triangle = SetSplittingInstance::new(3, vec![set(&[0, 1]), set(&[1, 2]), set(&[0, 2])]).unwrap();
        assert!(!triangle.is_splittable());
        assert!(brute_force_ef_exists(&reduce_set_splitting(&triangle), DEFAULT_BUDGET).unwrap().is_none());
    }

    #[test]
    fn brute_force_basics() {
        let one_agent = IndivisibleInstance::additive(vec![vec![int(-1), int(-2)]]).unwrap();
        let a = brute_force_ef_exists(&one_agent, DEFAULT_BUDGET).unwrap().unwrap();
        assert_eq!(a.bundle(0).len(), 2);

        let twins = IndivisibleInstance::additive(vec![vec![int(-1), int(-1)]; 2]).unwrap();
        let a = brute_force_ef_exists(&twins, DEFAULT_BUDGET).unwrap().unwrap();
        assert_eq!(a.bundles(), &[set(&[0]), set(&[1])]);

        let empty = IndivisibleInstance::additive(vec![vec![], vec![]]).unwrap();
        let a = brute_force_fair_search(&empty, Notion::Ef1, DEFAULT_BUDGET).unwrap().unwrap();
        assert_eq!(a.assigned_count(), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let inst = IndivisibleInstance::additive(vec![vec![int(-1); 10]; 3]).unwrap();
        assert_eq!(
            brute_force_ef_exists(&inst, 1000),
            Err(Error::BudgetExceeded { required: 59049, budget: 1000 })
        );
    }

    #[test]
    fn search_matches_sequential_scan() {
        let inst = IndivisibleInstance::additive(vec![
            vec![ratio(-1, 3), int(-2), int(1), ratio(-5, 2)],
            vec![int(-1), ratio(1, 2), int(-1), int(-1)],
            vec![int(2), int(-3), ratio(-1, 7), int(0)],
        ])
        .unwrap();
        for notion in [Notion::Ef, Notion::Ef1] {
            let mut expected = None;
            for code in 0..81usize {
                let owners: Vec<usize> = (0..4).map(|j| code / 3usize.pow(3 - j as u32) % 3).collect();
                let alloc = Allocation::from_owners(3, &owners);
                let ok = match notion {
                    Notion::Ef => check_ef(&inst, &alloc).holds(),
                    _ => check_ef1(&inst, &alloc).holds(),
                };
                if ok {
                    expected = Some(alloc);
                    break;
                }
            }
            assert_eq!(brute_force_fair_search(&inst, notion, DEFAULT_BUDGET).unwrap(), expected);
        }
    }
}
