//! Allocation of indivisible items together with a divisible cake or bad cake.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::cake::{CakePiece, DivisibleKind, Interval, PiecewiseConstantDensity};
use crate::error::{Error, Result};
use crate::graph::{
    find_cycle, maximal_sink_addable_set, maximal_source_addable_set, resolve_cycle_mixed, EnvyGraph,
    GraphVariant, Utilities,
};
use crate::indivisible::{doubly_monotone_ef1, index_order, padding, round_robin_unpadded, FirstCycle};
use crate::instance::{Allocation, Bundle, IndivisibleInstance, MixedAllocation, MixedInstance};
use crate::rational::{int, one, zero, Rational};
use crate::trace::{RunTrace, TraceEvent};

/// Splits `piece` into `k` parts that every density values equally.
///
/// All breakpoints are overlaid on the piece; each resulting constant
/// segment is cut into `k` equal subintervals and part `j` takes the
/// `j`-th subinterval of every segment.
pub fn perfect_partition(
    densities: &[PiecewiseConstantDensity],
    piece: &CakePiece,
    k: usize,
) -> Result<Vec<CakePiece>> {
    if k == 0 {
        return Err(Error::Precondition("perfect partition into 0 parts".into()));
    }
    let cuts: BTreeSet<&Rational> = densities.iter().flat_map(|d| d.breakpoints()).collect();
    let mut parts: Vec<Vec<Interval>> = vec![Vec::new(); k];
    let kq = int(k as i64);
    for iv in piece.intervals() {
        let mut points = vec![iv.lo.clone()];
        points.extend(cuts.iter().filter(|&&c| c > &iv.lo && c < &iv.hi).map(|&c| c.clone()));
        points.push(iv.hi.clone());
        for w in points.windows(2) {
            let step = (&w[1] - &w[0]) / &kq;
            for (j, part) in parts.iter_mut().enumerate() {
                let lo = &w[0] + &step * int(j as i64);
                let hi = if j + 1 == k { w[1].clone() } else { &lo + &step };
                part.push(Interval::new(lo, hi));
            }
        }
    }
    parts.into_iter().map(CakePiece::from_intervals).collect()
}

/// Asks for the end of the longest prefix `[start, x]` whose value to
/// `agent` stays on the tolerable side of `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixQuery {
    pub start: Rational,
    pub target: Rational,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixAnswer {
    At(Rational),
    /// `v([start, 1])` never reaches the target.
    Unreachable,
}

/// `sup {x : v([a, x]) >= t}` for bad cake, `sup {x : v([a, x]) <= t}` for cake.
pub fn solve_prefix(density: &PiecewiseConstantDensity, kind: DivisibleKind, query: &PrefixQuery) -> Result<PrefixAnswer> {
    let a = &query.start;
    if a.is_negative() || a > &one() {
        return Err(Error::Precondition(format!("prefix start {a} outside [0, 1]")));
    }
    // Flip cake to bad cake so the cumulative value is non-increasing.
    let sign = match kind {
        DivisibleKind::BadCake => one(),
        DivisibleKind::Cake => -one(),
    };
    let target = &query.target * &sign;
    if target.is_positive() {
        return Err(Error::Precondition(format!("prefix target {} has the wrong sign", query.target)));
    }
    let mut cum = zero();
    for (lo, hi, level) in density.segments() {
        if hi <= a {
            continue;
        }
        let s = std::cmp::max(lo, a);
        let level = level * &sign;
        let seg = &level * (hi - s);
        if &cum + &seg < target {
            return Ok(PrefixAnswer::At(s + (&target - &cum) / level));
        }
        cum += seg;
    }
    if cum == target {
        Ok(PrefixAnswer::At(one()))
    } else {
        Ok(PrefixAnswer::Unreachable)
    }
}

fn remainder(a: &Rational) -> Result<CakePiece> {
    if a >= &one() {
        Ok(CakePiece::empty())
    } else {
        CakePiece::interval(a.clone(), one())
    }
}

fn give_cake(
    instance: &MixedInstance,
    state: &mut MixedAllocation,
    trace: &mut RunTrace,
    recipients: Vec<usize>,
    piece: &CakePiece,
) -> Result<()> {
    let pieces = perfect_partition(instance.densities(), piece, recipients.len())?;
    let event = TraceEvent::CakeAllocated { recipients, pieces };
    RunTrace::apply(state, &event)?;
    trace.push(event);
    Ok(())
}

/// Gives `[a, 1]` to agent 0 if nobody values it; returns whether it did.
fn settle_worthless_remainder(
    instance: &MixedInstance,
    state: &mut MixedAllocation,
    trace: &mut RunTrace,
    a: &Rational,
) -> Result<bool> {
    let rest = remainder(a)?;
    if instance.densities().iter().all(|d| d.value(&rest).is_zero()) {
        if !rest.is_empty() {
            give_cake(instance, state, trace, vec![0], &rest)?;
        }
        return Ok(true);
    }
    Ok(false)
}

fn round_limit(n: usize) -> usize {
    // n(n-1) cycle rounds, each followed by at most n cake rounds, plus slack.
    n * n * (n + 1) + 2 * n + 4
}

/// EFM for doubly monotone items and bad cake.
///
/// The items are allocated by [`doubly_monotone_ef1`]. Bad cake then goes
/// out in prefixes: after resolving all top-trading generalized envy
/// cycles, the maximal sink addable set `S` receives a perfect partition of
/// the longest prefix that keeps every member from envying the agents
/// outside `S`.
pub fn efm_doubly_monotone_bad_cake(instance: &MixedInstance) -> Result<(MixedAllocation, RunTrace)> {
    if instance.kind() != DivisibleKind::BadCake {
        return Err(Error::Precondition("expected a bad cake instance".into()));
    }
    let items = instance.indivisible();
    let (alloc, mut trace) = doubly_monotone_ef1(items, &index_order(items.items()), &mut FirstCycle)?;
    let n = instance.agents();
    let mut state = MixedAllocation::from_items(alloc);
    let mut a = zero();
    let mut rounds = 0;
    while a < one() {
        rounds += 1;
        if rounds > round_limit(n) {
            return Err(Error::Invariant(format!("bad cake phase exceeded {} rounds", round_limit(n))));
        }
        loop {
            let top = EnvyGraph::of_mixed(instance, &state, GraphVariant::TopTradingGeneralized)?;
            let Some(cycle) = find_cycle(&top, true) else { break };
            state = resolve_cycle_mixed(&state, &cycle)?;
            trace.push(TraceEvent::CycleResolved { cycle, graph: GraphVariant::TopTradingGeneralized });
        }
        if settle_worthless_remainder(instance, &mut state, &mut trace, &a)? {
            break;
        }
        let graph = EnvyGraph::of_mixed(instance, &state, GraphVariant::Generalized)?;
        let sink_set = maximal_sink_addable_set(&graph);
        if sink_set.is_empty() {
            return Err(Error::Invariant("no sink addable set after resolving top-trading cycles".into()));
        }
        let rest = remainder(&a)?;
        if sink_set.len() == n {
            give_cake(instance, &mut state, &mut trace, (0..n).collect(), &rest)?;
            break;
        }
        let util = Utilities::mixed(instance, &state);
        let outside: Vec<usize> = (0..n).filter(|i| !sink_set.contains(i)).collect();
        let size = int(sink_set.len() as i64);
        let mut end = one();
        for &i in &sink_set {
            let delta = outside
                .iter()
                .map(|&j| util.own(i) - util.get(i, j))
                .min()
                .expect("outside is non-empty");
            if !delta.is_positive() {
                return Err(Error::Invariant(format!("agent {i} in the sink addable set has slack {delta}")));
            }
            let query = PrefixQuery { start: a.clone(), target: -(&size * delta), agent: i };
            if let PrefixAnswer::At(x) = solve_prefix(instance.density(i), DivisibleKind::BadCake, &query)? {
                end = end.min(x);
            }
        }
        let piece = if end >= one() { rest } else { CakePiece::interval(a.clone(), end.clone())? };
        give_cake(instance, &mut state, &mut trace, sink_set.into_iter().collect(), &piece)?;
        a = end;
    }
    Ok((state, trace))
}

/// What the cake phase does with a generalized envy cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyclePolicy {
    /// Resolve the first cycle found by depth-first search.
    ArbitraryCycle,
    /// Abort with [`Error::CycleRefused`].
    RefuseAll,
}

impl CyclePolicy {
    pub fn name(self) -> &'static str {
        match self {
            CyclePolicy::ArbitraryCycle => "arbitrary",
            CyclePolicy::RefuseAll => "refuse",
        }
    }
}

/// Allocates cake on top of an items-only allocation.
///
/// Each round resolves generalized envy cycles according to `policy`,
/// takes the maximal source addable set `S` and gives it a perfect
/// partition of the longest prefix that creates no envy towards `S`.
/// The trace starts with one assignment event per item of `start`.
pub fn efm_cake_phase(
    instance: &MixedInstance,
    start: &Allocation,
    policy: CyclePolicy,
) -> Result<(MixedAllocation, RunTrace)> {
    if instance.kind() != DivisibleKind::Cake {
        return Err(Error::Precondition("expected a cake instance".into()));
    }
    start.validate_for(instance.indivisible())?;
    let n = instance.agents();
    let mut trace = RunTrace::new();
    for (agent, bundle) in start.bundles().iter().enumerate() {
        for &item in bundle {
            trace.push(TraceEvent::ItemAssigned { item, agent });
        }
    }
    let mut state = MixedAllocation::from_items(start.clone());
    let mut a = zero();
    let limit = 8 * round_limit(n) * n.max(1);
    let mut rounds = 0;
    while a < one() {
        rounds += 1;
        if rounds > limit {
            return Err(Error::Invariant(format!("cake phase exceeded {limit} rounds")));
        }
        loop {
            let graph = EnvyGraph::of_mixed(instance, &state, GraphVariant::Generalized)?;
            let Some(cycle) = find_cycle(&graph, true) else { break };
            if policy == CyclePolicy::RefuseAll {
                return Err(Error::CycleRefused {
                    cycle,
                    reason: "the cycle policy refuses every generalized envy cycle".into(),
                });
            }
            state = resolve_cycle_mixed(&state, &cycle)?;
            trace.push(TraceEvent::CycleResolved { cycle, graph: GraphVariant::Generalized });
        }
        if settle_worthless_remainder(instance, &mut state, &mut trace, &a)? {
            break;
        }
        let graph = EnvyGraph::of_mixed(instance, &state, GraphVariant::Generalized)?;
        let source_set = maximal_source_addable_set(&graph);
        if source_set.is_empty() {
            return Err(Error::Invariant("no source addable set after resolving cycles".into()));
        }
        let rest = remainder(&a)?;
        if source_set.len() == n {
            give_cake(instance, &mut state, &mut trace, (0..n).collect(), &rest)?;
            break;
        }
        let util = Utilities::mixed(instance, &state);
        let size = int(source_set.len() as i64);
        let mut end = one();
        for i in (0..n).filter(|i| !source_set.contains(i)) {
            let slack = source_set
                .iter()
                .map(|&j| util.own(i) - util.get(i, j))
                .min()
                .expect("source set is non-empty");
            if !slack.is_positive() {
                return Err(Error::Invariant(format!("agent {i} outside the source addable set has slack {slack}")));
            }
            let query = PrefixQuery { start: a.clone(), target: &size * slack, agent: i };
            if let PrefixAnswer::At(x) = solve_prefix(instance.density(i), DivisibleKind::Cake, &query)? {
                end = end.min(x);
            }
        }
        let piece = if end >= one() { rest } else { CakePiece::interval(a.clone(), end.clone())? };
        give_cake(instance, &mut state, &mut trace, source_set.into_iter().collect(), &piece)?;
        a = end;
    }
    Ok((state, trace))
}

fn require_additive_chores_cake(instance: &MixedInstance) -> Result<()> {
    if instance.kind() != DivisibleKind::Cake {
        return Err(Error::Precondition("expected a cake instance".into()));
    }
    if !instance.indivisible().is_additive_chores() {
        return Err(Error::Precondition("expected additive chores".into()));
    }
    Ok(())
}

/// Items ordered by weakly decreasing value for every agent in `agents`
/// (ties by index), or `None` if their rankings differ. Needs additive
/// valuations.
pub fn common_ranking(instance: &IndivisibleInstance, agents: &[usize]) -> Option<Vec<usize>> {
    let rows: Vec<&[Rational]> = agents
        .iter()
        .map(|&a| instance.valuation(a).additive_values())
        .collect::<Option<_>>()?;
    let m = instance.items();
    for j in 0..m {
        for k in 0..m {
            let up = rows.iter().any(|r| r[j] > r[k]);
            let down = rows.iter().any(|r| r[j] < r[k]);
            if up && down {
                return None;
            }
        }
    }
    let key: Vec<Rational> = (0..m).map(|j| rows.iter().map(|r| r[j].clone()).sum()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&j, &k| key[k].cmp(&key[j]).then(j.cmp(&k)));
    Some(order)
}

/// Bundles `B_1..B_n` for the given ranking: after zero-padding, the
/// `t`-th ranked item goes to bundle `t mod n`. Padding items are dropped.
pub fn ranked_bundles(ranking: &[usize], agents: usize) -> Vec<Bundle> {
    let mut bundles = vec![Bundle::new(); agents];
    let pad = padding(ranking.len(), agents);
    for (t, &item) in ranking.iter().enumerate() {
        bundles[(t + pad) % agents].insert(item);
    }
    bundles
}

/// EFM for additive chores with identical rankings plus cake: agent `i`
/// starts with `B_i`, then the cake phase runs with arbitrary cycle
/// resolution.
pub fn efm_identical_rankings_chores_cake(instance: &MixedInstance) -> Result<(MixedAllocation, RunTrace)> {
    require_additive_chores_cake(instance)?;
    let n = instance.agents();
    let items = instance.indivisible();
    let agents: Vec<usize> = (0..n).collect();
    let ranking = common_ranking(items, &agents)
        .ok_or_else(|| Error::Precondition("agents do not rank the chores identically".into()))?;
    let start = Allocation::from_bundles(ranked_bundles(&ranking, n))?;
    efm_cake_phase(instance, &start, CyclePolicy::ArbitraryCycle)
}

/// EFM for additive chores plus cake when all agents but one rank the
/// chores identically.
///
/// The bundles `B_1..B_n` come from the common ranking of the `n - 1`
/// agents; the remaining agent picks its favourite, the others take the
/// rest in index order, and the cake phase runs with arbitrary cycle
/// resolution. The odd agent is the highest index that works.
pub fn efm_identical_except_one(instance: &MixedInstance) -> Result<(MixedAllocation, RunTrace)> {
    require_additive_chores_cake(instance)?;
    let n = instance.agents();
    let items = instance.indivisible();
    let (odd, ranking) = (0..n)
        .rev()
        .find_map(|o| {
            let rest: Vec<usize> = (0..n).filter(|&i| i != o).collect();
            common_ranking(items, &rest).map(|r| (o, r))
        })
        .ok_or_else(|| Error::Precondition("no n - 1 agents share a ranking of the chores".into()))?;
    let mut bundles = ranked_bundles(&ranking, n);
    let pick = (0..n)
        .max_by(|&x, &y| items.value(odd, &bundles[x]).cmp(&items.value(odd, &bundles[y])).then(y.cmp(&x)))
        .expect("at least one agent");
    let chosen = bundles.remove(pick);
    let mut rest = bundles.into_iter();
    let assigned: Vec<Bundle> = (0..n)
        .map(|i| if i == odd { chosen.clone() } else { rest.next().expect("one bundle per agent") })
        .collect();
    let start = Allocation::from_bundles(assigned)?;
    efm_cake_phase(instance, &start, CyclePolicy::ArbitraryCycle)
}

/// EFM for at most `n + 1` additive chores plus cake: unpadded round-robin
/// in index order (one chore each, agent 0 takes a second one when
/// `m = n + 1`), then the cake phase with arbitrary cycle resolution.
pub fn efm_few_chores_cake(instance: &MixedInstance) -> Result<(MixedAllocation, RunTrace)> {
    require_additive_chores_cake(instance)?;
    let n = instance.agents();
    let m = instance.indivisible().items();
    if m > n + 1 {
        return Err(Error::Precondition(format!("{m} chores for {n} agents; at most n + 1 supported")));
    }
    let (start, _) = round_robin_unpadded(instance.indivisible(), &(0..n).collect::<Vec<_>>())?;
    efm_cake_phase(instance, &start, CyclePolicy::ArbitraryCycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{check_ef1, check_efm};
    use crate::rational::ratio;

    fn density(points: &[(i64, i64)], levels: &[i64]) -> PiecewiseConstantDensity {
        PiecewiseConstantDensity::new(
            points.iter().map(|&(p, q)| ratio(p, q)).collect(),
            levels.iter().map(|&l| int(l)).collect(),
        )
        .unwrap()
    }

    fn additive(rows: &[&[i64]]) -> IndivisibleInstance {
        IndivisibleInstance::additive(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    fn whole() -> CakePiece {
        CakePiece::interval(zero(), one()).unwrap()
    }

    #[test]
    fn perfect_partition_uniform_halves() {
        let d = vec![PiecewiseConstantDensity::uniform(one())];
        let parts = perfect_partition(&d, &whole(), 2).unwrap();
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert_eq!(d[0].value(p), ratio(1, 2));
        }
        assert!(!parts[0].overlaps(&parts[1]));
    }

    #[test]
    fn perfect_partition_single_part_is_identity() {
        let d = vec![density(&[(0, 1), (1, 3), (1, 1)], &[2, 5])];
        let piece = CakePiece::interval(ratio(1, 4), ratio(3, 4)).unwrap();
        assert_eq!(perfect_partition(&d, &piece, 1).unwrap(), vec![piece.clone()]);
        assert!(perfect_partition(&d, &piece, 0).is_err());
    }

    #[test]
    fn perfect_partition_two_step_densities() {
        let d = vec![density(&[(0, 1), (1, 3), (1, 1)], &[3, 1]), density(&[(0, 1), (1, 2), (1, 1)], &[1, 4])];
        let parts = perfect_partition(&d, &whole(), 3).unwrap();
        for dens in &d {
            let total = dens.value(&whole());
            for p in &parts {
                assert_eq!(dens.value(p), &total / int(3));
            }
        }
        let len: Rational = parts.iter().map(CakePiece::length).sum();
        assert_eq!(len, one());
    }

    #[test]
    fn prefix_examples() {
        let q = |start: Rational, target: Rational| PrefixQuery { start, target, agent: 0 };
        let d = PiecewiseConstantDensity::uniform(-one());
        assert_eq!(
            solve_prefix(&d, DivisibleKind::BadCake, &q(zero(), ratio(-1, 4))).unwrap(),
            PrefixAnswer::At(ratio(1, 4))
        );
        let plateau = density(&[(0, 1), (1, 2), (1, 1)], &[-2, 0]);
        assert_eq!(
            solve_prefix(&plateau, DivisibleKind::BadCake, &q(zero(), -one())).unwrap(),
            PrefixAnswer::At(one())
        );
        let lead = density(&[(0, 1), (1, 2), (1, 1)], &[0, -1]);
        assert_eq!(
            solve_prefix(&lead, DivisibleKind::BadCake, &q(ratio(3, 10), zero())).unwrap(),
            PrefixAnswer::At(ratio(1, 2))
        );
        assert_eq!(
            solve_prefix(&d, DivisibleKind::BadCake, &q(zero(), int(-2))).unwrap(),
            PrefixAnswer::Unreachable
        );
        let cake = PiecewiseConstantDensity::uniform(int(2));
        assert_eq!(
            solve_prefix(&cake, DivisibleKind::Cake, &q(ratio(1, 2), ratio(1, 2))).unwrap(),
            PrefixAnswer::At(ratio(3, 4))
        );
        assert!(solve_prefix(&cake, DivisibleKind::Cake, &q(zero(), -one())).is_err());
    }

    #[test]
    fn bad_cake_single_agent_takes_everything() {
        let inst = MixedInstance::new(
            additive(&[&[-1, 2]]),
            vec![PiecewiseConstantDensity::uniform(-one())],
            DivisibleKind::BadCake,
        )
        .unwrap();
        let (alloc, trace) = efm_doubly_monotone_bad_cake(&inst).unwrap();
        assert_eq!(alloc.items().bundle(0).len(), 2);
        assert_eq!(alloc.cake_piece(0), &whole());
        assert_eq!(trace.replay(1).unwrap(), alloc);
    }

    #[test]
    fn zero_bad_cake_matches_items_algorithm() {
        let items = additive(&[&[-1, 3, -2, 1], &[-2, 1, -1, 2], &[-3, 2, -2, -1]]);
        let inst = MixedInstance::new(
            items.clone(),
            vec![PiecewiseConstantDensity::uniform(zero()); 3],
            DivisibleKind::BadCake,
        )
        .unwrap();
        let (alloc, _) = efm_doubly_monotone_bad_cake(&inst).unwrap();
        let (plain, _) = doubly_monotone_ef1(&items, &index_order(4), &mut FirstCycle).unwrap();
        assert_eq!(alloc.items(), &plain);
        assert!(check_efm(&inst, &alloc).holds());
    }

    #[test]
    fn bad_cake_run_is_efm() {
        let items = additive(&[&[-4, 1, -1], &[-1, 3, -2], &[-2, 2, -5]]);
        let densities = vec![
            density(&[(0, 1), (1, 2), (1, 1)], &[-3, -1]),
            PiecewiseConstantDensity::uniform(int(-2)),
            density(&[(0, 1), (1, 4), (1, 1)], &[0, -4]),
        ];
        let inst = MixedInstance::new(items, densities, DivisibleKind::BadCake).unwrap();
        let (alloc, trace) = efm_doubly_monotone_bad_cake(&inst).unwrap();
        assert!(check_efm(&inst, &alloc).holds());
        assert_eq!(alloc.allocated_cake_length(), one());
        for state in trace.states(3).unwrap() {
            assert!(check_efm(&inst, &state).holds());
        }
    }

    #[test]
    fn ef_start_takes_one_round() {
        let items = additive(&[&[-1, -1], &[-1, -1]]);
        let inst = MixedInstance::new(items, vec![PiecewiseConstantDensity::uniform(one()); 2], DivisibleKind::Cake)
            .unwrap();
        let start = Allocation::from_owners(2, &[0, 1]);
        let (alloc, trace) = efm_cake_phase(&inst, &start, CyclePolicy::ArbitraryCycle).unwrap();
        let cake_events = trace.events().iter().filter(|e| matches!(e, TraceEvent::CakeAllocated { .. })).count();
        assert_eq!(cake_events, 1);
        assert!(check_efm(&inst, &alloc).holds());
    }

    #[test]
    fn envied_agent_gets_no_cake() {
        let items = additive(&[&[5, 1], &[5, 1]]);
        let inst = MixedInstance::new(items, vec![PiecewiseConstantDensity::uniform(one()); 2], DivisibleKind::Cake)
            .unwrap();
        let start = Allocation::from_owners(2, &[0, 1]);
        let (alloc, _) = efm_cake_phase(&inst, &start, CyclePolicy::ArbitraryCycle).unwrap();
        assert!(alloc.cake_piece(0).is_empty());
        assert!(check_efm(&inst, &alloc).holds());
    }

    #[test]
    fn refuse_policy_surfaces_cycle() {
        let items = additive(&[&[-1, -5], &[-5, -1]]);
        let inst = MixedInstance::new(items, vec![PiecewiseConstantDensity::uniform(one()); 2], DivisibleKind::Cake)
            .unwrap();
        let start = Allocation::from_owners(2, &[1, 0]);
        match efm_cake_phase(&inst, &start, CyclePolicy::RefuseAll) {
            Err(Error::CycleRefused { cycle, .. }) => assert_eq!(cycle.len(), 2),
            other => panic!("expected a refused cycle, got {other:?}"),
        }
    }

    #[test]
    fn identical_rankings_bundles() {
        let items = additive(&[&[-3, -2, -1, 0], &[-3, -2, -1, 0]]);
        let ranking = common_ranking(&items, &[0, 1]).unwrap();
        assert_eq!(ranking, vec![3, 2, 1, 0]);
        let bundles = ranked_bundles(&ranking, 2);
        let as_sets: BTreeSet<Vec<usize>> = bundles.iter().map(|b| b.iter().copied().collect()).collect();
        assert_eq!(as_sets, [vec![0, 2], vec![1, 3]].into_iter().collect());

        let inst = MixedInstance::new(items.clone(), vec![PiecewiseConstantDensity::uniform(zero()); 2], DivisibleKind::Cake)
            .unwrap();
        let (alloc, _) = efm_identical_rankings_chores_cake(&inst).unwrap();
        assert_eq!(alloc.items().bundles(), &bundles[..]);
        assert!(check_ef1(&items, alloc.items()).holds());

        let cake = MixedInstance::new(items, vec![PiecewiseConstantDensity::uniform(one()); 2], DivisibleKind::Cake).unwrap();
        let (alloc, _) = efm_identical_rankings_chores_cake(&cake).unwrap();
        assert!(check_efm(&cake, &alloc).holds());
    }

    #[test]
    fn differing_rankings_rejected() {
        let items = additive(&[&[-1, -2], &[-2, -1]]);
        let inst = MixedInstance::new(items, vec![PiecewiseConstantDensity::uniform(one()); 2], DivisibleKind::Cake).unwrap();
        assert!(efm_identical_rankings_chores_cake(&inst).is_err());
        let (alloc, _) = efm_identical_except_one(&inst).unwrap();
        assert!(check_efm(&inst, &alloc).holds());
    }

    #[test]
    fn few_chores_cases() {
        let pure = MixedInstance::new(
            IndivisibleInstance::additive(vec![vec![], vec![]]).unwrap(),
            vec![PiecewiseConstantDensity::uniform(one()), PiecewiseConstantDensity::uniform(int(3))],
            DivisibleKind::Cake,
        )
        .unwrap();
        let (alloc, _) = efm_few_chores_cake(&pure).unwrap();
        assert_eq!(alloc.allocated_cake_length(), one());
        assert!(check_efm(&pure, &alloc).holds());

        let items = additive(&[&[-1, -4, -2], &[-3, -1, -1]]);
        let inst = MixedInstance::new(items, vec![PiecewiseConstantDensity::uniform(one()); 2], DivisibleKind::Cake).unwrap();
        let (alloc, _) = efm_few_chores_cake(&inst).unwrap();
        assert!(check_efm(&inst, &alloc).holds());

        let many = MixedInstance::new(
            additive(&[&[-1, -1, -1, -1]]),
            vec![PiecewiseConstantDensity::uniform(one())],
            DivisibleKind::Cake,
        )
        .unwrap();
        assert!(efm_few_chores_cake(&many).is_err());
    }
}
