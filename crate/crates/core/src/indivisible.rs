//! Allocation algorithms for instances with indivisible items only.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{
    component_toposort, find_cycle, find_sink, find_source, resolve_cycle, EnvyGraph, GraphVariant,
};
use crate::instance::{Allocation, Bundle, IndivisibleInstance};
use crate::matching::max_weight_perfect_matching;
use crate::trace::{RunTrace, TraceEvent};

/// Picks which envy cycle to resolve when an algorithm leaves the choice open.
pub trait CycleChooser {
    /// A cycle of `graph`, or `None` if the graph has none.
    fn choose(&mut self, graph: &EnvyGraph) -> Option<Vec<usize>>;
}

/// Depth-first search from the lowest-index agent; see [`find_cycle`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstCycle;

impl CycleChooser for FirstCycle {
    fn choose(&mut self, graph: &EnvyGraph) -> Option<Vec<usize>> {
        find_cycle(graph, false)
    }
}

impl<F: FnMut(&EnvyGraph) -> Option<Vec<usize>>> CycleChooser for F {
    fn choose(&mut self, graph: &EnvyGraph) -> Option<Vec<usize>> {
        self(graph)
    }
}

/// Items in index order.
pub fn index_order(items: usize) -> Vec<usize> {
    (0..items).collect()
}

pub(crate) fn check_permutation(order: &[usize], len: usize, what: &str) -> Result<()> {
    let distinct: BTreeSet<_> = order.iter().collect();
    if order.len() != len || distinct.len() != len || order.iter().any(|&x| x >= len) {
        return Err(Error::Precondition(format!("{what} must be a permutation of 0..{len}, got {order:?}")));
    }
    Ok(())
}

fn require_chores(instance: &IndivisibleInstance) -> Result<()> {
    if !instance.is_monotone_nonincreasing() {
        return Err(Error::Precondition("valuations must be monotone non-increasing (chores)".into()));
    }
    Ok(())
}

fn plain_graph(instance: &IndivisibleInstance, alloc: &Allocation) -> EnvyGraph {
    EnvyGraph::of_allocation(instance, alloc, GraphVariant::Plain).expect("plain graph")
}

/// Resolves the chooser's cycles until it reports none.
fn resolve_while_cyclic(
    instance: &IndivisibleInstance,
    alloc: &mut Allocation,
    trace: &mut RunTrace,
    chooser: &mut dyn CycleChooser,
) -> Result<()> {
    loop {
        let graph = plain_graph(instance, alloc);
        let Some(cycle) = chooser.choose(&graph) else {
            return Ok(());
        };
        if !graph.contains_cycle(&cycle) {
            return Err(Error::InvalidCycle(format!("{cycle:?} is not a cycle of the envy graph")));
        }
        *alloc = resolve_cycle(alloc, &cycle)?;
        trace.push(TraceEvent::CycleResolved { cycle, graph: GraphVariant::Plain });
    }
}

/// Envy-cycle elimination adapted to chores: each chore goes to a sink of
/// the envy graph, after resolving envy cycles chosen by `chooser` until the
/// graph is acyclic. The output need not be EF1.
///
/// Cycles are resolved when the next chore arrives, so the allocation after
/// the last chore is returned as is.
pub fn naive_envy_cycle_elimination(
    instance: &IndivisibleInstance,
    order: &[usize],
    chooser: &mut dyn CycleChooser,
) -> Result<(Allocation, RunTrace)> {
    require_chores(instance)?;
    check_permutation(order, instance.items(), "item order")?;
    let mut alloc = Allocation::empty(instance.agents());
    let mut trace = RunTrace::new();
    for &item in order {
        resolve_while_cyclic(instance, &mut alloc, &mut trace, chooser)?;
        let sink = find_sink(&plain_graph(instance, &alloc))
            .ok_or_else(|| Error::Invariant("envy graph without cycles has no sink".into()))?;
        alloc.assign(item, sink);
        trace.push(TraceEvent::ItemAssigned { item, agent: sink });
    }
    Ok((alloc, trace))
}

/// One chores-phase step: make sure a sink exists by resolving a
/// top-trading envy cycle, then give `item` to the lowest-index sink.
fn top_trading_step(
    instance: &IndivisibleInstance,
    alloc: &mut Allocation,
    trace: &mut RunTrace,
    item: usize,
) -> Result<()> {
    let mut graph = plain_graph(instance, alloc);
    if find_sink(&graph).is_none() {
        let top = EnvyGraph::of_allocation(instance, alloc, GraphVariant::TopTrading)?;
        let cycle = find_cycle(&top, false)
            .ok_or_else(|| Error::Invariant("sinkless envy graph but no top-trading cycle".into()))?;
        *alloc = resolve_cycle(alloc, &cycle)?;
        trace.push(TraceEvent::CycleResolved { cycle, graph: GraphVariant::TopTrading });
        graph = plain_graph(instance, alloc);
    }
    let sink = find_sink(&graph)
        .ok_or_else(|| Error::Invariant("no sink after resolving a top-trading cycle".into()))?;
    alloc.assign(item, sink);
    trace.push(TraceEvent::ItemAssigned { item, agent: sink });
    Ok(())
}

/// Top-trading envy-cycle elimination; EF1 for monotone chores.
pub fn top_trading_envy_cycle_elimination(
    instance: &IndivisibleInstance,
    order: &[usize],
) -> Result<(Allocation, RunTrace)> {
    require_chores(instance)?;
    check_permutation(order, instance.items(), "item order")?;
    let mut alloc = Allocation::empty(instance.agents());
    let mut trace = RunTrace::new();
    for &item in order {
        top_trading_step(instance, &mut alloc, &mut trace, item)?;
    }
    Ok((alloc, trace))
}

/// Two-phase EF1 algorithm for doubly monotone instances.
///
/// Goods phase: every item that is a good for someone goes to a source of
/// the envy graph restricted to the agents that see it as a good, after
/// which envy cycles picked by `chooser` are resolved until none remain.
/// Chores phase: items that are chores for everyone go through the
/// top-trading step.
pub fn doubly_monotone_ef1(
    instance: &IndivisibleInstance,
    order: &[usize],
    chooser: &mut dyn CycleChooser,
) -> Result<(Allocation, RunTrace)> {
    check_permutation(order, instance.items(), "item order")?;
    let partition = instance.doubly_monotone_partition()?;
    let n = instance.agents();
    let goods_for_someone: Bundle = partition.iter().flat_map(|p| p.goods.iter().copied()).collect();
    let chores_for_all: Bundle = (0..instance.items())
        .filter(|j| partition.iter().all(|p| p.chores.contains(j)))
        .collect();
    if goods_for_someone.len() + chores_for_all.len() != instance.items() {
        return Err(Error::Invariant("goods and common chores do not cover every item".into()));
    }

    let mut alloc = Allocation::empty(n);
    let mut trace = RunTrace::new();
    for &item in order.iter().filter(|j| goods_for_someone.contains(j)) {
        let likers: BTreeSet<usize> = (0..n).filter(|&i| partition[i].goods.contains(&item)).collect();
        let graph = EnvyGraph::of_allocation(instance, &alloc, GraphVariant::Restricted(likers))?;
        let source = find_source(&graph)
            .ok_or_else(|| Error::Invariant("restricted envy graph has no source".into()))?;
        alloc.assign(item, source);
        trace.push(TraceEvent::ItemAssigned { item, agent: source });
        resolve_while_cyclic(instance, &mut alloc, &mut trace, chooser)?;
    }
    for &item in order.iter().filter(|j| chores_for_all.contains(j)) {
        top_trading_step(instance, &mut alloc, &mut trace, item)?;
    }
    Ok((alloc, trace))
}

fn require_additive(instance: &IndivisibleInstance) -> Result<()> {
    if !instance.is_additive() {
        return Err(Error::Precondition("valuations must be additive".into()));
    }
    Ok(())
}

/// Number of zero-valued items needed to make `items` a multiple of `agents`.
pub fn padding(items: usize, agents: usize) -> usize {
    (agents - items % agents) % agents
}

/// Round-robin picking: agents take turns in `agent_order`, each taking
/// its most valuable remaining item (smallest index on ties). Zero-valued
/// virtual items pad the item count to a multiple of `n` and are dropped
/// from the result; the trace lists real items only.
pub fn round_robin(instance: &IndivisibleInstance, agent_order: &[usize]) -> Result<(Allocation, RunTrace)> {
    picking(instance, agent_order, padding(instance.items(), instance.agents()))
}

/// Round-robin over the real items only: with `m = n + 1` the first agent
/// in `agent_order` ends up with two items and everyone else with one.
pub fn round_robin_unpadded(instance: &IndivisibleInstance, agent_order: &[usize]) -> Result<(Allocation, RunTrace)> {
    picking(instance, agent_order, 0)
}

fn picking(instance: &IndivisibleInstance, agent_order: &[usize], pad: usize) -> Result<(Allocation, RunTrace)> {
    require_additive(instance)?;
    check_permutation(agent_order, instance.agents(), "agent order")?;
    let m = instance.items();
    let padded = instance.padded_additive(pad)?;
    let total = padded.items();
    let mut remaining: Vec<usize> = (0..total).collect();
    let mut alloc = Allocation::empty(instance.agents());
    let mut trace = RunTrace::new();
    for &agent in agent_order.iter().cycle().take(total) {
        let values = padded.valuation(agent).additive_values().expect("additive");
        let pos = (0..remaining.len())
            .max_by(|&a, &b| {
                values[remaining[a]]
                    .cmp(&values[remaining[b]])
                    .then(remaining[b].cmp(&remaining[a]))
            })
            .expect("items remain");
        let item = remaining.remove(pos);
        if item < m {
            alloc.assign(item, agent);
            trace.push(TraceEvent::ItemAssigned { item, agent });
        }
    }
    Ok((alloc, trace))
}

/// Component-wise matching for additive chores.
///
/// Each round topologically sorts the strongly connected components of the
/// generalized envy graph and, from the last component to the first, gives
/// the component's agents a maximum-weight matching into the remaining
/// items. The trace includes the zero-valued padding items (indices `>= m`);
/// strip them after replaying.
pub fn cwma(instance: &IndivisibleInstance) -> Result<(Allocation, RunTrace)> {
    if !instance.is_additive_chores() {
        return Err(Error::Precondition("component-wise matching needs additive chores".into()));
    }
    let n = instance.agents();
    let m = instance.items();
    let padded = instance.padded_additive(padding(m, n))?;
    let mut remaining: Vec<usize> = (0..padded.items()).collect();
    let mut alloc = Allocation::empty(n);
    let mut trace = RunTrace::new();
    let mut round = 0;
    while !remaining.is_empty() {
        round += 1;
        let graph = EnvyGraph::of_allocation(&padded, &alloc, GraphVariant::Generalized)?;
        for component in component_toposort(&graph).into_iter().rev() {
            let weights: Vec<Vec<_>> = component
                .iter()
                .map(|&a| {
                    let vals = padded.valuation(a).additive_values().expect("additive");
                    remaining.iter().map(|&c| vals[c].clone()).collect()
                })
                .collect();
            let pairs = max_weight_perfect_matching(&component, &remaining, &weights)?;
            for &(agent, item) in &pairs {
                alloc.assign(item, agent);
                remaining.retain(|&c| c != item);
            }
            trace.push(TraceEvent::MatchingRound { round, component, pairs });
        }
    }
    alloc.strip_items_from(m);
    Ok((alloc, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check_ef1;
    use crate::rational::int;

    fn additive(rows: &[&[i64]]) -> IndivisibleInstance {
        IndivisibleInstance::additive(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    fn bundles(a: &Allocation) -> Vec<Vec<usize>> {
        a.bundles().iter().map(|b| b.iter().copied().collect()).collect()
    }

    #[test]
    fn single_agent_gets_everything() {
        let inst = additive(&[&[-1, -2, -3]]);
        let order = index_order(3);
        let (a, t) = naive_envy_cycle_elimination(&inst, &order, &mut FirstCycle).unwrap();
        assert_eq!(bundles(&a), vec![vec![0, 1, 2]]);
        assert!(t.events().iter().all(|e| matches!(e, TraceEvent::ItemAssigned { .. })));
        let (a, _) = top_trading_envy_cycle_elimination(&inst, &order).unwrap();
        assert_eq!(bundles(&a), vec![vec![0, 1, 2]]);
        let (a, _) = round_robin(&inst, &[0]).unwrap();
        assert_eq!(bundles(&a), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn chores_algorithms_reject_goods() {
        let inst = additive(&[&[1, -2]]);
        assert!(top_trading_envy_cycle_elimination(&inst, &index_order(2)).is_err());
        assert!(naive_envy_cycle_elimination(&inst, &index_order(2), &mut FirstCycle).is_err());
        assert!(cwma(&inst).is_err());
    }

    #[test]
    fn bad_item_order_rejected() {
        let inst = additive(&[&[-1, -2]]);
        assert!(top_trading_envy_cycle_elimination(&inst, &[0, 0]).is_err());
        assert!(top_trading_envy_cycle_elimination(&inst, &[0]).is_err());
    }

    #[test]
    fn round_robin_ties_and_padding() {
        let inst = additive(&[&[-1, -1, -3], &[-2, -1, -1]]);
        // 3 items, 2 agents: one virtual item; agent 0 picks item 0, agent 1 item 1,
        // agent 0 then prefers the virtual zero item, agent 1 takes item 2
        let (a, _) = round_robin(&inst, &[0, 1]).unwrap();
        assert_eq!(bundles(&a), vec![vec![0], vec![1, 2]]);
        assert!(check_ef1(&inst, &a).holds());
        let (a, _) = round_robin_unpadded(&inst, &[0, 1]).unwrap();
        assert_eq!(bundles(&a), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn cwma_first_round_is_a_matching() {
        let inst = additive(&[&[-1, -5, -2, -4], &[-3, -1, -2, -2]]);
        let (a, t) = cwma(&inst).unwrap();
        assert!(a.is_complete(4));
        assert!(check_ef1(&inst, &a).holds());
        match &t.events()[0] {
            TraceEvent::MatchingRound { round: 1, component, pairs } => {
                assert_eq!(component, &vec![0, 1]);
                assert_eq!(pairs, &vec![(0, 0), (1, 1)]);
            }
            e => panic!("unexpected first event {e:?}"),
        }
    }

    #[test]
    fn chooser_must_return_a_real_cycle() {
        let inst = additive(&[&[-1, -4, -2, -3, 0, -1], &[-2, -1, -2, -2, -3, -1], &[-1, -3, -1, -1, -3, -10]]);
        let mut bogus = |_: &EnvyGraph| Some(vec![0, 1]);
        assert!(naive_envy_cycle_elimination(&inst, &index_order(6), &mut bogus).is_err());
    }
}
