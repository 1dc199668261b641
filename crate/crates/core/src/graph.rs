//! Envy graphs and the graph operations the allocation algorithms rely on.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{Allocation, IndivisibleInstance, MixedAllocation, MixedInstance};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    /// `v_i(A_k) > v_i(A_i)`
    Envy,
    /// `v_i(A_k) = v_i(A_i)`, only in generalized variants.
    Equality,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphVariant {
    /// Edge `i -> k` iff `i` envies `k`.
    Plain,
    /// Envy edges pointing at a bundle `i` values most.
    TopTrading,
    /// Envy and equality edges (`v_i(A_k) >= v_i(A_i)`, `i != k`).
    Generalized,
    /// Edges `i -> k`, `i != k`, to every bundle `i` values most; the edge is
    /// an equality edge when `i` values its own bundle just as much.
    TopTradingGeneralized,
    /// The plain envy graph induced on the given agents.
    Restricted(BTreeSet<usize>),
}

impl GraphVariant {
    pub fn name(&self) -> &'static str {
        match self {
            GraphVariant::Plain => "plain",
            GraphVariant::TopTrading => "top-trading",
            GraphVariant::Generalized => "generalized",
            GraphVariant::TopTradingGeneralized => "top-trading-generalized",
            GraphVariant::Restricted(_) => "restricted",
        }
    }
}

/// `u[i][k] = v_i(A_k)`, including cake in the mixed case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utilities(Vec<Vec<Rational>>);

impl Utilities {
    pub fn new(matrix: Vec<Vec<Rational>>) -> Self {
        Utilities(matrix)
    }

    pub fn indivisible(instance: &IndivisibleInstance, alloc: &Allocation) -> Self {
        let n = instance.agents();
        Utilities(
            (0..n)
                .map(|i| (0..n).map(|k| instance.value(i, alloc.bundle(k))).collect())
                .collect(),
        )
    }

    pub fn mixed(instance: &MixedInstance, alloc: &MixedAllocation) -> Self {
        let n = instance.agents();
        Utilities(
            (0..n)
                .map(|i| (0..n).map(|k| instance.utility(i, alloc, k)).collect())
                .collect(),
        )
    }

    pub fn agents(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, agent: usize, owner: usize) -> &Rational {
        &self.0[agent][owner]
    }

    pub fn own(&self, agent: usize) -> &Rational {
        &self.0[agent][agent]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyGraph {
    variant: GraphVariant,
    active: Vec<bool>,
    adj: Vec<Vec<Option<EdgeKind>>>,
}

pub fn build_graph(util: &Utilities, variant: GraphVariant) -> Result<EnvyGraph> {
    let n = util.agents();
    let mut active = vec![true; n];
    if let GraphVariant::Restricted(set) = &variant {
        if set.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        if let Some(&i) = set.iter().find(|&&i| i >= n) {
            return Err(Error::Precondition(format!("restriction names agent {i} of {n}")));
        }
        active = (0..n).map(|i| set.contains(&i)).collect();
    }
    let mut adj = vec![vec![None; n]; n];
    for i in 0..n {
        if !active[i] {
            continue;
        }
        let own = util.own(i);
        let best = (0..n).map(|k| util.get(i, k)).max().expect("n >= 1");
        for k in 0..n {
            if k == i || !active[k] {
                continue;
            }
            let val = util.get(i, k);
            let kind = if val > own {
                Some(EdgeKind::Envy)
            } else if val == own {
                Some(EdgeKind::Equality)
            } else {
                None
            };
            adj[i][k] = match (&variant, kind) {
                (GraphVariant::Plain | GraphVariant::Restricted(_), Some(EdgeKind::Envy)) => Some(EdgeKind::Envy),
                (GraphVariant::TopTrading, Some(EdgeKind::Envy)) if val == best => Some(EdgeKind::Envy),
                (GraphVariant::Generalized, k) => k,
                (GraphVariant::TopTradingGeneralized, Some(k)) if val == best => Some(k),
                _ => None,
            };
        }
    }
    Ok(EnvyGraph { variant, active, adj })
}

impl EnvyGraph {
    pub fn of_allocation(instance: &IndivisibleInstance, alloc: &Allocation, variant: GraphVariant) -> Result<Self> {
        build_graph(&Utilities::indivisible(instance, alloc), variant)
    }

    pub fn of_mixed(instance: &MixedInstance, alloc: &MixedAllocation, variant: GraphVariant) -> Result<Self> {
        build_graph(&Utilities::mixed(instance, alloc), variant)
    }

    /// Builds a graph from an explicit edge list over `agents` vertices.
    pub fn from_edges(agents: usize, variant: GraphVariant, edges: &[(usize, usize, EdgeKind)]) -> Self {
        let mut adj = vec![vec![None; agents]; agents];
        for &(i, k, kind) in edges {
            adj[i][k] = Some(kind);
        }
        let active = match &variant {
            GraphVariant::Restricted(set) => (0..agents).map(|i| set.contains(&i)).collect(),
            _ => vec![true; agents],
        };
        EnvyGraph { variant, active, adj }
    }

    pub fn agents(&self) -> usize {
        self.adj.len()
    }

    pub fn variant(&self) -> &GraphVariant {
        &self.variant
    }

    pub fn is_active(&self, agent: usize) -> bool {
        self.active[agent]
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<EdgeKind> {
        self.adj[from][to]
    }

    /// All edges in `(from, to)` order.
    pub fn edges(&self) -> Vec<(usize, usize, EdgeKind)> {
        let n = self.agents();
        (0..n)
            .flat_map(|i| (0..n).filter_map(move |k| self.adj[i][k].map(|e| (i, k, e))))
            .collect()
    }

    pub fn envy_edge_count(&self) -> usize {
        self.adj.iter().flatten().filter(|e| **e == Some(EdgeKind::Envy)).count()
    }

    pub fn successors(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[agent].iter().enumerate().filter(|(_, e)| e.is_some()).map(|(k, _)| k)
    }

    fn has_out_envy(&self, agent: usize) -> bool {
        self.adj[agent].contains(&Some(EdgeKind::Envy))
    }

    fn has_in_envy(&self, agent: usize) -> bool {
        self.adj.iter().any(|row| row[agent] == Some(EdgeKind::Envy))
    }

    fn has_in_edge(&self, agent: usize) -> bool {
        self.adj.iter().any(|row| row[agent].is_some())
    }

    fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.agents()).filter(|&i| self.active[i])
    }

    /// True when every consecutive pair (and last -> first) is an edge.
    pub fn contains_cycle(&self, cycle: &[usize]) -> bool {
        !cycle.is_empty()
            && (0..cycle.len()).all(|t| self.adj[cycle[t]][cycle[(t + 1) % cycle.len()]].is_some())
    }

    /// Graphviz rendering; envy edges solid, equality edges dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph envy {{");
        let _ = writeln!(out, "  // variant: {}", self.variant.name());
        for i in self.vertices() {
            let _ = writeln!(out, "  a{};", i + 1);
        }
        for (i, k, kind) in self.edges() {
            match kind {
                EdgeKind::Envy => {
                    let _ = writeln!(out, "  a{} -> a{};", i + 1, k + 1);
                }
                EdgeKind::Equality => {
                    let _ = writeln!(out, "  a{} -> a{} [style=dashed];", i + 1, k + 1);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A simple directed cycle, listed so each agent points at the next and the
/// last points at the first.
///
/// Plain depth-first search from the lowest-index agent, neighbours in index
/// order, returning the first cycle closed. With `require_envy` and equality
/// edges present, the cycle is instead built around the first envy edge
/// `(u, v)` (in index order) whose endpoints share a strongly connected
/// component, closed by a shortest path from `v` back to `u`.
pub fn find_cycle(graph: &EnvyGraph, require_envy: bool) -> Option<Vec<usize>> {
    let has_equality = graph.adj.iter().flatten().any(|e| *e == Some(EdgeKind::Equality));
    if require_envy && has_equality {
        return find_envy_cycle_via_components(graph);
    }
    let n = graph.agents();
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnStack,
        Done,
    }
    let mut mark = vec![Mark::New; n];
    for start in graph.vertices() {
        if mark[start] != Mark::New {
            continue;
        }
        // explicit stack of (vertex, next neighbour index to try)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark[start] = Mark::OnStack;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next >= n {
                mark[v] = Mark::Done;
                stack.pop();
                continue;
            }
            let w = *next;
            *next += 1;
            if graph.adj[v][w].is_none() {
                continue;
            }
            match mark[w] {
                Mark::OnStack => {
                    let pos = stack.iter().position(|&(u, _)| u == w).expect("on stack");
                    return Some(stack[pos..].iter().map(|&(u, _)| u).collect());
                }
                Mark::New => {
                    mark[w] = Mark::OnStack;
                    stack.push((w, 0));
                }
                Mark::Done => {}
            }
        }
    }
    None
}

fn find_envy_cycle_via_components(graph: &EnvyGraph) -> Option<Vec<usize>> {
    let comp = scc_ids(graph);
    let (u, v) = graph
        .edges()
        .into_iter()
        .find(|&(u, v, kind)| kind == EdgeKind::Envy && comp[u] == comp[v])
        .map(|(u, v, _)| (u, v))?;
    // BFS from v to u, neighbours in index order
    let n = graph.agents();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([v]);
    seen[v] = true;
    while let Some(x) = queue.pop_front() {
        if x == u {
            break;
        }
        for y in graph.successors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut path = vec![u];
    let mut x = u;
    while x != v {
        x = parent[x];
        path.push(x);
    }
    // path is u <- ... <- v; the cycle is u -> v -> ... -> (pred of u)
    path.reverse();
    path.pop();
    let mut cycle = vec![u];
    cycle.extend(path);
    Some(cycle)
}

fn check_cycle(agents: usize, cycle: &[usize]) -> Result<()> {
    if cycle.is_empty() {
        return Err(Error::InvalidCycle("empty cycle".into()));
    }
    let mut seen = BTreeSet::new();
    for &a in cycle {
        if a >= agents {
            return Err(Error::InvalidCycle(format!("agent {a} out of range")));
        }
        if !seen.insert(a) {
            return Err(Error::InvalidCycle(format!("agent {a} repeats in {cycle:?}")));
        }
    }
    Ok(())
}

/// Each cycle agent takes the bundle of the agent it points to.
pub fn resolve_cycle(alloc: &Allocation, cycle: &[usize]) -> Result<Allocation> {
    check_cycle(alloc.agents(), cycle)?;
    let mut out = alloc.clone();
    rotate(out.bundles_mut(), cycle);
    Ok(out)
}

/// [`resolve_cycle`] for mixed allocations: items and cake move together.
pub fn resolve_cycle_mixed(alloc: &MixedAllocation, cycle: &[usize]) -> Result<MixedAllocation> {
    check_cycle(alloc.agents(), cycle)?;
    let mut out = alloc.clone();
    rotate(out.items_mut().bundles_mut(), cycle);
    rotate(out.cake_mut(), cycle);
    Ok(out)
}

fn rotate<T: Clone>(slots: &mut [T], cycle: &[usize]) {
    let taken: Vec<T> = cycle
        .iter()
        .enumerate()
        .map(|(t, _)| slots[cycle[(t + 1) % cycle.len()]].clone())
        .collect();
    for (&agent, bundle) in cycle.iter().zip(taken) {
        slots[agent] = bundle;
    }
}

/// Lowest-index agent with no outgoing envy edge.
pub fn find_sink(graph: &EnvyGraph) -> Option<usize> {
    graph.vertices().find(|&i| !graph.has_out_envy(i))
}

/// Lowest-index agent with no incoming edge.
pub fn find_source(graph: &EnvyGraph) -> Option<usize> {
    graph.vertices().find(|&i| !graph.has_in_edge(i))
}

/// Agents with no path (over any edges) to an agent with an outgoing envy edge.
pub fn maximal_sink_addable_set(graph: &EnvyGraph) -> BTreeSet<usize> {
    let n = graph.agents();
    let mut tainted = vec![false; n];
    let mut queue: VecDeque<usize> = graph.vertices().filter(|&i| graph.has_out_envy(i)).collect();
    for &i in &queue {
        tainted[i] = true;
    }
    while let Some(x) = queue.pop_front() {
        for y in 0..n {
            if graph.adj[y][x].is_some() && !tainted[y] {
                tainted[y] = true;
                queue.push_back(y);
            }
        }
    }
    graph.vertices().filter(|&i| !tainted[i]).collect()
}

/// Agents not reachable (over any edges) from an envied agent.
pub fn maximal_source_addable_set(graph: &EnvyGraph) -> BTreeSet<usize> {
    let n = graph.agents();
    let mut tainted = vec![false; n];
    let mut queue: VecDeque<usize> = graph.vertices().filter(|&i| graph.has_in_envy(i)).collect();
    for &i in &queue {
        tainted[i] = true;
    }
    while let Some(x) = queue.pop_front() {
        for y in graph.successors(x) {
            if !tainted[y] {
                tainted[y] = true;
                queue.push_back(y);
            }
        }
    }
    graph.vertices().filter(|&i| !tainted[i]).collect()
}

/// Tarjan's algorithm; component ids for active vertices, `usize::MAX` otherwise.
fn scc_ids(graph: &EnvyGraph) -> Vec<usize> {
    struct State {
        index: Vec<usize>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        comp: Vec<usize>,
        counter: usize,
        comps: usize,
    }
    fn visit(g: &EnvyGraph, v: usize, s: &mut State) {
        s.index[v] = s.counter;
        s.low[v] = s.counter;
        s.counter += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for w in g.successors(v) {
            if s.index[w] == usize::MAX {
                visit(g, w, s);
                s.low[v] = s.low[v].min(s.low[w]);
            } else if s.on_stack[w] {
                s.low[v] = s.low[v].min(s.index[w]);
            }
        }
        if s.low[v] == s.index[v] {
            loop {
                let w = s.stack.pop().expect("tarjan stack");
                s.on_stack[w] = false;
                s.comp[w] = s.comps;
                if w == v {
                    break;
                }
            }
            s.comps += 1;
        }
    }
    let n = graph.agents();
    let mut s = State {
        index: vec![usize::MAX; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        comp: vec![usize::MAX; n],
        counter: 0,
        comps: 0,
    };
    for v in graph.vertices() {
        if s.index[v] == usize::MAX {
            visit(graph, v, &mut s);
        }
    }
    s.comp
}

/// Strongly connected components in topological order (edges only go from
/// earlier to later components). Among valid orders, the component holding
/// the smallest agent index goes first; agents are sorted within a component.
pub fn component_toposort(graph: &EnvyGraph) -> Vec<Vec<usize>> {
    let comp = scc_ids(graph);
    let count = comp.iter().filter(|&&c| c != usize::MAX).max().map_or(0, |&c| c + 1);
    let mut members = vec![Vec::new(); count];
    for v in graph.vertices() {
        members[comp[v]].push(v);
    }
    let mut succ = vec![BTreeSet::new(); count];
    let mut indegree = vec![0usize; count];
    for (u, v, _) in graph.edges() {
        let (cu, cv) = (comp[u], comp[v]);
        if cu != cv && succ[cu].insert(cv) {
            indegree[cv] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..count)
        .filter(|&c| indegree[c] == 0)
        .map(|c| Reverse((members[c][0], c)))
        .collect();
    let mut order = Vec::with_capacity(count);
    while let Some(Reverse((_, c))) = ready.pop() {
        order.push(members[c].clone());
        for &d in &succ[c] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(Reverse((members[d][0], d)));
            }
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Bundle;
    use crate::rational::int;
    use EdgeKind::{Envy, Equality};

    fn six_chores() -> IndivisibleInstance {
        let rows = [
            [-1, -4, -2, -3, 0, -1],
            [-2, -1, -2, -2, -3, -1],
            [-1, -3, -1, -1, -3, -10],
        ];
        IndivisibleInstance::additive(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
            .unwrap()
    }

    fn alloc(bundles: &[&[usize]]) -> Allocation {
        Allocation::from_bundles(bundles.iter().map(|x| x.iter().copied().collect::<Bundle>()).collect()).unwrap()
    }

    fn a() -> Allocation {
        alloc(&[&[0, 3], &[1, 4], &[2, 5]])
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn sinkless_three_agent_graph() {
        let g = EnvyGraph::of_allocation(&six_chores(), &a(), GraphVariant::Plain).unwrap();
        let edges: BTreeSet<_> = g.edges().into_iter().map(|(i, k, _)| (i, k)).collect();
        assert_eq!(edges, BTreeSet::from([(1, 2), (2, 1), (0, 2), (2, 0)]));
        assert_eq!(find_sink(&g), None);
        let cycle = find_cycle(&g, false).unwrap();
        assert_eq!(cycle, vec![0, 2]);
    }

    #[test]
    fn resolving_either_cycle() {
        let inst = six_chores();
        let x = resolve_cycle(&a(), &[0, 2]).unwrap();
        assert_eq!(x, alloc(&[&[2, 5], &[1, 4], &[0, 3]]));
        let gx = EnvyGraph::of_allocation(&inst, &x, GraphVariant::Plain).unwrap();
        assert_eq!(gx.edges(), vec![(1, 0, Envy)]);
        assert_eq!(find_sink(&gx), Some(0));
        let y = resolve_cycle(&a(), &[1, 2]).unwrap();
        assert_eq!(y, alloc(&[&[0, 3], &[2, 5], &[1, 4]]));
        let gy = EnvyGraph::of_allocation(&inst, &y, GraphVariant::Plain).unwrap();
        assert_eq!(gy.edges(), vec![(0, 1, Envy), (2, 0, Envy)]);
    }

    #[test]
    fn top_trading_edges_point_at_favourites() {
        // a1 -> a3, a2 -> a3, a3 -> a1
        let g = EnvyGraph::of_allocation(&six_chores(), &a(), GraphVariant::TopTrading).unwrap();
        let edges: Vec<_> = g.edges().into_iter().map(|(i, k, _)| (i, k)).collect();
        assert_eq!(edges, vec![(0, 2), (1, 2), (2, 0)]);
    }

    #[test]
    fn swap_twice_is_identity() {
        let once = resolve_cycle(&a(), &[1, 2]).unwrap();
        assert_eq!(resolve_cycle(&once, &[1, 2]).unwrap(), a());
        assert!(resolve_cycle(&a(), &[1, 2, 1]).is_err());
        assert!(resolve_cycle(&a(), &[]).is_err());
        assert!(resolve_cycle(&a(), &[0, 5]).is_err());
    }

    #[test]
    fn identical_bundles_give_complete_equality_graph() {
        let inst = IndivisibleInstance::additive(vec![vec![int(-1), int(-1), int(-1)]; 3]).unwrap();
        let al = alloc(&[&[0], &[1], &[2]]);
        let g = EnvyGraph::of_allocation(&inst, &al, GraphVariant::Generalized).unwrap();
        assert_eq!(g.edges().len(), 6);
        assert!(g.edges().iter().all(|e| e.2 == Equality));
        assert_eq!(find_cycle(&g, true), None);
        assert!(find_cycle(&g, false).is_some());
    }

    #[test]
    fn empty_restriction_rejected() {
        let u = Utilities::indivisible(&six_chores(), &a());
        assert_eq!(build_graph(&u, GraphVariant::Restricted(BTreeSet::new())), Err(Error::EmptyRestriction));
        let g = build_graph(&u, GraphVariant::Restricted(set(&[0, 1]))).unwrap();
        assert_eq!(g.edges(), vec![]);
        assert_eq!(find_source(&g), Some(0));
    }

    #[test]
    fn empty_allocation_sink_is_first_agent() {
        let inst = six_chores();
        let g = EnvyGraph::of_allocation(&inst, &Allocation::empty(3), GraphVariant::Plain).unwrap();
        assert_eq!(find_sink(&g), Some(0));
        assert_eq!(find_source(&g), Some(0));
    }

    #[test]
    fn acyclic_graph_has_no_cycle() {
        let g = EnvyGraph::from_edges(3, GraphVariant::Plain, &[(0, 1, Envy), (1, 2, Envy), (0, 2, Envy)]);
        assert_eq!(find_cycle(&g, false), None);
        assert_eq!(component_toposort(&g), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn envy_cycle_through_equality_edges() {
        let g = EnvyGraph::from_edges(
            4,
            GraphVariant::Generalized,
            &[(0, 1, Equality), (1, 0, Equality), (2, 3, Equality), (3, 1, Envy), (1, 2, Equality)],
        );
        let c = find_cycle(&g, true).unwrap();
        assert_eq!(c, vec![3, 1, 2]);
        assert!(g.contains_cycle(&c));
    }

    #[test]
    fn addable_set_examples() {
        let g = EnvyGraph::from_edges(3, GraphVariant::Generalized, &[(0, 1, Envy)]);
        assert_eq!(maximal_sink_addable_set(&g), set(&[1, 2]));
        assert_eq!(maximal_source_addable_set(&g), set(&[0, 2]));
        let g = EnvyGraph::from_edges(3, GraphVariant::Generalized, &[(0, 1, Envy), (1, 0, Envy), (2, 0, Equality)]);
        assert_eq!(maximal_sink_addable_set(&g), set(&[]));
        let none = EnvyGraph::from_edges(3, GraphVariant::Generalized, &[(0, 1, Equality)]);
        assert_eq!(maximal_sink_addable_set(&none), set(&[0, 1, 2]));
        assert_eq!(maximal_source_addable_set(&none), set(&[0, 1, 2]));
    }

    #[test]
    fn equality_two_cycle_is_one_component() {
        let g = EnvyGraph::from_edges(3, GraphVariant::Generalized, &[(0, 1, Equality), (1, 0, Equality), (1, 2, Envy)]);
        assert_eq!(component_toposort(&g), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn dot_is_stable() {
        let g = EnvyGraph::from_edges(2, GraphVariant::Generalized, &[(0, 1, Envy), (1, 0, Equality)]);
        assert_eq!(
            g.to_dot(),
            "digraph envy {\n  // variant: generalized\n  a1;\n  a2;\n  a1 -> a2;\n  a2 -> a1 [style=dashed];\n}\n"
        );
    }
}
