//! Run traces: the ordered events an algorithm applied to the empty allocation.
//!
//! The text form has one event per line:
//!
//! ```text
//! assign item=3 agent=1
//! cycle graph=top-trading agents=0,2
//! match round=2 component=0,1 pairs=0:4,1:5
//! cake agents=0,2 pieces=0..1/6,1/3..1/2;1/6..1/3
//! ```

use std::fmt;
use std::str::FromStr;

use crate::cake::CakePiece;
use crate::error::{Error, Result};
use crate::graph::{resolve_cycle_mixed, GraphVariant};
use crate::instance::{Allocation, MixedAllocation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    ItemAssigned { item: usize, agent: usize },
    CycleResolved { cycle: Vec<usize>, graph: GraphVariant },
    /// One component's matching in a round of the component-wise matching algorithm.
    MatchingRound { round: usize, component: Vec<usize>, pairs: Vec<(usize, usize)> },
    /// `pieces[t]` goes to `recipients[t]`.
    CakeAllocated { recipients: Vec<usize>, pieces: Vec<CakePiece> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunTrace {
    events: Vec<TraceEvent>,
}

impl RunTrace {
    pub fn new() -> Self {
        RunTrace::default()
    }

    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn extend(&mut self, other: RunTrace) {
        self.events.extend(other.events);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Applies one event to a mixed allocation.
    pub fn apply(state: &mut MixedAllocation, event: &TraceEvent) -> Result<()> {
        let n = state.agents();
        let check_agent = |a: usize| {
            if a >= n {
                Err(Error::Invariant(format!("trace names agent {a} of {n}")))
            } else {
                Ok(())
            }
        };
        match event {
            TraceEvent::ItemAssigned { item, agent } => {
                check_agent(*agent)?;
                if state.items().owner(*item).is_some() {
                    return Err(Error::Invariant(format!("trace assigns item {item} twice")));
                }
                state.items_mut().assign(*item, *agent);
            }
            TraceEvent::CycleResolved { cycle, .. } => {
                *state = resolve_cycle_mixed(state, cycle)?;
            }
            TraceEvent::MatchingRound { pairs, .. } => {
                for &(agent, item) in pairs {
                    check_agent(agent)?;
                    if state.items().owner(item).is_some() {
                        return Err(Error::Invariant(format!("trace assigns item {item} twice")));
                    }
                    state.items_mut().assign(item, agent);
                }
            }
            TraceEvent::CakeAllocated { recipients, pieces } => {
                if recipients.len() != pieces.len() {
                    return Err(Error::Invariant("cake event with mismatched recipients".into()));
                }
                for (&agent, piece) in recipients.iter().zip(pieces) {
                    check_agent(agent)?;
                    if state.cake().iter().any(|c| c.overlaps(piece)) {
                        return Err(Error::Invariant(format!("cake {piece} allocated twice")));
                    }
                    state.add_cake(agent, piece)?;
                }
            }
        }
        Ok(())
    }

    /// State after every event, starting from the empty allocation (not included).
    pub fn states(&self, agents: usize) -> Result<Vec<MixedAllocation>> {
        let mut state = MixedAllocation::from_items(Allocation::empty(agents));
        let mut out = Vec::with_capacity(self.events.len());
        for e in &self.events {
            Self::apply(&mut state, e)?;
            out.push(state.clone());
        }
        Ok(out)
    }

    pub fn replay(&self, agents: usize) -> Result<MixedAllocation> {
        let mut state = MixedAllocation::from_items(Allocation::empty(agents));
        for e in &self.events {
            Self::apply(&mut state, e)?;
        }
        Ok(state)
    }

    /// Items-only replay; fails if the trace allocates cake.
    pub fn replay_items(&self, agents: usize) -> Result<Allocation> {
        let state = self.replay(agents)?;
        if state.cake().iter().any(|c| !c.is_empty()) {
            return Err(Error::Invariant("trace allocates cake".into()));
        }
        Ok(state.into_parts().0)
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::ItemAssigned { item, agent } => write!(f, "assign item={item} agent={agent}"),
            TraceEvent::CycleResolved { cycle, graph } => {
                write!(f, "cycle graph={} agents={}", graph.name(), join(cycle))
            }
            TraceEvent::MatchingRound { round, component, pairs } => {
                let pairs: Vec<String> = pairs.iter().map(|(a, c)| format!("{a}:{c}")).collect();
                write!(f, "match round={round} component={} pairs={}", join(component), pairs.join(","))
            }
            TraceEvent::CakeAllocated { recipients, pieces } => {
                let pieces: Vec<String> = pieces.iter().map(|p| p.to_string()).collect();
                write!(f, "cake agents={} pieces={}", join(recipients), pieces.join(";"))
            }
        }
    }
}

impl fmt::Display for RunTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad index {x:?}"))))
        .collect()
}

impl FromStr for TraceEvent {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut words = line.split_whitespace();
        let tag = words.next().ok_or_else(|| Error::Parse("empty trace line".into()))?;
        let mut fields = std::collections::BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {w:?}")))?;
            fields.insert(k, v);
        }
        let field = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::Parse(format!("{tag} line lacks {k}=")))
        };
        let index = |k: &str| -> Result<usize> {
            field(k)?.parse().map_err(|_| Error::Parse(format!("bad {k} in {line:?}")))
        };
        match tag {
            "assign" => Ok(TraceEvent::ItemAssigned { item: index("item")?, agent: index("agent")? }),
            "cycle" => {
                let graph = match field("graph")? {
                    "plain" => GraphVariant::Plain,
                    "top-trading" => GraphVariant::TopTrading,
                    "generalized" => GraphVariant::Generalized,
                    "top-trading-generalized" => GraphVariant::TopTradingGeneralized,
                    g => return Err(Error::Parse(format!("unknown graph {g:?}"))),
                };
                Ok(TraceEvent::CycleResolved { cycle: parse_list(field("agents")?)?, graph })
            }
            "match" => {
                let pairs = field("pairs")?;
                let pairs = if pairs.is_empty() {
                    Vec::new()
                } else {
                    pairs
                        .split(',')
                        .map(|p| {
                            let (a, c) = p
                                .split_once(':')
                                .ok_or_else(|| Error::Parse(format!("bad pair {p:?}")))?;
                            Ok((
                                a.parse().map_err(|_| Error::Parse(format!("bad pair {p:?}")))?,
                                c.parse().map_err(|_| Error::Parse(format!("bad pair {p:?}")))?,
                            ))
                        })
                        .collect::<Result<Vec<_>>>()?
                };
                Ok(TraceEvent::MatchingRound {
                    round: index("round")?,
                    component: parse_list(field("component")?)?,
                    pairs,
                })
            }
            "cake" => {
                let recipients = parse_list(field("agents")?)?;
                let raw = field("pieces")?;
                let pieces = if recipients.is_empty() {
                    Vec::new()
                } else {
                    raw.split(';')
                        .map(|p| CakePiece::parse_list(p.split(',').filter(|s| !s.is_empty())))
                        .collect::<Result<Vec<_>>>()?
                };
                Ok(TraceEvent::CakeAllocated { recipients, pieces })
            }
            t => Err(Error::Parse(format!("unknown trace event {t:?}"))),
        }
    }
}

impl FromStr for RunTrace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let events = s
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(RunTrace { events })
    }
}
