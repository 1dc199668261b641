use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid cake piece: {0}")]
    InvalidCake(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("graph restriction needs at least one agent")]
    EmptyRestriction,

    #[error("matching needs at least as many items ({items}) as agents ({agents})")]
    NotEnoughItems { agents: usize, items: usize },

    #[error("search space of {required} assignments exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("cycle-resolution policy refused cycle {cycle:?}: {reason}")]
    CycleRefused { cycle: Vec<usize>, reason: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}
