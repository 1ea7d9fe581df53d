use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("letter index {letter} outside alphabet x0..x{max}")]
    Alphabet { letter: usize, max: usize },

    #[error("alphabet mismatch: {left} vs {right} letters")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("node index {index} out of range for a {nodes}-node network")]
    InvalidNode { index: usize, nodes: usize },

    #[error("subgraph search over {nodes} nodes exceeds budget of {budget}")]
    SubgraphBudget { nodes: usize, budget: usize },

    #[error("condition error: {0}")]
    Condition(String),

    #[error("truncation degree {have} too small, need at least {need}")]
    Truncation { have: usize, need: usize },

    #[error("model error: {0}")]
    Model(String),

    #[error("no convergence after {iterations} iterations (last change {last_change:e}); try a shorter horizon")]
    NoConvergence { iterations: usize, last_change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
