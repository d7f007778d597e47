use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample count must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("free-space measure must be positive, got {0}")]
    EmptyFreeSpace(f64),
    #[error("rejection sampling gave up after {attempts} draws ({accepted} accepted)")]
    SamplingExhausted { attempts: usize, accepted: usize },
    #[error("configuration ({x}, {y}) is not in free space")]
    NotFree { x: f64, y: f64 },
    #[error("node {0} does not exist")]
    NoSuchNode(usize),
    #[error("reparenting {child} under {parent} would create a cycle")]
    Cycle { parent: usize, child: usize },
    #[error("node {node} is not a child of the root {root}")]
    NotRootChild { node: usize, root: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
