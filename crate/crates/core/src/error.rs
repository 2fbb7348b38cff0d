use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register of {n_qubits} qubits is outside 1..={max}")]
    RegisterSize { n_qubits: usize, max: usize },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndex { index: usize, dim: usize },

    #[error("malformed gate: {0}")]
    MalformedGate(String),

    #[error("angle slot {slot} not resolvable from {available} angles")]
    UnresolvedSlot { slot: usize, available: usize },

    #[error("no gate is bound to slot {0}")]
    SlotNotFound(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("observation kind does not match the model: {0}")]
    ObservationKind(&'static str),

    #[error("action {action} out of range for {n_actions} actions")]
    ActionOutOfRange { action: usize, n_actions: usize },

    #[error("environment episode already terminated")]
    EpisodeDone,
}

pub type Result<T> = std::result::Result<T, Error>;
