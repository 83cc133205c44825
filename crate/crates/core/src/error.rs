use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Zadoff-Chu base length {0} is not prime")]
    NonPrimeLength(usize),
    #[error("Zadoff-Chu root {root} outside 1..{length}")]
    RootOutOfRange { root: usize, length: usize },
    #[error("cannot extend a sequence of length {base} to {target}")]
    TargetTooShort { base: usize, target: usize },
    #[error("SRS symbol must hold {expected} values, got {got}")]
    SymbolLength { expected: usize, got: usize },
    #[error("LFSR seed must be a nonzero {degree}-bit value, got {seed:#x}")]
    InvalidSeed { seed: u32, degree: u32 },
    #[error("feedback polynomial is not primitive (period {period}, expected {expected})")]
    NotPrimitive { period: usize, expected: usize },
    #[error("polynomials do not form a preferred pair (cross-correlation value {0})")]
    NotPreferredPair(i32),
    #[error("repetition factor must be at least 1")]
    InvalidRepetition,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),
}
