use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error("constant term must be 1, found {0}")]
    NotUnit(String),
    #[error("residue window excludes y^-1 (lower bound {0})")]
    ResidueWindow(i32),
    #[error("could not avoid forbidden values after {0} draws")]
    SamplingExhausted(usize),
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("resonant index {0}: recurrence pivot vanishes")]
    Resonance(usize),
    #[error("operator is not analytic-normalizable at 0: {0}")]
    NotNormalizable(String),
    #[error("faithful window collapsed (truncation {trunc}, shift {shift})")]
    WindowCollapse { trunc: u32, shift: u32 },
    #[error("leading coefficient of P_{0} vanishes")]
    DegenerateBasis(usize),
    #[error("inconsistent linear system at {0}")]
    Inconsistent(String),
    #[error("insufficient table depth: need {need}, have {have}")]
    Depth { need: usize, have: usize },
    #[error("Pochhammer pole: {0}")]
    PochhammerPole(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
