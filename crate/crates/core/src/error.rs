use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::optimizer::JointSolution;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Why a user's SINR target could not be met, reported by the initializer.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDiagnostic {
    pub user: usize,
    pub target_db: f64,
    /// SINR the user would reach alone with the full power budget (dB).
    pub single_user_limit_db: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("non-finite steering angle")]
    NonFiniteAngle,

    #[error("path-loss distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid RDARS state: {0}")]
    InvalidState(String),

    #[error("SINR of user {0} is undefined (zero signal, interference and noise)")]
    UndefinedSinr(usize),

    #[error("zero echo: H2 F vanishes, receive filter undefined")]
    ZeroEcho,

    #[error("second-order cone program is infeasible")]
    Infeasible,

    #[error("second-order cone program is unbounded")]
    Unbounded,

    #[error("SINR targets unattainable this iteration")]
    SinrTargetsUnattainable,

    #[error("user {0}: zero desired-signal gain with a positive SINR target")]
    UserInfeasible(usize),

    #[error("infeasible SINR targets: {0:?}")]
    InfeasibleTargets(Vec<UserDiagnostic>),

    #[error("Kronecker lift of size {size} exceeds the cap {cap}")]
    LiftTooLarge { size: usize, cap: usize },

    #[error("contradictory scheme flags: {0}")]
    ContradictoryScheme(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("optimization aborted at iteration {iteration}: {cause}")]
    Aborted {
        iteration: usize,
        cause: Box<Error>,
        last_feasible: Option<Box<JointSolution>>,
    },
}
