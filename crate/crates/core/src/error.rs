use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("closure exceeds the cap of {cap} elements")]
    ClosureTooLarge { cap: usize },
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("not a p-group: order {order} is not a power of {p}")]
    NotPGroup { order: usize, p: u64 },
    #[error("no solution")]
    NoSolution,
    #[error("fusion data is not realizable: {0}")]
    NotRealizable(String),
    #[error("basic set construction failed: {0}")]
    ConstructionFailed(String),
    #[error("right action is not free")]
    FreenessViolated,
    #[error("element does not transport {0}")]
    NotTransporter(String),
    #[error("element does not centralize the subgroup")]
    NotCentralizing,
    #[error("morphisms are not composable")]
    NotComposable,
    #[error("lift impossible: {0}")]
    LiftImpossible(String),
    #[error("functoriality failure: {0}")]
    FunctorialityFailure(String),
    #[error("subset is not closed: {0}")]
    NotClosed(String),
    #[error("subgroup is not minimal in the complement: {0}")]
    NotMinimal(String),
    #[error("trace map is not an isomorphism: {0}")]
    TraceNotIso(String),
    #[error("complement identity failure: {0}")]
    ComplementIdentityFailure(String),
    #[error("naturality failure: {0}")]
    NaturalityFailure(String),
    #[error("no homomorphic section found: {0}")]
    SplittingNotFound(String),
    #[error("cocycle not closed: {0}")]
    CocycleNotClosed(String),
    #[error("centric decomposition failure: {0}")]
    CentricDecompositionFailure(String),
    #[error("obstruction class nonzero: {0}")]
    ObstructionNonzero(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
