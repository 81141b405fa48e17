use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate element `{0}` in finite set")]
    DuplicateElement(String),
    #[error("unknown element `{element}` (not in {context})")]
    UnknownElement { element: String, context: String },
    #[error("map table is not total or leaves its codomain: {0}")]
    MalformedMap(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("map is not surjective: `{0}` has an empty fiber")]
    NotSurjective(String),
    #[error("subset is not invariant: `{element}` moves to `{image}` outside it")]
    NotInvariant { element: String, image: String },
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("invalid group homomorphism: {0}")]
    InvalidHom(String),
    #[error("invalid extension context: {0}")]
    InvalidContext(String),
    #[error("malformed extension: {0}")]
    MalformedExtension(String),
    #[error("invalid morphism config: {0}")]
    InvalidConfig(String),
    #[error("search budget exceeded: {needed} candidates against a budget of {budget}")]
    SearchBudgetExceeded { needed: u128, budget: u64 },
    #[error("zero form excluded: correction at the basepoint is {0}, not 0")]
    ZeroExcluded(String),
    #[error("core disagreement at `{0}`")]
    CoreDisagreement(String),
    #[error("overlap violation: `{0}` is shared beyond the mandatory core")]
    OverlapViolation(String),
    #[error("empty family")]
    EmptyFamily,
    #[error("iso-class quotient is incompatible with the preorder")]
    IncompatibleQuotient,
    #[error("class is not gaunt: {0}")]
    NotGaunt(String),
    #[error("invalid class: {0}")]
    InvalidClass(String),
    #[error("connection set of the extended bundle is empty")]
    EmptyConnHat,
    #[error("not an injective invariant subset: {0}")]
    NotInjectiveInvariant(String),
    #[error("functional at the basepoint is {0}, not base_s(d0) = 0")]
    ZeroDecomposition(String),
    #[error("pullback does not embed: {0}")]
    NonMonicPullback(String),
    #[error("functional is not quotient-injective on the mandatory core: {0}")]
    BaseNotInjective(String),
    #[error("input is not injective, complete and small: {0}")]
    NotCoherentInput(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
