use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("antisymmetry violated: {0} <= {1} <= {0}")]
    AntisymmetryViolation(String, String),
    #[error("size cap exceeded: {what} has size {size}, cap is {cap}")]
    SizeCapExceeded { what: String, size: usize, cap: usize },
    #[error("posets are limited to 64 elements, got {0}")]
    TooManyElements(usize),
    #[error("operands live over different bases")]
    BaseMismatch,
    #[error("not a monotone map: {0}")]
    NotMonotone(String),
    #[error("lattice table is invalid: {0}")]
    InvalidLattice(String),
    #[error("lattice is not prime algebraic")]
    NotPrimeAlgebraic,
    #[error("bimodule law violated: {w_lo} <= {w} R {v} <= {v_hi} but not {w_lo} R {v_hi}")]
    BimoduleLawViolation {
        w_lo: String,
        w: String,
        v: String,
        v_hi: String,
    },
    #[error("map does not preserve joins: {0}")]
    NotJoinPreserving(String),
    #[error("map is not a bimodule morphism: {0} R {1} is not preserved")]
    NotABimoduleMorphism(String, String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("formula uses a modality but the model has no accessibility relation")]
    NoAccessibilityRelation,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("semantics disagree at world `{world}` for `{formula}`")]
    EquivalenceFailure { world: String, formula: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("missing or conflicting composite {0} o {1}")]
    MissingComposite(String, String),
    #[error("identity law fails for `{0}`")]
    IdentityViolation(String),
    #[error("associativity fails for {0} o {1} o {2}")]
    AssociativityViolation(String, String, String),
    #[error("functor law fails: {0}")]
    FunctorLawViolation(String),
    #[error("naturality fails: {0}")]
    NaturalityViolation(String),
    #[error("base category is not Cauchy-complete; run `kripkekit complete` on it first")]
    BaseNotCauchyComplete,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cannot read `{path}`: {msg}")]
    Io { path: String, msg: String },
    #[error("malformed JSON at line {line}, column {column}: {msg}")]
    Json { line: usize, column: usize, msg: String },
    #[error("{format} file does not match its schema at `{pointer}`: {msg}")]
    Schema { format: String, pointer: String, msg: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

impl Error {
    pub(crate) fn cap(what: impl Into<String>, size: usize, cap: usize) -> Self {
        Error::SizeCapExceeded {
            what: what.into(),
            size,
            cap,
        }
    }
}
