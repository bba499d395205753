use alloc::string::String;

/// Every failure the numerical core can report.
///
/// Variants name the check that failed; the payload carries the measured
/// quantity or a short description of the offending datum.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("argument {0} is a pole of Gamma/digamma (non-positive integer)")]
    PoleAtNonPositiveInteger(String),
    #[error("argument {0} lies on the branch cut (-inf, 0]")]
    BranchCut(String),
    #[error("evaluation point within {distance:e} of a pole")]
    NearPole { distance: f64 },
    #[error("rational matrix is singular (determinant vanishes identically)")]
    SingularFamily,
    #[error("rational fit is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("rational fit residual {0:e} exceeds tolerance; degree too low")]
    DegreeTooLow(f64),
    #[error("function is not regular at the expansion point")]
    NotRegular,
    #[error("contour separation failed: {0}")]
    NonCongruentViolation(String),
    #[error("quadrature did not converge under node doubling (delta {0:e})")]
    NotConverged(f64),
    #[error("formal solution is resonant at order {order}: ad(A0) eigenvalue distance {gap:e}")]
    ResonantSystem { order: usize, gap: f64 },
    #[error("system is not abelian: commutator norm {0:e}")]
    NotAbelian(f64),
    #[error("unsupported system: {0}")]
    Unsupported(String),
    #[error("truncation insufficient: doubling N changed the solution by {0:e}")]
    TruncationInsufficient(f64),
    #[error("evaluation point within {distance:e} of a pole of the fundamental solution")]
    PoleHit { distance: f64 },
    #[error("connection matrix fit residual {0:e} too large")]
    FitResidualTooLarge(f64),
    #[error("connection matrix periodicity violated by {0:e}")]
    PeriodicityViolation(f64),
    #[error("matrices do not commute: commutator norm {0:e}")]
    NotCommuting(f64),
    #[error("eigenvalue clustering is unstable: {0}")]
    ClusterAmbiguity(String),
    #[error("consistency condition on logarithms violated by {0:e}")]
    ConsistencyViolation(f64),
    #[error("point {0} has no logarithm in the branch domain")]
    BranchOutOfDomain(String),
    #[error("connection matrix is not unipotent: {0:e}")]
    NotUnipotent(f64),
    #[error("residue-sum relation violated by {0:e}")]
    RelationViolation(f64),
    #[error("branch domain fails its non-congruence test: {0}")]
    NonCongruentPi(String),
    #[error("hbar is numerically rational: {0}")]
    RationalHbar(String),
    #[error("q is numerically a root of unity: {0}")]
    RootOfUnity(String),
    #[error("zero/pole multiset cannot be chained into shift ladders: {0}")]
    FactorizationFailure(String),
    #[error("location {0} lies outside the branch domain")]
    LocationOutsideDomain(String),
    #[error("dilation by zero")]
    ZeroDilation,
    #[error("relation check failed: {relation} residual {residual:e}")]
    RelationCheckFailed { relation: String, residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Stable short name of the failed check, used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::PoleAtNonPositiveInteger(_) => "PoleAtNonPositiveInteger",
            Error::BranchCut(_) => "BranchCut",
            Error::NearPole { .. } => "NearPole",
            Error::SingularFamily => "SingularFamily",
            Error::IllConditioned(_) => "IllConditioned",
            Error::DegreeTooLow(_) => "DegreeTooLow",
            Error::NotRegular => "NotRegular",
            Error::NonCongruentViolation(_) => "NonCongruentViolation",
            Error::NotConverged(_) => "NotConverged",
            Error::ResonantSystem { .. } => "ResonantSystem",
            Error::NotAbelian(_) => "NotAbelian",
            Error::Unsupported(_) => "Unsupported",
            Error::TruncationInsufficient(_) => "TruncationInsufficient",
            Error::PoleHit { .. } => "PoleHit",
            Error::FitResidualTooLarge(_) => "FitResidualTooLarge",
            Error::PeriodicityViolation(_) => "PeriodicityViolation",
            Error::NotCommuting(_) => "NotCommuting",
            Error::ClusterAmbiguity(_) => "ClusterAmbiguity",
            Error::ConsistencyViolation(_) => "ConsistencyViolation",
            Error::BranchOutOfDomain(_) => "BranchOutOfDomain",
            Error::NotUnipotent(_) => "NotUnipotent",
            Error::RelationViolation(_) => "RelationViolation",
            Error::NonCongruentPi(_) => "NonCongruentPi",
            Error::RationalHbar(_) => "RationalHbar",
            Error::RootOfUnity(_) => "RootOfUnity",
            Error::FactorizationFailure(_) => "FactorizationFailure",
            Error::LocationOutsideDomain(_) => "LocationOutsideDomain",
            Error::ZeroDilation => "ZeroDilation",
            Error::RelationCheckFailed { .. } => "RelationCheckFailed",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
