use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jet mismatch: {0}")]
    JetMismatch(String),
    #[error("jet order {0} exceeds the maximum of {max}", max = crate::jets::MAX_ORDER)]
    JetOrder(usize),
    #[error("constant term vanishes ({0})")]
    Ramified(&'static str),
    #[error("supplied branch value is not a valid {0} of the constant term")]
    BranchMismatch(&'static str),
    #[error("zero constant term required for {0}")]
    NonzeroConstant(&'static str),
    #[error("linear coefficient vanishes; series is not invertible")]
    DegenerateLinearTerm,
    #[error("leading power {declared} misdeclared: {detail}")]
    LeadingPower { declared: usize, detail: String },

    #[error("point outside the chart: max-norm offset {offset:.3e} exceeds radius {radius}")]
    OutsideChart { offset: f64, radius: f64 },
    #[error("Newton iteration did not converge ({0})")]
    NewtonDivergence(String),
    #[error("singular Jacobian ({0})")]
    SingularJacobian(&'static str),
    #[error("branch continuation failed: {0}")]
    BranchContinuation(String),
    #[error("chart (z1, z2) is ill-conditioned at the base point (condition number {0:.3e})")]
    IllConditionedChart(f64),

    #[error("holonomy precondition violated: {0}")]
    HolonomyDomain(&'static str),

    #[error("base point is not a root of the polynomial (|A| = {0:.3e})")]
    NotARoot(f64),
    #[error("no local branch has slope within 0.5 relative distance of the hint ({0})")]
    NoBranchMatchesHint(String),
    #[error("branch slope defect: {0}")]
    BranchSlopeDefect(&'static str),
    #[error("finite-difference stencil did not converge: {0}")]
    StencilNotConverged(String),
    #[error("sampler failed: {0}")]
    Sampler(String),
    #[error("invalid polynomial: {0}")]
    Polynomial(String),

    #[error("slope not coprime: ({0}, {1})")]
    NotCoprime(i64, i64),
    #[error("involution defect {0:.3e} too large for the closed-form expansion")]
    InvolutionDefect(f64),
    #[error("closed-form expansion requires base point (-1, -1)")]
    UnsupportedBase,
    #[error("cone angle {0} outside [0, {1}]")]
    ThetaOutOfRange(f64, f64),
    #[error("continuation step fell below {0:e} at parameter {1}")]
    ContinuationStalled(f64, f64),
    #[error("filled base point unavailable: {0}")]
    FilledBase(String),

    #[error("coincident endpoints in cross-ratio")]
    CoincidentEndpoints,
    #[error("degenerate line configuration (cross-ratio = 1)")]
    DegenerateLines,
    #[error("parabolic peripheral element: tube radius is infinite")]
    Parabolic,
    #[error("cone angle must be positive")]
    ZeroAngle,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}
