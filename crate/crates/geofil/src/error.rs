use alloc::string::String;

/// Everything that can go wrong outside of a declared trajectory stop.
///
/// Terminal integration outcomes (leaving the chart, hitting a degenerate
/// region, exhausting the event budget) are *not* errors — they are recorded on
/// the trajectory as a [`crate::solver::StopReason`]. This enum covers genuine
/// failures: invalid inputs, violated preconditions, and evaluation points
/// where a quantity is not defined.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Point lies outside the chart domain.
    #[error("point outside chart domain: coordinate {axis} = {value:.6e} not in [{lo:.6e}, {hi:.6e}]")]
    OutsideChart { axis: usize, value: f64, lo: f64, hi: f64 },

    /// |det g| fell below the degeneracy floor.
    #[error("metric degenerate: |det g| = {det:.6e} <= floor {floor:.6e}")]
    DegenerateMetric { det: f64, floor: f64 },

    /// Eigenvalue sign pattern does not match the declared signature.
    #[error("signature mismatch: expected {expected_negative} negative eigenvalue(s), found {found_negative}")]
    SignatureMismatch { expected_negative: usize, found_negative: usize },

    /// Finite differencing would straddle a switching surface.
    #[error("surface '{surface}' within finite-difference reach: |sigma|/|grad sigma| = {distance:.6e} <= h = {step:.6e}")]
    SurfaceTooClose { surface: String, distance: f64, step: f64 },

    /// Analytic Christoffel symbols requested but none are attached.
    #[error("no analytic Christoffel data on this model; use finite differences")]
    NoAnalyticChristoffel,

    /// Surface gradient vanished where it must not.
    #[error("surface '{surface}' has |grad sigma| = {norm:.6e} <= 1e-12 at a query point")]
    DegenerateSurface { surface: String, norm: f64 },

    /// `sliding_field` called on a non-sliding contact.
    #[error("contact is {found:?}, not sliding; sliding field undefined")]
    NotSliding { found: crate::filippov::ContactKind },

    /// The sliding convex combination has no solution (a = b).
    #[error("sliding coefficient undefined: normal rates coincide (a = b = {rate:.6e})")]
    SlidingNoSolution { rate: f64 },

    /// Sampled field was undefined on more than half the probe points.
    #[error("field undefined on {undefined} of {total} sample points (> 50%)")]
    FieldMostlyUndefined { undefined: usize, total: usize },

    /// A configuration value failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Vector length does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Initial state sits on a surface with tangential contact.
    #[error("initial state has tangential contact with surface '{surface}'; continuation undefined")]
    TangentialStart { surface: String },

    /// Catalog entry has no closed-form solution.
    #[error("catalog entry '{entry}' carries no exact-geodesic oracle")]
    NoOracle { entry: String },

    /// Closed-form solution not valid for this input.
    #[error("oracle for '{entry}' not applicable: {reason}")]
    OracleDomain { entry: String, reason: String },

    /// Unknown catalog entry name.
    #[error("unknown catalog metric '{0}' (expected flat | kink1d | conformal2d | rosen)")]
    UnknownMetric(String),

    /// Bad or missing catalog parameter.
    #[error("bad parameter '{name}': {reason}")]
    BadParameter { name: String, reason: String },

    /// Operation requires a Riemannian (positive-definite) metric.
    #[error("operation requires a Riemannian metric; '{entry}' is not positive-definite")]
    NotRiemannian { entry: String },

    /// Fit window around an event is unusable.
    #[error("fit window rejected: {0}")]
    BadWindow(String),
}

pub type Result<T> = core::result::Result<T, Error>;
