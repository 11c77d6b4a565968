use thiserror::Error;

/// Errors across the two-frame analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("points coincide within tolerance")]
    CoincidentPoints,
    #[error("lines are parallel within tolerance")]
    ParallelLines,
    #[error("points are not collinear within tolerance")]
    NotCollinear,
    #[error("degenerate quadruple: a cross-ratio denominator vanishes")]
    DegenerateQuadruple,
    #[error("basis points are collinear")]
    CollinearBasis,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("label {label:?} missing from frame {frame:?}")]
    MissingLabel { frame: String, label: String },
    #[error("degenerate traces: u*v too close to 1")]
    DegenerateTraces,
    #[error("leading coefficient of the eliminated quadratic vanishes at u = {0}")]
    LeadingCoefficientVanishes(f64),
    #[error("no root in [{lo}, {hi}] (min |p| = {min_abs:.3e} at u = {at})")]
    NoRootInInterval {
        lo: f64,
        hi: f64,
        min_abs: f64,
        at: f64,
    },
    #[error("no candidate root passed geometric validation")]
    NoValidRoot,
    #[error("assignment search needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("no valid assignment: every basis selection failed the focal solve")]
    NoValidAssignment,
    #[error("scene point coincides with a focal point")]
    PointAtFocus,
    #[error("projection ray is parallel to the image plane")]
    RayParallelToPlane,
    #[error("scene generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("rays are parallel or skew")]
    RaysParallel,
    #[error("focal solution is not usable for this operation")]
    InvalidSolution,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
