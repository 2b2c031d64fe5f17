use thiserror::Error;

/// Which inequality of the parameter space a candidate violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamConstraint {
    /// A component is NaN or infinite.
    Finite,
    /// `mu > 0`.
    MuPositive,
    /// `sigma2 >= 0`.
    Sigma2NonNegative,
    /// `mu > sigma2 * (lambda1 + lambda3)`.
    MuAboveFirstMargin,
    /// `mu > sigma2 * (lambda2 + lambda3)`.
    MuAboveSecondMargin,
    /// `lambda1 > lambda3`.
    Lambda1AboveLambda3,
    /// `lambda2 > lambda3`.
    Lambda2AboveLambda3,
    /// `lambda3 >= 0`.
    Lambda3NonNegative,
}

impl core::fmt::Display for ParamConstraint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            ParamConstraint::Finite => "all parameters finite",
            ParamConstraint::MuPositive => "mu > 0",
            ParamConstraint::Sigma2NonNegative => "sigma2 >= 0",
            ParamConstraint::MuAboveFirstMargin => "mu > sigma2*(lambda1+lambda3)",
            ParamConstraint::MuAboveSecondMargin => "mu > sigma2*(lambda2+lambda3)",
            ParamConstraint::Lambda1AboveLambda3 => "lambda1 > lambda3",
            ParamConstraint::Lambda2AboveLambda3 => "lambda2 > lambda3",
            ParamConstraint::Lambda3NonNegative => "lambda3 >= 0",
        };
        f.write_str(s)
    }
}

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameter vector outside the admissible space.
    #[error("invalid parameters: constraint `{0}` violated")]
    InvalidParams(ParamConstraint),
    /// `sigma2 = 0`: the scaling gauge cannot be fixed at the Poisson boundary.
    #[error("cannot normalize gauge: sigma2 = 0 (Poisson boundary)")]
    GaugeUnreachable,
    /// The pgf exponent has a negative Poisson-packet rate.
    #[error("parameters not representable as a sum of Poisson packets: coefficient ({j},{k}) = {value}")]
    NonRepresentable {
        /// First exponent of the offending monomial.
        j: u8,
        /// Second exponent of the offending monomial.
        k: u8,
        /// Its (negative) rate.
        value: f64,
    },
    /// Table growth hit the per-axis cap before the tail was small enough.
    #[error("truncation cap {cap} reached with tail mass {tail_mass:e}")]
    TruncationCap {
        /// Per-axis cap.
        cap: usize,
        /// Mass left outside the table.
        tail_mass: f64,
    },
    /// Weight exponent or quadrature order out of range.
    #[error("invalid weight specification: {0}")]
    InvalidWeight(&'static str),
    /// No observations.
    #[error("empty sample")]
    EmptySample,
    /// Too few observations for the requested operation.
    #[error("sample too small: n = {n}, need at least {min}")]
    SampleTooSmall {
        /// Observed size.
        n: usize,
        /// Minimum size.
        min: usize,
    },
    /// All pairs identical; moments carry no dispersion information.
    #[error("degenerate sample: all pairs identical")]
    DegenerateSample,
    /// Coarse and refined quadrature disagree beyond tolerance.
    #[error("quadrature refinement disagreement: coarse {coarse}, refined {refined}")]
    QuadratureDisagreement {
        /// Result at the base order.
        coarse: f64,
        /// Result at twice the base order.
        refined: f64,
    },
    /// An observed cell has probability below the underflow floor.
    #[error("likelihood underflow at cell ({x},{y})")]
    LikelihoodUnderflow {
        /// First coordinate.
        x: u32,
        /// Second coordinate.
        y: u32,
    },
    /// Too many bootstrap replicates failed to refit.
    #[error("{failures} of {total} bootstrap replicates failed (limit {limit})")]
    TooManyFailures {
        /// Failed replicates.
        failures: usize,
        /// Requested replicates.
        total: usize,
        /// Allowed failures.
        limit: usize,
    },
    /// Bootstrap size below the supported minimum.
    #[error("bootstrap size {0} below minimum 99")]
    BootstrapTooSmall(usize),
    /// Alternative-family parameters violate the family's constraints.
    #[error("invalid alternative: {0}")]
    InvalidAlternative(&'static str),
}
