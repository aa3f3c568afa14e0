use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // expressions
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("indeterminate value at {z}: {reason}")]
    Indeterminate { z: Complex64, reason: String },
    #[error("essential singularity at {z}")]
    EssentialSingularity { z: Complex64 },
    #[error("expression is not rational (contains exp)")]
    NotRational,
    #[error("local order undetermined at {z}: fitted slope {slope}")]
    OrderUndetermined { z: Complex64, slope: f64 },
    #[error("expression vanishes identically near {z}")]
    IdenticallyZero { z: Complex64 },
    #[error("Möbius coefficients satisfy ad - bc = 0")]
    SingularMobius,
    #[error("not a finite complex value: {0}")]
    NonFinite(String),

    // m-triples and domains
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("m must be a positive integer")]
    InvalidM,
    #[error("1-form coefficient f has a pole at {z}")]
    NonHolomorphic { z: Complex64 },
    #[error("regularity violated at {z}: ord f = {order_f}, ord g = {order_g}")]
    RegularityViolation {
        z: Complex64,
        order_f: i32,
        order_g: i32,
    },
    #[error("evaluation at puncture {z}")]
    AtPuncture { z: Complex64 },
    #[error("point {z} lies outside the domain")]
    OutsideDomain { z: Complex64 },
    #[error("metric density vanishes or blows up at {z}")]
    DegenerateMetric { z: Complex64 },

    // meshes, distances, probes
    #[error("density is not positive and finite at {z}")]
    DensityNonFinite { z: Complex64 },
    #[error("mesh node {node} is not connected to the boundary")]
    Disconnected { node: usize },
    #[error("invalid truncation levels: {0}")]
    InvalidLevels(String),
    #[error("integrand overflow before truncation level {eps}")]
    IntegrandOverflow { eps: f64 },
    #[error("point {z} is not inside the unit disk")]
    OutsideUnitDisk { z: Complex64 },

    // estimates
    #[error("invalid property: {0}")]
    InvalidProperty(String),
    #[error("property violated: {0}")]
    PropertyViolated(String),
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),
    #[error("eta = {eta} outside (0, {max})")]
    EtaOutOfRange { eta: f64, max: f64 },
    #[error("function attains the excluded value {value} near {z}")]
    AttainsExcluded { z: Complex64, value: String },
    #[error("spherical gradient maximum sits on the rim at {z}")]
    MaxOnRim { z: Complex64 },
    #[error("function is constant")]
    ConstantFunction,
    #[error("duplicate value {0}")]
    Duplicate(String),

    // surfaces
    #[error("integrand has a pole on the segment near {z}")]
    PoleOnPath { z: Complex64 },
    #[error("det L drifted by {drift:e} at {z}; reduce the step")]
    DetDrift { z: Complex64, drift: f64 },
    #[error("step {step} too large for the domain (max {max})")]
    StepTooLarge { step: f64, max: f64 },
    #[error("degenerate data at {z}: {reason}")]
    DegenerateData { z: Complex64, reason: String },
    #[error("operation not defined for this surface class: {0}")]
    NotApplicable(String),
    #[error("no vertex has a full finite-difference stencil")]
    NoStencil,

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::UnknownIdentifier { .. } => "unknown_identifier",
            Error::Indeterminate { .. } => "indeterminate",
            Error::EssentialSingularity { .. } => "essential_singularity",
            Error::NotRational => "not_rational",
            Error::OrderUndetermined { .. } => "order_undetermined",
            Error::IdenticallyZero { .. } => "identically_zero",
            Error::SingularMobius => "singular_mobius",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidDomain(_) => "invalid_domain",
            Error::InvalidM => "invalid_m",
            Error::NonHolomorphic { .. } => "non_holomorphic",
            Error::RegularityViolation { .. } => "regularity_violation",
            Error::AtPuncture { .. } => "at_puncture",
            Error::OutsideDomain { .. } => "outside_domain",
            Error::DegenerateMetric { .. } => "degenerate_metric",
            Error::DensityNonFinite { .. } => "density_non_finite",
            Error::Disconnected { .. } => "disconnected",
            Error::InvalidLevels(_) => "invalid_levels",
            Error::IntegrandOverflow { .. } => "integrand_overflow",
            Error::OutsideUnitDisk { .. } => "outside_unit_disk",
            Error::InvalidProperty(_) => "invalid_property",
            Error::PropertyViolated(_) => "property_violated",
            Error::MeshTooCoarse(_) => "mesh_too_coarse",
            Error::EtaOutOfRange { .. } => "eta_out_of_range",
            Error::AttainsExcluded { .. } => "attains_excluded",
            Error::MaxOnRim { .. } => "max_on_rim",
            Error::ConstantFunction => "constant_function",
            Error::Duplicate(_) => "duplicate",
            Error::PoleOnPath { .. } => "pole_on_path",
            Error::DetDrift { .. } => "det_drift",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::DegenerateData { .. } => "degenerate_data",
            Error::NotApplicable(_) => "not_applicable",
            Error::NoStencil => "no_stencil",
            Error::Io(_) => "io",
        }
    }
}
