use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series has zero constant term")]
    ZeroConstantTerm,
    #[error("series constant term {0} is not positive")]
    NonPositiveConstantTerm(f64),
    #[error("chart evaluated on its boundary w = 0")]
    DivisionByZero,
    #[error("point lies on the end locus")]
    OnEndLocus,
    #[error("negative discriminant: no real principal direction")]
    NegativeDiscriminant,
    #[error("L = M = N = 0: every direction solves the equation")]
    DegenerateQuadratic,
    #[error("the field is regular over the chart origin")]
    NoSingularity,
    #[error("singular point is not a hyperbolic saddle")]
    NonHyperbolic,
    #[error("m0 vanishes; radial equation is not in standard form")]
    DegenerateM,
    #[error("seed ({0}, {1}) lies outside the chart's validity region")]
    SeedOutsideRegion(f64, f64),
    #[error("trajectory left the validity region at theta = {theta}")]
    LeftDomain { theta: f64 },
    #[error("step size collapsed below {0:e}")]
    StepCollapse(f64),
    #[error("invalid jet: {0}")]
    InvalidJet(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
