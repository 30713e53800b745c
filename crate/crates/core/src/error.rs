use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),
    #[error("level {level} exceeds the resource limit {max}")]
    ResourceLimit { level: u32, max: u32 },
    #[error("shape has unbounded volume")]
    UnboundedVolume,
    #[error("shape has zero volume")]
    ZeroVolume,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no exact evaluation of {measure} on {shape} and no empirical fallback configured")]
    UnsupportedPair { measure: String, shape: String },
    #[error("degenerate support: rejection acceptance rate {0:.2e} is below 1e-3")]
    DegenerateSupport(f64),
    #[error("frequency norm {norm} exceeds the cutoff {cutoff}")]
    CutoffExceeded { norm: f64, cutoff: f64 },
    #[error("partition points are unavailable for {0}; supported: Lebesgue on square, disk, convex polygon or Koch region, Koch curve, circle, sphere")]
    UnsupportedPartition(String),
    #[error("translation box too small: {0}")]
    BoxTooSmall(String),
    #[error("point {index} at distance {norm} lies outside B(0, {radius})")]
    PointOutsideSupport { index: usize, norm: f64, radius: f64 },
    #[error("band edge {requested} exceeds the grid Nyquist frequency {nyquist}")]
    Nyquist { requested: f64, nyquist: f64 },
    #[error("kernel certification failed: {0}")]
    KernelCertification(String),
    #[error("grid resolution insufficient: relative gap {gap:.4} exceeds 0.10, refine the grid")]
    InsufficientResolution { gap: f64 },
    #[error("no Fourier transform available for {0}")]
    MissingFourier(String),
    #[error("config file not found: {}", .0.display())]
    MissingConfig(PathBuf),
    #[error("experiment failed at N = {n} during {stage}: {source}")]
    Stage {
        n: usize,
        stage: String,
        #[source]
        source: Box<LabError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidArgument(msg.into()))
}
