use thiserror::Error;

/// Errors produced by tree construction, packing, execution and the model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid uniform tree shape: {0}")]
    UniformTreeShape(String),

    #[error("invalid tree input: {0}")]
    InvalidInput(String),

    #[error("pattern table requires t to be an even power of two, got t={0}")]
    PatternTableShape(usize),

    #[error("pair record {pair} is {bytes} bytes, exceeding the per-batch cap of {cap} bytes; records must not straddle batches")]
    OversizedRecord { pair: usize, bytes: u64, cap: u64 },

    #[error("coincident interacting particles with zero softening are singular")]
    CoincidentParticles,

    #[error("kernel kind does not match the packed buffers: {0}")]
    KernelMismatch(String),

    #[error("record {record} touched address {addr:#x} outside its record interval and output slots")]
    SelfContainment { record: usize, addr: u64 },

    #[error("partial-result slot for record {0} has no target mapping")]
    UnmappedSlot(usize),

    #[error("invalid cache configuration: {0}")]
    InvalidCacheConfig(String),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("share must lie in [0, 1], got {0}")]
    ShareOutOfRange(f64),

    #[error("component shares sum to {0}, not 1 (tolerance 1e-6)")]
    ShareSumMismatch(f64),

    #[error("unknown share component {0:?} for this profile")]
    UnknownComponent(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("trend metrics need equal-length series of at least 2 points")]
    TrendInputLength,

    #[error("zero-variance input makes correlation undefined")]
    ZeroVariance,

    #[error("particle csv: {0}")]
    ParticleCsv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
