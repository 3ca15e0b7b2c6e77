use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid-domain: {0}")]
    InvalidDomain(String),
    #[error("invalid-params: {0}")]
    InvalidParams(String),
    #[error("no-convergence: {0}")]
    NoConvergence(String),
    #[error("cutoff-too-small: no state below e_max = {0}")]
    CutoffTooSmall(f64),
    #[error("blowup-guard: about {estimate:.3e} states exceed the limit {limit:.0e}")]
    BlowupGuard { estimate: f64, limit: f64 },
    #[error("missing-zero: table has no entry at Q = 0")]
    MissingZero,
    #[error("incomplete-support: {0}")]
    IncompleteSupport(String),
    #[error("phi-not-psd: minimum eigenvalue {min_eigenvalue:.3e} below -{tolerance:.3e}")]
    PhiNotPsd { min_eigenvalue: f64, tolerance: f64 },
    #[error("off-lattice-velocity: m v / hbar = {0:?} is not on the dual lattice")]
    OffLatticeVelocity(Vec<f64>),
    #[error("negative-kernel: Re f = {value:.3e} at sample {index}")]
    NegativeKernel { index: usize, value: f64 },
    #[error("phase-wrap: phase step {step:.6} between samples {index} and {next} is too close to pi", next = .index + 1)]
    PhaseWrap { index: usize, step: f64 },
    #[error("zero-amplitude: wavefunction vanishes at sample {0}")]
    ZeroAmplitude(usize),
    #[error("schedule-not-monotone: {0}")]
    ScheduleNotMonotone(String),
    #[error("window-not-closed: {0}")]
    WindowNotClosed(String),
    #[error("format: {0}")]
    Format(String),
}
