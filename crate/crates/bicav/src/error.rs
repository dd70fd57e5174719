//! Library-wide error type.

use thiserror::Error;

/// Failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input is outside the domain of the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameter combination is rejected by the model rather than invalid
    /// per se (e.g. unequal cavity decay rates).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// No real, non-negative solution exists for the requested quantity.
    #[error("no physical solution: {0}")]
    NoSolution(String),

    /// The trajectory norm exceeded the divergence bound.
    #[error("trajectory diverged at t = {t:.6e} s (state norm {norm:.3e}); last state {last:?}")]
    Diverged { t: f64, norm: f64, last: [f64; 6] },

    /// The adaptive integrator could not take a step above the floor size:
    /// the fast/slow rate separation is too stiff for the explicit method at
    /// this tolerance.
    #[error(
        "step size underflow at t = {t:.6e} s: rate separation too stiff for the explicit \
             integrator; reduce the separation or relax the tolerance"
    )]
    StepUnderflow { t: f64 },

    /// The settling budget elapsed before the derivative norm dropped below
    /// the fixed-point threshold.
    #[error("no fixed point reached by t = {t:.6e} s (derivative norm {residual:.3e})")]
    NotSettled { t: f64, residual: f64 },

    /// The attempted-step safety budget ran out before reaching the target
    /// time.
    #[error("integration exceeded the step budget ({steps} attempts) at t = {t:.6e} s")]
    ExceededStepBudget { t: f64, steps: u64 },

    /// A failure inside one leg of a parameter sweep, annotated with the
    /// step at which it occurred.
    #[error("sweep step {index} (swept value {value:.6e}): {source}")]
    SweepStep {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    /// The response is flat over the scan, so a width at fixed drop from the
    /// maximum is meaningless.
    #[error("bandwidth undefined: {0}")]
    UndefinedBandwidth(String),

    /// The call itself is malformed (empty scan range, non-fixed-point input,
    /// inverted coupling pair, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Config-file parse or validation failure. The message names the
    /// offending key and, when known, its line.
    #[error("config: {0}")]
    Config(String),

    /// Filesystem failure while reading or writing run artifacts.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
