use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// No cutoff up to `max_degree` brings the certified tail below `epsilon`.
    #[error(
        "no truncation degree <= {max_degree} certifies a tail below {epsilon:e} \
         (theta = {theta}, k = {k})"
    )]
    Truncation {
        theta: f64,
        k: u32,
        epsilon: f64,
        max_degree: usize,
    },

    #[error("need at least {required} samples, got {got}")]
    InsufficientSamples { got: usize, required: usize },
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < std::f64::consts::PI {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "theta",
            value: theta,
            domain: "(0, pi)",
        })
    }
}

pub(crate) fn check_angle(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=std::f64::consts::PI).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, pi]",
        })
    }
}
