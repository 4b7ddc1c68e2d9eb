use num_bigint::BigUint;

/// Failures shared by every operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// An exhaustive enumeration would exceed the configured cap.
    #[error("budget exceeded: {what} needs {attempted} steps (cap {cap})")]
    Budget {
        what: String,
        attempted: BigUint,
        cap: u128,
    },

    /// A caller-side precondition that guards soundness does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A randomized construction ran out of retries.
    #[error("construction of {what} failed after {attempts} attempts")]
    Construction { what: String, attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

/// Cap on exhaustive enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub cap: u128,
    pub unlimited: bool,
}

impl Budget {
    pub const DEFAULT_CAP: u128 = 10_000_000;

    pub fn new(cap: u128) -> Self {
        Budget {
            cap,
            unlimited: false,
        }
    }

    pub fn unlimited() -> Self {
        Budget {
            cap: Self::DEFAULT_CAP,
            unlimited: true,
        }
    }

    pub fn check(&self, what: &str, attempted: &BigUint) -> Result<()> {
        if self.unlimited || *attempted <= BigUint::from(self.cap) {
            Ok(())
        } else {
            Err(Error::Budget {
                what: what.to_string(),
                attempted: attempted.clone(),
                cap: self.cap,
            })
        }
    }

    /// Checks `base^exp` without materializing it when it is obviously huge.
    pub fn check_pow(&self, what: &str, base: usize, exp: usize) -> Result<()> {
        self.check(what, &num_traits::pow(BigUint::from(base), exp))
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_CAP)
    }
}
