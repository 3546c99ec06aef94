use std::fmt;

use thiserror::Error;

/// A single failed validation rule, tagged with the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.field, self.message)
    }
}

/// Every violation found while validating one object. Never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl Violations {
    pub fn single(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self(vec![Violation::new(field, message)])
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.0.iter().any(|v| v.field == field)
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} is outside the admissible domain")]
    Domain { what: &'static str, value: f64 },

    #[error("validation failed: {0}")]
    Validation(Violations),

    #[error("time {s} is outside the covered interval [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },

    #[error("non-monotone time stamp {t}; last stored stamp is {last}")]
    Ordering { t: f64, last: f64 },

    #[error("numeric failure at t = {t}: {detail}")]
    Numeric { t: f64, detail: String },

    #[error("quadrature did not converge (residual estimate {residual:e})")]
    Quadrature { residual: f64 },

    #[error(
        "uniform bound violated at t = {t}: max |x_i| = {norm} exceeds R = {bound} (step size too large?)"
    )]
    IntegratorAccuracy { t: f64, norm: f64, bound: f64 },

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("instance of size {size} exceeds the cap {cap}; use the 1-D path or subsample")]
    Size { size: usize, cap: usize },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation(Violations::single(field, message))
    }

    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Validation(_) | Error::Unsupported(_) | Error::Size { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Collects violations and turns them into one error at the end.
#[derive(Default)]
pub(crate) struct Checker {
    found: Vec<Violation>,
}

impl Checker {
    pub fn check(&mut self, ok: bool, field: &str, message: impl FnOnce() -> String) {
        if !ok {
            self.found.push(Violation::new(field, message()));
        }
    }

    pub fn push(&mut self, field: &str, message: impl Into<String>) {
        self.found.push(Violation::new(field, message));
    }

    pub fn extend(&mut self, violations: impl IntoIterator<Item = Violation>) {
        self.found.extend(violations);
    }

    pub fn absorb(&mut self, prefix: &str, err: Error) {
        match err {
            Error::Validation(Violations(list)) => {
                for v in list {
                    let field = if prefix.is_empty() {
                        v.field
                    } else {
                        format!("{prefix}.{}", v.field)
                    };
                    self.found.push(Violation::new(field, v.message));
                }
            }
            other => self.found.push(Violation::new(prefix, other.to_string())),
        }
    }

    pub fn finish(self) -> Result<()> {
        if self.found.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(Violations(self.found)))
        }
    }
}
