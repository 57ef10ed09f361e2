use dflow_core::Error;
use serde_json::json;

/// A failed run, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or input files (exit 1).
    Usage(String),
    /// A solver or a verification check failed (exit 2).
    Numerical(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Failure::Numerical(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Numerical(_) => "numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }

    /// One-line JSON for stderr.
    pub fn report(&self) -> String {
        json!({"error": {"kind": self.kind(), "message": self.message()}}).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse(_)
            | Error::Precondition(_)
            | Error::Unsupported(_)
            | Error::DerivativeOrderExhausted { .. }
            | Error::ExpansionTooLarge { .. }
            | Error::ComplexSupport
            | Error::MassMismatch(..)
            | Error::Io(_)
            | Error::Json(_) => Failure::Usage(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(Failure::from(Error::Parse("x".into())).exit_code(), 1);
        assert_eq!(Failure::from(Error::DerivativeOrderExhausted { k: 3, degree: 2 }).exit_code(), 1);
        let shock = Error::Shock {
            z: Complex64::new(0.0, 0.0),
            t: 0.5,
            last: Complex64::new(1.0, 0.0),
        };
        assert_eq!(Failure::from(shock).exit_code(), 2);
    }

    #[test]
    fn report_is_json() {
        let v: serde_json::Value = serde_json::from_str(&Failure::numerical("boom").report()).unwrap();
        assert_eq!(v["error"]["kind"], "numerical");
        assert_eq!(v["error"]["message"], "boom");
    }
}
