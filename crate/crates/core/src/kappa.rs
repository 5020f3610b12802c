use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the cubic coupling: `+1` defocusing, `-1` focusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Kappa {
    Defocusing,
    Focusing,
}

impl Kappa {
    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Kappa::Defocusing),
            -1 => Ok(Kappa::Focusing),
            other => Err(Error::OutOfRange {
                what: "kappa",
                value: other as i64,
                allowed: "+1 or -1".into(),
            }),
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Kappa::Defocusing => 1,
            Kappa::Focusing => -1,
        }
    }

    pub fn value(self) -> f64 {
        self.sign() as f64
    }

    pub fn complex(self) -> Complex64 {
        Complex64::new(self.value(), 0.0)
    }

    /// Fixed square root: `1` for `+1`, `i` for `-1`.
    pub fn sqrt(self) -> Complex64 {
        match self {
            Kappa::Defocusing => Complex64::new(1.0, 0.0),
            Kappa::Focusing => Complex64::new(0.0, 1.0),
        }
    }
}

impl TryFrom<i32> for Kappa {
    type Error = Error;
    fn try_from(v: i32) -> Result<Self> {
        Kappa::from_sign(v)
    }
}

impl From<Kappa> for i32 {
    fn from(k: Kappa) -> i32 {
        k.sign()
    }
}

impl std::fmt::Display for Kappa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_to_kappa() {
        for k in [Kappa::Defocusing, Kappa::Focusing] {
            assert_eq!(k.sqrt() * k.sqrt(), k.complex());
        }
        assert!(Kappa::from_sign(0).is_err());
        let parsed: Kappa = serde_json::from_str("-1").unwrap();
        assert_eq!(parsed, Kappa::Focusing);
        assert!(serde_json::from_str::<Kappa>("2").is_err());
    }
}
