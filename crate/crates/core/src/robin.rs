//! Robin boundary parameters, with Dirichlet as a distinct value rather than
//! a large finite coefficient.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, RfkError};

/// Boundary parameter `h` in `du/dnu + h u = 0`; `Dirichlet` stands for `h = +inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobinParam {
    Finite(f64),
    Dirichlet,
}

impl RobinParam {
    pub const NEUMANN: RobinParam = RobinParam::Finite(0.0);

    pub fn new(h: f64) -> Result<Self> {
        if h == f64::INFINITY {
            Ok(RobinParam::Dirichlet)
        } else if h.is_finite() {
            Ok(RobinParam::Finite(h))
        } else {
            Err(RfkError::Config(format!("Robin parameter must be finite or +inf, got {h}")))
        }
    }

    pub fn is_dirichlet(self) -> bool {
        matches!(self, RobinParam::Dirichlet)
    }

    pub fn is_neumann(self) -> bool {
        matches!(self, RobinParam::Finite(h) if h == 0.0)
    }

    /// Finite coefficient, `None` for Dirichlet.
    pub fn finite(self) -> Option<f64> {
        match self {
            RobinParam::Finite(h) => Some(h),
            RobinParam::Dirichlet => None,
        }
    }

    /// -1, 0 or +1; Dirichlet counts as positive.
    pub fn sign(self) -> i8 {
        match self {
            RobinParam::Dirichlet => 1,
            RobinParam::Finite(h) if h > 0.0 => 1,
            RobinParam::Finite(h) if h < 0.0 => -1,
            RobinParam::Finite(_) => 0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            RobinParam::Finite(h) => h,
            RobinParam::Dirichlet => f64::INFINITY,
        }
    }

    /// `h -> h / c`, the parameter seen after scaling lengths by `c`.
    pub fn scaled_by_length(self, c: f64) -> Self {
        match self {
            RobinParam::Finite(h) => RobinParam::Finite(h / c),
            RobinParam::Dirichlet => RobinParam::Dirichlet,
        }
    }
}

impl fmt::Display for RobinParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobinParam::Finite(h) => write!(f, "{h}"),
            RobinParam::Dirichlet => f.write_str("inf"),
        }
    }
}

impl FromStr for RobinParam {
    type Err = RfkError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "inf" | "+inf" | "Inf" | "dirichlet" | "D" => Ok(RobinParam::Dirichlet),
            _ => {
                let h: f64 = t
                    .parse()
                    .map_err(|_| RfkError::Config(format!("cannot parse Robin parameter '{s}'")))?;
                RobinParam::new(h)
            }
        }
    }
}

impl Serialize for RobinParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for RobinParam {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(h) => RobinParam::new(h).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// The pair `(h_in, h_out)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinPair {
    pub h_in: RobinParam,
    pub h_out: RobinParam,
}

impl RobinPair {
    pub fn new(h_in: RobinParam, h_out: RobinParam) -> Self {
        Self { h_in, h_out }
    }

    pub fn from_f64(h_in: f64, h_out: f64) -> Result<Self> {
        Ok(Self::new(RobinParam::new(h_in)?, RobinParam::new(h_out)?))
    }

    pub fn is_pure_neumann(&self) -> bool {
        self.h_in.is_neumann() && self.h_out.is_neumann()
    }

    /// Sign of `h_in * h_out` with Dirichlet treated as `+inf`.
    pub fn product_sign(&self) -> i8 {
        self.h_in.sign() * self.h_out.sign()
    }

    /// `h_in * h_out >= 0`, the regime covered by the comparison theorems.
    pub fn is_admissible(&self) -> bool {
        self.product_sign() >= 0
    }

    pub fn check_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(RfkError::UnsupportedRegime {
                h_in: self.h_in.to_string(),
                h_out: self.h_out.to_string(),
            })
        }
    }

    /// Largest finite |h|, 0 when both are Dirichlet.
    pub fn max_finite_abs(&self) -> f64 {
        [self.h_in, self.h_out]
            .iter()
            .filter_map(|h| h.finite())
            .fold(0.0, |m, h| m.max(h.abs()))
    }
}

impl fmt::Display for RobinPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.h_in, self.h_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inf_token() {
        assert_eq!("inf".parse::<RobinParam>().unwrap(), RobinParam::Dirichlet);
        assert_eq!("-1.5".parse::<RobinParam>().unwrap(), RobinParam::Finite(-1.5));
        assert!("-inf".parse::<RobinParam>().is_err());
        assert!("nan".parse::<RobinParam>().is_err());
        assert_eq!(RobinParam::Dirichlet.to_string(), "inf");
    }

    #[test]
    fn admissibility() {
        let p = |a: f64, b: f64| RobinPair::from_f64(a, b).unwrap();
        assert!(p(1.0, f64::INFINITY).is_admissible());
        assert!(p(0.0, -1.0).is_admissible());
        assert!(p(-1.0, -2.0).is_admissible());
        assert!(!p(-1.0, 1.0).is_admissible());
        assert!(!p(-1.0, f64::INFINITY).is_admissible());
        assert!(p(-1.0, f64::INFINITY).check_admissible().is_err());
    }

    #[test]
    fn toml_roundtrip_inf() {
        #[derive(Deserialize)]
        struct W {
            h: Vec<RobinParam>,
        }
        let w: W = toml::from_str("h = [inf, -1.0, 0.5, \"inf\"]").unwrap();
        assert_eq!(
            w.h,
            vec![
                RobinParam::Dirichlet,
                RobinParam::Finite(-1.0),
                RobinParam::Finite(0.5),
                RobinParam::Dirichlet
            ]
        );
    }
}
