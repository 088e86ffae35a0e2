use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `ℓ_s` norm on `ℝ^d`, `s ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L(f64),
    Inf,
}

impl Norm {
    pub const EUCLIDEAN: Norm = Norm::L(2.0);

    pub fn new(s: f64) -> crate::Result<Self> {
        if s.is_infinite() && s > 0.0 {
            Ok(Norm::Inf)
        } else if s >= 1.0 {
            Ok(Norm::L(s))
        } else {
            Err(crate::Error::param("s", format!("norm exponent must lie in [1, ∞], got {s}")))
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            Norm::L(s) => s,
            Norm::Inf => f64::INFINITY,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(*self, Norm::L(s) if s == 2.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Norm::Inf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Norm::L(1.0) => x.iter().map(|v| v.abs()).sum(),
            Norm::L(2.0) => {
                if x.len() == 1 {
                    x[0].abs()
                } else {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt()
                }
            }
            Norm::L(s) => {
                if x.len() == 1 {
                    x[0].abs()
                } else {
                    x.iter().map(|v| v.abs().powf(s)).sum::<f64>().powf(1.0 / s)
                }
            }
        }
    }
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match *self {
            Norm::L(s) => ser.serialize_f64(s),
            Norm::Inf => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let s = match Raw::deserialize(de)? {
            Raw::Num(v) => v,
            Raw::Str(s) if s == "inf" || s == "infinity" => f64::INFINITY,
            Raw::Str(s) => return Err(serde::de::Error::custom(format!("bad norm exponent {s:?}"))),
        };
        Norm::new(s).map_err(serde::de::Error::custom)
    }
}
