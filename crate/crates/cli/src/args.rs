use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use spider_bm::spider::LegLength;
use spider_bm::SpiderPoint;

/// A point given as `leg:x`, or `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArg(pub SpiderPoint);

impl FromStr for PointArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("origin") || s == "0" {
            return Ok(PointArg(SpiderPoint::origin()));
        }
        s.parse::<SpiderPoint>().map(PointArg).map_err(|e| e.to_string())
    }
}

impl fmt::Display for PointArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_origin() {
            f.write_str("origin")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for PointArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PointArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Leg lengths given as `1,2,inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lengths(pub Vec<LegLength>);

impl FromStr for Lengths {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',') {
            let l: LegLength = part.parse().map_err(|e: spider_bm::Error| e.to_string())?;
            if let LegLength::Finite(v) = l {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(format!("leg length must be > 0, got `{}`", part.trim()));
                }
            }
            out.push(l);
        }
        Ok(Lengths(out))
    }
}

impl Lengths {
    /// The lengths as numbers when every leg is finite.
    pub fn finite(&self) -> Option<Vec<f64>> {
        self.0.iter().map(|l| l.finite()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `name=value`, overriding a numerical tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct TolOverride {
    pub name: String,
    pub value: f64,
}

impl FromStr for TolOverride {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, value) = s.split_once('=').ok_or_else(|| format!("expected `name=value`, got `{s}`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse `{}` as a number", value.trim()))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance `{}` must be finite and > 0", name.trim()));
        }
        Ok(TolOverride {
            name: name.trim().to_string(),
            value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_lengths_parse() {
        assert!(PointArg::from_str("origin").unwrap().0.is_origin());
        let p = PointArg::from_str("2:0.75").unwrap();
        assert_eq!((p.0.leg(), p.0.x()), (2, 0.75));
        assert_eq!(PointArg::from_str(&p.to_string()).unwrap(), p);
        assert!(PointArg::from_str("2").is_err());
        let l = Lengths::from_str("1, 2,inf").unwrap();
        assert_eq!(l.0, vec![LegLength::Finite(1.0), LegLength::Finite(2.0), LegLength::Infinite]);
        assert!(l.finite().is_none());
        assert!(Lengths::from_str("1,,2").is_err());
        assert!(Lengths::from_str("1,-2").is_err());
        assert!(Lengths::from_str("1,x").is_err());
    }

    #[test]
    fn tolerance_overrides_parse() {
        let t = TolOverride::from_str("quad=1e-9").unwrap();
        assert_eq!((t.name.as_str(), t.value), ("quad", 1e-9));
        assert!(TolOverride::from_str("quad").is_err());
        assert!(TolOverride::from_str("quad=-1").is_err());
    }
}
