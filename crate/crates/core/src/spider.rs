//! The spider graph: `N` legs glued at one vertex, points on it and its metric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Length of a leg. Infinite legs are half-lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LegLength {
    Finite(f64),
    Infinite,
}

impl LegLength {
    pub fn is_finite(self) -> bool {
        matches!(self, LegLength::Finite(_))
    }

    /// The length as `f64`, with `f64::INFINITY` for infinite legs.
    pub fn as_f64(self) -> f64 {
        match self {
            LegLength::Finite(l) => l,
            LegLength::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            LegLength::Finite(l) => Some(l),
            LegLength::Infinite => None,
        }
    }
}

impl fmt::Display for LegLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LegLength::Finite(l) => write!(f, "{l}"),
            LegLength::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for LegLength {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") || s == "∞" {
            return Ok(LegLength::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::arg("lengths", format!("cannot parse `{s}` as a length")))?;
        if v.is_infinite() && v > 0.0 {
            Ok(LegLength::Infinite)
        } else {
            Ok(LegLength::Finite(v))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LengthRepr {
    Number(f64),
    Text(String),
}

impl Serialize for LegLength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LegLength::Finite(l) => LengthRepr::Number(*l).serialize(s),
            LegLength::Infinite => LengthRepr::Text("inf".into()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for LegLength {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match LengthRepr::deserialize(d)? {
            LengthRepr::Number(v) => Ok(LegLength::Finite(v)),
            LengthRepr::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(LegLength::Infinite),
            LengthRepr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{t}\""
            ))),
        }
    }
}

/// JSON form of a graph: `{"n_legs": 3, "lengths": [1, 2, "inf"]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDescriptor {
    pub n_legs: usize,
    pub lengths: Vec<LegLength>,
}

/// A validated spider graph with `N >= 2` legs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDescriptor", into = "GraphDescriptor")]
pub struct SpiderGraph {
    lengths: Vec<LegLength>,
}

impl SpiderGraph {
    pub fn new(n_legs: usize, lengths: Vec<LegLength>) -> Result<Self> {
        if n_legs < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 legs, got {n_legs}")));
        }
        if lengths.len() != n_legs {
            return Err(Error::InvalidGraph(format!(
                "{n_legs} legs but {} lengths",
                lengths.len()
            )));
        }
        for (i, l) in lengths.iter().enumerate() {
            if let LegLength::Finite(v) = l {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::InvalidGraph(format!(
                        "leg {} has length {v}; lengths must be positive",
                        i + 1
                    )));
                }
            }
        }
        Ok(SpiderGraph { lengths })
    }

    /// All legs infinite.
    pub fn infinite(n_legs: usize) -> Result<Self> {
        Self::new(n_legs, vec![LegLength::Infinite; n_legs])
    }

    /// All legs of length `l`.
    pub fn uniform(n_legs: usize, l: f64) -> Result<Self> {
        Self::new(n_legs, vec![LegLength::Finite(l); n_legs])
    }

    pub fn from_finite(lengths: &[f64]) -> Result<Self> {
        Self::new(lengths.len(), lengths.iter().map(|&l| LegLength::Finite(l)).collect())
    }

    pub fn n_legs(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[LegLength] {
        &self.lengths
    }

    /// Length of a 1-based leg.
    pub fn length(&self, leg: usize) -> Result<LegLength> {
        self.check_leg(leg)?;
        Ok(self.lengths[leg - 1])
    }

    pub fn all_infinite(&self) -> bool {
        self.lengths.iter().all(|l| !l.is_finite())
    }

    pub fn all_finite(&self) -> bool {
        self.lengths.iter().all(|l| l.is_finite())
    }

    /// Finite lengths, or an error naming the first infinite leg.
    pub fn finite_lengths(&self) -> Result<Vec<f64>> {
        self.lengths
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.finite()
                    .ok_or_else(|| Error::InvalidGraph(format!("leg {} is infinite", i + 1)))
            })
            .collect()
    }

    fn check_leg(&self, leg: usize) -> Result<()> {
        if leg == 0 || leg > self.n_legs() {
            return Err(Error::arg(
                "leg",
                format!("must be in [1, {}], got {leg}", self.n_legs()),
            ));
        }
        Ok(())
    }

    /// Checks that `p` lies on this graph.
    pub fn contains(&self, p: &SpiderPoint) -> Result<()> {
        self.check_leg(p.leg)?;
        let l = self.lengths[p.leg - 1].as_f64();
        if p.x > l {
            return Err(Error::arg(
                "point",
                format!("x = {} exceeds the length {l} of leg {}", p.x, p.leg),
            ));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> GraphDescriptor {
        GraphDescriptor {
            n_legs: self.n_legs(),
            lengths: self.lengths.clone(),
        }
    }
}

impl TryFrom<GraphDescriptor> for SpiderGraph {
    type Error = Error;
    fn try_from(d: GraphDescriptor) -> Result<Self> {
        SpiderGraph::new(d.n_legs, d.lengths)
    }
}

impl From<SpiderGraph> for GraphDescriptor {
    fn from(g: SpiderGraph) -> Self {
        g.descriptor()
    }
}

/// A point `(leg, x)` with 1-based leg. Every point with `x = 0` is stored as
/// `(1, 0)`, so the derived equality identifies the origin across legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(usize, f64)", into = "(usize, f64)")]
pub struct SpiderPoint {
    leg: usize,
    x: f64,
}

impl SpiderPoint {
    pub fn new(leg: usize, x: f64) -> Result<Self> {
        if leg == 0 {
            return Err(Error::arg("leg", "legs are numbered from 1"));
        }
        if !(x >= 0.0) || x.is_nan() {
            return Err(Error::arg("x", format!("must be >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(Self::origin());
        }
        Ok(SpiderPoint { leg, x })
    }

    pub const fn origin() -> Self {
        SpiderPoint { leg: 1, x: 0.0 }
    }

    pub fn leg(&self) -> usize {
        self.leg
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn is_origin(&self) -> bool {
        self.x == 0.0
    }

    pub fn distance(&self, other: &SpiderPoint) -> f64 {
        distance(self, other)
    }
}

impl TryFrom<(usize, f64)> for SpiderPoint {
    type Error = Error;
    fn try_from((leg, x): (usize, f64)) -> Result<Self> {
        SpiderPoint::new(leg, x)
    }
}

impl From<SpiderPoint> for (usize, f64) {
    fn from(p: SpiderPoint) -> Self {
        (p.leg, p.x)
    }
}

impl fmt::Display for SpiderPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.leg, self.x)
    }
}

/// Parses `leg:x`, e.g. `2:0.75`.
impl FromStr for SpiderPoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (leg, x) = s
            .split_once(':')
            .ok_or_else(|| Error::arg("point", format!("expected `leg:x`, got `{s}`")))?;
        let leg = leg
            .trim()
            .parse()
            .map_err(|_| Error::arg("point", format!("bad leg in `{s}`")))?;
        let x = x
            .trim()
            .parse()
            .map_err(|_| Error::arg("point", format!("bad coordinate in `{s}`")))?;
        SpiderPoint::new(leg, x)
    }
}

/// Graph distance: `|x - y|` on a common leg, `x + y` across legs.
pub fn distance(p: &SpiderPoint, q: &SpiderPoint) -> f64 {
    if p.leg == q.leg || p.is_origin() || q.is_origin() {
        (p.x - q.x).abs()
    } else {
        p.x + q.x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(leg: usize, x: f64) -> SpiderPoint {
        SpiderPoint::new(leg, x).unwrap()
    }

    #[test]
    fn construction() {
        let g = SpiderGraph::infinite(3).unwrap();
        assert!(g.all_infinite());
        let g = SpiderGraph::new(
            3,
            vec![LegLength::Finite(1.0), LegLength::Finite(2.0), LegLength::Finite(2.0)],
        )
        .unwrap();
        assert_eq!(g.finite_lengths().unwrap(), vec![1.0, 2.0, 2.0]);
        assert!(SpiderGraph::infinite(1).is_err());
        assert!(SpiderGraph::new(3, vec![LegLength::Infinite; 2]).is_err());
        assert!(SpiderGraph::from_finite(&[1.0, 0.0]).is_err());
        assert!(SpiderGraph::from_finite(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn two_legs_are_the_real_line() {
        let g = SpiderGraph::infinite(2).unwrap();
        assert_eq!(g.n_legs(), 2);
        // x on leg 1 at -x, y on leg 2 at +y
        for (x, y) in [(0.3, 1.2), (2.0, 0.5)] {
            assert_eq!(distance(&pt(1, x), &pt(2, y)), (-x - y).abs());
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&pt(1, 1.5), &pt(1, 0.5)), 1.0);
        assert_eq!(distance(&pt(1, 1.0), &pt(2, 2.0)), 3.0);
        assert_eq!(distance(&pt(2, 0.0), &pt(3, 0.7)), 0.7);
    }

    #[test]
    fn origin_is_identified() {
        assert_eq!(pt(3, 0.0), SpiderPoint::origin());
        assert_eq!(pt(3, 0.0).leg(), 1);
        assert!(SpiderPoint::new(0, 1.0).is_err());
        assert!(SpiderPoint::new(1, -0.1).is_err());
        assert!(SpiderPoint::new(1, f64::NAN).is_err());
    }

    #[test]
    fn containment() {
        let g = SpiderGraph::from_finite(&[1.0, 2.0]).unwrap();
        assert!(g.contains(&pt(2, 1.5)).is_ok());
        assert!(g.contains(&pt(1, 1.5)).is_err());
        assert!(g.contains(&pt(3, 0.5)).is_err());
    }

    #[test]
    fn json_descriptor_round_trip() {
        let g: SpiderGraph =
            serde_json::from_str(r#"{"n_legs": 3, "lengths": [1, 2.5, "inf"]}"#).unwrap();
        assert_eq!(g.length(3).unwrap(), LegLength::Infinite);
        assert_eq!(g.length(2).unwrap(), LegLength::Finite(2.5));
        let back: SpiderGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<SpiderGraph>(r#"{"n_legs": 1, "lengths": ["inf"]}"#).is_err());
        assert!(serde_json::from_str::<SpiderGraph>(
            r#"{"n_legs": 2, "lengths": [1, 1], "extra": 0}"#
        )
        .is_err());
    }

    #[test]
    fn parse_points_and_lengths() {
        assert_eq!("2:0.75".parse::<SpiderPoint>().unwrap(), pt(2, 0.75));
        assert!("2".parse::<SpiderPoint>().is_err());
        assert_eq!("inf".parse::<LegLength>().unwrap(), LegLength::Infinite);
        assert_eq!("1.5".parse::<LegLength>().unwrap(), LegLength::Finite(1.5));
    }

    fn point() -> impl Strategy<Value = SpiderPoint> {
        (1usize..=5, prop_oneof![Just(0.0), 0.0f64..10.0]).prop_map(|(l, x)| pt(l, x))
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(p in point(), q in point(), r in point()) {
            let d = distance(&p, &q);
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, distance(&q, &p));
            prop_assert_eq!(d == 0.0, p == q);
            prop_assert!(distance(&p, &r) <= d + distance(&q, &r) + 1e-12);
        }

        #[test]
        fn distance_to_origin_is_coordinate(p in point()) {
            prop_assert_eq!(distance(&p, &SpiderPoint::origin()), p.x());
        }
    }
}
