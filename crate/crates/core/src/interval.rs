use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]`. Serialized as a two-element JSON array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Containment with an absolute slack on both ends.
    pub fn contains_within(&self, x: f64, slack: f64) -> bool {
        self.lo - slack <= x && x <= self.hi + slack
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_and_emptiness() {
        let a = Interval::new(10.0, 30.0);
        let b = Interval::new(10.0, 20.0);
        assert_eq!(a.intersect(&b), Interval::new(10.0, 20.0));
        assert!(Interval::new(35.0, 40.0).intersect(&b).is_empty());
        assert!(Interval::new(f64::NAN, 1.0).is_empty());
    }

    #[test]
    fn serializes_as_pair() {
        let json = serde_json::to_string(&Interval::new(0.0, 65.0)).unwrap();
        assert_eq!(json, "[0.0,65.0]");
        let back: Interval = serde_json::from_str("[1, 2.5]").unwrap();
        assert_eq!(back, Interval::new(1.0, 2.5));
    }
}
