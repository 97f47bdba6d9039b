use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open box `⨉_ℓ (lower_ℓ, upper_ℓ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfOpenBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl HalfOpenBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::InvalidArgument("query box bounds must have equal, positive length".into()));
        }
        if self.lower.iter().zip(&self.upper).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument(format!(
                "query box needs lower < upper, got {:?} and {:?}",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (a, b))| a < x && x <= b)
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    fn intersects(&self, other: &HalfOpenBox) -> bool {
        (0..self.dim()).all(|l| self.lower[l].max(other.lower[l]) < self.upper[l].min(other.upper[l]))
    }

    /// `self ∖ other` as disjoint half-open boxes.
    fn subtract(&self, other: &HalfOpenBox) -> Vec<HalfOpenBox> {
        if !self.intersects(other) {
            return vec![self.clone()];
        }
        let mut pieces = Vec::new();
        let mut rest = self.clone();
        for l in 0..self.dim() {
            if rest.lower[l] < other.lower[l] {
                let mut below = rest.clone();
                below.upper[l] = other.lower[l];
                pieces.push(below);
                rest.lower[l] = other.lower[l];
            }
            if other.upper[l] < rest.upper[l] {
                let mut above = rest.clone();
                above.lower[l] = other.upper[l];
                pieces.push(above);
                rest.upper[l] = other.upper[l];
            }
        }
        pieces
    }
}

/// Finite union of half-open boxes, kept pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuery", into = "RawQuery")]
pub struct RegionQuery {
    boxes: Vec<HalfOpenBox>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery {
    boxes: Vec<HalfOpenBox>,
}

impl TryFrom<RawQuery> for RegionQuery {
    type Error = Error;

    fn try_from(raw: RawQuery) -> Result<Self> {
        RegionQuery::new(raw.boxes)
    }
}

impl From<RegionQuery> for RawQuery {
    fn from(q: RegionQuery) -> Self {
        RawQuery { boxes: q.boxes }
    }
}

impl RegionQuery {
    /// Normalises `boxes` into a disjoint union covering the same set.
    pub fn new(boxes: Vec<HalfOpenBox>) -> Result<Self> {
        let mut out: Vec<HalfOpenBox> = Vec::new();
        for b in boxes {
            b.validate()?;
            if let Some(first) = out.first() {
                if first.dim() != b.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: first.dim(),
                        got: b.dim(),
                    });
                }
            }
            let mut pieces = vec![b];
            for kept in &out {
                pieces = pieces.iter().flat_map(|p| p.subtract(kept)).collect();
            }
            out.extend(pieces);
        }
        Ok(Self { boxes: out })
    }

    pub fn single(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(vec![HalfOpenBox::new(lower, upper)?])
    }

    /// The whole space; counts every point.
    pub fn everything(dim: usize) -> Self {
        Self {
            boxes: vec![HalfOpenBox {
                lower: vec![f64::NEG_INFINITY; dim],
                upper: vec![f64::INFINITY; dim],
            }],
        }
    }

    pub fn empty() -> Self {
        Self { boxes: Vec::new() }
    }

    pub fn boxes(&self) -> &[HalfOpenBox] {
        &self.boxes
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(p))
    }

    pub fn volume(&self) -> f64 {
        self.boxes.iter().map(HalfOpenBox::volume).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_open_membership() {
        let q = RegionQuery::single(vec![0.0, 0.0], vec![0.5, 0.5]).unwrap();
        assert!(q.contains(&[0.5, 0.5]));
        assert!(!q.contains(&[0.0, 0.2]));
        assert!(q.contains(&[1e-12, 0.2]));
        assert!(!RegionQuery::empty().contains(&[0.1, 0.1]));
        assert!(RegionQuery::everything(2).contains(&[1e9, -1e9]));
    }

    #[test]
    fn overlapping_boxes_are_made_disjoint() {
        let q = RegionQuery::new(vec![
            HalfOpenBox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap(),
            HalfOpenBox::new(vec![1.0, 1.0], vec![3.0, 3.0]).unwrap(),
            HalfOpenBox::new(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap(),
        ])
        .unwrap();
        assert!((q.volume() - 7.0).abs() < 1e-12);
        for (i, a) in q.boxes().iter().enumerate() {
            for b in &q.boxes()[i + 1..] {
                assert!(!a.intersects(b));
            }
        }
        for p in [[0.1, 0.1], [2.5, 2.5], [1.2, 1.2], [2.0, 0.5]] {
            assert_eq!(q.boxes().iter().filter(|b| b.contains(&p)).count(), 1, "{p:?}");
        }
    }

    #[test]
    fn rejects_degenerate_and_unknown_keys() {
        assert!(HalfOpenBox::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        let ok: RegionQuery = serde_json::from_str(r#"{"boxes":[{"lower":[0,0],"upper":[1,1]}]}"#).unwrap();
        assert_eq!(ok.boxes().len(), 1);
        assert!(serde_json::from_str::<RegionQuery>(r#"{"boxes":[],"extra":1}"#).is_err());
        assert!(serde_json::from_str::<RegionQuery>(r#"{"boxes":[{"lower":[1],"upper":[0]}]}"#).is_err());
    }
}
