//! Even, piecewise-constant weight functions parameterized by a vector of
//! `2s - 3` reals: `s - 1` breakpoints followed by `s - 2` weights.
//!
//! The weight on `[0, v_1)` is fixed to 1 and the weight beyond the last
//! breakpoint is 0.

use crate::error::{FilterError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    s: usize,
    v: Vec<f64>,
    gap: f64,
}

/// One constant piece `[start, end)` of a weight function on `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub weight: f64,
}

/// A piecewise-constant weight on `[0, inf)`, zero beyond the last segment.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub segments: Vec<Segment>,
}

impl WeightProfile {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    /// Multiplies every weight by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment { weight: s.weight * c, ..*s })
                .collect(),
        }
    }

    pub fn weight_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.segments
            .iter()
            .find(|s| ax >= s.start && ax < s.end)
            .map_or(0.0, |s| s.weight)
    }
}

impl WeightVector {
    pub fn new(s: usize, v: Vec<f64>, gap: f64) -> Result<Self> {
        if s < 2 {
            return Err(FilterError::UnsupportedIntervals(s));
        }
        if v.len() != 2 * s - 3 {
            return Err(FilterError::LengthMismatch { expected: 2 * s - 3, actual: v.len() });
        }
        if !(gap > 0.0 && gap < 1.0) {
            return Err(FilterError::InvalidGap(gap));
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(FilterError::OrderingViolation(format!("component {} is not finite", i + 1)));
        }
        let bp = &v[..s - 1];
        if !(gap <= bp[0] && bp[0] < 1.0) {
            return Err(FilterError::OrderingViolation(format!(
                "v1 = {} must lie in [G, 1) with G = {gap}",
                bp[0]
            )));
        }
        if s >= 3 && !(bp[1] > 1.0) {
            return Err(FilterError::OrderingViolation(format!("v2 = {} must exceed 1", bp[1])));
        }
        for j in 1..bp.len().saturating_sub(1) {
            if !(bp[j] < bp[j + 1]) {
                return Err(FilterError::OrderingViolation(format!(
                    "breakpoints must increase: v{} = {} >= v{} = {}",
                    j + 1,
                    bp[j],
                    j + 2,
                    bp[j + 1]
                )));
            }
        }
        if let Some(i) = v[s - 1..].iter().position(|w| *w < 0.0) {
            return Err(FilterError::OrderingViolation(format!(
                "weight v{} = {} is negative",
                s + i,
                v[s - 1 + i]
            )));
        }
        Ok(Self { s, v, gap })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.v[..self.s - 1]
    }

    pub fn weights(&self) -> &[f64] {
        &self.v[self.s - 1..]
    }

    pub fn weight_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        let bp = self.breakpoints();
        if ax < bp[0] {
            return 1.0;
        }
        // Right-continuous: ax == bp[j] belongs to [bp[j], bp[j+1]).
        match bp.iter().rposition(|&b| b <= ax) {
            Some(j) if j + 1 < bp.len() => self.weights()[j],
            _ => 0.0,
        }
    }

    pub fn profile(&self) -> WeightProfile {
        let bp = self.breakpoints();
        let mut segments = vec![Segment { start: 0.0, end: bp[0], weight: 1.0 }];
        for (j, w) in self.weights().iter().enumerate() {
            segments.push(Segment { start: bp[j], end: bp[j + 1], weight: *w });
        }
        WeightProfile { segments }
    }

    /// Same values validated against a different gap.
    pub fn with_gap(&self, gap: f64) -> Result<Self> {
        Self::new(self.s, self.v.clone(), gap)
    }
}

/// Takes absolute values of every component, then checks membership.
/// Breakpoint-ordering violations are reported, not repaired.
pub fn repair_into_vs(raw: &[f64], s: usize, gap: f64) -> Result<WeightVector> {
    WeightVector::new(s, raw.iter().map(|x| x.abs()).collect(), gap)
}

/// `(sqrt G, 1/sqrt G, 1.4, 5, 0.01, 10, 20)` for `s = 5`.
///
/// Other `s >= 2` keep the two gap-derived breakpoints, place the remaining
/// `s - 3` breakpoints geometrically between 1.4 and `5 (s - 4)` (a single one
/// at 5 when `s = 4`) and take the first `s - 2` weights of `0.01, 10, 20, 20, ...`.
pub fn initial_weight_vector(s: usize, gap: f64) -> Result<WeightVector> {
    if s < 2 {
        return Err(FilterError::UnsupportedIntervals(s));
    }
    if !(gap > 0.0 && gap < 1.0) {
        return Err(FilterError::InvalidGap(gap));
    }
    let mut v = vec![gap.sqrt()];
    if s >= 3 {
        v.push(1.0 / gap.sqrt());
    }
    if s >= 4 {
        let k = s - 3;
        if k == 1 {
            v.push(5.0);
        } else {
            let (lo, hi) = (1.4_f64, 5.0 * (s - 4) as f64);
            let ratio = (hi / lo).powf(1.0 / (k - 1) as f64);
            for j in 0..k {
                v.push(if j + 1 == k { hi } else { lo * ratio.powi(j as i32) });
            }
        }
    }
    for j in 0..s - 2 {
        v.push(match j {
            0 => 0.01,
            1 => 10.0,
            _ => 20.0,
        });
    }
    WeightVector::new(s, v, gap)
}
