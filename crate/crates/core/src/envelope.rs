//! Lower convex envelopes of memory-load points.

use crate::{Error, Result, Scalar};

/// Piecewise-linear curve through `(memory, load)` corners with strictly
/// increasing memory.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseCurve<T> {
    corners: Vec<(T, T)>,
}

impl<T: Scalar> PiecewiseCurve<T> {
    pub fn corners(&self) -> &[(T, T)] {
        &self.corners
    }

    pub fn domain(&self) -> (&T, &T) {
        (&self.corners[0].0, &self.corners[self.corners.len() - 1].0)
    }

    /// Linear interpolation between neighbouring corners; `None` outside the domain.
    pub fn evaluate(&self, memory: &T) -> Option<T> {
        let (lo, hi) = self.domain();
        if memory < lo || memory > hi {
            return None;
        }
        for w in self.corners.windows(2) {
            let ((m0, l0), (m1, l1)) = (&w[0], &w[1]);
            if memory <= m1 {
                let frac = (memory.clone() - m0.clone()) / (m1.clone() - m0.clone());
                return Some(l0.clone() + (l1.clone() - l0.clone()) * frac);
            }
        }
        Some(self.corners[0].1.clone())
    }

    pub fn slopes(&self) -> Vec<T> {
        self.corners
            .windows(2)
            .map(|w| (w[1].1.clone() - w[0].1.clone()) / (w[1].0.clone() - w[0].0.clone()))
            .collect()
    }

    pub fn is_convex(&self) -> bool {
        self.slopes().windows(2).all(|s| s[0] <= s[1])
    }
}

/// Lower convex envelope of `points`.
///
/// Points strictly above the envelope are dropped; points lying on a hull
/// segment are kept as corners.
pub fn lower_convex_envelope<T: Scalar>(points: &[(T, T)]) -> Result<PiecewiseCurve<T>> {
    if points.is_empty() {
        return Err(Error::arg("lower convex envelope of an empty point set"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable memory values"));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::arg("memory values must be distinct"));
    }
    let mut hull: Vec<(T, T)> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            // pop b when it lies strictly above segment a-p
            let cross = (b.0.clone() - a.0.clone()) * (p.1.clone() - a.1.clone())
                - (b.1.clone() - a.1.clone()) * (p.0.clone() - a.0.clone());
            if cross < T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(PiecewiseCurve { corners: hull })
}
