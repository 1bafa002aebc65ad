//! Fitted inequality constants over a function family.

use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};

/// Largest admissible ratio between the half-family constants.
pub const STABILITY_LIMIT: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    /// Maximum of numerator/denominator over the family.
    pub constant: f64,
    pub ratios: Vec<f64>,
    pub first_half: f64,
    pub second_half: f64,
    /// `max(first, second) / min(first, second)`.
    pub stability: f64,
}

impl RatioEstimate {
    pub fn from_ratios(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(HarnessError::EmptyFamily);
        }
        let max = |s: &[f64]| s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mid = ratios.len().div_ceil(2);
        let constant = max(&ratios);
        let first_half = max(&ratios[..mid]);
        let second_half = if mid < ratios.len() { max(&ratios[mid..]) } else { first_half };
        let stability = first_half.max(second_half) / first_half.min(second_half);
        Ok(Self { constant, ratios, first_half, second_half, stability })
    }

    pub fn finite(&self) -> bool {
        self.constant.is_finite() && self.constant >= 0.0
    }

    pub fn stable(&self) -> bool {
        self.stability.is_finite() && self.stability <= STABILITY_LIMIT
    }
}

/// Evaluates `numerator(i, f) / denominator(i, f)` over the family.
pub fn estimate_ratio<T, N, D>(family: &[T], numerator: N, denominator: D) -> Result<RatioEstimate>
where
    N: Fn(usize, &T) -> Result<f64>,
    D: Fn(usize, &T) -> Result<f64>,
{
    if family.is_empty() {
        return Err(HarnessError::EmptyFamily);
    }
    let ratios = family
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let d = denominator(i, f)?;
            if !(d > 0.0) || !d.is_finite() {
                return Err(HarnessError::DegenerateDenominator { index: i });
            }
            Ok(numerator(i, f)? / d)
        })
        .collect::<Result<Vec<_>>>()?;
    RatioEstimate::from_ratios(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halves_and_stability() {
        let fam = [1.0, 2.0, 3.0, 4.0];
        let r = estimate_ratio(&fam, |_, f| Ok(f * 2.0), |_, f| Ok(*f)).unwrap();
        assert_eq!(r.constant, 2.0);
        assert_eq!(r.stability, 1.0);
        let r = estimate_ratio(&fam, |i, _| Ok(if i == 3 { 3.0 } else { 1.0 }), |_, _| Ok(1.0)).unwrap();
        assert_eq!((r.first_half, r.second_half, r.constant), (1.0, 3.0, 3.0));
        assert!(!r.stable());
    }

    #[test]
    fn errors() {
        let empty: [f64; 0] = [];
        assert!(matches!(estimate_ratio(&empty, |_, _| Ok(1.0), |_, _| Ok(1.0)), Err(HarnessError::EmptyFamily)));
        let fam = [1.0, 0.0];
        assert!(matches!(
            estimate_ratio(&fam, |_, _| Ok(1.0), |_, f| Ok(*f)),
            Err(HarnessError::DegenerateDenominator { index: 1 })
        ));
    }
}
