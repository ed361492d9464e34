use alloc::vec::Vec;
use core::ops::Index;

use crate::{Error, Result};

/// A point in state space. Always non-empty; finite when built through
/// [`StateVec::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec(Vec<f64>);

impl StateVec {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyState);
        }
        if !components.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFiniteState);
        }
        Ok(Self(components))
    }

    pub fn from_slice(components: &[f64]) -> Result<Self> {
        Self::new(components.to_vec())
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(alloc::vec![value])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(alloc::vec![0.0; dim])
    }

    /// Wraps raw components without the finiteness check. Callers are the
    /// propagators, which check finiteness themselves and report where it
    /// was lost.
    pub(crate) fn from_raw(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Max norm without the finiteness check.
    pub fn norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc: f64, c| acc.max(libm::fabs(*c)))
    }

    /// `self + scale * other`.
    pub(crate) fn add_scaled(&self, scale: f64, other: &StateVec) -> StateVec {
        debug_assert_eq!(self.dim(), other.dim());
        StateVec(self.0.iter().zip(&other.0).map(|(a, b)| a + scale * b).collect())
    }

    pub(crate) fn sub(&self, other: &StateVec) -> StateVec {
        debug_assert_eq!(self.dim(), other.dim());
        StateVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub(crate) fn add(&self, other: &StateVec) -> StateVec {
        debug_assert_eq!(self.dim(), other.dim());
        StateVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Max norm of `self - other`.
    pub fn distance(&self, other: &StateVec) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(0.0, |acc: f64, (a, b)| acc.max(libm::fabs(a - b))))
    }
}

impl Index<usize> for StateVec {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for StateVec {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Max norm of `x`.
pub fn sup_norm(x: &StateVec) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFiniteState);
    }
    Ok(x.norm())
}

/// `max_n ‖a_n − b_n‖` over two grid functions.
pub fn grid_sup_error(a: &[StateVec], b: &[StateVec]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut worst = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        let d = x.distance(y)?;
        if !d.is_finite() {
            return Err(Error::NonFiniteState);
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn sv(c: &[f64]) -> StateVec {
        StateVec::from_slice(c).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&sv(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(sup_norm(&sv(&[-3.0, 2.0])).unwrap(), 3.0);
        assert_eq!(sup_norm(&sv(&[1.5])).unwrap(), 1.5);
    }

    #[test]
    fn non_finite_rejected() {
        assert_eq!(StateVec::new(vec![1.0, f64::NAN]), Err(Error::NonFiniteState));
        assert_eq!(StateVec::new(vec![]), Err(Error::EmptyState));
        let raw = StateVec::from_raw(vec![f64::INFINITY]);
        assert_eq!(sup_norm(&raw), Err(Error::NonFiniteState));
    }

    #[test]
    fn grid_error_examples() {
        let a = vec![sv(&[1.0]), sv(&[2.0])];
        assert_eq!(grid_sup_error(&a, &a).unwrap(), 0.0);
        let b = vec![sv(&[1.0]), sv(&[2.5])];
        assert_eq!(grid_sup_error(&a, &b).unwrap(), 0.5);
        let a = vec![sv(&[0.0, 0.0]), sv(&[1.0, 0.0])];
        let b = vec![sv(&[0.0, 1.0]), sv(&[1.0, 2.0])];
        assert_eq!(grid_sup_error(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn grid_error_length_mismatch() {
        let a = vec![sv(&[1.0])];
        let b = vec![sv(&[1.0]), sv(&[2.0])];
        assert_eq!(grid_sup_error(&a, &b), Err(Error::LengthMismatch { left: 1, right: 2 }));
        let c = vec![sv(&[1.0, 2.0])];
        assert!(matches!(grid_sup_error(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn norm_axioms(
            x in proptest::collection::vec(-1e3..1e3f64, 3),
            y in proptest::collection::vec(-1e3..1e3f64, 3),
            s in -10.0..10.0f64,
        ) {
            let x = StateVec::new(x).unwrap();
            let y = StateVec::new(y).unwrap();
            let nx = sup_norm(&x).unwrap();
            let ny = sup_norm(&y).unwrap();
            let nxy = sup_norm(&x.add(&y)).unwrap();
            prop_assert!(nxy <= (nx + ny) * (1.0 + 1e-15));
            let scaled = StateVec::from_raw(x.as_slice().iter().map(|c| s * c).collect());
            let ns = sup_norm(&scaled).unwrap();
            prop_assert!((ns - libm::fabs(s) * nx).abs() <= 1e-12 * (1.0 + ns));
            prop_assert!(nx >= 0.0);
        }
    }
}
