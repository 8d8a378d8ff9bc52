//! Sparse unit directions and the Givens rotations that move between them.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{AdpError, Result};

/// Weights with magnitude at or below this are treated as exact zeros when
/// counting the support of a direction.
pub const ZERO_TOL: f64 = 1e-10;

/// Sparse unit vector over `dim` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    entries: BTreeMap<usize, f64>,
    dim: usize,
}

impl Direction {
    /// Normalizes `weights` into a unit direction.
    ///
    /// Entries that fall below [`ZERO_TOL`] after normalization are dropped and
    /// the remainder is normalized again. Repeated indices are summed.
    pub fn new(weights: impl IntoIterator<Item = (usize, f64)>, dim: usize) -> Result<Self> {
        let mut entries: BTreeMap<usize, f64> = BTreeMap::new();
        for (index, w) in weights {
            if index >= dim {
                return Err(AdpError::IndexOutOfRange { index, dim });
            }
            if !w.is_finite() {
                return Err(AdpError::InvalidArgument(format!("non-finite weight at {index}")));
            }
            *entries.entry(index).or_insert(0.0) += w;
        }
        entries.retain(|_, w| *w != 0.0);
        normalize(&mut entries)?;
        if entries.values().any(|w| w.abs() <= ZERO_TOL) {
            entries.retain(|_, w| w.abs() > ZERO_TOL);
            normalize(&mut entries)?;
        }
        Ok(Direction { entries, dim })
    }

    /// The standard basis vector `e_index`.
    pub fn axis(index: usize, dim: usize) -> Result<Self> {
        Self::new([(index, 1.0)], dim)
    }

    /// Builds a direction from a dense vector.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().copied().enumerate(), values.len())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight of coordinate `j` (zero when outside the support).
    pub fn weight(&self, j: usize) -> f64 {
        self.entries.get(&j).copied().unwrap_or(0.0)
    }

    /// Nonzero `(index, weight)` pairs in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&j, &w)| (j, w))
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, w) in self.iter() {
            out[j] = w;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.iter().map(|(j, w)| w * other.weight(j)).sum()
    }

    pub fn negated(&self) -> Direction {
        Direction {
            entries: self.entries.iter().map(|(&j, &w)| (j, -w)).collect(),
            dim: self.dim,
        }
    }

    /// Applies the Givens rotation `G(i, j, theta)`:
    /// `v_i' = cos(theta) v_i - sin(theta) v_j`, `v_j' = sin(theta) v_i + cos(theta) v_j`.
    ///
    /// Rotated coordinates with magnitude at or below [`ZERO_TOL`] leave the support.
    pub fn givens_rotate(&self, i: usize, j: usize, theta: f64) -> Result<Direction> {
        for index in [i, j] {
            if index >= self.dim {
                return Err(AdpError::IndexOutOfRange { index, dim: self.dim });
            }
        }
        if i == j {
            return Err(AdpError::EqualIndices(i));
        }
        let (s, c) = theta.sin_cos();
        let (vi, vj) = (self.weight(i), self.weight(j));
        let ri = c * vi - s * vj;
        let rj = s * vi + c * vj;

        let mut entries = self.entries.clone();
        let mut dropped = false;
        for (index, value) in [(i, ri), (j, rj)] {
            if value.abs() > ZERO_TOL {
                entries.insert(index, value);
            } else {
                dropped |= entries.remove(&index).is_some() || value != 0.0;
            }
        }
        if dropped {
            normalize(&mut entries)?;
        }
        Ok(Direction { entries, dim: self.dim })
    }
}

fn normalize(entries: &mut BTreeMap<usize, f64>) -> Result<()> {
    let norm = entries.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(AdpError::ZeroVector);
    }
    entries.values_mut().for_each(|w| *w /= norm);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    #[test]
    fn axis_normalization() {
        let v = Direction::new([(0, 3.0)], 5).unwrap();
        assert_eq!(v.to_dense(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.support(), vec![0]);
    }

    #[test]
    fn diagonal_normalization() {
        let v = Direction::new([(0, 1.0), (1, 1.0)], 2).unwrap();
        assert!((v.weight(0) - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v.weight(1) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn empty_and_zero_weights_are_rejected() {
        assert_eq!(Direction::new([], 3).unwrap_err(), AdpError::ZeroVector);
        assert_eq!(Direction::new([(1, 0.0)], 3).unwrap_err(), AdpError::ZeroVector);
        assert_eq!(
            Direction::new([(3, 1.0)], 3).unwrap_err(),
            AdpError::IndexOutOfRange { index: 3, dim: 3 }
        );
    }

    #[test]
    fn tiny_weights_are_dropped() {
        let v = Direction::new([(0, 1.0), (2, 1e-13)], 3).unwrap();
        assert_eq!(v.support(), vec![0]);
        assert_eq!(v.weight(0), 1.0);
    }

    #[test]
    fn quarter_turn_maps_e0_to_e1() {
        let v = Direction::axis(0, 2).unwrap();
        let r = v.givens_rotate(0, 1, FRAC_PI_2).unwrap();
        assert_eq!(r.support(), vec![1]);
        assert!((r.weight(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let v = Direction::new([(0, 0.3), (2, -0.4), (3, 1.2)], 5).unwrap();
        let r = v.givens_rotate(2, 4, 0.0).unwrap();
        assert_eq!(r, v);
    }

    #[test]
    fn rotation_can_annihilate_a_coordinate() {
        let v = Direction::new([(0, 0.6), (1, 0.8)], 2).unwrap();
        let theta = 0.6f64.atan2(0.8);
        let r = v.givens_rotate(0, 1, theta).unwrap();
        assert_eq!(r.support(), vec![1]);
        assert!((r.weight(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_argument_errors() {
        let v = Direction::axis(0, 3).unwrap();
        assert_eq!(v.givens_rotate(1, 1, 0.3).unwrap_err(), AdpError::EqualIndices(1));
        assert_eq!(
            v.givens_rotate(0, 3, 0.3).unwrap_err(),
            AdpError::IndexOutOfRange { index: 3, dim: 3 }
        );
    }

    fn arb_direction(dim: usize) -> impl Strategy<Value = Direction> {
        prop::collection::vec(-1.0f64..1.0, dim)
            .prop_filter("nonzero", |w| w.iter().any(|x| x.abs() > 1e-3))
            .prop_map(|w| Direction::from_dense(&w).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotation_preserves_norm(
            v in arb_direction(6), i in 0usize..6, j in 0usize..6, theta in -7.0f64..7.0
        ) {
            prop_assume!(i != j);
            let r = v.givens_rotate(i, j, theta).unwrap();
            prop_assert!((r.norm() - 1.0).abs() < 1e-12);
            for k in (0..6).filter(|&k| k != i && k != j) {
                prop_assert_eq!(r.weight(k), v.weight(k));
            }
        }

        #[test]
        fn inverse_rotation_recovers(
            v in arb_direction(5), i in 0usize..5, j in 0usize..5, theta in -3.2f64..3.2
        ) {
            prop_assume!(i != j);
            let back = v.givens_rotate(i, j, theta).unwrap().givens_rotate(i, j, -theta).unwrap();
            for k in 0..5 {
                prop_assert!((back.weight(k) - v.weight(k)).abs() < 1e-10);
            }
        }

        #[test]
        fn construction_is_idempotent(v in arb_direction(7)) {
            let again = Direction::new(v.iter(), v.dim()).unwrap();
            prop_assert_eq!(again.support(), v.support());
            for k in 0..7 {
                prop_assert!((again.weight(k) - v.weight(k)).abs() < 1e-12);
            }
        }
    }
}
