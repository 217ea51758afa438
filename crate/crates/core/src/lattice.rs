//! Frequency lattices on the flat torus and half-integer operator orders.
//!
//! The torus convention throughout is `T^d = (R/2piZ)^d` with orthonormal
//! basis `phi_k(x) = (2pi)^{-d/2} e^{i k.x}` and Laplacian eigenvalues
//! `lambda_k = |k|^2`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::CoreError;

/// A frequency vector. For `d = 1` the second component is always 0.
pub type Freq = [i64; 2];

/// Index set `{ k in Z^d : |k|_inf <= N }` for `d` in {1, 2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyLattice {
    d: u8,
    n: i64,
}

impl FrequencyLattice {
    pub fn new(d: u8, n: i64) -> Result<Self, CoreError> {
        if d != 1 && d != 2 {
            return Err(CoreError::InvalidInput(format!(
                "lattice dimension must be 1 or 2, got {d}"
            )));
        }
        if n < 4 {
            return Err(CoreError::InvalidInput(format!(
                "bandlimit must be at least 4, got {n}"
            )));
        }
        Ok(Self { d, n })
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn bandlimit(&self) -> i64 {
        self.n
    }

    /// Number of lattice points, `(2N+1)^d`.
    pub fn len(&self) -> usize {
        let side = (2 * self.n + 1) as usize;
        match self.d {
            1 => side,
            _ => side * side,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn side(&self) -> i64 {
        2 * self.n + 1
    }

    /// Linear index of a frequency, if it lies on the lattice.
    pub fn index_of(&self, k: Freq) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let i0 = k[0] + self.n;
        Some(match self.d {
            1 => i0 as usize,
            _ => (i0 * self.side() + (k[1] + self.n)) as usize,
        })
    }

    pub fn contains(&self, k: Freq) -> bool {
        let in_first = k[0].abs() <= self.n;
        match self.d {
            1 => in_first && k[1] == 0,
            _ => in_first && k[1].abs() <= self.n,
        }
    }

    /// Frequency at a linear index.
    pub fn freq_at(&self, idx: usize) -> Freq {
        let idx = idx as i64;
        match self.d {
            1 => [idx - self.n, 0],
            _ => [idx / self.side() - self.n, idx % self.side() - self.n],
        }
    }

    /// Laplacian eigenvalue `lambda_k = |k|^2` at a linear index.
    pub fn lambda(&self, idx: usize) -> f64 {
        let k = self.freq_at(idx);
        (k[0] * k[0] + k[1] * k[1]) as f64
    }

    pub fn freqs(&self) -> impl Iterator<Item = Freq> + '_ {
        (0..self.len()).map(|i| self.freq_at(i))
    }

    /// Uniform spatial grid with `m` points per axis on `[0, 2pi)`.
    pub fn x_grid(m: usize) -> Vec<f64> {
        let h = std::f64::consts::TAU / m as f64;
        (0..m).map(|i| i as f64 * h).collect()
    }
}

/// An element of (1/2)Z, stored as twice its value.
///
/// Operator orders live here: the calculus composes with powers of
/// `(1+Delta)^{1/2}` so half-integer steps occur naturally.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    /// Construct from twice the intended value.
    pub fn from_twice(t: i64) -> Self {
        HalfInt(t)
    }

    pub fn twice(&self) -> i64 {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(&self) -> bool {
        self.0 % 2 == 0
    }

    /// Largest integer not exceeding the value.
    pub fn floor_int(&self) -> i64 {
        self.0.div_euclid(2)
    }

    /// Inclusive range over the half-integer grid.
    pub fn range(lo: HalfInt, hi: HalfInt) -> impl Iterator<Item = HalfInt> {
        (lo.0..=hi.0).map(HalfInt)
    }

    pub fn abs(&self) -> HalfInt {
        HalfInt(self.0.abs())
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_size_and_symmetry() {
        let l1 = FrequencyLattice::new(1, 8).unwrap();
        assert_eq!(l1.len(), 17);
        let l2 = FrequencyLattice::new(2, 4).unwrap();
        assert_eq!(l2.len(), 81);
        // lambda is symmetric under k -> -k
        for lat in [l1, l2] {
            for i in 0..lat.len() {
                let k = lat.freq_at(i);
                let neg = lat.index_of([-k[0], -k[1]]).unwrap();
                assert_eq!(lat.lambda(i), lat.lambda(neg));
                assert!(lat.lambda(i) >= 0.0);
            }
        }
    }

    #[test]
    fn index_roundtrip() {
        for lat in [
            FrequencyLattice::new(1, 5).unwrap(),
            FrequencyLattice::new(2, 5).unwrap(),
        ] {
            for i in 0..lat.len() {
                assert_eq!(lat.index_of(lat.freq_at(i)), Some(i));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FrequencyLattice::new(3, 8).is_err());
        assert!(FrequencyLattice::new(1, 3).is_err());
    }

    #[test]
    fn half_integers() {
        let m = HalfInt::from_twice(3); // 3/2
        assert_eq!(m.as_f64(), 1.5);
        assert_eq!(m.floor_int(), 1);
        assert_eq!((-m).floor_int(), -2);
        assert_eq!(format!("{}", m), "3/2");
        assert_eq!(format!("{}", HalfInt::from_int(2)), "2");
        assert_eq!(
            HalfInt::range(HalfInt::from_int(0), HalfInt::from_int(1)).count(),
            3
        );
    }
}
