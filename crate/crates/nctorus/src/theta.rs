//! Theta-periodic trigonometric polynomials `f(s) = sum_m c_m e^{-2 pi i m s / theta}`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::{C64, NcError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaFunction {
    theta: f64,
    coeffs: BTreeMap<i64, C64>,
}

impl ThetaFunction {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(NcError::BadTheta(theta));
        }
        Ok(Self {
            theta,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn from_modes(theta: f64, modes: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (m, c) in modes {
            if c.norm_sqr() > 0.0 {
                *coeffs.entry(m).or_insert_with(|| C64::new(0.0, 0.0)) += c;
            }
        }
        coeffs.retain(|_, c| c.norm_sqr() > 0.0);
        Self { theta, coeffs }
    }

    pub fn constant(theta: f64, c: C64) -> Self {
        Self::from_modes(theta, [(0, c)])
    }

    pub fn zero(theta: f64) -> Self {
        Self {
            theta,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, C64> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, s: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|(m, c)| c * C64::from_polar(1.0, -std::f64::consts::TAU * (*m as f64) * s / self.theta))
            .sum()
    }

    /// Graph shift to the right: `(shift_n f)(s) = f(s - n)`.
    pub fn shifted(&self, n: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| {
                let phase = std::f64::consts::TAU * (*m as f64) * n / self.theta;
                (*m, c * C64::from_polar(1.0, phase))
            })
            .collect();
        Self {
            theta: self.theta,
            coeffs,
        }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| {
                (
                    *m,
                    c * C64::new(0.0, -std::f64::consts::TAU * (*m as f64) / self.theta),
                )
            })
            .collect();
        Self {
            theta: self.theta,
            coeffs,
        }
    }

    /// n-th derivative evaluated at a point.
    pub fn derivative_at(&self, order: u32, s: f64) -> C64 {
        let mut f = self.clone();
        for _ in 0..order {
            f = f.derivative();
        }
        f.eval(s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut coeffs = self.coeffs.clone();
        for (m, c) in &other.coeffs {
            *coeffs.entry(*m).or_insert_with(|| C64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| c.norm_sqr() > 0.0);
        Ok(Self {
            theta: self.theta,
            coeffs,
        })
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            theta: self.theta,
            coeffs: self.coeffs.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut coeffs: BTreeMap<i64, C64> = BTreeMap::new();
        for (m1, c1) in &self.coeffs {
            for (m2, c2) in &other.coeffs {
                *coeffs
                    .entry(m1 + m2)
                    .or_insert_with(|| C64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        coeffs.retain(|_, c| c.norm_sqr() > 0.0);
        Ok(Self {
            theta: self.theta,
            coeffs,
        })
    }

    fn check(&self, other: &Self) -> Result<()> {
        if (self.theta - other.theta).abs() > 0.0 {
            return Err(NcError::ThetaMismatch(self.theta, other.theta));
        }
        Ok(())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<i64> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        keys.iter().all(|m| {
            let a = self.coeffs.get(m).copied().unwrap_or_else(|| C64::new(0.0, 0.0));
            let b = other.coeffs.get(m).copied().unwrap_or_else(|| C64::new(0.0, 0.0));
            (a - b).norm() <= tol
        })
    }
}
