//! Finite sums of weighted derivatives of deltas, plus a smooth remainder
//! flag; the symbolic stand-in for tempered distributions.

use serde::{Deserialize, Serialize};

use crate::theta::ThetaFunction;
use crate::{C64, NcError, Result, WEIGHT_EPS};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointSingularity {
    pub location: f64,
    pub order: u32,
    pub weight: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolicDistribution {
    theta: f64,
    terms: Vec<PointSingularity>,
    smooth_remainder: bool,
}

impl SymbolicDistribution {
    pub fn zero(theta: f64) -> Self {
        Self {
            theta,
            terms: Vec::new(),
            smooth_remainder: false,
        }
    }

    /// `delta^{(order)}_{x}`.
    pub fn delta(theta: f64, x: f64, order: u32) -> Self {
        Self {
            theta,
            terms: vec![PointSingularity {
                location: x,
                order,
                weight: C64::new(1.0, 0.0),
            }],
            smooth_remainder: false,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn singular_terms(&self) -> &[PointSingularity] {
        &self.terms
    }

    pub fn has_smooth_remainder(&self) -> bool {
        self.smooth_remainder
    }

    pub fn set_smooth_remainder(&mut self, v: bool) {
        self.smooth_remainder = v;
    }

    pub fn is_smooth(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalized(mut self) -> Self {
        // merge terms at the same location and order, drop zero weights;
        // locations within 1e-9 count as the same point
        let mut merged: Vec<PointSingularity> = Vec::new();
        for t in self.terms.drain(..) {
            match merged
                .iter_mut()
                .find(|m| m.order == t.order && (m.location - t.location).abs() < 1e-9)
            {
                Some(m) => m.weight += t.weight,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.weight.norm() > WEIGHT_EPS);
        merged.sort_by(|a, b| {
            (a.location, a.order)
                .partial_cmp(&(b.location, b.order))
                .unwrap()
        });
        self.terms = merged;
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.theta - other.theta).abs() > 0.0 {
            return Err(NcError::ThetaMismatch(self.theta, other.theta));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            theta: self.theta,
            terms,
            smooth_remainder: self.smooth_remainder || other.smooth_remainder,
        }
        .normalized())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            theta: self.theta,
            terms: self
                .terms
                .iter()
                .map(|t| PointSingularity {
                    location: t.location,
                    order: t.order,
                    weight: t.weight * c,
                })
                .collect(),
            smooth_remainder: self.smooth_remainder,
        }
        .normalized()
    }

    /// Translate every point mass by `n` (the `V1^n` shift).
    pub fn shifted(&self, n: f64) -> Self {
        Self {
            theta: self.theta,
            terms: self
                .terms
                .iter()
                .map(|t| PointSingularity {
                    location: t.location + n,
                    order: t.order,
                    weight: t.weight,
                })
                .collect(),
            smooth_remainder: self.smooth_remainder,
        }
    }

    /// Leibniz multiplication by a theta function:
    /// `f delta^{(r)}_x = sum_i binom(r, i) (-1)^i f^{(i)}(x) delta^{(r-i)}_x`.
    pub fn multiplied_by_theta_fn(&self, f: &ThetaFunction) -> Result<Self> {
        if (self.theta - f.theta()).abs() > 0.0 {
            return Err(NcError::ThetaMismatch(self.theta, f.theta()));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            for i in 0..=t.order {
                let coeff = binom(t.order, i) as f64;
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let val = f.derivative_at(i, t.location);
                terms.push(PointSingularity {
                    location: t.location,
                    order: t.order - i,
                    weight: t.weight * val * (coeff * sign),
                });
            }
        }
        Ok(Self {
            theta: self.theta,
            terms,
            smooth_remainder: self.smooth_remainder,
        }
        .normalized())
    }

    /// Leibniz multiplication by the affine function `a s + b` (the
    /// non-periodic multiplier class the first connection needs).
    pub fn multiplied_by_linear(&self, a: C64, b: C64) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            // p(s) = a s + b: p(x) on the same order, -p'(x) once below
            terms.push(PointSingularity {
                location: t.location,
                order: t.order,
                weight: t.weight * (a * t.location + b),
            });
            if t.order >= 1 {
                terms.push(PointSingularity {
                    location: t.location,
                    order: t.order - 1,
                    weight: t.weight * a * (-(t.order as f64)),
                });
            }
        }
        Self {
            theta: self.theta,
            terms,
            smooth_remainder: self.smooth_remainder,
        }
        .normalized()
    }

    /// Distributional derivative: raises every order by one.
    pub fn differentiated(&self) -> Self {
        Self {
            theta: self.theta,
            terms: self
                .terms
                .iter()
                .map(|t| PointSingularity {
                    location: t.location,
                    order: t.order + 1,
                    weight: t.weight,
                })
                .collect(),
            smooth_remainder: self.smooth_remainder,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let d = match self.sub(other) {
            Ok(d) => d,
            Err(_) => return false,
        };
        d.terms.iter().all(|t| t.weight.norm() <= tol)
    }
}

fn binom(n: u32, k: u32) -> u64 {
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
