//! Normal-form elements `a = sum_n f_n V1^n` of the endomorphism torus.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::theta::ThetaFunction;
use crate::{C64, NcError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NCElement {
    theta: f64,
    terms: BTreeMap<i64, ThetaFunction>,
}

impl NCElement {
    pub fn from_terms(
        theta: f64,
        terms: impl IntoIterator<Item = (i64, ThetaFunction)>,
    ) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(NcError::BadTheta(theta));
        }
        let mut map: BTreeMap<i64, ThetaFunction> = BTreeMap::new();
        for (n, f) in terms {
            if (f.theta() - theta).abs() > 0.0 {
                return Err(NcError::ThetaMismatch(theta, f.theta()));
            }
            match map.remove(&n) {
                None => {
                    map.insert(n, f);
                }
                Some(existing) => {
                    map.insert(n, existing.add(&f)?);
                }
            }
        }
        map.retain(|_, f| !f.is_zero());
        Ok(Self { theta, terms: map })
    }

    pub fn zero(theta: f64) -> Self {
        Self {
            theta,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(theta: f64) -> Self {
        Self::from_terms(theta, [(0, ThetaFunction::constant(theta, C64::new(1.0, 0.0)))])
            .expect("theta validated by caller")
    }

    /// The translation generator `V1`.
    pub fn v1(theta: f64) -> Self {
        Self::from_terms(theta, [(1, ThetaFunction::constant(theta, C64::new(1.0, 0.0)))])
            .expect("theta validated by caller")
    }

    /// The modulation generator `V2` (the basis mode `m = -1`, i.e. the
    /// function `e^{2 pi i s / theta}`).
    pub fn v2(theta: f64) -> Self {
        Self::from_terms(
            theta,
            [(0, ThetaFunction::from_modes(theta, [(-1, C64::new(1.0, 0.0))]))],
        )
        .expect("theta validated by caller")
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn terms(&self) -> Vec<(i64, ThetaFunction)> {
        self.terms.iter().map(|(n, f)| (*n, f.clone())).collect()
    }

    pub fn coefficient(&self, n: i64) -> Option<&ThetaFunction> {
        self.terms.get(&n)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (n, f) in &other.terms {
            match terms.remove(n) {
                None => {
                    terms.insert(*n, f.clone());
                }
                Some(existing) => {
                    terms.insert(*n, existing.add(f)?);
                }
            }
        }
        terms.retain(|_, f| !f.is_zero());
        Ok(Self {
            theta: self.theta,
            terms,
        })
    }

    pub fn scaled(&self, c: C64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(n, f)| (*n, f.scaled(c)))
            .filter(|(_, f)| !f.is_zero())
            .collect();
        Self {
            theta: self.theta,
            terms,
        }
    }

    /// Normal-ordered product. As operators `V1 xi(s) = xi(s - 1)`, so
    /// moving a power of `V1` through a function shifts its graph:
    /// `V1^n f = (shift_n f) V1^n`, and
    /// `(f V1^n)(g V1^m) = f (shift_n g) V1^{n+m}`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms: BTreeMap<i64, ThetaFunction> = BTreeMap::new();
        for (n, f) in &self.terms {
            for (m, g) in &other.terms {
                let part = f.multiply(&g.shifted(*n as f64))?;
                let p = n + m;
                match terms.remove(&p) {
                    None => {
                        terms.insert(p, part);
                    }
                    Some(existing) => {
                        terms.insert(p, existing.add(&part)?);
                    }
                }
            }
        }
        terms.retain(|_, f| !f.is_zero());
        Ok(Self {
            theta: self.theta,
            terms,
        })
    }

    /// Apply the element to a sampled Schwartz-class function: the oracle
    /// route for the algebra relations. `V1 phi(s) = phi(s - 1)` and
    /// functions multiply pointwise.
    pub fn act_on_function(&self, phi: &dyn Fn(f64) -> C64, s: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (n, f) in &self.terms {
            acc += f.eval(s) * phi(s - *n as f64);
        }
        acc
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<i64> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        keys.iter().all(|n| {
            match (self.terms.get(n), other.terms.get(n)) {
                (None, None) => true,
                (Some(f), None) | (None, Some(f)) => f.approx_eq(&ThetaFunction::zero(self.theta), tol),
                (Some(f), Some(g)) => f.approx_eq(g, tol),
            }
        })
    }

    fn check(&self, other: &Self) -> Result<()> {
        if (self.theta - other.theta).abs() > 0.0 {
            return Err(NcError::ThetaMismatch(self.theta, other.theta));
        }
        Ok(())
    }
}
