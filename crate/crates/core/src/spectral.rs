//! Band-limited distributions represented by their Fourier coefficient table.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{CoreError, Result};
use crate::lattice::{Freq, FrequencyLattice};

/// A distribution on the truncated lattice, `u = sum_k a_k phi_k` with
/// `phi_k(x) = (2pi)^{-d/2} e^{ik.x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDistribution {
    lattice: FrequencyLattice,
    coeffs: Vec<C64>,
}

impl SpectralDistribution {
    pub fn new(lattice: FrequencyLattice, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(CoreError::InvalidInput(format!(
                "expected {} coefficients, got {}",
                lattice.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CoreError::InvalidInput(
                "non-finite coefficient".to_string(),
            ));
        }
        Ok(Self { lattice, coeffs })
    }

    pub fn zero(lattice: FrequencyLattice) -> Self {
        Self {
            lattice,
            coeffs: vec![C64::new(0.0, 0.0); lattice.len()],
        }
    }

    pub fn from_mode_fn(lattice: FrequencyLattice, f: impl Fn(Freq) -> C64) -> Result<Self> {
        let coeffs = lattice.freqs().map(f).collect();
        Self::new(lattice, coeffs)
    }

    /// Dirac delta at `x0`: coefficients `(2pi)^{-d/2} e^{-ik.x0}`.
    pub fn delta(lattice: FrequencyLattice, x0: [f64; 2]) -> Self {
        let amp = (TAU).powf(-(lattice.d() as f64) / 2.0);
        let coeffs = lattice
            .freqs()
            .map(|k| {
                let phase = -(k[0] as f64 * x0[0] + k[1] as f64 * x0[1]);
                C64::from_polar(amp, phase)
            })
            .collect();
        Self { lattice, coeffs }
    }

    /// A single Fourier mode with unit coefficient.
    pub fn single_mode(lattice: FrequencyLattice, k: Freq) -> Result<Self> {
        let idx = lattice
            .index_of(k)
            .ok_or_else(|| CoreError::InvalidInput(format!("mode {k:?} outside lattice")))?;
        let mut u = Self::zero(lattice);
        u.coeffs[idx] = C64::new(1.0, 0.0);
        Ok(u)
    }

    /// Sawtooth on `T^1`: `a_k = 1/(ik)` for `k != 0`, jump at x = 0.
    pub fn sawtooth(lattice: FrequencyLattice) -> Self {
        let coeffs = lattice
            .freqs()
            .map(|k| {
                if k[0] == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(1.0, 0.0) / C64::new(0.0, k[0] as f64)
                }
            })
            .collect();
        Self { lattice, coeffs }
    }

    /// Hardy-type, one-sided spectrum: `a_k = (1+k)^{-1}` for `k >= 0`, else 0.
    pub fn hardy(lattice: FrequencyLattice) -> Self {
        let coeffs = lattice
            .freqs()
            .map(|k| {
                if k[0] >= 0 && k[1] == 0 {
                    C64::new(1.0 / (1.0 + k[0] as f64), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        Self { lattice, coeffs }
    }

    /// Real-analytic test input with Gaussian coefficient decay.
    pub fn gaussian_decay(lattice: FrequencyLattice, sigma: f64) -> Self {
        let coeffs = lattice
            .freqs()
            .map(|k| {
                let l2 = (k[0] * k[0] + k[1] * k[1]) as f64;
                C64::new((-l2 / (2.0 * sigma * sigma)).exp(), 0.0)
            })
            .collect();
        Self { lattice, coeffs }
    }

    /// Coefficients `|a_k| = (1+|k|)^p` with seeded random phases.
    pub fn power_decay(lattice: FrequencyLattice, p: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = lattice
            .freqs()
            .map(|k| {
                let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                let phase = rng.random::<f64>() * TAU;
                C64::from_polar((1.0 + r).powf(p), phase)
            })
            .collect();
        Self { lattice, coeffs }
    }

    /// Smooth random input: exponential decay with random phases. The
    /// rate scales with the bandlimit so the decay is visible on the
    /// trusted dyadic bands at any lattice size.
    pub fn random_smooth(lattice: FrequencyLattice, seed: u64) -> Self {
        Self::exp_decay(lattice, 64.0 / lattice.bandlimit() as f64, seed)
    }

    /// `|a_k| = e^{-rate |k|}` with seeded random phases.
    pub fn exp_decay(lattice: FrequencyLattice, rate: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = lattice
            .freqs()
            .map(|k| {
                let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                let phase = rng.random::<f64>() * TAU;
                C64::from_polar((-rate * r).exp(), phase)
            })
            .collect();
        Self { lattice, coeffs }
    }

    /// Rough random input: constant-magnitude coefficients, random phases.
    pub fn random_rough(lattice: FrequencyLattice, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = lattice
            .freqs()
            .map(|_| {
                let phase = rng.random::<f64>() * TAU;
                C64::from_polar(1.0, phase)
            })
            .collect();
        Self { lattice, coeffs }
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.lattice
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: Freq) -> C64 {
        self.lattice
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_else(|| C64::new(0.0, 0.0))
    }

    pub fn set_coeff(&mut self, k: Freq, v: C64) -> Result<()> {
        let idx = self
            .lattice
            .index_of(k)
            .ok_or_else(|| CoreError::InvalidInput(format!("mode {k:?} outside lattice")))?;
        self.coeffs[idx] = v;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Sobolev norm `( sum_k |a_k|^2 (1+lambda_k)^s )^{1/2}`, the norm of
    /// `(1+Delta)^{s/2} u` in `L^2`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * (1.0 + self.lattice.lambda(i)).powf(s))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            lattice: self.lattice,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(CoreError::LatticeMismatch("add".to_string()));
        }
        Ok(Self {
            lattice: self.lattice,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Pointwise evaluation `u(x) = sum_k a_k phi_k(x)`.
    pub fn eval(&self, x: [f64; 2]) -> C64 {
        let amp = (TAU).powf(-(self.lattice.d() as f64) / 2.0);
        self.lattice
            .freqs()
            .zip(&self.coeffs)
            .map(|(k, a)| a * C64::from_polar(amp, k[0] as f64 * x[0] + k[1] as f64 * x[1]))
            .sum()
    }

    /// Largest `|a_k|` over each dyadic band `2^j <= |k| < 2^{j+1}` (band 0
    /// is `k = 0`). Used by the regularity oracles.
    pub fn band_maxima(&self) -> Vec<f64> {
        band_maxima_of(&self.lattice, |i| self.coeffs[i].norm())
    }
}

/// Dyadic band maxima of an arbitrary nonnegative table over the lattice.
pub(crate) fn band_maxima_of(
    lattice: &FrequencyLattice,
    value: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let n = lattice.bandlimit();
    let n_bands = (64 - (n as u64).leading_zeros()) as usize;
    let mut bands = vec![0.0f64; n_bands + 1];
    for i in 0..lattice.len() {
        let k = lattice.freq_at(i);
        let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let b = if r < 1.0 {
            0
        } else {
            (r.log2().floor() as usize) + 1
        };
        let b = b.min(n_bands);
        bands[b] = bands[b].max(value(i));
    }
    bands
}

/// Serialized container shared by distributions, kernels and operators:
/// `{lattice: {d, N}, kind, data: [...row-major complex pairs...]}`.
#[derive(Serialize, Deserialize)]
pub struct JsonContainer {
    pub lattice: LatticeSpec,
    pub kind: String,
    pub data: Vec<[f64; 2]>,
    /// Operator order metadata (operators only), twice the half-integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_twice: Option<i64>,
}

#[derive(Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: u8,
    #[serde(rename = "N")]
    pub n: i64,
}

impl SpectralDistribution {
    pub fn to_json(&self) -> JsonContainer {
        JsonContainer {
            lattice: LatticeSpec {
                d: self.lattice.d(),
                n: self.lattice.bandlimit(),
            },
            kind: "distribution".to_string(),
            data: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            order_twice: None,
        }
    }

    pub fn from_json(j: &JsonContainer) -> Result<Self> {
        if j.kind != "distribution" {
            return Err(CoreError::InvalidInput(format!(
                "expected kind 'distribution', got '{}'",
                j.kind
            )));
        }
        let lattice = FrequencyLattice::new(j.lattice.d, j.lattice.n)?;
        Self::new(
            lattice,
            j.data.iter().map(|p| C64::new(p[0], p[1])).collect(),
        )
    }
}
