//! Smoothing kernels as dense matrices over the lattice basis, with the
//! Hilbert-Schmidt graded norms.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::lattice::{Freq, FrequencyLattice};
use crate::spectral::{JsonContainer, LatticeSpec, SpectralDistribution};

/// An operator with a finite matrix `K_{j,k}` in the `phi`-basis, acting by
/// `(Tu)_j = sum_k K_{j,k} a_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingKernel {
    lattice: FrequencyLattice,
    mat: DMatrix<C64>,
}

impl SmoothingKernel {
    pub fn new(lattice: FrequencyLattice, mat: DMatrix<C64>) -> Result<Self> {
        let n = lattice.len();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(CoreError::InvalidInput(format!(
                "kernel matrix must be {n}x{n}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite kernel entry".into()));
        }
        Ok(Self { lattice, mat })
    }

    pub fn zero(lattice: FrequencyLattice) -> Self {
        let n = lattice.len();
        Self {
            lattice,
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(lattice: FrequencyLattice) -> Self {
        let n = lattice.len();
        Self {
            lattice,
            mat: DMatrix::identity(n, n),
        }
    }

    /// Diagonal kernel `K = diag(k_n)` in the `phi`-basis.
    pub fn diagonal(lattice: FrequencyLattice, weights: &[C64]) -> Result<Self> {
        if weights.len() != lattice.len() {
            return Err(CoreError::InvalidInput(format!(
                "expected {} diagonal weights, got {}",
                lattice.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite weight".into()));
        }
        let n = lattice.len();
        let mut mat = DMatrix::zeros(n, n);
        for (i, w) in weights.iter().enumerate() {
            mat[(i, i)] = *w;
        }
        Ok(Self { lattice, mat })
    }

    /// Diagonal kernel from a function of the mode.
    pub fn diagonal_fn(lattice: FrequencyLattice, f: impl Fn(Freq) -> C64) -> Self {
        let weights: Vec<C64> = lattice.freqs().map(f).collect();
        Self::diagonal(lattice, &weights).expect("weights match lattice by construction")
    }

    /// Rank-one kernel `phi_j (x) phi_k`: a single matrix entry.
    pub fn rank_one(lattice: FrequencyLattice, j: Freq, k: Freq) -> Result<Self> {
        let ji = lattice
            .index_of(j)
            .ok_or_else(|| CoreError::InvalidInput(format!("mode {j:?} outside lattice")))?;
        let ki = lattice
            .index_of(k)
            .ok_or_else(|| CoreError::InvalidInput(format!("mode {k:?} outside lattice")))?;
        let mut s = Self::zero(lattice);
        s.mat[(ji, ki)] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Seeded random kernel with smooth (rapidly decaying) entries.
    pub fn random_smoothing(lattice: FrequencyLattice, decay: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = lattice.len();
        let mut mat = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let fj = lattice.freq_at(j);
                let fk = lattice.freq_at(k);
                let r2 = (fj[0] * fj[0] + fj[1] * fj[1] + fk[0] * fk[0] + fk[1] * fk[1]) as f64;
                let amp = (-r2.sqrt() / decay).exp();
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                mat[(j, k)] = C64::from_polar(amp, phase);
            }
        }
        Self { lattice, mat }
    }

    /// Seeded random kernel supported on a band block
    /// `lo <= max(|j|,|k|) <= hi`.
    pub fn random_thin_block(lattice: FrequencyLattice, lo: i64, hi: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = lattice.len();
        let mut mat = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let fj = lattice.freq_at(j);
                let fk = lattice.freq_at(k);
                let m = fj[0].abs().max(fj[1].abs()).max(fk[0].abs()).max(fk[1].abs());
                if m >= lo && m <= hi {
                    let phase = rng.random::<f64>() * std::f64::consts::TAU;
                    mat[(j, k)] = C64::from_polar(1.0, phase);
                }
            }
        }
        Self { lattice, mat }
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.lattice
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// `(T u)_j = sum_k K_{j,k} a_k`.
    pub fn apply(&self, u: &SpectralDistribution) -> Result<SpectralDistribution> {
        if u.lattice() != self.lattice {
            return Err(CoreError::LatticeMismatch("apply_kernel".into()));
        }
        let n = self.lattice.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        let a = u.coeffs();
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                s += self.mat[(j, k)] * a[k];
            }
            out[j] = s;
        }
        SpectralDistribution::new(self.lattice, out)
    }

    /// `||T||_{p,q} = || (1+Delta)^{p/2} T (1+Delta)^{q/2} ||_HS`, computed as
    /// `( sum_{j,k} (1+lambda_j)^p (1+lambda_k)^q |K_{j,k}|^2 )^{1/2}`.
    pub fn hs_norm(&self, p: i64, q: i64) -> f64 {
        let n = self.lattice.len();
        let wj: Vec<f64> = (0..n)
            .map(|j| (1.0 + self.lattice.lambda(j)).powi(p as i32))
            .collect();
        let wk: Vec<f64> = (0..n)
            .map(|k| (1.0 + self.lattice.lambda(k)).powi(q as i32))
            .collect();
        let mut sum = 0.0;
        for j in 0..n {
            for k in 0..n {
                sum += wj[j] * wk[k] * self.mat[(j, k)].norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// The graded kernel norm `||T||_n = sum_{p+q <= n, p,q >= -n} ||T||_{p,q}`
    /// (exact finite sum; the index set runs over all integer pairs).
    pub fn graded_norm(&self, n: i64) -> Result<f64> {
        if n < 0 {
            return Err(CoreError::InvalidInput(format!(
                "graded kernel norm needs n >= 0, got {n}"
            )));
        }
        Ok(self.graded_norm_table(n)?[n as usize])
    }

    /// All graded norms `||T||_0 .. ||T||_{n_max}` in one pass, sharing the
    /// per-row weighted sums across the quadratically many (p,q) pairs.
    /// Sparse kernels (band probes, rank-one, diagonals) skip the dense
    /// accumulation.
    pub fn graded_norm_table(&self, n_max: i64) -> Result<Vec<f64>> {
        if n_max < 0 {
            return Err(CoreError::InvalidInput("n_max must be >= 0".into()));
        }
        let n_lat = self.lattice.len();
        let entries: Vec<(usize, usize, f64)> = {
            let mut e = Vec::new();
            for j in 0..n_lat {
                for k in 0..n_lat {
                    let v = self.mat[(j, k)].norm_sqr();
                    if v > 0.0 {
                        e.push((j, k, v));
                    }
                }
            }
            e
        };
        // row_sums[q - q_lo][j] = sum_k (1+lambda_k)^q |K_{j,k}|^2,
        // accumulated over nonzero entries only
        let q_lo = -n_max;
        let q_hi = 2 * n_max;
        let mut row_sums = vec![vec![0.0f64; n_lat]; (q_hi - q_lo + 1) as usize];
        let lam: Vec<f64> = (0..n_lat).map(|k| 1.0 + self.lattice.lambda(k)).collect();
        for (j, k, v) in &entries {
            for q in q_lo..=q_hi {
                row_sums[(q - q_lo) as usize][*j] += lam[*k].powi(q as i32) * v;
            }
        }
        // rows that actually carry mass
        let live_rows: Vec<usize> = {
            let mut seen = vec![false; n_lat];
            for (j, _, _) in &entries {
                seen[*j] = true;
            }
            (0..n_lat).filter(|j| seen[*j]).collect()
        };
        let hs = |p: i64, q: i64| -> f64 {
            let per_j = &row_sums[(q - q_lo) as usize];
            let mut s = 0.0;
            for j in &live_rows {
                s += lam[*j].powi(p as i32) * per_j[*j];
            }
            s.sqrt()
        };
        let mut out = Vec::with_capacity(n_max as usize + 1);
        for n in 0..=n_max {
            let mut total = 0.0;
            for p in -n..=2 * n {
                for q in -n..=(n - p) {
                    total += hs(p, q);
                }
            }
            out.push(total);
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            lattice: self.lattice,
            mat: self.mat.map(|c| c * factor),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(CoreError::LatticeMismatch("kernel add".into()));
        }
        Ok(Self {
            lattice: self.lattice,
            mat: &self.mat + &other.mat,
        })
    }

    /// Matrix product `self * other` (compose as operators).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(CoreError::LatticeMismatch("kernel compose".into()));
        }
        Ok(Self {
            lattice: self.lattice,
            mat: &self.mat * &other.mat,
        })
    }

    /// `K * M` for a dense matrix `M`, exploiting sparsity of `K`.
    pub fn compose_dense_right(&self, m: &DMatrix<C64>) -> Result<Self> {
        let n = self.lattice.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(CoreError::InvalidInput("matrix size".into()));
        }
        let nnz = self.mat.iter().filter(|c| c.norm_sqr() > 0.0).count();
        if nnz * 8 > n * n {
            return Self::new(self.lattice, &self.mat * m);
        }
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let v = self.mat[(j, k)];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out[(j, c)] += v * m[(k, c)];
                }
            }
        }
        Self::new(self.lattice, out)
    }

    /// Largest `|K_{j,k}|` over dyadic bands of `max(|j|_inf, |k|_inf)`;
    /// the two-index decay oracle.
    pub fn band_maxima_2d(&self) -> Vec<f64> {
        let n = self.lattice.bandlimit();
        let n_bands = (64 - (n as u64).leading_zeros()) as usize;
        let mut bands = vec![0.0f64; n_bands + 1];
        let len = self.lattice.len();
        for j in 0..len {
            for k in 0..len {
                let fj = self.lattice.freq_at(j);
                let fk = self.lattice.freq_at(k);
                let m = fj[0].abs().max(fj[1].abs()).max(fk[0].abs()).max(fk[1].abs());
                let b = if m == 0 {
                    0
                } else {
                    ((m as f64).log2().floor() as usize) + 1
                };
                let b = b.min(n_bands);
                bands[b] = bands[b].max(self.mat[(j, k)].norm());
            }
        }
        bands
    }

    pub fn to_json(&self) -> JsonContainer {
        JsonContainer {
            lattice: LatticeSpec {
                d: self.lattice.d(),
                n: self.lattice.bandlimit(),
            },
            kind: "kernel".to_string(),
            data: self.mat.row_iter().flat_map(|r| {
                r.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()
            }).collect(),
            order_twice: None,
        }
    }

    pub fn from_json(j: &JsonContainer) -> Result<Self> {
        if j.kind != "kernel" {
            return Err(CoreError::InvalidInput(format!(
                "expected kind 'kernel', got '{}'",
                j.kind
            )));
        }
        let lattice = FrequencyLattice::new(j.lattice.d, j.lattice.n)?;
        let n = lattice.len();
        if j.data.len() != n * n {
            return Err(CoreError::InvalidInput("kernel data size mismatch".into()));
        }
        let mat = DMatrix::from_fn(n, n, |r, c| {
            let p = j.data[r * n + c];
            C64::new(p[0], p[1])
        });
        Self::new(lattice, mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FrequencyLattice;

    fn lat(n: i64) -> FrequencyLattice {
        FrequencyLattice::new(1, n).unwrap()
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn hs_norm_rank_one_at_zero_mode() {
        let t = SmoothingKernel::rank_one(lat(4), [0, 0], [0, 0]).unwrap();
        for (p, q) in [(0, 0), (2, 3), (-1, 5)] {
            assert!((t.hs_norm(p, q) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hs_norm_identity_matches_enumeration() {
        // Direct summation oracle: for the identity at p=q=1 the norm is
        // sqrt( sum_{|k|<=N} (1+k^2)^2 ). At N=2 this is sqrt(67); the
        // smallest admissible lattice here is N=4, so enumerate that.
        let t = SmoothingKernel::identity(lat(4));
        let mut oracle = 0.0;
        for k in -4i64..=4 {
            let w = 1.0 + (k * k) as f64;
            oracle += w * w;
        }
        assert!((t.hs_norm(1, 1) - oracle.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hs_norm_diagonal_matches_paper_form() {
        // For diagonal kernels, ||T||_{p,q}^2 = sum_n |k_n|^2 (1+lambda_n)^{p+q}.
        let lattice = lat(6);
        let t = SmoothingKernel::diagonal_fn(lattice, |k| {
            C64::new(1.0 / (1.0 + (k[0] * k[0]) as f64), 0.0)
        });
        for (p, q) in [(0, 0), (1, 2), (-2, 3)] {
            let direct: f64 = lattice
                .freqs()
                .map(|k| {
                    let kn = 1.0 / (1.0 + (k[0] * k[0]) as f64);
                    let lam = (k[0] * k[0]) as f64;
                    kn * kn * (1.0 + lam).powi((p + q) as i32)
                })
                .sum();
            assert!((t.hs_norm(p, q) - direct.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn hs_norm_equals_scaled_frobenius() {
        let t = SmoothingKernel::random_smoothing(lat(5), 2.0, 3);
        for (p, q) in [(1i64, -1i64), (2, 2), (0, 3)] {
            let n = t.lattice.len();
            let mut scaled = t.mat.clone();
            for j in 0..n {
                for k in 0..n {
                    let wj = (1.0 + t.lattice.lambda(j)).powf(p as f64 / 2.0);
                    let wk = (1.0 + t.lattice.lambda(k)).powf(q as f64 / 2.0);
                    scaled[(j, k)] *= C64::new(wj * wk, 0.0);
                }
            }
            let frob: f64 = scaled.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!((t.hs_norm(p, q) - frob).abs() < 1e-12 * (1.0 + frob));
        }
    }

    #[test]
    fn graded_norm_zero_kernel() {
        let t = SmoothingKernel::zero(lat(4));
        for n in 0..4 {
            assert_eq!(t.graded_norm(n).unwrap(), 0.0);
        }
    }

    #[test]
    fn graded_norm_n0_is_single_pair() {
        let t = SmoothingKernel::random_smoothing(lat(4), 2.0, 9);
        assert!((t.graded_norm(0).unwrap() - t.hs_norm(0, 0)).abs() < 1e-13);
    }

    #[test]
    fn graded_norm_rank_one_counts_pairs() {
        // Brute-force enumeration oracle over the literal index set
        // {p+q <= n, p >= -n, q >= -n}: every pair contributes exactly 1 for
        // the rank-one kernel at the zero mode (lambda_0 = 0).
        let t = SmoothingKernel::rank_one(lat(4), [0, 0], [0, 0]).unwrap();
        for n in 0..=3i64 {
            let mut count = 0usize;
            for p in -10..=20i64 {
                for q in -10..=20i64 {
                    if p >= -n && q >= -n && p + q <= n {
                        count += 1;
                    }
                }
            }
            assert_eq!(t.graded_norm(n).unwrap(), count as f64);
        }
        // frozen value for n = 1: ten admissible pairs
        assert_eq!(t.graded_norm(1).unwrap(), 10.0);
    }

    #[test]
    fn graded_norm_monotone_in_n() {
        let t = SmoothingKernel::random_smoothing(lat(5), 1.5, 17);
        let table = t.graded_norm_table(5).unwrap();
        for w in table.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
    }

    #[test]
    fn apply_identity_and_diagonal() {
        let lattice = lat(6);
        let u = SpectralDistribution::random_smooth(lattice, 1);
        let id = SmoothingKernel::identity(lattice);
        let v = id.apply(&u).unwrap();
        assert_eq!(u, v);

        // diagonal kernel scales coefficients entrywise
        let t = SmoothingKernel::diagonal_fn(lattice, |k| C64::new(0.5, 0.0) * one() * (1.0 + k[0].abs() as f64));
        let w = t.apply(&u).unwrap();
        for (i, k) in lattice.freqs().enumerate() {
            let expect = u.coeffs()[i] * 0.5 * (1.0 + k[0].abs() as f64);
            assert!((w.coeffs()[i] - expect).norm() < 1e-14);
        }
        // and the image norm satisfies ||Tu||_s^2 = sum |a_n k_n|^2 (1+lambda_n)^s
        for s in [0.0, 2.0] {
            let direct: f64 = lattice
                .freqs()
                .enumerate()
                .map(|(i, k)| {
                    let kn = 0.5 * (1.0 + k[0].abs() as f64);
                    let lam = (k[0] * k[0]) as f64;
                    (u.coeffs()[i].norm() * kn).powi(2) * (1.0 + lam).powf(s)
                })
                .sum();
            assert!((w.sobolev_norm(s) - direct.sqrt()).abs() < 1e-12 * (1.0 + direct.sqrt()));
        }
    }

    #[test]
    fn apply_rank_one_to_delta() {
        // phi_0 (x) phi_0 applied to delta_0 keeps only the phi_0 component.
        let lattice = lat(8);
        let t = SmoothingKernel::rank_one(lattice, [0, 0], [0, 0]).unwrap();
        let u = SpectralDistribution::delta(lattice, [0.0, 0.0]);
        let v = t.apply(&u).unwrap();
        // matrix-vector oracle
        let amp = 1.0 / std::f64::consts::TAU.sqrt();
        for (i, k) in lattice.freqs().enumerate() {
            let expect = if k[0] == 0 { amp } else { 0.0 };
            assert!((v.coeffs()[i].norm() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn apply_rejects_lattice_mismatch() {
        let t = SmoothingKernel::identity(lat(4));
        let u = SpectralDistribution::zero(lat(5));
        assert!(matches!(
            t.apply(&u),
            Err(CoreError::LatticeMismatch(_))
        ));
    }
}
