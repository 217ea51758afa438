//! Filtered pseudodifferential operators on the truncated lattice.
//!
//! Quantization convention: an operator is a table `nu -> c_nu(.)` of
//! multipliers over the lattice, acting by
//! `b_j = sum_nu c_nu(j - nu) a_{j - nu}`,
//! i.e. the symbol `sum_nu c_nu(xi) e^{i nu.x}` applied Kohn-Nirenberg
//! style. Output frequencies leaving the lattice are dropped (orthogonal
//! projection), never wrapped.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use crate::error::{CoreError, Result};
use crate::lattice::{Freq, FrequencyLattice, HalfInt};
use crate::spectral::SpectralDistribution;

/// A band-limited function of x given by its Fourier modes,
/// `f(x) = sum_nu f_nu e^{i nu.x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct XModeProfile {
    modes: BTreeMap<Freq, C64>,
}

impl XModeProfile {
    pub fn constant(c: C64) -> Self {
        let mut modes = BTreeMap::new();
        if c.norm_sqr() > 0.0 {
            modes.insert([0, 0], c);
        }
        Self { modes }
    }

    pub fn from_modes(modes: BTreeMap<Freq, C64>) -> Self {
        let modes = modes
            .into_iter()
            .filter(|(_, v)| v.norm_sqr() > 0.0)
            .collect();
        Self { modes }
    }

    /// `a + b cos(k.x)` as a real profile.
    pub fn cosine(a: f64, b: f64, k: Freq) -> Self {
        let mut modes = BTreeMap::new();
        if a != 0.0 {
            modes.insert([0, 0], C64::new(a, 0.0));
        }
        if b != 0.0 {
            modes.insert(k, C64::new(b / 2.0, 0.0));
            modes.insert([-k[0], -k[1]], C64::new(b / 2.0, 0.0));
        }
        Self { modes }
    }

    /// `b sin(k.x)` as a real profile.
    pub fn sine(b: f64, k: Freq) -> Self {
        let mut modes = BTreeMap::new();
        if b != 0.0 {
            modes.insert(k, C64::new(0.0, -b / 2.0));
            modes.insert([-k[0], -k[1]], C64::new(0.0, b / 2.0));
        }
        Self { modes }
    }

    /// `((1 + cos(x - xc))/2)^p` on `T^1`: an exactly band-limited bump with
    /// band `p`, peak 1 at `xc` and a zero of order `2p` at the antipode.
    pub fn cos_power_bump(p: u32, xc: f64) -> Self {
        // (cos(t/2)^2)^p = 4^{-p} sum_nu binom(2p, p+nu) e^{i nu t}
        let mut modes = BTreeMap::new();
        let two_p = 2 * p as i64;
        let mut binom = vec![0.0f64; two_p as usize + 1];
        binom[0] = 1.0;
        for row in 1..=two_p as usize {
            for j in (1..=row).rev() {
                binom[j] += binom[j - 1];
            }
        }
        let scale = 0.25f64.powi(p as i32);
        for nu in -(p as i64)..=(p as i64) {
            let coeff = binom[(p as i64 + nu) as usize] * scale;
            let phase = -(nu as f64) * xc;
            modes.insert([nu, 0], C64::from_polar(coeff, phase));
        }
        Self { modes }
    }

    /// Product bump on `T^2` centered at `(xc, yc)`.
    pub fn cos_power_bump_2d(p: u32, xc: f64, yc: f64) -> Self {
        let bx = Self::cos_power_bump(p, xc);
        let by = Self::cos_power_bump(p, yc);
        let mut modes = BTreeMap::new();
        for (kx, vx) in &bx.modes {
            for (ky, vy) in &by.modes {
                modes.insert([kx[0], ky[0]], vx * vy);
            }
        }
        Self { modes }
    }

    pub fn modes(&self) -> &BTreeMap<Freq, C64> {
        &self.modes
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut modes: BTreeMap<Freq, C64> = BTreeMap::new();
        for (ka, va) in &self.modes {
            for (kb, vb) in &other.modes {
                let k = [ka[0] + kb[0], ka[1] + kb[1]];
                *modes.entry(k).or_insert_with(|| C64::new(0.0, 0.0)) += va * vb;
            }
        }
        Self::from_modes(modes)
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            modes: self.modes.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut modes = self.modes.clone();
        for (k, v) in &other.modes {
            *modes.entry(*k).or_insert_with(|| C64::new(0.0, 0.0)) += v;
        }
        Self::from_modes(modes)
    }

    pub fn eval(&self, x: [f64; 2]) -> C64 {
        self.modes
            .iter()
            .map(|(k, v)| v * C64::from_polar(1.0, k[0] as f64 * x[0] + k[1] as f64 * x[1]))
            .sum()
    }

    /// Largest `|nu|_inf` with a nonzero mode.
    pub fn band(&self) -> i64 {
        self.modes
            .keys()
            .map(|k| k[0].abs().max(k[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// Minimum of the real part over a fine grid (profiles used as symbols
    /// or metric coefficients are real-valued).
    pub fn min_real_on_grid(&self, d: u8, samples: usize) -> f64 {
        let grid = FrequencyLattice::x_grid(samples);
        let mut min = f64::INFINITY;
        match d {
            1 => {
                for &x in &grid {
                    min = min.min(self.eval([x, 0.0]).re);
                }
            }
            _ => {
                for &x in &grid {
                    for &y in &grid {
                        min = min.min(self.eval([x, y]).re);
                    }
                }
            }
        }
        min
    }
}

/// Canonical direction grid: `{+,-}` for d = 1, a sampled circle for d = 2.
pub fn direction_grid(d: u8, n_dirs_2d: usize) -> Vec<[f64; 2]> {
    match d {
        1 => vec![[1.0, 0.0], [-1.0, 0.0]],
        _ => (0..n_dirs_2d)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / n_dirs_2d as f64;
                [t.cos(), t.sin()]
            })
            .collect(),
    }
}

/// Angular data of a classical symbol: per x-mode `nu`, the profile
/// `h_nu` sampled on the canonical direction grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalData {
    pub dirs: Vec<[f64; 2]>,
    pub profiles: BTreeMap<Freq, Vec<C64>>,
}

/// Principal symbol sampled on an x-grid times the direction grid.
#[derive(Clone, Debug)]
pub struct SampledSymbol {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub dirs: Vec<[f64; 2]>,
    /// values[x_index][dir_index]; for d = 2 the x index is row-major over
    /// (x_grid, y_grid).
    pub values: Vec<Vec<C64>>,
    pub order: HalfInt,
}

impl SampledSymbol {
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|row| row.iter().map(|v| v.norm()))
            .fold(0.0, f64::max)
    }
}

/// A filtered operator of half-integer order with an x-mode multiplier table
/// and, optionally, a dense matrix realization that overrides it.
#[derive(Clone, Debug)]
pub struct SymbolOperator {
    lattice: FrequencyLattice,
    order: HalfInt,
    modes: BTreeMap<Freq, Vec<C64>>,
    classical: Option<ClassicalData>,
    dense: Option<DMatrix<C64>>,
    truncated: bool,
}

impl SymbolOperator {
    fn check_band(lattice: FrequencyLattice, modes: &BTreeMap<Freq, Vec<C64>>) -> Result<()> {
        let m_x = modes
            .keys()
            .map(|k| k[0].abs().max(k[1].abs()))
            .max()
            .unwrap_or(0);
        if 2 * m_x > lattice.bandlimit() {
            return Err(CoreError::InvalidInput(format!(
                "x-mode band {m_x} exceeds N/2 = {}",
                lattice.bandlimit() / 2
            )));
        }
        Ok(())
    }

    pub fn from_mode_table(
        lattice: FrequencyLattice,
        order: HalfInt,
        modes: BTreeMap<Freq, Vec<C64>>,
    ) -> Result<Self> {
        for (k, tab) in &modes {
            if !lattice.contains(*k) && k[0].abs().max(k[1].abs()) > lattice.bandlimit() {
                return Err(CoreError::InvalidInput(format!("mode {k:?} out of range")));
            }
            if tab.len() != lattice.len() {
                return Err(CoreError::InvalidInput("multiplier table size".into()));
            }
        }
        Self::check_band(lattice, &modes)?;
        Ok(Self {
            lattice,
            order,
            modes,
            classical: None,
            dense: None,
            truncated: false,
        })
    }

    pub fn identity(lattice: FrequencyLattice) -> Self {
        Self::multiplication(lattice, &XModeProfile::constant(C64::new(1.0, 0.0)))
            .expect("constant profile is band-limited")
    }

    pub fn zero(lattice: FrequencyLattice) -> Self {
        Self {
            lattice,
            order: HalfInt::ZERO,
            modes: BTreeMap::new(),
            classical: None,
            dense: None,
            truncated: false,
        }
    }

    /// Pure Fourier multiplier (`M_x = 0`).
    pub fn fourier_multiplier(
        lattice: FrequencyLattice,
        order: HalfInt,
        f: impl Fn(Freq) -> C64,
    ) -> Self {
        let tab: Vec<C64> = lattice.freqs().map(f).collect();
        let mut modes = BTreeMap::new();
        modes.insert([0, 0], tab);
        Self {
            lattice,
            order,
            modes,
            classical: None,
            dense: None,
            truncated: false,
        }
    }

    /// `(1+Delta)^{m/2}`, diagonal with multiplier `(1+lambda)^{m/2}`;
    /// classical of order m with angular profile identically 1.
    pub fn one_plus_laplacian_pow(lattice: FrequencyLattice, m: HalfInt) -> Self {
        let mut op = Self::fourier_multiplier(lattice, m, |k| {
            let lam = (k[0] * k[0] + k[1] * k[1]) as f64;
            C64::new((1.0 + lam).powf(m.as_f64() / 2.0), 0.0)
        });
        let dirs = direction_grid(lattice.d(), DEFAULT_DIRS_2D);
        let mut profiles = BTreeMap::new();
        profiles.insert([0, 0], vec![C64::new(1.0, 0.0); dirs.len()]);
        op.classical = Some(ClassicalData { dirs, profiles });
        op
    }

    /// Multiplication operator by a band-limited function: order 0,
    /// direction-independent symbol `f(x)`.
    pub fn multiplication(lattice: FrequencyLattice, f: &XModeProfile) -> Result<Self> {
        let dirs = direction_grid(lattice.d(), DEFAULT_DIRS_2D);
        let mut modes = BTreeMap::new();
        let mut profiles = BTreeMap::new();
        for (nu, c) in f.modes() {
            modes.insert(*nu, vec![*c; lattice.len()]);
            profiles.insert(*nu, vec![*c; dirs.len()]);
        }
        Self::check_band(lattice, &modes)?;
        Ok(Self {
            lattice,
            order: HalfInt::ZERO,
            modes,
            classical: Some(ClassicalData { dirs, profiles }),
            dense: None,
            truncated: false,
        })
    }

    /// Classical operator from angular profiles: each x-mode `nu` carries a
    /// direction function `h_nu`, and the multiplier is
    /// `h_nu(xi/|xi|) (1+|xi|^2)^{m/2}` (direction average at `xi = 0`).
    pub fn classical(
        lattice: FrequencyLattice,
        order: HalfInt,
        angular: &BTreeMap<Freq, Box<dyn Fn([f64; 2]) -> C64>>,
    ) -> Result<Self> {
        let dirs = direction_grid(lattice.d(), DEFAULT_DIRS_2D);
        let mut modes = BTreeMap::new();
        let mut profiles = BTreeMap::new();
        for (nu, h) in angular {
            let avg: C64 =
                dirs.iter().map(|w| h(*w)).sum::<C64>() / C64::new(dirs.len() as f64, 0.0);
            let tab: Vec<C64> = lattice
                .freqs()
                .map(|k| {
                    let lam = (k[0] * k[0] + k[1] * k[1]) as f64;
                    let growth = (1.0 + lam).powf(order.as_f64() / 2.0);
                    if lam == 0.0 {
                        avg * growth
                    } else {
                        let r = lam.sqrt();
                        h([k[0] as f64 / r, k[1] as f64 / r]) * growth
                    }
                })
                .collect();
            modes.insert(*nu, tab);
            profiles.insert(*nu, dirs.iter().map(|w| h(*w)).collect());
        }
        Self::check_band(lattice, &modes)?;
        Ok(Self {
            lattice,
            order,
            modes,
            classical: Some(ClassicalData { dirs, profiles }),
            dense: None,
            truncated: false,
        })
    }

    /// Wrap a dense matrix as an operator; the matrix overrides the
    /// mode-table action.
    pub fn from_dense(lattice: FrequencyLattice, order: HalfInt, mat: DMatrix<C64>) -> Result<Self> {
        let n = lattice.len();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(CoreError::InvalidInput("dense matrix size".into()));
        }
        Ok(Self {
            lattice,
            order,
            modes: BTreeMap::new(),
            classical: None,
            dense: Some(mat),
            truncated: false,
        })
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.lattice
    }

    pub fn order(&self) -> HalfInt {
        self.order
    }

    pub fn is_classical(&self) -> bool {
        self.classical.is_some()
    }

    pub fn truncation_warning(&self) -> bool {
        self.truncated
    }

    pub fn set_classical(&mut self, data: ClassicalData) {
        self.classical = Some(data);
    }

    pub fn set_order(&mut self, order: HalfInt) {
        self.order = order;
    }

    pub fn x_band(&self) -> i64 {
        self.modes
            .keys()
            .map(|k| k[0].abs().max(k[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// `b_j = sum_nu c_nu(j - nu) a_{j - nu}`, out-of-lattice terms dropped.
    pub fn apply(&self, u: &SpectralDistribution) -> Result<SpectralDistribution> {
        if u.lattice() != self.lattice {
            return Err(CoreError::LatticeMismatch("op_apply".into()));
        }
        if let Some(mat) = &self.dense {
            let n = self.lattice.len();
            let mut out = vec![C64::new(0.0, 0.0); n];
            let a = u.coeffs();
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    s += mat[(j, k)] * a[k];
                }
                out[j] = s;
            }
            return SpectralDistribution::new(self.lattice, out);
        }
        let n = self.lattice.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        let a = u.coeffs();
        for (nu, tab) in &self.modes {
            for src in 0..n {
                let k = self.lattice.freq_at(src);
                let tgt = [k[0] + nu[0], k[1] + nu[1]];
                if let Some(tgt_idx) = self.lattice.index_of(tgt) {
                    out[tgt_idx] += tab[src] * a[src];
                }
            }
        }
        SpectralDistribution::new(self.lattice, out)
    }

    /// Dense matrix realization of the action.
    pub fn dense_matrix(&self) -> DMatrix<C64> {
        if let Some(mat) = &self.dense {
            return mat.clone();
        }
        let n = self.lattice.len();
        let mut mat = DMatrix::zeros(n, n);
        for (nu, tab) in &self.modes {
            for src in 0..n {
                let k = self.lattice.freq_at(src);
                let tgt = [k[0] + nu[0], k[1] + nu[1]];
                if let Some(tgt_idx) = self.lattice.index_of(tgt) {
                    mat[(tgt_idx, src)] += tab[src];
                }
            }
        }
        mat
    }

    /// Composition `self . other` at matrix level: declared order adds; the
    /// x-mode support grows to at most the sum of the bands, with a
    /// truncation warning recorded when that exceeds N/2.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(CoreError::LatticeMismatch("op_compose".into()));
        }
        let order = self.order + other.order;
        let truncated = self.truncated
            || other.truncated
            || 2 * (self.x_band() + other.x_band()) > self.lattice.bandlimit();
        if self.dense.is_some() || other.dense.is_some() {
            let mat = self.dense_matrix() * other.dense_matrix();
            let mut op = Self::from_dense(self.lattice, order, mat)?;
            op.truncated = truncated;
            return Ok(op);
        }
        let n = self.lattice.len();
        let mut modes: BTreeMap<Freq, Vec<C64>> = BTreeMap::new();
        for (nu1, c1) in &self.modes {
            for (nu2, c2) in &other.modes {
                let mu = [nu1[0] + nu2[0], nu1[1] + nu2[1]];
                let entry = modes
                    .entry(mu)
                    .or_insert_with(|| vec![C64::new(0.0, 0.0); n]);
                for src in 0..n {
                    let k = self.lattice.freq_at(src);
                    let mid = [k[0] + nu2[0], k[1] + nu2[1]];
                    if let Some(mid_idx) = self.lattice.index_of(mid) {
                        entry[src] += c1[mid_idx] * c2[src];
                    }
                }
            }
        }
        // prune shifts that never connect two lattice points
        modes.retain(|_, tab| tab.iter().any(|c| c.norm_sqr() > 0.0));
        // keep the classical flag for products of pure multipliers
        let classical = match (&self.classical, &other.classical) {
            (Some(a), Some(b))
                if self.x_band() == 0 && other.x_band() == 0 && a.dirs.len() == b.dirs.len() =>
            {
                let pa = &a.profiles[&[0, 0]];
                let pb = &b.profiles[&[0, 0]];
                let mut profiles = BTreeMap::new();
                profiles.insert(
                    [0, 0],
                    pa.iter().zip(pb).map(|(x, y)| x * y).collect::<Vec<_>>(),
                );
                Some(ClassicalData {
                    dirs: a.dirs.clone(),
                    profiles,
                })
            }
            _ => None,
        };
        Ok(Self {
            lattice: self.lattice,
            order,
            modes,
            classical,
            dense: None,
            truncated,
        })
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        if let Some(mat) = &mut out.dense {
            *mat = mat.map(|v| v * c);
        }
        for tab in out.modes.values_mut() {
            for v in tab.iter_mut() {
                *v *= c;
            }
        }
        if let Some(cd) = &mut out.classical {
            for p in cd.profiles.values_mut() {
                for v in p.iter_mut() {
                    *v *= c;
                }
            }
        }
        out
    }

    /// Sum of two operators; declared order is the max.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(CoreError::LatticeMismatch("op add".into()));
        }
        let order = self.order.max(other.order);
        if self.dense.is_some() || other.dense.is_some() {
            let mat = self.dense_matrix() + other.dense_matrix();
            return Self::from_dense(self.lattice, order, mat);
        }
        let n = self.lattice.len();
        let mut modes = self.modes.clone();
        for (nu, tab) in &other.modes {
            let entry = modes
                .entry(*nu)
                .or_insert_with(|| vec![C64::new(0.0, 0.0); n]);
            for (e, v) in entry.iter_mut().zip(tab) {
                *e += v;
            }
        }
        let mut op = Self {
            lattice: self.lattice,
            order,
            modes,
            classical: None,
            dense: None,
            truncated: self.truncated || other.truncated,
        };
        op.modes.retain(|_, tab| tab.iter().any(|c| c.norm_sqr() > 0.0));
        Ok(op)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Commutator `[self, other]`, order declared one unit lower than the
    /// sum (bracket drops the filtration order by one in this calculus).
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let mut c = self.compose(other)?.sub(&other.compose(self)?)?;
        c.order = self.order + other.order - HalfInt::from_int(1);
        Ok(c)
    }

    /// Adjoint via the dense realization.
    pub fn adjoint(&self) -> Self {
        let mat = self.dense_matrix().adjoint();
        let mut op = Self::from_dense(self.lattice, self.order, mat)
            .expect("adjoint preserves dimensions");
        op.truncated = self.truncated;
        op
    }

    /// Principal symbol `sigma(P)(x, w) = sum_nu h_nu(w) e^{i nu.x}` on the
    /// sampled cosphere (homogeneous normalization).
    pub fn principal_symbol_on(
        &self,
        x_grid: &[f64],
        y_grid: &[f64],
    ) -> Result<SampledSymbol> {
        let cd = self
            .classical
            .as_ref()
            .ok_or_else(|| CoreError::Unsupported("principal symbol of a non-classical operator".into()))?;
        let points: Vec<[f64; 2]> = match self.lattice.d() {
            1 => x_grid.iter().map(|&x| [x, 0.0]).collect(),
            _ => x_grid
                .iter()
                .flat_map(|&x| y_grid.iter().map(move |&y| [x, y]))
                .collect(),
        };
        let values = points
            .iter()
            .map(|x| {
                cd.dirs
                    .iter()
                    .enumerate()
                    .map(|(di, _)| {
                        cd.profiles
                            .iter()
                            .map(|(nu, h)| {
                                h[di]
                                    * C64::from_polar(
                                        1.0,
                                        nu[0] as f64 * x[0] + nu[1] as f64 * x[1],
                                    )
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(SampledSymbol {
            x_grid: x_grid.to_vec(),
            y_grid: y_grid.to_vec(),
            dirs: cd.dirs.clone(),
            values,
            order: self.order,
        })
    }

    /// Exact principal-symbol value at a phase-space point (the direction
    /// is matched to the nearest grid direction).
    pub fn symbol_at(&self, x: [f64; 2], w: [f64; 2]) -> Result<C64> {
        let cd = self.classical.as_ref().ok_or_else(|| {
            CoreError::Unsupported("principal symbol of a non-classical operator".into())
        })?;
        let di = cd
            .dirs
            .iter()
            .enumerate()
            .max_by(|a, b| {
                let da = a.1[0] * w[0] + a.1[1] * w[1];
                let db = b.1[0] * w[0] + b.1[1] * w[1];
                da.partial_cmp(&db).unwrap()
            })
            .map(|p| p.0)
            .unwrap();
        Ok(cd
            .profiles
            .iter()
            .map(|(nu, h)| {
                h[di] * C64::from_polar(1.0, nu[0] as f64 * x[0] + nu[1] as f64 * x[1])
            })
            .sum())
    }

    /// Principal symbol on the default grid (2N+1 points per axis).
    pub fn principal_symbol(&self) -> Result<SampledSymbol> {
        let m = (2 * self.lattice.bandlimit() + 1) as usize;
        let grid = FrequencyLattice::x_grid(m);
        let y = if self.lattice.d() == 2 { grid.clone() } else { vec![0.0] };
        self.principal_symbol_on(&grid, &y)
    }

    /// Characteristic set: sampled points where the cosphere-normalized
    /// symbol is below `tol` in modulus.
    pub fn char_set(&self, tol: f64) -> Result<Vec<(usize, usize)>> {
        let sym = self.principal_symbol()?;
        let mut out = Vec::new();
        for (xi, row) in sym.values.iter().enumerate() {
            for (di, v) in row.iter().enumerate() {
                if v.norm() < tol {
                    out.push((xi, di));
                }
            }
        }
        Ok(out)
    }
}

pub const DEFAULT_DIRS_2D: usize = 16;

impl SymbolOperator {
    /// Serialize through the dense realization.
    pub fn to_json(&self) -> crate::spectral::JsonContainer {
        let mat = self.dense_matrix();
        crate::spectral::JsonContainer {
            lattice: crate::spectral::LatticeSpec {
                d: self.lattice.d(),
                n: self.lattice.bandlimit(),
            },
            kind: "operator".to_string(),
            data: mat.row_iter().flat_map(|r| r.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()).collect(),
            order_twice: Some(self.order.twice()),
        }
    }

    pub fn from_json(j: &crate::spectral::JsonContainer) -> Result<Self> {
        if j.kind != "operator" {
            return Err(CoreError::InvalidInput(format!(
                "expected kind 'operator', got '{}'",
                j.kind
            )));
        }
        let lattice = FrequencyLattice::new(j.lattice.d, j.lattice.n)?;
        let n = lattice.len();
        if j.data.len() != n * n {
            return Err(CoreError::InvalidInput("operator data size mismatch".into()));
        }
        let mat = DMatrix::from_fn(n, n, |r, c| {
            let p = j.data[r * n + c];
            C64::new(p[0], p[1])
        });
        let order = HalfInt::from_twice(j.order_twice.unwrap_or(0));
        Self::from_dense(lattice, order, mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(n: i64) -> FrequencyLattice {
        FrequencyLattice::new(1, n).unwrap()
    }

    #[test]
    fn multiplier_identity_acts_trivially() {
        let lattice = lat(8);
        let id = SymbolOperator::identity(lattice);
        let u = SpectralDistribution::random_smooth(lattice, 5);
        let v = id.apply(&u).unwrap();
        for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn sqrt_laplacian_scales_single_mode() {
        let lattice = lat(8);
        let p = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(1));
        let u = SpectralDistribution::single_mode(lattice, [3, 0]).unwrap();
        let v = p.apply(&u).unwrap();
        let expect = (1.0 + 9.0f64).sqrt();
        assert!((v.coeff([3, 0]).re - expect).abs() < 1e-14);
    }

    #[test]
    fn multiplication_by_exponential_shifts_modes() {
        // M_{e^{ix}} shifts k -> k+1; oracle: pointwise product then
        // projection, i.e. exact coefficient shift with the top mode dropped.
        let lattice = lat(6);
        let mut modes = BTreeMap::new();
        modes.insert([1, 0], C64::new(1.0, 0.0));
        let f = XModeProfile::from_modes(modes);
        let op = SymbolOperator::multiplication(lattice, &f).unwrap();
        let u = SpectralDistribution::random_smooth(lattice, 2);
        let v = op.apply(&u).unwrap();
        for k in -6i64..=6 {
            let expect = if k == -6 {
                C64::new(0.0, 0.0)
            } else {
                u.coeff([k - 1, 0])
            };
            assert!((v.coeff([k, 0]) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn compose_identity_is_neutral() {
        let lattice = lat(8);
        let f = XModeProfile::cosine(1.0, 0.3, [1, 0]);
        let p = SymbolOperator::multiplication(lattice, &f).unwrap();
        let id = SymbolOperator::identity(lattice);
        let pq = p.compose(&id).unwrap();
        let u = SpectralDistribution::random_smooth(lattice, 3);
        let a = p.apply(&u).unwrap();
        let b = pq.apply(&u).unwrap();
        assert!(a.sub(&b).unwrap().sobolev_norm(0.0) < 1e-13);
    }

    #[test]
    fn diagonal_multipliers_compose_to_product() {
        let lattice = lat(8);
        let h = HalfInt::from_twice(1); // 1/2
        let p = SymbolOperator::one_plus_laplacian_pow(lattice, h);
        let sq = p.compose(&p).unwrap();
        assert_eq!(sq.order(), HalfInt::from_int(1));
        let direct = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(1));
        let u = SpectralDistribution::random_smooth(lattice, 4);
        let d = sq.apply(&u).unwrap().sub(&direct.apply(&u).unwrap()).unwrap();
        assert!(d.sobolev_norm(0.0) < 1e-12);
    }

    #[test]
    fn compose_matches_dense_product() {
        let lattice = lat(8);
        let f = XModeProfile::cosine(0.0, 1.0, [2, 0]);
        let p = SymbolOperator::multiplication(lattice, &f).unwrap();
        let q = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(2));
        let pq = p.compose(&q).unwrap();
        let dense_prod = p.dense_matrix() * q.dense_matrix();
        let diff = (pq.dense_matrix() - dense_prod).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn compose_is_associative_at_matrix_level() {
        let lattice = lat(10);
        let a = SymbolOperator::multiplication(lattice, &XModeProfile::cosine(1.0, 0.5, [1, 0])).unwrap();
        let b = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_twice(1));
        let c = SymbolOperator::multiplication(lattice, &XModeProfile::sine(1.0, [2, 0])).unwrap();
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        assert!(!left.truncation_warning());
        let diff = (left.dense_matrix() - right.dense_matrix())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn order_adds_under_composition() {
        let lattice = lat(8);
        let p = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_twice(3));
        let q = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(1));
        assert_eq!(p.compose(&q).unwrap().order(), HalfInt::from_twice(5));
    }

    #[test]
    fn truncation_warning_on_wide_bands() {
        let lattice = lat(8);
        let wide = XModeProfile::cos_power_bump(2, 0.0);
        let p = SymbolOperator::multiplication(lattice, &wide).unwrap();
        let pq = p.compose(&p).unwrap();
        assert!(!pq.truncation_warning());
        let pqq = pq.compose(&p).unwrap();
        assert!(pqq.truncation_warning());
    }

    #[test]
    fn principal_symbol_of_sqrt_laplacian_is_one() {
        let lattice = lat(8);
        let p = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(1));
        let sym = p.principal_symbol().unwrap();
        for row in &sym.values {
            for v in row {
                assert!((v - C64::new(1.0, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn principal_symbol_of_multiplication_is_the_function() {
        let lattice = lat(8);
        let f = XModeProfile::cosine(1.0, 0.3, [1, 0]);
        let p = SymbolOperator::multiplication(lattice, &f).unwrap();
        let sym = p.principal_symbol().unwrap();
        for (xi, &x) in sym.x_grid.iter().enumerate() {
            let expect = 1.0 + 0.3 * x.cos();
            for v in &sym.values[xi] {
                assert!((v.re - expect).abs() < 1e-12);
                assert!(v.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn principal_symbol_requires_classical() {
        let lattice = lat(8);
        let p = SymbolOperator::fourier_multiplier(lattice, HalfInt::ZERO, |_| C64::new(1.0, 0.0));
        assert!(matches!(
            p.principal_symbol(),
            Err(CoreError::Unsupported(_))
        ));
    }

    #[test]
    fn char_set_of_elliptic_is_empty_of_zero_is_full() {
        let lattice = lat(8);
        let p = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::ZERO);
        assert!(p.char_set(0.5).unwrap().is_empty());

        let z = SymbolOperator::multiplication(lattice, &XModeProfile::constant(C64::new(0.0, 0.0))).unwrap();
        let full = z.char_set(0.5).unwrap();
        assert_eq!(full.len(), 17 * 2);
    }

    #[test]
    fn cos_power_bump_peaks_at_center() {
        let b = XModeProfile::cos_power_bump(8, 1.0);
        assert!((b.eval([1.0, 0.0]).re - 1.0).abs() < 1e-12);
        assert!(b.eval([1.0 + std::f64::consts::PI, 0.0]).norm() < 1e-9);
        assert_eq!(b.band(), 8);
    }
}
