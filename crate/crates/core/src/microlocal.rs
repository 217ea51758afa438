//! Singular supports, wavefront sets and microlocal ellipticity computed
//! through a dictionary of order-0 cutoff operators.
//!
//! A dictionary operator is the quantization of `chi_x(y) psi_w(xi)`: a
//! band-limited spatial bump times a direction window with a radial taper
//! near `xi = 0`. A phase-space point is excluded from the wavefront set
//! when some dictionary operator covering it maps `u` to a piece the decay
//! oracle accepts; scores aggregate this over the bump scales.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{CoreError, Result};
use crate::lattice::{FrequencyLattice, HalfInt};
use crate::spectral::{band_maxima_of, SpectralDistribution};
use crate::symbol::{direction_grid, ClassicalData, SymbolOperator, XModeProfile};
use crate::tameness::{band_slope, OracleConfig};

/// Detector configuration: bump scales, direction windows and the oracle
/// thresholds used on localized pieces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Spatial centers per axis (0 = automatic: 32 for d=1, 2N+1 for d=2).
    pub centers: usize,
    /// Direction samples on the circle for d = 2.
    pub n_dirs_2d: usize,
    /// Base spatial bump width sigma (0.0 = automatic, 12/N).
    pub width: f64,
    /// Multipliers applied to the base width; one detector pass per scale.
    pub scales: Vec<f64>,
    /// Angular window full width at half maximum (d = 2).
    pub alpha: f64,
    /// Radial taper scale: direction windows vanish for |xi| below this.
    pub radial_taper: f64,
    /// Tolerated fraction of bump mass outside the N/4 frequency budget.
    pub leakage_tol: f64,
    /// Score threshold for reporting detected sets.
    pub threshold: f64,
    /// Decay oracle applied to localized pieces.
    pub oracle: OracleConfig,
    /// Localization gate: a piece is a candidate only if it holds at least
    /// this fraction of the best center's high-frequency energy.
    pub energy_rel: f64,
    /// Smoothness gate: directions whose high-frequency amplitude is below
    /// this fraction of the total are skipped entirely.
    pub energy_dust: f64,
}

impl DetectorConfig {
    pub fn for_lattice(lattice: FrequencyLattice) -> Self {
        let n = lattice.bandlimit();
        Self {
            centers: 0,
            n_dirs_2d: 16,
            width: 12.0 / n as f64,
            scales: vec![1.0, 1.5, 2.25],
            alpha: 0.45,
            radial_taper: (n as f64 / 8.0).max(3.0),
            leakage_tol: 5e-3,
            threshold: 0.5,
            oracle: OracleConfig::default(),
            energy_rel: 0.05,
            energy_dust: 1e-6,
        }
    }

    fn centers_for(&self, lattice: FrequencyLattice) -> usize {
        if self.centers != 0 {
            return self.centers;
        }
        match lattice.d() {
            // grid cells track the bump width (which scales like 1/N)
            1 => (lattice.bandlimit() as usize / 4).clamp(8, 32),
            _ => 2 * lattice.bandlimit() as usize + 1,
        }
    }
}

/// Family of order-0 cutoff operators: spatial bumps on a center grid at
/// several scales, crossed with direction windows.
#[derive(Debug)]
pub struct CutoffDictionary {
    lattice: FrequencyLattice,
    pub cfg: DetectorConfig,
    pub x_axis: Vec<f64>,
    pub dirs: Vec<[f64; 2]>,
    /// Per scale: half-band M and the frequency envelope table env[|nu|].
    bump_env: Vec<(i64, Vec<f64>)>,
    /// Per direction: the multiplier table over the lattice.
    tapers: Vec<Vec<f64>>,
}

fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * (3.0 - 2.0 * t)
    }
}

impl CutoffDictionary {
    pub fn build(lattice: FrequencyLattice, cfg: DetectorConfig) -> Result<Self> {
        let n = lattice.bandlimit();
        let budget = n / 4;
        let base_sigma = if cfg.width > 0.0 {
            cfg.width
        } else {
            12.0 / n as f64
        };
        let mut bump_env = Vec::new();
        for scale in &cfg.scales {
            let sigma_x = base_sigma * scale;
            let sigma_f = 1.0 / sigma_x;
            // mass of the Gaussian envelope beyond the frequency budget
            let full: f64 = (-(3 * budget)..=(3 * budget))
                .map(|v| (-((v * v) as f64) / (2.0 * sigma_f * sigma_f)).exp())
                .sum();
            let kept: f64 = (-budget..=budget)
                .map(|v| (-((v * v) as f64) / (2.0 * sigma_f * sigma_f)).exp())
                .sum();
            let leakage = 1.0 - kept / full;
            if leakage > cfg.leakage_tol {
                return Err(CoreError::Leakage {
                    measured: leakage,
                    tolerance: cfg.leakage_tol,
                });
            }
            let m = (3.0 * sigma_f).ceil().min(budget as f64) as i64;
            let env: Vec<f64> = (0..=m)
                .map(|v| (-((v * v) as f64) / (2.0 * sigma_f * sigma_f)).exp())
                .collect();
            bump_env.push((m, env));
        }
        let dirs = direction_grid(lattice.d(), cfg.n_dirs_2d);
        let tapers = dirs
            .iter()
            .map(|w| Self::taper_table(lattice, &cfg, *w))
            .collect();
        let centers = cfg.centers_for(lattice);
        let x_axis = FrequencyLattice::x_grid(centers);
        let dict = Self {
            lattice,
            cfg,
            x_axis,
            dirs,
            bump_env,
            tapers,
        };
        dict.check_covering()?;
        Ok(dict)
    }

    fn angular_power(alpha: f64) -> f64 {
        (0.5f64).ln() / (((1.0 + (alpha / 2.0).cos()) / 2.0).ln())
    }

    fn taper_table(lattice: FrequencyLattice, cfg: &DetectorConfig, w: [f64; 2]) -> Vec<f64> {
        let q = Self::angular_power(cfg.alpha);
        (0..lattice.len())
            .map(|i| {
                let k = lattice.freq_at(i);
                let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                if r == 0.0 {
                    return 0.0;
                }
                let radial = smoothstep(r / cfg.radial_taper);
                match lattice.d() {
                    1 => {
                        if (k[0] as f64) * w[0] > 0.0 {
                            radial
                        } else {
                            0.0
                        }
                    }
                    _ => {
                        let cos_angle =
                            (k[0] as f64 * w[0] + k[1] as f64 * w[1]) / r;
                        let g = ((1.0 + cos_angle) / 2.0).max(0.0).powf(q);
                        radial * g
                    }
                }
            })
            .collect()
    }

    /// Angular profile value of the direction window at a unit direction.
    pub fn window_at(&self, dir_idx: usize, w: [f64; 2]) -> f64 {
        let c = self.dirs[dir_idx];
        match self.lattice.d() {
            1 => {
                if c[0] * w[0] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => {
                let cosa = (c[0] * w[0] + c[1] * w[1]).clamp(-1.0, 1.0);
                ((1.0 + cosa) / 2.0).powf(Self::angular_power(self.cfg.alpha))
            }
        }
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.lattice
    }

    pub fn n_scales(&self) -> usize {
        self.bump_env.len()
    }

    pub fn n_centers(&self) -> usize {
        match self.lattice.d() {
            1 => self.x_axis.len(),
            _ => self.x_axis.len() * self.x_axis.len(),
        }
    }

    pub fn n_dirs(&self) -> usize {
        self.dirs.len()
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        match self.lattice.d() {
            1 => [self.x_axis[idx], 0.0],
            _ => {
                let m = self.x_axis.len();
                [self.x_axis[idx / m], self.x_axis[idx % m]]
            }
        }
    }

    /// Spatial bump value at offset `dx` from the center, at scale `s`.
    fn bump_value(&self, s: usize, dx: [f64; 2]) -> f64 {
        let (m, env) = &self.bump_env[s];
        let norm: f64 = env[0] + 2.0 * env[1..].iter().sum::<f64>();
        let axis = |t: f64| -> f64 {
            let mut acc = env[0];
            for v in 1..=*m {
                acc += 2.0 * env[v as usize] * ((v as f64) * t).cos();
            }
            acc / norm
        };
        match self.lattice.d() {
            1 => axis(dx[0]),
            _ => axis(dx[0]) * axis(dx[1]),
        }
    }

    fn check_covering(&self) -> Result<()> {
        // at every sampled point some dictionary symbol has modulus >= 1/2;
        // bumps peak at 1 on their centers and direction windows peak at 1,
        // so it suffices to check spatial coverage at the sharpest scale
        // and angular coverage at window midpoints.
        let fine = FrequencyLattice::x_grid(2 * self.x_axis.len());
        let spacing = self.x_axis[1] - self.x_axis[0];
        for &x in &fine {
            let best = self
                .x_axis
                .iter()
                .map(|&c| {
                    let mut dx = (x - c).rem_euclid(std::f64::consts::TAU);
                    if dx > std::f64::consts::PI {
                        dx -= std::f64::consts::TAU;
                    }
                    self.bump_value(self.n_scales() - 1, [dx, 0.0])
                })
                .fold(0.0, f64::max);
            if best < 0.5 {
                return Err(CoreError::InvalidConfig(format!(
                    "covering fails at x = {x:.3} (best bump {best:.3}, spacing {spacing:.3})"
                )));
            }
        }
        if self.lattice.d() == 2 {
            let half = std::f64::consts::PI / self.dirs.len() as f64;
            let g = ((1.0 + half.cos()) / 2.0).powf(Self::angular_power(self.cfg.alpha));
            if g < 0.5 {
                return Err(CoreError::InvalidConfig(format!(
                    "angular covering fails: window value {g:.3} at half spacing"
                )));
            }
        }
        Ok(())
    }

    /// The dictionary operator `Op(chi_center psi_dir)` at a scale, as a
    /// classical order-0 operator.
    pub fn operator(&self, scale: usize, center_idx: usize, dir_idx: usize) -> SymbolOperator {
        let c = self.center(center_idx);
        let (m, env) = &self.bump_env[scale];
        let norm_1d: f64 = env[0] + 2.0 * env[1..].iter().sum::<f64>();
        let taper = &self.tapers[dir_idx];
        let mut modes = BTreeMap::new();
        let mut profiles = BTreeMap::new();
        let push = |modes: &mut BTreeMap<_, _>, profiles: &mut BTreeMap<_, _>, nu: [i64; 2], coeff: f64| {
            let phase = -(nu[0] as f64 * c[0] + nu[1] as f64 * c[1]);
            let amp = C64::from_polar(coeff, phase);
            let tab: Vec<C64> = taper.iter().map(|t| amp * t).collect();
            modes.insert(nu, tab);
            let prof: Vec<C64> = self
                .dirs
                .iter()
                .map(|w| amp * self.window_at(dir_idx, *w))
                .collect();
            profiles.insert(nu, prof);
        };
        match self.lattice.d() {
            1 => {
                for nu in -m..=*m {
                    push(
                        &mut modes,
                        &mut profiles,
                        [nu, 0],
                        env[nu.unsigned_abs() as usize] / norm_1d,
                    );
                }
            }
            _ => {
                for nx in -m..=*m {
                    for ny in -m..=*m {
                        let coeff = env[nx.unsigned_abs() as usize]
                            * env[ny.unsigned_abs() as usize]
                            / (norm_1d * norm_1d);
                        push(&mut modes, &mut profiles, [nx, ny], coeff);
                    }
                }
            }
        }
        let mut op = SymbolOperator::from_mode_table(self.lattice, HalfInt::ZERO, modes)
            .expect("dictionary modes stay within the band budget");
        op.set_classical(ClassicalData {
            dirs: self.dirs.clone(),
            profiles,
        });
        op
    }

    /// Convolve `v` (a coefficient table) with the bump at a center.
    fn apply_bump(&self, scale: usize, center_idx: usize, v: &[C64]) -> Vec<C64> {
        let c = self.center(center_idx);
        let (m, env) = &self.bump_env[scale];
        let norm_1d: f64 = env[0] + 2.0 * env[1..].iter().sum::<f64>();
        let lat = self.lattice;
        let n = lat.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        match lat.d() {
            1 => {
                for src in 0..n {
                    if v[src].norm_sqr() == 0.0 {
                        continue;
                    }
                    let k = lat.freq_at(src);
                    for nu in -m..=*m {
                        if let Some(t) = lat.index_of([k[0] + nu, 0]) {
                            let coeff = env[nu.unsigned_abs() as usize] / norm_1d;
                            let phase = -(nu as f64) * c[0];
                            out[t] += v[src] * C64::from_polar(coeff, phase);
                        }
                    }
                }
            }
            _ => {
                let norm2 = norm_1d * norm_1d;
                for src in 0..n {
                    if v[src].norm_sqr() == 0.0 {
                        continue;
                    }
                    let k = lat.freq_at(src);
                    for nx in -m..=*m {
                        for ny in -m..=*m {
                            if let Some(t) = lat.index_of([k[0] + nx, k[1] + ny]) {
                                let coeff = env[nx.unsigned_abs() as usize]
                                    * env[ny.unsigned_abs() as usize]
                                    / norm2;
                                let phase = -(nx as f64 * c[0] + ny as f64 * c[1]);
                                out[t] += v[src] * C64::from_polar(coeff, phase);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Scored spatial singular set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularSupport {
    pub scores: Vec<f64>,
    pub threshold: f64,
    pub x_axis: Vec<f64>,
    pub d: u8,
}

impl SingularSupport {
    pub fn detected(&self) -> Vec<usize> {
        self.scores
            .iter()
            .enumerate()
            .filter(|(_, s)| **s >= self.threshold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,score\n");
        let m = self.x_axis.len();
        for (i, sc) in self.scores.iter().enumerate() {
            let x = if self.d == 1 {
                format!("{:.6}", self.x_axis[i])
            } else {
                format!("{:.6}|{:.6}", self.x_axis[i / m], self.x_axis[i % m])
            };
            s.push_str(&format!("{x},{sc:.4}\n"));
        }
        s
    }
}

/// Scored phase-space singular set with the certifying witness list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WavefrontSet {
    /// scores[center][dir]
    pub scores: Vec<Vec<f64>>,
    pub threshold: f64,
    pub x_axis: Vec<f64>,
    pub dirs: Vec<[f64; 2]>,
    pub d: u8,
    /// Dictionary operators (scale, center, dir) whose piece passed the
    /// oracle, in lexicographic order.
    pub witnesses: Vec<(usize, usize, usize)>,
}

impl WavefrontSet {
    pub fn detected(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (ci, row) in self.scores.iter().enumerate() {
            for (di, s) in row.iter().enumerate() {
                if *s >= self.threshold {
                    out.push((ci, di));
                }
            }
        }
        out
    }

    pub fn detected_dirs(&self) -> Vec<usize> {
        let mut dirs: Vec<usize> = self.detected().iter().map(|p| p.1).collect();
        dirs.sort_unstable();
        dirs.dedup();
        dirs
    }

    /// Heatmap CSV: first column x, one column per direction.
    pub fn to_csv(&self) -> String {
        let labels: Vec<String> = if self.d == 1 {
            vec!["+".to_string(), "-".to_string()]
        } else {
            self.dirs
                .iter()
                .map(|w| format!("({:.3};{:.3})", w[0], w[1]))
                .collect()
        };
        let mut s = String::from("x");
        for l in &labels {
            s.push(',');
            s.push_str(l);
        }
        s.push('\n');
        let m = self.x_axis.len();
        for (ci, row) in self.scores.iter().enumerate() {
            let x = if self.d == 1 {
                format!("{:.6}", self.x_axis[ci])
            } else {
                format!("{:.6}|{:.6}", self.x_axis[ci / m], self.x_axis[ci % m])
            };
            s.push_str(&x);
            for v in row {
                s.push_str(&format!(",{v:.4}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Energy in the window `N/2 <= |k| < 3N/4`. The window starts above the
/// dictionary band budget (bumps cannot manufacture content there from
/// low frequencies) and stops below the top quarter, where unitary
/// truncation reflects outgoing frequency flux and plants artifacts.
fn high_band_energy(lattice: FrequencyLattice, v: &[C64]) -> f64 {
    let lo = (lattice.bandlimit() / 2) as f64;
    let hi = (3 * lattice.bandlimit()) as f64 / 4.0;
    let mut e = 0.0;
    for (i, c) in v.iter().enumerate() {
        let k = lattice.freq_at(i);
        let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        if r >= lo && r < hi {
            e += c.norm_sqr();
        }
    }
    e
}

/// Does the localized piece fail the decay oracle? `None` marks pieces the
/// energy gates deem negligible (treated as passing).
fn piece_fails(lattice: FrequencyLattice, piece: &[C64], cfg: &DetectorConfig) -> bool {
    let bands = band_maxima_of(&lattice, |i| piece[i].norm());
    match band_slope(&bands, &cfg.oracle) {
        None => false,
        Some(slope) => slope > -cfg.oracle.s_max,
    }
}

/// Run the multi-scale detector in one direction channel (or undirected
/// when `taper` is `None`); returns per-center fail fractions.
/// `peer_high` carries the strongest high-band energy across all channels
/// so that windows merely brushing a neighboring cone are skipped.
fn channel_scores(
    dict: &CutoffDictionary,
    u: &SpectralDistribution,
    taper: Option<usize>,
    peer_high: f64,
) -> Vec<f64> {
    let lat = dict.lattice();
    let filtered: Vec<C64> = match taper {
        None => u.coeffs().to_vec(),
        Some(di) => u
            .coeffs()
            .iter()
            .zip(&dict.tapers[di])
            .map(|(c, t)| c * *t)
            .collect(),
    };
    let total: f64 = u.coeffs().iter().map(|c| c.norm_sqr()).sum();
    let channel_high = high_band_energy(lat, &filtered);
    let n_centers = dict.n_centers();
    // smoothness gate: nothing to localize in this channel
    if channel_high <= dict.cfg.energy_dust * dict.cfg.energy_dust * total.max(1e-300) {
        return vec![0.0; n_centers];
    }
    // cross-channel gate: angular leakage from a neighboring cone
    if channel_high <= dict.cfg.energy_rel * peer_high {
        return vec![0.0; n_centers];
    }
    let mut fails = vec![0.0f64; n_centers];
    for s in 0..dict.n_scales() {
        let pieces: Vec<(f64, Vec<C64>)> = (0..n_centers)
            .into_par_iter()
            .map(|ci| {
                let piece = dict.apply_bump(s, ci, &filtered);
                (high_band_energy(lat, &piece), piece)
            })
            .collect();
        let best = pieces.iter().map(|p| p.0).fold(0.0, f64::max);
        if best == 0.0 {
            continue;
        }
        let flags: Vec<bool> = pieces
            .par_iter()
            .map(|(e_hi, piece)| {
                *e_hi >= dict.cfg.energy_rel * best && piece_fails(lat, piece, &dict.cfg)
            })
            .collect();
        for (ci, f) in flags.iter().enumerate() {
            if *f {
                fails[ci] += 1.0;
            }
        }
    }
    let ns = dict.n_scales() as f64;
    fails.iter_mut().for_each(|f| *f /= ns);
    fails
}

/// Spatial singular support: multi-scale bump localization without a
/// direction filter.
pub fn singular_support(
    u: &SpectralDistribution,
    dict: &CutoffDictionary,
    threshold: f64,
) -> Result<SingularSupport> {
    if u.lattice() != dict.lattice() {
        return Err(CoreError::LatticeMismatch("singular_support".into()));
    }
    let scores = channel_scores(dict, u, None, 0.0);
    Ok(SingularSupport {
        scores,
        threshold,
        x_axis: dict.x_axis.clone(),
        d: dict.lattice().d(),
    })
}

/// Wavefront detector: a phase-space point is excluded when some covering
/// dictionary operator produces an oracle-passing piece; those operators
/// are the recorded witnesses.
pub fn wavefront(
    u: &SpectralDistribution,
    dict: &CutoffDictionary,
    threshold: f64,
) -> Result<WavefrontSet> {
    if u.lattice() != dict.lattice() {
        return Err(CoreError::LatticeMismatch("wavefront".into()));
    }
    let n_dirs = dict.n_dirs();
    let mut scores = vec![vec![0.0f64; n_dirs]; dict.n_centers()];
    let mut witnesses = Vec::new();
    // strongest directional high-band energy, for the cross-channel gate
    let peer_high = (0..n_dirs)
        .map(|di| {
            let filtered: Vec<C64> = u
                .coeffs()
                .iter()
                .zip(&dict.tapers[di])
                .map(|(c, t)| c * *t)
                .collect();
            high_band_energy(dict.lattice(), &filtered)
        })
        .fold(0.0, f64::max);
    for di in 0..n_dirs {
        let per_center = channel_scores(dict, u, Some(di), peer_high);
        for (ci, sc) in per_center.iter().enumerate() {
            scores[ci][di] = *sc;
            if *sc < threshold {
                for s in 0..dict.n_scales() {
                    witnesses.push((s, ci, di));
                }
            }
        }
    }
    witnesses.sort_unstable();
    Ok(WavefrontSet {
        scores,
        threshold,
        x_axis: dict.x_axis.clone(),
        dirs: dict.dirs.clone(),
        d: dict.lattice().d(),
        witnesses,
    })
}

/// Microlocally elliptic set of a classical operator: sampled points where
/// the symbol stays above `tol` times its maximum.
pub fn microlocal_elliptic_set(
    p: &SymbolOperator,
    tol: f64,
) -> Result<Vec<(usize, usize)>> {
    let sym = p.principal_symbol()?;
    let max = sym.max_abs();
    if max == 0.0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (xi, row) in sym.values.iter().enumerate() {
        for (di, v) in row.iter().enumerate() {
            if v.norm() >= tol * max {
                out.push((xi, di));
            }
        }
    }
    Ok(out)
}

/// Coefficient-level embedding of a 1D distribution as a function constant
/// in the second variable: `A_{(k,0)} = a_k`.
pub fn embed_constant_in_y(
    u: &SpectralDistribution,
    lattice2: FrequencyLattice,
) -> Result<SpectralDistribution> {
    if u.lattice().d() != 1 || lattice2.d() != 2 {
        return Err(CoreError::InvalidInput(
            "embedding expects a 1D input and a 2D target".into(),
        ));
    }
    if lattice2.bandlimit() < u.lattice().bandlimit() {
        return Err(CoreError::InvalidInput(
            "2D lattice must be at least as wide".into(),
        ));
    }
    SpectralDistribution::from_mode_fn(lattice2, |k| {
        if k[1] == 0 {
            u.coeff([k[0], 0])
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Torus distance between grid indices, in cells.
fn cell_dist(a: usize, b: usize, m: usize) -> usize {
    let d = (a as i64 - b as i64).rem_euclid(m as i64) as usize;
    d.min(m - d)
}

/// Distance between phase-space grid points, in cells: the max of spatial
/// and direction separation (direction mismatch on the two-point grid is a
/// hard mismatch).
fn point_dist(a: (usize, usize), b: (usize, usize), m: usize, n_dirs: usize, d: u8) -> usize {
    let spatial = match d {
        1 => cell_dist(a.0, b.0, m),
        _ => {
            let (ax, ay) = (a.0 / m, a.0 % m);
            let (bx, by) = (b.0 / m, b.0 % m);
            cell_dist(ax, bx, m).max(cell_dist(ay, by, m))
        }
    };
    let dir = if n_dirs == 2 {
        if a.1 == b.1 {
            0
        } else {
            usize::MAX / 4
        }
    } else {
        cell_dist(a.1, b.1, n_dirs)
    };
    spatial.max(dir)
}

/// Symmetric Hausdorff distance between detected sets, in grid cells.
pub fn hausdorff_cells(
    a: &[(usize, usize)],
    b: &[(usize, usize)],
    m: usize,
    n_dirs: usize,
    d: u8,
) -> usize {
    if a.is_empty() && b.is_empty() {
        return 0;
    }
    if a.is_empty() || b.is_empty() {
        return usize::MAX / 4;
    }
    let one_side = |s: &[(usize, usize)], t: &[(usize, usize)]| {
        s.iter()
            .map(|p| {
                t.iter()
                    .map(|q| point_dist(*p, *q, m, n_dirs, d))
                    .min()
                    .unwrap()
            })
            .max()
            .unwrap()
    };
    one_side(a, b).max(one_side(b, a))
}

/// Result of comparing a detected 2D wavefront against the prediction
/// carried over from a 1D detection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PullbackCheck {
    pub pass: bool,
    pub distance_cells: usize,
    pub wf_1d: Vec<(usize, usize)>,
    pub wf_2d: Vec<(usize, usize)>,
}

/// Wavefront functoriality under the projection `T^2 -> T^1`: the pullback
/// `u(x) (x) 1` must have wavefront `{(x, y; +-(1,0)) : (x, +-) in WF(u)}`,
/// detected sets matching within one grid cell.
pub fn projection_pullback_wf_check(
    u: &SpectralDistribution,
    lattice2: FrequencyLattice,
    cfg1: &DetectorConfig,
    cfg2: &DetectorConfig,
) -> Result<PullbackCheck> {
    let dict1 = CutoffDictionary::build(u.lattice(), cfg1.clone())?;
    let wf1 = wavefront(u, &dict1, cfg1.threshold)?;
    let big = embed_constant_in_y(u, lattice2)?;
    let dict2 = CutoffDictionary::build(lattice2, cfg2.clone())?;
    let wf2 = wavefront(&big, &dict2, cfg2.threshold)?;

    let m2 = dict2.x_axis.len();
    let n_dirs2 = dict2.n_dirs();
    // direction indices closest to +(1,0) and -(1,0)
    let plus = 0usize;
    let minus = n_dirs2 / 2;
    // predicted set: detected 1D x-cells cross all y, with mapped direction
    let mut predicted = Vec::new();
    for (ci, di) in wf1.detected() {
        // map the 1D center onto the nearest 2D x-cell
        let x = dict1.x_axis[ci];
        let xi2 = ((x / std::f64::consts::TAU * m2 as f64).round() as usize) % m2;
        let d2 = if di == 0 { plus } else { minus };
        for y in 0..m2 {
            predicted.push((xi2 * m2 + y, d2));
        }
    }
    let detected = wf2.detected();
    let distance = hausdorff_cells(&predicted, &detected, m2, n_dirs2, 2);
    Ok(PullbackCheck {
        pass: distance <= 1,
        distance_cells: distance,
        wf_1d: wf1.detected(),
        wf_2d: detected,
    })
}

/// The strict-information check: `f` vanishing on the detected singular
/// support while `f u` still fails the decay oracle. Vanishing is tested
/// on the score-maximal cells (the detector's location estimate; the
/// surrounding sub-peak cells are bump-width dilation).
pub fn strict_information_check(
    u: &SpectralDistribution,
    f: &XModeProfile,
    dict: &CutoffDictionary,
    vanish_tol: f64,
) -> Result<bool> {
    let ss = singular_support(u, dict, dict.cfg.threshold)?;
    let detected = ss.detected();
    if detected.is_empty() {
        return Ok(false);
    }
    let peak = detected
        .iter()
        .map(|&ci| ss.scores[ci])
        .fold(0.0, f64::max);
    let vanishes = detected
        .iter()
        .filter(|&&ci| ss.scores[ci] >= peak - 1e-9)
        .all(|&ci| {
            let c = dict.center(ci);
            f.eval(c).norm() < vanish_tol
        });
    if !vanishes {
        return Ok(false);
    }
    let mf = SymbolOperator::multiplication(dict.lattice(), f)?;
    let fu = mf.apply(u)?;
    let fails = !crate::tameness::coefficient_regularity_oracle(&fu, &dict.cfg.oracle)?;
    Ok(fails)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(1, 128).unwrap()
    }

    fn dict() -> CutoffDictionary {
        let lattice = lat();
        CutoffDictionary::build(lattice, DetectorConfig::for_lattice(lattice)).unwrap()
    }

    #[test]
    fn dictionary_counts_and_covering() {
        let d = dict();
        assert_eq!(d.n_dirs(), 2);
        assert_eq!(d.n_centers(), 32);
        // 2 * |x-grid| operators per scale for d = 1
        assert_eq!(d.n_centers() * d.n_dirs(), 64);
    }

    #[test]
    fn too_narrow_width_is_rejected() {
        let lattice = FrequencyLattice::new(1, 16).unwrap();
        let mut cfg = DetectorConfig::for_lattice(lattice);
        cfg.width = 0.05; // needs band far beyond N/4 = 4
        match CutoffDictionary::build(lattice, cfg) {
            Err(CoreError::Leakage { measured, .. }) => assert!(measured > 1e-6),
            other => panic!("expected leakage error, got {other:?}"),
        }
    }

    #[test]
    fn dictionary_operators_are_classical_order_zero() {
        let d = dict();
        let op = d.operator(0, 3, 0);
        assert!(op.is_classical());
        assert_eq!(op.order(), HalfInt::ZERO);
        // symbol near the center and matching direction is large
        let sym = op.principal_symbol().unwrap();
        let c = d.center(3);
        let xi = sym
            .x_grid
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - c[0]).abs().partial_cmp(&(b.1 - c[0]).abs()).unwrap()
            })
            .unwrap()
            .0;
        assert!(sym.values[xi][0].norm() > 0.9);
        assert!(sym.values[xi][1].norm() < 1e-12);
    }

    #[test]
    fn smooth_input_has_empty_sets() {
        let u = SpectralDistribution::gaussian_decay(lat(), 4.0);
        let d = dict();
        let ss = singular_support(&u, &d, 0.5).unwrap();
        assert!(ss.detected().is_empty());
        let wf = wavefront(&u, &d, 0.5).unwrap();
        assert!(wf.detected().is_empty());
    }

    #[test]
    fn delta_detected_within_one_cell() {
        let x0 = 1.5f64;
        let u = SpectralDistribution::delta(lat(), [x0, 0.0]);
        let d = dict();
        let ss = singular_support(&u, &d, 0.5).unwrap();
        let detected = ss.detected();
        assert!(!detected.is_empty());
        let m = d.x_axis.len();
        let target = ((x0 / std::f64::consts::TAU * m as f64).round() as usize) % m;
        for ci in &detected {
            assert!(cell_dist(*ci, target, m) <= 1, "spurious point {ci}");
        }
        assert!(detected.iter().any(|ci| cell_dist(*ci, target, m) <= 1));
    }

    #[test]
    fn sawtooth_detected_at_origin() {
        let u = SpectralDistribution::sawtooth(lat());
        let d = dict();
        let ss = singular_support(&u, &d, 0.5).unwrap();
        let detected = ss.detected();
        assert!(!detected.is_empty());
        let m = d.x_axis.len();
        for ci in &detected {
            assert!(cell_dist(*ci, 0, m) <= 1);
        }
    }

    #[test]
    fn delta_wavefront_has_both_directions() {
        let u = SpectralDistribution::delta(lat(), [0.0, 0.0]);
        let d = dict();
        let wf = wavefront(&u, &d, 0.5).unwrap();
        assert_eq!(wf.detected_dirs(), vec![0, 1]);
        let m = d.x_axis.len();
        for (ci, _) in wf.detected() {
            assert!(cell_dist(ci, 0, m) <= 1);
        }
    }

    #[test]
    fn hardy_wavefront_is_one_sided() {
        let u = SpectralDistribution::hardy(lat());
        let d = dict();
        let wf = wavefront(&u, &d, 0.5).unwrap();
        assert_eq!(wf.detected_dirs(), vec![0], "only the + direction");
        let m = d.x_axis.len();
        for (ci, _) in wf.detected() {
            assert!(cell_dist(ci, 0, m) <= 1);
        }
    }

    #[test]
    fn projection_of_wavefront_is_singular_support() {
        let d = dict();
        for u in [
            SpectralDistribution::delta(lat(), [0.0, 0.0]),
            SpectralDistribution::sawtooth(lat()),
            SpectralDistribution::hardy(lat()),
            SpectralDistribution::gaussian_decay(lat(), 4.0),
        ] {
            let ss: Vec<usize> = singular_support(&u, &d, 0.5).unwrap().detected();
            let wf = wavefront(&u, &d, 0.5).unwrap();
            let mut proj: Vec<usize> = wf.detected().iter().map(|p| p.0).collect();
            proj.sort_unstable();
            proj.dedup();
            assert_eq!(proj, ss);
        }
    }

    #[test]
    fn elliptic_set_examples() {
        let lattice = lat();
        let p = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(1));
        let all = microlocal_elliptic_set(&p, 0.5).unwrap();
        assert_eq!(all.len(), 257 * 2);
        let z = SymbolOperator::multiplication(
            lattice,
            &XModeProfile::constant(C64::new(0.0, 0.0)),
        )
        .unwrap();
        assert!(microlocal_elliptic_set(&z, 0.5).unwrap().is_empty());
    }

    #[test]
    fn counterexample_instance_sin_times_sawtooth() {
        let u = SpectralDistribution::sawtooth(lat());
        let d = dict();
        // sin vanishes at 0 but leaves a kink: strictly more information
        let f = XModeProfile::sine(1.0, [1, 0]);
        assert!(strict_information_check(&u, &f, &d, 0.1).unwrap());

        // a multiplier vanishing to high order smooths the product
        let flat = XModeProfile::cos_power_bump(4, std::f64::consts::PI);
        let f2 = XModeProfile::sine(1.0, [1, 0])
            .product(&XModeProfile::sine(1.0, [1, 0]))
            .product(&flat);
        assert!(!strict_information_check(&u, &f2, &d, 0.1).unwrap());

        // smooth input: empty singular support, check returns false
        let smooth = SpectralDistribution::gaussian_decay(lat(), 4.0);
        let f3 = XModeProfile::sine(1.0, [1, 0]);
        assert!(!strict_information_check(&smooth, &f3, &d, 0.1).unwrap());
    }
}
