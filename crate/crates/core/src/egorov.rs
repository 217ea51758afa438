//! Exact unitary propagation `e^{itD}` at truncation, operator
//! conjugation, Hamiltonian flow on the cosphere bundle, and the
//! propagation-of-singularities checks.
//!
//! Sign convention: `propagate` solves `du/dt = iDu`. The closed-form
//! Fourier sum for the free generator sends the `+` piece of a delta to
//! `x0 - t`, so the flow transporting detected wavefronts is the
//! Hamiltonian flow of `sigma(D)` run backwards in time. That calibration
//! constant is `FLOW_SIGN` below and every check uses it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernel::SmoothingKernel;
use crate::lattice::{FrequencyLattice, HalfInt};
use crate::microlocal::{hausdorff_cells, wavefront, CutoffDictionary};
use crate::spectral::SpectralDistribution;
use crate::symbol::{SymbolOperator, XModeProfile};

/// Direction of the wavefront transport relative to the raw Hamiltonian
/// flow of `sigma(D)`, fixed once by the free-flow delta oracle.
pub const FLOW_SIGN: f64 = -1.0;

/// Eigendecomposition of a Hermitian matrix, cached for repeated unitary
/// evolution. Diagonal matrices skip the dense solve.
pub struct HermitianEvolution {
    matrix: DMatrix<C64>,
    evals: DVector<f64>,
    evecs: Option<DMatrix<C64>>,
}

/// Largest dense Hermitian eigenproblem we are willing to solve exactly
/// (1025 modes is the d = 1, N = 512 lattice; 2401 is d = 2, N = 24).
const EIG_CAP: usize = 2401;

impl HermitianEvolution {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        let herm_dev = (&matrix - matrix.adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if herm_dev > 1e-12 {
            return Err(CoreError::InvalidInput(format!(
                "matrix is not Hermitian (deviation {herm_dev:.2e})"
            )));
        }
        let diagonal = (0..n).all(|i| {
            (0..n).all(|j| i == j || matrix[(i, j)].norm() == 0.0)
        });
        let (evals, evecs) = if diagonal {
            (DVector::from_fn(n, |i, _| matrix[(i, i)].re), None)
        } else {
            if n > EIG_CAP {
                return Err(CoreError::Unsupported(format!(
                    "dense eigendecomposition capped at {EIG_CAP} modes, matrix has {n}"
                )));
            }
            let se = nalgebra::SymmetricEigen::new(matrix.clone());
            (se.eigenvalues, Some(se.eigenvectors))
        };
        Ok(Self {
            matrix,
            evals,
            evecs,
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// The unitary `e^{itH}` as a dense matrix.
    pub fn exp_it(&self, t: f64) -> DMatrix<C64> {
        let n = self.matrix.nrows();
        let phases: Vec<C64> = self
            .evals
            .iter()
            .map(|l| C64::from_polar(1.0, t * l))
            .collect();
        match &self.evecs {
            None => DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    phases[i]
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            Some(v) => {
                let mut scaled = v.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    let p = phases[j];
                    for x in col.iter_mut() {
                        *x *= p;
                    }
                }
                &scaled * v.adjoint()
            }
        }
    }

    /// Apply `e^{itH}` to a coefficient vector without materializing it.
    pub fn apply(&self, coeffs: &[C64], t: f64) -> Vec<C64> {
        let a = DVector::from_column_slice(coeffs);
        let out: DVector<C64> = match &self.evecs {
            None => DVector::from_fn(a.len(), |i, _| {
                a[i] * C64::from_polar(1.0, t * self.evals[i])
            }),
            Some(v) => {
                let mut c = v.adjoint() * &a;
                for (i, x) in c.iter_mut().enumerate() {
                    *x *= C64::from_polar(1.0, t * self.evals[i]);
                }
                v * c
            }
        };
        out.iter().copied().collect()
    }
}

/// An order-1 elliptic generator: the hermitized quantization of
/// `c(x) (1+|xi|^2)^{1/2}` with `c >= c_min > 0`.
pub struct Generator {
    lattice: FrequencyLattice,
    c: XModeProfile,
    c_min: f64,
    evolution: HermitianEvolution,
}

impl Generator {
    pub fn build(lattice: FrequencyLattice, c: &XModeProfile) -> Result<Self> {
        let c_min = c.min_real_on_grid(lattice.d(), 4 * (2 * lattice.bandlimit() as usize + 1));
        if c_min <= 0.0 {
            return Err(CoreError::Ellipticity(format!(
                "profile touches {c_min:.3} on the grid"
            )));
        }
        // quantize c(x) (1+|xi|^2)^{1/2} and hermitize
        let sqrt_lap = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(1));
        let mult = SymbolOperator::multiplication(lattice, c)?;
        let op = mult.compose(&sqrt_lap)?;
        let raw = op.dense_matrix();
        let matrix = (&raw + raw.adjoint()).map(|v| v * C64::new(0.5, 0.0));
        let evolution = HermitianEvolution::new(matrix)?;
        Ok(Self {
            lattice,
            c: c.clone(),
            c_min,
            evolution,
        })
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.lattice
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.evolution.matrix()
    }

    pub fn evolution(&self) -> &HermitianEvolution {
        &self.evolution
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn profile(&self) -> &XModeProfile {
        &self.c
    }

    /// Principal symbol on the cosphere: `sigma(D)(x, w) = c(x)`.
    pub fn symbol(&self, x: [f64; 2]) -> f64 {
        self.c.eval(x).re
    }

    /// The unitary `e^{itD}`.
    pub fn propagator(&self, t: f64) -> Propagator {
        Propagator {
            t,
            matrix: self.evolution.exp_it(t),
        }
    }

    /// Apply `e^{itD}` without materializing the unitary.
    pub fn propagate(&self, u: &SpectralDistribution, t: f64) -> Result<SpectralDistribution> {
        if u.lattice() != self.lattice {
            return Err(CoreError::LatticeMismatch("propagate".into()));
        }
        SpectralDistribution::new(self.lattice, self.evolution.apply(u.coeffs(), t))
    }

    /// Egorov conjugation `P_t = e^{itD} P e^{-itD}` as a dense operator;
    /// the declared order is preserved.
    pub fn conjugate_operator(&self, p: &SymbolOperator, t: f64) -> Result<SymbolOperator> {
        if p.lattice() != self.lattice {
            return Err(CoreError::LatticeMismatch("conjugate_operator".into()));
        }
        let u = self.propagator(t);
        let um = u.matrix();
        let conj = um * p.dense_matrix() * um.adjoint();
        SymbolOperator::from_dense(self.lattice, p.order(), conj)
    }
}

/// A unitary propagation operator at a fixed time.
pub struct Propagator {
    t: f64,
    matrix: DMatrix<C64>,
}

impl Propagator {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Deviation of `U U*` from the identity, max entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let prod = &self.matrix * self.matrix.adjoint();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - C64::new(expect, 0.0)).norm());
            }
        }
        worst
    }
}

/// One RK4 step of the cosphere Hamilton equations for `sigma = c(x)|xi|`.
fn flow_rhs(c: &XModeProfile, state: [f64; 4]) -> [f64; 4] {
    let x = [state[0], state[1]];
    let xi = [state[2], state[3]];
    let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt().max(1e-300);
    let cval = c.eval(x).re;
    let grad = {
        let mut g = [0.0f64; 2];
        for (k, v) in c.modes() {
            let phase = C64::from_polar(1.0, k[0] as f64 * x[0] + k[1] as f64 * x[1]);
            let dv = v * phase * C64::new(0.0, 1.0);
            g[0] += (dv * k[0] as f64).re;
            g[1] += (dv * k[1] as f64).re;
        }
        g
    };
    [
        cval * xi[0] / r,
        cval * xi[1] / r,
        -grad[0] * r,
        -grad[1] * r,
    ]
}

/// RK4 integration of `xdot = d_xi sigma, xidot = -d_x sigma` with the
/// covector renormalized to the cosphere after every step.
pub fn hamiltonian_flow(
    gen: &Generator,
    start: ([f64; 2], [f64; 2]),
    t: f64,
    dt: f64,
) -> Result<([f64; 2], [f64; 2])> {
    let (x0, w0) = start;
    let norm = (w0[0] * w0[0] + w0[1] * w0[1]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(CoreError::InvalidInput(format!(
            "direction must be unit length, |w| = {norm}"
        )));
    }
    if t == 0.0 {
        return Ok(start);
    }
    if dt <= 0.0 || dt > t.abs() / 10.0 {
        return Err(CoreError::StepSize(format!(
            "dt = {dt} must be positive and at most |t|/10 = {}",
            t.abs() / 10.0
        )));
    }
    let steps = (t.abs() / dt).ceil() as usize;
    let h = t / steps as f64;
    let mut s = [x0[0], x0[1], w0[0], w0[1]];
    let c = gen.profile();
    for _ in 0..steps {
        let k1 = flow_rhs(c, s);
        let mid1 = add_scaled(s, k1, h / 2.0);
        let k2 = flow_rhs(c, mid1);
        let mid2 = add_scaled(s, k2, h / 2.0);
        let k3 = flow_rhs(c, mid2);
        let end = add_scaled(s, k3, h);
        let k4 = flow_rhs(c, end);
        for i in 0..4 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let r = (s[2] * s[2] + s[3] * s[3]).sqrt().max(1e-300);
        s[2] /= r;
        s[3] /= r;
    }
    Ok((
        [s[0].rem_euclid(std::f64::consts::TAU), s[1].rem_euclid(std::f64::consts::TAU)],
        [s[2], s[3]],
    ))
}

fn add_scaled(s: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]]
}

/// Where a wavefront point of `u` lands under `e^{itD}`: the calibrated
/// transport flow (`FLOW_SIGN` times the raw Hamiltonian time).
pub fn propagation_flow(
    gen: &Generator,
    start: ([f64; 2], [f64; 2]),
    t: f64,
    dt: f64,
) -> Result<([f64; 2], [f64; 2])> {
    if t == 0.0 {
        return Ok(start);
    }
    hamiltonian_flow(gen, start, FLOW_SIGN * t, dt)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropagationCheck {
    pub distance_cells: usize,
    pub pass: bool,
    pub wf_before: Vec<(usize, usize)>,
    pub wf_predicted: Vec<(usize, usize)>,
    pub wf_after: Vec<(usize, usize)>,
}

/// Compare the detected wavefront of `e^{itD} u` with the flow image of
/// the detected wavefront of `u`, as a grid-cell Hausdorff distance.
pub fn check_propagation(
    u: &SpectralDistribution,
    gen: &Generator,
    t: f64,
    dict: &CutoffDictionary,
    threshold: f64,
    dt: f64,
) -> Result<PropagationCheck> {
    let wf0 = wavefront(u, dict, threshold)?;
    let before = wf0.detected();
    if before.is_empty() {
        return Err(CoreError::Inconclusive(
            "input has no detected wavefront above threshold".into(),
        ));
    }
    let m = dict.x_axis.len();
    let n_dirs = dict.n_dirs();
    let mut predicted = Vec::new();
    for (ci, di) in &before {
        let c = dict.center(*ci);
        let w = dict.dirs[*di];
        let (x_t, w_t) = propagation_flow(gen, (c, w), t, dt)?;
        // snap to the detector grid
        let snap = |v: f64| -> usize {
            ((v / std::f64::consts::TAU * m as f64).round() as usize) % m
        };
        let cell = match dict.lattice().d() {
            1 => snap(x_t[0]),
            _ => snap(x_t[0]) * m + snap(x_t[1]),
        };
        let dir = dict
            .dirs
            .iter()
            .enumerate()
            .max_by(|a, b| {
                let da = a.1[0] * w_t[0] + a.1[1] * w_t[1];
                let db = b.1[0] * w_t[0] + b.1[1] * w_t[1];
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
            .0;
        predicted.push((cell, dir));
    }
    predicted.sort_unstable();
    predicted.dedup();
    let ut = gen.propagate(u, t)?;
    let wf1 = wavefront(&ut, dict, threshold)?;
    let after = wf1.detected();
    let distance = hausdorff_cells(&predicted, &after, m, n_dirs, dict.lattice().d());
    Ok(PropagationCheck {
        distance_cells: distance,
        pass: distance <= 2,
        wf_before: before,
        wf_predicted: predicted,
        wf_after: after,
    })
}

/// The dynamics-compatibility identity `(x . t) a = (x (t . a)) . t` under
/// the closing conventions `x . t := x e^{-itD}` and
/// `t . a := e^{-itD} a e^{itD}`; returns the max entry deviation.
pub fn check_compatibility(
    t_kernel: &SmoothingKernel,
    p: &SymbolOperator,
    gen: &Generator,
    t: f64,
) -> Result<f64> {
    if t_kernel.lattice() != gen.lattice() || p.lattice() != gen.lattice() {
        return Err(CoreError::LatticeMismatch("check_compatibility".into()));
    }
    let u_neg = gen.propagator(-t);
    let u_pos = gen.propagator(t);
    let k = t_kernel.matrix();
    let a = p.dense_matrix();
    let lhs = (k * u_neg.matrix()) * &a;
    let t_dot_a = u_neg.matrix() * &a * u_pos.matrix();
    let rhs = (k * t_dot_a) * u_neg.matrix();
    Ok((lhs - rhs).iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// Gaussian wave packet at `(x0, w)` with frequency `|k0| = 1/h` and
/// spatial width `sqrt(h)`, normalized in L^2.
pub fn wave_packet(
    lattice: FrequencyLattice,
    x0: [f64; 2],
    w: [f64; 2],
    h: f64,
) -> Result<SpectralDistribution> {
    let n = lattice.bandlimit() as f64;
    let k0 = [(w[0] / h).round(), (w[1] / h).round()];
    let spread = 3.0 / h.sqrt();
    if k0[0].abs() + spread > n || k0[1].abs() + spread > n {
        return Err(CoreError::InvalidConfig(format!(
            "packet frequency 1/h = {:.0} plus spread {spread:.0} exceeds the bandlimit {n}",
            1.0 / h
        )));
    }
    let mut u = SpectralDistribution::from_mode_fn(lattice, |k| {
        let dk0 = k[0] as f64 - k0[0];
        let dk1 = k[1] as f64 - k0[1];
        let amp = (-h * (dk0 * dk0 + dk1 * dk1) / 2.0).exp();
        let phase = -(k[0] as f64 * x0[0] + k[1] as f64 * x0[1]);
        C64::from_polar(amp, phase)
    })?;
    let norm = u.sobolev_norm(0.0);
    u = u.scaled(C64::new(1.0 / norm, 0.0));
    Ok(u)
}

/// Quantitative Egorov check: for shrinking `h`, the quadratic form of the
/// conjugated operator on a wave packet approaches the symbol transported
/// along the calibrated flow.
pub fn symbol_transport_check(
    p: &SymbolOperator,
    gen: &Generator,
    t: f64,
    h_list: &[f64],
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if !p.is_classical() || p.order() != HalfInt::ZERO {
        return Err(CoreError::Unsupported(
            "symbol transport needs a classical order-0 operator".into(),
        ));
    }
    let x0 = [1.0, 0.0];
    let w = [1.0, 0.0];
    let p_t = gen.conjugate_operator(p, t)?;
    let mut out = Vec::new();
    for &h in h_list {
        let wp = wave_packet(gen.lattice(), x0, w, h)?;
        let pw = p_t.apply(&wp)?;
        let form: C64 = wp
            .coeffs()
            .iter()
            .zip(pw.coeffs())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let (xb, wb) = propagation_flow(gen, (x0, w), -t, dt)?;
        let expected = p.symbol_at(xb, wb)?;
        out.push((h, (form - expected).norm()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microlocal::DetectorConfig;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(1, 64).unwrap()
    }

    fn free_gen() -> Generator {
        Generator::build(lat(), &XModeProfile::constant(C64::new(1.0, 0.0))).unwrap()
    }

    fn wavy_gen() -> Generator {
        Generator::build(lat(), &XModeProfile::cosine(1.0, 0.3, [1, 0])).unwrap()
    }

    #[test]
    fn free_generator_is_diagonal_with_sqrt_eigenvalues() {
        let g = free_gen();
        let u = SpectralDistribution::single_mode(lat(), [5, 0]).unwrap();
        let v = g.propagate(&u, 1.0).unwrap();
        let expected = C64::from_polar(1.0, (1.0 + 25.0f64).sqrt());
        assert!((v.coeff([5, 0]) - expected).norm() < 1e-12);
    }

    #[test]
    fn generator_rejects_non_elliptic_profile() {
        let c = XModeProfile::cosine(0.4, 1.0, [1, 0]); // dips to -0.6
        assert!(matches!(
            Generator::build(lat(), &c),
            Err(CoreError::Ellipticity(_))
        ));
    }

    #[test]
    fn generator_matrix_is_hermitian() {
        let g = wavy_gen();
        let dev = (g.matrix() - g.matrix().adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
        // symbol is the profile itself
        assert!((g.symbol([0.7, 0.0]) - (1.0 + 0.3 * 0.7f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn propagator_is_unitary_and_group_law_holds() {
        let g = wavy_gen();
        let u1 = g.propagator(0.4);
        assert!(u1.unitarity_defect() < 1e-10);
        let u2 = g.propagator(0.9);
        let u3 = g.propagator(1.3);
        let dev = (u1.matrix() * u2.matrix() - u3.matrix())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9);
    }

    #[test]
    fn propagation_preserves_l2_norm() {
        let g = wavy_gen();
        let u = SpectralDistribution::random_rough(lat(), 3);
        let before = u.sobolev_norm(0.0);
        let after = g.propagate(&u, 0.7).unwrap().sobolev_norm(0.0);
        assert!((before - after).abs() < 1e-10 * before);
        // t = 0 is the identity
        let same = g.propagate(&u, 0.0).unwrap();
        assert!(same.sub(&u).unwrap().sobolev_norm(0.0) < 1e-12);
    }

    #[test]
    fn conjugation_fixes_fourier_multipliers_in_free_flow() {
        let g = free_gen();
        let p = SymbolOperator::one_plus_laplacian_pow(lat(), HalfInt::from_int(1));
        let pt = g.conjugate_operator(&p, 0.8).unwrap();
        let dev = (pt.dense_matrix() - p.dense_matrix())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10);
        assert_eq!(pt.order(), p.order());
        // identity conjugates to identity for any generator
        let g2 = wavy_gen();
        let id = SymbolOperator::identity(lat());
        let idt = g2.conjugate_operator(&id, 1.1).unwrap();
        let dev2 = (idt.dense_matrix() - id.dense_matrix())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(dev2 < 1e-10);
    }

    #[test]
    fn free_flow_is_straight() {
        let g = free_gen();
        let ((x, _), (w, _)) = {
            let (a, b) = hamiltonian_flow(&g, ([1.0, 0.0], [1.0, 0.0]), 0.7, 0.01).unwrap();
            ((a[0], a[1]), (b[0], b[1]))
        };
        assert!((x - 1.7).abs() < 1e-10);
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_short_time_expansion_and_reversal() {
        let g = wavy_gen();
        let start = ([0.5, 0.0], [1.0, 0.0]);
        let t = 0.05;
        let (x_t, _) = hamiltonian_flow(&g, start, t, 0.001).unwrap();
        let c0 = 1.0 + 0.3 * 0.5f64.cos();
        // first-order expansion with a quadratic remainder, |c' c|/2 < 0.2
        assert!((x_t[0] - (0.5 + t * c0)).abs() < 0.2 * t * t);
        let t2 = t / 2.0;
        let (x_t2, _) = hamiltonian_flow(&g, start, t2, 0.001).unwrap();
        let e1 = (x_t[0] - (0.5 + t * c0)).abs();
        let e2 = (x_t2[0] - (0.5 + t2 * c0)).abs();
        assert!(e2 < 0.4 * e1, "remainder shrinks quadratically: {e1} vs {e2}");
        // dt refinement consistency (Richardson)
        let (x_half, _) = hamiltonian_flow(&g, start, t, 0.0005).unwrap();
        assert!((x_t[0] - x_half[0]).abs() < 1e-10);
        // time reversal
        let (x1, w1) = hamiltonian_flow(&g, start, 1.3, 0.002).unwrap();
        let (x2, w2) = hamiltonian_flow(&g, (x1, w1), -1.3, 0.002).unwrap();
        assert!((x2[0] - 0.5).abs() < 1e-8);
        assert!((w2[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn flow_rejects_bad_steps() {
        let g = free_gen();
        assert!(matches!(
            hamiltonian_flow(&g, ([0.0, 0.0], [1.0, 0.0]), 0.5, 0.2),
            Err(CoreError::StepSize(_))
        ));
    }

    #[test]
    fn compatibility_identity_closes() {
        let g = wavy_gen();
        let k = SmoothingKernel::random_smoothing(lat(), 2.0, 5);
        for (p, t) in [
            (
                SymbolOperator::one_plus_laplacian_pow(lat(), HalfInt::from_int(1)),
                0.3,
            ),
            (
                SymbolOperator::multiplication(lat(), &XModeProfile::cosine(1.0, 0.5, [1, 0]))
                    .unwrap(),
                1.2,
            ),
        ] {
            let dev = check_compatibility(&k, &p, &g, t).unwrap();
            assert!(dev <= 1e-10, "deviation {dev}");
        }
        let dev0 = check_compatibility(&k, &SymbolOperator::identity(lat()), &g, 0.0).unwrap();
        assert!(dev0 <= 1e-12);
    }

    #[test]
    fn flow_sign_calibration_from_closed_form() {
        // e^{itD} delta_0 has coefficients e^{it sqrt(1+k^2)} (2pi)^{-1/2};
        // the positive-frequency half sums to a peak near x = -t. The peak
        // location pins FLOW_SIGN = -1.
        let t = 0.7f64;
        let half_sum = |x: f64| -> f64 {
            (1i64..=128)
                .map(|k| {
                    let kf = k as f64;
                    let phase = kf * x + t * (1.0 + kf * kf).sqrt();
                    C64::from_polar(1.0, phase)
                })
                .sum::<C64>()
                .norm()
        };
        let grid = FrequencyLattice::x_grid(512);
        let peak = grid
            .iter()
            .cloned()
            .max_by(|a, b| half_sum(*a).partial_cmp(&half_sum(*b)).unwrap())
            .unwrap();
        let expected = (-t).rem_euclid(std::f64::consts::TAU);
        let mut diff = (peak - expected).abs();
        if diff > std::f64::consts::PI {
            diff = std::f64::consts::TAU - diff;
        }
        assert!(diff < 0.1, "peak at {peak}, expected {expected}");
        assert_eq!(FLOW_SIGN, -1.0);
    }

    #[test]
    fn propagation_check_free_delta() {
        let lattice = FrequencyLattice::new(1, 128).unwrap();
        let g = Generator::build(lattice, &XModeProfile::constant(C64::new(1.0, 0.0))).unwrap();
        let dict =
            CutoffDictionary::build(lattice, DetectorConfig::for_lattice(lattice)).unwrap();
        let u = SpectralDistribution::delta(lattice, [0.0, 0.0]);
        let check = check_propagation(&u, &g, 0.7, &dict, 0.5, 0.005).unwrap();
        assert!(check.distance_cells <= 1, "distance {}", check.distance_cells);
    }

    #[test]
    fn propagation_check_smooth_is_inconclusive() {
        let lattice = FrequencyLattice::new(1, 128).unwrap();
        let g = Generator::build(lattice, &XModeProfile::constant(C64::new(1.0, 0.0))).unwrap();
        let dict =
            CutoffDictionary::build(lattice, DetectorConfig::for_lattice(lattice)).unwrap();
        let u = SpectralDistribution::gaussian_decay(lattice, 3.0);
        assert!(matches!(
            check_propagation(&u, &g, 0.5, &dict, 0.5, 0.005),
            Err(CoreError::Inconclusive(_))
        ));
    }

    #[test]
    fn wave_packet_needs_grid_resolution() {
        let lattice = FrequencyLattice::new(1, 16).unwrap();
        assert!(matches!(
            wave_packet(lattice, [0.0, 0.0], [1.0, 0.0], 1.0 / 32.0),
            Err(CoreError::InvalidConfig(_))
        ));
    }

    #[test]
    fn symbol_transport_deviation_shrinks() {
        let lattice = FrequencyLattice::new(1, 128).unwrap();
        let g = Generator::build(lattice, &XModeProfile::constant(C64::new(1.0, 0.0))).unwrap();
        let p = SymbolOperator::multiplication(lattice, &XModeProfile::cosine(0.0, 1.0, [1, 0]))
            .unwrap();
        let devs = symbol_transport_check(&p, &g, 0.5, &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0], 0.005)
            .unwrap();
        // linear-in-h bound, and the finest packet beats the coarsest
        // (middle entries can dip below the trend when the averaging and
        // dispersion errors cancel)
        for (h, d) in &devs {
            assert!(*d <= 0.2 * h, "{devs:?}");
        }
        assert!(devs.last().unwrap().1 < devs[0].1, "{devs:?}");
        // at t = 0 only the static symbol-evaluation error remains
        let devs0 =
            symbol_transport_check(&p, &g, 0.0, &[1.0 / 8.0, 1.0 / 16.0], 0.005).unwrap();
        for (h, d) in devs0 {
            assert!(d <= 0.2 * h);
        }
        // identity has no deviation at all
        let id = SymbolOperator::identity(lattice);
        let devs_id =
            symbol_transport_check(&id, &g, 0.5, &[1.0 / 8.0, 1.0 / 16.0], 0.005).unwrap();
        for (_, d) in devs_id {
            assert!(d < 1e-10);
        }
    }
}
