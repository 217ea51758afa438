//! The acceptance suite: every release criterion as an executable check
//! with its tolerance pinned, shared by `microsing selftest` and the
//! `acceptance` integration test target.

use microsing_core::egorov::{check_compatibility, check_propagation, Generator};
use microsing_core::groupoid::{
    check_anchor_wf, check_equivariance, groupoid_l1_norm, representation_norm,
    vector_representation, GroupoidModel, LongitudinalGenerator, LongitudinalOperator,
};
use microsing_core::microlocal::{
    projection_pullback_wf_check, strict_information_check, singular_support, wavefront,
    CutoffDictionary,
};
use microsing_core::tameness::{
    estimate_tameness, right_ideal_check,
    smoothness_cross_check, MapHandle, ProbeSet,
};
use microsing_core::{
    CoreError, FrequencyLattice, HalfInt, SmoothingKernel, SpectralDistribution, SymbolOperator,
    XModeProfile,
};
use microsing_nctorus as nct;
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{CheckResult, RunReport};

pub struct CriterionOutcome {
    pub pass: bool,
    pub details: Value,
}

impl CriterionOutcome {
    fn new(pass: bool, details: Value) -> Self {
        Self { pass, details }
    }
}

type CriterionFn = fn(&RunConfig) -> Result<CriterionOutcome, CoreError>;

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub run: CriterionFn,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "norm exactness against brute-force summation", run: c1_norms },
        Criterion { id: 2, name: "tameness degrees track Sobolev exponents and operator orders", run: c2_degrees },
        Criterion { id: 3, name: "smoothness classifier agrees with the coefficient oracle", run: c3_mo },
        Criterion { id: 4, name: "singular support detection", run: c4_singsupp },
        Criterion { id: 5, name: "wavefront detection and projection property", run: c5_wavefront },
        Criterion { id: 6, name: "right-ideal stability of witnesses", run: c6_right_ideal },
        Criterion { id: 7, name: "propagation of singularities along the calibrated flow", run: c7_propagation },
        Criterion { id: 8, name: "groupoid vector representation: equivariance, anchor, norm bound", run: c8_groupoid },
        Criterion { id: 9, name: "noncommutative torus membership formula and relations", run: c9_nctorus },
        Criterion { id: 10, name: "wavefront functoriality under the projection pullback", run: c10_functoriality },
        Criterion { id: 11, name: "deterministic reports for a fixed seed", run: c11_determinism },
    ]
}

/// Run every criterion, printing one line each, and wrap the outcomes in a
/// report.
pub fn run_selftest(cfg: &RunConfig, verbose: bool) -> Result<RunReport, CoreError> {
    let mut results = Vec::new();
    let mut timings = Vec::new();
    for c in criteria() {
        let t0 = std::time::Instant::now();
        let outcome = (c.run)(cfg)?;
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        if verbose {
            println!(
                "[{}] criterion {:>2}: {} ({:.0} ms)",
                if outcome.pass { "PASS" } else { "FAIL" },
                c.id,
                c.name,
                ms
            );
        }
        results.push(CheckResult::from_bool(
            format!("criterion-{:02}", c.id),
            outcome.pass,
            outcome.details,
        ));
        timings.push((format!("criterion-{:02}", c.id), ms));
    }
    Ok(RunReport::new(
        "selftest",
        cfg.seed,
        crate::commands::config_value(cfg),
        results,
        timings,
    ))
}

// --- criterion 1 -------------------------------------------------------

fn c1_norms(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lattice = FrequencyLattice::new(1, 32)?;
    let tol = 1e-12;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    // ten random distributions against the literal summation
    for i in 0..10u64 {
        let u = SpectralDistribution::power_decay(lattice, -0.3 - 0.2 * i as f64, cfg.seed + i);
        for s in [-2.0, 0.0, 1.0, 3.0] {
            let mut acc = 0.0;
            for (idx, k) in lattice.freqs().enumerate() {
                let lam = (k[0] * k[0] + k[1] * k[1]) as f64;
                acc += u.coeffs()[idx].norm_sqr() * (1.0 + lam).powf(s);
            }
            let rel = (u.sobolev_norm(s) - acc.sqrt()).abs() / (1.0 + acc.sqrt());
            worst = worst.max(rel);
            checked += 1;
        }
    }
    // ten random kernels against brute-force Hilbert-Schmidt sums
    for i in 0..10u64 {
        let t = SmoothingKernel::random_smoothing(lattice, 1.0 + 0.5 * i as f64, cfg.seed + 100 + i);
        let n_lat = lattice.len();
        let hs_brute = |p: i64, q: i64| -> f64 {
            let mut acc = 0.0;
            for j in 0..n_lat {
                for k in 0..n_lat {
                    let wj = (1.0 + lattice.lambda(j)).powi(p as i32);
                    let wk = (1.0 + lattice.lambda(k)).powi(q as i32);
                    acc += wj * wk * t.matrix()[(j, k)].norm_sqr();
                }
            }
            acc.sqrt()
        };
        for (p, q) in [(0i64, 0i64), (1, 2), (-1, 3)] {
            let rel = (t.hs_norm(p, q) - hs_brute(p, q)).abs() / (1.0 + hs_brute(p, q));
            worst = worst.max(rel);
            checked += 1;
        }
        for n in [0i64, 1, 2] {
            let mut acc = 0.0;
            for p in -10..=10i64 {
                for q in -10..=10i64 {
                    if p >= -n && q >= -n && p + q <= n {
                        acc += hs_brute(p, q);
                    }
                }
            }
            let rel = (t.graded_norm(n)? - acc).abs() / (1.0 + acc);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    Ok(CriterionOutcome::new(
        worst <= tol,
        json!({"objects": 20, "comparisons": checked, "worst_rel_dev": worst, "tol": tol}),
    ))
}

// --- criterion 2 -------------------------------------------------------

fn c2_degrees(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lattice = cfg.lattice_1d();
    let probes = ProbeSet::kernel_ladder(lattice, cfg.tameness.window, cfg.seed)?;
    let range = (
        HalfInt::from_int(-cfg.tameness.r_max),
        HalfInt::from_int(cfg.tameness.r_max),
    );
    let mut pass = true;
    let mut rows = Vec::new();
    for s in [0i64, 1, 2] {
        let u = SpectralDistribution::power_decay(lattice, -(s as f64) - 0.6, cfg.seed + s as u64);
        let rep = estimate_tameness(
            &MapHandle::theta(&u),
            &probes,
            cfg.tameness.window,
            range,
            cfg.tameness_options(),
        )?;
        let r = rep.r_hat.map(|r| r.as_f64()).unwrap_or(f64::NAN);
        let ok = (r + s as f64).abs() <= 1.0;
        pass &= ok;
        rows.push(json!({"input": format!("H^{s} coefficients"), "r_hat": r, "expected": -(s as f64), "ok": ok}));
    }
    for m in [1i64, 2] {
        let p = SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(m));
        let rep = estimate_tameness(
            &MapHandle::right_compose(&p),
            &probes,
            cfg.tameness.window,
            range,
            cfg.tameness_options(),
        )?;
        let r = rep.r_hat.map(|r| r.as_f64()).unwrap_or(f64::NAN);
        let ok = (r - m as f64).abs() <= 0.5;
        pass &= ok;
        rows.push(json!({"input": format!("right multiplication, order {m}"), "r_hat": r, "expected": m, "ok": ok}));
    }
    Ok(CriterionOutcome::new(pass, json!({"cases": rows})))
}

// --- criterion 3 -------------------------------------------------------

/// Ten smooth-class and ten singular inputs. Decay rates scale with the
/// bandlimit so the smooth class stays smooth at the truncation scale.
fn corpus(lattice: FrequencyLattice, seed: u64) -> Vec<(&'static str, SpectralDistribution, bool)> {
    let n = lattice.bandlimit() as f64;
    let band_limited = |s: u64| {
        SpectralDistribution::from_mode_fn(lattice, |k| {
            if k[0].abs() <= 10 {
                let mut h = std::collections::hash_map::DefaultHasher::new();
                std::hash::Hasher::write_i64(&mut h, k[0] * 31 + s as i64);
                let v = std::hash::Hasher::finish(&h) as f64 / u64::MAX as f64;
                C64::from_polar(1.0, v * std::f64::consts::TAU)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .expect("finite")
    };
    vec![
        ("gauss-narrow", SpectralDistribution::gaussian_decay(lattice, n / 64.0), true),
        ("gauss-wide", SpectralDistribution::gaussian_decay(lattice, n / 22.0), true),
        ("exp-smooth-a", SpectralDistribution::random_smooth(lattice, seed), true),
        ("exp-smooth-b", SpectralDistribution::random_smooth(lattice, seed + 1), true),
        ("exp-smooth-c", SpectralDistribution::exp_decay(lattice, 96.0 / n, seed + 2), true),
        ("band-limited-a", band_limited(seed + 3), true),
        ("band-limited-b", band_limited(seed + 4), true),
        ("zero", SpectralDistribution::zero(lattice), true),
        ("constant-mode", SpectralDistribution::single_mode(lattice, [0, 0]).expect("mode"), true),
        ("gauss-mid", SpectralDistribution::gaussian_decay(lattice, n / 32.0), true),
        ("delta-0", SpectralDistribution::delta(lattice, [0.0, 0.0]), false),
        ("delta-1.5", SpectralDistribution::delta(lattice, [1.5, 0.0]), false),
        ("sawtooth", SpectralDistribution::sawtooth(lattice), false),
        ("hardy", SpectralDistribution::hardy(lattice), false),
        ("power-1", SpectralDistribution::power_decay(lattice, -1.0, seed + 5), false),
        ("power-1b", SpectralDistribution::power_decay(lattice, -1.0, seed + 6), false),
        ("power-2", SpectralDistribution::power_decay(lattice, -2.0, seed + 7), false),
        ("power-0.5", SpectralDistribution::power_decay(lattice, -0.5, seed + 8), false),
        ("rough", SpectralDistribution::random_rough(lattice, seed + 9), false),
        (
            "two-deltas",
            SpectralDistribution::delta(lattice, [0.0, 0.0])
                .add(&SpectralDistribution::delta(lattice, [std::f64::consts::PI, 0.0]))
                .expect("same lattice"),
            false,
        ),
    ]
}

fn c3_mo(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lattice = cfg.lattice_1d();
    let probes = ProbeSet::kernel_ladder(lattice, cfg.tameness.window, cfg.seed)?;
    // the probe set carries the diagonal family k_n = delta_{mn} and the
    // rescaled family (1+lambda_n)^{-k/2} in its auxiliary list
    let mut agree_all = true;
    let mut rows = Vec::new();
    for (name, u, expected_smooth) in corpus(lattice, cfg.seed) {
        let mo = smoothness_cross_check(
            &u,
            &probes,
            cfg.tameness.r_max,
            &cfg.oracle_config(),
            cfg.tameness_options(),
        )?;
        let ok = mo.agree && mo.oracle == expected_smooth;
        agree_all &= ok;
        rows.push(json!({
            "input": name,
            "classifier": mo.classifier,
            "oracle": mo.oracle,
            "agree": mo.agree,
            "expected_smooth": expected_smooth,
        }));
    }
    Ok(CriterionOutcome::new(
        agree_all,
        json!({"corpus_size": 20, "cases": rows}),
    ))
}

// --- criterion 4 -------------------------------------------------------

fn nearest_cell(x: f64, m: usize) -> usize {
    ((x / std::f64::consts::TAU * m as f64).round() as usize) % m
}

fn cell_distance(a: usize, b: usize, m: usize) -> usize {
    let d = (a as i64 - b as i64).rem_euclid(m as i64) as usize;
    d.min(m - d)
}

fn c4_singsupp(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lattice = cfg.lattice_1d();
    let dict = CutoffDictionary::build(lattice, cfg.detector_config(lattice))?;
    let m = dict.x_axis.len();
    let mut pass = true;
    let mut rows = Vec::new();
    let point_cases = vec![
        ("delta-0", SpectralDistribution::delta(lattice, [0.0, 0.0]), Some(0.0)),
        ("delta-1.5", SpectralDistribution::delta(lattice, [1.5, 0.0]), Some(1.5)),
        ("sawtooth", SpectralDistribution::sawtooth(lattice), Some(0.0)),
        (
            "gauss-mid",
            SpectralDistribution::gaussian_decay(lattice, lattice.bandlimit() as f64 / 32.0),
            None,
        ),
        ("random-smooth", SpectralDistribution::random_smooth(lattice, cfg.seed), None),
    ];
    for (name, u, singular_at) in point_cases {
        let ss = singular_support(&u, &dict, cfg.dictionary.threshold)?;
        let detected = ss.detected();
        let ok = match singular_at {
            None => detected.is_empty(),
            Some(x0) => {
                let target = nearest_cell(x0, m);
                !detected.is_empty()
                    && detected.iter().all(|&c| cell_distance(c, target, m) <= 1)
            }
        };
        pass &= ok;
        rows.push(json!({"input": name, "detected_cells": detected, "ok": ok}));
    }
    // the strict-information instance: sin vanishes on the detected
    // singular support of the sawtooth yet sin * sawtooth stays non-smooth
    let saw = SpectralDistribution::sawtooth(lattice);
    let strict = strict_information_check(&saw, &XModeProfile::sine(1.0, [1, 0]), &dict, 0.1)?;
    pass &= strict;
    rows.push(json!({"input": "sin * sawtooth strict-information instance", "ok": strict}));
    Ok(CriterionOutcome::new(pass, json!({"cases": rows})))
}

// --- criterion 5 -------------------------------------------------------

fn c5_wavefront(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lattice = cfg.lattice_1d();
    let dict = CutoffDictionary::build(lattice, cfg.detector_config(lattice))?;
    let mut pass = true;
    let mut rows = Vec::new();

    let delta = SpectralDistribution::delta(lattice, [0.0, 0.0]);
    let wf = wavefront(&delta, &dict, cfg.dictionary.threshold)?;
    let ok = wf.detected_dirs() == vec![0, 1];
    pass &= ok;
    rows.push(json!({"input": "delta", "directions": wf.detected_dirs(), "ok": ok}));

    let hardy = SpectralDistribution::hardy(lattice);
    let wf = wavefront(&hardy, &dict, cfg.dictionary.threshold)?;
    let ok = wf.detected_dirs() == vec![0];
    pass &= ok;
    rows.push(json!({"input": "hardy", "directions": wf.detected_dirs(), "ok": ok}));

    // 2D line delta: directions exactly +-(1, 0)
    let lat2 = cfg.lattice_2d();
    let delta_1d = SpectralDistribution::delta(
        FrequencyLattice::new(1, lat2.bandlimit())?,
        [0.0, 0.0],
    );
    let line = microsing_core::microlocal::embed_constant_in_y(&delta_1d, lat2)?;
    let dict2 = CutoffDictionary::build(lat2, cfg.detector_config(lat2))?;
    let wf2 = wavefront(&line, &dict2, cfg.dictionary.threshold)?;
    let expected_dirs = vec![0usize, dict2.n_dirs() / 2];
    let ok = wf2.detected_dirs() == expected_dirs;
    pass &= ok;
    rows.push(json!({"input": "2d line delta", "directions": wf2.detected_dirs(), "expected": expected_dirs, "ok": ok}));

    // projection property over the full corpus
    let mut proj_ok = true;
    for (name, u, _) in corpus(lattice, cfg.seed) {
        let ss = singular_support(&u, &dict, cfg.dictionary.threshold)?.detected();
        let wf = wavefront(&u, &dict, cfg.dictionary.threshold)?;
        let mut proj: Vec<usize> = wf.detected().iter().map(|p| p.0).collect();
        proj.sort_unstable();
        proj.dedup();
        if proj != ss {
            proj_ok = false;
            rows.push(json!({"input": name, "projection_mismatch": true}));
        }
    }
    pass &= proj_ok;
    rows.push(json!({"check": "projection over 20-element corpus", "ok": proj_ok}));
    Ok(CriterionOutcome::new(pass, json!({"cases": rows})))
}

// --- criterion 6 -------------------------------------------------------

fn c6_right_ideal(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lattice = cfg.lattice_1d();
    let dict = CutoffDictionary::build(lattice, cfg.detector_config(lattice))?;
    let probes = ProbeSet::kernel_ladder(lattice, cfg.tameness.window, cfg.seed)?;
    let opts = cfg.tameness_options();
    // witnesses: operators P with Theta_u . P classified regular
    let hardy = SpectralDistribution::hardy(lattice);
    let smooth = SpectralDistribution::random_smooth(lattice, cfg.seed + 77);
    let mut witness_pairs: Vec<(&SpectralDistribution, SymbolOperator)> = Vec::new();
    for c in 0..10usize {
        witness_pairs.push((&hardy, dict.operator(0, (3 * c) % dict.n_centers(), 1)));
    }
    for c in 0..15usize {
        witness_pairs.push((
            &smooth,
            dict.operator(c % dict.n_scales(), (5 * c) % dict.n_centers(), c % 2),
        ));
    }
    let q_ops = [
        SymbolOperator::identity(lattice),
        SymbolOperator::multiplication(lattice, &XModeProfile::cosine(1.0, 0.4, [1, 0]))?,
    ];
    let mut tested = 0usize;
    let mut held = 0usize;
    for (u, p) in &witness_pairs {
        for q in &q_ops {
            match right_ideal_check(u, p, q, &probes, cfg.tameness.r_max, opts) {
                Ok(true) => {
                    tested += 1;
                    held += 1;
                }
                Ok(false) => {
                    tested += 1;
                }
                Err(CoreError::InvalidInput(_)) => {
                    // the base pair was not a witness; spec precondition
                    return Ok(CriterionOutcome::new(
                        false,
                        json!({"error": "witness precondition failed"}),
                    ));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(CriterionOutcome::new(
        tested == 50 && held == tested,
        json!({"pairs": tested, "held": held}),
    ))
}

// --- criterion 7 -------------------------------------------------------

fn c7_propagation(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lattice = cfg.lattice_1d();
    let dict = CutoffDictionary::build(lattice, cfg.detector_config(lattice))?;
    let delta = SpectralDistribution::delta(lattice, [0.0, 0.0]);
    let mut pass = true;
    let mut rows = Vec::new();

    // free flow at the listed times, one-cell accuracy
    let free = Generator::build(lattice, &XModeProfile::constant(C64::new(1.0, 0.0)))?;
    for &t in &cfg.egorov.t_list {
        let check = check_propagation(&delta, &free, t, &dict, cfg.dictionary.threshold, cfg.egorov.dt)?;
        let ok = check.distance_cells <= 1;
        pass &= ok;
        rows.push(json!({"case": format!("free flow t={t}"), "distance_cells": check.distance_cells, "ok": ok}));
    }

    // variable metric, two-cell accuracy against the integrated flow
    let wavy = Generator::build(
        lattice,
        &XModeProfile::cosine(1.0, cfg.egorov.c_amplitude, [1, 0]),
    )?;
    let check = check_propagation(&delta, &wavy, 0.8, &dict, cfg.dictionary.threshold, cfg.egorov.dt)?;
    let ok = check.distance_cells <= 2;
    pass &= ok;
    rows.push(json!({"case": "variable metric t=0.8", "distance_cells": check.distance_cells, "ok": ok}));

    // compatibility identity on random (T, P, t) triples
    let mut worst_compat = 0.0f64;
    for i in 0..10u64 {
        let t_kernel = SmoothingKernel::random_smoothing(lattice, 2.0, cfg.seed + 200 + i);
        let p: SymbolOperator = if i % 2 == 0 {
            SymbolOperator::one_plus_laplacian_pow(lattice, HalfInt::from_int(1))
        } else {
            SymbolOperator::multiplication(lattice, &XModeProfile::cosine(1.0, 0.5, [1, 0]))?
        };
        let t = 0.3 + 0.1 * i as f64;
        worst_compat = worst_compat.max(check_compatibility(&t_kernel, &p, &wavy, t)?);
    }
    let ok = worst_compat <= 1e-10;
    pass &= ok;
    rows.push(json!({"case": "compatibility identity, 10 random triples", "worst_deviation": worst_compat, "ok": ok}));

    // unitarity and the group law
    let u1 = wavy.propagator(0.4);
    let u2 = wavy.propagator(0.9);
    let u3 = wavy.propagator(1.3);
    let unit = u1.unitarity_defect().max(u2.unitarity_defect());
    let group = (u1.matrix() * u2.matrix() - u3.matrix())
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let ok = unit <= 1e-10 && group <= 1e-9;
    pass &= ok;
    rows.push(json!({"case": "unitarity and group law", "unitarity_defect": unit, "group_defect": group, "ok": ok}));

    Ok(CriterionOutcome::new(pass, json!({"cases": rows})))
}

// --- criterion 8 -------------------------------------------------------

fn c8_groupoid(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let base = FrequencyLattice::new(1, cfg.groupoid.n)?;
    let model = GroupoidModel::new(base, cfg.groupoid.n_g)?;
    let mut pass = true;
    let mut rows = Vec::new();

    // equivariance of the vector representation
    let dg = LongitudinalGenerator::build(
        model,
        &XModeProfile::cosine(1.0, cfg.egorov.c_amplitude, [1, 0]),
    )?;
    let mut worst = 0.0f64;
    for (p, t) in [
        (LongitudinalOperator::laplacian(model), 0.4),
        (LongitudinalOperator::random_smoothing(model, 2.0, cfg.seed), 0.8),
    ] {
        worst = worst.max(check_equivariance(&p, &dg, t)?);
    }
    let ok = worst <= 1e-10;
    pass &= ok;
    rows.push(json!({"case": "equivariance", "worst_deviation": worst, "ok": ok}));

    // anchor compatibility of detected wavefronts
    let lat2 = FrequencyLattice::new(2, cfg.groupoid.n)?;
    let mut cfg1 = cfg.detector_config(base);
    cfg1.centers = 2 * cfg.groupoid.n as usize + 1;
    let cfg2 = cfg.detector_config(lat2);
    for (name, u) in [
        ("delta", SpectralDistribution::delta(base, [0.0, 0.0])),
        ("hardy", SpectralDistribution::hardy(base)),
    ] {
        let check = check_anchor_wf(&u, lat2, &cfg1, &cfg2)?;
        pass &= check.pass;
        rows.push(json!({"case": format!("anchor {name}"), "distance_cells": check.distance_cells, "ok": check.pass}));
    }

    // representation norm bound on random smoothing families
    let mut bound_ok = true;
    let mut margin = f64::INFINITY;
    for i in 0..10u64 {
        let p = LongitudinalOperator::random_smoothing(model, 1.5 + 0.2 * (i % 3) as f64, cfg.seed + i);
        let op_norm = representation_norm(&p);
        let l1 = groupoid_l1_norm(&p);
        bound_ok &= op_norm <= l1 + 1e-8;
        margin = margin.min(l1 - op_norm);
    }
    pass &= bound_ok;
    rows.push(json!({"case": "representation bound on 10 families", "min_margin": margin, "ok": bound_ok}));

    // multiplicativity of the vector representation
    let p = LongitudinalOperator::from_eta_multiplier(model, HalfInt::from_int(1), |k, eta| {
        C64::new(k as f64 + 0.2 * (eta * eta) as f64, 0.1)
    });
    let q = LongitudinalOperator::laplacian(model);
    let pq = p.compose(&q)?;
    let dev = (vector_representation(&pq).dense_matrix()
        - vector_representation(&p).dense_matrix() * vector_representation(&q).dense_matrix())
    .iter()
    .map(|v| v.norm())
    .fold(0.0, f64::max);
    let ok = dev <= 1e-12;
    pass &= ok;
    rows.push(json!({"case": "vector representation is multiplicative", "deviation": dev, "ok": ok}));

    Ok(CriterionOutcome::new(pass, json!({"cases": rows})))
}

// --- criterion 9 -------------------------------------------------------

fn c9_nctorus(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let theta = 5.0 / 7.0;
    let mut pass = true;
    let mut rows = Vec::new();
    let err = |e: nct::NcError| CoreError::InvalidInput(e.to_string());

    // exhaustive small supports: V1 powers |n| <= 3, up to 3 modes per
    // coefficient, member and non-member constructions
    let mut exhaustive = 0usize;
    let mut agree = true;
    for n in -3i64..=3 {
        for modes in [&[0i64][..], &[0, 1], &[-1, 0, 2]] {
            // generic coefficient: not a member unless it happens to vanish
            let f = nct::ThetaFunction::from_modes(
                theta,
                modes.iter().enumerate().map(|(i, &m)| {
                    (m, C64::new(1.0 + i as f64 * 0.3, 0.2 - i as f64 * 0.1))
                }),
            );
            // member construction: subtract the value at n
            let fv = f.eval(n as f64);
            let member_f = f.add(&nct::ThetaFunction::constant(theta, -fv)).map_err(err)?;
            for (g, _expected_member) in [(f.clone(), false), (member_f, true)] {
                let a = nct::NCElement::from_terms(theta, [(n, g)]).map_err(err)?;
                let via_action = nct::nc_wf_membership(&a).map_err(err)?;
                let via_formula = nct::nc_wf_membership_formula(&a);
                agree &= via_action == via_formula;
                exhaustive += 1;
            }
        }
    }
    pass &= agree;
    rows.push(json!({"case": "exhaustive small supports", "count": exhaustive, "agree": agree}));

    // 50 random elements
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut random_agree = true;
    for _ in 0..50 {
        let mut terms = Vec::new();
        for _ in 0..rng.random_range(1..=4) {
            let n = rng.random_range(-5i64..=5);
            let n_modes = rng.random_range(1..=3);
            let mut f = nct::ThetaFunction::zero(theta);
            for _ in 0..n_modes {
                let m = rng.random_range(-4i64..=4);
                let c = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                f = f
                    .add(&nct::ThetaFunction::from_modes(theta, [(m, c)]))
                    .map_err(err)?;
            }
            // half the time, force membership of this term
            if rng.random::<bool>() {
                let v = f.eval(n as f64);
                f = f
                    .add(&nct::ThetaFunction::constant(theta, -v))
                    .map_err(err)?;
            }
            terms.push((n, f));
        }
        let a = nct::NCElement::from_terms(theta, terms).map_err(err)?;
        let via_action = nct::nc_wf_membership(&a).map_err(err)?;
        let via_formula = nct::nc_wf_membership_formula(&a);
        random_agree &= via_action == via_formula;
    }
    pass &= random_agree;
    rows.push(json!({"case": "50 random elements", "agree": random_agree}));

    // generator relation to 1e-12
    let v1 = nct::NCElement::v1(theta);
    let v2 = nct::NCElement::v2(theta);
    let lhs = v2.multiply(&v1).map_err(err)?;
    let phase = C64::from_polar(1.0, std::f64::consts::TAU / theta);
    let rhs = v1.multiply(&v2).map_err(err)?.scaled(phase);
    let relation_ok = lhs.approx_eq(&rhs, 1e-12);
    pass &= relation_ok;
    rows.push(json!({"case": "V2 V1 = e^{2 pi i/theta} V1 V2", "ok": relation_ok}));

    // ideal stability of the membership set: the module-coherent
    // composition order multiplies the member on the right
    let mut ideal_ok = true;
    for _ in 0..50 {
        // random member a
        let n = rng.random_range(-3i64..=3);
        let m = rng.random_range(-3i64..=3);
        let c = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let mut f = nct::ThetaFunction::from_modes(theta, [(m, c)]);
        let v = f.eval(n as f64);
        f = f
            .add(&nct::ThetaFunction::constant(theta, -v))
            .map_err(err)?;
        let a = nct::NCElement::from_terms(theta, [(n, f)]).map_err(err)?;
        debug_assert!(nct::nc_wf_membership_formula(&a));
        // random b
        let bn = rng.random_range(-3i64..=3);
        let bm = rng.random_range(-3i64..=3);
        let bc = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let b = nct::NCElement::from_terms(
            theta,
            [(bn, nct::ThetaFunction::from_modes(theta, [(bm, bc)]))],
        )
        .map_err(err)?;
        let ba = b.multiply(&a).map_err(err)?;
        ideal_ok &= nct::nc_wf_membership(&ba).map_err(err)?;
    }
    pass &= ideal_ok;
    rows.push(json!({"case": "ideal stability on 50 random products", "ok": ideal_ok}));

    Ok(CriterionOutcome::new(pass, json!({"theta": theta, "cases": rows})))
}

// --- criterion 10 ------------------------------------------------------

fn c10_functoriality(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    let lat2 = cfg.lattice_2d();
    let lat1 = FrequencyLattice::new(1, lat2.bandlimit())?;
    let mut cfg1 = cfg.detector_config(lat1);
    cfg1.centers = 2 * lat2.bandlimit() as usize + 1;
    let cfg2 = cfg.detector_config(lat2);
    let mut pass = true;
    let mut rows = Vec::new();
    for (name, u) in [
        ("smooth", SpectralDistribution::gaussian_decay(lat1, 2.0)),
        ("delta", SpectralDistribution::delta(lat1, [0.0, 0.0])),
        ("hardy", SpectralDistribution::hardy(lat1)),
    ] {
        let check = projection_pullback_wf_check(&u, lat2, &cfg1, &cfg2)?;
        pass &= check.pass;
        rows.push(json!({
            "input": name,
            "distance_cells": if check.distance_cells > 1000 { -1 } else { check.distance_cells as i64 },
            "wf_1d_size": check.wf_1d.len(),
            "wf_2d_size": check.wf_2d.len(),
            "ok": check.pass,
        }));
    }
    Ok(CriterionOutcome::new(pass, json!({"cases": rows})))
}

// --- criterion 11 ------------------------------------------------------

fn c11_determinism(cfg: &RunConfig) -> Result<CriterionOutcome, CoreError> {
    // identical (config, seed) must produce byte-identical hashed report
    // sections; exercise the report-producing commands twice
    let mut small = cfg.clone();
    small.lattice.n = 64;
    small.output.directory = std::env::temp_dir()
        .join("microsing-determinism")
        .display()
        .to_string();
    let runs = |c: &RunConfig| -> Result<Vec<String>, CoreError> {
        let a = crate::commands::cmd_analyze("delta:0", c)
            .map_err(|e| CoreError::InvalidInput(e.to_string()))?;
        let n = crate::commands::cmd_nctorus(None, "5/7", c)
            .map_err(|e| CoreError::InvalidInput(e.to_string()))?;
        Ok(vec![a.hashed_section(), n.hashed_section()])
    };
    let first = runs(&small)?;
    let second = runs(&small)?;
    let identical = first == second;
    Ok(CriterionOutcome::new(
        identical,
        json!({"sections_compared": first.len(), "identical": identical}),
    ))
}
