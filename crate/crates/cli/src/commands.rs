//! The report-producing commands behind the CLI subcommands.

use microsing_core::egorov::{check_propagation, Generator};
use microsing_core::microlocal::{singular_support, wavefront, CutoffDictionary};
use microsing_core::tameness::{
    coefficient_regularity_oracle, estimate_tameness, is_regular_map, MapHandle, ProbeSet,
};
use microsing_core::{CoreError, HalfInt, SpectralDistribution, XModeProfile};
use microsing_nctorus as nct;
use num_complex::Complex64 as C64;
use serde_json::json;
use std::path::Path;
use std::time::Instant;

use crate::config::RunConfig;
use crate::report::{write_atomic, CheckResult, RunReport};
use crate::uspec::parse_uspec;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(_)
            | CoreError::InvalidConfig(_)
            | CoreError::Ellipticity(_)
            | CoreError::Leakage { .. } => CliError::Usage(e.to_string()),
            CoreError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

/// The resolved config as embedded in reports: the output location is
/// dropped so that the hashed section depends only on computational
/// inputs.
pub fn config_value(cfg: &RunConfig) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(map) = v.as_object_mut() {
        map.remove("output");
    }
    v
}

/// Tameness report, regularity verdict, decay-oracle verdict, agreement;
/// the graded norms of the input go to a CSV sidecar.
pub fn cmd_analyze(uspec: &str, cfg: &RunConfig) -> Result<RunReport, CliError> {
    cmd_analyze_at(uspec, cfg, Path::new(&cfg.output.directory))
}

pub fn cmd_analyze_at(
    uspec: &str,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    let lattice = cfg.lattice_1d();
    let u = parse_uspec(uspec, lattice)?;
    let norms = microsing_core::report::GradedNormReport::for_distribution(
        uspec,
        &u,
        (0, cfg.tameness.window.1),
    )?;
    write_atomic(&out_dir.join("graded_norms.csv"), &norms.to_csv())
        .map_err(|e| CliError::Io(e.to_string()))?;
    let probes = ProbeSet::kernel_ladder(lattice, cfg.tameness.window, cfg.seed)?;
    let map = MapHandle::theta(&u);
    let report = estimate_tameness(
        &map,
        &probes,
        cfg.tameness.window,
        (
            HalfInt::from_int(-cfg.tameness.r_max),
            HalfInt::from_int(cfg.tameness.r_max),
        ),
        cfg.tameness_options(),
    )?;
    let (regular, _) = is_regular_map(&map, &probes, cfg.tameness.r_max, cfg.tameness_options())?;
    let oracle = coefficient_regularity_oracle(&u, &cfg.oracle_config())?;
    let agree = regular == oracle;
    let results = vec![
        CheckResult::pass(
            "tameness",
            json!({
                "r_hat": report.r_hat.map(|r| r.as_f64()),
                "k_hat": report.k_hat,
                "verdict": format!("{:?}", report.verdict),
                "window": report.window,
                "constants": report.constants,
                "residual": if report.residual.is_finite() { report.residual } else { -1.0 },
            }),
        ),
        CheckResult::from_bool(
            "classifier-oracle-agreement",
            agree,
            json!({"classifier_regular": regular, "oracle_smooth": oracle}),
        ),
    ];
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(RunReport::new(
        format!("analyze {uspec}"),
        cfg.seed,
        config_value(cfg),
        results,
        vec![("analyze".into(), ms)],
    ))
}

/// Singular support and wavefront sets with scores and witnesses; heatmap
/// CSVs go next to the JSON report.
pub fn cmd_wavefront(uspec: &str, cfg: &RunConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    let lattice = cfg.lattice_1d();
    let u = parse_uspec(uspec, lattice)?;
    let dict = CutoffDictionary::build(lattice, cfg.detector_config(lattice))?;
    let ss = singular_support(&u, &dict, cfg.dictionary.threshold)?;
    let wf = wavefront(&u, &dict, cfg.dictionary.threshold)?;
    write_atomic(&out_dir.join("singular_support.csv"), &ss.to_csv())
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&out_dir.join("wavefront.csv"), &wf.to_csv())
        .map_err(|e| CliError::Io(e.to_string()))?;
    let detected_ss: Vec<f64> = ss.detected().iter().map(|&i| ss.x_axis[i]).collect();
    let detected_wf: Vec<(f64, String)> = wf
        .detected()
        .iter()
        .map(|&(ci, di)| {
            (
                wf.x_axis[ci],
                if di == 0 { "+".to_string() } else { "-".to_string() },
            )
        })
        .collect();
    let proj_matches = {
        let mut proj: Vec<usize> = wf.detected().iter().map(|p| p.0).collect();
        proj.sort_unstable();
        proj.dedup();
        proj == ss.detected()
    };
    let results = vec![
        CheckResult::pass(
            "detected-sets",
            json!({
                "singular_support": detected_ss,
                "wavefront": detected_wf,
                "witness_count": wf.witnesses.len(),
                "threshold": cfg.dictionary.threshold,
            }),
        ),
        CheckResult::from_bool("projection-property", proj_matches, json!({})),
    ];
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(RunReport::new(
        format!("wavefront {uspec}"),
        cfg.seed,
        config_value(cfg),
        results,
        vec![("wavefront".into(), ms)],
    ))
}

/// Parse a metric profile spec: `const`, `cos:AMPLITUDE`, or a JSON file
/// with `{"modes": [{"k": 1, "re": 0.15, "im": 0.0}, ...]}`.
pub fn parse_profile(spec: &str) -> Result<XModeProfile, CliError> {
    if spec == "const" {
        return Ok(XModeProfile::constant(num_complex::Complex64::new(1.0, 0.0)));
    }
    if let Some(ampl) = spec.strip_prefix("cos:") {
        let a: f64 = ampl
            .parse()
            .map_err(|_| CliError::Usage(format!("bad profile amplitude '{ampl}'")))?;
        return Ok(XModeProfile::cosine(1.0, a, [1, 0]));
    }
    if spec.ends_with(".json") {
        #[derive(serde::Deserialize)]
        struct Mode {
            k: i64,
            re: f64,
            im: f64,
        }
        #[derive(serde::Deserialize)]
        struct ProfileFile {
            modes: Vec<Mode>,
        }
        let raw = std::fs::read_to_string(spec).map_err(|e| CliError::Io(e.to_string()))?;
        let parsed: ProfileFile =
            serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("profile file: {e}")))?;
        return Ok(XModeProfile::from_modes(
            parsed
                .modes
                .into_iter()
                .map(|m| ([m.k, 0], C64::new(m.re, m.im)))
                .collect(),
        ));
    }
    Err(CliError::Usage(format!(
        "unknown profile '{spec}' (const | cos:AMPL | file.json)"
    )))
}

/// Propagate a distribution with the configured generator and compare the
/// detected wavefront against the calibrated flow prediction.
pub fn cmd_propagate(
    uspec: &str,
    t: f64,
    profile_spec: Option<&str>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    let lattice = cfg.lattice_1d();
    let u = parse_uspec(uspec, lattice)?;
    let profile = match profile_spec {
        Some(spec) => parse_profile(spec)?,
        None => XModeProfile::cosine(1.0, cfg.egorov.c_amplitude, [1, 0]),
    };
    let gen = Generator::build(lattice, &profile)?;
    let dict = CutoffDictionary::build(lattice, cfg.detector_config(lattice))?;
    let mut results = Vec::new();
    if t == 0.0 {
        // the propagator is the identity; distance is zero by definition
        results.push(CheckResult::pass(
            "propagation",
            json!({"t": t, "distance_cells": 0, "note": "identity propagator"}),
        ));
    } else {
        match check_propagation(&u, &gen, t, &dict, cfg.dictionary.threshold, cfg.egorov.dt) {
            Ok(check) => {
                let wf_csv = |set: &[(usize, usize)]| -> String {
                    let mut s = String::from("x,direction\n");
                    for (ci, di) in set {
                        s.push_str(&format!(
                            "{:.6},{}\n",
                            dict.x_axis[*ci],
                            if *di == 0 { "+" } else { "-" }
                        ));
                    }
                    s
                };
                write_atomic(&out_dir.join("wf_before.csv"), &wf_csv(&check.wf_before))
                    .map_err(|e| CliError::Io(e.to_string()))?;
                write_atomic(&out_dir.join("wf_predicted.csv"), &wf_csv(&check.wf_predicted))
                    .map_err(|e| CliError::Io(e.to_string()))?;
                write_atomic(&out_dir.join("wf_after.csv"), &wf_csv(&check.wf_after))
                    .map_err(|e| CliError::Io(e.to_string()))?;
                results.push(CheckResult::from_bool(
                    "propagation",
                    check.pass,
                    json!({
                        "t": t,
                        "distance_cells": check.distance_cells,
                        "wf_before": check.wf_before,
                        "wf_predicted": check.wf_predicted,
                        "wf_after": check.wf_after,
                    }),
                ));
            }
            Err(CoreError::Inconclusive(msg)) => {
                results.push(CheckResult::inconclusive("propagation", json!({"reason": msg})));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(RunReport::new(
        format!("propagate {uspec} t={t}"),
        cfg.seed,
        config_value(cfg),
        results,
        vec![("propagate".into(), ms)],
    ))
}

/// Groupoid demos: the equivariance theorem or the anchor wavefront check.
pub fn cmd_groupoid(
    demo: &str,
    t: f64,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<RunReport, CliError> {
    use microsing_core::groupoid::*;
    let t0 = Instant::now();
    let base = microsing_core::FrequencyLattice::new(1, cfg.groupoid.n)?;
    let model = GroupoidModel::new(base, cfg.groupoid.n_g)?;
    let mut results = Vec::new();
    match demo {
        "equivariance" => {
            let profile = XModeProfile::cosine(1.0, cfg.egorov.c_amplitude, [1, 0]);
            let dg = LongitudinalGenerator::build(model, &profile)?;
            for (name, p) in [
                ("laplacian", LongitudinalOperator::laplacian(model)),
                (
                    "smoothing-family",
                    LongitudinalOperator::random_smoothing(model, 2.0, cfg.seed),
                ),
            ] {
                let dev = check_equivariance(&p, &dg, t)?;
                results.push(CheckResult::from_bool(
                    format!("equivariance-{name}"),
                    dev <= 1e-10,
                    json!({"t": t, "deviation": dev}),
                ));
            }
        }
        "anchor" => {
            let lat2 = microsing_core::FrequencyLattice::new(2, cfg.groupoid.n)?;
            let mut cfg1 = cfg.detector_config(base);
            cfg1.centers = 2 * cfg.groupoid.n as usize + 1;
            let cfg2 = cfg.detector_config(lat2);
            for (name, u) in [
                ("delta", SpectralDistribution::delta(base, [0.0, 0.0])),
                ("hardy", SpectralDistribution::hardy(base)),
            ] {
                let check = check_anchor_wf(&u, lat2, &cfg1, &cfg2)?;
                // heatmap over the (w, g) grid per direction
                let pulled = range_pullback(&u, lat2)?;
                let dict2 = microsing_core::microlocal::CutoffDictionary::build(
                    lat2,
                    cfg2.clone(),
                )?;
                let wf2 =
                    microsing_core::microlocal::wavefront(&pulled, &dict2, cfg2.threshold)?;
                write_atomic(
                    &out_dir.join(format!("anchor_{name}_wavefront2d.csv")),
                    &wf2.to_csv(),
                )
                .map_err(|e| CliError::Io(e.to_string()))?;
                results.push(CheckResult::from_bool(
                    format!("anchor-{name}"),
                    check.pass,
                    json!({
                        "distance_cells": check.distance_cells,
                        "wf_base": check.wf_1d,
                        "wf_pullback": check.wf_2d,
                    }),
                ));
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown groupoid demo '{other}' (equivariance|anchor)"
            )))
        }
    }
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(RunReport::new(
        format!("groupoid {demo} t={t}"),
        cfg.seed,
        config_value(cfg),
        results,
        vec![("groupoid".into(), ms)],
    ))
}

/// Wavefront membership of an element against the closed formula.
pub fn cmd_nctorus(
    element_file: Option<&str>,
    theta_spec: &str,
    cfg: &RunConfig,
) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    let theta = parse_theta(theta_spec)?;
    let element = match element_file {
        Some(path) => {
            let raw = std::fs::read_to_string(path).map_err(|e| CliError::Io(e.to_string()))?;
            parse_element(&raw, theta)?
        }
        None => {
            // the membership example: f(s) = e^{-2 pi i s/theta} - e^{-2 pi i/theta}
            let f = nct::ThetaFunction::from_modes(
                theta,
                [
                    (1, C64::new(1.0, 0.0)),
                    (0, -C64::from_polar(1.0, -std::f64::consts::TAU / theta)),
                ],
            );
            nct::NCElement::from_terms(theta, [(1, f)])
                .map_err(|e| CliError::Internal(e.to_string()))?
        }
    };
    let member = nct::nc_wf_membership(&element).map_err(|e| CliError::Internal(e.to_string()))?;
    let formula = nct::nc_wf_membership_formula(&element);
    let results = vec![CheckResult::from_bool(
        "membership-formula-agreement",
        member == formula,
        json!({"member": member, "formula_member": formula, "agree": member == formula, "theta": theta}),
    )];
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(RunReport::new(
        format!("nctorus theta={theta_spec}"),
        cfg.seed,
        config_value(cfg),
        results,
        vec![("nctorus".into(), ms)],
    ))
}

fn parse_theta(spec: &str) -> Result<f64, CliError> {
    let v = if let Some((p, q)) = spec.split_once('/') {
        let p: f64 = p
            .parse()
            .map_err(|_| CliError::Usage(format!("bad theta '{spec}'")))?;
        let q: f64 = q
            .parse()
            .map_err(|_| CliError::Usage(format!("bad theta '{spec}'")))?;
        p / q
    } else {
        spec.parse()
            .map_err(|_| CliError::Usage(format!("bad theta '{spec}'")))?
    };
    if !(v > 0.0 && v <= 1.0) {
        return Err(CliError::Usage(format!(
            "theta must lie in (0, 1], got {v}"
        )));
    }
    Ok(v)
}

/// Element files: `{"terms": [{"n": 1, "coeffs": [{"m": 0, "re": 1.0, "im": 0.0}]}]}`.
fn parse_element(raw: &str, theta: f64) -> Result<nct::NCElement, CliError> {
    #[derive(serde::Deserialize)]
    struct Coeff {
        m: i64,
        re: f64,
        im: f64,
    }
    #[derive(serde::Deserialize)]
    struct Term {
        n: i64,
        coeffs: Vec<Coeff>,
    }
    #[derive(serde::Deserialize)]
    struct ElementFile {
        terms: Vec<Term>,
    }
    let parsed: ElementFile =
        serde_json::from_str(raw).map_err(|e| CliError::Usage(format!("element file: {e}")))?;
    let terms: Vec<(i64, nct::ThetaFunction)> = parsed
        .terms
        .into_iter()
        .map(|t| {
            let f = nct::ThetaFunction::from_modes(
                theta,
                t.coeffs.into_iter().map(|c| (c.m, C64::new(c.re, c.im))),
            );
            (t.n, f)
        })
        .collect();
    nct::NCElement::from_terms(theta, terms).map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_parsing() {
        assert!((parse_theta("5/7").unwrap() - 5.0 / 7.0).abs() < 1e-15);
        assert!((parse_theta("0.3").unwrap() - 0.3).abs() < 1e-15);
        assert!(parse_theta("7/5").is_err());
        assert!(parse_theta("x").is_err());
    }

    #[test]
    fn analyze_small_lattice() {
        let mut cfg = RunConfig::default();
        cfg.lattice.n = 64;
        let out = std::env::temp_dir().join("microsing-analyze-test");
        let rep = cmd_analyze_at("delta:0", &cfg, &out).unwrap();
        assert!(rep
            .results
            .iter()
            .any(|r| r.name == "classifier-oracle-agreement"
                && r.status == crate::report::CheckStatus::Pass));
    }
}
