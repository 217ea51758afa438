//! Run configuration: validated defaults, JSON overrides, one seed.

use microsing_core::microlocal::DetectorConfig;
use microsing_core::tameness::{OracleConfig, TamenessOptions};
use microsing_core::{CoreError, FrequencyLattice};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub lattice: LatticeCfg,
    pub oracle: OracleCfg,
    pub dictionary: DictionaryCfg,
    pub tameness: TamenessCfg,
    pub egorov: EgorovCfg,
    pub groupoid: GroupoidCfg,
    pub output: OutputCfg,
    pub seed: u64,
    pub quick: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct LatticeCfg {
    pub d: u8,
    pub n: i64,
    /// Bandlimit of the 2D lattice used by pullback checks.
    pub n_2d: i64,
}

impl Default for LatticeCfg {
    fn default() -> Self {
        Self {
            d: 1,
            n: 128,
            n_2d: 16,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleCfg {
    pub s_max: f64,
    pub discard_top: usize,
    pub dust_rel: f64,
}

impl Default for OracleCfg {
    fn default() -> Self {
        let o = OracleConfig::default();
        Self {
            s_max: o.s_max,
            discard_top: o.discard_top,
            dust_rel: o.dust_rel,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct DictionaryCfg {
    /// Spatial centers per axis (0 = automatic).
    pub centers: usize,
    pub n_dirs_2d: usize,
    /// Base bump width sigma (0 = automatic, 12/N).
    pub width: f64,
    pub scales: Vec<f64>,
    pub alpha: f64,
    pub leakage_tol: f64,
    pub threshold: f64,
    pub energy_rel: f64,
    pub energy_dust: f64,
}

impl Default for DictionaryCfg {
    fn default() -> Self {
        Self {
            centers: 0,
            n_dirs_2d: 16,
            width: 0.0,
            scales: vec![1.0, 1.5, 2.25],
            alpha: 0.45,
            leakage_tol: 5e-3,
            threshold: 0.5,
            energy_rel: 0.05,
            energy_dust: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct TamenessCfg {
    pub window: (i64, i64),
    pub r_max: i64,
    pub tau: f64,
    pub b: i64,
}

impl Default for TamenessCfg {
    fn default() -> Self {
        Self {
            window: (6, 16),
            r_max: 6,
            tau: 1.5,
            b: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EgorovCfg {
    pub dt: f64,
    pub t_list: Vec<f64>,
    /// Metric profile `c(x) = 1 + amplitude cos x`.
    pub c_amplitude: f64,
}

impl Default for EgorovCfg {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            t_list: vec![0.4, 0.7, 1.3],
            c_amplitude: 0.3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupoidCfg {
    pub n: i64,
    pub n_g: i64,
}

impl Default for GroupoidCfg {
    fn default() -> Self {
        Self { n: 16, n_g: 8 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputCfg {
    pub format: String,
    pub directory: String,
}

impl Default for OutputCfg {
    fn default() -> Self {
        Self {
            format: "json".into(),
            directory: ".".into(),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeCfg::default(),
            oracle: OracleCfg::default(),
            dictionary: DictionaryCfg::default(),
            tameness: TamenessCfg::default(),
            egorov: EgorovCfg::default(),
            groupoid: GroupoidCfg::default(),
            output: OutputCfg::default(),
            seed: 42,
            quick: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&str>) -> Result<Self, CoreError> {
        let mut cfg = match path {
            None => Self::default(),
            Some(p) => {
                let raw = std::fs::read_to_string(p)?;
                serde_json::from_str(&raw)
                    .map_err(|e| CoreError::InvalidConfig(format!("config parse: {e}")))?
            }
        };
        cfg.validate()?;
        if cfg.quick {
            cfg = cfg.quickened();
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        FrequencyLattice::new(self.lattice.d, self.lattice.n)?;
        FrequencyLattice::new(2, self.lattice.n_2d)?;
        if self.tameness.window.1 - self.tameness.window.0 + 1 < 6 {
            return Err(CoreError::InvalidConfig("tameness window too short".into()));
        }
        if !(self.output.format == "json" || self.output.format == "csv") {
            return Err(CoreError::InvalidConfig(format!(
                "unknown output format '{}'",
                self.output.format
            )));
        }
        Ok(())
    }

    /// Reduced scale for `--quick` runs. The regularity depth shrinks with
    /// the lattice: the smaller frequency range certifies fewer orders.
    pub fn quickened(mut self) -> Self {
        self.quick = true;
        self.lattice.n = self.lattice.n.min(64);
        self.tameness.r_max = self.tameness.r_max.min(4);
        self.egorov.t_list.truncate(1);
        self
    }

    pub fn lattice_1d(&self) -> FrequencyLattice {
        FrequencyLattice::new(1, self.lattice.n).expect("validated")
    }

    pub fn lattice_2d(&self) -> FrequencyLattice {
        FrequencyLattice::new(2, self.lattice.n_2d).expect("validated")
    }

    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            s_max: self.oracle.s_max,
            discard_top: self.oracle.discard_top,
            dust_rel: self.oracle.dust_rel,
        }
    }

    pub fn detector_config(&self, lattice: FrequencyLattice) -> DetectorConfig {
        let mut d = DetectorConfig::for_lattice(lattice);
        d.centers = self.dictionary.centers;
        d.n_dirs_2d = self.dictionary.n_dirs_2d;
        if self.dictionary.width > 0.0 {
            d.width = self.dictionary.width;
        }
        d.scales = self.dictionary.scales.clone();
        d.alpha = self.dictionary.alpha;
        d.leakage_tol = self.dictionary.leakage_tol;
        d.threshold = self.dictionary.threshold;
        d.oracle = self.oracle_config();
        d.energy_rel = self.dictionary.energy_rel;
        d.energy_dust = self.dictionary.energy_dust;
        d
    }

    pub fn tameness_options(&self) -> TamenessOptions {
        TamenessOptions {
            tau: self.tameness.tau,
            b: self.tameness.b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn quick_reduces_scale() {
        let q = RunConfig::default().quickened();
        assert!(q.lattice.n <= 64);
    }
}
