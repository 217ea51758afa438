//! Named distribution constructors for the command line.

use microsing_core::spectral::JsonContainer;
use microsing_core::{CoreError, FrequencyLattice, SpectralDistribution};

/// Parse a distribution spec: `delta:x0`, `hardy`, `sawtooth`,
/// `gauss:sigma`, `power:p:seed`, `random-smooth:seed`,
/// `random-rough:seed`, `random:seed`, `modes:file.json`.
pub fn parse_uspec(spec: &str, lattice: FrequencyLattice) -> Result<SpectralDistribution, CoreError> {
    let mut parts = spec.split(':');
    let head = parts.next().unwrap_or("");
    let usage = |msg: &str| CoreError::InvalidInput(format!("uspec '{spec}': {msg}"));
    match head {
        "delta" => {
            let x0: f64 = parts
                .next()
                .unwrap_or("0")
                .parse()
                .map_err(|_| usage("bad position"))?;
            Ok(SpectralDistribution::delta(lattice, [x0, 0.0]))
        }
        "hardy" => Ok(SpectralDistribution::hardy(lattice)),
        "sawtooth" => Ok(SpectralDistribution::sawtooth(lattice)),
        "gauss" => {
            let sigma: f64 = parts
                .next()
                .unwrap_or("3")
                .parse()
                .map_err(|_| usage("bad sigma"))?;
            if sigma <= 0.0 {
                return Err(usage("sigma must be positive"));
            }
            Ok(SpectralDistribution::gaussian_decay(lattice, sigma))
        }
        "power" => {
            let p: f64 = parts
                .next()
                .ok_or_else(|| usage("missing exponent"))?
                .parse()
                .map_err(|_| usage("bad exponent"))?;
            let seed: u64 = parts
                .next()
                .unwrap_or("0")
                .parse()
                .map_err(|_| usage("bad seed"))?;
            Ok(SpectralDistribution::power_decay(lattice, p, seed))
        }
        "random-smooth" => {
            let seed: u64 = parts
                .next()
                .unwrap_or("0")
                .parse()
                .map_err(|_| usage("bad seed"))?;
            Ok(SpectralDistribution::random_smooth(lattice, seed))
        }
        "random" | "random-rough" => {
            let seed: u64 = parts
                .next()
                .unwrap_or("0")
                .parse()
                .map_err(|_| usage("bad seed"))?;
            Ok(SpectralDistribution::random_rough(lattice, seed))
        }
        "modes" => {
            let path = parts.next().ok_or_else(|| usage("missing file"))?;
            let raw = std::fs::read_to_string(path)?;
            let container: JsonContainer = serde_json::from_str(&raw)
                .map_err(|e| CoreError::InvalidInput(format!("modes file: {e}")))?;
            SpectralDistribution::from_json(&container)
        }
        "" => Err(usage("empty spec")),
        other => Err(usage(&format!("unknown constructor '{other}'"))),
    }
}
