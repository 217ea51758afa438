//! Graded norm reports and CSV export.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernel::SmoothingKernel;
use crate::spectral::SpectralDistribution;

/// A window of graded norm values `n -> ||x||_n` for one object.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradedNormReport {
    pub object_id: String,
    pub values: Vec<(i64, f64)>,
}

impl GradedNormReport {
    pub fn new(object_id: impl Into<String>, values: Vec<(i64, f64)>) -> Result<Self> {
        let r = Self {
            object_id: object_id.into(),
            values,
        };
        r.validate()?;
        Ok(r)
    }

    /// Sobolev norms of a distribution over an integer window.
    pub fn for_distribution(
        object_id: impl Into<String>,
        u: &SpectralDistribution,
        window: (i64, i64),
    ) -> Result<Self> {
        let values = (window.0..=window.1)
            .map(|n| (n, u.sobolev_norm(n as f64)))
            .collect();
        Self::new(object_id, values)
    }

    /// Graded Hilbert-Schmidt norms of a kernel from level 0 to `n_max`.
    pub fn for_kernel(
        object_id: impl Into<String>,
        t: &SmoothingKernel,
        n_max: i64,
    ) -> Result<Self> {
        let table = t.graded_norm_table(n_max)?;
        let values = table
            .into_iter()
            .enumerate()
            .map(|(n, v)| (n as i64, v))
            .collect();
        Self::new(object_id, values)
    }

    /// Graded seminorms are nonnegative and nondecreasing in n.
    pub fn validate(&self) -> Result<()> {
        for w in self.values.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(CoreError::InvalidInput("indices must increase".into()));
            }
            if w[1].1 + 1e-12 < w[0].1 {
                return Err(CoreError::InvalidInput(format!(
                    "graded norms must be nondecreasing: ||.||_{} = {} > ||.||_{} = {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        if self.values.iter().any(|(_, v)| *v < 0.0 || !v.is_finite()) {
            return Err(CoreError::InvalidInput("norm values must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// CSV rows `n,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,value\n");
        for (n, v) in &self.values {
            s.push_str(&format!("{n},{v:.17e}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_monotonicity() {
        assert!(GradedNormReport::new("ok", vec![(0, 1.0), (1, 2.0)]).is_ok());
        assert!(GradedNormReport::new("bad", vec![(0, 2.0), (1, 1.0)]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = GradedNormReport::new("x", vec![(0, 1.0), (2, 3.5)]).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("n,value\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn object_constructors_validate() {
        use crate::lattice::FrequencyLattice;
        let lat = FrequencyLattice::new(1, 8).unwrap();
        let u = SpectralDistribution::delta(lat, [0.0, 0.0]);
        let r = GradedNormReport::for_distribution("delta", &u, (0, 4)).unwrap();
        assert_eq!(r.values.len(), 5);
        let t = SmoothingKernel::identity(lat);
        let r = GradedNormReport::for_kernel("id", &t, 3).unwrap();
        assert_eq!(r.values.len(), 4);
    }
}
