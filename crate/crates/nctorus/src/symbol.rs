//! Principal symbols of differential operators built from the connections,
//! sampled on the circle, and the ellipticity criterion.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::element::NCElement;
use crate::{C64, NcError, Result};

/// `sigma(D)(t) = sum_{alpha+beta = n} C_{alpha beta} cos^alpha t sin^beta t`
/// sampled at `n_samples` points of the circle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NCSymbol {
    pub t_grid: Vec<f64>,
    pub values: Vec<NCElement>,
    pub order: u32,
}

/// Exact evaluation of the principal symbol from the top-order coefficient
/// table. Coefficients of total order below `n` do not contribute.
pub fn nc_principal_symbol(
    theta: f64,
    coeffs: &[((u32, u32), NCElement)],
    n: u32,
    n_samples: usize,
) -> Result<NCSymbol> {
    if n_samples == 0 {
        return Err(NcError::InvalidInput("need at least one sample".into()));
    }
    if !coeffs.iter().any(|((a, b), _)| a + b == n) {
        return Err(NcError::InvalidInput(format!(
            "no coefficient of total order {n}"
        )));
    }
    let t_grid: Vec<f64> = (0..n_samples)
        .map(|j| std::f64::consts::TAU * j as f64 / n_samples as f64)
        .collect();
    let values = t_grid
        .iter()
        .map(|&t| {
            let mut acc = NCElement::zero(theta);
            for ((alpha, beta), c) in coeffs {
                if alpha + beta != n {
                    continue;
                }
                let scalar = t.cos().powi(*alpha as i32) * t.sin().powi(*beta as i32);
                acc = acc.add(&c.scaled(C64::new(scalar, 0.0)))?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NCSymbol {
        t_grid,
        values,
        order: n,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllipticityVerdict {
    pub elliptic: bool,
    /// Smallest symbol magnitude over the sampled circle (scalar case) or
    /// smallest singular value of the sampled-shift representation.
    pub score: f64,
    /// Set when the verdict comes from the finite-dimensional sampled
    /// representation rather than the exact scalar criterion.
    pub heuristic: bool,
}

/// Is the element a scalar multiple of the identity?
fn as_scalar(a: &NCElement) -> Option<C64> {
    let terms = a.terms();
    if terms.is_empty() {
        return Some(C64::new(0.0, 0.0));
    }
    if terms.len() != 1 {
        return None;
    }
    let (n, f) = &terms[0];
    if *n != 0 {
        return None;
    }
    let coeffs = f.coeffs();
    if coeffs.len() != 1 {
        return None;
    }
    coeffs.get(&0).copied()
}

/// Ellipticity of `sigma(D)`: exact (symbol nonzero at every sample) when
/// all coefficients are scalar; otherwise a flagged heuristic through a
/// finite sampled-shift representation of the algebra.
pub fn nc_is_elliptic(symbol: &NCSymbol) -> EllipticityVerdict {
    let scalars: Option<Vec<C64>> = symbol.values.iter().map(as_scalar).collect();
    match scalars {
        Some(vals) => {
            let score = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
            EllipticityVerdict {
                elliptic: score > 0.0,
                score,
                heuristic: false,
            }
        }
        None => {
            // represent V1 as the cyclic shift and theta functions as
            // diagonal sampling on K integer points; flagged heuristic
            const K: usize = 32;
            let mut score = f64::INFINITY;
            for v in &symbol.values {
                let mut mat = DMatrix::<C64>::zeros(K, K);
                for (n, f) in v.terms() {
                    for row in 0..K {
                        // (f V1^n xi)(j) = f(j) xi(j - n), cyclically
                        let col = ((row as i64 - n).rem_euclid(K as i64)) as usize;
                        mat[(row, col)] += f.eval(row as f64);
                    }
                }
                let sv = mat.svd(false, false).singular_values;
                score = score.min(sv.iter().cloned().fold(f64::INFINITY, f64::min));
            }
            EllipticityVerdict {
                elliptic: score > 1e-9,
                score,
                heuristic: true,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::ThetaFunction;

    const THETA: f64 = 0.6;

    fn scalar(c: f64) -> NCElement {
        NCElement::from_terms(
            THETA,
            [(0, ThetaFunction::constant(THETA, C64::new(c, 0.0)))],
        )
        .unwrap()
    }

    #[test]
    fn laplacian_symbol_is_one() {
        // D = nabla_1^2 + nabla_2^2: sigma(t) = cos^2 + sin^2 = 1
        let coeffs = vec![((2u32, 0u32), scalar(1.0)), ((0, 2), scalar(1.0))];
        let sym = nc_principal_symbol(THETA, &coeffs, 2, 64).unwrap();
        for v in &sym.values {
            let terms = v.terms();
            assert_eq!(terms.len(), 1);
            assert!((terms[0].1.eval(0.0) - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let verdict = nc_is_elliptic(&sym);
        assert!(verdict.elliptic && !verdict.heuristic);
        assert!((verdict.score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_symbol_vanishes_on_axes() {
        // D = nabla_1 nabla_2: sigma(t) = cos t sin t, zero at t = 0
        let coeffs = vec![((1u32, 1u32), scalar(1.0))];
        let sym = nc_principal_symbol(THETA, &coeffs, 2, 64).unwrap();
        let verdict = nc_is_elliptic(&sym);
        assert!(!verdict.elliptic && !verdict.heuristic);
        assert!(verdict.score < 1e-12);
    }

    #[test]
    fn shifted_scalar_symbol() {
        // scalar sigma(t) = 2 + cos t stays positive
        let coeffs = vec![((1u32, 0u32), scalar(1.0)), ((0, 1), scalar(0.0))];
        let sym = nc_principal_symbol(THETA, &coeffs, 1, 64).unwrap();
        // shift by 2: build symbol values by hand
        let shifted = NCSymbol {
            t_grid: sym.t_grid.clone(),
            values: sym
                .values
                .iter()
                .map(|v| v.add(&scalar(2.0)).unwrap())
                .collect(),
            order: 1,
        };
        let verdict = nc_is_elliptic(&shifted);
        assert!(verdict.elliptic && !verdict.heuristic);
        assert!(verdict.score >= 1.0 - 1e-9);
    }

    #[test]
    fn nc_coefficient_symbol_is_heuristic() {
        // D = V1 nabla_1 + nabla_2: sigma(t) = V1 cos t + sin t
        let v1 = NCElement::v1(THETA);
        let coeffs = vec![((1u32, 0u32), v1), ((0, 1), scalar(1.0))];
        let sym = nc_principal_symbol(THETA, &coeffs, 1, 32).unwrap();
        // per-sample values really are V1 cos t + sin t
        let t = sym.t_grid[3];
        let v = &sym.values[3];
        let c1 = v.coefficient(1).unwrap().eval(0.0);
        assert!((c1 - C64::new(t.cos(), 0.0)).norm() < 1e-12);
        let c0 = v.coefficient(0).unwrap().eval(0.0);
        assert!((c0 - C64::new(t.sin(), 0.0)).norm() < 1e-12);

        let verdict = nc_is_elliptic(&sym);
        assert!(verdict.heuristic);
        // |V1 cos t + sin t| is unitarily bounded below by
        // ||cos| - |sin|| which vanishes on the diagonal: expect a small
        // score, and in particular a well-defined one
        assert!(verdict.score.is_finite());
    }
}
