//! Polynomial response series `R[T*_ε] = Σ r_t ε^t`.

use nalgebra::{DMatrix, DVector};

use super::ExperimentError;

const RATIO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesFit {
    /// `r_0 ..= r_order`.
    pub coefficients: Vec<f64>,
    /// `r_1 / r_0`, if `r_0` is not negligible.
    pub signal_to_noise: Option<f64>,
    /// `r_2 / r_1`, if `r_1` is not negligible.
    pub shielding: Option<f64>,
    pub residual: f64,
}

fn ratio(num: Option<&f64>, den: Option<&f64>) -> Option<f64> {
    match (num, den) {
        (Some(n), Some(d)) if d.abs() >= RATIO_TOL => Some(n / d),
        (None, Some(d)) if d.abs() >= RATIO_TOL => Some(0.0),
        _ => None,
    }
}

/// Least-squares fit of a degree-`order` polynomial to `(ε, R)` samples.
pub fn fit_response_series(samples: &[(f64, f64)], order: usize) -> Result<SeriesFit, ExperimentError> {
    let degenerate =
        |reason: &str| ExperimentError::DegenerateFit { samples: samples.len(), order, reason: reason.to_string() };
    let mut eps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < order + 1 {
        return Err(degenerate("fewer distinct amplitudes than coefficients"));
    }
    let cols = order + 1;
    let mut a = DMatrix::from_fn(samples.len(), cols, |i, j| samples[i].0.powi(j as i32));
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let scale: Vec<f64> = (0..cols)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let largest = svd.singular_values.max();
    if svd.singular_values.iter().any(|v| *v <= largest * 1e-13) {
        return Err(degenerate("rank-deficient sample matrix"));
    }
    let x = svd.solve(&b, largest * 1e-13).map_err(degenerate)?;
    let residual = (&a * &x - &b).norm();
    let coefficients: Vec<f64> = x.iter().zip(&scale).map(|(c, s)| c / s).collect();
    Ok(SeriesFit {
        signal_to_noise: ratio(coefficients.get(1), coefficients.first()),
        shielding: ratio(coefficients.get(2), coefficients.get(1)),
        coefficients,
        residual,
    })
}
