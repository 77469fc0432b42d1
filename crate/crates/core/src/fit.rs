//! Small polynomial least-squares solver shared by the ZPL, Stark and
//! finite-size fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{DapError, Result};

/// Relative singular-value threshold below which the design is rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;

/// Result of an ordinary least-squares polynomial fit `y = Σ c_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Coefficients in ascending power order.
    pub coefficients: Vec<f64>,
    /// Standard errors of the coefficients. `None` when there are no residual
    /// degrees of freedom.
    pub std_errors: Option<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    /// Residual standard deviation, `sqrt(RSS / (N - p))`; zero when `N == p`.
    pub residual_std: f64,
    pub max_abs_residual: f64,
}

/// Fits a polynomial of the given degree. The abscissa is centred and scaled
/// internally so that the normal matrix stays well conditioned.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    let n = x.len();
    let p = degree + 1;
    if n != y.len() {
        return Err(DapError::Structural(format!("{n} abscissae but {} ordinates", y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(DapError::domain("fit data must be finite"));
    }
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < p {
        return Err(DapError::Rank(format!(
            "degree-{degree} fit needs {p} distinct abscissae, got {}",
            distinct.len()
        )));
    }

    let mean = x.iter().sum::<f64>() / n as f64;
    let scale = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let t: Vec<f64> = x.iter().map(|v| (v - mean) / scale).collect();

    let design = DMatrix::from_fn(n, p, |i, k| t[i].powi(k as i32));
    let rhs = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= RANK_TOLERANCE * smax {
        return Err(DapError::Rank("design matrix is singular".into()));
    }
    let scaled = svd
        .solve(&rhs, RANK_TOLERANCE * smax)
        .map_err(|e| DapError::Rank(e.to_string()))?;

    let fitted = &design * &scaled;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let dof = n - p;
    let residual_std = if dof > 0 { (rss / dof as f64).sqrt() } else { 0.0 };

    // Map coefficients of t = (x - mean)/scale back onto powers of x.
    let transform = power_basis_transform(p, mean, scale);
    let coefficients: Vec<f64> = (0..p)
        .map(|j| (0..p).map(|k| transform[(j, k)] * scaled[k]).sum())
        .collect();

    let std_errors = if dof > 0 {
        let vt = svd.v_t.as_ref().expect("requested V^T");
        let s = &svd.singular_values;
        // Cov(scaled) = σ² V Σ⁻² Vᵀ
        let cov_scaled = DMatrix::from_fn(p, p, |a, b| {
            (0..p).map(|k| vt[(k, a)] * vt[(k, b)] / (s[k] * s[k])).sum::<f64>()
        }) * (residual_std * residual_std);
        let cov = &transform * cov_scaled * transform.transpose();
        Some((0..p).map(|j| cov[(j, j)].max(0.0).sqrt()).collect())
    } else {
        None
    };

    Ok(PolyFit {
        coefficients,
        std_errors,
        rms_residual: (rss / n as f64).sqrt(),
        residual_std,
        max_abs_residual: residuals.iter().fold(0.0, |m, r| f64::max(m, r.abs())),
        residuals,
    })
}

/// Matrix `T` with `c_x = T · c_t` for `t = (x - mean)/scale`.
fn power_basis_transform(p: usize, mean: f64, scale: f64) -> DMatrix<f64> {
    // ((x - mean)/scale)^k = scale^-k Σ_j C(k,j) x^j (-mean)^(k-j)
    let mut t = DMatrix::zeros(p, p);
    for k in 0..p {
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            t[(j, k)] = binom * (-mean).powi((k - j) as i32) / scale.powi(k as i32);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line() {
        let x = [0.1, 0.2, 0.35, 0.5];
        let y: Vec<f64> = x.iter().map(|v| 1.25 - 0.75 * v).collect();
        let fit = polyfit(&x, &y, 1).unwrap();
        assert_relative_eq!(fit.coefficients[0], 1.25, max_relative = 1e-13);
        assert_relative_eq!(fit.coefficients[1], -0.75, max_relative = 1e-13);
        assert!(fit.max_abs_residual < 1e-14);
    }

    #[test]
    fn exact_quadratic_with_small_abscissae() {
        let x: Vec<f64> = (-3..=3).map(|i| i as f64 * 1e-4).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 - 12.0 * v + 750.0 * v * v).collect();
        let fit = polyfit(&x, &y, 2).unwrap();
        assert_relative_eq!(fit.coefficients[1], -12.0, max_relative = 1e-10);
        assert_relative_eq!(fit.coefficients[2], 750.0, max_relative = 1e-9);
    }

    #[test]
    fn repeated_abscissae_are_rank_deficient() {
        assert!(matches!(polyfit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 1), Err(DapError::Rank(_))));
        assert!(matches!(polyfit(&[1.0, 2.0, 2.0], &[1.0, 2.0, 3.0], 2), Err(DapError::Rank(_))));
    }

    #[test]
    fn line_standard_errors_match_textbook_formula() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.1, 1.9, 3.2, 3.9, 5.05];
        let fit = polyfit(&x, &y, 1).unwrap();
        let n = x.len() as f64;
        let xm = x.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
        let s = fit.residual_std;
        let se = fit.std_errors.unwrap();
        assert_relative_eq!(se[1], s / sxx.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(se[0], s * (1.0 / n + xm * xm / sxx).sqrt(), max_relative = 1e-10);
    }
}
