//! Stark shifts, dipole-dipole couplings and radiative lifetimes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{
    BOHR_MAGNETON, COULOMB_EV_ANGSTROM, ELEMENTARY_CHARGE, HBAR, HBAR_EV_S, PLANCK, PLANCK_EV_S, SPEED_OF_LIGHT,
    VACUUM_PERMEABILITY, VACUUM_PERMITTIVITY,
};
use crate::error::{require_positive, DapError, Result};
use crate::fit::polyfit;

/// Electron g-factor used for the NV spin-spin reference curve.
pub const NV_G_FACTOR: f64 = 2.003;

/// Linear and quadratic Stark response along one field axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StarkModel {
    /// Dipole change projected on the field axis, e·Å.
    pub delta_mu: f64,
    /// Polarizability change along the axis, e·Å² per V.
    pub delta_alpha: f64,
    pub diagnostics: Option<StarkFitDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarkFitDiagnostics {
    /// Fitted zero-field offset, eV.
    pub intercept: f64,
    pub delta_mu_std: Option<f64>,
    pub delta_alpha_std: Option<f64>,
    pub residuals: Vec<f64>,
    pub rms_residual: f64,
}

impl StarkModel {
    pub fn new(delta_mu: f64, delta_alpha: f64) -> Self {
        Self { delta_mu, delta_alpha, diagnostics: None }
    }
}

/// `ΔE = −Δμ·E − ½ Δα E²` for a field `E` in V/Å, eV.
pub fn stark_shift(model: &StarkModel, field: f64) -> f64 {
    -model.delta_mu * field - 0.5 * model.delta_alpha * field * field
}

/// Quadratic least-squares fit of `(E [V/Å], ΔE [eV])` points.
pub fn fit_stark(points: &[(f64, f64)]) -> Result<StarkModel> {
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = polyfit(&x, &y, 2)?;
    let c = &fit.coefficients;
    Ok(StarkModel {
        delta_mu: -c[1],
        delta_alpha: -2.0 * c[2],
        diagnostics: Some(StarkFitDiagnostics {
            intercept: c[0],
            delta_mu_std: fit.std_errors.as_ref().map(|s| s[1]),
            delta_alpha_std: fit.std_errors.as_ref().map(|s| 2.0 * s[2]),
            rms_residual: fit.rms_residual,
            residuals: fit.residuals,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionQuery {
    /// e·Å
    pub mu1: [f64; 3],
    /// e·Å
    pub mu2: [f64; 3],
    /// Separation vector from dipole 1 to dipole 2, Å.
    pub r: [f64; 3],
    pub eps_r: f64,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Screened dipole-dipole coupling `V/h`, Hz.
pub fn dipole_interaction(q: &InteractionQuery) -> Result<f64> {
    require_positive("eps_r", q.eps_r)?;
    let r = dot(q.r, q.r).sqrt();
    if !(r > 0.0) || !r.is_finite() {
        return Err(DapError::domain("dipole separation must be positive"));
    }
    let n = [q.r[0] / r, q.r[1] / r, q.r[2] / r];
    let angular = dot(q.mu1, q.mu2) - 3.0 * dot(q.mu1, n) * dot(q.mu2, n);
    let v = COULOMB_EV_ANGSTROM * angular / (q.eps_r * r.powi(3));
    Ok(v / PLANCK_EV_S)
}

/// Parallel dipoles of the given magnitudes side by side (perpendicular to `r`), Hz.
pub fn side_by_side_interaction(mu1: f64, mu2: f64, eps_r: f64, r: f64) -> Result<f64> {
    dipole_interaction(&InteractionQuery { mu1: [0.0, 0.0, mu1], mu2: [0.0, 0.0, mu2], r: [r, 0.0, 0.0], eps_r })
}

/// Magnetic coupling `μ₀(gμ_B)²/(4πh r³)` of two g = 2.003 spins at `r` Å, Hz.
pub fn spin_spin_reference(r: f64) -> Result<f64> {
    require_positive("separation", r)?;
    let r_m = r * 1e-10;
    let gmu = NV_G_FACTOR * BOHR_MAGNETON;
    Ok(VACUUM_PERMEABILITY * gmu * gmu / (4.0 * std::f64::consts::PI * PLANCK * r_m.powi(3)))
}

/// Distance at which the side-by-side coupling drops to `threshold` Hz, Å.
pub fn reach_radius(mu1: f64, mu2: f64, eps_r: f64, threshold: f64) -> Result<f64> {
    require_positive("threshold", threshold)?;
    let at_unit = side_by_side_interaction(mu1, mu2, eps_r, 1.0)?.abs();
    Ok((at_unit / threshold).cbrt())
}

/// How the electric coupling compares with the spin-spin reference. Both
/// fall as `1/r³`, so their ratio does not depend on distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinComparison {
    pub ratio: f64,
    pub factor: f64,
    /// True when the ratio exceeds `factor` at every separation.
    pub exceeds_everywhere: bool,
}

pub fn compare_with_spin(mu1: f64, mu2: f64, eps_r: f64, factor: f64) -> Result<SpinComparison> {
    let ratio = side_by_side_interaction(mu1, mu2, eps_r, 1.0)?.abs() / spin_spin_reference(1.0)?;
    Ok(SpinComparison { ratio, factor, exceeds_everywhere: ratio > factor })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapRow {
    /// Å
    pub r: f64,
    pub dipole_hz: f64,
    pub spin_spin_hz: f64,
}

/// Side-by-side couplings on `points` log-spaced separations from `r_min` to `r_max` Å.
pub fn interaction_map(mu1: f64, mu2: f64, eps_r: f64, r_min: f64, r_max: f64, points: usize) -> Result<Vec<MapRow>> {
    require_positive("r_min", r_min)?;
    if !(r_max > r_min) || points < 2 {
        return Err(DapError::domain("map needs r_max > r_min and at least two points"));
    }
    let (l0, l1) = (r_min.ln(), r_max.ln());
    (0..points)
        .into_par_iter()
        .map(|i| {
            let r = if i == points - 1 { r_max } else { (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp() };
            Ok(MapRow { r, dipole_hz: side_by_side_interaction(mu1, mu2, eps_r, r)?, spin_spin_hz: spin_spin_reference(r)? })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LifetimeConvention {
    /// `3ε₀hc³ / (2 n_r ω³ μ²)`
    #[default]
    AsPrinted,
    /// `3πε₀ħc³ / (n_r ω³ μ²)`
    #[serde(rename = "standard-3πε₀ħ")]
    Standard,
}

impl LifetimeConvention {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "as-printed" => Ok(Self::AsPrinted),
            "standard" | "standard-3πε₀ħ" | "standard-3pi-eps0-hbar" => Ok(Self::Standard),
            other => Err(DapError::domain(format!("unknown lifetime convention `{other}`"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::AsPrinted => "as-printed",
            Self::Standard => "standard-3πε₀ħ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeInput {
    /// Photon energy ħω, eV.
    pub energy: f64,
    /// Optical transition dipole, e·Å.
    pub mu_opt: f64,
    pub n_r: f64,
}

/// Spontaneous-emission lifetime, s.
pub fn radiative_lifetime(input: &LifetimeInput, convention: LifetimeConvention) -> Result<f64> {
    require_positive("energy", input.energy)?;
    require_positive("mu_opt", input.mu_opt)?;
    require_positive("n_r", input.n_r)?;
    let omega = input.energy / HBAR_EV_S;
    let mu = input.mu_opt * ELEMENTARY_CHARGE * 1e-10;
    let c3 = SPEED_OF_LIGHT.powi(3);
    let denom = input.n_r * omega.powi(3) * mu * mu;
    Ok(match convention {
        LifetimeConvention::AsPrinted => 3.0 * VACUUM_PERMITTIVITY * PLANCK * c3 / (2.0 * denom),
        LifetimeConvention::Standard => 3.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * HBAR * c3 / denom,
    })
}
