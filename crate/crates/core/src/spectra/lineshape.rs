use rayon::prelude::*;

use crate::constants::BOLTZMANN_EV_PER_K;
use crate::error::{require_positive, DapError, Result};
use crate::lattice::Shell;

use super::franck_condon::{FranckCondonTable, MAX_LEVEL};
use super::VibronicModel;

/// Thermal tail left out of the excited-level sum.
const THERMAL_TAIL: f64 = 1e-14;
/// Franck–Condon weight each row must reach before the n-sum stops.
const ROW_COMPLETENESS: f64 = 1.0 - 1e-8;
/// Stick weight that must fall on the grid.
const MIN_CAPTURED: f64 = 0.999;
/// Gaussians are evaluated out to this many standard deviations.
const GAUSSIAN_CUTOFF: f64 = 9.0;

/// Zero-phonon Lorentzian half width and sideband Gaussian standard deviation, eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Broadening {
    pub gamma: f64,
    pub sigma: f64,
}

impl Default for Broadening {
    fn default() -> Self {
        Self { gamma: 0.003, sigma: 0.030 }
    }
}

impl Broadening {
    pub fn new(gamma: f64, sigma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        require_positive("sigma", sigma)?;
        Ok(Self { gamma, sigma })
    }

    fn default_step(&self) -> f64 {
        self.gamma.min(self.sigma) / 10.0
    }
}

/// Uniform energy grid, eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl EnergyGrid {
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < 2 || !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(DapError::domain("grid needs at least two points and end > start"));
        }
        Ok(Self { start, step: (end - start) / (len - 1) as f64, len })
    }

    /// Grid over `[lo, hi]` with spacing no coarser than `step`.
    pub fn spanning(lo: f64, hi: f64, step: f64) -> Result<Self> {
        require_positive("grid step", step)?;
        let len = ((hi - lo) / step).ceil() as usize + 1;
        if len > 10_000_000 {
            return Err(DapError::Resource(format!("{len} grid points")));
        }
        Self::new(lo, hi, len.max(2))
    }

    /// `E_zpl ± max(10·S·ħΩ, 0.5 eV)` for one model.
    pub fn for_model(model: &VibronicModel, broadening: &Broadening) -> Result<Self> {
        let (lo, hi) = default_window(model);
        Self::spanning(lo, hi, broadening.default_step())
    }

    /// Union of the default windows of several models.
    pub fn for_models<'a>(models: impl IntoIterator<Item = &'a VibronicModel>, broadening: &Broadening) -> Result<Self> {
        let (lo, hi) = models
            .into_iter()
            .map(default_window)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), (a, b)| (l.min(a), h.max(b)));
        if !lo.is_finite() {
            return Err(DapError::domain("no models given"));
        }
        Self::spanning(lo, hi, broadening.default_step())
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }
}

fn default_window(model: &VibronicModel) -> (f64, f64) {
    let sideband = 10.0 * (model.s_g * model.omega_g).max(model.s_e * model.omega_e) * 1e-3;
    let half = sideband.max(0.5);
    (model.e_zpl - half, model.e_zpl + half)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMetadata {
    /// K
    pub temperature: f64,
    pub broadening: Broadening,
    /// Fraction of the stick weight in the (0,0) line.
    pub zpl_weight: f64,
    /// Fraction of the stick weight whose line centres fall on the grid.
    pub captured_weight: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComponent {
    pub label: String,
    /// Share of the total area carried by this component.
    pub weight: f64,
    pub intensity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// eV
    pub energy: Vec<f64>,
    /// 1/eV
    pub intensity: Vec<f64>,
    pub metadata: SpectrumMetadata,
    pub components: Vec<SpectrumComponent>,
}

impl Spectrum {
    pub fn area(&self) -> f64 {
        trapezoid(&self.energy, &self.intensity)
    }

    /// Mean emission energy, eV.
    pub fn first_moment(&self) -> f64 {
        let weighted: Vec<f64> = self.energy.iter().zip(&self.intensity).map(|(e, i)| e * i).collect();
        trapezoid(&self.energy, &weighted) / self.area()
    }

    pub fn peaks(&self, min_prominence_fraction: f64) -> Vec<Peak> {
        find_peaks(&self.energy, &self.intensity, min_prominence_fraction)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Stick {
    energy: f64,
    weight: f64,
    zero_phonon: bool,
}

fn thermal_weights(model: &VibronicModel, temperature: f64) -> Result<Vec<f64>> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(DapError::domain("temperature must be nonnegative"));
    }
    if temperature == 0.0 {
        return Ok(vec![1.0]);
    }
    let q = (-model.omega_e * 1e-3 / (BOLTZMANN_EV_PER_K * temperature)).exp();
    // smallest M whose omitted tail q^(M+1) is below THERMAL_TAIL
    let levels = if q <= THERMAL_TAIL { 0 } else { (THERMAL_TAIL.ln() / q.ln()).ceil() as usize - 1 };
    if levels > MAX_LEVEL {
        return Err(DapError::Resource(format!(
            "{levels} thermally populated levels exceed the cap of {MAX_LEVEL}"
        )));
    }
    Ok((0..=levels).map(|m| (1.0 - q) * q.powi(m as i32)).collect())
}

fn sticks(model: &VibronicModel, temperature: f64) -> Result<Vec<Stick>> {
    let weights = thermal_weights(model, temperature)?;
    let max_m = weights.len() - 1;
    let mean = model.s_g.max(model.s_e) + max_m as f64;
    let mut max_n = ((mean + 10.0 * (mean + 1.0).sqrt() + 10.0).ceil() as usize).min(MAX_LEVEL);
    let table = loop {
        let table = FranckCondonTable::new(model.omega_e, model.omega_g, model.delta_q, max_m, max_n)?;
        let complete = (0..=max_m).all(|m| table.row(m).iter().map(|x| x * x).sum::<f64>() >= ROW_COMPLETENESS);
        if complete {
            break table;
        }
        if max_n == MAX_LEVEL {
            return Err(DapError::Truncation(format!(
                "Franck-Condon rows not complete within {MAX_LEVEL} ground-state levels"
            )));
        }
        max_n = (2 * max_n).min(MAX_LEVEL);
    };
    let mut out = Vec::with_capacity((max_m + 1) * (max_n + 1));
    for (m, w) in weights.iter().enumerate() {
        for n in 0..=max_n {
            let a = table.get(m, n);
            out.push(Stick {
                energy: model.e_zpl + (m as f64 * model.omega_e - n as f64 * model.omega_g) * 1e-3,
                weight: w * a * a,
                zero_phonon: m == 0 && n == 0,
            });
        }
    }
    Ok(out)
}

fn broaden(sticks: &[Stick], grid: &EnergyGrid, b: &Broadening) -> Vec<f64> {
    let mut y = vec![0.0; grid.len];
    let norm = 1.0 / (b.sigma * (2.0 * std::f64::consts::PI).sqrt());
    for s in sticks {
        if s.weight == 0.0 {
            continue;
        }
        if s.zero_phonon {
            for (i, yi) in y.iter_mut().enumerate() {
                let d = grid.at(i) - s.energy;
                *yi += s.weight * b.gamma / std::f64::consts::PI / (d * d + b.gamma * b.gamma);
            }
        } else {
            let lo = ((s.energy - GAUSSIAN_CUTOFF * b.sigma - grid.start) / grid.step).floor().max(0.0) as usize;
            let hi = (((s.energy + GAUSSIAN_CUTOFF * b.sigma - grid.start) / grid.step).ceil().max(0.0) as usize)
                .min(grid.len - 1);
            for i in lo..=hi {
                let z = (grid.at(i) - s.energy) / b.sigma;
                y[i] += s.weight * norm * (-0.5 * z * z).exp();
            }
        }
    }
    y
}

/// Thermally averaged, broadened emission lineshape normalized to unit area.
///
/// Lines sit at `E_zpl + m·ħΩ_e − n·ħΩ_g` with weight `w_m(T)·|⟨χ_e,m|χ_g,n⟩|²`;
/// the (0,0) line is Lorentzian and every phonon line Gaussian.
pub fn lineshape(model: &VibronicModel, temperature: f64, grid: &EnergyGrid, broadening: &Broadening) -> Result<Spectrum> {
    require_positive("gamma", broadening.gamma)?;
    require_positive("sigma", broadening.sigma)?;
    let sticks = sticks(model, temperature)?;
    let total: f64 = sticks.iter().map(|s| s.weight).sum();
    let half_step = 0.5 * grid.step;
    let captured: f64 = sticks
        .iter()
        .filter(|s| s.energy >= grid.start - half_step && s.energy <= grid.end() + half_step)
        .map(|s| s.weight)
        .sum::<f64>()
        / total;
    if captured < MIN_CAPTURED {
        return Err(DapError::Truncation(format!(
            "grid [{:.4}, {:.4}] eV captures only {:.6} of the line weight",
            grid.start,
            grid.end(),
            captured
        )));
    }
    let mut intensity = broaden(&sticks, grid, broadening);
    let energy = grid.energies();
    let area = trapezoid(&energy, &intensity);
    if !(area > 0.0) {
        return Err(DapError::Truncation("lineshape has no area on the grid".into()));
    }
    intensity.iter_mut().for_each(|v| *v /= area);
    let zpl = sticks.iter().find(|s| s.zero_phonon).map_or(0.0, |s| s.weight) / total;
    Ok(Spectrum {
        energy,
        intensity,
        metadata: SpectrumMetadata {
            temperature,
            broadening: *broadening,
            zpl_weight: zpl,
            captured_weight: captured,
            provenance: "model".into(),
        },
        components: Vec::new(),
    })
}

/// Multiplicity-weighted sum of per-shell lineshapes on a shared grid.
pub fn composite_spectrum(
    shell_models: &[(Shell, VibronicModel)],
    temperature: f64,
    broadening: &Broadening,
    grid: Option<&EnergyGrid>,
) -> Result<Spectrum> {
    if shell_models.is_empty() {
        return Err(DapError::domain("composite spectrum needs at least one shell"));
    }
    let grid = match grid {
        Some(g) => *g,
        None => EnergyGrid::for_models(shell_models.iter().map(|(_, m)| m), broadening)?,
    };
    let parts: Vec<Spectrum> = shell_models
        .par_iter()
        .map(|(_, model)| lineshape(model, temperature, &grid, broadening))
        .collect::<Result<_>>()?;
    let total_mult: f64 = shell_models.iter().map(|(s, _)| s.multiplicity as f64).sum();
    let mut intensity = vec![0.0; grid.len];
    let mut components = Vec::with_capacity(parts.len());
    let mut zpl_weight = 0.0;
    let mut captured = 0.0;
    for ((shell, _), part) in shell_models.iter().zip(parts) {
        let w = shell.multiplicity as f64 / total_mult;
        let comp: Vec<f64> = part.intensity.iter().map(|v| w * v).collect();
        intensity.iter_mut().zip(&comp).for_each(|(acc, v)| *acc += v);
        zpl_weight += w * part.metadata.zpl_weight;
        captured += w * part.metadata.captured_weight;
        components.push(SpectrumComponent { label: format!("m{}", shell.m), weight: w, intensity: comp });
    }
    let energy = grid.energies();
    let area = trapezoid(&energy, &intensity);
    intensity.iter_mut().for_each(|v| *v /= area);
    for c in &mut components {
        c.intensity.iter_mut().for_each(|v| *v /= area);
    }
    Ok(Spectrum {
        energy,
        intensity,
        metadata: SpectrumMetadata {
            temperature,
            broadening: *broadening,
            zpl_weight,
            captured_weight: captured,
            provenance: "model".into(),
        },
        components,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub energy: f64,
    pub intensity: f64,
    pub prominence: f64,
}

/// Local maxima whose topographic prominence is at least
/// `min_prominence_fraction` of the global maximum.
pub fn find_peaks(x: &[f64], y: &[f64], min_prominence_fraction: f64) -> Vec<Peak> {
    let n = y.len().min(x.len());
    if n < 3 {
        return Vec::new();
    }
    let ymax = y[..n].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = min_prominence_fraction * ymax;
    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if y[i] > y[i - 1] {
            // walk across a plateau
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let top = y[i];
                let mut left_min = top;
                let mut k = i;
                while k > 0 {
                    k -= 1;
                    if y[k] > top {
                        break;
                    }
                    left_min = left_min.min(y[k]);
                }
                let mut right_min = top;
                let mut k = j;
                while k + 1 < n {
                    k += 1;
                    if y[k] > top {
                        break;
                    }
                    right_min = right_min.min(y[k]);
                }
                let prominence = top - left_min.max(right_min);
                if prominence >= threshold {
                    let c = (i + j) / 2;
                    peaks.push(Peak { index: c, energy: x[c], intensity: top, prominence });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}
