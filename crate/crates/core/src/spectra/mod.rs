//! One-dimensional configurational-coordinate photoluminescence.
//!
//! Geometry differences reduce to a single mass-weighted displacement `ΔQ`
//! and effective frequencies; Huang–Rhys factors, Franck–Condon overlaps and
//! thermally averaged, broadened lineshapes follow from those.
//!
//! Units: `ΔQ` in amu^½·Å, phonon energies `ħΩ` in meV, line energies in eV.
//! The ω³ photon-energy prefactor of emission is not applied; every spectrum
//! is a normalized lineshape.

mod franck_condon;
mod lineshape;
mod model_file;

pub use franck_condon::{fc_overlap, FranckCondonTable, MAX_LEVEL};
pub use lineshape::{
    composite_spectrum, find_peaks, lineshape, Broadening, EnergyGrid, Peak, Spectrum, SpectrumComponent,
    SpectrumMetadata,
};
pub use model_file::{load_model_file, ModelFile, ModelSet, PairSpec, VibronicSpec};

use crate::constants::HBAR2_PER_AMU_ANGSTROM2_MEV;
use crate::error::{require_positive, DapError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub label: String,
    /// amu
    pub mass: f64,
}

/// Ground- and excited-state geometries sharing one atom ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryPair {
    pub atoms: Vec<Atom>,
    pub ground: Vec<[f64; 3]>,
    pub excited: Vec<[f64; 3]>,
}

impl GeometryPair {
    pub fn new(atoms: Vec<Atom>, ground: Vec<[f64; 3]>, excited: Vec<[f64; 3]>) -> Result<Self> {
        if ground.len() != atoms.len() || excited.len() != atoms.len() {
            return Err(DapError::Structural(format!(
                "{} atoms but {} ground and {} excited positions",
                atoms.len(),
                ground.len(),
                excited.len()
            )));
        }
        for a in &atoms {
            if !(a.mass > 0.0) {
                return Err(DapError::domain(format!("mass of `{}` must be positive", a.label)));
            }
        }
        Ok(Self { atoms, ground, excited })
    }

    /// Pairs two labelled structures, checking that the labels agree.
    pub fn from_labeled(
        ground: &[(String, f64, [f64; 3])],
        excited: &[(String, f64, [f64; 3])],
    ) -> Result<Self> {
        if ground.len() != excited.len() {
            return Err(DapError::Structural(format!("{} vs {} atoms", ground.len(), excited.len())));
        }
        for (i, (g, e)) in ground.iter().zip(excited).enumerate() {
            if g.0 != e.0 {
                return Err(DapError::Structural(format!("atom {i}: `{}` vs `{}`", g.0, e.0)));
            }
        }
        let atoms = ground.iter().map(|(l, m, _)| Atom { label: l.clone(), mass: *m }).collect();
        Self::new(atoms, ground.iter().map(|g| g.2).collect(), excited.iter().map(|e| e.2).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    /// Total mass-weighted displacement, amu^½·Å.
    pub delta_q: f64,
    /// `ΔQ_k` per supplied normal mode.
    pub mode_projections: Option<Vec<f64>>,
    /// `(ΔQ_k / ΔQ)²`.
    pub mode_weights: Option<Vec<f64>>,
}

/// `ΔQ² = Σ_a m_a |ΔR_a|²`, optionally projected onto mass-weighted normal
/// modes given as one displacement vector per atom.
pub fn mass_weighted_displacement(pair: &GeometryPair, modes: Option<&[Vec<[f64; 3]>]>) -> Result<Displacement> {
    let n = pair.atoms.len();
    let weighted: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let s = pair.atoms[i].mass.sqrt();
            let (g, e) = (pair.ground[i], pair.excited[i]);
            [s * (e[0] - g[0]), s * (e[1] - g[1]), s * (e[2] - g[2])]
        })
        .collect();
    let delta_q = weighted.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let (mode_projections, mode_weights) = match modes {
        None => (None, None),
        Some(modes) => {
            let mut proj = Vec::with_capacity(modes.len());
            for (k, q) in modes.iter().enumerate() {
                if q.len() != n {
                    return Err(DapError::Structural(format!("mode {k} has {} atoms, expected {n}", q.len())));
                }
                proj.push(weighted.iter().zip(q).map(|(w, q)| w[0] * q[0] + w[1] * q[1] + w[2] * q[2]).sum());
            }
            let weights = if delta_q > 0.0 {
                proj.iter().map(|p: &f64| (p / delta_q).powi(2)).collect()
            } else {
                vec![0.0; proj.len()]
            };
            (Some(proj), Some(weights))
        }
    };
    Ok(Displacement { delta_q, mode_projections, mode_weights })
}

/// `Ω = √(Σ p_k ω_k²)`.
pub fn effective_frequency(omegas: &[f64], weights: &[f64]) -> Result<f64> {
    if omegas.len() != weights.len() || omegas.is_empty() {
        return Err(DapError::Structural(format!("{} frequencies, {} weights", omegas.len(), weights.len())));
    }
    if weights.iter().any(|&p| !(p >= 0.0)) {
        return Err(DapError::domain("mode weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(DapError::domain(format!("mode weights sum to {total}, not 1")));
    }
    for &w in omegas {
        require_positive("mode frequency", w)?;
    }
    Ok(omegas.iter().zip(weights).map(|(w, p)| p * w * w).sum::<f64>().sqrt())
}

/// Huang–Rhys factor `S = Ω ΔQ² / (2ħ)` for `ΔQ` in amu^½·Å and `ħΩ` in meV.
pub fn huang_rhys(delta_q: f64, omega: f64) -> Result<f64> {
    if !(delta_q >= 0.0) || !delta_q.is_finite() {
        return Err(DapError::domain("delta_Q must be nonnegative"));
    }
    require_positive("omega", omega)?;
    Ok(omega * delta_q * delta_q / (2.0 * HBAR2_PER_AMU_ANGSTROM2_MEV))
}

/// Effective 1D model of one emission line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibronicModel {
    /// amu^½·Å
    pub delta_q: f64,
    /// Ground-state effective phonon energy, meV.
    pub omega_g: f64,
    /// Excited-state effective phonon energy, meV.
    pub omega_e: f64,
    pub s_g: f64,
    pub s_e: f64,
    /// eV
    pub e_zpl: f64,
}

impl VibronicModel {
    pub fn new(delta_q: f64, omega_g: f64, omega_e: f64, e_zpl: f64) -> Result<Self> {
        if !e_zpl.is_finite() {
            return Err(DapError::domain("E_zpl must be finite"));
        }
        Ok(Self {
            delta_q,
            omega_g,
            omega_e,
            s_g: huang_rhys(delta_q, omega_g)?,
            s_e: huang_rhys(delta_q, omega_e)?,
            e_zpl,
        })
    }

    /// Builds the model from the ground-state Huang–Rhys factor.
    pub fn from_huang_rhys(s_g: f64, omega_g: f64, omega_e: f64, e_zpl: f64) -> Result<Self> {
        if !(s_g >= 0.0) {
            return Err(DapError::domain("Huang-Rhys factor must be nonnegative"));
        }
        require_positive("omega_g", omega_g)?;
        let delta_q = (2.0 * HBAR2_PER_AMU_ANGSTROM2_MEV * s_g / omega_g).sqrt();
        Self::new(delta_q, omega_g, omega_e, e_zpl)
    }

    /// Moves the model to another zero-phonon energy.
    pub fn with_zpl(mut self, e_zpl: f64) -> Self {
        self.e_zpl = e_zpl;
        self
    }

    /// Checks the stored Huang–Rhys factors against `ΔQ` and the frequencies.
    pub fn validate(&self) -> Result<()> {
        for (s, w, name) in [(self.s_g, self.omega_g, "S_g"), (self.s_e, self.omega_e, "S_e")] {
            let expected = huang_rhys(self.delta_q, w)?;
            if (s - expected).abs() > 1e-10 * expected.max(f64::MIN_POSITIVE) && s != expected {
                return Err(DapError::Consistency(format!("{name} = {s} but ΔQ and Ω give {expected}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{AMU, ELEMENTARY_CHARGE, HBAR};
    use approx::assert_relative_eq;

    fn one_atom(mass: f64, g: [f64; 3], e: [f64; 3]) -> GeometryPair {
        GeometryPair::new(vec![Atom { label: "C".into(), mass }], vec![g], vec![e]).unwrap()
    }

    #[test]
    fn single_atom_displacement() {
        let d = mass_weighted_displacement(&one_atom(12.0, [0.0; 3], [0.1, 0.0, 0.0]), None).unwrap();
        assert_relative_eq!(d.delta_q, 12f64.sqrt() * 0.1, max_relative = 1e-14);
        assert!((d.delta_q - 0.3464).abs() < 1e-4);
    }

    #[test]
    fn identical_and_translated_geometries() {
        let g = vec![[0.0, 0.0, 0.0], [1.5, 0.2, -0.3]];
        let atoms = vec![Atom { label: "Si".into(), mass: 28.085 }, Atom { label: "N".into(), mass: 14.007 }];
        let p = GeometryPair::new(atoms.clone(), g.clone(), g.clone()).unwrap();
        assert_eq!(mass_weighted_displacement(&p, None).unwrap().delta_q, 0.0);

        let e = vec![[0.05, 0.0, 0.01], [1.5, 0.25, -0.3]];
        let base = mass_weighted_displacement(&GeometryPair::new(atoms.clone(), g.clone(), e.clone()).unwrap(), None)
            .unwrap()
            .delta_q;
        let shift = |v: &Vec<[f64; 3]>| v.iter().map(|r| [r[0] + 3.3, r[1] - 1.1, r[2] + 0.7]).collect::<Vec<_>>();
        let moved = mass_weighted_displacement(&GeometryPair::new(atoms, shift(&g), shift(&e)).unwrap(), None)
            .unwrap()
            .delta_q;
        assert_relative_eq!(base, moved, max_relative = 1e-12);
    }

    #[test]
    fn mode_weights_sum_to_one_in_a_complete_basis() {
        // one atom, Cartesian basis rotated about z
        let c = 0.6f64;
        let s = 0.8f64;
        let modes = vec![vec![[c, s, 0.0]], vec![[-s, c, 0.0]], vec![[0.0, 0.0, 1.0]]];
        let p = one_atom(4.0, [0.0; 3], [0.1, 0.2, -0.05]);
        let d = mass_weighted_displacement(&p, Some(&modes)).unwrap();
        let w = d.mode_weights.unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
        let q2: f64 = d.mode_projections.unwrap().iter().map(|x| x * x).sum();
        assert_relative_eq!(q2, d.delta_q * d.delta_q, max_relative = 1e-12);
    }

    #[test]
    fn mismatched_geometries_are_structural_errors() {
        let atoms = vec![Atom { label: "C".into(), mass: 12.0 }];
        assert!(matches!(
            GeometryPair::new(atoms, vec![[0.0; 3]], vec![[0.0; 3], [1.0; 3]]),
            Err(DapError::Structural(_))
        ));
        let g = vec![("C".to_string(), 12.0, [0.0; 3])];
        let e = vec![("N".to_string(), 14.0, [0.0; 3])];
        assert!(matches!(GeometryPair::from_labeled(&g, &e), Err(DapError::Structural(_))));
    }

    #[test]
    fn effective_frequency_examples() {
        assert_eq!(effective_frequency(&[42.0], &[1.0]).unwrap(), 42.0);
        assert_relative_eq!(effective_frequency(&[20.0, 40.0], &[0.5, 0.5]).unwrap(), 1000f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(effective_frequency(&[33.0, 33.0, 33.0], &[0.1, 0.7, 0.2]).unwrap(), 33.0, max_relative = 1e-14);
        assert!(matches!(effective_frequency(&[20.0, 40.0], &[0.5, 0.6]), Err(DapError::Domain(_))));
    }

    #[test]
    fn huang_rhys_unit_bridge() {
        // S = 1 worked directly in SI: ΔQ² = 2ħ / Ω
        let omega_mev = 50.0;
        let omega_si = omega_mev * 1e-3 * ELEMENTARY_CHARGE / HBAR;
        let dq_si = (2.0 * HBAR / omega_si).sqrt();
        let dq = dq_si / (AMU.sqrt() * 1e-10);
        assert_relative_eq!(huang_rhys(dq, omega_mev).unwrap(), 1.0, max_relative = 1e-9);
        assert_eq!(huang_rhys(0.0, omega_mev).unwrap(), 0.0);
        let s1 = huang_rhys(0.7, 40.0).unwrap();
        assert_relative_eq!(huang_rhys(1.4, 40.0).unwrap(), 4.0 * s1, max_relative = 1e-14);
    }

    #[test]
    fn model_constructors_agree() {
        let m = VibronicModel::from_huang_rhys(20.0, 65.0, 70.0, 3.8).unwrap();
        assert_relative_eq!(m.s_g, 20.0, max_relative = 1e-12);
        assert_relative_eq!(m.s_e, 20.0 * 70.0 / 65.0, max_relative = 1e-12);
        m.validate().unwrap();
        let mut bad = m;
        bad.s_e *= 1.0 + 1e-8;
        assert!(matches!(bad.validate(), Err(DapError::Consistency(_))));
    }
}
