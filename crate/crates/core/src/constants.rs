//! Physical constants (CODATA 2018) and the unit bridges used internally.
//!
//! Internal units: energies in eV, lengths in Å, dipoles in e·Å, vibrational
//! quanta in meV, masses in amu.

use std::f64::consts::PI;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity ε₀, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability μ₀, N/A².
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant ħ, J·s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// e²/(4πε₀) in eV·Å (≈ 14.3996).
pub const COULOMB_EV_ANGSTROM: f64 =
    ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY) * 1e10;
/// ħ in eV·s.
pub const HBAR_EV_S: f64 = HBAR / ELEMENTARY_CHARGE;
/// h in eV·s.
pub const PLANCK_EV_S: f64 = PLANCK / ELEMENTARY_CHARGE;
/// k_B in eV/K.
pub const BOLTZMANN_EV_PER_K: f64 = BOLTZMANN / ELEMENTARY_CHARGE;
/// Debye per e·Å (≈ 4.8032).
pub const DEBYE_PER_E_ANGSTROM: f64 = ELEMENTARY_CHARGE * 1e-10 * SPEED_OF_LIGHT / 1e-21;
/// ħ²/(amu·Å²) expressed in meV (≈ 4.1802).
///
/// Bridges mass-weighted displacements in amu^½·Å to vibrational quanta in meV.
pub const HBAR2_PER_AMU_ANGSTROM2_MEV: f64 =
    HBAR * HBAR / (AMU * 1e-20) / ELEMENTARY_CHARGE * 1e3;

/// The constant table as one immutable value, for callers that prefer a struct.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub coulomb_ev_angstrom: f64,
    pub hbar_ev_s: f64,
    pub planck_ev_s: f64,
    pub debye_per_e_angstrom: f64,
    pub boltzmann_ev_per_k: f64,
    pub speed_of_light: f64,
    pub vacuum_permittivity: f64,
    pub vacuum_permeability: f64,
    pub bohr_magneton: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    coulomb_ev_angstrom: COULOMB_EV_ANGSTROM,
    hbar_ev_s: HBAR_EV_S,
    planck_ev_s: PLANCK_EV_S,
    debye_per_e_angstrom: DEBYE_PER_E_ANGSTROM,
    boltzmann_ev_per_k: BOLTZMANN_EV_PER_K,
    speed_of_light: SPEED_OF_LIGHT,
    vacuum_permittivity: VACUUM_PERMITTIVITY,
    vacuum_permeability: VACUUM_PERMEABILITY,
    bohr_magneton: BOHR_MAGNETON,
};

pub fn e_angstrom_to_debye(dipole: f64) -> f64 {
    dipole * DEBYE_PER_E_ANGSTROM
}

pub fn debye_to_e_angstrom(dipole: f64) -> f64 {
    dipole / DEBYE_PER_E_ANGSTROM
}

/// Converts an energy in eV to a frequency in Hz (E/h).
pub fn ev_to_hz(energy: f64) -> f64 {
    energy / PLANCK_EV_S
}
