//! Donor-acceptor pair modeling toolkit.
//!
//! Shell geometry on diamond-structure and zincblende hosts, zero-phonon
//! transition energies, vibronic lineshapes, pair dipoles from charge
//! snapshots, Stark and dipole-dipole response, radiative lifetimes and
//! charge transition levels from supercell total energies.

pub mod constants;
pub mod dap_model;
pub mod defects;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod materials;
pub mod polarization;
pub mod response;
pub mod spectra;

pub use dap_model::{fit_series, j_correction, zpl_energy, DapModelParams, SeriesFit, ZplSeries};
pub use error::{DapError, Result};
pub use lattice::{enumerate_shells, first_shells, LatticeSpec, Relation, Shell};
pub use materials::{load_database, DefectSpecies, HostMaterial, MaterialsDatabase};
pub use spectra::{lineshape, Broadening, EnergyGrid, Spectrum, VibronicModel};
