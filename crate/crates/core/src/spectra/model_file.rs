//! Vibronic model files.
//!
//! Same TOML key-value format as the materials database:
//!
//! ```toml
//! temperature = 5.0      # K
//! gamma_meV = 3.0
//! sigma_meV = 30.0
//!
//! [vibronic]
//! S = 1.0                # or delta_Q in amu^½·Å
//! omega_g = 40.0         # meV
//! omega_e = 42.0         # meV, defaults to omega_g
//! E_zpl = 2.10           # eV, required without [pair]
//!
//! [pair]                 # optional: one line per shell of this pair
//! host = "3C-SiC"
//! donor = "N_C-SiC"
//! acceptor = "Al_Si-SiC"
//! shells = 10
//!
//! [[shell]]              # optional per-shell overrides
//! m = 1
//! S = 0.8
//! ```

use serde::Deserialize;

use crate::dap_model::{zpl_energy, DapModelParams};
use crate::error::{DapError, Result};
use crate::lattice::{first_shells, Shell};
use crate::materials::{parse_toml, MaterialsDatabase};

use super::{Broadening, VibronicModel};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibronicSpec {
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[serde(rename = "delta_Q")]
    pub delta_q: Option<f64>,
    pub omega_g: Option<f64>,
    pub omega_e: Option<f64>,
    #[serde(rename = "E_zpl")]
    pub e_zpl: Option<f64>,
}

impl VibronicSpec {
    fn overlay(&self, over: &VibronicSpec) -> VibronicSpec {
        // an override that names S or delta_Q replaces both
        let coupling_override = over.s.is_some() || over.delta_q.is_some();
        VibronicSpec {
            s: if coupling_override { over.s } else { self.s },
            delta_q: if coupling_override { over.delta_q } else { self.delta_q },
            omega_g: over.omega_g.or(self.omega_g),
            omega_e: over.omega_e.or(self.omega_e),
            e_zpl: over.e_zpl.or(self.e_zpl),
        }
    }

    fn build(&self, entry: &str, e_zpl: Option<f64>) -> Result<VibronicModel> {
        let omega_g = self.omega_g.ok_or_else(|| DapError::field(entry, "omega_g", "missing"))?;
        let omega_e = self.omega_e.unwrap_or(omega_g);
        let e = e_zpl.or(self.e_zpl).ok_or_else(|| DapError::field(entry, "E_zpl", "missing"))?;
        let model = match (self.s, self.delta_q) {
            (Some(s), None) => VibronicModel::from_huang_rhys(s, omega_g, omega_e, e),
            (None, Some(dq)) => VibronicModel::new(dq, omega_g, omega_e, e),
            (Some(_), Some(_)) => return Err(DapError::field(entry, "S", "give either S or delta_Q, not both")),
            (None, None) => return Err(DapError::field(entry, "S", "missing S or delta_Q")),
        };
        model.map_err(|e| DapError::field(entry, "vibronic", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub host: String,
    pub donor: String,
    pub acceptor: String,
    pub shells: usize,
    #[serde(default = "yes")]
    pub include_j: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShellOverride {
    m: usize,
    #[serde(rename = "S")]
    s: Option<f64>,
    #[serde(rename = "delta_Q")]
    delta_q: Option<f64>,
    omega_g: Option<f64>,
    omega_e: Option<f64>,
    #[serde(rename = "E_zpl")]
    e_zpl: Option<f64>,
}

impl ShellOverride {
    fn spec(&self) -> VibronicSpec {
        VibronicSpec { s: self.s, delta_q: self.delta_q, omega_g: self.omega_g, omega_e: self.omega_e, e_zpl: self.e_zpl }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelFile {
    temperature: Option<f64>,
    #[serde(rename = "gamma_meV")]
    gamma_mev: Option<f64>,
    #[serde(rename = "sigma_meV")]
    sigma_mev: Option<f64>,
    #[serde(default)]
    vibronic: VibronicSpec,
    pair: Option<PairSpec>,
    #[serde(default)]
    shell: Vec<ShellOverride>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSet {
    Single(VibronicModel),
    Shells(Vec<(Shell, VibronicModel)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub temperature: Option<f64>,
    pub broadening: Option<Broadening>,
    pub models: ModelSet,
}

/// Parses a model file. Pair-based files take host and defect parameters
/// from `db`; each shell's `E_zpl` comes from the pair model.
pub fn load_model_file(text: &str, db: &MaterialsDatabase) -> Result<ModelFile> {
    let raw: RawModelFile = parse_toml(text)?;
    let broadening = match (raw.gamma_mev, raw.sigma_mev) {
        (None, None) => None,
        (g, s) => {
            let d = Broadening::default();
            Some(Broadening::new(g.map_or(d.gamma, |v| v * 1e-3), s.map_or(d.sigma, |v| v * 1e-3))?)
        }
    };
    let models = match &raw.pair {
        None => {
            if !raw.shell.is_empty() {
                return Err(DapError::field("shell", "m", "per-shell overrides need a [pair] section"));
            }
            ModelSet::Single(raw.vibronic.build("vibronic", None)?)
        }
        Some(pair) => {
            let params = DapModelParams::from_database(db, &pair.host, &pair.donor, &pair.acceptor)?;
            let shells = first_shells(&params.lattice(), params.relation(), pair.shells)?;
            for o in &raw.shell {
                if o.m == 0 || o.m > shells.len() {
                    return Err(DapError::field("shell", "m", format!("{} is outside 1..={}", o.m, shells.len())));
                }
            }
            let mut out = Vec::with_capacity(shells.len());
            for shell in shells {
                let spec = raw
                    .shell
                    .iter()
                    .filter(|o| o.m == shell.m)
                    .fold(raw.vibronic.clone(), |acc, o| acc.overlay(&o.spec()));
                let e = match spec.e_zpl {
                    Some(e) => e,
                    None => zpl_energy(&params, shell.distance, pair.include_j)?,
                };
                let model = spec.build(&format!("shell m={}", shell.m), Some(e))?;
                out.push((shell, model));
            }
            ModelSet::Shells(out)
        }
    };
    Ok(ModelFile { temperature: raw.temperature, broadening, models })
}
