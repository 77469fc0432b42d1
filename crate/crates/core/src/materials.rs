//! Host crystals, defect species and the key-value database they are loaded from.
//!
//! The database is a TOML document with `[host.<name>]` and `[defect.<name>]`
//! tables. Unknown keys are rejected and every entry is validated against the
//! invariants of its type before the database is returned.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::constants::COULOMB_EV_ANGSTROM;
use crate::error::{require_positive, DapError, Result};

/// Bond-length consistency tolerance relative to `a0·√3/4`.
const BOND_LENGTH_TOLERANCE: f64 = 0.01;

/// The shipped example database (diamond and 3C-SiC).
pub const EXAMPLE_DATABASE: &str = include_str!("../../../data/materials.example");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    /// Two chemically identical fcc sublattices (diamond, Si).
    DiamondStructure,
    /// Two chemically distinct fcc sublattices (3C-SiC, GaAs).
    Zincblende,
}

impl LatticeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LatticeKind::DiamondStructure => "diamond-structure",
            LatticeKind::Zincblende => "zincblende",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectRole {
    Donor,
    Acceptor,
}

/// Which fcc sublattice a substitutional defect occupies.
///
/// `A` is the sublattice at (0,0,0), `B` the one displaced by (¼,¼,¼)·a0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HostMaterial {
    pub name: String,
    /// Band gap, eV.
    pub band_gap: f64,
    /// Static dielectric constant.
    pub eps_r: f64,
    /// Conventional cubic lattice constant, Å.
    pub a0: f64,
    /// Nearest-neighbour bond length, Å.
    pub bond_length: f64,
    /// Refractive index.
    pub n_r: f64,
    pub lattice_kind: LatticeKind,
    /// Valence-band maximum in the total-energy reference, eV.
    pub vbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectSpecies {
    pub name: String,
    /// Key of the host this species lives in.
    pub host: String,
    pub role: DefectRole,
    pub site: Sublattice,
    /// Binding energy measured from the nearer band edge, eV.
    pub binding_energy: f64,
    /// Envelope radius of the bound carrier, Å.
    pub bohr_radius: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialsDatabase {
    pub hosts: BTreeMap<String, HostMaterial>,
    pub defects: BTreeMap<String, DefectSpecies>,
}

impl MaterialsDatabase {
    /// Parses and validates the shipped example database.
    pub fn example() -> Self {
        load_database(EXAMPLE_DATABASE).expect("shipped example database is valid")
    }

    pub fn host(&self, name: &str) -> Result<&HostMaterial> {
        self.hosts
            .get(name)
            .ok_or_else(|| DapError::Lookup(format!("unknown host `{name}`")))
    }

    pub fn defect(&self, name: &str) -> Result<&DefectSpecies> {
        self.defects
            .get(name)
            .ok_or_else(|| DapError::Lookup(format!("unknown defect `{name}`")))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatabase {
    #[serde(default)]
    host: BTreeMap<String, RawHost>,
    #[serde(default)]
    defect: BTreeMap<String, RawDefect>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHost {
    name: Option<String>,
    #[serde(rename = "E_g")]
    band_gap: f64,
    eps_r: f64,
    a0: f64,
    r_b: f64,
    n_r: f64,
    lattice_kind: LatticeKind,
    #[serde(default)]
    vbm: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefect {
    name: Option<String>,
    host: String,
    role: DefectRole,
    site: Sublattice,
    #[serde(rename = "E_bind")]
    binding_energy: f64,
    a_bohr: Option<f64>,
}

/// Maps a byte offset into a 1-based line number.
pub(crate) fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

pub(crate) fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| DapError::Parse {
        line: e.span().map(|s| line_of_offset(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })
}

/// Loads a materials database from its text form.
pub fn load_database(text: &str) -> Result<MaterialsDatabase> {
    let raw: RawDatabase = parse_toml(text)?;
    let mut db = MaterialsDatabase::default();

    for (key, h) in raw.host {
        let entry = format!("host.{key}");
        let check = |field: &str, ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(DapError::field(&entry, field, msg))
            }
        };
        check("E_g", h.band_gap.is_finite() && h.band_gap > 0.0, "band gap must be positive")?;
        check("eps_r", h.eps_r.is_finite() && h.eps_r >= 1.0, "dielectric constant must be >= 1")?;
        check("a0", h.a0.is_finite() && h.a0 > 0.0, "lattice constant must be positive")?;
        check("n_r", h.n_r.is_finite() && h.n_r >= 1.0, "refractive index must be >= 1")?;
        let ideal = h.a0 * 3f64.sqrt() / 4.0;
        check(
            "r_b",
            h.r_b.is_finite() && ((h.r_b - ideal) / ideal).abs() <= BOND_LENGTH_TOLERANCE,
            &format!("bond length must be within 1% of a0*sqrt(3)/4 = {ideal:.4} A"),
        )?;
        check("vbm", h.vbm.is_finite(), "valence band maximum must be finite")?;
        db.hosts.insert(
            key.clone(),
            HostMaterial {
                name: h.name.unwrap_or(key),
                band_gap: h.band_gap,
                eps_r: h.eps_r,
                a0: h.a0,
                bond_length: h.r_b,
                n_r: h.n_r,
                lattice_kind: h.lattice_kind,
                vbm: h.vbm,
            },
        );
    }

    for (key, d) in raw.defect {
        let entry = format!("defect.{key}");
        let host = db
            .hosts
            .get(&d.host)
            .ok_or_else(|| DapError::field(&entry, "host", format!("unknown host `{}`", d.host)))?;
        if !(d.binding_energy.is_finite() && d.binding_energy > 0.0) {
            return Err(DapError::field(&entry, "E_bind", "binding energy must be positive"));
        }
        if d.binding_energy >= host.band_gap {
            return Err(DapError::field(
                &entry,
                "E_bind",
                format!("binding energy must lie below the host gap {}", host.band_gap),
            ));
        }
        let bohr_radius = match d.a_bohr {
            Some(a) if a.is_finite() && a > 0.0 => a,
            Some(_) => return Err(DapError::field(&entry, "a_bohr", "radius must be positive")),
            None => effective_bohr_radius(d.binding_energy, host.eps_r)?,
        };
        db.defects.insert(
            key.clone(),
            DefectSpecies {
                name: d.name.unwrap_or(key),
                host: d.host,
                role: d.role,
                site: d.site,
                binding_energy: d.binding_energy,
                bohr_radius,
            },
        );
    }
    Ok(db)
}

/// Radius of the hydrogenic 1s state whose binding energy in a medium of
/// dielectric constant `eps_r` equals `binding_energy`:
/// `a = e²/(8πε₀·eps_r·E_bind)`.
pub fn effective_bohr_radius(binding_energy: f64, eps_r: f64) -> Result<f64> {
    require_positive("binding energy", binding_energy)?;
    if !(eps_r.is_finite() && eps_r >= 1.0) {
        return Err(DapError::domain(format!("eps_r must be >= 1, got {eps_r}")));
    }
    Ok(COULOMB_EV_ANGSTROM / (2.0 * eps_r * binding_energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MINIMAL: &str = r#"
[host.h]
E_g = 2.0
eps_r = 10.0
a0 = 4.0
r_b = 1.7320508
n_r = 2.5
lattice_kind = "zincblende"

[defect.x]
host = "h"
role = "donor"
site = "A"
E_bind = 0.1
"#;

    #[test]
    fn example_database_loads() {
        let db = MaterialsDatabase::example();
        let diamond = db.host("diamond").unwrap();
        assert_eq!(diamond.band_gap, 5.37);
        assert_eq!(diamond.lattice_kind, LatticeKind::DiamondStructure);
        let sic = db.host("3C-SiC").unwrap();
        assert_eq!(sic.a0, 4.362);
        assert_eq!(db.defect("Al_Si-SiC").unwrap().binding_energy, 0.19);
        assert_eq!(db.defect("N_C-SiC").unwrap().role, DefectRole::Donor);
    }

    #[test]
    fn derived_bohr_radius_is_filled_in() {
        let db = load_database(MINIMAL).unwrap();
        let x = db.defect("x").unwrap();
        assert_relative_eq!(x.bohr_radius, COULOMB_EV_ANGSTROM / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn negative_binding_energy_is_rejected_by_field() {
        let text = MINIMAL.replace("E_bind = 0.1", "E_bind = -0.1");
        match load_database(&text) {
            Err(DapError::Field { field, entry, .. }) => {
                assert_eq!(field, "E_bind");
                assert_eq!(entry, "defect.x");
            }
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn binding_energy_above_gap_is_rejected() {
        let text = MINIMAL.replace("E_bind = 0.1", "E_bind = 2.5");
        assert!(matches!(load_database(&text), Err(DapError::Field { .. })));
    }

    #[test]
    fn inconsistent_bond_length_is_rejected() {
        let text = MINIMAL.replace("r_b = 1.7320508", "r_b = 1.9");
        match load_database(&text) {
            Err(DapError::Field { field, .. }) => assert_eq!(field, "r_b"),
            other => panic!("expected r_b error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = MINIMAL.replace("n_r = 2.5", "n_r = 2.5\ncolour = \"blue\"");
        match load_database(&text) {
            Err(DapError::Parse { line, message }) => {
                assert_eq!(line, 8, "{message}");
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "[host.h]\nE_g = = 2\n";
        assert!(matches!(load_database(text), Err(DapError::Parse { line: 2, .. })));
    }

    #[test]
    fn hydrogen_radius() {
        let a = effective_bohr_radius(13.605_693, 1.0).unwrap();
        assert_relative_eq!(a, 0.529_177, max_relative = 1e-5);
    }

    #[test]
    fn nitrogen_in_silicon_carbide_radius() {
        let a = effective_bohr_radius(0.16, 9.72).unwrap();
        assert_relative_eq!(a, 14.3996 / (2.0 * 9.72 * 0.16), max_relative = 1e-5);
        assert!((a - 4.63).abs() < 5e-3);
    }

    #[test]
    fn radius_matches_hydrogenic_eigenvalue() {
        // Virial theorem for the 1s state: E_bind = (k/eps)·<1/r>/2, with <1/r>
        // integrated numerically over the normalized density; bisect on a.
        let (e_bind, eps) = (0.16, 9.72);
        let energy = |a: f64| {
            let n = 4000;
            let r_max = 40.0 * a;
            let h = r_max / n as f64;
            let f = |r: f64| 4.0 * r * (-2.0 * r / a).exp() / a.powi(3);
            let mut s = f(0.0) + f(r_max);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            COULOMB_EV_ANGSTROM / eps * (s * h / 3.0) / 2.0
        };
        let (mut lo, mut hi) = (0.01, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if energy(mid) > e_bind {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = effective_bohr_radius(e_bind, eps).unwrap();
        assert_relative_eq!(a, 0.5 * (lo + hi), max_relative = 1e-8);
    }

    #[test]
    fn doubling_binding_energy_halves_radius() {
        let a1 = effective_bohr_radius(0.2, 5.7).unwrap();
        let a2 = effective_bohr_radius(0.4, 5.7).unwrap();
        assert_relative_eq!(a1, 2.0 * a2, max_relative = 1e-14);
    }

    #[test]
    fn radius_domain_errors() {
        assert!(effective_bohr_radius(0.0, 5.0).is_err());
        assert!(effective_bohr_radius(0.1, 0.5).is_err());
    }
}
