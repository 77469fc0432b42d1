//! Formation energies and charge transition levels from supercell total energies.
//!
//! `E^f[X^q] = E_tot[X^q] − E_tot[bulk] − Σ n_i μ_i + q·E_F + E_corr`, with
//! `E_F` measured on the same absolute scale as the host VBM. Levels are
//! reported from the VBM.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::constants::COULOMB_EV_ANGSTROM;
use crate::dap_model::csv_error;
use crate::error::{require_positive, DapError, Result};
use crate::fit::polyfit;
use crate::materials::{parse_toml, HostMaterial};

/// Label reserved for pristine-supercell records.
pub const BULK_LABEL: &str = "bulk";

#[derive(Debug, Clone, PartialEq)]
pub struct TotalEnergyRecord {
    pub label: String,
    pub q: i32,
    /// eV
    pub e_tot: f64,
    pub natoms: usize,
    /// Supercell linear size, Å.
    pub l: f64,
    /// Atoms added (positive) or removed (negative) per species.
    pub n: BTreeMap<String, i32>,
    /// Finite-size correction supplied with the record, eV.
    pub e_corr: Option<f64>,
}

impl TotalEnergyRecord {
    pub fn validate(&self) -> Result<()> {
        if !(-2..=2).contains(&self.q) {
            return Err(DapError::field(&self.label, "q", format!("charge {} outside -2..=2", self.q)));
        }
        if !(self.l > 0.0) {
            return Err(DapError::field(&self.label, "L_angstrom", "must be positive"));
        }
        if !self.e_tot.is_finite() {
            return Err(DapError::field(&self.label, "E_tot_eV", "must be finite"));
        }
        Ok(())
    }
}

/// Reads records from CSV with columns
/// `label,q,E_tot_eV,natoms,L_angstrom[,n_<species>...][,E_corr_eV]`.
pub fn read_records(text: &str) -> Result<Vec<TotalEnergyRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    let required = ["label", "q", "E_tot_eV", "natoms", "L_angstrom"];
    let mut pos = BTreeMap::new();
    for name in required {
        let i = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DapError::Parse { line: 1, message: format!("missing column `{name}`") })?;
        pos.insert(name, i);
    }
    let corr = headers.iter().position(|h| h == "E_corr_eV");
    let species: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix("n_").map(|s| (i, s.to_string())))
        .collect();
    for (i, h) in headers.iter().enumerate() {
        if !required.contains(&h) && Some(i) != corr && !h.starts_with("n_") {
            return Err(DapError::Parse { line: 1, message: format!("unknown column `{h}`") });
        }
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let get = |i: usize| record.get(i).unwrap_or("");
        fn num<T: std::str::FromStr>(s: &str, col: &str, line: usize) -> Result<T> {
            s.parse().map_err(|_| DapError::Parse { line, message: format!("bad {col} `{s}`") })
        }
        let mut n = BTreeMap::new();
        for (i, sp) in &species {
            let v = get(*i);
            if !v.is_empty() {
                let count: i32 = num(v, &format!("n_{sp}"), line)?;
                if count != 0 {
                    n.insert(sp.clone(), count);
                }
            }
        }
        let e_corr = match corr.map(get) {
            Some(v) if !v.is_empty() => Some(num(v, "E_corr_eV", line)?),
            _ => None,
        };
        let r = TotalEnergyRecord {
            label: get(pos["label"]).to_string(),
            q: num(get(pos["q"]), "q", line)?,
            e_tot: num(get(pos["E_tot_eV"]), "E_tot_eV", line)?,
            natoms: num(get(pos["natoms"]), "natoms", line)?,
            l: num(get(pos["L_angstrom"]), "L_angstrom", line)?,
            n,
            e_corr,
        };
        r.validate()?;
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChemicalPotentialSet {
    /// eV per atom
    pub mu: BTreeMap<String, f64>,
}

impl ChemicalPotentialSet {
    pub fn get(&self, species: &str) -> Result<f64> {
        self.mu
            .get(species)
            .copied()
            .ok_or_else(|| DapError::Lookup(format!("no chemical potential for `{species}`")))
    }
}

/// Parses chemical potentials from TOML, either top-level `Species = value`
/// keys or a `[mu]` table.
pub fn load_chemical_potentials(text: &str) -> Result<ChemicalPotentialSet> {
    let table: BTreeMap<String, toml::Value> = parse_toml(text)?;
    let mut mu = BTreeMap::new();
    let mut insert = |k: &str, v: &toml::Value| -> Result<()> {
        let x = v
            .as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .ok_or_else(|| DapError::field("chemical potentials", k, "expected a number"))?;
        mu.insert(k.to_string(), x);
        Ok(())
    };
    for (k, v) in &table {
        match v {
            toml::Value::Table(t) if k == "mu" => {
                for (s, x) in t {
                    insert(s, x)?;
                }
            }
            _ => insert(k, v)?,
        }
    }
    Ok(ChemicalPotentialSet { mu })
}

/// Formation energy at absolute Fermi level `e_fermi`, eV.
pub fn formation_energy(
    record: &TotalEnergyRecord,
    bulk_e_tot: f64,
    mu: &ChemicalPotentialSet,
    e_fermi: f64,
    e_corr: f64,
) -> Result<f64> {
    let mut reservoir = 0.0;
    for (species, &count) in &record.n {
        reservoir += count as f64 * mu.get(species)?;
    }
    Ok(record.e_tot - bulk_e_tot - reservoir + record.q as f64 * e_fermi + e_corr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionLevel {
    pub q1: i32,
    pub q2: i32,
    /// Measured from the VBM, eV.
    pub level: f64,
    pub band_gap: f64,
}

impl TransitionLevel {
    pub fn in_gap(&self) -> bool {
        (0.0..=self.band_gap).contains(&self.level)
    }

    /// `E_V + x` or `E_C - y`, whichever edge is nearer.
    pub fn reference(&self, decimals: usize) -> String {
        if self.level <= 0.5 * self.band_gap {
            format!("E_V + {:.*}", decimals, self.level)
        } else {
            format!("E_C - {:.*}", decimals, self.band_gap - self.level)
        }
    }

    /// `E_g − ε(+/0)` for donors, `ε(0/−)` for acceptors; `None` for other pairs.
    pub fn binding_energy(&self) -> Option<f64> {
        let (hi, lo) = if self.q1 > self.q2 { (self.q1, self.q2) } else { (self.q2, self.q1) };
        match (hi, lo) {
            (1, 0) => Some(self.band_gap - self.level),
            (0, -1) => Some(self.level),
            _ => None,
        }
    }
}

/// `ε(q1/q2) = (E^f(q1) − E^f(q2)) / (q2 − q1)` from formation energies at
/// `E_F = 0` on the absolute scale, shifted to the host VBM.
pub fn transition_level(q1: i32, q2: i32, ef_q1: f64, ef_q2: f64, host: &HostMaterial) -> Result<TransitionLevel> {
    if q1 == q2 {
        return Err(DapError::domain("transition level needs two different charge states"));
    }
    let absolute = (ef_q1 - ef_q2) / (q2 - q1) as f64;
    Ok(TransitionLevel { q1, q2, level: absolute - host.vbm, band_gap: host.band_gap })
}

/// Leading point-charge image correction `q² α_M e²/(4πε₀)/(2 ε_r L)`, eV.
pub fn madelung_correction(q: i32, eps_r: f64, l: f64, madelung_constant: f64) -> Result<f64> {
    require_positive("eps_r", eps_r)?;
    require_positive("L", l)?;
    Ok((q * q) as f64 * madelung_constant * COULOMB_EV_ANGSTROM / (2.0 * eps_r * l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiluteLimit {
    pub limit: f64,
    /// Coefficient of `1/L`.
    pub slope: f64,
    /// Residual standard deviation of the fit.
    pub error_estimate: f64,
}

/// Linear fit of `value` against `1/L`; the intercept is the dilute limit.
pub fn dilute_extrapolation(points: &[(f64, f64)]) -> Result<DiluteLimit> {
    if points.len() < 2 {
        return Err(DapError::Rank("dilute extrapolation needs at least two sizes".into()));
    }
    let mut x = Vec::with_capacity(points.len());
    for &(l, _) in points {
        require_positive("L", l)?;
        x.push(1.0 / l);
    }
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = polyfit(&x, &y, 1)?;
    Ok(DiluteLimit { limit: fit.coefficients[0], slope: fit.coefficients[1], error_estimate: fit.residual_std })
}

/// One row of a transition-level table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CtlRow {
    pub defect: String,
    pub level: TransitionLevel,
    pub reference: String,
    pub binding_energy: Option<f64>,
    /// Supercell sizes that entered the level.
    pub sizes: Vec<f64>,
    pub error_estimate: Option<f64>,
}

/// Transition levels between adjacent charge states of every defect in
/// `records`, extrapolated to the dilute limit when several sizes exist.
pub fn ctl_table(
    records: &[TotalEnergyRecord],
    mu: &ChemicalPotentialSet,
    host: &HostMaterial,
) -> Result<Vec<CtlRow>> {
    let bulk: Vec<&TotalEnergyRecord> = records.iter().filter(|r| r.label == BULK_LABEL).collect();
    let bulk_at = |l: f64| {
        bulk.iter()
            .find(|b| (b.l - l).abs() <= 1e-6 * l)
            .map(|b| b.e_tot)
            .ok_or_else(|| DapError::Lookup(format!("no bulk record with L = {l}")))
    };
    // defect -> q -> [(L, E^f at E_F = 0)]
    let mut by_defect: BTreeMap<&str, BTreeMap<i32, Vec<(f64, f64)>>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.label != BULK_LABEL) {
        let ef = formation_energy(r, bulk_at(r.l)?, mu, 0.0, r.e_corr.unwrap_or(0.0))?;
        by_defect.entry(&r.label).or_default().entry(r.q).or_default().push((r.l, ef));
    }
    let mut rows = Vec::new();
    for (defect, states) in by_defect {
        let charges: Vec<i32> = states.keys().rev().copied().collect();
        for w in charges.windows(2) {
            let (q1, q2) = (w[0], w[1]);
            let mut per_size = Vec::new();
            for &(l, e1) in &states[&q1] {
                if let Some(&(_, e2)) = states[&q2].iter().find(|(l2, _)| (l2 - l).abs() <= 1e-6 * l) {
                    per_size.push((l, transition_level(q1, q2, e1, e2, host)?.level));
                }
            }
            if per_size.is_empty() {
                return Err(DapError::Structural(format!(
                    "`{defect}` has no supercell size shared by q = {q1} and q = {q2}"
                )));
            }
            per_size.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut sizes: Vec<f64> = per_size.iter().map(|p| p.0).collect();
            sizes.dedup();
            let (value, error_estimate) = if sizes.len() >= 2 {
                let d = dilute_extrapolation(&per_size)?;
                (d.limit, Some(d.error_estimate))
            } else {
                (per_size[0].1, None)
            };
            let level = TransitionLevel { q1, q2, level: value, band_gap: host.band_gap };
            rows.push(CtlRow {
                defect: defect.to_string(),
                reference: level.reference(2),
                binding_energy: level.binding_energy(),
                level,
                sizes,
                error_estimate,
            });
        }
    }
    Ok(rows)
}
