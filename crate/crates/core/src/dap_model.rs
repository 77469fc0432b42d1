//! Donor-acceptor pair transition energies.
//!
//! `ħω(R) = E_g − (E_D + E_A) + e²/(4πε₀ ε_r R) + J(R)`, where `J` is the
//! overlap correction evaluated over hydrogenic 1s envelopes of the bound
//! electron and hole.

use crate::constants::COULOMB_EV_ANGSTROM;
use crate::error::{require_positive, DapError, Result};
use crate::fit::{polyfit, PolyFit};
use crate::lattice::{first_shells, LatticeSpec, Relation, Shell};
use crate::materials::{DefectRole, DefectSpecies, HostMaterial, MaterialsDatabase};

/// Below this relative radius mismatch the two-center integral switches to
/// its symmetric series about the mean radius.
const EQUAL_RADIUS_SWITCH: f64 = 2e-3;

/// Screened pair-Coulomb energy `e²/(4πε₀ ε_r R)`, eV.
pub fn coulomb_term(r: f64, eps_r: f64) -> Result<f64> {
    require_positive("separation", r)?;
    require_positive("eps_r", eps_r)?;
    Ok(COULOMB_EV_ANGSTROM / (eps_r * r))
}

/// `1/R − ⟨1s_a| 1/|r − R| |1s_a⟩` in 1/Å.
fn one_center_deficit(r: f64, a: f64) -> f64 {
    (1.0 + r / a) * (-2.0 * r / a).exp() / r
}

/// `1/R − (1s_a 1s_a | 1s_b 1s_b)` in 1/Å: the amount by which the Coulomb
/// repulsion of two normalized 1s densities falls short of the point-charge value.
fn two_center_deficit(r: f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let t = 0.5 * (a - b);
    if (t / m).abs() < EQUAL_RADIUS_SWITCH {
        let e = (-2.0 * r / m).exp();
        let m2 = m * m;
        let m3 = m2 * m;
        let d0 = 1.0 / r + 11.0 / (8.0 * m) + 3.0 * r / (4.0 * m2) + r * r / (6.0 * m3);
        let p2 = 8.0 * r.powi(4) + 20.0 * r.powi(3) * m + 30.0 * r * r * m2 + 30.0 * r * m3 + 15.0 * m2 * m2;
        let d2 = p2 / (120.0 * m.powi(7));
        let d4 = -r.powi(4) * (-4.0 * r * r + 14.0 * r * m + 7.0 * m2) / (420.0 * m.powi(11));
        return e * (d0 + d2 * t * t + d4 * t.powi(4));
    }
    let (a2, b2) = (a * a, b * b);
    let diff = a2 - b2;
    let ta = (-2.0 * r / a).exp() * (a.powi(3) * r * diff + a2 * a2 * (a2 - 3.0 * b2));
    let tb = (-2.0 * r / b).exp() * (b.powi(3) * r * diff + b2 * b2 * (3.0 * a2 - b2));
    (ta + tb) / (r * diff.powi(3))
}

/// Two-center Coulomb integral between normalized 1s densities of radii `a`
/// and `b` whose centres are `r` apart, in 1/Å.
pub fn two_center_coulomb(r: f64, a: f64, b: f64) -> Result<f64> {
    require_positive("separation", r)?;
    require_positive("radius", a)?;
    require_positive("radius", b)?;
    Ok(1.0 / r - two_center_deficit(r, a, b))
}

/// Potential at distance `r` of a normalized 1s density of radius `a`, in 1/Å.
pub fn one_center_potential(r: f64, a: f64) -> Result<f64> {
    require_positive("distance", r)?;
    require_positive("radius", a)?;
    Ok(1.0 / r - one_center_deficit(r, a))
}

/// Overlap correction `J(R)` for electron and hole envelopes of radii
/// `a_donor` and `a_acceptor`, screened by `eps_r`, eV.
///
/// The four-term bracket is collected into point-charge deficits so that the
/// result stays accurate as it decays exponentially with `R`.
pub fn j_correction(r: f64, a_donor: f64, a_acceptor: f64, eps_r: f64) -> Result<f64> {
    require_positive("separation", r)?;
    require_positive("donor radius", a_donor)?;
    require_positive("acceptor radius", a_acceptor)?;
    require_positive("eps_r", eps_r)?;
    let bracket = -one_center_deficit(r, a_donor) - one_center_deficit(r, a_acceptor)
        + two_center_deficit(r, a_donor, a_acceptor);
    Ok(COULOMB_EV_ANGSTROM / eps_r * bracket)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DapModelParams {
    pub host: HostMaterial,
    pub donor: DefectSpecies,
    pub acceptor: DefectSpecies,
}

impl DapModelParams {
    pub fn new(host: HostMaterial, donor: DefectSpecies, acceptor: DefectSpecies) -> Result<Self> {
        if donor.role != DefectRole::Donor {
            return Err(DapError::domain(format!("`{}` is not a donor", donor.name)));
        }
        if acceptor.role != DefectRole::Acceptor {
            return Err(DapError::domain(format!("`{}` is not an acceptor", acceptor.name)));
        }
        if donor.binding_energy + acceptor.binding_energy >= host.band_gap {
            return Err(DapError::domain("E_D + E_A must lie below the band gap"));
        }
        Ok(Self { host, donor, acceptor })
    }

    pub fn from_database(db: &MaterialsDatabase, host: &str, donor: &str, acceptor: &str) -> Result<Self> {
        Self::new(db.host(host)?.clone(), db.defect(donor)?.clone(), db.defect(acceptor)?.clone())
    }

    pub fn binding_sum(&self) -> f64 {
        self.donor.binding_energy + self.acceptor.binding_energy
    }

    /// Infinite-separation transition energy `E_g − (E_D + E_A)`.
    pub fn asymptotic_energy(&self) -> f64 {
        self.host.band_gap - self.binding_sum()
    }

    pub fn relation(&self) -> Relation {
        Relation::for_pair(&self.host, &self.donor, &self.acceptor)
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec::of_host(&self.host)
    }
}

/// Zero-phonon transition energy at separation `r`, eV.
pub fn zpl_energy(params: &DapModelParams, r: f64, include_j: bool) -> Result<f64> {
    let mut e = params.asymptotic_energy() + coulomb_term(r, params.host.eps_r)?;
    if include_j {
        e += j_correction(r, params.donor.bohr_radius, params.acceptor.bohr_radius, params.host.eps_r)?;
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Model,
    ExternalData,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZplPoint {
    pub m: usize,
    /// Separation, Å.
    pub distance: f64,
    /// Transition energy, eV.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZplSeries {
    pub points: Vec<ZplPoint>,
    pub provenance: Provenance,
}

impl ZplSeries {
    /// Evaluates the model on the given shells.
    pub fn from_model(params: &DapModelParams, shells: &[Shell], include_j: bool) -> Result<Self> {
        let points = shells
            .iter()
            .map(|s| Ok(ZplPoint { m: s.m, distance: s.distance, energy: zpl_energy(params, s.distance, include_j)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points, provenance: Provenance::Model })
    }

    /// Evaluates the model on the first `count` shells of the pair's sublattice relation.
    pub fn first_shells(params: &DapModelParams, count: usize, include_j: bool) -> Result<Self> {
        let shells = first_shells(&params.lattice(), params.relation(), count)?;
        Self::from_model(params, &shells, include_j)
    }

    /// Reads an externally computed series from CSV with header
    /// `m,R_angstrom,zpl_eV`; `#` lines are comments.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(csv_error)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DapError::Parse { line: 1, message: format!("missing column `{name}`") })
        };
        let (cm, cr, ce) = (col("m")?, col("R_angstrom")?, col("zpl_eV")?);
        let mut points = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let field = |i: usize| {
                record.get(i).unwrap_or("").to_string()
            };
            let bad = |what: &str, v: String| DapError::Parse { line, message: format!("bad {what} `{v}`") };
            points.push(ZplPoint {
                m: field(cm).parse().map_err(|_| bad("m", field(cm)))?,
                distance: field(cr).parse().map_err(|_| bad("R_angstrom", field(cr)))?,
                energy: field(ce).parse().map_err(|_| bad("zpl_eV", field(ce)))?,
            });
        }
        Ok(Self { points, provenance: Provenance::ExternalData })
    }
}

pub(crate) fn csv_error(e: csv::Error) -> DapError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    DapError::Parse { line, message: e.to_string() }
}

/// Straight-line fit of transition energy against `r_b/R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFit {
    /// eV per unit of `r_b/R`.
    pub slope: f64,
    /// Energy extrapolated to infinite separation, eV.
    pub intercept: f64,
    /// `E_g − intercept`, eV.
    pub binding_sum: f64,
    pub diagnostics: PolyFit,
}

/// Fits `(R, energy)` points against `bond_length / R`.
pub fn fit_series(points: &[(f64, f64)], bond_length: f64, band_gap: f64) -> Result<SeriesFit> {
    require_positive("bond length", bond_length)?;
    if points.len() < 2 {
        return Err(DapError::Rank("at least two shells are needed".into()));
    }
    let mut x = Vec::with_capacity(points.len());
    let mut y = Vec::with_capacity(points.len());
    for &(r, e) in points {
        require_positive("separation", r)?;
        x.push(bond_length / r);
        y.push(e);
    }
    let fit = polyfit(&x, &y, 1)?;
    Ok(SeriesFit {
        slope: fit.coefficients[1],
        intercept: fit.coefficients[0],
        binding_sum: band_gap - fit.coefficients[0],
        diagnostics: fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn aln() -> DapModelParams {
        DapModelParams::from_database(&MaterialsDatabase::example(), "3C-SiC", "N_C-SiC", "Al_Si-SiC").unwrap()
    }

    #[test]
    fn coulomb_values() {
        assert_relative_eq!(coulomb_term(5.0, 9.72).unwrap(), 14.3996 / (9.72 * 5.0), max_relative = 1e-5);
        assert!((coulomb_term(5.0, 9.72).unwrap() - 0.2963).abs() < 5e-5);
        assert!((coulomb_term(5.0, 5.7).unwrap() - 0.50525).abs() < 1e-5);
        assert!(coulomb_term(1e12, 5.7).unwrap() < 1e-11);
        assert!(coulomb_term(0.0, 5.7).is_err());
    }

    #[test]
    fn one_center_potential_limits() {
        // inside the charge cloud the potential saturates at <1/r> = 1/a
        assert_relative_eq!(one_center_potential(1e-6, 2.0).unwrap(), 0.5, max_relative = 1e-5);
        assert_relative_eq!(one_center_potential(80.0, 2.0).unwrap(), 1.0 / 80.0, max_relative = 1e-12);
    }

    #[test]
    fn equal_radius_two_center_limit() {
        // (1s1s|1s1s) at zero separation is 5/(8a)
        let a = 1.7;
        assert_relative_eq!(two_center_coulomb(1e-4, a, a).unwrap(), 5.0 / (8.0 * a), max_relative = 1e-4);
    }

    #[test]
    fn series_and_general_forms_agree_across_the_switch() {
        for &r in &[0.3, 1.0, 3.0, 8.0] {
            let a = 2.0;
            let below = two_center_coulomb(r, a * (1.0 + 1.9e-3), a * (1.0 - 1.9e-3)).unwrap();
            let above = two_center_coulomb(r, a * (1.0 + 2.1e-3), a * (1.0 - 2.1e-3)).unwrap();
            assert_relative_eq!(below, above, max_relative = 1e-5);
            let far = two_center_coulomb(r, a * 1.05, a * 0.95).unwrap();
            let mid = two_center_coulomb(r, a * 1.0499, a * 0.9501).unwrap();
            assert_relative_eq!(far, mid, max_relative = 1e-4);
        }
    }

    #[test]
    fn j_vanishes_at_large_separation() {
        let (a_d, a_a) = (4.63, 3.90);
        let r = 20.0 * a_d;
        let j = j_correction(r, a_d, a_a, 9.72).unwrap();
        assert!(j.abs() < 1e-3 * coulomb_term(r, 9.72).unwrap());
    }

    #[test]
    fn j_symmetric_under_label_swap() {
        let a = 2.5;
        let j1 = j_correction(a, a, a, 9.72).unwrap();
        let j2 = j_correction(a, a, a, 9.72).unwrap();
        assert_eq!(j1, j2);
        let j3 = j_correction(3.0, 1.2, 4.0, 9.72).unwrap();
        let j4 = j_correction(3.0, 4.0, 1.2, 9.72).unwrap();
        assert_relative_eq!(j3, j4, max_relative = 1e-12);
    }

    #[test]
    fn j_decays_faster_than_coulomb() {
        let mut prev = f64::INFINITY;
        let mut r = 1.0;
        while r < 200.0 {
            let ratio = (j_correction(r, 3.0, 2.0, 9.72).unwrap() / coulomb_term(r, 9.72).unwrap()).abs();
            if r > 10.0 {
                assert!(ratio < prev, "ratio not decreasing at R = {r}");
            }
            prev = ratio;
            r *= 1.25;
        }
        assert!(prev < 1e-30);
    }

    #[test]
    fn infinite_separation_limit() {
        let p = aln();
        let e = zpl_energy(&p, 1e9, false).unwrap();
        assert_relative_eq!(e, 2.25 - 0.35, max_relative = 1e-8);
    }

    #[test]
    fn zpl_decreasing_without_j() {
        let p = aln();
        let series = ZplSeries::first_shells(&p, 30, false).unwrap();
        for w in series.points.windows(2) {
            assert!(w[1].energy < w[0].energy);
        }
    }

    #[test]
    fn role_validation() {
        let db = MaterialsDatabase::example();
        let host = db.host("3C-SiC").unwrap().clone();
        let n = db.defect("N_C-SiC").unwrap().clone();
        assert!(DapModelParams::new(host.clone(), n.clone(), n.clone()).is_err());
        let al = db.defect("Al_Si-SiC").unwrap().clone();
        assert!(DapModelParams::new(host, al, n).is_err());
    }

    #[test]
    fn coulomb_only_fit_recovers_binding_sum() {
        let p = aln();
        let series = ZplSeries::first_shells(&p, 12, false).unwrap();
        let pts: Vec<(f64, f64)> = series.points.iter().map(|q| (q.distance, q.energy)).collect();
        let fit = fit_series(&pts, p.host.bond_length, p.host.band_gap).unwrap();
        assert!((fit.binding_sum - 0.35).abs() < 1e-9);
        let expected_slope = COULOMB_EV_ANGSTROM / (p.host.eps_r * p.host.bond_length);
        assert_relative_eq!(fit.slope, expected_slope, max_relative = 1e-9);
    }

    #[test]
    fn exact_line_fit() {
        let (s0, c0) = (0.8, 1.9);
        let rb = 1.9;
        let pts: Vec<(f64, f64)> = [2.0, 3.5, 5.0, 9.0].iter().map(|&r| (r, c0 + s0 * rb / r)).collect();
        let fit = fit_series(&pts, rb, 2.25).unwrap();
        assert_relative_eq!(fit.slope, s0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, c0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_fit_is_rank_error() {
        assert!(matches!(fit_series(&[(3.0, 2.0), (3.0, 2.1)], 1.9, 2.25), Err(DapError::Rank(_))));
        assert!(matches!(fit_series(&[(3.0, 2.0)], 1.9, 2.25), Err(DapError::Rank(_))));
    }

    #[test]
    fn series_csv_ingest() {
        let text = "# constrained-DFT series\nm,R_angstrom,zpl_eV\n1,1.889,2.25\n2,3.617,2.20\n";
        let s = ZplSeries::from_csv(text).unwrap();
        assert_eq!(s.provenance, Provenance::ExternalData);
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.points[1].energy, 2.20);
        let bad = "m,R_angstrom,zpl_eV\n1,abc,2.0\n";
        assert!(matches!(ZplSeries::from_csv(bad), Err(DapError::Parse { line: 2, .. })));
    }
}
