//! Static dipoles from the polarization difference between two charge
//! snapshots of one supercell.
//!
//! Each snapshot lists nuclei (charge `Z`, position) and Wannier centres
//! (occupation, position). The cell dipole `ΣZR − Σ occ·r̄` is defined only
//! modulo the lattice quanta `e·a_i`, so a dipole difference is placed on
//! the branch closest to a physical hint.
//!
//! Snapshot files are line oriented:
//!
//! ```text
//! cell 10.0 0.0 0.0
//! cell 0.0 10.0 0.0
//! cell 0.0 0.0 10.0
//! charge 0
//! N 4 0.0 0.0 0.0        # nucleus: Z x y z
//! W 2 0.1 0.0 0.0        # centre: occupation x y z
//! pair 0 0 0 1.9 0 0     # optional donor and acceptor positions
//! ```

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::DEBYE_PER_E_ANGSTROM;
use crate::error::{require_positive, DapError, Result};

/// Two branches closer than this ratio of distances to the hint are flagged.
const AMBIGUITY_RATIO: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSnapshot {
    /// Rows are the lattice vectors `a_i`, Å.
    pub cell: [[f64; 3]; 3],
    /// Declared net charge of the cell, e.
    pub net_charge: f64,
    /// `(Z, position)`
    pub nuclei: Vec<(f64, [f64; 3])>,
    /// `(occupation, position)`; occupation is 2 for spin-paired centres.
    pub centers: Vec<(u32, [f64; 3])>,
    /// Donor and acceptor positions, when known.
    pub pair: Option<([f64; 3], [f64; 3])>,
}

impl ChargeSnapshot {
    pub fn new(
        cell: [[f64; 3]; 3],
        net_charge: f64,
        nuclei: Vec<(f64, [f64; 3])>,
        centers: Vec<(u32, [f64; 3])>,
    ) -> Result<Self> {
        let s = Self { cell, net_charge, nuclei, centers, pair: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_pair(mut self, donor: [f64; 3], acceptor: [f64; 3]) -> Self {
        self.pair = Some((donor, acceptor));
        self
    }

    pub fn volume(&self) -> f64 {
        self.lattice().determinant().abs()
    }

    /// Lattice vectors as matrix columns.
    fn lattice(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[v3(self.cell[0]), v3(self.cell[1]), v3(self.cell[2])])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volume() > 1e-9) {
            return Err(DapError::domain("cell vectors are degenerate"));
        }
        let all = self.nuclei.iter().map(|n| n.1).chain(self.centers.iter().map(|c| c.1));
        if all.flatten().any(|x| !x.is_finite()) {
            return Err(DapError::domain("positions must be finite"));
        }
        let positive: f64 = self.nuclei.iter().map(|n| n.0).sum();
        let negative: f64 = self.centers.iter().map(|c| c.0 as f64).sum();
        if (positive - negative - self.net_charge).abs() > 1e-9 {
            return Err(DapError::Consistency(format!(
                "ΣZ − Σocc = {} but the declared charge is {}",
                positive - negative,
                self.net_charge
            )));
        }
        Ok(())
    }

    /// `ΣZR − Σ occ·r̄`, e·Å.
    pub fn dipole_sum(&self) -> [f64; 3] {
        let mut d = Vector3::zeros();
        for (z, r) in &self.nuclei {
            d += *z * v3(*r);
        }
        for (occ, r) in &self.centers {
            d -= *occ as f64 * v3(*r);
        }
        d.into()
    }
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

/// Parses the snapshot text format.
pub fn parse_snapshot(text: &str) -> Result<ChargeSnapshot> {
    let mut cell = Vec::new();
    let mut charge = None;
    let mut nuclei = Vec::new();
    let mut centers = Vec::new();
    let mut pair = None;
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let nums: Vec<f64> = parts
            .map(|p| p.parse::<f64>().map_err(|_| DapError::Parse { line, message: format!("bad number `{p}`") }))
            .collect::<Result<_>>()?;
        let expect = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(DapError::Parse { line, message: format!("`{key}` takes {n} numbers, got {}", nums.len()) })
            }
        };
        match key {
            "cell" => {
                expect(3)?;
                if cell.len() == 3 {
                    return Err(DapError::Parse { line, message: "more than three cell lines".into() });
                }
                cell.push([nums[0], nums[1], nums[2]]);
            }
            "charge" => {
                expect(1)?;
                charge = Some(nums[0]);
            }
            "N" => {
                expect(4)?;
                nuclei.push((nums[0], [nums[1], nums[2], nums[3]]));
            }
            "W" => {
                expect(4)?;
                let occ = nums[0];
                if occ != 1.0 && occ != 2.0 {
                    return Err(DapError::Parse { line, message: format!("occupation must be 1 or 2, got {occ}") });
                }
                centers.push((occ as u32, [nums[1], nums[2], nums[3]]));
            }
            "pair" => {
                expect(6)?;
                pair = Some(([nums[0], nums[1], nums[2]], [nums[3], nums[4], nums[5]]));
            }
            other => return Err(DapError::Parse { line, message: format!("unknown record `{other}`") }),
        }
    }
    if cell.len() != 3 {
        return Err(DapError::Parse { line: last, message: format!("expected three cell lines, got {}", cell.len()) });
    }
    let mut s = ChargeSnapshot::new([cell[0], cell[1], cell[2]], charge.unwrap_or(0.0), nuclei, centers)?;
    s.pair = pair;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellPolarization {
    /// e/Å²
    pub polarization: [f64; 3],
    /// Rows are the quanta `e·a_i/Ω`, e/Å².
    pub quanta: [[f64; 3]; 3],
    /// Å³
    pub volume: f64,
}

/// `P = (ΣZR − Σ occ·r̄)/Ω` together with its lattice quanta.
pub fn cell_polarization(snapshot: &ChargeSnapshot) -> Result<CellPolarization> {
    snapshot.validate()?;
    let v = snapshot.volume();
    let d = snapshot.dipole_sum();
    let q = |a: [f64; 3]| [a[0] / v, a[1] / v, a[2] / v];
    Ok(CellPolarization {
        polarization: [d[0] / v, d[1] / v, d[2] / v],
        quanta: [q(snapshot.cell[0]), q(snapshot.cell[1]), q(snapshot.cell[2])],
        volume: v,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipoleResult {
    /// e·Å
    pub vector: [f64; 3],
    pub magnitude_debye: f64,
    /// Lattice quanta added to the raw difference.
    pub branch_shift: [i32; 3],
    pub ambiguity_flag: bool,
}

impl DipoleResult {
    fn from_vector(vector: [f64; 3], branch_shift: [i32; 3], ambiguity_flag: bool) -> Self {
        Self { vector, magnitude_debye: v3(vector).norm() * DEBYE_PER_E_ANGSTROM, branch_shift, ambiguity_flag }
    }

    /// e·Å
    pub fn magnitude(&self) -> f64 {
        v3(self.vector).norm()
    }
}

/// Point-charge estimate `e·R_m` along `axis` (z when absent).
pub fn point_charge_dipole(r_m: f64, axis: Option<[f64; 3]>) -> Result<DipoleResult> {
    require_positive("R_m", r_m)?;
    let dir = v3(axis.unwrap_or([0.0, 0.0, 1.0]));
    let n = dir.norm();
    if !(n > 0.0) {
        return Err(DapError::domain("pair axis must be nonzero"));
    }
    Ok(DipoleResult::from_vector((dir * (r_m / n)).into(), [0; 3], false))
}

/// Default branch anchor: one electron moved from acceptor to donor, `e·(R_A − R_D)`.
fn default_hint(ground: &ChargeSnapshot, excited: &ChargeSnapshot) -> [f64; 3] {
    match excited.pair.or(ground.pair) {
        Some((d, a)) => [a[0] - d[0], a[1] - d[1], a[2] - d[2]],
        None => [0.0; 3],
    }
}

/// Dipole change `μ = D_excited − D_ground` on the polarization branch
/// nearest `hint` (e·Å). Without a hint, the snapshots' `pair` line sets it.
pub fn dipole_from_snapshots(
    ground: &ChargeSnapshot,
    excited: &ChargeSnapshot,
    hint: Option<[f64; 3]>,
) -> Result<DipoleResult> {
    ground.validate()?;
    excited.validate()?;
    for i in 0..3 {
        for k in 0..3 {
            if (ground.cell[i][k] - excited.cell[i][k]).abs() > 1e-9 {
                return Err(DapError::Structural("ground and excited cells differ".into()));
            }
        }
    }
    if ground.nuclei.len() != excited.nuclei.len() {
        return Err(DapError::Structural(format!(
            "{} vs {} nuclei",
            ground.nuclei.len(),
            excited.nuclei.len()
        )));
    }
    let hint = v3(hint.unwrap_or_else(|| default_hint(ground, excited)));
    let raw = v3(excited.dipole_sum()) - v3(ground.dipole_sum());
    let lattice = ground.lattice();
    let inverse = lattice.try_inverse().ok_or_else(|| DapError::domain("cell is singular"))?;
    let centre = inverse * (hint - raw);

    let mut ranked: Vec<(f64, [i32; 3])> = Vec::with_capacity(125);
    let base = [centre[0].round() as i32, centre[1].round() as i32, centre[2].round() as i32];
    for i in -2..=2 {
        for j in -2..=2 {
            for k in -2..=2 {
                let n = [base[0] + i, base[1] + j, base[2] + k];
                let mu = raw + lattice * Vector3::new(n[0] as f64, n[1] as f64, n[2] as f64);
                ranked.push(((mu - hint).norm(), n));
            }
        }
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (best, shift) = ranked[0];
    let ambiguous = ranked[1].0 <= AMBIGUITY_RATIO * best;
    let mu = raw + lattice * Vector3::new(shift[0] as f64, shift[1] as f64, shift[2] as f64);
    Ok(DipoleResult::from_vector(mu.into(), shift, ambiguous))
}

/// Dipoles for many snapshot pairs, in input order.
pub fn dipoles_batch(pairs: &[(ChargeSnapshot, ChargeSnapshot)]) -> Result<Vec<DipoleResult>> {
    pairs.par_iter().map(|(g, e)| dipole_from_snapshots(g, e, None)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationAverage {
    /// e·Å
    pub mean_magnitude: f64,
    pub std_magnitude: f64,
    pub count: usize,
}

/// Mean and spread of `|μ|` across the orientations of one shell.
pub fn orientation_average(results: &[DipoleResult]) -> Result<OrientationAverage> {
    if results.is_empty() {
        return Err(DapError::domain("no orientations to average"));
    }
    let n = results.len() as f64;
    let mags: Vec<f64> = results.iter().map(DipoleResult::magnitude).collect();
    let mean = mags.iter().sum::<f64>() / n;
    let var = mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n;
    Ok(OrientationAverage { mean_magnitude: mean, std_magnitude: var.sqrt(), count: results.len() })
}

/// Ground (`D⁺A⁻`) and excited (`D⁰A⁰`) snapshots of one pair in a cubic
/// cell: donor at the origin, acceptor at `separation`, four bond centres
/// around each defect, and one transferred electron. Every bond centre is
/// jittered by up to `distortion` Å, independently in each state, to mimic
/// charge-state-dependent bond distortions; `seed` fixes the jitter.
pub fn synthetic_pair_snapshots(
    separation: [f64; 3],
    bond_length: f64,
    distortion: f64,
    seed: u64,
) -> Result<(ChargeSnapshot, ChargeSnapshot)> {
    require_positive("bond length", bond_length)?;
    if !(distortion >= 0.0) {
        return Err(DapError::domain("distortion must be non-negative"));
    }
    let r = v3(separation).norm();
    let side = 2.0 * r + 20.0 * bond_length;
    let cell = [[side, 0.0, 0.0], [0.0, side, 0.0], [0.0, 0.0, side]];
    let tetra = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let half = 0.5 * bond_length / 3f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = |electron_at: [f64; 3]| {
        let mut centers = Vec::with_capacity(9);
        for site in [[0.0; 3], separation] {
            for t in &tetra {
                let dir: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                let scale = distortion * rng.random::<f64>() / v3(dir).norm().max(1e-12);
                centers.push((2, std::array::from_fn(|i| site[i] + half * t[i] + scale * dir[i])));
            }
        }
        centers.push((1, electron_at));
        let nuclei = vec![(5.0, [0.0; 3]), (3.0, separation)];
        let net = 8.0 - 17.0;
        ChargeSnapshot::new(cell, net, nuclei, centers).map(|s| s.with_pair([0.0; 3], separation))
    };
    let ground = state(separation)?;
    let excited = state([0.0; 3])?;
    Ok((ground, excited))
}
