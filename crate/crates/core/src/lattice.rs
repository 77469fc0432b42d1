//! Donor-acceptor separation shells in diamond-structure and zincblende crystals.
//!
//! Sites are handled on the integer grid of quarter lattice constants: the A
//! sublattice is the set of even triples with component sum ≡ 0 (mod 4), the B
//! sublattice that set shifted by (1,1,1). With the donor on an A site, a
//! displacement `v` reaches the same sublattice when `v ∈ A` and the opposite
//! one when `v ∈ B`.

use crate::error::{require_positive, DapError, Result};
use crate::materials::{DefectSpecies, HostMaterial, LatticeKind};

/// Upper bound on the enumeration radius, in units of a0.
pub const MAX_RADIUS_IN_A0: f64 = 50.0;

/// Distances closer than this (in units of a0) belong to the same shell.
pub const SHELL_TOLERANCE_IN_A0: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub a0: f64,
    pub kind: LatticeKind,
}

impl LatticeSpec {
    pub fn new(a0: f64, kind: LatticeKind) -> Result<Self> {
        require_positive("lattice constant", a0)?;
        Ok(Self { a0, kind })
    }

    pub fn of_host(host: &HostMaterial) -> Self {
        Self { a0: host.a0, kind: host.lattice_kind }
    }

    pub fn nearest_neighbor_distance(&self) -> f64 {
        self.a0 * 3f64.sqrt() / 4.0
    }
}

/// Which sites a shell enumeration visits, relative to a donor on sublattice A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    SameSublattice,
    OppositeSublattice,
    Any,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::SameSublattice => "same",
            Relation::OppositeSublattice => "opposite",
            Relation::Any => "any",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "same" | "same-sublattice" => Ok(Relation::SameSublattice),
            "opposite" | "opposite-sublattice" => Ok(Relation::OppositeSublattice),
            "any" => Ok(Relation::Any),
            _ => Err(DapError::domain(format!("unknown sublattice relation `{s}`"))),
        }
    }

    /// Relation implied by the site chemistry of a donor-acceptor pair.
    ///
    /// In diamond-structure hosts both sublattices are chemically identical,
    /// so every site counts.
    pub fn for_pair(host: &HostMaterial, donor: &DefectSpecies, acceptor: &DefectSpecies) -> Self {
        match host.lattice_kind {
            LatticeKind::DiamondStructure => Relation::Any,
            LatticeKind::Zincblende if donor.site == acceptor.site => Relation::SameSublattice,
            LatticeKind::Zincblende => Relation::OppositeSublattice,
        }
    }
}

/// One separation shell.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    /// Rank of the realized distance, 1-based.
    pub m: usize,
    /// Separation, Å.
    pub distance: f64,
    pub multiplicity: usize,
    /// Sublattice the shell's sites lie on (never `Any`).
    pub relation: Relation,
    /// Quadratic-form index m′: `R = a0·√(m′/2)` for same-sublattice shells
    /// and `R = a0·√(m′/2 − 5/16)` for opposite-sublattice shells.
    pub form_index: u32,
    /// Site displacements in quarter-lattice-constant units, sorted.
    pub sites: Vec<[i32; 3]>,
    /// Lattice constant the shell was generated with, Å.
    pub a0: f64,
}

/// All displacement vectors of a shell, grouped into site-symmetry orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGeometry {
    /// Displacements, Å.
    pub vectors: Vec<[f64; 3]>,
    /// Indices into `vectors`, one list per orbit of the crystal point group.
    pub orbits: Vec<Vec<usize>>,
}

fn norm2(v: [i32; 3]) -> i64 {
    v.iter().map(|&c| (c as i64) * (c as i64)).sum()
}

/// Enumerates shells up to `r_max` (Å) by brute force over lattice translations.
pub fn enumerate_shells(lattice: &LatticeSpec, relation: Relation, r_max: f64) -> Result<Vec<Shell>> {
    require_positive("r_max", r_max)?;
    if r_max > MAX_RADIUS_IN_A0 * lattice.a0 {
        return Err(DapError::Resource(format!(
            "r_max = {r_max} A exceeds {MAX_RADIUS_IN_A0}*a0 = {} A",
            MAX_RADIUS_IN_A0 * lattice.a0
        )));
    }
    let a0 = lattice.a0;
    let tol = SHELL_TOLERANCE_IN_A0 * a0;

    // fcc basis of the conventional cell and the sublattice offset, in a0/4 units
    const FCC: [[i32; 3]; 4] = [[0, 0, 0], [0, 2, 2], [2, 0, 2], [2, 2, 0]];
    let offsets: &[[i32; 3]] = match relation {
        Relation::SameSublattice => &[[0, 0, 0]],
        Relation::OppositeSublattice => &[[1, 1, 1]],
        Relation::Any => &[[0, 0, 0], [1, 1, 1]],
    };
    // one conventional cell of margin beyond r_max
    let n_cells = (r_max / a0).ceil() as i32 + 1;

    let mut sites: Vec<(f64, [i32; 3])> = Vec::new();
    for i in -n_cells..=n_cells {
        for j in -n_cells..=n_cells {
            for k in -n_cells..=n_cells {
                for b in &FCC {
                    for o in offsets {
                        let v = [4 * i + b[0] + o[0], 4 * j + b[1] + o[1], 4 * k + b[2] + o[2]];
                        if v == [0, 0, 0] {
                            continue;
                        }
                        let d = [v[0] as f64, v[1] as f64, v[2] as f64];
                        let r = 0.25 * a0 * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                        if r <= r_max + tol {
                            sites.push((r, v));
                        }
                    }
                }
            }
        }
    }
    sites.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut shells: Vec<Shell> = Vec::new();
    let mut start = 0;
    while start < sites.len() {
        let r0 = sites[start].0;
        let mut end = start + 1;
        while end < sites.len() && sites[end].0 - r0 <= tol {
            end += 1;
        }
        let mut members: Vec<[i32; 3]> = sites[start..end].iter().map(|s| s.1).collect();
        members.sort();
        let n2 = norm2(members[0]);
        let (rel, form_index) = if n2 % 8 == 0 {
            (Relation::SameSublattice, (n2 / 8) as u32)
        } else {
            (Relation::OppositeSublattice, ((n2 + 5) / 8) as u32)
        };
        let distance = members
            .iter()
            .map(|&v| 0.25 * a0 * (norm2(v) as f64).sqrt())
            .sum::<f64>()
            / members.len() as f64;
        shells.push(Shell {
            m: shells.len() + 1,
            distance,
            multiplicity: members.len(),
            relation: rel,
            form_index,
            sites: members,
            a0,
        });
        start = end;
    }
    Ok(shells)
}

/// Enumerates exactly `count` shells, growing the radius as needed.
pub fn first_shells(lattice: &LatticeSpec, relation: Relation, count: usize) -> Result<Vec<Shell>> {
    let limit = MAX_RADIUS_IN_A0 * lattice.a0;
    let mut r_max = 2.0 * lattice.a0;
    loop {
        // every shell at or below r_max is complete
        let shells = enumerate_shells(lattice, relation, r_max)?;
        if shells.len() >= count {
            return Ok(shells.into_iter().take(count).collect());
        }
        if r_max >= limit {
            return Err(DapError::Resource(format!("{count} shells exceed the enumeration limit")));
        }
        r_max = (1.5 * r_max).min(limit);
    }
}

/// Closed-form separation for quadratic-form index `m_prime`; `None` when no
/// lattice site realizes it.
pub fn shell_distance_closed_form(m_prime: u32, relation: Relation, a0: f64) -> Result<Option<f64>> {
    if m_prime == 0 {
        return Err(DapError::domain("m' must be >= 1"));
    }
    require_positive("a0", a0)?;
    let m = m_prime as f64;
    match relation {
        Relation::SameSublattice => {
            // |v|² = 2m′ in units of (a0/2)²; a sum of three squares unless 4^a(8b+7).
            if is_sum_of_three_squares(2 * m_prime as u64) {
                Ok(Some(a0 * (m / 2.0).sqrt()))
            } else {
                Ok(None)
            }
        }
        // 8m′−5 ≡ 3 (mod 8) is always a sum of three (odd) squares.
        Relation::OppositeSublattice => Ok(Some(a0 * (m / 2.0 - 5.0 / 16.0).sqrt())),
        Relation::Any => Err(DapError::domain("closed form needs a definite sublattice relation")),
    }
}

/// Legendre's three-square theorem.
fn is_sum_of_three_squares(mut n: u64) -> bool {
    if n == 0 {
        return true;
    }
    while n % 4 == 0 {
        n /= 4;
    }
    n % 8 != 7
}

/// The 48 signed permutations of the cube.
fn cubic_operations() -> Vec<[[i32; 3]; 3]> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut ops = Vec::with_capacity(48);
    for p in PERMS {
        for signs in 0..8 {
            let mut m = [[0; 3]; 3];
            for (row, &col) in p.iter().enumerate() {
                m[row][col] = if signs & (1 << row) != 0 { -1 } else { 1 };
            }
            ops.push(m);
        }
    }
    ops
}

fn apply(op: &[[i32; 3]; 3], v: [i32; 3]) -> [i32; 3] {
    let mut out = [0; 3];
    for (r, row) in op.iter().enumerate() {
        out[r] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

/// Cubic operations that map both sublattices onto themselves (the Td site group).
fn site_symmetry_operations() -> Vec<[[i32; 3]; 3]> {
    let tetrahedron = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];
    cubic_operations()
        .into_iter()
        .filter(|op| tetrahedron.iter().all(|&v| tetrahedron.contains(&apply(op, v))))
        .collect()
}

/// Displacement vectors of a shell plus their partition into symmetry orbits.
pub fn pair_orientations(shell: &Shell) -> PairGeometry {
    let ops = site_symmetry_operations();
    let vectors = shell
        .sites
        .iter()
        .map(|v| [0.25 * shell.a0 * v[0] as f64, 0.25 * shell.a0 * v[1] as f64, 0.25 * shell.a0 * v[2] as f64])
        .collect();
    let mut assigned = vec![false; shell.sites.len()];
    let mut orbits = Vec::new();
    for seed in 0..shell.sites.len() {
        if assigned[seed] {
            continue;
        }
        let mut orbit: Vec<usize> = ops
            .iter()
            .filter_map(|op| {
                let image = apply(op, shell.sites[seed]);
                shell.sites.binary_search(&image).ok()
            })
            .collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &i in &orbit {
            assigned[i] = true;
        }
        orbits.push(orbit);
    }
    PairGeometry { vectors, orbits }
}
