//! `reproduce` recipes. Every input ships with the binary.

use clap::{Args, Subcommand, ValueEnum};
use dapkit::defects::{ctl_table, load_chemical_potentials, read_records};
use dapkit::lattice::pair_orientations;
use dapkit::polarization::{dipole_from_snapshots, orientation_average, synthetic_pair_snapshots};
use dapkit::response::{compare_with_spin, interaction_map, spin_spin_reference};
use dapkit::spectra::load_model_file;
use dapkit::{fit_series, DapModelParams, ZplSeries};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map};

use crate::commands::{ctl_cells, spectrum_for, spectrum_table, Context, PlSpectrumArgs, CTL_COLUMNS};
use crate::output::{fmt_num, num, Cell, Input, Output, Table};
use crate::{CliError, Run};

const MODEL_ALN_SIC: &str = include_str!("../../../data/models/aln-sic.cfg");
const MODEL_BN_SIC: &str = include_str!("../../../data/models/bn-sic.cfg");
const MODEL_BN_DIAMOND: &str = include_str!("../../../data/models/bn-diamond.cfg");
const MODEL_BP_DIAMOND: &str = include_str!("../../../data/models/bp-diamond.cfg");
const RECORDS_DIAMOND: &str = include_str!("../../../data/records/diamond.csv");
const RECORDS_SIC: &str = include_str!("../../../data/records/3C-SiC.csv");
const CHEMPOTS: &str = include_str!("../../../data/records/chempots.toml");

/// Host whose permittivity sets the Fig. 1b curves.
const FIG1B_HOST: &str = "3C-SiC";

#[derive(Debug, Args, Serialize)]
pub struct ReproduceArgs {
    #[command(subcommand)]
    pub recipe: Recipe,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    /// Dipole coupling of 15 and 5 e·Å pairs and the NV spin-spin curve, 1 nm to 1 μm.
    Fig1b {
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Orientation-averaged dipoles against e·R_m for B-N shells.
    Fig2 {
        #[arg(long, default_value_t = 8)]
        shells: usize,
        /// Bond-centre jitter between charge states, Å.
        #[arg(long, default_value_t = 0.08)]
        distortion: f64,
    },
    /// ZPL series against r_b/R with straight-line fits.
    Fig3 {
        #[arg(long, default_value_t = 20)]
        shells: usize,
    },
    /// Composite PL spectrum of one pair type.
    Fig5 {
        #[arg(long, value_enum)]
        case: Case,
        #[arg(long)]
        components: bool,
    },
    /// Charge transition levels from the bundled total-energy records.
    Table1,
}

impl Recipe {
    pub fn name(&self) -> &'static str {
        match self {
            Recipe::Fig1b { .. } => "fig1b",
            Recipe::Fig2 { .. } => "fig2",
            Recipe::Fig3 { .. } => "fig3",
            Recipe::Fig5 { .. } => "fig5",
            Recipe::Table1 => "table1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    AlnSic,
    BnSic,
    BnDiamond,
    BpDiamond,
}

impl Case {
    fn model(self) -> (&'static str, &'static str) {
        match self {
            Case::AlnSic => ("builtin:models/aln-sic.cfg", MODEL_ALN_SIC),
            Case::BnSic => ("builtin:models/bn-sic.cfg", MODEL_BN_SIC),
            Case::BnDiamond => ("builtin:models/bn-diamond.cfg", MODEL_BN_DIAMOND),
            Case::BpDiamond => ("builtin:models/bp-diamond.cfg", MODEL_BP_DIAMOND),
        }
    }
}

fn builtin(name: &str, text: &str) -> Input {
    Input { name: name.into(), bytes: text.as_bytes().to_vec() }
}

pub fn reproduce(ctx: &Context, a: &ReproduceArgs) -> Result<Run, CliError> {
    match &a.recipe {
        Recipe::Fig1b { points } => fig1b(ctx, *points),
        Recipe::Fig2 { shells, distortion } => fig2(ctx, *shells, *distortion),
        Recipe::Fig3 { shells } => fig3(ctx, *shells),
        Recipe::Fig5 { case, components } => fig5(ctx, *case, *components),
        Recipe::Table1 => table1(ctx),
    }
}

fn fig1b(ctx: &Context, points: usize) -> Result<Run, CliError> {
    let eps = ctx.db.host(FIG1B_HOST)?.eps_r;
    let strong = interaction_map(15.0, 15.0, eps, 10.0, 1e4, points)?;
    let weak = interaction_map(5.0, 5.0, eps, 10.0, 1e4, points)?;
    let mut t = Table::new("dapkit.fig1b/1", &["r_nm", "V_15eA_Hz", "V_5eA_Hz", "spin_spin_Hz"]);
    for (s, w) in strong.iter().zip(&weak) {
        t.push(vec![(s.r / 10.0).into(), s.dipole_hz.into(), w.dipole_hz.into(), spin_spin_reference(s.r)?.into()]);
    }
    for mu in [15.0, 5.0] {
        let c = compare_with_spin(mu, mu, eps, 1.0)?;
        t.notes.push(format!("{mu} e·Å pairs: V / spin-spin = {} at every separation", fmt_num(c.ratio)));
    }
    t.notes.push(format!("eps_r = {} ({FIG1B_HOST})", fmt_num(eps)));
    let mut resolved = Map::new();
    resolved.insert("eps_r".into(), num(eps));
    Ok(Run { output: Output::Table(t), resolved, inputs: Vec::new() })
}

fn fig2(ctx: &Context, count: usize, distortion: f64) -> Result<Run, CliError> {
    let pairs = [("diamond", "N_C-diamond", "B_C-diamond"), ("3C-SiC", "N_C-SiC", "B_C-SiC")];
    let mut t = Table::new(
        "dapkit.fig2/1",
        &["host", "m", "R_angstrom", "eRm_eA", "orientations", "mean_mu_eA", "std_mu_eA", "mean_mu_debye"],
    );
    t.notes.push(format!(
        "synthetic snapshots: one electron transferred, bond centres jittered by up to {} Å",
        fmt_num(distortion)
    ));
    for (h, (host, donor, acceptor)) in pairs.iter().enumerate() {
        let params = DapModelParams::from_database(&ctx.db, host, donor, acceptor)?;
        let r_b = params.host.bond_length;
        let shells = dapkit::first_shells(&params.lattice(), params.relation(), count)?;
        for shell in &shells {
            let geo = pair_orientations(shell);
            let results = geo
                .vectors
                .par_iter()
                .enumerate()
                .map(|(k, v)| {
                    let seed = ((h as u64 * 1_000 + shell.m as u64) << 20) + k as u64;
                    let (g, e) = synthetic_pair_snapshots(*v, r_b, distortion, seed)?;
                    dipole_from_snapshots(&g, &e, None)
                })
                .collect::<dapkit::Result<Vec<_>>>()?;
            let avg = orientation_average(&results)?;
            t.push(vec![
                (*host).into(),
                shell.m.into(),
                shell.distance.into(),
                shell.distance.into(),
                avg.count.into(),
                avg.mean_magnitude.into(),
                avg.std_magnitude.into(),
                (avg.mean_magnitude * dapkit::constants::DEBYE_PER_E_ANGSTROM).into(),
            ]);
        }
    }
    Ok(Run::new(Output::Table(t)))
}

fn fig3(ctx: &Context, count: usize) -> Result<Run, CliError> {
    let pairs = [
        ("B-N diamond", "diamond", "N_C-diamond", "B_C-diamond"),
        ("B-N 3C-SiC", "3C-SiC", "N_C-SiC", "B_C-SiC"),
        ("Al-N 3C-SiC", "3C-SiC", "N_C-SiC", "Al_Si-SiC"),
    ];
    let mut t = Table::new("dapkit.fig3/1", &["pair", "m", "R_angstrom", "rb_over_R", "zpl_eV", "zpl_coulomb_only_eV"]);
    for (label, host, donor, acceptor) in pairs {
        let params = DapModelParams::from_database(&ctx.db, host, donor, acceptor)?;
        let with_j = ZplSeries::first_shells(&params, count, true)?;
        let plain = ZplSeries::first_shells(&params, count, false)?;
        let r_b = params.host.bond_length;
        for (p, q) in with_j.points.iter().zip(&plain.points) {
            t.push(vec![label.into(), p.m.into(), p.distance.into(), (r_b / p.distance).into(), p.energy.into(), q.energy.into()]);
        }
        let pts: Vec<(f64, f64)> = with_j.points.iter().map(|p| (p.distance, p.energy)).collect();
        let fit = fit_series(&pts, r_b, params.host.band_gap)?;
        t.notes.push(format!(
            "{label}: slope = {} eV, intercept = {} eV, binding sum = {} eV (database E_D + E_A = {} eV)",
            fmt_num(fit.slope),
            fmt_num(fit.intercept),
            fmt_num(fit.binding_sum),
            fmt_num(params.binding_sum())
        ));
    }
    Ok(Run::new(Output::Table(t)))
}

fn fig5(ctx: &Context, case: Case, components: bool) -> Result<Run, CliError> {
    let (name, text) = case.model();
    let file = load_model_file(text, &ctx.db)?;
    let args = PlSpectrumArgs {
        model: name.into(),
        temperature: None,
        gamma_mev: None,
        sigma_mev: None,
        emin: None,
        emax: None,
        step: None,
        components,
    };
    let mut resolved = Map::new();
    let sp = spectrum_for(&file.models, file.temperature, file.broadening, &args, &mut resolved)?;
    Ok(Run { output: Output::Table(spectrum_table(&sp, components)), resolved, inputs: vec![builtin(name, text)] })
}

fn table1(ctx: &Context) -> Result<Run, CliError> {
    let mu = load_chemical_potentials(CHEMPOTS)?;
    let mut columns = vec!["host"];
    columns.extend(CTL_COLUMNS);
    columns.push("database_binding_eV");
    let mut t = Table { schema: "dapkit.table1/1", columns, rows: Vec::new(), notes: Vec::new() };
    for (host_name, suffix, records) in [("diamond", "diamond", RECORDS_DIAMOND), ("3C-SiC", "SiC", RECORDS_SIC)] {
        let host = ctx.db.host(host_name)?;
        for row in ctl_table(&read_records(records)?, &mu, host)? {
            let mut cells: Vec<Cell> = vec![host_name.into()];
            cells.extend(ctl_cells(&row));
            let reference = ctx.db.defect(&format!("{}-{suffix}", row.defect)).ok().map(|d| d.binding_energy);
            cells.push(reference.into());
            t.push(cells);
        }
    }
    let mut resolved = Map::new();
    resolved.insert("chemical_potentials".into(), json!(mu.mu.iter().map(|(k, v)| (k.clone(), num(*v))).collect::<Map<_, _>>()));
    Ok(Run {
        output: Output::Table(t),
        resolved,
        inputs: vec![
            builtin("builtin:records/diamond.csv", RECORDS_DIAMOND),
            builtin("builtin:records/3C-SiC.csv", RECORDS_SIC),
            builtin("builtin:records/chempots.toml", CHEMPOTS),
        ],
    })
}
