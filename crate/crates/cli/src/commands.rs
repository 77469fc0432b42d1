use std::path::{Path, PathBuf};

use clap::Args;
use dapkit::defects::{ctl_table, load_chemical_potentials, read_records, CtlRow};
use dapkit::lattice::{enumerate_shells, first_shells, LatticeSpec, Relation};
use dapkit::materials::{LatticeKind, EXAMPLE_DATABASE};
use dapkit::polarization::{dipole_from_snapshots, parse_snapshot};
use dapkit::response::{compare_with_spin, fit_stark, radiative_lifetime, LifetimeConvention, LifetimeInput};
use dapkit::spectra::{composite_spectrum, lineshape, load_model_file, Broadening, EnergyGrid, ModelSet, Spectrum};
use dapkit::{fit_series, load_database, DapModelParams, MaterialsDatabase, ZplSeries};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::output::{num, opt_num, Cell, Input, Output, Table};
use crate::{CliError, GlobalArgs, Run};

pub struct Context {
    pub db: MaterialsDatabase,
    database: Input,
}

impl Context {
    pub fn load(global: &GlobalArgs) -> Result<Self, CliError> {
        match &global.config {
            Some(path) => {
                let (text, input) = read(path)?;
                Ok(Self { db: load_database(&text)?, database: input })
            }
            None => Ok(Self {
                db: MaterialsDatabase::example(),
                database: Input { name: "builtin:materials.example".into(), bytes: EXAMPLE_DATABASE.as_bytes().to_vec() },
            }),
        }
    }

    pub fn database_input(&self) -> Input {
        Input { name: self.database.name.clone(), bytes: self.database.bytes.clone() }
    }
}

pub fn read(path: &Path) -> Result<(String, Input), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::file(path, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::new("parse", format!("{}: not valid UTF-8", path.display())))?;
    Ok((text, Input { name: path.display().to_string(), bytes }))
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    DiamondStructure,
    Zincblende,
}

#[derive(Debug, Args, Serialize)]
pub struct ShellsArgs {
    /// Host whose lattice constant and kind to use.
    #[arg(long, conflicts_with_all = ["a0", "kind"])]
    pub host: Option<String>,
    /// Lattice constant, Å.
    #[arg(long, requires = "kind")]
    pub a0: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// same, opposite or any; inferred from --donor/--acceptor when absent.
    #[arg(long)]
    pub relation: Option<String>,
    #[arg(long, requires = "acceptor")]
    pub donor: Option<String>,
    #[arg(long, requires = "donor")]
    pub acceptor: Option<String>,
    /// Number of shells.
    #[arg(long, default_value_t = 10, conflicts_with = "rmax")]
    pub count: usize,
    /// Enumerate every shell out to this separation, Å.
    #[arg(long)]
    pub rmax: Option<f64>,
}

pub fn shells(ctx: &Context, a: &ShellsArgs) -> Result<Run, CliError> {
    let mut resolved = Map::new();
    let lattice = match (&a.host, a.a0, a.kind) {
        (Some(h), _, _) => LatticeSpec::of_host(ctx.db.host(h)?),
        (None, Some(a0), Some(kind)) => LatticeSpec::new(
            a0,
            match kind {
                KindArg::DiamondStructure => LatticeKind::DiamondStructure,
                KindArg::Zincblende => LatticeKind::Zincblende,
            },
        )?,
        _ => return Err(CliError::usage("give --host or both --a0 and --kind")),
    };
    let relation = match (&a.relation, &a.donor, &a.acceptor) {
        (Some(r), _, _) => Relation::parse(r)?,
        (None, Some(d), Some(acc)) => {
            let host = a.host.as_deref().ok_or_else(|| CliError::usage("--donor/--acceptor need --host"))?;
            Relation::for_pair(ctx.db.host(host)?, ctx.db.defect(d)?, ctx.db.defect(acc)?)
        }
        _ => Relation::SameSublattice,
    };
    resolved.insert("a0".into(), num(lattice.a0));
    resolved.insert("relation".into(), json!(relation.as_str()));
    let shells = match a.rmax {
        Some(r) => enumerate_shells(&lattice, relation, r)?,
        None => first_shells(&lattice, relation, a.count)?,
    };
    let mut t = Table::new("dapkit.shells/1", &["m", "R_angstrom", "multiplicity", "relation"]);
    for s in &shells {
        t.push(vec![s.m.into(), s.distance.into(), s.multiplicity.into(), s.relation.as_str().into()]);
    }
    Ok(Run { output: Output::Table(t), resolved, inputs: Vec::new() })
}

#[derive(Debug, Args, Serialize)]
pub struct ZplSeriesArgs {
    #[arg(long)]
    pub host: String,
    #[arg(long)]
    pub donor: String,
    #[arg(long)]
    pub acceptor: String,
    #[arg(long, default_value_t = 20)]
    pub shells: usize,
    /// Include the overlap correction J(R).
    #[arg(long)]
    pub with_j: bool,
}

pub fn zpl_series(ctx: &Context, a: &ZplSeriesArgs) -> Result<Run, CliError> {
    let params = DapModelParams::from_database(&ctx.db, &a.host, &a.donor, &a.acceptor)?;
    let series = ZplSeries::first_shells(&params, a.shells, a.with_j)?;
    let mut t = Table::new("dapkit.zpl-series/1", &["m", "R_angstrom", "zpl_eV"]);
    for p in &series.points {
        t.push(vec![p.m.into(), p.distance.into(), p.energy.into()]);
    }
    let mut resolved = Map::new();
    resolved.insert("relation".into(), json!(params.relation().as_str()));
    resolved.insert("binding_sum_eV".into(), num(params.binding_sum()));
    Ok(Run { output: Output::Table(t), resolved, inputs: Vec::new() })
}

#[derive(Debug, Args, Serialize)]
pub struct ZplFitArgs {
    /// CSV with columns m,R_angstrom,zpl_eV.
    #[arg(long)]
    pub input: PathBuf,
    /// Host supplying r_b and E_g.
    #[arg(long, required_unless_present_all = ["bond_length", "band_gap"])]
    pub host: Option<String>,
    /// Nearest-neighbour bond length r_b, Å.
    #[arg(long)]
    pub bond_length: Option<f64>,
    /// Band gap, eV.
    #[arg(long)]
    pub band_gap: Option<f64>,
}

pub fn zpl_fit(ctx: &Context, a: &ZplFitArgs) -> Result<Run, CliError> {
    let (text, input) = read(&a.input)?;
    let series = ZplSeries::from_csv(&text)?;
    let host = a.host.as_deref().map(|h| ctx.db.host(h)).transpose()?;
    let r_b = a.bond_length.or(host.map(|h| h.bond_length)).ok_or_else(|| CliError::usage("missing --bond-length"))?;
    let e_g = a.band_gap.or(host.map(|h| h.band_gap)).ok_or_else(|| CliError::usage("missing --band-gap"))?;
    let pts: Vec<(f64, f64)> = series.points.iter().map(|p| (p.distance, p.energy)).collect();
    let fit = fit_series(&pts, r_b, e_g)?;
    let se = fit.diagnostics.std_errors.as_ref();
    let mut v = Map::new();
    v.insert("slope".into(), num(fit.slope));
    v.insert("intercept".into(), num(fit.intercept));
    v.insert("binding_sum".into(), num(fit.binding_sum));
    v.insert("slope_std".into(), opt_num(se.map(|s| s[1])));
    v.insert("intercept_std".into(), opt_num(se.map(|s| s[0])));
    v.insert("rms_residual".into(), num(fit.diagnostics.rms_residual));
    v.insert("points".into(), json!(pts.len()));
    let mut resolved = Map::new();
    resolved.insert("bond_length".into(), num(r_b));
    resolved.insert("band_gap".into(), num(e_g));
    Ok(Run { output: Output::Record { schema: "dapkit.zpl-fit/1", value: v }, resolved, inputs: vec![input] })
}

#[derive(Debug, Args, Serialize)]
pub struct PlSpectrumArgs {
    /// Vibronic model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Temperature, K; overrides the model file (default 5 K).
    #[arg(long = "T", visible_alias = "temperature")]
    pub temperature: Option<f64>,
    /// Lorentzian ZPL half width, meV.
    #[arg(long = "gamma-meV")]
    pub gamma_mev: Option<f64>,
    /// Gaussian sideband width, meV.
    #[arg(long = "sigma-meV")]
    pub sigma_mev: Option<f64>,
    /// Grid start, eV.
    #[arg(long = "emin", requires = "emax")]
    pub emin: Option<f64>,
    /// Grid end, eV.
    #[arg(long = "emax", requires = "emin")]
    pub emax: Option<f64>,
    /// Grid step, eV.
    #[arg(long)]
    pub step: Option<f64>,
    /// Also emit per-shell components in long format.
    #[arg(long)]
    pub components: bool,
}

pub const DEFAULT_TEMPERATURE: f64 = 5.0;

/// Spectrum for a parsed model file, with flag overrides applied.
pub fn spectrum_for(
    models: &ModelSet,
    file_temperature: Option<f64>,
    file_broadening: Option<Broadening>,
    a: &PlSpectrumArgs,
    resolved: &mut Map<String, Value>,
) -> Result<Spectrum, CliError> {
    let temperature = a.temperature.or(file_temperature).unwrap_or(DEFAULT_TEMPERATURE);
    let base = file_broadening.unwrap_or_default();
    let broadening = Broadening::new(
        a.gamma_mev.map_or(base.gamma, |g| g * 1e-3),
        a.sigma_mev.map_or(base.sigma, |s| s * 1e-3),
    )?;
    let grid = match (a.emin, a.emax) {
        (Some(lo), Some(hi)) => Some(EnergyGrid::spanning(lo, hi, a.step.unwrap_or(broadening.gamma.min(broadening.sigma) / 10.0))?),
        _ => None,
    };
    resolved.insert("temperature_K".into(), num(temperature));
    resolved.insert("gamma_meV".into(), num(broadening.gamma * 1e3));
    resolved.insert("sigma_meV".into(), num(broadening.sigma * 1e3));
    let sp = match models {
        ModelSet::Single(m) => {
            let grid = match grid {
                Some(g) => g,
                None => EnergyGrid::for_model(m, &broadening)?,
            };
            lineshape(m, temperature, &grid, &broadening)?
        }
        ModelSet::Shells(list) => composite_spectrum(list, temperature, &broadening, grid.as_ref())?,
    };
    resolved.insert("grid_points".into(), json!(sp.energy.len()));
    Ok(sp)
}

pub fn spectrum_table(sp: &Spectrum, components: bool) -> Table {
    let mut t = if components {
        Table::new("dapkit.pl-spectrum/1", &["energy_eV", "intensity_per_eV", "component_shell"])
    } else {
        Table::new("dapkit.pl-spectrum/1", &["energy_eV", "intensity_per_eV"])
    };
    t.notes.push(format!(
        "T = {} K, gamma = {} meV, sigma = {} meV, ZPL weight = {}, captured weight = {}",
        crate::output::fmt_num(sp.metadata.temperature),
        crate::output::fmt_num(sp.metadata.broadening.gamma * 1e3),
        crate::output::fmt_num(sp.metadata.broadening.sigma * 1e3),
        crate::output::fmt_num(sp.metadata.zpl_weight),
        crate::output::fmt_num(sp.metadata.captured_weight),
    ));
    let peaks = sp.peaks(0.01);
    t.notes.push(format!(
        "maxima (eV): {}",
        peaks.iter().map(|p| crate::output::fmt_num(p.energy)).collect::<Vec<_>>().join(" ")
    ));
    for (e, i) in sp.energy.iter().zip(&sp.intensity) {
        let mut row: Vec<Cell> = vec![(*e).into(), (*i).into()];
        if components {
            row.push("total".into());
        }
        t.push(row);
    }
    if components {
        for c in &sp.components {
            for (e, i) in sp.energy.iter().zip(&c.intensity) {
                t.push(vec![(*e).into(), (*i).into(), c.label.clone().into()]);
            }
        }
    }
    t
}

pub fn pl_spectrum(ctx: &Context, a: &PlSpectrumArgs) -> Result<Run, CliError> {
    let (text, input) = read(&a.model)?;
    let file = load_model_file(&text, &ctx.db)?;
    let mut resolved = Map::new();
    let sp = spectrum_for(&file.models, file.temperature, file.broadening, a, &mut resolved)?;
    Ok(Run { output: Output::Table(spectrum_table(&sp, a.components)), resolved, inputs: vec![input] })
}

#[derive(Debug, Args, Serialize)]
pub struct DipoleArgs {
    #[arg(long)]
    pub ground: PathBuf,
    #[arg(long)]
    pub excited: PathBuf,
    /// Expected dipole x y z, e·Å; defaults to the pair line's e·(R_A − R_D).
    #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["X", "Y", "Z"])]
    pub hint: Option<Vec<f64>>,
}

pub fn dipole(a: &DipoleArgs) -> Result<Run, CliError> {
    let (gt, gi) = read(&a.ground)?;
    let (et, ei) = read(&a.excited)?;
    let g = parse_snapshot(&gt)?;
    let e = parse_snapshot(&et)?;
    let hint = a.hint.as_ref().map(|h| [h[0], h[1], h[2]]);
    let mu = dipole_from_snapshots(&g, &e, hint)?;
    let mut v = Map::new();
    v.insert("vector_eA".into(), json!(mu.vector.iter().map(|x| num(*x)).collect::<Vec<_>>()));
    v.insert("magnitude_eA".into(), num(mu.magnitude()));
    v.insert("magnitude_debye".into(), num(mu.magnitude_debye));
    v.insert("branch_shift".into(), json!(mu.branch_shift));
    v.insert("ambiguity_flag".into(), json!(mu.ambiguity_flag));
    if let Some((d, acc)) = e.pair.or(g.pair) {
        let r: f64 = (0..3).map(|i| (acc[i] - d[i]).powi(2)).sum::<f64>().sqrt();
        v.insert("point_charge_eA".into(), num(r));
    }
    Ok(Run { output: Output::Record { schema: "dapkit.dipole/1", value: v }, resolved: Map::new(), inputs: vec![gi, ei] })
}

#[derive(Debug, Args, Serialize)]
pub struct StarkFitArgs {
    /// CSV with columns field_V_per_A,delta_E_eV.
    #[arg(long)]
    pub input: PathBuf,
}

fn read_stark(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::new("parse", e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::new("parse", format!("line 1: missing column `{name}`")))
    };
    let (cf, ce) = (col("field_V_per_A")?, col("delta_E_eV")?);
    let mut pts = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::new("parse", e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |i: usize| {
            let s = record.get(i).unwrap_or("");
            s.parse::<f64>().map_err(|_| CliError::new("parse", format!("line {line}: bad number `{s}`")))
        };
        pts.push((get(cf)?, get(ce)?));
    }
    Ok(pts)
}

pub fn stark_fit(a: &StarkFitArgs) -> Result<Run, CliError> {
    let (text, input) = read(&a.input)?;
    let pts = read_stark(&text)?;
    let m = fit_stark(&pts)?;
    let d = m.diagnostics.as_ref().expect("fits carry diagnostics");
    let mut v = Map::new();
    v.insert("delta_mu_eA".into(), num(m.delta_mu));
    v.insert("delta_mu_debye".into(), num(m.delta_mu * dapkit::constants::DEBYE_PER_E_ANGSTROM));
    v.insert("delta_alpha_eA2_per_V".into(), num(m.delta_alpha));
    v.insert("intercept_eV".into(), num(d.intercept));
    v.insert("delta_mu_std".into(), opt_num(d.delta_mu_std));
    v.insert("delta_alpha_std".into(), opt_num(d.delta_alpha_std));
    v.insert("rms_residual_eV".into(), num(d.rms_residual));
    v.insert("points".into(), json!(pts.len()));
    Ok(Run { output: Output::Record { schema: "dapkit.stark-fit/1", value: v }, resolved: Map::new(), inputs: vec![input] })
}

/// Parses `10`, `10nm`, `1um`, `1μm`, `15A`, `15Å` into Å; bare numbers are nm.
pub fn parse_length(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let split = s.find(|c: char| c.is_alphabetic() || c == 'Å' || c == 'μ').unwrap_or(s.len());
    let (value, unit) = s.split_at(split);
    let value: f64 = value.trim().parse().map_err(|_| format!("bad length `{s}`"))?;
    let scale = match unit.trim() {
        "" | "nm" => 10.0,
        "A" | "Å" | "angstrom" => 1.0,
        "um" | "μm" | "µm" => 1e4,
        "pm" => 1e-2,
        other => return Err(format!("unknown length unit `{other}`")),
    };
    Ok(value * scale)
}

#[derive(Debug, Args, Serialize)]
pub struct InteractionMapArgs {
    /// Dipole of the first pair, e·Å.
    #[arg(long)]
    pub mu1: f64,
    /// Dipole of the second pair, e·Å.
    #[arg(long)]
    pub mu2: f64,
    #[arg(long)]
    pub eps: f64,
    /// Smallest separation (`1nm`, `15A`; bare numbers are nm).
    #[arg(long, default_value = "1nm", value_parser = parse_length)]
    pub rmin: f64,
    #[arg(long, default_value = "1um", value_parser = parse_length)]
    pub rmax: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Omit the NV spin-spin reference column.
    #[arg(long)]
    pub no_spin: bool,
}

pub fn interaction_map(a: &InteractionMapArgs) -> Result<Run, CliError> {
    let rows = dapkit::response::interaction_map(a.mu1, a.mu2, a.eps, a.rmin, a.rmax, a.points)?;
    let mut t = if a.no_spin {
        Table::new("dapkit.interaction-map/1", &["r_nm", "V_Hz"])
    } else {
        Table::new("dapkit.interaction-map/1", &["r_nm", "V_Hz", "spin_spin_Hz"])
    };
    let cmp = compare_with_spin(a.mu1, a.mu2, a.eps, 1.0)?;
    t.notes.push(format!("V / spin-spin = {} at every separation", crate::output::fmt_num(cmp.ratio)));
    for r in rows {
        let mut row: Vec<Cell> = vec![(r.r / 10.0).into(), r.dipole_hz.into()];
        if !a.no_spin {
            row.push(r.spin_spin_hz.into());
        }
        t.push(row);
    }
    Ok(Run::new(Output::Table(t)))
}

#[derive(Debug, Args, Serialize)]
pub struct LifetimeArgs {
    /// Photon energy, eV.
    #[arg(long = "energy-eV")]
    pub energy_ev: f64,
    /// Optical transition dipole, e·Å.
    #[arg(long = "mu-eA")]
    pub mu_ea: f64,
    /// Refractive index; taken from --host when absent.
    #[arg(long, required_unless_present = "host")]
    pub nr: Option<f64>,
    #[arg(long)]
    pub host: Option<String>,
    /// as-printed or standard.
    #[arg(long, default_value = "as-printed")]
    pub convention: String,
}

pub fn lifetime(ctx: &Context, a: &LifetimeArgs) -> Result<Run, CliError> {
    let n_r = match (a.nr, &a.host) {
        (Some(n), _) => n,
        (None, Some(h)) => ctx.db.host(h)?.n_r,
        (None, None) => return Err(CliError::usage("give --nr or --host")),
    };
    let convention = LifetimeConvention::parse(&a.convention)?;
    let tau = radiative_lifetime(&LifetimeInput { energy: a.energy_ev, mu_opt: a.mu_ea, n_r }, convention)?;
    let mut v = Map::new();
    v.insert("tau_s".into(), num(tau));
    v.insert("tau_ns".into(), num(tau * 1e9));
    v.insert("energy_eV".into(), num(a.energy_ev));
    v.insert("mu_eA".into(), num(a.mu_ea));
    v.insert("n_r".into(), num(n_r));
    v.insert("convention".into(), json!(convention.as_str()));
    let mut resolved = Map::new();
    resolved.insert("n_r".into(), num(n_r));
    Ok(Run { output: Output::Record { schema: "dapkit.lifetime/1", value: v }, resolved, inputs: Vec::new() })
}

#[derive(Debug, Args, Serialize)]
pub struct CtlArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub chempots: PathBuf,
    #[arg(long)]
    pub host: String,
}

fn charge_label(q: i32) -> String {
    match q {
        0 => "0".into(),
        q if q > 0 => "+".repeat(q as usize),
        q => "-".repeat(q.unsigned_abs() as usize),
    }
}

pub const CTL_COLUMNS: [&str; 7] =
    ["defect", "transition", "level_eV", "reference", "binding_energy_eV", "sizes_angstrom", "error_estimate_eV"];

pub fn ctl_cells(row: &CtlRow) -> Vec<Cell> {
    vec![
        row.defect.clone().into(),
        format!("({}/{})", charge_label(row.level.q1), charge_label(row.level.q2)).into(),
        row.level.level.into(),
        row.reference.clone().into(),
        row.binding_energy.into(),
        row.sizes.iter().map(|l| crate::output::fmt_num(*l)).collect::<Vec<_>>().join(";").into(),
        row.error_estimate.into(),
    ]
}

pub fn ctl(ctx: &Context, a: &CtlArgs) -> Result<Run, CliError> {
    let (records_text, ri) = read(&a.records)?;
    let (chem_text, ci) = read(&a.chempots)?;
    let host = ctx.db.host(&a.host)?;
    let rows = ctl_table(&read_records(&records_text)?, &load_chemical_potentials(&chem_text)?, host)?;
    let mut t = Table::new("dapkit.ctl/1", &CTL_COLUMNS);
    t.notes.push(format!("host {}: E_g = {} eV", host.name, crate::output::fmt_num(host.band_gap)));
    for r in &rows {
        t.push(ctl_cells(r));
    }
    Ok(Run { output: Output::Table(t), resolved: Map::new(), inputs: vec![ri, ci] })
}
