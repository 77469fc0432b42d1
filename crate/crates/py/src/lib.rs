use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dapkit_core as core;
use dapkit_core::lattice::{LatticeSpec, Relation};
use dapkit_core::materials::LatticeKind;
use dapkit_core::response::{InteractionQuery, LifetimeConvention, LifetimeInput, StarkModel};
use dapkit_core::DapError;

create_exception!(dapkit, DapkitError, PyValueError, "Raised for every dapkit domain, parse or fit failure.");

fn err(e: DapError) -> PyErr {
    DapkitError::new_err(format!("{}: {e}", e.kind()))
}

fn database(db: Option<&MaterialsDatabase>) -> core::MaterialsDatabase {
    db.map_or_else(core::MaterialsDatabase::example, |d| d.inner.clone())
}

#[pyclass(frozen, skip_from_py_object, module = "dapkit")]
#[derive(Clone)]
struct MaterialsDatabase {
    inner: core::MaterialsDatabase,
}

#[pymethods]
impl MaterialsDatabase {
    /// The bundled diamond / 3C-SiC database.
    #[staticmethod]
    fn example() -> Self {
        Self { inner: core::MaterialsDatabase::example() }
    }

    #[staticmethod]
    fn loads(text: &str) -> PyResult<Self> {
        Ok(Self { inner: core::load_database(text).map_err(err)? })
    }

    fn hosts(&self) -> Vec<String> {
        self.inner.hosts.keys().cloned().collect()
    }

    fn defects(&self) -> Vec<String> {
        self.inner.defects.keys().cloned().collect()
    }

    fn host<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
        let h = self.inner.host(name).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("name", &h.name)?;
        d.set_item("band_gap", h.band_gap)?;
        d.set_item("eps_r", h.eps_r)?;
        d.set_item("a0", h.a0)?;
        d.set_item("bond_length", h.bond_length)?;
        d.set_item("n_r", h.n_r)?;
        d.set_item("lattice_kind", h.lattice_kind.as_str())?;
        d.set_item("vbm", h.vbm)?;
        Ok(d)
    }

    fn defect<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.defect(name).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("name", &s.name)?;
        d.set_item("host", &s.host)?;
        d.set_item("role", format!("{:?}", s.role).to_lowercase())?;
        d.set_item("binding_energy", s.binding_energy)?;
        d.set_item("bohr_radius", s.bohr_radius)?;
        Ok(d)
    }
}

#[pyclass(frozen, module = "dapkit")]
struct Shell {
    inner: core::Shell,
}

#[pymethods]
impl Shell {
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    /// Å
    #[getter]
    fn distance(&self) -> f64 {
        self.inner.distance
    }

    #[getter]
    fn multiplicity(&self) -> usize {
        self.inner.multiplicity
    }

    #[getter]
    fn relation(&self) -> &'static str {
        self.inner.relation.as_str()
    }

    /// Separation vectors in Å, one per site of the shell.
    fn vectors(&self) -> Vec<[f64; 3]> {
        core::lattice::pair_orientations(&self.inner).vectors
    }

    fn __repr__(&self) -> String {
        format!(
            "Shell(m={}, distance={:.6}, multiplicity={}, relation='{}')",
            self.inner.m,
            self.inner.distance,
            self.inner.multiplicity,
            self.inner.relation.as_str()
        )
    }
}

fn lattice_kind(kind: &str) -> PyResult<LatticeKind> {
    match kind {
        "diamond-structure" | "diamond" => Ok(LatticeKind::DiamondStructure),
        "zincblende" => Ok(LatticeKind::Zincblende),
        other => Err(DapkitError::new_err(format!("domain: unknown lattice kind `{other}`"))),
    }
}

/// First `count` donor-acceptor shells.
#[pyfunction]
#[pyo3(signature = (a0, kind, relation, count))]
fn first_shells(a0: f64, kind: &str, relation: &str, count: usize) -> PyResult<Vec<Shell>> {
    let lattice = LatticeSpec::new(a0, lattice_kind(kind)?).map_err(err)?;
    let relation = Relation::parse(relation).map_err(err)?;
    Ok(core::first_shells(&lattice, relation, count).map_err(err)?.into_iter().map(|inner| Shell { inner }).collect())
}

/// Overlap correction J(R) in eV.
#[pyfunction]
fn j_correction(r: f64, a_donor: f64, a_acceptor: f64, eps_r: f64) -> PyResult<f64> {
    core::j_correction(r, a_donor, a_acceptor, eps_r).map_err(err)
}

/// `[(m, R, E_zpl)]` for the first shells of a pair.
#[pyfunction]
#[pyo3(signature = (host, donor, acceptor, shells, with_j = true, db = None))]
fn zpl_series(
    host: &str,
    donor: &str,
    acceptor: &str,
    shells: usize,
    with_j: bool,
    db: Option<&MaterialsDatabase>,
) -> PyResult<Vec<(usize, f64, f64)>> {
    let params = core::DapModelParams::from_database(&database(db), host, donor, acceptor).map_err(err)?;
    let series = core::ZplSeries::first_shells(&params, shells, with_j).map_err(err)?;
    Ok(series.points.iter().map(|p| (p.m, p.distance, p.energy)).collect())
}

/// Straight-line fit of `[(R, E)]` against `r_b/R`.
#[pyfunction]
fn fit_series<'py>(py: Python<'py>, points: Vec<(f64, f64)>, bond_length: f64, band_gap: f64) -> PyResult<Bound<'py, PyDict>> {
    let fit = core::fit_series(&points, bond_length, band_gap).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("slope", fit.slope)?;
    d.set_item("intercept", fit.intercept)?;
    d.set_item("binding_sum", fit.binding_sum)?;
    d.set_item("rms_residual", fit.diagnostics.rms_residual)?;
    Ok(d)
}

#[pyclass(frozen, skip_from_py_object, module = "dapkit")]
#[derive(Clone)]
struct VibronicModel {
    inner: core::VibronicModel,
}

#[pymethods]
impl VibronicModel {
    /// ΔQ in amu^½·Å, mode energies in meV, ZPL in eV.
    #[new]
    fn new(delta_q: f64, omega_g: f64, omega_e: f64, e_zpl: f64) -> PyResult<Self> {
        Ok(Self { inner: core::VibronicModel::new(delta_q, omega_g, omega_e, e_zpl).map_err(err)? })
    }

    #[staticmethod]
    fn from_huang_rhys(s: f64, omega_g: f64, omega_e: f64, e_zpl: f64) -> PyResult<Self> {
        Ok(Self { inner: core::VibronicModel::from_huang_rhys(s, omega_g, omega_e, e_zpl).map_err(err)? })
    }

    #[getter]
    fn delta_q(&self) -> f64 {
        self.inner.delta_q
    }

    #[getter]
    fn s_g(&self) -> f64 {
        self.inner.s_g
    }

    #[getter]
    fn s_e(&self) -> f64 {
        self.inner.s_e
    }

    #[getter]
    fn e_zpl(&self) -> f64 {
        self.inner.e_zpl
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!(
            "VibronicModel(delta_q={:.6}, omega_g={}, omega_e={}, S_g={:.6}, E_zpl={})",
            m.delta_q, m.omega_g, m.omega_e, m.s_g, m.e_zpl
        )
    }
}

#[pyclass(frozen, module = "dapkit")]
struct Spectrum {
    inner: core::Spectrum,
}

#[pymethods]
impl Spectrum {
    /// eV
    #[getter]
    fn energy(&self) -> Vec<f64> {
        self.inner.energy.clone()
    }

    /// 1/eV, unit area
    #[getter]
    fn intensity(&self) -> Vec<f64> {
        self.inner.intensity.clone()
    }

    #[getter]
    fn zpl_weight(&self) -> f64 {
        self.inner.metadata.zpl_weight
    }

    #[getter]
    fn captured_weight(&self) -> f64 {
        self.inner.metadata.captured_weight
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    /// `[(energy, intensity, prominence)]` of maxima above a fraction of the peak height.
    #[pyo3(signature = (min_prominence_fraction = 0.01))]
    fn peaks(&self, min_prominence_fraction: f64) -> Vec<(f64, f64, f64)> {
        self.inner.peaks(min_prominence_fraction).iter().map(|p| (p.energy, p.intensity, p.prominence)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.energy.len()
    }
}

/// Photoluminescence lineshape on the default grid; widths in eV.
#[pyfunction]
#[pyo3(signature = (model, temperature = 5.0, gamma = 0.003, sigma = 0.030))]
fn lineshape(py: Python<'_>, model: &VibronicModel, temperature: f64, gamma: f64, sigma: f64) -> PyResult<Spectrum> {
    let m = model.inner.clone();
    py.detach(move || {
        let b = core::Broadening::new(gamma, sigma)?;
        let grid = core::EnergyGrid::for_model(&m, &b)?;
        core::lineshape(&m, temperature, &grid, &b)
    })
    .map(|inner| Spectrum { inner })
    .map_err(err)
}

/// Overlap ⟨m_e|n_g⟩ of displaced oscillators; mode energies in meV.
#[pyfunction]
fn fc_overlap(m: usize, n: usize, omega_e: f64, omega_g: f64, delta_q: f64) -> PyResult<f64> {
    core::spectra::fc_overlap(m, n, omega_e, omega_g, delta_q).map_err(err)
}

#[pyfunction]
fn huang_rhys(delta_q: f64, omega: f64) -> PyResult<f64> {
    core::spectra::huang_rhys(delta_q, omega).map_err(err)
}

/// Dipole change between two snapshot files' contents, e·Å.
#[pyfunction]
#[pyo3(signature = (ground, excited, hint = None))]
fn dipole_from_snapshots<'py>(
    py: Python<'py>,
    ground: &str,
    excited: &str,
    hint: Option<[f64; 3]>,
) -> PyResult<Bound<'py, PyDict>> {
    let g = core::polarization::parse_snapshot(ground).map_err(err)?;
    let e = core::polarization::parse_snapshot(excited).map_err(err)?;
    let mu = core::polarization::dipole_from_snapshots(&g, &e, hint).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("vector", mu.vector)?;
    d.set_item("magnitude", mu.magnitude())?;
    d.set_item("magnitude_debye", mu.magnitude_debye)?;
    d.set_item("branch_shift", mu.branch_shift)?;
    d.set_item("ambiguity_flag", mu.ambiguity_flag)?;
    Ok(d)
}

/// `−Δμ·E − ½Δα·E²` in eV for a field in V/Å.
#[pyfunction]
fn stark_shift(delta_mu: f64, delta_alpha: f64, field: f64) -> f64 {
    core::response::stark_shift(&StarkModel::new(delta_mu, delta_alpha), field)
}

/// `(Δμ, Δα)` from `[(field, shift)]`.
#[pyfunction]
fn fit_stark(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    let m = core::response::fit_stark(&points).map_err(err)?;
    Ok((m.delta_mu, m.delta_alpha))
}

/// Coupling of two dipoles (e·Å) separated by `r` (Å), in Hz.
#[pyfunction]
#[pyo3(signature = (mu1, mu2, r, eps_r))]
fn dipole_interaction(mu1: [f64; 3], mu2: [f64; 3], r: [f64; 3], eps_r: f64) -> PyResult<f64> {
    core::response::dipole_interaction(&InteractionQuery { mu1, mu2, r, eps_r }).map_err(err)
}

#[pyfunction]
fn side_by_side_interaction(mu1: f64, mu2: f64, eps_r: f64, r: f64) -> PyResult<f64> {
    core::response::side_by_side_interaction(mu1, mu2, eps_r, r).map_err(err)
}

/// NV-NV magnetic dipole coupling at `r` Å, Hz.
#[pyfunction]
fn spin_spin_reference(r: f64) -> PyResult<f64> {
    core::response::spin_spin_reference(r).map_err(err)
}

/// Radiative lifetime in seconds.
#[pyfunction]
#[pyo3(signature = (energy, mu_opt, n_r, convention = "as-printed"))]
fn radiative_lifetime(energy: f64, mu_opt: f64, n_r: f64, convention: &str) -> PyResult<f64> {
    let c = LifetimeConvention::parse(convention).map_err(err)?;
    core::response::radiative_lifetime(&LifetimeInput { energy, mu_opt, n_r }, c).map_err(err)
}

/// Transition-level table from records CSV and chemical-potential TOML text.
#[pyfunction]
#[pyo3(signature = (records, chempots, host, db = None))]
fn ctl_table<'py>(
    py: Python<'py>,
    records: &str,
    chempots: &str,
    host: &str,
    db: Option<&MaterialsDatabase>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let db = database(db);
    let host = db.host(host).map_err(err)?;
    let records = core::defects::read_records(records).map_err(err)?;
    let mu = core::defects::load_chemical_potentials(chempots).map_err(err)?;
    let rows = core::defects::ctl_table(&records, &mu, host).map_err(err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("defect", &r.defect)?;
            d.set_item("q1", r.level.q1)?;
            d.set_item("q2", r.level.q2)?;
            d.set_item("level", r.level.level)?;
            d.set_item("reference", &r.reference)?;
            d.set_item("binding_energy", r.binding_energy)?;
            Ok(d)
        })
        .collect()
}

/// `(limit, slope, error_estimate)` of a linear fit against 1/L.
#[pyfunction]
fn dilute_extrapolation(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let d = core::defects::dilute_extrapolation(&points).map_err(err)?;
    Ok((d.limit, d.slope, d.error_estimate))
}

#[pymodule]
fn dapkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("DapkitError", m.py().get_type::<DapkitError>())?;
    m.add_class::<MaterialsDatabase>()?;
    m.add_class::<Shell>()?;
    m.add_class::<VibronicModel>()?;
    m.add_class::<Spectrum>()?;
    m.add_function(wrap_pyfunction!(first_shells, m)?)?;
    m.add_function(wrap_pyfunction!(j_correction, m)?)?;
    m.add_function(wrap_pyfunction!(zpl_series, m)?)?;
    m.add_function(wrap_pyfunction!(fit_series, m)?)?;
    m.add_function(wrap_pyfunction!(lineshape, m)?)?;
    m.add_function(wrap_pyfunction!(fc_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(huang_rhys, m)?)?;
    m.add_function(wrap_pyfunction!(dipole_from_snapshots, m)?)?;
    m.add_function(wrap_pyfunction!(stark_shift, m)?)?;
    m.add_function(wrap_pyfunction!(fit_stark, m)?)?;
    m.add_function(wrap_pyfunction!(dipole_interaction, m)?)?;
    m.add_function(wrap_pyfunction!(side_by_side_interaction, m)?)?;
    m.add_function(wrap_pyfunction!(spin_spin_reference, m)?)?;
    m.add_function(wrap_pyfunction!(radiative_lifetime, m)?)?;
    m.add_function(wrap_pyfunction!(ctl_table, m)?)?;
    m.add_function(wrap_pyfunction!(dilute_extrapolation, m)?)?;
    Ok(())
}
