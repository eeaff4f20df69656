//! Python bindings: radial and finite-element eigenvalues, annulus matching,
//! parallel-set profiles, flow decompositions and the verification suite.
//!
//! Robin parameters are plain floats; `float("inf")` means Dirichlet.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rfk_core::fem::{build_mesh, solve_eigen, EigenOptions};
use rfk_core::flow::{self, Basin, FemField, FlowOptions};
use rfk_core::geometry::match_annulus;
use rfk_core::harness::{run_rfk_suite, ExperimentConfig};
use rfk_core::parallels::{self, ProfileOptions};
use rfk_core::radial::sigma_of;
use rfk_core::{lambda1_radial, DomainSpec, Point, RadialOptions, RadialProblem, RfkError, RobinPair, RobinParam, Side};

fn to_py(e: RfkError) -> PyErr {
    match e {
        RfkError::InvalidDomain(_)
        | RfkError::UnsupportedRegime { .. }
        | RfkError::InfeasibleMatch(_)
        | RfkError::IncompatibleDomain { .. }
        | RfkError::InvalidSeed(..)
        | RfkError::Config(_)
        | RfkError::Parse { .. }
        | RfkError::InconsistentInput(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn pair(h_in: f64, h_out: f64) -> PyResult<RobinPair> {
    RobinPair::from_f64(h_in, h_out).map_err(to_py)
}

#[pyclass(name = "Domain", frozen, module = "rfk_lab")]
struct PyDomain {
    inner: DomainSpec,
}

#[pymethods]
impl PyDomain {
    /// Concentric annulus `r < |x| < R`.
    #[staticmethod]
    fn annulus(r: f64, big_r: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DomainSpec::annulus(r, big_r).map_err(to_py)?,
        })
    }

    /// Circles with the inner one shifted by `(dx, dy)`.
    #[staticmethod]
    fn eccentric(r: f64, big_r: f64, dx: f64, dy: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DomainSpec::eccentric_annulus(r, big_r, Point::new(dx, dy)).map_err(to_py)?,
        })
    }

    /// Parses the text domain format (`inner_center`, `inner_coeffs`, ...).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: DomainSpec::parse(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: DomainSpec::load(std::path::Path::new(path)).map_err(to_py)?,
        })
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    /// `(|dOmega_in|, |dOmega_out|)`.
    fn perimeters(&self) -> (f64, f64) {
        (self.inner.inner().perimeter(), self.inner.outer().perimeter())
    }

    fn compatibility_defect(&self) -> f64 {
        self.inner.compatibility_defect()
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.inner.contains(Point::new(x, y))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// `(r, R)` of the annulus matched under the constraints of the regime.
    fn match_annulus(&self, h_in: f64, h_out: f64) -> PyResult<(f64, f64)> {
        let m = match_annulus(&self.inner, &pair(h_in, h_out)?).map_err(to_py)?;
        Ok((m.r, m.big_r))
    }

    fn __repr__(&self) -> String {
        format!("Domain(area={:.6})", self.inner.area())
    }
}

#[pyclass(name = "RadialSolution", frozen, get_all, module = "rfk_lab")]
struct RadialSolution {
    lambda1: f64,
    r: f64,
    big_r: f64,
    /// Radius where the profile is stationary (Robin-Robin regimes only).
    sigma: Option<f64>,
    grid: Vec<f64>,
    v: Vec<f64>,
}

/// First eigenpair of the annulus `r < |x| < R` (`r = 0` is the disk).
#[pyfunction]
fn radial_solve(py: Python<'_>, r: f64, big_r: f64, h_in: f64, h_out: f64) -> PyResult<RadialSolution> {
    let (hi, ho) = (RobinParam::new(h_in).map_err(to_py)?, RobinParam::new(h_out).map_err(to_py)?);
    py.detach(|| {
        let problem = RadialProblem::new(r, big_r, hi, ho)?;
        let eig = lambda1_radial(&problem, &RadialOptions::default())?;
        let sigma = if RobinPair::new(hi, ho).product_sign() > 0 && r > 0.0 {
            Some(sigma_of(&eig, &problem)?)
        } else {
            None
        };
        Ok(RadialSolution {
            lambda1: eig.lambda1,
            r,
            big_r,
            sigma,
            grid: eig.grid,
            v: eig.v,
        })
    })
    .map_err(to_py)
}

#[pyclass(name = "FemSolution", frozen, get_all, module = "rfk_lab")]
struct FemSolution {
    lambda1: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    /// Nodal eigenfunction normalized to `max u = 1`.
    u: Vec<f64>,
    triangles: Vec<[usize; 3]>,
    iterations: usize,
    residual: f64,
}

/// First eigenpair of `domain` by P1 finite elements.
#[pyfunction]
#[pyo3(signature = (domain, h_in, h_out, n_theta = 128, n_radial = 32))]
fn fem_solve(py: Python<'_>, domain: &PyDomain, h_in: f64, h_out: f64, n_theta: usize, n_radial: usize) -> PyResult<FemSolution> {
    let robin = pair(h_in, h_out)?;
    let domain = domain.inner.clone();
    py.detach(|| {
        let mesh = build_mesh(&domain, n_theta, n_radial)?;
        let eig = solve_eigen(&mesh, &robin, &EigenOptions::default())?;
        Ok(FemSolution {
            lambda1: eig.lambda1,
            x: mesh.nodes.iter().map(|p| p.x).collect(),
            y: mesh.nodes.iter().map(|p| p.y).collect(),
            u: eig.u,
            triangles: mesh.triangles,
            iterations: eig.iterations,
            residual: eig.residual,
        })
    })
    .map_err(to_py)
}

#[pyclass(name = "Profile", frozen, get_all, module = "rfk_lab")]
struct Profile {
    side: String,
    r: f64,
    big_r: f64,
    delta: Vec<f64>,
    s: Vec<f64>,
    big_s: Vec<f64>,
    param: Vec<f64>,
    reference: Vec<f64>,
    nagy_violations: usize,
    area_integral: f64,
}

/// Lengths of the parallel curves of one boundary component.
#[pyfunction]
#[pyo3(signature = (domain, side = "inner", grid = parallels::DEFAULT_GRID))]
fn parallel_profile(py: Python<'_>, domain: &PyDomain, side: &str, grid: usize) -> PyResult<Profile> {
    let side: Side = side.parse().map_err(to_py)?;
    let domain = domain.inner.clone();
    py.detach(|| {
        let opts = ProfileOptions {
            grid,
            ..Default::default()
        };
        let p = parallels::level_lengths(&domain, side, &opts)?;
        Ok(Profile {
            side: side.to_string(),
            r: p.r,
            big_r: p.big_r,
            nagy_violations: p.nagy_violations(),
            area_integral: p.area_integral(),
            delta: p.delta,
            s: p.s,
            big_s: p.big_s,
            param: p.param,
            reference: p.reference,
        })
    })
    .map_err(to_py)
}

#[pyclass(name = "FlowSummary", frozen, get_all, module = "rfk_lab")]
struct FlowSummary {
    lambda1: f64,
    area_in: f64,
    area_out: f64,
    domain_area: f64,
    unresolved: usize,
    cut_components: usize,
    cut_residual: f64,
    quotient_in: f64,
    quotient_out: f64,
    sigma_in: f64,
    sigma_out: f64,
    cut: Vec<((f64, f64), (f64, f64))>,
}

/// Basins of the gradient flow of the first eigenfunction and the cut between them.
#[pyfunction]
#[pyo3(signature = (domain, h_in, h_out, n_theta = 256, n_radial = 64, grid = 128))]
fn flow_decomposition(
    py: Python<'_>,
    domain: &PyDomain,
    h_in: f64,
    h_out: f64,
    n_theta: usize,
    n_radial: usize,
    grid: usize,
) -> PyResult<FlowSummary> {
    let robin = pair(h_in, h_out)?;
    if robin.is_pure_neumann() {
        return Err(PyValueError::new_err("pure Neumann: the eigenfunction is constant"));
    }
    let domain = domain.inner.clone();
    py.detach(|| {
        let mesh = build_mesh(&domain, n_theta, n_radial)?;
        let eig = solve_eigen(&mesh, &robin, &EigenOptions::default())?;
        let field = FemField::new(&mesh, &eig);
        let dec = flow::decompose(&field, &domain, &mesh, eig.lambda1, grid, &FlowOptions::default())?;
        let (sigma_in, sigma_out) = dec.interface_radii(&domain);
        Ok(FlowSummary {
            lambda1: eig.lambda1,
            area_in: dec.area_in,
            area_out: dec.area_out,
            domain_area: dec.domain_area,
            unresolved: dec.unresolved,
            cut_components: dec.cut_components(),
            cut_residual: flow::cut_neumann_residual(&field, &dec.cut),
            quotient_in: flow::restricted_rayleigh(&mesh, &eig, &dec, Basin::In, &robin)?,
            quotient_out: flow::restricted_rayleigh(&mesh, &eig, &dec, Basin::Out, &robin)?,
            sigma_in,
            sigma_out,
            cut: dec.cut.iter().map(|(a, b)| ((a.x, a.y), (b.x, b.y))).collect(),
        })
    })
    .map_err(to_py)
}

/// Runs a suite from TOML text; returns `(results_csv, lemmas_csv, all_passed)`.
#[pyfunction]
fn run_suite(py: Python<'_>, config_toml: &str) -> PyResult<(String, String, bool)> {
    let cfg = ExperimentConfig::parse(config_toml).map_err(to_py)?;
    py.detach(|| {
        let report = run_rfk_suite(&cfg)?;
        Ok((report.results_csv()?, report.lemmas_csv()?, !report.has_failures()))
    })
    .map_err(to_py)
}

#[pymodule]
fn rfk_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_class::<RadialSolution>()?;
    m.add_class::<FemSolution>()?;
    m.add_class::<Profile>()?;
    m.add_class::<FlowSummary>()?;
    m.add_function(wrap_pyfunction!(radial_solve, m)?)?;
    m.add_function(wrap_pyfunction!(fem_solve, m)?)?;
    m.add_function(wrap_pyfunction!(parallel_profile, m)?)?;
    m.add_function(wrap_pyfunction!(flow_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("DEFAULT_SUITE", rfk_core::harness::config::DEFAULT_SUITE)?;
    Ok(())
}
