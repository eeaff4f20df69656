//! The verification pipeline: per domain and regime, compare the domain's first
//! eigenvalue with the matched annulus and collect the supporting checks.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::generate::generate;
use crate::error::{Result, RfkError};
use crate::fem::assemble::{assemble_matrices, system_from, Matrices};
use crate::fem::{build_mesh, eigen::eigen_from_system, EigenOptions, EigenResult, Mesh};
use crate::flow::{self, Basin, FemField, FlowDecomposition, FlowOptions};
use crate::geometry::{match_annulus, DomainSpec, Side};
use crate::parallels::{self, ParallelProfile, ProfileOptions};
use crate::radial::{lambda1_radial, RadialOptions, RadialProblem};
use crate::robin::RobinPair;
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRow {
    pub domain_id: String,
    pub family: String,
    pub robin: RobinPair,
    pub r: f64,
    pub big_r: f64,
    /// `lambda_1(Omega)` at each refinement level, coarsest first.
    pub lambda_levels: Vec<f64>,
    pub lambda_annulus: f64,
    /// Transplanted test-function quotient, for the rows with one Neumann side.
    pub quotient: Option<f64>,
    /// `lambda(A) - lambda(Omega)` at the finest level.
    pub margin: f64,
    pub status: Status,
    pub monotone_trend: bool,
    /// `(n_theta, n_radial)` of the finest level.
    pub mesh: (usize, usize),
    pub note: String,
}

impl VerificationRow {
    pub fn lambda_domain(&self) -> f64 {
        self.lambda_levels.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub domain_id: String,
    /// `None` for checks that do not depend on the regime.
    pub robin: Option<RobinPair>,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct DomainCase {
    pub id: String,
    pub family: String,
    pub domain: DomainSpec,
    pub regimes: Vec<RobinPair>,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub case: DomainCase,
    pub rows: Vec<VerificationRow>,
    pub lemmas: Vec<LemmaCheck>,
    /// First flow decomposition computed for the domain, kept for plotting.
    pub flow: Option<FlowDecomposition>,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub cases: Vec<CaseReport>,
}

impl SuiteReport {
    pub fn rows(&self) -> impl Iterator<Item = &VerificationRow> {
        self.cases.iter().flat_map(|c| &c.rows)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.cases.iter().flat_map(|c| &c.lemmas)
    }

    /// True when some row still fails after the doubled-resolution re-check.
    pub fn has_failures(&self) -> bool {
        self.rows().any(|r| r.status == Status::Fail)
    }

    pub fn results_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "domain_id", "family", "h_in", "h_out", "r", "R", "lambda_domain", "lambda_domain_coarse",
            "lambda_annulus", "quotient", "margin", "status", "trend", "mesh", "note",
        ])?;
        for row in self.rows() {
            w.write_record([
                row.domain_id.clone(),
                row.family.clone(),
                row.robin.h_in.to_string(),
                row.robin.h_out.to_string(),
                num(row.r),
                num(row.big_r),
                num(row.lambda_domain()),
                row.lambda_levels.first().map_or(String::new(), |&x| num(x)),
                num(row.lambda_annulus),
                row.quotient.map_or(String::new(), num),
                num(row.margin),
                row.status.to_string(),
                if row.monotone_trend { "monotone" } else { "nonmonotone" }.to_string(),
                format!("{}x{}", row.mesh.0, row.mesh.1),
                row.note.clone(),
            ])?;
        }
        finish_csv(w)
    }

    pub fn lemmas_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["domain_id", "h_in", "h_out", "check", "value", "tolerance", "status"])?;
        for l in self.lemmas() {
            let (a, b) = l.robin.map_or((String::new(), String::new()), |p| (p.h_in.to_string(), p.h_out.to_string()));
            w.write_record([
                l.domain_id.clone(),
                a,
                b,
                l.check.clone(),
                num(l.value),
                num(l.tolerance),
                if l.pass { "PASS" } else { "FAIL" }.to_string(),
            ])?;
        }
        finish_csv(w)
    }

    /// Writes `results.csv`, `lemmas.csv`, `domains/<id>.txt` and `plots/<id>.svg`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join("domains"))?;
        std::fs::create_dir_all(dir.join("plots"))?;
        std::fs::write(dir.join("results.csv"), self.results_csv()?)?;
        std::fs::write(dir.join("lemmas.csv"), self.lemmas_csv()?)?;
        for c in &self.cases {
            std::fs::write(dir.join("domains").join(format!("{}.txt", c.case.id)), c.case.domain.to_text())?;
            let plot = svg::domain_plot(&c.case.domain, c.flow.as_ref(), &[]);
            std::fs::write(dir.join("plots").join(format!("{}.svg", c.case.id)), plot)?;
        }
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:.10}")
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| RfkError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn build_cases(cfg: &ExperimentConfig) -> Result<Vec<DomainCase>> {
    let mut cases = Vec::new();
    for (fi, fam) in cfg.families.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(7919 * fi as u64);
        for k in 0..fam.count {
            cases.push(DomainCase {
                id: format!("{}-{k:02}", fam.name),
                family: fam.name.clone(),
                domain: generate(&fam.kind, seed, k)?,
                regimes: fam.robin_pairs(),
            });
        }
    }
    Ok(cases)
}

pub fn run_rfk_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let cases = build_cases(cfg)?;
    Ok(run_cases(cases, cfg))
}

pub fn run_cases(cases: Vec<DomainCase>, cfg: &ExperimentConfig) -> SuiteReport {
    SuiteReport {
        cases: cases.into_par_iter().map(|c| run_case(c, cfg)).collect(),
    }
}

struct Level {
    mesh: Mesh,
    mats: Matrices,
}

impl Level {
    fn new(domain: &DomainSpec, nt: usize, nr: usize) -> Result<Self> {
        let mesh = build_mesh(domain, nt, nr)?;
        let mats = assemble_matrices(&mesh);
        Ok(Self { mesh, mats })
    }

    fn solve(&self, robin: &RobinPair) -> Result<EigenResult> {
        let sys = system_from(&self.mesh, &self.mats, robin);
        eigen_from_system(&self.mesh, &sys, &EigenOptions::default())
    }
}

fn error_row(case: &DomainCase, robin: RobinPair, note: String) -> VerificationRow {
    VerificationRow {
        domain_id: case.id.clone(),
        family: case.family.clone(),
        robin,
        r: f64::NAN,
        big_r: f64::NAN,
        lambda_levels: Vec::new(),
        lambda_annulus: f64::NAN,
        quotient: None,
        margin: f64::NAN,
        status: Status::Error,
        monotone_trend: true,
        mesh: (0, 0),
        note,
    }
}

/// `|margin| < eps` with margins that change sign or eigenvalues that do not converge
/// monotonically across levels.
fn trend_is_monotone(levels: &[f64], lambda_annulus: f64) -> bool {
    let diffs: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let same_direction = diffs.iter().all(|&d| d <= 0.0) || diffs.iter().all(|&d| d >= 0.0);
    let margins: Vec<f64> = levels.iter().map(|l| lambda_annulus - l).collect();
    let same_sign = margins.iter().all(|&m| m >= 0.0) || margins.iter().all(|&m| m <= 0.0);
    same_direction && same_sign
}

pub fn classify(margin: f64, eps: f64, monotone: bool) -> Status {
    if margin < -eps {
        Status::Fail
    } else if margin.abs() < eps && !monotone {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}

fn run_case(case: DomainCase, cfg: &ExperimentConfig) -> CaseReport {
    let mut report = CaseReport {
        rows: Vec::new(),
        lemmas: Vec::new(),
        flow: None,
        case,
    };
    let [nt, nr] = cfg.resolution.mesh;
    let levels = Level::new(&report.case.domain, nt, nr).and_then(|c| Ok((c, Level::new(&report.case.domain, 2 * nt, 2 * nr)?)));
    let (coarse, fine) = match levels {
        Ok(l) => l,
        Err(e) => {
            report.rows = report.case.regimes.iter().map(|&p| error_row(&report.case, p, e.to_string())).collect();
            return report;
        }
    };
    let mut profiles: [Option<Result<ParallelProfile>>; 2] = [None, None];
    let mut recheck: Option<Level> = None;
    for &robin in &report.case.regimes.clone() {
        match run_row(&mut report, cfg, robin, &coarse, &fine, &mut recheck, &mut profiles) {
            Ok(row) => report.rows.push(row),
            Err(e) => {
                let row = error_row(&report.case, robin, e.to_string());
                report.rows.push(row);
            }
        }
    }
    report
}

fn profile_for<'a>(
    slot: &'a mut [Option<Result<ParallelProfile>>; 2],
    report: &mut CaseReport,
    side: Side,
    cfg: &ExperimentConfig,
) -> Result<&'a ParallelProfile> {
    let k = usize::from(side == Side::Outer);
    if slot[k].is_none() {
        let opts = ProfileOptions {
            grid: cfg.resolution.profile_grid,
            ..Default::default()
        };
        let p = parallels::level_lengths(&report.case.domain, side, &opts);
        if let Ok(p) = &p {
            let id = &report.case.id;
            let area_err = (p.area_integral() - p.area) / p.area;
            let name = side.to_string();
            report.lemmas.push(lemma(id, None, format!("nagy_{name}"), p.nagy_violations() as f64, 0.0));
            report.lemmas.push(lemma(id, None, format!("area_identity_{name}"), area_err, cfg.tolerances.area));
            let consistent = p.parametrization_consistent(1e-3);
            report.lemmas.push(LemmaCheck {
                domain_id: id.clone(),
                robin: None,
                check: format!("parametrization_{name}"),
                value: f64::from(u8::from(consistent)),
                tolerance: 1.0,
                pass: consistent,
            });
        }
        slot[k] = Some(p);
    }
    match slot[k].as_ref().expect("profile slot filled") {
        Ok(p) => Ok(p),
        Err(e) => Err(RfkError::DegenerateProfile(e.to_string())),
    }
}

fn lemma(id: &str, robin: Option<RobinPair>, check: String, value: f64, tolerance: f64) -> LemmaCheck {
    LemmaCheck {
        domain_id: id.to_string(),
        robin,
        check,
        value,
        tolerance,
        pass: value.abs() <= tolerance,
    }
}

fn run_row(
    report: &mut CaseReport,
    cfg: &ExperimentConfig,
    robin: RobinPair,
    coarse: &Level,
    fine: &Level,
    recheck: &mut Option<Level>,
    profiles: &mut [Option<Result<ParallelProfile>>; 2],
) -> Result<VerificationRow> {
    let domain = report.case.domain.clone();
    let id = report.case.id.clone();
    let matched = match_annulus(&domain, &robin)?;
    let radial_opts = RadialOptions::default();
    let annulus = lambda1_radial(&RadialProblem::new(matched.r, matched.big_r, robin.h_in, robin.h_out)?, &radial_opts)?;
    let lambda_a = annulus.lambda1;
    let eps = cfg.tolerances.chain * lambda_a.abs();

    let eig_c = coarse.solve(&robin)?;
    let eig_f = fine.solve(&robin)?;
    let mut levels = vec![eig_c.lambda1, eig_f.lambda1];
    let [nt, nr] = cfg.resolution.mesh;
    let mut mesh_used = (2 * nt, 2 * nr);
    let mut note = String::new();
    if lambda_a - eig_f.lambda1 < -eps {
        // re-check at doubled resolution before reporting a violation
        if recheck.is_none() {
            *recheck = Some(Level::new(&domain, 4 * nt, 4 * nr)?);
        }
        let eig = recheck.as_ref().expect("recheck level built").solve(&robin)?;
        levels.push(eig.lambda1);
        mesh_used = (4 * nt, 4 * nr);
        note = "re-checked at doubled resolution".into();
    }
    let lambda_d = *levels.last().expect("at least one level");
    let margin = lambda_a - lambda_d;
    let monotone = trend_is_monotone(&levels, lambda_a);
    let status = classify(margin, eps, monotone);

    // sign of the eigenvalue follows the signs of the parameters
    let expected = if robin.h_in.sign() >= 0 && robin.h_out.sign() >= 0 { 1.0 } else { -1.0 };
    report.lemmas.push(LemmaCheck {
        domain_id: id.clone(),
        robin: Some(robin),
        check: "sign".into(),
        value: eig_f.lambda1,
        tolerance: 0.0,
        pass: eig_f.lambda1 * expected > 0.0,
    });
    let refinement = (eig_f.lambda1 - eig_c.lambda1) / eig_f.lambda1.abs();
    report.lemmas.push(lemma(&id, Some(robin), "fem_refinement_change".into(), refinement, cfg.tolerances.chain));

    let mut quotient = None;
    let one_neumann = robin.h_in.is_neumann() != robin.h_out.is_neumann();
    if one_neumann {
        let side = if robin.h_out.is_neumann() { Side::Inner } else { Side::Outer };
        let profile = profile_for(profiles, report, side, cfg)?.clone();
        let radial = lambda1_radial(&RadialProblem::new(profile.r, profile.big_r, robin.h_in, robin.h_out)?, &radial_opts)?;
        let test = match side {
            Side::Inner => parallels::build_test_function_rn(&domain, &radial, &profile, &fine.mesh)?,
            Side::Outer => parallels::build_test_function_nr(&domain, &radial, &profile, &fine.mesh)?,
        };
        let rep = parallels::sandwich_check(&fine.mesh, &robin, &test, &radial, eig_f.lambda1, cfg.tolerances.chain)?;
        let scale = radial.lambda1.abs();
        report.lemmas.push(LemmaCheck {
            domain_id: id.clone(),
            robin: Some(robin),
            check: "sandwich_lower".into(),
            value: rep.lower_residual / scale,
            tolerance: cfg.tolerances.chain,
            pass: rep.lower_residual <= rep.allowance,
        });
        report.lemmas.push(LemmaCheck {
            domain_id: id.clone(),
            robin: Some(robin),
            check: "sandwich_upper".into(),
            value: rep.upper_residual / scale,
            tolerance: cfg.tolerances.chain,
            pass: rep.upper_residual <= rep.allowance,
        });
        quotient = Some(rep.quotient);
    }

    if robin.product_sign() > 0 {
        flow_checks(report, cfg, robin, &fine.mesh, &eig_f)?;
    }

    Ok(VerificationRow {
        domain_id: id,
        family: report.case.family.clone(),
        robin,
        r: matched.r,
        big_r: matched.big_r,
        lambda_levels: levels,
        lambda_annulus: lambda_a,
        quotient,
        margin,
        status,
        monotone_trend: monotone,
        mesh: mesh_used,
        note,
    })
}

fn flow_checks(report: &mut CaseReport, cfg: &ExperimentConfig, robin: RobinPair, mesh: &Mesh, eig: &EigenResult) -> Result<()> {
    let domain = &report.case.domain;
    let id = report.case.id.clone();
    let field = FemField::new(mesh, eig);
    let dec = flow::decompose(&field, domain, mesh, eig.lambda1, cfg.resolution.flow_grid, &FlowOptions::default())?;
    let mut push = |check: &str, value: f64, tol: f64| report.lemmas.push(lemma(&id, Some(robin), check.into(), value, tol));
    push("flow_unresolved_fraction", dec.unresolved_fraction(), 0.02);
    push("flow_area_sum", (dec.area_in + dec.area_out - dec.domain_area) / dec.domain_area, 0.02);
    push("flow_cut_components", dec.cut_components() as f64 - 1.0, 0.0);
    push("flow_cut_neumann_residual", flow::cut_neumann_residual(&field, &dec.cut), 0.05);
    let (s1, s2) = dec.interface_radii(domain);
    push("flow_sigma_consistency", (s1 - s2) / (0.5 * (s1 + s2)), 0.02);
    for (basin, name) in [(Basin::In, "restricted_quotient_in"), (Basin::Out, "restricted_quotient_out")] {
        let q = flow::restricted_rayleigh(mesh, eig, &dec, basin, &robin)?;
        push(name, (q - eig.lambda1) / eig.lambda1.abs(), cfg.tolerances.flow);
    }
    if report.flow.is_none() {
        report.flow = Some(dec);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_rules() {
        assert_eq!(classify(0.5, 0.1, true), Status::Pass);
        assert_eq!(classify(-0.05, 0.1, true), Status::Pass);
        assert_eq!(classify(-0.05, 0.1, false), Status::Inconclusive);
        assert_eq!(classify(-0.2, 0.1, true), Status::Fail);
        assert!(trend_is_monotone(&[2.0, 1.9, 1.88], 1.5));
        assert!(!trend_is_monotone(&[2.0, 1.9, 1.95], 1.5));
        assert!(!trend_is_monotone(&[1.52, 1.49], 1.5));
    }

    #[test]
    fn small_suite_runs_and_is_deterministic() {
        let cfg = ExperimentConfig::parse(
            "seed = 3\n[resolution]\nmesh = [64, 12]\nprofile_grid = 256\nflow_grid = 48\n\
             [[family]]\nname = \"e\"\nkind = \"eccentric\"\nr = 1\nbig_r = 2\nmax_offset = 0.2\n\
             regimes = [[1, 0], [1, 1]]\n",
        )
        .unwrap();
        let a = run_rfk_suite(&cfg).unwrap();
        let b = run_rfk_suite(&cfg).unwrap();
        assert_eq!(a.results_csv().unwrap(), b.results_csv().unwrap());
        assert_eq!(a.lemmas_csv().unwrap(), b.lemmas_csv().unwrap());
        let rows: Vec<_> = a.rows().collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.status == Status::Pass), "{rows:?}");
        assert!(rows[0].quotient.is_some() && rows[1].quotient.is_none());
        assert!(a.cases[0].flow.is_some());
    }
}
