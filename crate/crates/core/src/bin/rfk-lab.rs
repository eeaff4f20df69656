//! `rfk-lab`: command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rfk_core::fem::{build_mesh, dump_field, solve_eigen, EigenOptions};
use rfk_core::flow::{self, Direction, FemField, FlowOptions};
use rfk_core::harness::{run_rfk_suite, ExperimentConfig, Status};
use rfk_core::parallels::{self, ProfileOptions};
use rfk_core::radial::sigma_of;
use rfk_core::svg::{domain_plot, Svg};
use rfk_core::{lambda1_radial, DomainSpec, Point, RadialOptions, RadialProblem, Result, RobinPair, RobinParam, Side};

#[derive(Parser)]
#[command(name = "rfk-lab", version, about = "Robin eigenvalue comparisons on doubly connected domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write results.csv, lemmas.csv and plots.
    Verify {
        /// TOML configuration; the bundled default suite when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides `out_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First eigenvalue of the annulus `r < |x| < R`, as a CSV line.
    Radial {
        #[arg(long)]
        r: f64,
        #[arg(long = "R")]
        big_r: f64,
        #[arg(long, allow_hyphen_values = true)]
        hin: RobinParam,
        #[arg(long, allow_hyphen_values = true)]
        hout: RobinParam,
    },
    /// Parallel-set profile of one boundary component.
    Profile {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        side: Side,
        #[arg(long, default_value_t = parallels::DEFAULT_GRID)]
        grid: usize,
        /// CSV of the profile (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot_parallels: Option<PathBuf>,
    },
    /// First eigenvalue of a domain by finite elements.
    Fem {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        hin: RobinParam,
        #[arg(long, allow_hyphen_values = true)]
        hout: RobinParam,
        #[arg(long, default_value = "128x32")]
        mesh: String,
        /// Write `node x y u` / `tri i j k` lines.
        #[arg(long)]
        dump_field: Option<PathBuf>,
    },
    /// Gradient-flow decomposition into the basins of the two boundary components.
    Flow {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        hin: RobinParam,
        #[arg(long, allow_hyphen_values = true)]
        hout: RobinParam,
        #[arg(long, default_value = "256x64")]
        mesh: String,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// CSV of seed labels.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        plot_flow: Option<PathBuf>,
        #[arg(long)]
        dump_field: Option<PathBuf>,
    },
}

fn parse_mesh(s: &str) -> Result<(usize, usize)> {
    let bad = || rfk_core::RfkError::Config(format!("mesh must look like 128x32, got '{s}'"));
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(config: Option<PathBuf>, out: Option<PathBuf>) -> Result<bool> {
    let cfg = match config {
        Some(p) => ExperimentConfig::load(&p)?,
        None => ExperimentConfig::default_suite(),
    };
    let report = run_rfk_suite(&cfg)?;
    for row in report.rows() {
        println!(
            "{:<14} {:<14} lambda(Omega) {:>12.6} lambda(A) {:>12.6} margin {:>+10.3e} {}",
            row.domain_id,
            row.robin.to_string(),
            row.lambda_domain(),
            row.lambda_annulus,
            row.margin,
            row.status
        );
        if row.status == Status::Error {
            eprintln!("  {}: {}", row.domain_id, row.note);
        }
    }
    let failed_lemmas = report.lemmas().filter(|l| !l.pass).count();
    println!(
        "{} rows, {} lemma checks ({} outside tolerance)",
        report.rows().count(),
        report.lemmas().count(),
        failed_lemmas
    );
    if let Some(dir) = out.or(cfg.out_dir) {
        report.write(&dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(!report.has_failures())
}

fn radial(r: f64, big_r: f64, hin: RobinParam, hout: RobinParam) -> Result<()> {
    let problem = RadialProblem::new(r, big_r, hin, hout)?;
    let eig = lambda1_radial(&problem, &RadialOptions::default())?;
    let sigma = if hin.is_neumann() || hout.is_neumann() || RobinPair::new(hin, hout).product_sign() <= 0 {
        String::new()
    } else {
        format!("{:.12}", sigma_of(&eig, &problem)?)
    };
    println!("r,R,h_in,h_out,lambda1,sigma");
    println!("{r},{big_r},{hin},{hout},{:.12},{sigma}", eig.lambda1);
    Ok(())
}

fn profile(domain: &Path, side: Side, grid: usize, out: Option<PathBuf>, plot: Option<PathBuf>) -> Result<()> {
    let domain = DomainSpec::load(domain)?;
    let opts = ProfileOptions {
        grid,
        ..Default::default()
    };
    let p = parallels::level_lengths(&domain, side, &opts)?;
    write_or_print(out.as_deref(), &p.to_csv()?)?;
    eprintln!(
        "matched annulus r = {:.6}, R = {:.6}; Nagy violations {}; area identity error {:.3e}",
        p.r,
        p.big_r,
        p.nagy_violations(),
        (p.area_integral() - p.area) / p.area
    );
    if let Some(path) = plot {
        let grid = parallels::background_grid(&domain, opts.grid.min(512));
        let field = parallels::distance_field(&domain, side, &grid);
        let mut svg = Svg::for_domain(&domain, 600.0);
        let top = p.terminal_delta;
        for k in 1..=12 {
            let level = top * k as f64 / 13.0;
            let segs: Vec<_> = field
                .contour(level)
                .into_iter()
                .filter(|(a, b)| domain.contains(*a) && domain.contains(*b))
                .collect();
            svg.segments(&segs, "#2c7fb8", 0.8);
        }
        svg.polygon(domain.outer().samples(), "black", "none", 1.5);
        svg.polygon(domain.inner().samples(), "black", "none", 1.5);
        std::fs::write(path, svg.finish())?;
    }
    Ok(())
}

fn fem(domain: &Path, robin: RobinPair, mesh: &str, dump: Option<PathBuf>) -> Result<()> {
    let domain = DomainSpec::load(domain)?;
    let (nt, nr) = parse_mesh(mesh)?;
    let mesh = build_mesh(&domain, nt, nr)?;
    let eig = solve_eigen(&mesh, &robin, &EigenOptions::default())?;
    println!("lambda1 = {:.10} ({} nodes, {} iterations, residual {:.2e})", eig.lambda1, mesh.nodes.len(), eig.iterations, eig.residual);
    if let Some(path) = dump {
        std::fs::write(path, dump_field(&mesh, &eig.u))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn flow_cmd(
    domain: &Path,
    robin: RobinPair,
    mesh: &str,
    grid: usize,
    csv: Option<PathBuf>,
    plot: Option<PathBuf>,
    dump: Option<PathBuf>,
) -> Result<()> {
    let domain = DomainSpec::load(domain)?;
    if robin.is_pure_neumann() {
        return Err(rfk_core::RfkError::DecompositionFailure("pure Neumann: the eigenfunction is constant".into()));
    }
    robin.check_admissible()?;
    let (nt, nr) = parse_mesh(mesh)?;
    let mesh = build_mesh(&domain, nt, nr)?;
    let eig = solve_eigen(&mesh, &robin, &EigenOptions::default())?;
    let field = FemField::new(&mesh, &eig);
    let opts = FlowOptions::default();
    let dec = flow::decompose(&field, &domain, &mesh, eig.lambda1, grid, &opts)?;
    let q_in = flow::restricted_rayleigh(&mesh, &eig, &dec, flow::Basin::In, &robin)?;
    let q_out = flow::restricted_rayleigh(&mesh, &eig, &dec, flow::Basin::Out, &robin)?;
    let (s1, s2) = dec.interface_radii(&domain);
    println!("lambda1            {:.8}", eig.lambda1);
    println!("basin areas        {:.6} + {:.6} (domain {:.6})", dec.area_in, dec.area_out, dec.domain_area);
    println!("unresolved seeds   {} of {}", dec.unresolved, dec.seeds_in_domain);
    println!("cut components     {}", dec.cut_components());
    println!("cut residual       {:.3e}", flow::cut_neumann_residual(&field, &dec.cut));
    println!("restricted quot.   in {q_in:.8}  out {q_out:.8}");
    println!("interface radii    {s1:.6} {s2:.6}");
    if let Some(path) = csv {
        std::fs::write(path, flow::labels_csv(&dec)?)?;
    }
    if let Some(path) = plot {
        let direction = Direction::toward_boundary(eig.lambda1);
        let c = domain.inner().center();
        let (r_in, r_out) = (domain.inner().mean_radius(), domain.outer().mean_radius());
        let lines: Vec<_> = (0..48)
            .filter_map(|k| {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 48.0;
                let rho = if k % 2 == 0 { 0.65 } else { 0.35 };
                let p = c + Point::new(th.cos(), th.sin()) * (r_in + rho * (r_out - r_in));
                domain
                    .contains(p)
                    .then(|| flow::trace_flow(&field, &domain, p, direction, &opts).ok())
                    .flatten()
            })
            .collect();
        std::fs::write(path, domain_plot(&domain, Some(&dec), &lines))?;
    }
    if let Some(path) = dump {
        std::fs::write(path, dump_field(&mesh, &eig.u))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify { config, out } => return verify(config, out),
        Command::Radial { r, big_r, hin, hout } => radial(r, big_r, hin, hout)?,
        Command::Profile {
            domain,
            side,
            grid,
            out,
            plot_parallels,
        } => profile(&domain, side, grid, out, plot_parallels)?,
        Command::Fem {
            domain,
            hin,
            hout,
            mesh,
            dump_field,
        } => fem(&domain, RobinPair::new(hin, hout), &mesh, dump_field)?,
        Command::Flow {
            domain,
            hin,
            hout,
            mesh,
            grid,
            csv,
            plot_flow,
            dump_field,
        } => flow_cmd(&domain, RobinPair::new(hin, hout), &mesh, grid, csv, plot_flow, dump_field)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
