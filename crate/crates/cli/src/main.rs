//! `scmatch` command-line interface.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use scmatch::conformal::{polygonize, solve_parameter_problem, split_long_edges, ScOptions, DEFAULT_KAPPA};
use scmatch::io::corpus::write_corpus;
use scmatch::io::{plot_svg, BrepFile, EllipticRecord, PlotMetric, StageTiming, SurfaceFile, SurfaceProvenance};
use scmatch::matching::{match_boundaries, MatchOptions, DEFAULT_RELATIVE_CHORD_TOL};
use scmatch::paramgen::{
    convergence_csv, convergence_rates, elliptic_improve, k_refine, linear_only_pipeline, poisson_demo, EllipticOptions,
};
use scmatch::quality::{jacobian_sample, quality_report, QUALITY_HEADER};
use scmatch::splines::NurbsSurface;
use scmatch::{Error, Result, Side};

/// Environment variable accepted for harness compatibility; the pipeline is
/// deterministic and does not read it.
const SEED_VAR: &str = "SCMATCH_SEED";

#[derive(Parser)]
#[command(name = "scmatch", version, about = "Conformal boundary parameter matching for planar spline domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixedSide {
    West,
    East,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Coons,
    Pde,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Sj,
    Unif,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Reparameterize the free long side of a B-Rep to match the fixed one.
    Match {
        input: PathBuf,
        /// Number of markers; defaults to max(8, control points of the longer side).
        #[arg(long)]
        markers: Option<usize>,
        /// Polygonization chord tolerance; defaults to 1e-3 times the domain diameter.
        #[arg(long)]
        chord_tol: Option<f64>,
        /// Target residual of the Schwarz–Christoffel parameter problem.
        #[arg(long)]
        sc_tol: Option<f64>,
        /// Iteration cap of the Schwarz–Christoffel solver.
        #[arg(long)]
        sc_max_iter: Option<usize>,
        /// Gauss–Jacobi points per quadrature panel.
        #[arg(long)]
        quad_points: Option<usize>,
        /// Edge-splitting ratio of the polygon refinement.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, value_enum, default_value = "west")]
        fixed_side: FixedSide,
        /// Output B-Rep file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a surface from a B-Rep.
    Surface {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "coons")]
        method: Method,
        /// Degree of the cross direction after k-refinement.
        #[arg(long)]
        target_degree: Option<usize>,
        /// Knots inserted in the cross direction.
        #[arg(long)]
        extra_knots_eta: Option<usize>,
        /// Knots inserted along the long sides.
        #[arg(long)]
        extra_knots_xi: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Output surface file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the quality CSV row of a surface.
    Quality {
        input: PathBuf,
        /// Samples per parametric direction.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Geometry column; defaults to the file stem.
        #[arg(long)]
        geometry: Option<String>,
        /// Method column; defaults to the method recorded in the file.
        #[arg(long)]
        method: Option<String>,
        /// Write the per-point field `u,v,x,y,det,sj` as CSV to this path.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Omit the header line.
        #[arg(long)]
        no_header: bool,
    },
    /// Render the isoparameter net of a surface as SVG.
    Plot {
        input: PathBuf,
        /// Isoparameter curves per direction.
        #[arg(long, default_value_t = 21)]
        iso: usize,
        #[arg(long, value_enum, default_value = "sj")]
        metric: Metric,
        /// Output SVG file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// h-refinement study of a manufactured Poisson problem on a surface.
    Poisson {
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Output CSV file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic geometry corpus.
    Corpus {
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
    },
    /// Dump the solved Schwarz–Christoffel map of a B-Rep as JSON.
    Scmap {
        input: PathBuf,
        #[arg(long)]
        chord_tol: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        quad_points: Option<usize>,
        #[arg(long)]
        sc_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn read_brep(path: &Path) -> Result<(BrepFile, scmatch::Brep)> {
    let file = BrepFile::read(path)?;
    let brep = file.to_brep()?;
    Ok((file, brep))
}

fn read_surface(path: &Path) -> Result<(SurfaceFile, NurbsSurface)> {
    let file = SurfaceFile::read(path)?;
    let surface = file.to_surface()?;
    Ok((file, surface))
}

fn sc_options(quad_points: Option<usize>, sc_tol: Option<f64>, sc_max_iter: Option<usize>) -> ScOptions {
    let mut sc = ScOptions::default();
    if let Some(q) = quad_points {
        sc.quad_points = q;
    }
    if let Some(t) = sc_tol {
        sc.solver.tol = t;
    }
    if let Some(m) = sc_max_iter {
        sc.solver.max_iter = m;
    }
    sc
}

fn timed<T>(stages: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    stages.push(StageTiming {
        stage: stage.into(),
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Match {
            input,
            markers,
            chord_tol,
            sc_tol,
            sc_max_iter,
            quad_points,
            kappa,
            fixed_side,
            out,
        } => {
            let (_, brep) = read_brep(&input)?;
            let opts = MatchOptions {
                markers,
                chord_tol,
                kappa: kappa.unwrap_or(DEFAULT_KAPPA),
                sc: sc_options(quad_points, sc_tol, sc_max_iter),
                fixed_side: match fixed_side {
                    FixedSide::West => Side::West,
                    FixedSide::East => Side::East,
                },
            };
            let mut timings = Vec::new();
            let matched = timed(&mut timings, "match", || match_boundaries(&brep, &opts))?;
            info!(
                "SC residual {:e}, modulus {:.6}, {} markers",
                matched.provenance.sc_residual,
                matched.provenance.conformal_modulus,
                matched.provenance.markers.west_params.len()
            );
            let mut file = BrepFile::from_brep(&matched.brep);
            file.provenance = Some(matched.provenance);
            file.timings = timings;
            emit(out.as_deref(), &file.to_json())
        }
        Command::Surface {
            input,
            method,
            target_degree,
            extra_knots_eta,
            extra_knots_xi,
            max_iters,
            out,
        } => {
            let (file, brep) = read_brep(&input)?;
            let mut stages = Vec::new();
            let coons = timed(&mut stages, "coons", || linear_only_pipeline(&brep))?;
            let (surface, elliptic, name) = match method {
                Method::Coons => (coons, None, "coons"),
                Method::Pde => {
                    let mut opts = EllipticOptions::default();
                    if let Some(d) = target_degree {
                        opts.target_degree_eta = d;
                    }
                    if let Some(k) = extra_knots_eta {
                        opts.extra_knots_eta = k;
                    }
                    if let Some(k) = extra_knots_xi {
                        opts.extra_knots_xi = k;
                    }
                    if let Some(m) = max_iters {
                        opts.max_picard_iters = m;
                    }
                    let guess = quality_report(&coons, 101, 101)?;
                    if guess.fold {
                        warn!("initial guess folds (min scaled Jacobian {}); continuing with a floored Jacobian", guess.min_sj);
                    }
                    let refined = timed(&mut stages, "k_refine", || k_refine(&coons, &opts))?;
                    let report = timed(&mut stages, "elliptic", || elliptic_improve(&refined, &opts))?;
                    let record = EllipticRecord {
                        options: opts,
                        iterations: report.iterations,
                        converged: report.converged,
                        initial_residual: report.initial_residual(),
                        final_residual: report.final_residual(),
                        floored_points: report.floored_points,
                    };
                    info!(
                        "elliptic residual {:e} -> {:e} in {} iterations",
                        record.initial_residual, record.final_residual, record.iterations
                    );
                    (report.surface, Some(record), "pde")
                }
            };
            let provenance = SurfaceProvenance {
                method: name.into(),
                stages,
                matching: file.provenance,
                elliptic,
            };
            emit(out.as_deref(), &SurfaceFile::from_surface(&surface, Some(provenance)).to_json())
        }
        Command::Quality {
            input,
            grid,
            geometry,
            method,
            field,
            no_header,
        } => {
            let (file, surface) = read_surface(&input)?;
            let report = quality_report(&surface, grid, grid)?;
            let geometry = geometry.unwrap_or_else(|| {
                input.file_stem().map_or_else(|| "surface".into(), |s| s.to_string_lossy().into_owned())
            });
            let method = method
                .or_else(|| file.provenance.as_ref().map(|p| p.method.clone()))
                .unwrap_or_else(|| "unknown".into());
            if let Some(path) = field {
                std::fs::write(&path, field_dump(&surface, grid)?)?;
            }
            let mut text = String::new();
            if !no_header {
                text.push_str(QUALITY_HEADER);
                text.push('\n');
            }
            text.push_str(&report.csv_row(&geometry, &method));
            text.push('\n');
            emit(None, &text)
        }
        Command::Plot { input, iso, metric, out } => {
            let (_, surface) = read_surface(&input)?;
            let metric = match metric {
                Metric::Sj => PlotMetric::ScaledJacobian,
                Metric::Unif => PlotMetric::Uniformity,
                Metric::None => PlotMetric::None,
            };
            emit(out.as_deref(), &plot_svg(&surface, iso, metric)?)
        }
        Command::Poisson { input, levels, out } => {
            if levels == 0 {
                return Err(Error::InvalidGeometry("at least one level is required".into()));
            }
            let (_, surface) = read_surface(&input)?;
            let rows = poisson_demo(&surface, levels)?;
            for (k, (l2, h1)) in convergence_rates(&rows).iter().enumerate() {
                info!("rates between levels {} and {}: L2 {l2:.3}, H1 {h1:.3}", k + 1, k + 2);
            }
            emit(out.as_deref(), &convergence_csv(&rows))
        }
        Command::Corpus { out } => {
            for path in write_corpus(&out)? {
                info!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Scmap {
            input,
            chord_tol,
            kappa,
            quad_points,
            sc_tol,
            out,
        } => {
            let (_, brep) = read_brep(&input)?;
            let chord_tol = chord_tol.unwrap_or(DEFAULT_RELATIVE_CHORD_TOL * brep.diameter());
            let poly = polygonize(&brep, chord_tol).map_err(|e| e.in_stage("polygonize"))?;
            let poly = split_long_edges(&poly, kappa.unwrap_or(DEFAULT_KAPPA));
            let map = solve_parameter_problem(&poly, &sc_options(quad_points, sc_tol, None))
                .map_err(|e| e.in_stage("sc_solve"))?;
            let mut text = serde_json::to_string_pretty(&map.summary(&poly))?;
            text.push('\n');
            emit(out.as_deref(), &text)
        }
    }
}

fn field_dump(surface: &NurbsSurface, grid: usize) -> Result<String> {
    let ((u0, u1), (v0, v1)) = surface.param_range();
    let at = |a: f64, b: f64, k: usize| if k + 1 == grid { b } else { a + (b - a) * k as f64 / (grid - 1) as f64 };
    let mut text = String::from("u,v,x,y,det,sj\n");
    for j in 0..grid {
        for i in 0..grid {
            let (u, v) = (at(u0, u1, i), at(v0, v1, j));
            let x = surface.eval(u, v)?;
            let s = jacobian_sample(surface, u, v)?;
            text.push_str(&format!("{u:?},{v:?},{:?},{:?},{:?},{:?}\n", x.x, x.y, s.det, s.scaled));
        }
    }
    Ok(text)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(seed) = std::env::var(SEED_VAR) {
        info!("{SEED_VAR}={seed} accepted; the pipeline is deterministic");
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
