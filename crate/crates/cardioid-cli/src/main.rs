use std::path::PathBuf;
use std::process::ExitCode;

use cardioid::analysis::{QuadParams, Quantity};
use cardioid_cli::config::{ConstructionKind, DeltaKind, ModelKind, RenderMode, CARDIOID_J0};
use cardioid_cli::{boundary, eval, exponents, render, verify, write_file};
use cardioid_cli::{CliError, CliResult, ImageSpec, ScenarioConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cardioid", version, about = "Finite-distortion extensions onto cardioid-type cusp domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the boundary of M_s as `branch,u,x,y` CSV.
    Boundary {
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// Map the samples by z^2 (boundary of Delta_s).
        #[arg(long)]
        square: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the extension at the points of a `x,y` CSV; JSON on stdout.
    Eval {
        #[command(flatten)]
        scenario: ScenarioArgs,
        points: PathBuf,
    },
    /// Dyadic series over exponent grids and critical-exponent scans.
    Exponents {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Only the series, no scans.
        #[arg(long)]
        no_scan: bool,
    },
    /// Render a PPM image (distortion heatmap or grid warp).
    Render {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = RenderMode::Heatmap)]
        mode: RenderMode,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-1.0, 1.0])]
        x_range: Vec<f64>,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-1.0, 1.0])]
        y_range: Vec<f64>,
        #[arg(long, default_value_t = 512)]
        width: u32,
        #[arg(long, default_value_t = 512)]
        height: u32,
        #[arg(long, default_value_t = 21)]
        grid_lines: u32,
        /// Output file (default `<out>/render.ppm`).
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Run the structural checks and slope checks; exit 0 iff all pass.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Build the cells from the exponent s + 1 (mutation test; expected to fail).
        #[arg(long)]
        tamper_eta: bool,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Ms)]
    model: ModelKind,
    #[arg(long, default_value_t = 1.5)]
    s: f64,
    /// First cell index (default 6; the cardioid uses 3).
    #[arg(long)]
    j0: Option<u32>,
    #[arg(long, value_enum, default_value_t = ConstructionKind::Simple)]
    construction: ConstructionKind,
    #[arg(long, value_enum, default_value_t = DeltaKind::Exp)]
    delta: DeltaKind,
    /// Exponent of the power-log squeeze.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 6)]
    jmin: u32,
    /// Last cell index (default 14 simple, 12 squeezed).
    #[arg(long)]
    jmax: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    quantity: Vec<Quantity>,
    /// Exponent grid for Kf and Kfinv.
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    /// Exponent grid for Df and Dfinv.
    #[arg(long = "p-exp", value_delimiter = ',')]
    p_exp: Vec<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Gauss-Legendre points per direction.
    #[arg(long, default_value_t = QuadParams::default().order)]
    quad_order: usize,
    /// Base tiles per direction.
    #[arg(long, default_value_t = QuadParams::default().base)]
    quad_base: usize,
    #[arg(long, default_value_t = QuadParams::default().rel_tol)]
    quad_tol: f64,
}

impl ScenarioArgs {
    fn config(&self) -> CliResult<ScenarioConfig> {
        let defaults = ScenarioConfig::default();
        let j0 = self.j0.unwrap_or(match self.model {
            ModelKind::Ms => defaults.j0,
            ModelKind::Cardioid => CARDIOID_J0,
        });
        let jmax = self.jmax.unwrap_or(match self.construction {
            ConstructionKind::Simple => 14,
            ConstructionKind::Squeezed => 12,
        });
        let cfg = ScenarioConfig {
            model: self.model,
            s: self.s,
            j0,
            construction: self.construction,
            delta: self.delta,
            delta_p: self.p,
            j_min: self.jmin,
            j_max: jmax,
            quantities: if self.quantity.is_empty() { defaults.quantities } else { self.quantity.clone() },
            q_grid: self.q.clone(),
            p_grid: self.p_exp.clone(),
            out: self.out.clone(),
            quad: QuadParams {
                order: self.quad_order,
                base: self.quad_base,
                rel_tol: self.quad_tol,
                ..QuadParams::default()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.cmd {
        Cmd::Boundary { s, n, square, out } => {
            let rows = boundary::boundary_rows(s, n, square)?;
            let mut buf = Vec::new();
            boundary::write_boundary(&rows, &mut buf)?;
            write_file(&out, &buf)?;
            Ok(true)
        }
        Cmd::Eval { scenario, points } => {
            let cfg = scenario.config()?;
            let ext = cfg.build()?;
            let file = std::fs::File::open(&points).map_err(CliError::io(&points))?;
            let pts = eval::read_points(file, &points)?;
            let recs = eval::evaluate(&ext, &pts)?;
            let json = serde_json::to_string_pretty(&recs)?;
            println!("{json}");
            Ok(true)
        }
        Cmd::Exponents { scenario, no_scan } => {
            let cfg = scenario.config()?;
            let sum = exponents::run_exponents(&cfg, !no_scan)?;
            for e in &sum.series {
                println!(
                    "{} {:>6}: slope {:+.4} ± {:.4} {:?}",
                    e.quantity, e.exponent, e.slope, e.slope_stderr, e.verdict
                );
            }
            for c in &sum.criticals {
                match &c.result {
                    Some(r) => println!(
                        "{} critical {:.4} ± {:.4} (predicted {:.4})",
                        c.quantity, r.value, r.uncertainty, c.predicted
                    ),
                    None => println!("{} critical: {}", c.quantity, c.note.as_deref().unwrap_or("")),
                }
            }
            Ok(true)
        }
        Cmd::Render { scenario, mode, x_range, y_range, width, height, grid_lines, file } => {
            let cfg = scenario.config()?;
            let spec = ImageSpec {
                x_range: (x_range[0], x_range[1]),
                y_range: (y_range[0], y_range[1]),
                width,
                height,
                mode,
                grid_lines,
            };
            spec.validate()?;
            let ext = cfg.build()?;
            let img = render::render(&ext, &spec)?;
            let path = file.unwrap_or_else(|| cfg.out.join("render.ppm"));
            let mut buf = Vec::new();
            img.write_ppm(&mut buf).map_err(CliError::io(&path))?;
            write_file(&path, &buf)?;
            Ok(true)
        }
        Cmd::Verify { scenario, tamper_eta } => {
            let cfg = scenario.config()?;
            let sum = verify::run_verify(&cfg, tamper_eta)?;
            let json = serde_json::to_string_pretty(&sum)?;
            write_file(&cfg.out.join("verify.json"), json.as_bytes())?;
            println!("{json}");
            for f in &sum.failures {
                eprintln!("FAIL {f}");
            }
            Ok(sum.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
