mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

const PARAMETERS: &str = "\
Design parameters ([design] table of the config file):
  sides                        n, polygon sides                      [-]
  segments                     m, stacked segments                   [-]
  lambda                       angle ratio, 0.5 < lambda <= 1        [-]
  diameter_mm                  D, cave diameter bound                [mm]
  folded_height_mm             H0, folded height bound               [mm]
  unfolded_height_mm           H1, deployed height bound             [mm]
  rho_air_kg_m3                air density                           [kg/m3]
  rho_helium_kg_m3             lifting gas density                   [kg/m3]
  tube_density_g_per_m         carbon tube linear density            [g/m]
  raw_tube_length_mm           raw tube stock length                 [mm]
  mechatronics_g               board and wiring mass                 [g]
  motor_g                      mass per motor                        [g]
  propeller_g                  mass per propeller                    [g]
  motor_count                  motors                                [-]
  battery_g                    mass per battery                      [g]
  battery_count                batteries                             [-]
  simple_junction_g            plain TPU junction mass               [g]
  lattice_junction_g           TPU junction with lattice patch       [g]
  lattice_patch_count          junctions carrying a lattice patch    [-]
  envelope_density_g_per_m2    envelope film areal density           [g/m2]
  glue_density_g_per_m2        adhesive areal density                [g/m2]
  weld_overlap_mm              seam overlap width                    [mm]
  seal_line_count              sealing lines                         [-]
  sheath_width_mm              tube sheath strip width               [mm]
  sheath_ratio_pct             sheathed share of each tube edge      [%]
  valve_g                      mass per valve                        [g]
  valve_count                  valves                                [-]
  exoskeleton_count            extra exoskeletons                    [-]
  body_count                   chained bodies (1 supported)          [-]
  body_spacing_mm              spacing between chained bodies        [mm]
  kevlar_density_g_per_m       kevlar wire linear density            [g/m]
  kevlar_length_m              kevlar wire length                    [m]
  mass_calibration_g           signed correction on the total mass   [g]

Exit codes: 0 success, 1 usage or config error, 2 infeasible with
--require-feasible, 3 numeric failure.";

#[derive(Debug, Parser)]
#[command(name = "kresling-airship", version, about = "Design, export and fly Kresling-origami airships", after_help = PARAMETERS)]
struct Cli {
    /// TOML project file; built-in defaults when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `output_dir` from the config.
    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy, Default)]
struct DesignOverride {
    /// Polygon sides n.
    #[arg(long)]
    n: Option<u32>,
    /// Segments m.
    #[arg(long)]
    m: Option<u32>,
    /// Angle ratio lambda.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Bookkeeping {
    Combined,
    SplitWithIdle,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one configuration: geometry, volumes, mass and payload.
    Eval {
        #[command(flatten)]
        design: DesignOverride,
        /// Exit with code 2 when the design is infeasible.
        #[arg(long)]
        require_feasible: bool,
    },
    /// Evaluate every (n, m, lambda) on the sweep grid.
    Sweep {
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Restrict the grid to one point.
        #[arg(long, num_args = 3, value_names = ["N", "M", "LAMBDA"])]
        point: Option<Vec<f64>>,
        /// Exit with code 2 when nothing is feasible.
        #[arg(long)]
        require_feasible: bool,
    },
    /// Export the crease pattern (SVG) and fold-state meshes (OBJ).
    Pattern {
        #[command(flatten)]
        design: DesignOverride,
        /// Export a single mesh at this fold angle instead of both stops.
        #[arg(long)]
        alpha_deg: Option<f64>,
    },
    /// Bill of materials and tube cut plan.
    Bom {
        #[command(flatten)]
        design: DesignOverride,
    },
    /// Mission energy versus cruise speed.
    Energy {
        /// Forward thrust bookkeeping; config value when omitted.
        #[arg(long, value_enum)]
        bookkeeping: Option<Bookkeeping>,
    },
    /// Run the flight scenario.
    Simulate {
        /// SMA window in seconds; config value when omitted.
        #[arg(long)]
        sma_window: Option<f64>,
        /// Write every k-th physics step to the trajectory CSV.
        #[arg(long, default_value_t = 5)]
        stride: usize,
    },
    /// Write the default config file.
    InitConfig {
        /// Destination path.
        #[arg(default_value = "kresling.toml")]
        path: PathBuf,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => config::ProjectConfig::load(path)?,
        None => config::ProjectConfig::default(),
    };
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    let apply = |cfg: &mut config::ProjectConfig, d: DesignOverride| {
        if let Some(n) = d.n {
            cfg.design.sides = n;
        }
        if let Some(m) = d.m {
            cfg.design.segments = m;
        }
        if let Some(l) = d.lambda {
            cfg.design.lambda = l;
        }
    };
    match cli.command {
        Command::Eval {
            design,
            require_feasible,
        } => {
            apply(&mut cfg, design);
            commands::eval(&cfg, require_feasible)
        }
        Command::Sweep {
            workers,
            point,
            require_feasible,
        } => {
            if let Some(p) = point {
                let whole = |x: f64| x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64;
                if !(whole(p[0]) && whole(p[1])) {
                    return Err(CliError::Usage("--point N M LAMBDA needs integer N and M".into()));
                }
                cfg.sweep = kresling_airship::sweep::SweepGrid::single(p[0] as u32, p[1] as u32, p[2]);
            }
            commands::sweep(&cfg, workers, require_feasible)
        }
        Command::Pattern { design, alpha_deg } => {
            apply(&mut cfg, design);
            commands::pattern(&cfg, alpha_deg)
        }
        Command::Bom { design } => {
            apply(&mut cfg, design);
            commands::bom(&cfg)
        }
        Command::Energy { bookkeeping } => {
            if let Some(b) = bookkeeping {
                cfg.power.forward = match b {
                    Bookkeeping::Combined => kresling_airship::energy::ForwardBookkeeping::Combined,
                    Bookkeeping::SplitWithIdle => kresling_airship::energy::ForwardBookkeeping::SplitWithIdle,
                };
            }
            commands::energy(&cfg)
        }
        Command::Simulate { sma_window, stride } => {
            if let Some(w) = sma_window {
                cfg.controller.sma_window_s = w;
            }
            commands::simulate(&cfg, stride)
        }
        Command::InitConfig { path, force } => commands::init_config(&path, force),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
