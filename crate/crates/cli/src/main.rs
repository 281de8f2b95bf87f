use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dce_core::estimator::{bootstrap_indicators, load_quadrature_records, Calibration, EstimateReport, DEFAULT_RESAMPLES};
use dce_core::indicators::evaluate;
use dce_core::model::{CircuitConfig, ConfigFile};
use dce_core::moments::covariance_matrix;
use dce_core::scattering::{solve_scattering, LadderIndexSet, LadderSystem};
use dce_core::{IndicatorReport, Method, ModePair};
use dce_cli::sweep::{base_metadata, sweep_row, SWEEP_COLUMNS};
use dce_cli::{emit, render, reproduce_figure, CliError, FigureId, FigureOptions, Format, Result, SweepSpec, SweepVariable, Table};

/// Dynamical Casimir radiation: nonclassicality and entanglement indicators.
#[derive(Parser)]
#[command(name = "dce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "temperature-k")]
    temperature_k: Option<f64>,
    /// δω/ω_d of the analysed mode pair.
    #[arg(long = "detuning-frac", default_value_t = 0.15)]
    detuning_frac: f64,
    #[arg(long, default_value = "numeric")]
    method: Method,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Output file (directory for `figure`); stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn circuit(&self) -> Result<CircuitConfig> {
        let mut file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        if self.epsilon.is_some() {
            file.epsilon = self.epsilon;
        }
        if self.temperature_k.is_some() {
            file.temperature_k = self.temperature_k;
        }
        Ok(file.into_config()?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter on a linear grid.
    Sweep {
        #[arg(long, default_value = "epsilon")]
        variable: SweepVariable,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Write the datasets of one figure (fig1a, fig1b, fig2, fig3).
    Figure {
        id: String,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long = "noise-n-det")]
        noise_n_det: Option<f64>,
        /// Sample count behind the fig3 one-σ flags.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Indicators at a single parameter point.
    Indicators {
        /// Add uncorrelated detector noise to every quadrature variance.
        #[arg(long = "noise-n-det", default_value_t = 0.0)]
        noise_n_det: f64,
        /// Write the ladder system of the ω₋ row in MatrixMarket format.
        #[arg(long = "dump-ladder")]
        dump_ladder: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Analyse a quadrature record file (CSV: i_minus,q_minus,i_plus,q_plus).
    Estimate {
        records: PathBuf,
        /// JSON sidecar with per-channel `gain` and `offset`.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_out(table: &Table, format: Format, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => emit(table, format, p),
        None => {
            let text = render(table, format)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

fn print_report(r: &IndicatorReport) {
    println!("{:<24}{:>20.12e}", "fdf_min", r.fdf_min);
    println!("{:<24}{:>20.12e}", "theta_opt", r.theta_opt);
    println!("{:<24}{:>20.12e}", "sigma2", r.sigma2);
    println!("{:<24}{:>20.12e}", "phi", r.phi);
    println!("{:<24}{:>20.12e}", "sigma2_threshold", r.sigma2_threshold);
    println!("{:<24}{:>20.12e}", "logneg", r.logneg);
    println!("{:<24}{:>20}", "nonclassical_by_fdf", r.nonclassical_by_fdf);
    println!("{:<24}{:>20}", "nonclassical_by_sigma2", r.nonclassical_by_sigma2);
    println!("{:<24}{:>20}", "entangled", r.entangled);
}

fn print_estimate(e: &EstimateReport) {
    println!("{:<20}{:>20}{:>20}{:>20}", "indicator", "point", "std_error", "bootstrap_mean");
    for (name, x) in [
        ("fdf_min", &e.fdf_min),
        ("sigma2", &e.sigma2),
        ("sigma2_threshold", &e.sigma2_threshold),
        ("logneg", &e.logneg),
    ] {
        println!("{name:<20}{:>20.12e}{:>20.12e}{:>20.12e}", x.point, x.std_error, x.mean);
    }
    println!("samples {}, resamples {}, seed {}", e.sample_count, e.resamples, e.seed);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            variable,
            start,
            stop,
            points,
            common,
        } => {
            let spec = SweepSpec {
                variable,
                start,
                stop,
                points,
                config: common.circuit()?,
                detuning_frac: common.detuning_frac,
                method: common.method,
                format: common.format,
            };
            let mut table = dce_cli::run_sweep(&spec)?;
            table.meta("seed", common.seed);
            write_out(&table, spec.format, common.output.as_deref())
        }
        Command::Figure {
            id,
            points,
            noise_n_det,
            samples,
            common,
        } => {
            let id: FigureId = id.parse()?;
            let mut config = common.circuit()?;
            // ε is a swept axis for every figure; --epsilon only fixes fig3.
            config.epsilon = 0.0;
            let opts = FigureOptions {
                config,
                detuning_frac: common.detuning_frac,
                method: common.method,
                points,
                epsilon: common.epsilon,
                noise_n_det,
                samples,
                seed: common.seed,
            };
            let dir = common.output.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
            for set in reproduce_figure(id, &opts)? {
                let path = dir.join(format!("{}.{}", set.name, common.format.extension()));
                emit(&set.table, common.format, &path)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Indicators {
            noise_n_det,
            dump_ladder,
            common,
        } => {
            let cfg = common.circuit()?;
            let pair = ModePair::from_fraction(cfg.drive_angular_frequency, common.detuning_frac)?;
            let (m, mut report) = evaluate(&cfg, &pair, common.method)?;
            if noise_n_det != 0.0 {
                let v = dce_core::estimator::inject_detector_noise(&covariance_matrix(&m), noise_n_det)?;
                report = IndicatorReport::from_covariance(&v, &pair)?;
            }
            if let Some(path) = dump_ladder {
                let row = solve_scattering(&cfg, pair.minus())?;
                let ladder = LadderIndexSet::new(pair.minus(), cfg.drive_angular_frequency, row.truncation.max(1))?;
                let file = std::fs::File::create(&path).map_err(|e| io_error(&path, e))?;
                LadderSystem::assemble(&cfg, ladder)
                    .write_matrix_market(std::io::BufWriter::new(file))
                    .map_err(|e| io_error(&path, e))?;
            }
            print_report(&report);
            if let Some(out) = common.output.as_deref() {
                let mut table = Table::new(&SWEEP_COLUMNS);
                base_metadata(&mut table, &cfg, common.method);
                table.meta("noise_n_det", noise_n_det);
                table.meta("seed", common.seed);
                table.push(sweep_row(0, &cfg, &pair, &m, &report));
                emit(&table, common.format, out)?;
            }
            Ok(())
        }
        Command::Estimate {
            records,
            calibration,
            resamples,
            common,
        } => {
            let cal = calibration.as_deref().map(Calibration::load).transpose()?;
            let data = load_quadrature_records(&records, cal)?;
            let cfg = common.circuit()?;
            let pair = ModePair::from_fraction(cfg.drive_angular_frequency, common.detuning_frac)?;
            let report = bootstrap_indicators(&data, &pair, resamples, common.seed)?;
            print_estimate(&report);
            if let Some(out) = common.output.as_deref() {
                let mut text = serde_json::to_string_pretty(&report)?;
                text.push('\n');
                std::fs::write(out, text).map_err(|e| io_error(out, e))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
