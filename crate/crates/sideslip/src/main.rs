use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sideslip::dataio::read_json;
use sideslip::pipeline::{
    evaluate_to_dir, infer_to_file, simulate_suite, train_to_file, EvalConfig, EvalSplit, InferConfig, SimulateConfig,
    SuiteKind, TrainRunConfig,
};
use sideslip::report::text_tables;
use sideslip::{Error, Result};
use sideslip_core::ekf::EkfConfig;
use sideslip_core::eval::ObserverKind;
use sideslip_core::mlp::{ConcatPoint, TrainConfig};
use sideslip_core::simulator::SensorNoiseSpec;
use sideslip_core::vehicle::VehicleParams;

/// Side-slip angle workbench: simulate, train, evaluate and infer.
#[derive(Parser)]
#[command(name = "sideslip", version)]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Benchmark,
    Normal,
    Harsh,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum Concat {
    Stage2,
    Stage1Input,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Test,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a maneuver suite as trajectory logs.
    Simulate {
        #[arg(long, value_enum, default_value = "benchmark")]
        suite: Suite,
        /// JSON list of runs for `--suite custom`.
        #[arg(long)]
        suite_file: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        split_ratio: f64,
        /// Vehicle parameters as JSON.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Sensor noise sigmas and biases as JSON.
        #[arg(long)]
        noise: Option<PathBuf>,
    },
    /// Train the hybrid observer on a dataset's training split.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long, value_enum, default_value = "stage2")]
        concat: Concat,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Compare observers against ground truth and write report files.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "kinematic,ekf,hybrid", value_parser = parse_observer)]
        observers: Vec<ObserverKind>,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        #[arg(long)]
        params: Option<PathBuf>,
        /// EKF noise settings as JSON.
        #[arg(long)]
        ekf_config: Option<PathBuf>,
    },
    /// Hybrid side-slip estimates for one trajectory log.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

fn parse_observer(s: &str) -> std::result::Result<ObserverKind, String> {
    ObserverKind::parse(s).ok_or_else(|| format!("unknown observer `{s}` (expected kinematic, ekf or hybrid)"))
}

fn optional_json<T: serde::de::DeserializeOwned>(path: Option<&Path>) -> Result<Option<T>> {
    path.map(read_json).transpose()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { suite, suite_file, out, split_ratio, params, noise } => {
            let suite = match suite {
                Suite::Benchmark => SuiteKind::Benchmark,
                Suite::Normal => SuiteKind::Normal,
                Suite::Harsh => SuiteKind::Harsh,
                Suite::Custom => SuiteKind::Custom,
            };
            if suite == SuiteKind::Custom && suite_file.is_none() {
                return Err(Error::Usage("--suite custom needs --suite-file".into()));
            }
            let noise: Option<SensorNoiseSpec> = optional_json(noise.as_deref())?;
            if let Some(n) = &noise {
                n.validate()?;
            }
            let config = SimulateConfig {
                suite,
                custom: suite_file,
                seed: cli.seed,
                split_ratio,
                params: optional_json(params.as_deref())?.unwrap_or_default(),
                noise,
            };
            let manifest = simulate_suite(&config, &out)?;
            let train = manifest.trajectories.iter().filter(|e| e.split == sideslip::pipeline::Split::Train).count();
            println!(
                "wrote {} trajectories to {} ({} train, {} test)",
                manifest.trajectories.len(),
                out.display(),
                train,
                manifest.trajectories.len() - train
            );
        }
        Command::Train { data, out, epochs, batch_size, learning_rate, l2, concat, params } => {
            let mut train = TrainConfig { seed: cli.seed, ..TrainConfig::default() };
            if let Some(v) = epochs {
                train.epochs = v;
            }
            if let Some(v) = batch_size {
                train.batch_size = v;
            }
            if let Some(v) = learning_rate {
                train.learning_rate = v;
            }
            if let Some(v) = l2 {
                train.l2_rate = v;
            }
            train.validate()?;
            let config = TrainRunConfig {
                data,
                concat_point: match concat {
                    Concat::Stage2 => ConcatPoint::Stage2,
                    Concat::Stage1Input => ConcatPoint::Stage1Input,
                },
                train,
                params: optional_json(params.as_deref())?,
            };
            let result = train_to_file(&config, &out)?;
            if let (Some(first), Some(last)) = (result.history.first(), result.history.last()) {
                println!("trained {} epochs, loss {first:.6e} -> {last:.6e}", result.history.len());
            }
            println!("model written to {}", out.display());
        }
        Command::Eval { data, report, model, observers, split, params, ekf_config } => {
            let config = EvalConfig {
                model,
                data,
                observers,
                split: match split {
                    SplitArg::Test => EvalSplit::Test,
                    SplitArg::All => EvalSplit::All,
                },
                params: optional_json(params.as_deref())?,
                ekf: optional_json::<EkfConfig>(ekf_config.as_deref())?.unwrap_or_default(),
            };
            let result = evaluate_to_dir(&config, &report)?;
            print!("{}", text_tables(&result));
        }
        Command::Infer { model, input, out, params } => {
            let config = InferConfig { model, input, params: optional_json::<VehicleParams>(params.as_deref())? };
            let beta = infer_to_file(&config, &out)?;
            println!("wrote {} estimates to {}", beta.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
