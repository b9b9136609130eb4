use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use histpoint::error::{Error, Result};
use histpoint::lagfeatures::{Covariate, LagSpec};
use histpoint::pca::PcaScaling;
use histpoint::pipeline::{self, ExperimentConfig, InputFile};
use histpoint::synth::{GeneratorKind, GeneratorSpec};
use histpoint::timeseries::Channel;

#[derive(Parser)]
#[command(name = "histpoint", version, about = "Cross-asset influence, lag profiles and PCA sweeps for daily price series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation matrix of the aligned instruments.
    Correlate(Shared),
    /// Correlation matrix plus LASSO weights of every instrument on the target.
    Influence(Shared),
    /// Lagged design matrix of the target instrument.
    Lags(Shared),
    /// LASSO weight per lag of the target's own history.
    Profile(Shared),
    /// PCA + least-squares test error for a range of component counts.
    Sweep(Shared),
    /// Seeded synthetic data.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct Shared {
    /// OHLCV CSV files; replace the config's inputs.
    files: Vec<PathBuf>,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "HISTPOINT_OUT")]
    out: Option<PathBuf>,
    /// Comma-separated labels for the files (default: file stems).
    #[arg(long, value_delimiter = ',')]
    labels: Vec<String>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long)]
    end: Option<NaiveDate>,
    /// Panel channel.
    #[arg(long)]
    channel: Option<Channel>,
    /// Correlate log returns instead of levels.
    #[arg(long)]
    returns: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    standardize: bool,
    /// Lag depth H.
    #[arg(long)]
    history: Option<usize>,
    /// Comma-separated lag channels.
    #[arg(long, value_delimiter = ',')]
    channels: Vec<Channel>,
    /// Comma-separated same-day columns, or "none".
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    #[arg(long)]
    kmin: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    train_frac: Option<f64>,
    #[arg(long, value_enum)]
    pca_scaling: Option<ScalingArg>,
    /// Print a summary to stderr.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Covariance,
    Correlation,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ar,
    White,
    Latent,
    Correlated,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "ar")]
    kind: KindArg,
    /// AR coefficients, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.9", allow_hyphen_values = true)]
    phi: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 100.0)]
    level: f64,
    /// Latent factors.
    #[arg(long, default_value_t = 3)]
    factors: usize,
    /// Observed columns for the latent-factor panel.
    #[arg(long, default_value_t = 20)]
    columns: usize,
    /// Off-diagonal correlation for the correlated panel.
    #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long, env = "HISTPOINT_OUT")]
    out: Option<PathBuf>,
}

fn build_config(args: &Shared) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    if let (Some(_), Some(name)) = (&args.config, &args.preset) {
        let p = ExperimentConfig::preset(name)?;
        cfg.lag = p.lag;
        cfg.sweep = p.sweep;
        cfg.preset = p.preset;
    }
    if !args.files.is_empty() {
        if !args.labels.is_empty() && args.labels.len() != args.files.len() {
            return Err(Error::Config(format!(
                "{} labels given for {} files",
                args.labels.len(),
                args.files.len()
            )));
        }
        cfg.inputs = args
            .files
            .iter()
            .enumerate()
            .map(|(i, path)| match args.labels.get(i) {
                Some(label) => InputFile {
                    path: path.clone(),
                    label: label.clone(),
                },
                None => InputFile::from_path(path),
            })
            .collect();
    } else if !args.labels.is_empty() {
        return Err(Error::Config("--labels needs input files".into()));
    }
    if let Some(t) = &args.target {
        cfg.target = Some(t.clone());
    }
    if args.start.is_some() {
        cfg.start = args.start;
    }
    if args.end.is_some() {
        cfg.end = args.end;
    }
    if let Some(c) = args.channel {
        cfg.channel = c;
    }
    cfg.returns |= args.returns;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.lambda.is_some() {
        cfg.lasso.lambda = args.lambda;
    }
    cfg.lasso.standardize_features |= args.standardize;
    if let Some(h) = args.history {
        cfg.lag.history_points = h;
    }
    if !args.channels.is_empty() {
        cfg.lag.channels = args.channels.clone();
    }
    if !args.covariates.is_empty() {
        cfg.lag.covariates = if args.covariates.len() == 1 && args.covariates[0].eq_ignore_ascii_case("none") {
            Vec::new()
        } else {
            args.covariates.iter().map(|c| c.parse::<Covariate>()).collect::<Result<_>>()?
        };
    }
    if let Some(k) = args.kmin {
        cfg.sweep.k_min = k;
    }
    if let Some(k) = args.kmax {
        cfg.sweep.k_max = k;
    }
    if let Some(s) = args.step {
        cfg.sweep.step = s;
    }
    if let Some(f) = args.train_frac {
        cfg.train_fraction = f;
    }
    if let Some(s) = args.pca_scaling {
        cfg.pca_scaling = match s {
            ScalingArg::Covariance => PcaScaling::Covariance,
            ScalingArg::Correlation => PcaScaling::Correlation,
        };
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Profile runs default to close-only lags when neither a preset nor a config chose a layout.
fn profile_defaults(args: &Shared, cfg: &mut ExperimentConfig) {
    if args.config.is_none() && args.preset.is_none() {
        let h = args.history.unwrap_or(LagSpec::feedback(100).history_points);
        let mut spec = LagSpec::feedback(h);
        if !args.channels.is_empty() {
            spec.channels = args.channels.clone();
        }
        if !args.covariates.is_empty() {
            spec.covariates = cfg.lag.covariates.clone();
        }
        cfg.lag = spec;
    }
}

fn generator_spec(args: &GenerateArgs) -> Result<GeneratorSpec> {
    let kind = match args.kind {
        KindArg::Ar => GeneratorKind::ArProcess {
            phi: args.phi.clone(),
            noise_scale: args.noise,
            level: args.level,
        },
        KindArg::White => GeneratorKind::WhiteNoise {
            scale: args.noise,
            level: args.level,
        },
        KindArg::Latent => GeneratorKind::LatentFactor {
            factors: args.factors,
            columns: args.columns,
            noise_scale: 0.1 * args.noise,
            target_noise: 0.1 * args.noise,
        },
        KindArg::Correlated => {
            if !(args.rho > -1.0 && args.rho < 1.0) {
                return Err(Error::Config(format!("--rho must lie in (-1, 1), got {}", args.rho)));
            }
            GeneratorKind::CorrelatedPanel {
                correlation: vec![vec![1.0, args.rho], vec![args.rho, 1.0]],
                labels: vec!["a".into(), "b".into()],
                level: args.level,
                scale: args.noise,
            }
        }
    };
    let mut spec = GeneratorSpec::new(kind, args.n, args.seed);
    if let Some(start) = args.start {
        spec.start = start;
    }
    Ok(spec)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Correlate(args) => {
            let cfg = build_config(&args)?;
            let corr = pipeline::run_correlate(&cfg)?;
            if args.verbose {
                eprint!("{}", corr.to_csv());
            }
            println!("wrote correlations for {} series to {}", corr.labels.len(), cfg.output_dir.display());
        }
        Command::Influence(args) => {
            let cfg = build_config(&args)?;
            let report = pipeline::run_influence(&cfg)?;
            if args.verbose {
                eprint!("{}", report.fit.weights_csv());
            }
            println!(
                "influence on {} over {} rows, lambda {}: {}",
                report.target,
                report.rows,
                report.fit.lambda,
                cfg.output_dir.display()
            );
        }
        Command::Lags(args) => {
            let cfg = build_config(&args)?;
            let lm = pipeline::run_lags(&cfg)?;
            println!("{} rows x {} columns: {}", lm.rows(), lm.x.cols(), cfg.output_dir.display());
        }
        Command::Profile(args) => {
            let mut cfg = build_config(&args)?;
            profile_defaults(&args, &mut cfg);
            let report = pipeline::run_feedback_profile(&cfg)?;
            if args.verbose {
                eprint!("{}", report.profile.to_csv());
            }
            println!(
                "profile over {} rows: {} positive, {} negative, {} zero lag weights: {}",
                report.rows,
                report.signs.positive,
                report.signs.negative,
                report.signs.zero,
                cfg.output_dir.display()
            );
        }
        Command::Sweep(args) => {
            let cfg = build_config(&args)?;
            let result = pipeline::run_pca_sweep(&cfg)?;
            if args.verbose {
                eprint!("{}", result.to_csv());
            }
            println!(
                "swept {} values of k, chosen k = {}: {}",
                result.records.len(),
                result.chosen_k,
                cfg.output_dir.display()
            );
        }
        Command::Generate(args) => {
            let spec = generator_spec(&args)?;
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            pipeline::run_generate(&spec, &dir)?;
            println!("generated {} rows: {}", spec.length, dir.join("generated.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error: {line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
