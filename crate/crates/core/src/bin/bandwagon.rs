use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bandwagon::experiments::{
    self, overlay_theory, read_bin_dataset, run_figure3, run_figure4_traces, summarize,
    write_bin_dataset, write_lambda_table, write_overlay, write_summaries, write_thresholds,
    write_traces, Figure3Config, Figure4Config, RunConfig,
};
use bandwagon::lambda_fit::{fit_lambda_mle_with, fit_lambda_two_stage, FitMode, FitOptions};
use bandwagon::simulator::geometric_checkpoints;
use bandwagon::theory::efficiency_curve;
use bandwagon::{
    simulate_bin_dataset, simulate_ensemble, ClipConfig, EnsembleConfig, EstimationSetup,
    EstimatorKind, LambdaSchedule, Result, TruePreference,
};

#[derive(Parser)]
#[command(name = "bandwagon", version, about = "Herding-aware rating simulation and estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate rating runs (traces) or a multi-bin dataset (--bins).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Write a bin dataset with this many bins per item instead of traces.
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long, default_value_t = 1)]
        items: usize,
    },
    /// Sample-mean convergence and threshold crossings (all three presets by default).
    Figure3 {
        #[command(flatten)]
        common: Common,
    },
    /// Estimator comparison on common random numbers.
    Figure4 {
        #[command(flatten)]
        common: Common,
        /// Also write per-run traces.
        #[arg(long)]
        traces: bool,
    },
    /// Closed-form curves, consistency, Azuma sample sizes.
    Theory {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Simulate and compare the sample-mean error with the closed form.
        #[arg(long)]
        overlay: bool,
    },
    /// Fit the λ curve to a bin dataset CSV.
    EstimateLambda {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Joint)]
        mode: Mode,
        /// Fit each λ_i freely first, then the curve by least squares.
        #[arg(long)]
        two_stage: bool,
    },
    /// Exact moments by enumeration (--samples at most 16).
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Joint,
    Plugin,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    lambda_hat: Option<String>,
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    extended: bool,
    /// JSON file with any of the flags above; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Effective settings after merging the config file and flags.
struct Settings(RunConfig);

impl Settings {
    fn load(c: &Common) -> Result<Self> {
        let flags = RunConfig {
            p: c.p,
            schedule: c.schedule.clone(),
            runs: c.runs,
            samples: c.samples,
            seed: c.seed,
            estimators: c.estimators.clone(),
            lambda_hat: c.lambda_hat.clone(),
            clip: c.clip,
            out: c.out.clone(),
            extended: c.extended.then_some(true),
        };
        let base = match &c.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        Ok(Self(base.overridden_by(flags)))
    }

    fn p(&self) -> Result<TruePreference> {
        TruePreference::new(self.0.p.unwrap_or(0.4))
    }

    fn schedule(&self, default: &str) -> Result<LambdaSchedule> {
        self.0.schedule.as_deref().unwrap_or(default).parse()
    }

    fn runs(&self) -> usize {
        self.0.runs.unwrap_or(experiments::DEFAULT_RUNS)
    }

    fn seed(&self) -> u64 {
        self.0.seed.unwrap_or(experiments::DEFAULT_SEED)
    }

    fn extended(&self) -> bool {
        self.0.extended.unwrap_or(false)
    }

    fn samples(&self, default: usize) -> usize {
        self.0.samples.unwrap_or(default)
    }

    fn estimators(&self, default: &[EstimatorKind]) -> Result<Vec<EstimatorKind>> {
        match &self.0.estimators {
            Some(list) => EstimatorKind::parse_list(list),
            None => Ok(default.to_vec()),
        }
    }

    fn lambda_hat(&self) -> Result<Option<LambdaSchedule>> {
        self.0.lambda_hat.as_deref().map(str::parse).transpose()
    }

    fn clip(&self) -> Result<Option<ClipConfig>> {
        self.0.clip.map(ClipConfig::new).transpose()
    }

    fn out(&self) -> Result<PathBuf> {
        let dir = self.0.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn simulate(s: &Settings, bins: Option<usize>, items: usize) -> Result<()> {
    let out = s.out()?;
    let p = s.p()?;
    let schedule = s.schedule("weak")?;
    if let Some(bins) = bins {
        let data = simulate_bin_dataset(items, bins, s.samples(100), &vec![p; items], &schedule, s.seed())?;
        return write_bin_dataset(create(&out, "bins.csv")?, &data);
    }
    let config = EnsembleConfig::new(p, schedule, s.runs(), s.samples(1_000), s.seed());
    let mut setup = EstimationSetup::new(s.estimators(&[EstimatorKind::SampleMean])?);
    if let Some(l) = s.lambda_hat()? {
        setup = setup.with_lambda_hat(l);
    }
    if let Some(c) = s.clip()? {
        setup = setup.with_clip(c);
    }
    let traces = simulate_ensemble(&config, &setup)?;
    write_traces(create(&out, "traces.csv")?, &traces)?;
    write_summaries(create(&out, "summary.csv")?, &summarize(&traces)?)
}

fn figure3(s: &Settings) -> Result<()> {
    let out = s.out()?;
    let p = s.p()?;
    let samples = s.samples(if s.extended() {
        experiments::EXTENDED_SAMPLES
    } else {
        experiments::DEFAULT_SAMPLES
    });
    let targets: Vec<(PathBuf, LambdaSchedule)> = match &s.0.schedule {
        Some(text) => vec![(out.clone(), text.parse()?)],
        None => ["none", "weak", "strong"]
            .iter()
            .map(|name| Ok((out.join(name), name.parse()?)))
            .collect::<Result<_>>()?,
    };
    for (dir, schedule) in targets {
        fs::create_dir_all(&dir)?;
        let config = Figure3Config { runs: s.runs(), samples, seed: s.seed(), ..Figure3Config::new(p, schedule, false) };
        let result = run_figure3(&config)?;
        write_summaries(create(&dir, "summary.csv")?, std::slice::from_ref(&result.summary))?;
        write_thresholds(create(&dir, "thresholds.csv")?, &result.thresholds)?;
    }
    Ok(())
}

fn figure4(s: &Settings, with_traces: bool) -> Result<()> {
    let out = s.out()?;
    let config = Figure4Config {
        estimators: s.estimators(&EstimatorKind::ALL)?,
        lambda_hat: s.lambda_hat()?,
        clip: s.clip()?,
        runs: s.runs(),
        samples: s.samples(experiments::FIGURE4_SAMPLES),
        seed: s.seed(),
        ..Figure4Config::new(s.p()?, s.schedule("strong")?)
    };
    let (traces, summaries) = run_figure4_traces(&config)?;
    if with_traces {
        write_traces(create(&out, "traces.csv")?, &traces)?;
    }
    write_summaries(create(&out, "summary.csv")?, &summaries)
}

fn theory(s: &Settings, epsilon: f64, alpha: f64, overlay: bool) -> Result<()> {
    let out = s.out()?;
    let p = s.p()?;
    let schedule = s.schedule("strong")?;
    let samples = s.samples(experiments::FIGURE4_SAMPLES);
    let checkpoints = geometric_checkpoints(samples);
    let rows = experiments::theory_table(p, &schedule, &checkpoints)?;
    experiments::write_theory_table(create(&out, "theory.csv")?, &rows)?;
    let report = experiments::theory_report(p, &schedule, epsilon, alpha, samples.max(1_000_000))?;
    write_json(&out, "theory.json", &report)?;
    if overlay {
        let config = EnsembleConfig::new(p, schedule.clone(), s.runs(), samples, s.seed());
        let traces = simulate_ensemble(&config, &EstimationSetup::new(vec![EstimatorKind::SampleMean]))?;
        let curve = efficiency_curve(p, &schedule, samples)?;
        let exact: Vec<(usize, f64)> = checkpoints.iter().map(|&n| (n, curve[n - 1])).collect();
        let rows = overlay_theory(&traces, EstimatorKind::SampleMean, p, &exact)?;
        write_overlay(create(&out, "overlay.csv")?, &rows)?;
    }
    Ok(())
}

fn estimate_lambda(s: &Settings, input: &Path, mode: Mode, two_stage: bool) -> Result<()> {
    let out = s.out()?;
    let data = read_bin_dataset(File::open(input)?)?;
    let mode = match mode {
        Mode::Joint => FitMode::Joint,
        Mode::Plugin => FitMode::Plugin,
    };
    let options = FitOptions::default();
    let report = if two_stage {
        fit_lambda_two_stage(&data, mode, &options)?
    } else {
        fit_lambda_mle_with(&data, mode, &options)?
    };
    write_json(&out, "fit.json", &report)?;
    let horizon = s.samples(data.per_bin());
    write_lambda_table(
        create(&out, "lambda.csv")?,
        &report.curve,
        report.per_step_estimates.as_deref(),
        horizon,
    )
}

fn oracle(s: &Settings) -> Result<()> {
    let out = s.out()?;
    let report = experiments::oracle_report(s.p()?, &s.schedule("strong")?, s.samples(12))?;
    write_json(&out, "oracle.json", &report)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, bins, items } => simulate(&Settings::load(&common)?, bins, items),
        Command::Figure3 { common } => figure3(&Settings::load(&common)?),
        Command::Figure4 { common, traces } => figure4(&Settings::load(&common)?, traces),
        Command::Theory { common, epsilon, alpha, overlay } => {
            theory(&Settings::load(&common)?, epsilon, alpha, overlay)
        }
        Command::EstimateLambda { common, input, mode, two_stage } => {
            estimate_lambda(&Settings::load(&common)?, &input, mode, two_stage)
        }
        Command::Oracle { common } => oracle(&Settings::load(&common)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
