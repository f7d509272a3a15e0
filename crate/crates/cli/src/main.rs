use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chaoslab::channel::{write_ptm_csv, Environment};
use chaoslab::echo::{time_grid, write_echo_csv, write_purity_csv, Estimator, ProbeDynamics};
use chaoslab::models::{default_defect_site, HeisenbergParams, IsingParams, ModelSpec, XxzDefectParams};
use chaoslab::rng::derive_seed;
use chaoslab::spectra::{eigh, histogram_vs_surmise, spacing_ratios, write_histogram_csv, SurmiseKind};
use chaoslab::spinops::{random_product_state, SectorKind};
use chaoslab::sweep::{resolve_jobs, run_disorder_scan, run_sweep, RunOptions, SweepConfig};
use chaoslab::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(author, version, about = "Choi echo, subsystem purity and level statistics of spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spacing-ratio statistics in a symmetry sector.
    Spectrum(SpectrumArgs),
    /// Choi-echo time series of the probe spin.
    Echo(EchoArgs),
    /// Probe purity averaged over random product states.
    Purity(PurityArgs),
    /// Pauli transfer matrix of the probe channel for one environment state.
    Ptm(PtmArgs),
    /// Parameter grid from a JSON configuration.
    Sweep(SweepArgs),
    /// Disorder scan of the random-field Heisenberg chain.
    ScanDisorder(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelName {
    Ising,
    Heisenberg,
    Xxz,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    /// Chain length.
    #[arg(long = "L")]
    length: usize,
    #[arg(long, default_value_t = 1.0)]
    hx: f64,
    #[arg(long)]
    hz: Option<f64>,
    #[arg(long = "J")]
    j: Option<f64>,
    /// Disorder strength.
    #[arg(long)]
    h: Option<f64>,
    /// Seed of the disorder realization; defaults to --seed.
    #[arg(long)]
    disorder_seed: Option<u64>,
    #[arg(long = "Jxy")]
    jxy: Option<f64>,
    #[arg(long = "Jz", default_value_t = 1.0)]
    jz: f64,
    #[arg(long)]
    eps: Option<f64>,
    /// 1-based defect site; defaults to floor(L/2).
    #[arg(long)]
    defect: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn required(name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Validation(format!("--{name} is required for this model")))
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        Ok(match self.model {
            ModelName::Ising => ModelSpec::Ising(IsingParams {
                length: self.length,
                hx: self.hx,
                hz: required("hz", self.hz)?,
                j: required("J", self.j)?,
            }),
            ModelName::Heisenberg => ModelSpec::Heisenberg(HeisenbergParams {
                length: self.length,
                h: required("h", self.h)?,
                seed: self.disorder_seed.unwrap_or(self.seed),
            }),
            ModelName::Xxz => ModelSpec::XxzDefect(XxzDefectParams {
                length: self.length,
                jxy: required("Jxy", self.jxy)?,
                jz: self.jz,
                eps: required("eps", self.eps)?,
                defect_site: self.defect.unwrap_or_else(|| default_defect_site(self.length)),
            }),
        })
    }

    fn default_sector(&self) -> SectorKind {
        match self.model {
            ModelName::Ising => "even".parse().expect("valid sector"),
            _ => SectorKind::Magnetization { n_up: self.length / 2 },
        }
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// full, even, odd or nup=K; defaults to even (ising) or nup=L/2.
    #[arg(long)]
    sector: Option<String>,
    #[arg(long, default_value_t = chaoslab::spectra::DEFAULT_TRIM)]
    trim: f64,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Histogram CSV; a summary is written next to it as <stem>.meta.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DynamicsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// 1-based probe site.
    #[arg(long, default_value_t = 1)]
    probe: usize,
    #[arg(long = "T", default_value_t = chaoslab::echo::DEFAULT_T_MAX)]
    t_max: f64,
    #[arg(long, default_value_t = chaoslab::echo::DEFAULT_DT)]
    dt: f64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EstimatorName {
    Exact,
    Mc,
    Design,
    Single,
}

#[derive(Args, Debug)]
struct EchoArgs {
    #[command(flatten)]
    dynamics: DynamicsArgs,
    #[arg(long, value_enum, default_value = "exact")]
    estimator: EstimatorName,
    /// Environment samples for the Monte-Carlo estimator.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct PurityArgs {
    #[command(flatten)]
    dynamics: DynamicsArgs,
    /// Number of random product states.
    #[arg(long = "N", default_value_t = 50)]
    n_states: usize,
}

#[derive(Args, Debug)]
struct PtmArgs {
    #[command(flatten)]
    dynamics: DynamicsArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn spectrum(args: &SpectrumArgs) -> Result<()> {
    if args.bins == 0 {
        return Err(Error::Validation("--bins must be positive".into()));
    }
    let sector = match &args.sector {
        Some(s) => s.parse()?,
        None => args.model.default_sector(),
    };
    let levels = args.model.spec()?.hamiltonian()?.sector_levels(sector)?;
    let stats = spacing_ratios(&levels, args.trim)?;
    write_histogram_csv(create(&args.out)?, &stats.ratios, args.bins)?;
    let l1 = |kind| histogram_vs_surmise(&stats.ratios, kind, args.bins).map(|c| c.l1_distance);
    let summary = serde_json::json!({
        "model": args.model.spec()?,
        "sector": sector.to_string(),
        "dim": levels.len(),
        "mean_r": stats.mean_r,
        "n_ratios": stats.ratios.len(),
        "n_levels_used": stats.n_levels_used,
        "n_degenerate_dropped": stats.n_degenerate_dropped,
        "trim_fraction": stats.trim_fraction,
        "bins": args.bins,
        "l1_poisson": l1(SurmiseKind::Poisson)?,
        "l1_goe": l1(SurmiseKind::Goe)?,
    });
    let mut meta = create(&args.out.with_extension("meta.json"))?;
    serde_json::to_writer_pretty(&mut meta, &summary)?;
    writeln!(meta)?;
    meta.flush()?;
    println!("mean_r = {:.6} over {} ratios ({sector})", stats.mean_r, stats.ratios.len());
    Ok(())
}

/// Diagonalizes the full Hamiltonian and runs `f` inside a pool of `jobs` workers.
fn with_dynamics<T: Send>(
    args: &DynamicsArgs,
    f: impl FnOnce(&ProbeDynamics<'_>, &[f64]) -> Result<T> + Send,
) -> Result<T> {
    let jobs = resolve_jobs(args.jobs)?;
    let times = time_grid(args.t_max, args.dt)?;
    let h = args.model.spec()?.hamiltonian()?.to_dense()?;
    let eig = eigh(&h)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let dynamics = ProbeDynamics::new(&eig, args.probe)?;
        f(&dynamics, &times)
    })
}

fn echo(args: &EchoArgs) -> Result<()> {
    let seed = args.dynamics.model.seed;
    let estimator = match args.estimator {
        EstimatorName::Exact => Estimator::ExactPauli,
        EstimatorName::Design => Estimator::DesignEnum,
        EstimatorName::Mc => Estimator::MonteCarlo {
            samples: args.samples,
            seed,
        },
        EstimatorName::Single => Estimator::SingleEnv { seed },
    };
    let series = with_dynamics(&args.dynamics, |d, times| d.echo_series(times, estimator))?;
    write_echo_csv(create(&args.dynamics.out)?, &series)?;
    println!("time-averaged echo = {:.6} ({estimator})", series.time_average()?);
    Ok(())
}

fn purity(args: &PurityArgs) -> Result<()> {
    let d = &args.dynamics;
    let avg = with_dynamics(d, |dynamics, _| {
        dynamics.averaged_subsystem_purity(args.n_states, d.t_max, d.dt, d.model.seed)
    })?;
    write_purity_csv(create(&d.out)?, &avg.series)?;
    println!("time-averaged purity = {:.6} over {} states", avg.mean, args.n_states);
    Ok(())
}

fn ptm(args: &PtmArgs) -> Result<()> {
    let d = &args.dynamics;
    let env = random_product_state(d.model.length.saturating_sub(1), derive_seed(d.model.seed, &[3]))?;
    let series = with_dynamics(d, |dynamics, times| {
        times
            .iter()
            .map(|&t| {
                let ch = dynamics.channel(t, Environment::Pure(env.amplitudes()))?;
                Ok((t, ch.pauli_transfer_matrix()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    write_ptm_csv(create(&d.out)?, &series)?;
    Ok(())
}

fn sweep(args: &SweepArgs, disorder: bool) -> Result<()> {
    let cfg = SweepConfig::from_path(&args.config)?;
    let opts = RunOptions {
        out_dir: Some(args.out.clone()),
        jobs: args.jobs,
    };
    let (n, failed) = if disorder {
        let scan = run_disorder_scan(&cfg, &opts)?;
        (scan.records.len(), scan.records.iter().filter(|r| r.error.is_some()).count())
    } else {
        let out = run_sweep(&cfg, &opts)?;
        if out.tasks_resumed > 0 {
            log::info!("resumed {} tasks from the manifest", out.tasks_resumed);
        }
        (out.records.len(), out.records.iter().filter(|r| r.error.is_some()).count())
    };
    println!("{n} records written to {} ({failed} failed)", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Echo(a) => echo(a),
        Command::Purity(a) => purity(a),
        Command::Ptm(a) => ptm(a),
        Command::Sweep(a) => sweep(a, false),
        Command::ScanDisorder(a) => sweep(a, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
