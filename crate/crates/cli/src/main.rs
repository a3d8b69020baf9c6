//! Command-line front end: simulate epidemics, fit estimators, run Monte
//! Carlo designs, and emit every CSV the analysis pipeline consumes.
//!
//! All commands are deterministic for a fixed `--seed` (default
//! [`DEFAULT_SEED`]); the thread count never changes output bytes. Exit codes:
//! 0 on success, 1 on runtime errors, 2 on flag errors.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use sirmc::bayes::{posterior_update, PosteriorPair, RzeroPosterior};
use sirmc::csv;
use sirmc::epiestim::{
    ar_estimate, discretize_interval, geometric_profile, instantaneous_r, InfectivityProfile,
    ProfileFamily, RPrior,
};
use sirmc::estimators::{fit, rolling_fit, Method, RollingMode, SufficientStats};
use sirmc::hetero::{simulate_sir2, HeteroParams, HeteroState};
use sirmc::mechanistic::{deterministic_path, final_size, MechanisticState};
use sirmc::montecarlo::{histogram, run_design, McDesign, TABLE_A_ROWS, TABLE_C_ROWS, TABLE_R0_ROWS};
use sirmc::reproduction::{rzero_path, RzeroConfig};
use sirmc::rng::RngStream;
use sirmc::sir::{default_init, simulate, EpidemicState};
use sirmc::{CountPath, ModelParams};

/// Default master seed, chosen once and documented so published artifacts
/// reproduce byte-for-byte.
pub const DEFAULT_SEED: u64 = 20201207;

#[derive(Parser)]
#[command(name = "sirmc", version, about = "Stochastic SIR simulation and R0 estimation")]
struct Cli {
    /// Worker threads for Monte Carlo commands (default: all cores). The
    /// REPRO_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one count path and write it as CSV
    Simulate(SimulateArgs),
    /// Fit estimators to a count-path CSV
    Estimate(EstimateArgs),
    /// Per-day effective and basic reproduction ratios along a path
    Rzero(RzeroArgs),
    /// Instantaneous reproduction number from incidence (renewal equation)
    Epiestim(EpiestimArgs),
    /// Autoregressive reproduction estimate from incidence
    Ar(ArArgs),
    /// Monte Carlo study of estimator sampling distributions
    Mc(McArgs),
    /// Conjugate posterior of (a, c) and the induced R0 distribution
    Posterior(PosteriorArgs),
    /// Final susceptible fraction of the deterministic epidemic
    FinalSize(FinalSizeArgs),
    /// Run the full reproduction suite and write a manifest of output hashes
    Repro(ReproArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    n: u64,
    /// Initially infected count
    #[arg(long)]
    i0: u64,
    /// Number of simulated days
    #[arg(long)]
    t: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    BinomialMl,
    PoissonAml,
    GaussianAml,
    UnfeasibleGaussian,
    PoissonGaussian,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::BinomialMl => vec![Method::BinomialMl],
            MethodArg::PoissonAml => vec![Method::PoissonAml],
            MethodArg::GaussianAml => vec![Method::GaussianAml],
            MethodArg::UnfeasibleGaussian => vec![Method::UnfeasibleGaussian],
            MethodArg::PoissonGaussian => vec![Method::PoissonGaussian],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RollingArg {
    Off,
    Expanding,
    Window,
}

#[derive(Args)]
struct EstimateArgs {
    /// Count-path CSV produced by `simulate`
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "off")]
    rolling: RollingArg,
    /// Window length in days (only with --rolling window)
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RzeroArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    c: f64,
    /// Truncation horizon H of the forward discounted sum
    #[arg(long, default_value_t = 100)]
    horizon: u32,
    /// Forward replications S per day
    #[arg(long, default_value_t = 100)]
    replications: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EpiestimArgs {
    #[arg(long)]
    input: PathBuf,
    /// Infectivity profile: geometric:C, lognormal:MEAN:SD, or gamma:MEAN:SD
    #[arg(long)]
    profile: String,
    /// Support length of the discretized profile (days)
    #[arg(long, default_value_t = 100)]
    support: usize,
    /// Trailing estimation window (days)
    #[arg(long, default_value_t = 7)]
    window: usize,
    #[arg(long, default_value_t = 1.0)]
    prior_shape: f64,
    #[arg(long, default_value_t = 0.2)]
    prior_rate: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ArArgs {
    #[arg(long)]
    input: PathBuf,
    /// Number of autoregressive lags H
    #[arg(long)]
    lags: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    /// Contagion-parameter table (a-hat rows)
    #[value(name = "3")]
    Three,
    /// Recovery-parameter table (c-hat rows)
    #[value(name = "4")]
    Four,
    /// Reproduction-ratio table (R0-hat rows)
    #[value(name = "5")]
    Five,
}

#[derive(Args)]
struct McArgs {
    /// Preset design grid for one of the built-in summary tables
    #[arg(long, value_enum, conflicts_with_all = ["i0", "t", "a", "c"])]
    table: Option<TableArg>,
    #[arg(long, requires_all = ["t", "a", "c"])]
    i0: Option<u64>,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Summarized statistic for custom designs: a, c, or r0
    #[arg(long, default_value = "a")]
    target: String,
    #[arg(long, default_value_t = 3_000_000)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, value_enum, default_value = "poisson-aml")]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PosteriorArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    prior_shape_a: f64,
    #[arg(long, default_value_t = 1e-3)]
    prior_rate_a: f64,
    #[arg(long, default_value_t = 1.0)]
    prior_shape_c: f64,
    #[arg(long, default_value_t = 1e-3)]
    prior_rate_c: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FinalSizeArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    c: f64,
    /// Initial infected fraction
    #[arg(long, default_value_t = 1e-5)]
    y0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    #[arg(long, default_value = "repro-out")]
    out_dir: PathBuf,
    /// Replications per Monte Carlo design
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    let threads = std::env::var("REPRO_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .or(cli.threads);
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not configure {t} threads: {e}");
            std::process::exit(1);
        }
    }
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_path(input: &Path) -> Result<CountPath> {
    let text = fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    Ok(csv::read_count_path(&text)?)
}

fn incidence_of(path: &CountPath) -> Vec<f64> {
    path.transitions.iter().map(|tr| tr.n12 as f64).collect()
}

fn parse_profile(spec: &str, support: usize) -> Result<InfectivityProfile> {
    let parts: Vec<&str> = spec.split(':').collect();
    let profile = match parts.as_slice() {
        ["geometric", c] => geometric_profile(c.parse()?, support)?,
        ["lognormal", mean, sd] => {
            discretize_interval(ProfileFamily::LogNormal, mean.parse()?, sd.parse()?, support)?
        }
        ["gamma", mean, sd] => {
            discretize_interval(ProfileFamily::Gamma, mean.parse()?, sd.parse()?, support)?
        }
        _ => bail!("profile must be geometric:C, lognormal:MEAN:SD, or gamma:MEAN:SD"),
    };
    Ok(profile)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => {
            let params = ModelParams::new(args.a, args.c, args.n)?;
            let path = simulate(
                &params,
                &default_init(args.n, args.i0),
                args.t,
                RngStream::new(args.seed, 0),
            )?;
            emit(args.out.as_deref(), &csv::write_count_path(&path))
        }
        Command::Estimate(args) => {
            let path = read_path(&args.input)?;
            let stats = SufficientStats::from_path(&path)?;
            let mut rows = Vec::new();
            for method in args.method.methods() {
                match args.rolling {
                    RollingArg::Off => rows.push((stats.horizon(), fit(&stats, method)?)),
                    RollingArg::Expanding | RollingArg::Window => {
                        let mode = match args.rolling {
                            RollingArg::Window => RollingMode::Window(args.window),
                            _ => RollingMode::Expanding,
                        };
                        for (i, day_fit) in rolling_fit(&path, method, mode)?.into_iter().enumerate()
                        {
                            // days where the estimator is undefined are skipped
                            if let Ok(f) = day_fit {
                                rows.push((i + 1, f));
                            }
                        }
                    }
                }
            }
            emit(args.out.as_deref(), &csv::write_fit_results(&rows))
        }
        Command::Rzero(args) => {
            let path = read_path(&args.input)?;
            let n = path.states[0].total();
            let params = ModelParams::new(args.a, args.c, n)?;
            let config = RzeroConfig {
                horizon: args.horizon,
                replications: args.replications,
                stream: RngStream::new(args.seed, 1),
            };
            let series = rzero_path(&path, &params, &config)?;
            emit(args.out.as_deref(), &csv::write_rzero_series(&series))
        }
        Command::Epiestim(args) => {
            let path = read_path(&args.input)?;
            let profile = parse_profile(&args.profile, args.support)?;
            let prior = RPrior::new(args.prior_shape, args.prior_rate)?;
            let series = instantaneous_r(&incidence_of(&path), &profile, args.window, &prior)?;
            emit(args.out.as_deref(), &csv::write_instant_r(&series))
        }
        Command::Ar(args) => {
            let path = read_path(&args.input)?;
            let (coef, total) = ar_estimate(&incidence_of(&path), args.lags)?;
            emit(args.out.as_deref(), &csv::write_ar(&coef, total))
        }
        Command::Mc(args) => {
            let method = match args.method.methods().as_slice() {
                [m] => *m,
                _ => bail!("mc requires a single --method"),
            };
            let (rows, target) = match args.table {
                Some(TableArg::Three) => (TABLE_A_ROWS.to_vec(), csv::TableTarget::A),
                Some(TableArg::Four) => (TABLE_C_ROWS.to_vec(), csv::TableTarget::C),
                Some(TableArg::Five) => (TABLE_R0_ROWS.to_vec(), csv::TableTarget::Rzero),
                None => {
                    let (Some(i0), Some(t), Some(a), Some(c)) =
                        (args.i0, args.t, args.a, args.c)
                    else {
                        bail!("either --table or all of --i0 --t --a --c are required");
                    };
                    let target = match args.target.as_str() {
                        "a" => csv::TableTarget::A,
                        "c" => csv::TableTarget::C,
                        "r0" => csv::TableTarget::Rzero,
                        other => bail!("unknown --target {other} (a, c, or r0)"),
                    };
                    (vec![(i0, t, a, c)], target)
                }
            };
            let results = rows
                .iter()
                .map(|&(i0, t, a, c)| {
                    let design = McDesign {
                        n: args.n,
                        i0,
                        horizon: t,
                        a,
                        c,
                        replications: args.reps,
                        seed: args.seed,
                    };
                    Ok(run_design(&design, method)?)
                })
                .collect::<Result<Vec<_>>>()?;
            emit(args.out.as_deref(), &csv::write_table(&results, target))
        }
        Command::Posterior(args) => {
            let path = read_path(&args.input)?;
            let stats = SufficientStats::from_path(&path)?;
            let prior = PosteriorPair {
                a: sirmc::bayes::GammaParam::new(args.prior_shape_a, args.prior_rate_a)?,
                c: sirmc::bayes::GammaParam::new(args.prior_shape_c, args.prior_rate_c)?,
            };
            let post = RzeroPosterior::new(posterior_update(&prior, &stats)?)?;
            emit(args.out.as_deref(), &csv::write_posterior(&post)?)
        }
        Command::FinalSize(args) => {
            let params = ModelParams::new(args.a, args.c, 1_000_000)?;
            let x0 = 1.0 - args.y0;
            let x_inf = final_size(&params, x0, args.y0)?;
            // the attack rate: the fraction ever infected
            emit(args.out.as_deref(), &format!("{}\n", 1.0 - x_inf))
        }
        Command::Repro(args) => repro(&args),
    }
}

/// Run every artifact of the reproduction suite sequentially and hash the
/// outputs into `manifest.txt`.
fn repro(args: &ReproArgs) -> Result<()> {
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let seed = args.seed;
    let mut artifacts: Vec<(String, String)> = Vec::new();

    // reference epidemic: R0 = 1.5 on a large population
    let params = ModelParams::new(0.105, 0.07, 3_000_000)?;
    let path = simulate(&params, &default_init(3_000_000, 50), 700, RngStream::new(seed, 0))?;
    artifacts.push(("path.csv".into(), csv::write_count_path(&path)));

    let stats = SufficientStats::from_path(&path)?;
    let fits: Vec<(usize, _)> = Method::ALL
        .iter()
        .map(|&m| Ok((stats.horizon(), fit(&stats, m)?)))
        .collect::<Result<_>>()?;
    artifacts.push(("fits.csv".into(), csv::write_fit_results(&fits)));

    let mut rolling_rows = Vec::new();
    for (i, day_fit) in rolling_fit(&path, Method::PoissonAml, RollingMode::Expanding)?
        .into_iter()
        .enumerate()
    {
        if let Ok(f) = day_fit {
            rolling_rows.push((i + 1, f));
        }
    }
    artifacts.push(("rolling.csv".into(), csv::write_fit_results(&rolling_rows)));

    // reproduction-ratio series on a shorter path to keep the runtime modest
    let short = CountPath {
        states: path.states[..201].to_vec(),
        transitions: path.transitions[..200].to_vec(),
    };
    let config = RzeroConfig {
        horizon: 100,
        replications: 100,
        stream: RngStream::new(seed, 2),
    };
    let series = rzero_path(&short, &params, &config)?;
    artifacts.push(("rzero.csv".into(), csv::write_rzero_series(&series)));

    // instantaneous R with the matched geometric and a lognormal profile
    let incidence = incidence_of(&short);
    let prior = RPrior::default_prior();
    for (name, profile) in [
        ("epiestim_geometric.csv", geometric_profile(0.07, 100)?),
        (
            "epiestim_lognormal.csv",
            discretize_interval(ProfileFamily::LogNormal, 4.5, 2.5, 100)?,
        ),
    ] {
        let r = instantaneous_r(&incidence, &profile, 7, &prior)?;
        artifacts.push((name.into(), csv::write_instant_r(&r)));
    }

    for lags in [7usize, 14, 21] {
        let (coef, total) = ar_estimate(&incidence, lags)?;
        artifacts.push((format!("ar_{lags}.csv"), csv::write_ar(&coef, total)));
    }

    // Monte Carlo summary tables
    for (name, rows, target) in [
        ("table_a.csv", TABLE_A_ROWS.as_slice(), csv::TableTarget::A),
        ("table_c.csv", TABLE_C_ROWS.as_slice(), csv::TableTarget::C),
        ("table_r0.csv", TABLE_R0_ROWS.as_slice(), csv::TableTarget::Rzero),
    ] {
        let results = rows
            .iter()
            .map(|&(i0, t, a, c)| {
                let design = McDesign {
                    n: 3_000_000,
                    i0,
                    horizon: t,
                    a,
                    c,
                    replications: args.reps,
                    seed,
                };
                Ok(run_design(&design, Method::PoissonAml)?)
            })
            .collect::<Result<Vec<_>>>()?;
        artifacts.push((name.into(), csv::write_table(&results, target)));
    }

    // sampling histogram of R0-hat on one design
    let design = McDesign {
        n: 3_000_000,
        i0: 100,
        horizon: 20,
        a: 0.07,
        c: 0.07,
        replications: args.reps.min(2_000),
        seed,
    };
    let mut r0_samples = Vec::new();
    for rep in 0..design.replications {
        let p = simulate(
            &ModelParams::new(design.a, design.c, design.n)?,
            &default_init(design.n, design.i0),
            design.horizon,
            design.stream(rep),
        )?;
        let f = fit(&SufficientStats::from_path(&p)?, Method::PoissonAml)?;
        if f.r0_hat.is_finite() {
            r0_samples.push(f.r0_hat);
        }
    }
    artifacts.push(("histogram_r0.csv".into(), csv::write_histogram(&histogram(&r0_samples, 40)?)));

    // posterior of (a, c) and R0 on the reference path
    let post = RzeroPosterior::new(posterior_update(&PosteriorPair::default_prior(), &stats)?)?;
    artifacts.push(("posterior.csv".into(), csv::write_posterior(&post)?));

    // deterministic trajectory and final size
    let traj = deterministic_path(&MechanisticState::new(1.0 - 1e-5, 1e-5, 0.0)?, &params, 700)?;
    artifacts.push(("trajectory.csv".into(), csv::write_trajectory(&traj)));
    let x_inf = final_size(&params, 1.0 - 1e-5, 1e-5)?;
    artifacts.push(("final_size.csv".into(), format!("x_inf,attack_rate\n{x_inf},{}\n", 1.0 - x_inf)));

    // two-group epidemic with a super-spreader group
    let hetero = HeteroParams::rank1([0.5, 0.2], [0.6, 0.1], [0.07, 0.07], [1_500_000, 1_500_000])?;
    let init = HeteroState::new(
        0,
        [
            EpidemicState::new(0, 1_499_975, 25, 0),
            EpidemicState::new(0, 1_499_975, 25, 0),
        ],
    );
    let groups = simulate_sir2(&hetero, &init, 400, RngStream::new(seed, 3))?;
    artifacts.push(("groups.csv".into(), csv::write_group_paths(&groups)));

    artifacts.push(("plots.gp".into(), gnuplot_script()));

    let mut manifest = String::new();
    for (name, text) in &artifacts {
        fs::write(args.out_dir.join(name), text)
            .with_context(|| format!("writing {name}"))?;
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        manifest.push_str(&format!("{:x}  {name}\n", hasher.finalize()));
    }
    fs::write(args.out_dir.join("manifest.txt"), &manifest)?;
    print!("{manifest}");
    Ok(())
}

/// Minimal gnuplot script plotting the main series of the suite.
fn gnuplot_script() -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    for (out, plot) in [
        ("path.png", "plot 'path.csv' using 1:3 with lines title 'infected'"),
        ("rzero.png", "plot 'rzero.csv' using 1:2 with lines, 'rzero.csv' using 1:3 with lines"),
        (
            "epiestim.png",
            "plot 'epiestim_geometric.csv' using 1:3 with lines, 'epiestim_lognormal.csv' using 1:3 with lines",
        ),
        ("trajectory.png", "plot for [i=2:4] 'trajectory.csv' using 1:i with lines"),
        ("histogram.png", "plot 'histogram_r0.csv' using 1:3 with boxes"),
    ] {
        s.push_str(&format!("set output '{out}'\n{plot}\n"));
    }
    s
}
