use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use riesz_sphere::experiment::{fmt_num, run_and_write, ExperimentConfig, RunHeader};
use riesz_sphere::family::TestFunction;
use riesz_sphere::sphere::{SphereGrid, SpherePoint};
use riesz_sphere::summability::{
    averaged_from_series, default_radii, hardy_littlewood, maximal_from_series, square_from_series,
    RieszMeanSeries,
};
use riesz_sphere::transform::{
    funk_hecke_coefficients, singular_profile, ConstantProfile, GegenbauerProfile, GridFunction,
    MonomialProfile, Profile, ZonalProfile,
};
use riesz_sphere::zonal::{eigenvalue, harmonic_dimension, RieszKernel};

const THREADS_ENV: &str = "RIESZ_SPHERE_THREADS";

#[derive(Parser)]
#[command(name = "riesz-sphere", version, about = "Riesz means of Fourier-Laplace series on S^N")]
struct Cli {
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Riesz kernel Θ_n^α(t) on a uniform θ grid: columns theta, t, kernel.
    Kernel {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Funk–Hecke coefficients of a zonal profile: columns k, eigenvalue, dimension, mu.
    Transform {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: usize,
        /// constant:c | power:m | gegenbauer:m | singular:s[,eps]
        #[arg(long)]
        profile: String,
    },
    /// A summability operator applied to the degree-K truncation of a
    /// profile centred at the north pole: columns node, value, argmax.
    Operators {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum)]
        op: OpArg,
        #[arg(long)]
        profile: String,
    },
    /// Configured batch experiments.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    /// Run the audit, norm and threshold experiments of a config file.
    Run {
        config: PathBuf,
        /// Override the config's out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    /// E_n^α at n = n_max.
    Riesz,
    /// sup over n <= n_max of |E_n^α|.
    Maximal,
    /// Hardy–Littlewood maximal function over geodesic caps.
    Hl,
    /// Square function G^α.
    Gsq,
    /// Averaged maximal function M^α.
    Avgmax,
}

fn parse_profile(dim: usize, spec: &str) -> Result<ZonalProfile> {
    let (kind, arg) = spec
        .split_once(':')
        .with_context(|| format!("profile '{spec}': expected kind:value"))?;
    let shape: Arc<dyn Profile> = match kind {
        "constant" => Arc::new(ConstantProfile(arg.parse().context("constant: bad value")?)),
        "power" => Arc::new(MonomialProfile(arg.parse().context("power: bad exponent")?)),
        "gegenbauer" => Arc::new(GegenbauerProfile::new(dim, arg.parse().context("gegenbauer: bad degree")?)?),
        "singular" => {
            let mut it = arg.split(',');
            let s: f64 = it.next().unwrap_or("").parse().context("singular: bad exponent")?;
            let eps: f64 = match it.next() {
                Some(e) => e.parse().context("singular: bad eps")?,
                None => 0.0,
            };
            if it.next().is_some() {
                bail!("singular: expected s[,eps]");
            }
            Arc::new(singular_profile(s, eps)?)
        }
        other => bail!("unknown profile kind '{other}'"),
    };
    Ok(ZonalProfile::new(dim, SpherePoint::north(dim)?, shape)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn kernel_csv(dim: usize, n: usize, alpha: f64, samples: usize) -> Result<String> {
    if samples < 2 {
        bail!("--samples must be at least 2");
    }
    let kernel = RieszKernel::new(dim, n, alpha)?;
    let mut s = String::from("theta,t,kernel\n");
    for i in 0..samples {
        let theta = std::f64::consts::PI * i as f64 / (samples - 1) as f64;
        let t = theta.cos();
        let _ = writeln!(s, "{},{},{}", fmt_num(theta), fmt_num(t), fmt_num(kernel.eval(t)));
    }
    Ok(s)
}

fn transform_csv(dim: usize, degree: usize, spec: &str) -> Result<String> {
    let profile = parse_profile(dim, spec)?;
    let c = funk_hecke_coefficients(&profile, degree)?;
    info!("quadrature agreement {:.3e}", c.achieved);
    let mut s = String::from("k,eigenvalue,dimension,mu\n");
    for (k, mu) in c.mu.iter().enumerate() {
        let _ = writeln!(
            s,
            "{k},{},{},{}",
            fmt_num(eigenvalue(dim, k)),
            harmonic_dimension(dim, k)?,
            fmt_num(*mu)
        );
    }
    Ok(s)
}

fn operators_csv(dim: usize, degree: usize, alpha: f64, n_max: usize, op: OpArg, spec: &str) -> Result<String> {
    let profile = parse_profile(dim, spec)?;
    let f = TestFunction::from_profile(profile, 1.0, degree)?;
    let grid = Arc::new(SphereGrid::for_degree(dim, degree)?);
    let pts: Vec<&[f64]> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let rows = f.degree_values(&pts, degree)?;
    let series = |a: f64| RieszMeanSeries::from_rows(dim, rows.view(), a, n_max);
    let (values, argmax) = match op {
        OpArg::Riesz => (series(alpha)?.mean(n_max).to_vec(), None),
        OpArg::Maximal => {
            let m = maximal_from_series(&series(alpha)?, n_max);
            (m.values, m.argmax)
        }
        OpArg::Avgmax => {
            let m = averaged_from_series(&series(alpha)?, n_max);
            (m.values, m.argmax)
        }
        OpArg::Gsq => {
            let m = square_from_series(&series(alpha)?, &series(alpha + 1.0)?, n_max)?;
            (m.values, m.argmax)
        }
        OpArg::Hl => {
            let g = GridFunction::new(grid.clone(), (0..grid.len()).map(|j| rows.column(j).sum()).collect())?;
            let m = hardy_littlewood(&g, &default_radii(&grid))?;
            (m.values, m.argmax)
        }
    };
    let mut s = String::from("node,value,argmax\n");
    for (i, v) in values.iter().enumerate() {
        let arg = argmax.as_ref().map(|a| a[i].to_string()).unwrap_or_default();
        let _ = writeln!(s, "{i},{},{arg}", fmt_num(*v));
    }
    Ok(s)
}

fn run_experiment(config: &Path, out_dir: Option<PathBuf>, command: &str) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("cannot read config {}", config.display()))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    let header = RunHeader::new(command, Some(cfg.seed), Some(cfg.to_text()));
    let (out, files) = run_and_write(&cfg, &header)?;
    for f in &files {
        println!("{}", f.display());
    }
    let failures: Vec<String> = out
        .reports
        .iter()
        .flat_map(|r| r.hard_failures())
        .map(|a| a.inequality.clone())
        .collect();
    if !failures.is_empty() {
        bail!("hard inequality violated: {}", failures.join(", "));
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV}: expected a nonnegative integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli, command: &str) -> Result<()> {
    configure_threads()?;
    let out = cli.out.as_deref();
    let header = RunHeader::new(command, None, None).comment_block();
    match cli.command {
        Command::Kernel { dim, n, alpha, samples } => {
            emit(out, &(header + &kernel_csv(dim, n, alpha, samples)?))
        }
        Command::Transform { dim, degree, profile } => {
            emit(out, &(header + &transform_csv(dim, degree, &profile)?))
        }
        Command::Operators {
            dim,
            degree,
            alpha,
            n_max,
            op,
            profile,
        } => emit(out, &(header + &operators_csv(dim, degree, alpha, n_max, op, &profile)?)),
        Command::Experiment {
            action: ExperimentAction::Run { config, out_dir },
        } => run_experiment(&config, out_dir, command),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let command = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(cli, &command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
