//! `filiform` — command-line surface of the nilflow laboratory.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure,
//! 3 resource budget exceeded.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands as cmd;
use filiform::error::Error;

#[derive(Parser)]
#[command(name = "filiform", version, about = "Filiform nilflow laboratory", disable_help_subcommand = true)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for multi-configuration runs.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Degree (cross-checked against --coeffs / --alpha).
    #[arg(long)]
    k: Option<usize>,

    /// Monomial coefficients `a_1,..,a_k` of `a_1 X^k + ... + a_k X`
    /// (descending degree, no constant term).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,

    /// Frequency vector of the skew shift (alternative to --coeffs).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,

    /// Section base point (with --alpha; defaults to the origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s: Option<Vec<f64>>,

    /// Character multiplier.
    #[arg(long)]
    ell: Option<i64>,

    /// Single term count (instead of a dyadic schedule).
    #[arg(long)]
    n: Option<u64>,

    /// Dyadic schedule start exponent.
    #[arg(long)]
    n_min: Option<u32>,

    /// Dyadic schedule end exponent.
    #[arg(long)]
    n_max: Option<u32>,

    /// Arithmetic mode: float64 | fixed64.
    #[arg(long)]
    mode: Option<String>,

    /// Seeded uniform base point (overrides --s).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Weyl-sum sweep; CSV `N,re,im,abs,log2_N,log2_abs`.
    Weyl(SweepArgs),

    /// Sweep plus slope fit and bound verdict; JSON report.
    Fit {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Bound regime: strong | weak | sharp.
        #[arg(long)]
        regime: Option<String>,
        /// Diophantine exponent threshold for the weak regime.
        #[arg(long)]
        nu0: Option<f64>,
        /// Envelope epsilon.
        #[arg(long)]
        eps: Option<f64>,
        /// Base-point seeds; runs one sweep per seed (see --threads).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },

    /// Skew-shift trajectory dump; CSV `n,s1,..,sk`.
    Orbit {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Option<Vec<f64>>,
        /// Number of steps.
        #[arg(long)]
        n: Option<u64>,
        /// Output row stride.
        #[arg(long, default_value_t = 1)]
        stride: u64,
        #[arg(long)]
        mode: Option<String>,
    },

    /// Injectivity-radius trajectory of the diagonal flow; CSV `t,inj,log_inj`.
    LatticeFlow {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
        /// Scaling exponents (sum 1); defaults to the optimal vector for --k.
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        t_step: Option<f64>,
        /// Emit the JSON summary (delta_hat, C) instead of the CSV.
        #[arg(long)]
        summary: bool,
    },

    /// Shortest vector / injectivity radius of a single lattice; JSON.
    Inj {
        /// Basis columns `c11,c21;c12,c22;...` (semicolon-separated columns).
        #[arg(long, allow_hyphen_values = true)]
        basis: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
    },

    /// Distribution-norm grid; CSV `t,sigma,norm,rate_fit`, or the
    /// raw-polynomial JSON entry point.
    DistNorm {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<f64>>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
        /// Use the optimal scaling exponents for the form's k.
        #[arg(long)]
        optimal: bool,
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
        /// Raw weight polynomial, descending monomial coefficients
        /// `c_d,..,c_0`; emits JSON instead of the CSV grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        raw_poly: Option<Vec<f64>>,
    },

    /// Distribution-norm growth-rate fit; JSON.
    Scaling {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<f64>>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },

    /// Green-operator residual report on a named test function; JSON.
    Green {
        /// gaussian-derivative | x-gaussian | gaussian (the last one is the
        /// obstruction demonstration).
        #[arg(long, default_value = "gaussian-derivative")]
        function: String,
        #[arg(long, default_value_t = 8.0)]
        half_width: f64,
        #[arg(long, default_value_t = 32_000)]
        samples: usize,
    },

    /// Continued fraction and Diophantine-exponent estimate; JSON.
    Cf {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 32)]
        depth: usize,
        #[arg(long, default_value_t = 1_000_000)]
        qmax: u64,
    },

    /// Bracket-table JSON for the filiform (canonical/eta) or cover algebra.
    Algebra {
        #[arg(long)]
        k: usize,
        /// canonical | eta | cover.
        #[arg(long, default_value = "canonical")]
        basis: String,
    },

    /// The optimal scaling exponents as exact fractions.
    Rho {
        #[arg(long)]
        k: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidParameter(_) | Error::NoSolution(_) => 1,
                Error::NumericalFailure(_) | Error::Obstruction { .. } => 2,
                Error::ResourceExceeded { .. } => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let conf = match &cli.config {
        Some(path) => config::load(path).map_err(Error::InvalidParameter)?,
        None => config::Config::default(),
    };
    let out = &cli.out;
    match cli.command {
        Command::Weyl(args) => {
            let rs = resolve_sweep_args(args, &conf)?;
            cmd::run_weyl(rs, out)
        }
        Command::Fit { sweep, regime, nu0, eps, seeds } => {
            let rs = resolve_sweep_args(sweep, &conf)?;
            let regime_name =
                config::pick(regime, conf.weyl.regime.clone()).unwrap_or_else(|| "strong".into());
            let nu0 = config::pick(nu0, conf.weyl.nu0);
            let eps = config::pick(eps, conf.weyl.eps).unwrap_or(0.05);
            let regime = cmd::parse_regime(&regime_name, nu0)?;
            cmd::run_fit(rs, &regime_name, regime, eps, seeds, cli.threads, out)
        }
        Command::Orbit { alpha, s, n, stride, mode } => {
            let alpha = config::pick(alpha, conf.weyl.alpha.clone())
                .ok_or_else(|| Error::invalid("orbit needs --alpha"))?;
            let s = config::pick(s, conf.weyl.s.clone());
            let n = config::pick(n, conf.weyl.n).unwrap_or(100);
            let mode = cmd::parse_mode(
                &config::pick(mode, conf.weyl.mode.clone()).unwrap_or_else(|| "float64".into()),
            )?;
            cmd::run_orbit(alpha, s, n, stride, mode, out)
        }
        Command::LatticeFlow { alpha, rho, k, t_max, t_step, summary } => {
            let alpha = config::pick(alpha, conf.lattice.alpha.clone())
                .ok_or_else(|| Error::invalid("lattice-flow needs --alpha"))?;
            let rho = cmd::resolve_rho(
                config::pick(rho, conf.lattice.rho.clone()),
                config::pick(k, conf.lattice.k).or(Some(alpha.len())),
            )?;
            if rho.k() != alpha.len() {
                return Err(Error::invalid("--alpha and --rho dimensions differ"));
            }
            let t_max = config::pick(t_max, conf.lattice.t_max).unwrap_or(25.0);
            let t_step = config::pick(t_step, conf.lattice.t_step).unwrap_or(0.25);
            cmd::run_lattice_flow(alpha, rho, t_max, t_step, summary, out)
        }
        Command::Inj { basis, alpha, rho, k, t } => {
            if let Some(text) = basis {
                let b = cmd::parse_basis(&text)?;
                let resolved = serde_json::json!({"basis": text});
                cmd::run_inj(b, resolved, out)
            } else {
                let alpha = config::pick(alpha, conf.lattice.alpha.clone())
                    .ok_or_else(|| Error::invalid("inj needs --basis or --alpha"))?;
                let rho = cmd::resolve_rho(
                    config::pick(rho, conf.lattice.rho.clone()),
                    config::pick(k, conf.lattice.k).or(Some(alpha.len())),
                )?;
                let t = config::pick(t, conf.lattice.t).unwrap_or(0.0);
                let b = filiform::lattice::alpha_lattice_basis(&alpha, &rho, t)?;
                let resolved =
                    serde_json::json!({"alpha": alpha, "rho": rho.rho(), "t": t});
                cmd::run_inj(b, resolved, out)
            }
        }
        Command::DistNorm { k, lambda, sigma, rho, optimal, t_grid, raw_poly } => {
            let sigma = config::pick(sigma, conf.rep.sigma)
                .ok_or_else(|| Error::invalid("dist-norm needs --sigma"))?;
            if let Some(poly) = raw_poly {
                return cmd::run_dist_norm_raw(poly, sigma, out);
            }
            let lambda = config::pick(lambda, conf.rep.lambda.clone())
                .ok_or_else(|| Error::invalid("dist-norm needs --lambda or --raw-poly"))?;
            let k = config::pick(k, conf.rep.k).unwrap_or(lambda.len());
            let rho = resolve_optional_rho(
                config::pick(rho, conf.rep.rho.clone()),
                optimal,
                k,
            )?;
            let t_grid =
                config::pick(t_grid, conf.rep.t_grid.clone()).unwrap_or_else(|| vec![0.0]);
            cmd::run_dist_norm(k, lambda, sigma, rho, t_grid, out)
        }
        Command::Scaling { k, lambda, sigma, rho, t_grid } => {
            let lambda = config::pick(lambda, conf.rep.lambda.clone())
                .ok_or_else(|| Error::invalid("scaling needs --lambda"))?;
            let k = config::pick(k, conf.rep.k).unwrap_or(lambda.len());
            let sigma = config::pick(sigma, conf.rep.sigma).unwrap_or(1.0);
            let rho = cmd::resolve_rho(config::pick(rho, conf.rep.rho.clone()), Some(k))?;
            let t_grid = config::pick(t_grid, conf.rep.t_grid.clone())
                .unwrap_or_else(|| (0..=6).map(|i| i as f64).collect());
            cmd::run_scaling(k, lambda, sigma, rho, t_grid, out)
        }
        Command::Green { function, half_width, samples } => {
            cmd::run_green(&function, half_width, samples, out)
        }
        Command::Cf { x, depth, qmax } => cmd::run_cf(x, depth, qmax, out),
        Command::Algebra { k, basis } => cmd::run_algebra(k, &basis, out),
        Command::Rho { k } => cmd::run_rho(k, out),
    }
}

fn resolve_optional_rho(
    rho: Option<Vec<f64>>,
    optimal: bool,
    k: usize,
) -> Result<Option<filiform::ScalingExponents>, Error> {
    match (rho, optimal) {
        (Some(r), false) => Ok(Some(filiform::ScalingExponents::new(r)?)),
        (None, true) => Ok(Some(filiform::harness::optimal_rho(k)?)),
        (None, false) => Ok(None),
        (Some(_), true) => Err(Error::invalid("give either --rho or --optimal, not both")),
    }
}

fn resolve_sweep_args(args: SweepArgs, conf: &config::Config) -> Result<cmd::ResolvedSweep, Error> {
    let coeffs_flag = args.coeffs.is_some();
    let alpha_flag = args.alpha.is_some();
    let mut coeffs = config::pick(args.coeffs, conf.weyl.coeffs.clone());
    let mut alpha = config::pick(args.alpha, conf.weyl.alpha.clone());
    // an explicit flag wins over the other input coming from the config;
    // two explicit flags remain an error downstream
    if coeffs.is_some() && alpha.is_some() {
        if coeffs_flag && !alpha_flag {
            alpha = None;
        } else if alpha_flag && !coeffs_flag {
            coeffs = None;
        }
    }
    let s = config::pick(args.s, conf.weyl.s.clone());
    let ell = config::pick(args.ell, conf.weyl.ell).unwrap_or(1);
    let n = config::pick(args.n, conf.weyl.n);
    let n_min = config::pick(args.n_min, conf.weyl.n_min).unwrap_or(8);
    let n_max = config::pick(args.n_max, conf.weyl.n_max).unwrap_or(22);
    let mode = cmd::parse_mode(
        &config::pick(args.mode, conf.weyl.mode.clone()).unwrap_or_else(|| "fixed64".into()),
    )?;
    let seed = config::pick(args.seed, conf.weyl.seed);
    let rs = cmd::resolve_sweep(coeffs, alpha, s, ell, n, n_min, n_max, mode, seed)?;
    if let Some(k) = args.k {
        if k != rs.k {
            return Err(Error::invalid(format!(
                "--k {k} does not match the input dimension {}",
                rs.k
            )));
        }
    }
    Ok(rs)
}
