//! Subcommand implementations.
//!
//! Every run resolves its parameters (flags override the config file),
//! derives a provenance stamp `version + sha256(resolved parameters)`, and
//! emits deterministic output: CSV with `#` header comments, JSON with an
//! embedded `provenance` object, or plain text with the stamp on stderr.
//! Numbers are serialized with 17 significant digits; phases are fractions
//! of a turn.

use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use filiform::algebra::{eta_bracket_table_json, FiliformAlgebra, QuasiAbelianAlgebra};
use filiform::diophantine::{continued_fraction, diophantine_exponent_estimate, CfStop};
use filiform::dynamics::{ArithmeticMode, SkewShiftSystem};
use filiform::error::Error;
use filiform::harness::{
    bound_check, dyadic_schedule, dyadic_weyl_sweep, optimal_rho, optimal_rho_fractions,
    BoundRegime, FitReport, SweepConfig, SweepInput, SweepRow,
};
use filiform::lattice::{
    inj_trajectory, shortest_vector, LatticeBasis, ScalingExponents,
};
use filiform::representation::{
    dist_norm, dist_norm_raw, green_apply, scaling_check, RepForm, SampledFunction,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Provenance stamp over the resolved parameters of the run.
pub struct Provenance {
    pub schema: String,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(schema: &str, resolved: &Value) -> Provenance {
        let mut hasher = Sha256::new();
        hasher.update(schema.as_bytes());
        hasher.update(resolved.to_string().as_bytes());
        let hash = hasher.finalize();
        let hex: String = hash.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Provenance { schema: schema.to_string(), config_hash: hex }
    }

    pub fn csv_header(&self) -> String {
        format!(
            "# filiform {VERSION}\n# schema: {}\n# config: sha256:{}\n",
            self.schema, self.config_hash
        )
    }

    pub fn json_value(&self) -> Value {
        json!({
            "version": VERSION,
            "schema": self.schema,
            "config_sha256": self.config_hash,
        })
    }
}

/// Writes `content` to the output path, or stdout when none is given.
pub fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| Error::invalid(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn parse_mode(s: &str) -> Result<ArithmeticMode, Error> {
    match s {
        "float64" => Ok(ArithmeticMode::Float64),
        "fixed64" => Ok(ArithmeticMode::Fixed64),
        other => Err(Error::invalid(format!("unknown arithmetic mode '{other}'"))),
    }
}

pub fn parse_regime(s: &str, nu0: Option<f64>) -> Result<BoundRegime, Error> {
    match s {
        "strong" => Ok(BoundRegime::Strong),
        "sharp" => Ok(BoundRegime::Sharp),
        "weak" => {
            let nu0 = nu0.ok_or_else(|| Error::invalid("weak regime requires --nu0"))?;
            Ok(BoundRegime::Weak(nu0))
        }
        other => Err(Error::invalid(format!("unknown regime '{other}'"))),
    }
}

/// Sweep input resolution shared by `weyl` and `fit`.
pub struct ResolvedSweep {
    pub cfg: SweepConfig,
    pub k: usize,
    pub alpha: Vec<f64>,
    pub resolved: Value,
}

#[allow(clippy::too_many_arguments)]
pub fn resolve_sweep(
    coeffs: Option<Vec<f64>>,
    alpha: Option<Vec<f64>>,
    s: Option<Vec<f64>>,
    ell: i64,
    n: Option<u64>,
    n_min: u32,
    n_max: u32,
    mode: ArithmeticMode,
    seed: Option<u64>,
) -> Result<ResolvedSweep, Error> {
    let (input, k, alpha_doc) = match (coeffs, alpha) {
        (Some(c), None) => {
            if s.is_some() {
                return Err(Error::invalid(
                    "--s only applies to --alpha input; --coeffs determines the section point",
                ));
            }
            let k = c.len();
            let (a, _) = filiform::dynamics::monomial_to_section(&c)?;
            (SweepInput::Monomial(c), k, a)
        }
        (None, Some(a)) => {
            let k = a.len();
            let s = s.unwrap_or_else(|| vec![0.0; k]);
            if s.len() != k {
                return Err(Error::invalid("--s must have the same dimension as --alpha"));
            }
            (SweepInput::AlphaS { alpha: a.clone(), s }, k, a)
        }
        (Some(_), Some(_)) => {
            return Err(Error::invalid("give either --coeffs or --alpha, not both"))
        }
        (None, None) => return Err(Error::invalid("a sweep needs --coeffs or --alpha")),
    };
    let schedule = match n {
        Some(n) => vec![n],
        None => {
            if n_min > n_max {
                return Err(Error::invalid("--n-min must not exceed --n-max"));
            }
            dyadic_schedule(n_min, n_max)
        }
    };
    let resolved = json!({
        "input": match &input {
            SweepInput::Monomial(c) => json!({"coeffs": c}),
            SweepInput::AlphaS { alpha, s } => json!({"alpha": alpha, "s": s}),
        },
        "ell": ell,
        "schedule": schedule,
        "mode": format!("{mode:?}"),
        "seed": seed,
    });
    Ok(ResolvedSweep {
        cfg: SweepConfig { input, ell, schedule, mode, seed },
        k,
        alpha: alpha_doc,
        resolved,
    })
}

pub fn weyl_csv(rows: &[SweepRow], degree: usize, provenance: &Provenance) -> String {
    let mut out = provenance.csv_header();
    out.push_str(&format!("# degree: {degree}\n"));
    out.push_str("N,re,im,abs,log2_N,log2_abs\n");
    for r in rows {
        let a = r.abs();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            fmt17(r.re),
            fmt17(r.im),
            fmt17(a),
            fmt17((r.n as f64).log2()),
            fmt17(a.log2()),
        ));
    }
    out
}

pub fn run_weyl(rs: ResolvedSweep, out: &Option<PathBuf>) -> Result<(), Error> {
    let rows = dyadic_weyl_sweep(&rs.cfg)?;
    let prov = Provenance::new("weyl-sweep/1", &rs.resolved);
    emit(out, &weyl_csv(&rows, rs.k, &prov))
}

fn fit_json(k: usize, alpha: &[f64], regime_name: &str, fit: &FitReport, seed: Option<u64>) -> Value {
    json!({
        "k": k,
        "alpha": alpha,
        "seed": seed,
        "regime": regime_name,
        "fit": { "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2 },
        "bound": {
            "power": fit.power,
            "log_power": fit.log_power,
            "max_ratio": fit.max_ratio,
            "verdict": fit.verdict,
            "envelope": fit.bound_desc,
        },
    })
}

#[allow(clippy::too_many_arguments)]
pub fn run_fit(
    rs: ResolvedSweep,
    regime_name: &str,
    regime: BoundRegime,
    eps: f64,
    seeds: Option<Vec<u64>>,
    threads: usize,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let prov = Provenance::new("fit-report/1", &rs.resolved);
    let report = match seeds {
        None => {
            let rows = dyadic_weyl_sweep(&rs.cfg)?;
            let fit = bound_check(&rows, rs.k, regime, eps)?;
            let mut v = fit_json(rs.k, &rs.alpha, regime_name, &fit, rs.cfg.seed);
            v["provenance"] = prov.json_value();
            v
        }
        Some(seeds) => {
            // independent configurations run concurrently; output order is
            // the seed order regardless of scheduling
            let mut slots: Vec<Option<Result<FitReport, Error>>> = Vec::new();
            slots.resize_with(seeds.len(), || None);
            let chunk = threads.max(1);
            for batch in (0..seeds.len()).collect::<Vec<_>>().chunks(chunk) {
                std::thread::scope(|scope| {
                    let mut handles = Vec::new();
                    for &idx in batch {
                        let cfg = SweepConfig { seed: Some(seeds[idx]), ..rs.cfg.clone() };
                        let k = rs.k;
                        handles.push((
                            idx,
                            scope.spawn(move || {
                                dyadic_weyl_sweep(&cfg)
                                    .and_then(|rows| bound_check(&rows, k, regime, eps))
                            }),
                        ));
                    }
                    for (idx, h) in handles {
                        slots[idx] = Some(h.join().expect("sweep thread panicked"));
                    }
                });
            }
            let mut reports = Vec::new();
            for (i, slot) in slots.into_iter().enumerate() {
                let fit = slot.expect("all slots filled")?;
                reports.push(fit_json(rs.k, &rs.alpha, regime_name, &fit, Some(seeds[i])));
            }
            json!({ "provenance": prov.json_value(), "reports": reports })
        }
    };
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))
}

#[allow(clippy::too_many_arguments)]
pub fn run_orbit(
    alpha: Vec<f64>,
    s: Option<Vec<f64>>,
    n: u64,
    stride: u64,
    mode: ArithmeticMode,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let k = alpha.len();
    let s = s.unwrap_or_else(|| vec![0.0; k]);
    let resolved = json!({"alpha": alpha, "s": s, "n": n, "stride": stride, "mode": format!("{mode:?}")});
    let prov = Provenance::new("orbit/1", &resolved);
    let sys = SkewShiftSystem::new(alpha, mode)?;
    let mut orbit = sys.orbit(&s)?;
    let mut csv = prov.csv_header();
    csv.push_str("n");
    for i in 1..=k {
        csv.push_str(&format!(",s{i}"));
    }
    csv.push('\n');
    let stride = stride.max(1);
    let mut m = 0u64;
    loop {
        let point = orbit.current();
        csv.push_str(&m.to_string());
        for c in point {
            csv.push(',');
            csv.push_str(&fmt17(c));
        }
        csv.push('\n');
        if m >= n {
            break;
        }
        let step = stride.min(n - m);
        orbit.advance(step);
        m += step;
    }
    emit(out, &csv)
}

pub fn resolve_rho(rho: Option<Vec<f64>>, k: Option<usize>) -> Result<ScalingExponents, Error> {
    match (rho, k) {
        (Some(r), maybe_k) => {
            if let Some(k) = maybe_k {
                if r.len() != k {
                    return Err(Error::invalid("--rho length does not match --k"));
                }
            }
            ScalingExponents::new(r)
        }
        (None, Some(k)) => optimal_rho(k),
        (None, None) => Err(Error::invalid("need --rho or --k (for the optimal exponents)")),
    }
}

pub fn run_lattice_flow(
    alpha: Vec<f64>,
    rho: ScalingExponents,
    t_max: f64,
    t_step: f64,
    summary: bool,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    if t_step <= 0.0 || t_max < t_step {
        return Err(Error::invalid("need 0 < t-step <= t-max"));
    }
    let resolved = json!({"alpha": alpha, "rho": rho.rho(), "t_max": t_max, "t_step": t_step});
    let steps = (t_max / t_step).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * t_step).collect();
    let traj = inj_trajectory(&alpha, &rho, &grid)?;
    if summary {
        let prov = Provenance::new("lattice-flow-summary/1", &resolved);
        let v = json!({
            "provenance": prov.json_value(),
            "delta_hat": traj.delta_hat,
            "c_hat": traj.c_hat,
            "min_inj": traj.min_inj(),
            "grid": { "t_max": t_max, "t_step": t_step, "points": grid.len() },
        });
        emit(out, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
    } else {
        let prov = Provenance::new("lattice-flow/1", &resolved);
        let mut csv = prov.csv_header();
        csv.push_str("t,inj,log_inj\n");
        for (t, inj) in traj.t.iter().zip(&traj.inj) {
            csv.push_str(&format!("{},{},{}\n", fmt17(*t), fmt17(*inj), fmt17(inj.ln())));
        }
        emit(out, &csv)
    }
}

pub fn parse_basis(text: &str) -> Result<LatticeBasis, Error> {
    let cols: Result<Vec<Vec<f64>>, Error> = text
        .split(';')
        .map(|col| {
            col.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::invalid(format!("bad basis entry '{v}': {e}")))
                })
                .collect()
        })
        .collect();
    LatticeBasis::new(cols?)
}

pub fn run_inj(basis: LatticeBasis, resolved: Value, out: &Option<PathBuf>) -> Result<(), Error> {
    let prov = Provenance::new("inj/1", &resolved);
    let (v, len) = shortest_vector(&basis)?;
    let report = json!({
        "provenance": prov.json_value(),
        "dim": basis.dim(),
        "inj": len / 2.0,
        "systole": len,
        "shortest_vector": v,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))
}

pub fn run_dist_norm(
    k: usize,
    lambda: Vec<f64>,
    sigma: f64,
    rho: Option<ScalingExponents>,
    t_grid: Vec<f64>,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let resolved = json!({
        "k": k, "lambda": lambda, "sigma": sigma,
        "rho": rho.as_ref().map(|r| r.rho().to_vec()), "t_grid": t_grid,
    });
    let prov = Provenance::new("dist-norm/1", &resolved);
    let form = RepForm::new(k, lambda)?;
    let mut norms = Vec::with_capacity(t_grid.len());
    for &t in &t_grid {
        if t != 0.0 && rho.is_none() {
            return Err(Error::invalid("a nonzero t grid requires --rho or --optimal"));
        }
        norms.push(dist_norm(&form, sigma, t, rho.as_ref())?);
    }
    let rate = if t_grid.len() >= 2 {
        let logs: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
        let mean_t = t_grid.iter().sum::<f64>() / t_grid.len() as f64;
        let mean_l = logs.iter().sum::<f64>() / logs.len() as f64;
        let sxx: f64 = t_grid.iter().map(|t| (t - mean_t) * (t - mean_t)).sum();
        let sxy: f64 =
            t_grid.iter().zip(&logs).map(|(t, l)| (t - mean_t) * (l - mean_l)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    let mut csv = prov.csv_header();
    csv.push_str("t,sigma,norm,rate_fit\n");
    for (t, n) in t_grid.iter().zip(&norms) {
        csv.push_str(&format!("{},{},{},{}\n", fmt17(*t), fmt17(sigma), fmt17(*n), fmt17(rate)));
    }
    emit(out, &csv)
}

pub fn run_dist_norm_raw(
    poly_desc: Vec<f64>,
    sigma: f64,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let resolved = json!({"raw_poly": poly_desc, "sigma": sigma});
    let prov = Provenance::new("dist-norm-raw/1", &resolved);
    let norm = dist_norm_raw(&poly_desc, sigma)?;
    let v = json!({
        "provenance": prov.json_value(),
        "sigma": sigma,
        "poly": poly_desc,
        "norm": norm,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
}

pub fn run_scaling(
    k: usize,
    lambda: Vec<f64>,
    sigma: f64,
    rho: ScalingExponents,
    t_grid: Vec<f64>,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let resolved = json!({
        "k": k, "lambda": lambda, "sigma": sigma, "rho": rho.rho(), "t_grid": t_grid,
    });
    let prov = Provenance::new("scaling/1", &resolved);
    let form = RepForm::new(k, lambda)?;
    let fit = scaling_check(&form, sigma, &rho, &t_grid)?;
    let theoretical = rho.rho()[0] / (2.0 * (k as f64 - 1.0));
    let v = json!({
        "provenance": prov.json_value(),
        "rate": fit.rate,
        "theoretical_rate": theoretical,
        "t": fit.t,
        "norms": fit.norms,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
}

pub fn run_green(
    function: &str,
    half_width: f64,
    samples: usize,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let resolved = json!({"function": function, "half_width": half_width, "samples": samples});
    let prov = Provenance::new("green/1", &resolved);
    let f: Box<dyn Fn(f64) -> f64> = match function {
        "gaussian-derivative" => Box::new(|x: f64| -2.0 * x * (-x * x).exp()),
        "x-gaussian" => Box::new(|x: f64| x * (-x * x).exp()),
        "gaussian" => Box::new(|x: f64| (-x * x).exp()),
        other => return Err(Error::invalid(format!("unknown test function '{other}'"))),
    };
    let data = SampledFunction::sample(f, half_width, samples)?;
    let u = green_apply(&data)?;
    let mut sup = 0.0f64;
    for i in 1..samples {
        let deriv = (u.values[i + 1] - u.values[i - 1]) / (2.0 * u.dx);
        sup = sup.max((deriv - data.values[i]).abs());
    }
    let v = json!({
        "provenance": prov.json_value(),
        "function": function,
        "sup_residual": sup,
        "obstruction": 0.0,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
}

pub fn run_cf(x: f64, depth: usize, qmax: u64, out: &Option<PathBuf>) -> Result<(), Error> {
    let resolved = json!({"x": x, "depth": depth, "qmax": qmax});
    let prov = Provenance::new("cf/1", &resolved);
    let cf = continued_fraction(x, depth)?;
    let nu = diophantine_exponent_estimate(x, qmax)?;
    let v = json!({
        "provenance": prov.json_value(),
        "x": x,
        "quotients": cf.quotients,
        "convergents": cf.convergents.iter().map(|(p, q)| json!([p.to_string(), q.to_string()])).collect::<Vec<_>>(),
        "nu_hat": if nu.is_finite() { Value::from(nu) } else { Value::Null },
        "rational": cf.is_rational(),
        "stop": match cf.stop {
            CfStop::Depth => "depth",
            CfStop::RationalDetected => "rational",
            CfStop::PrecisionExhausted => "precision",
        },
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
}

pub fn run_algebra(k: usize, basis: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    let resolved = json!({"k": k, "basis": basis});
    let prov = Provenance::new("algebra/1", &resolved);
    let mut table = match basis {
        "canonical" => FiliformAlgebra::new(k)?.bracket_table_json(),
        "eta" => eta_bracket_table_json(k)?,
        "cover" => QuasiAbelianAlgebra::new(k)?.bracket_table_json(),
        other => return Err(Error::invalid(format!("unknown basis '{other}'"))),
    };
    table["provenance"] = prov.json_value();
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&table).unwrap()))
}

pub fn run_rho(k: usize, out: &Option<PathBuf>) -> Result<(), Error> {
    let resolved = json!({"k": k});
    let prov = Provenance::new("rho/1", &resolved);
    let fractions = optimal_rho_fractions(k)?;
    let text: Vec<String> = fractions
        .iter()
        .map(|(num, den)| if *den == 1 { num.to_string() } else { format!("{num}/{den}") })
        .collect();
    eprintln!("filiform {VERSION} schema={} config=sha256:{}", prov.schema, prov.config_hash);
    emit(out, &format!("{}\n", text.join(",")))
}
