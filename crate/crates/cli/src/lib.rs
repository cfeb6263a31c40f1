//! `symavg` command-line front end.

pub mod config;
pub mod output;
mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use symavg_core::averaging::{
    certify, certify_fourier, minimize_scheme, mix_seed, sample_size_bound, Certifier,
    MinimizeOptions, SchemeJson,
};
use symavg_core::fourier::{coefficients_json, fourier};
use symavg_core::separation::{self, f2_rank, linear_fit, separation_table, SEPARATION_CSV_HEADER};
use symavg_core::{irreps_of, AveragingScheme, Error, Group, IrrepTable, Representation, Result};
use symavg_experiments::figure1::{self, Figure1Config};
use symavg_experiments::mlp::{self, MlpConfig};
use symavg_experiments::regression::{self, RegressionConfig, RepChoice};

use output::Artifacts;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_SEARCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "symavg",
    version,
    about = "Averaging schemes over finite groups"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Common {
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "symavg-out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `key = value` file; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Do not echo the result JSON on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Command {
    /// Group order, conjugacy classes and optional table export.
    Group {
        #[arg(long)]
        group: String,
        /// Also write the multiplication table.
        #[arg(long)]
        table: bool,
    },
    /// Irreducible representations and the character table.
    Irreps {
        #[arg(long)]
        group: String,
    },
    /// Weak and strong precision of a scheme on a representation.
    Certify {
        #[arg(long)]
        group: String,
        /// regular, permutation, trivial, sign, irrep:<label> or file:<path>
        #[arg(long, default_value = "regular")]
        rep: String,
        /// uniform, delta:<g>, support:<g,..>, random:<n> or file:<path>
        #[arg(long, default_value = "uniform")]
        scheme: String,
        /// auto, projector or fourier
        #[arg(long, default_value = "auto")]
        method: String,
        /// Also write the Fourier coefficients of the scheme.
        #[arg(long)]
        coefficients: bool,
    },
    /// Random scheme of the size given by the sampling bound.
    Sample {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "regular")]
        rep: String,
    },
    /// Search for a small scheme certifying a target precision.
    Minimize {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "regular")]
        rep: String,
        #[arg(long, default_value_t = 200)]
        swap_budget: usize,
        /// Fail instead of returning the uniform scheme.
        #[arg(long)]
        no_fallback: bool,
    },
    /// Eigenvalue profile and the bound K.
    Kbound {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "permutation")]
        rep: String,
    },
    /// Exact versus approximate averaging cost across a family.
    Separation {
        #[arg(long, default_value = "signflip")]
        family: String,
        #[arg(long, default_value_t = 2)]
        min: usize,
        #[arg(long, default_value_t = 9)]
        max: usize,
        /// Explicit comma-separated group specs; overrides the family range.
        #[arg(long)]
        groups: Option<String>,
        #[arg(long, default_value_t = 200)]
        swap_budget: usize,
    },
    /// Generation test and weak precision for a sign-flip support.
    Lowerbound {
        #[arg(long)]
        d: usize,
        /// Comma-separated element indices (bit masks).
        #[arg(long)]
        support: String,
        /// Comma-separated weights; uniform when omitted.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Rotation-averaging demo on a planar grid.
    Figure1 {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Comma-separated subset sizes; defaults to 1,5,N.
        #[arg(long)]
        sizes: Option<String>,
    },
    /// Monte Carlo risk of symmetrized least squares.
    Regress {
        #[arg(long, default_value = "signflip:2")]
        group: String,
        /// regular or permutation
        #[arg(long, default_value = "regular")]
        rep: String,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 400)]
        n: usize,
        /// Use the uniform scheme for the weak estimator.
        #[arg(long)]
        uniform: bool,
    },
    /// Train a small network and evaluate subset averaging.
    Mlp {
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, default_value_t = 50_000)]
        n_train: usize,
        #[arg(long, default_value_t = 50_000)]
        n_test: usize,
        #[arg(long, default_value_t = 128)]
        h1: usize,
        #[arg(long, default_value_t = 64)]
        h2: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f32,
        #[arg(long, default_value_t = 256)]
        batch: usize,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long, default_value_t = 5)]
        curve_k: usize,
        /// Curve stride in epochs; 0 disables the curve.
        #[arg(long, default_value_t = 1)]
        curve_every: usize,
        /// Test points used for the curve; 0 means all.
        #[arg(long, default_value_t = 0)]
        curve_points: usize,
    },
    /// Run the invariant suite on small built-in groups.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Group { .. } => "group",
            Command::Irreps { .. } => "irreps",
            Command::Certify { .. } => "certify",
            Command::Sample { .. } => "sample",
            Command::Minimize { .. } => "minimize",
            Command::Kbound { .. } => "kbound",
            Command::Separation { .. } => "separation",
            Command::Lowerbound { .. } => "lowerbound",
            Command::Figure1 { .. } => "figure1",
            Command::Regress { .. } => "regress",
            Command::Mlp { .. } => "mlp",
            Command::Selftest => "selftest",
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) | Error::DegenerateRep | Error::TrainingFailure { .. } => {
            EXIT_NUMERICAL
        }
        Error::SearchFailure(_) => EXIT_SEARCH,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match config::merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("symavg: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("symavg: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Usage(e.to_string()))?;
    pool.install(|| {
        let mut art = Artifacts::new(&cli.common.out, cli.command.name())?;
        let (result, code) = dispatch(cli, &mut art)?;
        let config = json!({ "common": &cli.common, "command": &cli.command });
        art.finish(&result, config, cli.common.seed)?;
        if !cli.common.quiet {
            print!("{}", output::to_json_string(&result)?);
        }
        Ok(code)
    })
}

fn load_group(spec: &str) -> Result<Arc<Group>> {
    Ok(Arc::new(Group::from_spec(spec)?))
}

/// Irrep table for built-in families, `None` for custom groups.
fn maybe_table(group: &Arc<Group>) -> Result<Option<IrrepTable>> {
    match irreps_of(group) {
        Ok(t) => Ok(Some(t)),
        Err(Error::Capability(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn build_rep(
    group: &Arc<Group>,
    spec: &str,
    table: Option<&IrrepTable>,
) -> Result<Representation> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "regular" => Representation::regular(group.clone()),
        "permutation" => Representation::permutation(group.clone()),
        "trivial" => Ok(Representation::trivial(group.clone())),
        "sign" => Representation::sign_action(group.clone()),
        "irrep" => {
            let table =
                table.ok_or_else(|| Error::Capability("no irrep table for this group".into()))?;
            let i = table
                .labels()
                .iter()
                .position(|l| *l == arg)
                .ok_or_else(|| {
                    Error::Usage(format!(
                        "unknown irrep `{arg}`; have {}",
                        table.labels().join(" ")
                    ))
                })?;
            Ok(table.irreps()[i].clone())
        }
        "file" => Representation::from_text(group.clone(), &std::fs::read_to_string(arg)?),
        _ => Err(Error::Usage(format!("unknown representation `{spec}`"))),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad {what} `{s}`")))
        })
        .collect()
}

pub fn build_scheme(group: &Arc<Group>, spec: &str, seed: u64) -> Result<AveragingScheme> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "uniform" => Ok(AveragingScheme::uniform(group.clone())),
        "delta" => AveragingScheme::delta(
            group.clone(),
            parse_list::<usize>(arg, "element")?
                .first()
                .copied()
                .unwrap_or(0),
        ),
        "support" => {
            AveragingScheme::uniform_on(group.clone(), &parse_list::<usize>(arg, "element")?)
        }
        "random" => {
            let n = arg
                .parse()
                .map_err(|_| Error::Usage(format!("bad draw count `{arg}`")))?;
            AveragingScheme::random(group.clone(), n, seed)
        }
        "file" => {
            let json: SchemeJson = serde_json::from_str(&std::fs::read_to_string(arg)?)?;
            AveragingScheme::from_json(group.clone(), &json)
        }
        _ => Err(Error::Usage(format!("unknown scheme `{spec}`"))),
    }
}

/// Fourier certifier restricted to the irreps present when a table is
/// available, projector path otherwise.
fn certifier<'a>(rho: &'a Representation, table: Option<&'a IrrepTable>) -> Result<Certifier<'a>> {
    Ok(match table {
        Some(t) => Certifier::Fourier {
            table: t,
            mult: Some(t.decompose(rho)?),
        },
        None => Certifier::Projector(rho),
    })
}

fn scheme_value(scheme: &AveragingScheme) -> Value {
    serde_json::to_value(scheme.to_json()).expect("scheme serializes")
}

fn dispatch(cli: &Cli, art: &mut Artifacts) -> Result<(Value, i32)> {
    let c = &cli.common;
    let seed = c.seed;
    let value = match &cli.command {
        Command::Group { group, table } => {
            let g = load_group(group)?;
            g.check_axioms()?;
            let classes = g.conjugacy_classes();
            if *table {
                art.write("group.txt", &g.to_text()?)?;
            }
            json!({
                "group": group,
                "family": g.family().keyword(),
                "order": g.order(),
                "abelian": g.is_abelian(),
                "generators": g.generators().iter().map(|&x| g.label(x)).collect::<Vec<_>>(),
                "classes": classes.representatives.iter().zip(classes.sizes()).map(|(&r, s)| json!({
                    "representative": g.label(r),
                    "size": s,
                })).collect::<Vec<_>>(),
            })
        }
        Command::Irreps { group } => {
            let g = load_group(group)?;
            let t = irreps_of(&g)?;
            art.write("character_table.csv", &t.character_table_csv())?;
            let dims = t.dims();
            json!({
                "group": group,
                "order": g.order(),
                "labels": t.labels(),
                "dims": dims,
                "sum_of_squares": dims.iter().map(|d| d * d).sum::<usize>(),
                "orthogonality_residual": t.orthogonality_residual(),
            })
        }
        Command::Certify {
            group,
            rep,
            scheme,
            method,
            coefficients,
        } => {
            let g = load_group(group)?;
            let table = maybe_table(&g)?;
            let rho = build_rep(&g, rep, table.as_ref())?;
            let s = build_scheme(&g, scheme, seed)?;
            let use_fourier = match method.as_str() {
                "projector" => false,
                "fourier" => {
                    if table.is_none() {
                        return Err(Error::Capability(
                            "the Fourier path needs an irrep table".into(),
                        ));
                    }
                    true
                }
                "auto" => table.is_some() && rho.dim() > 128,
                other => return Err(Error::Usage(format!("unknown method `{other}`"))),
            };
            let report = match (&table, use_fourier) {
                (Some(t), true) => certify_fourier(&s, t, Some(&t.decompose(&rho)?), true)?,
                _ => certify(&s, &rho)?,
            };
            if *coefficients {
                let t = table
                    .as_ref()
                    .ok_or_else(|| Error::Capability("no irrep table for this group".into()))?;
                art.write_json(
                    "coefficients.json",
                    &coefficients_json(&fourier(&s.signal(), t)?, t),
                )?;
            }
            json!({
                "group": group,
                "rep": rep,
                "dim": rho.dim(),
                "scheme_size": s.size(),
                "report": report,
            })
        }
        Command::Sample { group, rep } => {
            let eps = c.eps.unwrap_or(0.5);
            let delta = c.delta.unwrap_or(0.1);
            let trials = c.trials.unwrap_or(1).max(1);
            let g = load_group(group)?;
            let table = maybe_table(&g)?;
            let rho = build_rep(&g, rep, table.as_ref())?;
            let cert = certifier(&rho, table.as_ref())?;
            let n = sample_size_bound(g.order(), eps, delta)?;
            let draws: Vec<(AveragingScheme, f64)> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let s = AveragingScheme::random(g.clone(), n, mix_seed(seed, t, 0x5a))?;
                    let e = cert.weak(&s)?;
                    Ok((s, e))
                })
                .collect::<Result<_>>()?;
            let eps_values: Vec<f64> = draws.iter().map(|d| d.1).collect();
            let successes = eps_values.iter().filter(|&&e| e <= eps).count();
            art.write_json("scheme.json", &draws[0].0.to_json())?;
            json!({
                "group": group,
                "rep": rep,
                "n": n,
                "eps": eps,
                "delta": delta,
                "trials": trials,
                "successes": successes,
                "success_fraction": successes as f64 / trials as f64,
                "eps_weak": eps_values,
                "scheme": scheme_value(&draws[0].0),
            })
        }
        Command::Minimize {
            group,
            rep,
            swap_budget,
            no_fallback,
        } => {
            let eps = c.eps.unwrap_or(0.5);
            let g = load_group(group)?;
            let table = maybe_table(&g)?;
            let rho = build_rep(&g, rep, table.as_ref())?;
            let cert = certifier(&rho, table.as_ref())?;
            let opts = MinimizeOptions {
                trials: c.trials.unwrap_or(MinimizeOptions::default().trials),
                swap_budget: *swap_budget,
                seed,
                fallback: !no_fallback,
            };
            let out = minimize_scheme(&cert, eps, &opts)?;
            art.write_json("scheme.json", &out.scheme.to_json())?;
            let v = json!({
                "group": group,
                "rep": rep,
                "eps_target": eps,
                "size": out.scheme.size(),
                "eps_weak": out.eps_weak,
                "feasible": out.feasible,
                "used_fallback": out.used_fallback,
                "trace": out.trace,
                "scheme": scheme_value(&out.scheme),
            });
            if !out.feasible {
                eprintln!("symavg: search failure: no scheme found with eps_weak <= {eps}");
                return Ok((v, EXIT_SEARCH));
            }
            v
        }
        Command::Kbound { group, rep } => {
            let g = load_group(group)?;
            let table = maybe_table(&g)?;
            let rho = build_rep(&g, rep, table.as_ref())?;
            let profile = rho.eigen_profile()?;
            let k = rho.k_bound()?;
            json!({
                "group": group,
                "rep": rep,
                "order": g.order(),
                "dim": rho.dim(),
                "K": k,
                "eigenvalues": profile.lambdas.iter().zip(&profile.max_mult).map(|(l, m)| json!({
                    "root": format!("{}/{}", l.num, l.den),
                    "max_mult": m,
                })).collect::<Vec<_>>(),
                "sum_max_mult": profile.max_mult.iter().sum::<usize>(),
            })
        }
        Command::Separation {
            family,
            min,
            max,
            groups,
            swap_budget,
        } => {
            let eps = c.eps.unwrap_or(0.5);
            let specs: Vec<String> = match groups {
                Some(list) => parse_list(list, "group spec")?,
                None => {
                    if min > max {
                        return Err(Error::Usage(format!("empty range {min}..={max}")));
                    }
                    (*min..=*max).map(|p| format!("{family}:{p}")).collect()
                }
            };
            let opts = MinimizeOptions {
                trials: c.trials.unwrap_or(MinimizeOptions::default().trials),
                swap_budget: *swap_budget,
                seed,
                fallback: true,
            };
            let rows = separation_table(&specs, eps, &opts)?;
            let mut csv = format!("{SEPARATION_CSV_HEADER}\n");
            for r in &rows {
                csv.push_str(&r.csv_line());
                csv.push('\n');
            }
            art.write("separation.csv", &csv)?;
            let xs: Vec<f64> = (0..rows.len()).map(|i| i as f64 + *min as f64).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.approx_cost as f64).collect();
            let fit = if groups.is_none() && rows.len() >= 2 {
                let (intercept, slope, r2) = linear_fit(&xs, &ys);
                json!({ "intercept": intercept, "slope": slope, "r2": r2 })
            } else {
                Value::Null
            };
            json!({ "eps": eps, "rows": rows, "approx_cost_fit": fit })
        }
        Command::Lowerbound {
            d,
            support,
            weights,
        } => {
            let support: Vec<usize> = parse_list(support, "element")?;
            if support.is_empty() {
                return Err(Error::Usage("support is empty".into()));
            }
            let weights: Vec<f64> = match weights {
                Some(w) => parse_list(w, "weight")?,
                None => vec![1.0 / support.len() as f64; support.len()],
            };
            let r = separation::sign_flip_lower_bound_check(*d, &support, &weights)?;
            json!({
                "d": d,
                "support": support,
                "weights": weights,
                "f2_rank": f2_rank(&support, *d),
                "generates": r.generates,
                "eps_weak_on_regular": r.eps_weak_on_regular,
            })
        }
        Command::Figure1 { n, grid, sizes } => {
            let subset_sizes = match sizes {
                Some(s) => parse_list(s, "subset size")?,
                None => vec![1.min(*n), 5.min(*n), *n],
            };
            let cfg = Figure1Config {
                n: *n,
                grid: *grid,
                subset_sizes,
                seed,
            };
            let r = figure1::figure1_demo(&cfg)?;
            for (s, avg) in r.summary.iter().zip(&r.averages) {
                art.write(
                    &format!("figure1_m{}.csv", s.subset_size),
                    &figure1::grid_csv(&r.points, avg),
                )?;
            }
            json!({
                "field": figure1::FIELD_DESCRIPTION,
                "config": cfg,
                "summary": r.summary,
            })
        }
        Command::Regress {
            group,
            rep,
            sigma,
            n,
            uniform,
        } => {
            let rep = match rep.as_str() {
                "regular" => RepChoice::Regular,
                "permutation" => RepChoice::Permutation,
                other => return Err(Error::Usage(format!("unknown representation `{other}`"))),
            };
            let cfg = RegressionConfig {
                group: group.clone(),
                rep,
                sigma: *sigma,
                n: *n,
                trials: c.trials.unwrap_or(2000),
                eps: if *uniform {
                    None
                } else {
                    Some(c.eps.unwrap_or(0.05))
                },
                seed,
            };
            let r = regression::regression_risk(&cfg)?;
            art.write("regression.csv", &r.csv())?;
            json!({ "config": cfg, "report": r })
        }
        Command::Mlp {
            d,
            n_train,
            n_test,
            h1,
            h2,
            lr,
            batch,
            epochs,
            k_max,
            curve_k,
            curve_every,
            curve_points,
        } => {
            let cfg = MlpConfig {
                d: *d,
                n_train: *n_train,
                n_test: *n_test,
                widths: (*h1, *h2),
                lr: *lr,
                batch: *batch,
                epochs: *epochs,
                k_max: *k_max,
                curve_k: *curve_k,
                curve_every: *curve_every,
                curve_points: *curve_points,
                seed,
            };
            let r = mlp::mlp_experiment(&cfg)?;
            art.write("mlp_subsets.csv", &r.subset_csv())?;
            art.write("mlp_curve.csv", &r.curve_csv())?;
            json!({
                "config": cfg,
                "initialization": "weights and biases uniform in ±1/sqrt(fan_in)",
                "subset_losses": r.subset_losses.iter().map(|(s, l)| json!({"subset_size": s, "test_loss": l})).collect::<Vec<_>>(),
                "patterns": r.patterns,
            })
        }
        Command::Selftest => {
            let checks = selftest::run_all(seed);
            let failed = checks.iter().filter(|c| !c.pass).count();
            let v = json!({ "checks": checks, "failed": failed });
            return Ok((v, if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL }));
        }
    };
    Ok((value, EXIT_OK))
}
