//! `anydim` — lower bounds for any-dimensional polynomial problems.

use anydim::graphalg::{canonical_form, GraphBasis, MultiGraph};
use anydim::optimize::{minimize_exhaustive, ExhaustiveCost, ExhaustiveTerm, SolverConfig};
use anydim_cli::{
    check_compatible, dualize_rows, emit_csv, emit_verify_csv, named_cost, parse_cost,
    parse_n_range, read_config, run, verify_identity, verify_tv, verify_w1, CliError, CliResult,
    CsvRow, DomainSpec, ExperimentSpec, Setting, SolverChoice,
};
use clap::{Args, Parser, Subcommand};
use num::rational::BigRational;
use num::One;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "anydim",
    about = "Convergent finite-dimensional lower bounds for any-dimensional polynomial problems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dual cost of an expression at a given dimension.
    Dualize {
        #[arg(long)]
        setting: String,
        /// Cost expression or a named cost (goodman, mfg, bad-quartic,
        /// graph-numbers-example).
        #[arg(long)]
        cost: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the upper bounds u_n and dual lower bounds ℓ_n over a range
    /// of dimensions and emit one CSV row per n.
    Bound(BoundArgs),
    /// Exact verification subcommands (identity | tv | w1).
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// The triangle-density sweep: exact exhaustive bounds.
    Goodman {
        #[arg(long, default_value = "4..7")]
        n_range: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        exact_rational: bool,
        #[arg(long)]
        allow_large: bool,
    },
    /// Two-sided density lower bounds for the triangle-with-pendant graph.
    Ramsey {
        #[arg(long, default_value = "4..7")]
        n_range: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        exact_rational: bool,
        /// Permit the n = 8 scan (2^28 graphs).
        #[arg(long)]
        allow_large: bool,
    },
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    setting: Option<String>,
    #[arg(long)]
    cost: Option<String>,
    /// Single dimension (alternative to --n-range).
    #[arg(long)]
    n: Option<usize>,
    /// Inclusive range, e.g. 4..9.
    #[arg(long)]
    n_range: Option<String>,
    /// box | l1-ball | simplex | matrix-simplex | binary-graphs
    /// (defaults to the setting's natural domain).
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    /// exhaustive | multistart
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    exact_rational: bool,
    #[arg(long)]
    allow_large: bool,
    /// Flat key=value file mirroring these flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Exact dual-cost representation identity on random rational inputs.
    Identity {
        #[arg(long)]
        setting: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact sampling TV distances against the m(m−1)/n bound.
    Tv {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact fiber-sum Wasserstein distances against 4/√n.
    W1 {
        /// Comma-separated list of n values.
        #[arg(long, default_value = "2,4,8,16,32")]
        n_list: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_out(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    })
}

fn resolve_cost(text: &str) -> CliResult<anydim_cli::CostExpr> {
    let resolved = named_cost(text).unwrap_or(text);
    Ok(parse_cost(resolved)?)
}

fn default_domain(setting: Setting, args: &BoundArgs) -> DomainSpec {
    match setting {
        Setting::Means => DomainSpec::Box {
            lo: args.lo.unwrap_or(-1.0),
            hi: args.hi.unwrap_or(1.0),
        },
        Setting::Symfunc => DomainSpec::L1Ball { radius: args.radius.unwrap_or(1.0) },
        Setting::GraphDensity => DomainSpec::BinaryGraphs,
        Setting::GraphNumbers => {
            DomainSpec::MatrixSimplex { weight: args.weight.unwrap_or(2.0) }
        }
    }
}

fn run_bound(mut args: BoundArgs) -> CliResult<()> {
    if let Some(path) = &args.config {
        let file = read_config(path)?;
        let get = |k: &str| file.get(k).cloned();
        args.setting = args.setting.or_else(|| get("setting"));
        args.cost = args.cost.or_else(|| get("cost"));
        args.n_range = args.n_range.or_else(|| get("n_range"));
        args.domain = args.domain.or_else(|| get("domain"));
        let parse_f = |s: Option<String>| s.and_then(|v| v.parse().ok());
        args.radius = args.radius.or_else(|| parse_f(get("radius")));
        args.weight = args.weight.or_else(|| parse_f(get("weight")));
        args.lo = args.lo.or_else(|| parse_f(get("lo")));
        args.hi = args.hi.or_else(|| parse_f(get("hi")));
        args.solver = args.solver.or_else(|| get("solver"));
        args.restarts = args.restarts.or_else(|| get("restarts").and_then(|v| v.parse().ok()));
        args.seed = args.seed.or_else(|| get("seed").and_then(|v| v.parse().ok()));
        if args.out.is_none() {
            args.out = get("out").map(PathBuf::from);
        }
        args.exact_rational =
            args.exact_rational || get("exact_rational").map_or(false, |v| v == "true");
        args.allow_large = args.allow_large || get("allow_large").map_or(false, |v| v == "true");
    }
    let setting = Setting::parse(
        args.setting
            .as_deref()
            .ok_or_else(|| CliError::Invalid("--setting is required".into()))?,
    )?;
    let cost = resolve_cost(
        args.cost
            .as_deref()
            .ok_or_else(|| CliError::Invalid("--cost is required".into()))?,
    )?;
    let (n_lo, n_hi) = match (&args.n, &args.n_range) {
        (Some(n), None) => (*n, *n),
        (None, Some(r)) => parse_n_range(r)?,
        (None, None) => return Err(CliError::Invalid("one of --n or --n-range is required".into())),
        (Some(_), Some(_)) => {
            return Err(CliError::Invalid("--n and --n-range are mutually exclusive".into()))
        }
    };
    let domain = match args.domain.as_deref() {
        None => default_domain(setting, &args),
        Some("box") => DomainSpec::Box {
            lo: args.lo.unwrap_or(-1.0),
            hi: args.hi.unwrap_or(1.0),
        },
        Some("l1-ball") => DomainSpec::L1Ball { radius: args.radius.unwrap_or(1.0) },
        Some("simplex") => DomainSpec::Simplex,
        Some("matrix-simplex") => {
            DomainSpec::MatrixSimplex { weight: args.weight.unwrap_or(2.0) }
        }
        Some("binary-graphs") => DomainSpec::BinaryGraphs,
        Some(other) => return Err(CliError::Invalid(format!("unknown domain '{other}'"))),
    };
    let solver = match args.solver.as_deref() {
        None => {
            if setting == Setting::GraphDensity {
                SolverChoice::Exhaustive
            } else {
                SolverChoice::Multistart
            }
        }
        Some("exhaustive") => SolverChoice::Exhaustive,
        Some("multistart") => SolverChoice::Multistart,
        Some(other) => return Err(CliError::Invalid(format!("unknown solver '{other}'"))),
    };
    let cfg = SolverConfig {
        restarts: args.restarts.unwrap_or(256),
        seed: args.seed.unwrap_or(0),
        ..Default::default()
    };
    let spec = ExperimentSpec {
        setting,
        cost,
        domain,
        n_lo,
        n_hi,
        solver,
        cfg,
        allow_large: args.allow_large,
        exact_rational: args.exact_rational,
    };
    let rows = run(&spec)?;
    emit_csv(&rows, open_out(&args.out)?)
}

fn run_goodman(
    n_range: &str,
    out: &Option<PathBuf>,
    exact: bool,
    allow_large: bool,
) -> CliResult<()> {
    let (lo, hi) = parse_n_range(n_range)?;
    let spec = ExperimentSpec {
        setting: Setting::GraphDensity,
        cost: parse_cost(named_cost("goodman").unwrap())?,
        domain: DomainSpec::BinaryGraphs,
        n_lo: lo,
        n_hi: hi,
        solver: SolverChoice::Exhaustive,
        cfg: SolverConfig::default(),
        allow_large,
        exact_rational: exact,
    };
    let rows = run(&spec)?;
    emit_csv(&rows, open_out(out)?)
}

fn run_ramsey(
    n_range: &str,
    out: &Option<PathBuf>,
    exact: bool,
    allow_large: bool,
) -> CliResult<()> {
    let (lo, hi) = parse_n_range(n_range)?;
    let h = canonical_form(&MultiGraph::triangle_pendant())?;
    let lower_cost = ExhaustiveCost::ramsey(&h);
    let upper_cost = ExhaustiveCost {
        terms: lower_cost
            .terms
            .iter()
            .map(|t| ExhaustiveTerm {
                coeff: BigRational::one(),
                atom: t.atom.clone(),
                basis: GraphBasis::T,
                complement: t.complement,
            })
            .collect(),
    };
    let mut rows = Vec::new();
    for n in lo..=hi {
        let l = minimize_exhaustive(&lower_cost, n, allow_large)?;
        let u = minimize_exhaustive(&upper_cost, n, allow_large)?;
        let fmt = |r: &anydim::optimize::BoundRecord| {
            if exact {
                r.value_exact.clone().unwrap().to_string()
            } else {
                format!("{:.10}", r.value)
            }
        };
        rows.push(CsvRow {
            setting: "graph-density".into(),
            n,
            l_n: fmt(&l),
            l_kind: "exact".into(),
            u_n: fmt(&u),
            u_kind: "exact".into(),
            gap_bound: String::new(),
            seed: 0,
            restarts: 0,
        });
    }
    emit_csv(&rows, open_out(out)?)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Dualize { setting, cost, n, out } => {
            let setting = Setting::parse(&setting)?;
            let cost = resolve_cost(&cost)?;
            let rows = dualize_rows(setting, &cost, n)?;
            let mut w = csv::Writer::from_writer(open_out(&out)?);
            w.write_record(["basis", "atom", "numerator", "denominator"])
                .map_err(CliError::from)?;
            for r in rows {
                w.write_record(&r).map_err(CliError::from)?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Bound(args) => run_bound(args),
        Command::Verify { what } => match what {
            VerifyCommand::Identity { setting, k, n, seed, trials, out } => {
                let setting = Setting::parse(&setting)?;
                // pre-flight the compatibility table for the setting's
                // natural domain so misuse fails loudly
                let dom = match setting {
                    Setting::Means => DomainSpec::Box { lo: -1.0, hi: 1.0 },
                    Setting::Symfunc => DomainSpec::L1Ball { radius: 1.0 },
                    Setting::GraphDensity => DomainSpec::BinaryGraphs,
                    Setting::GraphNumbers => DomainSpec::MatrixSimplex { weight: 2.0 },
                };
                check_compatible(setting, &dom)?;
                let rows = verify_identity(setting, k, n, seed, trials)?;
                let all_pass = rows.iter().all(|r| r.pass);
                emit_verify_csv(&rows, open_out(&out)?)?;
                if !all_pass {
                    return Err(CliError::Invalid("identity verification failed".into()));
                }
                Ok(())
            }
            VerifyCommand::Tv { n, out } => {
                let rows = verify_tv(n)?;
                let all_pass = rows.iter().all(|r| r.pass);
                emit_verify_csv(&rows, open_out(&out)?)?;
                if !all_pass {
                    return Err(CliError::Invalid("tv bound violated".into()));
                }
                Ok(())
            }
            VerifyCommand::W1 { n_list, out } => {
                let ns: Vec<u64> = n_list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| CliError::Invalid(format!("bad n '{s}'")))
                    })
                    .collect::<CliResult<_>>()?;
                let rows = verify_w1(&ns)?;
                let all_pass = rows.iter().all(|r| r.pass);
                emit_verify_csv(&rows, open_out(&out)?)?;
                if !all_pass {
                    return Err(CliError::Invalid("w1 bound violated".into()));
                }
                Ok(())
            }
        },
        Command::Goodman { n_range, out, exact_rational, allow_large } => {
            run_goodman(&n_range, &out, exact_rational, allow_large)
        }
        Command::Ramsey { n_range, out, exact_rational, allow_large } => {
            run_ramsey(&n_range, &out, exact_rational, allow_large)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
