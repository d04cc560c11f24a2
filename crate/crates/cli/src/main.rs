//! `ubp`: backtests, hindsight solves, bound tables and the hot-stock example.
//!
//! Exit codes: 0 ok, 2 input error, 3 ruin, 4 hindsight solver did not converge.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use ubp_core::hotstock::{hotstock_closed_forms, hotstock_trajectory, trajectory_csv};
use ubp_core::strategy::multi_index;
use ubp_core::{
    best_in_hindsight, excess_growth_bound, log_ratio_lower_bound, parse_history,
    run_universal_backtest, BacktestConfig, EstimatorChoice, HindsightConfig, History, PriorSpec,
    QuadratureConfig,
};

const EXIT_INPUT: u8 = 2;
const EXIT_RUIN: u8 = 3;
const EXIT_NO_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "ubp",
    version,
    about = "Universal H-linear portfolio selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the universal portfolio over a return history.
    Backtest(BacktestArgs),
    /// Solve for the best H-linear strategy in hindsight.
    Hindsight(HindsightArgs),
    /// Tabulate the uniform competitive-ratio lower bound.
    Bounds(BoundsArgs),
    /// Built-in demonstrations.
    #[command(subcommand)]
    Example(Example),
}

#[derive(Subcommand)]
enum Example {
    /// Stock that doubles then halves each period, against cash.
    HotStock {
        #[arg(long, default_value_t = 12)]
        periods: usize,
        /// Trajectory file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    MonteCarlo,
    Quadrature,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
}

#[derive(Args)]
struct BacktestArgs {
    /// CSV of gross returns, one half-period per row, header of asset names.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    prior_alpha: f64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Quadrature needs the uniform prior and m^H ≤ 4.
    #[arg(long, value_enum, default_value_t = Method::MonteCarlo)]
    method: Method,
    #[command(flatten)]
    solver: SolverArgs,
    /// Record file; stdout when omitted (summary lines then go to stderr).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct HindsightArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    /// Asset counts: `2`, `2,3` or `2..4` (inclusive).
    #[arg(long, default_value = "2", value_parser = parse_range)]
    assets: Values,
    /// Strategy orders, same syntax.
    #[arg(long, default_value = "2", value_parser = parse_range)]
    order: Values,
    /// Horizons, same syntax.
    #[arg(long, default_value = "0..10", value_parser = parse_range)]
    periods: Values,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    prior_alpha: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be positive and finite".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Clone)]
struct Values(Vec<u64>);

fn parse_range(s: &str) -> Result<Values, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|e| format!("{part}: {e}"))?;
            let b: u64 = b
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|e| format!("{part}: {e}"))?;
            if a > b {
                return Err(format!("{part}: empty range"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|e| format!("{part}: {e}"))?);
        }
    }
    Ok(Values(out))
}

/// An error paired with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<ubp_core::Error>() {
            Some(ubp_core::Error::UniversalRuin { .. }) => EXIT_RUIN,
            _ => EXIT_INPUT,
        };
        Self { code, error }
    }
}

fn no_convergence(msg: String) -> Failure {
    Failure {
        code: EXIT_NO_CONVERGENCE,
        error: anyhow::anyhow!(msg),
    }
}

fn read_history(path: &PathBuf, order: usize) -> anyhow::Result<History> {
    let raw =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_history(&raw, order).with_context(|| format!("parsing {}", path.display()))
}

/// Writes `doc` to `path`, or stdout when there is none.
fn emit(path: Option<&PathBuf>, doc: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, doc).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.1}"))
}

fn backtest(args: &BacktestArgs) -> Result<(), Failure> {
    let order = args.order as usize;
    let h = read_history(&args.input, order)?;
    let estimator = match args.method {
        Method::MonteCarlo => EstimatorChoice::MonteCarlo {
            samples: args.samples as usize,
            seed: args.seed,
        },
        Method::Quadrature => EstimatorChoice::Quadrature(QuadratureConfig::default()),
    };
    let cfg = BacktestConfig {
        order,
        prior_alpha: args.prior_alpha,
        estimator,
        hindsight: HindsightConfig {
            tol: args.solver.tol,
            max_iter: args.solver.max_iter,
        },
    };
    let rec = run_universal_backtest(&h, &cfg).map_err(anyhow::Error::from)?;

    let mut summary = format!(
        "{:>5} {:>14} {:>14} {:>14} {:>14} {:>10}\n",
        "t", "log_W", "log_D", "log_R", "log_bound", "ESS"
    );
    for p in &rec.periods {
        let _ = writeln!(
            summary,
            "{:>5} {:>14.6} {:>14.6} {:>14.6} {:>14.6} {:>10}",
            p.t,
            p.universal_log_wealth,
            p.hindsight_log_wealth,
            p.competitive_ratio_log,
            p.bound_log,
            fmt_opt(p.ess)
        );
    }
    if args.output.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    let doc = match args.format {
        Format::Json => rec.to_json() + "\n",
        Format::Csv => rec.to_csv(),
    };
    emit(args.output.as_ref(), &doc)?;

    if let Some(p) = rec.periods.iter().find(|p| !p.hindsight_converged) {
        return Err(no_convergence(format!(
            "hindsight solver did not converge at t={} (gap {:e})",
            p.t, p.hindsight_gap
        )));
    }
    Ok(())
}

fn hindsight(args: &HindsightArgs) -> Result<(), Failure> {
    let order = args.order as usize;
    let h = read_history(&args.input, order)?;
    let cfg = HindsightConfig {
        tol: args.solver.tol,
        max_iter: args.solver.max_iter,
    };
    let res = best_in_hindsight(&h, order, &cfg).map_err(anyhow::Error::from)?;
    let doc = match args.format {
        Format::Json => {
            let v = json!({
                "m": h.dim(),
                "H": order,
                "periods": h.complete_periods(),
                "padded": !h.is_complete(),
                "log_wealth": res.log_wealth,
                "strategy": res.strategy,
                "iterations": res.iterations,
                "gap_certificate": res.gap_certificate,
                "converged": res.converged,
            });
            serde_json::to_string_pretty(&v).map_err(anyhow::Error::from)? + "\n"
        }
        Format::Csv => {
            let mut out = String::from("index,weight\n");
            for (flat, w) in res.strategy.weights().iter().enumerate() {
                let idx: Vec<String> = multi_index(flat, h.dim(), order)
                    .iter()
                    .map(|i| (i + 1).to_string())
                    .collect();
                let _ = writeln!(out, "{},{w:?}", idx.join(" "));
            }
            out
        }
    };
    emit(args.output.as_ref(), &doc)?;
    eprintln!(
        "log D = {:.10} after {} iterations, gap {:e}",
        res.log_wealth, res.iterations, res.gap_certificate
    );
    if !res.converged {
        return Err(no_convergence(format!(
            "gap {:e} above tolerance {:e}",
            res.gap_certificate, cfg.tol
        )));
    }
    Ok(())
}

fn bounds(args: &BoundsArgs) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for &m in &args.assets.0 {
        for &order in &args.order.0 {
            if m == 0 || order == 0 {
                return Err(anyhow::anyhow!("asset count and order must be at least 1").into());
            }
            let prior = PriorSpec::dirichlet(args.prior_alpha, m as usize, order as usize)
                .map_err(anyhow::Error::from)?;
            let floor = prior.log_density_floor;
            for &t in &args.periods.0 {
                let log_bound: f64 = log_ratio_lower_bound(m as usize, order as usize, t, floor);
                let excess = excess_growth_bound(m as usize, order as usize, t, floor).ok();
                rows.push((m, order, t, log_bound, excess));
            }
        }
    }
    let doc = match args.format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|&(m, h, t, lb, ex)| {
                    json!({
                        "m": m, "H": h, "T": t,
                        "log_bound": lb, "bound": lb.exp(),
                        "excess_growth_log": ex, "excess_growth": ex.map(f64::exp_m1),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&v).map_err(anyhow::Error::from)? + "\n"
        }
        Format::Csv => {
            let mut out = String::from("m,H,T,log_bound,bound,excess_growth_log,excess_growth\n");
            for (m, h, t, lb, ex) in rows {
                let ex_log = ex.map_or(String::new(), |x| format!("{x:?}"));
                let ex_lin = ex.map_or(String::new(), |x| format!("{:?}", x.exp_m1()));
                let _ = writeln!(out, "{m},{h},{t},{lb:?},{:?},{ex_log},{ex_lin}", lb.exp());
            }
            out
        }
    };
    emit(args.output.as_ref(), &doc)?;
    Ok(())
}

fn hot_stock(periods: usize, output: Option<&PathBuf>, format: Format) -> Result<(), Failure> {
    let r = hotstock_closed_forms(periods);
    let [b11, b12, b21, b22] = r.weights;
    eprintln!("hot stock after t = {periods} periods");
    eprintln!("  universal bilinear wealth  {:.6}", r.universal_wealth);
    eprintln!("  perfect trader wealth      {:.6}", r.hindsight_wealth);
    eprintln!("  best CRP wealth            {:.6}", r.crp_hindsight_wealth);
    eprintln!(
        "  competitive ratio          {:.6e} (log {:.6})",
        r.ratio, r.log_ratio
    );
    eprintln!("  weights b11 b12 b21 b22    {b11:.6} {b12:.6} {b21:.6} {b22:.6}");

    let rows = hotstock_trajectory(periods).map_err(anyhow::Error::from)?;
    let doc = match format {
        Format::Csv => trajectory_csv(&rows),
        Format::Json => {
            serde_json::to_string_pretty(&json!({ "report": r, "trajectory": rows }))
                .map_err(anyhow::Error::from)?
                + "\n"
        }
    };
    emit(output, &doc)?;
    Ok(())
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("UBP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("UBP_THREADS={raw}"))?;
    if n == 0 {
        bail!("UBP_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .map_err(Failure::from)
        .and_then(|()| match &cli.command {
            Command::Backtest(a) => backtest(a),
            Command::Hindsight(a) => hindsight(a),
            Command::Bounds(a) => bounds(a),
            Command::Example(Example::HotStock {
                periods,
                output,
                format,
            }) => hot_stock(*periods, output.as_ref(), *format),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
