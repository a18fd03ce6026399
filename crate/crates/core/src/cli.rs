//! Command-line front end.
//!
//! Every subcommand writes CSV (with `#` comment lines carrying the full
//! configuration) or JSON. Failures become a JSON error record on stderr and
//! a nonzero exit code; see [`main_with_args`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::fermi::{self, BimodalShape};
use crate::forecast::{self, BirthRateModel, MedianYear, YearRange};
use crate::population::{ratio_to_f64, PopulationTable};
use crate::posterior::{self, AlphaPrior, GeneralOptions, GridSpec, ParameterPrior, RankPrior};
use crate::urn::{self, EnsembleCandidate, RankObservation, UrnEnsemble};

/// Directory holding `fig2_left.txt`, `fig2_centre.txt` and `fig2_right.txt`.
pub const FIXTURE_ENV: &str = "DOOMSDAY_FIXTURES";

const FIG2_NAMES: [&str; 3] = ["fig2_left.txt", "fig2_centre.txt", "fig2_right.txt"];
const FIG2_BUNDLED: [&str; 3] = [
    include_str!("../data/urns/fig2_left.txt"),
    include_str!("../data/urns/fig2_centre.txt"),
    include_str!("../data/urns/fig2_right.txt"),
];

#[derive(Debug, Parser)]
#[command(name = "doomsday", version, about = "Observer-weighted inference from a single rank")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Posterior over candidate urn ensembles, or a likelihood scan.
    Urn(UrnArgs),
    /// Posterior over group size N or future births B.
    Posterior(PosteriorArgs),
    /// Extinction probability by calendar year.
    Forecast(ForecastArgs),
    /// Calibrated population-size models.
    Fermi(FermiArgs),
    /// Median group and median individual of a population table.
    Medians(MediansArgs),
}

fn count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(64) {
        Ok(v as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct UrnArgs {
    /// Candidate ensemble files, one urn size per line. Defaults to the
    /// three bundled fixtures (or those under $DOOMSDAY_FIXTURES).
    #[arg(long = "ensemble")]
    pub ensembles: Vec<PathBuf>,
    /// Observed label.
    #[arg(long, value_parser = count, default_value = "3")]
    pub rank: u64,
    /// Monte Carlo trials; 0 for exact output only.
    #[arg(long, value_parser = count, default_value = "1000000")]
    pub trials: u64,
    #[arg(long, default_value_t = 20161)]
    pub seed: u64,
    /// Scan uniform ensembles of fixed total over the mean urn size.
    #[arg(long)]
    pub scan: bool,
    /// Total balls for `--scan`.
    #[arg(long, value_parser = count, default_value = "1000000")]
    pub total: u64,
    /// Mean sizes for `--scan`; defaults to every divisor of the total.
    #[arg(long = "mu", value_parser = count, value_delimiter = ',')]
    pub mean_sizes: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Over {
    #[value(name = "N", alias = "n")]
    N,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankPriorKind {
    Exact,
    LogUniform,
}

#[derive(Debug, Args, Serialize)]
pub struct PosteriorArgs {
    #[arg(long, default_value_t = 1e11)]
    pub rank: f64,
    #[arg(long, value_enum, default_value_t = RankPriorKind::Exact)]
    pub rank_prior: RankPriorKind,
    /// Log-uniform rank prior spans rank/spread to rank·spread.
    #[arg(long, default_value_t = 3.0)]
    pub spread: f64,
    #[arg(long, value_enum, default_value_t = Over::N)]
    pub over: Over,
    /// Marginalize over the Pareto index with this prior instead of using
    /// the closed form: `uniform:LO:HI`, `exponential:RATE` or `point:ALPHA`.
    #[arg(long)]
    pub alpha_prior: Option<String>,
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ForecastArgs {
    /// Use an exactly known rank instead of the log-uniform prior.
    #[arg(long)]
    pub rank_exact: Option<f64>,
    /// Centre of the log-uniform rank prior.
    #[arg(long, default_value_t = 1e11)]
    pub r0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub spread: f64,
    /// Births per year.
    #[arg(long, default_value_t = 1.4e8)]
    pub rate: f64,
    #[arg(long, default_value_t = 2016.0)]
    pub epoch: f64,
    /// Last year tabulated.
    #[arg(long, default_value_t = 3016.0)]
    pub end: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Constant annual hazards for the baseline columns.
    #[arg(long = "hazard", value_delimiter = ',', default_values_t = forecast::BASELINE_HAZARDS)]
    pub hazards: Vec<f64>,
    /// Tabulate against cumulative births instead of calendar years.
    #[arg(long)]
    pub births_axis: bool,
    /// Year at which to report the extinction probability and odds.
    #[arg(long, default_value_t = 2100.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    All,
    Pareto,
    Lognormal,
    Bimodal,
}

#[derive(Debug, Args, Serialize)]
pub struct FermiArgs {
    #[arg(long, value_enum, default_value_t = Model::All)]
    pub model: Model,
    #[arg(long, default_value_t = fermi::TARGET_MI)]
    pub target_mi: f64,
    #[arg(long, default_value_t = fermi::PARETO_N_MIN)]
    pub n_min: f64,
    #[arg(long, default_value_t = fermi::LOGNORMAL_SIGMA)]
    pub sigma: f64,
    /// Weight of the lower bimodal component.
    #[arg(long, default_value_t = BimodalShape::default().weight)]
    pub weight: f64,
    #[arg(long, default_value_t = BimodalShape::default().sigma_low)]
    pub sigma_low: f64,
    #[arg(long, default_value_t = BimodalShape::default().sigma_high)]
    pub sigma_high: f64,
    /// Ratio of the bimodal component medians.
    #[arg(long, default_value_t = BimodalShape::default().separation)]
    pub separation: f64,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MediansArgs {
    /// `name,population` CSV; defaults to the bundled 2016 country table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Also report the share of individuals in groups with LOW < size ≤ HIGH.
    #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
    pub between: Option<Vec<f64>>,
}

/// Parse arguments, run, write output. Returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let record = json!({"error": {"kind": "usage", "message": e.to_string().trim_end()}});
            let _ = writeln!(stderr, "{record}");
            return 2;
        }
    };
    let result = run(&cli).and_then(|text| match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other.map_err(Error::from),
        },
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let record = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            let _ = writeln!(stderr, "{record}");
            1
        }
    }
}

/// Run a parsed command and return its full output.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Urn(a) => cmd_urn(a, cli.format),
        Command::Posterior(a) => cmd_posterior(a, cli.format),
        Command::Forecast(a) => cmd_forecast(a, cli.format),
        Command::Fermi(a) => cmd_fermi(a, cli.format),
        Command::Medians(a) => cmd_medians(a, cli.format),
    }
}

fn config_line(command: &str, args: &impl Serialize) -> String {
    format!("# config: {}\n", json!({"command": command, "args": args}))
}

fn to_json(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json value serializes");
    s.push('\n');
    s
}

fn rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn urn_candidates(args: &UrnArgs) -> Result<Vec<(String, UrnEnsemble)>> {
    if !args.ensembles.is_empty() {
        return args
            .ensembles
            .iter()
            .map(|p| Ok((p.display().to_string(), UrnEnsemble::load(p)?)))
            .collect();
    }
    match std::env::var_os(FIXTURE_ENV) {
        Some(dir) => FIG2_NAMES
            .iter()
            .map(|name| {
                let path = Path::new(&dir).join(name);
                Ok((path.display().to_string(), UrnEnsemble::load(&path)?))
            })
            .collect(),
        None => FIG2_NAMES
            .iter()
            .zip(FIG2_BUNDLED)
            .map(|(name, text)| Ok((name.to_string(), UrnEnsemble::from_text(text)?)))
            .collect(),
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn cmd_urn(args: &UrnArgs, format: Format) -> Result<String> {
    let r = RankObservation::new(args.rank)?;
    if args.scan {
        let mus = if args.mean_sizes.is_empty() {
            divisors(args.total)
        } else {
            args.mean_sizes.clone()
        };
        let scan = urn::uniform_ensemble_scan(args.total, r, &mus)?;
        return Ok(match format {
            Format::Json => to_json(json!({
                "config": {"command": "urn", "args": args},
                "scan": scan.iter().map(|p| json!({
                    "mean_size": p.mean_size,
                    "urns": p.urns,
                    "likelihood": rational(&p.likelihood),
                    "relative": rational(&p.relative),
                    "likelihood_f64": p.likelihood.to_f64(),
                })).collect::<Vec<_>>(),
            })),
            Format::Csv => {
                let mut out = config_line("urn", args);
                out.push_str("mean_size,urns,likelihood,relative,likelihood_f64\n");
                for p in &scan {
                    out.push_str(&format!(
                        "{},{},{},{},{:e}\n",
                        p.mean_size,
                        p.urns,
                        rational(&p.likelihood),
                        rational(&p.relative),
                        p.likelihood.to_f64().unwrap_or(f64::NAN)
                    ));
                }
                out
            }
        });
    }

    let named = urn_candidates(args)?;
    let candidates: Vec<EnsembleCandidate> = named
        .iter()
        .map(|(_, e)| EnsembleCandidate::equal_weight(e.clone()))
        .collect();
    let exact = urn::candidate_posterior(&candidates, r)?;
    let best = exact.iter().cloned().max().expect("nonempty");
    let mc = match args.trials {
        0 => None,
        t => Some(urn::monte_carlo_oracle(&candidates, r, args.seed, t)?),
    };
    let rows: Vec<Value> = named
        .iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let odds = if exact[i].is_zero() { None } else { (&best / &exact[i]).to_f64() };
            json!({
                "candidate": name,
                "exact": rational(&exact[i]),
                "exact_f64": exact[i].to_f64(),
                "odds_against": odds,
                "monte_carlo": mc.as_ref().map(|m| m.frequencies()[i]),
                "accepted": mc.as_ref().map(|m| m.accepted[i]),
            })
        })
        .collect();
    Ok(match format {
        Format::Json => to_json(json!({
            "config": {"command": "urn", "args": args},
            "trials": args.trials,
            "candidates": rows,
        })),
        Format::Csv => {
            let mut out = config_line("urn", args);
            out.push_str("candidate,exact,exact_f64,odds_vs_best,monte_carlo,accepted\n");
            for row in &rows {
                let field = |k: &str| match &row[k] {
                    Value::Null => String::new(),
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    field("candidate"),
                    field("exact"),
                    field("exact_f64"),
                    match &row["odds_against"] {
                        Value::Null => "inf".to_string(),
                        v => v.to_string(),
                    },
                    field("monte_carlo"),
                    field("accepted")
                ));
            }
            out
        }
    })
}

fn parse_alpha_prior(s: &str) -> Result<AlphaPrior> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::InvalidParameter(format!("bad alpha prior `{s}`")))
    };
    let prior = match (parts[0], parts.len()) {
        ("uniform", 3) => AlphaPrior::Uniform { lo: num(1)?, hi: num(2)? },
        ("exponential", 2) => AlphaPrior::Exponential { rate: num(1)? },
        ("point", 2) => AlphaPrior::PointMass(num(1)?),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "alpha prior `{s}` is not uniform:LO:HI, exponential:RATE or point:ALPHA"
            )))
        }
    };
    prior.validate()?;
    Ok(prior)
}

fn grid(points: usize) -> GridSpec {
    GridSpec {
        points,
        ..GridSpec::default()
    }
}

fn cmd_posterior(args: &PosteriorArgs, format: Format) -> Result<String> {
    let grid = grid(args.points);
    let post = match (args.over, &args.alpha_prior) {
        (Over::N, None) => {
            if args.rank_prior != RankPriorKind::Exact {
                return Err(Error::InvalidParameter("posteriors over N take an exact rank".into()));
            }
            posterior::pareto_closed_form(args.rank, &grid)?
        }
        (Over::N, Some(spec)) => {
            let prior = ParameterPrior::jeffreys(parse_alpha_prior(spec)?)?;
            posterior::general_posterior(&prior, args.rank, &GeneralOptions { grid, ..Default::default() })?
        }
        (Over::B, None) => {
            let prior = match args.rank_prior {
                RankPriorKind::Exact => RankPrior::exact(args.rank)?,
                RankPriorKind::LogUniform => RankPrior::around(args.rank, args.spread)?,
            };
            posterior::future_count_posterior(&prior, &grid)?
        }
        (Over::B, Some(_)) => {
            return Err(Error::InvalidParameter("--alpha-prior applies to posteriors over N".into()))
        }
    };
    Ok(match format {
        Format::Json => to_json(json!({
            "config": {"command": "posterior", "args": args},
            "summary": post.summary(),
            "grid": post.grid(),
            "density": post.density(),
            "cdf": post.cdf(),
        })),
        Format::Csv => config_line("posterior", args) + &post.to_csv(),
    })
}

fn cmd_forecast(args: &ForecastArgs, format: Format) -> Result<String> {
    let model = BirthRateModel::new(args.rate, args.epoch)?;
    let range = YearRange::new(args.epoch, args.end, args.step)?;
    let rank = match args.rank_exact {
        Some(r) => RankPrior::exact(r)?,
        None => RankPrior::around(args.r0, args.spread)?,
    };
    let post = posterior::future_count_posterior(&rank, &grid(args.points))?;
    let curve = forecast::extinction_curve(&post, &model, &range)?;
    let marks = forecast::milestones(&curve);
    let p_horizon = curve.p_at(args.horizon);
    let fit_end = args.horizon.min(args.end);
    let fitted = forecast::hazard_fit_window(&curve, args.epoch, fit_end)?;
    let milestones = json!({
        "horizon": args.horizon,
        "p_extinct_by_horizon": p_horizon,
        "odds_survive_vs_extinct": p_horizon.map(|p| (1.0 - p) / p),
        "median_year": match marks.median_year {
            MedianYear::Year(y) => json!(y),
            MedianYear::Unbounded => json!("unbounded"),
        },
        "fitted_hazard": fitted,
        "fit_window": [args.epoch, fit_end],
    });
    Ok(match format {
        Format::Json => {
            let baselines = args
                .hazards
                .iter()
                .map(|&h| {
                    let c = forecast::constant_hazard_curve(h, &model, &range)?;
                    Ok((forecast::baseline_column(h), json!(c.p_extinct())))
                })
                .collect::<Result<serde_json::Map<_, _>>>()?;
            to_json(json!({
                "config": {"command": "forecast", "args": args},
                "milestones": milestones,
                "curve": {
                    "year": curve.years(),
                    "p_doomsday": curve.p_extinct(),
                    "hazard_doomsday": curve.hazard(),
                    "baselines": baselines,
                },
            }))
        }
        Format::Csv => {
            let mut out = config_line("forecast", args);
            out.push_str(&format!("# milestones: {milestones}\n"));
            let table = if args.births_axis {
                let births = range
                    .years()
                    .iter()
                    .map(|&y| model.births_to_year(y))
                    .collect::<Result<Vec<_>>>()?;
                forecast::births_table_csv(&post, &model, &births, &args.hazards)?
            } else {
                forecast::time_table_csv(&curve, &model, &args.hazards)?
            };
            out + &table
        }
    })
}

fn cmd_fermi(args: &FermiArgs, format: Format) -> Result<String> {
    let shape = BimodalShape {
        weight: args.weight,
        sigma_low: args.sigma_low,
        sigma_high: args.sigma_high,
        separation: args.separation,
    };
    let build = |m: Model| -> Result<DistributionSpec> {
        match m {
            Model::Pareto => fermi::calibrate_pareto(args.n_min, args.target_mi),
            Model::Lognormal => fermi::calibrate_lognormal(args.sigma, args.target_mi),
            Model::Bimodal | Model::All => fermi::calibrate_bimodal(&shape, args.target_mi),
        }
    };
    let models: Vec<(Model, DistributionSpec)> = match args.model {
        Model::All => [Model::Pareto, Model::Lognormal, Model::Bimodal]
            .into_iter()
            .map(|m| Ok((m, build(m)?)))
            .collect::<Result<_>>()?,
        m => vec![(m, build(m)?)],
    };
    let reports = models
        .iter()
        .map(|(m, spec)| Ok((*m, fermi::report(spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let report_json = |m: Model, r: &fermi::FermiModelReport| {
        json!({"model": m, "report": r, "ratio_mi_mg": r.ratio()})
    };
    Ok(match format {
        Format::Json => to_json(json!({
            "config": {"command": "fermi", "args": args},
            "models": reports.iter().map(|(m, r)| report_json(*m, r)).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = config_line("fermi", args);
            for (m, r) in &reports {
                out.push_str(&format!("# report: {}\n", report_json(*m, r)));
            }
            out.push_str("model,N,pdf_true,pdf_size_biased\n");
            for (m, spec) in &models {
                let c = fermi::curves(spec, args.points)?;
                let name = serde_json::to_value(m).expect("model serializes");
                let name = name.as_str().expect("model is a string");
                for i in 0..c.n.len() {
                    out.push_str(&format!(
                        "{name},{:e},{:e},{:e}\n",
                        c.n[i], c.pdf_true[i], c.pdf_size_biased[i]
                    ));
                }
            }
            out
        }
    })
}

fn cmd_medians(args: &MediansArgs, format: Format) -> Result<String> {
    let table = match &args.table {
        Some(path) => PopulationTable::load(path)?,
        None => PopulationTable::bundled(),
    };
    let report = table.neutrality_report();
    let between = match args.between.as_deref() {
        Some([lo, hi]) => {
            let r = table.fraction_between(*lo, *hi)?;
            Some((format!("{}/{}", r.numer(), r.denom()), ratio_to_f64(r)))
        }
        _ => None,
    };
    Ok(match format {
        Format::Json => to_json(json!({
            "config": {"command": "medians", "args": args},
            "groups": table.entries().len(),
            "total": table.total().to_string(),
            "neutrality": report,
            "between": between.as_ref().map(|(e, v)| json!({"range": args.between, "exact": e, "value": v})),
        })),
        Format::Csv => {
            let mut out = config_line("medians", args);
            out.push_str("quantity,value,exact\n");
            out.push_str(&format!("groups,{},\n", table.entries().len()));
            out.push_str(&format!("total,{},\n", table.total()));
            out.push_str(&format!("m_group,{},\n", report.medians.m_group));
            out.push_str(&format!("m_individual,{},\n", report.medians.m_individual));
            for (name, (v, e)) in ["share_at_most_m_group", "share_between_medians", "share_above_m_individual"]
                .iter()
                .zip(report.bins.iter().zip(&report.exact))
            {
                out.push_str(&format!("{name},{v},{e}\n"));
            }
            if let Some((e, v)) = between {
                out.push_str(&format!("share_between,{v},{e}\n"));
            }
            out
        }
    })
}
