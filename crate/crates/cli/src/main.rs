//! Command-line front end: ingest box-score/play-by-play CSV, run the
//! analytics, and emit deterministic CSV or JSON reports.
//!
//! Exit codes: 0 success, 1 parse/validation failure (error name on stderr),
//! 2 I/O failure.

mod config;
mod report;

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fourfactors::factors::team_profile;
use fourfactors::ingest::{parse_box_scores, parse_pbp, write_box_scores, write_pbp, BoxScoreLine, GameLog};
use fourfactors::possession::{count_possessions, estimate_mu, estimate_mu_by_team};
use fourfactors::ratings::ortg_factors;
use fourfactors::sim::{simulate_with, verify_eps_identity, GenParams, SimOutput};
use fourfactors::Error;

use config::{Config, MuSource, OutputFormat};
use report::{
    build_report, write_csv, write_json, MuProvenance, Report, ReportMeta, DECOMPOSE_COLUMNS,
    FACTOR_COLUMNS, RATING_COLUMNS, REPORT_COLUMNS, SENSITIVITY_COLUMNS,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "fourfactors", version, about = "Basketball four-factor efficiency analytics")]
struct Cli {
    /// Optional key=value config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct AnalysisArgs {
    /// Box-score CSV input.
    #[arg(long = "box", value_name = "PATH")]
    box_path: PathBuf,
    /// Play-by-play CSV; used to estimate mu when --mu is absent.
    #[arg(long, value_name = "PATH")]
    pbp: Option<PathBuf>,
    /// Possession-ending free-throw share; overrides estimation and config.
    #[arg(long)]
    mu: Option<f64>,
    /// Keep only box lines of this season.
    #[arg(long)]
    season: Option<String>,
    /// Keep only this team's rows (league reference rows are kept).
    #[arg(long)]
    team: Option<String>,
    /// Output format (default from config, csv otherwise).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Present ratings per 100 possessions.
    #[arg(long = "per-100")]
    per_100: bool,
    /// Output path (stdout when absent).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Four factors and shooting percentages per team.
    Factors(AnalysisArgs),
    /// Possession estimates and ratings per team.
    Ratings(AnalysisArgs),
    /// Multiplicative rating components per team.
    Decompose(AnalysisArgs),
    /// Rating gradients and factor importance weights per team.
    Sensitivity(AnalysisArgs),
    /// League and per-team possession-ending free-throw share.
    EstimateMu {
        /// Play-by-play CSV input.
        #[arg(long, value_name = "PATH")]
        pbp: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic event stream and box score from parameters.
    Simulate {
        /// Generator parameters, JSON: one parameter set or {"teams": [...]}.
        #[arg(long, value_name = "PATH")]
        params: PathBuf,
        /// Overrides the seed in the parameter file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides n_possessions in the parameter file.
        #[arg(long)]
        n: Option<u64>,
        /// Check the closed-form identities on the generated stream; exit 0
        /// iff every residual is within tolerance.
        #[arg(long)]
        verify: bool,
        /// Write the aggregate box score here (ingest schema).
        #[arg(long = "box", value_name = "PATH")]
        box_out: Option<PathBuf>,
        /// Write the event stream here (ingest schema).
        #[arg(long = "pbp", value_name = "PATH")]
        pbp_out: Option<PathBuf>,
    },
    /// Full per-season report: factors, ratings, multipliers, gradients,
    /// weights, league reference rows.
    Report(AnalysisArgs),
}

enum CliError {
    Core(Error),
    Config(String),
}

impl CliError {
    fn name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.name(),
            CliError::Config(_) => "ConfigError",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_io() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Io(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (config, from_file) = match &cli.config {
        Some(path) => (Config::load(path).map_err(CliError::Config)?, true),
        None => (Config::default(), false),
    };

    match cli.cmd {
        Cmd::Factors(args) => analysis(&args, &config, from_file, FACTOR_COLUMNS),
        Cmd::Ratings(args) => analysis(&args, &config, from_file, RATING_COLUMNS),
        Cmd::Decompose(args) => analysis(&args, &config, from_file, DECOMPOSE_COLUMNS),
        Cmd::Sensitivity(args) => analysis(&args, &config, from_file, SENSITIVITY_COLUMNS),
        Cmd::Report(args) => analysis(&args, &config, from_file, REPORT_COLUMNS),
        Cmd::EstimateMu { pbp, format, out } => estimate_mu_cmd(&pbp, format, out, &config),
        Cmd::Simulate {
            params,
            seed,
            n,
            verify,
            box_out,
            pbp_out,
        } => simulate_cmd(&params, seed, n, verify, box_out, pbp_out, &config),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    File::open(path)
        .map_err(|e| CliError::Core(Error::Io(e)))?
        .read_to_end(&mut buf)
        .map_err(|e| CliError::Core(Error::Io(e)))?;
    Ok(buf)
}

fn load_pbp(path: &Path) -> Result<Vec<GameLog>, CliError> {
    let bytes = read_file(path)?;
    Ok(parse_pbp(&bytes[..])?)
}

fn resolve_mu(
    flag: Option<f64>,
    logs: Option<&[GameLog]>,
    config: &Config,
    config_from_file: bool,
) -> Result<(f64, MuProvenance), CliError> {
    if let Some(mu) = flag {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(CliError::Core(Error::InvalidParams {
                reason: format!("--mu {mu} must be in (0, 1]"),
            }));
        }
        return Ok((mu, MuProvenance::Flag));
    }
    if config.mu_source == MuSource::Estimated {
        if let Some(logs) = logs {
            return Ok((estimate_mu(logs)?, MuProvenance::EstimatedFromPbp));
        }
    }
    let provenance = if config_from_file {
        MuProvenance::ConfigDefault
    } else {
        MuProvenance::BuiltinDefault
    };
    Ok((config.mu_default, provenance))
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => Ok(Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Core(Error::Io(e)))?,
        ))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn chosen_format(flag: Option<FormatArg>, config: &Config) -> OutputFormat {
    match flag {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => config.output_format,
    }
}

fn emit(
    report: &Report,
    columns: &[report::Column],
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let mut sink = open_output(out)?;
    match format {
        OutputFormat::Csv => write_csv(&mut sink, report, columns)?,
        OutputFormat::Json => write_json(&mut sink, report, columns)?,
    }
    sink.flush()?;
    Ok(())
}

fn analysis(
    args: &AnalysisArgs,
    config: &Config,
    config_from_file: bool,
    columns: &[report::Column],
) -> Result<ExitCode, CliError> {
    let box_path = config.resolve(&args.box_path);
    let bytes = read_file(&box_path)?;
    let mut lines = parse_box_scores(&bytes[..]).map_err(CliError::Core)?;
    if let Some(season) = &args.season {
        lines.retain(|l| &l.season == season);
    }
    if lines.is_empty() {
        return Err(CliError::Core(Error::EmptyScope { what: "box-score lines" }));
    }

    let logs = match &args.pbp {
        Some(path) => Some(load_pbp(&config.resolve(path))?),
        None => None,
    };
    let (mu, provenance) = resolve_mu(args.mu, logs.as_deref(), config, config_from_file)?;

    let meta = ReportMeta {
        mu,
        mu_source: provenance,
        per100: args.per_100 || config.per100,
        version: VERSION,
    };
    let mut built = build_report(&lines, mu, meta)?;
    if let Some(team) = &args.team {
        built
            .rows
            .retain(|r| &r.team_id == team || r.team_id == report::LEAGUE_ROW_ID);
        if built.rows.iter().all(|r| r.team_id != *team) {
            return Err(CliError::Core(Error::UnknownTeam {
                game_id: String::new(),
                team_id: team.clone(),
            }));
        }
    }
    emit(&built, columns, chosen_format(args.format, config), &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn estimate_mu_cmd(
    pbp: &Path,
    format: Option<FormatArg>,
    out: Option<PathBuf>,
    config: &Config,
) -> Result<ExitCode, CliError> {
    let logs = load_pbp(&config.resolve(pbp))?;
    let league = estimate_mu(&logs)?;
    let per_team = estimate_mu_by_team(&logs)?;

    let mut sink = open_output(&out)?;
    match chosen_format(format, config) {
        OutputFormat::Csv => {
            writeln!(sink, "# fourfactors v{VERSION}")?;
            writeln!(sink, "scope,team_id,mu")?;
            writeln!(sink, "league,,{league:.6}")?;
            for (team, mu) in &per_team {
                writeln!(sink, "team,{team},{mu:.6}")?;
            }
        }
        OutputFormat::Json => {
            let teams: serde_json::Map<String, serde_json::Value> = per_team
                .iter()
                .map(|(team, mu)| {
                    (team.clone(), serde_json::json!((mu * 1e6).round() / 1e6))
                })
                .collect();
            let doc = serde_json::json!({
                "metadata": { "version": VERSION },
                "league_mu": (league * 1e6).round() / 1e6,
                "team_mu": teams,
            });
            writeln!(sink, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Parameter file: either one generator parameter set or a league of named
/// teams simulated on separate RNG streams of the same seed.
#[derive(Deserialize)]
#[serde(untagged)]
enum ParamsFile {
    League(LeagueParams),
    Single(GenParams),
}

#[derive(Deserialize)]
struct LeagueParams {
    #[serde(default = "default_sim_season")]
    season: String,
    teams: Vec<TeamEntry>,
}

#[derive(Deserialize)]
struct TeamEntry {
    team_id: String,
    #[serde(flatten)]
    params: GenParams,
}

fn default_sim_season() -> String {
    "sim".to_string()
}

/// Residual tolerance for --verify: closed form vs exactly counted rating.
const VERIFY_TOL: f64 = 1e-9;

fn simulate_cmd(
    params_path: &Path,
    seed: Option<u64>,
    n: Option<u64>,
    verify: bool,
    box_out: Option<PathBuf>,
    pbp_out: Option<PathBuf>,
    config: &Config,
) -> Result<ExitCode, CliError> {
    let bytes = read_file(&config.resolve(params_path))?;
    let parsed: ParamsFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("cannot parse params file: {e}")))?;

    let override_params = |mut p: GenParams| {
        if let Some(s) = seed {
            p.seed = s;
        } else if p.seed == 0 {
            p.seed = config.seed;
        }
        if let Some(n) = n {
            p.n_possessions = n;
        }
        p
    };

    let runs: Vec<(String, String, u64, GenParams)> = match parsed {
        ParamsFile::Single(p) => vec![("sim".to_string(), "SIM".to_string(), 0, override_params(p))],
        ParamsFile::League(league) => league
            .teams
            .into_iter()
            .enumerate()
            .map(|(i, entry)| {
                (
                    league.season.clone(),
                    entry.team_id.clone(),
                    i as u64,
                    override_params(entry.params),
                )
            })
            .collect(),
    };

    let mut outputs: Vec<SimOutput> = Vec::with_capacity(runs.len());
    for (season, team_id, stream, params) in &runs {
        let game_id = format!("sim-{team_id}");
        outputs.push(simulate_with(params, *stream, &game_id, team_id, "OPP", season)?);
    }

    if let Some(path) = &box_out {
        let mut sink = BufWriter::new(File::create(path)?);
        let lines: Vec<BoxScoreLine> = outputs.iter().map(|o| o.line.clone()).collect();
        write_box_scores(&mut sink, &lines)?;
        sink.flush()?;
    }
    if let Some(path) = &pbp_out {
        let mut sink = BufWriter::new(File::create(path)?);
        let logs: Vec<GameLog> = outputs.iter().map(|o| o.log.clone()).collect();
        write_pbp(&mut sink, &logs)?;
        sink.flush()?;
    }

    if !verify {
        for out in &outputs {
            println!(
                "{}: {} possessions, {} points",
                out.line.team_id, runs[0].3.n_possessions, out.line.pts
            );
        }
        return Ok(ExitCode::SUCCESS);
    }

    let mut all_ok = true;
    for ((_, team_id, _, params), out) in runs.iter().zip(&outputs) {
        let logs = std::slice::from_ref(&out.log);
        let mu = estimate_mu(logs)?;
        let tally = count_possessions(&out.log)?;
        let exact = out.line.pts as f64 / tally.possessions_for(team_id) as f64;
        let closed = ortg_factors(&team_profile(&out.line, mu)?)?;
        let residual = (closed - exact).abs();
        let ok = residual < VERIFY_TOL;
        all_ok &= ok;
        println!(
            "{team_id}: closed-form residual {residual:.3e} {}",
            if ok { "ok" } else { "FAIL" }
        );

        match verify_eps_identity(params) {
            Ok(eps) => {
                let eps_ok = eps.residual_corrected < VERIFY_TOL;
                all_ok &= eps_ok;
                println!(
                    "{team_id}: alpha {:.4} beta {:.4} epsilon {:.4}; corrected residual {:.3e} (base {:.3e}) {}",
                    eps.measured.alpha,
                    eps.measured.beta,
                    eps.measured.epsilon,
                    eps.residual_corrected,
                    eps.residual_base,
                    if eps_ok { "ok" } else { "FAIL" }
                );
            }
            Err(Error::EmptyScope { .. }) => {
                println!("{team_id}: no missed final free throws; epsilon check skipped");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
