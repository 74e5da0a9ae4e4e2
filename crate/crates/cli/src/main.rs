use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spread_edge::historical::{
    binned_cover_rate, derive_weights, empirical_differential_table, fit_sigma, ingest_games, spread_band_stats,
    LossKind, SpreadBand,
};
use spread_edge::{
    DifferentialTable, EdgeMatrix, Error, MarginPoints, Odds, OddsFormat, SpreadPoints, WeightTable, DEFAULT_CELL_SD,
    DEFAULT_REF_SIGMA,
};
use spread_edge_service::{AppState, Model, ServiceConfig};

const WEIGHTS_ENV: &str = "SPREAD_EDGE_WEIGHTS";

#[derive(Parser, Debug)]
#[command(
    name = "spread-edge",
    version,
    about = "Point-spread cover probability and betting edge"
)]
struct Cli {
    /// Output style for reports.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quote cover, push and edge for one bet.
    #[command(allow_negative_numbers = true)]
    Edge(EdgeArgs),
    /// Tabulate absolute score differentials from a games CSV.
    Ingest {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive key-number multipliers from a differential table.
    Weights {
        /// Differential table JSON; the shipped historical table when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_REF_SIGMA)]
        sigma: f64,
        /// Multiplier for differentials beyond the table.
        #[arg(long, default_value_t = 1.0)]
        default_weight: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search the reference sigma that best matches a differential table.
    Fit {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 15.0)]
        min: f64,
        #[arg(long, default_value_t = 30.0)]
        max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value = "sse")]
        loss: String,
    },
    /// Build the conditional margin matrix and write it as JSON.
    Build {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spread-band margin statistics and binned cover rate for a games CSV.
    #[command(allow_negative_numbers = true)]
    Stats(StatsArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Weight table JSON; the shipped multipliers when omitted.
    #[arg(long, env = WEIGHTS_ENV)]
    weights: Option<PathBuf>,
    /// Standard deviation of each matrix column.
    #[arg(long = "sd", alias = "matrix-sd", default_value_t = DEFAULT_CELL_SD)]
    sd: f64,
}

#[derive(Args, Debug)]
struct EdgeArgs {
    /// Your projected spread for the bet team (negative = favored).
    #[arg(long, default_value_t = -3.0)]
    projection: f64,
    /// Sportsbook spread for the bet team.
    #[arg(long)]
    line: f64,
    #[arg(long, default_value_t = -110.0)]
    odds: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::American)]
    odds_format: FormatArg,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    American,
    Decimal,
}

impl From<FormatArg> for OddsFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::American => OddsFormat::American,
            FormatArg::Decimal => OddsFormat::Decimal,
        }
    }
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    spread_lo: f64,
    #[arg(long, default_value_t = 100.0)]
    spread_hi: f64,
    /// Favorite must win by more than this to count as covering.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[arg(long, default_value_t = 2.0)]
    k_sd: f64,
    #[arg(long, default_value_t = 15.0)]
    sd_ref: f64,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// 0 picks a free port.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[command(flatten)]
    model: ModelArgs,
    /// Prebuilt matrix JSON; built from the weights when omitted.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Allowed CORS origin; repeatable. Any origin when omitted.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
enum CliError {
    /// Bad flag value: exit 2.
    Usage(String),
    /// Outside the model's supported range: exit 3.
    Model(String),
    /// Unreadable or malformed input, or a failed write: exit 4.
    Io(String),
}

impl CliError {
    fn flag(flag: &str, e: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("--{flag}: {e}"))
    }

    fn file(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Model(m) | CliError::Io(m) => m,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let format = cli.format;
    match cli.command {
        Command::Edge(args) => cmd_edge(args, format),
        Command::Ingest { data, out } => cmd_ingest(&data, &out, format),
        Command::Weights {
            table,
            sigma,
            default_weight,
            out,
        } => cmd_weights(table.as_deref(), sigma, default_weight, &out),
        Command::Fit {
            table,
            min,
            max,
            step,
            loss,
        } => cmd_fit(table.as_deref(), min, max, step, &loss, format),
        Command::Build { model, out } => cmd_build(&model, &out, format),
        Command::Stats(args) => cmd_stats(args, format),
        Command::Serve(args) => cmd_serve(args),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| CliError::file(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::file(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> CliResult {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| CliError::file(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::file(path, e))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("reports serialize"));
}

fn load_weights(path: Option<&Path>) -> CliResult<WeightTable> {
    match path {
        Some(p) => read_json(p),
        None => Ok(WeightTable::shipped()),
    }
}

fn load_table(path: Option<&Path>) -> CliResult<DifferentialTable> {
    match path {
        Some(p) => read_json(p),
        None => Ok(DifferentialTable::shipped()),
    }
}

fn build_matrix(args: &ModelArgs) -> CliResult<(EdgeMatrix, WeightTable)> {
    let weights = load_weights(args.weights.as_deref())?;
    let matrix = EdgeMatrix::build(&weights, args.sd).map_err(|e| match e {
        Error::NonPositiveSd(_) => CliError::flag("sd", e),
        other => CliError::Model(other.to_string()),
    })?;
    Ok((matrix, weights))
}

fn pct(p: f64) -> String {
    format!("{:.1}%", p * 100.0)
}

fn signed_pct(p: f64) -> String {
    format!("{:+.1}%", p * 100.0)
}

#[derive(Serialize)]
struct EdgeReport {
    projection: f64,
    line: f64,
    odds: f64,
    odds_format: OddsFormat,
    cover: f64,
    push: f64,
    lose: f64,
    break_even: f64,
    edge: f64,
    ev_per_unit: f64,
}

fn cmd_edge(args: EdgeArgs, format: OutputFormat) -> CliResult {
    let odds = Odds::new(args.odds_format.into(), args.odds).map_err(|e| CliError::flag("odds", e))?;
    let (matrix, _) = build_matrix(&args.model)?;
    let quote = matrix
        .edge_quote(SpreadPoints(args.projection), SpreadPoints(args.line), &odds)
        .map_err(|e| match e {
            Error::OutOfModel(..) => CliError::Model(format!("--projection: {e}")),
            Error::LineOutOfRange(..) => CliError::Model(format!("--line: {e}")),
            other => CliError::Model(other.to_string()),
        })?;
    let report = EdgeReport {
        projection: args.projection,
        line: args.line,
        odds: odds.value(),
        odds_format: odds.format(),
        cover: quote.cover.value(),
        push: quote.push.value(),
        lose: quote.lose.value(),
        break_even: quote.break_even.value(),
        edge: quote.edge,
        ev_per_unit: quote.ev_per_unit,
    };
    match format {
        OutputFormat::Json => print_json(&report),
        OutputFormat::Text => {
            println!(
                "projection {:+} vs line {:+} at {odds} ({})",
                report.projection, report.line, report.odds_format
            );
            println!("cover       {}", pct(report.cover));
            println!("push        {}", pct(report.push));
            println!("lose        {}", pct(report.lose));
            println!("break-even  {}", pct(report.break_even));
            println!("edge        {}", signed_pct(report.edge));
            println!("ev/unit     {:+.4}", report.ev_per_unit);
        }
    }
    Ok(())
}

fn cmd_ingest(data: &Path, out: &Path, format: OutputFormat) -> CliResult {
    let file = File::open(data).map_err(|e| CliError::file(data, e))?;
    let games = ingest_games(BufReader::new(file)).map_err(|e| CliError::file(data, e))?;
    let label = data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let table = empirical_differential_table(&games, label).map_err(|e| CliError::file(data, e))?;
    write_json(out, &table, true)?;
    match format {
        OutputFormat::Json => print_json(&serde_json::json!({ "n_games": games.len(), "out": out })),
        OutputFormat::Text => println!("n_games {} -> {}", games.len(), out.display()),
    }
    Ok(())
}

fn cmd_weights(table: Option<&Path>, sigma: f64, default_weight: f64, out: &Path) -> CliResult {
    let table = load_table(table)?;
    let weights = derive_weights(&table, sigma)
        .map_err(|e| CliError::flag("sigma", e))?
        .with_default_weight(default_weight)
        .map_err(|e| CliError::flag("default-weight", e))?;
    write_json(out, &weights, true)
}

fn cmd_fit(table: Option<&Path>, min: f64, max: f64, step: f64, loss: &str, format: OutputFormat) -> CliResult {
    let kind: LossKind = loss.parse().map_err(|e| CliError::flag("loss", e))?;
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::flag("step", format!("must be positive, got {step}")));
    }
    if !(min > 0.0 && min <= max) {
        return Err(CliError::flag(
            "min",
            format!("need 0 < min <= max, got min {min}, max {max}"),
        ));
    }
    let table = load_table(table)?;
    let report = fit_sigma(&table, min, max, step, kind).map_err(|e| match e {
        Error::Empty(_) => CliError::Io(e.to_string()),
        other => CliError::Usage(other.to_string()),
    })?;
    match format {
        OutputFormat::Json => print_json(&report),
        OutputFormat::Text => {
            println!("{:>8}  {:>14}", "sigma", report.loss_kind.to_string());
            for (sigma, loss) in &report.grid {
                println!("{sigma:>8.3}  {loss:>14.6e}");
            }
            println!("best_sigma {} (loss {:.6e})", report.best_sigma, report.loss_at_best);
        }
    }
    Ok(())
}

fn cmd_build(model: &ModelArgs, out: &Path, format: OutputFormat) -> CliResult {
    let (matrix, weights) = build_matrix(model)?;
    write_json(out, &matrix, false)?;
    match format {
        OutputFormat::Json => print_json(&serde_json::json!({
            "out": out,
            "cell_sd": matrix.cell_sd(),
            "weights_version": weights.version(),
        })),
        OutputFormat::Text => println!(
            "matrix sd {} weights {} -> {}",
            matrix.cell_sd(),
            weights.version(),
            out.display()
        ),
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs, format: OutputFormat) -> CliResult {
    let band = SpreadBand::new(args.spread_lo, args.spread_hi).map_err(|e| CliError::flag("spread-lo", e))?;
    let file = File::open(&args.data).map_err(|e| CliError::file(&args.data, e))?;
    let games = ingest_games(BufReader::new(file)).map_err(|e| CliError::file(&args.data, e))?;
    let stats = spread_band_stats(&games, band, args.k_sd, args.sd_ref).map_err(|e| CliError::flag("sd-ref", e))?;
    let rate = binned_cover_rate(&games, band, MarginPoints(args.threshold));
    match format {
        OutputFormat::Json => print_json(&serde_json::json!({
            "spread_lo": args.spread_lo,
            "spread_hi": args.spread_hi,
            "band": stats,
            "cover": { "threshold": args.threshold, "n": rate.n, "rate": rate.rate },
        })),
        OutputFormat::Text => {
            let num = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"));
            println!("band [{}, {}]: {} games", args.spread_lo, args.spread_hi, stats.count);
            println!("mean margin  {}", num(stats.mean_margin));
            println!("sd margin    {}", num(stats.sd_margin));
            println!(
                "beyond mean +/- {}*{}: {}",
                args.k_sd,
                args.sd_ref,
                stats.exceedance_rate.map_or_else(|| "n/a".into(), pct)
            );
            println!(
                "won by more than {}: {} of {}",
                args.threshold,
                rate.rate.map_or_else(|| "n/a".into(), pct),
                rate.n
            );
        }
    }
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> CliResult {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| CliError::flag("port", e))?;
        let addr = listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
        let state = AppState::empty();
        let config = ServiceConfig {
            cors_origins: args.cors_origins.clone(),
        };
        let app = spread_edge_service::router(state.clone(), &config).map_err(|e| CliError::flag("cors-origin", e))?;
        println!("listening on http://{addr}");
        let _ = std::io::stdout().flush();

        let server = tokio::spawn(spread_edge_service::serve(listener, app));
        let model = match &args.matrix {
            Some(path) => {
                let weights = load_weights(args.model.weights.as_deref())?;
                let matrix: EdgeMatrix = read_json(path)?;
                Model::new(matrix, weights).map_err(|e| CliError::file(path, e))?
            }
            None => {
                let (matrix, weights) = build_matrix(&args.model)?;
                Model::new(matrix, weights).map_err(|e| CliError::Model(e.to_string()))?
            }
        };
        eprintln!("model loaded (weights {})", model.weights_version());
        let _ = state.load(model);
        server
            .await
            .map_err(|e| CliError::Io(e.to_string()))?
            .map_err(|e| CliError::Io(e.to_string()))
    })
}
