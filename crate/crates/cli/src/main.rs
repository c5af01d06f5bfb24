use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use more_core::approx::{run_experiment, ExperimentConfig};
use more_core::backtest::{replay_into, run_backtest, sweep, BacktestConfig};
use more_core::convert::{ConversionConfig, Normalization, Strategy};
use more_core::engine::{process_odb, DecayParams, ReputationLedger, Timestamp};
use more_core::io::{self, sig9};
use more_core::predict::{predict, relative_strength, PredictionConfig};
use more_core::{backtest::bin_of, Error};

#[derive(Parser)]
#[command(
    name = "more",
    version,
    about = "Decaying, certainty-weighted reputations"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a match corpus, predicting each match before learning from it.
    Backtest(BacktestArgs),
    /// Backtest every strategy and nu combination.
    Sweep(SweepArgs),
    /// Measure how far the running aggregate drifts from the exact one.
    Approx(ApproxArgs),
    /// Reputation table for an opinion file.
    Rank(RankArgs),
    /// Predict one match from the reputations built by earlier matches.
    Predict(PredictArgs),
    /// Write a synthetic league corpus.
    Gen(GenArgs),
    /// Save or load ledger snapshots.
    #[command(subcommand)]
    Snapshot(SnapshotCommand),
}

#[derive(Args, Clone, Copy)]
struct DecayArgs {
    /// Decay base nu in [0, 1].
    #[arg(long, default_value_t = 0.6)]
    nu: f64,
    /// Decay interval kappa in days.
    #[arg(long, default_value_t = 365.0)]
    kappa: f64,
}

impl DecayArgs {
    fn params(self) -> Result<DecayParams> {
        Ok(DecayParams::new(self.nu, self.kappa)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Corpus,
    Off,
}

#[derive(Args)]
struct BacktestArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long, default_value = "gmv")]
    strategy: Strategy,
    #[command(flatten)]
    decay: DecayArgs,
    /// GMV gift X.
    #[arg(long = "x", default_value_t = 1.0)]
    gift: f64,
    /// Half-width of the draw band around r = 0.5.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// GMV normalization bounds.
    #[arg(long, value_enum, default_value = "corpus")]
    normalization: NormArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "naive,mv,gmv")]
    strategies: Vec<Strategy>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7")]
    nus: Vec<f64>,
    #[arg(long, default_value_t = 365.0)]
    kappa: f64,
    #[arg(long = "x", default_value_t = 1.0)]
    gift: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long, default_value_t = 10)]
    per_year: u32,
    #[arg(long, default_value_t = 6)]
    years: u32,
    #[arg(long, default_value_t = 0.98)]
    nu: f64,
    #[arg(long, default_value_t = 5.0)]
    kappa: f64,
    #[arg(long, default_value_t = 20)]
    repeats: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Engine time units per simulated year.
    #[arg(long, default_value_t = 365)]
    ticks_per_year: u32,
    /// Number of evaluation terms.
    #[arg(long, default_value_t = 2)]
    terms: usize,
    /// Output directory; the trace goes to trace.csv inside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    opinions: PathBuf,
    /// Evaluation time (integer or yyyy-mm-dd); defaults to the last opinion.
    #[arg(long, value_parser = parse_time_arg)]
    at: Option<Timestamp>,
    #[command(flatten)]
    decay: DecayArgs,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long)]
    home: String,
    #[arg(long)]
    away: String,
    /// Match date; only earlier matches are used.
    #[arg(long, value_parser = parse_time_arg)]
    date: Timestamp,
    #[arg(long, default_value = "gmv")]
    strategy: Strategy,
    #[command(flatten)]
    decay: DecayArgs,
    #[arg(long = "x", default_value_t = 1.0)]
    gift: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    teams: usize,
    #[arg(long, default_value_t = 10)]
    seasons: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SnapshotCommand {
    /// Process an opinion file and save the resulting ledger.
    Save {
        #[arg(long)]
        opinions: PathBuf,
        #[command(flatten)]
        decay: DecayArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a ledger, print its reputation table and optionally save it again.
    Load {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_parser = parse_time_arg)]
        at: Option<Timestamp>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_time_arg(s: &str) -> std::result::Result<Timestamp, String> {
    io::parse_time(s)
        .ok_or_else(|| format!("{s:?} is neither a non-negative integer nor yyyy-mm-dd"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let parameter = e
                .downcast_ref::<Error>()
                .is_some_and(Error::is_parameter_error);
            ExitCode::from(if parameter { 1 } else { 2 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Backtest(a) => backtest(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Approx(a) => approx(a),
        Command::Rank(a) => rank(a),
        Command::Predict(a) => predict_one(a),
        Command::Gen(a) => gen(a),
        Command::Snapshot(c) => snapshot(c),
    }
}

fn load_matches(path: &Path) -> Result<Vec<more_core::convert::MatchResult>> {
    let corpus = io::parse_matches(path)?;
    let s = corpus.summary;
    eprintln!(
        "{}: {} matches, {} home wins, {} away wins, {} draws{}",
        path.display(),
        s.total,
        s.home_wins,
        s.away_wins,
        s.draws,
        if corpus.rejected.is_empty() {
            String::new()
        } else {
            format!(", {} rows rejected", corpus.rejected.len())
        }
    );
    Ok(corpus.matches)
}

fn backtest(a: BacktestArgs) -> Result<()> {
    let mut conversion = ConversionConfig::new(a.strategy);
    conversion.gift = a.gift;
    if matches!(a.normalization, NormArg::Off) {
        conversion.normalization = Normalization::Off;
    }
    let cfg = BacktestConfig {
        conversion,
        decay: a.decay.params()?,
        prediction: PredictionConfig::new(a.epsilon)?,
    };
    conversion.validate()?;
    let matches = load_matches(&a.matches)?;
    let report = run_backtest(&matches, &cfg)?;
    io::write_backtest(&a.out, &report)?;
    print!("{}", io::render_report(&report));
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let prediction = PredictionConfig::new(a.epsilon)?;
    for &nu in &a.nus {
        DecayParams::new(nu, a.kappa)?;
    }
    let mut probe = ConversionConfig::new(Strategy::Gmv);
    probe.gift = a.gift;
    probe.validate()?;
    let matches = load_matches(&a.matches)?;
    let runs = sweep(&matches, &a.strategies, &a.nus, a.kappa, prediction, a.gift)?;
    let failed = io::write_sweep(&a.out, &runs)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "strategy,nu,more_accuracy,baseline_accuracy")?;
    for run in &runs {
        if let Ok(r) = &run.result {
            writeln!(
                out,
                "{},{},{},{}",
                run.strategy,
                sig9(run.nu),
                sig9(r.more_accuracy),
                sig9(r.baseline_accuracy)
            )?;
        }
    }
    if failed > 0 {
        anyhow::bail!("{failed} of {} runs failed", runs.len());
    }
    Ok(())
}

fn approx(a: ApproxArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        opinions_per_year: a.per_year,
        years: a.years,
        decay: DecayParams::new(a.nu, a.kappa)?,
        repeats: a.repeats,
        seed: a.seed,
        space_size: a.terms,
        ticks_per_year: a.ticks_per_year,
    };
    cfg.validate()?;
    let trace = run_experiment(&cfg)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let path = a.out.join("trace.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    io::write_trace(std::io::BufWriter::new(file), &trace)?;
    if let Some(peak) = trace
        .points
        .iter()
        .max_by(|x, y| x.mean_emd.total_cmp(&y.mean_emd))
    {
        eprintln!(
            "peak mean EMD {} at opinion {}; final {}",
            sig9(peak.mean_emd),
            peak.index,
            sig9(trace.points.last().map_or(0.0, |p| p.mean_emd))
        );
    }
    Ok(())
}

fn print_table(ledger: &ReputationLedger, at: Timestamp) -> Result<()> {
    let mut rows = ledger
        .states()
        .into_iter()
        .map(|(agent, _)| Ok((agent.as_str(), ledger.reputation(agent.as_str(), at)?)))
        .collect::<Result<Vec<(&str, f64)>>>()?;
    rows.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    let mut out = std::io::stdout().lock();
    writeln!(out, "agent,reputation")?;
    for (agent, rep) in rows {
        writeln!(out, "{agent},{}", sig9(rep))?;
    }
    Ok(())
}

fn latest_update(ledger: &ReputationLedger) -> Timestamp {
    ledger
        .states()
        .iter()
        .map(|(_, s)| s.last_update)
        .max()
        .unwrap_or_default()
}

fn ledger_from_opinions(path: &Path, decay: DecayArgs) -> Result<ReputationLedger> {
    let params = decay.params()?;
    let corpus = io::parse_opinions(path)?;
    let (ledger, run) = process_odb(corpus.space, params, &corpus.opinions);
    let rejected = corpus.rejected.len() + run.rejected.len();
    if rejected > 0 {
        eprintln!("{}: {rejected} opinions rejected", path.display());
    }
    Ok(ledger)
}

fn rank(a: RankArgs) -> Result<()> {
    let ledger = ledger_from_opinions(&a.opinions, a.decay)?;
    let at = a.at.unwrap_or_else(|| latest_update(&ledger));
    print_table(&ledger, at)
}

fn predict_one(a: PredictArgs) -> Result<()> {
    let mut conversion = ConversionConfig::new(a.strategy);
    conversion.gift = a.gift;
    let cfg = BacktestConfig {
        conversion,
        decay: a.decay.params()?,
        prediction: PredictionConfig::new(a.epsilon)?,
    };
    conversion.validate()?;
    let mut matches = load_matches(&a.matches)?;
    matches.retain(|m| m.date < a.date);
    let (_, _, ledger) = replay_into(&matches, &cfg)?;
    let rep_home = ledger.reputation(&a.home, a.date)?;
    let rep_away = ledger.reputation(&a.away, a.date)?;
    let r = relative_strength(rep_home, rep_away);
    let mut out = std::io::stdout().lock();
    writeln!(out, "home        {} ({})", a.home, sig9(rep_home))?;
    writeln!(out, "away        {} ({})", a.away, sig9(rep_away))?;
    writeln!(out, "r           {}", sig9(r))?;
    writeln!(out, "bin         {}", bin_of(r)?)?;
    writeln!(out, "prediction  {}", predict(r, &cfg.prediction))?;
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let corpus = io::gen_synthetic(a.teams, a.seasons, a.seed)?;
    let file = std::fs::File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
    io::write_matches(
        std::io::BufWriter::new(file),
        &corpus.matches,
        &corpus.header,
    )?;
    eprintln!("{}: {} matches", a.out.display(), corpus.matches.len());
    Ok(())
}

fn snapshot(c: SnapshotCommand) -> Result<()> {
    match c {
        SnapshotCommand::Save {
            opinions,
            decay,
            out,
        } => {
            let ledger = ledger_from_opinions(&opinions, decay)?;
            io::save_snapshot(&out, &ledger)?;
            eprintln!("{}: {} agents", out.display(), ledger.len());
        }
        SnapshotCommand::Load { snapshot, at, out } => {
            let ledger = io::load_snapshot(&snapshot)?;
            if let Some(out) = out {
                io::save_snapshot(&out, &ledger)?;
            }
            print_table(&ledger, at.unwrap_or_else(|| latest_update(&ledger)))?;
        }
    }
    Ok(())
}
