use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polar_amm::fingerprint::FingerprintMode;
use polar_amm::{CurveMode, FixedDecimal, Route};

mod commands;
mod error;
mod io;

use error::CliError;

/// Concentrated circular and superelliptical market maker toolkit.
///
/// Pool state is JSON; curves and traces are CSV. Exit codes: 0 success,
/// 2 invalid input, 3 insufficient liquidity, 4 numeric failure.
#[derive(Parser, Debug)]
#[command(name = "polar-amm", version)]
struct Cli {
    /// Seed for commands that draw random numbers.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Create a pool with equal reserves, born on-curve.
    Init(InitArgs),
    /// Price a trade without touching the pool.
    Quote(TradeArgs),
    /// Execute a trade and rewrite the pool file.
    Swap(TradeArgs),
    /// Add a range position to a two-token pool.
    AddPosition(AddPositionArgs),
    /// Remove a range position by id.
    RemovePosition(RemovePositionArgs),
    /// Apply a CSV trade log in order and summarise the result.
    Replay(ReplayArgs),
    /// Generate a feasible random trade log for a pool.
    GenTrades(GenTradesArgs),
    /// Sample the pool's trading curve between two tokens.
    Curve(CurveArgs),
    /// Sample a liquidity fingerprint.
    Fingerprint(FingerprintArgs),
    /// Sample the LP value function.
    Payoff(PayoffArgs),
    /// Sample the binary payoff of a two-band hedge.
    Hedge(HedgeArgs),
}

#[derive(Args, Debug)]
struct InitArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "ccmm")]
    mode: CurveMode,
    /// Offset parameter; defaults to 2 + √2.
    #[arg(long)]
    l: Option<FixedDecimal>,
    /// Comma-separated α per token (csemm). A single value applies to all.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<FixedDecimal>,
    #[arg(long, default_value = "2")]
    beta: FixedDecimal,
    /// Price peak; for the shifted ellipse it defaults to the value that
    /// puts (1, 1) on the curve.
    #[arg(long)]
    c: Option<FixedDecimal>,
    /// Initial reserve of every token.
    #[arg(long, default_value = "1")]
    reserve: FixedDecimal,
    #[arg(long, default_value = "1")]
    tick_spacing: FixedDecimal,
    #[arg(long)]
    pool: PathBuf,
}

#[derive(Args, Debug)]
struct TradeArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    token_in: usize,
    #[arg(long)]
    token_out: usize,
    #[arg(long)]
    amount: FixedDecimal,
    /// Treat the amount as the exact output instead of the exact input.
    #[arg(long)]
    exact_out: bool,
    /// cartesian, polar or ticks; defaults to ticks for pools with a ledger.
    #[arg(long)]
    route: Option<Route>,
    /// Where to write the segment trace of a ticks-route trade.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AddPositionArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    lower: FixedDecimal,
    #[arg(long)]
    upper: FixedDecimal,
    #[arg(long)]
    liquidity: FixedDecimal,
}

#[derive(Args, Debug)]
struct RemovePositionArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    id: u64,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    trades: PathBuf,
    /// Per-trade outputs as CSV.
    #[arg(long)]
    outputs: Option<PathBuf>,
    /// Save the final state back into the pool file.
    #[arg(long)]
    write: bool,
}

#[derive(Args, Debug)]
struct GenTradesArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Largest trade as a fraction of the input token's reserve.
    #[arg(long, default_value = "0.05")]
    max_fraction: FixedDecimal,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value_t = 0)]
    token_x: usize,
    #[arg(long, default_value_t = 1)]
    token_y: usize,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args, Debug)]
struct FingerprintArgs {
    #[arg(long, default_value = "ccmm")]
    mode: FingerprintMode,
    #[arg(long)]
    l: Option<FixedDecimal>,
    #[arg(long, default_value = "1")]
    c: FixedDecimal,
    /// Superellipse α; defaults to 2 + √2.
    #[arg(long)]
    alpha: Option<FixedDecimal>,
    #[arg(long, default_value = "1")]
    s_x: FixedDecimal,
    #[arg(long, default_value = "1")]
    s_y: FixedDecimal,
    /// Base radius of the multimodal curve.
    #[arg(long = "big-l", default_value = "1")]
    big_l: FixedDecimal,
    /// Ripple frequency of the multimodal curve.
    #[arg(long, default_value_t = 4)]
    alpha_mm: u32,
    #[arg(long, default_value = "-5", allow_hyphen_values = true)]
    t_min: FixedDecimal,
    #[arg(long, default_value = "5", allow_hyphen_values = true)]
    t_max: FixedDecimal,
    #[arg(long, default_value_t = 201)]
    points: usize,
}

#[derive(Args, Debug)]
struct PayoffArgs {
    /// ccmm or cemm.
    #[arg(long, default_value = "ccmm")]
    mode: FingerprintMode,
    #[arg(long)]
    l: Option<FixedDecimal>,
    #[arg(long, default_value = "1")]
    c: FixedDecimal,
    #[arg(long, default_value = "0.1")]
    p_min: FixedDecimal,
    #[arg(long, default_value = "10")]
    p_max: FixedDecimal,
    #[arg(long, default_value_t = 100)]
    points: usize,
}

#[derive(Args, Debug)]
struct HedgeArgs {
    #[arg(long)]
    strike: FixedDecimal,
    #[arg(long, default_value = "1")]
    width: FixedDecimal,
    #[arg(long, default_value = "1")]
    notional: FixedDecimal,
    #[arg(long, default_value = "0.5")]
    p_min: FixedDecimal,
    #[arg(long, default_value = "1.5")]
    p_max: FixedDecimal,
    #[arg(long, default_value_t = 1001)]
    points: usize,
    /// Also register both bands in this pool's ledger.
    #[arg(long)]
    pool: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Init(a) => commands::init(a),
        Command::Quote(a) => commands::trade(a, false),
        Command::Swap(a) => commands::trade(a, true),
        Command::AddPosition(a) => commands::add_position(a),
        Command::RemovePosition(a) => commands::remove_position(a),
        Command::Replay(a) => commands::replay(a),
        Command::GenTrades(a) => commands::gen_trades(a, cli.seed),
        Command::Curve(a) => commands::curve(a),
        Command::Fingerprint(a) => commands::fingerprint(a),
        Command::Payoff(a) => commands::payoff(a),
        Command::Hedge(a) => commands::hedge(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
