use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anticyc_cli::commands::{DEFAULT_PRECISION, DEFAULT_TRIALS};
use anticyc_cli::{
    cmd_audit_parity_file, cmd_check_records, cmd_growth, cmd_lemma2_campaign, cmd_verify_lemma1, metacyclic_grid,
    Format, Report, Settings, ZetaSpec,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "anticyc", version, about = "Parity and growth audits for anti-cyclotomic Iwasawa data")]
struct Cli {
    /// p-adic precision N (work modulo p^N).
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Seed for randomized campaigns.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Omit wall-clock fields so reports are byte-identical across runs.
    #[arg(long, global = true)]
    no_timestamps: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Search G(p,u) = Z/p^(u+1) ⋊ Z/p for automorphisms sending τ into A₁τ⁻¹.
    VerifyLemma1 {
        #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5, 7])]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        u_max: u32,
        /// Explicit pairs p:u, overriding --primes/--u-max.
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairs: Option<Vec<(u64, u32)>>,
    },
    /// Random intertwiner trials and constructed orbit controls.
    Lemma2Campaign {
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3])]
        ranks: Vec<usize>,
        /// -1, an integer, or teich:<a> for the Teichmüller lift of a.
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        zeta: String,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Layer exponents e_n of an elementary Λ-module and fitted invariants.
    Growth {
        #[arg(long)]
        p: u64,
        /// Comma-separated factors, e.g. "T-3,p^1".
        #[arg(long)]
        module: String,
        #[arg(long, default_value_t = 5)]
        n_max: u32,
    },
    /// Validate a JSON matrix model and check r ≡ s mod d.
    AuditParity { model: PathBuf },
    /// Check line-delimited class-group records.
    CheckRecords { path: PathBuf },
}

fn parse_pair(s: &str) -> Result<(u64, u32), String> {
    let (p, u) = s.split_once(':').ok_or_else(|| format!("expected p:u, got {s:?}"))?;
    Ok((
        p.trim().parse().map_err(|_| format!("bad prime {p:?}"))?,
        u.trim().parse().map_err(|_| format!("bad u {u:?}"))?,
    ))
}

fn run(cli: &Cli) -> Report {
    let settings = Settings {
        precision: cli.precision,
        seed: cli.seed,
    };
    match &cli.command {
        Command::VerifyLemma1 { primes, u_max, pairs } => {
            let grid = pairs.clone().unwrap_or_else(|| metacyclic_grid(primes, *u_max));
            cmd_verify_lemma1(&grid, &settings)
        }
        Command::Lemma2Campaign { p, ranks, zeta, trials } => match ZetaSpec::parse(zeta) {
            Ok(z) => cmd_lemma2_campaign(*p, ranks, &z, *trials, &settings),
            Err(e) => Report::new("lemma2-campaign", cli.seed).reject(e),
        },
        Command::Growth { p, module, n_max } => cmd_growth(*p, module, *n_max, &settings),
        Command::AuditParity { model } => cmd_audit_parity_file(model, &settings),
        Command::CheckRecords { path } => match File::open(path) {
            Ok(f) => cmd_check_records(BufReader::new(f), &settings),
            Err(e) => Report::new("check-records", cli.seed).reject(format!("{}: {e}", path.display())),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let report = run(&cli);
    let format = match cli.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    };
    print!("{}", report.render(format, !cli.no_timestamps));
    if let Some(e) = &report.input_error {
        eprintln!("error: {e}");
    }
    ExitCode::from(report.exit_code() as u8)
}
