//! Command-line surface: single-point key-rate evaluations and CSV
//! sweeps. Exit codes: 0 on success (including no-key outcomes), 2 on
//! usage or domain errors, 3 on I/O errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use entlink::kopt::{self, EtaMode};
use entlink::strategy::{self, chsh_quartet};
use entlink::{
    basis_grid_oracle, csv_number, devetak_winter_rate, optimal_rate_werner, trajectory,
    werner_from_fidelity, ProtocolKind, StrategyKind,
};

#[derive(Parser)]
#[command(
    name = "entlink",
    version,
    about = "Secure-key rates of entangled links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Bbpssw,
    Dejmps,
}

impl From<ProtocolArg> for ProtocolKind {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Bbpssw => ProtocolKind::bbpssw(),
            ProtocolArg::Dejmps => ProtocolKind::dejmps(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Asym,
    Sym,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Asym => StrategyKind::AsymmetricOptimal,
            StrategyArg::Sym => StrategyKind::Symmetric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EtaModeArg {
    Fixed,
    Scaled,
}

#[derive(Subcommand)]
enum Command {
    /// Key rates of a Werner state: the closed-form optimum, a
    /// brute-force basis search, and the rate of each CHSH basis paired
    /// with its conjugate partner.
    Keyrate {
        /// Fidelity of the Werner state, in [0.25, 1].
        #[arg(long)]
        fidelity: f64,
        /// Resolution of the basis-search grid per angle.
        #[arg(long, default_value_t = 24)]
        grid_steps: usize,
    },
    /// Region map comparing the asymmetric and symmetric processing
    /// strategies over an (eta, F) grid, emitted as CSV.
    Map {
        #[arg(long, default_value_t = 0.005)]
        eta_min: f64,
        #[arg(long, default_value_t = 0.12)]
        eta_max: f64,
        #[arg(long, default_value_t = 0.75)]
        f_min: f64,
        #[arg(long, default_value_t = 1.0)]
        f_max: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal number of distillation iterations for a configuration,
    /// with the bounded search summary and the full rate curve.
    Kopt {
        /// Initial Werner fidelity, in [0.25, 1].
        #[arg(long)]
        f0: f64,
        /// CHSH sift fraction eta at k = 0, in (0, 0.25).
        #[arg(long)]
        eta: f64,
        /// Distillation protocol; no default on purpose.
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        #[arg(long, value_enum, default_value_t = StrategyArg::Asym)]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value_t = EtaModeArg::Fixed)]
        eta_mode: EtaModeArg,
        #[arg(long, default_value_t = 30)]
        k_max: u32,
        /// Curve CSV output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-derive the optimum by exhaustive scan and compare.
        #[arg(long)]
        verify: bool,
    },
    /// Distillation trajectory of a Werner input, emitted as CSV.
    Distill {
        /// Initial Werner fidelity, in [0.25, 1].
        #[arg(long)]
        f0: f64,
        /// Number of iterations.
        #[arg(long)]
        k: u32,
        /// Distillation protocol; no default on purpose.
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Domain(String),
    Io(String),
    Verify(String),
}

impl From<entlink::Error> for CliError {
    fn from(e: entlink::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes through `emit` either to the given file or to stdout.
fn with_output<F>(out: Option<&PathBuf>, emit: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            let mut w = BufWriter::new(file);
            emit(&mut w).map_err(|e| io_error(path, e))?;
            w.flush().map_err(|e| io_error(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            emit(&mut w).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn cmd_keyrate(fidelity: f64, grid_steps: usize) -> Result<(), CliError> {
    let rho = werner_from_fidelity(fidelity)?;
    let optimal = optimal_rate_werner(fidelity)?;
    let oracle = basis_grid_oracle(&rho, grid_steps)?;
    println!("F={}", csv_number(fidelity));
    println!("r_key_opt={}", csv_number(optimal));
    println!("r_key_oracle={}", csv_number(oracle.rate));
    let names = ["BA1", "BA2", "BB1", "BB2"];
    for (basis, name) in chsh_quartet().iter().zip(names) {
        let rate = devetak_winter_rate(&rho, basis, &basis.conjugate()).rate;
        println!("r_key_{name}={}", csv_number(rate));
    }
    Ok(())
}

fn cmd_map(
    eta_range: (f64, f64),
    f_range: (f64, f64),
    steps: usize,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let points = strategy::region_map(eta_range, f_range, steps)?;
    with_output(out, |w| strategy::write_region_csv(&points, w))
}

#[allow(clippy::too_many_arguments)]
fn cmd_kopt(
    f0: f64,
    eta: f64,
    protocol: ProtocolKind,
    strategy_kind: StrategyKind,
    eta_mode: EtaModeArg,
    k_max: u32,
    out: Option<&PathBuf>,
    verify: bool,
) -> Result<(), CliError> {
    let mode = match eta_mode {
        EtaModeArg::Fixed => EtaMode::Fixed(eta),
        EtaModeArg::Scaled => EtaMode::Scaled(eta),
    };
    let result = kopt::find_k_opt(f0, protocol, &strategy_kind, mode, k_max)?;
    println!("{}", kopt::summary_header());
    println!("{}", kopt::summary_values(&result));
    if result.no_key {
        println!("no_key=true");
    }
    if result.saturated {
        println!("saturated=true");
    }
    if verify {
        let curve = kopt::rate_curve(f0, protocol, &strategy_kind, mode, k_max)?;
        let mut best = (0u32, f64::NEG_INFINITY);
        for p in &curve {
            if p.r_total > best.1 {
                best = (p.k, p.r_total);
            }
        }
        println!("k_opt_exhaustive={}", best.0);
        if best.0 == result.k_opt {
            println!("verify=ok");
        } else {
            return Err(CliError::Verify(format!(
                "bounded search found k_opt={} but the exhaustive scan found {}",
                result.k_opt, best.0
            )));
        }
    }
    with_output(out, |w| kopt::write_curve_csv(&result.rate_curve, w))
}

fn cmd_distill(
    f0: f64,
    k: u32,
    protocol: ProtocolKind,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let t = trajectory(f0, k, protocol)?;
    with_output(out, |w| {
        writeln!(w, "d,F,p_ent,r_ent_cumulative")?;
        let mut cumulative = 1.0;
        for (d, state) in t.states().iter().enumerate() {
            // Row d carries the success probability of the step that
            // produced state d; the d = 0 row reports the yield of
            // "no distillation", which is one by definition.
            let p = if d == 0 {
                1.0
            } else {
                t.success_probabilities()[d - 1]
            };
            if d > 0 {
                cumulative *= p / 2.0;
            }
            writeln!(
                w,
                "{},{},{},{}",
                d,
                csv_number(state.fidelity()),
                csv_number(p),
                csv_number(cumulative)
            )?;
        }
        Ok(())
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Keyrate {
            fidelity,
            grid_steps,
        } => cmd_keyrate(fidelity, grid_steps),
        Command::Map {
            eta_min,
            eta_max,
            f_min,
            f_max,
            steps,
            out,
        } => cmd_map((eta_min, eta_max), (f_min, f_max), steps, out.as_ref()),
        Command::Kopt {
            f0,
            eta,
            protocol,
            strategy,
            eta_mode,
            k_max,
            out,
            verify,
        } => cmd_kopt(
            f0,
            eta,
            protocol.into(),
            strategy.into(),
            eta_mode,
            k_max,
            out.as_ref(),
            verify,
        ),
        Command::Distill {
            f0,
            k,
            protocol,
            out,
        } => cmd_distill(f0, k, protocol.into(), out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Verify(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
