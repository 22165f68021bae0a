use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwsearch_cli::{execute, CliError, Command, Overrides, RawConfig};

#[derive(Parser)]
#[command(
    name = "qwsearch",
    version,
    about = "Quantum walk search experiments on weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Laplacian and Hamiltonian spectra plus a measure summary.
    Spectrum(Common),
    /// Critical couplings, optimum and energies for each p.
    Tables(Common),
    /// Data behind the overlap, contour, time-series and volume figures.
    Figures(Common),
    /// The optimal (t, gamma) pair for one graph.
    Optimize(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Lower end of the optimizer's gamma range (overrides sweep.gamma_min).
    #[arg(long, allow_negative_numbers = true)]
    gamma_min: Option<f64>,
    /// Upper end of the optimizer's gamma range (overrides sweep.gamma_max).
    #[arg(long, allow_negative_numbers = true)]
    gamma_max: Option<f64>,
    /// Coarse gamma grid size (overrides sweep.gamma_points).
    #[arg(long, allow_negative_numbers = true)]
    gamma_points: Option<i64>,
    /// Time grid size (overrides sweep.t_points).
    #[arg(long, allow_negative_numbers = true)]
    t_points: Option<i64>,
}

fn run(command: Command, args: &Common) -> Result<(), CliError> {
    let mut raw = RawConfig::load(&args.config)?;
    raw.apply(&Overrides {
        out: args.out.clone(),
        gamma_min: args.gamma_min,
        gamma_max: args.gamma_max,
        gamma_points: args.gamma_points,
        t_points: args.t_points,
    });
    let (out, written) = execute(command, &raw, args.threads)?;
    for d in &out.diagnostics {
        eprintln!("warning: {d}");
    }
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Tables(a) => (Command::Tables, a),
        Sub::Figures(a) => (Command::Figures, a),
        Sub::Optimize(a) => (Command::Optimize, a),
    };
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
