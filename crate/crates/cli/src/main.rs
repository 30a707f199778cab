use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ucfem::harness::{
    run_experiment, series_rates, ConvergenceRecord, ExperimentConfig, Preset, SolutionId,
    DEFAULT_MESH_SIZES,
};
use ucfem::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "uc-fem", version, about = "Convergence studies for stabilized unique continuation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a preset study and write <preset>.csv and <preset>.svg.
    Run(RunArgs),
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// fig1, fig2, fig3, fig4 or custom
    #[arg(long)]
    preset: Preset,
    /// Subdivisions per side, strictly increasing.
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = DEFAULT_MESH_SIZES)]
    n_list: Vec<usize>,
    /// Trace dimension; overrides the preset.
    #[arg(long = "N")]
    modes: Option<usize>,
    /// Stabilizer scale, or a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// L² norm of the data noise on the data region.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Manufactured solution for the custom preset: simple, perturbed or modeN.
    #[arg(long)]
    solution: Option<SolutionId>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Write each global matrix in Matrix Market format next to the CSV.
    #[arg(long)]
    dump_matrix: bool,
    /// Fill the seconds column with wall time (the CSV is then not reproducible).
    #[arg(long)]
    timing: bool,
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::SolverFailure { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn print_table(records: &[ConvergenceRecord]) {
    println!(
        "{:<28} {:>5} {:>11} {:>11} {:>11} {:>9}",
        "series", "n", "err_h1", "err_l2", "est_total", "C(u)"
    );
    for r in records {
        println!(
            "{:<28} {:>5} {:>11.4e} {:>11.4e} {:>11.4e} {:>9.4}",
            r.series.label(),
            r.n,
            r.err_h1,
            r.err_l2,
            r.estimator.total,
            r.ratio_c
        );
    }
}

fn run(args: RunArgs) -> ExitCode {
    let config = ExperimentConfig {
        preset: args.preset,
        mesh_sizes: args.n_list,
        modes: args.modes,
        gammas: args.gamma,
        solution: args.solution,
        delta: args.delta,
        seed: args.seed,
        out_dir: Some(args.out),
        dump_matrix: args.dump_matrix,
        record_timing: args.timing,
    };
    match run_experiment(&config) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            print_table(&out.records);
            for (series, rate) in series_rates(&out.records) {
                match rate {
                    Some(r) => println!("slope {}: {r:.3}", series.label()),
                    None => println!("slope {}: n/a", series.label()),
                }
            }
            for path in [&out.csv_path, &out.svg_path].into_iter().flatten() {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            if failure.partial.is_empty() {
                eprintln!("error: {}", failure.error);
            } else {
                eprintln!("error: {failure}");
                print_table(&failure.partial);
            }
            ExitCode::from(exit_code(&failure.error))
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        let solver = Error::SolverFailure {
            message: "singular".into(),
            residual: 1.0,
        };
        assert_eq!(exit_code(&solver), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), EXIT_CONFIG);
    }

    #[test]
    fn gamma_accepts_a_list() {
        let cli = Cli::try_parse_from(["uc-fem", "run", "--preset", "fig1", "--gamma", "1,0.01,0"]).unwrap();
        let Command::Run(args) = cli.command;
        assert_eq!(args.gamma, Some(vec![1.0, 0.01, 0.0]));
        assert_eq!(args.n_list, DEFAULT_MESH_SIZES.to_vec());
    }
}
