use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use geopriv::dataset::CellMembership;
use geopriv::statcheck::Tamper;
use geopriv_bench::{all_checks_passed, run, write_csv, ExperimentConfig, InputSpec, Task};

#[derive(Parser)]
#[command(name = "geopriv-bench", about = "Run geo-privacy experiments and emit CSV tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-point release of the whole tuple.
    Identity(Options),
    /// Private k-nearest neighbours.
    Knn(Options),
    /// Private convex hull.
    Hull(Options),
    /// Statistical verification of the noise distributions.
    Verify(Options),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Membership {
    Points,
    Segments,
}

#[derive(Clone, Copy, ValueEnum)]
enum TamperArg {
    GpTail,
    CgpTail,
    LaplaceSumPdf,
}

#[derive(Args)]
struct Options {
    /// Comma-separated CGP rates.
    #[arg(long, value_delimiter = ',')]
    rho_grid: Option<Vec<f64>>,
    /// Comma-separated GP rates (CGP runs at ε²/2).
    #[arg(long, value_delimiter = ',', conflicts_with = "rho_grid")]
    eps_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    collections: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// `synthetic`, `synthetic:uniform`, `synthetic:walk` or a trace path.
    #[arg(long, default_value = "synthetic")]
    input: String,
    /// Replace every noise draw by its mean.
    #[arg(long)]
    zero_noise: bool,
    #[arg(long, value_enum, default_value_t = Membership::Points)]
    cell_membership: Membership,
    /// Score kNN baselines by true distances of the selected points.
    #[arg(long)]
    baseline_true_distances: bool,
    #[arg(long, default_value_t = 1_000_000)]
    verify_samples: usize,
    #[arg(long, default_value_t = 100_000)]
    verify_mean_samples: usize,
    /// Test hook: verify against a wrong closed form.
    #[arg(long, value_enum)]
    tamper: Option<TamperArg>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl Options {
    fn into_config(self, task: Task) -> ExperimentConfig {
        let defaults = ExperimentConfig::default();
        ExperimentConfig {
            task,
            rho_grid: self.rho_grid.unwrap_or(defaults.rho_grid),
            eps_grid: self.eps_grid,
            n_grid: self.n_grid.unwrap_or(defaults.n_grid),
            k_grid: self.k_grid.unwrap_or(defaults.k_grid),
            trials: self.trials,
            collections: self.collections,
            seed: self.seed,
            delta: self.delta,
            beta: self.beta,
            input: InputSpec::parse(&self.input),
            zero_noise: self.zero_noise,
            cell_membership: match self.cell_membership {
                Membership::Points => CellMembership::Points,
                Membership::Segments => CellMembership::Segments,
            },
            baseline_true_distances: self.baseline_true_distances,
            verify_samples: self.verify_samples,
            verify_mean_samples: self.verify_mean_samples,
            tamper: self.tamper.map(|t| match t {
                TamperArg::GpTail => Tamper::GpTail,
                TamperArg::CgpTail => Tamper::CgpTail,
                TamperArg::LaplaceSumPdf => Tamper::LaplaceSumPdf,
            }),
            ..defaults
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, options) = match cli.command {
        Command::Identity(o) => (Task::Identity, o),
        Command::Knn(o) => (Task::Knn, o),
        Command::Hull(o) => (Task::Hull, o),
        Command::Verify(o) => (Task::Verify, o),
    };
    let out = options.out.clone();
    let Format::Csv = options.format;
    let config = options.into_config(task);

    let rows = match run(&config) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &out {
        Some(path) => File::create(path).map_err(Into::into).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_csv(&mut w, &rows)?;
            w.flush().map_err(Into::into)
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock, &rows)
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if task == Task::Verify && !all_checks_passed(&rows) {
        eprintln!("error: verification failed");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
