use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chronoscope::experiment_harness::{
    load_bundle, meta_path, nested_path, run_to_path, summarize, ExperimentConfig, ExperimentId, Reduction,
};
use chronoscope::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Subsystem Fisher-information experiments on chaotic spin chains.
///
/// Exit codes: 0 success, 2 invalid config or arguments, 3 numerical
/// failure, 1 I/O failure.
#[derive(Parser)]
#[command(name = "chronoscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON config; fields left out take the experiment's defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (sidecars are written next to it).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Use the ensemble sizes of the published figures.
    #[arg(long)]
    paper_scale: bool,
    /// Ensemble size (overrides the config; ignored with --paper-scale).
    #[arg(long)]
    samples: Option<usize>,
    /// Discard an existing output instead of resuming it.
    #[arg(long)]
    fresh: bool,
    /// Print the late-time summary after the run.
    #[arg(long)]
    summary: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionArg {
    Mean,
    Median,
}

#[derive(Subcommand)]
enum Command {
    /// Subsystem QFI, its split and the computational-basis CFI against time.
    QfiScan(RunArgs),
    /// Boundary-dissipated open chain: entropy, QFI and generator gap.
    Lindblad(RunArgs),
    /// Late-time subsystem QFI against the Haar-average predictions.
    HaarSat(RunArgs),
    /// Computational-basis CFI and its random-state saturation values.
    CfiScan(RunArgs),
    /// Maximum-likelihood time estimates from simulated measurements.
    Mle(RunArgs),
    /// Evolving-versus-equilibrium discrimination runs.
    Discriminate(RunArgs),
    /// Brownian-GUE closed-form curves.
    Bgue(RunArgs),
    /// Trace-distance closed forms against Haar sampling.
    Tracedist(RunArgs),
    /// Holevo fidelity of a state and its energy-conjugate partner.
    Fidelity(RunArgs),
    /// Radiation QFI of an evaporating black hole.
    Blackhole(RunArgs),
    /// Same as qfi-scan on the XXZ chain.
    XxzScan(RunArgs),
    /// Late-time window averages of a finished run.
    Summarize {
        /// CSV written by a run.
        path: PathBuf,
        #[arg(long, value_enum, default_value = "mean")]
        reduction: ReductionArg,
        /// Window `LO HI`; defaults to the run's configured window.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
    },
    /// Print the fully resolved default config of an experiment.
    Defaults { experiment: String },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else if matches!(e, Error::Io(_)) {
        1
    } else {
        3
    }
}

fn load_config(id: ExperimentId, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut c = match &args.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::new(id),
    };
    if c.experiment != id {
        return Err(Error::Config(format!(
            "experiment: config names {} but the subcommand is {id}",
            c.experiment
        )));
    }
    if let Some(s) = args.seed {
        c.master_seed = s;
    }
    if let Some(o) = &args.out {
        c.out = Some(o.clone());
    }
    if let Some(s) = args.samples {
        c.samples = Some(s);
    }
    c.paper_scale |= args.paper_scale;
    c.resolve()
}

fn remove_outputs(path: &Path) -> Result<(), Error> {
    for p in [path.to_path_buf(), meta_path(path), nested_path(path)] {
        if p.exists() {
            std::fs::remove_file(p)?;
        }
    }
    Ok(())
}

fn print_summary(path: &Path, reduction: Reduction, window: Option<[f64; 2]>) -> Result<(), Error> {
    let b = load_bundle(path)?;
    let w = window.unwrap_or(b.config.params.window);
    let s = summarize(&b, reduction, w)?;
    println!("n,n_a,column,value,std_err,samples");
    for r in &s.rows {
        println!("{},{},{},{},{},{}", r.n, r.n_a, r.column, r.value, r.std_err, r.samples);
    }
    if !s.collapse.is_empty() {
        println!();
        println!("n,n_a,2n_a-n,log_f_a");
        for p in &s.collapse {
            println!("{},{},{},{}", p.n, p.n_a, p.x, p.log_value);
        }
    }
    Ok(())
}

fn run_experiment(id: ExperimentId, args: &RunArgs) -> Result<(), Error> {
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(Error::Config("--threads: must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    }
    let c = load_config(id, args)?;
    let out = c.out.clone().expect("resolved config has an output path");
    if args.fresh {
        remove_outputs(&out)?;
    }
    let b = run_to_path(&c)?;
    eprintln!(
        "{id}: {} rows in {:.1} s ({} of {} tasks resumed) -> {}",
        b.rows.len(),
        b.meta.wall_seconds,
        b.meta.resumed_tasks,
        b.meta.tasks,
        out.display()
    );
    if args.summary {
        print_summary(&out, Reduction::Mean, None)?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    use ExperimentId as E;
    let (id, args) = match cli.command {
        Command::Summarize {
            path,
            reduction,
            window,
        } => {
            let r = match reduction {
                ReductionArg::Mean => Reduction::Mean,
                ReductionArg::Median => Reduction::Median,
            };
            return print_summary(&path, r, window.map(|w| [w[0], w[1]]));
        }
        Command::Defaults { experiment } => {
            let id = ExperimentId::from_name(&experiment)
                .ok_or_else(|| Error::Config(format!("experiment: unknown id {experiment}")))?;
            println!("{}", serde_json::to_string_pretty(&ExperimentConfig::new(id).resolve()?)?);
            return Ok(());
        }
        Command::QfiScan(a) => (E::QfiScan, a),
        Command::Lindblad(a) => (E::Lindblad, a),
        Command::HaarSat(a) => (E::HaarSat, a),
        Command::CfiScan(a) => (E::CfiScan, a),
        Command::Mle(a) => (E::Mle, a),
        Command::Discriminate(a) => (E::Discriminate, a),
        Command::Bgue(a) => (E::Bgue, a),
        Command::Tracedist(a) => (E::Tracedist, a),
        Command::Fidelity(a) => (E::Fidelity, a),
        Command::Blackhole(a) => (E::Blackhole, a),
        Command::XxzScan(a) => (E::XxzScan, a),
    };
    run_experiment(id, &args)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
