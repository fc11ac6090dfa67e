//! Scenario runner for `revtherm-core`: reads JSON scenarios, dispatches to the
//! library and writes deterministic JSON reports plus CSV series.

pub mod report;
pub mod scenario;
pub mod tasks;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use report::{write_atomic, Run, Units};
use scenario::{parse_scenario, ExitStatus, Failure, Outcome, Task};
use tasks::Options;

#[derive(Debug, Parser)]
#[command(name = "revtherm", version, about = "Run thermodynamics-of-computation scenarios")]
struct Args {
    /// A task name (classify, entropy-decompose, implements-check, landauer,
    /// thermo-check, cto-check, gksl-evolve, gksl-asymptotic, adiabatic-sweep) or `batch`.
    command: String,
    /// Scenario file; repeat for batch runs.
    #[arg(long, required = true)]
    scenario: Vec<PathBuf>,
    /// Report file, or the report directory in batch mode.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Units::Nats)]
    units: Units,
    /// Overrides the task's primary check tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for CSV side files.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
}

fn options(args: &Args) -> Outcome<Options> {
    if let Some(t) = args.tol {
        if !t.is_finite() || t <= 0.0 {
            return Err(Failure::schema("--tol", format!("must be finite and > 0, got {t}")));
        }
    }
    Ok(Options { units: args.units, tol: args.tol })
}

/// Parses and runs one scenario; `expected` pins the task.
pub fn run_file(path: &Path, expected: Option<Task>, opts: Options) -> Outcome<Run> {
    let scenario = parse_scenario(path)?;
    if let Some(task) = expected {
        if scenario.task != task {
            return Err(Failure::schema(
                "task",
                format!("file declares `{}` but `{}` was requested", scenario.task.name(), task.name()),
            ));
        }
    }
    tasks::run(&scenario, opts, &stem(path))
}

fn emit(run: &Run, out: Option<&Path>, csv_dir: Option<&Path>) -> Outcome<()> {
    if let Some(dir) = csv_dir {
        run.write_tables(dir)?;
    }
    match out {
        Some(path) => write_atomic(path, run.render().as_bytes()),
        None => {
            print!("{}", run.render());
            Ok(())
        }
    }
}

fn single(args: &Args, task: Task) -> Outcome<ExitStatus> {
    let [path] = args.scenario.as_slice() else {
        return Err(Failure::schema("--scenario", "a single task takes exactly one scenario"));
    };
    let run = run_file(path, Some(task), options(args)?)?;
    emit(&run, args.out.as_deref(), args.csv_dir.as_deref())?;
    Ok(run.status())
}

fn batch(args: &Args) -> Outcome<ExitStatus> {
    let out = args.out.as_deref().ok_or_else(|| Failure::schema("--out", "batch mode needs a report directory"))?;
    let opts = options(args)?;
    let mut stems: Vec<String> = args.scenario.iter().map(|p| stem(p)).collect();
    stems.sort();
    if stems.windows(2).any(|w| w[0] == w[1]) {
        return Err(Failure::schema("--scenario", "batch scenarios must have distinct file names"));
    }
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::new(ExitStatus::MissingFile, format!("cannot create {}: {e}", out.display())))?;
    let csv_dir = args.csv_dir.as_deref().unwrap_or(out);
    let results: Vec<Outcome<ExitStatus>> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .scenario
            .iter()
            .map(|path| {
                s.spawn(move || {
                    let run = run_file(path, None, opts)?;
                    emit(&run, Some(&out.join(format!("{}.report.json", stem(path)))), Some(csv_dir))?;
                    Ok(run.status())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario worker panicked")).collect()
    });
    let mut worst = ExitStatus::Ok;
    for (path, result) in args.scenario.iter().zip(results) {
        let status = match result {
            Ok(status) => {
                println!("{}: exit {}", path.display(), status as u8);
                status
            }
            Err(f) => {
                println!("{}: exit {}", path.display(), f.status as u8);
                eprintln!("{}: {f}", path.display());
                f.status
            }
        };
        worst = worst.max(status);
    }
    Ok(worst)
}

/// Entry point behind the binary; returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Schema } else { ExitStatus::Ok };
        }
    };
    let outcome = if args.command == "batch" {
        batch(&args)
    } else {
        match Task::from_str(&args.command, false) {
            Ok(task) => single(&args, task),
            Err(_) => Err(Failure::schema("command", format!("unknown task `{}`", args.command))),
        }
    };
    match outcome {
        Ok(status) => status,
        Err(f) => {
            eprintln!("error: {f}");
            f.status
        }
    }
}
