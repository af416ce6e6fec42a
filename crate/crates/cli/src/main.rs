use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use casiga::benchmarks::BenchmarkKind;
use casiga_cli::format::{num, read_patch, write_patch};
use casiga_cli::{run, CliError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "casiga", version, about = "Locking-free quadratic NURBS benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write the table and field files.
    ///
    /// Settings are applied in order: config file, key=value pairs, flags.
    Run {
        /// Config file in key=value form.
        #[arg(long)]
        config: Option<PathBuf>,
        /// cook, plate_hole or block3d.
        #[arg(long)]
        benchmark: Option<String>,
        /// cs, cas1 or cas2.
        #[arg(long)]
        technology: Option<String>,
        /// Gauss points per direction (2 or 3).
        #[arg(long)]
        quad: Option<String>,
        #[arg(long)]
        levels: Option<String>,
        #[arg(long)]
        out: Option<String>,
        /// Field sample intervals per element and direction (0 = no field file).
        #[arg(long)]
        samples: Option<String>,
        /// Extra settings as key=value.
        pairs: Vec<String>,
    },
    /// Write the benchmark geometry with `elements` per direction as a patch file.
    Patch {
        benchmark: String,
        #[arg(default_value_t = 2)]
        elements: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Read a patch file and print a summary.
    Inspect { file: PathBuf },
}

fn config_from_args(
    config: Option<PathBuf>,
    flags: [(&str, Option<String>); 6],
    pairs: Vec<String>,
) -> Result<RunConfig, CliError> {
    let mut all: Vec<String> = Vec::new();
    if let Some(path) = config {
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        all.extend(
            text.lines()
                .map(|l| l.strip_suffix('\r').unwrap_or(l))
                .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
                .map(str::to_owned),
        );
    }
    all.extend(pairs);
    for (key, value) in flags {
        if let Some(v) = value {
            all.push(format!("{key}={v}"));
        }
    }
    RunConfig::from_pairs(all.iter().map(String::as_str))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            benchmark,
            technology,
            quad,
            levels,
            out,
            samples,
            pairs,
        } => {
            let config = config_from_args(
                config,
                [
                    ("benchmark", benchmark),
                    ("technology", technology),
                    ("quad", quad),
                    ("levels", levels),
                    ("out", out),
                    ("samples", samples),
                ],
                pairs,
            )?;
            let output = run(&config)?;
            println!("{:>5} {:>5} {:>9} {:>24} {:>24} {:>24}", "level", "n_el", "unknowns", "qoi", "e_L2(u)", "e_L2(sigma)");
            let show = |v: Option<f64>| v.map(num).unwrap_or_else(|| "-".into());
            for r in &output.report.rows {
                println!(
                    "{:>5} {:>5} {:>9} {:>24} {:>24} {:>24}",
                    r.level,
                    r.elements_per_direction,
                    r.unknowns,
                    show(r.qoi),
                    show(r.error_displacement),
                    show(r.error_stress)
                );
            }
            for f in &output.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Patch {
            benchmark,
            elements,
            output,
        } => {
            let kind: BenchmarkKind = benchmark.parse().map_err(CliError::Config)?;
            if elements == 0 {
                return Err(CliError::Config("elements must be positive".into()));
            }
            let text = write_patch(kind.case(elements)?.mesh.patch());
            match output {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Inspect { file } => {
            let patch = read_patch(&fs::read_to_string(&file)?)?;
            let e = patch.element_counts();
            println!("dim {}", patch.dim());
            println!("elements {}", e[..patch.dim()].iter().map(usize::to_string).collect::<Vec<_>>().join(" x "));
            println!("control points {}", patch.num_control_points());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
