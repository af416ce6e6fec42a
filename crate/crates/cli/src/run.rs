use std::fs;
use std::path::{Path, PathBuf};

use casiga::benchmarks::{run_convergence_with, sample_grid, ConvergenceReport};

use crate::config::RunConfig;
use crate::format::{convergence_table, vtk_structured_grid, write_patch};
use crate::CliError;

#[derive(Debug)]
pub struct RunOutput {
    pub report: ConvergenceReport,
    /// Every file written, in the order written.
    pub files: Vec<PathBuf>,
}

/// Common stem of the output files, e.g. `plate_hole_cas1_q2`.
pub fn file_stem(config: &RunConfig) -> String {
    format!("{}_{}_q{}", config.benchmark, config.technology, config.quadrature_points)
}

fn write(path: PathBuf, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(&path, contents)?;
    files.push(path);
    Ok(())
}

/// Runs the convergence study and writes into `config.out_dir`:
/// `<stem>.cfg` (the config), `<stem>.csv` (the table) and, for the finest
/// level, `<stem>_level<l>.patch` and, unless sampling is off,
/// `<stem>_level<l>.vtk`.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let dir: &Path = &config.out_dir;
    fs::create_dir_all(dir)?;
    let stem = file_stem(config);
    let mut files = Vec::new();
    write(dir.join(format!("{stem}.cfg")), &config.to_string(), &mut files)?;

    let mut level = 0;
    let mut finest = Vec::new();
    let report = run_convergence_with(
        config.benchmark,
        config.technology,
        config.quadrature_points,
        config.levels,
        |solved| {
            level += 1;
            if level == config.levels {
                let name = format!("{stem}_level{level}");
                finest.push((format!("{name}.patch"), write_patch(solved.mesh.patch())));
                if config.samples_per_element > 0 {
                    let grid = sample_grid(&solved.evaluator(), config.samples_per_element)?;
                    let title = format!(
                        "{} {} q{} level {level}, {} elements per direction",
                        config.benchmark,
                        config.technology,
                        config.quadrature_points,
                        solved.elements_per_direction()
                    );
                    finest.push((format!("{name}.vtk"), vtk_structured_grid(&title, &grid, solved.material.poisson())));
                }
            }
            Ok(())
        },
    )?;
    write(dir.join(format!("{stem}.csv")), &convergence_table(&report), &mut files)?;
    for (name, contents) in finest {
        write(dir.join(name), &contents, &mut files)?;
    }
    Ok(RunOutput { report, files })
}
