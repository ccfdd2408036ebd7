//! Benchmark problems, convergence studies, rate fits and reports.

mod cases;
mod checks;
mod fit;
mod options;
mod reference;
mod report;
mod study;

pub use cases::TestCase;
pub use checks::{
    check_hp_uniform, check_patch, check_projectors, check_structure, random_star_polygon, run_checks, CheckResult,
};
pub use fit::{fit_rates, fit_series, Fit, FitModel, ERROR_FLOOR};
pub use options::{StudyOptions, DEFAULT_LLOYD};
pub use reference::{
    data_dir, format_reference, parse_reference, read_reference, reference_spectrum, Provenance, ReferenceSpectrum,
};
pub use report::{csv_writer, emit_csv, parse_csv, summary, write_csv_rows, CSV_HEADER};
pub use study::{
    aitken, build_mesh, generate_reference, pair_by_multiplicity, run_study, run_study_with, solve_case, Abscissa,
    ConvergenceRecord, DegreeSpec, EigenError, MeshSpec, ReferenceRun, Regime, Solution, StudyConfig,
};
