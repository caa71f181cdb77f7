//! The command surface of the `glocal` binary.
//!
//! Every command reads JSON files (see [`crate::io`] for the formats),
//! prints one canonical JSON report to stdout, and optionally writes its
//! primary artifact to `--out`: snapshots for `surrogate` and `evolve`, a
//! CSV trace for `converge`, the completed basis for `groebner`. `surrogate
//! --out x.json` additionally writes grid plot data of the reconstruction
//! to `x.csv`.
//!
//! Exit codes: `0` success (including soft-flagged outcomes such as an
//! underdetermined gluing or an exhausted convergence budget), `2` unusable
//! input (parse, schema, or validation failures), `3` mathematically
//! incompatible input (boundary conflicts, inconsistent evolution, a degree
//! override below what the data needs), `4` a resource cap was hit.
//! Reports are deterministic for a fixed seed.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arrangement::ArrangementError;
use crate::glue;
use crate::groebner::{self, GroebnerError};
use crate::io::{self, IoError};
use crate::problems::{LocalProblem, ProblemError};
use crate::solver::SolveError;
use crate::space::{Shape, SpaceError, Vector};
use crate::surrogate::{
    build_state, convergence_run, evolve, BuildOptions, SurrogateError, SurrogateState,
};

const DEFAULT_SAMPLES: usize = 200;
const DEFAULT_SEED: u64 = 7;
/// Target number of rows in the reconstruction plot grid.
const PLOT_BUDGET: usize = 4096;
/// Per-dimension cap on plot grid resolution.
const PLOT_MAX_PER_DIM: usize = 256;
const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "glocal",
    version,
    about = "Local-to-global polynomial optimization: solve, glue, reconstruct, evolve."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve each local problem and print certified maximizers.
    Solve {
        /// Problem file (JSON).
        file: PathBuf,
        /// Write the report here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Intersect the per-problem solution constraints into one global point.
    Glue {
        /// Problem file (JSON).
        file: PathBuf,
        /// Write the report here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the piecewise reconstruction and report its maximal elements.
    Surrogate {
        /// Problem file (JSON).
        file: PathBuf,
        /// Family degree override; the degree law decides when absent.
        #[arg(long)]
        degree: Option<usize>,
        /// Sample budget for fits and sampled checks.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Seed for every sampled check.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the state snapshot here (plus plot data at `.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refine a saved state with the problems of another file.
    Evolve {
        /// State snapshot written by `surrogate` or `evolve`.
        state: PathBuf,
        /// Problem file with the new local problems (JSON).
        file: PathBuf,
        /// Override the snapshot's degree option.
        #[arg(long)]
        degree: Option<usize>,
        /// Override the snapshot's sample budget.
        #[arg(long)]
        samples: Option<usize>,
        /// Override the snapshot's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the refined snapshot here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a scenario's problem sequence against its true utility.
    Converge {
        /// Scenario file (JSON).
        scenario: PathBuf,
        /// Sample budget for fits and sampled checks.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Seed for every sampled check.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the per-step CSV trace here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complete module generators to a Gröbner basis and certify it.
    Groebner {
        /// Module generator file (JSON).
        file: PathBuf,
        /// Write the completed basis here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

fn space_code(e: &SpaceError) -> i32 {
    match e {
        SpaceError::CapExceeded(_) => 4,
        _ => 2,
    }
}

fn problem_code(e: &ProblemError) -> i32 {
    match e {
        ProblemError::Space(s) => space_code(s),
        ProblemError::Solve(SolveError::CapExceeded(_)) => 4,
        _ => 2,
    }
}

fn arrangement_code(e: &ArrangementError) -> i32 {
    match e {
        ArrangementError::LatticeCap(_) => 4,
        ArrangementError::Space(s) => space_code(s),
        ArrangementError::FamilySize(_) => 2,
    }
}

fn surrogate_code(e: &SurrogateError) -> i32 {
    match e {
        SurrogateError::DegreeCap(_) | SurrogateError::Cap(_) => 4,
        SurrogateError::DegreeTooLow { .. }
        | SurrogateError::ConflictingBoundary { .. }
        | SurrogateError::Incompatible { .. }
        | SurrogateError::UnsupportedGeometry(_)
        | SurrogateError::UnboundedRegion => 3,
        SurrogateError::InvalidInput(_) => 2,
        SurrogateError::Space(s) => space_code(s),
        SurrogateError::Arrangement(a) => arrangement_code(a),
        SurrogateError::Problem(p) => problem_code(p),
        SurrogateError::Solve(SolveError::CapExceeded(_)) => 4,
        SurrogateError::Solve(_) => 2,
    }
}

impl CliError {
    /// 2 = unusable input, 3 = mathematically incompatible, 4 = cap hit.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Problem(e) => problem_code(e),
            CliError::Surrogate(e) => surrogate_code(e),
            CliError::Groebner(GroebnerError::CapExceeded { .. }) => 4,
            CliError::Groebner(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parse `args` (`argv[0]` included), run the command, print its report to
/// stdout, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version to stdout (exit 0) and usage errors
            // to stderr (exit 2) by itself.
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(cli.command) {
        Ok(report) => {
            print!("{}", io::canonical_string(&report));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: Command) -> Result<Value> {
    match command {
        Command::Solve { file, out } => cmd_solve(&file, out.as_deref()),
        Command::Glue { file, out } => cmd_glue(&file, out.as_deref()),
        Command::Surrogate {
            file,
            degree,
            samples,
            seed,
            out,
        } => cmd_surrogate(&file, degree, samples, seed, out.as_deref()),
        Command::Evolve {
            state,
            file,
            degree,
            samples,
            seed,
            out,
        } => cmd_evolve(&state, &file, degree, samples, seed, out.as_deref()),
        Command::Converge {
            scenario,
            samples,
            seed,
            out,
        } => cmd_converge(&scenario, samples, seed, out.as_deref()),
        Command::Groebner { file, out } => cmd_groebner(&file, out.as_deref()),
    }
}

fn load_problems(path: &Path) -> Result<(usize, Vec<LocalProblem>)> {
    let text = io::read_text(path)?;
    let repr = io::parse_problem_file(&text)?;
    let problems = io::problems_from_file(&repr)?;
    Ok((repr.ambient_dim, problems))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    if let Some(path) = out {
        io::write_text(path, text)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// solve

pub fn cmd_solve(file: &Path, out: Option<&Path>) -> Result<Value> {
    let (ambient, mut problems) = load_problems(file)?;
    let mut rows = Vec::with_capacity(problems.len());
    for p in &mut problems {
        p.solve()?;
        p.verify_solutions()?;
        let solutions: Vec<Vec<f64>> = p.solutions.iter().map(|s| s.0.clone()).collect();
        rows.push(json!({
            "id": p.id,
            "solutions": solutions,
            "value": p.value,
            "certificate": serde_json::to_value(p.certificate.as_ref()).expect("serializable"),
        }));
    }
    let report = json!({ "ambient_dim": ambient, "problems": rows });
    write_out(out, &io::canonical_string(&report))?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// glue

pub fn cmd_glue(file: &Path, out: Option<&Path>) -> Result<Value> {
    let (_, mut problems) = load_problems(file)?;
    for p in &mut problems {
        p.solve()?;
    }
    let result = glue::glue(&problems)?;
    let affine = result.affine.as_ref().map(|a| {
        json!({
            "point": a.point.0,
            "dims": a.directions.dim(),
        })
    });
    let report = json!({
        "status": serde_json::to_value(result.status).expect("serializable"),
        "point": result.point.0,
        "residual": result.residual,
        "rank": result.rank,
        "equations": result.equations,
        "affine": affine,
        "quality": result.quality,
    });
    write_out(out, &io::canonical_string(&report))?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// surrogate

fn build_options(degree: Option<usize>, samples: usize, seed: u64) -> BuildOptions {
    BuildOptions {
        degree,
        samples,
        seed,
        region: None,
    }
}

/// Grid samples of the reconstruction over the maximization region's
/// bounding box: one row per grid point, `x1,..,xn,class,v`.
pub fn plot_csv(state: &SurrogateState) -> String {
    let n = state.partition.ambient;
    let f = state.reconstruction();
    let (lower, upper) = match &state.region.shape {
        Shape::Box { lower, upper } if state.region.carrier.dim() == n => {
            (lower.clone(), upper.clone())
        }
        _ => (vec![-2.0; n], vec![2.0; n]),
    };
    let per_dim = (PLOT_BUDGET as f64)
        .powf(1.0 / n as f64)
        .floor()
        .clamp(2.0, PLOT_MAX_PER_DIM as f64) as usize;
    let mut csv = String::new();
    for d in 0..n {
        csv.push_str(&format!("x{},", d + 1));
    }
    csv.push_str("class,v\n");
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = (0..n)
            .map(|d| {
                let t = idx[d] as f64 / (per_dim - 1) as f64;
                lower[d] + t * (upper[d] - lower[d])
            })
            .collect();
        let point = Vector(x);
        let class = state.partition.class_of(&point, STABILITY_TOL);
        let value = f.eval(&state.partition, &point);
        for c in &point.0 {
            csv.push_str(&format!("{c},"));
        }
        csv.push_str(&format!("{class},{value}\n"));
        let mut d = 0;
        loop {
            if d == n {
                return csv;
            }
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub fn cmd_surrogate(
    file: &Path,
    degree: Option<usize>,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<Value> {
    let (_, problems) = load_problems(file)?;
    let opts = build_options(degree, samples, seed);
    let state = build_state(problems, &opts)?;
    let snapshot = io::snapshot_json(&state, &opts);
    if let Some(path) = out {
        io::write_text(path, &io::canonical_string(&snapshot))?;
        io::write_text(&path.with_extension("csv"), &plot_csv(&state))?;
    }
    Ok(snapshot)
}

// ---------------------------------------------------------------------------
// evolve

pub fn cmd_evolve(
    state_path: &Path,
    file: &Path,
    degree: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<Value> {
    let text = io::read_text(state_path)?;
    let (problems, mut opts) = io::load_snapshot(&text)?;
    if degree.is_some() {
        opts.degree = degree;
    }
    if let Some(s) = samples {
        opts.samples = s;
    }
    if let Some(s) = seed {
        opts.seed = s;
    }
    let mut state = build_state(problems, &opts)?;
    let (_, new_problems) = load_problems(file)?;
    if new_problems.is_empty() {
        return Err(IoError::Validation("no problems to evolve with".into()).into());
    }
    let mut reports = Vec::with_capacity(new_problems.len());
    for p in new_problems {
        let (next, report) = evolve(&state, p, &opts)?;
        state = next;
        reports.push(report);
    }
    let stability_pass = reports
        .iter()
        .all(|r| r.stability_member_exact && r.stability_max_residual <= STABILITY_TOL);
    let degree_growth_pass = reports.iter().all(|r| r.degree_growth_ok);
    let snapshot = io::snapshot_json(&state, &opts);
    write_out(out, &io::canonical_string(&snapshot))?;
    Ok(json!({
        "steps": serde_json::to_value(&reports).expect("serializable"),
        "stability_verdict": if stability_pass { "PASS" } else { "FAIL" },
        "degree_growth_verdict": if degree_growth_pass { "PASS" } else { "FAIL" },
        "snapshot": snapshot,
    }))
}

// ---------------------------------------------------------------------------
// converge

pub fn cmd_converge(
    scenario: &Path,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<Value> {
    let text = io::read_text(scenario)?;
    let repr = io::parse_scenario(&text)?;
    let utility = io::utility_from_terms(repr.ambient_dim, &repr.true_utility)?;
    let sequence: Vec<LocalProblem> = repr
        .sequence
        .iter()
        .map(|p| io::problem_from_repr(repr.ambient_dim, p))
        .collect::<std::result::Result<_, _>>()?;
    let budget = repr.budget.unwrap_or(sequence.len());
    let opts = build_options(None, samples, seed);
    let report = convergence_run(&utility, sequence, budget, &opts)?;
    write_out(out, &report.to_csv())?;
    Ok(serde_json::to_value(&report).expect("serializable"))
}

// ---------------------------------------------------------------------------
// groebner

pub fn cmd_groebner(file: &Path, out: Option<&Path>) -> Result<Value> {
    let text = io::read_text(file)?;
    let repr = io::parse_module_file(&text)?;
    let generators = io::module_elements_from_file(&repr)?;
    let ord = io::module_order_from_name(repr.order.as_deref())?;
    let basis = groebner::buchberger(&generators, &ord)?;
    let certified = groebner::buchberger_certificate(&basis, &ord);
    let report = json!({
        "nvars": repr.nvars,
        "positions": repr.positions,
        "order": io::module_order_name(&ord),
        "generators": generators.len(),
        "basis": io::module_elements_json(&basis),
        "certificate": {
            "s_vectors_reduce_to_zero": certified,
            "basis_size": basis.len(),
        },
    });
    write_out(out, &io::canonical_string(&report))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{FeasibleSet, Subspace};

    fn unique_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("glocal-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn axes_file(dir: &Path) -> PathBuf {
        let path = dir.join("axes.json");
        let text = r#"{
            "ambient_dim": 2,
            "problems": [
                {
                    "id": "ax",
                    "basis": [[1.0, 0.0]],
                    "feasible": { "type": "box", "lower": [-2.0], "upper": [2.0] },
                    "utility": [
                        { "exponents": [0, 0], "coeff": "3/1" },
                        { "exponents": [1, 0], "coeff": "1/1" },
                        { "exponents": [2, 0], "coeff": "-1/1" }
                    ]
                },
                {
                    "id": "ay",
                    "basis": [[0.0, 1.0]],
                    "feasible": { "type": "box", "lower": [-2.0], "upper": [2.0] },
                    "utility": [
                        { "exponents": [0, 0], "coeff": "3/1" },
                        { "exponents": [0, 1], "coeff": "2/1" },
                        { "exponents": [0, 2], "coeff": "-1/1" }
                    ]
                }
            ]
        }"#;
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn solving_a_family_reports_each_certified_maximizer() {
        let dir = unique_dir("solve");
        let file = axes_file(&dir);
        let report = cmd_solve(&file, None).unwrap();
        let rows = report["problems"].as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["solutions"][0][0].as_f64().unwrap(), 0.5);
        assert_eq!(rows[1]["solutions"][0][1].as_f64().unwrap(), 1.0);
        assert_eq!(rows[1]["value"].as_f64().unwrap(), 4.0);
    }

    #[test]
    fn gluing_the_axes_family_pins_the_crossing_point() {
        let dir = unique_dir("glue");
        let file = axes_file(&dir);
        let report = cmd_glue(&file, None).unwrap();
        assert_eq!(report["status"], "exact_point");
        assert_eq!(report["point"][0].as_f64().unwrap(), 0.5);
        assert_eq!(report["point"][1].as_f64().unwrap(), 1.0);
        assert!(report["residual"].as_f64().unwrap() <= 1e-12);
    }

    #[test]
    fn surrogate_snapshots_reload_into_the_same_bytes() {
        let dir = unique_dir("surrogate");
        let file = axes_file(&dir);
        let out = dir.join("state.json");
        let snapshot = cmd_surrogate(&file, None, 200, 7, Some(&out)).unwrap();
        assert_eq!(snapshot["state"]["r"], 2);
        assert_eq!(snapshot["state"]["lambda"], 4);
        let written = std::fs::read_to_string(&out).unwrap();
        assert_eq!(written, io::canonical_string(&snapshot));
        assert!(out.with_extension("csv").exists());

        let (problems, opts) = io::load_snapshot(&written).unwrap();
        let rebuilt = build_state(problems, &opts).unwrap();
        assert_eq!(
            io::canonical_string(&io::snapshot_json(&rebuilt, &opts)),
            written
        );
    }

    #[test]
    fn exit_codes_separate_input_math_and_cap_failures() {
        assert_eq!(
            CliError::from(IoError::Schema("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::from(SurrogateError::DegreeTooLow {
                given: 1,
                required: 2
            })
            .exit_code(),
            3
        );
        assert_eq!(
            CliError::from(SurrogateError::DegreeCap(9)).exit_code(),
            4
        );
        assert_eq!(
            CliError::from(GroebnerError::CapExceeded {
                reason: "x".into(),
                partial: vec![],
            })
            .exit_code(),
            4
        );
        assert_eq!(
            CliError::from(ProblemError::InvalidInput("x".into())).exit_code(),
            2
        );
    }

    #[test]
    fn plot_grids_cover_the_region_box() {
        let n = 2;
        let full = Subspace::full(n);
        let feasible = FeasibleSet::new(
            full,
            Shape::Box {
                lower: vec![-1.0, -1.0],
                upper: vec![1.0, 1.0],
            },
        )
        .unwrap();
        let u = crate::poly::demo_utility();
        let problem = LocalProblem::new("box", feasible, u).unwrap();
        let state = build_state(vec![problem], &BuildOptions::default()).unwrap();
        let csv = plot_csv(&state);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x1,x2,class,v");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 64 * 64);
        assert!(rows.iter().all(|r| r.split(',').count() == 4));
    }
}
