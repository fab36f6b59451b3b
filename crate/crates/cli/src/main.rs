use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gpt_core::axioms::verify_theory;
use gpt_core::harness::{run_pipeline, run_report, Pipeline};
use gpt_core::io::{
    complex_rows, read_json, write_json, DMatrixFile, FrameFile, OperatorFile, Representation,
    VectorFile,
};
use gpt_core::{DensityOperator, GptError, Theory, TheoryKind};

#[derive(Parser)]
#[command(
    name = "gpt",
    version,
    about = "Fiducial-frame probability theories: frames, conversions and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum TheoryArg {
    Quantum,
    Classical,
}

impl From<TheoryArg> for TheoryKind {
    fn from(t: TheoryArg) -> Self {
        match t {
            TheoryArg::Quantum => TheoryKind::Quantum,
            TheoryArg::Classical => TheoryKind::Classical,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Form {
    Rho,
    P,
    R,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the fiducial projectors for dimension N.
    Frame {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "quantum")]
        theory: TheoryArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Gram matrix D of the frame.
    Dmatrix {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "quantum")]
        theory: TheoryArg,
        #[arg(long, value_enum, default_value = "json")]
        format: TableFormat,
    },
    /// Convert between a density operator, its p-vector and its r-vector.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        from: Form,
        #[arg(long, value_enum)]
        to: Form,
        #[arg(long, value_enum, default_value = "quantum")]
        theory: TheoryArg,
    },
    /// Examine one member of the N=2 family of D matrices.
    Bloch {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
    },
    /// Compute the transformation matrix Z of a Kraus set or unitary.
    Transform {
        #[arg(long, conflicts_with = "unitary", required_unless_present = "unitary")]
        kraus: Option<PathBuf>,
        #[arg(long)]
        unitary: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Composite-state matrix of a bipartite density operator.
    Composite {
        #[arg(long)]
        rho: PathBuf,
        /// Dimension of the first factor; defaults to the square root of the total.
        #[arg(long)]
        na: Option<usize>,
    },
    /// Run the axiom checks against a theory instance.
    Verify {
        #[arg(long, value_enum)]
        theory: TheoryArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the pipelines of a config file and write report.json and summary.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

enum Outcome {
    Pass,
    CheckFailed,
}

fn print_json<T: serde::Serialize>(value: &T) -> gpt_core::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> gpt_core::Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => print_json(value),
    }
}

fn read_operator(path: &Path) -> gpt_core::Result<gpt_core::linalg::CMatrix> {
    read_json::<OperatorFile>(path)?.to_matrix()
}

fn convert(input: &Path, from: Form, to: Form, kind: TheoryKind) -> gpt_core::Result<()> {
    let (theory, p) = match from {
        Form::Rho => {
            let rho = read_operator(input)?;
            let theory = Theory::new(kind, rho.nrows())?;
            let p = theory.p_from_density(&DensityOperator::new(rho))?;
            (theory, p)
        }
        Form::P | Form::R => {
            let file: VectorFile = read_json(input)?;
            let expected = if from == Form::P {
                Representation::P
            } else {
                Representation::R
            };
            if file.representation != expected {
                return Err(GptError::Config(
                    format!("input holds a {:?} vector", file.representation).to_lowercase(),
                ));
            }
            let kind = file.theory.unwrap_or(kind);
            let theory = Theory::new(kind, file.dimension)?;
            if file.k != theory.k() {
                return Err(GptError::DimensionMismatch {
                    expected: theory.k(),
                    found: file.k,
                });
            }
            let p = if from == Form::P {
                file.to_p()?
            } else {
                theory.p_from_r(&file.to_r()?)?
            };
            (theory, p)
        }
    };
    match to {
        Form::Rho => print_json(&OperatorFile::from_matrix(
            theory.density_from_p(&p)?.matrix(),
        )),
        Form::P => print_json(&VectorFile::from_p(&p)),
        Form::R => print_json(&VectorFile::from_r(
            theory.dimension(),
            &theory.r_from_p(&p)?,
        )),
    }
}

fn report_pipeline(pipeline: Pipeline, seed: u64) -> gpt_core::Result<Outcome> {
    let report = run_pipeline(&pipeline, 0, seed)?;
    print_json(&report)?;
    Ok(if report.passed() {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}

fn run(cli: Cli) -> gpt_core::Result<Outcome> {
    match cli.command {
        Command::Frame { n, theory, out } => {
            let theory = Theory::new(theory.into(), n)?;
            emit(&FrameFile::from(theory.frame()), out.as_deref())?;
        }
        Command::Dmatrix { n, theory, format } => {
            let theory = Theory::new(theory.into(), n)?;
            match format {
                TableFormat::Json => print_json(&DMatrixFile::from(theory.d()))?,
                TableFormat::Csv => {
                    let labels: Vec<String> = theory
                        .frame()
                        .labels()
                        .iter()
                        .map(ToString::to_string)
                        .collect();
                    println!(",{}", labels.join(","));
                    for (label, row) in labels.iter().zip(theory.d().matrix().row_iter()) {
                        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                        println!("{label},{}", cells.join(","));
                    }
                }
            }
        }
        Command::Convert {
            input,
            from,
            to,
            theory,
        } => convert(&input, from, to, theory.into())?,
        Command::Bloch { a, b, c } => return report_pipeline(Pipeline::Bloch { a, b, c }, 0),
        Command::Transform {
            kraus,
            unitary,
            seed,
        } => {
            let pipeline = match (kraus, unitary) {
                (Some(path), None) => Pipeline::Transform {
                    kraus: Some(read_json(&path)?),
                    unitary: None,
                },
                (None, Some(path)) => Pipeline::Transform {
                    kraus: None,
                    unitary: Some(complex_rows(&read_operator(&path)?)),
                },
                _ => {
                    return Err(GptError::Config(
                        "pass exactly one of --kraus or --unitary".into(),
                    ))
                }
            };
            return report_pipeline(pipeline, seed);
        }
        Command::Composite { rho, na } => {
            let rho = read_operator(&rho)?;
            let total = rho.nrows();
            let n_a = na.unwrap_or_else(|| (total as f64).sqrt().round() as usize);
            if n_a == 0 || total % n_a != 0 {
                return Err(GptError::DimensionMismatch {
                    expected: total,
                    found: n_a,
                });
            }
            return report_pipeline(
                Pipeline::Composite {
                    n_a,
                    n_b: total / n_a,
                    rho: complex_rows(&rho),
                },
                0,
            );
        }
        Command::Verify { theory, n, seed } => {
            let report = verify_theory(theory.into(), n, seed)?;
            print_json(&report)?;
            return Ok(if report.passed() {
                Outcome::Pass
            } else {
                Outcome::CheckFailed
            });
        }
        Command::Simulate {
            config,
            seed,
            out_dir,
        } => {
            let (report, json_path, csv_path) = run_report(&config, seed, &out_dir)?;
            print_json(&json!({
                "seed": report.seed,
                "all_passed": report.all_passed,
                "report": json_path,
                "summary": csv_path,
            }))?;
            return Ok(if report.all_passed {
                Outcome::Pass
            } else {
                Outcome::CheckFailed
            });
        }
    }
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
