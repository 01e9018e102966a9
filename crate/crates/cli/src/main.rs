use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use einv::inverse::{self, InverseOptions};
use einv::io::{
    read_tensor, solve_outcome_to_value, tensor_to_csv, tensor_to_json, tensor_to_value,
};
use einv::laws::{self, LawId};
use einv::poisson::{self, GridSpec, PoissonSolver};
use einv::solver;
use einv::{DenseTensor, Error, TensorShape};

/// Generalized inverses of tensors under the Einstein product.
#[derive(Parser, Debug)]
#[command(name = "einv", version)]
struct Cli {
    /// Residual tolerance (default: 1e-10 for inverses, 1e-8 for laws and solvers).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for random trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of random trials for check-law.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Einstein product A∗B.
    Mul { a: PathBuf, b: PathBuf },
    /// Moore-Penrose inverse.
    Pinv { a: PathBuf },
    /// Core inverse (index 1 only).
    Core { a: PathBuf },
    /// Group inverse (index 1 only).
    Group { a: PathBuf },
    /// Drazin inverse.
    Drazin { a: PathBuf },
    /// Index and the rank sequence of powers.
    Index { a: PathBuf },
    /// Check a reverse-order law on given tensors or on random instances.
    CheckLaw {
        law: String,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        /// Number of random instances.
        #[arg(long)]
        random: Option<usize>,
        /// Dimensions of each index group for random instances.
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        dims: Vec<usize>,
    },
    /// Solve A∗X = B, or C∗X∗D = B with --two-sided C D B.
    Solve {
        #[arg(long)]
        two_sided: bool,
        #[arg(required = true, num_args = 2..=3)]
        files: Vec<PathBuf>,
    },
    /// Neumann Poisson problem on an m x m grid; prints the solution as CSV.
    Poisson {
        #[arg(long)]
        m: usize,
        /// Right-hand side grid as tensor JSON (default: centred sine bump).
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Also write gnuplot heatmap data to this file.
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Re-emit a tensor file as canonical JSON or as CSV of its unfolding.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        to: Format,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failure with its exit code.
enum Failure {
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_numerical() => 1,
            _ => 2,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Usage(msg) => json!({ "error": msg, "kind": "usage" }),
            Failure::Lib(e) => {
                let mut v = json!({ "error": e.to_string(), "kind": e.kind() });
                let extra = match e {
                    Error::IndexTooHigh { index } => json!({ "index": index }),
                    Error::RankAmbiguous { sigma, threshold } => {
                        json!({ "sigma": sigma, "threshold": threshold })
                    }
                    Error::NotConsistent { residual } => json!({ "residual": residual }),
                    Error::Json { path, .. } | Error::Io { path, .. } => json!({ "path": path }),
                    Error::LengthMismatch {
                        expected, actual, ..
                    } => {
                        json!({ "expected": expected, "actual": actual })
                    }
                    _ => json!({}),
                };
                if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
                    obj.extend(more);
                }
                v
            }
        }
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("stdout: {e}"))),
    }
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| {
        Failure::Lib(Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    })
}

fn options(tol: Option<f64>, default_tol: f64) -> Result<InverseOptions, Failure> {
    Ok(InverseOptions::default().with_residual_tol(tol.unwrap_or(default_tol))?)
}

fn emit_tensor(cli: &Cli, t: &DenseTensor) -> Outcome {
    emit(&cli.out, &tensor_to_json(t))
}

fn check_law(
    cli: &Cli,
    law: &str,
    a: &Option<PathBuf>,
    b: &Option<PathBuf>,
    random: Option<usize>,
    dims: &[usize],
) -> Outcome {
    let law: LawId = law.parse()?;
    let opts = options(cli.tol, laws::LAW_RESIDUAL_TOL)?;
    if let Some(a) = a {
        let a = read_tensor(a)?;
        let b = match b {
            Some(b) => read_tensor(b)?,
            None if law.is_single() => a.clone(),
            None => return Err(Failure::Usage(format!("{law} needs --b"))),
        };
        let report = laws::check_law(law, &a, &b, &opts)?;
        return emit(
            &cli.out,
            &serde_json::to_string(&report).expect("serializable"),
        );
    }
    let trials = random.or(cli.trials).unwrap_or(100);
    let shape = TensorShape::square(dims)?;
    let reports = laws::run_family_trials(law, &shape, cli.seed, trials, &opts)?;
    let satisfied = reports.iter().filter(|r| r.hypotheses_pass()).count();
    let ok = reports.iter().filter(|r| r.implication_ok).count();
    let counterexamples: Vec<&laws::LawReport> =
        reports.iter().filter(|r| !r.implication_ok).collect();
    let summary = json!({
        "law": law,
        "trials": trials,
        "seed": cli.seed,
        "hypotheses_satisfied": satisfied,
        "implication_ok": ok,
        "counterexamples": counterexamples,
    });
    emit(&cli.out, &summary.to_string())
}

fn solve(cli: &Cli, two_sided: bool, files: &[PathBuf]) -> Outcome {
    let opts = options(cli.tol, solver::SOLVE_TOL)?;
    let tensors = files
        .iter()
        .map(read_tensor)
        .collect::<Result<Vec<_>, _>>()?;
    let out = match (two_sided, tensors.as_slice()) {
        (false, [a, b]) => solver::solve_one_sided(a, b, &opts)?,
        (true, [c, d, b]) => solver::solve_two_sided(c, d, b, &opts)?,
        (false, _) => return Err(Failure::Usage("solve expects A B".into())),
        (true, _) => return Err(Failure::Usage("solve --two-sided expects C D B".into())),
    };
    emit(&cli.out, &solve_outcome_to_value(&out).to_string())?;
    if out.solvable {
        Ok(())
    } else {
        Err(Error::NotConsistent {
            residual: out.certificate_residual,
        }
        .into())
    }
}

fn poisson_cmd(cli: &Cli, m: usize, rhs: &Option<PathBuf>, heatmap: &Option<PathBuf>) -> Outcome {
    let spec = GridSpec::new(m)?;
    let tol = cli.tol.unwrap_or(solver::SOLVE_TOL);
    let f = match rhs {
        Some(path) => read_tensor(path)?.reshape(spec.grid_shape())?,
        None => poisson::default_rhs(&spec),
    };
    let solver = PoissonSolver::new(spec, &InverseOptions::default())?;
    let sol = solver.solve(&f)?;
    emit(&cli.out, &poisson::to_csv(&sol.x, m))?;
    if let Some(path) = heatmap {
        write_file(path, &poisson::heatmap_data(&sol.x, &spec))?;
    }
    if sol.residual <= tol {
        eprintln!("residual<={tol:e} (residual={:e})", sol.residual);
        Ok(())
    } else {
        eprintln!("residual>{tol:e} (residual={:e})", sol.residual);
        Err(Error::NotConsistent {
            residual: sol.residual,
        }
        .into())
    }
}

fn run(cli: &Cli) -> Outcome {
    let inv_opts = || options(cli.tol, inverse::DEFAULT_RESIDUAL_TOL);
    match &cli.command {
        Command::Mul { a, b } => {
            emit_tensor(cli, &read_tensor(a)?.einstein_product(&read_tensor(b)?)?)
        }
        Command::Pinv { a } => emit_tensor(
            cli,
            &inverse::moore_penrose(&read_tensor(a)?, &inv_opts()?)?,
        ),
        Command::Core { a } => {
            emit_tensor(cli, &inverse::core_inverse(&read_tensor(a)?, &inv_opts()?)?)
        }
        Command::Group { a } => emit_tensor(
            cli,
            &inverse::group_inverse(&read_tensor(a)?, &inv_opts()?)?,
        ),
        Command::Drazin { a } => {
            emit_tensor(cli, &inverse::drazin(&read_tensor(a)?, &inv_opts()?)?)
        }
        Command::Index { a } => {
            let ix = inverse::index(&read_tensor(a)?, &inv_opts()?)?;
            emit(
                &cli.out,
                &json!({ "index": ix.k, "ranks": ix.ranks }).to_string(),
            )
        }
        Command::CheckLaw {
            law,
            a,
            b,
            random,
            dims,
        } => check_law(cli, law, a, b, *random, dims),
        Command::Solve { two_sided, files } => solve(cli, *two_sided, files),
        Command::Poisson { m, rhs, heatmap } => poisson_cmd(cli, *m, rhs, heatmap),
        Command::Convert { input, to } => {
            let t = read_tensor(input)?;
            match to {
                Format::Json => emit(&cli.out, &tensor_to_value(&t).to_string()),
                Format::Csv => emit(&cli.out, &tensor_to_csv(&t)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Usage(e.render().to_string().trim_end().to_string());
            eprintln!("{}", f.to_json());
            return ExitCode::from(f.code());
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code())
        }
    }
}
