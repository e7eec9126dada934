//! Command-line front end: load a problem file, construct a saddle candidate
//! with one of the three recipes, verify it and write JSON reports.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 invalid input (nothing
//! is written), 3 a solver did not converge.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use saddlepoint::function::{self, CatalogFunction};
use saddlepoint::saddle::{self, GapEstimate, MinimaxProblem, Recipe, SaddleCandidate, VerifyOptions};
use saddlepoint::solvers::MinimizerConfig;
use saddlepoint::{json, Bounds, DifferentiableFunction, Error, ProblemSpec};

#[derive(Debug, Parser)]
#[command(name = "saddle", version, about = "Construct and certify saddle points of J(x+y) - (L/2)|y|^2 + gamma(y)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a saddle candidate and write it as JSON.
    Construct(RunArgs),
    /// Build a candidate, run every check and write the verification report.
    Verify(RunArgs),
    /// Build a candidate and write the grid estimate of sup-inf and inf-sup.
    Gap(GapArgs),
    /// Estimate the Lipschitz constant of the gradient of J.
    Lipschitz(SampleArgs),
    /// Compare the gradient of J against finite differences.
    Gradcheck(SampleArgs),
    /// Run the full pipeline on the built-in one-dimensional example.
    #[command(name = "demo-example1")]
    DemoExample1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecipeArg {
    Thm1,
    Thm2,
    Thm3,
}

impl From<RecipeArg> for Recipe {
    fn from(r: RecipeArg) -> Self {
        match r {
            RecipeArg::Thm1 => Recipe::Thm1,
            RecipeArg::Thm2 => Recipe::Thm2,
            RecipeArg::Thm3 => Recipe::Thm3,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Defaults to thm3 when the problem has gamma, thm2 when it supplies xstar, thm1 otherwise.
    #[arg(long, value_enum)]
    pub recipe: Option<RecipeArg>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid oracle step; chosen from the dimension when absent.
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Half-width of the grid oracle and of the sampling box.
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long = "grad-tol")]
    pub grad_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write `x,y,f` surface rows (one-dimensional problems only).
    #[arg(long = "plot-csv")]
    pub plot_csv: Option<PathBuf>,
    #[arg(long = "plot-points", default_value_t = 101)]
    pub plot_points: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples are drawn from [-radius, radius]^n.
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

/// Failure classes, each with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Invalid(String),
    /// Exit 1; the report was written.
    Failed(String),
    /// Exit 3.
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::NotConverged(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
            CliError::NotConverged(m) => write!(f, "solver did not converge: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

/// Caps the global worker pool at `SADDLE_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SADDLE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Invalid(format!("SADDLE_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    Ok(())
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let io = |e: std::io::Error| CliError::Invalid(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = json::to_string(value).map_err(|e| CliError::Invalid(e.to_string()))?;
    match out {
        Some(p) => write_atomic(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Loaded {
    spec: ProblemSpec,
    problem: MinimaxProblem,
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let spec = ProblemSpec::from_json(&text)?;
    let problem = spec.build()?;
    Ok(Loaded { spec, problem })
}

fn pick_recipe(loaded: &Loaded, arg: Option<RecipeArg>) -> Result<Recipe, CliError> {
    let recipe = match arg {
        Some(r) => r.into(),
        None if loaded.spec.gamma.is_some() => Recipe::Thm3,
        None if loaded.spec.xstar.is_some() => Recipe::Thm2,
        None => Recipe::Thm1,
    };
    match recipe {
        Recipe::Thm3 if loaded.spec.gamma.is_none() => {
            Err(CliError::Invalid("recipe thm3 needs gamma in the problem file".into()))
        }
        Recipe::Thm2 if loaded.spec.xstar.is_none() => {
            Err(CliError::Invalid("recipe thm2 needs xstar in the problem file".into()))
        }
        Recipe::Thm1 | Recipe::Thm2 if loaded.spec.gamma.is_some() => {
            Err(CliError::Invalid("recipes thm1 and thm2 apply to problems without gamma".into()))
        }
        r => Ok(r),
    }
}

fn solver_config(spec: &ProblemSpec, args: &RunArgs) -> MinimizerConfig {
    let mut cfg = spec.solver_config();
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.starts {
        cfg.starts = s;
    }
    if args.grad_tol.is_some() {
        cfg.grad_tol = args.grad_tol;
    }
    cfg
}

fn construct(loaded: &Loaded, args: &RunArgs) -> Result<SaddleCandidate, CliError> {
    let p = &loaded.problem;
    let cfg = solver_config(&loaded.spec, args);
    let c = match pick_recipe(loaded, args.recipe)? {
        Recipe::Thm1 => saddle::construct_saddle_thm1(p, &cfg)?,
        Recipe::Thm2 => {
            let xstar = loaded.spec.xstar.as_deref().expect("checked by pick_recipe");
            saddle::construct_saddle_thm2(p, xstar)?
        }
        Recipe::Thm3 => saddle::construct_saddle_thm3(p, &cfg, &loaded.spec.perturbed_config())?,
    };
    Ok(c)
}

/// Largest grid step that keeps `|X_g|·|Y_g|` within the oracle budget.
pub fn auto_resolution(dim: usize, radius: f64) -> f64 {
    let per_axis = (saddle::GRID_BUDGET as f64).powf(1.0 / (2.0 * dim as f64)).floor() as u64;
    let half = ((per_axis.max(3) - 1) / 2) as f64;
    (radius / half).max(1e-12)
}

fn verify_options(p: &MinimaxProblem, args: &RunArgs) -> Result<VerifyOptions, CliError> {
    if !(args.radius > 0.0) || !args.radius.is_finite() {
        return Err(CliError::Invalid("--radius must be positive".into()));
    }
    Ok(VerifyOptions {
        x_radius: args.radius,
        seed: args.seed.unwrap_or(0),
        resolution: args.resolution.unwrap_or_else(|| auto_resolution(p.dim(), args.radius)),
        radius: args.radius,
        ..VerifyOptions::default()
    })
}

fn gap_for(loaded: &Loaded, args: &RunArgs) -> Result<(SaddleCandidate, GapEstimate), CliError> {
    let c = construct(loaded, args)?;
    let opts = verify_options(&loaded.problem, args)?;
    let gap = saddle::verify_minimax_equality(&loaded.problem, &c, opts.resolution, opts.radius)?;
    Ok((c, gap))
}

#[derive(Serialize)]
struct DemoOutput<'a> {
    candidate: &'a SaddleCandidate,
    report: &'a saddle::VerificationReport,
    gap: Option<&'a GapEstimate>,
}

/// Runs the example pipeline and returns the text printed to stdout.
pub fn demo_example1(out: Option<&Path>) -> Result<String, CliError> {
    let p = saddle::example1_problem();
    let c = saddle::construct_saddle_thm1(&p, &MinimizerConfig::default())?;
    let opts = VerifyOptions { x_radius: 8.0, radius: 8.0, resolution: 0.01, ..Default::default() };
    let (report, gap) = saddle::verify(&p, &c, &opts)?;
    let mut text = format!(
        "saddle point: ({:.10}, {:.10})\nsaddle value: {:.10}\n",
        c.xbar[0], c.ybar[0], c.value
    );
    if let Some(g) = &gap {
        text.push_str(&format!(
            "sup inf: {:.10}\ninf sup: {:.10}\nalpha: {:.3e}\n",
            g.sup_inf, g.inf_sup, g.alpha
        ));
    }
    text.push_str(&format!("verified: {}\n", report.pass));
    if let Some(path) = out {
        emit(&DemoOutput { candidate: &c, report: &report, gap: gap.as_ref() }, Some(path))?;
    }
    if !report.pass {
        print!("{text}");
        return Err(CliError::Failed("example pipeline did not verify".into()));
    }
    Ok(text)
}

fn sample_bounds(f: &CatalogFunction, args: &SampleArgs) -> Result<Bounds, CliError> {
    if !(args.radius > 0.0) || !args.radius.is_finite() {
        return Err(CliError::Invalid("--radius must be positive".into()));
    }
    Ok(Bounds::cube(f.dim(), args.radius))
}

fn load_function(path: &Path) -> Result<CatalogFunction, CliError> {
    let loaded = load(path)?;
    let mut params = loaded.spec.function.params.clone();
    if loaded.spec.function.name == "trig_coercive" && !params.contains_key("dim") {
        params.insert("dim".into(), loaded.spec.dim.into());
    }
    Ok(function::builtin(&loaded.spec.function.name, &params)?)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Construct(args) => {
            let loaded = load(&args.problem)?;
            let c = construct(&loaded, &args)?;
            emit(&c, args.out.as_deref())
        }
        Command::Verify(args) => {
            let loaded = load(&args.problem)?;
            let c = construct(&loaded, &args)?;
            let opts = verify_options(&loaded.problem, &args)?;
            let (report, _) = saddle::verify(&loaded.problem, &c, &opts)?;
            emit(&report, args.out.as_deref())?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "left {:e}, right {:e}",
                    report.saddle_left_violation, report.saddle_right_violation
                )))
            }
        }
        Command::Gap(args) => {
            let loaded = load(&args.run.problem)?;
            let (c, gap) = gap_for(&loaded, &args.run)?;
            let csv = match &args.plot_csv {
                Some(_) => Some(saddle::surface_csv(
                    &loaded.problem,
                    &c,
                    args.run.radius,
                    args.plot_points,
                )?),
                None => None,
            };
            emit(&gap, args.run.out.as_deref())?;
            if let (Some(path), Some(csv)) = (&args.plot_csv, csv) {
                write_atomic(path, &csv)?;
            }
            Ok(())
        }
        Command::Lipschitz(args) => {
            let f = load_function(&args.problem)?;
            let b = sample_bounds(&f, &args)?;
            let est = function::estimate_lipschitz(&f, &b, args.samples, args.seed)?;
            emit(&est, args.out.as_deref())?;
            if est.refuted {
                return Err(CliError::Failed("declared Lipschitz constant refuted".into()));
            }
            Ok(())
        }
        Command::Gradcheck(args) => {
            let f = load_function(&args.problem)?;
            let b = sample_bounds(&f, &args)?;
            let r = function::check_gradient(&f, &b, args.samples, args.seed)?;
            emit(&r, args.out.as_deref())?;
            if !r.pass {
                return Err(CliError::Failed(format!("max relative error {:e}", r.max_rel_err)));
            }
            Ok(())
        }
        Command::DemoExample1 { out } => {
            let text = demo_example1(out.as_deref())?;
            print!("{text}");
            Ok(())
        }
    }
}
