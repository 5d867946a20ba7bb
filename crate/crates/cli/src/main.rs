use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use fresnel_abcd::fresnel::{fresnel_normal_order, kernel_comparison, FresnelBuild, Grid, Route};
use fresnel_abcd::quantum::{damped_csv, damped_evolution, SqueezedVacuumDescriptor};
use fresnel_abcd::report::csv_number;
use fresnel_abcd::system::OpticalSystem;
use fresnel_abcd::verify::{self, Suite, SuiteConfig};
use fresnel_abcd::{Error, ErrorKind, Execution, QParam, Ray, RayMatrix};

/// Determinant tolerance for hand-typed matrices.
const CLI_DET_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "fresnel",
    version,
    about = "ABCD optics and Fresnel operators on a truncated Fock space"
)]
struct Cli {
    /// Fock-space truncation N.
    #[arg(long, global = true, env = "FRESNEL_DIM", default_value_t = 128)]
    dim: usize,

    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output file for dumps, CSV and reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace a ray through a system file.
    Trace {
        system: PathBuf,
        /// Input ray as `height,direction`.
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        ray: Pair,
    },
    /// Propagate a complex beam parameter through a system file.
    Beam {
        system: PathBuf,
        /// Input beam parameter as `re,im` with `im > 0`.
        #[arg(long, allow_hyphen_values = true)]
        q: Pair,
        /// Also print the squeezed-vacuum exponent for each q.
        #[arg(long)]
        quantum: bool,
        /// Print CSV instead of a table.
        #[arg(long)]
        csv: bool,
    },
    /// Build the Fresnel operator of a matrix and dump it.
    Operator {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long, value_enum, default_value_t = RouteArg::Normal)]
        route: RouteArg,
    },
    /// Compare the Fock-space kernel with the closed form on a grid.
    Kernel {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Run verification suites.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        /// Random pairs in the group and ABCD-law suites.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Truncation used by the kernel suite.
        #[arg(long, default_value_t = 256)]
        kernel_dim: usize,
    },
    /// Damped-oscillator evolution as CSV.
    Damped {
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        omega0: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long = "A", allow_negative_numbers = true)]
    a: f64,
    #[arg(long = "B", allow_negative_numbers = true)]
    b: f64,
    #[arg(long = "C", allow_negative_numbers = true)]
    c: f64,
    #[arg(
        long = "D",
        allow_negative_numbers = true,
        required_unless_present = "fix_d"
    )]
    d: Option<f64>,
    /// Replace D by (1 + BC)/A.
    #[arg(long)]
    fix_d: bool,
}

impl MatrixArgs {
    fn matrix(&self) -> fresnel_abcd::Result<RayMatrix> {
        match (self.fix_d, self.d) {
            (true, _) => RayMatrix::completing_d(self.a, self.b, self.c),
            (false, Some(d)) => RayMatrix::with_tolerance(self.a, self.b, self.c, d, CLI_DET_TOL),
            (false, None) => Err(Error::Parse("--D is required without --fix-d".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RouteArg {
    Normal,
    Canonical,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Normal => Route::NormalOrder,
            RouteArg::Canonical => Route::Canonical,
        }
    }
}

/// Two comma-separated reals.
#[derive(Debug, Clone, Copy)]
struct Pair(f64, f64);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `x,y`, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Pair(parse(x)?, parse(y)?))
    }
}

struct Ctx {
    dim: usize,
    seed: u64,
    out: Option<PathBuf>,
    exec: Execution,
}

impl Ctx {
    /// Writes `text` to `--out`, or to stdout without it.
    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => write_file(p, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Summary lines go to stdout when the payload went to a file.
    fn note(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_system(path: &Path) -> anyhow::Result<OpticalSystem> {
    OpticalSystem::load(path).with_context(|| format!("reading system {}", path.display()))
}

fn trace(ctx: &Ctx, system: &Path, ray: Pair) -> anyhow::Result<ExitCode> {
    let sys = load_system(system)?;
    let input = Ray::new(ray.0, ray.1);
    let rays = sys.trace(input)?;
    let last = rays.last().copied().unwrap_or(input);
    println!("input: r = {}, alpha = {}", input.height, input.direction);
    for (i, (el, r)) in sys.elements().iter().zip(&rays).enumerate() {
        println!("{} {el}: r = {}, alpha = {}", i + 1, r.height, r.direction);
    }
    println!("final: r = {}, alpha = {}", last.height, last.direction);
    if let Some(p) = &ctx.out {
        let mut csv = String::from("step,height,direction\n");
        for (i, r) in std::iter::once(&input).chain(&rays).enumerate() {
            csv.push_str(&format!(
                "{i},{},{}\n",
                csv_number(r.height),
                csv_number(r.direction)
            ));
        }
        write_file(p, &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn beam(ctx: &Ctx, system: &Path, q0: Pair, quantum: bool, csv: bool) -> anyhow::Result<ExitCode> {
    let sys = load_system(system)?;
    if q0.1.is_nan() || q0.1 <= 0.0 {
        return Err(Error::Domain(format!("Im q0 = {} must be positive", q0.1)).into());
    }
    let q0 = QParam::new(q0.0, q0.1);
    let qs = sys.propagate_q(q0).map_err(|(i, e)| {
        let name = sys
            .elements()
            .get(i)
            .map(ToString::to_string)
            .unwrap_or_default();
        anyhow::Error::new(e).context(format!("element {} {name}", i + 1))
    })?;
    let mu = |q: QParam| -> anyhow::Result<Complex64> {
        Ok(SqueezedVacuumDescriptor::new(q, Complex64::new(1.0, 0.0), ctx.dim)?.mu())
    };
    let trajectory: Vec<QParam> = std::iter::once(q0).chain(qs).collect();

    let mut table = String::from(if quantum {
        "step,re_q,im_q,re_mu,im_mu\n"
    } else {
        "step,re_q,im_q\n"
    });
    for (i, q) in trajectory.iter().enumerate() {
        let mut cells = vec![i.to_string(), csv_number(q.0.re), csv_number(q.0.im)];
        if quantum {
            let m = mu(*q)?;
            cells.extend([csv_number(m.re), csv_number(m.im)]);
        }
        table.push_str(&cells.join(","));
        table.push('\n');
    }
    if let Some(p) = &ctx.out {
        write_file(p, &table)?;
    }
    if csv {
        print!("{table}");
    } else {
        for (i, q) in trajectory.iter().enumerate() {
            let label = if i == 0 {
                "input".to_string()
            } else {
                format!("{} {}", i, sys.elements()[i - 1])
            };
            let mut line = format!("{label}: q = {}{:+}i", q.0.re, q.0.im);
            if quantum {
                let m = mu(*q)?;
                line.push_str(&format!(", mu = {}{:+}i", m.re, m.im));
            }
            println!("{line}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn operator(ctx: &Ctx, m: &MatrixArgs, route: RouteArg) -> anyhow::Result<ExitCode> {
    let build = FresnelBuild::new(m.matrix()?, ctx.dim, route.into())?;
    let guarded = build.unitarity_residual()?;
    ctx.emit(&build.op.to_dump())?;
    ctx.note(&format!("unitarity residual {}", csv_number(guarded)));
    ctx.note(&format!(
        "truncated unitarity residual {}",
        csv_number(build.truncated_unitarity_residual())
    ));
    Ok(ExitCode::SUCCESS)
}

fn kernel(ctx: &Ctx, m: &MatrixArgs, lo: f64, hi: f64, points: usize) -> anyhow::Result<ExitCode> {
    let m = m.matrix()?;
    let grid = Grid::new(lo, hi, points)?;
    let op = fresnel_normal_order(&m, ctx.dim)?;
    let cmp = kernel_comparison(&m, &op, &grid, ctx.exec)?;
    ctx.emit(&cmp.to_csv())?;
    ctx.note(&format!(
        "max abs deviation {} phase {},{}",
        csv_number(cmp.max_abs_err),
        csv_number(cmp.phase.re),
        csv_number(cmp.phase.im)
    ));
    Ok(ExitCode::SUCCESS)
}

fn run_verify(
    ctx: &Ctx,
    suite: &str,
    trials: usize,
    kernel_dim: usize,
) -> anyhow::Result<ExitCode> {
    let suite: Suite = suite.parse()?;
    let cfg = SuiteConfig {
        dim: ctx.dim,
        seed: ctx.seed,
        trials,
        kernel_dim,
        exec: ctx.exec,
        ..SuiteConfig::default()
    };
    let report = verify::run(suite, &cfg);
    println!("{report}");
    if let Some(p) = &ctx.out {
        write_file(p, &report.to_json())?;
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(5)
    })
}

fn damped(
    ctx: &Ctx,
    gamma: f64,
    omega0: f64,
    t_max: f64,
    steps: usize,
) -> anyhow::Result<ExitCode> {
    let samples = damped_evolution(gamma, omega0, t_max, steps, ctx.dim, ctx.exec)?;
    ctx.emit(&damped_csv(&samples))?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<Error>())
        .map(Error::kind)
    {
        Some(ErrorKind::Parse) => 2,
        Some(ErrorKind::Pole) => 3,
        Some(ErrorKind::Domain | ErrorKind::Numerical) => 4,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let ctx = Ctx {
        dim: cli.dim,
        seed: cli.seed,
        out: cli.out,
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        },
    };
    let result = if ctx.dim < 2 {
        Err(anyhow!(Error::Dimension(ctx.dim)))
    } else {
        match &cli.command {
            Command::Trace { system, ray } => trace(&ctx, system, *ray),
            Command::Beam {
                system,
                q,
                quantum,
                csv,
            } => beam(&ctx, system, *q, *quantum, *csv),
            Command::Operator { matrix, route } => operator(&ctx, matrix, *route),
            Command::Kernel {
                matrix,
                lo,
                hi,
                points,
            } => kernel(&ctx, matrix, *lo, *hi, *points),
            Command::Verify {
                suite,
                trials,
                kernel_dim,
            } => run_verify(&ctx, suite, *trials, *kernel_dim),
            Command::Damped {
                gamma,
                omega0,
                t_max,
                steps,
            } => damped(&ctx, *gamma, *omega0, *t_max, *steps),
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(exit_code(&e))
    })
}
