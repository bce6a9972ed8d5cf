//! Command-line front end: problem files in, coefficients, matrices, kernels
//! and solutions out.

mod kernel_io;
mod problem;
mod rhs;
mod scan;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use kernel_io::{decode_kernel_json, encode_kernel_json, grid_points, kernel_csv};
pub use problem::{parse_problem, ProblemFile};
pub use rhs::{parse_rhs, RhsExpression, RhsTerm, Trig};

use crate::boundary::{CMatrix, SplitLemma};
use crate::error::{Error, Result};
use crate::factor::{descartes_no_negative_roots, factor_even, DescartesVerdict, EvenPoly};
use crate::greens::{green_verify, BVProblem};
use crate::numeric::C64;
use crate::operator::{companion, reduce};
use crate::pipeline::{bench, factored_system, reduce_problem, solve_der, RoutePreference, SolveOptions};

#[derive(Parser, Debug)]
#[command(name = "dergreen", version, about = "Green's functions for linear differential equations with reflection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RouteArg {
    Auto,
    Direct,
    Factored,
    Both,
}

impl From<RouteArg> for RoutePreference {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Auto => RoutePreference::Auto,
            RouteArg::Direct => RoutePreference::Direct,
            RouteArg::Factored => RoutePreference::Factored,
            RouteArg::Both => RoutePreference::Both,
        }
    }
}

#[derive(Args, Debug)]
struct RouteArgs {
    #[arg(long, value_enum, default_value = "auto")]
    route: RouteArg,
    /// Allow the factored route to use a complex factor.
    #[arg(long)]
    allow_complex: bool,
}

impl RouteArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions { route: self.route.into(), allow_complex: self.allow_complex }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    /// Kernel of the original equation with reflection.
    Der,
    /// Kernel of the reduced ordinary problem.
    Reduced,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the companion operator R and the reduced operator S = RL.
    Reduce { file: PathBuf },
    /// Factor S into q and q₋.
    Factor { file: PathBuf },
    /// Split the extended conditions between the two factors.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        allow_complex: bool,
    },
    /// Sample the Green's function on a grid and/or dump its exact form.
    Green {
        file: PathBuf,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        /// CSV output path; stdout when neither --csv nor --json is given.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "der")]
        which: Which,
        #[command(flatten)]
        route: RouteArgs,
    },
    /// Evaluate the solution u.
    Solve {
        file: PathBuf,
        /// Points to evaluate at; a uniform grid when absent.
        #[arg(long, allow_negative_numbers = true)]
        at: Vec<f64>,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[command(flatten)]
        route: RouteArgs,
    },
    /// Check the kernel's defining properties, route agreement and residuals.
    Verify {
        file: PathBuf,
        #[arg(long)]
        allow_complex: bool,
    },
    /// Time the direct and the factored route.
    Bench {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        allow_complex: bool,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Dimension { .. } => 2,
        Error::DegenerateReduction(_) => 3,
        Error::NonUniqueBVP(_) => 4,
        Error::NotDecomposable(_) => 5,
        Error::VerificationFailed(_) => 6,
        _ => 1,
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cnum(z: C64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else {
        format!("{}{}{}i", num(z.re), if z.im < 0.0 { "" } else { "+" }, num(z.im))
    }
}

fn clist(v: &[C64]) -> String {
    format!("[{}]", v.iter().map(|z| cnum(*z)).collect::<Vec<_>>().join(", "))
}

fn rlist(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", "))
}

fn matrix(m: &CMatrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| clist(&(0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>()))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn io(e: std::io::Error) -> Error {
    Error::InvalidInput(e.to_string())
}

fn load(path: &Path, err: &mut dyn Write) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let pf = parse_problem(&text)?;
    if pf.conditions()?.is_rank_deficient() {
        writeln!(err, "warning: the boundary conditions are rank deficient").map_err(io)?;
    }
    Ok(pf)
}

/// Runs one invocation and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Reduce { file } => {
            let pf = load(&file, err)?;
            let l = pf.operator()?;
            let r = companion(&l);
            writeln!(out, "L = {l}").map_err(io)?;
            writeln!(out, "R = {r}").map_err(io)?;
            let s = reduce(&l)?;
            writeln!(out, "S = {s}").map_err(io)?;
            writeln!(out, "S coefficients = {}", rlist(s.coeffs())).map_err(io)?;
            if s.order() != 2 * pf.n {
                return Err(Error::DegenerateReduction(format!("RL has order {} instead of {}", s.order(), 2 * pf.n)));
            }
            Ok(0)
        }
        Command::Factor { file } => {
            let pf = load(&file, err)?;
            let s = reduce(&pf.operator()?)?;
            let even = EvenPoly::from_diff_poly(&s)?;
            let f = factor_even(&even)?;
            writeln!(out, "S = {s}").map_err(io)?;
            writeln!(out, "p~ = {}", rlist(even.alpha())).map_err(io)?;
            writeln!(out, "leading = {}", num(f.leading)).map_err(io)?;
            writeln!(out, "q = {}", clist(&f.q)).map_err(io)?;
            writeln!(out, "q- = {}", clist(&f.q_minus)).map_err(io)?;
            writeln!(out, "real = {}", f.all_real).map_err(io)?;
            let verdict = match descartes_no_negative_roots(even.alpha()) {
                DescartesVerdict::Guaranteed => "no negative roots of p~ (real factor guaranteed)",
                DescartesVerdict::Inconclusive => "inconclusive",
            };
            writeln!(out, "descartes = {verdict}").map_err(io)?;
            writeln!(out, "reconstruction error = {}", num(f.reconstruction_error(&even))).map_err(io)?;
            Ok(0)
        }
        Command::Decompose { file, allow_complex } => {
            let pf = load(&file, err)?;
            let red = reduce_problem(&pf.to_problem()?)?;
            writeln!(out, "Gamma = {}", matrix(red.extended.gamma())).map_err(io)?;
            writeln!(out, "Theta = {}", matrix(red.extended.theta())).map_err(io)?;
            let sys = factored_system(&red, allow_complex)?;
            writeln!(out, "L1 = {}", clist(&sys.l1)).map_err(io)?;
            writeln!(out, "L2 = {}", clist(&sys.l2)).map_err(io)?;
            let lemma = match sys.conds.lemma {
                SplitLemma::GammaInvertible => "gamma-invertible",
                SplitLemma::ThetaInvertible => "theta-invertible",
            };
            writeln!(out, "lemma = {lemma}").map_err(io)?;
            writeln!(out, "Phi = {}", matrix(&sys.conds.phi)).map_err(io)?;
            writeln!(out, "Psi = {}", matrix(&sys.conds.psi)).map_err(io)?;
            writeln!(out, "V.alpha = {}", matrix(sys.conds.v.alpha())).map_err(io)?;
            writeln!(out, "V.beta = {}", matrix(sys.conds.v.beta())).map_err(io)?;
            writeln!(out, "V~.alpha = {}", matrix(sys.conds.v_tilde.alpha())).map_err(io)?;
            writeln!(out, "V~.beta = {}", matrix(sys.conds.v_tilde.beta())).map_err(io)?;
            Ok(0)
        }
        Command::Green { file, grid, csv, json, which, route } => {
            let pf = load(&file, err)?;
            let bundle = solve_der(&pf.to_problem()?, route.options())?;
            let k = match which {
                Which::Der => &bundle.g_der,
                Which::Reduced => &bundle.g_reduced,
            };
            if let Some(path) = &json {
                std::fs::write(path, encode_kernel_json(k)).map_err(io)?;
            }
            match &csv {
                Some(path) => std::fs::write(path, kernel_csv(k, grid)?).map_err(io)?,
                None if json.is_none() => write!(out, "{}", kernel_csv(k, grid)?).map_err(io)?,
                None => {}
            }
            Ok(0)
        }
        Command::Solve { file, at, grid, route } => {
            let pf = load(&file, err)?;
            let bundle = solve_der(&pf.to_problem()?, route.options())?;
            let points = if at.is_empty() { grid_points(pf.half_width, grid) } else { at };
            writeln!(out, "t,re,im").map_err(io)?;
            for t in points {
                if t.abs() > pf.half_width {
                    return Err(Error::OutOfDomain { t, s: 0.0 });
                }
                let u = bundle.u.eval(t);
                writeln!(out, "{},{},{}", num(t), num(u.re), num(u.im)).map_err(io)?;
            }
            writeln!(out, "# route = {:?}", bundle.route).map_err(io)?;
            writeln!(out, "# residual = {}", num(bundle.diagnostics.residual)).map_err(io)?;
            writeln!(out, "# boundary residual = {}", num(bundle.diagnostics.boundary_residual)).map_err(io)?;
            Ok(0)
        }
        Command::Verify { file, allow_complex } => {
            let pf = load(&file, err)?;
            let bundle = solve_der(&pf.to_problem()?, SolveOptions { route: RoutePreference::Both, allow_complex })?;
            let reduced = BVProblem::from_diff_poly(&bundle.reduction.s, bundle.reduction.extended.as_boundary_spec())?;
            let report = green_verify(&reduced, &bundle.g_reduced);
            let mut ok = true;
            for c in &report.checks {
                ok &= c.passed;
                writeln!(
                    out,
                    "{} {} worst={} tol={}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    num(c.worst),
                    num(c.tolerance)
                )
                .map_err(io)?;
            }
            match (bundle.diagnostics.route_agreement, &bundle.diagnostics.fallback) {
                (Some(gap), _) => writeln!(out, "PASS route-agreement worst={}", num(gap)).map_err(io)?,
                (None, Some(why)) => writeln!(out, "SKIP route-agreement ({why})").map_err(io)?,
                (None, None) => {}
            }
            writeln!(out, "PASS residual worst={}", num(bundle.diagnostics.residual)).map_err(io)?;
            writeln!(out, "PASS boundary worst={}", num(bundle.diagnostics.boundary_residual)).map_err(io)?;
            Ok(if ok { 0 } else { 6 })
        }
        Command::Bench { file, reps, allow_complex } => {
            let pf = load(&file, err)?;
            let p = pf.to_problem()?;
            let r = bench(&p, reps, allow_complex)?;
            let ms = |d: Option<std::time::Duration>| d.map_or("n/a".to_string(), |d| format!("{:.3} ms", d.as_secs_f64() * 1e3));
            writeln!(out, "repetitions = {}", r.repetitions).map_err(io)?;
            writeln!(out, "direct median = {}", ms(r.direct_median)).map_err(io)?;
            writeln!(out, "factored median = {}", ms(r.factored_median)).map_err(io)?;
            if let Some(why) = &r.factored_unavailable {
                writeln!(out, "factored unavailable: {why}").map_err(io)?;
            }
            if let Some(gap) = r.max_discrepancy {
                writeln!(out, "max discrepancy = {}", num(gap)).map_err(io)?;
            }
            Ok(0)
        }
    }
}
