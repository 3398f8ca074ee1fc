mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conetube::curve::{
    expand_from_polynomial, substitution_residual, BivariatePolynomial, GeometricCurve, Sign, StencilConfig,
};
use conetube::gluing::{cusp_eigenvalues, gluing_residual, TetShapes};
use conetube::holonomy::{build_representation, MobiusMatrix, BASE_X, BASE_Y};
use conetube::parallel::{self, Execution};
use conetube::surgery::{convergence_table, coprime_slopes, sampled_curve, ConeSolver, FirstCusp, Slope};
use conetube::tolerance::{self, Tolerances};
use conetube::tube::{k_expansion_closed_form, k_expansion_whitehead, measure, MonotonicityReport};
use conetube::verify::run_suite;
use conetube::{Error, C64};

use report::{Field, Report};

const EXIT_COMPUTE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
/// Required agreement between the jet pipeline and the closed-form k values.
const K_AGREEMENT: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "conetube",
    version,
    about = "Cone-manifold expansions and tube geometry for Dehn fillings of the Whitehead link",
    after_help = "Exit codes: 0 success, 2 computation failure, 3 input validation failure."
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Residual tolerance for identity checks (default 1e-12).
    #[arg(long, global = true, env = "CONETUBE_TOL")]
    tol: Option<f64>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Disable data-parallel evaluation.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone, Copy)]
struct FirstCuspArgs {
    /// Leave the first cusp complete (the default).
    #[arg(long, conflicts_with_all = ["p1", "q1"])]
    unfilled: bool,
    /// Filling slope of the first cusp.
    #[arg(long, requires = "q1")]
    p1: Option<i64>,
    #[arg(long, requires = "p1")]
    q1: Option<i64>,
}

#[derive(Args, Clone, Copy)]
struct SecondSlope {
    /// Cone-filling slope of the second cusp.
    #[arg(long)]
    p2: i64,
    #[arg(long)]
    q2: i64,
}

#[derive(Subcommand)]
enum Command {
    /// Complete structure: shapes, holonomy, eigenvalues, gluing residuals.
    Base,
    /// Taylor coefficients a₁, a₂, a₃ of the geometric curve l(m) at (−1, −1).
    #[command(allow_negative_numbers = true)]
    Acoeffs {
        #[command(flatten)]
        first: FirstCuspArgs,
        /// Polynomial in the JSON term format (unfilled only).
        #[arg(long, conflicts_with_all = ["p1", "q1"])]
        polynomial: Option<PathBuf>,
        /// Branch hint for a₁ when the polynomial is singular at the base point.
        #[arg(long, default_value_t = 2.0, requires = "polynomial")]
        hint_re: f64,
        #[arg(long, default_value_t = 2.0, requires = "polynomial")]
        hint_im: f64,
    },
    /// k₀, k₁ of μ̂²(θ) = k₀ + k₁θ² + … from both sources.
    #[command(allow_negative_numbers = true)]
    Kcoeffs {
        #[command(flatten)]
        first: FirstCuspArgs,
        #[command(flatten)]
        slope2: SecondSlope,
    },
    /// k₁ over all coprime second-cusp slopes with |p₂| + |q₂| ≤ max.
    #[command(allow_negative_numbers = true)]
    K1scan {
        #[command(flatten)]
        first: FirstCuspArgs,
        #[arg(long)]
        max: i64,
    },
    /// Convergence of filled-curve coefficients to the unfilled ones.
    #[command(allow_negative_numbers = true)]
    Converge {
        /// p₁ values of the first-cusp slopes (p₁, q₁).
        #[arg(long = "n", value_delimiter = ',', default_values_t = [8i64, 16, 32, 64])]
        n: Vec<i64>,
        #[arg(long, default_value_t = 1)]
        q1: i64,
    },
    /// Tube measurements at explicit cone angles.
    #[command(allow_negative_numbers = true)]
    Tube {
        #[command(flatten)]
        first: FirstCuspArgs,
        #[command(flatten)]
        slope2: SecondSlope,
        /// Cone angles, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
    },
    /// Structural invariant suite; exit 0 iff every check passes.
    Verify,
}

enum Failure {
    Validation(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotCoprime(..) | Error::ThetaOutOfRange(..) | Error::ZeroAngle | Error::Polynomial(_) => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Compute(e.to_string()),
        }
    }
}

type Outcome = Result<(Report, bool), Failure>;

fn slope(p: i64, q: i64) -> Result<Slope, Failure> {
    Ok(Slope::new(p, q)?)
}

fn first_cusp(a: &FirstCuspArgs) -> Result<FirstCusp, Failure> {
    match (a.p1, a.q1) {
        (Some(p), Some(q)) => Ok(FirstCusp::Filled(slope(p, q)?)),
        _ => Ok(FirstCusp::Unfilled),
    }
}

fn curve_for(first: FirstCusp, exec: Execution) -> Result<GeometricCurve, Failure> {
    match first {
        FirstCusp::Unfilled => Ok(GeometricCurve::whitehead()),
        FirstCusp::Filled(_) => {
            let stencil = StencilConfig { execution: exec, ..StencilConfig::default() };
            Ok(sampled_curve(first, &stencil)?)
        }
    }
}

fn first_fields(first: FirstCusp) -> report::Record {
    match first {
        FirstCusp::Unfilled => record!["slope1" => "unfilled"],
        FirstCusp::Filled(s) => record!["slope1" => s.to_string(), "p1" => s.p, "q1" => s.q, "r1" => s.r, "s1" => s.s],
    }
}

fn matrix(m: &MobiusMatrix) -> Field {
    Field::Complexes(vec![m.a, m.b, m.c, m.d])
}

fn cmd_base() -> Outcome {
    let s = TetShapes::BASE;
    let (r1, r2) = gluing_residual(&s);
    let e = cusp_eigenvalues(&s)?;
    let rep = build_representation(BASE_X, BASE_Y)?;
    let tol = tolerance::identity();
    let ok = r1.norm() <= tol && r2.norm() <= tol;
    let rec = record![
        "z" => Field::Complexes(s.z.to_vec()),
        "gluing_residual_1" => r1.norm(),
        "gluing_residual_2" => r2.norm(),
        "eigenvalues" => Field::Complexes(e.as_array().to_vec()),
        "holonomy_x" => rep.x,
        "holonomy_y" => rep.y,
        "matrix_a" => matrix(&rep.a),
        "matrix_b" => matrix(&rep.b),
        "matrix_c" => matrix(&rep.c),
        "relation_residual" => rep.relation_residual(),
        "tolerance" => tol,
        "within_tolerance" => ok,
    ];
    Ok((Report { command: "base", records: vec![rec], summary: None }, ok))
}

fn cmd_acoeffs(first: FirstCuspArgs, polynomial: Option<PathBuf>, hint: C64, exec: Execution) -> Outcome {
    let first = first_cusp(&first)?;
    let (curve, method, residual) = match first {
        FirstCusp::Unfilled => {
            let poly = match &polynomial {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
                    BivariatePolynomial::from_json(&text)?
                }
                None => BivariatePolynomial::whitehead(),
            };
            let c = expand_from_polynomial(&poly, Sign::Minus, Sign::Minus, hint)?;
            let res = substitution_residual(&poly, &c, 3)?;
            (c, "polynomial", Some(res))
        }
        FirstCusp::Filled(_) => (curve_for(first, exec)?, "sampled", None),
    };
    let mut rec = first_fields(first);
    rec.extend(record![
        "method" => method,
        "a1" => curve.a1,
        "a2" => curve.a2,
        "a3" => curve.a3,
        "involution_defect" => curve.involution_defect(),
        "substitution_residual" => residual,
    ]);
    Ok((Report { command: "acoeffs", records: vec![rec], summary: None }, true))
}

fn cmd_kcoeffs(first: FirstCuspArgs, s2: SecondSlope, exec: Execution) -> Outcome {
    let first = first_cusp(&first)?;
    let s = slope(s2.p2, s2.q2)?;
    let curve = curve_for(first, exec)?;
    let jet = k_expansion_closed_form(&curve, &s)?;
    let closed = matches!(first, FirstCusp::Unfilled).then(|| k_expansion_whitehead(&s));
    let agree = closed.map(|c| (c.k0 - jet.k0).abs() <= K_AGREEMENT * c.k0.abs().max(1.0) && (c.k1 - jet.k1).abs() <= K_AGREEMENT);
    let mono = MonotonicityReport::from_k1(s, jet.k1);
    let mut rec = first_fields(first);
    rec.extend(record![
        "p2" => s.p, "q2" => s.q, "r2" => s.r, "s2" => s.s,
        "k0_jet" => jet.k0,
        "k1_jet" => jet.k1,
        "k0_closed_form" => closed.map(|c| c.k0),
        "k1_closed_form" => closed.map(|c| c.k1),
        "agree" => agree,
        "mu_hat_decreasing" => mono.mu_hat_decreasing,
        "sum_increasing" => mono.sum_increasing,
    ]);
    Ok((Report { command: "kcoeffs", records: vec![rec], summary: None }, agree != Some(false)))
}

fn cmd_k1scan(first: FirstCuspArgs, max: i64, exec: Execution) -> Outcome {
    if max < 1 {
        return Err(Failure::Validation(format!("--max must be at least 1, got {max}")));
    }
    let first = first_cusp(&first)?;
    let curve = curve_for(first, exec)?;
    let slopes = coprime_slopes(max);
    let ks = parallel::map(exec, &slopes, |s| k_expansion_closed_form(&curve, s));
    let mut records = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (s, k) in slopes.iter().zip(ks) {
        let k = k?;
        lo = lo.min(k.k1);
        hi = hi.max(k.k1);
        records.push(record!["p2" => s.p, "q2" => s.q, "k0" => k.k0, "k1" => k.k1]);
    }
    let in_range = lo >= -1.0 / 6.0 - 1e-9 && hi <= -1.0 / 12.0 + 1e-9;
    let mut summary = first_fields(first);
    summary.extend(record!["count" => records.len(), "k1_min" => lo, "k1_max" => hi, "within_range" => in_range]);
    Ok((Report { command: "k1scan", records, summary: Some(summary) }, true))
}

fn cmd_converge(n: &[i64], q1: i64, exec: Execution) -> Outcome {
    let firsts = n.iter().map(|&p| Ok(FirstCusp::Filled(slope(p, q1)?))).collect::<Result<Vec<_>, Failure>>()?;
    let stencil = StencilConfig { execution: exec, ..StencilConfig::default() };
    let rows = convergence_table(&firsts, &GeometricCurve::whitehead(), &stencil, exec);
    let nan = C64::new(f64::NAN, f64::NAN);
    let mut ok = true;
    let records = rows
        .iter()
        .map(|r| {
            ok &= r.failure.is_none();
            let a = r.coefficients.unwrap_or([nan; 3]);
            let e = r.errors.unwrap_or([f64::NAN; 3]);
            let mut rec = first_fields(r.slope1);
            rec.extend(record![
                "a1" => a[0], "a2" => a[1], "a3" => a[2],
                "error1" => e[0], "error2" => e[1], "error3" => e[2],
                "involution_defect" => r.involution_defect.unwrap_or(f64::NAN),
                "failure" => r.failure.clone().unwrap_or_default(),
            ]);
            rec
        })
        .collect();
    Ok((Report { command: "converge", records, summary: None }, ok))
}

fn cmd_tube(first: FirstCuspArgs, s2: SecondSlope, thetas: &[f64]) -> Outcome {
    let first = first_cusp(&first)?;
    let s = slope(s2.p2, s2.q2)?;
    if let Some(bad) = thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Failure::Validation(format!("cone angle must be positive, got {bad}")));
    }
    let solver = ConeSolver::new(first)?;
    let mut thetas = thetas.to_vec();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let mut records = Vec::new();
    for th in thetas {
        let m = measure(&solver.solve(&s, th)?, &s)?;
        let mut rec = first_fields(first);
        rec.extend(record![
            "p2" => s.p, "q2" => s.q, "r2" => s.r, "s2" => s.s,
            "theta" => m.theta,
            "radius" => m.radius,
            "core_length" => m.core_length,
            "mu" => m.mu,
            "mu_hat_sq" => m.mu_hat_sq,
            "cosh_2r" => m.cosh_2r,
            "area_identity_residual" => m.area_identity_residual(),
        ]);
        records.push(rec);
    }
    Ok((Report { command: "tube", records, summary: None }, true))
}

fn cmd_verify(exec: Execution) -> Outcome {
    let r = run_suite(exec);
    let records = r
        .checks
        .iter()
        .map(|c| {
            record![
                "check" => c.name,
                "count" => c.count,
                "max_residual" => c.max_residual,
                "tolerance" => c.tolerance,
                "passed" => c.passed,
                "error" => c.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let summary = record!["seed" => r.seed as i64, "passed" => r.passed_count(), "total" => r.checks.len()];
    Ok((Report { command: "verify", records, summary: Some(summary) }, r.passed()))
}

fn run(cli: &Cli) -> Outcome {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match &cli.command {
        Command::Base => cmd_base(),
        Command::Acoeffs { first, polynomial, hint_re, hint_im } => {
            cmd_acoeffs(*first, polynomial.clone(), C64::new(*hint_re, *hint_im), exec)
        }
        Command::Kcoeffs { first, slope2 } => cmd_kcoeffs(*first, *slope2, exec),
        Command::K1scan { first, max } => cmd_k1scan(*first, *max, exec),
        Command::Converge { n, q1 } => cmd_converge(n, *q1, exec),
        Command::Tube { first, slope2, theta } => cmd_tube(*first, *slope2, theta),
        Command::Verify => cmd_verify(exec),
    }
}

fn emit(cli: &Cli, report: &Report) -> io::Result<()> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Json => report.write_json(&mut out)?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol > 0.0) {
            eprintln!("error: tolerance must be positive and finite, got {tol}");
            return ExitCode::from(EXIT_VALIDATION);
        }
        tolerance::set(Tolerances { identity: tol, ..tolerance::get() });
    }
    match run(&cli) {
        Ok((report, ok)) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: writing output: {e}");
                return ExitCode::from(EXIT_COMPUTE);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: {} reported failing checks", report.command);
                ExitCode::from(EXIT_COMPUTE)
            }
        }
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_COMPUTE)
        }
    }
}
