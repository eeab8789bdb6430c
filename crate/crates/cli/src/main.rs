//! `fracdiff` — kernels, fractional differences, resolvent families,
//! Poisson transforms, solvers, and the named demonstration problems, one
//! subcommand each.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fracdiff_cli::config::{family_to_json, ForcingConfig, OperatorConfig, ProblemConfig};
use fracdiff_cli::emit::{self, CheckEntry};
use fracdiff_cli::{checks, examples, seed_from_env};
use fracdiff_core::kernels::{cesaro_kernel, FracOrder, ScalarSeq};
use fracdiff_core::poisson::{
    exp_profile, ml_profile, poisson_ml_closed, poisson_transform, power_profile, QuadratureSpec,
};
use fracdiff_core::resolvent::{build_auto, build_beta, build_recurrence, build_series};
use fracdiff_core::solver::{
    admissibility, residual, solve_homogeneous, solve_inhomogeneous, solve_nonlinear_direct,
    solve_nonlinear_picard, weighted_norm, Forcing, ProblemSpec, StateDep,
};
use fracdiff_core::{fracdiff, LinOperator, Matrix, VecSeq};

#[derive(Parser)]
#[command(name = "fracdiff", version, about = "Discrete fractional calculus toolkit")]
struct Cli {
    /// Output path stem; extensions are appended per artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Primary artifact format where a choice exists.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FracOp {
    Sum,
    Rl,
    Caputo,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Cesàro kernel k^alpha on 0..=n.
    Kernel {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 20)]
        n: usize,
    },
    /// Fractional sum or difference of a sequence (CSV input, or the
    /// constant-one sequence when no input is given).
    Frac {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = FracOp::Rl)]
        op: FracOp,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Horizon of the default input when --input is absent.
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    /// Build a discrete resolvent family and verify its identities.
    Resolvent {
        /// Operator descriptor: zero | scalar:<a> | diag:<a,b,...> |
        /// laplacian | file:<operator.json>
        #[arg(long)]
        op: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// auto | recurrence | series | beta
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long, default_value_t = 1e-15)]
        tol: f64,
        /// Dimension for descriptors that need one (zero, laplacian).
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
    /// Poisson-transform a named time function on indices 0..=n.
    Poisson {
        /// exp:<lambda> | galpha:<alpha> | ml:<alpha>,<beta>,<lambda>
        #[arg(long)]
        func: String,
        #[arg(long, default_value_t = 40)]
        n: usize,
    },
    /// Solve a problem described by a JSON file.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named demonstration problem.
    Example {
        /// heat | multiplication | shifted | chebyshev
        name: String,
        #[arg(long, default_value_t = 40)]
        dim: usize,
        #[arg(long, default_value_t = 1.6)]
        alpha: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Run the full verification suite and print a pass/fail table.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn stem(cli_out: &Option<PathBuf>, default: &str) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn artifact(stem: &Path, ext: &str) -> PathBuf {
    let mut p = stem.to_path_buf();
    let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    p.set_file_name(format!("{name}.{ext}"));
    p
}

fn emit_scalar_result(
    command: &str,
    stem: &Path,
    format: Format,
    params: serde_json::Value,
    header: &[&str],
    seq: &ScalarSeq,
    checks: &[CheckEntry],
) -> Result<bool> {
    let path = match format {
        Format::Csv => {
            let p = artifact(stem, "csv");
            emit::write_csv(&p, header, &emit::scalar_rows(seq))?;
            p
        }
        Format::Json => {
            let p = artifact(stem, "json");
            let doc = emit::document(
                emit::meta(command, params),
                json!({"values": seq.values()}),
                checks,
            );
            emit::write_json(&p, &doc)?;
            p
        }
    };
    Ok(emit::summarize(command, &path, checks))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Kernel { alpha, n } => {
            let k = cesaro_kernel(alpha, n)?;
            let checks = vec![
                CheckEntry::new("starts_at_one", (k[0] - 1.0).abs(), 0.0),
                CheckEntry::new("first_entry_is_order", (k[1] - alpha).abs() / alpha.abs(), 1e-15),
            ];
            emit_scalar_result(
                "kernel",
                &stem(&cli.out, "fracdiff-kernel"),
                cli.format,
                json!({"alpha": alpha, "n": n}),
                &["n", "value"],
                &k,
                &checks,
            )
        }
        Command::Frac { alpha, op, input, n } => run_frac(&cli.out, cli.format, alpha, op, input, n),
        Command::Resolvent { op, alpha, n, method, tol, dim } => {
            run_resolvent(&cli.out, &op, alpha, n, &method, tol, dim)
        }
        Command::Poisson { func, n } => run_poisson(&cli.out, cli.format, &func, n),
        Command::Solve { config } => run_solve(&cli.out, &config),
        Command::Example { name, dim, alpha, steps } => {
            run_example(&cli.out, &name, dim, alpha, steps)
        }
        Command::Selftest => run_selftest(&cli.out),
    }
}

fn run_frac(
    out: &Option<PathBuf>,
    format: Format,
    alpha: f64,
    op: FracOp,
    input: Option<PathBuf>,
    n: usize,
) -> Result<bool> {
    let (seq, default_input) = match input {
        Some(path) => (emit::read_csv_vecseq(&path)?, false),
        None => (VecSeq::from_scalar(&ScalarSeq::constant(1.0, n)), true),
    };
    let result = match op {
        FracOp::Sum => fracdiff::frac_sum(alpha, &seq)?,
        FracOp::Rl => fracdiff::rl_diff(FracOrder::solver_order(alpha)?, &seq)?,
        FracOp::Caputo => fracdiff::caputo_diff(FracOrder::solver_order(alpha)?, &seq)?,
    };
    // closed forms are available for the constant-one default input
    let mut checks = Vec::new();
    if default_input {
        match op {
            FracOp::Sum => {
                // ones = k^1, so the sum is k^{alpha+1}
                let want = cesaro_kernel(alpha + 1.0, result.horizon())?;
                let dev = (0..=result.horizon())
                    .map(|m| (result.state(m)[0] - want[m]).abs() / want[m].abs())
                    .fold(0.0f64, f64::max);
                checks.push(CheckEntry::new("kernel_shift_closed_form", dev, 1e-12));
            }
            FracOp::Rl => {
                if alpha < 2.0 {
                    let want = cesaro_kernel(1.0 - alpha, n)?;
                    let dev = (0..=result.horizon())
                        .map(|m| (result.state(m)[0] - want[m + 2]).abs() / want[m + 2].abs())
                        .fold(0.0f64, f64::max);
                    checks.push(CheckEntry::new("kernel_shift_closed_form", dev, 1e-12));
                }
            }
            FracOp::Caputo => {
                let dev = result.sup_norm();
                checks.push(CheckEntry::new("constant_annihilated", dev, 1e-13));
            }
        }
    }
    let op_name = match op {
        FracOp::Sum => "sum",
        FracOp::Rl => "rl",
        FracOp::Caputo => "caputo",
    };
    let s = stem(out, "fracdiff-frac");
    let header = emit::vecseq_header(result.dim());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let path = match format {
        Format::Csv => {
            let p = artifact(&s, "csv");
            emit::write_csv(&p, &header_refs, &emit::vecseq_rows(&result))?;
            p
        }
        Format::Json => {
            let p = artifact(&s, "json");
            let states: Vec<Vec<f64>> =
                (0..=result.horizon()).map(|m| result.state(m).to_vec()).collect();
            let doc = emit::document(
                emit::meta("frac", json!({"alpha": alpha, "op": op_name})),
                json!({"states": states}),
                &checks,
            );
            emit::write_json(&p, &doc)?;
            p
        }
    };
    Ok(emit::summarize("frac", &path, &checks))
}

fn parse_operator(desc: &str, dim: usize) -> Result<LinOperator> {
    if desc == "zero" {
        return Ok(LinOperator::zero(dim));
    }
    if desc == "laplacian" {
        return Ok(LinOperator::laplacian(0.0, std::f64::consts::PI, dim)?);
    }
    if let Some(a) = desc.strip_prefix("scalar:") {
        return Ok(LinOperator::scalar(a.parse::<f64>().context("parsing scalar value")?));
    }
    if let Some(list) = desc.strip_prefix("diag:") {
        let mults: Vec<f64> = list
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .context("parsing diagonal multipliers")?;
        return Ok(LinOperator::Diagonal { multipliers: mults, grid: None });
    }
    if let Some(path) = desc.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let cfg: OperatorConfig = serde_json::from_str(&text).context("parsing operator file")?;
        return cfg.build();
    }
    bail!("unknown operator descriptor '{desc}'")
}

fn run_resolvent(
    out: &Option<PathBuf>,
    op_desc: &str,
    alpha: f64,
    n: usize,
    method: &str,
    tol: f64,
    dim: usize,
) -> Result<bool> {
    let op = parse_operator(op_desc, dim)?;
    let order = FracOrder::new(alpha)?;
    let fam = match method {
        "auto" => build_auto(&op, order, n)?,
        "recurrence" => build_recurrence(&op, order, n)?,
        "series" => build_series(&op, order, n, tol)?,
        "beta" => build_beta(&op, order, n)?,
        other => bail!("unknown method '{other}'"),
    };
    let mut checks = vec![
        CheckEntry::new(
            "functional_equation",
            fam.functional_equation_residual()?,
            1e-9,
        ),
        CheckEntry::new("commutes_with_generator", fam.commutation_residual()?, 1e-10),
    ];
    if n >= 2 {
        checks.push(CheckEntry::new(
            "difference_equation",
            fam.difference_equation_residual()?,
            1e-9,
        ));
    }
    // anchor: S(0) - A S(0) = I
    let d = fam.dim();
    let s0 = fam.matrix(0);
    let a_s0 = op.apply_matrix(s0)?;
    let mut anchor = s0.clone();
    anchor.axpy(-1.0, &a_s0);
    anchor.axpy(-1.0, &Matrix::identity(d));
    checks.push(CheckEntry::new("resolvent_anchor", anchor.max_abs(), 1e-10));

    let s = stem(out, "fracdiff-resolvent");
    let p = artifact(&s, "json");
    let doc = emit::document(
        emit::meta(
            "resolvent",
            json!({"op": op_desc, "alpha": alpha, "n": n, "method": method, "tol": tol}),
        ),
        family_to_json(&fam),
        &checks,
    );
    emit::write_json(&p, &doc)?;
    Ok(emit::summarize("resolvent", &p, &checks))
}

fn run_poisson(out: &Option<PathBuf>, format: Format, func: &str, n: usize) -> Result<bool> {
    let quad = QuadratureSpec::default();
    let mut checks = Vec::new();
    let values: Vec<f64>;
    if let Some(lam) = func.strip_prefix("exp:") {
        let lam: f64 = lam.parse().context("parsing exp rate")?;
        let psi = exp_profile(lam);
        values = (0..=n).map(|m| poisson_transform(&psi, m, &quad)).collect::<Result<_, _>>()?;
        let dev = values
            .iter()
            .enumerate()
            .map(|(m, v)| {
                let want = (1.0 + lam).powi(-(m as i32 + 1));
                (v - want).abs() / want
            })
            .fold(0.0f64, f64::max);
        checks.push(CheckEntry::new("exponential_closed_form", dev, 1e-10));
    } else if let Some(a) = func.strip_prefix("galpha:") {
        let a: f64 = a.parse().context("parsing kernel order")?;
        let psi = power_profile(a)?;
        values = (0..=n).map(|m| poisson_transform(&psi, m, &quad)).collect::<Result<_, _>>()?;
        let k = cesaro_kernel(a, n)?;
        let dev = values
            .iter()
            .enumerate()
            .map(|(m, v)| (v - k[m]).abs() / k[m].abs())
            .fold(0.0f64, f64::max);
        checks.push(CheckEntry::new("kernel_closed_form", dev, 1e-8));
    } else if let Some(rest) = func.strip_prefix("ml:") {
        let parts: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .context("parsing ml parameters")?;
        anyhow::ensure!(parts.len() == 3, "ml descriptor needs alpha,beta,lambda");
        let (a, b, lam) = (parts[0], parts[1], parts[2]);
        let psi = ml_profile(a, b, lam)?;
        values = (0..=n).map(|m| poisson_transform(&psi, m, &quad)).collect::<Result<_, _>>()?;
        let dev = values
            .iter()
            .enumerate()
            .map(|(m, v)| {
                let want = poisson_ml_closed(a, b, lam, m).unwrap();
                (v - want).abs() / want.abs()
            })
            .fold(0.0f64, f64::max);
        checks.push(CheckEntry::new("series_closed_form", dev, 1e-8));
    } else {
        bail!("unknown function descriptor '{func}' (expected exp:, galpha:, or ml:)");
    }
    let seq = ScalarSeq::new(values)?;
    emit_scalar_result(
        "poisson",
        &stem(out, "fracdiff-poisson"),
        format,
        json!({"func": func, "n": n}),
        &["n", "value"],
        &seq,
        &checks,
    )
}

fn run_solve(out: &Option<PathBuf>, config_path: &Path) -> Result<bool> {
    let cfg = ProblemConfig::load(config_path)?;
    let op = cfg.operator.build()?;
    let dim = op.dim();
    let order = FracOrder::solver_order(cfg.alpha)?;
    let fam = match cfg.method.as_str() {
        "auto" => build_auto(&op, order, cfg.horizon)?,
        "recurrence" => build_recurrence(&op, order, cfg.horizon)?,
        "series" => build_series(&op, order, cfg.horizon, 1e-15)?,
        "beta" => build_beta(&op, order, cfg.horizon)?,
        other => bail!("unknown method '{other}'"),
    };
    let space = admissibility(&cfg.weight.kind(), cfg.horizon)?;
    let g = cfg.forcing_sequence(dim)?;
    let mut checks = Vec::new();
    let mut picard_data = json!(null);

    let solution = match &cfg.forcing {
        ForcingConfig::None => {
            let p = ProblemSpec::new(
                order,
                &op,
                cfg.u0.clone(),
                cfg.u1.clone(),
                Forcing::None,
                cfg.horizon,
            )?;
            let u = solve_homogeneous(&p, &fam)?;
            checks.push(CheckEntry::new("residual", residual(&u, &p)?, 1e-9));
            u
        }
        ForcingConfig::Sequence { .. } => {
            let g = g.as_ref().unwrap();
            let p = ProblemSpec::new(
                order,
                &op,
                cfg.u0.clone(),
                cfg.u1.clone(),
                Forcing::Sequence(g),
                cfg.horizon,
            )?;
            let u = solve_inhomogeneous(&p, &fam)?;
            checks.push(CheckEntry::new("residual", residual(&u, &p)?, 1e-9));
            u
        }
        ForcingConfig::Heat { source_amplitude } => {
            let amp = *source_amplitude;
            let f = move |m: usize, v: &[f64]| -> Vec<f64> {
                let mut fv = examples::heat_nonlinearity(m, v);
                if amp != 0.0 {
                    let decay = amp / (1.0 + m as f64).powi(2);
                    for (i, o) in fv.iter_mut().enumerate() {
                        *o += decay * ((i + 1) as f64 * 0.3).sin();
                    }
                }
                fv
            };
            let sd = StateDep {
                f: &f,
                lipschitz: examples::HEAT_LIPSCHITZ,
                envelope_sup: 1.0,
                w_slope: 1.0,
            };
            let p = ProblemSpec::new(
                order,
                &op,
                cfg.u0.clone(),
                cfg.u1.clone(),
                Forcing::StateDependent(sd),
                cfg.horizon,
            )?;
            let u = solve_nonlinear_direct(&p, &fam)?;
            checks.push(CheckEntry::new("residual", residual(&u, &p)?, 1e-9));
            if cfg.u0.iter().all(|&x| x == 0.0) && cfg.u1.iter().all(|&x| x == 0.0) {
                let report = solve_nonlinear_picard(&p, &fam, &space, 1e-13, 2 * cfg.horizon)?;
                checks.push(CheckEntry::flag("picard_converged", report.converged));
                picard_data = json!({
                    "iterations": report.iterations,
                    "contraction_estimate": report.contraction_estimate,
                    "final_step": report.final_step,
                });
            }
            u
        }
    };

    let ic_scale = 1.0
        + cfg.u0.iter().map(|x| x * x).sum::<f64>().sqrt()
        + cfg.u1.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ic_dev = (0..dim)
        .map(|i| {
            (solution.state(0)[i] - cfg.u0[i])
                .abs()
                .max((solution.state(1)[i] - cfg.u1[i]).abs())
        })
        .fold(0.0f64, f64::max)
        / ic_scale;
    checks.push(CheckEntry::new("initial_values", ic_dev, 1e-12));
    let wnorm = weighted_norm(&solution, &space);

    let s = stem(out, "fracdiff-solution");
    let csv = artifact(&s, "csv");
    let header = emit::vecseq_header(dim);
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    emit::write_csv(&csv, &header_refs, &emit::vecseq_rows(&solution))?;
    let sidecar = artifact(&s, "json");
    let doc = emit::document(
        emit::meta("solve", json!({"config": config_path.display().to_string()})),
        json!({
            "residual": checks[0].measured,
            "weighted_norm": wnorm,
            "admissibility_constant": space.admissibility_constant(),
            "weight_admissible": space.is_admissible(),
            "family_sup_norm": fam.sup_norm(),
            "family_method": fam.method().name(),
            "picard": picard_data,
            "solution_csv": csv.display().to_string(),
        }),
        &checks,
    );
    emit::write_json(&sidecar, &doc)?;
    Ok(emit::summarize("solve", &csv, &checks))
}

fn run_example(
    out: &Option<PathBuf>,
    name: &str,
    dim: usize,
    alpha: f64,
    steps: usize,
) -> Result<bool> {
    let outcome = match name {
        "heat" => examples::heat(dim, alpha, steps)?,
        "multiplication" => examples::multiplication(dim, steps)?,
        "shifted" => examples::shifted(dim, steps)?,
        "chebyshev" => examples::chebyshev(dim, steps)?,
        other => bail!("unknown example '{other}' (heat, multiplication, shifted, chebyshev)"),
    };
    let s = stem(out, &format!("fracdiff-example-{name}"));
    let csv = artifact(&s, "csv");
    let header = emit::vecseq_header(outcome.solution.dim());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    emit::write_csv(&csv, &header_refs, &emit::vecseq_rows(&outcome.solution))?;
    let sidecar = artifact(&s, "json");
    let doc = emit::document(
        emit::meta(
            "example",
            json!({"name": name, "dim": dim, "alpha": alpha, "steps": steps}),
        ),
        outcome.data.clone(),
        &outcome.checks,
    );
    emit::write_json(&sidecar, &doc)?;
    Ok(emit::summarize(&format!("example {name}"), &csv, &outcome.checks))
}

fn run_selftest(out: &Option<PathBuf>) -> Result<bool> {
    let seed = seed_from_env();
    let outcomes = checks::run_all(seed);
    for oc in &outcomes {
        oc.print_line();
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("selftest: {passed} of {} criteria passed (seed {seed})", outcomes.len());
    let entries: Vec<CheckEntry> = outcomes
        .iter()
        .map(|o| CheckEntry {
            name: o.id.to_string(),
            measured: o.measured,
            tolerance: o.tolerance,
            passed: o.passed,
        })
        .collect();
    let s = stem(out, "fracdiff-selftest");
    let p = artifact(&s, "json");
    let doc = emit::document(
        emit::meta("selftest", json!({"seed": seed})),
        json!({
            "criteria": outcomes.iter().map(|o| json!({
                "id": o.id,
                "label": o.label,
                "measured": o.measured,
                "tolerance": o.tolerance,
                "passed": o.passed,
                "seconds": o.seconds,
                "detail": o.detail,
            })).collect::<Vec<_>>(),
        }),
        &entries,
    );
    emit::write_json(&p, &doc)?;
    Ok(passed == outcomes.len())
}
