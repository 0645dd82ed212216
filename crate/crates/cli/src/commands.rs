use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use liberlab::ensemble::{lsi_matrix_report, sample_uniform_spectra, ChainOptions, EnsembleSpec};
use liberlab::entropy::{chi_proj, equilibrium_solve, potential::load_potential, EquilibriumOptions, PotentialSpec};
use liberlab::fisher::{check_lsi, phi_star};
use liberlab::functions::{Polynomial, ScalarFunction};
use liberlab::grassmann::{grad_norm_trace_fn, random_tangent, ricci_quadratic_form, sample_haar_projection_rng};
use liberlab::liberation::{distance_to_arcsine, flow_diagnostics, flow_evolve, init_flow, istar, StepControl};
use liberlab::measure::{load_law, ProjectionPairLaw};

use crate::output::{output_paths, write_atomic, Table};
use crate::{Command, RunConfig};

const RICCI_TOLERANCE: f64 = 1e-10;
const GRADIENT_TOLERANCE: f64 = 1e-5;

/// What a command produced: the report body, optional CSV data and a
/// human-readable summary.
struct Outcome {
    result: Value,
    data: Option<Vec<u8>>,
    summary: Option<String>,
    passed: bool,
}

impl Outcome {
    fn report<T: Serialize>(result: &T) -> Result<Self> {
        Ok(Self {
            result: serde_json::to_value(result)?,
            data: None,
            summary: None,
            passed: true,
        })
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: Command,
    version: &'static str,
    seed: u64,
    grid: usize,
    config: &'a RunConfig,
    result: Value,
}

/// Runs one command and writes its outputs. Returns `false` when a
/// verification ran but did not pass.
pub fn run(config: &RunConfig) -> Result<bool> {
    let outcome = match config.command {
        Command::Chi => chi(config)?,
        Command::Fisher => fisher(config)?,
        Command::Lsi => lsi(config)?,
        Command::Sample => sample(config)?,
        Command::LsiMatrix => lsi_matrix(config)?,
        Command::VerifyRicci => verify_ricci(config)?,
        Command::VerifyGradient => verify_gradient(config)?,
        Command::Liberate => liberate(config)?,
        Command::Equilibrium => equilibrium(config)?,
        Command::Istar => istar_command(config)?,
    };
    let report = Report {
        command: config.command,
        version: liberlab::report::VERSION,
        seed: config.seed,
        grid: config.grid,
        config,
        result: outcome.result,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &config.out {
        Some(out) => {
            let (json_path, csv_path) = output_paths(out);
            write_atomic(&json_path, text.as_bytes())?;
            if let Some(data) = &outcome.data {
                write_atomic(&csv_path, data)?;
            }
            if let Some(s) = &outcome.summary {
                print!("{s}");
            }
        }
        None => {
            if let Some(s) = &outcome.summary {
                eprint!("{s}");
            }
            print!("{text}");
        }
    }
    Ok(outcome.passed)
}

fn law(config: &RunConfig) -> Result<ProjectionPairLaw> {
    let path = config.law.as_deref().ok_or_else(|| anyhow!("--law is required"))?;
    Ok(load_law(path).with_context(|| format!("reading {}", path.display()))?)
}

fn potential(path: Option<&Path>) -> Result<Option<PotentialSpec>> {
    path.map(|p| load_potential(p).with_context(|| format!("reading {}", p.display())))
        .transpose()
        .map_err(Into::into)
}

fn check_grid(config: &RunConfig) -> Result<()> {
    if config.grid < 16 {
        return Err(liberlab::Error::InvalidArgument(format!("--grid {} is too small", config.grid)).into());
    }
    Ok(())
}

fn size(config: &RunConfig) -> Result<usize> {
    config.big_n.ok_or_else(|| anyhow!("--N is required"))
}

fn psi(config: &RunConfig, default: &str) -> Result<(Arc<dyn ScalarFunction>, String)> {
    let text = config.psi.as_deref().unwrap_or(default);
    let poly = Polynomial::parse(text)?;
    let label = poly.to_string();
    Ok((Arc::new(poly), label))
}

fn chi(config: &RunConfig) -> Result<Outcome> {
    check_grid(config)?;
    let law = law(config)?;
    let report = chi_proj(&law, &law.grid(config.grid))?;
    Outcome::report(&json!({
        "law": law.to_document(),
        "integrability": law.check_integrability(),
        "entropy": report,
    }))
}

fn fisher(config: &RunConfig) -> Result<Outcome> {
    check_grid(config)?;
    let law = law(config)?;
    let report = phi_star(&law, &law.grid(config.grid))?;
    let mut table = Table::new(&["x", "phi"]);
    for (x, p) in report.nodes.iter().zip(&report.phi) {
        table.push([x, p]);
    }
    let mut out = Outcome::report(&json!({ "law": law.to_document(), "fisher": report }))?;
    out.data = Some(table.to_csv()?);
    Ok(out)
}

fn lsi(config: &RunConfig) -> Result<Outcome> {
    check_grid(config)?;
    let law = law(config)?;
    let h = potential(config.h.as_deref())?;
    let report = check_lsi(&law, h.as_ref(), config.c1, config.c2, &law.grid(config.grid))?;
    Outcome::report(&json!({
        "law": law.to_document(),
        "potential": h.as_ref().map(|h| h.label().to_string()),
        "lsi": report,
    }))
}

fn ensemble_spec(config: &RunConfig) -> Result<EnsembleSpec> {
    let n = size(config)?;
    let k = config.k.unwrap_or(n / 2);
    let l = config.l.unwrap_or(k);
    Ok(EnsembleSpec::new(n, k, l)?)
}

fn sample(config: &RunConfig) -> Result<Outcome> {
    let spec = ensemble_spec(config)?;
    let trials = config.trials.unwrap_or(1000);
    let draws = sample_uniform_spectra(&spec, trials, config.seed)?;
    let (n0, n1, n) = spec.multiplicities();
    let mut table = Table::new(&["trial", "index", "value"]);
    let (mut sum, mut sq, mut count) = (0.0, 0.0, 0usize);
    for (t, d) in draws.iter().enumerate() {
        for (i, &x) in d.xs.iter().enumerate() {
            table.push([t.to_string(), i.to_string(), x.to_string()]);
            sum += x;
            sq += x * x;
            count += 1;
        }
    }
    let denom = count.max(1) as f64;
    let mut out = Outcome::report(&json!({
        "N": spec.n, "k": spec.k, "l": spec.l,
        "n0": n0, "n1": n1, "n": n,
        "trials": trials,
        "eigenvalues": count,
        "mean": sum / denom,
        "second_moment": sq / denom,
    }))?;
    out.data = Some(table.to_csv()?);
    Ok(out)
}

fn lsi_matrix(config: &RunConfig) -> Result<Outcome> {
    let (f, label) = psi(config, "poly:0,1")?;
    let spec = ensemble_spec(config)?.with_tilt(f, &label);
    let opts = ChainOptions {
        samples: config.trials.unwrap_or(10_000),
        seed: config.seed,
        ..ChainOptions::default()
    };
    let report = lsi_matrix_report(&spec, &opts)?;
    let mut out = Outcome::report(&report)?;
    out.passed = report.holds;
    out.summary = Some(format!(
        "S = {:.6e} ± {:.1e}, Dirichlet/2N = {:.6e}, margin = {:.3e} ± {:.1e}: {}\n",
        report.relative_entropy,
        report.relative_entropy_se,
        report.bound,
        report.margin,
        report.margin_se,
        if report.holds { "PASS" } else { "FAIL" }
    ));
    Ok(out)
}

#[derive(Serialize)]
struct IdentityRow {
    k: usize,
    trials: usize,
    max_relative_error: f64,
    failures: usize,
    pass: bool,
}

fn render(title: &str, rows: &[IdentityRow], tolerance: f64) -> String {
    let mut s = format!("{title} (tolerance {tolerance:e})\n");
    let _ = writeln!(s, "{:>4} {:>7} {:>14} {:>9}  result", "k", "trials", "max rel err", "failures");
    for r in rows {
        let _ = writeln!(
            s,
            "{:>4} {:>7} {:>14.3e} {:>9}  {}",
            r.k,
            r.trials,
            r.max_relative_error,
            r.failures,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}

fn verify_ricci(config: &RunConfig) -> Result<Outcome> {
    let n = size(config)?;
    if n < 2 {
        bail!(liberlab::Error::InvalidArgument("--N must be at least 2".into()));
    }
    let ks: Vec<usize> = match config.k {
        Some(k) if k == 0 || k >= n => bail!(liberlab::Error::InvalidArgument(format!("--k must lie in 1..{}", n - 1))),
        Some(k) => vec![k],
        None => (1..n).collect(),
    };
    let trials = config.trials.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table = Table::new(&["k", "trial", "commutator_sum", "n_norm_sq", "relative_error"]);
    let mut rows = vec![];
    for &k in &ks {
        let mut worst: f64 = 0.0;
        let mut failures = 0;
        for t in 0..trials {
            let x = random_tangent(n, k, &mut rng);
            let lhs = ricci_quadratic_form(n, k, &x)?;
            let rhs = n as f64 * x.norm_sq();
            let rel = (lhs - rhs).abs() / rhs;
            if !(rel <= RICCI_TOLERANCE) {
                failures += 1;
            }
            worst = worst.max(rel);
            table.push([k.to_string(), t.to_string(), lhs.to_string(), rhs.to_string(), rel.to_string()]);
        }
        rows.push(IdentityRow {
            k,
            trials,
            max_relative_error: worst,
            failures,
            pass: failures == 0,
        });
    }
    let passed = rows.iter().all(|r| r.pass);
    let summary = render(&format!("commutator sum = N|X|^2 on G({n},k)"), &rows, RICCI_TOLERANCE);
    Ok(Outcome {
        result: json!({ "N": n, "tolerance": RICCI_TOLERANCE, "rows": rows, "all_pass": passed }),
        data: Some(table.to_csv()?),
        summary: Some(summary),
        passed,
    })
}

fn verify_gradient(config: &RunConfig) -> Result<Outcome> {
    let n = size(config)?;
    let k = config.k.unwrap_or(n / 2);
    let l = config.l.unwrap_or(k);
    if k == 0 || k >= n || l == 0 || l >= n {
        bail!(liberlab::Error::InvalidArgument(format!("--k and --l must lie in 1..{}", n.saturating_sub(1))));
    }
    let (f, label) = psi(config, "poly:0,1,-0.5,0.25")?;
    let trials = config.trials.unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table = Table::new(&["trial", "closed_form", "finite_difference", "relative_error"]);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for t in 0..trials {
        let p = sample_haar_projection_rng(n, k, &mut rng)?;
        let q = sample_haar_projection_rng(n, l, &mut rng)?;
        let check = grad_norm_trace_fn(&p, &q, f.as_ref())?;
        if !(check.relative_error <= GRADIENT_TOLERANCE) {
            failures += 1;
        }
        worst = worst.max(check.relative_error);
        table.push([
            t.to_string(),
            check.closed_form.to_string(),
            check.finite_difference.to_string(),
            check.relative_error.to_string(),
        ]);
    }
    let rows = [IdentityRow {
        k,
        trials,
        max_relative_error: worst,
        failures,
        pass: failures == 0,
    }];
    let summary = render(
        &format!("|grad Tr psi(PQP)|^2 closed form vs differences, N={n}, l={l}, psi={label}"),
        &rows,
        GRADIENT_TOLERANCE,
    );
    Ok(Outcome {
        result: json!({
            "N": n, "k": k, "l": l, "psi": label,
            "tolerance": GRADIENT_TOLERANCE,
            "rows": rows,
            "all_pass": failures == 0,
        }),
        data: Some(table.to_csv()?),
        summary: Some(summary),
        passed: failures == 0,
    })
}

fn check_flow(config: &RunConfig) -> Result<()> {
    check_grid(config)?;
    if config.particles == 0 || !(config.tmax > 0.0) {
        bail!(liberlab::Error::InvalidArgument("--particles and --tmax must be positive".into()));
    }
    Ok(())
}

fn liberate(config: &RunConfig) -> Result<Outcome> {
    check_flow(config)?;
    let law = law(config)?;
    let grid = law.grid(config.grid);
    let start = init_flow(&law, config.particles)?;
    let corrected = start.chi_corrected();
    let state = flow_evolve(start, config.tmax, &StepControl::default())?;
    let diagnostics = flow_diagnostics(&state, Some((&law, &grid)), corrected)?;
    let mut out = Outcome::report(&json!({
        "law": law.to_document(),
        "particles": config.particles,
        "t_max": config.tmax,
        "diagnostics": diagnostics,
        "w1_to_arcsine": distance_to_arcsine(&state),
        "final_positions": state.positions(),
    }))?;
    out.data = Some(Table::from_records(&state.history)?);
    Ok(out)
}

fn istar_command(config: &RunConfig) -> Result<Outcome> {
    check_flow(config)?;
    let law = law(config)?;
    let grid = law.grid(config.grid);
    let (report, state) = istar(&law, config.particles, config.tmax, &grid, &StepControl::default())?;
    let mut out = Outcome::report(&json!({ "law": law.to_document(), "istar": report }))?;
    out.data = Some(Table::from_records(&state.history)?);
    out.summary = Some(format!(
        "i* = {:.6} (tail {:.2e}), -chi = {:.6}, relative gap {:.2e}{}\n",
        report.istar,
        report.tail,
        report.minus_chi,
        report.relative_gap,
        if report.lower_bound_only { " (lower bound only)" } else { "" }
    ));
    Ok(out)
}

fn equilibrium(config: &RunConfig) -> Result<Outcome> {
    check_grid(config)?;
    let law = law(config)?;
    let h = potential(config.h.as_deref())?.unwrap_or_else(PotentialSpec::zero);
    let eq = equilibrium_solve(law.alpha(), law.beta(), &h, &EquilibriumOptions::default())?;
    let mut table = Table::new(&["x", "density"]);
    if !eq.density.is_zero() {
        for &x in eq.density.grid(config.grid).nodes() {
            table.push([x, eq.density.value(x)]);
        }
    }
    let mut out = Outcome::report(&json!({
        "alpha": law.alpha(),
        "beta": law.beta(),
        "potential": h.label(),
        "equilibrium": eq.summary(),
        "law": eq.law.to_document(),
    }))?;
    out.data = Some(table.to_csv()?);
    Ok(out)
}
