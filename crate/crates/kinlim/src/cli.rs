//! Command-line front end: subcommands, report formatting and threshold checks.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::equilibria::ModelParams;
use crate::error::{KinlimError, Result};
use crate::fluid_mode::{adaptive_eta0, solve_mode_with, trace_branch_with, write_branch_csv, ModeBranch};
use crate::kinetic_solver::{convergence_study_multi, write_error_csv};
use crate::linalg::inf_norm;
use crate::macro_solver::{evolve_fractional_heat, write_snapshot_csv, MacroField};
use crate::operators::{assemble, coercivity_gap, OperatorDisc};
use crate::theory::{diffusion_exponent, kappa_closed_form, kappa_generic, kappa_value, regime, Regime, ScalingLaw};

/// Exit code for a threshold breach in check mode.
pub const EXIT_BREACH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kinlim", version, about = "Fluid-mode analysis and fractional diffusion limits of linear kinetic equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime, diffusion exponent and scaling laws of the model.
    Exponent(ConfigArgs),
    /// Macroscopic coefficient κ as JSON.
    Kappa(ConfigArgs),
    /// Traces the fluid-mode branch and compares μ₀ with theory.
    Branch(RunArgs),
    /// Solves for one fluid mode.
    Mode(ModeArgs),
    /// Kinetic versus macroscopic convergence study.
    Simulate(SimulateArgs),
    /// Structural checks with pass/fail lines.
    Check(ConfigArgs),
    /// Prints the default configuration.
    Defaults {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML or JSON configuration; defaults apply when absent.
    #[arg(long, short = 'c', visible_alias = "model")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 4 when a threshold is breached.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Compare against this κ in addition to the theoretical one.
    #[arg(long)]
    pub kappa: Option<f64>,
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig> {
    match &args.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_dir(cfg: &ExperimentConfig, run: &RunArgs) -> Result<PathBuf> {
    let dir = run.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Theory law computed with the configured grid when the regime needs an operator.
pub fn theory_law(cfg: &ExperimentConfig, op: Option<&OperatorDisc>) -> Result<ScalingLaw> {
    let p = &cfg.model;
    if regime(p.alpha.value(), p.beta)? == Regime::Diffusive && op.is_none() {
        let op = assemble(p, &cfg.grid)?;
        return kappa_value(p, Some(&op));
    }
    kappa_value(p, op)
}

fn scaling_laws(p: &ModelParams) -> Result<(Regime, f64, String, String)> {
    let alpha = p.alpha.value();
    let reg = regime(alpha, p.beta)?;
    let zeta = diffusion_exponent(alpha, p.beta)?;
    let (small, big) = match reg {
        Regime::Diffusive => ("eps^2".to_string(), "eta^2".to_string()),
        Regime::Critical => ("eps^2 |ln eps|".to_string(), "eta^2 |ln eta|".to_string()),
        Regime::Fractional => (format!("eps^{zeta}"), format!("eta^{zeta}")),
        Regime::Alpha0 => (format!("eps^{} / |ln eps|", p.beta / (1.0 + p.beta)), format!("eta^{zeta}")),
    };
    Ok((reg, zeta, small, big))
}

fn cmd_exponent(args: &ConfigArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    let (reg, zeta, small, big) = scaling_laws(&cfg.model)?;
    print_json(out, &json!({ "regime": reg, "zeta": zeta, "theta_law": small, "big_theta_law": big }))?;
    Ok(0)
}

fn cmd_kappa(args: &ConfigArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    let law = theory_law(&cfg, None)?;
    print_json(
        out,
        &json!({ "regime": law.regime, "zeta": law.zeta, "mu0": law.mu0, "kappa": law.kappa, "method": law.method }),
    )?;
    Ok(0)
}

/// Branch traced with the configured sweep, plus its summary.
pub struct BranchRun {
    pub op: OperatorDisc,
    pub branch: ModeBranch,
    pub law: ScalingLaw,
    pub summary: serde_json::Value,
    pub breaches: Vec<String>,
}

pub fn run_branch(cfg: &ExperimentConfig) -> Result<BranchRun> {
    let op = assemble(&cfg.model, &cfg.grid)?;
    let sigma = cfg.sweep.sigma;
    let eta0 = match cfg.sweep.eta0 {
        Some(e) => e,
        None => adaptive_eta0(&op, sigma)?,
    };
    let etas = cfg.sweep.etas_from(eta0)?;
    let branch = trace_branch_with(&op, &etas, sigma, &cfg.tolerances.mode_options())?;
    let law = theory_law(cfg, Some(&op))?;
    let dev = (branch.mu0.value - law.mu0).abs() / law.mu0.abs();
    let lnorm = inf_norm(op.adjoint_matrix.as_ref());
    let max_imag = branch.modes.iter().map(|m| m.mu_imag.abs() / m.mu).fold(0.0, f64::max);
    let residual_ok = branch.modes.iter().all(|m| m.residual <= 1e-8 * (lnorm + m.eta));
    let mut breaches = Vec::new();
    if dev > cfg.tolerances.mu0_rel {
        breaches.push(format!("mu0 deviation {dev:.3e} exceeds {:.3e}", cfg.tolerances.mu0_rel));
    }
    if !branch.monotone {
        breaches.push("mu is not monotone along the sweep".into());
    }
    if max_imag > 1e-8 {
        breaches.push(format!("Im mu / mu = {max_imag:.3e} exceeds 1e-8"));
    }
    if branch.modes.iter().any(|m| !(m.mu > 0.0)) || !(branch.r0 > 0.0) {
        breaches.push("mu or r0 not positive".into());
    }
    if !residual_ok {
        breaches.push("eigen-residual above 1e-8 (|L*| + eta)".into());
    }
    let summary = json!({
        "etas": etas,
        "mu0_extrapolated": branch.mu0.value,
        "mu0_extrapolation": branch.mu0,
        "mu0_theory": law.mu0,
        "theory_method": law.method,
        "relative_deviation": dev,
        "r0": branch.r0,
        "r1": branch.r1,
        "phi_bound": branch.phi_bound,
        "monotone": branch.monotone,
        "max_imag_ratio": max_imag,
    });
    Ok(BranchRun { op, branch, law, summary, breaches })
}

fn report_breaches(out: &mut dyn Write, check: bool, breaches: &[String]) -> Result<i32> {
    for b in breaches {
        writeln!(out, "BREACH {b}")?;
    }
    Ok(if check && !breaches.is_empty() { EXIT_BREACH } else { 0 })
}

fn cmd_branch(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(&args.cfg)?;
    let dir = out_dir(&cfg, args)?;
    let run = run_branch(&cfg)?;
    let csv = dir.join("branch.csv");
    write_branch_csv(&run.branch, &csv)?;
    let mut summary = run.summary;
    summary["csv"] = json!(csv);
    print_json(out, &summary)?;
    report_breaches(out, args.check, &run.breaches)
}

#[derive(Serialize)]
struct NodeRow {
    v: f64,
    re: f64,
    im: f64,
}

fn cmd_mode(args: &ModeArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(&args.run.cfg)?;
    let dir = out_dir(&cfg, &args.run)?;
    let op = assemble(&cfg.model, &cfg.grid)?;
    let mode = solve_mode_with(&op, args.eta, cfg.sweep.sigma, None, &cfg.tolerances.mode_options())?;
    let csv = dir.join("mode.csv");
    let mut w = csv::Writer::from_path(&csv)?;
    for (v, z) in op.grid.nodes.iter().zip(&mode.phi) {
        w.serialize(NodeRow { v: *v, re: z.re, im: z.im })?;
    }
    w.flush()?;
    let lnorm = inf_norm(op.adjoint_matrix.as_ref());
    print_json(
        out,
        &json!({
            "eta": mode.eta,
            "sigma": mode.sigma,
            "mu": mode.mu,
            "mu_imag": mode.mu_imag,
            "second_mu": [mode.second_mu.re, mode.second_mu.im],
            "residual": mode.residual,
            "residual_bound": 1e-8 * (lnorm + mode.eta),
            "norm_phi_minus_1": mode.norm_phi_minus_1,
            "moment_one": [mode.moment_one.re, mode.moment_one.im],
            "iterations": mode.iterations,
            "csv": csv,
        }),
    )?;
    let breach = mode.residual > 1e-8 * (lnorm + mode.eta);
    report_breaches(out, args.run.check, &if breach { vec!["eigen-residual above bound".into()] } else { vec![] })
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(&args.run.cfg)?;
    let dir = out_dir(&cfg, &args.run)?;
    let op = assemble(&cfg.model, &cfg.grid)?;
    let law = theory_law(&cfg, Some(&op))?;
    let kappa_alt = args.kappa.or(cfg.simulate.kappa_override);
    let mut laws = vec![law.clone()];
    if let Some(k) = kappa_alt {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(KinlimError::Config(format!("kappa must be finite and non-negative, got {k}")));
        }
        laws.push(ScalingLaw { kappa: k, ..law.clone() });
    }
    let spec = cfg.simulate.study();
    let results = convergence_study_multi(&op, &laws, &spec)?;
    let main = &results[0];
    let mut files = Vec::new();
    for (k, c) in main.curves.iter().enumerate() {
        let name = format!("errors_eps{k}.csv");
        write_error_csv(c, &dir.join(&name))?;
        files.push(json!({ "eps": c.eps, "file": name }));
    }
    let r0 = MacroField::single_mode(spec.xi0, 1.0);
    let final_macro = evolve_fractional_heat(&r0, law.kappa, law.zeta, spec.t_end)?;
    write_snapshot_csv(&final_macro, &dir.join("macro_final.csv"))?;
    let perturbed = results.get(1).map(|r| {
        json!({
            "kappa": r.report.kappa,
            "errors": r.report.errors,
            "theory_error_not_larger": main.report.errors.iter().zip(&r.report.errors).map(|(a, b)| a <= b).collect::<Vec<_>>(),
        })
    });
    let energy_ok = main.energy.iter().all(|e| e.monotone && e.satisfied);
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "model": cfg.model,
        "grid": cfg.grid,
        "simulate": cfg.simulate,
        "tolerances": cfg.tolerances,
        "law": law,
        "report": main.report,
        "energy": main.energy,
        "perturbed_kappa": perturbed,
        "error_files": files,
        "macro_snapshot": "macro_final.csv",
    });
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    print_json(out, &json!({ "report": main.report, "energy_ok": energy_ok, "perturbed_kappa": manifest["perturbed_kappa"] }))?;
    let mut breaches = Vec::new();
    if !main.report.monotone {
        breaches.push("errors do not decrease strictly in eps".to_string());
    }
    if !(main.report.order > cfg.tolerances.min_order) {
        breaches.push(format!("fitted order {:.3} not above {}", main.report.order, cfg.tolerances.min_order));
    }
    if !energy_ok {
        breaches.push("energy monotonicity or dissipation budget violated".into());
    }
    report_breaches(out, args.run.check, &breaches)
}

fn line(out: &mut dyn Write, ok: bool, name: &str, detail: String) -> Result<bool> {
    writeln!(out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" })?;
    Ok(ok)
}

fn cmd_check(args: &ConfigArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    let run = run_branch(&cfg)?;
    let op = &run.op;
    let mut all = true;
    let d = op.diagnostics(4, 1);
    let scale = d.matrix_norm.max(1.0);
    all &= line(out, d.null_residual <= 1e-8 * scale, "L1 = 0", format!("{:.3e} (tol 1e-8 relative)", d.null_residual / scale))?;
    all &= line(
        out,
        d.adjoint_null_residual <= 1e-8 * scale,
        "L*1 = 0",
        format!("{:.3e} (tol 1e-8 relative)", d.adjoint_null_residual / scale),
    )?;
    let gap = coercivity_gap(op)?;
    all &= line(out, gap > 0.0, "coercivity gap", format!("{gap:.6e} (> 0)"))?;
    if let Some((_, closed)) = kappa_closed_form(&cfg.model)? {
        let (_, generic) = kappa_generic(&cfg.model, Some(op))?;
        let rel = (generic - closed).abs() / closed.abs();
        all &= line(out, rel <= cfg.tolerances.kappa_rel, "kappa generic vs closed form", format!("{rel:.3e} (tol {:.1e})", cfg.tolerances.kappa_rel))?;
    }
    all &= line(out, run.breaches.is_empty(), "branch invariants", if run.breaches.is_empty() { "ok".into() } else { run.breaches.join("; ") })?;
    Ok(if all { 0 } else { EXIT_BREACH })
}

fn cmd_defaults(json_out: bool, out: &mut dyn Write) -> Result<i32> {
    let cfg = ExperimentConfig::default();
    if json_out {
        print_json(out, &cfg)?;
    } else {
        write!(out, "{}", cfg.to_toml()?)?;
    }
    Ok(0)
}

/// Runs a parsed command; returns the process exit code on success.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Exponent(a) => cmd_exponent(a, out),
        Command::Kappa(a) => cmd_kappa(a, out),
        Command::Branch(a) => cmd_branch(a, out),
        Command::Mode(a) => cmd_mode(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Defaults { json } => cmd_defaults(*json, out),
    }
}

/// Applies `KINLIM_THREADS` to the rayon pool and to faer; returns the cap if set.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("KINLIM_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| KinlimError::Config(format!("KINLIM_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| KinlimError::Config(format!("thread pool: {e}")))?;
    faer::set_global_parallelism(if n == 1 { faer::Par::Seq } else { faer::Par::rayon(n) });
    Ok(Some(n))
}

/// Reads a configuration file for external callers.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)
}
