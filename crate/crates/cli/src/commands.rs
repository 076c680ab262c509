use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use twotime::channel::EvolutionProtocol;
use twotime::holevo::{
    analyze, compare_dilations, optimize_measurement, random_instance, CqChannelInstance,
    HolevoReport, OptimizeConfig, BOUND_TOL, GAMMA_TOL, ROUTE_TOL,
};
use twotime::linalg::{CMatrix, Hermitian, ONE, ZERO};
use twotime::random::{derive_seed, random_unitary, rng_from_seed};
use twotime::ttm::{jarzynski_scenario, verify_ft, DeltaDistribution, FtReport, FtTolerance};
use twotime::Tolerances;

use crate::error::CliError;
use crate::report::Report;
use crate::scenario::{self, MatrixJson, ScenarioBody, ScenarioFile};

#[derive(Debug, Parser)]
#[command(
    name = "twotime",
    version,
    about = "Two-time measurement fluctuation theorems and Holevo bounds"
)]
pub struct Cli {
    /// JSON object of tolerance overrides, applied after the scenario's.
    #[arg(long, global = true, value_name = "PATH")]
    pub tol_pack: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print information quantities in bits (files stay in nats).
    #[arg(long, global = true)]
    pub bits: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the fluctuation identity and Jensen bound for a two_time scenario.
    Verify { scenario: PathBuf },
    /// Work statistics of a driven Gibbs state.
    Jarzynski(JarzynskiArgs),
    /// Information bounds for classical-quantum channels.
    #[command(subcommand)]
    Holevo(HolevoCommand),
}

#[derive(Debug, Args)]
pub struct JarzynskiArgs {
    /// jarzynski scenario; without it a driven qubit is used.
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Piecewise-constant steps of the built-in drive; 0 is a sudden quench.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Duration of the built-in drive.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

#[derive(Debug, Subcommand)]
pub enum HolevoCommand {
    /// Sharpened bound, chain, and equality residual for one instance.
    Analyze { scenario: PathBuf },
    /// Batch of random instances as CSV.
    Random(RandomArgs),
    /// Search for a POVM with high mutual information.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub words: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub outcomes: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// CSV destination; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    pub scenario: PathBuf,
    /// Number of POVM outcomes; defaults to max(dimension, words).
    #[arg(long)]
    pub outcomes: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
}

/// Everything a command produces before it is written out.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn tol_pack(cli: &Cli) -> Result<std::collections::BTreeMap<String, f64>, CliError> {
    match &cli.tol_pack {
        None => Ok(Default::default()),
        Some(p) => serde_json::from_slice(&read(p)?)
            .map_err(|e| CliError::Invalid(format!("tolerance pack: {e}"))),
    }
}

struct Loaded {
    bytes: Vec<u8>,
    scenario: ScenarioFile,
    tol: Tolerances,
    seed: Option<u64>,
}

fn load(cli: &Cli, path: &Path, kind: &str) -> Result<Loaded, CliError> {
    let bytes = read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Invalid(format!("scenario is not UTF-8: {e}")))?;
    let scenario = ScenarioFile::parse(text)?;
    if scenario.body.kind() != kind {
        return Err(CliError::Invalid(format!(
            "expected a {kind} scenario, found {}",
            scenario.body.kind()
        )));
    }
    let tol = scenario::resolve_tolerances(&[&scenario.tolerances, &tol_pack(cli)?])?;
    let seed = cli.seed.or(scenario.seed);
    Ok(Loaded {
        bytes,
        scenario,
        tol,
        seed,
    })
}

fn no_scenario_tolerances(cli: &Cli) -> Result<Tolerances, CliError> {
    scenario::resolve_tolerances(&[&tol_pack(cli)?])
}

fn atoms(d: &DeltaDistribution) -> Vec<[f64; 2]> {
    d.atoms.iter().map(|&(v, p)| [v, p]).collect()
}

fn ft_scalars(report: &mut Report, ft: &FtReport) {
    report
        .scalar("lhs", ft.lhs)
        .scalar("gamma", ft.gamma)
        .scalar("mean_delta_a", ft.mean_delta_a)
        .scalar("jensen_slack", ft.jensen_slack)
        .scalar("identity_error", ft.identity_error);
    let identity_bound = ft.tolerance.identity * ft.gamma.abs().max(1.0);
    report
        .check(
            "fluctuation_identity",
            ft.identity_holds,
            ft.identity_error,
            identity_bound,
        )
        .check(
            "jensen",
            ft.jensen_holds,
            ft.jensen_slack,
            ft.tolerance.jensen,
        )
        .check(
            "normalization",
            (ft.distribution.total() - 1.0).abs() <= 1e-10,
            (ft.distribution.total() - 1.0).abs(),
            1e-10,
        );
}

pub fn verify(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    let l = load(cli, path, "two_time")?;
    let ScenarioBody::TwoTime(body) = &l.scenario.body else {
        unreachable!()
    };
    let protocol = scenario::two_time_protocol(body, &l.tol)?;
    let ft = verify_ft(&protocol, FtTolerance::default(), &l.tol)?;
    let mut report = Report::new("verify", &l.bytes, l.seed, l.tol);
    ft_scalars(&mut report, &ft);
    report.atoms = atoms(&ft.distribution);
    Ok(Outcome { report, csv: None })
}

fn sigma_z() -> Hermitian {
    Hermitian::from_real_diagonal(&[1.0, -1.0])
}

fn sigma_x() -> Hermitian {
    Hermitian::symmetrized(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
}

/// `H(t) = σ_z (1 + t/τ) + σ_x sin(π t/τ)` sampled at step midpoints, then a
/// zero-duration step pinning `H(τ) = 2 σ_z`. Zero steps is a sudden quench.
pub fn builtin_drive(steps: usize, tau: f64) -> Result<EvolutionProtocol, CliError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(CliError::Invalid(format!(
            "--tau must be positive, got {tau}"
        )));
    }
    let h = |t: f64| {
        Hermitian::symmetrized(
            sigma_z().scale(1.0 + t / tau).into_matrix()
                + sigma_x().scale((PI * t / tau).sin()).into_matrix(),
        )
    };
    let dt = tau / steps.max(1) as f64;
    let mut seq: Vec<(Hermitian, f64)> =
        (0..steps).map(|k| (h((k as f64 + 0.5) * dt), dt)).collect();
    seq.push((sigma_z().scale(2.0), 0.0));
    Ok(EvolutionProtocol::new(seq)?)
}

pub fn jarzynski(cli: &Cli, args: &JarzynskiArgs) -> Result<Outcome, CliError> {
    let (h0, protocol, beta, bytes, tol, seed) = match &args.scenario {
        Some(path) => {
            let l = load(cli, path, "jarzynski")?;
            let ScenarioBody::Jarzynski(body) = &l.scenario.body else {
                unreachable!()
            };
            let h0 = Hermitian::new(body.hamiltonian.to_matrix("hamiltonian")?, &l.tol)?;
            let protocol = scenario::evolution(&body.protocol, &l.tol)?;
            let beta = args.beta.or(body.beta).unwrap_or(1.0);
            (h0, protocol, beta, l.bytes.clone(), l.tol, l.seed)
        }
        None => {
            let beta = args.beta.unwrap_or(1.0);
            let flags = format!(
                "jarzynski builtin steps={} tau={} beta={beta}",
                args.steps, args.tau
            );
            (
                sigma_z(),
                builtin_drive(args.steps, args.tau)?,
                beta,
                flags.into_bytes(),
                no_scenario_tolerances(cli)?,
                cli.seed,
            )
        }
    };
    let (_, jr) = jarzynski_scenario(&h0, &protocol, beta, &tol)?;
    let mut report = Report::new("jarzynski", &bytes, seed, tol);
    report
        .scalar("beta", jr.beta)
        .scalar("z_initial", jr.z_initial)
        .scalar("z_final", jr.z_final)
        .scalar("partition_ratio", jr.partition_ratio)
        .scalar("mean_exp_work", jr.mean_exp_work)
        .scalar("mean_work", jr.mean_work)
        .scalar("free_energy_change", jr.free_energy_change);
    ft_scalars(&mut report, &jr.ft);
    let jarzynski_tol = 1e-8 * jr.partition_ratio.max(1.0);
    report
        .check(
            "jarzynski_equality",
            jr.jarzynski_error() <= jarzynski_tol,
            jr.jarzynski_error(),
            jarzynski_tol,
        )
        .check(
            "maximum_work",
            jr.max_work_slack() >= -1e-8,
            jr.max_work_slack(),
            1e-8,
        );
    report.atoms = atoms(&jr.work);
    Ok(Outcome { report, csv: None })
}

/// Adds scalars and assertions shared by `analyze` and `optimize`.
fn holevo_scalars(report: &mut Report, r: &HolevoReport) {
    let route_error = (r.gamma_distribution - r.gamma_trace).abs();
    report
        .info("mutual_information", r.mutual_information)
        .info("chi", r.chi)
        .info("shannon", r.shannon)
        .scalar("gamma", r.gamma)
        .scalar("gamma_distribution", r.gamma_distribution)
        .scalar("gamma_trace", r.gamma_trace)
        .info("neg_log_gamma", r.neg_log_gamma)
        .info("mean_delta_a", r.mean_delta_a)
        .info("mean_trace", r.mean_trace)
        .scalar("g1", r.chain.g1)
        .scalar("g2", r.chain.g2)
        .scalar("equality_residual", r.equality_residual)
        .info("bound_slack", r.bound_slack)
        .scalar("infinite_mass", r.infinite_mass);
    report
        .check(
            "sharpened_bound",
            r.checks.sharpened_bound,
            r.bound_slack,
            BOUND_TOL,
        )
        .check(
            "efficacy_bound",
            r.checks.efficacy_bound,
            r.gamma,
            GAMMA_TOL,
        )
        .check(
            "route_agreement",
            route_error <= ROUTE_TOL,
            route_error,
            ROUTE_TOL,
        )
        .check(
            "gt_chain",
            r.checks.chain,
            (r.chain.g2 - 1.0).abs(),
            GAMMA_TOL,
        )
        .check(
            "mean_identity",
            r.checks.mean_identity,
            r.mean_identity_error(),
            BOUND_TOL,
        )
        .check(
            "classical_bounds",
            r.checks.classical_bounds,
            r.shannon - r.mutual_information,
            GAMMA_TOL,
        );
}

fn dilation_difference(
    inst: &CqChannelInstance,
    seed: u64,
    tol: &Tolerances,
) -> Result<Option<f64>, CliError> {
    let (d, k) = (inst.ensemble.dim(), inst.povm.outcomes());
    if k < 2 {
        return Ok(None);
    }
    let w = random_unitary(&mut rng_from_seed(seed), d * (k - 1));
    Ok(Some(compare_dilations(inst, &w, tol)?.difference()))
}

pub fn holevo_analyze(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    let l = load(cli, path, "holevo")?;
    let ScenarioBody::Holevo(body) = &l.scenario.body else {
        unreachable!()
    };
    let inst = scenario::cq_instance(body, &l.tol)?;
    let r = analyze(&inst, &l.tol)?;
    let mut report = Report::new("holevo analyze", &l.bytes, l.seed, l.tol);
    holevo_scalars(&mut report, &r);
    if let Some(diff) = dilation_difference(&inst, l.seed.unwrap_or(0), &l.tol)? {
        report.scalar("dilation_gamma_difference", diff);
    }
    report.details = serde_json::json!({ "conditional_probabilities": r.conditional });
    Ok(Outcome { report, csv: None })
}

pub const CSV_VERSION_LINE: &str = "# twotime holevo-random csv v1";
pub const CSV_COLUMNS: &[&str] = &[
    "trial",
    "seed",
    "d",
    "J",
    "K",
    "I",
    "chi",
    "gamma",
    "neg_log_gamma",
    "bound_slack",
    "g1",
    "g2",
    "mean_identity_error",
    "route_error",
    "equality_residual",
    "bound_ok",
    "chain_ok",
    "mean_ok",
    "route_ok",
    "passed",
];

struct Trial {
    index: u64,
    seed: u64,
    result: Result<HolevoReport, String>,
}

impl Trial {
    fn passed(&self) -> bool {
        self.result
            .as_ref()
            .is_ok_and(|r| r.passed() && Self::route_error(r) <= ROUTE_TOL)
    }

    fn route_error(r: &HolevoReport) -> f64 {
        (r.gamma_distribution - r.gamma_trace).abs()
    }
}

pub fn holevo_random(cli: &Cli, args: &RandomArgs) -> Result<Outcome, CliError> {
    let tol = no_scenario_tolerances(cli)?;
    let base = cli.seed.unwrap_or(0);
    let (d, words, outcomes) = (
        args.dim as usize,
        args.words as usize,
        args.outcomes as usize,
    );
    let trials: Vec<Trial> = (0..args.trials)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(base, index);
            let inst = random_instance(d, words, outcomes, seed);
            let result = analyze(&inst, &tol).map_err(|e| e.to_string());
            Trial {
                index,
                seed,
                result,
            }
        })
        .collect();

    let mut csv = format!("{CSV_VERSION_LINE}\n{}\n", CSV_COLUMNS.join(","));
    let flag = |b: bool| if b { 1 } else { 0 };
    let mut report = Report::new(
        "holevo random",
        format!(
            "holevo random dim={d} words={words} outcomes={outcomes} trials={} seed={base}",
            args.trials
        )
        .as_bytes(),
        Some(base),
        tol,
    );
    let mut passed = 0u64;
    let (mut min_slack, mut max_mean_err, mut max_route) = (f64::INFINITY, 0.0f64, 0.0f64);
    for t in &trials {
        let _ = write!(csv, "{},{},{d},{words},{outcomes}", t.index, t.seed);
        match &t.result {
            Ok(r) => {
                let route = Trial::route_error(r);
                for v in [
                    r.mutual_information,
                    r.chi,
                    r.gamma,
                    r.neg_log_gamma,
                    r.bound_slack,
                    r.chain.g1,
                    r.chain.g2,
                    r.mean_identity_error(),
                    route,
                    r.equality_residual,
                ] {
                    let _ = write!(csv, ",{v:.17e}");
                }
                let _ = write!(
                    csv,
                    ",{},{},{},{}",
                    flag(r.checks.sharpened_bound && r.checks.efficacy_bound),
                    flag(r.checks.chain),
                    flag(r.checks.mean_identity),
                    flag(route <= ROUTE_TOL)
                );
                min_slack = min_slack.min(r.bound_slack);
                max_mean_err = max_mean_err.max(r.mean_identity_error());
                max_route = max_route.max(route);
            }
            Err(e) => {
                eprintln!("trial {}: {e}", t.index);
                csv.push_str(&",NaN".repeat(10));
                csv.push_str(",0,0,0,0");
            }
        }
        let ok = t.passed();
        passed += ok as u64;
        let _ = writeln!(csv, ",{}", flag(ok));
    }

    report
        .scalar("trials", args.trials as f64)
        .scalar("passed_trials", passed as f64)
        .scalar("min_bound_slack", min_slack)
        .scalar("max_mean_identity_error", max_mean_err)
        .scalar("max_route_error", max_route);
    report.check(
        "all_trials_pass",
        passed == args.trials,
        (args.trials - passed) as f64,
        0.0,
    );
    Ok(Outcome {
        report,
        csv: Some(csv),
    })
}

pub fn holevo_optimize(cli: &Cli, args: &OptimizeArgs) -> Result<Outcome, CliError> {
    let l = load(cli, &args.scenario, "holevo")?;
    let ScenarioBody::Holevo(body) = &l.scenario.body else {
        unreachable!()
    };
    let ensemble = scenario::ensemble(body, &l.tol)?;
    let outcomes = args
        .outcomes
        .unwrap_or(ensemble.dim().max(ensemble.words()));
    let config = OptimizeConfig {
        restarts: args.restarts,
        iterations: args.iters,
        seed: l.seed.unwrap_or(0),
        ..OptimizeConfig::default()
    };
    let result = optimize_measurement(&ensemble, outcomes, &config, &l.tol)?;
    let inst = CqChannelInstance::new(ensemble, result.povm.clone())?;
    let r = analyze(&inst, &l.tol)?;

    let mut report = Report::new("holevo optimize", &l.bytes, Some(config.seed), l.tol);
    holevo_scalars(&mut report, &r);
    report
        .info("achieved_information", result.mutual_information)
        .info("best_initial", result.best_initial)
        .scalar("evaluations", result.evaluations as f64);
    let gain = result.mutual_information - result.best_initial;
    report
        .check("no_worse_than_start", gain >= -1e-12, gain, 1e-12)
        .check(
            "below_chi",
            result.mutual_information <= r.chi + GAMMA_TOL,
            r.chi - result.mutual_information,
            GAMMA_TOL,
        );
    let povm: Vec<MatrixJson> = result
        .povm
        .elements()
        .iter()
        .map(|m| MatrixJson::from_matrix(m.matrix()))
        .collect();
    report.details = serde_json::json!({
        "povm": povm,
        "per_restart": result.per_restart,
        "config": { "outcomes": outcomes, "restarts": config.restarts, "iterations": config.iterations },
    });
    Ok(Outcome { report, csv: None })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Verify { scenario } => verify(cli, scenario),
        Command::Jarzynski(args) => jarzynski(cli, args),
        Command::Holevo(HolevoCommand::Analyze { scenario }) => holevo_analyze(cli, scenario),
        Command::Holevo(HolevoCommand::Random(args)) => holevo_random(cli, args),
        Command::Holevo(HolevoCommand::Optimize(args)) => holevo_optimize(cli, args),
    }
}
