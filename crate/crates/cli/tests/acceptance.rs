//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use twotime::channel::EvolutionProtocol;
use twotime::holevo::{
    analyze, random_instance_with, CqChannelInstance, Ensemble, HolevoReport, StateKind,
};
use twotime::linalg::{
    compressed_exp, max_abs_diff, CMatrix, DensityMatrix, Hermitian, Projector, C64, ONE, ZERO,
};
use twotime::measurement::{naimark_dilate, povm_probabilities, Povm};
use twotime::random::{
    random_density, random_hermitian, random_povm, random_unitary, rng_from_seed, uniform_simplex,
};
use twotime::ttm::{
    jarzynski_scenario, random_protocol, verify_ft, ChannelFamily, FtReport, FtTolerance,
};
use twotime::Tolerances;

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn random_protocol_reports() -> (Vec<FtReport>, f64) {
    let t = tol();
    let mut rng = rng_from_seed(20_001);
    let start = Instant::now();
    let reports = (0..250)
        .map(|i| {
            let d = 2 + i % 5;
            let family = ChannelFamily::ALL[(i / 5) % ChannelFamily::ALL.len()];
            let p = random_protocol(&mut rng, d, family, &t).expect("random protocol");
            verify_ft(&p, FtTolerance::default(), &t).expect("verify_ft")
        })
        .collect();
    (reports, start.elapsed().as_secs_f64())
}

fn criterion_1(reports: &[FtReport], seconds: f64) -> Line {
    let worst = reports
        .iter()
        .map(|r| (r.lhs - r.gamma).abs() / r.gamma.abs().max(1.0))
        .fold(0.0, f64::max);
    Line {
        id: 1,
        name: "fluctuation-theorem identity",
        passed: reports.len() >= 200 && worst <= 1e-9 && seconds < 10.0,
        detail: format!(
            "{} protocols, max relative error {worst:.2e}, {seconds:.2}s",
            reports.len()
        ),
    }
}

fn criterion_2(reports: &[FtReport]) -> Line {
    let worst = reports
        .iter()
        .map(|r| r.mean_delta_a + r.gamma.ln())
        .fold(f64::INFINITY, f64::min);
    Line {
        id: 2,
        name: "Jensen bound",
        passed: worst >= -1e-8,
        detail: format!("min <da> + ln gamma = {worst:.3e}"),
    }
}

fn criterion_3() -> Line {
    let t = tol();
    let z = Hermitian::from_real_diagonal(&[1.0, -1.0]);
    let quench = EvolutionProtocol::new(vec![(z.scale(2.0), 0.0)]).unwrap();
    let (_, q) = jarzynski_scenario(&z, &quench, 1.0, &t).unwrap();
    let ratio = 2.0f64.cosh() / 1.0f64.cosh();
    let quench_err = (q.mean_exp_work - ratio)
        .abs()
        .max((q.partition_ratio - ratio).abs());
    let work_ok = q.mean_work >= q.free_energy_change - 1e-8;

    let mut rng = rng_from_seed(20_003);
    let mut constant_err: f64 = 0.0;
    for d in 2..=6 {
        let h = random_hermitian(&mut rng, d);
        let p = EvolutionProtocol::new(vec![(h.clone(), rng.random_range(0.1..3.0))]).unwrap();
        let (_, r) = jarzynski_scenario(&h, &p, rng.random_range(0.2..2.0), &t).unwrap();
        constant_err = constant_err.max((r.mean_exp_work - 1.0).abs());
    }
    Line {
        id: 3,
        name: "Jarzynski special case",
        passed: quench_err <= 1e-8 && work_ok && constant_err <= 1e-10,
        detail: format!(
            "quench error {quench_err:.2e}, <W> - dF = {:.3e}, constant-H error {constant_err:.2e}",
            q.mean_work - q.free_energy_change
        ),
    }
}

fn random_holevo_reports() -> (Vec<HolevoReport>, f64) {
    let t = tol();
    let kinds = [
        StateKind::Mixed,
        StateKind::RankDeficient,
        StateKind::Pure,
        StateKind::Any,
    ];
    let mut rng = rng_from_seed(20_004);
    let start = Instant::now();
    let reports = (0..240)
        .map(|i| {
            let inst = random_instance_with(
                rng.random_range(1..=3),
                rng.random_range(1..=3),
                rng.random_range(1..=4),
                rng.random(),
                kinds[i % kinds.len()],
            );
            analyze(&inst, &t).expect("analyze")
        })
        .collect();
    (reports, start.elapsed().as_secs_f64())
}

fn criterion_4(reports: &[HolevoReport], seconds: f64) -> Line {
    let min_slack = reports
        .iter()
        .map(|r| r.bound_slack)
        .fold(f64::INFINITY, f64::min);
    let min_nlg = reports
        .iter()
        .map(|r| r.neg_log_gamma)
        .fold(f64::INFINITY, f64::min);
    let max_gamma = reports.iter().map(|r| r.gamma).fold(0.0, f64::max);
    Line {
        id: 4,
        name: "sharpened Holevo bound",
        passed: reports.len() >= 200 && min_slack >= -1e-8 && min_nlg >= -1e-8 && max_gamma <= 1.0 + 1e-9 && seconds < 60.0,
        detail: format!(
            "{} instances, min slack {min_slack:.2e}, min -ln gamma {min_nlg:.2e}, max gamma {max_gamma:.12}, {seconds:.2}s",
            reports.len()
        ),
    }
}

fn criterion_5(reports: &[HolevoReport]) -> Line {
    let worst = reports
        .iter()
        .map(HolevoReport::mean_identity_error)
        .fold(0.0, f64::max);
    Line {
        id: 5,
        name: "mean identity",
        passed: worst <= 1e-8,
        detail: format!("max |tr(rho0 (Af - Ai)) - (chi - I)| = {worst:.2e}"),
    }
}

fn criterion_6(reports: &[HolevoReport]) -> Line {
    let (mut worst_order, mut worst_g2): (f64, f64) = (f64::NEG_INFINITY, 0.0);
    for r in reports {
        worst_order = worst_order
            .max(r.chain.gamma - r.chain.g1)
            .max(r.chain.g1 - r.chain.g2);
        worst_g2 = worst_g2.max((r.chain.g2 - 1.0).abs());
    }
    Line {
        id: 6,
        name: "Golden-Thompson chain",
        passed: worst_order <= 1e-8 && worst_g2 <= 1e-9,
        detail: format!("max order violation {worst_order:.2e}, max |g2 - 1| {worst_g2:.2e}"),
    }
}

/// Orthogonal supports with a POVM that refines them, plus identical-state ensembles.
fn saturating_instances() -> Vec<CqChannelInstance> {
    let t = tol();
    let mut rng = rng_from_seed(20_007);
    let mut out = Vec::new();
    for d in 2..=3 {
        for words in 2..=d {
            let u = random_unitary(&mut rng, d);
            // Word j owns basis columns j, j + words, j + 2 words, ...
            let groups: Vec<Vec<usize>> = (0..words)
                .map(|j| (j..d).step_by(words).collect())
                .collect();
            let states = groups
                .iter()
                .map(|g| {
                    let cols = CMatrix::from_columns(
                        &g.iter()
                            .map(|&c| u.column(c).into_owned())
                            .collect::<Vec<_>>(),
                    );
                    let inner = random_density(&mut rng, g.len(), g.len());
                    DensityMatrix::new(&cols * inner.matrix() * cols.adjoint(), &t).unwrap()
                })
                .collect();
            let povm = Povm::new(
                (0..d)
                    .map(|c| {
                        Hermitian::symmetrized(
                            Projector::from_orthonormal_columns(&u.columns(c, 1).into_owned())
                                .matrix()
                                .clone(),
                        )
                    })
                    .collect(),
                &t,
            )
            .unwrap();
            let e = Ensemble::new(uniform_simplex(&mut rng, words), states).unwrap();
            out.push(CqChannelInstance::new(e, povm).unwrap());
        }
        for rank in 1..=d {
            let rho = random_density(&mut rng, d, rank);
            let words = rng.random_range(1..=3);
            let e = Ensemble::new(uniform_simplex(&mut rng, words), vec![rho; words]).unwrap();
            let outcomes = rng.random_range(1..=4);
            out.push(CqChannelInstance::new(e, random_povm(&mut rng, d, outcomes)).unwrap());
        }
    }
    out
}

fn criterion_7(reports: &[HolevoReport]) -> Line {
    let t = tol();
    let saturating: Vec<HolevoReport> = saturating_instances()
        .iter()
        .map(|i| analyze(i, &t).unwrap())
        .collect();
    let worst_residual = saturating
        .iter()
        .map(|r| r.equality_residual)
        .fold(0.0, f64::max);
    let worst_slack = saturating
        .iter()
        .map(|r| r.bound_slack.abs())
        .fold(0.0, f64::max);
    let strict: Vec<&HolevoReport> = reports.iter().filter(|r| r.bound_slack > 1e-4).collect();
    let min_strict_residual = strict
        .iter()
        .map(|r| r.equality_residual)
        .fold(f64::INFINITY, f64::min);
    Line {
        id: 7,
        name: "equality conditions",
        passed: worst_residual <= 1e-8 && worst_slack <= 1e-8 && !strict.is_empty() && min_strict_residual > 1e-6,
        detail: format!(
            "{} saturating: max residual {worst_residual:.2e}, max |slack| {worst_slack:.2e}; {} strict: min residual {min_strict_residual:.2e}",
            saturating.len(),
            strict.len()
        ),
    }
}

fn criterion_8() -> Line {
    let t = tol();
    let mut rng = rng_from_seed(20_008);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = 1 + i % 4;
        let povm = random_povm(&mut rng, d, 1 + (i / 4) % 5);
        let dil = naimark_dilate(&povm, &t).unwrap();
        for _ in 0..20 {
            let rank = rng.random_range(1..=d);
            let rho = random_density(&mut rng, d, rank);
            let direct = povm_probabilities(&rho, &povm).unwrap();
            let dilated = dil.probabilities(&rho).unwrap();
            for (a, b) in direct.iter().zip(&dilated) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Line {
        id: 8,
        name: "Naimark dilation",
        passed: worst <= 1e-10,
        detail: format!("50 POVMs x 20 states, max |p_direct - p_dilated| {worst:.2e}"),
    }
}

fn random_pairs(count: usize) -> Vec<(Hermitian, Projector)> {
    let mut rng = rng_from_seed(20_009);
    (0..count)
        .map(|i| {
            let d = 2 + i % 5;
            let f = random_hermitian(&mut rng, d);
            let rank = rng.random_range(1..d);
            let u = random_unitary(&mut rng, d);
            (
                f,
                Projector::from_orthonormal_columns(&u.columns(0, rank).into_owned()),
            )
        })
        .collect()
}

/// Largest max-norm gap between `compressed_exp(F, N)` and `exp(F + w N)`.
fn regularization_gap(pairs: &[(Hermitian, Projector)], weight: f64) -> f64 {
    let t = tol();
    pairs
        .iter()
        .map(|(f, n)| {
            let exact = compressed_exp(f, n, &t).unwrap();
            let oracle = (f.matrix() + n.matrix() * C64::new(weight, 0.0)).exp();
            max_abs_diff(exact.matrix(), &oracle)
        })
        .fold(0.0, f64::max)
}

fn criterion_9() -> (Line, String) {
    let pairs = random_pairs(50);
    let eps: f64 = 1e-8;
    let worst = regularization_gap(&pairs, eps.ln());
    let penalty = regularization_gap(&pairs, -1.0 / eps);
    let line = Line {
        id: 9,
        name: "singular exponential vs exp(F + ln(eps) N)",
        passed: worst <= 1e-6,
        detail: format!("50 pairs, eps = 1e-8, max error {worst:.3e}"),
    };
    let note = format!("      note: exp(F - N/eps) at eps = 1e-8 differs by at most {penalty:.3e}");
    (line, note)
}

fn criterion_10() -> Line {
    let t = tol();
    let e = Ensemble::new(
        vec![0.5, 0.5],
        vec![
            DensityMatrix::pure(&[ONE, ZERO]),
            DensityMatrix::pure(&[ONE, ONE]),
        ],
    )
    .unwrap();
    let r = analyze(
        &CqChannelInstance::new(e, Povm::computational(2)).unwrap(),
        &t,
    )
    .unwrap();
    let info = 0.5 * (4.0f64 / 3.0).ln() + 0.25 * (2.0f64 / 3.0).ln() + 0.25 * LN_2;
    let x = (1.0 + FRAC_1_SQRT_2) / 2.0;
    let chi = -x * x.ln() - (1.0 - x) * (1.0 - x).ln();
    let (ei, ec, eg) = (
        (r.mutual_information - info).abs(),
        (r.chi - chi).abs(),
        (r.gamma_trace - r.gamma_distribution).abs(),
    );
    Line {
        id: 10,
        name: "worked example regression",
        passed: ei <= 1e-10 && ec <= 1e-10 && eg <= 1e-8,
        detail: format!(
            "|dI| {ei:.1e}, |dchi| {ec:.1e}, |gamma - enumeration| {eg:.1e} (gamma = {:.12})",
            r.gamma
        ),
    }
}

fn criterion_11() -> Line {
    let dir = std::env::temp_dir().join(format!("twotime-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_twotime"))
            .args([
                "holevo",
                "random",
                "--trials",
                "200",
                "--seed",
                "42",
                "--dim",
                "3",
                "--words",
                "3",
                "--outcomes",
                "4",
            ])
            .arg("--csv")
            .arg(&path)
            .output()
            .unwrap()
            .status;
        (status.code(), std::fs::read(&path).unwrap_or_default())
    };
    let (ca, a) = run("a.csv");
    let (cb, b) = run("b.csv");
    let _ = std::fs::remove_dir_all(&dir);
    Line {
        id: 11,
        name: "CLI determinism",
        passed: !a.is_empty() && a == b && ca == Some(0) && cb == Some(0),
        detail: format!(
            "{} bytes, identical: {}, exit codes {ca:?} {cb:?}",
            a.len(),
            a == b
        ),
    }
}

fn main() -> ExitCode {
    let (ft_reports, ft_seconds) = random_protocol_reports();
    let (holevo_reports, holevo_seconds) = random_holevo_reports();
    let (line9, note9) = criterion_9();
    let lines = vec![
        criterion_1(&ft_reports, ft_seconds),
        criterion_2(&ft_reports),
        criterion_3(),
        criterion_4(&holevo_reports, holevo_seconds),
        criterion_5(&holevo_reports),
        criterion_6(&holevo_reports),
        criterion_7(&holevo_reports),
        criterion_8(),
        line9,
        criterion_10(),
        criterion_11(),
    ];
    println!();
    for l in &lines {
        println!(
            "criterion {:>2} {} {:<44} {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        );
        if l.id == 9 {
            println!("{note9}");
        }
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!(
        "\nacceptance: {} passed, {failed} failed",
        lines.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
