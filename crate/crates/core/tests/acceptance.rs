//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs without the libtest harness so the lines are
//! always visible.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use purifier::experiment::{replay_schedule, run_experiment, ExperimentConfig, ExperimentResult};
use purifier::lindblad::{apply_kraus, stinespring_apply, Propagator};
use purifier::linalg::Subsystem;
use purifier::models::{tls_kraus, tls_lindblad, TlsParams};
use purifier::purification::{contract, optimize_purification, schmidt_purify, PurificationOptions, PurifiedState};
use purifier::random::{random_density, random_hermitian, random_kraus, random_state};
use purifier::report::{write_experiment, write_tomography};
use purifier::shots::distance_stats;
use purifier::state::DensityMatrix;
use purifier::unitary::{fit_objective, params_from_hermitian, HermitianParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Full-size runs shared between criteria.
struct Runs {
    tls: ExperimentResult,
    tfim: ExperimentResult,
    tfim_seconds: f64,
}

fn criterion_1(runs: &Runs) -> Outcome {
    let s = runs.tls.summary();
    outcome(
        s.mean_distance <= 1e-5 && s.n_points == 50,
        format!("TLS mean distance {:e} (max {:e}) over {} points, limit 1e-5", s.mean_distance, s.max_distance, s.n_points),
    )
}

fn criterion_2(runs: &Runs) -> Outcome {
    let s = runs.tfim.summary();
    let params = runs.tfim.points[0].fit.generator.values().len();
    outcome(
        s.mean_distance <= 1e-5 && runs.tfim_seconds <= 300.0 && params == 256,
        format!(
            "TFIM mean distance {:e} (max {:e}), {params} parameters per fit, {:.2} s, limits 1e-5 and 300 s",
            s.mean_distance, s.max_distance, runs.tfim_seconds
        ),
    )
}

fn criterion_3(runs: &Runs) -> Outcome {
    let cfg = ExperimentConfig {
        shots: Some(32000),
        seed: 7,
        ..ExperimentConfig::tls()
    };
    match replay_schedule(&cfg, &runs.tls.schedule().unwrap()) {
        Ok(outcomes) => {
            let (mean, std) = distance_stats(&outcomes);
            outcome(
                mean <= 0.02 && mean > 0.0,
                format!("32000 shots: distance {mean:.5} +/- {std:.5} (limit 0.02, must be > 0)"),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_4() -> Outcome {
    let p = TlsParams {
        delta: 0.0,
        omega: 0.0,
        gamma: 0.1,
    };
    let prop = Propagator::new(&tls_lindblad(&p).unwrap()).unwrap();
    let rho0 = DensityMatrix::basis(2, 1);
    let (mut kraus_gap, mut analytic_gap) = (0.0f64, 0.0f64);
    for t in ExperimentConfig::tls().grid() {
        let lind = prop.propagate(&rho0, t).unwrap().rho;
        let kraus = apply_kraus(&tls_kraus(&p, t).unwrap(), &rho0).unwrap();
        let decay = (-p.gamma * t).exp();
        kraus_gap = kraus_gap.max(lind.matrix().max_abs_diff(kraus.matrix()));
        for rho in [&lind, &kraus] {
            analytic_gap = analytic_gap.max((rho.matrix()[(1, 1)].re - decay).abs());
        }
    }
    outcome(
        kraus_gap <= 1e-10 && analytic_gap <= 1e-10,
        format!("max |Lindblad - Kraus| {kraus_gap:e}, max |rho11 - exp(-gamma t)| {analytic_gap:e}, limit 1e-10"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst = 0.0f64;
    let mut dims_ok = true;
    let p = TlsParams {
        delta: 0.0,
        omega: 0.0,
        gamma: 0.1,
    };
    let mut cases: Vec<(purifier::state::KrausSet, DensityMatrix)> = [0.5, 3.0, 10.0]
        .iter()
        .map(|&t| (tls_kraus(&p, t).unwrap(), DensityMatrix::basis(2, 1)))
        .collect();
    for _ in 0..20 {
        let k = rng.gen_range(1..=4);
        cases.push((random_kraus(&mut rng, 2, k), random_density(&mut rng, 2)));
    }
    let mut larger = 0;
    for (kraus, rho) in &cases {
        let dil = stinespring_apply(kraus, rho).unwrap();
        let direct = apply_kraus(kraus, rho).unwrap();
        worst = worst.max(dil.rho.matrix().max_abs_diff(direct.matrix()));
        let d = rho.dim();
        dims_ok &= dil.bath_dim == kraus.len() && ((dil.bath_dim > d) == (kraus.len() > d));
        larger += usize::from(dil.bath_dim > d);
    }
    outcome(
        worst <= 1e-10 && dims_ok,
        format!(
            "{} channels, max |dilation - Kraus| {worst:e} (limit 1e-10); bath exceeds d = 2 in {larger} cases, all with K > 2",
            cases.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (mut round_trip, mut objective) = (0.0f64, 0.0f64);
    let mut failures = 0;
    for d in [2, 4] {
        for i in 0..100u64 {
            let rho = random_density(&mut rng, d);
            let psi = schmidt_purify(&rho).unwrap();
            round_trip = round_trip.max(contract(&psi, Subsystem::Bath).unwrap().matrix().max_abs_diff(rho.matrix()));
            let opts = PurificationOptions {
                seed: i,
                ..PurificationOptions::default()
            };
            match optimize_purification(&rho, None, &opts) {
                Ok(r) => objective = objective.max(r.objective_value),
                Err(_) => failures += 1,
            }
        }
    }
    outcome(
        round_trip <= 1e-12 && objective <= 1e-8 && failures == 0,
        format!(
            "200 states (d = 2, 4): max round-trip error {round_trip:e} (limit 1e-12), max optimized objective {objective:e} (limit 1e-8), {failures} failures"
        ),
    )
}

fn criterion_7(runs: &Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_rel = 0.0f64;
    for i in 0..20 {
        let dim = if i < 10 { 4 } else { 16 };
        let psi0 = PurifiedState::new(random_state(&mut rng, dim)).unwrap();
        let target = PurifiedState::new(random_state(&mut rng, dim)).unwrap();
        let p = params_from_hermitian(&random_hermitian(&mut rng, dim)).unwrap();
        let (_, g) = fit_objective(&p, &psi0, &target).unwrap();
        let h = 1e-6;
        for (k, gk) in g.iter().enumerate() {
            let eval = |delta: f64| {
                let mut v = p.values().to_vec();
                v[k] += delta;
                fit_objective(&HermitianParams::new(dim, v).unwrap(), &psi0, &target).unwrap().0
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            worst_rel = worst_rel.max((fd - gk).abs() / fd.abs().max(1e-3));
        }
    }

    let mut unitarity = 0.0f64;
    let mut bad_states = 0;
    for res in [&runs.tls, &runs.tfim] {
        for p in &res.points {
            unitarity = unitarity.max(p.fit.unitary.unitarity_error());
            for rho in [&p.exact, &p.reconstructed] {
                bad_states += usize::from(DensityMatrix::new(rho.matrix().clone()).is_err());
            }
        }
    }
    let cfg = ExperimentConfig {
        shots: Some(100),
        ..ExperimentConfig::tls()
    };
    for o in replay_schedule(&cfg, &runs.tls.schedule().unwrap()).unwrap() {
        bad_states += usize::from(DensityMatrix::new(o.reconstructed_rho.matrix().clone()).is_err());
    }
    outcome(
        worst_rel <= 1e-5 && unitarity <= 1e-10 && bad_states == 0,
        format!(
            "gradient max relative error {worst_rel:e} (limit 1e-5, denominator max(|fd|, 1e-3)); max ||U^dag U - I|| {unitarity:e} (limit 1e-10); {bad_states} invalid density matrices"
        ),
    )
}

fn write_all(cfg: &ExperimentConfig, dir: &Path) {
    let res = run_experiment(cfg, 1).unwrap();
    write_experiment(&res, dir).unwrap();
    let outcomes = replay_schedule(cfg, &res.schedule().unwrap()).unwrap();
    write_tomography(cfg, &outcomes, dir).unwrap();
}

fn criterion_8() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        shots: Some(32000),
        seed: 7,
        output_dir: "results".into(),
        ..ExperimentConfig::tls()
    };
    write_all(&cfg, a.path());
    write_all(&cfg, b.path());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|n| fs::read(a.path().join(n)).ok() != fs::read(b.path().join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    outcome(
        differing.is_empty() && names.len() == 7,
        format!("{} files compared, differing: {differing:?}", names.len()),
    )
}

fn main() -> ExitCode {
    let tls = run_experiment(&ExperimentConfig::tls(), 1).expect("TLS run");
    let start = Instant::now();
    let tfim = run_experiment(&ExperimentConfig::tfim(), 1).expect("TFIM run");
    let runs = Runs {
        tls,
        tfim,
        tfim_seconds: start.elapsed().as_secs_f64(),
    };

    let results = [
        ("TLS reproduction", criterion_1(&runs)),
        ("TFIM reproduction", criterion_2(&runs)),
        ("tomography replay", criterion_3(&runs)),
        ("Kraus-Lindblad oracle", criterion_4()),
        ("Stinespring cross-check", criterion_5()),
        ("purification properties", criterion_6()),
        ("numerical hygiene", criterion_7(&runs)),
        ("reproducibility", criterion_8()),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {} {name}: {} - {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        all &= o.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
