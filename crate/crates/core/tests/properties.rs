use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use purifier::lindblad::{apply_kraus, propagate, stinespring_apply, Propagator};
use purifier::linalg::Subsystem;
use purifier::models::{all_excited, tfim_lindblad, tls_kraus, tls_lindblad, TfimParams, TlsParams};
use purifier::purification::{contract, schmidt_purify, PurifiedState};
use purifier::random::{random_density, random_hermitian, random_kraus, random_state};
use purifier::shots::{measure_system_qubit, reconstruct_qubit, Basis, ShotConfig};
use purifier::state::DensityMatrix;
use purifier::unitary::{hermitian_from_params, params_from_hermitian};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn shot_noise_scales_as_inverse_sqrt() {
    let psi = PurifiedState::new(random_state(&mut rng(1), 4)).unwrap();
    let exact = contract(&psi, Subsystem::Bath).unwrap();
    let mean_distance = |shots: u64| {
        (0..100u64)
            .map(|seed| {
                let cfg = ShotConfig::new(shots, seed).unwrap();
                let [z, x, y] = [Basis::Z, Basis::X, Basis::Y].map(|b| measure_system_qubit(&psi, b, &cfg).unwrap());
                reconstruct_qubit(&z, &x, &y).unwrap().rho.distance(&exact)
            })
            .sum::<f64>()
            / 100.0
    };
    let ratio = mean_distance(2000) / mean_distance(8000);
    assert!((1.6..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn tfim_semigroup() {
    let spec = tfim_lindblad(&TfimParams {
        sites: 2,
        coupling_j: 1.0,
        field_h: 1.0,
        gamma: 0.1,
    })
    .unwrap();
    let prop = Propagator::new(&spec).unwrap();
    let rho0 = all_excited(2);
    let mid = prop.propagate(&rho0, 1.3).unwrap().rho;
    let chained = prop.propagate(&mid, 2.1).unwrap().rho;
    let direct = prop.propagate(&rho0, 3.4).unwrap().rho;
    assert!(chained.matrix().max_abs_diff(direct.matrix()) < 1e-12);
}

#[test]
fn dilation_bath_grows_only_past_d() {
    let mut r = rng(9);
    for k in 1..=6 {
        let kraus = random_kraus(&mut r, 3, k);
        let rho = random_density(&mut r, 3);
        let out = stinespring_apply(&kraus, &rho).unwrap();
        assert_eq!(out.bath_dim, k);
        assert!(out.unitary.unitarity_error() < 1e-10);
        assert!(out.rho.matrix().max_abs_diff(apply_kraus(&kraus, &rho).unwrap().matrix()) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn purification_round_trip(seed in any::<u64>(), d in 1usize..5) {
        let rho = random_density(&mut rng(seed), d);
        let psi = schmidt_purify(&rho).unwrap();
        prop_assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-12);
        let back = contract(&psi, Subsystem::Bath).unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        let other = contract(&psi, Subsystem::System).unwrap();
        // Symmetric coefficient matrix: both contractions give rho.
        prop_assert!(other.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn hermitian_params_round_trip(seed in any::<u64>(), n in 1usize..7) {
        let h = random_hermitian(&mut rng(seed), n);
        let back = hermitian_from_params(&params_from_hermitian(&h).unwrap());
        prop_assert_eq!(back, h);
    }

    #[test]
    fn propagation_keeps_density_invariants(
        delta in -2.0f64..2.0,
        omega in -2.0f64..2.0,
        gamma in 0.0f64..1.0,
        t in 0.0f64..20.0,
        seed in any::<u64>(),
    ) {
        let spec = tls_lindblad(&TlsParams { delta, omega, gamma }).unwrap();
        let rho0 = random_density(&mut rng(seed), 2);
        let rho = propagate(&spec, &rho0, t).unwrap();
        prop_assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn undriven_decay_matches_kraus(gamma in 0.0f64..2.0, t in 0.0f64..30.0, seed in any::<u64>()) {
        let p = TlsParams { delta: 0.0, omega: 0.0, gamma };
        let rho0 = random_density(&mut rng(seed), 2);
        let lind = propagate(&tls_lindblad(&p).unwrap(), &rho0, t).unwrap();
        let kraus = apply_kraus(&tls_kraus(&p, t).unwrap(), &rho0).unwrap();
        prop_assert!(lind.matrix().max_abs_diff(kraus.matrix()) < 1e-10);
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), shots in 1u64..5000) {
        let psi = PurifiedState::new(random_state(&mut rng(seed), 4)).unwrap();
        let cfg = ShotConfig::new(shots, seed).unwrap();
        for b in Basis::ALL {
            let a = measure_system_qubit(&psi, b, &cfg).unwrap();
            prop_assert_eq!(a, measure_system_qubit(&psi, b, &cfg).unwrap());
            prop_assert_eq!(a.total(), shots);
        }
    }
}
