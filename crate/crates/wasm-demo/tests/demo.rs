use purifier_wasm::{fit_trajectory_json, purify_qubit_json, tomography_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn trajectory_matches_exact() {
    let v = parse(fit_trajectory_json(0.5, 0.5, 0.1, 5.0, 11).unwrap());
    assert_eq!(v["t"].as_array().unwrap().len(), 11);
    assert!(v["mean_distance"].as_f64().unwrap() <= 1e-5);
    assert_eq!(v["exact_excited"][0], 1.0);
}

#[test]
fn maximally_mixed_purification() {
    let v = parse(purify_qubit_json(0.5, 0.0, 0.0).unwrap());
    assert!((v["entropy"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    assert!(v["round_trip_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["amplitudes_re"].as_array().unwrap().len(), 4);
}

#[test]
fn non_positive_input_is_rejected() {
    assert!(purify_qubit_json(0.5, 0.6, 0.0).is_err());
    assert!(fit_trajectory_json(0.5, 0.5, 0.1, 5.0, 1).is_err());
    assert!(tomography_json(0.5, 0.5, 0.1, 5.0, 5, 0, 1).is_err());
}

#[test]
fn tomography_is_seeded() {
    let a = tomography_json(0.5, 0.5, 0.1, 5.0, 6, 4000, 3).unwrap();
    let b = tomography_json(0.5, 0.5, 0.1, 5.0, 6, 4000, 3).unwrap();
    assert_eq!(a, b);
    let v = parse(a);
    let mean = v["mean_distance"].as_f64().unwrap();
    assert!(mean > 0.0 && mean < 0.1);
}
