use rkhs_paths_web::{eigenfunctions_json, paths_json, spectrum_json};
use serde_json::Value;

#[test]
fn spectrum_reports_a_decision() {
    let v: Value = serde_json::from_str(&spectrum_json(r#"{"kind":"wiener"}"#, 256).unwrap()).unwrap();
    assert_eq!(v["decision"], "NOT_EXISTS");
    let rho = v["rho"].as_f64().unwrap();
    assert!((rho - 2.0).abs() < 0.1, "rho {rho}");
    assert!(v["eigenvalues"].as_array().unwrap().len() >= 64);
}

#[test]
fn eigenfunctions_are_sampled_on_the_nodes() {
    let v: Value = serde_json::from_str(&eigenfunctions_json(r#"{"kind":"bridge"}"#, 64, 3).unwrap()).unwrap();
    assert_eq!(v["t"].as_array().unwrap().len(), 64);
    let curves = v["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    // First bridge eigenfunction √2 sin(πt) is positive inside the interval.
    assert!(curves[0].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() > 0.0));
}

#[test]
fn paths_are_reproducible() {
    let a = paths_json(r#"{"kind":"fbm","alpha":0.75}"#, 128, 32, 7, 4).unwrap();
    let b = paths_json(r#"{"kind":"fbm","alpha":0.75}"#, 128, 32, 7, 4).unwrap();
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["curves"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_requests_are_errors() {
    assert!(spectrum_json(r#"{"kind":"wiener"}"#, 4096).is_err());
    assert!(spectrum_json(r#"{"kind":"matern","alpha":1.5,"d":2}"#, 64).is_err());
    assert!(paths_json("not json", 64, 8, 0, 1).is_err());
}
