use std::f64::consts::PI;

use rkhs_paths::analysis::default_window;
use rkhs_paths::kernels::*;
use rkhs_paths::quadrature::{circle_uniform, gauss_legendre, Domain};
use rkhs_paths::spectral::*;
use rkhs_paths::Error;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn wiener_leading_eigenvalue() {
    let rule = gauss_legendre(512, 0.0, 1.0).unwrap();
    let d = nystrom_decompose(&make_wiener(), &rule).unwrap();
    assert_eq!(d.method(), Method::Nystrom);
    let want = 4.0 / (PI * PI);
    assert!(rel(d.eigenvalues()[0], want) < 1e-4, "{}", d.eigenvalues()[0]);
}

#[test]
fn bridge_spectrum_matches_closed_form() {
    let rule = gauss_legendre(1024, 0.0, 1.0).unwrap();
    let d = nystrom_decompose(&make_brownian_bridge(), &rule).unwrap();
    for i in 1..=20 {
        let want = 1.0 / (PI * i as f64).powi(2);
        assert!(rel(d.eigenvalues()[i - 1], want) < 1e-3, "i = {i}");
    }
}

#[test]
fn ou_matches_its_transcendental_roots() {
    // The kink on the diagonal limits Gauss-Legendre to algebraic
    // convergence, so the error must also shrink when the grid doubles.
    let coarse = gauss_legendre(512, 0.0, 1.0).unwrap();
    let fine = gauss_legendre(1024, 0.0, 1.0).unwrap();
    for variant in [1, 2] {
        let k = make_ou(variant, 1.0, 2.0).unwrap();
        let known = k.known_spectrum().unwrap().head(16);
        let dc = nystrom_decompose(&k, &coarse).unwrap();
        let df = nystrom_decompose(&k, &fine).unwrap();
        for (i, &want) in known.iter().enumerate() {
            let (ec, ef) = (rel(dc.eigenvalues()[i], want), rel(df.eigenvalues()[i], want));
            assert!(ef < 1e-3, "variant {variant}, i = {}: {ef}", i + 1);
            assert!(ef < 0.5 * ec, "variant {variant}, i = {}: {ec} -> {ef}", i + 1);
        }
    }
}

#[test]
fn wiener_eigenfunction_extension() {
    // e_1(t) = √2 sin(πt/2).
    let rule = gauss_legendre(256, 0.0, 1.0).unwrap();
    let d = nystrom_decompose(&make_wiener(), &rule).unwrap();
    assert!((nystrom_extend(&d, 1, &[1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-3);
    assert!(nystrom_extend(&d, 1, &[0.0]).unwrap().abs() < 1e-3);
    let t = 0.37;
    let all = d.extend_all(&[t], 3).unwrap();
    assert!((all[0] - 2f64.sqrt() * (PI * t / 2.0).sin()).abs() < 1e-3);
    for (i, v) in all.iter().enumerate() {
        assert_eq!(*v, nystrom_extend(&d, i + 1, &[t]).unwrap());
    }
}

#[test]
fn constant_kernel_has_one_flat_eigenfunction() {
    let k = make_constant(2.0, Domain::unit_interval()).unwrap();
    let rule = gauss_legendre(64, 0.0, 1.0).unwrap();
    let d = nystrom_decompose(&k, &rule).unwrap();
    assert!(rel(d.eigenvalues()[0], 2.0) < 1e-12);
    assert_eq!(d.floor_index(), 1);
    for v in d.node_values(1).unwrap() {
        assert!((v - 1.0).abs() < 1e-10);
    }
    assert!((nystrom_extend(&d, 1, &[0.123]).unwrap() - 1.0).abs() < 1e-10);
    assert!(matches!(
        nystrom_extend(&d, 2, &[0.5]),
        Err(Error::DegenerateEigenvalue { index: 2, floor_index: 1 })
    ));
}

#[test]
fn trace_orthonormality_and_residuals() {
    let rule = gauss_legendre(256, 0.0, 1.0).unwrap();
    let kernels = [
        make_wiener(),
        make_brownian_bridge(),
        make_matern(1.5, 1.0, Domain::unit_interval(), true).unwrap(),
        make_fbm(0.3).unwrap(),
    ];
    for k in &kernels {
        let d = nystrom_decompose(k, &rule).unwrap();
        assert!(d.trace_defect().unwrap() < 1e-10, "{}", k.label());
        assert!(d.orthonormality_defect(d.floor_index().min(64)) < 1e-10, "{}", k.label());
        assert!(d.max_residual(32).unwrap() < 1e-10, "{}", k.label());
        assert!(d.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn full_rank_power_kernel_rebuilds_the_gram_matrix() {
    let rule = gauss_legendre(128, 0.0, 1.0).unwrap();
    for k in [make_wiener(), make_matern(1.5, 1.0, Domain::unit_interval(), true).unwrap()] {
        let d = nystrom_decompose(&k, &rule).unwrap();
        let pk = power_kernel(&d, 1.0, d.floor_index()).unwrap();
        let rebuilt = pk.node_gram();
        let gram = k.gram(&rule).unwrap();
        let mut worst = 0.0f64;
        for a in 0..rule.len() {
            for b in 0..rule.len() {
                worst = worst.max((rebuilt[(a, b)] - gram[(a, b)]).abs());
            }
        }
        assert!(worst < 1e-8, "{}: {worst}", k.label());
    }
}

#[test]
fn nystrom_is_consistent_under_refinement() {
    let k = make_matern(1.5, 1.0, Domain::unit_interval(), true).unwrap();
    let coarse = nystrom_decompose(&k, &gauss_legendre(256, 0.0, 1.0).unwrap()).unwrap();
    let fine = nystrom_decompose(&k, &gauss_legendre(512, 0.0, 1.0).unwrap()).unwrap();
    let (lo, hi) = default_window(coarse.len(), coarse.floor_index());
    for i in lo..=hi {
        let (a, b) = (coarse.eigenvalues()[i - 1], fine.eigenvalues()[i - 1]);
        assert!(rel(a, b) <= 0.05, "i = {i}: {a} vs {b}");
    }
}

#[test]
fn fft_agrees_with_nystrom_on_the_circle() {
    let k = make_circle_power(1.0, 3.0, 1 << 12).unwrap();
    let n = 128;
    let f = fft_spectrum(&k, n).unwrap();
    let d = nystrom_decompose(&k, &circle_uniform(n).unwrap()).unwrap();
    assert_eq!(f.method(), Method::Fft);
    let top = f.eigenvalues()[0];
    for (a, b) in f.eigenvalues().iter().zip(d.eigenvalues()) {
        if *a >= 1e-10 * top {
            assert!(rel(*b, *a) < 1e-6, "{a} vs {b}");
        }
    }
    assert!(f.orthonormality_defect(n) < 1e-10);
    assert!(f.trace_defect().unwrap() < 1e-10);
}

#[test]
fn fft_rejects_bad_inputs() {
    let k = make_circle_kernel(&[1.0, 0.5]).unwrap();
    assert!(matches!(fft_spectrum(&k, 100), Err(Error::Usage(_))));
    assert!(matches!(fft_spectrum(&make_wiener(), 64), Err(Error::Usage(_))));
}

#[test]
fn fft_matches_a_direct_transform() {
    let x: Vec<f64> = (0..16).map(|j| ((j * j) % 7) as f64 - 2.5).collect();
    let mut re = x.clone();
    let mut im = vec![0.0; 16];
    fft_in_place(&mut re, &mut im);
    for m in 0..16 {
        let (mut r, mut i) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            let t = -2.0 * PI * (j * m) as f64 / 16.0;
            r += v * t.cos();
            i += v * t.sin();
        }
        assert!((re[m] - r).abs() < 1e-12 && (im[m] - i).abs() < 1e-12);
    }
}

#[test]
fn spectrum_csv_is_one_based_with_seventeen_digits() {
    let rule = gauss_legendre(32, 0.0, 1.0).unwrap();
    let d = nystrom_decompose(&make_wiener(), &rule).unwrap();
    let csv = d.spectrum_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("i,mu,sqrt_mu"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    let mu: f64 = first[1].parse().unwrap();
    assert_eq!(mu, d.eigenvalues()[0]);
    assert_eq!(csv.lines().count(), d.floor_index() + 1);
}

#[test]
fn dyadic_sums_follow_powers_of_two() {
    let mu = [4.0, 1.0, 1.0, 0.25, 0.25];
    let s = dyadic_power_sums(&mu, 0.5);
    assert_eq!(s, vec![(1, 2.0), (2, 3.0), (4, 4.5), (5, 5.0)]);
}
