use std::f64::consts::{LN_2, PI};

use rkhs_paths::kernels::{make_matern, make_wiener};
use rkhs_paths::quadrature::{gauss_legendre, Domain};
use rkhs_paths::sampling::*;
use rkhs_paths::spectral::{nystrom_decompose, SpectralDecomposition};
use rkhs_paths::Error;

fn wiener(n: usize) -> SpectralDecomposition {
    nystrom_decompose(&make_wiener(), &gauss_legendre(n, 0.0, 1.0).unwrap()).unwrap()
}

/// Deterministic scrambled node pairs.
fn node_pairs(n: usize, count: usize) -> Vec<(usize, usize)> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % n as u64) as usize
    };
    (0..count).map(|_| (next(), next())).collect()
}

#[test]
fn empirical_covariance_matches_min() {
    let d = wiener(1024);
    let n_terms = 256;
    let m = 10_000;
    let samples = kl_sample(&d, n_terms, 42, m).unwrap();
    let pairs = node_pairs(d.rule().len(), 100);
    let mut hits = 0;
    for &(a, b) in &pairs {
        let (s, t) = (d.rule().node(a)[0], d.rule().node(b)[0]);
        let prods: Vec<f64> = samples
            .iter()
            .map(|x| x.value_at_node(&d, a) * x.value_at_node(&d, b))
            .collect();
        let mean = prods.iter().sum::<f64>() / m as f64;
        let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let se = (var / m as f64).sqrt();
        if (mean - s.min(t)).abs() <= 3.0 * se {
            hits += 1;
        }
    }
    assert!(hits >= 99, "{hits} of 100 pairs inside 3 standard errors");
}

#[test]
fn first_coefficient_is_standard_normal() {
    let d = wiener(64);
    let xs: Vec<f64> = kl_sample(&d, 4, 3, 10_000)
        .unwrap()
        .iter()
        .map(|s| s.coefficients[0])
        .collect();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    assert!(m.abs() <= 0.04, "{m}");
    assert!((0.94..=1.06).contains(&v), "{v}");
}

#[test]
fn sampling_is_deterministic_per_index() {
    let d = wiener(128);
    let a = kl_sample(&d, 32, 9, 5).unwrap();
    assert_eq!(a, kl_sample(&d, 32, 9, 5).unwrap());
    // Sample i depends only on (seed, i), not on how many were drawn.
    assert_eq!(a[..3], kl_sample(&d, 32, 9, 3).unwrap()[..]);
    assert_ne!(a, kl_sample(&d, 32, 10, 5).unwrap());
    assert_eq!(a[0].path_csv(&d).unwrap(), a[0].path_csv(&d).unwrap());
}

#[test]
fn node_values_agree_with_the_extension() {
    let d = wiener(128);
    let s = &kl_sample(&d, 32, 1, 1).unwrap()[0];
    let values = s.values_at_nodes(&d).unwrap();
    for j in [0, 17, 64, 127] {
        let t = d.rule().node(j);
        assert!((s.eval(&d, t).unwrap() - values[j]).abs() < 1e-10);
    }
}

#[test]
fn path_csv_layout() {
    let d = wiener(32);
    let s = &kl_sample(&d, default_truncation(&d), 0, 1).unwrap()[0];
    let csv = s.path_csv(&d).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,value");
    assert_eq!(lines.len(), 33);
    let t: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    assert_eq!(t, d.rule().node(0)[0]);
}

#[test]
fn wiener_norm_means_grow_logarithmically() {
    // √μ_i = 2/((2i-1)π), so Σ_{N<i≤2N} √μ_i tends to (1/π) ln 2.
    let d = wiener(2048);
    let samples = kl_sample(&d, 512, 5, 200).unwrap();
    let stats = norm_stats(&samples, &d, 0.5).unwrap();
    let want = LN_2 / PI;
    let late: Vec<f64> = stats.increments[stats.increments.len() - 3..].to_vec();
    for inc in late {
        assert!((inc - want).abs() <= 0.1 * want, "{inc}");
    }
    assert_eq!(stats.probe, "heuristic");
    assert_eq!(stats.generator, GENERATOR);
}

#[test]
fn smooth_norm_means_converge() {
    let k = make_matern(1.5, 1.0, Domain::unit_interval(), true).unwrap();
    let d = nystrom_decompose(&k, &gauss_legendre(1024, 0.0, 1.0).unwrap()).unwrap();
    let samples = kl_sample(&d, 256, 5, 100).unwrap();
    let stats = norm_stats(&samples, &d, 0.5).unwrap();
    let inc = &stats.increments;
    for w in inc[inc.len() - 4..].windows(2) {
        assert!(w[1] * 2.0 <= w[0], "{:?}", inc);
    }
}

#[test]
fn empirical_norm_mean_is_inside_the_band() {
    let d = wiener(256);
    let samples = kl_sample(&d, 64, 11, 4000).unwrap();
    let stats = norm_stats(&samples, &d, 0.75).unwrap();
    assert!(stats.within_band, "{} vs {} ± {}", stats.mean, stats.theoretical_mean, stats.band);
    assert!(stats.norms.iter().all(|&x| x >= 0.0));
}

#[test]
fn sampling_errors() {
    let d = wiener(64);
    assert!(matches!(kl_sample(&d, 0, 1, 1), Err(Error::Parameter(_)) | Err(Error::DegenerateEigenvalue { .. })));
    assert!(kl_sample(&d, 65, 1, 1).is_err());
    assert!(matches!(norm_stats(&[], &d, 0.5), Err(Error::Usage(_))));
    let mut mixed = kl_sample(&d, 8, 1, 2).unwrap();
    mixed[1].coefficients.pop();
    assert!(matches!(norm_stats(&mixed, &d, 0.5), Err(Error::Usage(_))));
    let ok = kl_sample(&d, 8, 1, 2).unwrap();
    assert!(matches!(norm_stats(&ok, &d, 0.0), Err(Error::Parameter(_))));
}
