use proptest::prelude::*;

use rkhs_paths::analysis::{finite_rank_difference, fit_power_law};
use rkhs_paths::kernels::*;
use rkhs_paths::quadrature::{circle_uniform, gauss_legendre, tensor_rule, uniform_midpoint, Domain};
use rkhs_paths::spectral::{nystrom_decompose, symmetric_eigenvalues};

/// A kernel family on `[0, 1]`, chosen by `which`, with shape parameter `p` in `(0, 1)`.
fn family(which: u8, p: f64) -> Kernel {
    let u = Domain::unit_interval();
    match which % 7 {
        0 => make_wiener(),
        1 => make_brownian_bridge(),
        2 => make_ou(1 + (p > 0.5) as u8, 0.5 + p, 0.2 + 3.0 * p).unwrap(),
        3 => make_fbm(0.05 + 0.9 * p).unwrap(),
        4 => make_riemann_liouville(0.1 + 0.8 * p, 1e-10).unwrap(),
        5 => make_matern(0.2 + 2.0 * p, 0.5 + 2.0 * p, u, true).unwrap(),
        _ => add_finite_rank(&make_wiener(), vec![(Feature::Linear { scale: p }, Sign::Minus)]).unwrap(),
    }
}

fn distinct_points(raw: Vec<f64>) -> Vec<f64> {
    let mut pts = raw;
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    pts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_symmetric(which in 0u8..7, p in 0.01f64..0.99, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let k = family(which, p);
        let a = k.eval1(s, t).unwrap();
        let b = k.eval1(t, s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{}: {a} vs {b}", k.label());
    }

    #[test]
    fn circle_kernels_are_symmetric(c in prop::collection::vec(0.0f64..1.0, 1..8), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let k = make_circle_kernel(&c).unwrap();
        let (a, b) = (k.eval1(s, t).unwrap(), k.eval1(t, s).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn fractional_kernels_reduce_to_wiener(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let w = make_wiener().eval1(s, t).unwrap();
        prop_assert!((make_fbm(0.5).unwrap().eval1(s, t).unwrap() - w).abs() < 1e-12);
        prop_assert!((make_riemann_liouville(0.5, 1e-10).unwrap().eval1(s, t).unwrap() - w).abs() < 1e-9);
    }

    #[test]
    fn plus_minus_pairs_cancel(scale in 0.1f64..3.0, rate in 0.1f64..3.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let base = make_ou(1, 1.0, 1.0).unwrap();
        let f = || Feature::Exp { scale, rate };
        let k = add_finite_rank(&base, vec![(f(), Sign::Plus), (f(), Sign::Minus)]).unwrap();
        prop_assert_eq!(k.eval1(s, t).unwrap(), base.eval1(s, t).unwrap());
        prop_assert!(k.same(&base));
    }

    #[test]
    fn tensor_diagonal_is_the_product(p in 0.01f64..0.99, x in prop::collection::vec(0.0f64..1.0, 3)) {
        let factors = [make_wiener(), family(5, p), make_fbm(0.3).unwrap()];
        let k = tensor(&factors).unwrap();
        let want: f64 = factors.iter().zip(&x).map(|(f, &t)| f.eval1(t, t).unwrap()).product();
        prop_assert_eq!(k.eval(&x, &x).unwrap(), want);
    }

    #[test]
    fn exact_power_laws_are_fitted_exactly(rho in 1.1f64..5.0, c in 1e-3f64..1e3, lo in 2usize..20) {
        let mu: Vec<f64> = (1..=400).map(|i| c * (i as f64).powf(-rho)).collect();
        let est = fit_power_law(&mu, (lo, lo + 100)).unwrap();
        prop_assert!((est.rho - rho).abs() < 1e-6, "{} vs {rho}", est.rho);
    }

    #[test]
    fn interval_weights_sum_to_the_length(a in -5.0f64..5.0, len in 0.01f64..10.0, n in 1usize..200) {
        let b = a + len;
        let gl = gauss_legendre(n, a, b).unwrap();
        let mid = uniform_midpoint(n, &Domain::interval(a, b).unwrap()).unwrap();
        for rule in [gl, mid] {
            prop_assert!(rule.weights().iter().all(|&w| w > 0.0));
            let s: f64 = rule.weights().iter().sum();
            prop_assert!((s - len).abs() <= 1e-12 * len, "{s} vs {len}");
        }
    }

    #[test]
    fn box_weights_sum_to_the_volume(sides in prop::collection::vec((0.0f64..2.0, 0.1f64..3.0), 1..4), n in 1usize..12) {
        let bounds: Vec<(f64, f64)> = sides.iter().map(|&(a, l)| (a, a + l)).collect();
        let volume: f64 = sides.iter().map(|&(_, l)| l).product();
        let rules: Vec<_> = bounds.iter().map(|&(a, b)| gauss_legendre(n, a, b).unwrap()).collect();
        let r = tensor_rule(&rules).unwrap();
        let s: f64 = r.weights().iter().sum();
        prop_assert!((s - volume).abs() <= 1e-12 * volume);
        let mid = uniform_midpoint(n, &Domain::boxed(bounds).unwrap()).unwrap();
        let s: f64 = mid.weights().iter().sum();
        prop_assert!((s - volume).abs() <= 1e-12 * volume);
    }

    #[test]
    fn rank_is_symmetric(p in 0.05f64..0.95, q in 0.05f64..0.95) {
        let grid = gauss_legendre(32, 0.0, 1.0).unwrap();
        let k1 = make_ou(1, 1.0, 0.5 + p).unwrap();
        let k2 = make_ou(2, 1.0, 0.5 + q).unwrap();
        let ab = finite_rank_difference(&k1, &k2, &grid, 1e-8).unwrap();
        let ba = finite_rank_difference(&k2, &k1, &grid, 1e-8).unwrap();
        prop_assert_eq!(ab.outcome, ba.outcome);
        prop_assert_eq!(ab.ranks, ba.ranks);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gram_matrices_are_psd(which in 0u8..7, p in 0.01f64..0.99, raw in prop::collection::vec(0.0f64..1.0, 64..90)) {
        let k = family(which, p);
        let pts = distinct_points(raw);
        prop_assume!(pts.len() >= 64);
        let pts = &pts[..64];
        let g = faer::Mat::from_fn(64, 64, |i, j| k.eval1(pts[i], pts[j]).unwrap());
        let ev = symmetric_eigenvalues(&g).unwrap();
        let top = *ev.last().unwrap();
        prop_assert!(ev[0] >= -1e-8 * top, "{}: {} vs {top}", k.label(), ev[0]);
    }

    #[test]
    fn decompositions_keep_trace_and_orthonormality(which in 0u8..7, p in 0.01f64..0.99, n in 16usize..96) {
        let k = family(which, p);
        let d = nystrom_decompose(&k, &gauss_legendre(n, 0.0, 1.0).unwrap()).unwrap();
        prop_assert!(d.trace_defect().unwrap() <= 1e-10);
        prop_assert!(d.orthonormality_defect(d.floor_index()) <= 1e-10);
        let mu = d.eigenvalues();
        prop_assert!(mu.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(mu.iter().all(|&m| m >= 0.0));
    }
}

#[test]
fn gauss_legendre_is_exact_on_polynomials() {
    for n in [2, 4, 8] {
        let rule = gauss_legendre(n, 0.0, 1.0).unwrap();
        for k in 0..2 * n {
            let s: f64 = rule
                .nodes()
                .zip(rule.weights())
                .map(|(x, w)| w * x[0].powi(k as i32))
                .sum();
            assert!((s - 1.0 / (k + 1) as f64).abs() <= 1e-13, "n {n}, k {k}");
        }
    }
}

#[test]
fn circle_rule_annihilates_low_frequencies() {
    for n in [8, 64, 100] {
        let rule = circle_uniform(n).unwrap();
        for m in 1..n.div_ceil(2) {
            let s: f64 = rule
                .nodes()
                .zip(rule.weights())
                .map(|(x, w)| w * (2.0 * std::f64::consts::PI * m as f64 * x[0]).cos())
                .sum();
            assert!(s.abs() <= 1e-13, "n {n}, m {m}: {s}");
        }
        assert!((rule.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
