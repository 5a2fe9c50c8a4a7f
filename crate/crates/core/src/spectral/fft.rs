//! Exact spectra of stationary kernels on the circle.
//!
//! On the uniform rule `x_j = j/n` the weighted Gram matrix of a stationary
//! kernel is circulant, so its eigenvalues are the discrete Fourier transform
//! of the first row divided by `n`, and its eigenvectors are sampled
//! characters. The transform is an iterative radix-2 FFT, independent of the
//! dense eigensolver used by the Nyström route.

use std::f64::consts::PI;

use faer::Mat;

use super::{Method, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::quadrature::circle_uniform;

/// In-place forward DFT `X_m = Σ_j x_j e^{-2πi jm/n}` of the complex
/// sequence `re + i·im`. The length must be a power of two.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    assert_eq!(n, im.len());
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for k in 0..half {
            // Twiddles from the exact angle, not a running product.
            let theta = -2.0 * PI * k as f64 / len as f64;
            let (ws, wc) = theta.sin_cos();
            for start in (0..n).step_by(len) {
                let a = start + k;
                let b = a + half;
                let tr = wc * re[b] - ws * im[b];
                let ti = wc * im[b] + ws * re[b];
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len *= 2;
    }
}

/// Spectrum of a stationary circle kernel on the `n`-point uniform rule.
///
/// Frequency `m` contributes the eigenvalue `λ_m = n^{-1} Σ_j κ(j/n) cos(2πjm/n)`
/// with eigenfunctions `1` (`m = 0`), `√2 cos(2πmt)` and `√2 sin(2πmt)`
/// (`0 < m < n/2`), and `cos(πnt)` (`m = n/2`).
pub fn fft_spectrum(kernel: &Kernel, n: usize) -> Result<SpectralDecomposition> {
    if !(kernel.domain().is_circle() && kernel.is_stationary()) {
        return Err(Error::Usage(format!(
            "fft_spectrum needs a stationary kernel on the circle, got {}",
            kernel.label()
        )));
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Usage(format!("FFT size must be a power of two >= 2, got {n}")));
    }
    let rule = circle_uniform(n)?;
    let mut re = (0..n)
        .map(|j| kernel.eval(rule.node(0), rule.node(j)))
        .collect::<Result<Vec<_>>>()?;
    // κ is even; average the mirrored samples so the transform is real.
    for j in 1..n / 2 {
        let avg = 0.5 * (re[j] + re[n - j]);
        re[j] = avg;
        re[n - j] = avg;
    }
    let mut im = vec![0.0; n];
    fft_in_place(&mut re, &mut im);

    let half = n / 2;
    let mut values = Vec::with_capacity(n);
    let mut coeffs = Mat::<f64>::zeros(n, n);
    let mut col = 0;
    let mut push = |values: &mut Vec<f64>, lambda: f64, f: &dyn Fn(usize) -> f64| {
        values.push(lambda);
        for j in 0..n {
            coeffs[(j, col)] = f(j);
        }
        col += 1;
    };
    let nf = n as f64;
    push(&mut values, re[0] / nf, &|_| 1.0);
    for m in 1..half {
        let lambda = re[m] / nf;
        let angle = move |j: usize| 2.0 * PI * ((j * m) % n) as f64 / nf;
        push(&mut values, lambda, &|j| 2f64.sqrt() * angle(j).cos());
        push(&mut values, lambda, &|j| 2f64.sqrt() * angle(j).sin());
    }
    push(&mut values, re[half] / nf, &|j| if j % 2 == 0 { 1.0 } else { -1.0 });
    SpectralDecomposition::assemble(kernel, rule, values, coeffs, Method::Fft)
}
