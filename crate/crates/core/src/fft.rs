//! Minimal iterative radix-2 FFT for power-of-two lengths.
//!
//! Only what the spectral field sampler needs: an in-place unnormalized
//! inverse transform `x[k] = sum_m c[m] e^{+2 pi i m k / n}`.

use num_complex::Complex64;

crate::math::use_float_shim!();

use core::f64::consts::PI;

/// In-place unnormalized inverse DFT; `data.len()` must be a power of two.
pub fn inverse_fft(data: &mut [Complex64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            data.swap(i, j);
        }
        let mut m = n >> 1;
        while m >= 1 && j & m != 0 {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }
    let mut len = 2;
    while len <= n {
        let ang = 2.0 * PI / len as f64; // +2 pi: inverse transform
        let wlen = Complex64::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = data[start + k];
                let v = data[start + k + len / 2] * w;
                data[start + k] = u + v;
                data[start + k + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

/// Naive inverse DFT, kept as the test oracle.
#[cfg(test)]
pub fn inverse_dft_naive(data: &[Complex64]) -> alloc::vec::Vec<Complex64> {
    let n = data.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, c) in data.iter().enumerate() {
                let ang = 2.0 * PI * (m * k % n) as f64 / n as f64;
                acc += c * Complex64::new(ang.cos(), ang.sin());
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn matches_naive_dft() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for &n in &[1usize, 2, 8, 64, 256] {
            let data: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
            let want = inverse_dft_naive(&data);
            let mut got = data.clone();
            inverse_fft(&mut got);
            for (a, b) in got.iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-9 * (n as f64), "n={n}");
            }
        }
    }
}
