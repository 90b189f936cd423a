//! In-place radix-2 complex FFT.
//!
//! Conventions: `fft` computes `X_k = sum_j x_j e^{-2 pi i jk/n}` without
//! scaling; `ifft` applies the conjugate kernel and divides by `n`, so
//! `ifft(fft(x)) == x` to rounding.

use crate::scalar::{Real, C};

fn bit_reverse_permute<T: Copy>(buf: &mut [C<T>]) {
    let n = buf.len();
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            buf.swap(i, j);
        }
        let mut bit = n >> 1;
        while bit > 0 && j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
    }
}

fn transform<T: Real>(buf: &mut [C<T>], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    bit_reverse_permute(buf);

    let sign = if inverse { T::one() } else { -T::one() };
    let mut len = 2usize;
    while len <= n {
        let ang = sign * T::of(2.0) * T::PI() / T::of(len as f64);
        let wlen = C::new(ang.cos(), ang.sin());
        let mut start = 0usize;
        while start < n {
            let mut w = C::new(T::one(), T::zero());
            for k in 0..len / 2 {
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
                w *= wlen;
            }
            start += len;
        }
        len <<= 1;
    }
}

/// Forward DFT, unscaled.
pub fn fft<T: Real>(buf: &mut [C<T>]) {
    transform(buf, false);
}

/// Inverse DFT, scaled by `1/n`.
pub fn ifft<T: Real>(buf: &mut [C<T>]) {
    transform(buf, true);
    let n = T::of(buf.len() as f64);
    for x in buf.iter_mut() {
        *x = C::new(x.re / n, x.im / n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_of_impulse_is_flat() {
        let mut buf = vec![C::new(0.0f64, 0.0); 8];
        buf[0] = C::new(1.0, 0.0);
        fft(&mut buf);
        for x in &buf {
            assert!((x.re - 1.0).abs() < 1e-12 && x.im.abs() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_naive_dft() {
        let n = 16usize;
        let input: Vec<C<f64>> = (0..n)
            .map(|j| C::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let mut fast = input.clone();
        fft(&mut fast);
        for k in 0..n {
            let mut acc = C::new(0.0, 0.0);
            for (j, x) in input.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                acc += *x * C::new(ang.cos(), ang.sin());
            }
            assert!((fast[k] - acc).norm() < 1e-10);
        }
    }

    #[test]
    fn ifft_inverts_fft() {
        let input: Vec<C<f64>> = (0..64)
            .map(|j| C::new((j as f64).sqrt(), -(j as f64) * 0.01))
            .collect();
        let mut buf = input.clone();
        fft(&mut buf);
        ifft(&mut buf);
        for (a, b) in buf.iter().zip(input.iter()) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn parseval_identity() {
        let input: Vec<C<f64>> = (0..128)
            .map(|j| C::new((0.1 * j as f64).cos(), (0.05 * j as f64).sin()))
            .collect();
        let time_energy: f64 = input.iter().map(|x| x.norm_sqr()).sum();
        let mut buf = input;
        fft(&mut buf);
        let freq_energy: f64 = buf.iter().map(|x| x.norm_sqr()).sum::<f64>() / 128.0;
        assert!((time_energy - freq_energy).abs() / time_energy < 1e-12);
    }
}
