//! In-place iterative radix-2 decimation-in-time FFT.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Precomputed twiddles and bit-reversal table for one power-of-two size.
pub struct Radix2 {
    n: usize,
    twiddles: Vec<Complex>,
    rev: Vec<usize>,
}

impl Radix2 {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT size {n} is not a power of two");
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex::new(a.cos(), a.sin())
            })
            .collect();
        Self { n, twiddles, rev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Forward transform, `X[k] = Σ x[n] e^{-2πikn/N}`.
    pub fn process(&self, buf: &mut [Complex]) {
        assert_eq!(buf.len(), self.n);
        for i in 0..self.n {
            let j = self.rev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let stride = self.n / len;
            for start in (0..self.n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half];
                    let t = Complex::new(w.re * b.re - w.im * b.im, w.re * b.im + w.im * b.re);
                    buf[start + k] = Complex::new(a.re + t.re, a.im + t.im);
                    buf[start + k + half] = Complex::new(a.re - t.re, a.im - t.im);
                }
            }
            len <<= 1;
        }
    }
}
