//! Welch power spectral density: Hann-windowed, overlapping segments,
//! averaged one-sided periodograms in density units (power per Hz).

use std::f64::consts::PI;

use super::fft::{Complex, Radix2};
use super::Waveform;
use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT: usize = 8192;
pub const DEFAULT_OVERLAP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct WelchMeta {
    pub window: &'static str,
    pub segment: usize,
    pub overlap: f64,
    pub segments_averaged: usize,
    pub sample_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub meta: WelchMeta,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.meta.sample_rate / self.meta.segment as f64
    }

    /// `Σ power · Δf`, the estimate of the mean-square signal level.
    pub fn integrated_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.bin_width()
    }

    pub fn power_db(&self) -> Vec<f64> {
        self.power.iter().map(|&p| to_db(p)).collect()
    }
}

/// `10·log10(p)` with `p` floored at 1e-300.
pub fn to_db(p: f64) -> f64 {
    10.0 * p.max(1e-300).log10()
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos())
        .collect()
}

pub fn welch_psd(w: &Waveform, segment: usize, overlap: f64) -> Result<Spectrum> {
    let n = w.samples.len();
    if segment == 0 || !segment.is_power_of_two() || segment > n {
        return Err(Error::SegmentTooLong { segment, samples: n });
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidConfig(format!("overlap {overlap} must be in [0, 1)")));
    }
    let step = segment - (segment as f64 * overlap).floor() as usize;
    let window = hann(segment);
    let win_energy: f64 = window.iter().map(|v| v * v).sum();
    let scale = 1.0 / (w.sample_rate * win_energy);
    let fft = Radix2::new(segment);
    let bins = segment / 2 + 1;

    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex::default(); segment];
    let mut count = 0;
    let mut start = 0;
    while start + segment <= n {
        for ((b, &x), &h) in buf.iter_mut().zip(&w.samples[start..start + segment]).zip(&window) {
            *b = Complex::new(x * h, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            let one_sided = if k == 0 || k == segment / 2 { 1.0 } else { 2.0 };
            *a += one_sided * buf[k].norm_sqr() * scale;
        }
        count += 1;
        start += step;
    }
    let power = acc.into_iter().map(|a| a / count as f64).collect();
    let freqs = (0..bins).map(|k| k as f64 * w.sample_rate / segment as f64).collect();
    Ok(Spectrum {
        freqs,
        power,
        meta: WelchMeta {
            window: "hann",
            segment,
            overlap,
            segments_averaged: count,
            sample_rate: w.sample_rate,
        },
    })
}
