//! ReLU as an AM demodulator, with and without parallel dither.
//!
//! An amplitude-modulated carrier is rectified by a ReLU, either directly or
//! as the average over many independently dithered copies, and the two
//! outputs are compared through their Welch spectra: the demodulated
//! modulator line against the remaining distortion lines.

pub mod distortion;
pub mod fft;
pub mod welch;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::regularize::{draw_dither, DEFAULT_HALF_WIDTH, DEFAULT_REPLICAS};
use crate::rng::{Purpose, StreamId};

pub use distortion::{analyze_distortion, DistortionReport, Peak, PeakKind, PeakCriteria};
pub use welch::{welch_psd, Spectrum, WelchMeta};

#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

impl Waveform {
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len().max(1) as f64
    }
}

/// An AM test tone: `m(t) · sin(2π·carrier·t)` with
/// `m(t) = (offset + sin(2π·mod·t)) / (1 + offset)`.
///
/// `modulator_offset = 0` gives the suppressed-carrier product of two sines,
/// whose rectified envelope `|sin|` repeats at twice the modulator frequency.
/// The default offset of 1 keeps the modulator non-negative so the envelope
/// is the modulator itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmSignal {
    pub carrier_hz: f64,
    pub mod_hz: f64,
    pub sample_rate: f64,
    pub duration_s: f64,
    pub modulator_offset: f64,
}

impl Default for AmSignal {
    fn default() -> Self {
        Self {
            carrier_hz: 10_000.0,
            mod_hz: 100.0,
            sample_rate: 44_100.0,
            duration_s: 10.0,
            modulator_offset: 1.0,
        }
    }
}

pub fn synth_am(signal: &AmSignal) -> Result<Waveform> {
    let AmSignal {
        carrier_hz,
        mod_hz,
        sample_rate: fs,
        duration_s,
        modulator_offset,
    } = *signal;
    let nyquist = fs / 2.0;
    if !(0.0 < mod_hz && mod_hz < carrier_hz && carrier_hz < nyquist) {
        return Err(Error::NyquistViolation {
            carrier_hz,
            mod_hz,
            nyquist,
        });
    }
    if duration_s.is_nan() || duration_s <= 0.0 || modulator_offset.is_nan() || modulator_offset < 0.0 {
        return Err(Error::InvalidConfig(
            "duration must be positive and the modulator offset non-negative".into(),
        ));
    }
    let n = (fs * duration_s).floor() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let m = (modulator_offset + (2.0 * PI * mod_hz * t).sin()) / (1.0 + modulator_offset);
            m * (2.0 * PI * carrier_hz * t).sin()
        })
        .collect();
    Ok(Waveform {
        sample_rate: fs,
        samples,
    })
}

pub fn relu_waveshape(w: &Waveform) -> Waveform {
    Waveform {
        sample_rate: w.sample_rate,
        samples: w.samples.iter().map(|&x| x.max(0.0)).collect(),
    }
}

/// Average over `replicas` copies of `relu(w + dither_r)`, where replica `r`
/// draws its dither from `stream.replica(r)`. Replicas are summed in
/// ascending order.
pub fn parallel_dither_waveshape(w: &Waveform, replicas: usize, half_width: f64, stream: StreamId) -> Result<Waveform> {
    if replicas == 0 {
        return Err(Error::InvalidConfig("replica count must be at least 1".into()));
    }
    if half_width == 0.0 {
        return Ok(relu_waveshape(w));
    }
    let shaped = |r: usize| -> Vec<f64> {
        let d = draw_dither(stream.replica(r as u64), half_width, w.samples.len());
        w.samples.iter().zip(d).map(|(&x, u)| (x + u).max(0.0)).collect()
    };
    let mut acc = shaped(0);
    for r in 1..replicas {
        for (a, v) in acc.iter_mut().zip(shaped(r)) {
            *a += v;
        }
    }
    if replicas > 1 {
        let n = replicas as f64;
        acc.iter_mut().for_each(|a| *a /= n);
    }
    Ok(Waveform {
        sample_rate: w.sample_rate,
        samples: acc,
    })
}

/// Everything one demodulation comparison needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemodConfig {
    pub signal: AmSignal,
    pub replicas: usize,
    pub half_width: f64,
    pub seed: u64,
    pub segment: usize,
    pub overlap: f64,
    pub criteria: PeakCriteria,
}

impl Default for DemodConfig {
    fn default() -> Self {
        Self {
            signal: AmSignal::default(),
            replicas: DEFAULT_REPLICAS,
            half_width: DEFAULT_HALF_WIDTH,
            seed: 1,
            segment: welch::DEFAULT_SEGMENT,
            overlap: welch::DEFAULT_OVERLAP,
            criteria: PeakCriteria::default(),
        }
    }
}

impl DemodConfig {
    /// Lines already present in the input: the carrier and its two
    /// modulation sidebands.
    pub fn passthrough_hz(&self) -> Vec<f64> {
        let s = &self.signal;
        vec![s.carrier_hz - s.mod_hz, s.carrier_hz, s.carrier_hz + s.mod_hz]
    }

    pub fn dither_stream(&self) -> StreamId {
        StreamId::new(self.seed, Purpose::SignalDither)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemodResult {
    pub plain: Spectrum,
    pub dithered: Spectrum,
    pub plain_report: DistortionReport,
    pub dithered_report: DistortionReport,
}

impl DemodResult {
    /// How far the distortion aggregate fell under dither, in dB.
    pub fn distortion_reduction_db(&self) -> f64 {
        self.plain_report.distortion_power_db - self.dithered_report.distortion_power_db
    }
}

pub fn run_demod(cfg: &DemodConfig) -> Result<DemodResult> {
    let input = synth_am(&cfg.signal)?;
    let plain = welch_psd(&relu_waveshape(&input), cfg.segment, cfg.overlap)?;
    let dithered_wave = parallel_dither_waveshape(&input, cfg.replicas, cfg.half_width, cfg.dither_stream())?;
    let dithered = welch_psd(&dithered_wave, cfg.segment, cfg.overlap)?;
    let passthrough = cfg.passthrough_hz();
    let analyze = |s: &Spectrum| analyze_distortion(s, cfg.signal.mod_hz, &passthrough, &cfg.criteria);
    Ok(DemodResult {
        plain_report: analyze(&plain)?,
        dithered_report: analyze(&dithered)?,
        plain,
        dithered,
    })
}
