//! Peak picking on a spectrum: the demodulated line, lines the input already
//! contained, and everything else (distortion).

use super::welch::Spectrum;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakCriteria {
    /// A peak must exceed the median floor by this much.
    pub threshold_db: f64,
    /// Matching radius around the signal, DC and passthrough frequencies.
    pub tolerance_hz: f64,
}

impl Default for PeakCriteria {
    fn default() -> Self {
        Self {
            threshold_db: 10.0,
            tolerance_hz: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeakKind {
    Signal,
    Dc,
    Passthrough,
    Distortion,
}

impl PeakKind {
    pub fn label(&self) -> &'static str {
        match self {
            PeakKind::Signal => "signal",
            PeakKind::Dc => "dc",
            PeakKind::Passthrough => "passthrough",
            PeakKind::Distortion => "distortion",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub freq_hz: f64,
    pub power_db: f64,
    pub kind: PeakKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport {
    pub signal_hz: f64,
    pub signal_power_db: f64,
    /// Sum of the distortion peaks' power; `-inf` when there are none.
    pub distortion_power_db: f64,
    pub noise_floor_db: f64,
    /// Every detected peak, ascending frequency.
    pub peaks: Vec<Peak>,
}

impl DistortionReport {
    pub fn signal_above_floor_db(&self) -> f64 {
        self.signal_power_db - self.noise_floor_db
    }

    pub fn distortion_peaks(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.kind == PeakKind::Distortion)
    }

    pub fn distortion_count(&self) -> usize {
        self.distortion_peaks().count()
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Noise floor is the median bin level in dB. Peaks are bins strictly above
/// their left neighbour, not below their right one, and more than
/// `threshold_db` above the floor. The signal level is the strongest bin
/// within `tolerance_hz` of `signal_hz`. The distortion aggregate sums every
/// peak that is not the signal bin, not DC and not within `tolerance_hz` of a
/// `passthrough_hz` line.
pub fn analyze_distortion(
    s: &Spectrum,
    signal_hz: f64,
    passthrough_hz: &[f64],
    criteria: &PeakCriteria,
) -> Result<DistortionReport> {
    let tol = criteria.tolerance_hz;
    let db = s.power_db();
    let floor = median(&db);

    let signal_bin = (0..s.freqs.len())
        .filter(|&k| (s.freqs[k] - signal_hz).abs() <= tol)
        .max_by(|&a, &b| s.power[a].total_cmp(&s.power[b]))
        .ok_or(Error::SignalBinMissing {
            signal_hz,
            tolerance_hz: tol,
        })?;

    let mut peaks = Vec::new();
    let mut distortion = 0.0;
    for (i, w) in s.power.windows(3).enumerate() {
        let (k, p) = (i + 1, w[1]);
        if !(p > w[0] && p >= w[2] && db[k] > floor + criteria.threshold_db) {
            continue;
        }
        let f = s.freqs[k];
        let kind = if k == signal_bin {
            PeakKind::Signal
        } else if f <= tol {
            PeakKind::Dc
        } else if passthrough_hz.iter().any(|&c| (f - c).abs() <= tol) {
            PeakKind::Passthrough
        } else {
            distortion += p;
            PeakKind::Distortion
        };
        peaks.push(Peak {
            freq_hz: f,
            power_db: db[k],
            kind,
        });
    }
    Ok(DistortionReport {
        signal_hz,
        signal_power_db: db[signal_bin],
        distortion_power_db: if distortion > 0.0 {
            10.0 * distortion.log10()
        } else {
            f64::NEG_INFINITY
        },
        noise_floor_db: floor,
        peaks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::welch::{to_db, welch_psd};
    use crate::signal::Waveform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    // Noiseless tones put the median floor at rounding level, where rounding
    // ripple clears any threshold; a faint noise bed makes the floor real.
    fn noisy(fs: f64, f: impl Fn(f64) -> f64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = Waveform {
            sample_rate: fs,
            samples: (0..65536)
                .map(|i| f(i as f64 / fs) + 1e-4 * (2.0 * rng.random::<f64>() - 1.0))
                .collect(),
        };
        welch_psd(&w, 1024, 0.5).unwrap()
    }

    fn tone(hz: f64) -> Spectrum {
        noisy(8192.0, |t| (2.0 * PI * hz * t).sin())
    }

    #[test]
    fn pure_tone_has_no_distortion() {
        let r = analyze_distortion(&tone(128.0), 128.0, &[], &PeakCriteria::default()).unwrap();
        assert_eq!(r.distortion_count(), 0);
        assert_eq!(r.distortion_power_db, f64::NEG_INFINITY);
        assert!(r.signal_above_floor_db() > 20.0);
    }

    #[test]
    fn passthrough_lines_are_not_distortion() {
        let s = noisy(8192.0, |t| {
            (2.0 * PI * 128.0 * t).sin() + 0.5 * (2.0 * PI * 1024.0 * t).sin() + 0.1 * (2.0 * PI * 2048.0 * t).sin()
        });
        let r = analyze_distortion(&s, 128.0, &[1024.0], &PeakCriteria::default()).unwrap();
        let kinds: Vec<_> = r.peaks.iter().map(|p| (p.freq_hz, p.kind)).collect();
        assert_eq!(
            kinds,
            vec![(128.0, PeakKind::Signal), (1024.0, PeakKind::Passthrough), (2048.0, PeakKind::Distortion)]
        );
        assert!((r.distortion_power_db - to_db(s.power[256])).abs() < 1e-9);
    }

    #[test]
    fn missing_signal_bin() {
        let s = tone(128.0);
        assert!(matches!(
            analyze_distortion(&s, 5000.0, &[], &PeakCriteria::default()),
            Err(Error::SignalBinMissing { .. })
        ));
    }
}
