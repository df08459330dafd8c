//! Welch PSD sanity: a unit sine integrates to 1/2, and any waveform's
//! integrated PSD matches its mean-square power.

use std::f64::consts::PI;

use ditherlab::signal::{welch_psd, Waveform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ditherlab::Result<()> {
    let fs = 44_100.0;
    let segment = 8192;
    let on_bin = 100.0 * fs / segment as f64;
    let sine = Waveform {
        sample_rate: fs,
        samples: (0..441_000).map(|i| (2.0 * PI * on_bin * i as f64 / fs).sin()).collect(),
    };
    let s = welch_psd(&sine, segment, 0.5)?;
    println!(
        "unit sine at {on_bin:.2} Hz: integrated PSD {:.6}, {} segments, bin width {:.3} Hz",
        s.integrated_power(),
        s.meta.segments_averaged,
        s.bin_width()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noisy = Waveform {
        sample_rate: fs,
        samples: (0..441_000)
            .map(|i| 0.3 * (2.0 * PI * 1234.5 * i as f64 / fs).sin() + rng.random::<f64>() - 0.5)
            .collect(),
    };
    let s = welch_psd(&noisy, segment, 0.5)?;
    println!(
        "off-bin sine plus uniform noise: integrated PSD {:.6}, mean square {:.6}",
        s.integrated_power(),
        noisy.mean_square()
    );
    Ok(())
}
