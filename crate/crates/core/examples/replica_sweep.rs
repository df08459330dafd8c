//! How distortion suppression depends on the number of dithered replicas,
//! averaged over independent dither streams.
//!
//! ```text
//! cargo run --release --example replica_sweep -- [streams]
//! ```

use ditherlab::signal::{analyze_distortion, parallel_dither_waveshape, synth_am, welch_psd, DemodConfig};

fn main() -> ditherlab::Result<()> {
    let streams: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let base = DemodConfig::default();
    let wave = synth_am(&base.signal)?;
    let passthrough = base.passthrough_hz();
    println!("replicas  distortion (dB)  signal above floor (dB)  distortion peaks   mean over {streams} streams");
    for replicas in [1, 2, 5, 10, 20, 50, 100] {
        let (mut dist, mut above, mut peaks) = (0.0, 0.0, 0.0);
        for seed in 1..=streams {
            let cfg = DemodConfig { seed, replicas, ..base };
            let shaped = parallel_dither_waveshape(&wave, replicas, cfg.half_width, cfg.dither_stream())?;
            let spec = welch_psd(&shaped, cfg.segment, cfg.overlap)?;
            let r = analyze_distortion(&spec, cfg.signal.mod_hz, &passthrough, &cfg.criteria)?;
            dist += r.distortion_power_db;
            above += r.signal_above_floor_db();
            peaks += r.distortion_count() as f64;
        }
        let n = streams as f64;
        println!("{replicas:>8}  {:>15.3}  {:>23.3}  {:>16.1}", dist / n, above / n, peaks / n);
    }
    Ok(())
}
