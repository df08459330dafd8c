//! Rectifies an AM tone (10 kHz carrier, 100 Hz modulator, 44.1 kHz, 10 s)
//! with a plain ReLU and with 100 dithered ReLU replicas, then lists the
//! spectral peaks of both and writes the spectra to CSV.
//!
//! ```text
//! cargo run --release --example demodulation -- [out-dir]
//! ```

use std::path::PathBuf;

use ditherlab::report;
use ditherlab::signal::{run_demod, DemodConfig};

fn main() -> ditherlab::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/demodulation".into()));
    std::fs::create_dir_all(&out).map_err(|e| ditherlab::Error::io(&out, e))?;

    let cfg = DemodConfig::default();
    let result = run_demod(&cfg)?;
    print!("{}", report::distortion_text("plain relu", &result.plain_report));
    println!();
    print!("{}", report::distortion_text("parallel dither", &result.dithered_report));
    println!("\ndistortion aggregate reduced by {:.2} dB", result.distortion_reduction_db());

    report::write_spectrum_csv(&out.join("spectrum_plain.csv"), &result.plain)?;
    report::write_spectrum_csv(&out.join("spectrum_dithered.csv"), &result.dithered)?;
    println!("spectra written to {}", out.display());
    Ok(())
}
