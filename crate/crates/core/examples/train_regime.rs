//! Trains one regime on the first 256 MNIST digits and prints the test error
//! every ten epochs.
//!
//! ```text
//! cargo run --release --example train_regime -- [regime] [epochs] [mnist-dir]
//! ```
//! `regime` is one of baseline, dropout, parallel_dither,
//! parallel_dither_dropout.

use std::path::PathBuf;

use ditherlab::mnist::{self, NormMode, StatsSource};
use ditherlab::trainer::{run_regime_observed, RegimeKnobs, TrainConfig};
use ditherlab::{Error, RegimeKind, Workers};

fn main() -> ditherlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = args.next().unwrap_or_else(|| "parallel_dither".into());
    let kind = RegimeKind::parse(&kind).ok_or_else(|| Error::InvalidConfig(format!("unknown regime {kind}")))?;
    let epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(30);
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data/mnist"));

    let data = mnist::load_split(&dir, 256, NormMode::Global, StatsSource::Subset)?;
    let config = TrainConfig {
        regime: RegimeKnobs::default().regime(kind),
        epochs,
        ..TrainConfig::default()
    };
    let workers = Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    let curve = run_regime_observed(&config, &data.train, &data.test, &workers, |epoch, _, err| {
        if epoch % 10 == 0 || epoch == epochs {
            println!("epoch {epoch:>3}: test error {:.2}%", 100.0 * err);
        }
        Ok(())
    })?;
    let (best_epoch, best) = curve.best();
    println!("{}: best {:.2}% at epoch {best_epoch}", curve.label, 100.0 * best);
    Ok(())
}
