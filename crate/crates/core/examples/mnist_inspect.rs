//! Loads MNIST, prints split sizes, label histograms and normalization
//! statistics, and renders the first training digit as text.
//!
//! ```text
//! cargo run --release --example mnist_inspect -- [mnist-dir]
//! ```

use std::path::PathBuf;

use ditherlab::mnist::{self, NormMode, StatsSource};

fn main() -> ditherlab::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("DITHERLAB_MNIST_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data/mnist"));
    let split = mnist::load_split(&dir, 256, NormMode::Global, StatsSource::Subset)?;
    println!("train subset: {} examples, {:?}", split.train.len(), split.train.histogram());
    println!("test set:     {} examples, {:?}", split.test.len(), split.test.histogram());
    println!("pixel mean subtracted: {:.6}", split.train.mean_offset());

    let x = split.train.input(0);
    println!("first digit (label {}):", split.train.label(0));
    for row in x.chunks(28) {
        let line: String = row
            .iter()
            .map(|&v| match v + split.train.mean_offset() {
                p if p > 0.66 => '#',
                p if p > 0.33 => '+',
                p if p > 0.05 => '.',
                _ => ' ',
            })
            .collect();
        println!("  {line}");
    }
    Ok(())
}
