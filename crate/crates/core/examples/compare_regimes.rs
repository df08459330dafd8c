//! Trains all four regimes from the same starting weights and prints a
//! summary table; writes the curves and an SVG plot.
//!
//! ```text
//! cargo run --release --example compare_regimes -- [epochs] [out-dir] [mnist-dir]
//! ```

use std::path::PathBuf;

use ditherlab::mnist::{self, NormMode, StatsSource};
use ditherlab::report::{self, svg, LinePlot, Series};
use ditherlab::trainer::{run_comparison_observed, RegimeKnobs, TrainConfig};
use ditherlab::Workers;

fn main() -> ditherlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/compare_regimes".into()));
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data/mnist"));
    std::fs::create_dir_all(&out).map_err(|e| ditherlab::Error::io(&out, e))?;

    let data = mnist::load_split(&dir, 256, NormMode::Global, StatsSource::Subset)?;
    let base = TrainConfig { epochs, ..TrainConfig::default() };
    let workers = Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    let curves = run_comparison_observed(&base, &RegimeKnobs::default(), &data.train, &data.test, &workers, |k, e, err| {
        if e == epochs {
            println!("{:<24} done: {:.2}%", k.label(), 100.0 * err);
        }
    })?;

    print!("{}", report::summary_table(&report::summarize(&curves)));
    report::write_comparison_csv(&out.join("compare.csv"), &curves)?;
    let series = curves
        .iter()
        .map(|c| Series {
            label: c.label.clone(),
            points: c.errors.iter().enumerate().map(|(e, v)| (e as f64, 100.0 * v)).collect(),
        })
        .collect();
    let plot = LinePlot {
        title: "Test error".into(),
        x_label: "epoch".into(),
        y_label: "error (%)".into(),
        x_log: false,
        series,
    };
    report::write_text(&out.join("compare.svg"), &svg::render(&[plot], 900.0, 480.0))?;
    println!("wrote {}", out.display());
    Ok(())
}
