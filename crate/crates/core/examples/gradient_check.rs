//! Checks backpropagation on the full 784x100x10 network against central
//! finite differences, on real MNIST digits when available.
//!
//! ```text
//! cargo run --release --example gradient_check -- [mnist-dir]
//! ```

use std::path::PathBuf;

use ditherlab::mnist::{self, NormMode, StatsSource};
use ditherlab::nn::{self, Activation, GRAD_CHECK_FLOOR};
use ditherlab::regularize::{draw_dropout_mask, DEFAULT_DROPOUT};
use ditherlab::rng::{Purpose, StreamId};

fn main() -> ditherlab::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("DITHERLAB_MNIST_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data/mnist"));
    let data = mnist::load_split(&dir, 256, NormMode::Global, StatsSource::Subset)?;
    let params = nn::init_params(1);
    let h = 1e-5;
    println!("relative-error floor {GRAD_CHECK_FLOOR:e}, step {h:e}");

    for i in 0..3 {
        let x = data.train.input(i);
        let label = data.train.label(i);
        for (name, act) in [("relu", Activation::Relu), ("biased sigmoid", Activation::BiasedSigmoid { beta: -1.0 })] {
            let mask = draw_dropout_mask(StreamId::new(7, Purpose::Dropout).example(i as u64), DEFAULT_DROPOUT, 100)?;
            for m in [None, Some(mask.as_slice())] {
                let trace = nn::forward(&params, act, x, m)?;
                let g = nn::backward(&params, act, &trace, label, m)?;
                let r = nn::grad_check_against(&params, act, x, label, m, h, &g)?;
                println!(
                    "digit {i} (label {label}) {name:<14} dropout {:<5} max rel error {:.3e} over {} params ({} skipped at kinks)",
                    m.is_some(),
                    r.max_rel_error,
                    r.checked,
                    r.kink_excluded
                );
            }
        }
    }
    Ok(())
}
