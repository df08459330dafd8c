//! One parallel-dither gradient on a small network: how far the replica mean
//! moves from the plain gradient, and that worker count never changes it.

use ditherlab::nn::{backward, forward, Activation, Layout, NetworkParams};
use ditherlab::regularize::{parallel_gradient_with, Regime, Workers};
use ditherlab::rng::StreamFamily;

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

fn main() -> ditherlab::Result<()> {
    let params = NetworkParams::init(Layout::new(20, 8, 4), 3, 0.3);
    let x: Vec<f64> = (0..20).map(|i| ((i * 37) % 17) as f64 / 17.0 - 0.5).collect();
    let label = 2;
    let plain = backward(&params, Activation::Relu, &forward(&params, Activation::Relu, &x, None)?, label, None)?;
    let streams = StreamFamily::new(1, 1, 0);

    println!("replicas  |g - g_plain| / |g_plain|");
    for replicas in [2, 10, 100, 1000] {
        let g = parallel_gradient_with(
            &Workers::sequential(),
            &params,
            Activation::Relu,
            &x,
            label,
            &Regime::parallel_dither(replicas, 0.5),
            &streams,
        )?;
        let diff = norm(g.iter().zip(plain.iter()).map(|(a, b)| a - b));
        println!("{replicas:>8}  {:.4}", diff / norm(plain.iter().copied()));
    }

    let regime = Regime::parallel_dither_dropout(100, 0.5, 0.5);
    let one = parallel_gradient_with(&Workers::sequential(), &params, Activation::Relu, &x, label, &regime, &streams)?;
    let four = parallel_gradient_with(&Workers::new(4)?, &params, Activation::Relu, &x, label, &regime, &streams)?;
    println!("1 worker vs 4 workers bit-identical: {}", one == four);
    Ok(())
}
