#![allow(dead_code, clippy::too_many_arguments)]

use std::path::PathBuf;

use ditherlab::mnist::TRAIN_IMAGES;

/// MNIST directory from `DITHERLAB_MNIST_DIR`, else the workspace `data/mnist`.
pub fn mnist_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("DITHERLAB_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"));
    let present = ["", ".gz"]
        .iter()
        .any(|ext| dir.join(format!("{TRAIN_IMAGES}{ext}")).exists());
    present.then_some(dir)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Test error of randomly initialized weights next to the error implied by
/// the label histogram if predictions ignore the image: with prediction
/// frequencies `q` and label frequencies `pi`, `1 - sum q_c pi_c`.
/// Returns (observed, implied, binomial standard error).
pub fn chance_level(test: &ditherlab::mnist::DataSet, init_seed: u64) -> (f64, f64, f64) {
    use ditherlab::nn::{forward, init_params, Activation};
    use ditherlab::trainer::evaluate;
    use ditherlab::regularize::Workers;

    let params = init_params(init_seed);
    let n = test.len() as f64;
    let mut predicted = [0usize; 10];
    for i in 0..test.len() {
        predicted[forward(&params, Activation::Relu, test.input(i), None).unwrap().predicted()] += 1;
    }
    let hist = test.histogram();
    let implied = 1.0 - (0..10).map(|c| predicted[c] as f64 / n * hist[c] as f64 / n).sum::<f64>();
    let observed = evaluate(&params, Activation::Relu, test, &Workers::sequential()).unwrap();
    (observed, implied, (implied * (1.0 - implied) / n).sqrt())
}

/// Per-replica gradients, recomputed one at a time.
pub fn replica_gradients(
    p: &ditherlab::NetworkParams,
    act: ditherlab::Activation,
    x: &[f64],
    label: usize,
    replicas: usize,
    half_width: f64,
    rate: Option<f64>,
    fam: &ditherlab::rng::StreamFamily,
) -> Vec<ditherlab::Gradients> {
    (0..replicas as u64)
        .map(|r| {
            use rand::Rng;
            let mut rng = fam.dither(r).rng();
            let xr: Vec<f64> = x
                .iter()
                .map(|&v| v + half_width * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            let mask: Option<Vec<f64>> = rate.map(|q| {
                let mut rng = fam.dropout(r).rng();
                (0..p.layout().hidden)
                    .map(|_| if rng.random::<f64>() < q { 0.0 } else { 1.0 / (1.0 - q) })
                    .collect()
            });
            let t = ditherlab::nn::forward(p, act, &xr, mask.as_deref()).unwrap();
            ditherlab::nn::backward(p, act, &t, label, mask.as_deref()).unwrap()
        })
        .collect()
}

pub fn sum_in_order(grads: &[ditherlab::Gradients]) -> ditherlab::Gradients {
    let mut acc = grads[0].clone();
    for g in &grads[1..] {
        for (a, b) in acc.slices_mut().into_iter().zip(g.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    acc
}
