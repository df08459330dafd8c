//! Non-batch SGD over a small training set, with a test-error measurement
//! after every sweep, and the four-regime comparison.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::mnist::DataSet;
use crate::nn::{apply_sgd, argmax, forward, Activation, Layout, NetworkParams, INIT_STD};
use crate::regularize::{
    parallel_gradient_with, Regime, RegimeKind, Workers, DEFAULT_DROPOUT, DEFAULT_HALF_WIDTH, DEFAULT_REPLICAS,
};
use crate::rng::{Purpose, StreamFamily, StreamId};

pub const DEFAULT_LR: f64 = 0.01;
pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_SUBSET: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub regime: Regime,
    pub activation: Activation,
    pub lr: f64,
    pub epochs: usize,
    pub train_subset: usize,
    pub init_seed: u64,
    pub run_seed: u64,
    pub shuffle: bool,
    pub init_std: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            regime: Regime::baseline(),
            activation: Activation::Relu,
            lr: DEFAULT_LR,
            epochs: DEFAULT_EPOCHS,
            train_subset: DEFAULT_SUBSET,
            init_seed: 1,
            run_seed: 1,
            shuffle: true,
            init_std: INIT_STD,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate {} must be > 0", self.lr)));
        }
        if self.train_subset < 1 {
            return Err(Error::InvalidConfig("training subset must hold at least one example".into()));
        }
        if let Activation::BiasedSigmoid { beta } = self.activation {
            if !beta.is_finite() {
                return Err(Error::InvalidConfig(format!("beta {beta} must be finite")));
            }
        }
        self.regime.validate()
    }

    pub fn initial_params(&self, layout: Layout) -> NetworkParams {
        NetworkParams::init(layout, self.init_seed, self.init_std)
    }
}

/// The visiting order for one sweep: a seeded permutation of `0..n` that
/// depends only on `(run_seed, epoch)`, or file order with `shuffle` off.
pub fn epoch_order(config: &TrainConfig, n: usize, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if config.shuffle {
        let mut rng = StreamId::new(config.run_seed, Purpose::Shuffle).epoch(epoch as u64).rng();
        order.shuffle(&mut rng);
    }
    order
}

/// One sweep: every example once, one SGD step per example.
pub fn train_epoch(
    params: &NetworkParams,
    config: &TrainConfig,
    train: &DataSet,
    epoch: usize,
    workers: &Workers,
) -> Result<NetworkParams> {
    if train.len() != config.train_subset {
        return Err(Error::ShapeMismatch {
            what: "training set size",
            expected: config.train_subset,
            got: train.len(),
        });
    }
    let mut params = params.clone();
    for i in epoch_order(config, train.len(), epoch) {
        let streams = StreamFamily::new(config.run_seed, epoch as u64, i as u64);
        let grads = parallel_gradient_with(
            workers,
            &params,
            config.activation,
            train.input(i),
            train.label(i),
            &config.regime,
            &streams,
        )?;
        apply_sgd(&mut params, &grads, config.lr);
    }
    Ok(params)
}

/// Fraction of misclassified examples with the plain network (no dither, no
/// dropout). Ties go to the lowest class index.
pub fn evaluate(params: &NetworkParams, act: Activation, test: &DataSet, workers: &Workers) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    const CHUNK: usize = 500;
    let chunks = test.len().div_ceil(CHUNK);
    let wrong: Vec<Result<usize>> = workers.map(chunks, |c| {
        let mut wrong = 0;
        for i in c * CHUNK..((c + 1) * CHUNK).min(test.len()) {
            let t = forward(params, act, test.input(i), None)?;
            if argmax(&t.probs) != test.label(i) {
                wrong += 1;
            }
        }
        Ok(wrong)
    });
    let mut total = 0;
    for w in wrong {
        total += w?;
    }
    Ok(total as f64 / test.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorCurve {
    pub label: String,
    /// `errors[0]` is before training, `errors[k]` after sweep `k`.
    pub errors: Vec<f64>,
}

impl ErrorCurve {
    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("curve is never empty")
    }

    /// Lowest error and the first epoch it occurs at.
    pub fn best(&self) -> (usize, f64) {
        let mut best = (0, self.errors[0]);
        for (e, &v) in self.errors.iter().enumerate() {
            if v < best.1 {
                best = (e, v);
            }
        }
        best
    }

    /// First epoch at or after 1 whose error is `<= threshold`.
    pub fn first_epoch_reaching(&self, threshold: f64) -> Option<usize> {
        self.errors
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &v)| v <= threshold)
            .map(|(e, _)| e)
    }

    /// The curve without the pre-training point, as plotted per sweep.
    pub fn per_sweep(&self) -> &[f64] {
        &self.errors[1..]
    }
}

/// [`run_regime`] with a hook called after every evaluation, including the
/// pre-training one at epoch 0.
pub fn run_regime_observed(
    config: &TrainConfig,
    train: &DataSet,
    test: &DataSet,
    workers: &Workers,
    mut observe: impl FnMut(usize, &NetworkParams, f64) -> Result<()>,
) -> Result<ErrorCurve> {
    config.validate()?;
    let layout = Layout::new(train.dim(), Layout::MNIST.hidden, Layout::MNIST.output);
    let mut params = config.initial_params(layout);
    let mut errors = Vec::with_capacity(config.epochs + 1);
    let e0 = evaluate(&params, config.activation, test, workers)?;
    observe(0, &params, e0)?;
    errors.push(e0);
    for epoch in 1..=config.epochs {
        params = train_epoch(&params, config, train, epoch, workers)?;
        let e = evaluate(&params, config.activation, test, workers)?;
        observe(epoch, &params, e)?;
        errors.push(e);
    }
    Ok(ErrorCurve {
        label: config.regime.kind.label().to_string(),
        errors,
    })
}

pub fn run_regime(config: &TrainConfig, train: &DataSet, test: &DataSet, workers: &Workers) -> Result<ErrorCurve> {
    run_regime_observed(config, train, test, workers, |_, _, _| Ok(()))
}

/// Replica count, dither width and dropout rate shared by the regimes of one
/// comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeKnobs {
    pub replicas: usize,
    pub half_width: f64,
    pub dropout_rate: f64,
}

impl Default for RegimeKnobs {
    fn default() -> Self {
        Self {
            replicas: DEFAULT_REPLICAS,
            half_width: DEFAULT_HALF_WIDTH,
            dropout_rate: DEFAULT_DROPOUT,
        }
    }
}

impl RegimeKnobs {
    pub fn regime(&self, kind: RegimeKind) -> Regime {
        Regime::of_kind(kind, self.replicas, self.half_width, self.dropout_rate)
    }
}

/// Runs baseline, dropout, parallel dither and parallel dither with dropout
/// from the same starting weights and the same visiting order.
pub fn run_comparison(
    base: &TrainConfig,
    knobs: &RegimeKnobs,
    train: &DataSet,
    test: &DataSet,
    workers: &Workers,
) -> Result<Vec<ErrorCurve>> {
    run_comparison_observed(base, knobs, train, test, workers, |_, _, _| {})
}

/// [`run_comparison`] reporting `(regime, epoch, error)` as it goes.
pub fn run_comparison_observed(
    base: &TrainConfig,
    knobs: &RegimeKnobs,
    train: &DataSet,
    test: &DataSet,
    workers: &Workers,
    mut progress: impl FnMut(RegimeKind, usize, f64),
) -> Result<Vec<ErrorCurve>> {
    RegimeKind::ALL
        .into_iter()
        .map(|kind| {
            let config = TrainConfig {
                regime: knobs.regime(kind),
                ..*base
            };
            run_regime_observed(&config, train, test, workers, |epoch, _, err| {
                progress(kind, epoch, err);
                Ok(())
            })
        })
        .collect()
}
