//! Dither vectors, dropout masks, and the replica-averaged gradient that
//! defines each training regime.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::{deltas, forward, write_gradient, Activation, Deltas, ForwardTrace, Gradients, NetworkParams};
use crate::rng::{StreamFamily, StreamId};

pub const DEFAULT_HALF_WIDTH: f64 = 1.0;
pub const DEFAULT_REPLICAS: usize = 100;
pub const DEFAULT_DROPOUT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DitherSpec {
    /// Dither is uniform on `[-half_width, half_width]`.
    pub half_width: f64,
    pub replicas: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropoutSpec {
    /// Probability that a hidden unit is dropped.
    pub rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    Baseline,
    Dropout,
    ParallelDither,
    ParallelDitherDropout,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 4] = [
        RegimeKind::Baseline,
        RegimeKind::Dropout,
        RegimeKind::ParallelDither,
        RegimeKind::ParallelDitherDropout,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            RegimeKind::Baseline => "baseline",
            RegimeKind::Dropout => "dropout",
            RegimeKind::ParallelDither => "parallel_dither",
            RegimeKind::ParallelDitherDropout => "parallel_dither_dropout",
        }
    }

    pub fn parse(s: &str) -> Option<RegimeKind> {
        let norm = s.trim().replace('-', "_");
        RegimeKind::ALL.into_iter().find(|k| k.label() == norm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regime {
    pub kind: RegimeKind,
    pub dither: DitherSpec,
    pub dropout: DropoutSpec,
}

impl Regime {
    pub fn baseline() -> Self {
        Self {
            kind: RegimeKind::Baseline,
            dither: DitherSpec {
                half_width: 0.0,
                replicas: 1,
            },
            dropout: DropoutSpec { rate: 0.0 },
        }
    }

    pub fn dropout(rate: f64) -> Self {
        Self {
            kind: RegimeKind::Dropout,
            dropout: DropoutSpec { rate },
            ..Self::baseline()
        }
    }

    pub fn parallel_dither(replicas: usize, half_width: f64) -> Self {
        Self {
            kind: RegimeKind::ParallelDither,
            dither: DitherSpec { half_width, replicas },
            dropout: DropoutSpec { rate: 0.0 },
        }
    }

    pub fn parallel_dither_dropout(replicas: usize, half_width: f64, rate: f64) -> Self {
        Self {
            kind: RegimeKind::ParallelDitherDropout,
            dither: DitherSpec { half_width, replicas },
            dropout: DropoutSpec { rate },
        }
    }

    /// The regime of `kind` with the given knobs; knobs a kind does not use
    /// are ignored.
    pub fn of_kind(kind: RegimeKind, replicas: usize, half_width: f64, rate: f64) -> Self {
        match kind {
            RegimeKind::Baseline => Self::baseline(),
            RegimeKind::Dropout => Self::dropout(rate),
            RegimeKind::ParallelDither => Self::parallel_dither(replicas, half_width),
            RegimeKind::ParallelDitherDropout => Self::parallel_dither_dropout(replicas, half_width, rate),
        }
    }

    pub fn replicas(&self) -> usize {
        self.dither.replicas
    }

    pub fn uses_dropout(&self) -> bool {
        matches!(self.kind, RegimeKind::Dropout | RegimeKind::ParallelDitherDropout)
    }

    pub fn uses_dither(&self) -> bool {
        matches!(self.kind, RegimeKind::ParallelDither | RegimeKind::ParallelDitherDropout)
            && self.dither.half_width != 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let DitherSpec { half_width, replicas } = self.dither;
        let rate = self.dropout.rate;
        if replicas == 0 {
            return bad("replica count must be at least 1".into());
        }
        if !half_width.is_finite() || half_width < 0.0 {
            return bad(format!("dither half-width {half_width} must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::RateOutOfRange(rate));
        }
        match self.kind {
            RegimeKind::Baseline if replicas != 1 || half_width != 0.0 || rate != 0.0 => {
                bad("baseline takes no dither, no dropout and a single replica".into())
            }
            RegimeKind::Dropout if replicas != 1 || rate <= 0.0 => {
                bad("dropout regime needs one replica and a positive rate".into())
            }
            RegimeKind::ParallelDither if replicas < 2 || rate != 0.0 => {
                bad("parallel dither needs at least two replicas and no dropout".into())
            }
            RegimeKind::ParallelDitherDropout if replicas < 2 || rate <= 0.0 => {
                bad("parallel dither with dropout needs at least two replicas and a positive rate".into())
            }
            _ => Ok(()),
        }
    }
}

/// `n` draws uniform on `[-half_width, half_width]`.
pub fn draw_dither(stream: StreamId, half_width: f64, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n)
        .map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

/// Inverted-dropout mask: 0 with probability `rate`, else `1 / (1 - rate)`.
pub fn draw_dropout_mask(stream: StreamId, rate: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::RateOutOfRange(rate));
    }
    let keep = 1.0 / (1.0 - rate);
    let mut rng = stream.rng();
    Ok((0..n)
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect())
}

/// Optional worker pool for replica evaluation. Results never depend on the
/// number of workers.
pub struct Workers {
    pool: Option<rayon::ThreadPool>,
}

impl Workers {
    pub fn sequential() -> Self {
        Self { pool: None }
    }

    /// `count <= 1` means sequential.
    pub fn new(count: usize) -> Result<Self> {
        if count <= 1 {
            return Ok(Self::sequential());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        Ok(Self { pool: Some(pool) })
    }

    pub fn count(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub(crate) fn map<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        match &self.pool {
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            None => (0..n).map(f).collect(),
        }
    }

    pub(crate) fn for_rows(&self, data: &mut [f64], cols: usize, f: impl Fn(usize, &mut [f64]) + Sync + Send) {
        match &self.pool {
            Some(pool) => pool.install(|| {
                data.par_chunks_mut(cols).enumerate().for_each(|(j, row)| f(j, row))
            }),
            None => data.chunks_mut(cols).enumerate().for_each(|(j, row)| f(j, row)),
        }
    }
}

impl Default for Workers {
    fn default() -> Self {
        Self::sequential()
    }
}

/// One replica's perturbed input and mask, exactly as `parallel_gradient`
/// builds them.
pub fn replica_inputs(
    input: &[f64],
    hidden: usize,
    regime: &Regime,
    streams: &StreamFamily,
    replica: u64,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let mut x = input.to_vec();
    if regime.uses_dither() {
        let d = draw_dither(streams.dither(replica), regime.dither.half_width, x.len());
        for (xi, di) in x.iter_mut().zip(d) {
            *xi += di;
        }
    }
    let mask = if regime.uses_dropout() {
        Some(draw_dropout_mask(streams.dropout(replica), regime.dropout.rate, hidden)?)
    } else {
        None
    };
    Ok((x, mask))
}

/// Mean of the per-replica gradients for one training example.
///
/// Replica `r` sees `input + dither_r` and, when dropout is active, its own
/// mask `mask_r`. Per-replica gradients are summed in ascending replica order
/// and divided by the replica count.
pub fn parallel_gradient(
    params: &NetworkParams,
    act: Activation,
    input: &[f64],
    label: usize,
    regime: &Regime,
    streams: &StreamFamily,
) -> Result<Gradients> {
    parallel_gradient_with(&Workers::sequential(), params, act, input, label, regime, streams)
}

pub fn parallel_gradient_with(
    workers: &Workers,
    params: &NetworkParams,
    act: Activation,
    input: &[f64],
    label: usize,
    regime: &Regime,
    streams: &StreamFamily,
) -> Result<Gradients> {
    regime.validate()?;
    let layout = params.layout();
    if input.len() != layout.input {
        return Err(Error::ShapeMismatch {
            what: "input",
            expected: layout.input,
            got: input.len(),
        });
    }
    // Without dither or dropout every replica is identical; their exact mean
    // is one replica's gradient.
    let replicas = if regime.uses_dither() || regime.uses_dropout() {
        regime.replicas()
    } else {
        1
    };
    let parts: Vec<(ForwardTrace, Deltas)> = workers
        .map(replicas, |r| -> Result<(ForwardTrace, Deltas)> {
            let (x, mask) = replica_inputs(input, layout.hidden, regime, streams, r as u64)?;
            let trace = forward(params, act, &x, mask.as_deref())?;
            let d = deltas(params, act, &trace, label, mask.as_deref())?;
            Ok((trace, d))
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let mut grads = Gradients::zeros(layout);
    write_gradient(&mut grads, &parts[0].0, &parts[0].1);
    if replicas == 1 {
        return Ok(grads);
    }
    let rest = &parts[1..];
    workers.for_rows(grads.w1.as_mut_slice(), layout.input, |j, row| {
        for (t, d) in rest {
            let hd = d.hidden[j];
            for (g, &x) in row.iter_mut().zip(&t.input) {
                *g += hd * x;
            }
        }
    });
    for (t, d) in rest {
        for (g, &hd) in grads.b1.iter_mut().zip(&d.hidden) {
            *g += hd;
        }
        let cols = layout.hidden;
        for (row, &od) in grads.w2.as_mut_slice().chunks_exact_mut(cols).zip(&d.output) {
            for (g, &h) in row.iter_mut().zip(&t.hidden_post) {
                *g += od * h;
            }
        }
        for (g, &od) in grads.b2.iter_mut().zip(&d.output) {
            *g += od;
        }
    }
    let n = replicas as f64;
    for s in grads.slices_mut() {
        for g in s.iter_mut() {
            *g /= n;
        }
    }
    Ok(grads)
}
