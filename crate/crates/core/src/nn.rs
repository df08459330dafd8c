//! The fully connected `input × hidden × output` network with a softmax head.
//!
//! Forward, exact backpropagation of softmax cross-entropy, plain SGD and a
//! central-difference gradient checker. Everything is `f64`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{Purpose, StreamId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl Layout {
    /// 784 × 100 × 10.
    pub const MNIST: Layout = Layout {
        input: 784,
        hidden: 100,
        output: 10,
    };

    pub fn new(input: usize, hidden: usize, output: usize) -> Self {
        Self {
            input,
            hidden,
            output,
        }
    }

    pub fn num_params(&self) -> usize {
        self.hidden * (self.input + 1) + self.output * (self.hidden + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Relu,
    /// `1 / (1 + exp(-(x + beta)))`.
    BiasedSigmoid { beta: f64 },
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Activation::Relu => x.max(0.0),
            Activation::BiasedSigmoid { beta } => 1.0 / (1.0 + (-(x + beta)).exp()),
        }
    }

    /// Derivative at `x`. The ReLU derivative at exactly 0 is 0.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::BiasedSigmoid { .. } => {
                let s = self.apply(x);
                s * (1.0 - s)
            }
        }
    }

    pub fn is_relu(&self) -> bool {
        matches!(self, Activation::Relu)
    }
}

pub fn apply_activation(act: Activation, pre: &[f64]) -> Vec<f64> {
    pre.iter().map(|&x| act.apply(x)).collect()
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let mut total = 0.0;
    for e in &exps {
        total += e;
    }
    exps.into_iter().map(|e| e / total).collect()
}

pub const PROB_FLOOR: f64 = 1e-300;

pub fn cross_entropy(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(PROB_FLOOR).ln()
}

macro_rules! param_set {
    ($name:ident) => {
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            pub w1: Matrix,
            pub b1: Vec<f64>,
            pub w2: Matrix,
            pub b2: Vec<f64>,
        }

        impl $name {
            pub fn zeros(layout: Layout) -> Self {
                Self {
                    w1: Matrix::zeros(layout.hidden, layout.input),
                    b1: vec![0.0; layout.hidden],
                    w2: Matrix::zeros(layout.output, layout.hidden),
                    b2: vec![0.0; layout.output],
                }
            }

            pub fn layout(&self) -> Layout {
                Layout::new(self.w1.cols(), self.w1.rows(), self.w2.rows())
            }

            /// `w1`, `b1`, `w2`, `b2` in that order.
            pub fn slices(&self) -> [&[f64]; 4] {
                [self.w1.as_slice(), &self.b1, self.w2.as_slice(), &self.b2]
            }

            pub fn slices_mut(&mut self) -> [&mut [f64]; 4] {
                [
                    self.w1.as_mut_slice(),
                    &mut self.b1,
                    self.w2.as_mut_slice(),
                    &mut self.b2,
                ]
            }

            pub fn iter(&self) -> impl Iterator<Item = &f64> {
                self.slices().into_iter().flatten()
            }

            pub fn is_finite(&self) -> bool {
                self.iter().all(|v| v.is_finite())
            }

            /// Looks up a parameter by its position in the flattened order.
            pub fn flat_get(&self, mut index: usize) -> f64 {
                for s in self.slices() {
                    if index < s.len() {
                        return s[index];
                    }
                    index -= s.len();
                }
                panic!("flat index out of range");
            }

            pub fn flat_set(&mut self, mut index: usize, value: f64) {
                for s in self.slices_mut() {
                    if index < s.len() {
                        s[index] = value;
                        return;
                    }
                    index -= s.len();
                }
                panic!("flat index out of range");
            }
        }
    };
}

param_set!(NetworkParams);
param_set!(Gradients);

impl NetworkParams {
    /// Weights i.i.d. `N(0, std²)` from the init stream of `seed` (all of `w1`
    /// row-major, then `w2`); biases zero.
    pub fn init(layout: Layout, seed: u64, std: f64) -> Self {
        let mut rng = StreamId::new(seed, Purpose::Init).rng();
        let mut p = Self::zeros(layout);
        for w in p.w1.as_mut_slice().iter_mut().chain(p.w2.as_mut_slice()) {
            let z: f64 = rng.sample(StandardNormal);
            *w = std * z;
        }
        p
    }
}

pub const INIT_STD: f64 = 0.01;

pub fn init_params(seed: u64) -> NetworkParams {
    NetworkParams::init(Layout::MNIST, seed, INIT_STD)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    pub input: Vec<f64>,
    pub hidden_pre: Vec<f64>,
    pub hidden_post: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ForwardTrace {
    /// Index of the largest probability, ties toward the lowest class.
    pub fn predicted(&self) -> usize {
        argmax(&self.probs)
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::ShapeMismatch { what, expected, got });
    }
    Ok(())
}

pub fn forward(
    params: &NetworkParams,
    act: Activation,
    input: &[f64],
    mask: Option<&[f64]>,
) -> Result<ForwardTrace> {
    let layout = params.layout();
    check_len("input", layout.input, input.len())?;
    if let Some(m) = mask {
        check_len("dropout mask", layout.hidden, m.len())?;
    }
    let (hidden_pre, hidden_post, logits) = layers(params, act, input, mask);
    Ok(ForwardTrace {
        input: input.to_vec(),
        hidden_pre,
        hidden_post,
        probs: softmax(&logits),
    })
}

/// Hidden pre-activations, masked hidden outputs and logits; shapes unchecked.
fn layers(params: &NetworkParams, act: Activation, input: &[f64], mask: Option<&[f64]>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hidden_pre = params.w1.affine(input, &params.b1);
    let mut hidden_post = apply_activation(act, &hidden_pre);
    if let Some(m) = mask {
        for (h, k) in hidden_post.iter_mut().zip(m) {
            *h *= k;
        }
    }
    let logits = params.w2.affine(&hidden_post, &params.b2);
    (hidden_pre, hidden_post, logits)
}

/// Loss-gradient at the two pre-activation layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Deltas {
    /// `probs - one_hot(label)`.
    pub output: Vec<f64>,
    /// Back-propagated through `w2`, the mask and the activation derivative.
    pub hidden: Vec<f64>,
}

pub fn deltas(
    params: &NetworkParams,
    act: Activation,
    trace: &ForwardTrace,
    label: usize,
    mask: Option<&[f64]>,
) -> Result<Deltas> {
    let layout = params.layout();
    check_len("trace probs", layout.output, trace.probs.len())?;
    check_len("trace hidden", layout.hidden, trace.hidden_pre.len())?;
    if label >= layout.output {
        return Err(Error::ShapeMismatch {
            what: "label index",
            expected: layout.output,
            got: label,
        });
    }
    if let Some(m) = mask {
        check_len("dropout mask", layout.hidden, m.len())?;
    }
    let mut output = trace.probs.clone();
    output[label] -= 1.0;

    let mut hidden = vec![0.0; layout.hidden];
    for (k, &d) in output.iter().enumerate() {
        for (h, &w) in hidden.iter_mut().zip(params.w2.row(k)) {
            *h += w * d;
        }
    }
    for (j, h) in hidden.iter_mut().enumerate() {
        if let Some(m) = mask {
            *h *= m[j];
        }
        *h *= act.derivative(trace.hidden_pre[j]);
    }
    Ok(Deltas { output, hidden })
}

/// Writes the outer-product gradient of one (trace, deltas) pair.
pub(crate) fn write_gradient(grads: &mut Gradients, trace: &ForwardTrace, d: &Deltas) {
    let cols = grads.w1.cols();
    for (row, &hd) in grads.w1.as_mut_slice().chunks_exact_mut(cols).zip(&d.hidden) {
        for (g, &x) in row.iter_mut().zip(&trace.input) {
            *g = hd * x;
        }
    }
    grads.b1.copy_from_slice(&d.hidden);
    let cols = grads.w2.cols();
    for (row, &od) in grads.w2.as_mut_slice().chunks_exact_mut(cols).zip(&d.output) {
        for (g, &h) in row.iter_mut().zip(&trace.hidden_post) {
            *g = od * h;
        }
    }
    grads.b2.copy_from_slice(&d.output);
}

/// Exact gradient of `cross_entropy(forward(..).probs, label)`.
pub fn backward(
    params: &NetworkParams,
    act: Activation,
    trace: &ForwardTrace,
    label: usize,
    mask: Option<&[f64]>,
) -> Result<Gradients> {
    let layout = params.layout();
    check_len("trace input", layout.input, trace.input.len())?;
    let d = deltas(params, act, trace, label, mask)?;
    let mut grads = Gradients::zeros(layout);
    write_gradient(&mut grads, trace, &d);
    Ok(grads)
}

/// `params - lr * grads`, in place.
pub fn apply_sgd(params: &mut NetworkParams, grads: &Gradients, lr: f64) {
    for (p, g) in params.slices_mut().into_iter().zip(grads.slices()) {
        for (w, d) in p.iter_mut().zip(g) {
            *w -= lr * d;
        }
    }
}

pub fn sgd_step(params: &NetworkParams, grads: &Gradients, lr: f64) -> NetworkParams {
    let mut next = params.clone();
    apply_sgd(&mut next, grads, lr);
    next
}

pub fn loss(
    params: &NetworkParams,
    act: Activation,
    input: &[f64],
    label: usize,
    mask: Option<&[f64]>,
) -> Result<f64> {
    Ok(cross_entropy(&forward(params, act, input, mask)?.probs, label))
}

/// Absolute differences below this are not amplified by tiny denominators.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat index (w1, b1, w2, b2 order) of the worst parameter.
    pub worst_index: usize,
    pub checked: usize,
    /// Parameters skipped because their hidden unit sits within a ReLU kink.
    pub kink_excluded: usize,
}

/// Cross-entropy change relative to fixed base logits.
///
/// The loss itself is near ln 10, so differencing two loss values loses about
/// 4e-16 absolutely, which swamps gradients below ~1e-5 at h = 1e-5. Writing
/// `L(z') - L(z) = ln(1 + sum_i p_i expm1(z'_i - z_i)) - (z'_y - z_y)` keeps
/// the error at the scale of the logit differences instead.
struct LossShift {
    logits: Vec<f64>,
    probs: Vec<f64>,
    label: usize,
}

impl LossShift {
    fn new(logits: Vec<f64>, label: usize) -> Self {
        let probs = softmax(&logits);
        LossShift { logits, probs, label }
    }

    fn loss_change(&self, shifted: &[f64]) -> f64 {
        let mut s = 0.0;
        for ((p, z), z2) in self.probs.iter().zip(&self.logits).zip(shifted) {
            s += p * (z2 - z).exp_m1();
        }
        s.ln_1p() - (shifted[self.label] - self.logits[self.label])
    }
}

/// Compares `analytic` against central differences of the loss over every
/// parameter. For ReLU, the `w1` row and `b1` entry of any hidden unit whose
/// pre-activation can cross 0 under a perturbation of `h` are skipped.
pub fn grad_check_against(
    params: &NetworkParams,
    act: Activation,
    input: &[f64],
    label: usize,
    mask: Option<&[f64]>,
    h: f64,
    analytic: &Gradients,
) -> Result<GradCheckReport> {
    let layout = params.layout();
    let trace = forward(params, act, input, mask)?;
    let reach = h * input.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let kinked: Vec<bool> = trace
        .hidden_pre
        .iter()
        .map(|p| act.is_relu() && p.abs() <= reach)
        .collect();
    let w1_len = layout.hidden * layout.input;
    let unit_of = |i: usize| -> Option<usize> {
        if i < w1_len {
            Some(i / layout.input)
        } else if i < w1_len + layout.hidden {
            Some(i - w1_len)
        } else {
            None
        }
    };

    let shift = LossShift::new(layers(params, act, input, mask).2, label);
    let mut probe = params.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        checked: 0,
        kink_excluded: 0,
    };
    for i in 0..layout.num_params() {
        if unit_of(i).is_some_and(|j| kinked[j]) {
            report.kink_excluded += 1;
            continue;
        }
        let orig = params.flat_get(i);
        probe.flat_set(i, orig + h);
        let up = shift.loss_change(&layers(&probe, act, input, mask).2);
        probe.flat_set(i, orig - h);
        let down = shift.loss_change(&layers(&probe, act, input, mask).2);
        probe.flat_set(i, orig);

        let numeric = (up - down) / (2.0 * h);
        let a = analytic.flat_get(i);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        report.checked += 1;
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
    }
    Ok(report)
}

/// Worst relative error between [`backward`] and central differences.
pub fn grad_check(params: &NetworkParams, act: Activation, input: &[f64], label: usize, h: f64) -> Result<f64> {
    let trace = forward(params, act, input, None)?;
    let analytic = backward(params, act, &trace, label, None)?;
    Ok(grad_check_against(params, act, input, label, None, h, &analytic)?.max_rel_error)
}
