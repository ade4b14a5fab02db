//! A semi-recurrent-free feed-forward sigmoid network with positive
//! biases folded into the weight matrices.
//!
//! Layer `l` computes `a^l_i = φ(W^l_ij a^{l-1}_j)` where every layer is
//! extended by an always-on unit `a^l_{n+1} = 1` whose incoming weight is
//! the negative bias. All biases start at a positive floor, so neurons
//! are quiescent in the absence of input: a zero input vector drives
//! every layer's activations below `φ(−b_min)` and the whole network
//! sits in a null dynamical state while remaining fully operational.
//!
//! Training is plain per-sample gradient descent on squared error over
//! output bits, stopping as soon as every sample decodes correctly under
//! the bit-decision threshold. The bias floor is enforced at
//! initialization only.
//!
//! `exp` comes from `libm` in every configuration so that forward passes,
//! checkpoints, and loss histories are bit-identical across platforms.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{validate_output, InputFrame, OutputCheck, OutputFrame, OUTPUT_BITS};
use crate::machine::{oracle_frame, DispatchResult};

/// Default layer widths: 19 input bits, one hidden layer, 8 output bits.
/// A single narrow hidden layer reliably escapes the quiescent start and
/// keeps individual weights load-bearing.
pub const DEFAULT_WIDTHS: [usize; 3] = [19, 10, 8];
/// Default positive bias magnitude at initialization.
pub const DEFAULT_BIAS_FLOOR: f64 = 5.0;
/// Default per-layer quiescence threshold.
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Default half-width of the uniform non-bias weight initialization.
/// Wide enough that the weights of input bits that never vary in
/// training stay load-bearing: a later flip of those bits genuinely
/// disturbs the network instead of vanishing into noise.
pub const DEFAULT_INIT_RANGE: f64 = 3.0;

/// The logistic nonlinearity `1 / (1 + e^{-x})`.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetError {
    /// Fewer than two layers, or a zero-width layer.
    BadWidths,
    /// Input length does not match the first layer.
    ShapeMismatch { expected: usize, got: usize },
    /// Checkpoint text did not parse.
    Checkpoint(&'static str),
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetError::BadWidths => write!(f, "network needs >= 2 nonzero-width layers"),
            NetError::ShapeMismatch { expected, got } => {
                write!(f, "input length {got}, layer expects {expected}")
            }
            NetError::Checkpoint(what) => write!(f, "bad checkpoint: {what}"),
        }
    }
}

impl core::error::Error for NetError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrainError {
    NoSamples,
    /// A sample's input or target does not match the network shape.
    SampleShape { index: usize },
    /// Loss became non-finite.
    Divergence { epoch: usize },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::NoSamples => write!(f, "empty training set"),
            TrainError::SampleShape { index } => write!(f, "sample {index} has wrong shape"),
            TrainError::Divergence { epoch } => write!(f, "non-finite loss at epoch {epoch}"),
        }
    }
}

impl core::error::Error for TrainError {}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

/// Weight state of the network. `weights[l]` maps layer `l+1` activations
/// to layer `l+2`, stored row-major with `widths[l] + 1` columns per
/// neuron; the trailing column is the folded negative bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    widths: Vec<usize>,
    weights: Vec<Vec<f64>>,
    bias_floor: f64,
    seed: u64,
}

impl Network {
    /// Fresh network: non-bias weights uniform in ±[`DEFAULT_INIT_RANGE`],
    /// every folded bias at `-bias_floor` so the network is quiescent at
    /// rest.
    pub fn new(widths: &[usize], bias_floor: f64, seed: u64) -> Result<Self, NetError> {
        Network::with_init_range(widths, bias_floor, DEFAULT_INIT_RANGE, seed)
    }

    /// Fresh network with an explicit half-width for the uniform non-bias
    /// weight initialization. Input bits that never vary during training
    /// keep these initial weights, so the range controls how hard a later
    /// context-bit change hits the trained network.
    pub fn with_init_range(
        widths: &[usize],
        bias_floor: f64,
        init_range: f64,
        seed: u64,
    ) -> Result<Self, NetError> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(NetError::BadWidths);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(widths.len() - 1);
        for l in 0..widths.len() - 1 {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let mut w = vec![0.0; n_out * (n_in + 1)];
            for i in 0..n_out {
                for j in 0..n_in {
                    w[i * (n_in + 1) + j] = rng.gen_range(-init_range..=init_range);
                }
                w[i * (n_in + 1) + n_in] = -bias_floor;
            }
            weights.push(w);
        }
        Ok(Network {
            widths: widths.to_vec(),
            weights,
            bias_floor,
            seed,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn bias_floor(&self) -> f64 {
        self.bias_floor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("at least two layers")
    }

    /// One forward pass; the trace holds the computed layers (hidden and
    /// output), each strictly inside (0,1).
    pub fn forward(&self, input: &[f64]) -> Result<ActivationTrace, NetError> {
        if input.len() != self.widths[0] {
            return Err(NetError::ShapeMismatch {
                expected: self.widths[0],
                got: input.len(),
            });
        }
        let mut layers = Vec::with_capacity(self.weights.len());
        let mut prev: Vec<f64> = input.to_vec();
        for (l, w) in self.weights.iter().enumerate() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let mut act = vec![0.0; n_out];
            for (i, slot) in act.iter_mut().enumerate() {
                let row = &w[i * (n_in + 1)..(i + 1) * (n_in + 1)];
                let mut z = row[n_in]; // always-on unit
                for j in 0..n_in {
                    z += row[j] * prev[j];
                }
                *slot = sigmoid(z);
            }
            prev = act.clone();
            layers.push(act);
        }
        Ok(ActivationTrace { layers })
    }

    /// Forward pass on an encoded frame.
    pub fn forward_frame(&self, frame: &InputFrame) -> Result<ActivationTrace, NetError> {
        self.forward(&frame_bits(frame))
    }

    /// Per-sample gradient descent until every sample decodes correctly
    /// under the threshold or the epoch budget runs out. Deterministic
    /// for a given seed: the sample order is reshuffled each epoch from
    /// a stream seeded by `cfg.seed`.
    pub fn train(
        &mut self,
        samples: &[TrainSample],
        cfg: &TrainConfig,
    ) -> Result<TrainReport, TrainError> {
        if samples.is_empty() {
            return Err(TrainError::NoSamples);
        }
        for (i, s) in samples.iter().enumerate() {
            if s.input.len() != self.input_width() || s.target.len() != self.output_width() {
                return Err(TrainError::SampleShape { index: i });
            }
        }
        let Loss::SquaredError = cfg.loss;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut history = Vec::new();
        let mut converged_epoch = None;

        // epoch 0 records the untrained state
        let (loss, accuracy) = self.evaluate(samples, cfg.threshold);
        history.push(EpochRecord { epoch: 0, loss, accuracy });
        if accuracy == 1.0 {
            converged_epoch = Some(0);
        }

        if converged_epoch.is_none() {
            for epoch in 1..=cfg.epochs {
                shuffle(&mut order, &mut rng);
                for &idx in &order {
                    self.sgd_step(&samples[idx], cfg.learning_rate);
                }
                let (loss, accuracy) = self.evaluate(samples, cfg.threshold);
                if !loss.is_finite() {
                    return Err(TrainError::Divergence { epoch });
                }
                history.push(EpochRecord { epoch, loss, accuracy });
                if accuracy == 1.0 {
                    converged_epoch = Some(epoch);
                    break;
                }
            }
        }

        let final_accuracy = history.last().map(|r| r.accuracy).unwrap_or(0.0);
        Ok(TrainReport {
            history,
            converged_epoch,
            final_accuracy,
        })
    }

    /// Mean squared error and decoded accuracy over a sample set.
    pub fn evaluate(&self, samples: &[TrainSample], threshold: f64) -> (f64, f64) {
        let mut sse = 0.0;
        let mut bits = 0usize;
        let mut correct = 0usize;
        for s in samples {
            let trace = self.forward(&s.input).expect("validated shapes");
            let out = trace.output();
            for (a, t) in out.iter().zip(&s.target) {
                let d = a - t;
                sse += d * d;
            }
            bits += out.len();
            if decoded_bits(out, threshold)
                .iter()
                .zip(&s.target)
                .all(|(&b, &t)| b == (t > 0.5))
            {
                correct += 1;
            }
        }
        (sse / bits as f64, correct as f64 / samples.len() as f64)
    }

    fn sgd_step(&mut self, sample: &TrainSample, learning_rate: f64) {
        let (grads, _) = self.backprop(sample);
        for (w, g) in self.weights.iter_mut().zip(&grads) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= learning_rate * gi;
            }
        }
    }

    /// Backpropagation of ½·Σ(a−t)² for one sample; returns gradients in
    /// the weight layout plus the loss.
    fn backprop(&self, sample: &TrainSample) -> (Vec<Vec<f64>>, f64) {
        // forward, keeping every layer including the input
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.widths.len());
        acts.push(sample.input.clone());
        for (l, w) in self.weights.iter().enumerate() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let prev = &acts[l];
            let mut act = vec![0.0; n_out];
            for (i, slot) in act.iter_mut().enumerate() {
                let row = &w[i * (n_in + 1)..(i + 1) * (n_in + 1)];
                let mut z = row[n_in];
                for j in 0..n_in {
                    z += row[j] * prev[j];
                }
                *slot = sigmoid(z);
            }
            acts.push(act);
        }

        let output = acts.last().expect("output layer");
        let mut loss = 0.0;
        // delta = dL/dz at the output
        let mut delta: Vec<f64> = output
            .iter()
            .zip(&sample.target)
            .map(|(&a, &t)| {
                let d = a - t;
                loss += 0.5 * d * d;
                d * a * (1.0 - a)
            })
            .collect();

        let mut grads: Vec<Vec<f64>> = self
            .weights
            .iter()
            .map(|w| vec![0.0; w.len()])
            .collect();

        for l in (0..self.weights.len()).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let prev = &acts[l];
            let g = &mut grads[l];
            for (i, &d) in delta.iter().enumerate().take(n_out) {
                let base = i * (n_in + 1);
                for j in 0..n_in {
                    g[base + j] = d * prev[j];
                }
                g[base + n_in] = d; // always-on unit
            }
            if l > 0 {
                let w = &self.weights[l];
                let mut next_delta = vec![0.0; n_in];
                for (j, nd) in next_delta.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..n_out {
                        acc += w[i * (n_in + 1) + j] * delta[i];
                    }
                    *nd = acc * prev[j] * (1.0 - prev[j]);
                }
                delta = next_delta;
            }
        }
        (grads, loss)
    }

    /// Loss of ½·Σ(a−t)² for one sample at the current weights.
    fn sample_loss(&self, sample: &TrainSample) -> f64 {
        let trace = self.forward(&sample.input).expect("validated shapes");
        trace
            .output()
            .iter()
            .zip(&sample.target)
            .map(|(&a, &t)| 0.5 * (a - t) * (a - t))
            .sum()
    }

    /// Checkpoint: header (widths, bias floor, seed) plus row-major weight
    /// values in decimal text, one neuron row per line.
    pub fn checkpoint_text(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        out.push_str("nullstate-net v1\n");
        out.push_str("widths");
        for w in &self.widths {
            let _ = write!(out, " {w}");
        }
        out.push('\n');
        let _ = writeln!(out, "bias_floor {:?}", self.bias_floor);
        let _ = writeln!(out, "seed {}", self.seed);
        for (l, w) in self.weights.iter().enumerate() {
            let n_in = self.widths[l];
            let _ = writeln!(out, "layer {}", l + 2);
            for row in w.chunks(n_in + 1) {
                let mut line = String::new();
                for v in row {
                    if !line.is_empty() {
                        line.push(' ');
                    }
                    let _ = write!(line, "{v:?}");
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }

    pub fn from_checkpoint_text(text: &str) -> Result<Self, NetError> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        if lines.next() != Some("nullstate-net v1") {
            return Err(NetError::Checkpoint("bad magic line"));
        }
        let widths: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("widths "))
            .ok_or(NetError::Checkpoint("missing widths"))?
            .split(' ')
            .map(|t| t.parse().map_err(|_| NetError::Checkpoint("bad width")))
            .collect::<Result<_, _>>()?;
        if widths.len() < 2 || widths.contains(&0) {
            return Err(NetError::BadWidths);
        }
        let bias_floor: f64 = lines
            .next()
            .and_then(|l| l.strip_prefix("bias_floor "))
            .and_then(|t| t.parse().ok())
            .ok_or(NetError::Checkpoint("missing bias_floor"))?;
        let seed: u64 = lines
            .next()
            .and_then(|l| l.strip_prefix("seed "))
            .and_then(|t| t.parse().ok())
            .ok_or(NetError::Checkpoint("missing seed"))?;
        let mut weights = Vec::with_capacity(widths.len() - 1);
        for l in 0..widths.len() - 1 {
            let header = lines.next().ok_or(NetError::Checkpoint("missing layer"))?;
            if header != format!("layer {}", l + 2) {
                return Err(NetError::Checkpoint("unexpected layer header"));
            }
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let mut w = Vec::with_capacity(n_out * (n_in + 1));
            for _ in 0..n_out {
                let row = lines.next().ok_or(NetError::Checkpoint("missing row"))?;
                for tok in row.split(' ') {
                    let v: f64 = tok.parse().map_err(|_| NetError::Checkpoint("bad weight"))?;
                    w.push(v);
                }
            }
            if w.len() != n_out * (n_in + 1) {
                return Err(NetError::Checkpoint("row length mismatch"));
            }
            weights.push(w);
        }
        Ok(Network {
            widths,
            weights,
            bias_floor,
            seed,
        })
    }
}

fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

// ---------------------------------------------------------------------------
// Traces and null detection
// ---------------------------------------------------------------------------

/// Activations of the computed layers (hidden and output) for one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    layers: Vec<Vec<f64>>,
}

impl ActivationTrace {
    pub fn layers(&self) -> &[Vec<f64>] {
        &self.layers
    }

    pub fn output(&self) -> &[f64] {
        self.layers.last().expect("at least one computed layer")
    }

    /// Output bits under the decision threshold.
    pub fn thresholded(&self, theta: f64) -> Vec<bool> {
        decoded_bits(self.output(), theta)
    }

    /// The 8-bit output candidate, when the output layer is 8 wide.
    pub fn output_frame(&self, theta: f64) -> Option<OutputFrame> {
        let bits = self.thresholded(theta);
        (bits.len() == OUTPUT_BITS).then(|| OutputFrame::from_bits(&bits).expect("8 bits"))
    }
}

fn decoded_bits(output: &[f64], theta: f64) -> Vec<bool> {
    output.iter().map(|&a| a > theta).collect()
}

/// Quiescence verdict for one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NullVerdict {
    /// Layer `l` (hidden and output, in order) has all activations below ε.
    pub quiescent_layers: Vec<bool>,
    /// The gate verdict on the thresholded output, for 8-wide outputs.
    pub output_gate: Option<OutputCheck>,
    /// Null iff the final layer is quiescent or the output fails the gate.
    pub is_null: bool,
}

/// Flags each layer quiescent when its largest activation (always-on unit
/// excluded; it is appended virtually during the pass) stays below ε,
/// and combines that with the output well-formedness gate.
pub fn detect_null(trace: &ActivationTrace, epsilon: f64, theta: f64) -> NullVerdict {
    debug_assert!(epsilon > 0.0 && epsilon < 0.5);
    let quiescent_layers: Vec<bool> = trace
        .layers()
        .iter()
        .map(|layer| layer.iter().all(|&a| a < epsilon))
        .collect();
    let output_gate = trace.output_frame(theta).map(|f| validate_output(&f));
    let final_quiescent = quiescent_layers.last().copied().unwrap_or(true);
    let gate_failed = matches!(output_gate, Some(OutputCheck::Malformed(_)));
    NullVerdict {
        quiescent_layers,
        output_gate,
        is_null: final_quiescent || gate_failed,
    }
}

// ---------------------------------------------------------------------------
// Samples, configuration, reports
// ---------------------------------------------------------------------------

/// One input/target bit-vector pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl TrainSample {
    pub fn new(input_bits: &[bool], target_bits: &[bool]) -> Self {
        TrainSample {
            input: input_bits.iter().map(|&b| b as u8 as f64).collect(),
            target: target_bits.iter().map(|&b| b as u8 as f64).collect(),
        }
    }

    /// Builds the sample for one dispatch outcome: a well-formed output
    /// becomes its 8-bit pattern, a null state becomes the zero output
    /// vector (the network's form of no response).
    pub fn from_outcome(frame: &InputFrame, outcome: &DispatchResult) -> Self {
        let target = match outcome {
            DispatchResult::Output(out) => out.to_bits().expect("well-formed output"),
            DispatchResult::Null(_) => [false; OUTPUT_BITS],
        };
        TrainSample::new(&frame.to_bits(), &target)
    }

    pub fn target_bits(&self) -> Vec<bool> {
        self.target.iter().map(|&t| t > 0.5).collect()
    }
}

/// Loss choice; squared error on output bits is the only implemented one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    #[default]
    SquaredError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub loss: Loss,
    /// Bit-decision threshold θ.
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1.0,
            epochs: 3000,
            seed: 0,
            loss: Loss::SquaredError,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// One record per epoch, starting with the untrained epoch 0.
    pub history: Vec<EpochRecord>,
    /// First epoch at which every sample decoded correctly.
    pub converged_epoch: Option<usize>,
    pub final_accuracy: f64,
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

/// Central-difference step.
const GRAD_CHECK_STEP: f64 = 1e-5;

/// Compares the analytic gradient against central finite differences for
/// every weight; returns the maximum relative error.
pub fn grad_check(net: &Network, sample: &TrainSample) -> f64 {
    let (analytic, _) = net.backprop(sample);
    let mut probe = net.clone();
    let mut max_rel = 0.0f64;
    for (l, layer) in net.weights.iter().enumerate() {
        for (k, &original) in layer.iter().enumerate() {
            probe.weights[l][k] = original + GRAD_CHECK_STEP;
            let plus = probe.sample_loss(sample);
            probe.weights[l][k] = original - GRAD_CHECK_STEP;
            let minus = probe.sample_loss(sample);
            probe.weights[l][k] = original;
            let numeric = (plus - minus) / (2.0 * GRAD_CHECK_STEP);
            let a = analytic[l][k];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    max_rel
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Encodes a frame as the network's 19-entry 0/1 input vector.
pub fn frame_bits(frame: &InputFrame) -> Vec<f64> {
    frame.to_bits().iter().map(|&b| b as u8 as f64).collect()
}

/// The square/verb curriculum: say and write the square of every digit
/// 0-9 under one context: 20 frames paired with their reference
/// dispatch outcomes (squares past the 5-bit output field target the
/// null output vector).
pub fn square_verb_pairs(context: crate::codec::ContextCode) -> Vec<(InputFrame, DispatchResult)> {
    use crate::codec::{FuncCode, VerbCode};
    let mut pairs = Vec::with_capacity(20);
    for verb in [VerbCode::SAY, VerbCode::WRITE] {
        for n in 0..=9u8 {
            let frame = InputFrame::new(context, verb, FuncCode::SQUARE, n, 0)
                .expect("digit operands");
            pairs.push((frame, oracle_frame(&frame)));
        }
    }
    pairs
}

/// [`square_verb_pairs`] as training samples.
pub fn square_verb_training_set(context: crate::codec::ContextCode) -> Vec<TrainSample> {
    square_verb_pairs(context)
        .iter()
        .map(|(frame, outcome)| TrainSample::from_outcome(frame, outcome))
        .collect()
}

/// Fraction of frames whose decoded network output matches the reference
/// outcome (null outcomes expect the zero output vector).
pub fn decoded_agreement(
    net: &Network,
    pairs: &[(InputFrame, DispatchResult)],
    theta: f64,
) -> f64 {
    let mut correct = 0usize;
    for (frame, outcome) in pairs {
        let trace = net.forward_frame(frame).expect("19-bit input");
        let got = trace.thresholded(theta);
        let want = match outcome {
            DispatchResult::Output(out) => out.to_bits().expect("well-formed").to_vec(),
            DispatchResult::Null(_) => vec![false; OUTPUT_BITS],
        };
        if got == want {
            correct += 1;
        }
    }
    correct as f64 / pairs.len().max(1) as f64
}
