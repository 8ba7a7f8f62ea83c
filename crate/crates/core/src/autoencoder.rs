//! Fully-connected autoencoder with ELU activations, trained by mini-batch Nadam.
//!
//! Batched passes store samples as matrix rows, so a layer is `Z = A Wᵀ + 1bᵀ`
//! with `W` of shape `out × in`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{gemm, io, DenseMatrix};

pub const MODEL_MAGIC: [u8; 8] = *b"CRAEMODL";

/// `x` for `x > 0`, `eˣ − 1` otherwise.
pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

pub fn elu_derivative(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Elu,
    /// Linear units; only used for diagnostics.
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Self::Elu => elu(x),
            Self::Identity => x,
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Self::Elu => elu_derivative(x),
            Self::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Neuron counts from input to output, bottleneck included.
    pub layer_sizes: Vec<usize>,
    /// Position of the bottleneck in `layer_sizes`.
    pub latent_index: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl NetworkSpec {
    pub fn new(layer_sizes: Vec<usize>, latent_index: usize) -> Result<Self> {
        let spec = Self {
            layer_sizes,
            latent_index,
            activation: Activation::Elu,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `input → hidden… → latent → …hidden reversed → input`.
    pub fn mirrored(input: usize, hidden: &[usize], latent: usize) -> Result<Self> {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(latent);
        sizes.extend(hidden.iter().rev());
        sizes.push(input);
        Self::new(sizes, hidden.len() + 1)
    }

    /// 1D slab network: `100 → 100 → 70 → 50 → 30 → 20 → 16 → P → … → 100`.
    pub fn slab1d(input: usize, latent: usize) -> Result<Self> {
        Self::mirrored(input, &[100, 70, 50, 30, 20, 16], latent)
    }

    /// 2D network: `N → 100 → 70 → 50 → 30 → 16 → 8 → P → … → N`. Also used
    /// for the SVD-autoencoder with `N` the number of retained POD modes.
    pub fn core2d(input: usize, latent: usize) -> Result<Self> {
        Self::mirrored(input, &[100, 70, 50, 30, 16, 8], latent)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.layer_sizes;
        if s.len() < 3 || s.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {s:?}")));
        }
        if self.latent_index == 0 || self.latent_index >= s.len() - 1 {
            return Err(Error::Config(format!(
                "latent index {} must be an interior layer of {s:?}",
                self.latent_index
            )));
        }
        if s[0] != s[s.len() - 1] {
            return Err(Error::Config(format!("input and output sizes differ in {s:?}")));
        }
        if self.latent_dim() >= self.input_dim() {
            return Err(Error::Config(format!("latent size must be below input size in {s:?}")));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn latent_dim(&self) -> usize {
        self.layer_sizes[self.latent_index]
    }

    /// Number of layers with trainable weights.
    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn n_parameters(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`.
    pub w: DenseMatrix,
    pub b: Vec<f64>,
}

/// Weights and biases of every layer. Gradients share this layout.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWeights {
    pub layers: Vec<Layer>,
}

impl NetworkWeights {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self {
            layers: spec
                .layer_sizes
                .windows(2)
                .map(|w| Layer {
                    w: DenseMatrix::zeros(w[1], w[0]),
                    b: vec![0.0; w[1]],
                })
                .collect(),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng>(spec: &NetworkSpec, rng: &mut R) -> Self {
        let mut weights = Self::zeros(spec);
        for layer in &mut weights.layers {
            let (fan_out, fan_in) = layer.w.shape();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in layer.w.as_mut_slice() {
                *v = rng.random_range(-limit..limit);
            }
        }
        weights
    }

    pub fn check(&self, spec: &NetworkSpec) -> Result<()> {
        check_dim("network layer count", spec.n_layers(), self.layers.len())?;
        for (layer, sizes) in self.layers.iter().zip(spec.layer_sizes.windows(2)) {
            check_dim("layer input width", sizes[0], layer.w.cols())?;
            check_dim("layer output width", sizes[1], layer.w.rows())?;
            check_dim("layer bias length", sizes[1], layer.b.len())?;
        }
        if !self.is_finite() {
            return Err(Error::Numeric("network weights are not finite".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.is_finite() && l.b.iter().all(|v| v.is_finite()))
    }

    /// Parameter tensors in a fixed order: `W₁, b₁, W₂, b₂, …`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.w.as_slice(), l.b.as_slice()])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.w.as_mut_slice(), l.b.as_mut_slice()])
            .collect()
    }

    pub fn n_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Flat parameter `index` in the order of [`Self::tensors`].
    pub fn parameter_mut(&mut self, mut index: usize) -> &mut f64 {
        for t in self.tensors_mut() {
            if index < t.len() {
                return &mut t[index];
            }
            index -= t.len();
        }
        panic!("parameter index out of range");
    }

    pub fn parameter(&self, mut index: usize) -> f64 {
        for t in self.tensors() {
            if index < t.len() {
                return t[index];
            }
            index -= t.len();
        }
        panic!("parameter index out of range");
    }
}

/// Single global min-max map onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub data_min: f64,
    pub data_max: f64,
}

impl Scaler {
    pub fn identity() -> Self {
        Self {
            data_min: 0.0,
            data_max: 1.0,
        }
    }

    pub fn fit(data: &[f64]) -> Result<Self> {
        let (lo, hi) = data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain("scaler: data is empty or not finite".into()));
        }
        if !(hi > lo) {
            return Err(Error::Domain(format!("scaler: data range [{lo}, {hi}] is degenerate")));
        }
        Ok(Self {
            data_min: lo,
            data_max: hi,
        })
    }

    fn range(&self) -> f64 {
        self.data_max - self.data_min
    }

    pub fn scale(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| (v - self.data_min) / self.range()).collect()
    }

    pub fn unscale(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v * self.range() + self.data_min).collect()
    }

    /// Jacobian factor of `unscale`.
    pub fn unscale_factor(&self) -> f64 {
        self.range()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NadamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for NadamHyper {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(flatten)]
    pub optimizer: NadamHyper,
    pub seed: u64,
}

impl TrainConfig {
    pub fn slab1d(seed: u64) -> Self {
        Self {
            epochs: 10_000,
            batch_size: 100,
            optimizer: NadamHyper::default(),
            seed,
        }
    }

    pub fn core2d(seed: u64) -> Self {
        Self {
            epochs: 30_000,
            batch_size: 50,
            optimizer: NadamHyper::default(),
            seed,
        }
    }
}

/// First and second moments per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct NadamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// Number of steps taken.
    pub t: u32,
}

impl NadamState {
    pub fn new(weights: &NetworkWeights) -> Self {
        let zeros: Vec<Vec<f64>> = weights.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }
}

/// One Nadam step on a flat parameter slice at step number `t ≥ 1`.
pub fn nadam_update(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], t: u32, hyper: &NadamHyper) {
    let NadamHyper {
        learning_rate: lr,
        beta1: b1,
        beta2: b2,
        epsilon: eps,
    } = *hyper;
    let t = t as i32;
    let c1_now = 1.0 - b1.powi(t);
    let c1_next = 1.0 - b1.powi(t + 1);
    let c2 = 1.0 - b2.powi(t);
    for (((p, &g), mi), vi) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
        *mi = b1 * *mi + (1.0 - b1) * g;
        *vi = b2 * *vi + (1.0 - b2) * g * g;
        let m_hat = b1 * *mi / c1_next + (1.0 - b1) * g / c1_now;
        let v_hat = *vi / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

pub fn nadam_step(
    weights: &mut NetworkWeights,
    grads: &NetworkWeights,
    state: &mut NadamState,
    hyper: &NadamHyper,
) -> Result<()> {
    if !grads.is_finite() {
        let bad = grads
            .tensors()
            .iter()
            .enumerate()
            .filter(|(_, t)| t.iter().any(|v| !v.is_finite()))
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        return Err(Error::Training(format!(
            "non-finite gradient at step {} in parameter tensors {bad:?}",
            state.t + 1
        )));
    }
    state.t += 1;
    let t = state.t;
    for (((p, g), m), v) in weights
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        nadam_update(p, g, m, v, t, hyper);
    }
    Ok(())
}

fn apply_layers(weights: &NetworkWeights, spec: &NetworkSpec, range: std::ops::Range<usize>, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    for layer in &weights.layers[range] {
        a = (0..layer.w.rows())
            .map(|i| {
                let z = layer.b[i] + layer.w.row(i).iter().zip(&a).map(|(w, x)| w * x).sum::<f64>();
                spec.activation.apply(z)
            })
            .collect();
    }
    a
}

/// Output of a single forward pass with per-layer activations.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Pre-activations, one per trainable layer.
    pub pre: Vec<Vec<f64>>,
    /// Post-activations, input first.
    pub post: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("trace has the input layer")
    }
}

pub fn forward(weights: &NetworkWeights, spec: &NetworkSpec, x: &[f64]) -> Result<ForwardTrace> {
    check_dim("autoencoder input", spec.input_dim(), x.len())?;
    let mut trace = ForwardTrace {
        pre: Vec::with_capacity(spec.n_layers()),
        post: vec![x.to_vec()],
    };
    for layer in &weights.layers {
        let a = trace.output();
        let z: Vec<f64> = (0..layer.w.rows())
            .map(|i| layer.b[i] + layer.w.row(i).iter().zip(a).map(|(w, x)| w * x).sum::<f64>())
            .collect();
        trace.post.push(z.iter().map(|&v| spec.activation.apply(v)).collect());
        trace.pre.push(z);
    }
    Ok(trace)
}

/// Encoder half: layers up to the bottleneck.
pub fn encode(weights: &NetworkWeights, spec: &NetworkSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_dim("autoencoder input", spec.input_dim(), x.len())?;
    Ok(apply_layers(weights, spec, 0..spec.latent_index, x))
}

/// Decoder half: layers after the bottleneck.
pub fn decode(weights: &NetworkWeights, spec: &NetworkSpec, latent: &[f64]) -> Result<Vec<f64>> {
    check_dim("autoencoder latent", spec.latent_dim(), latent.len())?;
    Ok(apply_layers(weights, spec, spec.latent_index..spec.n_layers(), latent))
}

struct BatchCache {
    /// Pre-activations per layer, samples as rows.
    pre: Vec<DenseMatrix>,
    /// Post-activations, input first.
    post: Vec<DenseMatrix>,
}

fn forward_rows(weights: &NetworkWeights, spec: &NetworkSpec, x: DenseMatrix) -> BatchCache {
    let n = x.rows();
    let mut cache = BatchCache {
        pre: Vec::with_capacity(weights.layers.len()),
        post: vec![x],
    };
    for layer in &weights.layers {
        let mut z = DenseMatrix::zeros(n, layer.w.rows());
        for s in 0..n {
            z.row_mut(s).copy_from_slice(&layer.b);
        }
        gemm(1.0, cache.post.last().unwrap(), false, &layer.w, true, 1.0, &mut z);
        let mut a = z.clone();
        a.as_mut_slice().iter_mut().for_each(|v| *v = spec.activation.apply(*v));
        cache.pre.push(z);
        cache.post.push(a);
    }
    cache
}

/// Mean over samples of `‖x − x̂‖²` and its gradient, for samples stored as rows.
fn loss_and_gradient_rows(weights: &NetworkWeights, spec: &NetworkSpec, x: DenseMatrix) -> (f64, NetworkWeights) {
    let n = x.rows();
    let cache = forward_rows(weights, spec, x);
    let input = &cache.post[0];
    let output = cache.post.last().unwrap();
    let inv_n = 1.0 / n as f64;

    let mut loss = 0.0;
    let mut g = DenseMatrix::zeros(n, output.cols());
    for ((gi, &o), &t) in g.as_mut_slice().iter_mut().zip(output.as_slice()).zip(input.as_slice()) {
        let d = o - t;
        loss += d * d;
        *gi = 2.0 * d * inv_n;
    }
    loss *= inv_n;

    let mut grads = NetworkWeights::zeros(spec);
    for l in (0..weights.layers.len()).rev() {
        let mut dz = g;
        for (d, &z) in dz.as_mut_slice().iter_mut().zip(cache.pre[l].as_slice()) {
            *d *= spec.activation.derivative(z);
        }
        let gl = &mut grads.layers[l];
        gemm(1.0, &dz, true, &cache.post[l], false, 0.0, &mut gl.w);
        for s in 0..n {
            for (b, d) in gl.b.iter_mut().zip(dz.row(s)) {
                *b += d;
            }
        }
        let w = &weights.layers[l].w;
        g = DenseMatrix::zeros(n, w.cols());
        if l > 0 {
            gemm(1.0, &dz, false, w, false, 0.0, &mut g);
        }
    }
    (loss, grads)
}

/// Mean over the batch columns of the squared reconstruction error.
pub fn loss_mse(weights: &NetworkWeights, spec: &NetworkSpec, batch: &DenseMatrix) -> Result<f64> {
    check_dim("autoencoder batch rows", spec.input_dim(), batch.rows())?;
    let cache = forward_rows(weights, spec, batch.transpose());
    let out = cache.post.last().unwrap();
    let total: f64 = out
        .as_slice()
        .iter()
        .zip(cache.post[0].as_slice())
        .map(|(o, x)| (o - x) * (o - x))
        .sum();
    Ok(total / batch.cols() as f64)
}

/// Exact gradient of [`loss_mse`] with respect to every weight and bias.
/// `batch` holds one scaled sample per column.
pub fn backprop_mse(weights: &NetworkWeights, spec: &NetworkSpec, batch: &DenseMatrix) -> Result<NetworkWeights> {
    check_dim("autoencoder batch rows", spec.input_dim(), batch.rows())?;
    weights.check(spec)?;
    if batch.cols() == 0 {
        return Err(Error::Domain("backprop_mse: empty batch".into()));
    }
    Ok(loss_and_gradient_rows(weights, spec, batch.transpose()).1)
}

/// A trained network together with the scaling it was trained under.
/// `encode` and `decode` work in physical (unscaled) units.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    pub spec: NetworkSpec,
    pub weights: NetworkWeights,
    pub scaler: Scaler,
    pub config: TrainConfig,
    pub loss_history: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    spec: NetworkSpec,
    scaler: Scaler,
    seed: u64,
    config: TrainConfig,
    final_loss: Option<f64>,
}

impl Autoencoder {
    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.spec.latent_dim()
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        encode(&self.weights, &self.spec, &self.scaler.scale(x))
    }

    pub fn decode(&self, latent: &[f64]) -> Result<Vec<f64>> {
        Ok(self.scaler.unscale(&decode(&self.weights, &self.spec, latent)?))
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decode(&self.encode(x)?)
    }

    /// Per-variable `(min, max)` of the latent codes of the columns of `data`.
    pub fn latent_ranges(&self, data: &DenseMatrix) -> Result<Vec<(f64, f64)>> {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.latent_dim()];
        for j in 0..data.cols() {
            for (r, v) in ranges.iter_mut().zip(self.encode(&data.column(j))?) {
                *r = (r.0.min(v), r.1.max(v));
            }
        }
        Ok(ranges)
    }

    /// Magic, `u32` header length, JSON header, then `W` and `b` (as a row)
    /// of every layer in the binary matrix format.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&ModelHeader {
            spec: self.spec.clone(),
            scaler: self.scaler,
            seed: self.config.seed,
            config: self.config.clone(),
            final_loss: self.loss_history.last().copied(),
        })?;
        let len = u32::try_from(header.len()).map_err(|_| Error::Format("model header too long".into()))?;
        w.write_all(&MODEL_MAGIC)?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(&header)?;
        for layer in &self.weights.layers {
            io::write_matrix(&mut w, &layer.w)?;
            io::write_matrix(&mut w, &DenseMatrix::from_vec(1, layer.b.len(), layer.b.clone())?)?;
        }
        Ok(())
    }

    /// Reads a model; the loss history is not stored and comes back empty.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if magic != MODEL_MAGIC {
            return Err(Error::Format("bad model magic".into()));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let mut header = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut header)?;
        let header: ModelHeader = serde_json::from_slice(&header)?;
        header.spec.validate()?;
        let mut layers = Vec::with_capacity(header.spec.n_layers());
        for _ in 0..header.spec.n_layers() {
            let w = io::read_matrix(&mut r)?;
            let b = io::read_matrix(&mut r)?.into_vec();
            layers.push(Layer { w, b });
        }
        let weights = NetworkWeights { layers };
        weights.check(&header.spec)?;
        Ok(Self {
            spec: header.spec,
            weights,
            scaler: header.scaler,
            config: header.config,
            loss_history: Vec::new(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    /// `epoch,loss` with epochs counted from 1.
    pub fn save_loss_history(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "loss"])?;
        for (e, loss) in self.loss_history.iter().enumerate() {
            w.write_record([(e + 1).to_string(), format!("{loss:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trains on the columns of `snapshots` (raw, unscaled). The per-epoch loss is
/// the sample-weighted mean of the mini-batch losses seen during the epoch.
pub fn train(spec: &NetworkSpec, snapshots: &DenseMatrix, config: &TrainConfig) -> Result<Autoencoder> {
    spec.validate()?;
    check_dim("training snapshot length", spec.input_dim(), snapshots.rows())?;
    let n_samples = snapshots.cols();
    if config.batch_size == 0 || config.batch_size > n_samples {
        return Err(Error::Config(format!(
            "batch size {} must lie in 1..={n_samples}",
            config.batch_size
        )));
    }
    let scaler = Scaler::fit(snapshots.as_slice())?;
    let mut scaled = snapshots.transpose();
    scaled
        .as_mut_slice()
        .iter_mut()
        .for_each(|v| *v = (*v - scaler.data_min) / scaler.unscale_factor());

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = NetworkWeights::glorot(spec, &mut rng);
    let mut state = NadamState::new(&weights);
    let mut order: Vec<usize> = (0..n_samples).collect();
    let mut loss_history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let mut batch = DenseMatrix::zeros(chunk.len(), spec.input_dim());
            for (row, &s) in chunk.iter().enumerate() {
                batch.row_mut(row).copy_from_slice(scaled.row(s));
            }
            let (loss, grads) = loss_and_gradient_rows(&weights, spec, batch);
            if !loss.is_finite() {
                return Err(Error::Training(format!("loss became {loss} in epoch {}", epoch + 1)));
            }
            epoch_loss += loss * chunk.len() as f64;
            nadam_step(&mut weights, &grads, &mut state, &config.optimizer)?;
        }
        loss_history.push(epoch_loss / n_samples as f64);
    }

    Ok(Autoencoder {
        spec: spec.clone(),
        weights,
        scaler,
        config: config.clone(),
        loss_history,
    })
}
