//! Layer abstraction, network composition and backpropagation.
//!
//! A network is a strict chain of layers followed by a softmax
//! cross-entropy head. Each layer caches what its backward pass needs
//! during forward; backward walks the chain in reverse, accumulating
//! parameter gradients inside the layers and handing the propagated error
//! to its predecessor.
//!
//! Complex-valued quantities use the Wirtinger convention throughout: the
//! error `δ` for a complex activation packs (∂L/∂re, ∂L/∂im) into one
//! complex number, so gradients of real losses check directly against
//! finite differences on the real and imaginary parts.

mod act;
mod checkpoint;
mod layers;
mod loss;

pub use act::{Act, RealTensor};
pub use checkpoint::{load_checkpoint_into, read_descriptors, save_checkpoint};
pub use layers::{
    AgcLayer, AvgPoolLayer, ComplexConvLayer, Conv2dLayer, DenseLayer, FlattenLayer,
    InputScaleLayer, LogCompressLayer, ModulusActivation, ReluLayer, StandardizeLayer,
};
pub use loss::SoftmaxCrossEntropy;

use crate::ctensor::{Complex, ComplexMatrix};
use crate::error::{Error, Result};

/// Parameter group a layer belongs to; the trainer applies a separate
/// learning rate per group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    /// First-layer signal-processing parameters.
    Sp,
    /// Everything else.
    Main,
}

/// Discriminant for layer types, also the type tag in checkpoint files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    MatchedFilter,
    ComplexConv,
    Modulus,
    Conv2d,
    Relu,
    AvgPool,
    Flatten,
    Dense,
    InputScale,
    LogCompress,
    Standardize,
    Agc,
}

impl LayerKind {
    pub fn code(self) -> u8 {
        match self {
            LayerKind::MatchedFilter => 1,
            LayerKind::ComplexConv => 2,
            LayerKind::Modulus => 3,
            LayerKind::Conv2d => 4,
            LayerKind::Relu => 5,
            LayerKind::AvgPool => 6,
            LayerKind::Flatten => 7,
            LayerKind::Dense => 8,
            LayerKind::InputScale => 9,
            LayerKind::LogCompress => 10,
            LayerKind::Standardize => 11,
            LayerKind::Agc => 12,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => LayerKind::MatchedFilter,
            2 => LayerKind::ComplexConv,
            3 => LayerKind::Modulus,
            4 => LayerKind::Conv2d,
            5 => LayerKind::Relu,
            6 => LayerKind::AvgPool,
            7 => LayerKind::Flatten,
            8 => LayerKind::Dense,
            9 => LayerKind::InputScale,
            10 => LayerKind::LogCompress,
            11 => LayerKind::Standardize,
            12 => LayerKind::Agc,
            _ => return None,
        })
    }
}

/// Shape summary of a layer: its kind, static dimensions and the length
/// of its flat parameter block. Used for checkpoint validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDescriptor {
    pub kind: LayerKind,
    pub dims: Vec<u32>,
    pub param_len: u64,
}

impl LayerDescriptor {
    pub fn new(kind: LayerKind, dims: Vec<u32>, param_len: u64) -> Self {
        LayerDescriptor {
            kind,
            dims,
            param_len,
        }
    }
}

/// A network layer.
///
/// `forward` caches whatever `backward` needs; calling `backward` without
/// a preceding `forward` is a state error. Parameters and their
/// accumulated gradients are exposed as flat `f64` blocks (complex values
/// interleaved re/im), which is also the checkpoint wire layout.
pub trait Layer: Send + Sync {
    fn kind(&self) -> LayerKind;

    fn forward(&mut self, x: &Act) -> Result<Act>;

    /// Consume the downstream error, accumulate parameter gradients and
    /// return the error propagated to the previous layer.
    fn backward(&mut self, delta: &Act) -> Result<Act>;

    fn param_count(&self) -> usize {
        0
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        let _ = out;
    }

    fn read_params(&mut self, src: &[f64]) -> Result<()> {
        expect_len(src, self.param_count())
    }

    fn write_grads(&self, out: &mut Vec<f64>) {
        let _ = out;
    }

    fn zero_grads(&mut self) {}

    /// Add a precomputed update (already scaled by −λ) to the parameters.
    fn apply_update(&mut self, update: &[f64]) -> Result<()> {
        expect_len(update, self.param_count())
    }

    fn descriptor(&self) -> LayerDescriptor;

    fn group(&self) -> ParamGroup {
        ParamGroup::Main
    }

    fn clone_box(&self) -> Box<dyn Layer>;
}

fn expect_len(buf: &[f64], want: usize) -> Result<()> {
    if buf.len() != want {
        return Err(Error::Dimension(format!(
            "parameter block of length {} does not match layer's {want}",
            buf.len()
        )));
    }
    Ok(())
}

/// Subgradient of the modulus |z|: z/|z| away from the origin, 0 at the
/// kink.
pub fn modulus_subgradient(z: Complex) -> Complex {
    let n = z.norm();
    if n == 0.0 {
        Complex::new(0.0, 0.0)
    } else {
        z / n
    }
}

/// Apply a precomputed update in place: `param ← param + update`, where
/// the update already includes the −λ factor.
pub fn sgd_step(param: &mut [f64], update: &[f64]) -> Result<()> {
    if param.len() != update.len() {
        return Err(Error::Dimension(format!(
            "update of length {} against parameter block of length {}",
            update.len(),
            param.len()
        )));
    }
    for (p, u) in param.iter_mut().zip(update) {
        *p += u;
    }
    Ok(())
}

/// Ordered layer chain with a softmax cross-entropy head.
pub struct Network {
    layers: Vec<Box<dyn Layer>>,
    head: SoftmaxCrossEntropy,
    forward_done: bool,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Network {
            layers: self.layers.iter().map(|l| l.clone_box()).collect(),
            head: self.head.clone(),
            forward_done: self.forward_done,
        }
    }
}

impl Network {
    pub fn new(layers: Vec<Box<dyn Layer>>, classes: usize) -> Self {
        Network {
            layers,
            head: SoftmaxCrossEntropy::new(classes),
            forward_done: false,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn classes(&self) -> usize {
        self.head.classes()
    }

    fn compose_err(layer: usize, err: Error) -> Error {
        match err {
            Error::Composition { layer, msg } => Error::Composition { layer, msg },
            other => Error::Composition {
                layer,
                msg: other.to_string(),
            },
        }
    }

    /// Run the full chain on `x0` and return the class probabilities.
    pub fn forward(&mut self, x0: &ComplexMatrix) -> Result<Vec<f64>> {
        let mut act = Act::Complex2d(x0.clone());
        for (i, layer) in self.layers.iter_mut().enumerate() {
            act = layer
                .forward(&act)
                .map_err(|e| Self::compose_err(i, e))?;
        }
        let n = self.layers.len();
        let logits = act.as_real1d().map_err(|e| Self::compose_err(n, e))?;
        let probs = self
            .head
            .forward(logits)
            .map_err(|e| Self::compose_err(n, e))?;
        self.forward_done = true;
        Ok(probs)
    }

    /// Cross-entropy of the cached forward pass against `label`.
    pub fn loss(&self, label: usize) -> Result<f64> {
        if !self.forward_done {
            return Err(Error::State("loss requested before forward".into()));
        }
        self.head.loss(label)
    }

    /// Backpropagate from the cross-entropy head, accumulating parameter
    /// gradients in every layer.
    pub fn backward(&mut self, label: usize) -> Result<()> {
        if !self.forward_done {
            return Err(Error::State("backward called before forward".into()));
        }
        let delta = self.head.delta(label)?;
        self.backward_from_delta(Act::Real1d(delta))
    }

    /// Backpropagate from an externally supplied output error. This is
    /// the injection hook used to drive the chain under arbitrary scalar
    /// losses (gradient checks, custom heads).
    pub fn backward_from_delta(&mut self, delta: Act) -> Result<()> {
        if !self.forward_done {
            return Err(Error::State("backward called before forward".into()));
        }
        let mut d = delta;
        for (i, layer) in self.layers.iter_mut().enumerate().rev() {
            d = layer
                .backward(&d)
                .map_err(|e| Self::compose_err(i, e))?;
        }
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            layer.zero_grads();
        }
    }

    /// Accumulated gradient blocks, one per layer (empty for stateless
    /// layers).
    pub fn collect_grads(&self) -> Vec<Vec<f64>> {
        self.layers
            .iter()
            .map(|l| {
                let mut buf = Vec::with_capacity(l.param_count());
                l.write_grads(&mut buf);
                buf
            })
            .collect()
    }

    /// Add per-layer updates (already scaled by −λ) to the parameters.
    pub fn apply_updates(&mut self, updates: &[Vec<f64>]) -> Result<()> {
        if updates.len() != self.layers.len() {
            return Err(Error::Dimension(format!(
                "{} update blocks for {} layers",
                updates.len(),
                self.layers.len()
            )));
        }
        for (layer, upd) in self.layers.iter_mut().zip(updates) {
            layer.apply_update(upd)?;
        }
        Ok(())
    }

    pub fn write_params(&self) -> Vec<Vec<f64>> {
        self.layers
            .iter()
            .map(|l| {
                let mut buf = Vec::with_capacity(l.param_count());
                l.write_params(&mut buf);
                buf
            })
            .collect()
    }

    pub fn read_params(&mut self, blocks: &[Vec<f64>]) -> Result<()> {
        if blocks.len() != self.layers.len() {
            return Err(Error::Dimension(format!(
                "{} parameter blocks for {} layers",
                blocks.len(),
                self.layers.len()
            )));
        }
        for (layer, block) in self.layers.iter_mut().zip(blocks) {
            layer.read_params(block)?;
        }
        Ok(())
    }

    pub fn layer_descriptors(&self) -> Vec<LayerDescriptor> {
        self.layers.iter().map(|l| l.descriptor()).collect()
    }

    pub fn param_groups(&self) -> Vec<ParamGroup> {
        self.layers.iter().map(|l| l.group()).collect()
    }

    pub fn total_params(&self) -> usize {
        self.layers.iter().map(|l| l.param_count()).sum()
    }

    /// The two matched-filter scale parameters when the network contains
    /// a matched-filter layer.
    pub fn sp_params(&self) -> Option<(f64, f64)> {
        let mf = self
            .layers
            .iter()
            .find(|l| l.kind() == LayerKind::MatchedFilter)?;
        let mut buf = Vec::with_capacity(2);
        mf.write_params(&mut buf);
        Some((buf[0], buf[1]))
    }
}
