//! Ordinary network layers: complex convolution, modulus activation,
//! real convolution, ReLU, average pooling, flatten and dense.

use crate::ctensor::{fft2, ifft2, wrap_center, Complex, ComplexMatrix};
use crate::error::{Error, Result};

use super::act::{Act, RealTensor};
use super::{modulus_subgradient, Layer, LayerDescriptor, LayerKind};

fn backward_before_forward() -> Error {
    Error::State("backward called before forward".into())
}

// ---------------------------------------------------------------------------
// Input gain
// ---------------------------------------------------------------------------

/// Fixed, non-trainable scalar gain on the complex input.
///
/// Raw radar data enters the network at the scale of the matched filter's
/// coherent processing gain (filter area × amplitude); dividing it out up
/// front keeps the downstream activations and gradients near unit scale,
/// which plain SGD needs. The gain is a structural constant recorded in
/// the layer descriptor, not a parameter.
#[derive(Clone)]
pub struct InputScaleLayer {
    gain: f64,
    forwarded: bool,
}

impl InputScaleLayer {
    pub fn new(gain: f64) -> Self {
        assert!(gain.is_finite() && gain != 0.0);
        InputScaleLayer {
            gain,
            forwarded: false,
        }
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }
}

impl Layer for InputScaleLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::InputScale
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let z = x.as_complex2d()?;
        let mut out = z.clone();
        for v in out.data_mut() {
            *v *= self.gain;
        }
        self.forwarded = true;
        Ok(Act::Complex2d(out))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        if !self.forwarded {
            return Err(backward_before_forward());
        }
        let d = delta.as_complex2d()?;
        let mut out = d.clone();
        for v in out.data_mut() {
            *v *= self.gain;
        }
        Ok(Act::Complex2d(out))
    }

    fn descriptor(&self) -> LayerDescriptor {
        let bits = self.gain.to_bits();
        LayerDescriptor::new(
            LayerKind::InputScale,
            vec![bits as u32, (bits >> 32) as u32],
            0,
        )
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Automatic gain control
// ---------------------------------------------------------------------------

/// Per-sample automatic gain control on the complex input: scale the
/// whole matrix so its RMS modulus equals `target_rms`.
///
/// Receiver AGC is the standard front-end answer to echoes whose overall
/// power varies target to target; it has no trainable state and applies
/// the same scalar gain to every entry, so relative structure is
/// untouched.
#[derive(Clone)]
pub struct AgcLayer {
    target_rms: f64,
    cache: Option<AgcCache>,
}

#[derive(Clone)]
struct AgcCache {
    x: ComplexMatrix,
    sigma: f64,
}

const AGC_EPS: f64 = 1e-30;

impl AgcLayer {
    pub fn new(target_rms: f64) -> Self {
        assert!(target_rms.is_finite() && target_rms > 0.0);
        AgcLayer {
            target_rms,
            cache: None,
        }
    }

    pub fn target_rms(&self) -> f64 {
        self.target_rms
    }
}

impl Layer for AgcLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::Agc
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let z = x.as_complex2d()?;
        let n = z.data().len() as f64;
        let sigma = (z.energy() / n + AGC_EPS).sqrt();
        let gain = self.target_rms / sigma;
        let mut out = z.clone();
        for v in out.data_mut() {
            *v *= gain;
        }
        self.cache = Some(AgcCache {
            x: z.clone(),
            sigma,
        });
        Ok(Act::Complex2d(out))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let cache = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        let d = delta.as_complex2d()?;
        if d.dims() != cache.x.dims() {
            return Err(Error::Dimension("agc backward shape mismatch".into()));
        }
        // y = t·x/σ with σ² = mean|x|²:
        // G_x = (t/σ)·(G_y − x·mean(Re(conj(G_y)·x))/σ²)
        let n = d.data().len() as f64;
        let s = d
            .data()
            .iter()
            .zip(cache.x.data())
            .map(|(g, x)| g.conj() * x)
            .map(|c| c.re)
            .sum::<f64>()
            / n;
        let t = self.target_rms;
        let sigma = cache.sigma;
        let mut out = ComplexMatrix::zeros(d.rows(), d.cols());
        for ((o, g), x) in out
            .data_mut()
            .iter_mut()
            .zip(d.data())
            .zip(cache.x.data())
        {
            *o = (g - x * (s / (sigma * sigma))) * (t / sigma);
        }
        Ok(Act::Complex2d(out))
    }

    fn descriptor(&self) -> LayerDescriptor {
        let bits = self.target_rms.to_bits();
        LayerDescriptor::new(LayerKind::Agc, vec![bits as u32, (bits >> 32) as u32], 0)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Log compression
// ---------------------------------------------------------------------------

/// Fixed elementwise dynamic-range compression y = ln(1 + x) on
/// non-negative feature maps.
///
/// Magnitude images out of a matched filter are heavy-tailed (sharp
/// peaks over a diffuse background); compressing them before the
/// convolutional trunk is standard radar practice and keeps one bright
/// reflector from dominating every downstream gradient.
#[derive(Clone, Default)]
pub struct LogCompressLayer {
    cache: Option<RealTensor>,
}

impl LogCompressLayer {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Layer for LogCompressLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::LogCompress
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let t = x.as_real3d()?;
        let mut out = t.clone();
        for v in &mut out.data {
            *v = v.ln_1p();
        }
        self.cache = Some(t.clone());
        Ok(Act::Real3d(out))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let x = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        let d = delta.as_real3d()?;
        if (d.channels, d.rows, d.cols) != (x.channels, x.rows, x.cols) {
            return Err(Error::Dimension("log compress backward shape mismatch".into()));
        }
        let mut out = d.clone();
        for (o, &xv) in out.data.iter_mut().zip(&x.data) {
            *o /= 1.0 + xv;
        }
        Ok(Act::Real3d(out))
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(LayerKind::LogCompress, vec![], 0)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Per-sample standardization
// ---------------------------------------------------------------------------

/// Deterministic per-sample standardization of a real feature map:
/// y = (x − μ)/σ with μ, σ computed over the whole map.
///
/// Radar magnitude images arrive with sample-dependent background level
/// and scale (clutter power, target strength); removing both per sample
/// is the usual normalization before a classifier. There are no learned
/// parameters and no cross-sample statistics involved.
#[derive(Clone, Default)]
pub struct StandardizeLayer {
    center_only: bool,
    cache: Option<StdCache>,
}

#[derive(Clone)]
struct StdCache {
    y: RealTensor,
    sigma: f64,
}

const STD_EPS: f64 = 1e-12;

impl StandardizeLayer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Subtract the per-sample mean but keep the scale.
    pub fn center_only() -> Self {
        StandardizeLayer {
            center_only: true,
            ..Self::default()
        }
    }
}

impl Layer for StandardizeLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::Standardize
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let t = x.as_real3d()?;
        let n = t.data.len() as f64;
        let mean = t.data.iter().sum::<f64>() / n;
        let var = t.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sigma = if self.center_only {
            1.0
        } else {
            (var + STD_EPS).sqrt()
        };
        let mut y = t.clone();
        for v in &mut y.data {
            *v = (*v - mean) / sigma;
        }
        self.cache = Some(StdCache { y: y.clone(), sigma });
        Ok(Act::Real3d(y))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let cache = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        let d = delta.as_real3d()?;
        let y = &cache.y;
        if (d.channels, d.rows, d.cols) != (y.channels, y.rows, y.cols) {
            return Err(Error::Dimension("standardize backward shape mismatch".into()));
        }
        // Full mode: dL/dx_i = (δ_i − mean(δ) − y_i·mean(δ⊙y)) / σ.
        // Center-only mode (σ ≡ 1 held constant): dL/dx_i = δ_i − mean(δ).
        let n = d.data.len() as f64;
        let mean_d = d.data.iter().sum::<f64>() / n;
        let mean_dy = if self.center_only {
            0.0
        } else {
            d.data
                .iter()
                .zip(&y.data)
                .map(|(dv, yv)| dv * yv)
                .sum::<f64>()
                / n
        };
        let mut out = d.clone();
        for (o, yv) in out.data.iter_mut().zip(&y.data) {
            *o = (*o - mean_d - yv * mean_dy) / cache.sigma;
        }
        Ok(Act::Real3d(out))
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(LayerKind::Standardize, vec![self.center_only as u32], 0)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Modulus activation
// ---------------------------------------------------------------------------

/// Elementwise |z|, the complex-to-real transition of the network.
/// The output is real and non-negative by construction.
#[derive(Clone, Default)]
pub struct ModulusActivation {
    cache: Option<ComplexMatrix>,
}

impl ModulusActivation {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Layer for ModulusActivation {
    fn kind(&self) -> LayerKind {
        LayerKind::Modulus
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let z = x.as_complex2d()?;
        let (rows, cols) = z.dims();
        let mut out = RealTensor::zeros(1, rows, cols);
        for (o, v) in out.data.iter_mut().zip(z.data()) {
            *o = v.norm();
        }
        self.cache = Some(z.clone());
        Ok(Act::Real3d(out))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let z = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        let d = delta.as_real3d()?;
        if d.channels != 1 || (d.rows, d.cols) != z.dims() {
            return Err(Error::Dimension(format!(
                "modulus backward got {}x{}x{} for {}x{} input",
                d.channels,
                d.rows,
                d.cols,
                z.rows(),
                z.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(z.rows(), z.cols());
        for ((g, &dv), zv) in out.data_mut().iter_mut().zip(&d.data).zip(z.data()) {
            *g = modulus_subgradient(*zv) * dv;
        }
        Ok(Act::Complex2d(out))
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(LayerKind::Modulus, vec![], 0)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Complex convolution (trainable kernel, circular, "same" size)
// ---------------------------------------------------------------------------

/// Single-channel complex convolution with a trainable kernel, evaluated
/// circularly with the kernel centered, so the output keeps the input
/// size. No bias term: the kernel itself is the full parameter set.
///
/// This is the first layer of the baseline variant, standing in for the
/// matched-filter layer with a free-form kernel of the same footprint.
#[derive(Clone)]
pub struct ComplexConvLayer {
    size: usize,
    kernel: Vec<Complex>,
    grad: Vec<Complex>,
    cache: Option<ComplexConvCache>,
}

#[derive(Clone)]
struct ComplexConvCache {
    s_fft: ComplexMatrix,
    kc_fft: ComplexMatrix,
    rows: usize,
    cols: usize,
}

impl ComplexConvLayer {
    pub fn new(size: usize) -> Self {
        assert!(size >= 1);
        ComplexConvLayer {
            size,
            kernel: vec![Complex::new(0.0, 0.0); size * size],
            grad: vec![Complex::new(0.0, 0.0); size * size],
            cache: None,
        }
    }

    /// Fan-in scaled init: re and im each uniform in ±sqrt(1/F²).
    pub fn init_fan_in(&mut self, rng: &mut impl rand::Rng) {
        let limit = (1.0 / (self.size * self.size) as f64).sqrt();
        for k in &mut self.kernel {
            *k = Complex::new(
                rng.gen_range(-limit..limit),
                rng.gen_range(-limit..limit),
            );
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn kernel_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec(self.size, self.size, self.kernel.clone())
            .expect("kernel buffer length is size²")
    }
}

impl Layer for ComplexConvLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::ComplexConv
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let s = x.as_complex2d()?;
        let (rows, cols) = s.dims();
        if rows < self.size || cols < self.size {
            return Err(Error::Dimension(format!(
                "{}x{} input smaller than {0}x{0} kernel",
                rows, cols
            )));
        }
        let kc = wrap_center(&self.kernel_matrix(), rows, cols)?;
        let kc_fft = fft2(&kc)?;
        let s_fft = fft2(s)?;
        let z = ifft2(&kc_fft.hadamard(&s_fft)?)?;
        self.cache = Some(ComplexConvCache {
            s_fft,
            kc_fft,
            rows,
            cols,
        });
        Ok(Act::Complex2d(z))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let cache = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        let g_z = delta.as_complex2d()?;
        if g_z.dims() != (cache.rows, cache.cols) {
            return Err(Error::Dimension(format!(
                "complex conv backward got {}x{} for {}x{} output",
                g_z.rows(),
                g_z.cols(),
                cache.rows,
                cache.cols
            )));
        }
        let g_fft = fft2(g_z)?;

        // Kernel gradient: circular correlation of the output error with
        // the conjugate input, sampled at the centered kernel footprint.
        let gk_full = ifft2(&g_fft.hadamard(&cache.s_fft.conj())?)?;
        let f = self.size;
        for m in 0..f {
            for n in 0..f {
                let r = (m + cache.rows - f / 2) % cache.rows;
                let c = (n + cache.cols - f / 2) % cache.cols;
                self.grad[m * f + n] += gk_full[(r, c)];
            }
        }

        // Input gradient: adjoint of the circular convolution.
        let dprev = ifft2(&g_fft.hadamard(&cache.kc_fft.conj())?)?;
        Ok(Act::Complex2d(dprev))
    }

    fn param_count(&self) -> usize {
        2 * self.size * self.size
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        for k in &self.kernel {
            out.push(k.re);
            out.push(k.im);
        }
    }

    fn read_params(&mut self, src: &[f64]) -> Result<()> {
        super::expect_len(src, self.param_count())?;
        for (k, pair) in self.kernel.iter_mut().zip(src.chunks_exact(2)) {
            *k = Complex::new(pair[0], pair[1]);
        }
        Ok(())
    }

    fn write_grads(&self, out: &mut Vec<f64>) {
        for g in &self.grad {
            out.push(g.re);
            out.push(g.im);
        }
    }

    fn zero_grads(&mut self) {
        self.grad.fill(Complex::new(0.0, 0.0));
    }

    fn apply_update(&mut self, update: &[f64]) -> Result<()> {
        super::expect_len(update, self.param_count())?;
        for (k, pair) in self.kernel.iter_mut().zip(update.chunks_exact(2)) {
            *k += Complex::new(pair[0], pair[1]);
        }
        Ok(())
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(
            LayerKind::ComplexConv,
            vec![self.size as u32],
            self.param_count() as u64,
        )
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Real 2-D convolution
// ---------------------------------------------------------------------------

/// Multi-channel real convolution (valid cross-correlation), optionally
/// over a zero-padded input so the spatial size is preserved.
#[derive(Clone)]
pub struct Conv2dLayer {
    in_ch: usize,
    out_ch: usize,
    kh: usize,
    kw: usize,
    same_pad: bool,
    w: Vec<f64>,
    b: Vec<f64>,
    gw: Vec<f64>,
    gb: Vec<f64>,
    cache: Option<ConvCache>,
}

#[derive(Clone)]
struct ConvCache {
    padded: RealTensor,
    in_rows: usize,
    in_cols: usize,
}

impl Conv2dLayer {
    pub fn new(in_ch: usize, out_ch: usize, kh: usize, kw: usize, same_pad: bool) -> Self {
        assert!(in_ch >= 1 && out_ch >= 1 && kh >= 1 && kw >= 1);
        let n = out_ch * in_ch * kh * kw;
        Conv2dLayer {
            in_ch,
            out_ch,
            kh,
            kw,
            same_pad,
            w: vec![0.0; n],
            b: vec![0.0; out_ch],
            gw: vec![0.0; n],
            gb: vec![0.0; out_ch],
            cache: None,
        }
    }

    /// Unit-variance fan-in init: weights uniform in
    /// ±sqrt(3/(in_ch·kh·kw)), biases zero.
    pub fn init_fan_in(&mut self, rng: &mut impl rand::Rng) {
        let limit = (3.0 / (self.in_ch * self.kh * self.kw) as f64).sqrt();
        for w in &mut self.w {
            *w = rng.gen_range(-limit..limit);
        }
        self.b.fill(0.0);
    }

    #[inline]
    fn weight_index(&self, o: usize, i: usize, a: usize, bb: usize) -> usize {
        ((o * self.in_ch + i) * self.kh + a) * self.kw + bb
    }

    fn pad_input(&self, x: &RealTensor) -> RealTensor {
        if !self.same_pad {
            return x.clone();
        }
        let (pt, pl) = ((self.kh - 1) / 2, (self.kw - 1) / 2);
        let mut padded = RealTensor::zeros(x.channels, x.rows + self.kh - 1, x.cols + self.kw - 1);
        for c in 0..x.channels {
            for r in 0..x.rows {
                for l in 0..x.cols {
                    *padded.at_mut(c, r + pt, l + pl) = x.at(c, r, l);
                }
            }
        }
        padded
    }
}

impl Layer for Conv2dLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::Conv2d
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let x = x.as_real3d()?;
        if x.channels != self.in_ch {
            return Err(Error::Dimension(format!(
                "conv expects {} input channels, got {}",
                self.in_ch, x.channels
            )));
        }
        let padded = self.pad_input(x);
        if padded.rows < self.kh || padded.cols < self.kw {
            return Err(Error::Dimension(format!(
                "{}x{} input smaller than {}x{} kernel",
                x.rows, x.cols, self.kh, self.kw
            )));
        }
        let (or, oc) = (padded.rows - self.kh + 1, padded.cols - self.kw + 1);
        let (pr, pc) = (padded.rows, padded.cols);

        let mut out = RealTensor::zeros(self.out_ch, or, oc);
        for o in 0..self.out_ch {
            out.data[o * or * oc..(o + 1) * or * oc].fill(self.b[o]);
            for i in 0..self.in_ch {
                for a in 0..self.kh {
                    for bb in 0..self.kw {
                        let wv = self.w[self.weight_index(o, i, a, bb)];
                        for p in 0..or {
                            let src = (i * pr + p + a) * pc + bb;
                            let dst = (o * or + p) * oc;
                            for q in 0..oc {
                                out.data[dst + q] += wv * padded.data[src + q];
                            }
                        }
                    }
                }
            }
        }

        self.cache = Some(ConvCache {
            padded,
            in_rows: x.rows,
            in_cols: x.cols,
        });
        Ok(Act::Real3d(out))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let cache = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        let d = delta.as_real3d()?;
        let (pr, pc) = (cache.padded.rows, cache.padded.cols);
        let (or, oc) = (pr - self.kh + 1, pc - self.kw + 1);
        if d.channels != self.out_ch || d.rows != or || d.cols != oc {
            return Err(Error::Dimension(format!(
                "conv backward got {}x{}x{} for {}x{}x{} output",
                d.channels, d.rows, d.cols, self.out_ch, or, oc
            )));
        }

        for o in 0..self.out_ch {
            self.gb[o] += d.channel(o).iter().sum::<f64>();
        }

        let mut gpad = RealTensor::zeros(self.in_ch, pr, pc);
        for o in 0..self.out_ch {
            for i in 0..self.in_ch {
                for a in 0..self.kh {
                    for bb in 0..self.kw {
                        let wi = self.weight_index(o, i, a, bb);
                        let wv = self.w[wi];
                        let mut acc = 0.0;
                        for p in 0..or {
                            let drow = (o * or + p) * oc;
                            let xrow = (i * pr + p + a) * pc + bb;
                            for q in 0..oc {
                                let dv = d.data[drow + q];
                                acc += dv * cache.padded.data[xrow + q];
                                gpad.data[xrow + q] += wv * dv;
                            }
                        }
                        self.gw[wi] += acc;
                    }
                }
            }
        }

        let dprev = if self.same_pad {
            let (pt, pl) = ((self.kh - 1) / 2, (self.kw - 1) / 2);
            let mut cropped = RealTensor::zeros(self.in_ch, cache.in_rows, cache.in_cols);
            for c in 0..self.in_ch {
                for r in 0..cache.in_rows {
                    for l in 0..cache.in_cols {
                        *cropped.at_mut(c, r, l) = gpad.at(c, r + pt, l + pl);
                    }
                }
            }
            cropped
        } else {
            gpad
        };
        Ok(Act::Real3d(dprev))
    }

    fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.w);
        out.extend_from_slice(&self.b);
    }

    fn read_params(&mut self, src: &[f64]) -> Result<()> {
        super::expect_len(src, self.param_count())?;
        let nw = self.w.len();
        self.w.copy_from_slice(&src[..nw]);
        self.b.copy_from_slice(&src[nw..]);
        Ok(())
    }

    fn write_grads(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.gw);
        out.extend_from_slice(&self.gb);
    }

    fn zero_grads(&mut self) {
        self.gw.fill(0.0);
        self.gb.fill(0.0);
    }

    fn apply_update(&mut self, update: &[f64]) -> Result<()> {
        super::expect_len(update, self.param_count())?;
        let nw = self.w.len();
        super::sgd_step(&mut self.w, &update[..nw])?;
        super::sgd_step(&mut self.b, &update[nw..])?;
        Ok(())
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(
            LayerKind::Conv2d,
            vec![
                self.in_ch as u32,
                self.out_ch as u32,
                self.kh as u32,
                self.kw as u32,
                self.same_pad as u32,
            ],
            self.param_count() as u64,
        )
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

/// Elementwise max(0, x) on real feature maps or vectors.
#[derive(Clone, Default)]
pub struct ReluLayer {
    cache: Option<Act>,
}

impl ReluLayer {
    pub fn new() -> Self {
        Self::default()
    }
}

fn relu_mask(x: &[f64], delta: &[f64], out: &mut [f64]) {
    for ((o, &xv), &dv) in out.iter_mut().zip(x).zip(delta) {
        *o = if xv > 0.0 { dv } else { 0.0 };
    }
}

impl Layer for ReluLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::Relu
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let out = match x {
            Act::Real3d(t) => {
                let mut o = t.clone();
                for v in &mut o.data {
                    *v = v.max(0.0);
                }
                Act::Real3d(o)
            }
            Act::Real1d(v) => Act::Real1d(v.iter().map(|&x| x.max(0.0)).collect()),
            other => {
                return Err(Error::Dimension(format!(
                    "relu expects real input, got {}",
                    other.shape_desc()
                )))
            }
        };
        self.cache = Some(x.clone());
        Ok(out)
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let x = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        match (x, delta) {
            (Act::Real3d(xt), Act::Real3d(dt)) => {
                if (xt.channels, xt.rows, xt.cols) != (dt.channels, dt.rows, dt.cols) {
                    return Err(Error::Dimension("relu backward shape mismatch".into()));
                }
                let mut out = dt.clone();
                relu_mask(&xt.data, &dt.data, &mut out.data);
                Ok(Act::Real3d(out))
            }
            (Act::Real1d(xv), Act::Real1d(dv)) => {
                if xv.len() != dv.len() {
                    return Err(Error::Dimension("relu backward shape mismatch".into()));
                }
                let mut out = vec![0.0; dv.len()];
                relu_mask(xv, dv, &mut out);
                Ok(Act::Real1d(out))
            }
            _ => Err(Error::Dimension("relu backward shape mismatch".into())),
        }
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(LayerKind::Relu, vec![], 0)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Average pooling
// ---------------------------------------------------------------------------

/// Non-overlapping p×p average pooling; input dimensions must divide by p.
#[derive(Clone)]
pub struct AvgPoolLayer {
    factor: usize,
    cache: Option<(usize, usize, usize)>,
}

impl AvgPoolLayer {
    pub fn new(factor: usize) -> Self {
        assert!(factor >= 1);
        AvgPoolLayer {
            factor,
            cache: None,
        }
    }
}

impl Layer for AvgPoolLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::AvgPool
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let x = x.as_real3d()?;
        let p = self.factor;
        if x.rows % p != 0 || x.cols % p != 0 {
            return Err(Error::Dimension(format!(
                "{}x{} feature map not divisible by pool factor {p}",
                x.rows, x.cols
            )));
        }
        let (or, oc) = (x.rows / p, x.cols / p);
        let inv = 1.0 / (p * p) as f64;
        let mut out = RealTensor::zeros(x.channels, or, oc);
        for c in 0..x.channels {
            for r in 0..or {
                for l in 0..oc {
                    let mut acc = 0.0;
                    for dr in 0..p {
                        for dl in 0..p {
                            acc += x.at(c, r * p + dr, l * p + dl);
                        }
                    }
                    *out.at_mut(c, r, l) = acc * inv;
                }
            }
        }
        self.cache = Some((x.channels, x.rows, x.cols));
        Ok(Act::Real3d(out))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let (ch, rows, cols) = self.cache.ok_or_else(backward_before_forward)?;
        let d = delta.as_real3d()?;
        let p = self.factor;
        if (d.channels, d.rows, d.cols) != (ch, rows / p, cols / p) {
            return Err(Error::Dimension("pool backward shape mismatch".into()));
        }
        let inv = 1.0 / (p * p) as f64;
        let mut out = RealTensor::zeros(ch, rows, cols);
        for c in 0..ch {
            for r in 0..rows {
                for l in 0..cols {
                    *out.at_mut(c, r, l) = d.at(c, r / p, l / p) * inv;
                }
            }
        }
        Ok(Act::Real3d(out))
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(LayerKind::AvgPool, vec![self.factor as u32], 0)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Flatten
// ---------------------------------------------------------------------------

/// Reshape a feature map into a flat vector (channel-major order).
#[derive(Clone, Default)]
pub struct FlattenLayer {
    cache: Option<(usize, usize, usize)>,
}

impl FlattenLayer {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Layer for FlattenLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::Flatten
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let x = x.as_real3d()?;
        self.cache = Some((x.channels, x.rows, x.cols));
        Ok(Act::Real1d(x.data.clone()))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let (ch, rows, cols) = self.cache.ok_or_else(backward_before_forward)?;
        let d = delta.as_real1d()?;
        if d.len() != ch * rows * cols {
            return Err(Error::Dimension("flatten backward shape mismatch".into()));
        }
        let mut out = RealTensor::zeros(ch, rows, cols);
        out.data.copy_from_slice(d);
        Ok(Act::Real3d(out))
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(LayerKind::Flatten, vec![], 0)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

/// Fully connected real layer: y = W·x + b.
#[derive(Clone)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    w: Vec<f64>,
    b: Vec<f64>,
    gw: Vec<f64>,
    gb: Vec<f64>,
    cache: Option<Vec<f64>>,
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        assert!(in_dim >= 1 && out_dim >= 1);
        DenseLayer {
            in_dim,
            out_dim,
            w: vec![0.0; in_dim * out_dim],
            b: vec![0.0; out_dim],
            gw: vec![0.0; in_dim * out_dim],
            gb: vec![0.0; out_dim],
            cache: None,
        }
    }

    /// Unit-variance fan-in init: weights uniform in ±sqrt(3/in_dim),
    /// biases zero.
    pub fn init_fan_in(&mut self, rng: &mut impl rand::Rng) {
        let limit = (3.0 / self.in_dim as f64).sqrt();
        for w in &mut self.w {
            *w = rng.gen_range(-limit..limit);
        }
        self.b.fill(0.0);
    }
}

impl Layer for DenseLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::Dense
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let x = x.as_real1d()?;
        if x.len() != self.in_dim {
            return Err(Error::Dimension(format!(
                "dense expects input of length {}, got {}",
                self.in_dim,
                x.len()
            )));
        }
        let mut y = self.b.clone();
        for (j, yj) in y.iter_mut().enumerate() {
            let row = &self.w[j * self.in_dim..(j + 1) * self.in_dim];
            *yj += row.iter().zip(x).map(|(w, xv)| w * xv).sum::<f64>();
        }
        self.cache = Some(x.to_vec());
        Ok(Act::Real1d(y))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let x = self.cache.as_ref().ok_or_else(backward_before_forward)?;
        let d = delta.as_real1d()?;
        if d.len() != self.out_dim {
            return Err(Error::Dimension("dense backward shape mismatch".into()));
        }
        let mut dprev = vec![0.0; self.in_dim];
        for (j, &dj) in d.iter().enumerate() {
            self.gb[j] += dj;
            let row = j * self.in_dim;
            for i in 0..self.in_dim {
                self.gw[row + i] += dj * x[i];
                dprev[i] += dj * self.w[row + i];
            }
        }
        Ok(Act::Real1d(dprev))
    }

    fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.w);
        out.extend_from_slice(&self.b);
    }

    fn read_params(&mut self, src: &[f64]) -> Result<()> {
        super::expect_len(src, self.param_count())?;
        let nw = self.w.len();
        self.w.copy_from_slice(&src[..nw]);
        self.b.copy_from_slice(&src[nw..]);
        Ok(())
    }

    fn write_grads(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.gw);
        out.extend_from_slice(&self.gb);
    }

    fn zero_grads(&mut self) {
        self.gw.fill(0.0);
        self.gb.fill(0.0);
    }

    fn apply_update(&mut self, update: &[f64]) -> Result<()> {
        super::expect_len(update, self.param_count())?;
        let nw = self.w.len();
        super::sgd_step(&mut self.w, &update[..nw])?;
        super::sgd_step(&mut self.b, &update[nw..])?;
        Ok(())
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(
            LayerKind::Dense,
            vec![self.in_dim as u32, self.out_dim as u32],
            self.param_count() as u64,
        )
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_forward_is_nonnegative_real() {
        let z = ComplexMatrix::from_fn(2, 2, |r, c| Complex::new(r as f64 - 1.0, c as f64));
        let mut layer = ModulusActivation::new();
        let out = layer.forward(&Act::Complex2d(z)).unwrap();
        let t = out.as_real3d().unwrap();
        assert!(t.data.iter().all(|&v| v >= 0.0));
        assert!((t.at(0, 0, 1) - 2.0f64.sqrt()).abs() < 1e-15); // |-1+1j| = sqrt(2)
    }

    #[test]
    fn modulus_of_3_4_is_5() {
        let mut m = ComplexMatrix::zeros(1, 1);
        m[(0, 0)] = Complex::new(3.0, 4.0);
        let mut layer = ModulusActivation::new();
        let out = layer.forward(&Act::Complex2d(m)).unwrap();
        assert!((out.as_real3d().unwrap().at(0, 0, 0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn backward_before_forward_is_state_error() {
        let mut layer = ModulusActivation::new();
        let d = Act::Real3d(RealTensor::zeros(1, 2, 2));
        assert!(matches!(layer.backward(&d), Err(Error::State(_))));
    }

    #[test]
    fn dense_identity_passes_input_through() {
        let mut layer = DenseLayer::new(3, 3);
        let mut params = vec![0.0; 12];
        for i in 0..3 {
            params[i * 3 + i] = 1.0;
        }
        layer.read_params(&params).unwrap();
        let out = layer
            .forward(&Act::Real1d(vec![0.5, -1.5, 2.0]))
            .unwrap();
        assert_eq!(out.as_real1d().unwrap(), &[0.5, -1.5, 2.0]);
    }

    #[test]
    fn avg_pool_means_blocks_and_redistributes() {
        let mut t = RealTensor::zeros(1, 2, 2);
        t.data.copy_from_slice(&[1.0, 2.0, 3.0, 6.0]);
        let mut layer = AvgPoolLayer::new(2);
        let out = layer.forward(&Act::Real3d(t)).unwrap();
        assert!((out.as_real3d().unwrap().at(0, 0, 0) - 3.0).abs() < 1e-15);

        let mut d = RealTensor::zeros(1, 1, 1);
        d.data[0] = 4.0;
        let back = layer.backward(&Act::Real3d(d)).unwrap();
        assert!(back.as_real3d().unwrap().data.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn avg_pool_rejects_indivisible_input() {
        let t = RealTensor::zeros(1, 3, 4);
        let mut layer = AvgPoolLayer::new(2);
        assert!(matches!(
            layer.forward(&Act::Real3d(t)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn flatten_round_trips() {
        let mut t = RealTensor::zeros(2, 2, 2);
        for (i, v) in t.data.iter_mut().enumerate() {
            *v = i as f64;
        }
        let mut layer = FlattenLayer::new();
        let flat = layer.forward(&Act::Real3d(t.clone())).unwrap();
        let back = layer.backward(&flat).unwrap();
        assert_eq!(back.as_real3d().unwrap().data, t.data);
    }

    #[test]
    fn relu_clamps_and_masks() {
        let mut layer = ReluLayer::new();
        let out = layer
            .forward(&Act::Real1d(vec![-1.0, 0.0, 2.0]))
            .unwrap();
        assert_eq!(out.as_real1d().unwrap(), &[0.0, 0.0, 2.0]);
        let back = layer
            .backward(&Act::Real1d(vec![5.0, 5.0, 5.0]))
            .unwrap();
        assert_eq!(back.as_real1d().unwrap(), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn conv_same_padding_keeps_size() {
        let mut layer = Conv2dLayer::new(1, 2, 5, 5, true);
        let mut rng = rand::rngs::mock::StepRng::new(1, 0x9E3779B97F4A7C15);
        layer.init_fan_in(&mut rng);
        let x = RealTensor::zeros(1, 8, 8);
        let out = layer.forward(&Act::Real3d(x)).unwrap();
        let t = out.as_real3d().unwrap();
        assert_eq!((t.channels, t.rows, t.cols), (2, 8, 8));
    }

    #[test]
    fn conv_valid_shrinks_size() {
        let mut layer = Conv2dLayer::new(1, 1, 3, 3, false);
        let x = RealTensor::zeros(1, 8, 6);
        let out = layer.forward(&Act::Real3d(x)).unwrap();
        let t = out.as_real3d().unwrap();
        assert_eq!((t.rows, t.cols), (6, 4));
    }

    #[test]
    fn complex_conv_with_origin_impulse_kernel_is_identity() {
        let mut layer = ComplexConvLayer::new(1);
        layer.read_params(&[1.0, 0.0]).unwrap();
        let x = ComplexMatrix::from_fn(4, 4, |r, c| Complex::new(r as f64, c as f64));
        let out = layer.forward(&Act::Complex2d(x.clone())).unwrap();
        assert!(out.as_complex2d().unwrap().max_abs_diff(&x) < 1e-12);
    }
}
