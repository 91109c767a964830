//! Central finite-difference utilities for validating analytic gradients.

use crate::ctensor::{Complex, ComplexMatrix};
use crate::network::{Act, Layer, RealTensor};

/// Flatten an activation into real components (complex entries
/// interleaved re, im — the same packing the error convention uses).
pub fn act_to_flat(a: &Act) -> Vec<f64> {
    match a {
        Act::Complex2d(m) => m.data().iter().flat_map(|z| [z.re, z.im]).collect(),
        Act::Real3d(t) => t.data.clone(),
        Act::Real1d(v) => v.clone(),
    }
}

/// Rebuild an activation with `template`'s shape from flat components.
pub fn flat_to_act(template: &Act, flat: &[f64]) -> Act {
    match template {
        Act::Complex2d(m) => {
            let data = flat
                .chunks_exact(2)
                .map(|p| Complex::new(p[0], p[1]))
                .collect();
            Act::Complex2d(ComplexMatrix::from_vec(m.rows(), m.cols(), data).unwrap())
        }
        Act::Real3d(t) => {
            let mut out = RealTensor::zeros(t.channels, t.rows, t.cols);
            out.data.copy_from_slice(flat);
            Act::Real3d(out)
        }
        Act::Real1d(_) => Act::Real1d(flat.to_vec()),
    }
}

/// Scalar probe loss L = Σ probe ⊙ output. Injecting `probe` as the
/// output error reproduces exactly this loss's gradients.
pub fn probe_loss(out: &Act, probe: &Act) -> f64 {
    act_to_flat(out)
        .iter()
        .zip(act_to_flat(probe))
        .map(|(a, b)| a * b)
        .sum()
}

/// Worst relative error between a layer's accumulated parameter
/// gradients and central finite differences of the probe loss.
pub fn layer_param_grad_error(layer: &mut dyn Layer, x: &Act, probe: &Act, rel_step: f64) -> f64 {
    layer.zero_grads();
    layer.forward(x).expect("forward");
    layer.backward(probe).expect("backward");
    let mut analytic = Vec::new();
    layer.write_grads(&mut analytic);
    let mut params = Vec::new();
    layer.write_params(&mut params);

    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let h = rel_step * params[i].abs().max(1.0);
        let mut probe_params = params.clone();
        probe_params[i] = params[i] + h;
        layer.read_params(&probe_params).expect("read params");
        let lp = probe_loss(&layer.forward(x).expect("forward"), probe);
        probe_params[i] = params[i] - h;
        layer.read_params(&probe_params).expect("read params");
        let lm = probe_loss(&layer.forward(x).expect("forward"), probe);
        let fd = (lp - lm) / (2.0 * h);
        worst = worst.max(rel_error(analytic[i], fd));
    }
    layer.read_params(&params).expect("restore params");
    worst
}

/// Worst relative error between a layer's propagated input error and
/// central finite differences over every input component (real and
/// imaginary parts independently).
pub fn layer_input_grad_error(layer: &mut dyn Layer, x: &Act, probe: &Act, rel_step: f64) -> f64 {
    layer.zero_grads();
    layer.forward(x).expect("forward");
    let dprev = layer.backward(probe).expect("backward");
    let analytic = act_to_flat(&dprev);
    let flat0 = act_to_flat(x);
    assert_eq!(analytic.len(), flat0.len());

    let mut worst = 0.0f64;
    for i in 0..flat0.len() {
        let h = rel_step * flat0[i].abs().max(1.0);
        let mut flat = flat0.clone();
        flat[i] = flat0[i] + h;
        let lp = probe_loss(&layer.forward(&flat_to_act(x, &flat)).expect("forward"), probe);
        flat[i] = flat0[i] - h;
        let lm = probe_loss(&layer.forward(&flat_to_act(x, &flat)).expect("forward"), probe);
        let fd = (lp - lm) / (2.0 * h);
        worst = worst.max(rel_error(analytic[i], fd));
    }
    worst
}

/// Central difference d/dx f at `x0` with a step relative to |x0|.
pub fn central_diff(mut f: impl FnMut(f64) -> f64, x0: f64, rel_step: f64) -> f64 {
    let h = rel_step * x0.abs().max(1.0);
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}

/// Relative discrepancy between an analytic and a numeric derivative.
///
/// Tiny gradient components compare by absolute difference instead:
/// central differences carry an absolute cancellation noise floor around
/// 1e-11, which would read as a huge *relative* error on a component of
/// magnitude 1e-6 even when the analytic value is exact.
pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs());
    if denom < 1e-4 {
        (analytic - numeric).abs()
    } else {
        (analytic - numeric).abs() / denom
    }
}

/// Compare a full analytic gradient against central differences of `loss`
/// over a flat parameter vector. Returns the worst relative error.
pub fn max_grad_rel_error(
    mut loss: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    analytic: &[f64],
    rel_step: f64,
) -> f64 {
    assert_eq!(params.len(), analytic.len());
    let mut probe = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let fd = central_diff(
            |x| {
                probe[i] = x;
                let v = loss(&probe);
                probe[i] = params[i];
                v
            },
            params[i],
            rel_step,
        );
        worst = worst.max(rel_error(analytic[i], fd));
    }
    worst
}
