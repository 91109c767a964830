//! Matched-filter signal-processing layer.
//!
//! The layer owns exactly two trainable scalars: dimensionless scale
//! factors `rho_r`, `rho_a` on the nominal range/azimuth FM rates. The
//! effective rates are K̂ = ρ·K_nominal; parameterizing by scale keeps the
//! two gradients on comparable footing even though the physical rates
//! differ by many orders of magnitude.
//!
//! Forward pass: build the filter, center it, circularly convolve with
//! the input and take the elementwise modulus. Backward chains the
//! modulus subgradient with the analytic phase derivatives
//! ∂M/∂K̂_r = −jπm′²·M and ∂M/∂K̂_a = +jπn′²·M, and propagates the input
//! error through the adjoint of the circular convolution.

use std::f64::consts::PI;

use crate::ctensor::{fft2, ifft2, wrap_center, Complex, ComplexMatrix};
use crate::error::{Error, Result};
use crate::network::{
    modulus_subgradient, Act, Layer, LayerDescriptor, LayerKind, ParamGroup, RealTensor,
};

/// Matched-filter layer state: trainable scales, fixed physical
/// constants, and the forward cache consumed by backward.
#[derive(Clone)]
pub struct MfLayer {
    rho_r: f64,
    rho_a: f64,
    k_r_nominal: f64,
    k_a_nominal: f64,
    f_sr: f64,
    prf: f64,
    filter_size: usize,
    grad_rho_r: f64,
    grad_rho_a: f64,
    cache: Option<MfCache>,
}

#[derive(Clone)]
struct MfCache {
    s_fft: ComplexMatrix,
    mc_fft: ComplexMatrix,
    z: ComplexMatrix,
    filter: ComplexMatrix,
}

impl MfLayer {
    /// New layer with ρ_r = ρ_a = 1 (filter at the nominal rates).
    pub fn new(
        filter_size: usize,
        k_r_nominal: f64,
        k_a_nominal: f64,
        f_sr: f64,
        prf: f64,
    ) -> Result<Self> {
        if filter_size < 2 {
            return Err(Error::Parameter(format!(
                "filter size {filter_size} must be at least 2"
            )));
        }
        if f_sr <= 0.0 || prf <= 0.0 {
            return Err(Error::Parameter(format!(
                "sampling rates must be positive, got F_sr={f_sr}, PRF={prf}"
            )));
        }
        Ok(MfLayer {
            rho_r: 1.0,
            rho_a: 1.0,
            k_r_nominal,
            k_a_nominal,
            f_sr,
            prf,
            filter_size,
            grad_rho_r: 0.0,
            grad_rho_a: 0.0,
            cache: None,
        })
    }

    pub fn set_rho(&mut self, rho_r: f64, rho_a: f64) -> Result<()> {
        if rho_r <= 0.0 || rho_a <= 0.0 {
            return Err(Error::Parameter(format!(
                "rho must be positive, got ({rho_r}, {rho_a})"
            )));
        }
        self.rho_r = rho_r;
        self.rho_a = rho_a;
        Ok(())
    }

    pub fn rho(&self) -> (f64, f64) {
        (self.rho_r, self.rho_a)
    }

    pub fn filter_size(&self) -> usize {
        self.filter_size
    }

    /// Effective FM rates K̂ = ρ·K_nominal.
    pub fn effective_rates(&self) -> (f64, f64) {
        (self.rho_r * self.k_r_nominal, self.rho_a * self.k_a_nominal)
    }

    /// Centered index (−F/2 … F/2−1) for raw index `i`.
    #[inline]
    fn centered(&self, i: usize) -> f64 {
        i as f64 - (self.filter_size / 2) as f64
    }

    /// Build the F×F matched filter: entry (m, n) is
    /// exp(−jπ K̂_r m′²)·exp(+jπ K̂_a n′²) with m′ = m_c/F_sr, n′ = n_c/PRF
    /// over zero-centered integer indices. Every entry has unit modulus.
    pub fn build_matched_filter(&self) -> ComplexMatrix {
        let (k_r, k_a) = self.effective_rates();
        let f = self.filter_size;
        ComplexMatrix::from_fn(f, f, |m, n| {
            let mp = self.centered(m) / self.f_sr;
            let np = self.centered(n) / self.prf;
            Complex::from_polar(1.0, -PI * k_r * mp * mp + PI * k_a * np * np)
        })
    }

    /// |centered circular convolution of the filter with S|, same size as
    /// S. S must have power-of-two dimensions at least the filter size.
    pub fn mf_forward(&mut self, s: &ComplexMatrix) -> Result<RealTensor> {
        let (rows, cols) = s.dims();
        if rows < self.filter_size || cols < self.filter_size {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} input smaller than {0}x{0} filter",
                self.filter_size
            )));
        }
        let filter = self.build_matched_filter();
        let mc = wrap_center(&filter, rows, cols)?;
        let mc_fft = fft2(&mc)?;
        let s_fft = fft2(s)?;
        let z = ifft2(&mc_fft.hadamard(&s_fft)?)?;

        let mut out = RealTensor::zeros(1, rows, cols);
        for (o, v) in out.data.iter_mut().zip(z.data()) {
            *o = v.norm();
        }
        self.cache = Some(MfCache {
            s_fft,
            mc_fft,
            z,
            filter,
        });
        Ok(out)
    }

    /// Exact gradients of the scalar loss with respect to ρ_r, ρ_a and
    /// the input, given the loss gradient `delta` on the forward output.
    pub fn mf_backward(&mut self, delta: &RealTensor) -> Result<(f64, f64, ComplexMatrix)> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::State("backward called before forward".into()))?;
        let (rows, cols) = cache.z.dims();
        if delta.channels != 1 || delta.rows != rows || delta.cols != cols {
            return Err(Error::Dimension(format!(
                "delta {}x{}x{} does not match {}x{} output",
                delta.channels, delta.rows, delta.cols, rows, cols
            )));
        }

        // Through the modulus: G_Z carries (∂L/∂re, ∂L/∂im) per entry.
        let mut g_z = ComplexMatrix::zeros(rows, cols);
        for ((g, zv), &dv) in g_z
            .data_mut()
            .iter_mut()
            .zip(cache.z.data())
            .zip(&delta.data)
        {
            *g = modulus_subgradient(*zv) * dv;
        }
        let g_fft = fft2(&g_z)?;

        // Gradient with respect to the embedded filter entries: circular
        // correlation of the output error with the conjugate input.
        let g_m_full = ifft2(&g_fft.hadamard(&cache.s_fft.conj())?)?;

        let f = self.filter_size;
        let mut d_k_r = 0.0;
        let mut d_k_a = 0.0;
        for m in 0..f {
            for n in 0..f {
                let r = (m + rows - f / 2) % rows;
                let c = (n + cols - f / 2) % cols;
                let g_m = g_m_full[(r, c)];
                let entry = cache.filter[(m, n)];
                let mp = self.centered(m) / self.f_sr;
                let np = self.centered(n) / self.prf;
                // dM/dK̂_r = −jπm′²·M and dM/dK̂_a = +jπn′²·M; contract the
                // real-pair error against them: dL/dK̂ = Σ (Lₓ·D_re + L_y·D_im).
                let dm_dkr = Complex::new(0.0, -PI * mp * mp) * entry;
                let dm_dka = Complex::new(0.0, PI * np * np) * entry;
                d_k_r += g_m.re * dm_dkr.re + g_m.im * dm_dkr.im;
                d_k_a += g_m.re * dm_dka.re + g_m.im * dm_dka.im;
            }
        }
        let d_rho_r = d_k_r * self.k_r_nominal;
        let d_rho_a = d_k_a * self.k_a_nominal;

        // Input gradient: adjoint of the circular convolution.
        let delta_prev = ifft2(&g_fft.hadamard(&cache.mc_fft.conj())?)?;

        Ok((d_rho_r, d_rho_a, delta_prev))
    }
}

impl Layer for MfLayer {
    fn kind(&self) -> LayerKind {
        LayerKind::MatchedFilter
    }

    fn forward(&mut self, x: &Act) -> Result<Act> {
        let s = x.as_complex2d()?;
        Ok(Act::Real3d(self.mf_forward(s)?))
    }

    fn backward(&mut self, delta: &Act) -> Result<Act> {
        let d = delta.as_real3d()?;
        let (d_rho_r, d_rho_a, delta_prev) = self.mf_backward(d)?;
        self.grad_rho_r += d_rho_r;
        self.grad_rho_a += d_rho_a;
        Ok(Act::Complex2d(delta_prev))
    }

    fn param_count(&self) -> usize {
        2
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        out.push(self.rho_r);
        out.push(self.rho_a);
    }

    fn read_params(&mut self, src: &[f64]) -> Result<()> {
        if src.len() != 2 {
            return Err(Error::Dimension(format!(
                "matched-filter layer expects 2 parameters, got {}",
                src.len()
            )));
        }
        self.rho_r = src[0];
        self.rho_a = src[1];
        Ok(())
    }

    fn write_grads(&self, out: &mut Vec<f64>) {
        out.push(self.grad_rho_r);
        out.push(self.grad_rho_a);
    }

    fn zero_grads(&mut self) {
        self.grad_rho_r = 0.0;
        self.grad_rho_a = 0.0;
    }

    fn apply_update(&mut self, update: &[f64]) -> Result<()> {
        if update.len() != 2 {
            return Err(Error::Dimension(format!(
                "matched-filter layer expects 2 updates, got {}",
                update.len()
            )));
        }
        self.rho_r += update[0];
        self.rho_a += update[1];
        Ok(())
    }

    fn descriptor(&self) -> LayerDescriptor {
        LayerDescriptor::new(LayerKind::MatchedFilter, vec![self.filter_size as u32], 2)
    }

    fn group(&self) -> ParamGroup {
        ParamGroup::Sp
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}
