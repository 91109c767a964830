//! Activation values flowing between layers.
//!
//! The network starts complex (raw radar data), turns real at the first
//! modulus activation, and ends as a flat real vector in the classifier
//! head, so activations are a small closed union of shapes checked at run
//! time.

use crate::ctensor::ComplexMatrix;
use crate::error::{Error, Result};

/// Dense real tensor with channel-major layout: index (c, r, l) maps to
/// `(c*rows + r)*cols + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensor {
    pub channels: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealTensor {
    pub fn zeros(channels: usize, rows: usize, cols: usize) -> Self {
        RealTensor {
            channels,
            rows,
            cols,
            data: vec![0.0; channels * rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, c: usize, r: usize, l: usize) -> f64 {
        self.data[(c * self.rows + r) * self.cols + l]
    }

    #[inline]
    pub fn at_mut(&mut self, c: usize, r: usize, l: usize) -> &mut f64 {
        &mut self.data[(c * self.rows + r) * self.cols + l]
    }

    /// Contiguous slice holding one channel plane.
    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.rows * self.cols;
        &self.data[c * plane..(c + 1) * plane]
    }
}

/// A value passed between layers.
#[derive(Debug, Clone)]
pub enum Act {
    /// Single-channel complex matrix (raw data, complex feature map).
    Complex2d(ComplexMatrix),
    /// Multi-channel real feature map.
    Real3d(RealTensor),
    /// Flat real vector (classifier stages).
    Real1d(Vec<f64>),
}

impl Act {
    pub fn shape_desc(&self) -> String {
        match self {
            Act::Complex2d(m) => format!("complex {}x{}", m.rows(), m.cols()),
            Act::Real3d(t) => format!("real {}x{}x{}", t.channels, t.rows, t.cols),
            Act::Real1d(v) => format!("real vector[{}]", v.len()),
        }
    }

    pub fn as_complex2d(&self) -> Result<&ComplexMatrix> {
        match self {
            Act::Complex2d(m) => Ok(m),
            other => Err(Error::Dimension(format!(
                "expected a complex matrix, got {}",
                other.shape_desc()
            ))),
        }
    }

    pub fn as_real3d(&self) -> Result<&RealTensor> {
        match self {
            Act::Real3d(t) => Ok(t),
            other => Err(Error::Dimension(format!(
                "expected a real feature map, got {}",
                other.shape_desc()
            ))),
        }
    }

    pub fn as_real1d(&self) -> Result<&[f64]> {
        match self {
            Act::Real1d(v) => Ok(v),
            other => Err(Error::Dimension(format!(
                "expected a real vector, got {}",
                other.shape_desc()
            ))),
        }
    }
}
