//! Direct-summation reference implementations.
//!
//! These are deliberately naive O(N⁴)/O(N²K²) loops kept independent of
//! the FFT paths; the test suites validate the fast implementations
//! against them.

use std::f64::consts::TAU;

use crate::ctensor::{Complex, ComplexMatrix};

/// O(N⁴) 2-D DFT by the defining double sum.
pub fn dft2_direct(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = m.dims();
    ComplexMatrix::from_fn(rows, cols, |k, l| {
        let mut acc = Complex::new(0.0, 0.0);
        for r in 0..rows {
            for c in 0..cols {
                let phase = -TAU * (k as f64 * r as f64 / rows as f64
                    + l as f64 * c as f64 / cols as f64);
                acc += m[(r, c)] * Complex::from_polar(1.0, phase);
            }
        }
        acc
    })
}

/// Circular 2-D convolution by the defining double sum with periodic
/// index wrap-around. Kernel is anchored at (0,0), matching
/// [`crate::ctensor::circ_conv2`].
pub fn circ_conv2_direct(kernel: &ComplexMatrix, input: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = input.dims();
    let (krows, kcols) = kernel.dims();
    ComplexMatrix::from_fn(rows, cols, |p, q| {
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..krows {
            for j in 0..kcols {
                let r = (p + rows - i % rows) % rows;
                let c = (q + cols - j % cols) % cols;
                acc += kernel[(i, j)] * input[(r, c)];
            }
        }
        acc
    })
}

/// Valid cross-correlation by the defining double sum, matching
/// [`crate::ctensor::valid_conv2`].
pub fn valid_conv2_direct(kernel: &ComplexMatrix, input: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = input.dims();
    let (krows, kcols) = kernel.dims();
    ComplexMatrix::from_fn(rows - krows + 1, cols - kcols + 1, |p, q| {
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..krows {
            for j in 0..kcols {
                acc += kernel[(i, j)] * input[(p + i, q + j)];
            }
        }
        acc
    })
}
