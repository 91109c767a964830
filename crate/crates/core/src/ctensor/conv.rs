//! FFT-based 2-D convolution / correlation.

use super::fft::{fft2, ifft2};
use super::ComplexMatrix;
use crate::error::{Error, Result};

fn check_kernel_fits(kernel: &ComplexMatrix, input: &ComplexMatrix) -> Result<()> {
    if kernel.rows() > input.rows() || kernel.cols() > input.cols() {
        return Err(Error::Dimension(format!(
            "kernel {}x{} larger than input {}x{}",
            kernel.rows(),
            kernel.cols(),
            input.rows(),
            input.cols()
        )));
    }
    Ok(())
}

/// Circular (periodic) 2-D convolution of `kernel` with `input`, same size
/// as `input`.
///
/// The kernel is zero-padded to the input size anchored at index (0,0);
/// callers that need a centered kernel shift it first (see
/// [`wrap_center`]). Input dimensions must be powers of two.
pub fn circ_conv2(kernel: &ComplexMatrix, input: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_kernel_fits(kernel, input)?;
    let (rows, cols) = input.dims();

    let mut padded = ComplexMatrix::zeros(rows, cols);
    for r in 0..kernel.rows() {
        for c in 0..kernel.cols() {
            padded[(r, c)] = kernel[(r, c)];
        }
    }

    let spec = fft2(&padded)?.hadamard(&fft2(input)?)?;
    ifft2(&spec)
}

/// "Valid" cross-correlation of `kernel` with `input` (no kernel flip, no
/// conjugation), output size (rows−krows+1)×(cols−kcols+1).
///
/// Computed through zero-padded FFTs so arbitrary (non-power-of-two) sizes
/// are accepted; the pad is sized to keep the linear result free of
/// wrap-around.
pub fn valid_conv2(kernel: &ComplexMatrix, input: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_kernel_fits(kernel, input)?;
    let (rows, cols) = input.dims();
    let (krows, kcols) = kernel.dims();
    let (orows, ocols) = (rows - krows + 1, cols - kcols + 1);

    let prows = (rows + krows - 1).next_power_of_two();
    let pcols = (cols + kcols - 1).next_power_of_two();

    let mut pin = ComplexMatrix::zeros(prows, pcols);
    for r in 0..rows {
        for c in 0..cols {
            pin[(r, c)] = input[(r, c)];
        }
    }
    // Correlation = convolution with the index-reversed kernel.
    let mut pker = ComplexMatrix::zeros(prows, pcols);
    for r in 0..krows {
        for c in 0..kcols {
            pker[(r, c)] = kernel[(krows - 1 - r, kcols - 1 - c)];
        }
    }

    let full = ifft2(&fft2(&pker)?.hadamard(&fft2(&pin)?)?)?;
    Ok(ComplexMatrix::from_fn(orows, ocols, |r, c| {
        full[(r + krows - 1, c + kcols - 1)]
    }))
}

/// Embed a kernel into a rows×cols zero matrix so that its central sample
/// lands at index (0,0), wrapping negative offsets around the borders.
///
/// For a kernel of side F the central sample is at (F/2, F/2), i.e. the
/// embedded entry for kernel index (m, n) sits at ((m−F/2) mod rows,
/// (n−F/2) mod cols). Circular convolution with the result behaves like a
/// "same"-size centered filter.
pub fn wrap_center(kernel: &ComplexMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    check_kernel_fits(kernel, &ComplexMatrix::zeros(rows, cols))?;
    let (krows, kcols) = kernel.dims();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for m in 0..krows {
        for n in 0..kcols {
            let r = (m + rows - krows / 2) % rows;
            let c = (n + cols - kcols / 2) % cols;
            out[(r, c)] = kernel[(m, n)];
        }
    }
    Ok(out)
}
