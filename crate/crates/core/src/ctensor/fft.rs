//! Radix-2 2-D FFT over [`ComplexMatrix`] values.
//!
//! Dimensions are restricted to powers of two; the raw data sizes used by
//! the simulator (128, 512) satisfy this by construction. The forward
//! transform is unnormalized, the inverse carries the full 1/(rows·cols)
//! factor.

use std::f64::consts::TAU;

use super::{Complex, ComplexMatrix};
use crate::error::{Error, Result};

/// Unnormalized 2-D DFT. Both dimensions must be powers of two.
pub fn fft2(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    transform(m, false)
}

/// Exact inverse of [`fft2`], including the 1/(rows·cols) normalization.
pub fn ifft2(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut out = transform(m, true)?;
    let scale = 1.0 / (m.rows() * m.cols()) as f64;
    for v in out.data_mut() {
        *v *= scale;
    }
    Ok(out)
}

fn transform(m: &ComplexMatrix, inverse: bool) -> Result<ComplexMatrix> {
    let (rows, cols) = m.dims();
    if !rows.is_power_of_two() || !cols.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "fft2 requires power-of-two dimensions, got {rows}x{cols}"
        )));
    }

    let mut out = m.clone();

    let row_tw = twiddles(cols, inverse);
    for r in 0..rows {
        let row = &mut out.data_mut()[r * cols..(r + 1) * cols];
        fft_inplace(row, &row_tw);
    }

    let col_tw = twiddles(rows, inverse);
    let mut col = vec![Complex::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = out.data()[r * cols + c];
        }
        fft_inplace(&mut col, &col_tw);
        for r in 0..rows {
            out.data_mut()[r * cols + c] = col[r];
        }
    }

    Ok(out)
}

/// Precomputed unit roots e^(±2πjk/n) for k < n/2. Evaluating each root
/// directly (rather than accumulating products) keeps the transform
/// accurate to a few ulps, which the round-trip tolerance relies on.
fn twiddles(n: usize, inverse: bool) -> Vec<Complex> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n / 2)
        .map(|k| Complex::from_polar(1.0, sign * TAU * k as f64 / n as f64))
        .collect()
}

/// Iterative radix-2 decimation-in-time FFT. `buf.len()` must be a power
/// of two and `tw` must hold the matching half-length twiddle table.
fn fft_inplace(buf: &mut [Complex], tw: &[Complex]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    debug_assert_eq!(tw.len(), n / 2);

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for chunk in buf.chunks_exact_mut(len) {
            for i in 0..len / 2 {
                let w = tw[i * stride];
                let u = chunk[i];
                let v = chunk[i + len / 2] * w;
                chunk[i] = u + v;
                chunk[i + len / 2] = u - v;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn dft_of_constant_concentrates_at_origin() {
        let ones = ComplexMatrix::from_fn(4, 4, |_, _| c(1.0, 0.0));
        let spec = fft2(&ones).unwrap();
        assert!((spec[(0, 0)] - c(16.0, 0.0)).norm() < 1e-12);
        for r in 0..4 {
            for cc in 0..4 {
                if (r, cc) != (0, 0) {
                    assert!(spec[(r, cc)].norm() < 1e-12, "nonzero bin at {r},{cc}");
                }
            }
        }
    }

    #[test]
    fn dft_of_impulse_is_flat() {
        let mut imp = ComplexMatrix::zeros(4, 4);
        imp[(0, 0)] = c(1.0, 0.0);
        let spec = fft2(&imp).unwrap();
        for v in spec.data() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ifft2_inverts_fft2_spike() {
        let mut spike = ComplexMatrix::zeros(4, 4);
        spike[(0, 0)] = c(16.0, 0.0);
        let back = ifft2(&spike).unwrap();
        for v in back.data() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ifft2_of_zeros_is_zeros() {
        let z = ComplexMatrix::zeros(8, 4);
        let back = ifft2(&z).unwrap();
        assert!(back.data().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn non_power_of_two_is_rejected() {
        let m = ComplexMatrix::zeros(3, 4);
        assert!(matches!(fft2(&m), Err(Error::Dimension(_))));
        assert!(matches!(ifft2(&m), Err(Error::Dimension(_))));
    }
}
