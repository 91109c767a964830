//! FFT convolution and transform paths against direct-summation oracles.

use hnn_core::ctensor::{circ_conv2, fft2, ifft2, valid_conv2, Complex, ComplexMatrix};
use hnn_core::reference::{circ_conv2_direct, dft2_direct, valid_conv2_direct};

use proptest::prelude::*;

fn rel_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    let scale = b.data().iter().map(|v| v.norm()).fold(1e-30, f64::max);
    a.max_abs_diff(b) <= tol * scale.max(1.0)
}

fn matrix_strategy(
    rows: usize,
    cols: usize,
) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(
        move |pairs| {
            ComplexMatrix::from_vec(
                rows,
                cols,
                pairs.iter().map(|&(re, im)| Complex::new(re, im)).collect(),
            )
            .unwrap()
        },
    )
}

#[test]
fn fft2_matches_direct_dft_and_parseval() {
    let mut state: u64 = 0x243F6A8885A308D3;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let m = ComplexMatrix::from_fn(8, 8, |_, _| Complex::new(next(), next()));
    let fast = fft2(&m).unwrap();
    let direct = dft2_direct(&m);
    assert!(rel_close(&fast, &direct, 1e-12));

    // Parseval: spectrum energy = rows·cols × input energy.
    let ratio = fast.energy() / m.energy();
    assert!((ratio - 64.0).abs() / 64.0 < 1e-12);
}

#[test]
fn fft2_round_trip_up_to_512() {
    for size in [1usize, 2, 4, 16, 64, 256, 512] {
        let m = ComplexMatrix::from_fn(size, size.max(2).min(64), |r, c| {
            Complex::new(
                ((r * 31 + c * 17) % 23) as f64 / 23.0 - 0.5,
                ((r * 13 + c * 7) % 19) as f64 / 19.0 - 0.5,
            )
        });
        let back = ifft2(&fft2(&m).unwrap()).unwrap();
        assert!(
            m.max_abs_diff(&back) < 1e-12,
            "round trip failed at {size}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn fft_round_trip_is_identity(
        m in (0usize..4, 0usize..4).prop_flat_map(|(rp, cp)| matrix_strategy(1 << rp, 1 << cp))
    ) {
        let back = ifft2(&fft2(&m).unwrap()).unwrap();
        prop_assert!(m.max_abs_diff(&back) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn circ_conv2_matches_direct_sum(
        (kernel, input) in ((1usize..=8, 1usize..=8), (2usize..=4, 2usize..=4)).prop_flat_map(
            |((kr, kc), (rp, cp))| {
                let rows = 1usize << rp;
                let cols = 1usize << cp;
                (
                    matrix_strategy(kr.min(rows), kc.min(cols)),
                    matrix_strategy(rows, cols),
                )
            },
        )
    ) {
        let fast = circ_conv2(&kernel, &input).unwrap();
        let direct = circ_conv2_direct(&kernel, &input);
        prop_assert!(rel_close(&fast, &direct, 1e-9), "max diff {}", fast.max_abs_diff(&direct));
    }

    #[test]
    fn valid_conv2_matches_direct_sum(
        (kernel, input) in ((1usize..=6, 1usize..=6), (6usize..=16, 6usize..=16)).prop_flat_map(
            |((kr, kc), (rows, cols))| {
                (matrix_strategy(kr, kc), matrix_strategy(rows, cols))
            },
        )
    ) {
        let fast = valid_conv2(&kernel, &input).unwrap();
        let direct = valid_conv2_direct(&kernel, &input);
        prop_assert_eq!(fast.dims(), (input.rows() - kernel.rows() + 1, input.cols() - kernel.cols() + 1));
        prop_assert!(rel_close(&fast, &direct, 1e-9), "max diff {}", fast.max_abs_diff(&direct));
    }

    #[test]
    fn circ_conv2_is_linear(
        (kernel, x, y, a, b) in (2usize..=4, 2usize..=4).prop_flat_map(|(kr, kc)| {
            (
                matrix_strategy(kr, kc),
                matrix_strategy(8, 8),
                matrix_strategy(8, 8),
                -2.0f64..2.0,
                -2.0f64..2.0,
            )
        })
    ) {
        let combo = ComplexMatrix::from_fn(8, 8, |r, c| x[(r, c)] * a + y[(r, c)] * b);
        let lhs = circ_conv2(&kernel, &combo).unwrap();
        let cx = circ_conv2(&kernel, &x).unwrap();
        let cy = circ_conv2(&kernel, &y).unwrap();
        let rhs = ComplexMatrix::from_fn(8, 8, |r, c| cx[(r, c)] * a + cy[(r, c)] * b);
        prop_assert!(rel_close(&lhs, &rhs, 1e-10));
    }
}

#[test]
fn valid_conv_five_by_five_on_sixteen() {
    let kernel = ComplexMatrix::from_fn(5, 5, |r, c| {
        Complex::new((r as f64 - 2.0) * 0.3, (c as f64 - 2.0) * 0.2)
    });
    let input = ComplexMatrix::from_fn(16, 16, |r, c| {
        Complex::new(((r * c) % 7) as f64 - 3.0, ((r + c) % 5) as f64 - 2.0)
    });
    let fast = valid_conv2(&kernel, &input).unwrap();
    assert_eq!(fast.dims(), (12, 12));
    let direct = valid_conv2_direct(&kernel, &input);
    assert!(rel_close(&fast, &direct, 1e-9));
}
