//! Synthetic radar raw-data generation.
//!
//! Point targets return chirp echoes with quadratic phase in both range
//! (fast time) and azimuth (slow time); shape targets are outlines
//! sampled into scatterer clouds; datasets are labeled collections of
//! superposed echoes plus circular complex white Gaussian noise.

mod io;
mod shapes;

pub use io::{load_dataset, save_dataset, DatasetManifest};
pub use shapes::{class_name, render_shape, CLASS_COUNT, SHAPE_FOOTPRINT};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ctensor::{Complex, ComplexMatrix};
use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical and sampling constants of the simulated radar.
///
/// The FM rates are derived quantities: K_r = bandwidth/duration for the
/// transmitted chirp, K_a = 2v²/(λR) for the azimuth phase history of a
/// uniformly moving target at closest range R.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarParams {
    /// Carrier frequency (Hz).
    pub carrier_freq: f64,
    /// Range sampling rate F_sr (Hz).
    pub f_sr: f64,
    /// Transmitted pulse duration (s).
    pub pulse_duration: f64,
    /// Chirp bandwidth (Hz).
    pub range_bandwidth: f64,
    /// Closest range to the target trajectory (m).
    pub range_distance: f64,
    /// Target speed (m/s).
    pub target_speed: f64,
    /// Pulse repetition frequency, the azimuth sampling rate (Hz).
    pub prf: f64,
    /// Raw data matrix side length (samples).
    pub raw_size: usize,
}

impl RadarParams {
    /// Full-scale parameter set: C-band chirp radar, 512×512 raw data.
    pub fn full() -> Self {
        RadarParams {
            carrier_freq: 5.0e9,
            f_sr: 600.0e6,
            pulse_duration: 10.0e-6,
            range_bandwidth: 500.0e6,
            range_distance: 5_000.0,
            target_speed: 100.0,
            prf: 1_000.0,
            raw_size: 512,
        }
    }

    /// Desk-scale parameter set: 128×128 raw data with the sampling rates
    /// reduced 4× so the chirp keeps a proportional footprint.
    pub fn desk() -> Self {
        RadarParams {
            f_sr: 150.0e6,
            prf: 250.0,
            raw_size: 128,
            ..Self::full()
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Derived FM rates (K_r, K_a) in Hz/s.
    pub fn derive_rates(&self) -> Result<(f64, f64)> {
        for (name, v) in [
            ("carrier_freq", self.carrier_freq),
            ("f_sr", self.f_sr),
            ("pulse_duration", self.pulse_duration),
            ("range_bandwidth", self.range_bandwidth),
            ("range_distance", self.range_distance),
            ("target_speed", self.target_speed),
            ("prf", self.prf),
        ] {
            if !(v > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let k_r = self.range_bandwidth / self.pulse_duration;
        let k_a = 2.0 * self.target_speed * self.target_speed
            / (self.wavelength() * self.range_distance);
        Ok((k_r, k_a))
    }

    /// Minimum distance (samples) a scatterer keeps from the matrix edge.
    pub fn placement_margin(&self) -> f64 {
        self.raw_size as f64 / 8.0
    }
}

/// Derived FM rates of a parameter set.
pub fn derive_rates(params: &RadarParams) -> Result<(f64, f64)> {
    params.derive_rates()
}

/// A point scatterer: backscattering amplitude and its position in range
/// delay / azimuth closest-approach time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    /// Backscattering amplitude (≥ 0).
    pub sigma: f64,
    /// Range time delay (s).
    pub tau0: f64,
    /// Azimuth time of closest approach (s).
    pub t0: f64,
}

/// One labeled raw-data matrix.
#[derive(Debug, Clone)]
pub struct Sample {
    pub raw: ComplexMatrix,
    /// 0 = circle, 1 = square, 2 = triangle.
    pub label: usize,
}

/// A labeled, seed-reproducible collection of samples.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub params: RadarParams,
    pub seed: u64,
}

/// Range/azimuth support half-widths of an echo, in seconds.
///
/// The range window is the transmitted pulse duration; the azimuth window
/// spans the same extent in samples.
fn support_half_widths(params: &RadarParams) -> (f64, f64) {
    let half_range = params.pulse_duration / 2.0;
    let range_extent_samples = params.pulse_duration * params.f_sr;
    let half_azimuth = range_extent_samples / 2.0 / params.prf;
    (half_range, half_azimuth)
}

fn check_in_bounds(sc: &Scatterer, params: &RadarParams) -> Result<()> {
    if sc.sigma < 0.0 {
        return Err(Error::Parameter(format!(
            "scatterer amplitude must be non-negative, got {}",
            sc.sigma
        )));
    }
    let m0 = sc.tau0 * params.f_sr;
    let n0 = sc.t0 * params.prf;
    let hi = params.raw_size as f64 - 1.0;
    if !(0.0..=hi).contains(&m0) || !(0.0..=hi).contains(&n0) {
        return Err(Error::Placement(format!(
            "scatterer at sample ({m0:.1}, {n0:.1}) outside the {0}x{0} matrix",
            params.raw_size
        )));
    }
    Ok(())
}

/// Per-row and per-column chirp factors of one scatterer's echo; the echo
/// matrix is σ times their outer product. Entries outside the support
/// windows are zero.
fn echo_factors(
    sc: &Scatterer,
    params: &RadarParams,
    k_r: f64,
    k_a: f64,
) -> (Vec<Complex>, Vec<Complex>) {
    let n = params.raw_size;
    let (half_r, half_a) = support_half_widths(params);
    let mut rows = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    for m in 0..n {
        let dt = m as f64 / params.f_sr - sc.tau0;
        rows.push(if dt.abs() <= half_r {
            Complex::from_polar(1.0, PI * k_r * dt * dt)
        } else {
            Complex::new(0.0, 0.0)
        });
    }
    for l in 0..n {
        let dt = l as f64 / params.prf - sc.t0;
        cols.push(if dt.abs() <= half_a {
            Complex::from_polar(1.0, -PI * k_a * dt * dt)
        } else {
            Complex::new(0.0, 0.0)
        });
    }
    (rows, cols)
}

/// Baseband echo of a single point scatterer: entry (m, n) is
/// σ·exp(jπK_r(τ−τ₀)²)·exp(−jπK_a(t−t₀)²) inside the chirp support
/// windows, zero outside. Every in-support entry has modulus σ.
pub fn point_echo(sc: &Scatterer, params: &RadarParams) -> Result<ComplexMatrix> {
    check_in_bounds(sc, params)?;
    let (k_r, k_a) = params.derive_rates()?;
    let n = params.raw_size;
    let (rows, cols) = echo_factors(sc, params, k_r, k_a);
    let mut out = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        if rows[m].norm_sqr() == 0.0 {
            continue;
        }
        let row_factor = rows[m] * sc.sigma;
        let base = m * n;
        for l in 0..n {
            out.data_mut()[base + l] = row_factor * cols[l];
        }
    }
    Ok(out)
}

/// One standard normal draw (Box-Muller).
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Synthesize one labeled sample: superpose the echoes of a rendered
/// shape, then add circular complex white Gaussian noise scaled so that
/// (mean signal power over the union of echo supports) / (noise power
/// per sample) equals 10^(snr_db/10). Pass `f64::INFINITY` for a
/// noiseless sample.
pub fn synthesize(
    label: usize,
    params: &RadarParams,
    snr_db: f64,
    rng: &mut impl Rng,
) -> Result<Sample> {
    if snr_db.is_nan() {
        return Err(Error::Parameter("snr_db must not be NaN".into()));
    }
    let (k_r, k_a) = params.derive_rates()?;
    let scatterers = render_shape(label, params, rng)?;

    let n = params.raw_size;
    let mut raw = ComplexMatrix::zeros(n, n);
    let mut row_support = vec![false; n];
    let mut col_support = vec![false; n];
    let mut union = vec![false; n * n];
    for sc in &scatterers {
        check_in_bounds(sc, params)?;
        let (rows, cols) = echo_factors(sc, params, k_r, k_a);
        for (flag, v) in row_support.iter_mut().zip(&rows) {
            *flag = v.norm_sqr() > 0.0;
        }
        for (flag, v) in col_support.iter_mut().zip(&cols) {
            *flag = v.norm_sqr() > 0.0;
        }
        for m in 0..n {
            if !row_support[m] {
                continue;
            }
            let row_factor = rows[m] * sc.sigma;
            let base = m * n;
            for l in 0..n {
                raw.data_mut()[base + l] += row_factor * cols[l];
            }
            for l in 0..n {
                union[base + l] |= col_support[l];
            }
        }
    }

    if snr_db.is_finite() {
        let support_cells = union.iter().filter(|&&u| u).count();
        if support_cells > 0 {
            let signal_power: f64 = raw
                .data()
                .iter()
                .zip(&union)
                .filter(|(_, &u)| u)
                .map(|(v, _)| v.norm_sqr())
                .sum::<f64>()
                / support_cells as f64;
            let noise_power = signal_power / 10f64.powf(snr_db / 10.0);
            let std = (noise_power / 2.0).sqrt();
            for v in raw.data_mut() {
                *v += Complex::new(std * standard_normal(rng), std * standard_normal(rng));
            }
        }
    }

    Ok(Sample { raw, label })
}

/// RNG stream for sample `index` of a dataset seeded with `seed`.
/// Streams are independent, so generation order does not matter.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Generate `n` samples with labels stratified round-robin over the
/// three classes. Bit-reproducible in (n, params, snr_db, seed).
pub fn generate_dataset(
    n: usize,
    params: &RadarParams,
    snr_db: f64,
    seed: u64,
) -> Result<Dataset> {
    if n < 1 {
        return Err(Error::Parameter("dataset size must be at least 1".into()));
    }
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = sample_rng(seed, i);
        samples.push(synthesize(i % CLASS_COUNT, params, snr_db, &mut rng)?);
    }
    Ok(Dataset {
        samples,
        params: params.clone(),
        seed,
    })
}
