//! Shape targets as scatterer clouds.
//!
//! Each target class is an outline — circle, square or triangle —
//! rasterized onto the raw sample grid as 30–80 point scatterers with
//! random amplitudes, random isotropic scale and random deformation,
//! placed at a random interior position.

use rand::Rng;

use crate::error::{Error, Result};

use super::{RadarParams, Scatterer};

pub const CLASS_COUNT: usize = 3;

/// Nominal shape footprint in raw samples (diameter before scaling).
pub const SHAPE_FOOTPRINT: f64 = 64.0;

const SCATTERER_RANGE: std::ops::RangeInclusive<usize> = 30..=80;
const SCALE_RANGE: std::ops::Range<f64> = 0.7..1.3;
const AMPLITUDE_RANGE: std::ops::Range<f64> = 0.5..1.5;
/// Vertex jitter bound as a fraction of the shape radius.
const JITTER_FRAC: f64 = 0.1;

pub fn class_name(label: usize) -> &'static str {
    match label {
        0 => "circle",
        1 => "square",
        2 => "triangle",
        _ => "unknown",
    }
}

/// Outline points of one shape in local pixel coordinates (centered at
/// the origin), with vertex jitter bounded by `jitter_frac`·radius.
fn outline_points(
    label: usize,
    count: usize,
    radius: f64,
    jitter_frac: f64,
    rng: &mut impl Rng,
) -> Result<Vec<(f64, f64)>> {
    match label {
        // Circle: evenly spaced points with radial jitter.
        0 => Ok((0..count)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / count as f64;
                let dr = if jitter_frac > 0.0 {
                    rng.gen_range(-jitter_frac..jitter_frac) * radius
                } else {
                    0.0
                };
                ((radius + dr) * theta.cos(), (radius + dr) * theta.sin())
            })
            .collect()),
        // Square / triangle: jitter the vertices, then walk the perimeter.
        1 | 2 => {
            let mut vertices: Vec<(f64, f64)> = if label == 1 {
                let h = radius / 2f64.sqrt();
                vec![(-h, -h), (-h, h), (h, h), (h, -h)]
            } else {
                (0..3)
                    .map(|k| {
                        let theta = std::f64::consts::FRAC_PI_2
                            + std::f64::consts::TAU * k as f64 / 3.0;
                        (radius * theta.cos(), radius * theta.sin())
                    })
                    .collect()
            };
            if jitter_frac > 0.0 {
                for v in &mut vertices {
                    v.0 += rng.gen_range(-jitter_frac..jitter_frac) * radius;
                    v.1 += rng.gen_range(-jitter_frac..jitter_frac) * radius;
                }
            }
            Ok(walk_perimeter(&vertices, count))
        }
        _ => Err(Error::Parameter(format!(
            "label {label} out of range for {CLASS_COUNT} classes"
        ))),
    }
}

/// `count` points spread at equal arc length along a closed polygon.
fn walk_perimeter(vertices: &[(f64, f64)], count: usize) -> Vec<(f64, f64)> {
    let n = vertices.len();
    let edge_len = |i: usize| {
        let (x0, y0) = vertices[i];
        let (x1, y1) = vertices[(i + 1) % n];
        ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
    };
    let perimeter: f64 = (0..n).map(edge_len).sum();

    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let mut target = perimeter * k as f64 / count as f64;
        let mut edge = 0;
        while target > edge_len(edge) && edge < n - 1 {
            target -= edge_len(edge);
            edge += 1;
        }
        let (x0, y0) = vertices[edge];
        let (x1, y1) = vertices[(edge + 1) % n];
        let len = edge_len(edge).max(f64::MIN_POSITIVE);
        let t = (target / len).min(1.0);
        points.push((x0 + (x1 - x0) * t, y0 + (y1 - y0) * t));
    }
    points
}

/// Render one shape of class `label` as scatterers on the raw grid.
///
/// Draws, in order: scatterer count, isotropic scale, center position,
/// outline geometry (with vertex jitter), and per-scatterer amplitudes.
/// Outline points snap to integer sample positions (the rasterization
/// quantum). Deterministic in the RNG state.
pub fn render_shape(
    label: usize,
    params: &RadarParams,
    rng: &mut impl Rng,
) -> Result<Vec<Scatterer>> {
    if label >= CLASS_COUNT {
        return Err(Error::Parameter(format!(
            "label {label} out of range for {CLASS_COUNT} classes"
        )));
    }
    let count = rng.gen_range(SCATTERER_RANGE);
    let scale = rng.gen_range(SCALE_RANGE);
    let radius = SHAPE_FOOTPRINT / 2.0 * scale;

    let margin = params.placement_margin();
    let lo = margin + radius * (1.0 + JITTER_FRAC);
    let hi = params.raw_size as f64 - 1.0 - margin - radius * (1.0 + JITTER_FRAC);
    if lo >= hi {
        return Err(Error::Parameter(format!(
            "raw size {} too small for a footprint of {} samples",
            params.raw_size, SHAPE_FOOTPRINT
        )));
    }
    let center_row = rng.gen_range(lo..hi);
    let center_col = rng.gen_range(lo..hi);

    let points = outline_points(label, count, radius, JITTER_FRAC, rng)?;
    let scatterers = points
        .iter()
        .map(|&(dr, dc)| {
            let row = (center_row + dr).round();
            let col = (center_col + dc).round();
            Scatterer {
                sigma: rng.gen_range(AMPLITUDE_RANGE),
                tau0: row / params.f_sr,
                t0: col / params.prf,
            }
        })
        .collect();
    Ok(scatterers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn undeformed_circle_points_are_equidistant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = outline_points(0, 48, 30.0, 0.0, &mut rng).unwrap();
        let (cx, cy) = pts
            .iter()
            .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        let (cx, cy) = (cx / pts.len() as f64, cy / pts.len() as f64);
        for (x, y) in &pts {
            let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
            assert!((d - 30.0).abs() < 1e-9, "distance {d}");
        }
    }

    #[test]
    fn undeformed_square_bounding_box_is_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = outline_points(1, 64, 30.0, 0.0, &mut rng).unwrap();
        let (min_x, max_x) = pts
            .iter()
            .fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (min_y, max_y) = pts
            .iter()
            .fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.1), a.1.max(p.1)));
        let aspect = (max_x - min_x) / (max_y - min_y);
        assert!((aspect - 1.0).abs() < 0.05, "aspect {aspect}");
    }

    #[test]
    fn fixed_seed_gives_identical_scatterers() {
        let params = RadarParams::desk();
        let a = render_shape(2, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = render_shape(2, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scatterer_count_and_margins_hold() {
        let params = RadarParams::desk();
        let margin = params.placement_margin();
        for seed in 0..20 {
            for label in 0..CLASS_COUNT {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let scs = render_shape(label, &params, &mut rng).unwrap();
                assert!((30..=80).contains(&scs.len()));
                for sc in &scs {
                    let m0 = sc.tau0 * params.f_sr;
                    let n0 = sc.t0 * params.prf;
                    assert!(m0 >= margin - 1.0 && m0 <= params.raw_size as f64 - margin);
                    assert!(n0 >= margin - 1.0 && n0 <= params.raw_size as f64 - margin);
                    assert!((0.5..1.5).contains(&sc.sigma));
                }
            }
        }
    }

    #[test]
    fn bad_label_is_rejected() {
        let params = RadarParams::desk();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(render_shape(3, &params, &mut rng).is_err());
    }
}
