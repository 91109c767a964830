//! Dataset serialization.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! magic "HRD1"
//! u32 n, u32 rows, u32 cols
//! u64 seed
//! per sample: u8 label, rows×cols × (f32 re, f32 im)
//! ```
//!
//! A text sidecar (same stem, `.manifest.txt`) lists the radar parameters
//! and generation settings as key=value lines; loading reads both files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::ctensor::{Complex, ComplexMatrix};
use crate::error::{Error, Result};

use super::{Dataset, RadarParams, Sample};

const MAGIC: &[u8; 4] = b"HRD1";

/// Generation settings recorded next to the binary samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub params: RadarParams,
    pub n: usize,
    pub seed: u64,
    pub snr_db: f64,
}

fn sidecar_path(data_path: &Path) -> PathBuf {
    data_path.with_extension("manifest.txt")
}

/// Write the binary dataset and its sidecar manifest.
pub fn save_dataset(path: &Path, ds: &Dataset, snr_db: f64) -> Result<()> {
    let rows = ds.params.raw_size;
    let cols = ds.params.raw_size;
    let mut buf: Vec<u8> = Vec::with_capacity(16 + ds.samples.len() * (1 + rows * cols * 8));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(ds.samples.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(rows as u32).to_le_bytes());
    buf.extend_from_slice(&(cols as u32).to_le_bytes());
    buf.extend_from_slice(&ds.seed.to_le_bytes());
    for sample in &ds.samples {
        if sample.raw.dims() != (rows, cols) {
            return Err(Error::Dimension(format!(
                "sample of {}x{} in a {rows}x{cols} dataset",
                sample.raw.rows(),
                sample.raw.cols()
            )));
        }
        buf.push(sample.label as u8);
        for v in sample.raw.data() {
            buf.extend_from_slice(&(v.re as f32).to_le_bytes());
            buf.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
    }

    let tmp = path.with_extension("hrd1.tmp");
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, path)?;

    let manifest = DatasetManifest {
        params: ds.params.clone(),
        n: ds.samples.len(),
        seed: ds.seed,
        snr_db,
    };
    fs::write(sidecar_path(path), manifest.to_text())?;
    Ok(())
}

/// Load a dataset and its manifest; parse failures report the byte
/// offset at which the binary file became unreadable.
pub fn load_dataset(path: &Path) -> Result<(Dataset, DatasetManifest)> {
    let manifest_text = fs::read_to_string(sidecar_path(path)).map_err(|e| Error::Format {
        offset: 0,
        msg: format!("missing dataset manifest {}: {e}", sidecar_path(path).display()),
    })?;
    let manifest = DatasetManifest::from_text(&manifest_text)?;

    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;

    let mut off = 0usize;
    let take = |off: &mut usize, n: usize, what: &str| -> Result<&[u8]> {
        if *off + n > buf.len() {
            return Err(Error::Format {
                offset: buf.len() as u64,
                msg: format!("file truncated while reading {what}"),
            });
        }
        let s = &buf[*off..*off + n];
        *off += n;
        Ok(s)
    };

    let magic = take(&mut off, 4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: format!("bad magic {magic:?}, expected \"HRD1\""),
        });
    }
    let n = u32::from_le_bytes(take(&mut off, 4, "sample count")?.try_into().unwrap()) as usize;
    let rows = u32::from_le_bytes(take(&mut off, 4, "rows")?.try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(take(&mut off, 4, "cols")?.try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(take(&mut off, 8, "seed")?.try_into().unwrap());

    if rows == 0 || cols == 0 {
        return Err(Error::Format {
            offset: 8,
            msg: format!("degenerate sample dimensions {rows}x{cols}"),
        });
    }
    if (rows, cols) != (manifest.params.raw_size, manifest.params.raw_size)
        || n != manifest.n
        || seed != manifest.seed
    {
        return Err(Error::Format {
            offset: 4,
            msg: "header disagrees with the sidecar manifest".into(),
        });
    }

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let label_off = off as u64;
        let label = take(&mut off, 1, "label")?[0] as usize;
        if label >= super::CLASS_COUNT {
            return Err(Error::Format {
                offset: label_off,
                msg: format!("label {label} out of range in sample {i}"),
            });
        }
        let payload = take(&mut off, rows * cols * 8, "sample payload")?;
        let mut data = Vec::with_capacity(rows * cols);
        for chunk in payload.chunks_exact(8) {
            let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap()) as f64;
            let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap()) as f64;
            data.push(Complex::new(re, im));
        }
        samples.push(Sample {
            raw: ComplexMatrix::from_vec(rows, cols, data)?,
            label,
        });
    }
    if off != buf.len() {
        return Err(Error::Format {
            offset: off as u64,
            msg: format!("{} trailing bytes", buf.len() - off),
        });
    }

    Ok((
        Dataset {
            samples,
            params: manifest.params.clone(),
            seed,
        },
        manifest,
    ))
}

impl DatasetManifest {
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        push("carrier_freq", format!("{}", p.carrier_freq));
        push("f_sr", format!("{}", p.f_sr));
        push("pulse_duration", format!("{}", p.pulse_duration));
        push("range_bandwidth", format!("{}", p.range_bandwidth));
        push("range_distance", format!("{}", p.range_distance));
        push("target_speed", format!("{}", p.target_speed));
        push("prf", format!("{}", p.prf));
        push("raw_size", format!("{}", p.raw_size));
        push("n", format!("{}", self.n));
        push("seed", format!("{}", self.seed));
        push("snr_db", format!("{}", self.snr_db));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                offset: lineno as u64,
                msg: format!("manifest line {} is not key=value", lineno + 1),
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<&String> {
            map.get(k).ok_or_else(|| Error::Format {
                offset: 0,
                msg: format!("manifest missing key {k}"),
            })
        };
        let f = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Format {
                offset: 0,
                msg: format!("manifest key {k} is not a number"),
            })
        };
        let u = |k: &str| -> Result<u64> {
            get(k)?.parse().map_err(|_| Error::Format {
                offset: 0,
                msg: format!("manifest key {k} is not an integer"),
            })
        };
        Ok(DatasetManifest {
            params: RadarParams {
                carrier_freq: f("carrier_freq")?,
                f_sr: f("f_sr")?,
                pulse_duration: f("pulse_duration")?,
                range_bandwidth: f("range_bandwidth")?,
                range_distance: f("range_distance")?,
                target_speed: f("target_speed")?,
                prf: f("prf")?,
                raw_size: u("raw_size")? as usize,
            },
            n: u("n")? as usize,
            seed: u("seed")?,
            snr_db: {
                let raw = get("snr_db")?;
                if raw == "inf" {
                    f64::INFINITY
                } else {
                    f("snr_db")?
                }
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar_sim::generate_dataset;

    #[test]
    fn save_load_round_trip_preserves_f32_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.hrd1");
        let params = RadarParams::desk();
        let ds = generate_dataset(4, &params, 20.0, 77).unwrap();
        save_dataset(&path, &ds, 20.0).unwrap();

        let (loaded, manifest) = load_dataset(&path).unwrap();
        assert_eq!(loaded.samples.len(), 4);
        assert_eq!(manifest.seed, 77);
        assert_eq!(manifest.params, params);
        for (a, b) in ds.samples.iter().zip(&loaded.samples) {
            assert_eq!(a.label, b.label);
            for (x, y) in a.raw.data().iter().zip(b.raw.data()) {
                assert_eq!(x.re as f32, y.re as f32);
                assert_eq!(x.im as f32, y.im as f32);
            }
        }
    }

    #[test]
    fn rewriting_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.hrd1");
        let b = dir.path().join("b.hrd1");
        let params = RadarParams::desk();
        let ds = generate_dataset(2, &params, 10.0, 5).unwrap();
        save_dataset(&a, &ds, 10.0).unwrap();
        save_dataset(&b, &ds, 10.0).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn truncated_file_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.hrd1");
        let params = RadarParams::desk();
        let ds = generate_dataset(2, &params, f64::INFINITY, 1).unwrap();
        save_dataset(&path, &ds, f64::INFINITY).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        match load_dataset(&path) {
            Err(Error::Format { msg, .. }) => assert!(msg.contains("truncated")),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_reports_offset_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.hrd1");
        let params = RadarParams::desk();
        let ds = generate_dataset(1, &params, f64::INFINITY, 1).unwrap();
        save_dataset(&path, &ds, f64::INFINITY).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        match load_dataset(&path) {
            Err(Error::Format { offset: 0, .. }) => {}
            other => panic!("expected format error at offset 0, got {other:?}"),
        }
    }

    #[test]
    fn infinite_snr_survives_the_manifest() {
        let m = DatasetManifest {
            params: RadarParams::desk(),
            n: 1,
            seed: 2,
            snr_db: f64::INFINITY,
        };
        let text = m.to_text();
        let back = DatasetManifest::from_text(&text).unwrap();
        assert_eq!(back, m);
    }
}
