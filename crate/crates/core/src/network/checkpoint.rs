//! Versioned binary model checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic "HNN1"
//! u32   layer count
//! per layer:  u8 kind, u8 ndims, ndims × u32 dims, u64 param_len
//! per layer:  param_len × f64 parameter block
//!             (complex values interleaved re, im)
//! ```
//!
//! Checkpoints are written atomically (temp file + rename), so a crashed
//! run never leaves a partial file behind.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{LayerDescriptor, LayerKind, Network};

const MAGIC: &[u8; 4] = b"HNN1";

/// Serialize the network's descriptor table and parameter blocks.
pub fn save_checkpoint(path: &Path, net: &Network) -> Result<()> {
    let descriptors = net.layer_descriptors();
    let blocks = net.write_params();

    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(descriptors.len() as u32).to_le_bytes());
    for d in &descriptors {
        buf.push(d.kind.code());
        buf.push(d.dims.len() as u8);
        for &dim in &d.dims {
            buf.extend_from_slice(&dim.to_le_bytes());
        }
        buf.extend_from_slice(&d.param_len.to_le_bytes());
    }
    for block in &blocks {
        for &v in block {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.offset + n > self.buf.len() {
            return Err(Error::Format {
                offset: self.buf.len() as u64,
                msg: format!("file truncated while reading {what}"),
            });
        }
        let slice = &self.buf[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn parse(buf: &[u8]) -> Result<(Vec<LayerDescriptor>, Vec<Vec<f64>>)> {
    let mut r = Reader { buf, offset: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: format!("bad magic {magic:?}, expected \"HNN1\""),
        });
    }
    let count = r.u32("layer count")? as usize;
    let mut descriptors = Vec::with_capacity(count);
    for i in 0..count {
        let at = r.offset as u64;
        let code = r.u8("layer kind")?;
        let kind = LayerKind::from_code(code).ok_or(Error::Format {
            offset: at,
            msg: format!("unknown layer kind {code}"),
        })?;
        let ndims = r.u8("dim count")? as usize;
        let mut dims = Vec::with_capacity(ndims);
        for _ in 0..ndims {
            dims.push(r.u32("dim")?);
        }
        let param_len = r.u64("param length")?;
        descriptors.push(LayerDescriptor::new(kind, dims, param_len));
        let _ = i;
    }
    let mut blocks = Vec::with_capacity(count);
    for d in &descriptors {
        let mut block = Vec::with_capacity(d.param_len as usize);
        for _ in 0..d.param_len {
            block.push(r.f64("parameter")?);
        }
        blocks.push(block);
    }
    if r.offset != buf.len() {
        return Err(Error::Format {
            offset: r.offset as u64,
            msg: format!("{} trailing bytes", buf.len() - r.offset),
        });
    }
    Ok((descriptors, blocks))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}

/// Read only the descriptor table (for architecture inference and
/// validation).
pub fn read_descriptors(path: &Path) -> Result<Vec<LayerDescriptor>> {
    let buf = read_file(path)?;
    Ok(parse(&buf)?.0)
}

/// Load parameters into an already constructed network. The checkpoint's
/// descriptor table must match the network layer for layer.
pub fn load_checkpoint_into(path: &Path, net: &mut Network) -> Result<()> {
    let buf = read_file(path)?;
    let (descriptors, blocks) = parse(&buf)?;
    let expected = net.layer_descriptors();
    if descriptors != expected {
        return Err(Error::Format {
            offset: 4,
            msg: format!(
                "checkpoint architecture mismatch: expected {expected:?}, found {descriptors:?}"
            ),
        });
    }
    net.read_params(&blocks)
}
