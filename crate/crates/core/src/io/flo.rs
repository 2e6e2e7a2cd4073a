use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{FlowField, Image2D};
use crate::io::write_atomic;

/// Tag at the start of every `.flo` file ("PIEH" read as a little-endian f32).
pub const FLO_MAGIC: f32 = 202021.25;

/// Sanity bound on either dimension, as in the Middlebury reference reader.
const MAX_EXTENT: u32 = 100_000;

pub fn decode_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 12 {
        return Err(Error::format("flo", "file shorter than its header"));
    }
    let word = |i: usize| {
        [
            bytes[4 * i],
            bytes[4 * i + 1],
            bytes[4 * i + 2],
            bytes[4 * i + 3],
        ]
    };
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::format("flo", format!("bad magic {magic}")));
    }
    let width = u32::from_le_bytes(word(1));
    let height = u32::from_le_bytes(word(2));
    if width == 0 || height == 0 || width > MAX_EXTENT || height > MAX_EXTENT {
        return Err(Error::format(
            "flo",
            format!("bad dimensions {width}x{height}"),
        ));
    }
    let (w, h) = (width as usize, height as usize);
    let n = w * h;
    let payload = &bytes[12..];
    if payload.len() < 8 * n {
        return Err(Error::format(
            "flo",
            format!("truncated payload: {} of {} bytes", payload.len(), 8 * n),
        ));
    }
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for c in payload[..8 * n].chunks_exact(8) {
        u.push(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
        v.push(f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64);
    }
    FlowField::new(Image2D::new(w, h, u)?, Image2D::new(w, h, v)?)
}

pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let n = flow.u.len();
    let mut out = Vec::with_capacity(12 + 8 * n);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as u32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as u32).to_le_bytes());
    for (&u, &v) in flow.u.data().iter().zip(flow.v.data()) {
        out.extend_from_slice(&(u as f32).to_le_bytes());
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn read_flow(path: &Path) -> Result<FlowField> {
    decode_flo(&fs::read(path)?)
}

pub fn write_flow(path: &Path, flow: &FlowField) -> Result<()> {
    let bytes = encode_flo(flow);
    write_atomic(path, |out| Ok(out.write_all(&bytes)?))
}
