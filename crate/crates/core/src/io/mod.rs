//! File formats: PGM (P5), PFM, Middlebury `.flo`, JSON reports and flat
//! `key = value` configuration files.
//!
//! Every writer goes through [`write_atomic`], so a failed write never
//! leaves a partial file behind.

mod config;
mod flo;
mod pnm;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image2D;

pub use config::{parse_config, read_config, ConfigMap};
pub use flo::{decode_flo, encode_flo, read_flow, write_flow, FLO_MAGIC};
pub use pnm::{decode_pfm, decode_pgm, encode_pfm, encode_pgm, PgmDepth};

/// Writes through a temporary file in the target directory and renames it
/// into place once `fill` succeeded.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        fill(&mut out)?;
        out.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Reads a PGM or PFM image, chosen by extension.
pub fn read_image(path: &Path) -> Result<Image2D> {
    let bytes = fs::read(path)?;
    match extension(path).as_str() {
        "pgm" => decode_pgm(&bytes),
        "pfm" => decode_pfm(&bytes),
        other => Err(Error::input(format!(
            "unsupported image extension '{other}' for {} (expected .pgm or .pfm)",
            path.display()
        ))),
    }
}

/// Writes a PGM (8-bit, values clamped to [0, 1]) or PFM image, chosen by extension.
pub fn write_image(path: &Path, img: &Image2D) -> Result<()> {
    let bytes = match extension(path).as_str() {
        "pgm" => encode_pgm(img, PgmDepth::Eight),
        "pfm" => encode_pfm(img),
        other => {
            return Err(Error::input(format!(
                "unsupported image extension '{other}' for {} (expected .pgm or .pfm)",
                path.display()
            )))
        }
    };
    write_atomic(path, |out| Ok(out.write_all(&bytes)?))
}

/// Pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n")?;
        Ok(())
    })
}
