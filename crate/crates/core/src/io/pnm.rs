use crate::error::{Error, Result};
use crate::image::Image2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmDepth {
    Eight,
    Sixteen,
}

impl PgmDepth {
    fn maxval(self) -> u32 {
        match self {
            PgmDepth::Eight => 255,
            PgmDepth::Sixteen => 65535,
        }
    }
}

/// Whitespace-separated header tokens with `#` comments, as in the netpbm family.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Header<'a> {
    fn new(bytes: &'a [u8], format: &'static str) -> Self {
        Self {
            bytes,
            pos: 0,
            format,
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b'#') => {
                    while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                        self.pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(_) => break,
                None => return Err(Error::format(self.format, "header ends early")),
            }
        }
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::format(self.format, "header is not ASCII"))
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::format(self.format, format!("bad {what} '{tok}'")))
    }

    /// Consumes the single whitespace byte separating header and payload.
    fn payload(self) -> Result<&'a [u8]> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(&self.bytes[self.pos + 1..]),
            _ => Err(Error::format(self.format, "missing payload")),
        }
    }
}

fn dimensions(h: &mut Header<'_>) -> Result<(usize, usize)> {
    let width: usize = h.number("width")?;
    let height: usize = h.number("height")?;
    if width == 0 || height == 0 {
        return Err(Error::format(
            h.format,
            format!("empty image {width}x{height}"),
        ));
    }
    Ok((width, height))
}

fn check_payload(format: &'static str, payload: &[u8], expected: usize) -> Result<()> {
    if payload.len() < expected {
        return Err(Error::format(
            format,
            format!("truncated payload: {} of {expected} bytes", payload.len()),
        ));
    }
    Ok(())
}

/// Binary PGM; samples are divided by maxval.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image2D> {
    let mut h = Header::new(bytes, "PGM");
    let magic = h.token()?;
    if magic != "P5" {
        return Err(Error::format(
            "PGM",
            format!("unsupported magic '{magic}' (expected P5)"),
        ));
    }
    let (width, height) = dimensions(&mut h)?;
    let maxval: u32 = h.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(
            "PGM",
            format!("maxval {maxval} out of range"),
        ));
    }
    let payload = h.payload()?;
    let n = width * height;
    let scale = maxval as f64;
    let data: Vec<f64> = if maxval < 256 {
        check_payload("PGM", payload, n)?;
        payload[..n].iter().map(|&b| b as f64 / scale).collect()
    } else {
        check_payload("PGM", payload, 2 * n)?;
        payload[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
            .collect()
    };
    Image2D::new(width, height, data)
}

/// Binary PGM; values are clamped to [0, 1] and rounded to the nearest level.
pub fn encode_pgm(img: &Image2D, depth: PgmDepth) -> Vec<u8> {
    let maxval = depth.maxval();
    let mut out = format!("P5\n{} {}\n{maxval}\n", img.width(), img.height()).into_bytes();
    let level = |v: f64| (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
    for &v in img.data() {
        match depth {
            PgmDepth::Eight => out.push(level(v) as u8),
            PgmDepth::Sixteen => out.extend_from_slice(&(level(v) as u16).to_be_bytes()),
        }
    }
    out
}

/// Grayscale PFM (`Pf`). A negative scale marks little-endian samples; rows
/// are stored bottom to top.
pub fn decode_pfm(bytes: &[u8]) -> Result<Image2D> {
    let mut h = Header::new(bytes, "PFM");
    let magic = h.token()?;
    match magic {
        "Pf" => {}
        "PF" => return Err(Error::format("PFM", "colour PFM is not supported")),
        other => {
            return Err(Error::format(
                "PFM",
                format!("unsupported magic '{other}' (expected Pf)"),
            ))
        }
    }
    let (width, height) = dimensions(&mut h)?;
    let scale: f64 = h.number("scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format("PFM", format!("invalid scale {scale}")));
    }
    let little = scale < 0.0;
    let payload = h.payload()?;
    let n = width * height;
    check_payload("PFM", payload, 4 * n)?;
    let mut data = vec![0.0; n];
    for (i, c) in payload[..4 * n].chunks_exact(4).enumerate() {
        let raw = [c[0], c[1], c[2], c[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (fy, x) = (i / width, i % width);
        data[(height - 1 - fy) * width + x] = v as f64;
    }
    Image2D::new(width, height, data)
}

/// Grayscale little-endian PFM.
pub fn encode_pfm(img: &Image2D) -> Vec<u8> {
    let mut out = format!("Pf\n{} {}\n-1.0\n", img.width(), img.height()).into_bytes();
    for y in (0..img.height()).rev() {
        for &v in img.row(y) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_levels() {
        let mut bytes = b"P5\n# comment\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255, 64]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.data(), &[0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0]);
    }

    #[test]
    fn pgm_sixteen_bit_is_big_endian() {
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x00, 0xff, 0xff]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.data(), &[256.0 / 65535.0, 1.0]);
        let again = decode_pgm(&encode_pgm(&img, PgmDepth::Sixteen)).unwrap();
        assert_eq!(again, img);
    }

    #[test]
    fn pgm_errors() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00\x01").is_err());
        assert!(decode_pgm(b"P5\n0 2\n255\n").is_err());
        assert!(decode_pgm(b"P5\n1 1\n").is_err());
        assert!(decode_pgm(b"P5\n1 1\n70000\n\x00\x00").is_err());
    }

    #[test]
    fn pfm_round_trip_and_orientation() {
        let img = Image2D::new(2, 2, vec![1.0, 2.0, 3.0, 1e-6]).unwrap();
        let bytes = encode_pfm(&img);
        assert!(bytes.starts_with(b"Pf\n2 2\n-1.0\n"));
        // Bottom row first.
        assert_eq!(&bytes[12..16], &3.0f32.to_le_bytes());
        assert_eq!(
            decode_pfm(&bytes).unwrap().data(),
            &[1.0, 2.0, 3.0, 1e-6f32 as f64]
        );
    }

    #[test]
    fn pfm_big_endian() {
        let mut bytes = b"Pf\n1 2\n1.0\n".to_vec();
        bytes.extend_from_slice(&0.5f32.to_be_bytes());
        bytes.extend_from_slice(&4.0f32.to_be_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap().data(), &[4.0, 0.5]);
        assert!(decode_pfm(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_pfm(b"PF\n1 1\n-1.0\n\x00\x00\x00\x00").is_err());
        assert!(decode_pfm(b"Pf\n1 1\n0\n\x00\x00\x00\x00").is_err());
    }
}
