//! Bilevel QR planes and their bit-packed byte form.

use crate::error::{Error, Result};
use crate::videoio::Gray8;

/// Samples below this value are dark modules.
pub const THRESHOLD: u8 = 128;

/// Row-major bilevel image; `1` marks a dark module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrPlane {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<u8>,
}

impl QrPlane {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape("QR plane must be non-empty".into()));
        }
        if bits.len() != width * height {
            return Err(Error::Shape(format!("{} bits for a {width}x{height} plane", bits.len())));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput("QR plane bits must be 0 or 1".into()));
        }
        Ok(QrPlane { width, height, bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Dark modules as 0, light as 255.
    pub fn render(&self) -> Gray8 {
        Gray8 {
            width: self.width,
            height: self.height,
            data: self.bits.iter().map(|&b| if b == 1 { 0 } else { 255 }).collect(),
        }
    }
}

pub fn load_qr(image: &Gray8) -> Result<QrPlane> {
    if image.width == 0 || image.height == 0 || image.data.is_empty() {
        return Err(Error::Format("empty raster".into()));
    }
    if image.data.len() != image.width * image.height {
        return Err(Error::Shape("raster size does not match its dimensions".into()));
    }
    let bits = image.data.iter().map(|&s| u8::from(s < THRESHOLD)).collect();
    Ok(QrPlane { width: image.width, height: image.height, bits })
}

/// `ceil(bit_count / 8)` bytes, most significant bit first, zero padded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedPayload {
    pub bit_count: usize,
    pub bytes: Vec<u8>,
}

impl PackedPayload {
    /// Validating constructor: length must match and pad bits must be zero.
    pub fn from_bytes(bit_count: usize, bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() != bit_count.div_ceil(8) {
            return Err(Error::Shape(format!("{} bytes cannot hold exactly {bit_count} bits", bytes.len())));
        }
        let p = PackedPayload { bit_count, bytes };
        if !p.pad_is_clear() {
            return Err(Error::InvalidInput("nonzero padding bits".into()));
        }
        Ok(p)
    }

    pub fn pad_bits(&self) -> usize {
        self.bytes.len() * 8 - self.bit_count
    }

    pub fn pad_is_clear(&self) -> bool {
        match (self.pad_bits(), self.bytes.last()) {
            (0, _) | (_, None) => true,
            (pad, Some(&last)) => last & ((1u8 << pad) - 1) == 0,
        }
    }

    /// Clears the padding bits of the last byte.
    pub fn clear_pad(&mut self) {
        let pad = self.pad_bits();
        if pad > 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= !((1u8 << pad) - 1);
            }
        }
    }

    pub fn bit(&self, i: usize) -> u8 {
        (self.bytes[i / 8] >> (7 - i % 8)) & 1
    }
}

/// MSB-first packing of a {0,1} slice.
pub fn pack_bits(bits: &[u8]) -> PackedPayload {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        bytes[i / 8] |= (b & 1) << (7 - i % 8);
    }
    PackedPayload { bit_count: bits.len(), bytes }
}

/// First `bit_count` bits of `bytes`, MSB first.
pub fn unpack_bits(bytes: &[u8], bit_count: usize) -> Vec<u8> {
    (0..bit_count).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect()
}

pub fn pack(plane: &QrPlane) -> PackedPayload {
    pack_bits(&plane.bits)
}

pub fn unpack(payload: &PackedPayload, width: usize, height: usize) -> Result<QrPlane> {
    if payload.bit_count != width * height {
        return Err(Error::Shape(format!(
            "{} payload bits for a {width}x{height} plane",
            payload.bit_count
        )));
    }
    if payload.bytes.len() != payload.bit_count.div_ceil(8) {
        return Err(Error::Shape("payload byte count does not match bit count".into()));
    }
    QrPlane::new(width, height, unpack_bits(&payload.bytes, payload.bit_count))
}
