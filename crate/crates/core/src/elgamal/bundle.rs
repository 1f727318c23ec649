use std::io::{Read, Write};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MECB";
const VERSION: u8 = 1;

/// Output of keystream encryption: the sender values needed to regenerate
/// the keystream and the ciphertext bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherBundle {
    pub bp: Vec<BigUint>,
    pub z: Vec<u8>,
    pub plain_len: usize,
}

impl CipherBundle {
    pub fn validate(&self, p: &BigUint) -> Result<()> {
        if self.z.len() != self.plain_len {
            return Err(Error::CorruptBundle(format!(
                "ciphertext has {} bytes, expected {}",
                self.z.len(),
                self.plain_len
            )));
        }
        if self.plain_len > 0 && self.bp.is_empty() {
            return Err(Error::CorruptBundle("no sender values for a non-empty payload".into()));
        }
        if let Some(d) = self.bp.iter().find(|d| d.is_zero() || *d >= p) {
            return Err(Error::CorruptBundle(format!("sender value {d} outside (0, p)")));
        }
        Ok(())
    }

    /// Serialized size of the sender values alone, in bytes.
    pub fn bp_overhead(&self) -> usize {
        self.bp.iter().map(|d| 4 + d.to_str_radix(10).len()).sum::<usize>() + 16
    }

    /// Binary layout: `"MECB"`, version byte, `plain_len` (u64 LE), bp count
    /// (u64 LE), each bp entry as a u32 LE length followed by ASCII decimal
    /// digits, then the raw ciphertext.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&(self.plain_len as u64).to_le_bytes())?;
        w.write_all(&(self.bp.len() as u64).to_le_bytes())?;
        for d in &self.bp {
            let digits = d.to_str_radix(10);
            w.write_all(&(digits.len() as u32).to_le_bytes())?;
            w.write_all(digits.as_bytes())?;
        }
        w.write_all(&self.z)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad cipher bundle magic".into()));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != VERSION {
            return Err(Error::UnsupportedFormat(format!("cipher bundle version {}", version[0])));
        }
        let plain_len = read_u64(&mut r)? as usize;
        let count = read_u64(&mut r)?;
        let mut bp = Vec::new();
        for _ in 0..count {
            let mut len = [0u8; 4];
            r.read_exact(&mut len)?;
            let mut digits = vec![0u8; u32::from_le_bytes(len) as usize];
            r.read_exact(&mut digits)?;
            let d = std::str::from_utf8(&digits)
                .ok()
                .and_then(|s| s.parse::<BigUint>().ok())
                .ok_or_else(|| Error::Format("bp entry is not a decimal integer".into()))?;
            bp.push(d);
        }
        let mut z = Vec::with_capacity(plain_len);
        r.read_to_end(&mut z)?;
        if z.len() != plain_len {
            return Err(Error::CorruptBundle(format!(
                "ciphertext has {} bytes, header says {}",
                z.len(),
                plain_len
            )));
        }
        Ok(CipherBundle { bp, z, plain_len })
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
