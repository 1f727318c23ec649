use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit single-channel raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Gray8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!("{} samples for a {width}x{height} raster", data.len())));
        }
        Ok(Gray8 { width, height, data })
    }
}

fn next_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = String::new();
    loop {
        let mut byte = [0u8; 1];
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(Error::Format("truncated PGM header".into()));
            }
            return Ok(tok);
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut skip = Vec::new();
            r.read_until(b'\n', &mut skip)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            return Ok(tok);
        }
        tok.push(c as char);
    }
}

fn header_number<R: BufRead>(r: &mut R, what: &str) -> Result<usize> {
    let t = next_token(r)?;
    t.parse().map_err(|_| Error::Format(format!("PGM {what} `{t}` is not a number")))
}

/// Binary PGM (`P5`) with maxval ≤ 255.
pub fn read_pgm<R: BufRead>(mut r: R) -> Result<Gray8> {
    if next_token(&mut r)? != "P5" {
        return Err(Error::Format("not a binary PGM (P5)".into()));
    }
    let width = header_number(&mut r, "width")?;
    let height = header_number(&mut r, "height")?;
    let maxval = header_number(&mut r, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!("PGM maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format("empty PGM raster".into()));
    }
    let mut data = vec![0u8; width * height];
    r.read_exact(&mut data)?;
    if maxval != 255 {
        for s in &mut data {
            *s = ((*s as usize * 255 + maxval / 2) / maxval).min(255) as u8;
        }
    }
    Ok(Gray8 { width, height, data })
}

pub fn write_pgm<W: Write>(img: &Gray8, mut w: W) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
    w.write_all(&img.data)?;
    w.flush()?;
    Ok(())
}

pub fn read_pgm_file(path: &Path) -> Result<Gray8> {
    read_pgm(BufReader::new(File::open(path)?))
}

pub fn write_pgm_file(img: &Gray8, path: &Path) -> Result<()> {
    write_pgm(img, BufWriter::new(File::create(path)?))
}
