//! Single-level 2D integer Haar (S-transform) via lifting.
//!
//! Per pair `(a, b)`: `s = ⌊(a + b) / 2⌋`, `d = a - b`; inverse
//! `b = s - ⌊d / 2⌋`, `a = d + b`. Rows are transformed first (approximation
//! to the left half, detail to the right), then columns of each half. The
//! map is a bijection on integer matrices, so coefficient edits survive an
//! inverse/forward round trip exactly as long as the reconstructed samples
//! are stored without clipping.

use crate::error::{Error, Result};

/// The four quarter-size coefficient bands, each `width × height`
/// (half the plane's dimensions), row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubBands {
    pub width: usize,
    pub height: usize,
    pub ll: Vec<i32>,
    pub lh: Vec<i32>,
    pub hl: Vec<i32>,
    pub hh: Vec<i32>,
}

impl SubBands {
    pub fn zeros(width: usize, height: usize) -> Self {
        let n = width * height;
        SubBands { width, height, ll: vec![0; n], lh: vec![0; n], hl: vec![0; n], hh: vec![0; n] }
    }
}

#[inline]
pub fn lift_pair(a: i32, b: i32) -> (i32, i32) {
    ((a + b).div_euclid(2), a - b)
}

#[inline]
pub fn unlift_pair(s: i32, d: i32) -> (i32, i32) {
    let b = s - d.div_euclid(2);
    (d + b, b)
}

pub fn fwd_haar_int(plane: &[i32], width: usize, height: usize) -> Result<SubBands> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(Error::Shape(format!("plane {width}x{height} must have even, positive dimensions")));
    }
    if plane.len() != width * height {
        return Err(Error::Shape(format!("{} samples for a {width}x{height} plane", plane.len())));
    }
    let (hw, hh) = (width / 2, height / 2);

    // row pass: [s | d]
    let mut rows = vec![0i32; width * height];
    for (src, dst) in plane.chunks_exact(width).zip(rows.chunks_exact_mut(width)) {
        for j in 0..hw {
            let (s, d) = lift_pair(src[2 * j], src[2 * j + 1]);
            dst[j] = s;
            dst[hw + j] = d;
        }
    }

    let mut bands = SubBands::zeros(hw, hh);
    for i in 0..hh {
        let top = &rows[2 * i * width..(2 * i + 1) * width];
        let bot = &rows[(2 * i + 1) * width..(2 * i + 2) * width];
        for j in 0..hw {
            let (s, d) = lift_pair(top[j], bot[j]);
            bands.ll[i * hw + j] = s;
            bands.lh[i * hw + j] = d;
            let (s, d) = lift_pair(top[hw + j], bot[hw + j]);
            bands.hl[i * hw + j] = s;
            bands.hh[i * hw + j] = d;
        }
    }
    Ok(bands)
}

/// Convenience wrapper for 8-bit planes.
pub fn fwd_haar_u8(plane: &[u8], width: usize, height: usize) -> Result<SubBands> {
    let wide: Vec<i32> = plane.iter().map(|&s| s as i32).collect();
    fwd_haar_int(&wide, width, height)
}

/// Exact inverse of [`fwd_haar_int`]: columns first, then rows. Output is
/// not range-limited.
pub fn inv_haar_int(bands: &SubBands) -> Result<Vec<i32>> {
    let (hw, hh) = (bands.width, bands.height);
    let n = hw * hh;
    if hw == 0 || hh == 0 || [&bands.ll, &bands.lh, &bands.hl, &bands.hh].iter().any(|b| b.len() != n) {
        return Err(Error::Shape("sub-band dimensions disagree".into()));
    }
    let width = 2 * hw;
    let mut rows = vec![0i32; n * 4];
    for i in 0..hh {
        for j in 0..hw {
            let k = i * hw + j;
            let (a, b) = unlift_pair(bands.ll[k], bands.lh[k]);
            rows[2 * i * width + j] = a;
            rows[(2 * i + 1) * width + j] = b;
            let (a, b) = unlift_pair(bands.hl[k], bands.hh[k]);
            rows[2 * i * width + hw + j] = a;
            rows[(2 * i + 1) * width + hw + j] = b;
        }
    }
    let mut out = vec![0i32; n * 4];
    for (src, dst) in rows.chunks_exact(width).zip(out.chunks_exact_mut(width)) {
        for j in 0..hw {
            let (a, b) = unlift_pair(src[j], src[hw + j]);
            dst[2 * j] = a;
            dst[2 * j + 1] = b;
        }
    }
    Ok(out)
}
