//! Raw video and image containers: YUV4MPEG2, headerless planar 4:2:0, and
//! binary PGM.

mod pgm;
mod raw;
mod y4m;

pub use pgm::{read_pgm, read_pgm_file, write_pgm, write_pgm_file, Gray8};
pub use raw::{read_raw_yuv_file, RawYuvReader};
pub use y4m::{read_y4m, write_y4m, Y4mReader, Y4mWriter};

use crate::error::{Error, Result};

/// One 4:2:0 frame. `u` and `v` are quarter-size planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameYuv420 {
    pub width: usize,
    pub height: usize,
    pub y: Vec<u8>,
    pub u: Vec<u8>,
    pub v: Vec<u8>,
}

impl FrameYuv420 {
    pub fn new(width: usize, height: usize, y: Vec<u8>, u: Vec<u8>, v: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        let c = (width / 2) * (height / 2);
        if y.len() != width * height || u.len() != c || v.len() != c {
            return Err(Error::Shape(format!(
                "plane sizes ({}, {}, {}) do not match {width}x{height} 4:2:0",
                y.len(),
                u.len(),
                v.len()
            )));
        }
        Ok(FrameYuv420 { width, height, y, u, v })
    }

    /// A frame with every sample of every plane set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        let c = (width / 2) * (height / 2);
        FrameYuv420 { width, height, y: vec![value; width * height], u: vec![value; c], v: vec![value; c] }
    }

    pub fn frame_len(width: usize, height: usize) -> usize {
        width * height + 2 * (width / 2) * (height / 2)
    }

    pub(crate) fn from_planar(width: usize, height: usize, buf: &[u8]) -> Self {
        let ylen = width * height;
        let clen = (width / 2) * (height / 2);
        FrameYuv420 {
            width,
            height,
            y: buf[..ylen].to_vec(),
            u: buf[ylen..ylen + clen].to_vec(),
            v: buf[ylen + clen..ylen + 2 * clen].to_vec(),
        }
    }

    pub fn planes(&self) -> [&[u8]; 3] {
        [&self.y, &self.u, &self.v]
    }

    pub fn planes_mut(&mut self) -> [&mut Vec<u8>; 3] {
        [&mut self.y, &mut self.u, &mut self.v]
    }

    pub fn same_shape(&self, other: &FrameYuv420) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Stream-level metadata. Everything but the dimensions is informational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoMeta {
    pub width: usize,
    pub height: usize,
    pub frame_count: Option<usize>,
    pub frame_rate: (u32, u32),
    /// Header tags other than `W`, `H` and `F`, kept verbatim (e.g. `Ip`,
    /// `A1:1`, `C420jpeg`).
    pub tags: Vec<String>,
}

impl VideoMeta {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(VideoMeta {
            width,
            height,
            frame_count: None,
            frame_rate: (30, 1),
            tags: vec!["Ip".into(), "A1:1".into(), "C420jpeg".into()],
        })
    }

    pub fn frame_len(&self) -> usize {
        FrameYuv420::frame_len(self.width, self.height)
    }

    /// Luma samples per frame.
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(Error::Shape(format!("frame dimensions {width}x{height} must be even and positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cif_frame_length() {
        assert_eq!(FrameYuv420::frame_len(352, 288), 152_064);
        assert_eq!(FrameYuv420::frame_len(4, 4), 24);
    }

    #[test]
    fn frame_shape_checks() {
        assert!(FrameYuv420::new(4, 4, vec![0; 16], vec![0; 4], vec![0; 4]).is_ok());
        assert!(matches!(FrameYuv420::new(4, 4, vec![0; 15], vec![0; 4], vec![0; 4]), Err(Error::Shape(_))));
        assert!(matches!(FrameYuv420::new(3, 4, vec![0; 12], vec![0; 2], vec![0; 2]), Err(Error::Shape(_))));
        assert!(VideoMeta::new(0, 2).is_err());
    }
}
