use std::fs::File;
use std::io::{BufReader, ErrorKind, Read};
use std::path::Path;

use super::{check_dims, FrameYuv420};
use crate::error::{Error, Result};

/// Headerless planar 4:2:0 frames back to back (Y, then U, then V).
pub struct RawYuvReader<R> {
    inner: R,
    width: usize,
    height: usize,
    buf: Vec<u8>,
    done: bool,
}

impl<R: Read> RawYuvReader<R> {
    pub fn new(inner: R, width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        let buf = vec![0u8; FrameYuv420::frame_len(width, height)];
        Ok(RawYuvReader { inner, width, height, buf, done: false })
    }

    fn fill(&mut self) -> Result<bool> {
        let mut got = 0;
        while got < self.buf.len() {
            match self.inner.read(&mut self.buf[got..]) {
                Ok(0) => break,
                Ok(n) => got += n,
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(e) => return Err(e.into()),
            }
        }
        if got == 0 {
            return Ok(false);
        }
        if got < self.buf.len() {
            return Err(Error::Io(std::io::Error::new(
                ErrorKind::UnexpectedEof,
                format!("partial frame: {got} of {} bytes", self.buf.len()),
            )));
        }
        Ok(true)
    }
}

impl<R: Read> Iterator for RawYuvReader<R> {
    type Item = Result<FrameYuv420>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.fill() {
            Ok(true) => Some(Ok(FrameYuv420::from_planar(self.width, self.height, &self.buf))),
            Ok(false) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Opens a raw file, checking up front that its length is a whole number of
/// frames. Returns the frame count and a streaming reader.
pub fn read_raw_yuv_file(path: &Path, width: usize, height: usize) -> Result<(usize, RawYuvReader<BufReader<File>>)> {
    check_dims(width, height)?;
    let file = File::open(path)?;
    let len = file.metadata()?.len() as usize;
    let frame = FrameYuv420::frame_len(width, height);
    if !len.is_multiple_of(frame) {
        return Err(Error::Format(format!(
            "{len} bytes is not a whole number of {width}x{height} 4:2:0 frames"
        )));
    }
    Ok((len / frame, RawYuvReader::new(BufReader::new(file), width, height)?))
}
