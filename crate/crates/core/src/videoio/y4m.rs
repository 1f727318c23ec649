use std::io::{BufRead, ErrorKind, Read, Write};

use super::{check_dims, FrameYuv420, VideoMeta};
use crate::error::{Error, Result};

const MAGIC: &str = "YUV4MPEG2";
const MAX_HEADER: usize = 1024;

/// Reads one `\n`-terminated header line, capped so a bogus stream cannot
/// make us buffer without bound. Returns `None` at a clean end of stream.
fn read_line<R: BufRead>(r: &mut R) -> Result<Option<String>> {
    let mut line = Vec::new();
    let n = r.by_ref().take(MAX_HEADER as u64).read_until(b'\n', &mut line)?;
    if n == 0 {
        return Ok(None);
    }
    if line.last() != Some(&b'\n') {
        if n >= MAX_HEADER {
            return Err(Error::Format("header line too long".into()));
        }
        return Err(Error::Io(std::io::Error::new(ErrorKind::UnexpectedEof, "truncated header line")));
    }
    line.pop();
    String::from_utf8(line).map(Some).map_err(|_| Error::Format("header is not ASCII".into()))
}

fn parse_header(line: &str) -> Result<VideoMeta> {
    let mut tokens = line.split(' ').filter(|t| !t.is_empty());
    if tokens.next() != Some(MAGIC) {
        return Err(Error::Format("missing YUV4MPEG2 signature".into()));
    }
    let mut width = None;
    let mut height = None;
    let mut frame_rate = (30, 1);
    let mut tags = Vec::new();
    for tok in tokens {
        let (tag, val) = tok.split_at(1);
        match tag {
            "W" => width = val.parse::<usize>().ok(),
            "H" => height = val.parse::<usize>().ok(),
            "F" => {
                let (n, d) = val.split_once(':').ok_or_else(|| Error::Format(format!("bad frame rate `{tok}`")))?;
                frame_rate = (
                    n.parse().map_err(|_| Error::Format(format!("bad frame rate `{tok}`")))?,
                    d.parse().map_err(|_| Error::Format(format!("bad frame rate `{tok}`")))?,
                );
            }
            "C" => {
                if !val.starts_with("420") {
                    return Err(Error::UnsupportedFormat(format!("colorspace C{val}; only 4:2:0 is supported")));
                }
                tags.push(tok.to_string());
            }
            _ => tags.push(tok.to_string()),
        }
    }
    let (width, height) = match (width, height) {
        (Some(w), Some(h)) => (w, h),
        _ => return Err(Error::Format("header lacks W/H".into())),
    };
    check_dims(width, height)?;
    Ok(VideoMeta { width, height, frame_count: None, frame_rate, tags })
}

/// Streaming Y4M reader; holds at most one frame in memory.
pub struct Y4mReader<R> {
    inner: R,
    meta: VideoMeta,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let line = read_line(&mut inner)?.ok_or_else(|| Error::Format("empty stream".into()))?;
        let meta = parse_header(&line)?;
        let buf = vec![0u8; meta.frame_len()];
        Ok(Y4mReader { inner, meta, buf, done: false })
    }

    pub fn meta(&self) -> &VideoMeta {
        &self.meta
    }

    fn next_frame(&mut self) -> Result<Option<FrameYuv420>> {
        let line = match read_line(&mut self.inner)? {
            None => return Ok(None),
            Some(l) => l,
        };
        if line != "FRAME" && !line.starts_with("FRAME ") {
            return Err(Error::Format("expected FRAME marker".into()));
        }
        self.inner.read_exact(&mut self.buf)?;
        Ok(Some(FrameYuv420::from_planar(self.meta.width, self.meta.height, &self.buf)))
    }
}

impl<R: BufRead> Iterator for Y4mReader<R> {
    type Item = Result<FrameYuv420>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_frame() {
            Ok(Some(f)) => Some(Ok(f)),
            Ok(None) => {
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

/// Parses the header and returns the metadata with a lazy frame iterator.
pub fn read_y4m<R: BufRead>(stream: R) -> Result<(VideoMeta, Y4mReader<R>)> {
    let reader = Y4mReader::new(stream)?;
    Ok((reader.meta().clone(), reader))
}

pub struct Y4mWriter<W: Write> {
    inner: W,
    meta: VideoMeta,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut inner: W, meta: &VideoMeta) -> Result<Self> {
        check_dims(meta.width, meta.height)?;
        write!(inner, "{MAGIC} W{} H{} F{}:{}", meta.width, meta.height, meta.frame_rate.0, meta.frame_rate.1)?;
        for t in &meta.tags {
            write!(inner, " {t}")?;
        }
        inner.write_all(b"\n")?;
        Ok(Y4mWriter { inner, meta: meta.clone() })
    }

    pub fn write_frame(&mut self, frame: &FrameYuv420) -> Result<()> {
        if frame.width != self.meta.width || frame.height != self.meta.height {
            return Err(Error::Shape(format!(
                "frame {}x{} in a {}x{} stream",
                frame.width, frame.height, self.meta.width, self.meta.height
            )));
        }
        self.inner.write_all(b"FRAME\n")?;
        for plane in frame.planes() {
            self.inner.write_all(plane)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn write_y4m<'a, W, I>(meta: &VideoMeta, frames: I, stream: W) -> Result<W>
where
    W: Write,
    I: IntoIterator<Item = &'a FrameYuv420>,
{
    let mut w = Y4mWriter::new(stream, meta)?;
    for f in frames {
        w.write_frame(f)?;
    }
    w.finish()
}
