//! Embedding capacity, MSE, PSNR and global SSIM.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::videoio::FrameYuv420;

pub const MAX_SAMPLE: f64 = 255.0;
pub const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Peak signal-to-noise ratio; identical inputs have no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Identical,
    Db(f64),
}

impl Psnr {
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Db(v) => Some(v),
            Psnr::Identical => None,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Identical => f.write_str("identical"),
            Psnr::Db(v) => write!(f, "{v:.4}"),
        }
    }
}

pub fn psnr_from_mse(mse: f64) -> Psnr {
    if mse == 0.0 {
        Psnr::Identical
    } else {
        Psnr::Db(10.0 * (MAX_SAMPLE * MAX_SAMPLE / mse).log10())
    }
}

/// Sum of squared differences and sample count across paired planes.
fn sq_err(pairs: &[(&[u8], &[u8])]) -> Result<(f64, usize)> {
    let mut sum = 0u64;
    let mut n = 0usize;
    for (a, b) in pairs {
        if a.len() != b.len() {
            return Err(Error::Shape(format!("plane lengths {} vs {}", a.len(), b.len())));
        }
        sum += a
            .iter()
            .zip(b.iter())
            .map(|(&x, &y)| {
                let d = x as i64 - y as i64;
                (d * d) as u64
            })
            .sum::<u64>();
        n += a.len();
    }
    Ok((sum as f64, n))
}

/// MSE over any set of paired planes, weighting every sample equally.
pub fn mse_planes(pairs: &[(&[u8], &[u8])]) -> Result<f64> {
    let (sum, n) = sq_err(pairs)?;
    if n == 0 {
        return Err(Error::InvalidInput("no samples".into()));
    }
    Ok(sum / n as f64)
}

/// MSE over all Y, U and V samples of two frames.
pub fn mse(a: &FrameYuv420, b: &FrameYuv420) -> Result<f64> {
    check_frames(a, b)?;
    mse_planes(&[(&a.y, &b.y), (&a.u, &b.u), (&a.v, &b.v)])
}

/// MSE over the luma plane only.
pub fn mse_luma(a: &FrameYuv420, b: &FrameYuv420) -> Result<f64> {
    check_frames(a, b)?;
    mse_planes(&[(&a.y, &b.y)])
}

pub fn psnr(a: &FrameYuv420, b: &FrameYuv420) -> Result<Psnr> {
    mse(a, b).map(psnr_from_mse)
}

fn check_frames(a: &FrameYuv420, b: &FrameYuv420) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Shape(format!(
            "frames {}x{} and {}x{} differ",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Single-window SSIM over the whole image with population statistics.
pub fn ssim(o: &[u8], e: &[u8]) -> Result<f64> {
    if o.len() != e.len() {
        return Err(Error::Shape(format!("images of {} and {} samples", o.len(), e.len())));
    }
    if o.len() < 2 {
        return Err(Error::InvalidInput("SSIM needs at least two samples".into()));
    }
    let n = o.len() as f64;
    let mu_o = o.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mu_e = e.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut var_o, mut var_e, mut cov) = (0.0, 0.0, 0.0);
    for (&a, &b) in o.iter().zip(e) {
        let da = a as f64 - mu_o;
        let db = b as f64 - mu_e;
        var_o += da * da;
        var_e += db * db;
        cov += da * db;
    }
    var_o /= n;
    var_e /= n;
    cov /= n;
    Ok(((2.0 * mu_o * mu_e + SSIM_C1) * (2.0 * cov + SSIM_C2))
        / ((mu_o * mu_o + mu_e * mu_e + SSIM_C1) * (var_o + var_e + SSIM_C2)))
}

/// Bits per pixel, counting luma samples as the cover size.
pub fn capacity(embedded_bits: u64, video_pixels: u64) -> Result<f64> {
    if video_pixels == 0 {
        return Err(Error::InvalidInput("cover has zero pixels".into()));
    }
    Ok(embedded_bits as f64 / video_pixels as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameQuality {
    pub mse: f64,
    pub psnr: Psnr,
    pub mse_luma: f64,
    pub psnr_luma: Psnr,
}

impl FrameQuality {
    pub fn measure(reference: &FrameYuv420, test: &FrameYuv420) -> Result<Self> {
        let mse = mse(reference, test)?;
        let mse_luma = mse_luma(reference, test)?;
        Ok(FrameQuality { mse, psnr: psnr_from_mse(mse), mse_luma, psnr_luma: psnr_from_mse(mse_luma) })
    }
}

/// Per-frame fidelity of one video plus its embedding capacity.
#[derive(Debug, Clone, Default)]
pub struct QualityReport {
    pub frames: Vec<FrameQuality>,
    pub embedded_bits: u64,
    pub cover_pixels: u64,
    /// SSIM of each recovered QR level (L, M, Q, H) against its original.
    pub qr_ssim: Option<[f64; 4]>,
    /// Per-frame MSE introduced by preprocessing the cover before embedding,
    /// kept apart from `frames`, which measure against the preprocessed cover.
    pub clip_mse: Vec<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl QualityReport {
    pub fn push(&mut self, q: FrameQuality) {
        self.frames.push(q);
    }

    /// Mean per-frame PSNR over all planes, skipping identical frames.
    pub fn average_psnr(&self) -> Option<f64> {
        mean(self.frames.iter().filter_map(|f| f.psnr.db()))
    }

    pub fn average_psnr_luma(&self) -> Option<f64> {
        mean(self.frames.iter().filter_map(|f| f.psnr_luma.db()))
    }

    pub fn average_mse(&self) -> Option<f64> {
        mean(self.frames.iter().map(|f| f.mse))
    }

    pub fn average_clip_mse(&self) -> Option<f64> {
        mean(self.clip_mse.iter().copied())
    }

    pub fn mse_range(&self) -> Option<(f64, f64)> {
        let mut it = self.frames.iter().map(|f| f.mse);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    pub fn capacity(&self) -> Result<f64> {
        capacity(self.embedded_bits, self.cover_pixels)
    }

    /// `frame_index,mse,psnr` rows followed by an `average` summary row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "frame_index,mse,psnr")?;
        for (i, f) in self.frames.iter().enumerate() {
            writeln!(w, "{i},{:.6},{}", f.mse, f.psnr)?;
        }
        let avg_mse = self.average_mse().map_or("".to_string(), |v| format!("{v:.6}"));
        let avg_psnr = self.average_psnr().map_or("identical".to_string(), |v| format!("{v:.4}"));
        writeln!(w, "average,{avg_mse},{avg_psnr}")?;
        Ok(())
    }
}
