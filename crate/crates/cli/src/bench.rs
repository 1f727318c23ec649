//! Imperceptibility and robustness tables over a directory of Y4M clips.
//!
//! Table 1 has one row per clip: frames, size, mean PSNR (all planes and
//! luma only), mean MSE, mean MSE of the luma clip alone, capacity in bits
//! per pixel and the mean size of the sender values per frame. Table 2 has one row per clip and attack:
//! the SSIM of each recovered QR level against its original, averaged over
//! frames and attack seeds.

use std::io::Write;
use std::path::{Path, PathBuf};

use qrsteg_core::attacks::{AttackSpec, Noise};
use qrsteg_core::elgamal::{keygen, GroupParams};
use qrsteg_core::permute::derive_seed;
use qrsteg_core::quality::{ssim, QualityReport};
use qrsteg_core::stego::{
    decrypt_bits, embed_video, extract_frame, Layout, Level, QrSet, Sidecar, StegoConfig, VideoEmbedder,
};
use qrsteg_core::videoio::{FrameYuv420, VideoMeta};
use qrsteg_core::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::commands::{measure_frame, open_video};
use crate::error::CliResult;
use crate::synth;

const KEY_STREAM: u64 = 0x4B45_5900_0000_0001;
const QR_STREAM: u64 = 0x5152_0000_0000_0002;
const NOISE_STREAM: u64 = 0x4E4F_4953_0000_0003;
const EPHEMERAL_STREAM: u64 = 0x4550_4800_0000_0004;

pub fn paper_attacks() -> Vec<Noise> {
    vec![
        Noise::SaltPepper { density: 0.01 },
        Noise::SaltPepper { density: 0.1 },
        Noise::Gaussian { mean: 0.0, variance: 0.01 },
        Noise::Gaussian { mean: 0.0, variance: 0.1 },
        Noise::Poisson,
        Noise::Speckle { variance: 0.05 },
    ]
}

/// Stego key, a 256-bit key pair and payloads all derived from one seed.
pub fn seeded_config(seed: u64) -> StegoConfig {
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, KEY_STREAM));
    let (public, private) = keygen(&GroupParams::default_256(), &mut rng);
    StegoConfig { key: qrsteg_core::permute::StegoKey::new(seed), public, private: Some(private) }
}

/// One clip after embedding, kept in memory for repeated attacks.
pub struct Embedded {
    pub meta: VideoMeta,
    pub layout: Layout,
    pub set: QrSet,
    pub stego: Vec<FrameYuv420>,
    pub sidecar: Sidecar,
    pub quality: QualityReport,
    pub bp_overhead: f64,
}

/// Embeds `set` into every frame, measuring each stego frame against its cover.
pub fn embed_clip<I>(meta: &VideoMeta, frames: I, cfg: &StegoConfig, set: QrSet, base_seed: u64) -> Result<Embedded>
where
    I: IntoIterator<Item = Result<FrameYuv420>>,
{
    let sets = [set];
    let embedder = VideoEmbedder::new(cfg, meta.width, meta.height, &sets, base_seed)?;
    let mut stego = Vec::new();
    let mut sidecar = Sidecar::new(meta, cfg.key);
    let mut quality = QualityReport::default();
    let mut overhead = 0usize;
    let n = embed_video(frames, &embedder, |cover, s, record| {
        measure_frame(&mut quality, cover, &s)?;
        overhead += record.bp_overhead();
        stego.push(s);
        sidecar.push(record);
        Ok(())
    })?;
    quality.embedded_bits = (n * embedder.layout().bits_per_frame()) as u64;
    quality.cover_pixels = (n * meta.pixels()) as u64;
    let layout = embedder.layout().clone();
    let [set] = sets;
    Ok(Embedded {
        meta: meta.clone(),
        layout,
        set,
        stego,
        sidecar,
        quality,
        bp_overhead: if n == 0 { 0.0 } else { overhead as f64 / n as f64 },
    })
}

impl Embedded {
    /// Mean SSIM per level after attacking every frame with `noise` seeded
    /// by `seed`, then extracting and decrypting.
    pub fn recovered_ssim(&self, cfg: &StegoConfig, noise: Noise, seed: u64) -> Result<[f64; 4]> {
        let private = cfg
            .private
            .as_ref()
            .ok_or_else(|| qrsteg_core::Error::KeyParameter("robustness needs the private key".into()))?;
        let spec = AttackSpec::new(noise, seed)?;
        let originals = Level::ALL.map(|l| self.set.get(l).render().data);
        let rows: Vec<[f64; 4]> = self
            .stego
            .par_iter()
            .enumerate()
            .map(|(i, frame)| {
                let mut attacked = frame.clone();
                spec.apply_frame(&mut attacked, i as u64);
                let bits = extract_frame(&attacked, &self.layout)?;
                let got = decrypt_bits(&bits, &self.sidecar.frames[i], &self.layout, &cfg.public.p, private)?;
                let mut row = [0.0; 4];
                for l in Level::ALL {
                    row[l.index()] = ssim(&originals[l.index()], &got.get(l).render().data)?;
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(mean_rows(&rows))
    }

    /// [`Self::recovered_ssim`] averaged over `seeds` independent noise draws.
    pub fn attack_ssim(&self, cfg: &StegoConfig, noise: Noise, base_seed: u64, seeds: usize) -> Result<[f64; 4]> {
        let rows = (0..seeds as u64)
            .map(|s| self.recovered_ssim(cfg, noise, derive_seed(base_seed, s)))
            .collect::<Result<Vec<_>>>()?;
        Ok(mean_rows(&rows))
    }
}

fn mean_rows(rows: &[[f64; 4]]) -> [f64; 4] {
    let mut m = [0.0; 4];
    for row in rows {
        for (a, v) in m.iter_mut().zip(row) {
            *a += v / rows.len() as f64;
        }
    }
    m
}

pub struct BenchOptions {
    pub seed: u64,
    pub attacks: Vec<Noise>,
    pub seeds: usize,
    pub max_frames: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipRow {
    pub video: String,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub psnr: Option<f64>,
    pub psnr_luma: Option<f64>,
    pub mse: Option<f64>,
    pub clip_mse: Option<f64>,
    pub capacity: f64,
    pub bp_overhead: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsimRow {
    pub video: String,
    pub attack: Noise,
    pub ssim: [f64; 4],
}

#[derive(Debug, Default)]
pub struct BenchReport {
    pub clips: Vec<ClipRow>,
    pub ssim: Vec<SsimRow>,
}

/// `*.y4m` files directly under `dir`, sorted by name.
pub fn list_clips(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut clips: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("y4m")))
        .collect();
    clips.sort();
    Ok(clips)
}

pub fn run(dir: &Path, cfg: &StegoConfig, o: &BenchOptions) -> CliResult<BenchReport> {
    let mut report = BenchReport::default();
    for path in list_clips(dir)? {
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let (meta, frames) = open_video(&path, None, None)?;
        let frames = frames.take(o.max_frames.unwrap_or(usize::MAX));
        let set = synth::qr_set(meta.width / 2, meta.height / 2, derive_seed(o.seed, QR_STREAM));
        let clip = embed_clip(&meta, frames, cfg, set, derive_seed(o.seed, EPHEMERAL_STREAM))?;
        let n = clip.stego.len();
        report.clips.push(ClipRow {
            video: name.clone(),
            frames: n,
            width: meta.width,
            height: meta.height,
            psnr: clip.quality.average_psnr(),
            psnr_luma: clip.quality.average_psnr_luma(),
            mse: clip.quality.average_mse(),
            clip_mse: clip.quality.average_clip_mse(),
            capacity: if n == 0 { 0.0 } else { clip.quality.capacity()? },
            bp_overhead: clip.bp_overhead,
        });
        if n == 0 {
            continue;
        }
        let noise_seed = derive_seed(o.seed, NOISE_STREAM);
        report.ssim.push(SsimRow {
            video: name.clone(),
            attack: Noise::Identity,
            ssim: clip.recovered_ssim(cfg, Noise::Identity, noise_seed)?,
        });
        for &attack in &o.attacks {
            let ssim = clip.attack_ssim(cfg, attack, noise_seed, o.seeds.max(1))?;
            report.ssim.push(SsimRow { video: name.clone(), attack, ssim });
        }
    }
    Ok(report)
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "identical".to_string(), |v| format!("{v:.digits$}"))
}

impl BenchReport {
    pub fn write_clips<W: Write>(&self, w: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "video",
            "frames",
            "width",
            "height",
            "psnr_db",
            "psnr_y_db",
            "mse",
            "clip_mse",
            "capacity_bpp",
            "bp_bytes_per_frame",
        ])?;
        for r in &self.clips {
            w.write_record([
                r.video.clone(),
                r.frames.to_string(),
                r.width.to_string(),
                r.height.to_string(),
                opt(r.psnr, 4),
                opt(r.psnr_luma, 4),
                r.mse.map_or_else(String::new, |v| format!("{v:.6}")),
                r.clip_mse.map_or_else(String::new, |v| format!("{v:.6}")),
                format!("{:.6}", r.capacity),
                format!("{:.1}", r.bp_overhead),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_ssim<W: Write>(&self, w: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["video", "attack", "ssim_l", "ssim_m", "ssim_q", "ssim_h"])?;
        for r in &self.ssim {
            let mut rec = vec![r.video.clone(), r.attack.to_string()];
            rec.extend(r.ssim.iter().map(|v| format!("{v:.4}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
