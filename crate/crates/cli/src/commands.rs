//! One function per subcommand. Each validates its arguments before
//! touching the filesystem and returns a summary for the caller to print.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use qrsteg_core::attacks::{AttackSpec, Noise};
use qrsteg_core::bitplane::load_qr;
use qrsteg_core::elgamal::keyfile::{private_to_string, public_to_string, read_private, read_public};
use qrsteg_core::elgamal::{keygen as draw_keypair, keypair_from_exponent, GroupParams};
use qrsteg_core::permute::{derive_seed, fnv1a64, StegoKey};
use qrsteg_core::quality::{self, ssim, FrameQuality, QualityReport};
use qrsteg_core::stego::{clip_luma, embed_video, extract_video, Level, QrSet, Sidecar, StegoConfig, VideoEmbedder};
use qrsteg_core::videoio::{read_pgm_file, read_raw_yuv_file, write_pgm_file, FrameYuv420, VideoMeta, Y4mReader, Y4mWriter};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{CliError, CliResult, WithPath};
use crate::synth::{self, Pattern};

pub const SEED_ENV: &str = "QRSTEG_SEED";

/// `explicit`, else `QRSTEG_SEED`, else `None`.
pub fn seed_or_env(explicit: Option<u64>) -> CliResult<Option<u64>> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

/// The stego key from `--seed`, `--passphrase` or the environment.
pub fn stego_key(seed: Option<u64>, passphrase: Option<&str>) -> CliResult<StegoKey> {
    match (seed, passphrase) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --seed or --passphrase, not both".into())),
        (Some(s), None) => Ok(StegoKey::new(s)),
        (None, Some(p)) => Ok(StegoKey::from_passphrase(p)),
        (None, None) => seed_or_env(None)?
            .map(StegoKey::new)
            .ok_or_else(|| CliError::Usage(format!("a stego key is required: --seed, --passphrase or {SEED_ENV}"))),
    }
}

pub type FrameIter = Box<dyn Iterator<Item = qrsteg_core::Result<FrameYuv420>> + Send>;

fn raw_dims(width: Option<usize>, height: Option<usize>) -> CliResult<Option<(usize, usize)>> {
    match (width, height) {
        (Some(w), Some(h)) => Ok(Some((w, h))),
        (None, None) => Ok(None),
        _ => Err(CliError::Usage("--width and --height go together".into())),
    }
}

/// Opens a Y4M file, or raw planar I420 when dimensions are supplied.
pub fn open_video(path: &Path, width: Option<usize>, height: Option<usize>) -> CliResult<(VideoMeta, FrameIter)> {
    if let Some((w, h)) = raw_dims(width, height)? {
        let (count, reader) = read_raw_yuv_file(path, w, h).at(path)?;
        let mut meta = VideoMeta::new(w, h).at(path)?;
        meta.frame_count = Some(count);
        return Ok((meta, Box::new(reader)));
    }
    let file = File::open(path).map_err(|e| CliError::File { path: path.display().to_string(), source: e.into() })?;
    let mut reader = BufReader::new(file);
    if !reader.fill_buf()?.starts_with(b"YUV4MPEG2") {
        return Err(CliError::Usage(format!(
            "{}: not a Y4M stream; raw I420 input needs --width and --height",
            path.display()
        )));
    }
    let y4m = Y4mReader::new(reader).at(path)?;
    Ok((y4m.meta().clone(), Box::new(y4m)))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::File { path: path.display().to_string(), source: e.into() })
}

fn load_set(paths: [&Path; 4]) -> CliResult<QrSet> {
    let mut planes = Vec::with_capacity(4);
    for p in paths {
        planes.push(load_qr(&read_pgm_file(p).at(p)?).at(p)?);
    }
    Ok(QrSet::new(planes.try_into().expect("four paths"))?)
}

/// Ephemeral exponents for a seeded run are derived from the secret stego
/// key and a digest of the payload, so reruns reproduce byte for byte.
pub fn ephemeral_seed(key: StegoKey, set: &QrSet) -> u64 {
    let mut bytes = b"qrsteg/ephemeral".to_vec();
    bytes.extend_from_slice(&key.seed.to_le_bytes());
    for plane in &set.planes {
        bytes.extend_from_slice(&(plane.width as u64).to_le_bytes());
        bytes.extend_from_slice(&(plane.height as u64).to_le_bytes());
        bytes.extend_from_slice(&plane.bits);
    }
    fnv1a64(&bytes)
}

/// Scores a stego frame against its luma-clipped cover and records the
/// clip's own distortion separately.
pub fn measure_frame(report: &mut QualityReport, cover: &FrameYuv420, stego: &FrameYuv420) -> qrsteg_core::Result<()> {
    let clipped = clip_luma(cover);
    report.push(FrameQuality::measure(&clipped, stego)?);
    report.clip_mse.push(quality::mse(cover, &clipped)?);
    Ok(())
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".sidecar.json");
    PathBuf::from(s)
}

pub struct KeygenOptions<'a> {
    pub public: &'a Path,
    pub private: &'a Path,
    pub paper_fidelity: bool,
    pub bits: u64,
    pub x: Option<&'a str>,
    pub seed: Option<u64>,
    pub force: bool,
}

pub struct KeygenSummary {
    pub bits: u64,
    pub y: BigUint,
}

pub fn keygen(o: &KeygenOptions<'_>) -> CliResult<KeygenSummary> {
    if !o.paper_fidelity && o.bits < 16 {
        return Err(CliError::Usage("--bits must be at least 16".into()));
    }
    if !o.force {
        if let Some(p) = [o.public, o.private].into_iter().find(|p| p.exists()) {
            return Err(CliError::Usage(format!("{} exists; pass --force to overwrite", p.display())));
        }
    }
    let mut rng = match seed_or_env(o.seed)? {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_os_rng(),
    };
    let group = if o.paper_fidelity {
        GroupParams::paper()
    } else if o.bits == 256 {
        GroupParams::default_256()
    } else {
        GroupParams::generate(o.bits, &mut rng)
    };
    let (public, private) = match o.x {
        Some(x) => {
            let x: BigUint = x.parse().map_err(|_| CliError::Usage(format!("--x `{x}` is not a decimal integer")))?;
            keypair_from_exponent(&group, x)?
        }
        None => draw_keypair(&group, &mut rng),
    };
    fs::write(o.public, public_to_string(&public))?;
    fs::write(o.private, private_to_string(&private))?;
    Ok(KeygenSummary { bits: public.p.bits(), y: public.y })
}

pub struct EmbedOptions<'a> {
    pub input: &'a Path,
    pub output: &'a Path,
    pub qr: [&'a Path; 4],
    pub public: &'a Path,
    pub key: StegoKey,
    pub sidecar: Option<&'a Path>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub report: Option<&'a Path>,
    pub fresh_exponents: bool,
}

pub struct EmbedSummary {
    pub frames: usize,
    pub quality: QualityReport,
    pub sidecar: PathBuf,
    /// Mean serialized size of the sender values per frame, in bytes.
    pub bp_overhead: f64,
}

pub fn embed(o: &EmbedOptions<'_>) -> CliResult<EmbedSummary> {
    let public = read_public(o.public).at(o.public)?;
    let set = load_set(o.qr)?;
    let (meta, frames) = open_video(o.input, o.width, o.height)?;
    let mut frames = frames.peekable();
    if frames.peek().is_none() {
        return Err(qrsteg_core::Error::Format(format!("{} has no frames", o.input.display())).into());
    }
    let cfg = StegoConfig { key: o.key, public, private: None };
    let base = if o.fresh_exponents { rand::random() } else { ephemeral_seed(o.key, &set) };
    let sets = [set];
    let embedder = VideoEmbedder::new(&cfg, meta.width, meta.height, &sets, base)?;

    let sidecar_path = o.sidecar.map_or_else(|| sidecar_path(o.output), Path::to_path_buf);
    let mut writer = Y4mWriter::new(create(o.output)?, &meta)?;
    let mut sidecar = Sidecar::new(&meta, o.key);
    let mut quality = QualityReport::default();
    let mut overhead = 0usize;
    let n = embed_video(frames, &embedder, |cover, stego, record| {
        measure_frame(&mut quality, cover, &stego)?;
        writer.write_frame(&stego)?;
        overhead += record.bp_overhead();
        sidecar.push(record);
        Ok(())
    })?;
    writer.finish()?;
    fs::write(&sidecar_path, sidecar.to_json())?;

    quality.embedded_bits = (n * embedder.layout().bits_per_frame()) as u64;
    quality.cover_pixels = (n * meta.pixels()) as u64;
    if let Some(r) = o.report {
        quality.write_csv(create(r)?)?;
    }
    Ok(EmbedSummary { frames: n, quality, sidecar: sidecar_path, bp_overhead: overhead as f64 / n as f64 })
}

pub struct ExtractOptions<'a> {
    pub input: &'a Path,
    pub sidecar: &'a Path,
    pub public: &'a Path,
    pub private: &'a Path,
    pub key: StegoKey,
    pub output: &'a Path,
    pub originals: Option<[&'a Path; 4]>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub report: Option<&'a Path>,
}

pub struct ExtractSummary {
    pub frames: usize,
    pub key_matches: bool,
    /// Mean SSIM per level (L, M, Q, H) when originals were supplied.
    pub ssim: Option<[f64; 4]>,
}

pub fn extract(o: &ExtractOptions<'_>) -> CliResult<ExtractSummary> {
    let public = read_public(o.public).at(o.public)?;
    let private = read_private(o.private).at(o.private)?;
    let text = fs::read_to_string(o.sidecar)
        .map_err(|e| CliError::File { path: o.sidecar.display().to_string(), source: e.into() })?;
    let sidecar = Sidecar::from_json(&text).at(o.sidecar)?;
    let originals = o.originals.map(load_set).transpose()?;
    let (meta, frames) = open_video(o.input, o.width, o.height)?;
    if (meta.width, meta.height) != (sidecar.width, sidecar.height) {
        return Err(qrsteg_core::Error::Format(format!(
            "video is {}x{} but the sidecar describes {}x{}",
            meta.width, meta.height, sidecar.width, sidecar.height
        ))
        .into());
    }
    let key_matches = sidecar.matches_key(o.key);
    if !key_matches {
        eprintln!("warning: stego key fingerprint differs from the sidecar; recovered planes will be noise");
    }
    fs::create_dir_all(o.output)?;

    let cfg = StegoConfig { key: o.key, public, private: Some(private) };
    let mut rows: Vec<[f64; 4]> = Vec::new();
    let n = extract_video(frames, &cfg, &sidecar, |i, set| {
        for level in Level::ALL {
            let path = o.output.join(format!("frame{i:05}_{}.pgm", level.name()));
            write_pgm_file(&set.get(level).render(), &path)?;
        }
        if let Some(orig) = &originals {
            let mut row = [0.0; 4];
            for level in Level::ALL {
                row[level.index()] = ssim(&orig.get(level).render().data, &set.get(level).render().data)?;
            }
            rows.push(row);
        }
        Ok(())
    })?;
    if n < sidecar.frames.len() {
        eprintln!("warning: video holds {n} of the sidecar's {} frames", sidecar.frames.len());
    }

    if let Some(r) = o.report {
        let mut w = csv::Writer::from_writer(create(r)?);
        w.write_record(["frame", "ssim_l", "ssim_m", "ssim_q", "ssim_h"])?;
        for (i, row) in rows.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(|v| format!("{v:.6}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    let ssim = (!rows.is_empty()).then(|| {
        let mut mean = [0.0; 4];
        for row in &rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / rows.len() as f64;
            }
        }
        mean
    });
    Ok(ExtractSummary { frames: n, key_matches, ssim })
}

pub struct AttackOptions<'a> {
    pub input: &'a Path,
    pub output: &'a Path,
    pub attacks: &'a [String],
    pub seed: Option<u64>,
    pub width: Option<usize>,
    pub height: Option<usize>,
}

pub struct AttackSummary {
    pub frames: usize,
    pub seed: u64,
    pub attacks: Vec<Noise>,
}

/// Applies the attacks in order to every frame. Attack `j` on frame `i`
/// draws from a generator keyed by `(seed, j, i)`.
pub fn attack(o: &AttackOptions<'_>) -> CliResult<AttackSummary> {
    if o.attacks.is_empty() {
        return Err(CliError::Usage("at least one --attack is required".into()));
    }
    let attacks = o.attacks.iter().map(|s| s.parse::<Noise>()).collect::<qrsteg_core::Result<Vec<_>>>()?;
    let seed = seed_or_env(o.seed)?.unwrap_or_else(rand::random);
    let specs: Vec<AttackSpec> = attacks
        .iter()
        .enumerate()
        .map(|(j, &n)| AttackSpec::new(n, derive_seed(seed, j as u64)))
        .collect::<qrsteg_core::Result<_>>()?;
    let (meta, frames) = open_video(o.input, o.width, o.height)?;
    let mut writer = Y4mWriter::new(create(o.output)?, &meta)?;
    let mut n = 0;
    for (i, frame) in frames.enumerate() {
        let mut frame = frame?;
        for spec in &specs {
            spec.apply_frame(&mut frame, i as u64);
        }
        writer.write_frame(&frame)?;
        n += 1;
    }
    writer.finish()?;
    Ok(AttackSummary { frames: n, seed, attacks })
}

pub struct SynthOptions<'a> {
    pub pattern: Pattern,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub seed: u64,
    pub output: &'a Path,
    pub qr_dir: Option<&'a Path>,
}

/// Writes a synthetic video and, optionally, a matching set of QR images
/// named `qr_L.pgm` .. `qr_H.pgm`.
pub fn synth(o: &SynthOptions<'_>) -> CliResult<()> {
    let mut meta = VideoMeta::new(o.width, o.height)?;
    meta.frame_count = Some(o.frames);
    let mut writer = Y4mWriter::new(create(o.output)?, &meta)?;
    for i in 0..o.frames {
        writer.write_frame(&synth::frame(o.pattern, o.width, o.height, i, o.seed))?;
    }
    writer.finish()?.flush()?;
    if let Some(dir) = o.qr_dir {
        fs::create_dir_all(dir)?;
        let set = synth::qr_set(o.width / 2, o.height / 2, o.seed);
        for level in Level::ALL {
            write_pgm_file(&set.get(level).render(), &qr_path(dir, level))?;
        }
    }
    Ok(())
}

pub fn qr_path(dir: &Path, level: Level) -> PathBuf {
    dir.join(format!("qr_{}.pgm", level.name()))
}
