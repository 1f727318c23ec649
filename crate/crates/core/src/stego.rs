//! Embedding and extraction of four encrypted QR payloads per frame.
//!
//! Per frame, the L, M, Q and H payloads go to the HL band, the HH band, the
//! U plane and the V plane. Each payload is bit-permuted with its own keyed
//! permutation, packed MSB-first, encrypted with the keystream cipher, and
//! its ciphertext bits are written into coefficient (or sample) LSBs in a
//! second keyed order. Luma is clipped to `[2, 253]` first so the inverse
//! transform never leaves the 8-bit range.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitplane::{pack_bits, unpack_bits, PackedPayload, QrPlane};
use crate::elgamal::{mec_decrypt, mec_encrypt, CipherBundle, ElGamalPrivate, ElGamalPublic, RandomExponents};
use crate::error::{Error, Result};
use crate::permute::{self, derive_seed, keyed_permutation, Permutation, StegoKey};
use crate::videoio::{FrameYuv420, VideoMeta};
use crate::wavelet::{fwd_haar_u8, inv_haar_int};

pub const LUMA_MIN: u8 = 2;
pub const LUMA_MAX: u8 = 253;

/// `2·⌊v/2⌋ + bit`.
#[inline]
pub fn set_lsb(value: i32, bit: u8) -> i32 {
    2 * value.div_euclid(2) + (bit & 1) as i32
}

/// `v - 2·⌊v/2⌋`, always 0 or 1.
#[inline]
pub fn get_lsb(value: i32) -> u8 {
    value.rem_euclid(2) as u8
}

/// QR error-correction grade of a payload; fixes where it is carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    L,
    M,
    Q,
    H,
}

/// Carrier of a payload inside the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Hl,
    Hh,
    U,
    V,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::L, Level::M, Level::Q, Level::H];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn target(self) -> Target {
        match self {
            Level::L => Target::Hl,
            Level::M => Target::Hh,
            Level::Q => Target::U,
            Level::H => Target::V,
        }
    }

    pub fn payload_tag(self) -> u64 {
        match self {
            Level::L => permute::TAG_PAYLOAD_L,
            Level::M => permute::TAG_PAYLOAD_M,
            Level::Q => permute::TAG_PAYLOAD_Q,
            Level::H => permute::TAG_PAYLOAD_H,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::L => "L",
            Level::M => "M",
            Level::Q => "Q",
            Level::H => "H",
        }
    }
}

impl Target {
    pub fn tag(self) -> u64 {
        match self {
            Target::Hl => permute::TAG_HL,
            Target::Hh => permute::TAG_HH,
            Target::U => permute::TAG_U,
            Target::V => permute::TAG_V,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StegoConfig {
    pub key: StegoKey,
    pub public: ElGamalPublic,
    pub private: Option<ElGamalPrivate>,
}

/// Every permutation used for one frame geometry and key.
#[derive(Debug, Clone)]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    carriers: [Permutation; 4],
    payload: [Permutation; 4],
    payload_inv: [Permutation; 4],
}

impl Layout {
    pub fn new(key: StegoKey, width: usize, height: usize) -> Result<Self> {
        crate::videoio::check_dims(width, height)?;
        let n = (width / 2) * (height / 2);
        let carriers = Level::ALL.map(|l| keyed_permutation(key, l.target().tag(), n));
        let payload = Level::ALL.map(|l| keyed_permutation(key, l.payload_tag(), n));
        let payload_inv = payload.clone().map(|p| p.inverse());
        Ok(Layout { width, height, carriers, payload, payload_inv })
    }

    /// Payload bits per carrier: one quarter of the luma sample count.
    pub fn bits_per_level(&self) -> usize {
        (self.width / 2) * (self.height / 2)
    }

    pub fn bits_per_frame(&self) -> usize {
        4 * self.bits_per_level()
    }

    pub fn qr_dims(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    fn check_frame(&self, frame: &FrameYuv420) -> Result<()> {
        if frame.width != self.width || frame.height != self.height {
            return Err(Error::Shape(format!(
                "frame {}x{} does not match layout {}x{}",
                frame.width, frame.height, self.width, self.height
            )));
        }
        Ok(())
    }
}

/// The four encrypted payloads of one frame, in L, M, Q, H order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePayload {
    pub bundles: [CipherBundle; 4],
    pub bit_count: usize,
}

impl FramePayload {
    /// The first `bit_count` ciphertext bits of a level, MSB first.
    pub fn bits(&self, level: Level) -> Vec<u8> {
        unpack_bits(&self.bundles[level.index()].z, self.bit_count)
    }
}

/// Four QR planes in L, M, Q, H order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrSet {
    pub planes: [QrPlane; 4],
}

impl QrSet {
    pub fn new(planes: [QrPlane; 4]) -> Result<Self> {
        let (w, h) = (planes[0].width, planes[0].height);
        if planes.iter().any(|p| p.width != w || p.height != h) {
            return Err(Error::Capacity("all four QR planes must share one size".into()));
        }
        Ok(QrSet { planes })
    }

    pub fn get(&self, level: Level) -> &QrPlane {
        &self.planes[level.index()]
    }
}

/// Copy of `frame` with luma clamped to `[LUMA_MIN, LUMA_MAX]`.
pub fn clip_luma(frame: &FrameYuv420) -> FrameYuv420 {
    let mut out = frame.clone();
    out.y.iter_mut().for_each(|s| *s = (*s).clamp(LUMA_MIN, LUMA_MAX));
    out
}

/// Writes four ciphertext bit streams into one frame.
pub fn embed_bits(frame: &FrameYuv420, bits: [&[u8]; 4], layout: &Layout) -> Result<FrameYuv420> {
    layout.check_frame(frame)?;
    let n = layout.bits_per_level();
    if let Some(b) = bits.iter().find(|b| b.len() != n) {
        return Err(Error::Capacity(format!("payload of {} bits for a carrier of {n}", b.len())));
    }

    let mut out = clip_luma(frame);
    let mut bands = fwd_haar_u8(&out.y, out.width, out.height)?;
    for (band, level) in [(&mut bands.hl, Level::L), (&mut bands.hh, Level::M)] {
        let order = &layout.carriers[level.index()];
        for (j, &bit) in bits[level.index()].iter().enumerate() {
            let k = order.get(j);
            band[k] = set_lsb(band[k], bit);
        }
    }
    let luma = inv_haar_int(&bands)?;
    for (dst, &v) in out.y.iter_mut().zip(&luma) {
        *dst = u8::try_from(v).map_err(|_| Error::InvalidValue(format!("reconstructed luma {v} out of range")))?;
    }

    for (plane, level) in [(&mut out.u, Level::Q), (&mut out.v, Level::H)] {
        let order = &layout.carriers[level.index()];
        for (j, &bit) in bits[level.index()].iter().enumerate() {
            let k = order.get(j);
            plane[k] = (plane[k] & !1) | (bit & 1);
        }
    }
    Ok(out)
}

pub fn embed_frame(frame: &FrameYuv420, payload: &FramePayload, layout: &Layout) -> Result<FrameYuv420> {
    let bits = Level::ALL.map(|l| payload.bits(l));
    embed_bits(frame, [&bits[0], &bits[1], &bits[2], &bits[3]], layout)
}

/// Reads the four ciphertext bit streams back out of a frame.
pub fn extract_frame(stego: &FrameYuv420, layout: &Layout) -> Result<[Vec<u8>; 4]> {
    layout.check_frame(stego)?;
    let bands = fwd_haar_u8(&stego.y, stego.width, stego.height)?;
    let read_band = |band: &[i32], level: Level| -> Vec<u8> {
        layout.carriers[level.index()].as_slice().iter().map(|&k| get_lsb(band[k])).collect()
    };
    let read_plane = |plane: &[u8], level: Level| -> Vec<u8> {
        layout.carriers[level.index()].as_slice().iter().map(|&k| plane[k] & 1).collect()
    };
    Ok([
        read_band(&bands.hl, Level::L),
        read_band(&bands.hh, Level::M),
        read_plane(&stego.u, Level::Q),
        read_plane(&stego.v, Level::H),
    ])
}

/// Bit-permutes, packs and encrypts one QR set, drawing fresh ephemeral
/// exponents from `rng_seed`.
pub fn encrypt_set(set: &QrSet, layout: &Layout, public: &ElGamalPublic, rng_seed: u64) -> Result<FramePayload> {
    let (qw, qh) = layout.qr_dims();
    if let Some(p) = set.planes.iter().find(|p| p.width != qw || p.height != qh) {
        return Err(Error::Capacity(format!(
            "QR plane {}x{} does not fill the {qw}x{qh} carriers",
            p.width, p.height
        )));
    }
    let mut src = RandomExponents(ChaCha20Rng::seed_from_u64(rng_seed));
    let mut bundles = Vec::with_capacity(4);
    for level in Level::ALL {
        let permuted = layout.payload[level.index()].apply(&set.get(level).bits);
        let packed = pack_bits(&permuted);
        bundles.push(mec_encrypt(&packed.bytes, public, &mut src)?);
    }
    let bundles: [CipherBundle; 4] = bundles.try_into().expect("four levels");
    Ok(FramePayload { bundles, bit_count: layout.bits_per_level() })
}

/// Decrypts and un-permutes four extracted ciphertext streams.
pub fn decrypt_bits(
    bits: &[Vec<u8>; 4],
    record: &FrameRecord,
    layout: &Layout,
    p: &BigUint,
    private: &ElGamalPrivate,
) -> Result<QrSet> {
    let (qw, qh) = layout.qr_dims();
    let n = layout.bits_per_level();
    let mut planes = Vec::with_capacity(4);
    for level in Level::ALL {
        let stream = &bits[level.index()];
        if stream.len() != n {
            return Err(Error::Capacity(format!("{} extracted bits, expected {n}", stream.len())));
        }
        let rec = record.level(level)?;
        let bundle = CipherBundle { bp: rec.bp()?, z: pack_bits(stream).bytes, plain_len: rec.plain_len };
        let mut plain = PackedPayload { bit_count: n, bytes: mec_decrypt(&bundle, p, private)? };
        // padding bits never travel through the carrier
        plain.clear_pad();
        let permuted = unpack_bits(&plain.bytes, n);
        planes.push(QrPlane::new(qw, qh, layout.payload_inv[level.index()].apply(&permuted))?);
    }
    Ok(QrSet { planes: planes.try_into().expect("four levels") })
}

/// Sender values needed to decrypt one level of one frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: String,
    pub plain_len: usize,
    /// Decimal strings.
    pub bp: Vec<String>,
}

impl LevelRecord {
    pub fn bp(&self) -> Result<Vec<BigUint>> {
        self.bp
            .iter()
            .map(|s| s.parse().map_err(|_| Error::Format(format!("sidecar bp entry `{s}` is not decimal"))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub levels: Vec<LevelRecord>,
}

impl FrameRecord {
    pub fn from_payload(index: usize, payload: &FramePayload) -> Self {
        let levels = Level::ALL
            .iter()
            .map(|&l| {
                let b = &payload.bundles[l.index()];
                LevelRecord {
                    level: l.name().into(),
                    plain_len: b.plain_len,
                    bp: b.bp.iter().map(|d| d.to_string()).collect(),
                }
            })
            .collect();
        FrameRecord { index, levels }
    }

    pub fn level(&self, level: Level) -> Result<&LevelRecord> {
        self.levels
            .get(level.index())
            .filter(|r| r.level == level.name())
            .ok_or_else(|| Error::Format(format!("sidecar frame {} lacks level {}", self.index, level.name())))
    }

    /// Serialized size of the sender values of this frame.
    pub fn bp_overhead(&self) -> usize {
        self.levels.iter().flat_map(|l| &l.bp).map(|s| s.len() + 4).sum()
    }
}

pub const SIDECAR_FORMAT: &str = "qrsteg-sidecar";
pub const SIDECAR_VERSION: u32 = 1;

/// Everything extraction needs besides the keys; never contains payload bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub version: u32,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub frame_rate: [u32; 2],
    pub qr_width: usize,
    pub qr_height: usize,
    pub key_fingerprint: String,
    pub luma_clip: [u8; 2],
    pub frames: Vec<FrameRecord>,
}

impl Sidecar {
    pub fn new(meta: &VideoMeta, key: StegoKey) -> Self {
        Sidecar {
            format: SIDECAR_FORMAT.into(),
            version: SIDECAR_VERSION,
            width: meta.width,
            height: meta.height,
            frame_count: 0,
            frame_rate: [meta.frame_rate.0, meta.frame_rate.1],
            qr_width: meta.width / 2,
            qr_height: meta.height / 2,
            key_fingerprint: format!("{:016x}", key.fingerprint()),
            luma_clip: [LUMA_MIN, LUMA_MAX],
            frames: Vec::new(),
        }
    }

    pub fn push(&mut self, record: FrameRecord) {
        self.frames.push(record);
        self.frame_count = self.frames.len();
    }

    pub fn matches_key(&self, key: StegoKey) -> bool {
        self.key_fingerprint == format!("{:016x}", key.fingerprint())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Sidecar = serde_json::from_str(s).map_err(|e| Error::Format(format!("sidecar: {e}")))?;
        if sc.format != SIDECAR_FORMAT {
            return Err(Error::Format(format!("not a sidecar: format `{}`", sc.format)));
        }
        if sc.version != SIDECAR_VERSION {
            return Err(Error::UnsupportedFormat(format!("sidecar version {}", sc.version)));
        }
        if sc.frames.len() != sc.frame_count {
            return Err(Error::Format("sidecar frame count disagrees with its records".into()));
        }
        Ok(sc)
    }
}

/// Per-video embedding state: one layout, the QR sets to cycle through and
/// the base seed from which each frame's exponent generator is derived.
pub struct VideoEmbedder<'a> {
    layout: Layout,
    public: &'a ElGamalPublic,
    sets: &'a [QrSet],
    base_seed: u64,
}

impl<'a> VideoEmbedder<'a> {
    pub fn new(cfg: &'a StegoConfig, width: usize, height: usize, sets: &'a [QrSet], base_seed: u64) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Capacity("no QR sets to embed".into()));
        }
        let layout = Layout::new(cfg.key, width, height)?;
        let (qw, qh) = layout.qr_dims();
        for set in sets {
            let p = &set.planes[0];
            if p.width != qw || p.height != qh {
                return Err(Error::Capacity(format!(
                    "QR planes are {}x{}, carriers need {qw}x{qh}",
                    p.width, p.height
                )));
            }
        }
        Ok(VideoEmbedder { layout, public: &cfg.public, sets, base_seed })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Embeds the frame at position `index`; independent of other frames.
    pub fn embed(&self, index: usize, frame: &FrameYuv420) -> Result<(FrameYuv420, FrameRecord)> {
        let set = &self.sets[index % self.sets.len()];
        let payload = encrypt_set(set, &self.layout, self.public, derive_seed(self.base_seed, index as u64))?;
        let stego = embed_frame(frame, &payload, &self.layout)?;
        Ok((stego, FrameRecord::from_payload(index, &payload)))
    }
}

const BATCH_PER_THREAD: usize = 2;

/// Streams frames through the embedder in parallel batches; `sink` sees
/// each cover with its stego frame and record, in frame order. Returns the
/// number of frames embedded.
pub fn embed_video<I, F>(frames: I, embedder: &VideoEmbedder<'_>, mut sink: F) -> Result<usize>
where
    I: IntoIterator<Item = Result<FrameYuv420>>,
    F: FnMut(&FrameYuv420, FrameYuv420, FrameRecord) -> Result<()>,
{
    let batch = rayon::current_num_threads().max(1) * BATCH_PER_THREAD;
    let mut it = frames.into_iter();
    let mut index = 0usize;
    loop {
        let chunk: Vec<FrameYuv420> = it.by_ref().take(batch).collect::<Result<_>>()?;
        if chunk.is_empty() {
            return Ok(index);
        }
        let results: Vec<_> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, f)| embedder.embed(index + i, f))
            .collect();
        for (cover, r) in chunk.iter().zip(results) {
            let (frame, record) = r?;
            sink(cover, frame, record)?;
        }
        index += chunk.len();
    }
}

/// Extracts and decrypts the QR set of every frame; `sink` sees results in
/// frame order. Returns the number of frames processed.
pub fn extract_video<I, F>(frames: I, cfg: &StegoConfig, sidecar: &Sidecar, mut sink: F) -> Result<usize>
where
    I: IntoIterator<Item = Result<FrameYuv420>>,
    F: FnMut(usize, QrSet) -> Result<()>,
{
    let private = cfg
        .private
        .as_ref()
        .ok_or_else(|| Error::KeyParameter("extraction needs the private key".into()))?;
    private.check(&cfg.public.p)?;
    let layout = Layout::new(cfg.key, sidecar.width, sidecar.height)?;
    let batch = rayon::current_num_threads().max(1) * BATCH_PER_THREAD;
    let mut it = frames.into_iter();
    let mut index = 0usize;
    loop {
        let chunk: Vec<FrameYuv420> = it.by_ref().take(batch).collect::<Result<_>>()?;
        if chunk.is_empty() {
            return Ok(index);
        }
        if index + chunk.len() > sidecar.frames.len() {
            return Err(Error::Format(format!(
                "video has more frames than the sidecar's {}",
                sidecar.frames.len()
            )));
        }
        let results: Vec<Result<QrSet>> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let bits = extract_frame(f, &layout)?;
                decrypt_bits(&bits, &sidecar.frames[index + i], &layout, &cfg.public.p, private)
            })
            .collect();
        for (i, r) in results.into_iter().enumerate() {
            sink(index + i, r?)?;
        }
        index += chunk.len();
    }
}
