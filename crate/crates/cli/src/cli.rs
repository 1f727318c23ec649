use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, BenchOptions};
use crate::commands::{self, seed_or_env, stego_key};
use crate::error::{CliError, CliResult};
use crate::synth::Pattern;
use qrsteg_core::attacks::Noise;
use qrsteg_core::elgamal::keyfile::{read_private, read_public};
use qrsteg_core::stego::StegoConfig;

#[derive(Debug, Parser)]
#[command(name = "qrsteg", version, about = "Hide encrypted QR codes in YUV 4:2:0 video")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an ElGamal key pair.
    Keygen(KeygenArgs),
    /// Hide four QR images in every frame of a video.
    Embed(EmbedArgs),
    /// Recover the QR images from a stego video.
    Extract(ExtractArgs),
    /// Apply channel noise to a video.
    Attack(AttackArgs),
    /// Imperceptibility and robustness tables for a directory of Y4M clips.
    Bench(BenchArgs),
    /// Write a synthetic cover video and matching QR images.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct StegoKeyArgs {
    /// Stego key seed (falls back to QRSTEG_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Derive the stego key from a passphrase instead of a numeric seed.
    #[arg(long)]
    pub passphrase: Option<String>,
}

#[derive(Debug, Args)]
pub struct RawDims {
    /// Frame width of raw I420 input.
    #[arg(long)]
    pub width: Option<usize>,
    /// Frame height of raw I420 input.
    #[arg(long)]
    pub height: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QrPaths {
    #[arg(long = "qr-l")]
    pub qr_l: Option<PathBuf>,
    #[arg(long = "qr-m")]
    pub qr_m: Option<PathBuf>,
    #[arg(long = "qr-q")]
    pub qr_q: Option<PathBuf>,
    #[arg(long = "qr-h")]
    pub qr_h: Option<PathBuf>,
}

impl QrPaths {
    fn all(&self) -> CliResult<Option<[&std::path::Path; 4]>> {
        match (&self.qr_l, &self.qr_m, &self.qr_q, &self.qr_h) {
            (Some(l), Some(m), Some(q), Some(h)) => Ok(Some([l, m, q, h].map(PathBuf::as_path))),
            (None, None, None, None) => Ok(None),
            _ => Err(CliError::Usage("--qr-l, --qr-m, --qr-q and --qr-h go together".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long = "pub")]
    pub public: PathBuf,
    #[arg(long = "priv")]
    pub private: PathBuf,
    /// Use the worked-example group p = 997, alpha = 809.
    #[arg(long)]
    pub paper_fidelity: bool,
    /// Modulus size; 256 selects the built-in group, anything else searches
    /// for a fresh safe prime.
    #[arg(long, default_value_t = 256)]
    pub bits: u64,
    /// Force the private exponent (decimal).
    #[arg(long)]
    pub x: Option<String>,
    /// Seed for key generation (falls back to QRSTEG_SEED, then OS entropy).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub qr: QrPaths,
    #[arg(long = "pub")]
    pub public: Option<PathBuf>,
    #[command(flatten)]
    pub key: StegoKeyArgs,
    /// Sidecar path (default: OUTPUT.sidecar.json).
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[command(flatten)]
    pub dims: RawDims,
    /// Per-frame MSE/PSNR CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Draw ephemeral exponents from OS entropy instead of the stego key.
    #[arg(long)]
    pub fresh_exponents: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub sidecar: PathBuf,
    #[arg(long = "pub")]
    pub public: Option<PathBuf>,
    #[arg(long = "priv")]
    pub private: Option<PathBuf>,
    #[command(flatten)]
    pub key: StegoKeyArgs,
    /// Directory for the recovered QR images.
    #[arg(long)]
    pub output: PathBuf,
    /// Original QR images, for SSIM scoring.
    #[command(flatten)]
    pub qr: QrPaths,
    #[command(flatten)]
    pub dims: RawDims,
    /// Per-frame SSIM CSV (needs the originals).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// none, sp:D, gauss:M:V, poisson or speckle:V; repeat to chain.
    #[arg(long = "attack", required = true)]
    pub attacks: Vec<String>,
    /// Noise seed (falls back to QRSTEG_SEED, then OS entropy).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub dims: RawDims,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of .y4m clips.
    #[arg(long)]
    pub input: PathBuf,
    /// Seed for keys, payloads and noise (falls back to QRSTEG_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Key pair to use instead of one derived from the seed.
    #[arg(long = "pub", requires = "private")]
    pub public: Option<PathBuf>,
    #[arg(long = "priv", requires = "public")]
    pub private: Option<PathBuf>,
    /// Attacks for the robustness table (default: the six standard ones).
    #[arg(long = "attack")]
    pub attacks: Vec<String>,
    /// Noise draws averaged per attack.
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    /// Use at most this many frames per clip.
    #[arg(long)]
    pub max_frames: Option<usize>,
    /// Imperceptibility table CSV (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Robustness table CSV (default: stdout).
    #[arg(long)]
    pub ssim_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// gradient, noise, moving-block or natural.
    #[arg(long, default_value = "natural")]
    pub pattern: Pattern,
    #[arg(long, default_value_t = 352)]
    pub width: usize,
    #[arg(long, default_value_t = 288)]
    pub height: usize,
    #[arg(long, default_value_t = 30)]
    pub frames: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write qr_L.pgm .. qr_H.pgm sized for the video.
    #[arg(long)]
    pub qr_dir: Option<PathBuf>,
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a std::path::Path> {
    p.as_deref().ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

fn fmt_db(v: Option<f64>) -> String {
    v.map_or_else(|| "identical".to_string(), |v| format!("{v:.4} dB"))
}

/// Runs one parsed command, printing its summary to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> CliResult<()> {
    match cli.command {
        Command::Keygen(a) => {
            let s = commands::keygen(&commands::KeygenOptions {
                public: &a.public,
                private: &a.private,
                paper_fidelity: a.paper_fidelity,
                bits: a.bits,
                x: a.x.as_deref(),
                seed: a.seed,
                force: a.force,
            })?;
            writeln!(out, "wrote {}-bit key pair, y = {}", s.bits, s.y)?;
        }
        Command::Embed(a) => {
            let qr = a.qr.all()?.ok_or_else(|| CliError::Usage("embed needs --qr-l, --qr-m, --qr-q and --qr-h".into()))?;
            let key = stego_key(a.key.seed, a.key.passphrase.as_deref())?;
            let s = commands::embed(&commands::EmbedOptions {
                input: &a.input,
                output: &a.output,
                qr,
                public: required(&a.public, "--pub")?,
                key,
                sidecar: a.sidecar.as_deref(),
                width: a.dims.width,
                height: a.dims.height,
                report: a.report.as_deref(),
                fresh_exponents: a.fresh_exponents,
            })?;
            let q = &s.quality;
            writeln!(out, "frames: {}", s.frames)?;
            writeln!(out, "capacity: {:.6} bpp ({} bits)", q.capacity()?, q.embedded_bits)?;
            writeln!(out, "psnr: {}", fmt_db(q.average_psnr()))?;
            writeln!(out, "psnr_y: {}", fmt_db(q.average_psnr_luma()))?;
            if let (Some(m), Some((lo, hi))) = (q.average_mse(), q.mse_range()) {
                writeln!(out, "mse: {m:.6} (frames {lo:.6} .. {hi:.6})")?;
            }
            if let Some(c) = q.average_clip_mse() {
                writeln!(out, "clip mse: {c:.6}")?;
            }
            writeln!(out, "bp overhead: {:.1} bytes/frame", s.bp_overhead)?;
            writeln!(out, "sidecar: {}", s.sidecar.display())?;
        }
        Command::Extract(a) => {
            let key = stego_key(a.key.seed, a.key.passphrase.as_deref())?;
            let originals = a.qr.all()?;
            if a.report.is_some() && originals.is_none() {
                return Err(CliError::Usage("--report needs the original QR images".into()));
            }
            let s = commands::extract(&commands::ExtractOptions {
                input: &a.input,
                sidecar: &a.sidecar,
                public: required(&a.public, "--pub")?,
                private: required(&a.private, "--priv")?,
                key,
                output: &a.output,
                originals,
                width: a.dims.width,
                height: a.dims.height,
                report: a.report.as_deref(),
            })?;
            writeln!(out, "frames: {}", s.frames)?;
            if let Some(v) = s.ssim {
                writeln!(out, "ssim L/M/Q/H: {:.4} {:.4} {:.4} {:.4}", v[0], v[1], v[2], v[3])?;
            }
        }
        Command::Attack(a) => {
            let s = commands::attack(&commands::AttackOptions {
                input: &a.input,
                output: &a.output,
                attacks: &a.attacks,
                seed: a.seed,
                width: a.dims.width,
                height: a.dims.height,
            })?;
            let names: Vec<String> = s.attacks.iter().map(Noise::to_string).collect();
            writeln!(out, "attacked {} frames with {} (seed {})", s.frames, names.join(" then "), s.seed)?;
        }
        Command::Bench(a) => {
            let seed = seed_or_env(a.seed)?.unwrap_or(0);
            let mut cfg = bench::seeded_config(seed);
            if let (Some(p), Some(x)) = (&a.public, &a.private) {
                cfg = StegoConfig {
                    key: cfg.key,
                    public: read_public(p)?,
                    private: Some(read_private(x)?),
                };
            }
            let attacks = if a.attacks.is_empty() {
                bench::paper_attacks()
            } else {
                a.attacks.iter().map(|s| s.parse()).collect::<qrsteg_core::Result<_>>()?
            };
            let report = bench::run(&a.input, &cfg, &BenchOptions { seed, attacks, seeds: a.seeds, max_frames: a.max_frames })?;
            match &a.report {
                Some(p) => report.write_clips(std::fs::File::create(p)?)?,
                None => report.write_clips(&mut *out)?,
            }
            match &a.ssim_report {
                Some(p) => report.write_ssim(std::fs::File::create(p)?)?,
                None => report.write_ssim(&mut *out)?,
            }
        }
        Command::Synth(a) => {
            let seed = seed_or_env(a.seed)?.unwrap_or(0);
            commands::synth(&commands::SynthOptions {
                pattern: a.pattern,
                width: a.width,
                height: a.height,
                frames: a.frames,
                seed,
                output: &a.output,
                qr_dir: a.qr_dir.as_deref(),
            })?;
            writeln!(out, "wrote {} {} frames of {}x{}", a.frames, a.pattern, a.width, a.height)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T, W>(args: I, out: &mut W) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli, out)
}
