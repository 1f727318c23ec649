//! Deterministic synthetic covers and QR-like payload images, so tests and
//! benchmarks never depend on downloaded data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use qrsteg_core::bitplane::QrPlane;
use qrsteg_core::permute::{derive_seed, SplitMix64};
use qrsteg_core::stego::{Level, QrSet};
use qrsteg_core::videoio::FrameYuv420;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Horizontal luma ramp drifting one step per frame.
    Gradient,
    /// Uniform random samples in every plane.
    Noise,
    /// A bright square moving over a dark background.
    MovingBlock,
    /// Smooth shading with mild texture, a stand-in for camera content.
    Natural,
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gradient" => Ok(Pattern::Gradient),
            "noise" => Ok(Pattern::Noise),
            "moving-block" => Ok(Pattern::MovingBlock),
            "natural" => Ok(Pattern::Natural),
            _ => Err(format!("unknown pattern `{s}` (gradient, noise, moving-block, natural)")),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Gradient => "gradient",
            Pattern::Noise => "noise",
            Pattern::MovingBlock => "moving-block",
            Pattern::Natural => "natural",
        })
    }
}

/// Frame `index` of the synthetic video `(pattern, seed)`.
pub fn frame(pattern: Pattern, width: usize, height: usize, index: usize, seed: u64) -> FrameYuv420 {
    let mut f = FrameYuv420::filled(width, height, 128);
    let (cw, ch) = (width / 2, height / 2);
    match pattern {
        Pattern::Gradient => {
            for r in 0..height {
                for c in 0..width {
                    f.y[r * width + c] = ((c * 255 / width.max(2) + index) % 256) as u8;
                }
            }
            for r in 0..ch {
                for c in 0..cw {
                    f.u[r * cw + c] = (64 + r * 128 / ch.max(1)) as u8;
                    f.v[r * cw + c] = (192 - c * 128 / cw.max(1)) as u8;
                }
            }
        }
        Pattern::Noise => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
            for p in f.planes_mut() {
                rng.fill(p.as_mut_slice());
            }
        }
        Pattern::MovingBlock => {
            f.y.fill(40);
            let side = (width.min(height) / 4).max(1);
            let x0 = (index * 3) % (width - side + 1);
            let y0 = (index * 2) % (height - side + 1);
            for r in y0..y0 + side {
                f.y[r * width + x0..r * width + x0 + side].fill(220);
            }
            f.u.fill(110);
            f.v.fill(150);
        }
        Pattern::Natural => natural(&mut f, index, seed),
    }
    f
}

fn natural(f: &mut FrameYuv420, index: usize, seed: u64) {
    let (width, height) = (f.width, f.height);
    let mut knobs = SplitMix64::new(seed);
    let mut unit = || (knobs.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let (p1, p2, p3) = (unit() * 2.0 * PI, unit() * 2.0 * PI, unit() * 2.0 * PI);
    let (fx, fy) = (20.0 + 40.0 * unit(), 15.0 + 30.0 * unit());
    let tilt = 40.0 * (unit() - 0.5);
    let t = index as f64 * 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));

    for r in 0..height {
        for c in 0..width {
            let (x, y) = (c as f64, r as f64);
            let shade = 50.0 * (x / fx + p1 + t).sin() * (y / fy + p2).cos()
                + 25.0 * ((x + y) / (fx + fy) + p3 - t).sin()
                + tilt * (x / width as f64 - 0.5);
            let grain: f64 = rng.random_range(-3.0..3.0);
            f.y[r * width + c] = (128.0 + shade + grain).round().clamp(16.0, 235.0) as u8;
        }
    }
    let cw = width / 2;
    for r in 0..height / 2 {
        for c in 0..cw {
            let (x, y) = (2.0 * c as f64, 2.0 * r as f64);
            let u = 128.0 + 18.0 * (x / (2.0 * fx) + p2 + t).sin() + rng.random_range(-1.5..1.5);
            let v = 128.0 + 14.0 * (y / (2.0 * fy) + p3).cos() + rng.random_range(-1.5..1.5);
            f.u[r * cw + c] = u.round().clamp(16.0, 240.0) as u8;
            f.v[r * cw + c] = v.round().clamp(16.0, 240.0) as u8;
        }
    }
}

pub fn video(pattern: Pattern, width: usize, height: usize, frames: usize, seed: u64) -> Vec<FrameYuv420> {
    (0..frames).map(|i| frame(pattern, width, height, i, seed)).collect()
}

const QUIET: usize = 4;

/// A QR-looking bilevel image: three finder patterns, timing lines and
/// random data modules, centred with a light quiet zone. Images too small
/// for a 21-module symbol are filled with random bits.
pub fn pseudo_qr(width: usize, height: usize, seed: u64) -> QrPlane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = width.min(height);
    let modules = if side >= 33 + 2 * QUIET { 33 } else { 21 };
    if side < modules + 2 * QUIET {
        let bits = (0..width * height).map(|_| rng.random_range(0..2u8)).collect();
        return QrPlane::new(width, height, bits).expect("sized to fit");
    }
    let px = side / (modules + 2 * QUIET);
    let grid = module_grid(modules, &mut rng);
    let size = modules * px;
    let (ox, oy) = ((width - size) / 2, (height - size) / 2);
    let mut bits = vec![0u8; width * height];
    for r in 0..size {
        for c in 0..size {
            bits[(oy + r) * width + ox + c] = grid[(r / px) * modules + c / px];
        }
    }
    QrPlane::new(width, height, bits).expect("sized to fit")
}

fn module_grid(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut grid: Vec<u8> = (0..n * n).map(|_| rng.random_range(0..2u8)).collect();
    // timing lines
    for i in 0..n {
        grid[6 * n + i] = u8::from(i % 2 == 0);
        grid[i * n + 6] = u8::from(i % 2 == 0);
    }
    for (r0, c0) in [(0, 0), (0, n - 7), (n - 7, 0)] {
        // finder plus its light separator ring
        for dr in -1i64..=7 {
            for dc in -1i64..=7 {
                let (r, c) = (r0 as i64 + dr, c0 as i64 + dc);
                if r < 0 || c < 0 || r >= n as i64 || c >= n as i64 {
                    continue;
                }
                let ring = (dr - 3).abs().max((dc - 3).abs());
                grid[r as usize * n + c as usize] = u8::from(ring == 3 || ring <= 1);
            }
        }
    }
    grid
}

/// Four distinct pseudo-QR planes, one per level.
pub fn qr_set(width: usize, height: usize, seed: u64) -> QrSet {
    let planes = Level::ALL.map(|l| pseudo_qr(width, height, derive_seed(seed, l.payload_tag())));
    QrSet::new(planes).expect("equal sizes")
}
