//! Channel noise applied to stego frames for robustness experiments.
//!
//! Conventions follow the usual image-toolkit definitions on normalized
//! intensities: samples are mapped to `[0, 1]`, perturbed, clamped, and
//! rounded back to 8 bits. Poisson noise uses the raw 8-bit value as the
//! rate. Every plane (Y, U, V) is attacked.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, Uniform};

use crate::error::{Error, Result};
use crate::permute::derive_seed;
use crate::videoio::FrameYuv420;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// No-op, useful as the baseline row of a robustness table.
    Identity,
    SaltPepper { density: f64 },
    Gaussian { mean: f64, variance: f64 },
    Poisson,
    Speckle { variance: f64 },
}

impl Noise {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Noise::SaltPepper { density } if !(0.0..=1.0).contains(&density) => {
                Err(Error::InvalidInput(format!("salt & pepper density {density} outside [0, 1]")))
            }
            Noise::Gaussian { mean, variance } if !(variance >= 0.0 && variance.is_finite() && mean.is_finite()) => {
                Err(Error::InvalidInput(format!("gaussian mean {mean} / variance {variance}")))
            }
            Noise::Speckle { variance } if !(variance >= 0.0 && variance.is_finite()) => {
                Err(Error::InvalidInput(format!("speckle variance {variance}")))
            }
            _ => Ok(()),
        }
    }

    /// Applies the noise to every sample of `plane` in place.
    pub fn apply_plane<R: Rng + ?Sized>(&self, plane: &mut [u8], rng: &mut R) {
        match *self {
            Noise::Identity => {}
            Noise::SaltPepper { density } => salt_pepper(plane, density, rng),
            Noise::Gaussian { mean, variance } => gaussian(plane, mean, variance, rng),
            Noise::Poisson => poisson(plane, rng),
            Noise::Speckle { variance } => speckle(plane, variance, rng),
        }
    }

    pub fn apply_frame<R: Rng + ?Sized>(&self, frame: &mut FrameYuv420, rng: &mut R) {
        for plane in frame.planes_mut() {
            self.apply_plane(plane, rng);
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::Identity => f.write_str("none"),
            Noise::SaltPepper { density } => write!(f, "sp:{density}"),
            Noise::Gaussian { mean, variance } => write!(f, "gauss:{mean}:{variance}"),
            Noise::Poisson => f.write_str("poisson"),
            Noise::Speckle { variance } => write!(f, "speckle:{variance}"),
        }
    }
}

impl FromStr for Noise {
    type Err = Error;

    /// `none`, `sp:D`, `gauss:M:V`, `poisson`, `speckle:V`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number `{t}` in attack `{s}`")))
        };
        let noise = match parts.as_slice() {
            ["none"] => Noise::Identity,
            ["sp", d] => Noise::SaltPepper { density: num(d)? },
            ["gauss", m, v] => Noise::Gaussian { mean: num(m)?, variance: num(v)? },
            ["poisson"] => Noise::Poisson,
            ["speckle", v] => Noise::Speckle { variance: num(v)? },
            _ => return Err(Error::InvalidInput(format!("unrecognized attack spec `{s}`"))),
        };
        noise.validate()?;
        Ok(noise)
    }
}

/// A noise model plus the seed that makes it reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub noise: Noise,
    pub seed: u64,
}

impl AttackSpec {
    pub fn new(noise: Noise, seed: u64) -> Result<Self> {
        noise.validate()?;
        Ok(AttackSpec { noise, seed })
    }

    /// Attacks frame `index` of a video with its own derived generator, so
    /// results do not depend on processing order.
    pub fn apply_frame(&self, frame: &mut FrameYuv420, index: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, index));
        self.noise.apply_frame(frame, &mut rng);
    }
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn salt_pepper<R: Rng + ?Sized>(plane: &mut [u8], density: f64, rng: &mut R) {
    if density <= 0.0 {
        return;
    }
    for s in plane {
        let x: f64 = rng.random();
        if x < density / 2.0 {
            *s = 0;
        } else if x < density {
            *s = 255;
        }
    }
}

pub fn gaussian<R: Rng + ?Sized>(plane: &mut [u8], mean: f64, variance: f64, rng: &mut R) {
    let normal = Normal::new(mean, variance.sqrt()).expect("validated variance");
    for s in plane {
        *s = to_u8(*s as f64 / 255.0 + normal.sample(rng));
    }
}

pub fn poisson<R: Rng + ?Sized>(plane: &mut [u8], rng: &mut R) {
    // one distribution per possible rate; zero stays zero
    let dists: Vec<Option<Poisson<f64>>> =
        (0..256).map(|l| (l > 0).then(|| Poisson::new(l as f64).expect("positive rate"))).collect();
    for s in plane {
        if let Some(d) = &dists[*s as usize] {
            *s = d.sample(rng).min(255.0) as u8;
        }
    }
}

pub fn speckle<R: Rng + ?Sized>(plane: &mut [u8], variance: f64, rng: &mut R) {
    if variance <= 0.0 {
        return;
    }
    let half = (3.0 * variance).sqrt();
    let u = Uniform::new_inclusive(-half, half).expect("finite bounds");
    for s in plane {
        let x = *s as f64 / 255.0;
        *s = to_u8(x + x * u.sample(rng));
    }
}
