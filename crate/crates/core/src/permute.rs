//! Keyed, reproducible permutations of embedding positions and payload bits.
//!
//! The generator is SplitMix64 and the shuffle is Fisher–Yates with
//! rejection sampling, so the exact sequence is fixed to the bit on every
//! platform. See `docs/wire-format.md` for the domain tag constants.

use crate::error::{Error, Result};

pub const TAG_HL: u64 = 0x484C_0000_0000_0001;
pub const TAG_HH: u64 = 0x4848_0000_0000_0002;
pub const TAG_U: u64 = 0x5500_0000_0000_0003;
pub const TAG_V: u64 = 0x5600_0000_0000_0004;
pub const TAG_PAYLOAD_L: u64 = 0x5000_0000_0000_0005;
pub const TAG_PAYLOAD_M: u64 = 0x5000_0000_0000_0006;
pub const TAG_PAYLOAD_Q: u64 = 0x5000_0000_0000_0007;
pub const TAG_PAYLOAD_H: u64 = 0x5000_0000_0000_0008;

pub const ALL_TAGS: [u64; 8] =
    [TAG_HL, TAG_HH, TAG_U, TAG_V, TAG_PAYLOAD_L, TAG_PAYLOAD_M, TAG_PAYLOAD_Q, TAG_PAYLOAD_H];

const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// The stego key seeding every coordinate and payload permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StegoKey {
    pub seed: u64,
}

impl StegoKey {
    pub fn new(seed: u64) -> Self {
        StegoKey { seed }
    }

    pub fn from_passphrase(phrase: &str) -> Self {
        StegoKey { seed: fnv1a64(phrase.as_bytes()) }
    }

    /// Public fingerprint recorded in sidecars so a wrong key can be
    /// detected without revealing the seed.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(&self.seed.to_le_bytes())
    }
}

/// One SplitMix64 step: returns the advanced state and the output word.
#[inline]
pub fn prng_next(state: u64) -> (u64, u64) {
    let state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut v = state;
    v = (v ^ (v >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    v = (v ^ (v >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (state, v ^ (v >> 31))
}

/// Independent sub-seed for item `index` of a stream seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let (_, h) = prng_next(base);
    prng_next(h ^ index).1
}

#[derive(Debug, Clone, Copy)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        let (s, v) = prng_next(self.state);
        self.state = s;
        v
    }

    /// Unbiased draw from `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let limit = (1u128 << 64) / bound as u128 * bound as u128;
        loop {
            let v = self.next_u64();
            if (v as u128) < limit {
                return v % bound;
            }
        }
    }
}

/// A bijection on `[0, n)` stored as its forward index array. Applying it
/// gathers: `apply(p, x)[i] = x[p[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { forward: (0..n).collect() }
    }

    pub fn from_vec(forward: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; forward.len()];
        for &i in &forward {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::CorruptPermutation);
            }
        }
        Ok(Permutation { forward })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.forward
    }

    pub fn get(&self, i: usize) -> usize {
        self.forward[i]
    }

    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.forward.len(), "permutation length mismatch");
        self.forward.iter().map(|&i| x[i]).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0usize; self.forward.len()];
        for (i, &p) in self.forward.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { forward: inv }
    }
}

/// Inverts an arbitrary index array, rejecting non-bijections.
pub fn invert(perm: &[usize]) -> Result<Permutation> {
    Ok(Permutation::from_vec(perm.to_vec())?.inverse())
}

/// Fisher–Yates from the top index down, seeded with `key.seed ^ domain_tag`.
pub fn keyed_permutation(key: StegoKey, domain_tag: u64, n: usize) -> Permutation {
    let mut rng = SplitMix64::new(key.seed ^ domain_tag);
    let mut forward: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        forward.swap(i, j);
    }
    Permutation { forward }
}
