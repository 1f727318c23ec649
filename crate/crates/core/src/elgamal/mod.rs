//! Classical ElGamal and the byte-keystream variant used to encrypt payloads.
//!
//! The classical scheme (`oec_*`) encrypts integer message units as
//! `(d, z) = (α^k, y^k · m) mod p`. The keystream variant (`mec_*`) draws
//! ephemeral exponents until the little-endian byte expansions of the shared
//! secrets `y^k mod p` cover the plaintext, then XORs. Ciphertext length
//! equals plaintext length; the receiver regenerates the keystream from the
//! list of sender values `d = α^k mod p`.

mod bundle;
pub mod keyfile;
pub mod prime;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::error::{Error, Result};

pub use bundle::CipherBundle;
use prime::{is_primitive_root, is_probable_prime, known_order_factors, MR_ROUNDS};

/// Modulus of the worked example key (`p = 997`, `α = 809`).
pub const PAPER_P: u32 = 997;
pub const PAPER_ALPHA: u32 = 809;

/// Built-in 256-bit safe prime `p = 2q + 1` (`p ≡ 3 mod 8`); 2 generates
/// the full multiplicative group.
pub const DEFAULT_P_256: &str =
    "60038592902194661821531435920303283444309991040890438801036416347034917222779";
pub const DEFAULT_ALPHA_256: u32 = 2;

/// `base^exp mod modulus` by left-to-right square-and-multiply.
pub fn modpow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if *modulus < BigUint::from(2u32) {
        return Err(Error::InvalidModulus);
    }
    Ok(modpow_unchecked(base, exp, modulus))
}

pub(crate) fn modpow_unchecked(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> BigUint {
    let base = base % modulus;
    let mut acc = BigUint::one();
    for i in (0..exp.bits()).rev() {
        acc = (&acc * &acc) % modulus;
        if exp.bit(i) {
            acc = (&acc * &base) % modulus;
        }
    }
    acc % modulus
}

/// Uniform integer in `[lo, hi]` by rejection sampling on the bit length of
/// the span.
pub(crate) fn random_in_range<R: RngCore + ?Sized>(rng: &mut R, lo: &BigUint, hi: &BigUint) -> BigUint {
    debug_assert!(lo <= hi);
    let span: BigUint = hi - lo + 1u32;
    let bits = span.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        let mut v = BigUint::from_bytes_le(&buf);
        let excess = nbytes as u64 * 8 - bits;
        v >>= excess;
        if v < span {
            return lo + v;
        }
    }
}

/// Minimal little-endian byte expansion, least-significant byte first.
pub fn int_to_bytes_le(v: &BigUint) -> Result<Vec<u8>> {
    if v.is_zero() {
        return Err(Error::InvalidValue("byte expansion of zero".into()));
    }
    Ok(v.to_bytes_le())
}

/// Group parameters `(p, α)` shared by both cryptosystems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub p: BigUint,
    pub alpha: BigUint,
}

impl GroupParams {
    /// Validates `p` and `α`. The primitive-root property is fully checked
    /// when the factorization of `p - 1` is recoverable (64-bit moduli or
    /// safe primes); otherwise it is trusted and a warning is logged.
    pub fn new(p: BigUint, alpha: BigUint) -> Result<Self> {
        if p < BigUint::from(5u32) || !is_probable_prime(&p, MR_ROUNDS) {
            return Err(Error::KeyParameter(format!("p = {p} is not a usable prime")));
        }
        let p_minus_1 = &p - 1u32;
        if alpha <= BigUint::one() || alpha >= p_minus_1 {
            return Err(Error::KeyParameter("alpha must satisfy 1 < alpha < p - 1".into()));
        }
        match known_order_factors(&p) {
            Some(factors) => {
                if !is_primitive_root(&alpha, &p, &factors) {
                    return Err(Error::KeyParameter(format!(
                        "alpha = {alpha} is not a primitive root of p"
                    )));
                }
            }
            None => log::warn!("factorization of p - 1 unknown; primitive root not verified"),
        }
        Ok(GroupParams { p, alpha })
    }

    /// The worked-example group `p = 997, α = 809`.
    pub fn paper() -> Self {
        GroupParams { p: BigUint::from(PAPER_P), alpha: BigUint::from(PAPER_ALPHA) }
    }

    /// Built-in 256-bit safe-prime group.
    pub fn default_256() -> Self {
        GroupParams {
            p: DEFAULT_P_256.parse().expect("valid constant"),
            alpha: BigUint::from(DEFAULT_ALPHA_256),
        }
    }

    /// Fresh safe-prime group of the requested bit size.
    pub fn generate<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Self {
        let (p, alpha) = prime::generate_safe_prime(bits, rng);
        GroupParams { p, alpha }
    }

    /// Ephemeral and private exponents live in `[2, p - 3]`.
    fn exponent_bounds(&self) -> (BigUint, BigUint) {
        (BigUint::from(2u32), &self.p - 3u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElGamalPublic {
    pub p: BigUint,
    pub alpha: BigUint,
    pub y: BigUint,
}

impl ElGamalPublic {
    pub fn new(p: BigUint, alpha: BigUint, y: BigUint) -> Result<Self> {
        let group = GroupParams::new(p, alpha)?;
        if y.is_zero() || y >= group.p {
            return Err(Error::KeyParameter("y must satisfy 0 < y < p".into()));
        }
        Ok(ElGamalPublic { p: group.p, alpha: group.alpha, y })
    }

    pub fn group(&self) -> GroupParams {
        GroupParams { p: self.p.clone(), alpha: self.alpha.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElGamalPrivate {
    pub x: BigUint,
}

impl ElGamalPrivate {
    /// Checks `1 < x < p - 2` against the modulus the key is used with.
    pub fn check(&self, p: &BigUint) -> Result<()> {
        if self.x <= BigUint::one() || self.x >= p - 2u32 {
            return Err(Error::KeyParameter("x must satisfy 1 < x < p - 2".into()));
        }
        Ok(())
    }
}

/// Draws a private exponent uniformly from `(1, p - 2)` and derives `y`.
pub fn keygen<R: RngCore + ?Sized>(group: &GroupParams, rng: &mut R) -> (ElGamalPublic, ElGamalPrivate) {
    let (lo, hi) = group.exponent_bounds();
    let x = random_in_range(rng, &lo, &hi);
    keypair_from_exponent(group, x).expect("exponent drawn in range")
}

/// Builds the key pair for a chosen private exponent.
pub fn keypair_from_exponent(group: &GroupParams, x: BigUint) -> Result<(ElGamalPublic, ElGamalPrivate)> {
    let private = ElGamalPrivate { x };
    private.check(&group.p)?;
    let y = modpow_unchecked(&group.alpha, &private.x, &group.p);
    let public = ElGamalPublic { p: group.p.clone(), alpha: group.alpha.clone(), y };
    Ok((public, private))
}

/// Supplier of ephemeral exponents `k` for encryption.
pub trait ExponentSource {
    fn next_exponent(&mut self, p: &BigUint) -> Result<BigUint>;
}

/// Uniform draws from `(1, p - 2)` using any random generator.
pub struct RandomExponents<R>(pub R);

impl<R: RngCore> ExponentSource for RandomExponents<R> {
    fn next_exponent(&mut self, p: &BigUint) -> Result<BigUint> {
        let hi = p - 3u32;
        Ok(random_in_range(&mut self.0, &BigUint::from(2u32), &hi))
    }
}

/// A scripted exponent sequence, for reproducing fixed vectors.
#[derive(Debug, Clone)]
pub struct FixedExponents {
    ks: Vec<BigUint>,
    pos: usize,
}

impl FixedExponents {
    pub fn new<I, T>(ks: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        FixedExponents { ks: ks.into_iter().map(Into::into).collect(), pos: 0 }
    }
}

impl ExponentSource for FixedExponents {
    fn next_exponent(&mut self, p: &BigUint) -> Result<BigUint> {
        let k = self
            .ks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::InvalidInput("fixed exponent sequence exhausted".into()))?;
        self.pos += 1;
        if k <= BigUint::one() || k >= p - 2u32 {
            return Err(Error::KeyParameter(format!("ephemeral exponent {k} out of range")));
        }
        Ok(k)
    }
}

/// Classical ElGamal encryption of one message unit with ephemeral `k`.
pub fn oec_encrypt(m: &BigUint, public: &ElGamalPublic, k: &BigUint) -> Result<(BigUint, BigUint)> {
    let p = &public.p;
    if m >= p {
        return Err(Error::MessageRange);
    }
    if *k <= BigUint::one() || *k >= p - 2u32 {
        return Err(Error::KeyParameter(format!("ephemeral exponent {k} out of range")));
    }
    let d = modpow_unchecked(&public.alpha, k, p);
    let z = (modpow_unchecked(&public.y, k, p) * m) % p;
    Ok((d, z))
}

/// Classical ElGamal decryption: `m = d^(p-1-x) · z mod p`.
pub fn oec_decrypt(d: &BigUint, z: &BigUint, public: &ElGamalPublic, private: &ElGamalPrivate) -> Result<BigUint> {
    let p = &public.p;
    if d.is_zero() || d >= p {
        return Err(Error::InvalidCiphertext("d must satisfy 0 < d < p".into()));
    }
    if z >= p {
        return Err(Error::InvalidCiphertext("z must be below p".into()));
    }
    let e = p - 1u32 - &private.x;
    let r = modpow_unchecked(d, &e, p);
    Ok((r * z) % p)
}

/// Sender values and the keystream they expand to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keystream {
    pub bp: Vec<BigUint>,
    pub fsk: Vec<u8>,
}

/// Draws ephemeral exponents until the keystream covers `n` bytes, then
/// drops the surplus trailing bytes.
pub fn mec_keystream<S: ExponentSource + ?Sized>(public: &ElGamalPublic, n: usize, src: &mut S) -> Result<Keystream> {
    keystream_inner(public, n, src, None)
}

/// Same as [`mec_keystream`] but also returns the exponents drawn.
pub fn mec_keystream_traced<S: ExponentSource + ?Sized>(
    public: &ElGamalPublic,
    n: usize,
    src: &mut S,
) -> Result<(Keystream, Vec<BigUint>)> {
    let mut ks = Vec::new();
    let stream = keystream_inner(public, n, src, Some(&mut ks))?;
    Ok((stream, ks))
}

fn keystream_inner<S: ExponentSource + ?Sized>(
    public: &ElGamalPublic,
    n: usize,
    src: &mut S,
    mut trace: Option<&mut Vec<BigUint>>,
) -> Result<Keystream> {
    let p = &public.p;
    let mut bp = Vec::new();
    let mut fsk = Vec::with_capacity(n + p.bits().div_ceil(8) as usize);
    while fsk.len() < n {
        let k = src.next_exponent(p)?;
        let d = modpow_unchecked(&public.alpha, &k, p);
        let sk = modpow_unchecked(&public.y, &k, p);
        bp.push(d);
        fsk.extend_from_slice(&int_to_bytes_le(&sk)?);
        if let Some(t) = trace.as_deref_mut() {
            t.push(k);
        }
    }
    fsk.truncate(n);
    Ok(Keystream { bp, fsk })
}

/// XOR-keystream encryption. The ciphertext has the plaintext's length.
pub fn mec_encrypt<S: ExponentSource + ?Sized>(plain: &[u8], public: &ElGamalPublic, src: &mut S) -> Result<CipherBundle> {
    let ks = mec_keystream(public, plain.len(), src)?;
    let z = plain.iter().zip(&ks.fsk).map(|(m, k)| m ^ k).collect();
    Ok(CipherBundle { bp: ks.bp, z, plain_len: plain.len() })
}

/// Regenerates the keystream from `bundle.bp` with the private exponent and
/// XORs it off.
pub fn mec_decrypt(bundle: &CipherBundle, p: &BigUint, private: &ElGamalPrivate) -> Result<Vec<u8>> {
    bundle.validate(p)?;
    let fsk = regenerate_keystream(&bundle.bp, bundle.plain_len, p, private)?;
    Ok(bundle.z.iter().zip(&fsk).map(|(c, k)| c ^ k).collect())
}

/// Receiver-side keystream: `sk_i = bp_i^x mod p`, expanded and truncated.
pub fn regenerate_keystream(bp: &[BigUint], n: usize, p: &BigUint, private: &ElGamalPrivate) -> Result<Vec<u8>> {
    let mut fsk = Vec::with_capacity(n + p.bits().div_ceil(8) as usize);
    for d in bp {
        if fsk.len() >= n {
            break;
        }
        let sk = modpow_unchecked(d, &private.x, p);
        fsk.extend_from_slice(&int_to_bytes_le(&sk)?);
    }
    if fsk.len() < n {
        return Err(Error::CorruptBundle(format!(
            "keystream covers {} of {} bytes",
            fsk.len(),
            n
        )));
    }
    fsk.truncate(n);
    Ok(fsk)
}
