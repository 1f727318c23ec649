//! Primality testing, group parameter validation and safe-prime search.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{modpow_unchecked, random_in_range};

/// Miller–Rabin rounds used for every primality decision in this crate.
pub const MR_ROUNDS: usize = 40;

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Probabilistic primality test: trial division by small primes, then
/// `rounds` Miller–Rabin rounds with witnesses from a fixed-seed generator so
/// verdicts are reproducible.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }

    let n_minus_1 = n - 1u32;
    let mut d = n_minus_1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x4D52_5F57_4954_4E53);
    let upper = n - 2u32;
    'witness: for _ in 0..rounds {
        let a = random_in_range(&mut rng, &two, &upper);
        let mut x = modpow_unchecked(&a, &d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors of `n` by trial division. Only sensible for
/// moduli that fit in 64 bits.
pub fn factor_u64(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Full primitive-root check given the distinct prime factors of `p - 1`.
pub fn is_primitive_root(alpha: &BigUint, p: &BigUint, factors: &[BigUint]) -> bool {
    let order = p - 1u32;
    factors.iter().all(|f| {
        let e = &order / f;
        !modpow_unchecked(alpha, &e, p).is_one()
    })
}

/// Distinct prime factors of `p - 1` when they can be obtained cheaply: by
/// trial division for 64-bit moduli, or from the safe-prime structure
/// `p = 2q + 1`. `None` means the factorization is unknown.
pub fn known_order_factors(p: &BigUint) -> Option<Vec<BigUint>> {
    let order = p - 1u32;
    if let Some(small) = order.to_u64() {
        if small < (1u64 << 48) {
            return Some(factor_u64(small).into_iter().map(BigUint::from).collect());
        }
    }
    let q = &order >> 1;
    if order.is_even() && is_probable_prime(&q, MR_ROUNDS) {
        return Some(vec![BigUint::from(2u32), q]);
    }
    None
}

/// Searches for a safe prime `p = 2q + 1` of exactly `bits` bits with
/// `p ≡ 3 (mod 8)`, and returns it with its smallest generator.
pub fn generate_safe_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> (BigUint, BigUint) {
    assert!(bits >= 8, "safe prime search needs at least 8 bits");
    let qbits = bits - 1;
    let nbytes = qbits.div_ceil(8) as usize;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        let mut q = BigUint::from_bytes_le(&buf);
        // force exact bit length and q ≡ 1 (mod 4)
        let excess = nbytes as u64 * 8 - qbits;
        q >>= excess;
        q.set_bit(qbits - 1, true);
        q.set_bit(0, true);
        q.set_bit(1, false);

        // cheap sieve on both q and 2q + 1 before any Miller–Rabin work
        let sieved = SMALL_PRIMES[1..].iter().all(|&sp| {
            let r = (&q % sp).to_u32().unwrap_or(0);
            (r != 0 || q == BigUint::from(sp)) && !(2 * r + 1).is_multiple_of(sp)
        });
        if !sieved {
            continue;
        }
        let p: BigUint = (&q << 1) + 1u32;
        if p.bits() != bits {
            continue;
        }
        if !is_probable_prime(&q, 1) || !is_probable_prime(&p, 1) {
            continue;
        }
        if !is_probable_prime(&q, MR_ROUNDS) || !is_probable_prime(&p, MR_ROUNDS) {
            continue;
        }
        let factors = [BigUint::from(2u32), q.clone()];
        let mut g = BigUint::from(2u32);
        while !is_primitive_root(&g, &p, &factors) {
            g += 1u32;
        }
        return (p, g);
    }
}
