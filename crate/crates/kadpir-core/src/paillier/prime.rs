//! Random prime generation: windowed trial-division sieve, a base-2
//! Miller-Rabin pretest, then 20 randomized rounds.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use rand::RngCore;

const SIEVE_LIMIT: u64 = 50_000;
const WINDOW: usize = 2048;
const MR_ROUNDS: usize = 20;

static SMALL_PRIMES: Lazy<Vec<u64>> = Lazy::new(|| {
    let mut is_comp = vec![false; SIEVE_LIMIT as usize];
    let mut primes = Vec::new();
    for n in 2..SIEVE_LIMIT as usize {
        if !is_comp[n] {
            primes.push(n as u64);
            let mut m = n * n;
            while m < SIEVE_LIMIT as usize {
                is_comp[m] = true;
                m += n;
            }
        }
    }
    primes
});

/// Generates a random prime of exactly `bits` bits with the two top bits
/// set, so products of two such primes always reach their full width.
pub fn random_prime(bits: usize, rng: &mut dyn RngCore) -> BigUint {
    assert!(bits >= 64 && bits % 8 == 0);
    loop {
        let mut bytes = vec![0u8; bits / 8];
        rng.fill_bytes(&mut bytes);
        bytes[0] |= 0b1100_0000;
        *bytes.last_mut().unwrap() |= 1;
        let base = BigUint::from_bytes_be(&bytes);

        // Mark offsets i where base + 2i is divisible by a small prime.
        let mut alive = [true; WINDOW];
        for &sp in SMALL_PRIMES.iter().skip(1) {
            let r = (&base % sp).to_u64().unwrap();
            let inv2 = (sp + 1) / 2; // 2^-1 mod sp, sp odd
            let mut i = (((sp - r) % sp) * inv2 % sp) as usize;
            while i < WINDOW {
                alive[i] = false;
                i += sp as usize;
            }
        }

        for (i, live) in alive.iter().enumerate() {
            if !*live {
                continue;
            }
            let cand = &base + BigUint::from(2 * i as u64);
            if cand.bits() as usize != bits {
                break;
            }
            if miller_rabin_base(&cand, &BigUint::from(2u8)) && miller_rabin(&cand, MR_ROUNDS, rng)
            {
                return cand;
            }
        }
    }
}

/// Miller-Rabin with `rounds` random bases. `n` must be odd and > 3.
pub fn miller_rabin(n: &BigUint, rounds: usize, rng: &mut dyn RngCore) -> bool {
    let three = BigUint::from(3u8);
    if *n <= three {
        return *n >= BigUint::from(2u8);
    }
    let span = n - &three; // bases drawn from [2, n-2]
    let span_bytes = (span.bits() as usize).div_ceil(8);
    let mut buf = vec![0u8; span_bytes + 8];
    for _ in 0..rounds {
        rng.fill_bytes(&mut buf);
        let a = BigUint::from_bytes_be(&buf) % &span + BigUint::from(2u8);
        if !miller_rabin_base(n, &a) {
            return false;
        }
    }
    true
}

fn miller_rabin_base(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = a.modpow(&d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

/// Convenience wrapper used by tests.
pub fn is_probable_prime(n: &BigUint, rng: &mut dyn RngCore) -> bool {
    if n.is_zero() || n.is_one() {
        return false;
    }
    if n.bits() <= 16 {
        let v = n.to_u64().unwrap();
        return SMALL_PRIMES.binary_search(&v).is_ok();
    }
    for &sp in SMALL_PRIMES.iter() {
        if (n % sp).is_zero() {
            return false;
        }
    }
    miller_rabin(n, MR_ROUNDS, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_table_sane() {
        assert_eq!(&SMALL_PRIMES[..5], &[2, 3, 5, 7, 11]);
        assert!(SMALL_PRIMES.iter().all(|&p| p < SIEVE_LIMIT));
    }

    #[test]
    fn generates_primes_of_requested_size() {
        let mut rng = rand::rng();
        let p = random_prime(256, &mut rng);
        assert_eq!(p.bits(), 256);
        // top two bits set
        assert!(p.clone() >> 254u32 == BigUint::from(3u8));
        assert!(is_probable_prime(&p, &mut rng));
    }

    #[test]
    fn rejects_composites() {
        let mut rng = rand::rng();
        let p = random_prime(128, &mut rng);
        let q = random_prime(128, &mut rng);
        assert!(!is_probable_prime(&(p * q), &mut rng));
    }
}
