//! Ring parameters: degree-4096 negacyclic ring, plaintext modulus 40961,
//! ciphertext modulus q1*q2 with q1 carrying the data and q2 acting as the
//! key-switching modulus. Both primes are NTT-friendly (== 1 mod 2N) and the
//! set clears 128-bit RLWE security for ternary secrets at sigma ~= 3.2.

/// Polynomial modulus degree N; the ring is Z[X]/(X^N + 1).
pub const RING_DEGREE: usize = 4096;
pub const LOG_RING_DEGREE: usize = 12;

/// Plaintext modulus t.
pub const PLAINTEXT_MODULUS: u64 = 40961;

/// Data prime: smallest prime >= 2^53 congruent to 1 mod 2N.
pub const Q1: u64 = 9_007_199_254_781_953;
/// Key-switching prime: smallest prime >= 2^54 congruent to 1 mod 2N.
pub const Q2: u64 = 18_014_398_509_506_561;

/// Standard deviation of the centered-binomial encryption noise.
pub const NOISE_SIGMA: f64 = 3.2;

/// Bytes of row data packed per plaintext polynomial, one byte per
/// coefficient. Byte packing keeps the inner-product noise well inside the
/// q1/(2t) decryption budget at full 4096-row tables.
pub const CELL_BYTES: usize = RING_DEGREE;

/// Generator pair of the two-key oblivious-expansion variant.
pub const GENERATORS_TWO: [u64; 2] = [3, 1173];
/// Generator triple of the three-key variant.
pub const GENERATORS_THREE: [u64; 3] = [3, 5, 1167];

/// Canonical substitution exponent used at expansion level `level`
/// (0-based): N / 2^level + 1.
pub fn level_exponent(level: usize) -> u64 {
    (RING_DEGREE >> level) as u64 + 1
}

/// 2^levels slots per ciphertext, capped at the ring degree.
pub fn levels_for_rows(rows: usize) -> usize {
    if rows <= 1 {
        0
    } else if rows >= RING_DEGREE {
        LOG_RING_DEGREE
    } else {
        (usize::BITS - (rows - 1).leading_zeros()) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_u64(n: u64) -> bool {
        // deterministic Miller-Rabin for u64
        if n < 2 {
            return false;
        }
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if n % p == 0 {
                return n == p;
            }
        }
        let d = (n - 1) >> (n - 1).trailing_zeros();
        'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = 1u64;
            let mut base = a % n;
            let mut e = d;
            while e > 0 {
                if e & 1 == 1 {
                    x = ((x as u128 * base as u128) % n as u128) as u64;
                }
                base = ((base as u128 * base as u128) % n as u128) as u64;
                e >>= 1;
            }
            if x == 1 || x == n - 1 {
                continue;
            }
            let mut r = (n - 1) >> (n - 1).trailing_zeros();
            let mut s = (n - 1).trailing_zeros();
            let _ = r;
            while s > 1 {
                x = ((x as u128 * x as u128) % n as u128) as u64;
                if x == n - 1 {
                    continue 'witness;
                }
                s -= 1;
            }
            return false;
        }
        true
    }

    /// Re-derives the pinned primes by sieving upward, the same way they
    /// were chosen: the smallest primes at or above 2^53 and 2^54 congruent
    /// to 1 mod 2N.
    fn first_ntt_prime(floor: u64) -> u64 {
        let step = 2 * RING_DEGREE as u64;
        let mut c = floor + ((step + 1 - floor % step) % step);
        if c < floor {
            c += step;
        }
        while !is_prime_u64(c) {
            c += step;
        }
        c
    }

    #[test]
    fn pinned_primes_match_sieve() {
        assert_eq!(Q1, first_ntt_prime(1 << 53));
        assert_eq!(Q2, first_ntt_prime(1 << 54));
    }

    #[test]
    fn moduli_are_ntt_friendly() {
        let two_n = 2 * RING_DEGREE as u64;
        assert!(is_prime_u64(Q1) && Q1 % two_n == 1);
        assert!(is_prime_u64(Q2) && Q2 % two_n == 1);
        assert!(is_prime_u64(PLAINTEXT_MODULUS) && PLAINTEXT_MODULUS % two_n == 1);
        assert!(RING_DEGREE.is_power_of_two());
        assert_eq!(1usize << LOG_RING_DEGREE, RING_DEGREE);
    }

    #[test]
    fn level_math() {
        assert_eq!(level_exponent(0), 4097);
        assert_eq!(level_exponent(11), 3);
        assert_eq!(levels_for_rows(1), 0);
        assert_eq!(levels_for_rows(2), 1);
        assert_eq!(levels_for_rows(17), 5);
        assert_eq!(levels_for_rows(256), 8);
        assert_eq!(levels_for_rows(4096), 12);
        assert_eq!(levels_for_rows(5000), 12);
    }
}
