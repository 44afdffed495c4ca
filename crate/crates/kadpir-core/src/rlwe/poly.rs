//! Coefficient-domain polynomial helpers and samplers.

use rand::RngCore;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use super::params::RING_DEGREE;

/// A polynomial held modulo both primes (RNS form). Whether the limbs are in
/// coefficient or NTT representation is contextual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPoly {
    pub c1: Vec<u64>,
    pub c2: Vec<u64>,
}

impl RnsPoly {
    pub fn zero() -> Self {
        RnsPoly {
            c1: vec![0; RING_DEGREE],
            c2: vec![0; RING_DEGREE],
        }
    }
}

pub fn zero_poly() -> Vec<u64> {
    vec![0; RING_DEGREE]
}

pub fn add_assign_mod(a: &mut [u64], b: &[u64], q: u64) {
    for (x, &y) in a.iter_mut().zip(b) {
        let s = *x + y;
        *x = if s >= q { s - q } else { s };
    }
}

pub fn sub_mod(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| if x >= y { x - y } else { x + q - y })
        .collect()
}

/// X -> X^g on coefficients, negacyclic: coefficient u moves to u*g mod 2N
/// with a sign flip whenever the product wraps an odd number of times.
pub fn automorphism(a: &[u64], g: u64, q: u64) -> Vec<u64> {
    let n = RING_DEGREE as u64;
    let two_n = 2 * n;
    let mut out = vec![0u64; RING_DEGREE];
    for (u, &coeff) in a.iter().enumerate() {
        if coeff == 0 {
            continue;
        }
        let pos = (u as u64 * g) % two_n;
        if pos < n {
            out[pos as usize] = coeff;
        } else {
            out[(pos - n) as usize] = q - coeff;
        }
    }
    out
}

/// Multiplication by the monomial X^e with e taken mod 2N (so negative
/// shifts are expressed as 2N - |e|).
pub fn monomial_mul(a: &[u64], e: u64, q: u64) -> Vec<u64> {
    let n = RING_DEGREE as u64;
    let two_n = 2 * n;
    let e = e % two_n;
    let mut out = vec![0u64; RING_DEGREE];
    for (u, &coeff) in a.iter().enumerate() {
        if coeff == 0 {
            continue;
        }
        let pos = (u as u64 + e) % two_n;
        if pos < n {
            out[pos as usize] = coeff;
        } else {
            out[(pos - n) as usize] = q - coeff;
        }
    }
    out
}

/// Uniform polynomial below `q`, drawn from a domain-separated XOF stream.
pub fn uniform_from_xof(reader: &mut impl XofReader, q: u64) -> Vec<u64> {
    let bits = 64 - q.leading_zeros();
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut out = Vec::with_capacity(RING_DEGREE);
    let mut buf = [0u8; 8];
    while out.len() < RING_DEGREE {
        reader.read(&mut buf);
        let v = u64::from_le_bytes(buf) & mask;
        if v < q {
            out.push(v);
        }
    }
    out
}

pub fn xof(domain: &[u8], seed: &[u8; 32]) -> impl XofReader {
    let mut h = Shake256::default();
    h.update(domain);
    h.update(seed);
    h.finalize_xof()
}

/// Ternary secret coefficients in {-1, 0, 1}, uniform.
pub fn sample_ternary(rng: &mut dyn RngCore) -> Vec<i8> {
    let mut out = Vec::with_capacity(RING_DEGREE);
    let mut word = 0u64;
    let mut have = 0;
    while out.len() < RING_DEGREE {
        if have == 0 {
            word = rng.next_u64();
            have = 32;
        }
        let bits = word & 3;
        word >>= 2;
        have -= 1;
        match bits {
            0 => out.push(-1i8),
            1 => out.push(0),
            2 => out.push(1),
            _ => {} // reject to stay uniform over three values
        }
    }
    out
}

/// Centered-binomial noise: sum of 21 coin differences per coefficient,
/// sigma = sqrt(21/2) ~= 3.24, the spec's ~3.2 target.
pub fn sample_cbd_noise(rng: &mut dyn RngCore) -> Vec<i16> {
    const PAIRS: usize = 21;
    let mut out = Vec::with_capacity(RING_DEGREE);
    let mut word = 0u64;
    let mut have = 0u32;
    for _ in 0..RING_DEGREE {
        let mut acc: i16 = 0;
        let mut taken = 0;
        while taken < PAIRS {
            if have < 2 {
                word = rng.next_u64();
                have = 64;
            }
            acc += (word & 1) as i16 - ((word >> 1) & 1) as i16;
            word >>= 2;
            have -= 2;
            taken += 1;
        }
        out.push(acc);
    }
    out
}

/// Signed value reduced into [0, q).
#[inline]
pub fn signed_mod(v: i64, q: u64) -> u64 {
    let r = v % q as i64;
    if r < 0 {
        (r + q as i64) as u64
    } else {
        r as u64
    }
}
