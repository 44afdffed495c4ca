//! Keys, ciphertexts, and the BFV-style encode/decrypt path.
//!
//! Fresh query ciphertexts are encrypted at the full modulus Q = q1*q2 with
//! the uniform half seed-compressed. The server immediately switches them
//! down to q1 and does all homomorphic work there; q2 only reappears inside
//! key switching. Responses are therefore single-limb q1 ciphertexts.

use once_cell::sync::Lazy;
use rand::RngCore;

use super::ntt::{inv_mod, mul_mod, table_q1, table_q2};
use super::params::{PLAINTEXT_MODULUS, Q1, Q2, RING_DEGREE};
use super::poly::{
    add_assign_mod, sample_cbd_noise, sample_ternary, signed_mod, uniform_from_xof, xof, RnsPoly,
};
use crate::error::{Error, Result};

const SEED_DOMAIN_CT: &[u8] = b"kadpir/rlwe/ct-a/v1";
pub(crate) const SEED_DOMAIN_KSK: &[u8] = b"kadpir/rlwe/ksk-a/v1";

/// floor(Q/t) reduced into each limb, and q2^-1 mod q1 for the switch down.
struct Consts {
    delta_q1: u64,
    delta_q2: u64,
    q2_inv_q1: u64,
}

static CONSTS: Lazy<Consts> = Lazy::new(|| {
    let q = Q1 as u128 * Q2 as u128;
    let delta = q / PLAINTEXT_MODULUS as u128;
    Consts {
        delta_q1: (delta % Q1 as u128) as u64,
        delta_q2: (delta % Q2 as u128) as u64,
        q2_inv_q1: inv_mod(Q2 % Q1, Q1),
    }
});

pub struct SecretKey {
    coeffs: Vec<i8>,
    pub(crate) s_ntt_q1: Vec<u64>,
    pub(crate) s_ntt_q2: Vec<u64>,
}

impl SecretKey {
    pub fn generate(rng: &mut dyn RngCore) -> SecretKey {
        let coeffs = sample_ternary(rng);
        let mut s_ntt_q1: Vec<u64> = coeffs.iter().map(|&c| signed_mod(c as i64, Q1)).collect();
        let mut s_ntt_q2: Vec<u64> = coeffs.iter().map(|&c| signed_mod(c as i64, Q2)).collect();
        table_q1().forward(&mut s_ntt_q1);
        table_q2().forward(&mut s_ntt_q2);
        SecretKey {
            coeffs,
            s_ntt_q1,
            s_ntt_q2,
        }
    }

    pub(crate) fn coeffs(&self) -> &[i8] {
        &self.coeffs
    }
}

/// Working ciphertext at modulus q1, coefficient domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ct1 {
    pub b: Vec<u64>,
    pub a: Vec<u64>,
}

impl Ct1 {
    pub fn zero() -> Ct1 {
        Ct1 {
            b: vec![0; RING_DEGREE],
            a: vec![0; RING_DEGREE],
        }
    }

    pub fn add_assign(&mut self, other: &Ct1) {
        add_assign_mod(&mut self.b, &other.b, Q1);
        add_assign_mod(&mut self.a, &other.a, Q1);
    }
}

/// Fresh ciphertext at modulus Q with the uniform half replaced by its seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreshCt {
    pub seed: [u8; 32],
    pub b: RnsPoly,
}

/// Expands a ciphertext seed into the uniform half, NTT domain per limb.
pub(crate) fn expand_ct_a(seed: &[u8; 32]) -> RnsPoly {
    let mut reader = xof(SEED_DOMAIN_CT, seed);
    let c1 = uniform_from_xof(&mut reader, Q1);
    let c2 = uniform_from_xof(&mut reader, Q2);
    RnsPoly { c1, c2 }
}

/// Encrypts a plaintext polynomial (coefficients mod t) at modulus Q.
pub fn encrypt_fresh(sk: &SecretKey, pt: &[u64], rng: &mut dyn RngCore) -> FreshCt {
    debug_assert_eq!(pt.len(), RING_DEGREE);
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    let a = expand_ct_a(&seed);
    let e = sample_cbd_noise(rng);
    let c = &*CONSTS;

    let limb = |a_ntt: &[u64], s_ntt: &[u64], q: u64, delta: u64, table: &super::ntt::NttTable| {
        let mut az: Vec<u64> = a_ntt
            .iter()
            .zip(s_ntt)
            .map(|(&x, &y)| mul_mod(x, y, q))
            .collect();
        table.inverse(&mut az);
        az.iter()
            .zip(pt)
            .zip(&e)
            .map(|((&as_i, &m), &e_i)| {
                let dm = ((delta as u128 * m as u128) % q as u128) as u64;
                let v = dm as i128 + e_i as i128 - as_i as i128;
                signed_mod(v as i64, q)
            })
            .collect::<Vec<u64>>()
    };

    let b = RnsPoly {
        c1: limb(&a.c1, &sk.s_ntt_q1, Q1, c.delta_q1, table_q1()),
        c2: limb(&a.c2, &sk.s_ntt_q2, Q2, c.delta_q2, table_q2()),
    };
    FreshCt { seed, b }
}

/// Rounded division by q2 in RNS: maps x mod Q to round(x/q2) mod q1.
#[inline]
pub(crate) fn round_div_q2(x1: u64, x2: u64) -> u64 {
    let centered = if x2 > Q2 / 2 {
        x2 as i128 - Q2 as i128
    } else {
        x2 as i128
    };
    let diff = (x1 as i128 - centered).rem_euclid(Q1 as i128) as u64;
    mul_mod(diff, CONSTS.q2_inv_q1, Q1)
}

/// Switches a fresh ciphertext down to the working modulus q1.
pub fn mod_switch_to_q1(ct: &FreshCt) -> Ct1 {
    let a_ntt = expand_ct_a(&ct.seed);
    let mut a1 = a_ntt.c1;
    let mut a2 = a_ntt.c2;
    table_q1().inverse(&mut a1);
    table_q2().inverse(&mut a2);

    let switch = |x1: &[u64], x2: &[u64]| -> Vec<u64> {
        x1.iter()
            .zip(x2)
            .map(|(&v1, &v2)| round_div_q2(v1, v2))
            .collect()
    };
    Ct1 {
        b: switch(&ct.b.c1, &ct.b.c2),
        a: switch(&a1, &a2),
    }
}

/// b + a*s mod q1, the raw decryption before rounding.
fn phase(sk: &SecretKey, ct: &Ct1) -> Vec<u64> {
    let mut a_ntt = ct.a.clone();
    table_q1().forward(&mut a_ntt);
    for (x, &s) in a_ntt.iter_mut().zip(&sk.s_ntt_q1) {
        *x = mul_mod(*x, s, Q1);
    }
    table_q1().inverse(&mut a_ntt);
    add_assign_mod(&mut a_ntt, &ct.b, Q1);
    a_ntt
}

/// Decrypts a q1 ciphertext to plaintext coefficients mod t.
pub fn decrypt_q1(sk: &SecretKey, ct: &Ct1) -> Vec<u64> {
    decrypt_q1_with_noise(sk, ct).0
}

/// Decrypts and reports the largest residual noise magnitude across
/// coefficients (distance from the decoded codeword).
pub fn decrypt_q1_with_noise(sk: &SecretKey, ct: &Ct1) -> (Vec<u64>, u64) {
    let t = PLAINTEXT_MODULUS as u128;
    let raw = phase(sk, ct);
    let mut worst = 0u64;
    let pt = raw
        .iter()
        .map(|&r| {
            let m = (((r as u128 * t + Q1 as u128 / 2) / Q1 as u128) % t) as u64;
            let ideal = ((m as u128 * Q1 as u128 + t / 2) / t) as u64 % Q1;
            let diff = (r + Q1 - ideal) % Q1;
            let mag = diff.min(Q1 - diff);
            worst = worst.max(mag);
            m
        })
        .collect();
    (pt, worst)
}

/// Homomorphic plaintext multiplication: both halves scaled by `pt` in the
/// ring. Used by tests and the one-row fast path; the inner product in
/// `respond` fuses this with accumulation.
pub fn scal_mult_plain(ct: &Ct1, pt: &[u64]) -> Ct1 {
    let t = table_q1();
    let mut p_ntt = pt.to_vec();
    t.forward(&mut p_ntt);
    let mul = |x: &[u64]| {
        let mut x_ntt = x.to_vec();
        t.forward(&mut x_ntt);
        for (v, &p) in x_ntt.iter_mut().zip(&p_ntt) {
            *v = mul_mod(*v, p, Q1);
        }
        t.inverse(&mut x_ntt);
        x_ntt
    };
    Ct1 {
        b: mul(&ct.b),
        a: mul(&ct.a),
    }
}

/// Packs bytes into plaintext coefficients, one byte per slot.
pub fn pack_bytes(bytes: &[u8]) -> Vec<u64> {
    debug_assert!(bytes.len() <= RING_DEGREE);
    let mut out = vec![0u64; RING_DEGREE];
    for (slot, &b) in out.iter_mut().zip(bytes) {
        *slot = b as u64;
    }
    out
}

/// Inverse of [`pack_bytes`]; fails when decryption noise pushed a slot out
/// of byte range.
pub fn unpack_bytes(pt: &[u64], len: usize) -> Result<Vec<u8>> {
    pt[..len]
        .iter()
        .map(|&c| {
            u8::try_from(c)
                .map_err(|_| Error::DecryptionFailure(format!("plaintext slot {c} not a byte")))
        })
        .collect()
}

// --- serialization -------------------------------------------------------

pub const POLY_BYTES: usize = RING_DEGREE * 8;
/// Flag byte + seed + two-limb b.
pub const FRESH_CT_BYTES: usize = 1 + 32 + 2 * POLY_BYTES;
/// Flag byte + single-limb b and a.
pub const FULL_CT_BYTES: usize = 1 + 2 * POLY_BYTES;

const FLAG_FULL: u8 = 0;
const FLAG_SEEDED: u8 = 1;

pub fn write_poly(out: &mut Vec<u8>, p: &[u64]) {
    for &c in p {
        out.extend_from_slice(&c.to_le_bytes());
    }
}

pub fn read_poly(buf: &[u8], q: u64) -> Result<Vec<u64>> {
    if buf.len() != POLY_BYTES {
        return Err(Error::Malformed("polynomial has wrong length".into()));
    }
    buf.chunks_exact(8)
        .map(|c| {
            let v = u64::from_le_bytes(c.try_into().unwrap());
            if v >= q {
                return Err(Error::Malformed("coefficient out of range".into()));
            }
            Ok(v)
        })
        .collect()
}

impl FreshCt {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRESH_CT_BYTES);
        out.push(FLAG_SEEDED);
        out.extend_from_slice(&self.seed);
        write_poly(&mut out, &self.b.c1);
        write_poly(&mut out, &self.b.c2);
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<FreshCt> {
        if buf.len() != FRESH_CT_BYTES || buf[0] != FLAG_SEEDED {
            return Err(Error::Malformed("expected a seeded ciphertext".into()));
        }
        let seed: [u8; 32] = buf[1..33].try_into().unwrap();
        let b = RnsPoly {
            c1: read_poly(&buf[33..33 + POLY_BYTES], Q1)?,
            c2: read_poly(&buf[33 + POLY_BYTES..], Q2)?,
        };
        Ok(FreshCt { seed, b })
    }
}

impl Ct1 {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FULL_CT_BYTES);
        out.push(FLAG_FULL);
        write_poly(&mut out, &self.b);
        write_poly(&mut out, &self.a);
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Ct1> {
        if buf.len() != FULL_CT_BYTES || buf[0] != FLAG_FULL {
            return Err(Error::Malformed("expected a full q1 ciphertext".into()));
        }
        Ok(Ct1 {
            b: read_poly(&buf[1..1 + POLY_BYTES], Q1)?,
            a: read_poly(&buf[1 + POLY_BYTES..], Q1)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_pt(rng: &mut impl Rng) -> Vec<u64> {
        (0..RING_DEGREE)
            .map(|_| rng.random_range(0..PLAINTEXT_MODULUS))
            .collect()
    }

    #[test]
    fn fresh_encrypt_switch_decrypt() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        for _ in 0..4 {
            let pt = random_pt(&mut rng);
            let fresh = encrypt_fresh(&sk, &pt, &mut rng);
            let ct = mod_switch_to_q1(&fresh);
            let (got, noise) = decrypt_q1_with_noise(&sk, &ct);
            assert_eq!(got, pt);
            assert!(noise < Q1 / (2 * PLAINTEXT_MODULUS));
        }
    }

    #[test]
    fn additive_homomorphism() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        let p1 = random_pt(&mut rng);
        let p2 = random_pt(&mut rng);
        let mut ct = mod_switch_to_q1(&encrypt_fresh(&sk, &p1, &mut rng));
        ct.add_assign(&mod_switch_to_q1(&encrypt_fresh(&sk, &p2, &mut rng)));
        let expect: Vec<u64> = p1
            .iter()
            .zip(&p2)
            .map(|(&x, &y)| (x + y) % PLAINTEXT_MODULUS)
            .collect();
        assert_eq!(decrypt_q1(&sk, &ct), expect);
    }

    #[test]
    fn plaintext_scalar_multiplication() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        // keep the product's noise small: tiny messages and scalars
        let p: Vec<u64> = (0..RING_DEGREE).map(|_| rng.random_range(0..4)).collect();
        let s: Vec<u64> = (0..RING_DEGREE).map(|_| rng.random_range(0..4)).collect();
        let ct = mod_switch_to_q1(&encrypt_fresh(&sk, &p, &mut rng));
        let got = decrypt_q1(&sk, &scal_mult_plain(&ct, &s));

        // naive negacyclic product mod t
        let n = RING_DEGREE;
        let t = PLAINTEXT_MODULUS;
        let mut expect = vec![0u64; n];
        for i in 0..n {
            if p[i] == 0 {
                continue;
            }
            for j in 0..n {
                if s[j] == 0 {
                    continue;
                }
                let prod = (p[i] * s[j]) % t;
                let k = i + j;
                if k < n {
                    expect[k] = (expect[k] + prod) % t;
                } else {
                    expect[k - n] = (expect[k - n] + t - prod) % t;
                }
            }
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn serialization_roundtrip() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        let pt = random_pt(&mut rng);
        let fresh = encrypt_fresh(&sk, &pt, &mut rng);
        let bytes = fresh.to_bytes();
        assert_eq!(bytes.len(), FRESH_CT_BYTES);
        assert_eq!(FreshCt::from_bytes(&bytes).unwrap(), fresh);

        let ct = mod_switch_to_q1(&fresh);
        let bytes = ct.to_bytes();
        assert_eq!(bytes.len(), FULL_CT_BYTES);
        assert_eq!(Ct1::from_bytes(&bytes).unwrap(), ct);
    }

    #[test]
    fn byte_packing() {
        let bytes: Vec<u8> = (0..100u8).collect();
        let pt = pack_bytes(&bytes);
        assert_eq!(unpack_bytes(&pt, 100).unwrap(), bytes);
        let mut bad = pt.clone();
        bad[5] = 300;
        assert!(unpack_bytes(&bad, 100).is_err());
    }
}
