//! Automorphism key generation and key switching.
//!
//! A substitution key for exponent g encrypts q2 * s(X^g) under s at the
//! full modulus Q = q1*q2. Switching a q1 ciphertext half multiplies it
//! against the key over Q and divides the result by q2 with rounding, so the
//! switch contributes only a small additive noise term. One key is a single
//! (b, a) pair with the uniform half seed-compressed: ~64 KB on the wire.

use rand::RngCore;

use super::cipher::{round_div_q2, SecretKey, SEED_DOMAIN_KSK};
use super::ntt::{mul_mod, table_q1, table_q2, NttTable};
use super::params::{Q1, Q2, RING_DEGREE};
use super::poly::{signed_mod, uniform_from_xof, xof, RnsPoly};
use crate::error::{Error, Result};

/// Wire form of one substitution key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KskWire {
    pub exponent: u64,
    pub seed: [u8; 32],
    /// Coefficient-domain b, both limbs.
    pub b: RnsPoly,
}

/// Server-side form: everything in NTT domain with Shoup duals precomputed.
pub struct KskPrepared {
    pub exponent: u64,
    b_ntt: RnsPoly,
    b_shoup: RnsPoly,
    a_ntt: RnsPoly,
    a_shoup: RnsPoly,
}

fn expand_ksk_a(seed: &[u8; 32]) -> RnsPoly {
    let mut reader = xof(SEED_DOMAIN_KSK, seed);
    let c1 = uniform_from_xof(&mut reader, Q1);
    let c2 = uniform_from_xof(&mut reader, Q2);
    RnsPoly { c1, c2 }
}

/// X -> X^g on the signed ternary secret.
fn automorphism_signed(s: &[i8], g: u64) -> Vec<i8> {
    let n = RING_DEGREE as u64;
    let two_n = 2 * n;
    let mut out = vec![0i8; RING_DEGREE];
    for (u, &c) in s.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let pos = (u as u64 * g) % two_n;
        if pos < n {
            out[pos as usize] = c;
        } else {
            out[(pos - n) as usize] = -c;
        }
    }
    out
}

/// Generates the substitution key for `exponent`.
pub fn generate_ksk(sk: &SecretKey, exponent: u64, rng: &mut dyn RngCore) -> KskWire {
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    let a = expand_ksk_a(&seed);
    let e = super::poly::sample_cbd_noise(rng);
    let tau_s = automorphism_signed(sk.coeffs(), exponent);

    let limb = |a_ntt: &[u64],
                s_ntt: &[u64],
                q: u64,
                msg_scale: u64,
                table: &NttTable|
     -> Vec<u64> {
        let mut az: Vec<u64> = a_ntt
            .iter()
            .zip(s_ntt)
            .map(|(&x, &y)| mul_mod(x, y, q))
            .collect();
        table.inverse(&mut az);
        az.iter()
            .zip(&e)
            .zip(&tau_s)
            .map(|((&as_i, &e_i), &ts_i)| {
                let msg = mul_mod(msg_scale, signed_mod(ts_i as i64, q), q);
                signed_mod((msg as i128 + e_i as i128 - as_i as i128) as i64, q)
            })
            .collect()
    };

    // message is q2 * tau(s): it vanishes mod q2 and scales by q2 mod q1.
    let b = RnsPoly {
        c1: limb(&a.c1, &sk.s_ntt_q1, Q1, Q2 % Q1, table_q1()),
        c2: limb(&a.c2, &sk.s_ntt_q2, Q2, 0, table_q2()),
    };
    KskWire {
        exponent,
        seed,
        b,
    }
}

impl KskWire {
    pub fn prepare(&self) -> KskPrepared {
        let t1 = table_q1();
        let t2 = table_q2();
        let mut b_ntt = self.b.clone();
        t1.forward(&mut b_ntt.c1);
        t2.forward(&mut b_ntt.c2);
        let a_ntt = expand_ksk_a(&self.seed);
        let shoup = |p: &RnsPoly| RnsPoly {
            c1: p.c1.iter().map(|&w| t1.shoup_dual(w)).collect(),
            c2: p.c2.iter().map(|&w| t2.shoup_dual(w)).collect(),
        };
        KskPrepared {
            exponent: self.exponent,
            b_shoup: shoup(&b_ntt),
            a_shoup: shoup(&a_ntt),
            b_ntt,
            a_ntt,
        }
    }
}

impl KskPrepared {
    /// Switches the `a` half of a permuted ciphertext: returns (u, v) such
    /// that the switched ciphertext is (b + u, v).
    pub fn apply(&self, a_coeffs: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let t1 = table_q1();
        let t2 = table_q2();

        // a lifts exactly into both limbs since its values are below q1 < q2
        let mut d1 = a_coeffs.to_vec();
        let mut d2 = a_coeffs.to_vec();
        t1.forward(&mut d1);
        t2.forward(&mut d2);

        let mul_limb =
            |d: &[u64], w: &[u64], ws: &[u64], table: &NttTable| -> Vec<u64> {
                let mut out: Vec<u64> = d
                    .iter()
                    .zip(w.iter().zip(ws))
                    .map(|(&x, (&wi, &wsi))| table.mul_shoup(x, wi, wsi))
                    .collect();
                table.inverse(&mut out);
                out
            };

        let u1 = mul_limb(&d1, &self.b_ntt.c1, &self.b_shoup.c1, t1);
        let u2 = mul_limb(&d2, &self.b_ntt.c2, &self.b_shoup.c2, t2);
        let v1 = mul_limb(&d1, &self.a_ntt.c1, &self.a_shoup.c1, t1);
        let v2 = mul_limb(&d2, &self.a_ntt.c2, &self.a_shoup.c2, t2);

        let divide = |x1: &[u64], x2: &[u64]| -> Vec<u64> {
            x1.iter()
                .zip(x2)
                .map(|(&a, &b)| round_div_q2(a, b))
                .collect()
        };
        (divide(&u1, &u2), divide(&v1, &v2))
    }
}

/// Serialized size of one key entry: exponent, seed, both b limbs.
pub const KSK_WIRE_BYTES: usize = 2 + 32 + 2 * super::cipher::POLY_BYTES;

pub fn write_ksk(out: &mut Vec<u8>, k: &KskWire) {
    out.extend_from_slice(&(k.exponent as u16).to_be_bytes());
    out.extend_from_slice(&k.seed);
    super::cipher::write_poly(out, &k.b.c1);
    super::cipher::write_poly(out, &k.b.c2);
}

pub fn read_ksk(buf: &[u8]) -> Result<KskWire> {
    if buf.len() != KSK_WIRE_BYTES {
        return Err(Error::Malformed("substitution key has wrong length".into()));
    }
    let exponent = u16::from_be_bytes(buf[..2].try_into().unwrap()) as u64;
    if exponent % 2 == 0 || exponent >= 2 * RING_DEGREE as u64 {
        return Err(Error::Malformed(format!(
            "substitution exponent {exponent} not an odd unit mod 2N"
        )));
    }
    let seed: [u8; 32] = buf[2..34].try_into().unwrap();
    let pb = super::cipher::POLY_BYTES;
    let b = RnsPoly {
        c1: super::cipher::read_poly(&buf[34..34 + pb], Q1)?,
        c2: super::cipher::read_poly(&buf[34 + pb..], Q2)?,
    };
    Ok(KskWire { exponent, seed, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlwe::cipher::{decrypt_q1_with_noise, encrypt_fresh, mod_switch_to_q1, Ct1};
    use crate::rlwe::params::PLAINTEXT_MODULUS;
    use crate::rlwe::poly::automorphism;
    use rand::Rng;

    fn substitute(ksk: &KskPrepared, ct: &Ct1, g: u64) -> Ct1 {
        let pb = automorphism(&ct.b, g, Q1);
        let pa = automorphism(&ct.a, g, Q1);
        let (u, v) = ksk.apply(&pa);
        let mut b = pb;
        crate::rlwe::poly::add_assign_mod(&mut b, &u, Q1);
        Ct1 { b, a: v }
    }

    #[test]
    fn switch_preserves_substituted_plaintext() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        let g = 3u64;
        let ksk = generate_ksk(&sk, g, &mut rng).prepare();

        let pt: Vec<u64> = (0..RING_DEGREE)
            .map(|_| rng.random_range(0..PLAINTEXT_MODULUS))
            .collect();
        let ct = mod_switch_to_q1(&encrypt_fresh(&sk, &pt, &mut rng));
        let subbed = substitute(&ksk, &ct, g);
        let (got, noise) = decrypt_q1_with_noise(&sk, &subbed);
        let expect = automorphism(&pt, g, PLAINTEXT_MODULUS);
        assert_eq!(got, expect);
        assert!(noise < Q1 / (2 * PLAINTEXT_MODULUS) >> 8);
    }

    #[test]
    fn wire_roundtrip() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        let k = generate_ksk(&sk, 4097, &mut rng);
        let mut buf = Vec::new();
        write_ksk(&mut buf, &k);
        assert_eq!(buf.len(), KSK_WIRE_BYTES);
        assert_eq!(read_ksk(&buf).unwrap(), k);
    }
}
