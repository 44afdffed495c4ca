//! Paillier cryptosystem with the g = M+1 generator.
//!
//! Plaintexts live in Z_M, ciphertexts in Z_{M^2}. Encryption of m with
//! randomness r is (1 + mM) * r^M mod M^2. Decryption runs through the CRT
//! over p^2 and q^2; the textbook L(c^lambda) * mu path is kept as an
//! independent route for tests.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::RngCore;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use super::prime::random_prime;
use crate::error::{Error, Result};

/// Modulus size mandated for 128-bit security.
pub const MODULUS_BITS: usize = 3072;
pub const PRIME_BITS: usize = MODULUS_BITS / 2;
/// Serialized size of one plaintext (an element of Z_M).
pub const PLAINTEXT_BYTES: usize = MODULUS_BITS / 8;
/// Serialized size of one ciphertext (an element of Z_{M^2}).
pub const CIPHERTEXT_BYTES: usize = 2 * PLAINTEXT_BYTES;

const QUERY_VECTOR_DOMAIN: &[u8] = b"kadpir/paillier/query-vector/v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierPublic {
    pub m: BigUint,
    pub m2: BigUint,
    pub g: BigUint,
}

#[derive(Debug, Clone)]
pub struct PaillierSecret {
    public: PaillierPublic,
    p2: BigUint,
    q2: BigUint,
    p_exp: BigUint, // p - 1
    q_exp: BigUint, // q - 1
    hp: BigUint,    // L_p(g^(p-1) mod p^2)^-1 mod p
    hq: BigUint,
    p: BigUint,
    q: BigUint,
    p_inv_q: BigUint, // p^-1 mod q
    lambda: BigUint,  // lcm(p-1, q-1), textbook route
    mu: BigUint,      // L(g^lambda mod M^2)^-1 mod M
}

fn mod_inverse(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    let mut x = ext.x % &m;
    if x.is_negative() {
        x += &m;
    }
    Some(x.to_biguint().unwrap())
}

fn l_function(x: &BigUint, n: &BigUint) -> BigUint {
    (x - BigUint::one()) / n
}

impl PaillierPublic {
    pub fn new(m: BigUint) -> Result<Self> {
        if m.bits() as usize != MODULUS_BITS {
            return Err(Error::InvalidParameter(format!(
                "modulus must be {MODULUS_BITS} bits, got {}",
                m.bits()
            )));
        }
        let m2 = &m * &m;
        let g = &m + BigUint::one();
        Ok(PaillierPublic { m, m2, g })
    }

    /// (1 + m*M) * r^M mod M^2 with fresh unit randomness.
    pub fn encrypt(&self, msg: &BigUint, rng: &mut dyn RngCore) -> Result<BigUint> {
        if msg >= &self.m {
            return Err(Error::InvalidParameter("plaintext not in Z_M".into()));
        }
        let r = self.random_unit(rng);
        let blind = r.modpow(&self.m, &self.m2);
        Ok(self.add_plain(&blind, msg))
    }

    /// Homomorphic addition of a plaintext: ct * g^x = ct * (1 + xM) mod M^2.
    pub fn add_plain(&self, ct: &BigUint, x: &BigUint) -> BigUint {
        let gx = (BigUint::one() + x * &self.m) % &self.m2;
        (ct * gx) % &self.m2
    }

    /// Homomorphic addition of two ciphertexts.
    pub fn add_ct(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.m2
    }

    /// Homomorphic scalar multiplication: ct^s mod M^2.
    pub fn scal_mult(&self, ct: &BigUint, s: &BigUint) -> BigUint {
        ct.modpow(s, &self.m2)
    }

    fn random_unit(&self, rng: &mut dyn RngCore) -> BigUint {
        let mut buf = vec![0u8; PLAINTEXT_BYTES];
        loop {
            rng.fill_bytes(&mut buf);
            let r = BigUint::from_bytes_be(&buf);
            if !r.is_zero() && r < self.m && r.gcd(&self.m).is_one() {
                return r;
            }
        }
    }

    /// Deterministically expands a 32-byte seed into `n` uniform units of
    /// Z_{M^2}. Client and server run the same expansion, so only the seed
    /// travels (Beck query compression). Candidates outside [0, M^2) or
    /// sharing a factor with M are rejected and redrawn.
    pub fn expand_query_vector(&self, seed: &[u8; 32], n: usize) -> Vec<BigUint> {
        let mut xof = Shake256::default();
        xof.update(QUERY_VECTOR_DOMAIN);
        xof.update(seed);
        let mut reader = xof.finalize_xof();
        let mut buf = vec![0u8; CIPHERTEXT_BYTES];
        (0..n)
            .map(|_| loop {
                reader.read(&mut buf);
                let x = BigUint::from_bytes_be(&buf);
                if !x.is_zero() && x < self.m2 && x.gcd(&self.m).is_one() {
                    break x;
                }
            })
            .collect()
    }
}

impl PaillierSecret {
    /// Samples a fresh 3072-bit modulus from two 1536-bit primes.
    pub fn generate(rng: &mut dyn RngCore) -> PaillierSecret {
        loop {
            let p = random_prime(PRIME_BITS, rng);
            let q = random_prime(PRIME_BITS, rng);
            if p == q {
                continue;
            }
            let m = &p * &q;
            let phi = (&p - BigUint::one()) * (&q - BigUint::one());
            if !m.gcd(&phi).is_one() {
                continue;
            }
            let public = PaillierPublic::new(m).expect("two top-bit-set primes reach 3072 bits");
            let p2 = &p * &p;
            let q2 = &q * &q;
            let p_exp = &p - BigUint::one();
            let q_exp = &q - BigUint::one();
            let hp = match mod_inverse(&l_function(&public.g.modpow(&p_exp, &p2), &p), &p) {
                Some(v) => v,
                None => continue,
            };
            let hq = match mod_inverse(&l_function(&public.g.modpow(&q_exp, &q2), &q), &q) {
                Some(v) => v,
                None => continue,
            };
            let p_inv_q = match mod_inverse(&p, &q) {
                Some(v) => v,
                None => continue,
            };
            let lambda = p_exp.lcm(&q_exp);
            let mu = match mod_inverse(
                &l_function(&public.g.modpow(&lambda, &public.m2), &public.m),
                &public.m,
            ) {
                Some(v) => v,
                None => continue,
            };
            return PaillierSecret {
                public,
                p2,
                q2,
                p_exp,
                q_exp,
                hp,
                hq,
                p,
                q,
                p_inv_q,
                lambda,
                mu,
            };
        }
    }

    pub fn public(&self) -> &PaillierPublic {
        &self.public
    }

    /// CRT decryption: recover the plaintext mod p and mod q, then combine.
    pub fn decrypt(&self, ct: &BigUint) -> BigUint {
        let mp = (l_function(&ct.modpow(&self.p_exp, &self.p2), &self.p) * &self.hp) % &self.p;
        let mq = (l_function(&ct.modpow(&self.q_exp, &self.q2), &self.q) * &self.hq) % &self.q;
        // m = mp + p * ((mq - mp) * p^-1 mod q)
        let diff = (&mq + &self.q - (&mp % &self.q)) % &self.q;
        &mp + &self.p * ((diff * &self.p_inv_q) % &self.q)
    }

    /// Textbook decryption, L(c^lambda mod M^2) * mu mod M. Slower; kept as
    /// an independent check on the CRT route.
    pub fn decrypt_textbook(&self, ct: &BigUint) -> BigUint {
        (l_function(&ct.modpow(&self.lambda, &self.public.m2), &self.public.m) * &self.mu)
            % &self.public.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::RandBigInt;
    use rayon::prelude::*;

    fn test_key() -> PaillierSecret {
        let mut rng = rand::rng();
        PaillierSecret::generate(&mut rng)
    }

    #[test]
    fn keygen_properties_and_roundtrip() {
        let sk = test_key();
        let sk2 = test_key();
        // two keygens give distinct moduli
        assert_ne!(sk.public().m, sk2.public().m);
        // 3072-bit composite modulus, g = M + 1
        assert_eq!(sk.public().m.bits(), MODULUS_BITS as u64);
        assert_eq!(sk.public().g, &sk.public().m + BigUint::one());

        // dec(enc(m)) == m for 100 random messages, CRT and textbook routes
        let pk = sk.public().clone();
        let msgs: Vec<BigUint> = {
            let mut r = rand::rng();
            (0..100).map(|_| r.gen_biguint_below(&pk.m)).collect()
        };
        msgs.par_iter().for_each(|m| {
            let ct = pk.encrypt(m, &mut rand::rng()).unwrap();
            assert_eq!(&sk.decrypt(&ct), m);
            assert_eq!(&sk.decrypt_textbook(&ct), m);
        });
    }

    #[test]
    fn homomorphic_ops() {
        let sk = test_key();
        let pk = sk.public().clone();
        let mut rng = rand::rng();

        let enc2 = pk.encrypt(&BigUint::from(2u8), &mut rng).unwrap();
        // dec(add(enc(2), 3)) == 5
        assert_eq!(
            sk.decrypt(&pk.add_plain(&enc2, &BigUint::from(3u8))),
            BigUint::from(5u8)
        );
        // dec(scal_mult(enc(2), 3)) == 6
        assert_eq!(
            sk.decrypt(&pk.scal_mult(&enc2, &BigUint::from(3u8))),
            BigUint::from(6u8)
        );
        // dec(add(enc(M-1), 1)) == 0 (wraparound)
        let enc_max = pk.encrypt(&(&pk.m - BigUint::one()), &mut rng).unwrap();
        assert_eq!(
            sk.decrypt(&pk.add_plain(&enc_max, &BigUint::one())),
            BigUint::zero()
        );
        // ciphertext + ciphertext
        let enc3 = pk.encrypt(&BigUint::from(3u8), &mut rng).unwrap();
        assert_eq!(
            sk.decrypt(&pk.add_ct(&enc2, &enc3)),
            BigUint::from(5u8)
        );
    }

    #[test]
    fn query_vector_expansion_is_deterministic() {
        let sk = test_key();
        let pk = sk.public();
        let seed = [7u8; 32];
        let a = pk.expand_query_vector(&seed, 8);
        let b = pk.expand_query_vector(&seed, 8);
        assert_eq!(a, b);
        for ct in &a {
            assert!(ct < &pk.m2);
            assert!(ct.gcd(&pk.m).is_one());
        }
        let c = pk.expand_query_vector(&[8u8; 32], 8);
        assert_ne!(a, c);
    }
}
