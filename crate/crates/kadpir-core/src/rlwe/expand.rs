//! Oblivious expansion: one ciphertext encrypting X^i fans out into 2^levels
//! ciphertexts, the i-th encrypting a nonzero scalar and the rest zero.
//!
//! Level l needs a substitution with any exponent congruent to 1 + N/2^l
//! modulo 2N/2^l. The log-N key set ships one key per level; the two- and
//! three-key sets ship only generators and reach each level's class by a
//! product chain found with a breadth-first search over the unit group
//! mod 2N.

use rayon::prelude::*;
use std::collections::BTreeMap;

use super::cipher::Ct1;
use super::keyswitch::{KskPrepared, KskWire};
use super::params::{
    level_exponent, GENERATORS_THREE, GENERATORS_TWO, LOG_RING_DEGREE, Q1, RING_DEGREE,
};
use super::poly::{add_assign_mod, automorphism, monomial_mul, sub_mod};
use crate::error::{Error, Result};

/// Which automorphism keys the client ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[repr(u8)]
pub enum KeyVariant {
    /// One key per expansion level (exponents 1 + N/2^l).
    LogN = 0,
    /// Three generator keys: {3, 5, 1167}.
    Three = 1,
    /// Two generator keys: {3, 1173}.
    Two = 2,
}

impl KeyVariant {
    pub fn as_byte(self) -> u8 {
        self as u8
    }

    pub fn from_byte(b: u8) -> Result<KeyVariant> {
        match b {
            0 => Ok(KeyVariant::LogN),
            1 => Ok(KeyVariant::Three),
            2 => Ok(KeyVariant::Two),
            other => Err(Error::Malformed(format!("unknown key variant {other}"))),
        }
    }

    pub fn generators(self) -> &'static [u64] {
        match self {
            KeyVariant::LogN => &[],
            KeyVariant::Three => &GENERATORS_THREE,
            KeyVariant::Two => &GENERATORS_TWO,
        }
    }

    /// Exponents whose keys a client ships for `levels` expansion levels.
    pub fn key_exponents(self, levels: usize) -> Vec<u64> {
        match self {
            KeyVariant::LogN => (0..levels).map(level_exponent).collect(),
            _ => {
                if levels == 0 {
                    Vec::new()
                } else {
                    self.generators().to_vec()
                }
            }
        }
    }
}

const GROUP: usize = 2 * RING_DEGREE; // exponents live in Z_2N

/// Shortest product chains from 1 to every reachable odd exponent.
/// `parent[x]` holds (previous element, generator applied).
struct Reach {
    dist: Vec<u32>,
    parent: Vec<(u64, u64)>,
}

fn bfs(generators: &[u64]) -> Reach {
    let mut dist = vec![u32::MAX; GROUP];
    let mut parent = vec![(0u64, 0u64); GROUP];
    let mut queue = std::collections::VecDeque::new();
    dist[1] = 0;
    queue.push_back(1u64);
    while let Some(x) = queue.pop_front() {
        for &g in generators {
            let y = (x * g) % GROUP as u64;
            if dist[y as usize] == u32::MAX {
                dist[y as usize] = dist[x as usize] + 1;
                parent[y as usize] = (x, g);
                queue.push_back(y);
            }
        }
    }
    Reach { dist, parent }
}

fn chain_to(reach: &Reach, mut target: u64) -> Vec<u64> {
    let mut chain = Vec::new();
    while target != 1 {
        let (prev, g) = reach.parent[target as usize];
        chain.push(g);
        target = prev;
    }
    chain.reverse();
    chain
}

/// Exponents admissible at `level`: odd g with g == 1 + N/2^level
/// (mod 2N/2^level).
fn admissible(level: usize) -> Vec<u64> {
    let base = level_exponent(level) % GROUP as u64;
    let step = (GROUP >> level) as u64;
    let mut out = Vec::new();
    let mut g = base % step;
    while g < GROUP as u64 {
        if g % 2 == 1 {
            out.push(g);
        }
        g += step;
    }
    out
}

/// Per-level generator chains for a variant.
#[derive(Debug, Clone)]
pub struct ExpansionPlan {
    pub chains: Vec<Vec<u64>>,
}

impl ExpansionPlan {
    /// Total base substitutions one expansion performs under this plan.
    pub fn base_substitutions(&self) -> usize {
        self.chains
            .iter()
            .enumerate()
            .map(|(l, c)| (1usize << l) * c.len())
            .sum()
    }
}

pub fn expansion_plan(variant: KeyVariant, levels: usize) -> Result<ExpansionPlan> {
    if levels > LOG_RING_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "levels {levels} exceeds log2 N = {LOG_RING_DEGREE}"
        )));
    }
    match variant {
        KeyVariant::LogN => Ok(ExpansionPlan {
            chains: (0..levels).map(|l| vec![level_exponent(l)]).collect(),
        }),
        _ => {
            let reach = bfs(variant.generators());
            let chains = (0..levels)
                .map(|l| {
                    let best = admissible(l)
                        .into_iter()
                        .filter(|&g| reach.dist[g as usize] != u32::MAX)
                        .min_by_key(|&g| reach.dist[g as usize])
                        .ok_or(Error::UnreachableExponent(level_exponent(l)))?;
                    Ok(chain_to(&reach, best))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ExpansionPlan { chains })
        }
    }
}

/// Whether `generators` reach every level class up to `levels`. The key-set
/// constructors assert this at startup.
pub fn generators_cover_levels(generators: &[u64], levels: usize) -> bool {
    let reach = bfs(generators);
    (0..levels).all(|l| {
        admissible(l)
            .iter()
            .any(|&g| reach.dist[g as usize] != u32::MAX)
    })
}

/// Total base substitutions a full expansion performs for a variant.
pub fn base_substitution_count(variant: KeyVariant, levels: usize) -> Result<usize> {
    Ok(expansion_plan(variant, levels)?.base_substitutions())
}

/// Prepared automorphism keys plus the expansion plan they support.
pub struct PreparedKeySet {
    pub variant: KeyVariant,
    pub levels: usize,
    keys: BTreeMap<u64, KskPrepared>,
    plan: ExpansionPlan,
}

impl PreparedKeySet {
    pub fn new(variant: KeyVariant, levels: usize, wires: &[KskWire]) -> Result<PreparedKeySet> {
        let plan = expansion_plan(variant, levels)?;
        let keys: BTreeMap<u64, KskPrepared> = wires
            .par_iter()
            .map(|w| (w.exponent, w.prepare()))
            .collect();
        for exponent in variant.key_exponents(levels) {
            if !keys.contains_key(&exponent) {
                return Err(Error::Malformed(format!(
                    "key material misses exponent {exponent}"
                )));
            }
        }
        Ok(PreparedKeySet {
            variant,
            levels,
            keys,
            plan,
        })
    }

    fn sub_one(&self, ct: &Ct1, g: u64) -> Result<Ct1> {
        let ksk = self
            .keys
            .get(&g)
            .ok_or(Error::UnreachableExponent(g))?;
        let pb = automorphism(&ct.b, g, Q1);
        let pa = automorphism(&ct.a, g, Q1);
        let (u, v) = ksk.apply(&pa);
        let mut b = pb;
        add_assign_mod(&mut b, &u, Q1);
        Ok(Ct1 { b, a: v })
    }

    fn sub_chain(&self, ct: &Ct1, chain: &[u64]) -> Result<Ct1> {
        let mut cur = self.sub_one(ct, chain[0])?;
        for &g in &chain[1..] {
            cur = self.sub_one(&cur, g)?;
        }
        Ok(cur)
    }

    /// p(X) -> p(X^g), chaining generator keys when g itself has no key.
    pub fn substitute(&self, g: u64, ct: &Ct1) -> Result<Ct1> {
        if g % 2 == 0 || g >= GROUP as u64 {
            return Err(Error::InvalidParameter(format!(
                "substitution exponent {g} must be an odd unit mod 2N"
            )));
        }
        if self.keys.contains_key(&g) {
            return self.sub_one(ct, g);
        }
        let gens: Vec<u64> = self.keys.keys().copied().collect();
        let reach = bfs(&gens);
        if reach.dist[g as usize] == u32::MAX {
            return Err(Error::UnreachableExponent(g));
        }
        self.sub_chain(ct, &chain_to(&reach, g))
    }

    /// Expands `ct` into 2^levels ciphertexts; output u decrypts to
    /// 2^levels * coeff_u of the input plaintext (clients pre-scale by the
    /// inverse so slots come out as plain indicator values).
    pub fn oblivious_expand(&self, ct: &Ct1, levels: usize) -> Result<Vec<Ct1>> {
        if levels > self.levels {
            return Err(Error::Malformed(format!(
                "key set prepared for {} levels, expansion wants {levels}",
                self.levels
            )));
        }
        let mut cts = vec![Ct1::zero(); 1 << levels];
        cts[0] = ct.clone();
        for l in 0..levels {
            let m = 1usize << l;
            let chain = &self.plan.chains[l];
            let (lo, hi) = cts.split_at_mut(m);
            let shift = (2 * RING_DEGREE - (1 << l)) as u64; // X^{-2^l}
            lo[..m]
                .par_iter_mut()
                .zip(hi[..m].par_iter_mut())
                .try_for_each(|(even, odd)| -> Result<()> {
                    let t = self.sub_chain(even, chain)?;
                    let diff_b = monomial_mul(&sub_mod(&even.b, &t.b, Q1), shift, Q1);
                    let diff_a = monomial_mul(&sub_mod(&even.a, &t.a, Q1), shift, Q1);
                    even.add_assign(&t);
                    *odd = Ct1 {
                        b: diff_b,
                        a: diff_a,
                    };
                    Ok(())
                })?;
        }
        Ok(cts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlwe::cipher::{
        decrypt_q1, encrypt_fresh, mod_switch_to_q1, SecretKey,
    };
    use crate::rlwe::keyswitch::generate_ksk;
    use crate::rlwe::ntt::inv_mod;
    use crate::rlwe::params::PLAINTEXT_MODULUS;
    use rand::Rng;

    fn keyset(sk: &SecretKey, variant: KeyVariant, levels: usize) -> PreparedKeySet {
        let mut rng = rand::rng();
        let wires: Vec<KskWire> = variant
            .key_exponents(levels)
            .into_iter()
            .map(|g| generate_ksk(sk, g, &mut rng))
            .collect();
        PreparedKeySet::new(variant, levels, &wires).unwrap()
    }

    #[test]
    fn both_generator_sets_cover_all_levels() {
        assert!(generators_cover_levels(&GENERATORS_TWO, LOG_RING_DEGREE));
        assert!(generators_cover_levels(&GENERATORS_THREE, LOG_RING_DEGREE));
        // a single generator cannot cover the whole set
        assert!(!generators_cover_levels(&[3], LOG_RING_DEGREE));
        assert!(!generators_cover_levels(&[1173], LOG_RING_DEGREE));
    }

    #[test]
    fn three_keys_use_fewer_base_substitutions_than_two() {
        let three = base_substitution_count(KeyVariant::Three, LOG_RING_DEGREE).unwrap();
        let two = base_substitution_count(KeyVariant::Two, LOG_RING_DEGREE).unwrap();
        let logn = base_substitution_count(KeyVariant::LogN, LOG_RING_DEGREE).unwrap();
        assert_eq!(logn, (1 << LOG_RING_DEGREE) - 1);
        assert!(three < two, "three-key {three} vs two-key {two}");
        assert!(logn < three);
    }

    #[test]
    fn substitution_chains_compose() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        let keys = keyset(&sk, KeyVariant::Three, LOG_RING_DEGREE);

        let mut pt = vec![0u64; RING_DEGREE];
        pt[2] = 1; // X^2
        let ct = mod_switch_to_q1(&encrypt_fresh(&sk, &pt, &mut rng));

        // X^2 under X -> X^3 becomes X^6
        let got = decrypt_q1(&sk, &keys.substitute(3, &ct).unwrap());
        let mut expect = vec![0u64; RING_DEGREE];
        expect[6] = 1;
        assert_eq!(got, expect);

        // chained g=3 twice equals a single g=9 substitution
        let twice = keys
            .substitute(3, &keys.substitute(3, &ct).unwrap())
            .unwrap();
        let once = keys.substitute(9, &ct).unwrap();
        assert_eq!(decrypt_q1(&sk, &twice), decrypt_q1(&sk, &once));
    }

    #[test]
    fn expansion_indicator_small_levels() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        for variant in [KeyVariant::LogN, KeyVariant::Three, KeyVariant::Two] {
            let keys = keyset(&sk, variant, 4);
            for levels in 1..=2usize {
                let scale = inv_mod(1 << levels, PLAINTEXT_MODULUS);
                for u in 0..(1 << levels) {
                    let mut pt = vec![0u64; RING_DEGREE];
                    pt[u] = scale;
                    let ct = mod_switch_to_q1(&encrypt_fresh(&sk, &pt, &mut rng));
                    let out = keys.oblivious_expand(&ct, levels).unwrap();
                    for (j, c) in out.iter().enumerate() {
                        let dec = decrypt_q1(&sk, c);
                        let expect = u64::from(j == u);
                        assert_eq!(dec[0], expect, "variant {variant:?} levels {levels} u {u} slot {j}");
                        assert!(dec[1..].iter().all(|&v| v == 0));
                    }
                }
            }
        }
    }

    #[test]
    fn expansion_of_zero_is_zero() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        let keys = keyset(&sk, KeyVariant::LogN, 3);
        let ct = mod_switch_to_q1(&encrypt_fresh(&sk, &vec![0u64; RING_DEGREE], &mut rng));
        for c in keys.oblivious_expand(&ct, 3).unwrap() {
            assert!(decrypt_q1(&sk, &c).iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn random_indicator_levels_eight() {
        let mut rng = rand::rng();
        let sk = SecretKey::generate(&mut rng);
        let keys = keyset(&sk, KeyVariant::Three, 8);
        let scale = inv_mod(1 << 8, PLAINTEXT_MODULUS);
        for _ in 0..3 {
            let u = rng.random_range(0..256usize);
            let mut pt = vec![0u64; RING_DEGREE];
            pt[u] = scale;
            let ct = mod_switch_to_q1(&encrypt_fresh(&sk, &pt, &mut rng));
            let out = keys.oblivious_expand(&ct, 8).unwrap();
            for (j, c) in out.iter().enumerate() {
                assert_eq!(decrypt_q1(&sk, c)[0], u64::from(j == u));
            }
        }
    }
}
