//! Negacyclic number-theoretic transform with Harvey-style lazy butterflies
//! and Shoup precomputed twiddles. Inputs and outputs are fully reduced; the
//! lazy representation (values below 4q) only lives inside a pass.

use once_cell::sync::Lazy;

use super::params::{LOG_RING_DEGREE, Q1, Q2, RING_DEGREE};

#[derive(Debug)]
pub struct NttTable {
    pub q: u64,
    two_q: u64,
    /// psi^bitrev(i), forward twiddles addressed as roots[m + i].
    roots: Vec<u64>,
    roots_shoup: Vec<u64>,
    iroots: Vec<u64>,
    iroots_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

pub fn table_q1() -> &'static NttTable {
    static T: Lazy<NttTable> = Lazy::new(|| NttTable::new(Q1));
    &T
}

pub fn table_q2() -> &'static NttTable {
    static T: Lazy<NttTable> = Lazy::new(|| NttTable::new(Q2));
    &T
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn inv_mod(a: u64, q: u64) -> u64 {
    pow_mod(a, q - 2, q)
}

#[inline]
fn shoup(w: u64, q: u64) -> u64 {
    (((w as u128) << 64) / q as u128) as u64
}

/// w * x mod q given w_shoup = floor(w * 2^64 / q); result below 2q.
#[inline(always)]
fn mul_shoup_lazy(x: u64, w: u64, w_shoup: u64, q: u64) -> u64 {
    let hi = ((x as u128 * w_shoup as u128) >> 64) as u64;
    w.wrapping_mul(x).wrapping_sub(hi.wrapping_mul(q))
}

fn bitrev(x: usize, bits: usize) -> usize {
    x.reverse_bits() >> (usize::BITS as usize - bits)
}

impl NttTable {
    fn new(q: u64) -> NttTable {
        let psi = find_primitive_2n_root(q);
        let psi_inv = inv_mod(psi, q);
        let mut roots = vec![0u64; RING_DEGREE];
        let mut iroots = vec![0u64; RING_DEGREE];
        for i in 0..RING_DEGREE {
            let r = bitrev(i, LOG_RING_DEGREE) as u64;
            roots[i] = pow_mod(psi, r, q);
            iroots[i] = pow_mod(psi_inv, r, q);
        }
        let n_inv = inv_mod(RING_DEGREE as u64, q);
        NttTable {
            q,
            two_q: 2 * q,
            roots_shoup: roots.iter().map(|&w| shoup(w, q)).collect(),
            iroots_shoup: iroots.iter().map(|&w| shoup(w, q)).collect(),
            roots,
            iroots,
            n_inv,
            n_inv_shoup: shoup(n_inv, q),
        }
    }

    /// In-place forward negacyclic NTT (Cooley-Tukey, bit-reversed twiddles).
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), RING_DEGREE);
        let q = self.q;
        let two_q = self.two_q;
        let mut t = RING_DEGREE;
        let mut m = 1usize;
        while m < RING_DEGREE {
            t >>= 1;
            for i in 0..m {
                let w = self.roots[m + i];
                let w_sh = self.roots_shoup[m + i];
                let base = 2 * i * t;
                let (lhs, rhs) = a[base..base + 2 * t].split_at_mut(t);
                for (x, y) in lhs.iter_mut().zip(rhs.iter_mut()) {
                    let mut u = *x;
                    if u >= two_q {
                        u -= two_q;
                    }
                    let v = mul_shoup_lazy(*y, w, w_sh, q);
                    *x = u + v;
                    *y = u + two_q - v;
                }
            }
            m <<= 1;
        }
        for x in a.iter_mut() {
            if *x >= two_q {
                *x -= two_q;
            }
            if *x >= q {
                *x -= q;
            }
        }
    }

    /// In-place inverse negacyclic NTT (Gentleman-Sande), fully reduced.
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), RING_DEGREE);
        let q = self.q;
        let two_q = self.two_q;
        let mut t = 1usize;
        let mut m = RING_DEGREE;
        while m > 1 {
            let h = m >> 1;
            for i in 0..h {
                let w = self.iroots[h + i];
                let w_sh = self.iroots_shoup[h + i];
                let base = 2 * i * t;
                let (lhs, rhs) = a[base..base + 2 * t].split_at_mut(t);
                for (x, y) in lhs.iter_mut().zip(rhs.iter_mut()) {
                    let u = *x;
                    let v = *y;
                    let mut s = u + v;
                    if s >= two_q {
                        s -= two_q;
                    }
                    *x = s;
                    *y = mul_shoup_lazy(u + two_q - v, w, w_sh, q);
                }
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            let mut v = mul_shoup_lazy(*x, self.n_inv, self.n_inv_shoup, q);
            if v >= q {
                v -= q;
            }
            *x = v;
        }
    }

    /// Shoup dual of `w` for repeated multiplications against it.
    pub fn shoup_dual(&self, w: u64) -> u64 {
        shoup(w, self.q)
    }

    /// x * w mod q with a precomputed dual, fully reduced.
    #[inline(always)]
    pub fn mul_shoup(&self, x: u64, w: u64, w_shoup: u64) -> u64 {
        let v = mul_shoup_lazy(x, w, w_shoup, self.q);
        if v >= self.q {
            v - self.q
        } else {
            v
        }
    }
}

fn find_primitive_2n_root(q: u64) -> u64 {
    let two_n = 2 * RING_DEGREE as u64;
    debug_assert_eq!((q - 1) % two_n, 0);
    let cofactor = (q - 1) / two_n;
    let mut g = 2u64;
    loop {
        let cand = pow_mod(g, cofactor, q);
        // primitive 2N-th root iff cand^N == -1
        if pow_mod(cand, RING_DEGREE as u64, q) == q - 1 {
            return cand;
        }
        g += 1;
    }
}
