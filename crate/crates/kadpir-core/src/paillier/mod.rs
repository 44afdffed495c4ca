//! PaillierPIR: the client masks an indicator vector with decryptions of a
//! seed-expanded random ciphertext vector, so one query costs a seed plus n
//! plaintexts instead of n ciphertexts. The server lifts each mask back onto
//! its ciphertext and answers with one homomorphic inner product per column.

pub mod crypto;
pub mod prime;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use rayon::prelude::*;

pub use crypto::{PaillierPublic, PaillierSecret, CIPHERTEXT_BYTES, MODULUS_BITS, PLAINTEXT_BYTES};

use crate::database::PirDatabase;
use crate::error::{Error, Result};
use crate::scheme::{
    check_query_args, check_respond_args, ClientState, PirScheme, SchemeId, StateSecret,
};
use crate::wire::{PirAnswer, PirQueryBundle};

/// Bytes of row data carried per plaintext cell. One byte below the
/// plaintext size so the cell value always stays inside Z_M.
pub const CELL_BYTES: usize = PLAINTEXT_BYTES - 1;

const SEED_BYTES: usize = 32;

pub struct PaillierPir;

pub(crate) struct PaillierStateSecret {
    secret: PaillierSecret,
}

impl PaillierPir {
    pub const fn new() -> Self {
        PaillierPir
    }

    fn respond_inner(
        &self,
        db: &PirDatabase,
        bundle: &PirQueryBundle,
        clamp: bool,
    ) -> Result<PirAnswer> {
        let declared = check_respond_args(db, bundle)?;
        let pk = parse_key_material(&bundle.key_material)?;
        let (seed, masks) = parse_query_body(&bundle.query_body, declared)?;

        // Beck expansion: regenerate the client's random ciphertext vector
        // and lift each mask, so ct'[j] decrypts to the indicator bit.
        let needed = if clamp { declared } else { db.rows() };
        let cts = pk.expand_query_vector(&seed, needed);
        let lifted: Vec<BigUint> = cts
            .par_iter()
            .zip(masks.par_iter())
            .map(|(ct, p)| pk.add_plain(ct, p))
            .collect();

        // Replicate-last support: all indicator positions from the last real
        // row onward act on that row, so their ciphertexts fold into one
        // factor before exponentiation.
        let plain_rows = if clamp { db.rows() - 1 } else { db.rows() };
        let tail = if clamp {
            let mut acc = BigUint::one();
            for ct in &lifted[plain_rows..] {
                acc = pk.add_ct(&acc, ct);
            }
            Some(acc)
        } else {
            None
        };

        let columns = db.row_width().div_ceil(CELL_BYTES);
        let payload: Vec<u8> = (0..columns)
            .into_par_iter()
            .flat_map_iter(|k| {
                let mut acc = BigUint::one();
                for j in 0..plain_rows {
                    let cell = row_cell(db.padded_row(j), k);
                    if cell.is_zero() {
                        continue;
                    }
                    acc = pk.add_ct(&acc, &pk.scal_mult(&lifted[j], &cell));
                }
                if let Some(tail) = &tail {
                    let cell = row_cell(db.padded_row(db.rows() - 1), k);
                    if !cell.is_zero() {
                        acc = pk.add_ct(&acc, &pk.scal_mult(tail, &cell));
                    }
                }
                to_fixed_be(&acc, CIPHERTEXT_BYTES)
            })
            .collect();

        Ok(PirAnswer {
            scheme: SchemeId::Paillier,
            declared_rows: bundle.declared_rows,
            row_width: db.row_width() as u32,
            payload,
        })
    }
}

impl PirScheme for PaillierPir {
    fn id(&self) -> SchemeId {
        SchemeId::Paillier
    }

    fn supports(&self, rows: usize, _row_width: usize) -> Result<()> {
        if rows == 0 {
            return Err(Error::EmptyDatabase);
        }
        Ok(())
    }

    fn query(
        &self,
        index: usize,
        rows: usize,
        row_width: usize,
        rng: &mut dyn RngCore,
    ) -> Result<(ClientState, PirQueryBundle)> {
        check_query_args(index, rows)?;
        let secret = PaillierSecret::generate(rng);
        let pk = secret.public().clone();

        let mut seed = [0u8; SEED_BYTES];
        rng.fill_bytes(&mut seed);
        let cts = pk.expand_query_vector(&seed, rows);

        // p[j] = indicator(j == index) - Dec(ct[j]) mod M
        let masks: Vec<BigUint> = cts
            .par_iter()
            .enumerate()
            .map(|(j, ct)| {
                let r = secret.decrypt(ct);
                let b = if j == index {
                    BigUint::one()
                } else {
                    BigUint::zero()
                };
                (&pk.m + b - r) % &pk.m
            })
            .collect();

        let mut query_body = Vec::with_capacity(SEED_BYTES + rows * PLAINTEXT_BYTES);
        query_body.extend_from_slice(&seed);
        for p in &masks {
            query_body.extend(to_fixed_be(p, PLAINTEXT_BYTES));
        }

        let bundle = PirQueryBundle {
            scheme: SchemeId::Paillier,
            declared_rows: rows as u32,
            row_width: row_width as u32,
            key_material: serialize_key_material(&pk),
            query_body,
        };
        let state = ClientState {
            scheme: SchemeId::Paillier,
            index,
            declared_rows: rows,
            row_width,
            secret: StateSecret::Paillier(PaillierStateSecret { secret }),
        };
        Ok((state, bundle))
    }

    fn respond(&self, db: &PirDatabase, bundle: &PirQueryBundle) -> Result<PirAnswer> {
        self.respond_inner(db, bundle, false)
    }

    fn respond_clamped(&self, db: &PirDatabase, bundle: &PirQueryBundle) -> Result<PirAnswer> {
        self.respond_inner(db, bundle, true)
    }

    fn extract(&self, state: &ClientState, answer: &PirAnswer) -> Result<Vec<u8>> {
        let StateSecret::Paillier(secret) = &state.secret else {
            return Err(Error::SchemeMismatch {
                state: state.scheme,
                message: answer.scheme,
            });
        };
        let width = answer.row_width as usize;
        if width == 0 || (state.row_width != 0 && state.row_width != width) {
            return Err(Error::Malformed("answer row width mismatch".into()));
        }
        let columns = width.div_ceil(CELL_BYTES);
        if answer.payload.len() != columns * CIPHERTEXT_BYTES {
            return Err(Error::Malformed(format!(
                "expected {} answer cells, payload holds {} bytes",
                columns,
                answer.payload.len()
            )));
        }
        let cells: Vec<BigUint> = answer
            .payload
            .par_chunks_exact(CIPHERTEXT_BYTES)
            .map(|chunk| secret.secret.decrypt(&BigUint::from_bytes_be(chunk)))
            .collect();
        let mut row = Vec::with_capacity(width);
        for (k, cell) in cells.iter().enumerate() {
            let chunk_len = (width - k * CELL_BYTES).min(CELL_BYTES);
            let bytes = cell.to_bytes_be();
            if bytes.len() > chunk_len {
                return Err(Error::DecryptionFailure(
                    "cell value exceeds its chunk".into(),
                ));
            }
            row.resize(row.len() + chunk_len - bytes.len(), 0);
            row.extend_from_slice(&bytes);
        }
        crate::database::decode_record(&row)
    }
}

fn serialize_key_material(pk: &PaillierPublic) -> Vec<u8> {
    // 4-byte length + big-endian M, then the generator as an element of
    // Z_{M^2}; about 1.14 KB on the wire.
    let mut out = Vec::with_capacity(8 + PLAINTEXT_BYTES + CIPHERTEXT_BYTES);
    let m = to_fixed_be(&pk.m, PLAINTEXT_BYTES);
    out.extend_from_slice(&(m.len() as u32).to_be_bytes());
    out.extend_from_slice(&m);
    let g = to_fixed_be(&pk.g, CIPHERTEXT_BYTES);
    out.extend_from_slice(&(g.len() as u32).to_be_bytes());
    out.extend_from_slice(&g);
    out
}

fn parse_key_material(buf: &[u8]) -> Result<PaillierPublic> {
    let too_short = || Error::Malformed("truncated Paillier key material".into());
    if buf.len() < 4 {
        return Err(too_short());
    }
    let m_len = u32::from_be_bytes(buf[..4].try_into().unwrap()) as usize;
    if buf.len() < 4 + m_len + 4 {
        return Err(too_short());
    }
    let m = BigUint::from_bytes_be(&buf[4..4 + m_len]);
    let g_off = 4 + m_len;
    let g_len = u32::from_be_bytes(buf[g_off..g_off + 4].try_into().unwrap()) as usize;
    if buf.len() != g_off + 4 + g_len {
        return Err(Error::Malformed("trailing key material".into()));
    }
    let g = BigUint::from_bytes_be(&buf[g_off + 4..]);
    let pk = PaillierPublic::new(m)?;
    if g != pk.g {
        return Err(Error::Malformed(
            "unsupported Paillier generator (expected M + 1)".into(),
        ));
    }
    Ok(pk)
}

fn parse_query_body(buf: &[u8], declared: usize) -> Result<([u8; SEED_BYTES], Vec<BigUint>)> {
    if buf.len() != SEED_BYTES + declared * PLAINTEXT_BYTES {
        return Err(Error::Malformed(format!(
            "Paillier query body must hold a seed and {declared} masks"
        )));
    }
    let seed: [u8; SEED_BYTES] = buf[..SEED_BYTES].try_into().unwrap();
    let masks = buf[SEED_BYTES..]
        .chunks_exact(PLAINTEXT_BYTES)
        .map(BigUint::from_bytes_be)
        .collect();
    Ok((seed, masks))
}

/// Big-endian serialization left-padded to `len` bytes.
fn to_fixed_be(x: &BigUint, len: usize) -> Vec<u8> {
    let bytes = x.to_bytes_be();
    assert!(bytes.len() <= len, "value wider than its wire slot");
    let mut out = vec![0u8; len - bytes.len()];
    out.extend_from_slice(&bytes);
    out
}

/// Splits a padded row into per-column cell values.
fn row_cell(row: &[u8], k: usize) -> BigUint {
    let start = k * CELL_BYTES;
    let end = (start + CELL_BYTES).min(row.len());
    BigUint::from_bytes_be(&row[start..end])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme;
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn single_row_mask_forces_indicator_one() {
        // n = 1: p[0] = 1 - Dec(ct[0]) mod M
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (st, bundle) = scheme::query(SchemeId::Paillier, 0, 1, 8, &mut rng).unwrap();
        let StateSecret::Paillier(sec) = &st.secret else {
            unreachable!()
        };
        let pk = sec.secret.public();
        let (seed, masks) = parse_query_body(&bundle.query_body, 1).unwrap();
        let ct = &pk.expand_query_vector(&seed, 1)[0];
        let r = sec.secret.decrypt(ct);
        assert_eq!(masks[0], (&pk.m + BigUint::one() - r) % &pk.m);
    }

    #[test]
    fn lifted_ciphertexts_decrypt_to_indicator_bits() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let n = 5;
        let index = 3;
        let (st, bundle) = scheme::query(SchemeId::Paillier, index, n, 8, &mut rng).unwrap();
        let StateSecret::Paillier(sec) = &st.secret else {
            unreachable!()
        };
        let pk = sec.secret.public();
        let (seed, masks) = parse_query_body(&bundle.query_body, n).unwrap();
        let cts = pk.expand_query_vector(&seed, n);
        for j in 0..n {
            let lifted = pk.add_plain(&cts[j], &masks[j]);
            let expect = if j == index { 1u8 } else { 0u8 };
            assert_eq!(sec.secret.decrypt(&lifted), BigUint::from(expect));
        }
    }

    #[test]
    fn end_to_end_small() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let db = PirDatabase::new(vec![vec![5], vec![9]], 8).unwrap();
        let (st, q) = scheme::query(SchemeId::Paillier, 1, 2, 8, &mut rng).unwrap();
        let ans = scheme::respond(&db, &q).unwrap();
        assert_eq!(scheme::extract(&st, &ans).unwrap(), vec![9]);
    }

    #[test]
    fn all_zero_database_extracts_empty() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let db = PirDatabase::new(vec![vec![], vec![], vec![]], 8).unwrap();
        let (st, q) = scheme::query(SchemeId::Paillier, 2, 3, 8, &mut rng).unwrap();
        let ans = scheme::respond(&db, &q).unwrap();
        assert_eq!(scheme::extract(&st, &ans).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn multi_cell_rows_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        // force two columns
        let width = CELL_BYTES + 40;
        let rec: Vec<u8> = (0..width - 2).map(|i| (i % 251) as u8).collect();
        let db = PirDatabase::new(vec![vec![1; 10], rec.clone()], width).unwrap();
        let (st, q) = scheme::query(SchemeId::Paillier, 1, 2, width, &mut rng).unwrap();
        let ans = scheme::respond(&db, &q).unwrap();
        assert_eq!(ans.payload.len(), 2 * CIPHERTEXT_BYTES);
        assert_eq!(scheme::extract(&st, &ans).unwrap(), rec);
    }
}
