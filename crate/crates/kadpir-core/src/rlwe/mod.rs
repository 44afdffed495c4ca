//! RLWEPIR: the client encrypts X^index (pre-scaled by the inverse of the
//! expansion factor), the server obliviously expands that into an encrypted
//! indicator vector and answers with one inner product per column of the
//! table. Three key-set variants trade key material against server work.

pub mod cipher;
pub mod expand;
pub mod keyswitch;
pub mod ntt;
pub mod params;
pub mod poly;

use rand::RngCore;
use rayon::prelude::*;

pub use cipher::SecretKey;
pub use expand::{base_substitution_count, generators_cover_levels, KeyVariant};
pub use keyswitch::KskWire;

use cipher::{
    decrypt_q1_with_noise, encrypt_fresh, mod_switch_to_q1, pack_bytes, unpack_bytes, Ct1,
    FreshCt, FRESH_CT_BYTES, FULL_CT_BYTES,
};
use expand::PreparedKeySet;
use keyswitch::{generate_ksk, read_ksk, write_ksk, KSK_WIRE_BYTES};
use ntt::{inv_mod, mul_mod, table_q1};
use params::{levels_for_rows, CELL_BYTES, LOG_RING_DEGREE, PLAINTEXT_MODULUS, Q1, RING_DEGREE};

use crate::database::PirDatabase;
use crate::error::{Error, Result};
use crate::scheme::{
    check_query_args, check_respond_args, ClientState, PirScheme, SchemeId, StateSecret,
};
use crate::wire::{PirAnswer, PirQueryBundle};

/// Sanity cap on declared row counts (keeps accumulators inside u128).
const MAX_DECLARED_ROWS: usize = 1 << 20;

/// Client-shipped automorphism key set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlweKeyMaterial {
    pub variant: KeyVariant,
    pub levels: usize,
    pub entries: Vec<KskWire>,
}

/// Generates the key set a client ships for `levels` expansion levels.
/// The generator variants are checked (by breadth-first search) to reach
/// every required substitution before any key is produced.
pub fn generate_keys(
    sk: &SecretKey,
    variant: KeyVariant,
    levels: usize,
    rng: &mut dyn RngCore,
) -> Result<RlweKeyMaterial> {
    if levels > LOG_RING_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "levels {levels} exceeds log2 N = {LOG_RING_DEGREE}"
        )));
    }
    let exponents = variant.key_exponents(levels);
    if variant != KeyVariant::LogN && !generators_cover_levels(variant.generators(), levels) {
        return Err(Error::UnreachableExponent(params::level_exponent(0)));
    }
    let entries = exponents
        .into_iter()
        .map(|g| generate_ksk(sk, g, rng))
        .collect();
    Ok(RlweKeyMaterial {
        variant,
        levels,
        entries,
    })
}

impl RlweKeyMaterial {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.entries.len() * KSK_WIRE_BYTES);
        out.push(self.variant.as_byte());
        out.push(self.levels as u8);
        out.extend_from_slice(&(self.entries.len() as u16).to_be_bytes());
        for e in &self.entries {
            write_ksk(&mut out, e);
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<RlweKeyMaterial> {
        if buf.len() < 4 {
            return Err(Error::Malformed("truncated key material".into()));
        }
        let variant = KeyVariant::from_byte(buf[0])?;
        let levels = buf[1] as usize;
        let count = u16::from_be_bytes([buf[2], buf[3]]) as usize;
        if buf.len() != 4 + count * KSK_WIRE_BYTES {
            return Err(Error::Malformed("key material length mismatch".into()));
        }
        let entries = buf[4..]
            .chunks_exact(KSK_WIRE_BYTES)
            .map(read_ksk)
            .collect::<Result<Vec<_>>>()?;
        Ok(RlweKeyMaterial {
            variant,
            levels,
            entries,
        })
    }
}

pub(crate) struct RlweStateSecret {
    sk: SecretKey,
}

pub struct RlwePir {
    variant: KeyVariant,
}

impl RlwePir {
    pub const fn new(variant: KeyVariant) -> Self {
        RlwePir { variant }
    }

    fn expansion_levels(declared: usize) -> (usize, usize) {
        let ct_count = declared.div_ceil(RING_DEGREE).max(1);
        let levels = if ct_count > 1 {
            LOG_RING_DEGREE
        } else {
            levels_for_rows(declared)
        };
        (ct_count, levels)
    }

    fn respond_inner(
        &self,
        db: &PirDatabase,
        bundle: &PirQueryBundle,
        clamp: bool,
    ) -> Result<PirAnswer> {
        let declared = check_respond_args(db, bundle)?;
        let (ct_count, levels) = Self::expansion_levels(declared);

        let keys = RlweKeyMaterial::from_bytes(&bundle.key_material)?;
        if keys.variant != self.variant {
            return Err(Error::Malformed(format!(
                "key material variant {:?} does not match scheme {}",
                keys.variant,
                self.id()
            )));
        }
        if keys.levels != levels {
            return Err(Error::Malformed(format!(
                "query for {declared} rows needs {levels} expansion levels, keys carry {}",
                keys.levels
            )));
        }
        let prepared = PreparedKeySet::new(self.variant, levels, &keys.entries)?;

        let fresh = parse_query_body(&bundle.query_body, ct_count)?;
        let mut expanded: Vec<Ct1> = Vec::with_capacity(ct_count << levels);
        for ct in &fresh {
            let switched = mod_switch_to_q1(ct);
            expanded.extend(prepared.oblivious_expand(&switched, levels)?);
        }

        // Replicate-last: every indicator slot from the last real row up to
        // the declared bound folds onto the last row.
        let rows_used = db.rows();
        if clamp && rows_used < declared {
            let (head, tail) = expanded.split_at_mut(rows_used);
            let folded = &mut head[rows_used - 1];
            for slot in &tail[..declared - rows_used] {
                folded.add_assign(slot);
            }
        }

        let columns = db.row_width().div_ceil(CELL_BYTES);
        let t1 = table_q1();

        // ans[k] = sum_j expanded[j] * db[j][k], accumulated lazily in the
        // NTT domain. u128 accumulators hold up to 2^20 products of two
        // 54-bit values without overflow.
        let zero_acc = || vec![(vec![0u128; RING_DEGREE], vec![0u128; RING_DEGREE]); columns];
        let acc = (0..rows_used)
            .into_par_iter()
            .fold(zero_acc, |mut acc, j| {
                let ct = &expanded[j];
                let mut b_ntt = ct.b.clone();
                let mut a_ntt = ct.a.clone();
                t1.forward(&mut b_ntt);
                t1.forward(&mut a_ntt);
                let row = db.padded_row(j);
                for (k, cell_acc) in acc.iter_mut().enumerate() {
                    let start = k * CELL_BYTES;
                    let end = (start + CELL_BYTES).min(row.len());
                    let cell = &row[start..end];
                    if cell.iter().all(|&b| b == 0) {
                        continue;
                    }
                    let mut p_ntt = pack_bytes(cell);
                    t1.forward(&mut p_ntt);
                    for i in 0..RING_DEGREE {
                        cell_acc.0[i] += b_ntt[i] as u128 * p_ntt[i] as u128;
                        cell_acc.1[i] += a_ntt[i] as u128 * p_ntt[i] as u128;
                    }
                }
                acc
            })
            .reduce(zero_acc, |mut a, b| {
                for (ka, kb) in a.iter_mut().zip(b) {
                    for i in 0..RING_DEGREE {
                        ka.0[i] += kb.0[i];
                        ka.1[i] += kb.1[i];
                    }
                }
                a
            });

        let mut payload = Vec::with_capacity(2 + columns * FULL_CT_BYTES);
        payload.extend_from_slice(&(columns as u16).to_be_bytes());
        for (acc_b, acc_a) in acc {
            let reduce = |v: Vec<u128>| -> Vec<u64> {
                let mut out: Vec<u64> = v.into_iter().map(|x| (x % Q1 as u128) as u64).collect();
                t1.inverse(&mut out);
                out
            };
            let ct = Ct1 {
                b: reduce(acc_b),
                a: reduce(acc_a),
            };
            payload.extend_from_slice(&ct.to_bytes());
        }

        Ok(PirAnswer {
            scheme: self.id(),
            declared_rows: bundle.declared_rows,
            row_width: db.row_width() as u32,
            payload,
        })
    }
}

fn parse_query_body(buf: &[u8], expect: usize) -> Result<Vec<FreshCt>> {
    if buf.len() < 2 {
        return Err(Error::Malformed("truncated query body".into()));
    }
    let count = u16::from_be_bytes([buf[0], buf[1]]) as usize;
    if count != expect || buf.len() != 2 + count * FRESH_CT_BYTES {
        return Err(Error::Malformed(format!(
            "query body must carry {expect} ciphertexts"
        )));
    }
    buf[2..]
        .chunks_exact(FRESH_CT_BYTES)
        .map(FreshCt::from_bytes)
        .collect()
}

impl PirScheme for RlwePir {
    fn id(&self) -> SchemeId {
        match self.variant {
            KeyVariant::LogN => SchemeId::RlweLogN,
            KeyVariant::Three => SchemeId::Rlwe3,
            KeyVariant::Two => SchemeId::Rlwe2,
        }
    }

    fn supports(&self, rows: usize, _row_width: usize) -> Result<()> {
        if rows == 0 {
            return Err(Error::EmptyDatabase);
        }
        if rows > MAX_DECLARED_ROWS {
            return Err(Error::Unsupported {
                scheme: self.id(),
                rows,
                row_width: _row_width,
                reason: "row count above the supported maximum",
            });
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
        self.supports(rows, row_width)?;
        let (ct_count, levels) = Self::expansion_levels(rows);

        let sk = SecretKey::generate(rng);
        let key_material = generate_keys(&sk, self.variant, levels, rng)?.to_bytes();

        // Pre-scale the query monomial so expanded slots decrypt to plain
        // 0/1 indicator values.
        let scale = inv_mod(
            1u64 << levels,
            PLAINTEXT_MODULUS,
        );
        let window = index / RING_DEGREE;
        let mut query_body = Vec::with_capacity(2 + ct_count * FRESH_CT_BYTES);
        query_body.extend_from_slice(&(ct_count as u16).to_be_bytes());
        for w in 0..ct_count {
            let mut pt = vec![0u64; RING_DEGREE];
            if w == window {
                pt[index % RING_DEGREE] = scale;
            }
            query_body.extend_from_slice(&encrypt_fresh(&sk, &pt, rng).to_bytes());
        }

        let bundle = PirQueryBundle {
            scheme: self.id(),
            declared_rows: rows as u32,
            row_width: row_width as u32,
            key_material,
            query_body,
        };
        let state = ClientState {
            scheme: self.id(),
            index,
            declared_rows: rows,
            row_width,
            secret: StateSecret::Rlwe(RlweStateSecret { sk }),
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
        let StateSecret::Rlwe(secret) = &state.secret else {
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
        if answer.payload.len() < 2 {
            return Err(Error::Malformed("truncated answer".into()));
        }
        let count = u16::from_be_bytes([answer.payload[0], answer.payload[1]]) as usize;
        if count != columns || answer.payload.len() != 2 + columns * FULL_CT_BYTES {
            return Err(Error::Malformed(format!(
                "answer must carry {columns} ciphertexts for width {width}"
            )));
        }
        let mut row = Vec::with_capacity(width);
        for (k, chunk) in answer.payload[2..]
            .chunks_exact(FULL_CT_BYTES)
            .enumerate()
        {
            let ct = Ct1::from_bytes(chunk)?;
            let (pt, _) = decrypt_q1_with_noise(&secret.sk, &ct);
            let chunk_len = (width - k * CELL_BYTES).min(CELL_BYTES);
            row.extend(unpack_bytes(&pt, chunk_len)?);
        }
        crate::database::decode_record(&row)
    }
}

/// Residual noise of one full pipeline run; exposed for the noise-budget
/// measurement and benchmarks.
pub fn respond_noise_probe(
    variant: KeyVariant,
    db: &PirDatabase,
    index: usize,
    rng: &mut dyn RngCore,
) -> Result<(Vec<u8>, u64)> {
    let pir = RlwePir::new(variant);
    let (state, bundle) = pir.query(index, db.rows(), db.row_width(), rng)?;
    let answer = pir.respond(db, &bundle)?;
    let StateSecret::Rlwe(secret) = &state.secret else {
        unreachable!()
    };
    let columns = db.row_width().div_ceil(CELL_BYTES);
    let mut worst = 0u64;
    for chunk in answer.payload[2..].chunks_exact(FULL_CT_BYTES).take(columns) {
        let ct = Ct1::from_bytes(chunk)?;
        let (_, noise) = decrypt_q1_with_noise(&secret.sk, &ct);
        worst = worst.max(noise);
    }
    let record = pir.extract(&state, &answer)?;
    Ok((record, worst))
}

/// q1 / (2t), the decryption noise budget at the response modulus.
pub fn noise_budget() -> u64 {
    Q1 / (2 * PLAINTEXT_MODULUS)
}
