//! Trivial PIR baselines: the server ships the table and the client reads
//! its row locally. `trivial-s` is wired identically; it exists as a
//! separate tag because the layer above feeds it robustly encrypted rows,
//! which turns "ship everything" into a symmetric-PIR baseline.

use rand::RngCore;

use crate::database::{decode_record, PirDatabase};
use crate::error::{Error, Result};
use crate::scheme::{
    check_query_args, check_respond_args, ClientState, PirScheme, SchemeId, StateSecret,
};
use crate::wire::{PirAnswer, PirQueryBundle};

const MODE_ZERO_PAD: u8 = 0;
const MODE_REPLICATE_LAST: u8 = 1;

pub struct TrivialPir {
    id: SchemeId,
}

impl TrivialPir {
    pub const fn new(id: SchemeId) -> Self {
        TrivialPir { id }
    }

    fn answer(&self, db: &PirDatabase, bundle: &PirQueryBundle, mode: u8) -> Result<PirAnswer> {
        check_respond_args(db, bundle)?;
        let mut payload = Vec::with_capacity(1 + db.rows() * db.row_width());
        payload.push(mode);
        for i in 0..db.rows() {
            payload.extend_from_slice(db.padded_row(i));
        }
        Ok(PirAnswer {
            scheme: self.id,
            declared_rows: bundle.declared_rows,
            row_width: db.row_width() as u32,
            payload,
        })
    }
}

impl PirScheme for TrivialPir {
    fn id(&self) -> SchemeId {
        self.id
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
        _rng: &mut dyn RngCore,
    ) -> Result<(ClientState, PirQueryBundle)> {
        check_query_args(index, rows)?;
        let state = ClientState {
            scheme: self.id,
            index,
            declared_rows: rows,
            row_width,
            secret: StateSecret::Plain,
        };
        let bundle = PirQueryBundle {
            scheme: self.id,
            declared_rows: rows as u32,
            row_width: row_width as u32,
            key_material: Vec::new(),
            query_body: Vec::new(),
        };
        Ok((state, bundle))
    }

    fn respond(&self, db: &PirDatabase, bundle: &PirQueryBundle) -> Result<PirAnswer> {
        self.answer(db, bundle, MODE_ZERO_PAD)
    }

    fn respond_clamped(&self, db: &PirDatabase, bundle: &PirQueryBundle) -> Result<PirAnswer> {
        self.answer(db, bundle, MODE_REPLICATE_LAST)
    }

    fn extract(&self, state: &ClientState, answer: &PirAnswer) -> Result<Vec<u8>> {
        if answer.scheme != self.id {
            return Err(Error::SchemeMismatch {
                state: state.scheme,
                message: answer.scheme,
            });
        }
        let width = answer.row_width as usize;
        if width == 0 || answer.payload.is_empty() || (answer.payload.len() - 1) % width != 0 {
            return Err(Error::Malformed("trivial payload is not whole rows".into()));
        }
        let mode = answer.payload[0];
        let rows = (answer.payload.len() - 1) / width;
        let index = match mode {
            MODE_ZERO_PAD => {
                if state.index >= rows {
                    // Row sits in the zero padding the server elided.
                    return Ok(Vec::new());
                }
                state.index
            }
            MODE_REPLICATE_LAST => state.index.min(rows - 1),
            other => return Err(Error::Malformed(format!("unknown trivial mode {other}"))),
        };
        decode_record(&answer.payload[1 + index * width..1 + (index + 1) * width])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme;

    fn db() -> PirDatabase {
        PirDatabase::new((0..10u8).map(|i| vec![i; 3]).collect(), 6).unwrap()
    }

    #[test]
    fn roundtrip() {
        let db = db();
        let mut rng = rand::rng();
        let (st, q) = scheme::query(SchemeId::Trivial, 5, 10, 6, &mut rng).unwrap();
        // Nothing index-dependent leaves the client.
        assert!(q.query_body.is_empty() && q.key_material.is_empty());
        let ans = scheme::respond(&db, &q).unwrap();
        // The payload is the whole serialized table.
        assert_eq!(ans.payload.len(), 1 + 10 * 6);
        assert_eq!(scheme::extract(&st, &ans).unwrap(), vec![5; 3]);
    }

    #[test]
    fn zero_pad_rows_extract_empty() {
        let db = db();
        let mut rng = rand::rng();
        let (st, q) = scheme::query(SchemeId::Trivial, 12, 16, 6, &mut rng).unwrap();
        let ans = scheme::respond(&db, &q).unwrap();
        assert_eq!(scheme::extract(&st, &ans).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn clamped_returns_last_row() {
        let db = db();
        let mut rng = rand::rng();
        let (st, q) = scheme::query(SchemeId::Trivial, 200, 256, 6, &mut rng).unwrap();
        let ans = scheme::respond_clamped(&db, &q).unwrap();
        assert_eq!(scheme::extract(&st, &ans).unwrap(), vec![9; 3]);
    }
}
