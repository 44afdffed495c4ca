//! Record model shared by every scheme.
//!
//! A database is an ordered list of equally wide rows. Each row carries one
//! record framed as a 2-byte big-endian length prefix followed by the record
//! bytes and zero padding, so extraction can strip padding without any side
//! channel on the record length.

use crate::error::{Error, Result};

pub const RECORD_PREFIX_BYTES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PirDatabase {
    rows: Vec<Vec<u8>>,
    row_width: usize,
}

impl PirDatabase {
    /// Builds a database with every record padded to `row_width` bytes.
    pub fn new(records: Vec<Vec<u8>>, row_width: usize) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        let rows = records
            .iter()
            .map(|r| encode_record(r, row_width))
            .collect::<Result<Vec<_>>>()?;
        Ok(PirDatabase { rows, row_width })
    }

    /// Builds a database sized to its widest record.
    pub fn from_records(records: Vec<Vec<u8>>) -> Result<Self> {
        let width = records.iter().map(Vec::len).max().unwrap_or(0) + RECORD_PREFIX_BYTES;
        Self::new(records, width)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row_width(&self) -> usize {
        self.row_width
    }

    pub fn padded_row(&self, index: usize) -> &[u8] {
        &self.rows[index]
    }

    pub fn record(&self, index: usize) -> Result<Vec<u8>> {
        decode_record(&self.rows[index])
    }

    /// Virtual table used by the replicate-last response path: the same rows,
    /// with every index at or beyond the real row count mapped to the last
    /// row. Only the reference implementation materializes this; schemes
    /// override it with a homomorphic fold.
    pub fn replicate_last_to(&self, total_rows: usize) -> Result<PirDatabase> {
        if total_rows < self.rows() {
            return Err(Error::DeclaredRowsTooSmall {
                db_rows: self.rows(),
                declared: total_rows,
            });
        }
        let mut rows = self.rows.clone();
        let last = self.rows.last().expect("non-empty").clone();
        rows.resize(total_rows, last);
        Ok(PirDatabase {
            rows,
            row_width: self.row_width,
        })
    }
}

pub fn encode_record(record: &[u8], row_width: usize) -> Result<Vec<u8>> {
    if record.len() + RECORD_PREFIX_BYTES > row_width || record.len() > u16::MAX as usize {
        return Err(Error::RecordTooLong {
            len: record.len(),
            row_width,
        });
    }
    let mut row = Vec::with_capacity(row_width);
    row.extend_from_slice(&(record.len() as u16).to_be_bytes());
    row.extend_from_slice(record);
    row.resize(row_width, 0);
    Ok(row)
}

pub fn decode_record(row: &[u8]) -> Result<Vec<u8>> {
    if row.len() < RECORD_PREFIX_BYTES {
        return Err(Error::Malformed("row shorter than its length prefix".into()));
    }
    let len = u16::from_be_bytes([row[0], row[1]]) as usize;
    if RECORD_PREFIX_BYTES + len > row.len() {
        return Err(Error::DecryptionFailure(format!(
            "record length {len} exceeds row capacity {}",
            row.len() - RECORD_PREFIX_BYTES
        )));
    }
    Ok(row[RECORD_PREFIX_BYTES..RECORD_PREFIX_BYTES + len].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_and_strip() {
        let db = PirDatabase::new(vec![vec![1, 2, 3], vec![], vec![9; 7]], 9).unwrap();
        assert_eq!(db.rows(), 3);
        assert_eq!(db.padded_row(0).len(), 9);
        assert_eq!(db.record(0).unwrap(), vec![1, 2, 3]);
        assert_eq!(db.record(1).unwrap(), Vec::<u8>::new());
        assert_eq!(db.record(2).unwrap(), vec![9; 7]);
    }

    #[test]
    fn record_too_long() {
        assert!(PirDatabase::new(vec![vec![0; 8]], 9).is_err());
        assert!(PirDatabase::new(vec![vec![0; 7]], 9).is_ok());
    }

    #[test]
    fn empty_database_rejected() {
        assert!(PirDatabase::new(vec![], 8).is_err());
    }

    #[test]
    fn replicate_last() {
        let db = PirDatabase::new(vec![vec![1], vec![2]], 4).unwrap();
        let rep = db.replicate_last_to(5).unwrap();
        assert_eq!(rep.rows(), 5);
        for i in 1..5 {
            assert_eq!(rep.record(i).unwrap(), vec![2]);
        }
        assert!(db.replicate_last_to(1).is_err());
    }
}
