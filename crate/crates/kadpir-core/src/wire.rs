//! Binary framing shared by every scheme.
//!
//! Both message kinds start with the same header: a 1-byte scheme id, the
//! declared row count and the row width as 4-byte big-endian integers. A
//! query bundle then carries two length-prefixed segments (key material and
//! query body); an answer carries a single length-prefixed payload segment.
//! All length prefixes are 4-byte big-endian.

use crate::error::{Error, Result};
use crate::scheme::SchemeId;

/// Query half of the wire protocol: client key material plus the encrypted
/// (or empty, for the trivial schemes) selection vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PirQueryBundle {
    pub scheme: SchemeId,
    /// Row count the client assumed when building the query. Servers with
    /// fewer rows answer as if the table were zero-padded up to this count.
    pub declared_rows: u32,
    /// Row width the client assumed, or 0 when the width is only known
    /// server-side (binned tables); the answer header carries the real one.
    pub row_width: u32,
    pub key_material: Vec<u8>,
    pub query_body: Vec<u8>,
}

/// Response half of the wire protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PirAnswer {
    pub scheme: SchemeId,
    pub declared_rows: u32,
    pub row_width: u32,
    pub payload: Vec<u8>,
}

fn put_segment(out: &mut Vec<u8>, seg: &[u8]) {
    out.extend_from_slice(&(seg.len() as u32).to_be_bytes());
    out.extend_from_slice(seg);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Malformed(format!(
                "truncated message: wanted {n} bytes at offset {}",
                self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn segment(&mut self) -> Result<&'a [u8]> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Malformed(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

impl PirQueryBundle {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + self.key_material.len() + self.query_body.len() + 8);
        out.push(self.scheme.as_byte());
        out.extend_from_slice(&self.declared_rows.to_be_bytes());
        out.extend_from_slice(&self.row_width.to_be_bytes());
        put_segment(&mut out, &self.key_material);
        put_segment(&mut out, &self.query_body);
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(buf);
        let scheme = SchemeId::from_byte(r.u8()?)?;
        let declared_rows = r.u32()?;
        let row_width = r.u32()?;
        let key_material = r.segment()?.to_vec();
        let query_body = r.segment()?.to_vec();
        r.finish()?;
        Ok(PirQueryBundle {
            scheme,
            declared_rows,
            row_width,
            key_material,
            query_body,
        })
    }

    pub fn serialized_len(&self) -> usize {
        13 + 8 + self.key_material.len() + self.query_body.len()
    }
}

impl PirAnswer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + self.payload.len() + 4);
        out.push(self.scheme.as_byte());
        out.extend_from_slice(&self.declared_rows.to_be_bytes());
        out.extend_from_slice(&self.row_width.to_be_bytes());
        put_segment(&mut out, &self.payload);
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(buf);
        let scheme = SchemeId::from_byte(r.u8()?)?;
        let declared_rows = r.u32()?;
        let row_width = r.u32()?;
        let payload = r.segment()?.to_vec();
        r.finish()?;
        Ok(PirAnswer {
            scheme,
            declared_rows,
            row_width,
            payload,
        })
    }

    pub fn serialized_len(&self) -> usize {
        13 + 4 + self.payload.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_roundtrip() {
        let b = PirQueryBundle {
            scheme: SchemeId::Paillier,
            declared_rows: 256,
            row_width: 2162,
            key_material: vec![1, 2, 3],
            query_body: vec![9; 70],
        };
        let bytes = b.to_bytes();
        assert_eq!(bytes.len(), b.serialized_len());
        assert_eq!(PirQueryBundle::from_bytes(&bytes).unwrap(), b);
    }

    #[test]
    fn truncation_is_malformed() {
        let b = PirAnswer {
            scheme: SchemeId::Trivial,
            declared_rows: 4,
            row_width: 10,
            payload: vec![7; 40],
        };
        let bytes = b.to_bytes();
        assert!(PirAnswer::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extended = bytes.clone();
        extended.push(0);
        assert!(PirAnswer::from_bytes(&extended).is_err());
    }

    #[test]
    fn unknown_scheme_byte_rejected() {
        let mut bytes = PirAnswer {
            scheme: SchemeId::Trivial,
            declared_rows: 1,
            row_width: 4,
            payload: vec![],
        }
        .to_bytes();
        bytes[0] = 0xee;
        assert!(PirAnswer::from_bytes(&bytes).is_err());
    }
}
