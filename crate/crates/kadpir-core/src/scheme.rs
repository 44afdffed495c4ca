//! The scheme contract and the runtime registry.
//!
//! Every PIR variant implements [`PirScheme`] and is reachable through
//! [`scheme`] by id or [`scheme_by_name`] by its CLI name, so callers select
//! a protocol at runtime without caring what sits behind it.

use rand::RngCore;
use std::fmt;

use crate::database::PirDatabase;
use crate::error::{Error, Result};
use crate::paillier::{PaillierPir, PaillierStateSecret};
use crate::rlwe::{KeyVariant, RlwePir, RlweStateSecret};
use crate::trivial::TrivialPir;
use crate::wire::{PirAnswer, PirQueryBundle};

/// Wire tag for each scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum SchemeId {
    /// The server ships the whole table.
    Trivial = 0,
    /// Trivial symmetric PIR: the whole table is shipped, but rows are
    /// robustly encrypted by the layer above, so the client learns only what
    /// it can decrypt.
    TrivialSym = 1,
    /// Additively homomorphic Paillier with seed-compressed masked queries.
    Paillier = 2,
    /// RLWE with one automorphism key per expansion level.
    RlweLogN = 3,
    /// RLWE with the three-generator key set.
    Rlwe3 = 4,
    /// RLWE with the two-generator key set.
    Rlwe2 = 5,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::Trivial,
        SchemeId::TrivialSym,
        SchemeId::Paillier,
        SchemeId::RlweLogN,
        SchemeId::Rlwe3,
        SchemeId::Rlwe2,
    ];

    pub fn as_byte(self) -> u8 {
        self as u8
    }

    pub fn from_byte(b: u8) -> Result<SchemeId> {
        Self::ALL
            .into_iter()
            .find(|s| s.as_byte() == b)
            .ok_or_else(|| Error::Malformed(format!("unknown scheme id {b}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Trivial => "trivial",
            SchemeId::TrivialSym => "trivial-s",
            SchemeId::Paillier => "paillier",
            SchemeId::RlweLogN => "rlwe-logn",
            SchemeId::Rlwe3 => "rlwe3",
            SchemeId::Rlwe2 => "rlwe2",
        }
    }

    pub fn from_name(name: &str) -> Option<SchemeId> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-query client secrets. Deliberately not serializable: state never
/// crosses the wire.
pub(crate) enum StateSecret {
    Plain,
    Paillier(PaillierStateSecret),
    Rlwe(RlweStateSecret),
}

/// Everything the client keeps between issuing a query and extracting the
/// answer: the queried index and the scheme secrets.
pub struct ClientState {
    pub(crate) scheme: SchemeId,
    pub(crate) index: usize,
    pub(crate) declared_rows: usize,
    pub(crate) row_width: usize,
    pub(crate) secret: StateSecret,
}

impl ClientState {
    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn declared_rows(&self) -> usize {
        self.declared_rows
    }
}

impl fmt::Debug for ClientState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClientState")
            .field("scheme", &self.scheme)
            .field("index", &self.index)
            .field("declared_rows", &self.declared_rows)
            .finish_non_exhaustive()
    }
}

/// The protocol triple every scheme provides, plus the replicate-last
/// response used by private peer routing.
pub trait PirScheme: Send + Sync {
    fn id(&self) -> SchemeId;

    /// Checks (rows, row_width) against the scheme's limits.
    fn supports(&self, rows: usize, row_width: usize) -> Result<()>;

    /// Builds a query for `index` over a table of `rows` rows. `row_width`
    /// may be 0 when only the server knows the width.
    fn query(
        &self,
        index: usize,
        rows: usize,
        row_width: usize,
        rng: &mut dyn RngCore,
    ) -> Result<(ClientState, PirQueryBundle)>;

    /// Answers a query. Tables smaller than the declared row count are
    /// treated as zero-padded so the true row count never shows through a
    /// rejection.
    fn respond(&self, db: &PirDatabase, query: &PirQueryBundle) -> Result<PirAnswer>;

    /// Answers as if every row index at or beyond `db.rows()` held a copy of
    /// the last row. The default materializes the replicated table; schemes
    /// with homomorphic queries override it by folding the tail of the
    /// encrypted indicator onto the last row.
    fn respond_clamped(&self, db: &PirDatabase, query: &PirQueryBundle) -> Result<PirAnswer> {
        let replicated = db.replicate_last_to(query.declared_rows as usize)?;
        self.respond(&replicated, query)
    }

    /// Recovers the queried record.
    fn extract(&self, state: &ClientState, answer: &PirAnswer) -> Result<Vec<u8>>;
}

static TRIVIAL: TrivialPir = TrivialPir::new(SchemeId::Trivial);
static TRIVIAL_SYM: TrivialPir = TrivialPir::new(SchemeId::TrivialSym);
static PAILLIER: PaillierPir = PaillierPir::new();
static RLWE_LOGN: RlwePir = RlwePir::new(KeyVariant::LogN);
static RLWE3: RlwePir = RlwePir::new(KeyVariant::Three);
static RLWE2: RlwePir = RlwePir::new(KeyVariant::Two);

/// Looks a scheme up by id.
pub fn scheme(id: SchemeId) -> &'static dyn PirScheme {
    match id {
        SchemeId::Trivial => &TRIVIAL,
        SchemeId::TrivialSym => &TRIVIAL_SYM,
        SchemeId::Paillier => &PAILLIER,
        SchemeId::RlweLogN => &RLWE_LOGN,
        SchemeId::Rlwe3 => &RLWE3,
        SchemeId::Rlwe2 => &RLWE2,
    }
}

/// Looks a scheme up by the name used in CLI flags and config files.
pub fn scheme_by_name(name: &str) -> Option<&'static dyn PirScheme> {
    SchemeId::from_name(name).map(scheme)
}

/// Iterates over every registered scheme.
pub fn all_schemes() -> impl Iterator<Item = &'static dyn PirScheme> {
    SchemeId::ALL.into_iter().map(scheme)
}

pub fn query(
    id: SchemeId,
    index: usize,
    rows: usize,
    row_width: usize,
    rng: &mut dyn RngCore,
) -> Result<(ClientState, PirQueryBundle)> {
    scheme(id).query(index, rows, row_width, rng)
}

pub fn respond(db: &PirDatabase, bundle: &PirQueryBundle) -> Result<PirAnswer> {
    scheme(bundle.scheme).respond(db, bundle)
}

pub fn respond_clamped(db: &PirDatabase, bundle: &PirQueryBundle) -> Result<PirAnswer> {
    scheme(bundle.scheme).respond_clamped(db, bundle)
}

pub fn extract(state: &ClientState, answer: &PirAnswer) -> Result<Vec<u8>> {
    if state.scheme != answer.scheme {
        return Err(Error::SchemeMismatch {
            state: state.scheme,
            message: answer.scheme,
        });
    }
    scheme(state.scheme).extract(state, answer)
}

/// Shared argument validation for `query` implementations.
pub(crate) fn check_query_args(index: usize, rows: usize) -> Result<()> {
    if rows == 0 {
        return Err(Error::EmptyDatabase);
    }
    if index >= rows {
        return Err(Error::IndexOutOfRange { index, rows });
    }
    Ok(())
}

/// Shared validation for `respond` implementations. Returns the declared row
/// count as usize.
pub(crate) fn check_respond_args(db: &PirDatabase, bundle: &PirQueryBundle) -> Result<usize> {
    let declared = bundle.declared_rows as usize;
    if db.rows() > declared {
        return Err(Error::DeclaredRowsTooSmall {
            db_rows: db.rows(),
            declared,
        });
    }
    if bundle.row_width != 0 && bundle.row_width as usize != db.row_width() {
        return Err(Error::Malformed(format!(
            "query assumed row width {}, table has {}",
            bundle.row_width,
            db.row_width()
        )));
    }
    Ok(declared)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for id in SchemeId::ALL {
            assert_eq!(SchemeId::from_name(id.name()), Some(id));
            assert_eq!(SchemeId::from_byte(id.as_byte()).unwrap(), id);
            assert_eq!(scheme(id).id(), id);
        }
        assert!(SchemeId::from_name("nope").is_none());
        assert!(SchemeId::from_byte(77).is_err());
    }
}
