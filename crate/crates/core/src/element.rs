//! Stream items and their objective-specific payloads.

use std::fmt;

use crate::scalar::Scalar;

/// Identifier of an interned keyword. The string form lives in a
/// [`Vocabulary`](crate::harness::Vocabulary).
pub type KeywordId = u32;

/// A tweet-like item: a set of keywords sharing one score.
#[derive(Clone, Debug, PartialEq)]
pub struct KeywordBag<T> {
    /// Sorted, duplicate-free keyword ids.
    pub keywords: Vec<KeywordId>,
    /// Score credited to every keyword of the bag.
    pub value: T,
}

impl<T: Scalar> KeywordBag<T> {
    /// Builds a bag, sorting and de-duplicating the keywords.
    pub fn new(mut keywords: Vec<KeywordId>, value: T) -> Self {
        keywords.sort_unstable();
        keywords.dedup();
        KeywordBag { keywords, value }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingVector<T> {
    pub coords: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedItem<T> {
    pub weight: T,
}

/// Universe items covered by one element of a coverage instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageSet {
    /// Sorted, duplicate-free universe ids.
    pub covered: Vec<u32>,
}

impl CoverageSet {
    pub fn new(mut covered: Vec<u32>) -> Self {
        covered.sort_unstable();
        covered.dedup();
        CoverageSet { covered }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload<T> {
    Keywords(KeywordBag<T>),
    Embedding(EmbeddingVector<T>),
    Weighted(WeightedItem<T>),
    Coverage(CoverageSet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PayloadKind {
    Keywords,
    Embedding,
    Weighted,
    Coverage,
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PayloadKind::Keywords => "keywords",
            PayloadKind::Embedding => "embedding",
            PayloadKind::Weighted => "weighted",
            PayloadKind::Coverage => "coverage",
        };
        f.write_str(name)
    }
}

impl<T> Payload<T> {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Keywords(_) => PayloadKind::Keywords,
            Payload::Embedding(_) => PayloadKind::Embedding,
            Payload::Weighted(_) => PayloadKind::Weighted,
            Payload::Coverage(_) => PayloadKind::Coverage,
        }
    }
}

/// One item of a ground set or stream.
///
/// `source` names the stream the element arrives on in multi-source runs; it
/// plays no role in objective evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Element<T> {
    pub id: u64,
    pub source: u32,
    pub payload: Payload<T>,
}

impl<T: Scalar> Element<T> {
    pub fn new(id: u64, payload: Payload<T>) -> Self {
        Element { id, source: 0, payload }
    }

    pub fn with_source(mut self, source: u32) -> Self {
        self.source = source;
        self
    }

    pub fn weighted(id: u64, weight: T) -> Self {
        Element::new(id, Payload::Weighted(WeightedItem { weight }))
    }

    pub fn keywords(id: u64, keywords: Vec<KeywordId>, value: T) -> Self {
        Element::new(id, Payload::Keywords(KeywordBag::new(keywords, value)))
    }

    pub fn embedding(id: u64, coords: Vec<T>) -> Self {
        Element::new(id, Payload::Embedding(EmbeddingVector { coords }))
    }

    pub fn coverage(id: u64, covered: Vec<u32>) -> Self {
        Element::new(id, Payload::Coverage(CoverageSet::new(covered)))
    }

    pub fn kind(&self) -> PayloadKind {
        self.payload.kind()
    }
}
